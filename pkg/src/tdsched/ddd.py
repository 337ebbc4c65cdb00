"""Refinement of partially expanded networks.

Instead of materializing every grid start time, the solver keeps a small
vertex set satisfying three structural properties: window boundaries are
present, the rounded-up completion successor of every vertex is present, and
each vertex carries the minimum consumption over the grid gap up to the next
vertex. Solving on such a network yields a lower bound; whenever the bound
understates the true consumption at a solution vertex, one new vertex is
inserted between that vertex and its successor, chosen by halving the gap
until the remaining range certifies a strict increase of the bound. The loop
stops when the solution path's bounds are exact, which certifies optimality
for the grid-discretized problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from time import perf_counter
from typing import Optional

from .model import Problem, ReplenishMode, Schedule
from .pwl import Scalar, grid_ceil
from .ten import Network, SolveStats, solve as ten_solve

PartialNetwork = Network


def add_recursive(net: Network, i: int, t: Scalar):
    """Insert (i, t), restore the consumption bounds around it, and insert
    the completion successor of the new vertex in the next activity.

    No-op when the vertex exists. The recursion stops at the last activity
    and, because a required replenishment invalidates the plain completion
    successor, at activities whose replenishment is required.
    """
    p = net.problem
    a = p.activities[i]
    if not (a.earliest <= t <= a.latest) or (t - a.earliest) % p.eps != 0:
        raise ValueError(f"vertex ({i}, {t}) off-grid or outside the window")
    if net.has_vertex(i, t):
        return
    net.insert(i, t)
    eps = p.eps
    t_next = net.next_time(i, t)
    if t_next is None:
        net.q[i][t] = a.consumption(t)
    else:
        net.q[i][t] = a.consumption.min_on_grid(t, t_next, eps)
    t_prev = net.prev_time(i, t)
    if t_prev is not None:
        net.q[i][t_prev] = a.consumption.min_on_grid(t_prev, t, eps)
    if i == p.n - 1 or a.mode is ReplenishMode.REQUIRED:
        return
    succ = grid_ceil(net.theta(i, t), eps)
    e_next = p.activities[i + 1].earliest
    if succ < e_next:
        succ = e_next
    add_recursive(net, i + 1, succ)


def initialise(problem: Problem) -> Network:
    """Partial network seeded with both window boundaries of every activity,
    added last activity first so each recursive successor finds its
    boundaries already present."""
    net = Network(problem)
    for i in range(problem.n - 1, -1, -1):
        add_recursive(net, i, problem.activities[i].latest)
        add_recursive(net, i, problem.activities[i].earliest)
    return net


def preload(net: Network, path) -> int:
    """Seed a network with a previous solution path plus grid successors.

    Adding the successor of each path vertex pins that vertex's consumption
    bound to the exact consumption. Entries outside the current windows (or
    off-grid) are skipped, so paths from related problems can be reused.
    Returns the number of vertices this added.
    """
    before = net.created
    p = net.problem
    for i, t in path:
        if not (0 <= i < p.n):
            continue
        a = p.activities[i]
        if not (a.earliest <= t <= a.latest) or (t - a.earliest) % p.eps != 0:
            continue
        add_recursive(net, i, t)
        succ = t + p.eps
        if succ <= a.latest:
            add_recursive(net, i, succ)
    return net.created - before


@dataclass
class DddResult:
    schedule: Optional[Schedule]
    stats: SolveStats
    lower_bounds: list = field(default_factory=list)
    path: Optional[list] = None
    network: Optional[Network] = None

    @property
    def feasible(self) -> bool:
        return self.schedule is not None


def solve(problem: Problem, *, refine_all: bool = False, preload_path=None,
          audit: bool = False, strict_overwrite: bool = False) -> DddResult:
    """Refine-and-resolve loop; exact for the grid-discretized problem.

    Dispatches to the replenishment-aware engine when any activity allows or
    requires replenishing. ``refine_all`` inserts one vertex per violated
    solution vertex each round instead of a single one. ``preload_path``
    seeds the network with a previous solution path.
    """
    if not problem.tight:
        raise ValueError("solve needs a tightened problem")
    t_start = perf_counter()
    net = initialise(problem)
    preloaded = preload(net, preload_path) if preload_path else 0
    if problem.has_replenishments:
        from .replen import solve_restricted

        def inner():
            return solve_restricted(net, strict_overwrite=strict_overwrite)
    else:
        def inner():
            return ten_solve(net, audit=audit)

    stats = SolveStats(vertices_preloaded=preloaded)
    bounds: list = []
    while True:
        res = inner()
        stats.iterations += 1
        stats.labels_settled += res.settled
        if res.schedule is None:
            stats.vertices_created = net.created - preloaded
            stats.wall_time = perf_counter() - t_start
            return DddResult(None, stats, bounds, None, net)
        bound = res.schedule.completion
        if bounds and bound < bounds[-1]:
            raise AssertionError(
                f"restricted completion dropped from {bounds[-1]} to {bound}")
        bounds.append(bound)
        if audit:
            net.audit_consumption_bounds()
        violated = [(i, t) for i, t in res.path
                    if problem.activities[i].consumption(t) > net.q[i][t]]
        if not violated:
            stats.vertices_created = net.created - preloaded
            stats.wall_time = perf_counter() - t_start
            return DddResult(res.schedule, stats, bounds, res.path, net)
        for i, t_i in violated if refine_all else violated[:1]:
            _refine(net, problem, i, t_i)


def _refine(net: Network, problem: Problem, i: int, t_i: Scalar):
    """Insert one vertex that strictly raises the consumption bound at (i, t_i)."""
    rho = problem.activities[i].consumption
    q_now = net.q[i][t_i]
    if rho(t_i) <= q_now:
        return  # already repaired by a recursive insertion this round
    eps = problem.eps
    t = net.next_time(i, t_i)
    # the current bound is the minimum over the whole gap, so halving must
    # run at least once before the remaining range can certify an increase
    while True:
        t = (-((-(t_i + t)) // (2 * eps))) * eps
        if rho.min_on_grid(t_i, t, eps) > q_now:
            break
    add_recursive(net, i, t)
