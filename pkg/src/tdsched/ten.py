"""Label setting on a (fully or partially) time-expanded network.

A network has one vertex per (activity, grid start time) and an implicit edge
from (i, t) to (i+1, t') whenever t' is not before the completion of activity
i started at t. Labels carry the minimal cumulative resource consumption
before starting an activity at a time; the solver settles vertices best-first
by a completion-time lower bound and stops at the first vertex of the last
activity, which by the FIFO property is the minimal completion.

The same vertex store backs the fully expanded oracle and the partially
expanded networks of the refinement loop; partial networks additionally keep
per-vertex consumption lower bounds that under-estimate every start time up
to the next stored vertex.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Optional

from .model import Problem, Schedule
from .pwl import Scalar


@dataclass
class SolveStats:
    """Counters reported by the solvers and serialized into bench reports."""

    iterations: int = 0
    vertices_created: int = 0
    vertices_preloaded: int = 0
    labels_settled: int = 0
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "vertices_created": self.vertices_created,
            "vertices_preloaded": self.vertices_preloaded,
            "labels_settled": self.labels_settled,
            "wall_time": self.wall_time,
        }


class Network:
    """Sorted per-activity vertex times with consumption bounds q.

    ``q[i][t]`` is a lower bound on the consumption of activity i for any
    start time in [t, next stored time); on a full expansion it is simply the
    consumption at t. ``static_lb[i]`` is the sum over later activities of
    the minimal duration anywhere in their windows, used as an admissible
    completion-time bound for vertex selection.
    """

    __slots__ = ("problem", "times", "q", "static_lb", "created", "_theta")

    def __init__(self, problem: Problem):
        if not problem.tight:
            raise ValueError("network construction needs a tightened problem")
        self.problem = problem
        n = problem.n
        self.times: list[list[Scalar]] = [[] for _ in range(n)]
        self.q: list[dict] = [{} for _ in range(n)]
        lb: Scalar = 0
        suffix = [0] * n
        for i in range(n - 1, 0, -1):
            a = problem.activities[i]
            lb = lb + a.duration.min_on_interval(a.earliest, a.latest)
            suffix[i - 1] = lb
        self.static_lb = suffix
        self.created = 0
        self._theta: dict = {}

    def vertex_count(self) -> int:
        return sum(len(ts) for ts in self.times)

    def has_vertex(self, i: int, t: Scalar) -> bool:
        return t in self.q[i]

    def insert(self, i: int, t: Scalar):
        bisect.insort(self.times[i], t)
        self.created += 1

    def next_time(self, i: int, t: Scalar) -> Optional[Scalar]:
        ts = self.times[i]
        k = bisect.bisect_right(ts, t)
        return ts[k] if k < len(ts) else None

    def prev_time(self, i: int, t: Scalar) -> Optional[Scalar]:
        ts = self.times[i]
        k = bisect.bisect_left(ts, t)
        return ts[k - 1] if k > 0 else None

    def theta(self, i: int, t: Scalar) -> Scalar:
        key = (i, t)
        v = self._theta.get(key)
        if v is None:
            v = self.problem.activities[i].completion(t)
            self._theta[key] = v
        return v

    def selection_key(self, i: int, t: Scalar) -> Scalar:
        return self.theta(i, t) + self.static_lb[i]

    def audit_consumption_bounds(self):
        """Recompute every q from scratch and compare (debug aid)."""
        p = self.problem
        for i, a in enumerate(p.activities):
            ts = self.times[i]
            if not ts:
                raise AssertionError(f"activity {i} has no vertices")
            if ts[0] != a.earliest or ts[-1] != a.latest:
                raise AssertionError(f"activity {i} misses a window-boundary vertex")
            for k, t in enumerate(ts):
                if t == a.latest:
                    expect = a.consumption(t)
                else:
                    expect = a.consumption.min_on_grid(t, ts[k + 1], p.eps)
                if self.q[i][t] != expect:
                    raise AssertionError(
                        f"q[{i}][{t}] = {self.q[i][t]}, recomputation gives {expect}")


def full_expand(problem: Problem) -> Network:
    """Network with every grid start time and exact consumption values."""
    net = Network(problem)
    eps = problem.eps
    for i, a in enumerate(problem.activities):
        t = a.earliest
        ts = []
        qd = net.q[i]
        while t <= a.latest:
            ts.append(t)
            qd[t] = a.consumption(t)
            t = t + eps
        net.times[i] = ts
        net.created += len(ts)
    return net


@dataclass
class LabelResult:
    """Outcome of one label-setting pass over a network."""

    schedule: Optional[Schedule]
    path: Optional[list]
    settled: int
    keys_monotone: bool = True


def solve(net: Network, audit: bool = False) -> LabelResult:
    """Best-first label setting for the problem without replenishments.

    Vertices re-enter the queue whenever their label decreases (lazy
    deletion); entries popped while the capacity filter fails are dropped,
    which is safe because every label decrease pushes a fresh entry.
    """
    p = net.problem
    n = p.n
    cap = p.capacity
    ell: list[dict] = [{} for _ in range(n)]
    pred: dict = {}
    settled: list[set] = [set() for _ in range(n)]
    heap: list = []
    for t in net.times[0]:
        ell[0][t] = 0
        heappush(heap, (net.selection_key(0, t), 0, t))
    nsettled = 0
    last_key = None
    monotone = True
    while heap:
        key, i, t = heappop(heap)
        if t in settled[i]:
            continue
        load = ell[i].get(t)
        if load is None or load + net.q[i][t] > cap:
            continue
        if last_key is not None and key < last_key:
            monotone = False
        last_key = key
        settled[i].add(t)
        nsettled += 1
        if audit:
            _audit_settled_label(net, ell, i, t)
        if i == n - 1:
            path = _walk_back(pred, i, t)
            schedule = Schedule.build(p, [t_ for _, t_ in path])
            return LabelResult(schedule, path, nsettled, monotone)
        total = load + net.q[i][t]
        theta = net.theta(i, t)
        nxt = net.times[i + 1]
        for t2 in nxt[bisect.bisect_left(nxt, theta):]:
            if t2 in settled[i + 1]:
                continue
            cur = ell[i + 1].get(t2)
            if cur is None or total < cur:
                ell[i + 1][t2] = total
                pred[(i + 1, t2)] = (i, t)
                heappush(heap, (net.selection_key(i + 1, t2), i + 1, t2))
    return LabelResult(None, None, nsettled, monotone)


def _walk_back(pred: dict, i: int, t: Scalar) -> list:
    path = [(i, t)]
    while (i, t) in pred:
        i, t = pred[(i, t)]
        path.append((i, t))
    path.reverse()
    if path[0][0] != 0:
        raise AssertionError("path reconstruction did not reach the first activity")
    return path


def _audit_settled_label(net: Network, ell: list, i: int, t: Scalar):
    """Check that the settled label is the true minimum over predecessor paths."""
    p = net.problem
    best: dict = {ts: 0 for ts in net.times[0]}
    for j in range(i):
        nxt: dict = {}
        for tj, lj in best.items():
            reach = lj + net.q[j][tj]
            theta = net.theta(j, tj)
            for t2 in net.times[j + 1]:
                if t2 >= theta and (t2 not in nxt or reach < nxt[t2]):
                    nxt[t2] = reach
        best = nxt
    if t not in best or best[t] != ell[i][t]:
        raise AssertionError(
            f"label of ({i},{t}) is {ell[i][t]}, enumeration gives {best.get(t)}")


def solve_problem(problem: Problem) -> Optional[Schedule]:
    """Exact solve on the fully expanded network (the oracle path)."""
    return solve(full_expand(problem)).schedule
