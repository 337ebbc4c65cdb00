"""Label setting with replenishments on a partially expanded network.

When a vertex (i, t) is settled, the earliest time the next activity could
start after fully restoring the resource is the completion of i plus the
restoration time for the consumption accumulated so far, rounded up to the
grid. A vertex at that time is inserted on the fly; labels of earlier
successor vertices relax as usual without replenishing, while labels at or
after it reset to zero through a replenished arc. Per-activity restrictions
push the replenishment time past the successor window (forbidden) or skip
the no-replenishment relaxation entirely (required).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Optional

from .ddd import add_recursive
from .model import Problem, ReplenishMode, Schedule
from .pwl import Scalar, grid_ceil
from .ten import LabelResult, Network, full_expand


@dataclass(frozen=True)
class ReplenishmentRules:
    """Per-activity solver behavior derived from the replenishment modes."""

    forbidden_after: frozenset
    required_after: frozenset


def apply_restrictions(problem: Problem) -> ReplenishmentRules:
    forbidden = []
    required = []
    for i, a in enumerate(problem.activities):
        if a.mode is ReplenishMode.FORBIDDEN:
            forbidden.append(i)
        elif a.mode is ReplenishMode.REQUIRED:
            required.append(i)
    return ReplenishmentRules(frozenset(forbidden), frozenset(required))


def solve_restricted(net: Network, strict_overwrite: bool = False) -> LabelResult:
    """Label setting with replenishment arcs, iterated to a stable vertex set.

    A single pass may grow the network: settling a vertex inserts the
    earliest post-replenishment vertex of the next activity, and that
    insertion recursively adds completion successors further down. Vertices
    born mid-pass miss the relaxations of already-settled predecessors, and
    an insertion can raise the consumption bound of a vertex that already
    propagated a smaller one. Re-running the pass until no insertion happens
    makes the final pass operate on a static network, where every relaxation
    sees every vertex and all bounds are final; only that pass's result is
    returned.

    With ``strict_overwrite`` a replenished arc overwrites the predecessor of
    every later non-settled vertex even when its label is already zero;
    the default keeps the earliest-selected predecessor in that case, which
    is objective-neutral because a zero label cannot improve.
    """
    total_settled = 0
    while True:
        before = net.created
        res = _label_pass(net, strict_overwrite)
        total_settled += res.settled
        if net.created == before:
            return LabelResult(res.schedule, res.path, total_settled,
                               res.keys_monotone)


def _label_pass(net: Network, strict_overwrite: bool) -> LabelResult:
    p = net.problem
    rules = apply_restrictions(p)
    n = p.n
    cap = p.capacity
    eps = p.eps
    ell: list[dict] = [{} for _ in range(n)]
    pred: dict = {}
    pred_replenished: dict = {}
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
        if i == n - 1:
            return _reconstruct(p, pred, pred_replenished, i, t, nsettled, monotone)
        act = p.activities[i]
        total = load + net.q[i][t]
        theta = net.theta(i, t)
        nxt_latest = p.activities[i + 1].latest

        t_star: Optional[Scalar] = None
        if i not in rules.forbidden_after:
            restore = act.replenish_duration(total)
            t_star = grid_ceil(theta + restore, eps)
            if t_star <= nxt_latest:
                # the window start vertex always exists; clamping keeps the
                # insertion inside the window while every vertex at or after
                # t_star still receives a zero label below
                add_recursive(net, i + 1, max(t_star, p.activities[i + 1].earliest))

        nxt = net.times[i + 1]
        if i not in rules.required_after:
            for t2 in nxt[bisect.bisect_left(nxt, theta):]:
                if t_star is not None and t2 >= t_star:
                    break
                if t2 in settled[i + 1]:
                    continue
                cur = ell[i + 1].get(t2)
                if cur is None or total < cur:
                    ell[i + 1][t2] = total
                    pred[(i + 1, t2)] = (i, t)
                    pred_replenished[(i + 1, t2)] = False
                    heappush(heap, (net.selection_key(i + 1, t2), i + 1, t2))
        if t_star is not None:
            for t2 in nxt[bisect.bisect_left(nxt, t_star):]:
                if t2 in settled[i + 1]:
                    continue
                cur = ell[i + 1].get(t2)
                if cur == 0 and not strict_overwrite and (i + 1, t2) in pred:
                    continue
                assert t2 >= theta + restore, "replenished arc lands too early"
                if cur is None or cur > 0:
                    heappush(heap, (net.selection_key(i + 1, t2), i + 1, t2))
                ell[i + 1][t2] = 0
                pred[(i + 1, t2)] = (i, t)
                pred_replenished[(i + 1, t2)] = True
    return LabelResult(None, None, nsettled, monotone)


def _reconstruct(p: Problem, pred: dict, pred_replenished: dict,
                 i: int, t: Scalar, nsettled: int, monotone: bool) -> LabelResult:
    path = [(i, t)]
    while (i, t) in pred:
        i, t = pred[(i, t)]
        path.append((i, t))
    path.reverse()
    if path[0][0] != 0:
        raise AssertionError("path reconstruction did not reach the first activity")
    times = [t_ for _, t_ in path]
    flags = [False] * p.n
    for idx in range(p.n - 1):
        flags[idx] = pred_replenished.get((idx + 1, times[idx + 1]), False)
    schedule = Schedule.build(p, times, flags)
    return LabelResult(schedule, path, nsettled, monotone)


def solve_full(problem: Problem, strict_overwrite: bool = False) -> Optional[Schedule]:
    """Exact solve on the full expansion (every refinement vertex already
    present, so the bounds are exact and one pass suffices)."""
    return solve_restricted(full_expand(problem), strict_overwrite=strict_overwrite).schedule


def solve_ddd_replen(problem: Problem, **kwargs):
    """Refinement loop with the replenishment-aware engine inside."""
    from .ddd import solve as ddd_solve

    if not problem.has_replenishments:
        raise ValueError("no activity allows a replenishment; use the plain solver")
    return ddd_solve(problem, **kwargs)
