"""Randomized small instances for the oracle-equivalence suites.

All generators take an explicit ``random.Random`` so every suite is
reproducible from a seed. Durations are integer-sloped piecewise-linear
functions (slopes >= -1, optional upward jumps), which keeps completion
times on the integer grid; consumptions are step functions. That matches
the regime the refinement solvers are validated in: exact arithmetic,
eps = 1, modest horizons.
"""

from __future__ import annotations

import random
from typing import Optional

from .model import Activity, InfeasibleProblem, Problem, ReplenishMode, tighten_windows
from .pwl import PwlFunction
from .ten import Network


def random_fifo_duration(rng: random.Random, horizon: int, max_value: int = 10) -> PwlFunction:
    """Integer-valued FIFO duration: slopes in {-1, 0, 1, 2}, upward jumps."""
    n_seg = rng.randint(1, 3)
    interior = sorted(rng.sample(range(1, horizon), min(n_seg, horizon - 1))) if horizon > 1 else []
    knots = [0, *interior, horizon]
    v = rng.randint(0, max_value)
    pts = [(0, v)]
    for k in range(1, len(knots)):
        dt = knots[k] - knots[k - 1]
        slope = rng.choice((-1, 0, 0, 1, 2))
        if slope == -1 and v - dt < 0:
            slope = 0
        v = v + slope * dt
        pts.append((knots[k], v))
        if k < len(knots) - 1 and rng.random() < 0.25:
            v = v + rng.randint(1, 4)  # upward jump keeps completion non-decreasing
            pts.append((knots[k], v))
    return PwlFunction(pts, extrapolate=True)


def random_step_consumption(rng: random.Random, horizon: int,
                            max_value: int = 9, non_decreasing: bool = False,
                            span: Optional[tuple] = None) -> PwlFunction:
    """1-4 constant levels; step times fall inside ``span`` when given, so
    the steps actually land inside the activity's start-time window."""
    n_steps = rng.randint(1, 4)
    lo, hi = span if span is not None else (0, horizon)
    lo = max(1, int(lo))
    hi = max(lo + 1, int(hi) + 1)
    population = range(lo, hi)
    count = min(n_steps - 1, len(population))
    interior = sorted(rng.sample(population, count)) if count > 0 else []
    levels = [rng.randint(0, max_value) for _ in range(len(interior) + 1)]
    if non_decreasing:
        levels.sort()
    return PwlFunction.from_steps(list(zip([0, *interior], levels)), end=horizon)


def random_replenish_duration(rng: random.Random, capacity: int) -> PwlFunction:
    if rng.random() < 0.5:
        return PwlFunction.constant(rng.randint(0, 8))
    n_steps = rng.randint(2, 3)
    hi = max(capacity, 2)
    interior = sorted(rng.sample(range(1, hi), min(n_steps - 1, hi - 1)))
    levels = sorted(rng.randint(0, 10) for _ in range(len(interior) + 1))
    return PwlFunction.from_steps(list(zip([0, *interior], levels)), end=hi)


def _random_windows(rng: random.Random, n: int, horizon: int) -> list:
    anchors = sorted(rng.randint(0, max(0, horizon - 1)) for _ in range(n))
    windows = []
    for a in anchors:
        width = rng.randint(0, max(1, horizon // 3))
        e = a
        l = min(horizon, a + width)
        windows.append((e, l))
    return windows


def random_problem(rng: random.Random, n_max: int = 8, horizon: int = 100,
                 non_decreasing_rho: bool = False,
                 capacity: Optional[int] = None,
                 n: Optional[int] = None) -> Problem:
    """Tightened instance without replenishments; retries until tightenable."""
    fixed_n = n
    while True:
        n = fixed_n if fixed_n is not None else rng.randint(1, n_max)
        windows = _random_windows(rng, n, horizon)
        acts = []
        for e, l in windows:
            acts.append(Activity(
                earliest=e, latest=l,
                duration=random_fifo_duration(rng, horizon),
                consumption=random_step_consumption(
                    rng, horizon, non_decreasing=non_decreasing_rho, span=(e, l)),
            ))
        cap = capacity if capacity is not None else rng.randint(1, 6 * n)
        try:
            return tighten_windows(Problem(tuple(acts), capacity=cap, eps=1))
        except InfeasibleProblem:
            continue


def random_replen_problem(rng: random.Random, n_max: int = 6, horizon: int = 60,
                  with_modes: bool = False,
                  capacity: Optional[int] = None,
                  n: Optional[int] = None) -> Problem:
    """Tightened instance with replenishments (and optional mode restrictions)."""
    fixed_n = n
    while True:
        n = fixed_n if fixed_n is not None else rng.randint(2, max(2, n_max))
        windows = _random_windows(rng, n, horizon)
        cap = capacity if capacity is not None else rng.randint(2, 5 * n)
        acts = []
        for k, (e, l) in enumerate(windows):
            if with_modes and k < n - 1:
                mode = rng.choice((
                    ReplenishMode.OPTIONAL, ReplenishMode.OPTIONAL,
                    ReplenishMode.OPTIONAL, ReplenishMode.FORBIDDEN,
                    ReplenishMode.REQUIRED))
            else:
                mode = ReplenishMode.OPTIONAL
            acts.append(Activity(
                earliest=e, latest=l,
                duration=random_fifo_duration(rng, horizon, max_value=6),
                consumption=random_step_consumption(rng, horizon, max_value=7,
                                                    span=(e, l)),
                replenish_duration=random_replenish_duration(rng, cap),
                mode=mode,
            ))
        try:
            return tighten_windows(Problem(tuple(acts), capacity=cap, eps=1))
        except InfeasibleProblem:
            continue


def random_network(rng: random.Random, problem: Problem,
                   max_vertices_per_activity: int = 12) -> Network:
    """Arbitrary sub-grid vertex sets with arbitrary consumption values.

    Used to exercise the label-setting engine on networks that need not
    satisfy the partial-expansion properties.
    """
    net = Network(problem)
    for i, a in enumerate(problem.activities):
        grid = []
        t = a.earliest
        while t <= a.latest:
            grid.append(t)
            t = t + problem.eps
        count = rng.randint(1, min(len(grid), max_vertices_per_activity))
        chosen = sorted(rng.sample(grid, count))
        net.times[i] = chosen
        net.created += count
        for t in chosen:
            net.q[i][t] = rng.randint(0, 9)
    return net


def random_prefix_extension(rng: random.Random, n_prefix: int = 4, extra: int = 2,
                            horizon: int = 80, replen: bool = False) -> tuple:
    """(prefix problem, extended problem) sharing the first activities.

    The extended problem is generated and tightened first; the prefix is its
    leading slice, which inherits tightness (the pairwise window invariants
    only couple consecutive activities).
    """
    if replen:
        full = random_replen_problem(rng, horizon=horizon, n=n_prefix + extra)
    else:
        full = random_problem(rng, horizon=horizon, n=n_prefix + extra)
    prefix = Problem(full.activities[:n_prefix], full.capacity, full.eps, tight=True)
    return prefix, full
