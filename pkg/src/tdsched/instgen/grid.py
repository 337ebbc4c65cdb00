"""Time-dependent shortest paths on the unit grid.

A vehicle moves between integer points: one unit horizontally or vertically,
sqrt(2) units diagonally. A step leaving point p at time t takes
distance * unit_time(p, t), so departures during peaks are slower. The
search is a forward label-setting over arrival times; the congestion profile
is rate-limited at construction so arrivals are non-decreasing in the
departure time and settled labels are final.

Everything here works in floats over continuous time; the scheduling grid
plays no role inside the generator.
"""

from __future__ import annotations

import math
from heapq import heappop, heappush
from typing import Optional

import numpy as np

from .field import CongestionField

SQRT2 = math.sqrt(2.0)
MOVES = (
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2),
)


class GridRouter:
    """Shortest-path searches over the integer grid spanned by ``bounds``."""

    def __init__(self, field: CongestionField, bounds: Optional[tuple] = None):
        self.field = field
        xmin, ymin, xmax, ymax = bounds if bounds is not None else field.bounds
        self.xmin = int(math.floor(xmin))
        self.ymin = int(math.floor(ymin))
        self.xmax = int(math.ceil(xmax))
        self.ymax = int(math.ceil(ymax))
        self.width = self.xmax - self.xmin + 1
        self.height = self.ymax - self.ymin + 1
        xs = np.arange(self.xmin, self.xmax + 1, dtype=float)
        ys = np.arange(self.ymin, self.ymax + 1, dtype=float)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        gamma = np.zeros_like(gx)
        two_sigma_sq = 2.0 * field.sigma * field.sigma
        for cx, cy in field.centers:
            np.maximum(gamma, np.exp(-((gx - cx) ** 2 + (gy - cy) ** 2) / two_sigma_sq),
                       out=gamma)
        # effective spatial factor, flattened in x-major order
        self.factor = np.minimum(field.cap, gamma).reshape(-1)

    def index(self, point: tuple) -> int:
        x, y = point
        if not (self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax):
            raise ValueError(f"point {point} outside the grid")
        return (int(x) - self.xmin) * self.height + (int(y) - self.ymin)

    def point(self, idx: int) -> tuple:
        x, r = divmod(idx, self.height)
        return (x + self.xmin, r + self.ymin)

    def search(self, source: tuple, t0: float, targets: Optional[list] = None):
        """Label-setting from ``source`` departing at ``t0``.

        Returns (arrival, pred) arrays over all grid indices; unreached
        entries are +inf / -1. With ``targets`` the search stops as soon as
        every target index is settled.
        """
        n = self.width * self.height
        arrival = np.full(n, np.inf)
        pred = np.full(n, -1, dtype=np.int64)
        src = self.index(source)
        arrival[src] = t0
        remaining = set(targets) if targets is not None else None
        if remaining is not None:
            remaining.discard(src)
        heap = [(t0, src)]
        settled = np.zeros(n, dtype=bool)
        tau_free = self.field.tau_free
        delta = self.field.delta
        factor = self.factor
        height = self.height
        width = self.width
        while heap:
            t, idx = heappop(heap)
            if settled[idx]:
                continue
            settled[idx] = True
            if remaining is not None:
                remaining.discard(idx)
                if not remaining:
                    break
            unit = tau_free / (1.0 - factor[idx] * delta(t))
            x, y = divmod(idx, height)
            for dx, dy, dist in MOVES:
                nx = x + dx
                ny = y + dy
                if not (0 <= nx < width and 0 <= ny < height):
                    continue
                nidx = nx * height + ny
                if settled[nidx]:
                    continue
                t2 = t + dist * unit
                if t2 < arrival[nidx]:
                    arrival[nidx] = t2
                    pred[nidx] = idx
                    heappush(heap, (t2, nidx))
        return arrival, pred

    def reconstruct(self, pred, target: tuple) -> list:
        """Point sequence source..target from a predecessor array."""
        idx = self.index(target)
        chain = [idx]
        while pred[idx] >= 0:
            idx = int(pred[idx])
            chain.append(idx)
        chain.reverse()
        return [self.point(i) for i in chain]

    def route(self, source: tuple, target: tuple, t0: float) -> tuple:
        """(arrival time, path) for one origin-destination pair."""
        tgt = self.index(target)
        arrival, pred = self.search(source, t0, targets=[tgt])
        if not np.isfinite(arrival[tgt]):
            raise RuntimeError(f"target {target} unreachable")  # cannot occur on a full grid
        return float(arrival[tgt]), self.reconstruct(pred, target)


def td_grid_shortest_path(source: tuple, target: tuple, t0: float,
                          field: CongestionField) -> tuple:
    """(arrival time, path) between two points; empty path when they match."""
    if tuple(source) == tuple(target):
        return float(t0), []
    router = GridRouter(field)
    return router.route(tuple(source), tuple(target), float(t0))


def energy_along_path(path: list, t0: float, field: CongestionField, curve) -> float:
    """Accumulate speed-dependent energy over a path's steps.

    Each step's speed is its distance over its duration, i.e. the reciprocal
    of the unit travel time at the step's origin and departure time.
    """
    if len(path) < 2:
        return 0.0
    t = float(t0)
    total = 0.0
    for (x1, y1), (x2, y2) in zip(path, path[1:]):
        dist = SQRT2 if (x1 != x2 and y1 != y2) else 1.0
        unit = field.unit_time(x1, y1, t)
        total += dist * curve.rate(1.0 / unit)
        t += dist * unit
    return total
