"""Congestion model: a daily profile times a spatial proximity factor.

The profile delta(t) is piecewise linear in [0, 1] over relative time with a
morning and an afternoon peak; the spatial factor gamma(x, y) decays as a
Gaussian of the distance to the nearest of four city centres. The effective
congestion at a point and time is min(cap, gamma) * delta, so travel slows
down by at most a factor of 1 / (1 - cap).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional

# two-peak daily shape over relative time: morning rise 0.15-0.25, plateau to
# 0.35, easing to a midday level, afternoon rise 0.70-0.80, gone by 0.90
DEFAULT_DELTA_POINTS = (
    (0.0, 0.0),
    (0.15, 0.0),
    (0.25, 1.0),
    (0.35, 1.0),
    (0.45, 0.3),
    (0.70, 0.3),
    (0.80, 1.0),
    (0.90, 0.0),
    (1.0, 0.0),
)


@dataclass(frozen=True)
class CongestionConfig:
    delta_points: tuple = DEFAULT_DELTA_POINTS  # (relative time, level)
    sigma_frac: float = 0.15        # Gaussian spread as a fraction of the bbox diagonal
    cap: float = 0.8                # ceiling on the spatial factor
    centers: Optional[tuple] = None  # default: the four quadrant midpoints
    enforce_fifo: bool = True


class CongestionField:
    """Evaluates delta, gamma, and the per-unit-distance travel time."""

    def __init__(self, bounds: tuple, horizon: float, tau_free: float = 1.0,
                 config: CongestionConfig = CongestionConfig()):
        xmin, ymin, xmax, ymax = bounds
        self.bounds = (xmin, ymin, xmax, ymax)
        self.horizon = float(horizon)
        self.tau_free = float(tau_free)
        self.cap = float(config.cap)
        self.config = config
        dx = xmax - xmin
        dy = ymax - ymin
        diag = math.hypot(dx, dy)
        self.sigma = max(config.sigma_frac * diag, 1e-9)
        if config.centers is not None:
            self.centers = tuple((float(cx), float(cy)) for cx, cy in config.centers)
        else:
            self.centers = (
                (xmin + 0.25 * dx, ymin + 0.25 * dy),
                (xmin + 0.75 * dx, ymin + 0.25 * dy),
                (xmin + 0.25 * dx, ymin + 0.75 * dy),
                (xmin + 0.75 * dx, ymin + 0.75 * dy),
            )
        ts = [float(u) * self.horizon for u, _ in config.delta_points]
        vs = [float(v) for _, v in config.delta_points]
        if config.enforce_fifo:
            vs = self._clamp_fall_rate(ts, vs)
        self._delta_t = ts
        self._delta_v = vs

    def _clamp_fall_rate(self, ts, vs):
        """Limit how fast the profile may fall so a one-step arrival time is
        non-decreasing in the departure time even at peak congestion.

        Derivative of t + d * tau_free / (1 - g * delta(t)) stays >= 0 when
        delta' >= -(1 - g)^2 / (d * tau_free * g), worst at g = cap and a
        diagonal step d = sqrt(2).
        """
        if self.cap <= 0:
            return list(vs)
        s_min = -((1.0 - self.cap) ** 2) / (math.sqrt(2.0) * self.tau_free * self.cap)
        out = list(vs)
        for k in range(1, len(out)):
            dt = ts[k] - ts[k - 1]
            if dt <= 0:
                continue
            floor = out[k - 1] + s_min * dt
            if out[k] < floor:
                out[k] = floor
        return out

    def delta(self, t: float) -> float:
        ts, vs = self._delta_t, self._delta_v
        if t <= ts[0]:
            return vs[0]
        if t >= ts[-1]:
            return vs[-1]
        k = bisect.bisect_right(ts, t) - 1
        if ts[k + 1] == ts[k]:
            return vs[k + 1]
        frac = (t - ts[k]) / (ts[k + 1] - ts[k])
        return vs[k] + frac * (vs[k + 1] - vs[k])

    def gamma(self, x: float, y: float) -> float:
        two_sigma_sq = 2.0 * self.sigma * self.sigma
        best = 0.0
        for cx, cy in self.centers:
            d_sq = (x - cx) ** 2 + (y - cy) ** 2
            g = math.exp(-d_sq / two_sigma_sq)
            if g > best:
                best = g
        return best

    def effective_factor(self, x: float, y: float, t: float) -> float:
        return min(self.cap, self.gamma(x, y)) * self.delta(t)

    def unit_time(self, x: float, y: float, t: float) -> float:
        """Time to travel a unit of distance through (x, y) at time t."""
        return self.tau_free / (1.0 - self.effective_factor(x, y, t))
