"""Piecewise-linear function kernel.

All durations and consumptions in this package are piecewise-linear functions
of time. Discontinuities are allowed and are encoded as two breakpoints at the
same time (left value first, right value second); the function value at such a
time is the lower of the two one-sided limits, so infima over closed intervals
are always attained.

Times and values are exact rationals (``int`` preferred, ``fractions.Fraction``
otherwise). The solvers compare computed times against grid multiples and
bisection midpoints, and those comparisons must be exact for the refinement
loops to terminate; never feed raw floats through arithmetic that ends up in a
comparison. ``as_scalar`` converts floats exactly (binary expansion), so values
loaded from JSON stay exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Scalar = Union[int, Fraction]


class PwlDomainError(ValueError):
    """Evaluation outside the declared domain with extrapolation disabled."""


def as_scalar(x) -> Scalar:
    """Exact scalar from int, Fraction, float, str ('p/q' or decimal), or pair."""
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    if isinstance(x, float):
        f = Fraction(x)  # exact binary expansion, no rounding
        return int(f) if f.denominator == 1 else f
    if isinstance(x, str):
        f = Fraction(x)
        return int(f) if f.denominator == 1 else f
    if isinstance(x, (tuple, list)) and len(x) == 2:
        f = Fraction(int(x[0]), int(x[1]))
        return int(f) if f.denominator == 1 else f
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


def scalar_to_json(x: Scalar):
    """JSON-friendly form: int when integral, float when exact, else 'p/q'."""
    if isinstance(x, int):
        return x
    if x.denominator == 1:
        return int(x)
    f = float(x)
    if Fraction(f) == x:
        return f
    return f"{x.numerator}/{x.denominator}"


def grid_floor(x: Scalar, eps: Scalar) -> Scalar:
    """Largest multiple of eps that is <= x."""
    return (x // eps) * eps


def grid_ceil(x: Scalar, eps: Scalar) -> Scalar:
    """Smallest multiple of eps that is >= x."""
    return -((-x) // eps) * eps


class PwlFunction:
    """Lower semi-continuous piecewise-linear function.

    ``points`` is a sequence of (time, value) breakpoints with non-decreasing
    times. A time may appear twice to encode a jump: the first entry is the
    left limit, the second the right limit, and the function value at that
    time is the smaller of the two. With ``extrapolate`` the function is
    constant beyond its first/last breakpoint; otherwise evaluation outside
    the breakpoint span raises :class:`PwlDomainError`.
    """

    __slots__ = ("times", "values", "extrapolate")

    def __init__(self, points: Iterable[tuple], extrapolate: bool = True):
        times: list[Scalar] = []
        values: list[Scalar] = []
        for t, v in points:
            times.append(as_scalar(t))
            values.append(as_scalar(v))
        if not times:
            raise ValueError("a PWL function needs at least one breakpoint")
        for k in range(1, len(times)):
            if times[k] < times[k - 1]:
                raise ValueError("breakpoint times must be non-decreasing")
        # collapse duplicated times that carry no jump
        keep = [0]
        for k in range(1, len(times)):
            if times[k] == times[keep[-1]] and values[k] == values[keep[-1]]:
                continue
            keep.append(k)
        times = [times[k] for k in keep]
        values = [values[k] for k in keep]
        for k in range(2, len(times)):
            if times[k] == times[k - 2]:
                raise ValueError(f"more than two distinct breakpoints at t={times[k]}")
        for v in values:
            if v < 0:
                raise ValueError("PWL values must be non-negative")
        self.times: tuple = tuple(times)
        self.values: tuple = tuple(values)
        self.extrapolate = bool(extrapolate)

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, value) -> "PwlFunction":
        return cls([(0, value)], extrapolate=True)

    @classmethod
    def from_steps(cls, steps: Sequence[tuple], end) -> "PwlFunction":
        """Piecewise-constant function: value steps[k][1] on [t_k, t_{k+1}).

        Jumps are stored as breakpoint pairs; by lower semi-continuity the
        value at a jump is the smaller of the two step levels.
        """
        if not steps:
            raise ValueError("need at least one step")
        end = as_scalar(end)
        pts: list[tuple] = [(as_scalar(steps[0][0]), as_scalar(steps[0][1]))]
        for k in range(1, len(steps)):
            t = as_scalar(steps[k][0])
            pts.append((t, as_scalar(steps[k - 1][1])))
            pts.append((t, as_scalar(steps[k][1])))
        last_t = as_scalar(steps[-1][0])
        if end > last_t:
            pts.append((end, as_scalar(steps[-1][1])))
        return cls(pts, extrapolate=True)

    # -- basic queries ---------------------------------------------------

    @property
    def domain(self) -> tuple:
        return (self.times[0], self.times[-1])

    def is_constant(self) -> bool:
        return all(v == self.values[0] for v in self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PwlFunction):
            return NotImplemented
        return (self.times, self.values, self.extrapolate) == (
            other.times,
            other.values,
            other.extrapolate,
        )

    def __hash__(self):
        return hash((self.times, self.values, self.extrapolate))

    def __repr__(self):
        pts = ", ".join(f"({t},{v})" for t, v in zip(self.times, self.values))
        return f"PwlFunction([{pts}], extrapolate={self.extrapolate})"

    def _bracket(self, t: Scalar) -> int:
        """Index of the last breakpoint with time <= t (binary search)."""
        lo, hi = 0, len(self.times) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.times[mid] <= t:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def __call__(self, t) -> Scalar:
        t = as_scalar(t)
        times, values = self.times, self.values
        if t < times[0]:
            if not self.extrapolate:
                raise PwlDomainError(f"t={t} below domain start {times[0]}")
            return values[0]
        if t > times[-1]:
            if not self.extrapolate:
                raise PwlDomainError(f"t={t} above domain end {times[-1]}")
            return values[-1]
        k = self._bracket(t)
        if times[k] == t:
            # at a jump the stored value is the lower one-sided limit
            v = values[k]
            if k > 0 and times[k - 1] == t:
                v = min(v, values[k - 1])
            return v
        t1, v1 = times[k], values[k]
        t2, v2 = times[k + 1], values[k + 1]
        num = (v2 - v1) * (t - t1)
        den = t2 - t1
        if num % den == 0:
            return v1 + num // den
        return v1 + Fraction(num) / Fraction(den)

    def segments(self):
        """Yield (t1, right-value-at-t1, t2, left-value-at-t2) linear pieces."""
        times, values = self.times, self.values
        k = 0
        while k + 1 < len(times):
            if times[k + 1] == times[k]:
                k += 1
                continue
            yield times[k], values[k], times[k + 1], values[k + 1]
            k += 1

    # -- FIFO ------------------------------------------------------------

    def is_fifo(self, lo, hi) -> bool:
        """True iff t -> t + f(t) is non-decreasing on [lo, hi].

        Checked per linear segment (slope >= -1) and at jumps, where
        non-decreasing completion requires the right limit to be at least
        the left limit.
        """
        lo = as_scalar(lo)
        hi = as_scalar(hi)
        if lo > hi:
            raise ValueError("empty interval")
        for t1, v1, t2, v2 in self.segments():
            if max(t1, lo) >= min(t2, hi):
                continue
            if Fraction(v2 - v1, t2 - t1) < -1:
                return False
        times, values = self.times, self.values
        for k in range(1, len(times)):
            if times[k] == times[k - 1] and lo < times[k] <= hi:
                if values[k] < values[k - 1]:
                    return False
        return True

    # -- minima ----------------------------------------------------------

    def min_on_grid(self, t_from, t_to_exclusive, eps) -> Scalar:
        """Minimum of f over the grid {t_from, t_from+eps, ..., t_to-eps}.

        Exact, and O(#breakpoints) regardless of grid size: within each
        linear piece the grid minimum sits at one end of the run of grid
        points the piece contains.
        """
        t_from = as_scalar(t_from)
        t_to = as_scalar(t_to_exclusive)
        eps = as_scalar(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        count = (t_to - t_from) // eps
        if (t_to - t_from) != count * eps:
            raise ValueError("t_from and t_to_exclusive must differ by a multiple of eps")
        if count <= 0:
            raise ValueError("empty grid: t_from >= t_to_exclusive")
        last = t_from + (count - 1) * eps

        best: Scalar | None = None

        def consider(v: Scalar):
            nonlocal best
            if best is None or v < best:
                best = v

        times, values = self.times, self.values
        if not self.extrapolate and (t_from < times[0] or last > times[-1]):
            raise PwlDomainError("grid extends beyond domain")

        # grid points coinciding with breakpoint times
        seen: set = set()
        for k, bt in enumerate(times):
            if bt in seen:
                continue
            seen.add(bt)
            if t_from <= bt <= last and (bt - t_from) % eps == 0:
                consider(self(bt))

        # runs of grid points strictly inside the regions between breakpoints
        distinct: list = []
        for b in [None, *times, None]:
            if not distinct or b != distinct[-1]:
                distinct.append(b)
        for j in range(len(distinct) - 1):
            left, right = distinct[j], distinct[j + 1]
            # first grid point strictly greater than `left`
            if left is None:
                k0 = 0
            else:
                k0 = (left - t_from) // eps + 1
            if k0 < 0:
                k0 = 0
            # last grid point strictly smaller than `right`
            if right is None:
                k1 = count - 1
            else:
                k1 = grid_ceil(right - t_from, eps) // eps - 1
            if k1 > count - 1:
                k1 = count - 1
            if k0 > k1:
                continue
            g_lo = t_from + k0 * eps
            g_hi = t_from + k1 * eps
            if left is None:
                consider(values[0])
            elif right is None:
                consider(values[-1])
            else:
                # linear on (left, right): right value at `left` to left value at `right`
                i_left = self._bracket(left)
                v_l = values[i_left]
                v_r = values[i_left + 1]
                slope = Fraction(v_r - v_l, right - left)
                g = g_lo if slope >= 0 else g_hi
                consider(v_l + slope * (g - left))
        assert best is not None
        return best

    def min_on_interval(self, lo, hi) -> Scalar:
        """Continuous minimum over [lo, hi] (attained, by lower semi-continuity)."""
        lo = as_scalar(lo)
        hi = as_scalar(hi)
        if lo > hi:
            raise ValueError("empty interval")
        best = self(lo)
        v = self(hi)
        if v < best:
            best = v
        for k, t in enumerate(self.times):
            if lo < t < hi:
                v = self(t)
                if v < best:
                    best = v
        return best

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {"breakpoints": [[scalar_to_json(t), scalar_to_json(v)]
                                for t, v in zip(self.times, self.values)]}

    @classmethod
    def from_json(cls, obj) -> "PwlFunction":
        if isinstance(obj, (int, float, str)):
            return cls.constant(as_scalar(obj))
        return cls(obj["breakpoints"], extrapolate=obj.get("extrapolate", True))


def _segment_dev(pts, a: int, b: int) -> Scalar:
    """Max |sample - chord| for samples strictly between indices a and b."""
    ta, va = pts[a]
    tb, vb = pts[b]
    worst: Scalar = 0
    for j in range(a + 1, b):
        tj, vj = pts[j]
        interp = va + Fraction((vb - va) * (tj - ta)) / Fraction(tb - ta)
        dev = abs(vj - interp)
        if dev > worst:
            worst = dev
    return worst


def _worst_over(pts, knots) -> tuple:
    worst: Scalar = 0
    worst_idx = -1
    for a, b in zip(knots, knots[1:]):
        ta, va = pts[a]
        tb, vb = pts[b]
        for j in range(a + 1, b):
            tj, vj = pts[j]
            interp = va + Fraction((vb - va) * (tj - ta)) / Fraction(tb - ta)
            dev = abs(vj - interp)
            if dev > worst:
                worst = dev
                worst_idx = j
    return worst, worst_idx


def fit_pwl(samples: Sequence[tuple], max_breakpoints: int, tolerance=None) -> PwlFunction:
    """Fit a PWL function through a subset of samples.

    Greedy max-deviation splitting: start from the two endpoints and
    repeatedly promote the sample with the largest absolute deviation to a
    breakpoint until the maximum deviation is within tolerance or the
    breakpoint budget is exhausted. A coordinate-descent pass then slides
    interior breakpoints to neighbouring samples while that lowers the
    maximum deviation. Tolerance defaults to 1% of the sample value range.
    """
    pts = [(as_scalar(t), as_scalar(v)) for t, v in samples]
    if len(pts) < 2:
        raise ValueError("need at least 2 samples")
    for k in range(1, len(pts)):
        if pts[k][0] <= pts[k - 1][0]:
            raise ValueError("sample times must be strictly increasing")
    if max_breakpoints < 2:
        raise ValueError("breakpoint budget must be at least 2")
    vs = [v for _, v in pts]
    if tolerance is None:
        tolerance = Fraction(max(vs) - min(vs), 100)
    else:
        tolerance = as_scalar(tolerance)

    knots = [0, len(pts) - 1]
    while len(knots) < max_breakpoints:
        worst_dev, worst_idx = _worst_over(pts, knots)
        if worst_idx < 0 or worst_dev <= tolerance:
            break
        knots.append(worst_idx)
        knots.sort()

    # relocate breakpoints between regions: drop one, re-split at the new
    # worst sample, keep whenever the global deviation strictly drops
    current, _ = _worst_over(pts, knots)
    while current > tolerance:
        best_trial = None
        best_dev = current
        for pos in range(1, len(knots) - 1):
            removed = knots[:pos] + knots[pos + 1:]
            _, idx = _worst_over(pts, removed)
            if idx < 0:
                continue
            trial = sorted(removed + [idx])
            dev, _ = _worst_over(pts, trial)
            if dev < best_dev:
                best_dev = dev
                best_trial = trial
        if best_trial is None:
            break
        knots = best_trial
        current = best_dev

    # fine positioning: slide each interior breakpoint within its neighbours
    improved = current > tolerance
    while improved:
        improved = False
        for pos in range(1, len(knots) - 1):
            lo, hi = knots[pos - 1], knots[pos + 1]
            best_j = knots[pos]
            best_local = max(_segment_dev(pts, lo, best_j), _segment_dev(pts, best_j, hi))
            for j in range(lo + 1, hi):
                local = max(_segment_dev(pts, lo, j), _segment_dev(pts, j, hi))
                if local < best_local:
                    best_local = local
                    best_j = j
            if best_j != knots[pos]:
                trial = knots[:pos] + [best_j] + knots[pos + 1:]
                new, _ = _worst_over(pts, trial)
                if new < current:
                    knots[pos] = best_j
                    current = new
                    improved = True
        if current <= tolerance:
            break
    return PwlFunction([pts[k] for k in knots], extrapolate=True)
