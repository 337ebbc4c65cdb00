"""Problem definition for scheduling a fixed activity sequence over time.

An instance is an ordered list of activities, each with a start-time window,
a time-dependent duration, a time-dependent resource consumption, and an
optional replenishment rule. Start times live on a grid of width ``eps``;
schedules assign one grid start time per activity plus a replenish-after flag.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .pwl import PwlFunction, Scalar, as_scalar, grid_ceil, scalar_to_json


class InfeasibleProblem(ValueError):
    """Raised when window tightening proves the instance has no schedule."""


class ReplenishMode(enum.Enum):
    OPTIONAL = "optional"
    FORBIDDEN = "forbidden"
    REQUIRED = "required"


@dataclass(frozen=True)
class Activity:
    """One activity: window, duration, consumption, replenishment rule.

    ``replenish_duration`` maps cumulative consumption to the time needed to
    restore the resource to full; it must be non-decreasing. ``mode`` says
    whether a replenishment after this activity is optional, forbidden, or
    required. The default is optional when a replenishment function is given
    and forbidden when it is absent.
    """

    earliest: Scalar
    latest: Scalar
    duration: PwlFunction
    consumption: PwlFunction
    replenish_duration: Optional[PwlFunction] = None
    mode: ReplenishMode = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "earliest", as_scalar(self.earliest))
        object.__setattr__(self, "latest", as_scalar(self.latest))
        if self.mode is None:
            mode = ReplenishMode.OPTIONAL if self.replenish_duration is not None \
                else ReplenishMode.FORBIDDEN
            object.__setattr__(self, "mode", mode)
        if self.earliest > self.latest:
            raise ValueError(f"window [{self.earliest}, {self.latest}] is empty")
        if self.mode is not ReplenishMode.FORBIDDEN and self.replenish_duration is None:
            raise ValueError(f"mode {self.mode.value} needs a replenishment function")

    def completion(self, t: Scalar) -> Scalar:
        """Completion time when started at t."""
        return t + self.duration(t)

    def shifted(self, earliest=None, latest=None) -> "Activity":
        return Activity(
            earliest=self.earliest if earliest is None else earliest,
            latest=self.latest if latest is None else latest,
            duration=self.duration,
            consumption=self.consumption,
            replenish_duration=self.replenish_duration,
            mode=self.mode,
        )


@dataclass(frozen=True)
class Problem:
    """Ordered activity sequence, resource capacity, and grid width."""

    activities: tuple
    capacity: Scalar
    eps: Scalar
    tight: bool = False

    def __post_init__(self):
        object.__setattr__(self, "activities", tuple(self.activities))
        object.__setattr__(self, "capacity", as_scalar(self.capacity))
        object.__setattr__(self, "eps", as_scalar(self.eps))
        if not self.activities:
            raise ValueError("need at least one activity")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        for k, a in enumerate(self.activities):
            if a.earliest % self.eps != 0 or a.latest % self.eps != 0:
                raise ValueError(f"activity {k}: window bounds must be multiples of eps")

    @property
    def n(self) -> int:
        return len(self.activities)

    @property
    def has_replenishments(self) -> bool:
        return any(a.mode is not ReplenishMode.FORBIDDEN for a in self.activities)

    def validate_functions(self):
        """Check FIFO durations, non-negative consumptions, monotone replenishments."""
        for k, a in enumerate(self.activities):
            if not a.duration.is_fifo(a.earliest, a.latest):
                raise ValueError(f"activity {k}: duration violates FIFO on its window")
            if a.consumption.min_on_interval(a.earliest, a.latest) < 0:
                raise ValueError(f"activity {k}: negative consumption")
            if a.replenish_duration is not None:
                d = a.replenish_duration
                for t1, v1, t2, v2 in d.segments():
                    if max(t1, 0) < min(t2, self.capacity) and v2 < v1:
                        raise ValueError(f"activity {k}: replenishment function decreases")


@dataclass(frozen=True)
class Schedule:
    """Start times, replenish flags, and derived quantities."""

    start_times: tuple
    replenish_flags: tuple
    completion: Scalar
    cumulative: tuple

    @classmethod
    def build(cls, problem: Problem, start_times: Sequence[Scalar],
              replenish_flags: Optional[Sequence[bool]] = None) -> "Schedule":
        times = tuple(as_scalar(t) for t in start_times)
        if replenish_flags is None:
            flags = tuple(False for _ in times)
        else:
            flags = tuple(bool(y) for y in replenish_flags)
        if len(times) != problem.n or len(flags) != problem.n:
            raise ValueError("schedule length does not match problem")
        cumulative = []
        acc: Scalar = 0
        for i, a in enumerate(problem.activities):
            acc = acc + a.consumption(times[i])
            cumulative.append(acc)
            if flags[i]:
                acc = 0
        completion = problem.activities[-1].completion(times[-1])
        return cls(times, flags, completion, tuple(cumulative))

    def to_json(self, stats: Optional[dict] = None) -> dict:
        out = {
            "status": "ok",
            "t": [scalar_to_json(t) for t in self.start_times],
            "y": [1 if y else 0 for y in self.replenish_flags],
            "completion": scalar_to_json(self.completion),
        }
        if stats is not None:
            out["stats"] = stats
        return out


@dataclass(frozen=True)
class Violation:
    constraint: str
    index: int
    message: str

    def __str__(self):
        return f"{self.constraint} at activity {self.index}: {self.message}"


def tighten_windows(problem: Problem) -> Problem:
    """Restrict windows so every window endpoint can be chained.

    Forward pass: raise each earliest start to the first grid multiple not
    before the predecessor's earliest completion. Backward pass: lower each
    latest start to the last grid multiple whose completion still allows the
    successor's latest start. Raises :class:`InfeasibleProblem` when a window
    empties.
    """
    problem.validate_functions()
    eps = problem.eps
    acts = list(problem.activities)
    e = [a.earliest for a in acts]
    l = [a.latest for a in acts]
    for i in range(problem.n - 1):
        earliest_done = acts[i].completion(e[i])
        cand = grid_ceil(earliest_done, eps)
        if cand > e[i + 1]:
            e[i + 1] = cand
        if e[i + 1] > l[i + 1]:
            raise InfeasibleProblem(
                f"activity {i + 1}: earliest start {e[i + 1]} exceeds latest {l[i + 1]}")
    for i in range(problem.n - 2, -1, -1):
        # largest grid multiple t <= l[i] with completion(t) <= l[i+1];
        # completion is non-decreasing (FIFO), so binary search on grid indices
        if acts[i].completion(l[i]) > l[i + 1]:
            if acts[i].completion(e[i]) > l[i + 1]:
                raise InfeasibleProblem(
                    f"activity {i}: even the earliest start completes after {l[i + 1]}")
            lo_k = e[i] // eps
            hi_k = l[i] // eps
            while hi_k - lo_k > 1:
                mid_k = (lo_k + hi_k) // 2
                if acts[i].completion(mid_k * eps) <= l[i + 1]:
                    lo_k = mid_k
                else:
                    hi_k = mid_k
            l[i] = lo_k * eps
        if l[i] < e[i]:
            raise InfeasibleProblem(f"activity {i}: window empties after tightening")
    new_acts = [a.shifted(earliest=e[i], latest=l[i]) for i, a in enumerate(acts)]
    return Problem(tuple(new_acts), problem.capacity, problem.eps, tight=True)


def greedy_earliest(problem: Problem) -> Optional[Schedule]:
    """Start every activity as early as possible; None when that violates
    a window or the capacity.

    Optimal for the problem without replenishments whenever every consumption
    function is non-decreasing; with non-monotone consumptions the earliest
    schedule is still computed but infeasibility of it proves nothing.
    """
    acts = problem.activities
    times = [acts[0].earliest]
    for i in range(1, problem.n):
        t = acts[i - 1].completion(times[-1])
        if t < acts[i].earliest:
            t = acts[i].earliest
        if t > acts[i].latest:
            return None
        times.append(t)
    schedule = Schedule.build(problem, times)
    if schedule.cumulative[-1] > problem.capacity:
        return None
    return schedule


def validate_schedule(problem: Problem, schedule: Schedule) -> Optional[Violation]:
    """Check a schedule against the timing, window, capacity, and
    replenishment constraints; None when everything holds."""
    acts = problem.activities
    n = problem.n
    t = schedule.start_times
    y = schedule.replenish_flags
    if len(t) != n:
        return Violation("shape", 0, f"expected {n} start times, got {len(t)}")
    for i, a in enumerate(acts):
        if not (a.earliest <= t[i] <= a.latest):
            return Violation("window", i, f"t={t[i]} outside [{a.earliest}, {a.latest}]")
    acc: Scalar = 0
    for i, a in enumerate(acts):
        acc = acc + a.consumption(t[i])
        if acc > problem.capacity:
            return Violation("capacity", i, f"cumulative {acc} exceeds {problem.capacity}")
        if schedule.cumulative[i] != acc:
            return Violation("bookkeeping", i,
                             f"recorded cumulative {schedule.cumulative[i]} != {acc}")
        if i < n - 1:
            done = a.completion(t[i])
            if y[i]:
                if a.mode is ReplenishMode.FORBIDDEN:
                    return Violation("mode", i, "replenishment taken but forbidden")
                done = done + a.replenish_duration(acc)
            elif a.mode is ReplenishMode.REQUIRED:
                return Violation("mode", i, "replenishment required but skipped")
            if done > t[i + 1]:
                return Violation("timing", i,
                                 f"ready at {done} but successor starts at {t[i + 1]}")
        if y[i]:
            acc = 0
    if schedule.completion != acts[-1].completion(t[-1]):
        return Violation("completion", n - 1,
                         f"recorded completion {schedule.completion} != recomputed")
    return None


# -- JSON ------------------------------------------------------------------


def problem_to_json(problem: Problem) -> dict:
    out = {
        "eps": scalar_to_json(problem.eps),
        "Q": scalar_to_json(problem.capacity),
        "activities": [],
    }
    for a in problem.activities:
        item = {
            "e": scalar_to_json(a.earliest),
            "l": scalar_to_json(a.latest),
            "tau": a.duration.to_json(),
            "rho": a.consumption.to_json(),
            "delta": None if a.replenish_duration is None else a.replenish_duration.to_json(),
            "mode": a.mode.value,
        }
        out["activities"].append(item)
    return out


def problem_from_json(obj: dict) -> Problem:
    acts = []
    for item in obj["activities"]:
        delta = item.get("delta")
        acts.append(Activity(
            earliest=as_scalar(item["e"]),
            latest=as_scalar(item["l"]),
            duration=PwlFunction.from_json(item["tau"]),
            consumption=PwlFunction.from_json(item["rho"]),
            replenish_duration=None if delta is None else PwlFunction.from_json(delta),
            mode=ReplenishMode(item["mode"]) if "mode" in item else None,
        ))
    return Problem(tuple(acts), capacity=as_scalar(obj["Q"]), eps=as_scalar(obj["eps"]))


def load_problem(path) -> Problem:
    with open(path) as fh:
        return problem_from_json(json.load(fh))


def dump_problem(problem: Problem, path):
    with open(path, "w") as fh:
        json.dump(problem_to_json(problem), fh, indent=1)
