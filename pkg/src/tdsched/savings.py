"""Savings-heuristic benchmark harness over generated routing instances.

Candidate routes are judged by the exact refinement solver: a route maps to
an activity sequence alternating travel legs and service stops, battery
capacity becomes the resource constraint, and committed charging stops split
a leg at a station with a required replenishment between the halves. Fleet
size is the primary objective (every accepted merge removes one vehicle),
total completion time the secondary one.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from time import perf_counter
from typing import Optional

from . import ddd
from .instgen.instance import Instance
from .model import (
    Activity,
    InfeasibleProblem,
    Problem,
    ReplenishMode,
    Schedule,
    tighten_windows,
    validate_schedule,
)
from .pwl import PwlFunction, Scalar
from .ten import SolveStats

SQRT2 = 2 ** 0.5


@dataclass(frozen=True)
class ChargingStop:
    leg: int          # leg index within the route (0 = depot to first customer)
    station: str


@dataclass
class RouteEvaluation:
    visits: tuple
    feasible: bool
    schedule: Optional[Schedule]
    completion: Optional[Scalar]
    replenishments: int
    committed: tuple
    stats: SolveStats
    reason: Optional[str] = None
    path: Optional[list] = None  # pass-a solution path, reused for preloading


def route_legs(visits: tuple) -> list:
    chain = ["depot", *visits, "depot"]
    return list(zip(chain, chain[1:]))


def route_to_problem(visits: tuple, instance: Instance, committed: dict,
                     eps: Scalar = 1) -> Problem:
    """Encode a route as an activity sequence.

    Layout: a zero-length depot-start activity, then per leg either one
    travel activity or, when the charging plan commits a station on it, two
    travel activities with a required replenishment at the station between
    them; a constant-duration zero-consumption service activity after each
    customer leg; and a zero-length arrival activity whose window enforces
    the return-by-horizon deadline. Replenishing at the depot endpoints is
    optional in every variant that has depot charging.
    """
    horizon = instance.horizon
    delta = PwlFunction.constant(instance.replenish_duration)
    depot_charging = instance.variant != "none"
    zero = PwlFunction.constant(0)

    def travel(a: str, b: str, mode: ReplenishMode) -> Activity:
        return Activity(
            earliest=0, latest=horizon,
            duration=instance.tau[(a, b)] if a != b else zero,
            consumption=instance.rho[(a, b)] if a != b else zero,
            replenish_duration=delta if mode is not ReplenishMode.FORBIDDEN else None,
            mode=mode,
        )

    acts = [Activity(
        earliest=0, latest=horizon, duration=zero, consumption=zero,
        replenish_duration=delta if depot_charging else None,
        mode=ReplenishMode.OPTIONAL if depot_charging else ReplenishMode.FORBIDDEN,
    )]
    legs = route_legs(visits)
    for j, (a, b) in enumerate(legs):
        station = committed.get(j)
        if station is not None:
            acts.append(travel(a, station, ReplenishMode.REQUIRED))
            acts.append(travel(station, b, ReplenishMode.FORBIDDEN))
        else:
            acts.append(travel(a, b, ReplenishMode.FORBIDDEN))
        if j < len(legs) - 1:
            cust = instance.location(b)
            acts.append(Activity(
                earliest=cust.ready, latest=cust.due,
                duration=PwlFunction.constant(cust.service),
                consumption=zero,
            ))
    acts.append(Activity(
        earliest=0, latest=horizon, duration=zero, consumption=zero,
        replenish_duration=delta if depot_charging else None,
        mode=ReplenishMode.OPTIONAL if depot_charging else ReplenishMode.FORBIDDEN,
    ))
    return Problem(tuple(acts), capacity=instance.battery_capacity, eps=eps)


def eligible_stations(a: str, b: str, instance: Instance) -> list:
    """Stations whose detour on leg a -> b stays within sqrt(2) times the
    direct distance, ordered by (detour, id)."""
    direct = instance.distance(a, b)
    out = []
    for s in instance.stations:
        detour = instance.distance(a, s.id) + instance.distance(s.id, b) - direct
        if detour <= SQRT2 * direct:
            out.append((detour, s.id))
    out.sort()
    return [sid for _, sid in out]


def eligible_station(a: str, b: str, instance: Instance) -> Optional[str]:
    """Station with the smallest detour on leg a -> b; None when no station
    is within the detour allowance."""
    stations = eligible_stations(a, b, instance)
    return stations[0] if stations else None


class RouteEvaluator:
    """Evaluates candidate routes with the refinement solver.

    Pass one tries the route without any mid-route charging. If the battery
    is the blocker, charging stops are committed greedily: walk the legs
    accumulating per-leg minimum consumptions, and at the first leg where the
    running total exceeds the capacity commit the eligible station on it (or
    on the nearest earlier uncommitted leg that has one), then re-evaluate.

    With ``preload`` enabled, solving a route that extends a previously
    evaluated visit prefix seeds the network with that prefix's solution
    path, which is objective-neutral and skips rediscovering its vertices.
    """

    name = "DDD"

    def __init__(self, instance: Instance, eps: Scalar = 1, preload: bool = False):
        self.instance = instance
        self.eps = eps
        self.preload = preload
        if preload:
            self.name = "DDD-PL"
        self.evaluations = 0
        self.solver_time = 0.0
        self._memo: dict = {}
        self._paths: dict = {}
        self._min_leg_consumption: dict = {}

    def evaluate(self, visits: tuple) -> RouteEvaluation:
        visits = tuple(visits)
        hit = self._memo.get(visits)
        if hit is not None:
            return hit
        ev = self._evaluate_fresh(visits)
        self._memo[visits] = ev
        return ev

    def _evaluate_fresh(self, visits: tuple) -> RouteEvaluation:
        ev = self._solve(visits, {})
        if ev.feasible:
            if ev.path is not None:
                self._paths[visits] = ev.path
            return ev
        if ev.reason == "time-windows" or not self.instance.stations:
            return ev
        committed: dict = {}
        while True:
            stop = self._next_commit(visits, committed)
            if stop is None:
                return ev
            committed[stop.leg] = stop.station
            ev = self._solve(visits, committed)
            if ev.feasible:
                return ev

    def _solve(self, visits: tuple, committed: dict) -> RouteEvaluation:
        t0 = perf_counter()
        self.evaluations += 1
        stops = tuple(ChargingStop(j, s) for j, s in sorted(committed.items()))
        try:
            problem = tighten_windows(
                route_to_problem(visits, self.instance, committed, self.eps))
        except InfeasibleProblem:
            self.solver_time += perf_counter() - t0
            return RouteEvaluation(visits, False, None, None, 0, stops,
                                   SolveStats(), reason="time-windows")
        preload_path = None
        if self.preload and not committed:
            preload_path = self._prefix_path(visits)
        res = ddd.solve(problem, preload_path=preload_path)
        self.solver_time += perf_counter() - t0
        if res.schedule is None:
            return RouteEvaluation(visits, False, None, None, 0, stops, res.stats,
                                   reason="battery")
        bad = validate_schedule(problem, res.schedule)
        if bad is not None:
            raise AssertionError(f"solver returned an invalid schedule: {bad}")
        return RouteEvaluation(
            visits, True, res.schedule, res.schedule.completion,
            sum(1 for y in res.schedule.replenish_flags if y),
            stops, res.stats,
            path=res.path if not committed else None,
        )

    def _prefix_path(self, visits: tuple):
        # longest previously solved visit prefix; its activity indices match
        # this route's encoding up to and including that prefix's last service
        for k in range(len(visits) - 1, 0, -1):
            path = self._paths.get(visits[:k])
            if path is not None:
                shared = 2 * k  # depot start + (travel, service) per customer
                return [(i, t) for i, t in path if i <= shared]
        return None

    def _min_consumption(self, a: str, b: str) -> Scalar:
        if a == b:
            return 0
        key = (a, b)
        v = self._min_leg_consumption.get(key)
        if v is None:
            rho = self.instance.rho[key]
            v = rho.min_on_interval(0, self.instance.horizon)
            self._min_leg_consumption[key] = v
        return v

    def _next_commit(self, visits: tuple, committed: dict) -> Optional[ChargingStop]:
        legs = route_legs(visits)
        cap = self.instance.battery_capacity
        acc: Scalar = 0
        acc_entering: list = []
        last_reset = -1
        for j, (a, b) in enumerate(legs):
            acc_entering.append(acc)
            if j in committed:
                acc = self._min_consumption(committed[j], b)  # full at the station
                last_reset = j
                continue
            acc = acc + self._min_consumption(a, b)
            if acc > cap:
                # prefer the overrunning leg, falling back to earlier ones;
                # a station only helps when the route can still reach it
                for jj in range(j, last_reset, -1):
                    if jj in committed:
                        break
                    aj, bj = legs[jj]
                    for station in eligible_stations(aj, bj, self.instance):
                        if acc_entering[jj] + self._min_consumption(aj, station) <= cap:
                            return ChargingStop(jj, station)
                return None
        return None


@dataclass
class SavingsSolution:
    instance: str
    variant: str
    evaluator: str
    routes: list
    vehicles: int
    total_completion: Scalar
    replenishments: int
    routes_with_replenishment: int
    terminated: bool
    wall_time: float
    evaluations: int

    @property
    def cpu_per_evaluation(self) -> float:
        return self.wall_time / self.evaluations if self.evaluations else 0.0


def savings_solve(instance: Instance, evaluator: RouteEvaluator,
                  time_limit: float = 7200.0) -> SavingsSolution:
    """Clarke-Wright endpoint merging with solver-checked feasibility.

    Savings are ranked on free-flow distances; each round applies the
    best-ranked merge whose combined route passes the freight check and the
    time-dependent evaluation, until no candidate is left or the time limit
    is hit.
    """
    t0 = perf_counter()
    customers = [c.id for c in instance.customers]
    demand = {c.id: c.demand for c in instance.customers}
    routes: dict = {}
    for c in customers:
        routes[c] = {"visits": (c,), "eval": evaluator.evaluate((c,)),
                     "load": demand[c]}

    savings = []
    for i in customers:
        for j in customers:
            if i == j:
                continue
            s = (instance.distance(i, "depot") + instance.distance("depot", j)
                 - instance.distance(i, j))
            savings.append((-s, i, j))
    savings.sort()

    head_of = {c: c for c in customers}   # first visit -> route key
    tail_of = {c: c for c in customers}   # last visit -> route key
    terminated = True
    while True:
        if perf_counter() - t0 > time_limit:
            terminated = False
            break
        applied = False
        for _, i, j in savings:
            ri = tail_of.get(i)
            rj = head_of.get(j)
            if ri is None or rj is None or ri == rj:
                continue
            a, b = routes[ri], routes[rj]
            if not (a["eval"].feasible and b["eval"].feasible):
                continue
            if a["load"] + b["load"] > instance.vehicle_capacity:
                continue
            candidate = a["visits"] + b["visits"]
            ev = evaluator.evaluate(candidate)
            if not ev.feasible:
                continue
            del head_of[b["visits"][0]]
            del tail_of[a["visits"][-1]]
            head_of[candidate[0]] = ri
            tail_of[candidate[-1]] = ri
            routes[ri] = {"visits": candidate, "eval": ev,
                          "load": a["load"] + b["load"]}
            del routes[rj]
            applied = True
            break
        if not applied:
            break

    evaluations = [r["eval"] for r in routes.values()]
    total = sum((e.completion for e in evaluations if e.feasible), start=0)
    repl = sum(e.replenishments for e in evaluations if e.feasible)
    return SavingsSolution(
        instance=instance.name,
        variant=instance.variant,
        evaluator=evaluator.name,
        routes=sorted(evaluations, key=lambda e: e.visits),
        vehicles=len(routes),
        total_completion=total,
        replenishments=repl,
        routes_with_replenishment=sum(
            1 for e in evaluations if e.feasible and e.replenishments > 0),
        terminated=terminated,
        wall_time=perf_counter() - t0,
        evaluations=evaluator.evaluations,
    )


REPORT_COLUMNS = (
    "Instance", "Solver", "Charging", "Avg. CPU", "CPU per Evaluation",
    "Avg. Veh.", "Avg. Compl.", "Replenishments", "Routes w. Repl.",
    "Terminated",
)


def solution_row(sol: SavingsSolution) -> dict:
    return {
        "Instance": sol.instance,
        "Solver": sol.evaluator,
        "Charging": sol.variant,
        "Avg. CPU": round(sol.wall_time, 4),
        "CPU per Evaluation": round(sol.cpu_per_evaluation, 6),
        "Avg. Veh.": sol.vehicles,
        "Avg. Compl.": round(float(sol.total_completion), 1),
        "Replenishments": sol.replenishments,
        "Routes w. Repl.": sol.routes_with_replenishment,
        "Terminated": int(sol.terminated),
    }


def family_of(instance_name: str) -> str:
    m = re.match(r"^([A-Za-z]+\d?)", instance_name.strip())
    return m.group(1).upper() if m else instance_name


def report(rows: list, out) -> None:
    """Write per-run rows plus per-(family, solver, charging) mean rows."""
    writer = csv.DictWriter(out, fieldnames=REPORT_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    groups: dict = {}
    for row in rows:
        key = (family_of(row["Instance"]), row["Solver"], row["Charging"])
        groups.setdefault(key, []).append(row)
    for (family, solver, charging), members in sorted(groups.items()):
        if len(rows) == len(groups):
            break  # every group is a single row; aggregates would repeat them
        n = len(members)
        writer.writerow({
            "Instance": f"{family} (avg of {n})",
            "Solver": solver,
            "Charging": charging,
            "Avg. CPU": round(sum(m["Avg. CPU"] for m in members) / n, 4),
            "CPU per Evaluation": round(
                sum(m["CPU per Evaluation"] for m in members) / n, 6),
            "Avg. Veh.": round(sum(m["Avg. Veh."] for m in members) / n, 2),
            "Avg. Compl.": round(sum(m["Avg. Compl."] for m in members) / n, 1),
            "Replenishments": round(sum(m["Replenishments"] for m in members) / n, 2),
            "Routes w. Repl.": round(sum(m["Routes w. Repl."] for m in members) / n, 2),
            "Terminated": sum(m["Terminated"] for m in members),
        })


def report_text(rows: list) -> str:
    buf = io.StringIO()
    report(rows, buf)
    return buf.getvalue()
