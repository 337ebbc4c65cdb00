"""Builds time-dependent EV-routing instances from Solomon data.

For every ordered pair of locations the generator runs the grid search from
evenly spread departure times, fits piecewise-linear functions to the
resulting durations and path energies, forces the duration fits to respect
the FIFO slope bound, and quantizes all values to dyadic rationals so the
instance files round-trip exactly through JSON floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional

from ..pwl import PwlFunction, Scalar, as_scalar, fit_pwl
from .field import CongestionConfig, CongestionField
from .grid import GridRouter, energy_along_path
from .instance import Instance, Location
from .solomon import SolomonInstance

VARIANTS = ("none", "depot", "depot+1", "depot+3", "depot+5")


@dataclass(frozen=True)
class EnergyCurve:
    """Per-distance consumption as a function of speed: c0 + c1/v + c2*v^2.

    U-shaped with its minimum at a moderate speed, so both crawling through
    congestion and free-flow speeding cost extra energy per unit distance.
    """

    c0: float
    c1: float
    c2: float

    @classmethod
    def default(cls, tau_free: float) -> "EnergyCurve":
        v_free = 1.0 / tau_free
        return cls(0.2, 0.4 * v_free, 0.4 / (v_free * v_free))

    def rate(self, v: float) -> float:
        return self.c0 + self.c1 / v + self.c2 * v * v


@dataclass(frozen=True)
class GeneratorConfig:
    tau_free: float = 1.0
    sample_count: int = 48
    fit_breakpoints: int = 16
    fit_tolerance_frac: float = 0.01
    congestion: CongestionConfig = dc_field(default_factory=CongestionConfig)
    energy: Optional[EnergyCurve] = None
    battery_capacity: Optional[float] = None     # default: round trip over the
                                                 # plane drains ~60% of the battery
    replenish_duration: Optional[float] = None   # default: free-flow driving time
                                                 # worth 10% of the battery
    station_sigma_frac: float = 1.0              # station offset in units of sigma
    quantum_bits: int = 16
    seed: int = 0

    def energy_curve(self) -> EnergyCurve:
        return self.energy if self.energy is not None else EnergyCurve.default(self.tau_free)


def quantize(x: float, bits: int) -> Scalar:
    scale = 1 << bits
    return as_scalar(Fraction(round(x * scale), scale))


def fifo_clamp(f: PwlFunction, quantum_bits: int = 16) -> PwlFunction:
    """Raise breakpoint values left to right until every slope clears the
    FIFO bound (strictly above -1, by one value quantum per time unit)."""
    s_min = Fraction(1, 1 << quantum_bits) - 1
    times = list(f.times)
    values = list(f.values)
    for k in range(1, len(values)):
        dt = times[k] - times[k - 1]
        if dt == 0:
            if values[k] < values[k - 1]:
                values[k] = values[k - 1]  # no downward jumps
            continue
        floor = values[k - 1] + s_min * dt
        if values[k] < floor:
            values[k] = floor
    return PwlFunction(list(zip(times, values)), extrapolate=f.extrapolate)


def station_coordinates(variant: str, field: CongestionField,
                        sigma_frac: float = 1.0) -> list:
    """Integer station positions per city centre for a layout variant.

    Extra stations sit ``sigma_frac`` Gaussian spreads from the centre along
    the bounding-box diagonal (and anti-diagonal for the five-station layout).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    per_city = {"none": 0, "depot": 0, "depot+1": 1, "depot+3": 3, "depot+5": 5}[variant]
    if per_city == 0:
        return []
    xmin, ymin, xmax, ymax = field.bounds
    diag = math.hypot(xmax - xmin, ymax - ymin)
    ux, uy = (xmax - xmin) / diag, (ymax - ymin) / diag
    offset = sigma_frac * field.sigma

    def clamp(p):
        x = min(max(round(p[0]), math.ceil(xmin)), math.floor(xmax))
        y = min(max(round(p[1]), math.ceil(ymin)), math.floor(ymax))
        return (int(x), int(y))

    out = []
    for cx, cy in field.centers:
        pts = [(cx, cy)]
        if per_city >= 3:
            pts += [(cx + offset * ux, cy + offset * uy),
                    (cx - offset * ux, cy - offset * uy)]
        if per_city >= 5:
            pts += [(cx + offset * uy, cy - offset * ux),
                    (cx - offset * uy, cy + offset * ux)]
        out.extend(clamp(p) for p in pts)
    deduped = []
    for p in out:
        if p not in deduped:
            deduped.append(p)
    return deduped


def _sample_times(horizon: float, count: int) -> list:
    if count < 2:
        raise ValueError("need at least 2 departure-time samples")
    raw = [round(k * horizon / (count - 1)) for k in range(count)]
    out = []
    for t in raw:
        if not out or t > out[-1]:
            out.append(int(t))
    return out


class PairFunctionBuilder:
    """Shares shortest-path trees across all pairs with a common origin."""

    def __init__(self, field: CongestionField, points: dict, config: GeneratorConfig):
        self.field = field
        self.config = config
        self.router = GridRouter(field)
        self.points = dict(points)  # id -> integer grid point
        self.samples = _sample_times(field.horizon, config.sample_count)
        self.curve = config.energy_curve()
        self._memo: dict = {}

    def functions_from(self, origin_id: str) -> dict:
        """(tau, rho) for every ordered pair (origin, other); memoized."""
        cached = self._memo.get(origin_id)
        if cached is not None:
            return cached
        origin = self.points[origin_id]
        target_ids = [i for i in self.points if i != origin_id]
        target_idx = [self.router.index(self.points[i]) for i in target_ids]
        trees = [self.router.search(origin, t0, targets=list(target_idx))
                 for t0 in self.samples]
        out = {}
        bits = self.config.quantum_bits
        for dest_id in target_ids:
            dest = self.points[dest_id]
            if dest == origin:
                out[dest_id] = (PwlFunction.constant(0), PwlFunction.constant(0))
                continue
            dur_samples = []
            en_samples = []
            for t0, (arrival, pred) in zip(self.samples, trees):
                t_arr = arrival[self.router.index(dest)]
                path = self.router.reconstruct(pred, dest)
                dur_samples.append((t0, quantize(float(t_arr) - t0, bits)))
                en_samples.append(
                    (t0, quantize(energy_along_path(path, t0, self.field, self.curve), bits)))
            out[dest_id] = (self._fit_duration(dur_samples), self._fit(en_samples))
        self._memo[origin_id] = out
        return out

    def _tolerance(self, samples) -> Scalar:
        lo = min(v for _, v in samples)
        hi = max(v for _, v in samples)
        return as_scalar(Fraction(self.config.fit_tolerance_frac).limit_denominator(10**6)
                         * (hi - lo))

    def _fit(self, samples) -> PwlFunction:
        return fit_pwl(samples, self.config.fit_breakpoints, tolerance=self._tolerance(samples))

    def _fit_duration(self, samples) -> PwlFunction:
        return fifo_clamp(self._fit(samples), self.config.quantum_bits)


def build_td_functions(pair: tuple, field: CongestionField, sample_count: int = 48,
                       config: Optional[GeneratorConfig] = None) -> tuple:
    """(duration, consumption) functions for one ordered point pair."""
    cfg = config or GeneratorConfig(sample_count=sample_count)
    if cfg.sample_count != sample_count:
        cfg = GeneratorConfig(**{**cfg.__dict__, "sample_count": sample_count})
    a, b = (tuple(pair[0]), tuple(pair[1]))
    if a == b:
        return PwlFunction.constant(0), PwlFunction.constant(0)
    builder = PairFunctionBuilder(field, {"a": a, "b": b}, cfg)
    return builder.functions_from("a")["b"]


def _field_for(raw: SolomonInstance, config: GeneratorConfig) -> CongestionField:
    xs = [n.x for n in raw.nodes]
    ys = [n.y for n in raw.nodes]
    bounds = (math.floor(min(xs)), math.floor(min(ys)),
              math.ceil(max(xs)), math.ceil(max(ys)))
    return CongestionField(bounds, float(raw.depot.due), config.tau_free,
                           config.congestion)


def _locations_for(raw: SolomonInstance, variant: str,
                   field: CongestionField, sigma_frac: float = 1.0) -> list:
    depot = raw.depot
    locations = [Location("depot", "depot", depot.x, depot.y,
                          ready=depot.ready, due=depot.due)]
    for n in raw.customers:
        locations.append(Location(f"c{n.id}", "customer", n.x, n.y, demand=n.demand,
                                  ready=n.ready, due=n.due, service=n.service))
    # station ids name the grid point so they agree across layout variants
    for sx, sy in station_coordinates(variant, field, sigma_frac):
        locations.append(Location(f"s{sx}_{sy}", "station", sx, sy,
                                  ready=0, due=depot.due))
    return locations


def make_builder(raw: SolomonInstance, config: GeneratorConfig = GeneratorConfig(),
                 variant: str = "depot+5") -> PairFunctionBuilder:
    """Builder covering the union of layouts, reusable across variants."""
    field = _field_for(raw, config)
    locations = _locations_for(raw, variant, field, config.station_sigma_frac)
    points = {loc.id: (int(round(loc.x)), int(round(loc.y))) for loc in locations}
    return PairFunctionBuilder(field, points, config)


def generate_instance(raw: SolomonInstance, variant: str,
                      config: GeneratorConfig = GeneratorConfig(),
                      builder: Optional[PairFunctionBuilder] = None) -> Instance:
    """Full instance for one charging-layout variant.

    Passing a ``builder`` (see :func:`make_builder`) reuses shortest-path
    trees and fitted pairs across variants; it must cover a superset of this
    variant's locations.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    depot = raw.depot
    horizon = float(depot.due)
    field = _field_for(raw, config)
    bounds = field.bounds
    locations = _locations_for(raw, variant, field, config.station_sigma_frac)

    points = {loc.id: (int(round(loc.x)), int(round(loc.y))) for loc in locations}
    if builder is None:
        builder = PairFunctionBuilder(field, points, config)
    else:
        missing = set(points) - set(builder.points)
        if missing:
            raise ValueError(f"builder does not cover locations {sorted(missing)}")
    tau = {}
    rho = {}
    for a in points:
        fns = builder.functions_from(a)
        for b in points:
            if b == a:
                continue
            tau[(a, b)], rho[(a, b)] = fns[b]

    curve = config.energy_curve()
    v_free = 1.0 / config.tau_free
    diag = math.hypot(bounds[2] - bounds[0], bounds[3] - bounds[1])
    if config.battery_capacity is not None:
        battery = quantize(config.battery_capacity, config.quantum_bits)
    else:
        battery = quantize(2.0 * diag * curve.rate(v_free) / 0.6, config.quantum_bits)
    if config.replenish_duration is not None:
        replen = quantize(config.replenish_duration, config.quantum_bits)
    else:
        replen = quantize(0.1 * float(battery) / curve.rate(v_free) * config.tau_free,
                          config.quantum_bits)

    return Instance(
        name=raw.name,
        variant=variant,
        horizon=as_scalar(int(horizon)),
        vehicle_capacity=as_scalar(raw.vehicle_capacity),
        battery_capacity=battery,
        replenish_duration=replen,
        locations=tuple(locations),
        tau=tau,
        rho=rho,
        generator={
            "tau_free": config.tau_free,
            "sample_count": config.sample_count,
            "fit_breakpoints": config.fit_breakpoints,
            "fit_tolerance_frac": config.fit_tolerance_frac,
            "sigma": field.sigma,
            "sigma_frac": config.congestion.sigma_frac,
            "cap": field.cap,
            "delta_points": [list(p) for p in config.congestion.delta_points],
            "centers": [list(c) for c in field.centers],
            "bounds": list(bounds),
            "energy": [curve.c0, curve.c1, curve.c2],
            "seed": config.seed,
        },
    )


def instance_field(instance: Instance) -> CongestionField:
    """Rebuild the congestion field an instance was generated with."""
    gen = instance.generator
    if not gen:
        raise ValueError("instance carries no generator parameters")
    cfg = CongestionConfig(
        delta_points=tuple(tuple(p) for p in gen["delta_points"]),
        sigma_frac=gen.get("sigma_frac", 0.15),
        cap=gen["cap"],
        centers=tuple(tuple(c) for c in gen["centers"]),
    )
    return CongestionField(tuple(gen["bounds"]), float(instance.horizon),
                           gen["tau_free"], cfg)
