"""Routing-instance container and its versioned JSON schema."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..pwl import PwlFunction, Scalar, as_scalar, scalar_to_json

SCHEMA = "td-ev-instance/1"


@dataclass(frozen=True)
class Location:
    id: str
    kind: str  # depot | customer | station
    x: float
    y: float
    demand: float = 0
    ready: float = 0
    due: float = 0
    service: float = 0


@dataclass
class Instance:
    """Locations plus a time-dependent travel-time and consumption function
    per ordered location pair."""

    name: str
    variant: str
    horizon: Scalar
    vehicle_capacity: Scalar
    battery_capacity: Scalar
    replenish_duration: Scalar
    locations: tuple
    tau: dict  # (from_id, to_id) -> PwlFunction, time units
    rho: dict  # (from_id, to_id) -> PwlFunction, resource units
    generator: dict = field(default_factory=dict)

    def __post_init__(self):
        self._by_id = {loc.id: loc for loc in self.locations}

    @property
    def depot(self) -> Location:
        return next(l for l in self.locations if l.kind == "depot")

    @property
    def customers(self) -> tuple:
        return tuple(l for l in self.locations if l.kind == "customer")

    @property
    def stations(self) -> tuple:
        """Charging options: the depot counts except in the `none` variant."""
        fixed = tuple(l for l in self.locations if l.kind == "station")
        if self.variant == "none":
            return fixed
        return (self.depot, *fixed)

    def location(self, loc_id: str) -> Location:
        return self._by_id[loc_id]

    def distance(self, a: str, b: str) -> float:
        la, lb = self._by_id[a], self._by_id[b]
        return math.hypot(la.x - lb.x, la.y - lb.y)

    def duration_fn(self, a: str, b: str) -> PwlFunction:
        return self.tau[(a, b)]

    def consumption_fn(self, a: str, b: str) -> PwlFunction:
        return self.rho[(a, b)]

    def to_json(self) -> dict:
        nodes = [
            {
                "id": l.id, "kind": l.kind, "x": l.x, "y": l.y,
                "demand": l.demand, "ready": l.ready, "due": l.due,
                "service": l.service,
            }
            for l in self.locations
        ]
        pairs = [
            {"from": a, "to": b,
             "tau": self.tau[(a, b)].to_json(),
             "rho": self.rho[(a, b)].to_json()}
            for (a, b) in sorted(self.tau)
        ]
        return {
            "schema": SCHEMA,
            "name": self.name,
            "variant": self.variant,
            "horizon": scalar_to_json(self.horizon),
            "vehicle_capacity": scalar_to_json(self.vehicle_capacity),
            "battery_capacity": scalar_to_json(self.battery_capacity),
            "replenish_duration": scalar_to_json(self.replenish_duration),
            "nodes": nodes,
            "pairs": pairs,
            "generator": self.generator,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Instance":
        if obj.get("schema") != SCHEMA:
            raise ValueError(f"unsupported instance schema {obj.get('schema')!r}")
        locations = tuple(
            Location(n["id"], n["kind"], n["x"], n["y"], n.get("demand", 0),
                     n.get("ready", 0), n.get("due", 0), n.get("service", 0))
            for n in obj["nodes"]
        )
        tau = {}
        rho = {}
        for p in obj["pairs"]:
            key = (p["from"], p["to"])
            tau[key] = PwlFunction.from_json(p["tau"])
            rho[key] = PwlFunction.from_json(p["rho"])
        return cls(
            name=obj["name"],
            variant=obj["variant"],
            horizon=as_scalar(obj["horizon"]),
            vehicle_capacity=as_scalar(obj["vehicle_capacity"]),
            battery_capacity=as_scalar(obj["battery_capacity"]),
            replenish_duration=as_scalar(obj["replenish_duration"]),
            locations=locations,
            tau=tau,
            rho=rho,
            generator=obj.get("generator", {}),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)

def load_instance(path) -> Instance:
    with open(path) as fh:
        return Instance.from_json(json.load(fh))
