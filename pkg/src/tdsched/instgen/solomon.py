"""Parser for the classic Solomon VRPTW text format.

Layout: an instance name on the first line, a VEHICLE section with a
NUMBER / CAPACITY pair, and a CUSTOMER table with seven columns
(id, x, y, demand, ready time, due date, service time). Row 0 is the depot.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class SolomonNode:
    id: int
    x: float
    y: float
    demand: float
    ready: float
    due: float
    service: float


@dataclass(frozen=True)
class SolomonInstance:
    name: str
    vehicle_count: int
    vehicle_capacity: float
    nodes: tuple  # nodes[0] is the depot

    @property
    def depot(self) -> SolomonNode:
        return self.nodes[0]

    @property
    def customers(self) -> tuple:
        return self.nodes[1:]

    def truncated(self, n_customers: int) -> "SolomonInstance":
        """Keep the depot and the first n customers."""
        return replace(self, nodes=self.nodes[:n_customers + 1])


def _num(token: str) -> float:
    v = float(token)
    return int(v) if v == int(v) else v


def parse_solomon(text: str) -> SolomonInstance:
    lines = text.splitlines()
    name = None
    vehicle_count = None
    capacity = None
    nodes = []
    section = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if name is None:
            name = line
            continue
        if upper.startswith("VEHICLE"):
            section = "vehicle"
            continue
        if upper.startswith("CUSTOMER"):
            section = "customer"
            continue
        tokens = line.split()
        if section == "vehicle":
            if upper.startswith("NUMBER"):
                continue
            try:
                vehicle_count = int(float(tokens[0]))
                capacity = _num(tokens[1])
            except (ValueError, IndexError):
                raise ValueError(f"line {lineno}: expected vehicle number and capacity")
            section = "vehicle-done"
            continue
        if section == "customer":
            if upper.startswith("CUST"):
                continue
            if len(tokens) != 7:
                raise ValueError(f"line {lineno}: expected 7 columns, found {len(tokens)}")
            try:
                values = [_num(tok) for tok in tokens]
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric customer field")
            nodes.append(SolomonNode(int(values[0]), *values[1:]))
    if name is None:
        raise ValueError("empty file")
    if vehicle_count is None or capacity is None:
        raise ValueError("missing VEHICLE section")
    if not nodes:
        raise ValueError("missing CUSTOMER table")
    if len(nodes) < 2:
        raise ValueError("customer table holds only the depot")
    if nodes[0].id != 0:
        raise ValueError("first customer row must be the depot (id 0)")
    return SolomonInstance(name, vehicle_count, capacity, tuple(nodes))
