from .field import CongestionConfig, CongestionField
from .generate import (
    EnergyCurve,
    GeneratorConfig,
    PairFunctionBuilder,
    VARIANTS,
    build_td_functions,
    generate_instance,
    station_coordinates,
)
from .grid import GridRouter, energy_along_path, td_grid_shortest_path
from .instance import Instance, Location, load_instance
from .solomon import SolomonInstance, SolomonNode, parse_solomon

__all__ = [
    "CongestionConfig",
    "CongestionField",
    "EnergyCurve",
    "GeneratorConfig",
    "GridRouter",
    "Instance",
    "Location",
    "PairFunctionBuilder",
    "SolomonInstance",
    "SolomonNode",
    "VARIANTS",
    "build_td_functions",
    "energy_along_path",
    "generate_instance",
    "load_instance",
    "parse_solomon",
    "station_coordinates",
    "td_grid_shortest_path",
]
