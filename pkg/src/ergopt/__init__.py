"""Ergodic optimization and zero-temperature rates for locally constant potentials on SFTs."""
from .errors import ErgoptError
from .fileformat import SystemSpec, parse_system_file, serialize
from .pipeline import Analysis, analyze, beta_grid, sweep, verify
from .potential import LocallyConstantPotential
from .sft import EventuallyPeriodicPoint, SymbolicSystem, build_system, recode
from .thermo import PrecisionConfig, pressure

__all__ = [
    "Analysis", "ErgoptError", "EventuallyPeriodicPoint", "LocallyConstantPotential",
    "PrecisionConfig", "SymbolicSystem", "SystemSpec", "analyze", "beta_grid", "build_system",
    "parse_system_file", "pressure", "recode", "serialize", "sweep", "verify",
]
