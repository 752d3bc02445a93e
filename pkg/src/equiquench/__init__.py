"""Thermal relaxation of few-level open quantum systems from equidistant
initial states, with uphill/downhill classification and a three-level
phase diagram."""

from .distances import ALL_MEASURES, Measure, distance, distance_from_deviation
from .errors import EquiquenchError, NumericalError, ValidationError
from .lindblad import build_superoperator, decompose, decompose_system, propagate, propagate_expm
from .phasemap import PhaseDiagram, SweepSpec, boundary, sweep
from .quench import (
    EquidistantPair,
    Verdict,
    VerdictKind,
    classify,
    coherence_locus,
    coherent_partner,
    find_equidistant_pair,
    regime_report,
    run_quench,
)
from .system import (
    CoherentInitialSpec,
    DensityMatrix,
    LevelSystem,
    coherent_state,
    thermal_state,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_MEASURES", "Measure", "distance", "distance_from_deviation",
    "EquiquenchError", "NumericalError", "ValidationError",
    "build_superoperator", "decompose", "decompose_system", "propagate", "propagate_expm",
    "PhaseDiagram", "SweepSpec", "boundary", "sweep",
    "EquidistantPair", "Verdict", "VerdictKind", "classify", "coherence_locus",
    "coherent_partner", "find_equidistant_pair", "regime_report", "run_quench",
    "CoherentInitialSpec", "DensityMatrix", "LevelSystem", "coherent_state", "thermal_state",
]
