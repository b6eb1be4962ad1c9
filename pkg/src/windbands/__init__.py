"""Minimal-width relative confidence bands for wind power point forecasts."""

from .core import (
    BandCoefficients,
    BandLimits,
    DayRecord,
    DimensionError,
    MeanProfile,
    ValidationError,
    band_limits,
    band_width,
    offband_energy,
)
from .optimizer import (
    BandProblem,
    BandSolution,
    SolverOptions,
    brute_force_oracle,
    build_instance,
    solve,
    solve_relaxation,
)

__version__ = "0.1.0"
