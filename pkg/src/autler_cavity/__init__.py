"""Autler-Townes probe spectrum of a V-type atom in a thermally driven bad cavity."""

__version__ = "0.1.0"

from .bloch import AtomState, build_population_generator, inversion_thresholds, steady_state
from .errors import (
    AutlerCavityError,
    DegenerateSteadyState,
    DimensionOverflow,
    GeneratorNotDamped,
    GridTooNarrow,
    NoSignChange,
    NonPhysicalState,
    ParameterError,
    PeakTooCoarse,
    SingularGenerator,
    UnknownPreset,
)
from .params import ModelParams, RateKernel, rate_kernel, sideband_centers, sideband_linewidths
from .spectrum import (
    SpectrumPoint,
    SpectrumTrace,
    build_coherence_generator,
    extract_peaks,
    spectrum_point,
    spectrum_trace,
    sum_rule_check,
)
