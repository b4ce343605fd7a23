"""Fiber ring resonators with a nanofiber section: transmission model, spectrum fits, HE11 mode, CQED scaling."""

__version__ = "0.1.0"

from .resonator import (
    CouplingRegime,
    ResonatorParams,
    RingAmplitudes,
    classify_regime,
    exact_ring_transmission,
    field_transmission,
    finesse,
    fsr_from_length,
    power_transmission,
    quality_factor,
    rates_from_ring,
    ring_from_rates,
)
from .spectrum import (
    CouplingSweepDataset,
    FitResult,
    SpectrumTrace,
    detect_resonances,
    fit_lorentzian,
    global_kappa0_fit,
    synthesize_trace,
)
from .mode import FiberGeometry, ModeSolution, coupling_strength_at, intensity_profile, solve_he11
from .cqed import (
    AtomParams,
    ScalingReference,
    collective_cooperativity,
    collective_coupling,
    multimode_polariton_spectrum,
    multimode_threshold,
    scale_with_length,
    single_atom_cooperativity,
)

__all__ = [
    "AtomParams",
    "CouplingRegime",
    "CouplingSweepDataset",
    "FiberGeometry",
    "FitResult",
    "ModeSolution",
    "ResonatorParams",
    "RingAmplitudes",
    "ScalingReference",
    "SpectrumTrace",
    "classify_regime",
    "collective_cooperativity",
    "collective_coupling",
    "coupling_strength_at",
    "detect_resonances",
    "exact_ring_transmission",
    "field_transmission",
    "finesse",
    "fit_lorentzian",
    "fsr_from_length",
    "global_kappa0_fit",
    "intensity_profile",
    "multimode_polariton_spectrum",
    "multimode_threshold",
    "power_transmission",
    "quality_factor",
    "rates_from_ring",
    "ring_from_rates",
    "scale_with_length",
    "single_atom_cooperativity",
    "solve_he11",
    "synthesize_trace",
]
