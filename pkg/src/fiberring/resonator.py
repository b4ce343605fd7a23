"""
Closed-form response of a fiber ring resonator probed through a coupling fiber.

Near a resonance the complex field transmission of the coupling fiber is

    t = (kappa0 - kappa_ext + i*delta) / (kappa0 + kappa_ext + i*delta),

with delta = omega - omega0. All decay and coupling rates are angular
frequencies [rad/s]; free spectral ranges and linewidths are ordinary
frequencies [Hz].

The exact all-pass ring response

    t(phi) = (r - a*exp(i*phi)) / (1 - r*a*exp(i*phi))

is periodic in the round-trip phase and is used to synthesize scans that cover
several free spectral ranges. The rate mapping between (a, r) and
(kappa0, kappa_ext) is chosen so that the exact power transmission is *exactly*
Lorentzian in the variable 2*sin(phi/2)/tau (tau = round-trip time):

    kappa0    * tau = (1 + r)(1 - a) / (2 sqrt(r a)) = 2 cosh(rho/2) sinh(alpha/2)
    kappa_ext * tau = (1 - r)(1 + a) / (2 sqrt(r a)) = 2 cosh(alpha/2) sinh(rho/2)

where a = exp(-alpha), r = exp(-rho). To first order in the loss this reduces
to kappa0 = (1 - a^2) / (2 tau). The only remaining difference to the
Lorentzian is sin(phi/2) vs phi/2, a relative detuning error of phi^2/24.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .constants import C_LIGHT, TWO_PI

#: Largest kappa / (2 pi fsr) for which resonances count as well separated.
MAX_RESOLVED_RATIO = 0.1

#: Default relative tolerance for calling a resonator critically coupled.
CRITICAL_REL_TOL = 0.01


class ParameterError(ValueError):
    """Raised when resonator parameters leave their physical domain."""


class DegenerateRingError(ValueError):
    """Raised for a lossless, fully decoupled ring (a = r = 1)."""


class InfiniteFinesseError(ZeroDivisionError):
    """Raised when a finesse is requested for a lossless resonator."""


class LorentzianValidityWarning(UserWarning):
    """Resonances are not well separated; the Lorentzian model is inaccurate."""


class CouplingRegime(enum.Enum):
    UNDERCOUPLED = "under"
    CRITICAL = "critical"
    OVERCOUPLED = "over"


@dataclass(frozen=True)
class ResonatorParams:
    """
    Ring resonator parameters.

    Parameters
    ----------
    kappa0 : float
        Unloaded field decay rate [rad/s].
    kappa_ext : float
        Fiber-resonator coupling rate [rad/s].
    omega0 : float
        Resonance frequency [rad/s].
    fsr_hz : float
        Free spectral range [Hz].
    length_m : float, optional
        Geometric ring length [m].
    group_index : float, optional
        Group index linking length and free spectral range.
    """

    kappa0: float
    kappa_ext: float
    omega0: float
    fsr_hz: float
    length_m: Optional[float] = None
    group_index: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.kappa0 > 0:
            raise ParameterError(f"kappa0 must be positive, got {self.kappa0}")
        if not self.kappa_ext >= 0:
            raise ParameterError(f"kappa_ext must be non-negative, got {self.kappa_ext}")
        if not self.omega0 > 0:
            raise ParameterError(f"omega0 must be positive, got {self.omega0}")
        if not self.fsr_hz > 0:
            raise ParameterError(f"fsr_hz must be positive, got {self.fsr_hz}")
        if self.length_m is not None and not self.length_m > 0:
            raise ParameterError(f"length_m must be positive, got {self.length_m}")
        if self.group_index is not None and not self.group_index > 1:
            raise ParameterError(f"group_index must exceed 1, got {self.group_index}")
        if self.length_m is not None and self.group_index is not None:
            c_est = self.fsr_hz * self.length_m * self.group_index
            if abs(c_est / C_LIGHT - 1.0) > 1e-9:
                raise ParameterError(
                    "fsr_hz * length_m * group_index must equal c "
                    f"(got {c_est:.9e} m/s)"
                )
        if not self.well_resolved:
            warnings.warn(
                f"kappa/2pi = {self.kappa / TWO_PI:.4g} Hz exceeds "
                f"{MAX_RESOLVED_RATIO} * fsr: resonances overlap and the Lorentzian "
                "model is inaccurate",
                LorentzianValidityWarning,
                stacklevel=3,
            )

    @classmethod
    def from_length(
        cls,
        kappa0: float,
        kappa_ext: float,
        omega0: float,
        length_m: float,
        group_index: float,
    ) -> "ResonatorParams":
        """Build parameters with the FSR derived from length and group index."""
        return cls(
            kappa0=kappa0,
            kappa_ext=kappa_ext,
            omega0=omega0,
            fsr_hz=fsr_from_length(length_m, group_index),
            length_m=length_m,
            group_index=group_index,
        )

    @property
    def kappa(self) -> float:
        """Total field decay rate kappa0 + kappa_ext [rad/s]."""
        return self.kappa0 + self.kappa_ext

    @property
    def linewidth_hz(self) -> float:
        """Loaded FWHM of the transmission dip [Hz] (= kappa / pi)."""
        return self.kappa / math.pi

    @property
    def loaded_finesse(self) -> float:
        return math.pi * self.fsr_hz / self.kappa

    @property
    def well_resolved(self) -> bool:
        return self.kappa / TWO_PI <= MAX_RESOLVED_RATIO * self.fsr_hz

    @property
    def round_trip_time(self) -> float:
        """Round-trip time 1 / fsr_hz [s]."""
        return 1.0 / self.fsr_hz

    @property
    def on_resonance_transmission(self) -> float:
        return on_resonance_transmission(self.kappa0, self.kappa)


@dataclass(frozen=True)
class RingAmplitudes:
    """
    Field amplitudes of the exact ring model.

    round_trip_amp is the intrinsic field transmission a per round trip,
    through_amp the beam-splitter through-port field amplitude r. a = 1 is a
    lossless ring, r = 1 a fully decoupled one.
    """

    round_trip_amp: float
    through_amp: float

    def __post_init__(self) -> None:
        for name in ("round_trip_amp", "through_amp"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ParameterError(f"{name} must lie in (0, 1], got {v}")


def field_transmission(params: ResonatorParams, omega: ArrayLike):
    """Complex field transmission of the coupling fiber at angular frequency omega."""
    delta = np.asarray(omega, dtype=float) - params.omega0
    t = np.asarray((params.kappa0 - params.kappa_ext + 1j * delta) / (params.kappa + 1j * delta))
    return t if t.ndim else complex(t)


def power_transmission(params: ResonatorParams, omega: ArrayLike):
    """Power transmission T = |t|^2."""
    return power_transmission_detuned(params, np.asarray(omega, dtype=float) - params.omega0)


def power_transmission_detuned(params: ResonatorParams, delta: ArrayLike):
    """
    T as a function of the detuning delta = omega - omega0 [rad/s].

    Avoids forming omega0 + delta, which at optical frequencies loses about
    eight digits of the detuning.
    """
    delta = np.asarray(delta, dtype=float)
    d2 = delta * delta
    T = ((params.kappa0 - params.kappa_ext) ** 2 + d2) / (params.kappa**2 + d2)
    return T if T.ndim else float(T)


def on_resonance_transmission(kappa0: ArrayLike, kappa: ArrayLike):
    """T_r = ((2 kappa0 - kappa) / kappa)^2 for total decay rate kappa."""
    kappa = np.asarray(kappa, dtype=float)
    T = ((2.0 * np.asarray(kappa0, dtype=float) - kappa) / kappa) ** 2
    return T if T.ndim else float(T)


def round_trip_phase(detuning: ArrayLike, fsr_hz: float):
    """
    Round-trip phase for an angular detuning omega - omega0 [rad/s].

    The sign is chosen so that exact_ring_transmission reproduces
    field_transmission including its phase near resonance.
    """
    return -np.asarray(detuning, dtype=float) / fsr_hz


def exact_ring_transmission(amps: RingAmplitudes, round_trip_phase: ArrayLike):
    """Complex field transmission of the all-pass ring (Airy form)."""
    a, r = amps.round_trip_amp, amps.through_amp
    if a == 1.0 and r == 1.0:
        raise DegenerateRingError("a = r = 1 describes a lossless, decoupled ring")
    e = np.exp(1j * np.asarray(round_trip_phase, dtype=float))
    t = (r - a * e) / (1.0 - r * a * e)
    return t if t.ndim else complex(t)


def exact_ring_power(amps: RingAmplitudes, round_trip_phase: ArrayLike):
    """|exact_ring_transmission|^2, evaluated in a cancellation-free form."""
    a, r = amps.round_trip_amp, amps.through_amp
    if a == 1.0 and r == 1.0:
        raise DegenerateRingError("a = r = 1 describes a lossless, decoupled ring")
    s2 = 4.0 * r * a * np.sin(0.5 * np.asarray(round_trip_phase, dtype=float)) ** 2
    T = ((r - a) ** 2 + s2) / ((1.0 - r * a) ** 2 + s2)
    return T if T.ndim else float(T)


def _rates_from_amplitudes(a: float, r: float, tau: float) -> tuple[float, float]:
    root = math.sqrt(r * a) * tau * 2.0
    return (1.0 + r) * (1.0 - a) / root, (1.0 - r) * (1.0 + a) / root


def _amplitudes_from_rates(kappa0: float, kappa_ext: float, tau: float) -> tuple[float, float]:
    x, y = kappa0 * tau, kappa_ext * tau
    s = x * x + y * y + 4.0
    u = 2.0 / (s + math.sqrt(s * s - 4.0 * x * x * y * y))
    su = math.sqrt(u)
    A, R = x * su, y * su
    return (1.0 - A) / (1.0 + A), (1.0 - R) / (1.0 + R)


def rates_from_ring(amps: RingAmplitudes, length_m: float, group_index: float) -> tuple[float, float]:
    """
    Map ring amplitudes to (kappa0, kappa_ext) [rad/s].

    Uses the exact Lorentzian-matching form given in the module docstring.
    """
    tau = group_index * length_m / C_LIGHT
    return _rates_from_amplitudes(amps.round_trip_amp, amps.through_amp, tau)


def ring_from_rates(kappa0: float, kappa_ext: float, length_m: float, group_index: float) -> RingAmplitudes:
    """Inverse of :func:`rates_from_ring`."""
    if kappa0 < 0 or kappa_ext < 0:
        raise ParameterError("decay rates must be non-negative")
    tau = group_index * length_m / C_LIGHT
    a, r = _amplitudes_from_rates(kappa0, kappa_ext, tau)
    return RingAmplitudes(a, r)


def ring_from_params(params: ResonatorParams) -> RingAmplitudes:
    """Ring amplitudes for a parameter set, using its round-trip time 1/FSR."""
    a, r = _amplitudes_from_rates(params.kappa0, params.kappa_ext, params.round_trip_time)
    return RingAmplitudes(a, r)


def classify_regime(kappa0: float, kappa_ext: float, rel_tol: float = CRITICAL_REL_TOL) -> CouplingRegime:
    if kappa0 < 0 or kappa_ext < 0:
        raise ParameterError("decay rates must be non-negative")
    if abs(kappa_ext - kappa0) <= rel_tol * kappa0:
        return CouplingRegime.CRITICAL
    return CouplingRegime.UNDERCOUPLED if kappa_ext < kappa0 else CouplingRegime.OVERCOUPLED


def finesse(kappa0: float, fsr_hz: float) -> float:
    """
    Unloaded finesse F = nu_FSR / delta_nu.

    delta_nu = kappa0 / pi is the unloaded FWHM in Hz, so F = pi * fsr_hz / kappa0
    with kappa0 in rad/s.
    """
    if kappa0 == 0:
        raise InfiniteFinesseError("kappa0 = 0 gives infinite finesse")
    return math.pi * fsr_hz / kappa0


def quality_factor(omega0: float, kappa0: float) -> float:
    """Q = omega0 / (2 kappa0)."""
    if kappa0 == 0:
        raise InfiniteFinesseError("kappa0 = 0 gives infinite Q")
    return omega0 / (2.0 * kappa0)


def fsr_from_length(length_m: float, group_index: float) -> float:
    """Free spectral range c / (n_g l) [Hz]."""
    if length_m <= 0:
        raise ParameterError(f"length must be positive, got {length_m}")
    return C_LIGHT / (group_index * length_m)


def group_index_from_fsr(fsr_hz: float, length_m: float) -> float:
    """Effective group index c / (nu_FSR l) implied by a measured FSR and length."""
    return C_LIGHT / (fsr_hz * length_m)


def linewidth_from_rate(kappa: float) -> float:
    """FWHM [Hz] of a dip with total field decay rate kappa [rad/s]."""
    return kappa / math.pi


def regime_coupling(kappa0: float, regime: str | CouplingRegime) -> float:
    """Default kappa_ext for a named regime: 0.3, 1 or 3 times kappa0."""
    regime = CouplingRegime(regime) if isinstance(regime, str) else regime
    factor = {
        CouplingRegime.UNDERCOUPLED: 0.3,
        CouplingRegime.CRITICAL: 1.0,
        CouplingRegime.OVERCOUPLED: 3.0,
    }[regime]
    return factor * kappa0


__all__ = [
    "TWO_PI",
    "CouplingRegime",
    "DegenerateRingError",
    "InfiniteFinesseError",
    "LorentzianValidityWarning",
    "ParameterError",
    "ResonatorParams",
    "RingAmplitudes",
    "classify_regime",
    "exact_ring_power",
    "exact_ring_transmission",
    "field_transmission",
    "finesse",
    "fsr_from_length",
    "group_index_from_fsr",
    "linewidth_from_rate",
    "on_resonance_transmission",
    "power_transmission",
    "power_transmission_detuned",
    "quality_factor",
    "rates_from_ring",
    "regime_coupling",
    "ring_from_params",
    "ring_from_rates",
    "round_trip_phase",
]
