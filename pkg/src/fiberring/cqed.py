"""
Cavity-QED figures of merit and resonator-length scaling.

Rates (g, gamma, kappa0) are angular frequencies [rad/s]; FSRs are in Hz. The
multimode criterion compares g_coll / (2 pi) with the FSR.

Length scaling keeps the guided-mode cross section fixed, so g ~ l^(-1/2) and
the FSR ~ 1/l. The unloaded decay rate follows from the round-trip loss,

    kappa0(l) = (L(l) / 2) * fsr(l),   L(l) = ln(10)/10 * (taper_dB + alpha_dB_per_km * l / 1000),

where the loss L is expressed as ln(1 / round-trip power transmission). The
taper loss is fixed by requiring kappa0(l_ref) = kappa0_ref.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import DB_TO_NEPER_POWER, TWO_PI

#: Finesse below which the small-loss rate mapping is flagged.
MIN_SMALL_LOSS_FINESSE = 20.0


class NoThresholdError(RuntimeError):
    """g_coll / 2 pi never reaches the FSR in the searched length range."""


class SmallLossWarning(UserWarning):
    """Round-trip loss too large for the small-loss rate mapping."""


def _positive(**values: float) -> None:
    for name, v in values.items():
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class AtomParams:
    """Emitter ensemble: dipole decay rate and single-atom coupling [rad/s], atom number."""

    gamma: float
    g_single: float
    n_atoms: int = 1

    def __post_init__(self) -> None:
        _positive(gamma=self.gamma, g_single=self.g_single)
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")


@dataclass(frozen=True)
class ScalingReference:
    """
    Measured anchor point of the length scaling.

    Parameters
    ----------
    l_ref : float
        Anchor resonator length [m].
    kappa0_ref : float
        Unloaded decay rate at l_ref [rad/s].
    g_ref : float
        Single-atom coupling at l_ref [rad/s].
    fsr_ref : float
        FSR at l_ref [Hz].
    alpha_fiber_db_per_km : float
        Propagation loss of the standard fiber [dB/km].
    """

    l_ref: float
    kappa0_ref: float
    g_ref: float
    fsr_ref: float
    alpha_fiber_db_per_km: float = 1.5

    def __post_init__(self) -> None:
        _positive(l_ref=self.l_ref, kappa0_ref=self.kappa0_ref, g_ref=self.g_ref, fsr_ref=self.fsr_ref)
        if self.alpha_fiber_db_per_km < 0:
            raise ValueError("fiber loss must be non-negative")
        if self.taper_loss_db < 0:
            raise ValueError(
                "anchor kappa0 is smaller than the fiber propagation loss alone "
                f"(taper loss {self.taper_loss_db:.4g} dB)"
            )

    @property
    def round_trip_loss_ref(self) -> float:
        """ln(1/T_round_trip) at l_ref."""
        return 2.0 * self.kappa0_ref / self.fsr_ref

    @property
    def taper_loss_db(self) -> float:
        """Per-round-trip loss not accounted for by fiber propagation [dB]."""
        total_db = self.round_trip_loss_ref / DB_TO_NEPER_POWER
        return total_db - self.alpha_fiber_db_per_km * self.l_ref / 1000.0

    @property
    def group_index(self) -> float:
        from .constants import C_LIGHT

        return C_LIGHT / (self.fsr_ref * self.l_ref)


@dataclass(frozen=True)
class ScalingPoint:
    length_m: float
    g: float  # rad/s
    g_coll: float  # rad/s
    fsr_hz: float
    kappa0: float  # rad/s
    c0: float
    c_coll: float
    finesse: float


def single_atom_cooperativity(g: float, kappa0: float, gamma: float) -> float:
    """C0 = g^2 / (2 kappa0 gamma), with the unloaded decay rate."""
    _positive(g=g, kappa0=kappa0, gamma=gamma)
    return g * g / (2.0 * kappa0 * gamma)


def collective_coupling(g: float, n_atoms: float) -> float:
    """sqrt(N) g."""
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    return math.sqrt(n_atoms) * g


def collective_cooperativity(c0: float, n_atoms: float) -> float:
    return n_atoms * c0


def round_trip_loss(ref: ScalingReference, length_m):
    """ln(1/T_round_trip) for a ring of the given length."""
    db = ref.taper_loss_db + ref.alpha_fiber_db_per_km * np.asarray(length_m, dtype=float) / 1000.0
    return DB_TO_NEPER_POWER * db


def scale_with_length(ref: ScalingReference, atoms: AtomParams, length_m: float) -> ScalingPoint:
    """All length-dependent figures of merit; the atom number is held fixed."""
    _positive(length_m=length_m)
    ratio = ref.l_ref / length_m
    g = ref.g_ref * math.sqrt(ratio)
    fsr = ref.fsr_ref * ratio
    loss = float(round_trip_loss(ref, length_m))
    kappa0 = 0.5 * loss * fsr
    fin = math.pi * fsr / kappa0
    if fin < MIN_SMALL_LOSS_FINESSE:
        warnings.warn(
            f"finesse {fin:.3g} at l = {length_m:g} m is below {MIN_SMALL_LOSS_FINESSE}; "
            "the small-loss rate mapping is inaccurate",
            SmallLossWarning,
            stacklevel=2,
        )
    c0 = single_atom_cooperativity(g, kappa0, atoms.gamma)
    return ScalingPoint(
        length_m=float(length_m),
        g=g,
        g_coll=collective_coupling(g, atoms.n_atoms),
        fsr_hz=fsr,
        kappa0=kappa0,
        c0=c0,
        c_coll=collective_cooperativity(c0, atoms.n_atoms),
        finesse=fin,
    )


def length_sweep(ref: ScalingReference, atoms: AtomParams, lengths) -> list[ScalingPoint]:
    return [scale_with_length(ref, atoms, float(l)) for l in np.atleast_1d(lengths)]


def _mismatch(ref: ScalingReference, atoms: AtomParams, length_m: float) -> float:
    # (g_coll / 2 pi) / fsr - 1; increasing in l
    g_coll = collective_coupling(ref.g_ref * math.sqrt(ref.l_ref / length_m), atoms.n_atoms)
    return g_coll / TWO_PI / (ref.fsr_ref * ref.l_ref / length_m) - 1.0


def multimode_threshold(
    ref: ScalingReference,
    atoms: AtomParams,
    l_max: float = 1e4,
    rel_tol: float = 1e-10,
) -> float:
    """
    Shortest length at which g_coll / (2 pi) equals the FSR.

    A logarithmic grid over (1e-6 m, l_max] brackets the first crossing;
    bisection refines it to ``rel_tol``.
    """
    grid = np.geomspace(1e-6, l_max, 2001)
    vals = np.array([_mismatch(ref, atoms, l) for l in grid])
    if vals[0] >= 0:
        raise NoThresholdError("g_coll already exceeds the FSR at the shortest length")
    idx = np.flatnonzero((vals[:-1] < 0) & (vals[1:] >= 0))
    if idx.size == 0:
        raise NoThresholdError(f"g_coll / 2 pi stays below the FSR up to {l_max:g} m")
    lo, hi = grid[idx[0]], grid[idx[0] + 1]
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _mismatch(ref, atoms, mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def multimode_threshold_closed_form(ref: ScalingReference, atoms: AtomParams) -> float:
    """l* = l_ref (2 pi fsr_ref / g_coll_ref)^2."""
    g_coll = collective_coupling(ref.g_ref, atoms.n_atoms)
    return ref.l_ref * (TWO_PI * ref.fsr_ref / g_coll) ** 2


# --------------------------------------------------------------------------- polaritons


def arrowhead_matrix(tip: float, poles, couplings) -> np.ndarray:
    """Symmetric arrowhead matrix [[tip, c^T], [c, diag(poles)]]."""
    poles = np.asarray(poles, dtype=float)
    c = np.broadcast_to(np.asarray(couplings, dtype=float), poles.shape)
    n = poles.size
    M = np.zeros((n + 1, n + 1))
    M[0, 0] = tip
    M[0, 1:] = c
    M[1:, 0] = c
    M[1:, 1:] = np.diag(poles)
    return M


def arrowhead_eigenvalues(tip: float, poles, couplings, max_iter: int = 200) -> np.ndarray:
    """
    Eigenvalues of a symmetric arrowhead matrix by bracketed root finding.

    With distinct poles d_j and non-zero couplings c_j, the eigenvalues are the
    roots of the secular function

        f(x) = x - tip - sum_j c_j^2 / (x - d_j),

    which is strictly increasing between consecutive poles, so every interval
    (and the two unbounded ends, cut off by Gershgorin bounds) holds exactly
    one root. Bisection runs on all intervals at once; each root is evaluated
    relative to its nearer pole to keep full precision. Zero couplings decouple
    their pole, which is returned as an eigenvalue unchanged.
    """
    poles = np.asarray(poles, dtype=float).ravel()
    c = np.broadcast_to(np.asarray(couplings, dtype=float), poles.shape).ravel()
    if poles.size == 0:
        return np.array([float(tip)])
    coupled = c != 0.0
    decoupled = poles[~coupled]
    d = poles[coupled]
    c2 = c[coupled] ** 2
    if d.size == 0:
        return np.sort(np.concatenate([[float(tip)], decoupled]))
    order = np.argsort(d)
    d, c2 = d[order], c2[order]
    if np.any(np.diff(d) == 0):
        # equal poles: merge into one effective coupling; the rest stay at the pole
        uniq, inv = np.unique(d, return_inverse=True)
        counts = np.bincount(inv)
        decoupled = np.concatenate([decoupled, np.repeat(uniq, counts - 1)])
        c2 = np.bincount(inv, weights=c2)
        d = uniq

    radius = abs(tip) + np.sum(np.abs(d)) + np.sum(np.sqrt(c2)) + 1.0
    lower = np.concatenate([[min(tip, d[0]) - radius], d])
    upper = np.concatenate([d, [max(tip, d[-1]) + radius]])
    # roots expressed as offset from an anchor pole for precision
    lo = np.zeros_like(lower)
    hi = upper - lower
    anchor = lower.copy()
    anchor[0] = upper[0]
    lo[0], hi[0] = lower[0] - upper[0], 0.0

    def secular(mu):
        diff = (anchor - d[:, None]) + mu  # x - d_j, shape (m, k)
        return anchor + mu - tip - np.sum(c2[:, None] / diff, axis=0)

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f = secular(mid)
        neg = f < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
        if np.all((hi - lo) <= 4 * np.finfo(float).eps * np.maximum(np.abs(anchor + mid), 1e-300)):
            break
    roots = anchor + 0.5 * (lo + hi)
    return np.sort(np.concatenate([roots, decoupled]))


def mode_frequencies(fsr_hz: float, n_modes: int) -> np.ndarray:
    """Angular frequencies of n_modes longitudinal modes centred on zero [rad/s]."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    m = np.arange(n_modes) - (n_modes - 1) / 2.0
    return TWO_PI * fsr_hz * m


def multimode_polariton_spectrum(
    g_coll: float,
    fsr_hz: float,
    n_modes: int,
    detuning_offset: float = 0.0,
) -> np.ndarray:
    """
    Polariton eigenfrequencies [rad/s] of one collective atomic excitation
    coupled with strength g_coll to n_modes ring modes spaced by 2 pi fsr_hz.

    Frequencies are relative to the central mode; the atom sits at
    ``detuning_offset``. Returns n_modes + 1 values in ascending order.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if n_modes % 2 == 0:
        raise ValueError("n_modes must be odd so that a mode sits at zero detuning")
    if g_coll < 0 or not fsr_hz > 0:
        raise ValueError("g_coll must be >= 0 and fsr_hz > 0")
    return arrowhead_eigenvalues(detuning_offset, mode_frequencies(fsr_hz, n_modes), g_coll)
