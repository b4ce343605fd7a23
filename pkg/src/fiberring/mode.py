"""
Fundamental HE11 mode of a step-index cylinder (e.g. a vacuum-clad nanofiber).

Conventions: fields vary as exp(i(beta z + p phi - omega t)) with circulation
p = +1 for the solved mode, u = h a, w = q a with

    h = sqrt(n_core^2 k^2 - beta^2),  q = sqrt(beta^2 - n_clad^2 k^2).

The HE11 branch of the exact hybrid-mode eigenvalue equation is used in the
explicitly factored form

    J0(u) / (u J1(u)) = -(n1^2 + n2^2) / (2 n1^2) * K1'(w) / (w K1(w)) + 1/u^2 - R,

    R = sqrt( ((n1^2 - n2^2) / (2 n1^2))^2 (K1'(w) / (w K1(w)))^2
              + (n_eff / n1)^2 (1/w^2 + 1/u^2)^2 ),

which is one of the two factors of the textbook product form
[J1'/(uJ1) + K1'/(wK1)] [n1^2 J1'/(uJ1) + n2^2 K1'/(wK1)] = n_eff^2 (1/u^2 + 1/w^2)^2.

Field amplitudes are normalized to E_z = J1(h r) in the core. Magnetic fields
are returned as Z0 * H so every component is dimensionless.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .bessel import bessel_j012, bessel_k012

HE11_CUTOFF_V = 2.404825557695773  # first zero of J0; next mode cutoff
ROOT_GRID_POINTS = 2000
CUTOFF_REFINE_POINTS = 200


class MultiModeWarning(UserWarning):
    """V is above the second-mode cutoff; only HE11 is returned."""


class GeometryError(ValueError):
    """Invalid fiber geometry."""


class NoGuidedModeError(RuntimeError):
    """The HE11 characteristic equation has no bracketed root."""


@dataclass(frozen=True)
class FiberGeometry:
    """
    Step-index fiber cross section.

    Parameters
    ----------
    radius_m : float
        Core (nanofiber) radius [m].
    wavelength_m : float
        Vacuum wavelength [m].
    n_core : float
        Core refractive index.
    n_clad : float
        Surrounding index; 1.0 for vacuum.
    """

    radius_m: float
    wavelength_m: float
    n_core: float = 1.45
    n_clad: float = 1.0

    def __post_init__(self) -> None:
        if not self.radius_m > 0:
            raise GeometryError(f"radius must be positive, got {self.radius_m}")
        if not self.wavelength_m > 0:
            raise GeometryError(f"wavelength must be positive, got {self.wavelength_m}")
        if not self.n_clad >= 1.0:
            raise GeometryError(f"n_clad must be >= 1, got {self.n_clad}")
        if not self.n_core > self.n_clad:
            raise GeometryError(
                f"n_core ({self.n_core}) must exceed n_clad ({self.n_clad})"
            )

    @property
    def k0(self) -> float:
        """Vacuum wavenumber [rad/m]."""
        return 2.0 * math.pi / self.wavelength_m

    @property
    def v_number(self) -> float:
        return self.k0 * self.radius_m * math.sqrt(self.n_core**2 - self.n_clad**2)

    @property
    def single_mode(self) -> bool:
        return self.v_number < HE11_CUTOFF_V


@dataclass(frozen=True)
class FieldCoefficients:
    """
    Dimensionless amplitude ratios of the HE11 fields (E_z core amplitude = 1).

    s is the standard hybrid-mode parameter
    s = (1/u^2 + 1/w^2) / (J1'(u)/(u J1(u)) + K1'(w)/(w K1(w))), s = -1 for HE11 in
    the weak-guidance limit. s_core and s_clad are s * n_eff^2 / n^2.
    ez_clad = J1(u)/K1(w) is the cladding E_z amplitude; Z0*H_z amplitudes are
    i * hz_core and i * hz_clad.
    """

    s: float
    s_core: float
    s_clad: float
    ez_clad: float
    hz_core: float
    hz_clad: float


@dataclass(frozen=True)
class ModeSolution:
    beta: float
    n_eff: float
    h: float
    q: float
    field_coeffs: FieldCoefficients
    residual: float  # |characteristic function| / sum of |terms| at the root

    @property
    def decay_length(self) -> float:
        return 1.0 / self.q


def _jk_ratios(u, w):
    j0, j1, _ = bessel_j012(u)
    k0, k1, _ = bessel_k012(w)
    jp = (j0 - j1 / u) / (u * j1)  # J1'(u) / (u J1(u))
    kp = (-k0 - k1 / w) / (w * k1)  # K1'(w) / (w K1(w))
    return j0, j1, k0, k1, jp, kp


def _uw(geom: FiberGeometry, n_eff):
    k = geom.k0
    n_eff = np.asarray(n_eff, dtype=float)
    u = k * geom.radius_m * np.sqrt(geom.n_core**2 - n_eff**2)
    w = k * geom.radius_m * np.sqrt(n_eff**2 - geom.n_clad**2)
    return u, w


def characteristic_function(geom: FiberGeometry, n_eff: ArrayLike):
    """
    HE11 characteristic function and its local scale.

    Returns ``(f, scale)``; the root satisfies f = 0 and ``|f| / scale`` is the
    relative residual (scale is the sum of absolute values of the terms).
    """
    n1s, n2s = geom.n_core**2, geom.n_clad**2
    u, w = _uw(geom, n_eff)
    j0, j1, _, _, _, kp = _jk_ratios(u, w)
    n_eff = np.asarray(n_eff, dtype=float)
    term_j = j0 / (u * j1)
    term_k = (n1s + n2s) / (2.0 * n1s) * kp
    term_u = 1.0 / u**2
    R = np.sqrt(
        ((n1s - n2s) / (2.0 * n1s)) ** 2 * kp**2
        + (n_eff**2 / n1s) * (1.0 / w**2 + 1.0 / u**2) ** 2
    )
    f = term_j + term_k - term_u + R
    scale = np.abs(term_j) + np.abs(term_k) + term_u + R
    return f, scale


def _f(geom: FiberGeometry, x: float) -> float:
    return float(characteristic_function(geom, x)[0])


def _polish_root(geom: FiberGeometry, lo: float, hi: float, flo: float, fhi: float) -> float:
    # bisection to a narrow bracket, then safeguarded secant to full precision
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        fm = _f(geom, mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    x0, f0, x1, f1 = lo, flo, hi, fhi
    for _ in range(60):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not lo <= x2 <= hi:
            x2 = 0.5 * (lo + hi)
        f2 = _f(geom, x2)
        if f2 == 0.0:
            return x2
        if (f2 > 0) == (flo > 0):
            lo, flo = x2, f2
        else:
            hi, fhi = x2, f2
        step = abs(x2 - x1)
        x0, f0, x1, f1 = x1, f1, x2, f2
        if step < 1e-15 * x2:
            break
    return x1 if abs(f1) <= abs(f0) else x0


def solve_he11(geom: FiberGeometry) -> ModeSolution:
    """
    Solve for the HE11 propagation constant.

    The effective index is bracketed on a 2000-point grid spanning
    (n_clad, n_core) and polished by bisection followed by secant steps.
    For weak guidance the root lies closer to n_clad than the first grid
    point, so a logarithmic grid covers that gap.

    Above the single-mode cutoff a MultiModeWarning is issued; the root with
    the largest effective index is still the HE11 mode.
    """
    if not geom.single_mode:
        warnings.warn(
            f"V = {geom.v_number:.4f} >= {HE11_CUTOFF_V:.4f}: fiber is not single-mode",
            MultiModeWarning,
            stacklevel=2,
        )
    n1, n2 = geom.n_core, geom.n_clad
    span = n1 - n2
    near_cutoff = np.geomspace(1e-15, 0.5 / ROOT_GRID_POINTS, CUTOFF_REFINE_POINTS, endpoint=False)
    grid = n2 + span * np.concatenate([near_cutoff, (np.arange(ROOT_GRID_POINTS) + 0.5) / ROOT_GRID_POINTS])
    grid = np.unique(grid[grid > n2])  # offsets below one ulp of n_clad collapse onto it
    f, _ = characteristic_function(geom, grid)
    sign = np.sign(f)
    idx = np.nonzero((sign[:-1] * sign[1:] < 0) & np.isfinite(f[:-1]) & np.isfinite(f[1:]))[0]
    if idx.size == 0:
        raise NoGuidedModeError("no sign change of the HE11 characteristic function")
    i = idx[-1]  # the fundamental mode has the largest effective index
    n_eff = float(_polish_root(geom, float(grid[i]), float(grid[i + 1]), float(f[i]), float(f[i + 1])))

    fval, scale = characteristic_function(geom, n_eff)
    k = geom.k0
    beta = n_eff * k
    h = k * math.sqrt(n1**2 - n_eff**2)
    q = k * math.sqrt(n_eff**2 - n2**2)
    u, w = h * geom.radius_m, q * geom.radius_m
    _, j1, _, k1, jp, kp = (float(v) for v in _jk_ratios(u, w))
    s = (1.0 / u**2 + 1.0 / w**2) / (jp + kp)
    coeffs = FieldCoefficients(
        s=s,
        s_core=s * n_eff**2 / n1**2,
        s_clad=s * n_eff**2 / n2**2,
        ez_clad=j1 / k1,
        hz_core=n_eff * s,
        hz_clad=n_eff * s * j1 / k1,
    )
    return ModeSolution(
        beta=beta,
        n_eff=n_eff,
        h=h,
        q=q,
        field_coeffs=coeffs,
        residual=float(abs(fval) / scale),
    )


def evanescent_decay_length(mode: ModeSolution) -> float:
    """1/q, the 1/e length of the evanescent field amplitude scale [m]."""
    return 1.0 / mode.q


def radial_fields(mode: ModeSolution, geom: FiberGeometry, r: ArrayLike):
    """
    Radial parts (e_r, e_phi, e_z) of the E field of the p = +1 HE11 mode.

    Points with r < radius use the core solution, r >= radius the cladding one.
    e_r is purely imaginary, e_phi and e_z are real.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    c = mode.field_coeffs
    beta, h, q, s = mode.beta, mode.h, mode.q, c.s
    e_r = np.empty(r.shape, dtype=complex)
    e_phi = np.empty(r.shape)
    e_z = np.empty(r.shape)
    core = r < geom.radius_m
    if core.any():
        j0, j1, j2 = bessel_j012(h * r[core])
        e_r[core] = 1j * beta / (2 * h) * ((1 - s) * j0 - (1 + s) * j2)
        e_phi[core] = -beta / (2 * h) * ((1 - s) * j0 + (1 + s) * j2)
        e_z[core] = j1
    clad = ~core
    if clad.any():
        k0, k1, k2 = bessel_k012(q * r[clad])
        amp = c.ez_clad
        e_r[clad] = 1j * beta / (2 * q) * amp * ((1 - s) * k0 + (1 + s) * k2)
        e_phi[clad] = -beta / (2 * q) * amp * ((1 - s) * k0 - (1 + s) * k2)
        e_z[clad] = amp * k1
    return e_r, e_phi, e_z


def field_components(mode: ModeSolution, geom: FiberGeometry, r: float, region: str):
    """
    All six field components (E_r, E_phi, E_z, Z0 H_r, Z0 H_phi, Z0 H_z) of the
    p = +1 mode at phi = 0, z = 0, evaluated from the longitudinal fields via
    Maxwell's equations in the requested region ('core' or 'clad').

    Independent of :func:`radial_fields`; used to verify boundary conditions.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    c = mode.field_coeffs
    k, beta = 2.0 * math.pi / geom.wavelength_m, mode.beta
    if region == "core":
        kt2, x, n2 = mode.h**2, mode.h * r, geom.n_core**2
        j0, j1, _ = (float(v) for v in bessel_j012(x))
        f, df = j1, mode.h * (j0 - j1 / x)
        A, B = 1.0, 1j * c.hz_core
    elif region == "clad":
        kt2, x, n2 = -mode.q**2, mode.q * r, geom.n_clad**2
        k0_, k1_, _ = (float(v) for v in bessel_k012(x))
        f, df = k1_, mode.q * (-k0_ - k1_ / x)
        A, B = c.ez_clad, 1j * c.hz_clad
    else:
        raise ValueError("region must be 'core' or 'clad'")
    # d/dphi -> i for p = +1
    ez, hz = A * f, B * f
    er = 1j / kt2 * (beta * A * df + (k / r) * 1j * B * f)
    ephi = 1j / kt2 * ((beta / r) * 1j * A * f - k * B * df)
    hr = 1j / kt2 * (beta * B * df - (k * n2 / r) * 1j * A * f)
    hphi = 1j / kt2 * ((beta / r) * 1j * B * f + k * n2 * A * df)
    return er, ephi, ez, hr, hphi, hz


def _unnormalized_intensity(mode, geom, r, phi, pol_angle=0.0):
    e_r, e_phi, e_z = radial_fields(mode, geom, r)
    psi = np.asarray(phi, dtype=float) - pol_angle
    c2, s2 = np.cos(psi) ** 2, np.sin(psi) ** 2
    return 2.0 * ((np.abs(e_r) ** 2 + e_z**2) * c2 + e_phi**2 * s2)


def _peak_intensity(mode: ModeSolution, geom: FiberGeometry) -> float:
    a = geom.radius_m
    r = np.concatenate([np.linspace(0.0, a, 2001)[:-1], [a], a + np.linspace(0, 5, 501)[1:] / mode.q])
    e_r, e_phi, e_z = radial_fields(mode, geom, r)
    return float(2.0 * np.max(np.maximum(np.abs(e_r) ** 2 + e_z**2, e_phi**2)))


def intensity_profile(
    mode: ModeSolution,
    geom: FiberGeometry,
    r: ArrayLike,
    phi: ArrayLike,
    pol_angle: float = 0.0,
):
    """
    |E|^2 of the quasi-linearly polarized HE11 mode, normalized to a maximum of 1.

    The quasi-linear mode is the equal superposition of the two counter-rotating
    HE11 modes, polarized along ``pol_angle`` (default: the x axis, phi = 0).
    ``r`` and ``phi`` broadcast against each other.
    """
    r, phi = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
    out = _unnormalized_intensity(mode, geom, r, phi, pol_angle) / _peak_intensity(mode, geom)
    out = np.minimum(out, 1.0)  # rounding at the peak itself
    return out if out.ndim else float(out)


def surface_max_azimuth(mode: ModeSolution, geom: FiberGeometry, pol_angle: float = 0.0) -> float:
    """Azimuth of maximum intensity just outside the fiber surface."""
    e_r, e_phi, e_z = radial_fields(mode, geom, np.array([geom.radius_m]))
    along = abs(e_r[0]) ** 2 + e_z[0] ** 2
    return pol_angle if along >= e_phi[0] ** 2 else pol_angle + 0.5 * math.pi


def coupling_strength_at(
    mode: ModeSolution,
    geom: FiberGeometry,
    distance_m: ArrayLike,
    g_surface: float,
):
    """
    Emitter coupling strength at ``distance_m`` from the fiber surface [rad/s].

    The coupling is taken proportional to the local field amplitude at the
    azimuth of maximum surface intensity, anchored to ``g_surface`` at d = 0.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    if not g_surface > 0:
        raise ValueError("g_surface must be positive")
    phi = surface_max_azimuth(mode, geom)
    a = geom.radius_m
    i_d = _unnormalized_intensity(mode, geom, a + d, phi)
    i_s = _unnormalized_intensity(mode, geom, np.array(a), phi)
    g = g_surface * np.sqrt(i_d / i_s)
    return g if g.ndim else float(g)


def profile_grid(
    mode: ModeSolution,
    geom: FiberGeometry,
    r_max_m: float,
    n_r: int = 201,
    n_phi: int = 73,
):
    """Polar sampling (r, phi, intensity) of the normalized profile, flattened row-major in r."""
    r = np.linspace(0.0, r_max_m, n_r)
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi)
    R, P = np.meshgrid(r, phi, indexing="ij")
    intensity = intensity_profile(mode, geom, R, P)
    return R.ravel(), P.ravel(), np.asarray(intensity).ravel()
