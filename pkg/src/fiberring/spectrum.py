"""
Transmission scans of the coupling fiber: synthesis, dip detection, per-resonance
Lorentzian fits and the one-parameter global fit of the unloaded decay rate.

The per-resonance model in ordinary-frequency units is

    T(f) = B * (1 - (1 - T_r) * w^2 / (w^2 + (f - f_c)^2)),

with w = kappa / (2 pi) the half width [Hz], T_r the on-resonance transmission
and B the off-resonance baseline.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from . import io
from .constants import TWO_PI
from .resonator import (
    ResonatorParams,
    exact_ring_power,
    on_resonance_transmission,
    power_transmission_detuned,
    ring_from_params,
)

TRACE_HEADER = ("detuning_hz", "transmission")
DATASET_HEADER = ("kappa_total_rad_s", "t_res", "weight", "kappa_std_rad_s", "t_res_std", "corr_kappa_t_res")


class FlatFitError(ValueError):
    """The trace has no dip to fit."""


class UnderdeterminedFitError(ValueError):
    """The coupling sweep cannot constrain kappa0."""


class SpanWarning(UserWarning):
    """The synthesized scan window contains no resonance."""


@dataclass(frozen=True)
class SpectrumTrace:
    """
    A transmission scan.

    Parameters
    ----------
    detunings : ndarray
        Scan axis (omega - omega_ref) / 2 pi [Hz], strictly increasing.
    transmissions : ndarray
        Power transmission samples.
    noise_sigma : float
        Std of the additive Gaussian noise used in synthesis (0 for ideal).
    metadata : dict
        Free-form key/value annotations (seed, model, warning flags).
    """

    detunings: np.ndarray
    transmissions: np.ndarray
    noise_sigma: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        d = np.asarray(self.detunings, dtype=float)
        t = np.asarray(self.transmissions, dtype=float)
        object.__setattr__(self, "detunings", d)
        object.__setattr__(self, "transmissions", t)
        if d.ndim != 1 or d.shape != t.shape:
            raise ValueError("detunings and transmissions must be 1-D arrays of equal length")
        if d.size < 8:
            raise ValueError(f"a trace needs at least 8 samples, got {d.size}")
        if np.any(np.diff(d) <= 0):
            raise ValueError("detunings must be strictly increasing")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    def to_csv(self, path) -> None:
        meta = {"units": "detuning_hz=Hz transmission=1", "noise_sigma": io.format_float(self.noise_sigma)}
        for k, v in self.metadata.items():
            if k not in meta:
                meta[k] = v
        io.write_csv(path, TRACE_HEADER, [self.detunings, self.transmissions], meta)

    @classmethod
    def from_csv(cls, path) -> "SpectrumTrace":
        cols, meta = io.read_csv(path, TRACE_HEADER)
        sigma = float(meta.pop("noise_sigma", "0.0"))
        meta.pop("units", None)
        return cls(cols["detuning_hz"], cols["transmission"], sigma, meta)

    def digest(self) -> str:
        return io.array_digest(self.detunings, self.transmissions)


class ResonanceGuess(NamedTuple):
    center_hz: float
    width_hz: float  # FWHM estimate
    depth: float  # baseline minus dip minimum
    baseline: float


@dataclass(frozen=True)
class FitResult:
    """Lorentzian fit of a single resonance."""

    center_hz: float
    kappa_total: float  # rad/s
    t_res: float
    baseline: float
    uncertainties: dict
    converged: bool
    iterations: int
    residual_rms: float

    @property
    def linewidth_hz(self) -> float:
        """FWHM [Hz]."""
        return self.kappa_total / math.pi

    def to_dict(self, input_digest: str | None = None) -> dict:
        d = {
            "center_hz": self.center_hz,
            "kappa_total_rad_s": self.kappa_total,
            "kappa_total_over_2pi_hz": self.kappa_total / TWO_PI,
            "t_res": self.t_res,
            "baseline": self.baseline,
            "uncertainties": dict(self.uncertainties),
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_rms": self.residual_rms,
        }
        if input_digest is not None:
            d["input_digest"] = input_digest
        return d


class SweepPoint(NamedTuple):
    kappa_total: float  # rad/s
    t_res: float
    weight: float = 1.0
    kappa_std: float = 0.0  # rad/s
    t_res_std: float = 0.0
    corr: float = 0.0  # correlation of the kappa and T_r errors


@dataclass(frozen=True)
class CouplingSweepDataset:
    """The {kappa, T_r} pairs of a beam-splitter sweep, one per fitted resonance."""

    points: tuple

    def __post_init__(self) -> None:
        pts = tuple(SweepPoint(*map(float, p)) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise UnderdeterminedFitError(f"need at least 2 sweep points, got {len(pts)}")
        if any(p.kappa_total <= 0 for p in pts):
            raise ValueError("kappa values must be positive")
        if any(p.weight < 0 for p in pts):
            raise ValueError("weights must be non-negative")

    @classmethod
    def from_fits(cls, fits: Sequence[FitResult]) -> "CouplingSweepDataset":
        """Dataset carrying each fit's kappa / T_r uncertainties and their correlation."""
        return cls(
            tuple(
                SweepPoint(
                    f.kappa_total,
                    f.t_res,
                    1.0,
                    f.uncertainties.get("kappa_total", 0.0),
                    f.uncertainties.get("t_res", 0.0),
                    f.uncertainties.get("corr_kappa_t_res", 0.0),
                )
                for f in fits
            )
        )

    def _column(self, i: int) -> np.ndarray:
        return np.array([p[i] for p in self.points])

    @property
    def kappas(self) -> np.ndarray:
        return self._column(0)

    @property
    def t_res(self) -> np.ndarray:
        return self._column(1)

    @property
    def weights(self) -> np.ndarray:
        return self._column(2)

    @property
    def has_uncertainties(self) -> bool:
        return bool(np.all(self._column(3) > 0) and np.all(self._column(4) > 0))

    def to_csv(self, path, metadata=None) -> None:
        io.write_csv(path, DATASET_HEADER, [self._column(i) for i in range(6)], metadata)

    @classmethod
    def from_csv(cls, path) -> "CouplingSweepDataset":
        cols, _ = io.read_csv(path, DATASET_HEADER)
        return cls(tuple(zip(*(cols[h] for h in DATASET_HEADER))))


class Kappa0Estimate(NamedTuple):
    kappa0: float  # rad/s
    std_error: float  # rad/s
    residual_rms: float
    n_points: int


# --------------------------------------------------------------------------- synthesis


def synthesize_trace(
    params: ResonatorParams,
    scan_span_hz: float,
    n_samples: int,
    noise_sigma: float = 0.0,
    rng_seed: int | None = None,
    center_hz: float = 0.0,
) -> SpectrumTrace:
    """
    Sample the coupling-fiber transmission over a symmetric scan window.

    The window is [-span/2, span/2] with a resonance at ``center_hz``. Spans
    wider than one FSR use the exact ring response (periodic resonances),
    narrower ones the single-resonance Lorentzian. Noise is additive Gaussian,
    clipped at zero.
    """
    if not scan_span_hz > 0:
        raise ValueError("scan span must be positive")
    if n_samples < 8:
        raise ValueError("n_samples must be at least 8")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    f = np.linspace(-0.5 * scan_span_hz, 0.5 * scan_span_hz, n_samples)
    x = f - center_hz
    fsr = params.fsr_hz
    if scan_span_hz > fsr:
        model = "airy"
        T = exact_ring_power(ring_from_params(params), TWO_PI * x / fsr)
        nearest = center_hz + fsr * np.round((0.0 - center_hz) / fsr)
        has_res = abs(nearest) <= 0.5 * scan_span_hz
    else:
        model = "lorentzian"
        T = power_transmission_detuned(params, TWO_PI * x)
        has_res = abs(center_hz) <= 0.5 * scan_span_hz
    T = np.asarray(T, dtype=float)
    if noise_sigma > 0:
        rng = np.random.default_rng(rng_seed)
        T = np.clip(T + rng.normal(0.0, noise_sigma, n_samples), 0.0, None)
    meta = {"model": model, "seed": rng_seed, "no_resonance_in_span": not has_res}
    if not has_res:
        warnings.warn("scan window contains no resonance", SpanWarning, stacklevel=2)
    return SpectrumTrace(f, T, float(noise_sigma), meta)


# --------------------------------------------------------------------------- detection


def _smooth(y: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return y
    kernel = np.ones(width) / width
    pad = width // 2
    yp = np.pad(y, pad, mode="reflect")
    return np.convolve(yp, kernel, mode="valid")


def _estimate_baseline(y: np.ndarray) -> float:
    upper = y[y >= np.median(y)]
    return float(np.median(upper))


def detect_resonances(trace: SpectrumTrace, smooth: int | None = None) -> list[ResonanceGuess]:
    """
    Initial guesses for every dip deeper than 3 noise_sigma below the baseline.

    Noisy traces are first smoothed with a short moving average. A dip must
    also stand out from its surroundings by 3 noise_sigma (topographic
    prominence), which rejects noise ripples on the Lorentzian wings. The
    width guess is the FWHM from linearly interpolated half-depth crossings.
    """
    f, y = trace.detunings, trace.transmissions
    sigma = trace.noise_sigma
    if smooth is None:
        smooth = 5 if sigma > 0 else 1
    ys = _smooth(y, smooth)
    base = _estimate_baseline(ys)
    thr = max(3.0 * sigma, 1e-9 * max(base, 1.0))
    peaks, _ = find_peaks(-ys, height=-(base - thr), prominence=thr)
    guesses = []
    n = len(f)
    for i in peaks:
        depth = base - ys[i]
        level = base - 0.5 * depth
        left = i
        while left > 0 and ys[left] < level:
            left -= 1
        right = i
        while right < n - 1 and ys[right] < level:
            right += 1
        fl = _cross(f, ys, left, left + 1, level) if left < i else f[i]
        fr = _cross(f, ys, right - 1, right, level) if right > i else f[i]
        width = max(fr - fl, f[1] - f[0])
        guesses.append(ResonanceGuess(float(f[i]), float(width), float(depth), base))
    return guesses


def _cross(f, y, i, j, level):
    if y[j] == y[i]:
        return float(f[i])
    return float(f[i] + (level - y[i]) * (f[j] - f[i]) / (y[j] - y[i]))


# --------------------------------------------------------------------------- fitting


def lorentzian_dip(f, center_hz, half_width_hz, t_res, baseline):
    """Power-transmission dip in ordinary-frequency units (see module docstring)."""
    x = np.asarray(f, dtype=float) - center_hz
    L = half_width_hz**2 / (half_width_hz**2 + x * x)
    return baseline * (1.0 - (1.0 - t_res) * L)


def _model_and_jacobian(f, p):
    c, w, tr, b = p
    x = f - c
    den = w * w + x * x
    L = w * w / den
    model = b * (1.0 - (1.0 - tr) * L)
    amp = -b * (1.0 - tr)
    J = np.empty((f.size, 4))
    J[:, 0] = amp * 2.0 * x * w * w / den**2
    J[:, 1] = amp * 2.0 * w * x * x / den**2
    J[:, 2] = b * L
    J[:, 3] = 1.0 - (1.0 - tr) * L
    return model, J


def _project(p):
    c, w, tr, b = p
    b = max(b, 1e-12)
    return np.array([c, abs(w), min(max(tr, 0.0), b), b])


def fit_lorentzian(
    trace: SpectrumTrace,
    guess: ResonanceGuess,
    max_iter: int = 200,
    window_hz: tuple[float, float] | None = None,
) -> FitResult:
    """
    Least-squares Lorentzian fit of one resonance by damped Gauss-Newton.

    Levenberg-Marquardt damping scales the diagonal of J^T J; T_r is kept in
    [0, baseline] by projection. Convergence requires a scaled parameter step
    below 1e-8 (on two consecutive steps) or a scaled gradient below 1e-10. ``window_hz`` restricts the
    samples used (default: the whole trace).
    """
    f, y = trace.detunings, trace.transmissions
    if window_hz is not None:
        sel = (f >= window_hz[0]) & (f <= window_hz[1])
        f, y = f[sel], y[sel]
    if f.size < 5:
        raise ValueError("fit window holds fewer than 5 samples")
    if guess.depth <= 0 or np.ptp(y) == 0:
        raise FlatFitError("trace has no dip (zero depth)")
    if not f[0] <= guess.center_hz <= f[-1]:
        raise ValueError("guess lies outside the scan window")

    b0 = guess.baseline if guess.baseline > 0 else float(np.max(y))
    tr0 = min(max((b0 - guess.depth) / b0, 0.0), 1.0)
    p = _project(np.array([guess.center_hz, 0.5 * guess.width_hz, tr0, b0]))

    model, J = _model_and_jacobian(f, p)
    r = model - y
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    small_steps = 0
    it = 0
    for it in range(1, max_iter + 1):
        typical = np.array([p[1], p[1], 1.0, p[3]])
        Js = J * typical
        g = Js.T @ r
        # active bound on T_r: freeze it while the descent direction points outward
        free = np.ones(4, dtype=bool)
        if (p[2] <= 0.0 and g[2] > 0) or (p[2] >= p[3] and g[2] < 0):
            free[2] = False
        if np.max(np.abs(g[free])) < 1e-10:
            converged = True
            break
        A = (Js.T @ Js)[np.ix_(free, free)]
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        accepted = False
        while lam < 1e16:
            step_s = np.zeros(4)
            try:
                step_s[free] = np.linalg.solve(A + lam * np.diag(diag), -g[free])
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_new = _project(p + step_s * typical)
            m_new, J_new = _model_and_jacobian(f, p_new)
            r_new = m_new - y
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
        rel_step = np.max(np.abs(p_new - p) / typical)
        p, J, r, cost = p_new, J_new, r_new, cost_new
        lam = max(lam * 0.1, 1e-15)
        # a damped step can be tiny while still short of the minimum: require two in a row
        small_steps = small_steps + 1 if rel_step < 1e-8 else 0
        if small_steps == 2:
            converged = True
            break

    c, w, tr, b = p
    n = f.size
    dof = max(n - 4, 1)
    typical = np.array([w, w, 1.0, b])
    Js = J * typical
    try:
        cov = np.linalg.pinv(Js.T @ Js) * np.outer(typical, typical)
    except np.linalg.LinAlgError:
        cov = np.full((4, 4), np.nan)
    s2 = trace.noise_sigma**2 if trace.noise_sigma > 0 else cost / dof
    cov = cov * s2
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    denom = err[1] * err[2]
    corr = float(cov[1, 2] / denom) if denom > 0 else 0.0
    if (1.0 - tr / b) <= 1e-12:
        raise FlatFitError("fit converged to a flat line")
    return FitResult(
        center_hz=float(c),
        kappa_total=float(TWO_PI * w),
        t_res=float(tr),
        baseline=float(b),
        uncertainties={
            "center_hz": float(err[0]),
            "kappa_total": float(TWO_PI * err[1]),
            "t_res": float(err[2]),
            "baseline": float(err[3]),
            "corr_kappa_t_res": corr,
        },
        converged=converged,
        iterations=it,
        residual_rms=float(math.sqrt(cost / n)),
    )


def fit_all_resonances(trace: SpectrumTrace, window_linewidths: float = 15.0) -> list[FitResult]:
    """Detect every dip and fit each within a window bounded by its neighbours."""
    guesses = detect_resonances(trace)
    centers = [g.center_hz for g in guesses]
    fits = []
    for i, g in enumerate(guesses):
        lo = g.center_hz - window_linewidths * g.width_hz
        hi = g.center_hz + window_linewidths * g.width_hz
        if i > 0:
            lo = max(lo, 0.5 * (centers[i - 1] + g.center_hz))
        if i < len(guesses) - 1:
            hi = min(hi, 0.5 * (centers[i + 1] + g.center_hz))
        try:
            fits.append(fit_lorentzian(trace, g, window_hz=(lo, hi)))
        except FlatFitError:
            warnings.warn(f"skipping flat candidate dip at {g.center_hz:.6g} Hz", stacklevel=2)
    return fits


def deepest(guesses: Sequence[ResonanceGuess]) -> ResonanceGuess:
    """The guess with the largest depth."""
    if not guesses:
        raise FlatFitError("no resonance detected")
    return max(guesses, key=lambda g: g.depth)


# --------------------------------------------------------------------------- global fit


def _sweep_objective(k0, kappas, t_res, weights):
    r = t_res - on_resonance_transmission(k0, kappas)
    return float(np.sum(weights * r * r))


def _effective_weights(k0, dataset: CouplingSweepDataset) -> np.ndarray:
    # T_r variance including the propagated kappa error (effective variance)
    k = dataset.kappas
    sk, st, rho = dataset._column(3), dataset._column(4), dataset._column(5)
    dT_dk = -4.0 * k0 * (2.0 * k0 / k - 1.0) / k**2
    var = st**2 + (dT_dk * sk) ** 2 - 2.0 * rho * dT_dk * sk * st
    return dataset.weights / np.maximum(var, 1e-300)


def _minimize_kappa0(k, T, w, grid_points):
    kmax = float(np.max(k))
    grid = kmax * (np.arange(1, grid_points + 1) / grid_points)
    model = ((2.0 * grid[:, None] - k[None, :]) / k[None, :]) ** 2
    obj = np.sum(w * (T[None, :] - model) ** 2, axis=1)
    i = int(np.argmin(obj))
    lo = grid[i - 1] if i > 0 else 0.5 * grid[0]
    hi = grid[min(i + 1, grid_points - 1)]
    res = minimize_scalar(
        _sweep_objective,
        bounds=(lo, hi),
        args=(k, T, w),
        method="bounded",
        options={"xatol": 1e-13 * kmax, "maxiter": 500},
    )
    # the bounded method stops near sqrt(eps) relative; finish with Gauss-Newton
    x = float(res.x)
    cost = _sweep_objective(x, k, T, w)
    for _ in range(5):
        jac = 4.0 * (2.0 * x / k - 1.0) / k
        curv = float(np.sum(w * jac * jac))
        if curv <= 0:
            break
        x_new = x + float(np.sum(w * jac * (T - on_resonance_transmission(x, k)))) / curv
        cost_new = _sweep_objective(x_new, k, T, w)
        if not (x_new > 0 and cost_new <= cost):
            break
        done = abs(x_new - x) <= 1e-15 * x
        x, cost = x_new, cost_new
        if done:
            break
    return x


def global_kappa0_fit(
    dataset: CouplingSweepDataset,
    absolute_weights: bool = False,
    effective_variance: bool | None = None,
    grid_points: int = 4000,
) -> Kappa0Estimate:
    """
    Fit kappa0 as the single free parameter of T_r = ((2 kappa0 - kappa)/kappa)^2.

    A grid scan over (0, max kappa] locates the global basin; bounded Brent
    minimization (golden section with parabolic steps) refines it, and a few
    Gauss-Newton steps take it to full precision.

    When the points carry fit uncertainties (default: whenever they do), each
    residual is weighted by the inverse of its effective variance, i.e. the T_r
    variance plus the kappa error propagated through the model, and the fit is
    iterated because that variance depends on kappa0.

    The standard error comes from the Gauss-Newton curvature of the weighted
    residual sum, scaled by the reduced chi-square unless ``absolute_weights``.
    """
    k, T = dataset.kappas, dataset.t_res
    if np.ptp(k) <= 1e-12 * np.max(k):
        raise UnderdeterminedFitError("all sweep points share the same kappa")
    if effective_variance is None:
        effective_variance = dataset.has_uncertainties
    w = dataset.weights
    k0 = _minimize_kappa0(k, T, w, grid_points)
    if effective_variance:
        for _ in range(20):
            w = _effective_weights(k0, dataset)
            k0_new = _minimize_kappa0(k, T, w, grid_points)
            done = abs(k0_new - k0) <= 1e-12 * k0
            k0 = k0_new
            if done:
                break
        w = _effective_weights(k0, dataset)
    resid = T - on_resonance_transmission(k0, k)
    cost = float(np.sum(w * resid * resid))
    jac = 2.0 * (2.0 * k0 / k - 1.0) * (2.0 / k)
    curv = float(np.sum(w * jac * jac))
    n = len(k)
    s2 = 1.0 if absolute_weights else cost / (n - 1)
    std = math.sqrt(s2 / curv) if curv > 0 else float("inf")
    rms = math.sqrt(float(np.mean(resid * resid)))
    return Kappa0Estimate(k0, std, rms, n)


# --------------------------------------------------------------------------- sweep simulation


def coupling_ratios(n_settings: int, lo: float = 0.2, hi: float = 5.0) -> np.ndarray:
    """kappa_ext / kappa0 for n beam-splitter settings, log-spaced from under- to overcoupled."""
    if n_settings < 1:
        raise ValueError("n_settings must be >= 1")
    if n_settings == 1:
        return np.array([1.0])
    return np.geomspace(lo, hi, n_settings)


def simulate_coupling_sweep(
    base: ResonatorParams,
    n_settings: int = 12,
    noise_sigma: float = 0.01,
    rng_seed: int | None = 0,
    n_samples: int = 2001,
    span_linewidths: float = 10.0,
    ratios: Sequence[float] | None = None,
) -> list[tuple[ResonatorParams, SpectrumTrace, FitResult]]:
    """
    Synthesize and fit one scan per beam-splitter setting.

    Each setting keeps ``base.kappa0`` and sets kappa_ext = ratio * kappa0;
    setting i draws its noise from seed ``rng_seed + i``. The deepest detected
    dip of each scan is fitted.
    """
    ratios = coupling_ratios(n_settings) if ratios is None else np.asarray(ratios, dtype=float)
    out = []
    for i, ratio in enumerate(ratios):
        p = replace(base, kappa_ext=float(ratio) * base.kappa0)
        seed = None if rng_seed is None else int(rng_seed) + i
        trace = synthesize_trace(p, span_linewidths * p.linewidth_hz, n_samples, noise_sigma, seed)
        guess = deepest(detect_resonances(trace))
        out.append((p, trace, fit_lorentzian(trace, guess)))
    return out
