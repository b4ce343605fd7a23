"""
Fitting transmission spectra
============================

Synthetic spectra with additive Gaussian noise are fitted one resonance at a
time. A full coupling sweep then pins down the intrinsic rate: each setting
gives a pair (kappa, T_res), and all pairs share one kappa0.
"""

import numpy as np

from fiberring.constants import C_LIGHT, TWO_PI
from fiberring.resonator import ResonatorParams, finesse
from fiberring.spectrum import (
    CouplingSweepDataset,
    deepest,
    detect_resonances,
    fit_lorentzian,
    global_kappa0_fit,
    simulate_coupling_sweep,
    synthesize_trace,
)

kappa0 = TWO_PI * 0.58e6
fsr = 87.5e6
omega0 = TWO_PI * C_LIGHT / 851e-9

# %% A single undercoupled resonance
p = ResonatorParams(kappa0, 0.4 * kappa0, omega0, fsr)
trace = synthesize_trace(p, 10 * p.linewidth_hz, 2001, noise_sigma=0.01, rng_seed=7)
fit = fit_lorentzian(trace, deepest(detect_resonances(trace)))
print(f"true FWHM {p.linewidth_hz / 1e6:.4f} MHz, fitted {fit.linewidth_hz / 1e6:.4f} MHz")
print(f"true T_res {float(((2 * p.kappa0 - p.kappa) / p.kappa) ** 2):.4f}, fitted {fit.t_res:.4f}")

# %% Three free spectral ranges at once
wide = synthesize_trace(ResonatorParams(kappa0, kappa0, omega0, fsr), 3 * fsr, 20001, 0.005, rng_seed=3)
centers = sorted(g.center_hz for g in detect_resonances(wide))
print("dip spacing [MHz]:", np.round(np.diff(centers) / 1e6, 3))

# %% Coupling sweep and the global kappa0 estimate
runs = simulate_coupling_sweep(p, n_settings=12, noise_sigma=0.01, rng_seed=11)
est = global_kappa0_fit(CouplingSweepDataset.from_fits([f for _, _, f in runs]))
print(f"\nkappa0/2pi = {est.kappa0 / TWO_PI / 1e6:.4f} +/- {est.std_error / TWO_PI / 1e6:.4f} MHz")
print(f"unloaded finesse from the sweep: {finesse(est.kappa0, fsr):.2f}")
