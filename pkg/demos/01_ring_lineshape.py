"""
Ring resonator lineshape
========================

A fiber ring closed by a variable beam splitter. The unloaded field decay
rate kappa0 is fixed by the ring itself; the splitter sets kappa_ext. Sweeping
kappa_ext moves the resonance through the under-, critically and overcoupled
regimes, and the Lorentzian model is compared with the exact Airy response.
"""

import numpy as np

from fiberring.constants import C_LIGHT, TWO_PI
from fiberring.resonator import (
    ResonatorParams,
    classify_regime,
    exact_ring_power,
    finesse,
    power_transmission_detuned,
    quality_factor,
    ring_from_params,
    round_trip_phase,
)

kappa0 = TWO_PI * 0.58e6  # rad/s
fsr = 87.5e6  # Hz
omega0 = TWO_PI * C_LIGHT / 851e-9

# %% Figures of merit of the bare ring
print(f"finesse          {finesse(kappa0, fsr):8.2f}")
print(f"quality factor   {quality_factor(omega0, kappa0):8.3e}")

# %% On-resonance dip depth across the coupling regimes
print("\nkappa_ext/kappa0   regime        T(0)     FWHM [MHz]")
for ratio in (0.2, 0.5, 1.0, 2.0, 5.0):
    p = ResonatorParams(kappa0, ratio * kappa0, omega0, fsr)
    t0 = float(power_transmission_detuned(p, 0.0))
    regime = classify_regime(p.kappa0, p.kappa_ext).value
    print(f"{ratio:14.1f}     {regime:12s} {t0:7.4f}   {p.linewidth_hz / 1e6:8.3f}")

# %% Lorentzian versus exact ring over one linewidth either side
p = ResonatorParams(kappa0, 2 * kappa0, omega0, fsr)
delta = np.linspace(-p.kappa, p.kappa, 2001)
airy = exact_ring_power(ring_from_params(p), round_trip_phase(delta, fsr))
lorentz = power_transmission_detuned(p, delta)
print(f"\nloaded finesse {np.pi * fsr / p.kappa:.1f}: max |Airy - Lorentzian| = {np.max(np.abs(airy - lorentz)):.2e}")
