"""
Nanofiber guided mode
=====================

The fundamental HE11 mode of a silica nanofiber in vacuum, its evanescent
tail, and what that tail means for an emitter trapped near the surface.
"""

import numpy as np

from fiberring.constants import TWO_PI
from fiberring.mode import (
    FiberGeometry,
    coupling_strength_at,
    evanescent_decay_length,
    intensity_profile,
    solve_he11,
)

geom = FiberGeometry(radius_m=250e-9, wavelength_m=852e-9, n_core=1.45, n_clad=1.0)
mode = solve_he11(geom)
print(f"V = {geom.v_number:.4f}   n_eff = {mode.n_eff:.8f}")
print(f"intensity decay length 1/q = {evanescent_decay_length(mode) * 1e9:.1f} nm")

# %% Radial cut along and across the polarization axis
r = np.linspace(0, 600e-9, 7)
print("\n r [nm]   I(phi=0)   I(phi=90)")
for ri, a, b in zip(r, intensity_profile(mode, geom, r, 0.0), intensity_profile(mode, geom, r, np.pi / 2)):
    print(f"{ri * 1e9:7.0f}   {a:8.4f}   {b:8.4f}")

# %% Coupling strength versus distance from the surface
g_surf = TWO_PI * 5e6
for d in (0, 100e-9, 200e-9, 300e-9):
    g = coupling_strength_at(mode, geom, d, g_surf)
    print(f"d = {d * 1e9:3.0f} nm   g/2pi = {g / TWO_PI / 1e6:.3f} MHz")

# %% Thicker fibers confine the light more strongly
for a in (150e-9, 200e-9, 250e-9, 300e-9):
    print(f"a = {a * 1e9:.0f} nm   n_eff = {solve_he11(FiberGeometry(a, 852e-9, 1.45, 1.0)).n_eff:.5f}")
