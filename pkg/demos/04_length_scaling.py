"""
Scaling with resonator length
=============================

Making the ring longer lowers the single-atom coupling as 1/sqrt(l) and the
FSR as 1/l. With loss concentrated in the taper, kappa0 falls as 1/l too, so
the single-atom cooperativity does not change. Fiber propagation loss spoils
this slowly. Once sqrt(N) g exceeds the FSR, the ensemble talks to several
longitudinal modes at the same time.
"""

from fiberring.constants import TWO_PI
from fiberring.cqed import (
    AtomParams,
    ScalingReference,
    length_sweep,
    multimode_threshold,
    multimode_threshold_closed_form,
)

atoms = AtomParams(gamma=TWO_PI * 2.6e6, g_single=TWO_PI * 1.5e6, n_atoms=2000)
ref = ScalingReference(l_ref=2.35, kappa0_ref=TWO_PI * 0.58e6, g_ref=atoms.g_single, fsr_ref=87.5e6)
print(f"taper loss implied by the reference ring: {ref.taper_loss_db:.3f} dB")

# %% Cooperativity versus length
print("\n  l [m]   FSR [MHz]  g_coll/2pi [MHz]     C0    finesse")
for pt in length_sweep(ref, atoms, [0.5, 2.35, 4.0, 20, 100, 500]):
    print(f"{pt.length_m:7.2f}  {pt.fsr_hz / 1e6:9.3f}  {pt.g_coll / TWO_PI / 1e6:14.2f}  {pt.c0:7.4f}  {pt.finesse:7.2f}")

# %% Where the collective coupling overtakes the mode spacing
print(f"\nmultimode threshold: {multimode_threshold(ref, atoms):.4f} m "
      f"(lossless closed form {multimode_threshold_closed_form(ref, atoms):.4f} m)")
