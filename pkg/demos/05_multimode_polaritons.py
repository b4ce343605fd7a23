"""
Multimode polaritons
====================

One collective atomic excitation coupled to a comb of ring modes forms an
arrowhead Hamiltonian. Its eigenvalues interlace the bare mode frequencies.
Below the multimode threshold the central pair is a normal-mode doublet; far
above it every gap in the comb is perturbed.
"""

import numpy as np

from fiberring.constants import TWO_PI
from fiberring.cqed import arrowhead_matrix, multimode_polariton_spectrum

fsr = 87.5e6
for label, g_coll in (("below threshold", 0.3), ("at threshold", 1.0), ("above threshold", 3.0)):
    ev = multimode_polariton_spectrum(TWO_PI * g_coll * fsr, fsr, n_modes=7) / TWO_PI / 1e6
    print(f"{label:16s} g_coll = {g_coll:.1f} FSR: " + " ".join(f"{e:8.1f}" for e in ev) + "  MHz")

# %% Cross-check against a dense eigensolver
d = TWO_PI * fsr * np.arange(-3, 4)
c = np.full(7, TWO_PI * 2 * fsr)  # every mode sees the full collective coupling
dense = np.linalg.eigvalsh(arrowhead_matrix(0.0, d, c))
fast = multimode_polariton_spectrum(TWO_PI * 2 * fsr, fsr, 7)
print(f"\nmax deviation from dense eigvalsh: {np.max(np.abs(dense - fast)) / TWO_PI:.2e} Hz")
