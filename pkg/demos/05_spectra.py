"""Krylov sections of the companion matrix and how they mimic periodicity.

An exact periodic fit puts the section's eigenvalues on T-th roots of unity.
Fitting noise pulls them off; a coarser threshold keeps the cyclic structure.
"""

import numpy as np

from spars import ap_diagnose, fit_ar, fit_dense_ar
from spars.generators import noisy_periodic, periodic

clean = periodic(n=240, period=12).values
rep = ap_diagnose(fit_ar(clean[:120], 12, 1e-8), clean, 0.0)
print(f"clean: T={rep.T} k={rep.k} defect={rep.max_unit_root_defect:.1e} mimicry={rep.mimicry_norm:.1e}")
print("  eigenvalue angles / (2 pi / T):", np.round(np.sort(np.angle(rep.eigenvalues)) / (2 * np.pi / 12), 6))

noisy = noisy_periodic(n=240, period=12, noise=0.05, seed=1).values
dense = ap_diagnose(fit_dense_ar(noisy[:120], 12), noisy, 0.2, T=12)
print(f"noisy dense:        radius={dense.spectral_radius:.4f} mimicry={dense.mimicry_norm:.3f}")
# a larger delta lets the solver stop before it fits the noise
for delta in (1e-8, 0.1, 0.2):
    ar = fit_ar(noisy[:120], 12, delta)
    rep = ap_diagnose(ar, noisy, 0.2, T=12)
    print(f"noisy delta={delta:<5g} nnz={ar.nnz:<3} radius={rep.spectral_radius:.4f} "
          f"mimicry={rep.mimicry_norm:.3f}")
