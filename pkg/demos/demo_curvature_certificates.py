"""Certifying constant (holomorphic) sectional curvature numerically.

Finite-difference Riemann tensors over random planes and points certify
the model charts: stereographic sphere (K = 1), Poincare disk (K = -1),
flat (K = 0), and the Fubini-Study chart, whose sectional curvature is
constant only on complex lines (planes spanned by u and J u).

Run:  python demos/demo_curvature_certificates.py
"""

import numpy as np

from almostiso import ChartDomain, RiemannianField, curvature_sweep, make_fubini_study_4d

chart = ChartDomain([[-0.6, 0.6], [-0.6, 0.6]])
models = {
    "sphere (stereographic)": RiemannianField.conformal(
        lambda x: 4.0 / (1.0 + (x ** 2).sum(axis=-1)) ** 2, 2),
    "hyperbolic (Poincare)": RiemannianField.conformal(
        lambda x: 4.0 / (1.0 - (x ** 2).sum(axis=-1)) ** 2, 2),
    "flat": RiemannianField.constant(np.eye(2)),
}

print(f"{'model':26s} {'mean K':>10s} {'std K':>10s}")
for name, g in models.items():
    sweep = curvature_sweep(chart, g, count=50, seed=0)
    print(f"{name:26s} {sweep.mean:10.6f} {sweep.std:10.2e}")

entry = make_fubini_study_4d(0.1)
holo = curvature_sweep(entry.chart, entry.g, count=50, seed=1,
                       complex_structure=entry.complex_structure)
generic = curvature_sweep(entry.chart, entry.g, count=50, seed=2)
print(f"\nFubini-Study chart:")
print(f"  J-invariant planes : mean {holo.mean:.6f}, std {holo.std:.2e}  (constant)")
print(f"  generic planes     : mean {generic.mean:.6f}, std {generic.std:.2e}  (not constant)")
