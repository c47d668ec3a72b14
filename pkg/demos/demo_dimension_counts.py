"""Almost-Killing dimension counts for the gallery families.

A vector field is almost Killing for a Randers norm built from (g, tau)
when it preserves g and d(tau).  Sampling both conditions over a polynomial
ansatz and taking the numerical nullspace gives the dimension of the
almost-Killing space, with a singular-value gap as the rank certificate:

  * flat 2D with d(tau) = c * area form       -> 3   (all rigid motions)
  * flat Kahler 4D with d(tau) = c * omega    -> 8   (translations + u(2))
  * Fubini-Study chart with d(tau) = c * omega -> 8  (holomorphic isometries)
  * any chart with closed tau                  -> n(n+1)/2 (full Killing algebra)

Run:  python demos/demo_dimension_counts.py   (about a minute)
"""

import numpy as np

from almostiso import (
    almost_killing_dimension,
    make_constant_curvature_2d,
    make_flat_kahler_4d,
    make_fubini_study_4d,
    make_randers_closed,
)

entries = [
    make_constant_curvature_2d("flat", 0.4),
    make_constant_curvature_2d("sphere", 0.3),
    make_flat_kahler_4d(0.2),
    make_flat_kahler_4d(0.0),
    make_fubini_study_4d(0.1),
    make_randers_closed(
        "flat-4d", lambda x: 0.2 * x[..., 0],
        grad_f=lambda x: np.stack(
            [0.2 * np.ones(x.shape[:-1])] + [np.zeros(x.shape[:-1])] * 3, axis=-1)),
]

print(f"{'entry':42s} {'dim':>4s} {'expected':>9s} {'sv gap':>9s} {'max T dev':>10s}")
for entry in entries:
    rep = almost_killing_dimension(
        entry.chart, entry.g, entry.tau, dtau=entry.dtau,
        cross_validate=True, raise_on_failure=False,
    )
    print(f"{entry.name:42s} {rep.dimension:4d} {entry.expected_dimension:9d} "
          f"{rep.gap:9.1e} {rep.max_t_deviation:10.1e}")
