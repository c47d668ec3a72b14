"""Certified gallery entries: admissibility, d(tau), curvature, dimensions."""

import numpy as np
import pytest

from almostiso import (
    build_gallery_entry,
    convexity_margin,
    direction_grid,
    exterior_derivative,
    gallery_catalog,
    make_constant_curvature_2d,
    make_flat_kahler_4d,
)
from almostiso.duality import betterment_covector
from almostiso.errors import ConvexityError


class TestConstantCurvature2D:
    def test_flat_margin_closed_form(self, flat_25):
        # |tau|_g = (c/2) r peaks at the box corner: margin 1 - 0.2 sqrt(0.5)
        margin = convexity_margin(flat_25.randers, flat_25.chart.mesh_points(5))
        assert margin == pytest.approx(1 - 0.2 * np.sqrt(0.5), abs=1e-12)

    def test_flat_dtau_exact(self, flat_25):
        pts = flat_25.chart.sample_points(10, seed=1, margin=0.05)
        vals = exterior_derivative(flat_25.chart, flat_25.tau, pts)
        assert np.abs(vals[:, 0, 1] - 0.4).max() < 1e-6

    def test_sphere_proportionality(self, sphere_25):
        # d tau / vol_g = c at samples
        chart = sphere_25.chart
        pts = chart.sample_points(12, seed=2, margin=0.05)
        dt = exterior_derivative(chart, sphere_25.tau, pts)[:, 0, 1]
        dens = 4.0 / (1.0 + (pts ** 2).sum(axis=1)) ** 2
        assert np.abs(dt / dens - 0.3).max() < 1e-4

    def test_sphere_curvature_certified(self, sphere_25):
        mean, tol = sphere_25.certificates["curvature_mean"]
        assert abs(mean - 1.0) < 1e-3

    def test_hyperbolic_curvature_certified(self, hyperbolic_25):
        mean, _ = hyperbolic_25.certificates["curvature_mean"]
        assert abs(mean + 1.0) < 1e-3

    def test_expected_dimension(self, flat_25, sphere_25):
        assert flat_25.expected_dimension == 3
        assert sphere_25.expected_dimension == 3

    def test_inadmissible_c_shrinks_box(self):
        # |tau|_g = 1.5 r exceeds 1 at the default box corner (r = 0.707)
        entry = make_constant_curvature_2d("flat", 3.0)
        # started at half-width 0.5; must have shrunk to stay admissible
        assert entry.chart.upper[0] < 0.5
        assert convexity_margin(entry.randers, entry.chart.mesh_points(5)) > 0

    def test_hopeless_c_rejected(self):
        with pytest.raises(ConvexityError):
            make_constant_curvature_2d("flat", 1e6, max_shrink=2)


class TestFlatKahler4D:
    def test_dtau_exact(self, kahler_3):
        pts = kahler_3.chart.sample_points(6, seed=3, margin=0.05)
        vals = exterior_derivative(kahler_3.chart, kahler_3.tau, pts)
        om = np.zeros((4, 4))
        om[0, 1] = om[2, 3] = 1.0
        om[1, 0] = om[3, 2] = -1.0
        assert np.abs(vals - 0.2 * om).max() < 1e-6

    def test_complex_structure_compatibility(self, kahler_3):
        J = kahler_3.complex_structure
        rng = np.random.default_rng(4)
        G = np.eye(4)
        u, v = rng.standard_normal((2, 4))
        assert (J @ u) @ G @ (J @ v) == pytest.approx(u @ G @ v, abs=1e-14)
        # omega(u, v) = g(J u, v) recovers d(tau)/c
        om = exterior_derivative(kahler_3.chart, kahler_3.tau, np.zeros(4)) / 0.2
        assert om[0, 1] == pytest.approx((J @ np.eye(4)[0]) @ G @ np.eye(4)[1],
                                         abs=1e-9)

    def test_expected_dimensions(self, kahler_3):
        assert kahler_3.expected_dimension == 8
        assert make_flat_kahler_4d(0.0).expected_dimension == 10

    def test_j_squares_to_minus_one(self, kahler_3):
        J = kahler_3.complex_structure
        assert np.array_equal(J @ J, -np.eye(4))


class TestFubiniStudy:
    def test_certificates_recorded(self, fubini_study):
        certs = fubini_study.certificates
        assert certs["domega_defect"][0] < 1e-6
        assert certs["dtau_defect"][0] < 1e-6
        assert certs["holomorphic_curvature_std"][0] < 1e-3

    def test_metric_identity_at_origin(self, fubini_study):
        G = fubini_study.g(np.zeros(4))
        assert np.abs(G - np.eye(4)).max() < 1e-14

    def test_j_compatible_metric(self, fubini_study):
        J = fubini_study.complex_structure
        pts = fubini_study.chart.sample_points(5, seed=5)
        G = fubini_study.g(pts)
        assert np.abs(np.einsum("ab,mbc,cd->mad", J.T, G, J) - G).max() < 1e-13

    def test_expected_dimension(self, fubini_study):
        assert fubini_study.expected_dimension == 8


class TestRandersClosed:
    def test_expected_dimensions(self, closed_entries):
        dims = [e.expected_dimension for e in closed_entries]
        assert dims == [3, 3, 10]

    def test_margins_positive(self, closed_entries):
        for e in closed_entries:
            margin, _ = e.certificates["convexity_margin"]
            assert margin > 0

    def test_dtau_vanishes(self, closed_entries):
        for e in closed_entries:
            defect, tol = e.certificates["dtau_defect"]
            assert defect < tol


class TestBettermentConsistency:
    """Recentering the Randers norm recovers sqrt(g) at sample points."""

    @staticmethod
    def recovery_error(entry, n_points=3, radius_factor=0.45):
        chart = entry.chart
        grid = direction_grid(chart.dim)
        pts = chart.sample_points(n_points, seed=11, margin=0.1 * chart.edges.min())
        if chart.dim > 2:
            # keep |tau|_g small enough for the fixed-size S^3 grid to
            # resolve the dual body's translation (grid aliasing)
            center = 0.5 * (chart.lower + chart.upper)
            radius = radius_factor * chart.edges.min() / 2
            scale = radius / max(np.linalg.norm(pts - center, axis=1).max(), 1e-12)
            pts = center + (pts - center) * min(1.0, scale)
        worst = 0.0
        for x in pts:
            G = entry.g(x)
            tau_x = entry.tau(x)
            frame = np.linalg.inv(np.linalg.cholesky(G)).T
            norm = lambda v: (np.sqrt(np.einsum("...i,ij,...j->...", v, G, v))
                              + np.asarray(v) @ tau_x)
            b = betterment_covector(norm, grid, frame=frame)
            U = grid.directions
            target = np.sqrt(np.einsum("ki,ij,kj->k", U, G, U))
            worst = max(worst, float(np.abs((norm(U) - U @ b) / target - 1).max()))
        return worst

    def test_2d_entries(self, flat_25, sphere_25):
        assert self.recovery_error(flat_25) < 1e-4
        assert self.recovery_error(sphere_25) < 1e-4

    def test_flat_kahler(self, kahler_3):
        assert self.recovery_error(kahler_3) < 1e-4

    def test_fubini_study(self, fubini_study):
        assert self.recovery_error(fubini_study) < 1e-4


def test_catalog_builds():
    names = sorted(gallery_catalog())
    assert "example-2.5" in names and "fubini-study" in names
    entry = build_gallery_entry("example-2.5", c=0.4)
    assert entry.expected_dimension == 3
    with pytest.raises(KeyError):
        build_gallery_entry("no-such-entry")


@pytest.mark.parametrize("name", [
    "example-2-sphere", "example-2.5", "example-2.5-sphere",
    "example-2.5-hyperbolic", "example-3", "fubini-study",
])
def test_config_roundtrip(name):
    """Serialized configurations reproduce each entry's metric data."""
    from almostiso.config import config_from_dict
    from almostiso.gallery import gallery_entry_config

    entry = build_gallery_entry(name)
    cfg = config_from_dict(gallery_entry_config(name))
    pts = entry.chart.sample_points(8, seed=13, margin=0.1 * entry.chart.edges.min())
    np.testing.assert_allclose(cfg.randers.g(pts), entry.g(pts), atol=1e-12)
    # potential-kind configs differentiate f numerically: agreement at the
    # centered-difference accuracy, exact for the closed-form drifts
    np.testing.assert_allclose(cfg.randers.tau(pts), entry.tau(pts), atol=1e-7)


def test_fubini_study_c0_full_killing_dimension():
    """With no drift the dimension is the chart metric's own Killing count."""
    from almostiso import almost_killing_dimension, make_fubini_study_4d

    entry = make_fubini_study_4d(0.0)
    rep = almost_killing_dimension(entry.chart, entry.g, entry.tau,
                                   dtau=entry.dtau, cross_validate=False)
    assert rep.dimension == 8
    assert rep.gap > 1e2
