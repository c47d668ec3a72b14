"""Shared fixtures: direction grids and certified gallery entries.

Gallery construction runs its certificates (curvature sweeps, d-tau checks),
so entries are built once per session.
"""

import pytest

from almostiso import (
    direction_grid,
    make_constant_curvature_2d,
    make_flat_kahler_4d,
    make_fubini_study_4d,
    make_randers_closed,
)


@pytest.fixture(scope="session")
def grid2():
    return direction_grid(2)


@pytest.fixture(scope="session")
def grid4():
    return direction_grid(4)


@pytest.fixture(scope="session")
def flat_25():
    """Flat 2D chart with d(tau) = 0.4 * area form."""
    return make_constant_curvature_2d("flat", 0.4)


@pytest.fixture(scope="session")
def sphere_25():
    return make_constant_curvature_2d("sphere", 0.3)


@pytest.fixture(scope="session")
def hyperbolic_25():
    return make_constant_curvature_2d("hyperbolic", 0.3)


@pytest.fixture(scope="session")
def kahler_3():
    """Flat Kahler 4D chart with d(tau) = 0.2 * Kahler form."""
    return make_flat_kahler_4d(0.2)


@pytest.fixture(scope="session")
def fubini_study():
    return make_fubini_study_4d(0.1)


@pytest.fixture(scope="session")
def closed_entries():
    """The closed-one-form family: flat 2D, sphere 2D, flat 4D."""
    import numpy as np

    return [
        make_randers_closed(
            "flat-2d", lambda x: 0.3 * x[..., 0],
            grad_f=lambda x: np.stack(
                [0.3 * np.ones(x.shape[:-1]), np.zeros(x.shape[:-1])], axis=-1),
        ),
        make_randers_closed(
            "sphere-2d", lambda x: 0.1 * np.sin(x[..., 0]),
            grad_f=lambda x: np.stack(
                [0.1 * np.cos(x[..., 0]), np.zeros(x.shape[:-1])], axis=-1),
        ),
        make_randers_closed(
            "flat-4d", lambda x: 0.2 * x[..., 0],
            grad_f=lambda x: np.stack(
                [0.2 * np.ones(x.shape[:-1])] + [np.zeros(x.shape[:-1])] * 3, axis=-1),
        ),
    ]
