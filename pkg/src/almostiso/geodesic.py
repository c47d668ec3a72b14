"""Nonsymmetric Finsler distance and the triangular function.

Distances are computed by direct minimization of the discrete path length

    L(P) = sum_i F(midpoint_i, step_i)

over the interior vertices of a polyline, starting from the straight
segment, using coordinate-wise descent with a backtracking/parabolic line
search.  Odd and even interior vertices touch disjoint segment pairs, so
each half-sweep updates its vertices simultaneously; many independent
distance problems are batched through one solver call.  The order of the
segment sum makes the length direction-dependent, which is the point: for
nonreversible norms d(p, q) != d(q, p).

The triangular function

    T(p, q, r) = d(p, q) + d(q, r) - d(p, r)

is invariant under maps that merely shift curve lengths by boundary terms
(F -> F + df), which is what the invariance checks in this module detect.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chart import ChartDomain, OneFormField, exterior_derivative
from .errors import (
    DegenerateInputError,
    DomainEscapeError,
    InvalidMapError,
)
from .duality import DirectionGrid
from .metric import MetricField

__all__ = [
    "PathPolyline",
    "TripleSample",
    "path_length",
    "distance",
    "distance_batch",
    "triangular",
    "triangular_batch",
    "t_invariance_check",
    "TInvarianceResult",
    "pullback_delta",
    "PullbackDelta",
    "solver_tolerance_certificate",
    "seeded_triples",
]


@dataclass(frozen=True)
class PathPolyline:
    """Ordered vertices of a discrete path from ``points[0]`` to ``points[-1]``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or len(pts) < 2:
            raise ValueError("a polyline needs at least two points")
        steps = np.linalg.norm(pts[1:] - pts[:-1], axis=1)
        if np.any(steps == 0.0):
            raise DegenerateInputError("consecutive polyline points must be distinct")
        object.__setattr__(self, "points", pts)

    @property
    def segments(self) -> int:
        return len(self.points) - 1


@dataclass(frozen=True)
class TripleSample:
    """Three chart points (p, q, r) for one triangular-function evaluation."""

    p: np.ndarray
    q: np.ndarray
    r: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack([np.asarray(self.p, float), np.asarray(self.q, float), np.asarray(self.r, float)])


def path_length(F: MetricField, path) -> float:
    """Midpoint-rule length ``sum F(mid, delta)`` along the polyline."""
    pts = path.points if isinstance(path, PathPolyline) else np.asarray(path, dtype=float)
    delta = pts[1:] - pts[:-1]
    if np.any(np.linalg.norm(delta, axis=1) == 0.0):
        raise DegenerateInputError("zero-length segment in path")
    mid = 0.5 * (pts[1:] + pts[:-1])
    return float(F(mid, delta).sum())


# ---------------------------------------------------------------------------
# Batched polyline minimizer
# ---------------------------------------------------------------------------

def _batch_lengths(F: MetricField, P: np.ndarray) -> np.ndarray:
    mid = 0.5 * (P[:, 1:] + P[:, :-1])
    delta = P[:, 1:] - P[:, :-1]
    return F(mid, delta).sum(axis=1)


def _minimize_paths(F: MetricField, P: np.ndarray, lower, upper,
                    iters: int, stop_tol: float = 1e-13) -> np.ndarray:
    """Coordinate descent over interior vertices of paths ``P`` (in place).

    Each accepted move strictly decreases its path's length, and moves are
    confined to the box, so the final lengths never exceed the initial
    (straight-line) ones.
    """
    B, kp1, n = P.shape
    k = kp1 - 1
    if k < 2:
        return _batch_lengths(F, P)
    colors = [np.arange(1, k, 2), np.arange(2, k, 2)]
    seg_scale = np.linalg.norm(P[:, -1] - P[:, 0], axis=1) / k
    # independent line-search memory per vertex AND axis: a converged axis
    # must not starve the other axes of step length
    step = np.tile((0.25 * seg_scale)[:, None, None], (1, k - 1, n))
    step_floor = 1e-12 * seg_scale.max()

    for _ in range(iters):
        sweep_gain = 0.0
        for idx in colors:
            if len(idx) == 0:
                continue
            a = P[:, idx - 1]
            c = P[:, idx + 1]
            for ax in range(n):
                b = P[:, idx]

                def local(bmod):
                    d1 = bmod - a
                    d2 = c - bmod
                    m1 = 0.5 * (a + bmod)
                    m2 = 0.5 * (bmod + c)
                    return F(m1, d1) + F(m2, d2)

                base = local(b)
                s = step[:, idx - 1, ax]
                bp = b.copy()
                bp[:, :, ax] = np.clip(bp[:, :, ax] + s, lower[ax], upper[ax])
                bm = b.copy()
                bm[:, :, ax] = np.clip(bm[:, :, ax] - s, lower[ax], upper[ax])
                fp = local(bp)
                fm = local(bm)
                curv = fp - 2.0 * base + fm
                with np.errstate(divide="ignore", invalid="ignore"):
                    delta = np.where(
                        curv > 1e-300,
                        0.5 * s * (fm - fp) / curv,
                        np.where(fp < fm, s, -s),
                    )
                delta = np.clip(delta, -4.0 * s, 4.0 * s)
                bt = b.copy()
                bt[:, :, ax] = np.clip(bt[:, :, ax] + delta, lower[ax], upper[ax])
                ft = local(bt)

                cand_vals = np.stack([ft, fp, fm])
                cand_pos = np.stack([bt[:, :, ax], bp[:, :, ax], bm[:, :, ax]])
                which = np.argmin(cand_vals, axis=0)
                vbest = np.take_along_axis(cand_vals, which[None], axis=0)[0]
                pbest = np.take_along_axis(cand_pos, which[None], axis=0)[0]
                improve = vbest < base
                P[:, idx, ax] = np.where(improve, pbest, P[:, idx, ax])
                step[:, idx - 1, ax] = np.maximum(
                    np.where(improve, s * 1.3, s * 0.5), step_floor)
                sweep_gain += float(np.where(improve, base - vbest, 0.0).sum())
        if sweep_gain < stop_tol * B:
            break
    return _batch_lengths(F, P)


def _straight_paths(starts: np.ndarray, ends: np.ndarray, k: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, k + 1)[None, :, None]
    return (1.0 - t) * starts[:, None, :] + t * ends[:, None, :]


def _resample_paths(P: np.ndarray, k_new: int) -> np.ndarray:
    """Resample each polyline at chord-length-uniform parameters."""
    B, _, n = P.shape
    out = np.empty((B, k_new + 1, n))
    t_new = np.linspace(0.0, 1.0, k_new + 1)
    for b in range(B):
        chord = np.linalg.norm(P[b, 1:] - P[b, :-1], axis=1)
        t = np.concatenate([[0.0], np.cumsum(chord)])
        t /= t[-1] if t[-1] > 0 else 1.0
        for ax in range(n):
            out[b, :, ax] = np.interp(t_new, t, P[b, :, ax])
    out[:, 0] = P[:, 0]
    out[:, -1] = P[:, -1]
    return out


def distance_batch(F: MetricField, starts, ends, k: int = 16, iters: int = 400) -> np.ndarray:
    """Minimized path lengths for many (start, end) pairs at once.

    The descent runs coarse-to-fine: the straight segment is first relaxed
    on a short polyline, which resolves the long-wavelength shape of the
    geodesic, then refined and relaxed again up to ``k`` segments (plain
    coordinate sweeps alone stall on smooth low-frequency modes for large
    ``k``).  The returned value never exceeds the straight-line length.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    if np.any(np.linalg.norm(ends - starts, axis=1) == 0.0):
        raise DegenerateInputError("distance requires distinct endpoints")
    if F.chart is not None:
        F.chart.require_interior(starts)
        F.chart.require_interior(ends)
        lower, upper = F.chart.lower, F.chart.upper
    else:
        lower = np.full(F.dim, -np.inf)
        upper = np.full(F.dim, np.inf)
    levels = [k]
    while levels[-1] > 4:
        levels.append((levels[-1] + 1) // 2)
    levels.reverse()
    P = _straight_paths(starts, ends, levels[0])
    result = None
    for i, level in enumerate(levels):
        if i:
            P = _resample_paths(P, level)
        result = _minimize_paths(F, P, lower, upper, iters)
    straight = _batch_lengths(F, _straight_paths(starts, ends, k))
    return np.minimum(result, straight)


def distance(F: MetricField, p, q, k: int = 16, iters: int = 400) -> float:
    """Nonsymmetric distance d(p, q); at most the straight-line length."""
    return float(distance_batch(F, np.asarray(p)[None], np.asarray(q)[None], k, iters)[0])


def triangular_batch(F: MetricField, triples, k: int = 16, iters: int = 400) -> np.ndarray:
    """T(p, q, r) = d(p, q) + d(q, r) - d(p, r) for a stack of triples."""
    T = np.asarray(triples, dtype=float)
    if T.ndim == 2:
        T = T[None]
    p, q, r = T[:, 0], T[:, 1], T[:, 2]
    starts = np.concatenate([p, q, p])
    ends = np.concatenate([q, r, r])
    same = np.linalg.norm(ends - starts, axis=1) == 0.0
    d = np.zeros(len(starts))
    if np.any(~same):
        d[~same] = distance_batch(F, starts[~same], ends[~same], k, iters)
    B = len(T)
    return d[:B] + d[B:2 * B] - d[2 * B:]


def triangular(F: MetricField, sample, k: int = 16, iters: int = 400) -> float:
    """Triangular function for one triple; nonnegative up to solver error."""
    arr = sample.as_array() if isinstance(sample, TripleSample) else np.asarray(sample, dtype=float)
    return float(triangular_batch(F, arr[None], k, iters)[0])


@dataclass(frozen=True)
class TInvarianceResult:
    """Per-triple T values before/after a point map, and their spread."""

    triples: np.ndarray
    t_values: np.ndarray
    t_mapped: np.ndarray

    @property
    def max_diff(self) -> float:
        return float(np.abs(self.t_mapped - self.t_values).max())

    def to_csv(self, path) -> None:
        B, _, n = self.triples.shape
        cols = [self.triples.reshape(B, 3 * n), self.t_values[:, None],
                self.t_mapped[:, None], (self.t_mapped - self.t_values)[:, None]]
        names = [f"{pt}{i + 1}" for pt in ("p", "q", "r") for i in range(n)]
        header = ",".join(names + ["T", "T_mapped", "diff"])
        np.savetxt(path, np.hstack(cols), delimiter=",", header=header, comments="")


def t_invariance_check(F: MetricField, phi: Callable[[np.ndarray], np.ndarray],
                       triples, k: int = 16, iters: int = 400) -> TInvarianceResult:
    """Max |T(phi(p), phi(q), phi(r)) - T(p, q, r)| over the given triples.

    ``phi`` must keep every triple inside the chart box; a verified almost
    isometry keeps the result at the distance-solver tolerance.
    """
    T = np.asarray(triples, dtype=float)
    if T.ndim == 2:
        T = T[None]
    B = len(T)
    flat = T.reshape(-1, T.shape[-1])
    mapped = np.asarray(phi(flat), dtype=float).reshape(T.shape)
    if F.chart is not None and not np.all(F.chart.contains(mapped.reshape(-1, T.shape[-1]))):
        raise DomainEscapeError("mapped triple left the chart box")
    both = np.concatenate([T, mapped])
    t_all = triangular_batch(F, both, k, iters)
    return TInvarianceResult(triples=T, t_values=t_all[:B], t_mapped=t_all[B:])


# ---------------------------------------------------------------------------
# Pullback deviation: how far a map is from F -> F + df
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PullbackDelta:
    """Fitted covector of the pullback deviation and its residuals."""

    covector: np.ndarray
    linearity_residual: float
    closedness_residual: float


def _fit_covector(F: MetricField, phi, x, grid: DirectionGrid, h: float) -> tuple[np.ndarray, float]:
    n = grid.dim
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        cols.append((np.asarray(phi(x + e), float) - np.asarray(phi(x - e), float)) / (2 * h))
    J = np.stack(cols, axis=-1)            # J[a, i] = d phi_a / d x_i
    if abs(np.linalg.det(J)) < 1e-12:
        raise InvalidMapError(f"map has singular Jacobian at {x}")
    U = grid.directions
    X = np.broadcast_to(x, U.shape)
    phix = np.broadcast_to(np.asarray(phi(x), float), U.shape)
    delta = F(phix, U @ J.T) - F(X, U)
    w = grid.weights
    M = (w[:, None, None] * U[:, :, None] * U[:, None, :]).sum(axis=0)
    rhs = (w[:, None] * delta[:, None] * U).sum(axis=0)
    cov = np.linalg.solve(M, rhs)
    return cov, float(np.abs(delta - U @ cov).max())


def pullback_delta(F: MetricField, phi: Callable[[np.ndarray], np.ndarray], x,
                   grid: DirectionGrid, jacobian_step: float = 1e-5,
                   closedness_points=None, closedness_step: float | None = None) -> PullbackDelta:
    """Measure how far ``phi`` is from a trivial projective change of ``F``.

    The deviation ``delta(x, u) = F(phi(x), Dphi(x) u) - F(x, u)`` is sampled
    on the direction grid and fitted by a covector; the linearity residual
    is the max misfit.  Fitting the covector at nearby sample points and
    taking its exterior derivative yields the closedness residual, so a map
    of the form ``phi_* F = F + df`` drives both residuals to zero.
    """
    x = np.asarray(x, dtype=float)
    chart = F.chart
    if chart is None:
        raise ValueError("pullback_delta needs a metric with a chart")
    cov, lin_res = _fit_covector(F, phi, x, grid, jacobian_step)

    H = closedness_step if closedness_step is not None else 10.0 * chart.fd_step
    if closedness_points is None:
        # cluster near x: the map phi is only assumed well-defined there
        n = chart.dim
        offsets = np.vstack([np.zeros(n), 2 * H * np.eye(n), -2 * H * np.eye(n)])
        closedness_points = np.atleast_2d(x) + offsets
    closedness_points = np.atleast_2d(np.asarray(closedness_points, dtype=float))

    def cov_field(pts):
        pts = np.atleast_2d(pts)
        return np.stack([_fit_covector(F, phi, p, grid, jacobian_step)[0] for p in pts])

    field = OneFormField(lambda pts: cov_field(pts).reshape(np.asarray(pts).shape), chart.dim)
    d_cov = exterior_derivative(chart, field, closedness_points, step=H)
    return PullbackDelta(
        covector=cov,
        linearity_residual=lin_res,
        closedness_residual=float(np.abs(d_cov).max()),
    )


# ---------------------------------------------------------------------------
# Certificates and sampling helpers
# ---------------------------------------------------------------------------

def solver_tolerance_certificate(F: MetricField, pairs, k: int = 16, iters: int = 400) -> float:
    """Max |d_{2k, 2*iters} - d_{k, iters}| over the pairs (Cauchy check).

    The operational solver tolerance: refining both the path and the
    iteration budget must not move any reported distance by more than this.
    """
    pairs = np.asarray(pairs, dtype=float)
    d1 = distance_batch(F, pairs[:, 0], pairs[:, 1], k, iters)
    d2 = distance_batch(F, pairs[:, 0], pairs[:, 1], 2 * k, 2 * iters)
    return float(np.abs(d2 - d1).max())


def seeded_triples(chart: ChartDomain, count: int, seed: int = 0,
                   margin: float | None = None) -> np.ndarray:
    """Reproducible random triples inside a margin-shrunk chart box."""
    if margin is None:
        margin = 0.25 * chart.edges.min()
    rng = np.random.default_rng(seed)
    lo = chart.lower + margin
    hi = chart.upper - margin
    out = rng.uniform(lo, hi, size=(count, 3, chart.dim))
    # re-draw triples with near-coincident points
    for _ in range(16):
        d = np.linalg.norm(out - np.roll(out, 1, axis=1), axis=2).min(axis=1)
        bad = d < 1e-3 * chart.edges.min()
        if not np.any(bad):
            break
        out[bad] = rng.uniform(lo, hi, size=(int(bad.sum()), 3, chart.dim))
    return out
