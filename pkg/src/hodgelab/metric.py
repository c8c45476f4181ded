"""Riemannian data on complexes: edge lengths, conformal factors and the
lumped (diagonal) mass operators realizing the L2 inner products.

The conformal factor u is stored per triangle and kept separate from the
base edge lengths, so rescaling composes additively and each triangle's
effective geometry is its base geometry scaled by exp(u).  Barycentric
dual volumes keep every mass diagonal strictly positive on arbitrary
meshes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .complexes import SimplicialComplex, build_complex, coboundary
from .errors import AspectBlowup, DegenerateTriangle, ValidationError

__all__ = [
    "MetricField",
    "OperatorBundle",
    "metric_from_embedding",
    "metric_uniform",
    "warped_annulus_metric",
    "conformal_rescale",
    "mass_matrices",
]


@dataclass(frozen=True)
class MetricField:
    """Per-edge base lengths plus a per-triangle conformal factor u.

    Effective lengths inside triangle t are ``edge_length * exp(u[t])``;
    a shared edge asked for a single length uses the mean of the adjacent
    factors.
    """

    edge_length: np.ndarray
    conformal_factor: np.ndarray
    source: str = "embedding"

    def triangle_lengths(self, complex: SimplicialComplex, t: int) -> tuple:
        """Effective lengths (l_bc, l_ac, l_ab) opposite vertices (a, b, c)."""
        a, b, c = complex.triangles[t]
        s = float(np.exp(self.conformal_factor[t]))
        return (
            self.edge_length[complex.edge_index[(b, c)]] * s,
            self.edge_length[complex.edge_index[(a, c)]] * s,
            self.edge_length[complex.edge_index[(a, b)]] * s,
        )

    def effective_edge_lengths(self, complex: SimplicialComplex) -> np.ndarray:
        """Single per-edge lengths, shared edges averaging adjacent factors."""
        u_sum = np.zeros(complex.n_edges)
        u_cnt = np.zeros(complex.n_edges)
        for t in range(complex.n_triangles):
            ut = self.conformal_factor[t]
            a, b, c = complex.triangles[t]
            for pair in ((a, b), (a, c), (b, c)):
                e = complex.edge_index[pair]
                u_sum[e] += ut
                u_cnt[e] += 1
        u_mean = np.where(u_cnt > 0, u_sum / np.maximum(u_cnt, 1), 0.0)
        return self.edge_length * np.exp(u_mean)


@dataclass(frozen=True)
class OperatorBundle:
    """Coboundaries plus diagonal mass operators for one metric.

    The weak codifferential is M_k^{-1} d_k^T M_{k+1}, so adjointness of d
    and delta holds exactly by construction.
    """

    complex: SimplicialComplex
    d0: sp.csr_matrix
    d1: sp.csr_matrix
    M0: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    bc: str = "none"
    metric_ref: Optional[MetricField] = None

    def mass(self, k: int) -> np.ndarray:
        return (self.M0, self.M1, self.M2)[k]

    def coboundary(self, k: int) -> sp.csr_matrix:
        return (self.d0, self.d1)[k]

    def codifferential(self, k: int) -> sp.csr_matrix:
        """delta_k: k-cochains -> (k-1)-cochains."""
        d = self.coboundary(k - 1)
        return sp.diags(1.0 / self.mass(k - 1)) @ d.T @ sp.diags(self.mass(k))

    def inner(self, k: int, x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ (self.mass(k) * y))

    def norm(self, k: int, x: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(k, x, x), 0.0)))


def _heron(a: float, b: float, c: float) -> float:
    # Kahan's numerically stable variant; operands sorted a >= b >= c
    a, b, c = sorted((a, b, c), reverse=True)
    t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    if t <= 0.0:
        return 0.0
    return 0.25 * np.sqrt(t)


def metric_from_embedding(complex: SimplicialComplex, vertex_coords: np.ndarray) -> MetricField:
    """Edge lengths from Euclidean distances; u identically zero.

    Raises DegenerateTriangle when any area falls below
    1e-14 * (mean edge length)^2.
    """
    coords = np.asarray(vertex_coords, dtype=float)
    if not np.all(np.isfinite(coords)):
        raise ValidationError("non-finite vertex coordinates")
    lengths = np.linalg.norm(
        coords[complex.edges[:, 1]] - coords[complex.edges[:, 0]], axis=1
    )
    metric = MetricField(lengths, np.zeros(complex.n_triangles), source="embedding")
    floor = 1e-14 * float(np.mean(lengths)) ** 2
    for t in range(complex.n_triangles):
        if _heron(*metric.triangle_lengths(complex, t)) <= floor:
            raise DegenerateTriangle(f"triangle {t} has area below {floor:g}")
    return metric


def metric_uniform(complex: SimplicialComplex, length: float = 1.0) -> MetricField:
    """Unit/equilateral combinatorial metric (always satisfies the strict
    triangle inequality)."""
    return MetricField(
        np.full(complex.n_edges, float(length)),
        np.zeros(complex.n_triangles),
        source="uniform",
    )


def warped_annulus_metric(
    n_radial: int, n_angular: int, L: float, warp_exponent: float
):
    """Discretized collar ]0, L[ x S^1 with metric dr^2 + e^{2 a r} h.

    Radial edges have length L / n_radial; the angular edge on the ring at
    radius r has length (2 pi / n_angular) e^{a r}; cell diagonals use the
    geometric mean of the two adjacent ring arcs.

    Returns (complex, MetricField); raises AspectBlowup when any triangle
    aspect ratio exceeds 1e6.
    """
    if L <= 0 or n_radial < 3 or n_angular < 3:
        raise ValidationError("need L > 0 and grid sizes >= 3")
    m = n_angular
    dr = L / n_radial

    def v(k, j):
        return k * m + (j % m)

    faces = []
    for k in range(n_radial):
        for j in range(m):
            A, B, C, D = v(k, j), v(k, j + 1), v(k + 1, j + 1), v(k + 1, j)
            faces.append((A, B, C))
            faces.append((A, C, D))
    cx = build_complex((n_radial + 1) * m, faces)

    arc = [(2 * np.pi / m) * np.exp(warp_exponent * k * dr) for k in range(n_radial + 1)]
    lengths = np.zeros(cx.n_edges)
    for k in range(n_radial + 1):
        for j in range(m):
            a, b = sorted((v(k, j), v(k, j + 1)))
            lengths[cx.edge_index[(a, b)]] = arc[k]
    for k in range(n_radial):
        diag = np.sqrt(dr * dr + arc[k] * arc[k + 1])
        for j in range(m):
            a, b = sorted((v(k, j), v(k + 1, j)))
            lengths[cx.edge_index[(a, b)]] = dr
            a, b = sorted((v(k, j), v(k + 1, j + 1)))
            lengths[cx.edge_index[(a, b)]] = diag

    metric = MetricField(lengths, np.zeros(cx.n_triangles), source="warped")
    for t in range(cx.n_triangles):
        la, lb, lc = metric.triangle_lengths(cx, t)
        area = _heron(la, lb, lc)
        if area <= 0 or max(la, lb, lc) ** 2 / area > 1e6:
            raise AspectBlowup(
                f"triangle {t} aspect {max(la, lb, lc) ** 2 / max(area, 1e-300):.2e}"
            )
    return cx, metric


def conformal_rescale(metric: MetricField, u_per_triangle: np.ndarray) -> MetricField:
    """Multiply the metric by e^{2u} trianglewise; u composes additively."""
    du = np.asarray(u_per_triangle, dtype=float)
    if du.shape != metric.conformal_factor.shape:
        raise ValidationError("u array must have one entry per triangle")
    if not np.all(np.isfinite(du)):
        raise ValidationError("non-finite conformal factor")
    return MetricField(
        metric.edge_length, metric.conformal_factor + du, source="rescaled"
    )


def mass_matrices(complex: SimplicialComplex, metric: MetricField) -> OperatorBundle:
    """Assemble the lumped mass operators from barycentric dual volumes.

    M0: dual area per vertex (a third of each incident triangle);
    M1: dual length / primal length per edge, the dual legs running from
    edge midpoints to barycenters (a third of the opposite median);
    M2: 1 / area per triangle.
    """
    V, E, F = complex.n_vertices, complex.n_edges, complex.n_triangles
    M0 = np.zeros(V)
    M1 = np.zeros(E)
    M2 = np.zeros(F)
    mean_len = float(np.mean(metric.edge_length)) if E else 1.0
    floor = 1e-14 * mean_len**2

    for t in range(F):
        a, b, c = complex.triangles[t]
        l_bc, l_ac, l_ab = metric.triangle_lengths(complex, t)
        area = _heron(l_bc, l_ac, l_ab)
        if area <= floor * np.exp(2 * metric.conformal_factor[t]):
            raise DegenerateTriangle(f"triangle {t} degenerate under metric")
        M2[t] = 1.0 / area
        for vtx in (a, b, c):
            M0[vtx] += area / 3.0
        # median to each edge from its opposite vertex
        for pair, opp_len, o1, o2 in (
            ((b, c), l_bc, l_ac, l_ab),
            ((a, c), l_ac, l_bc, l_ab),
            ((a, b), l_ab, l_bc, l_ac),
        ):
            med = 0.5 * np.sqrt(max(2 * o1**2 + 2 * o2**2 - opp_len**2, 0.0))
            M1[complex.edge_index[pair]] += med / (3.0 * opp_len)

    if np.any(M0 <= 0) or np.any(M1 <= 0) or np.any(M2 <= 0):
        raise DegenerateTriangle("non-positive mass diagonal")
    return OperatorBundle(
        complex=complex,
        d0=coboundary(complex, 0),
        d1=coboundary(complex, 1),
        M0=M0,
        M1=M1,
        M2=M2,
        bc="none",
        metric_ref=metric,
    )
