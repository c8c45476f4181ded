"""Ends of a complex relative to a core: detection, capacity curves,
parabolic/non-parabolic classification and Li-Tam harmonic functions by
Dirichlet exhaustion.

Ends of n >= 3 model geometries enter through 1-D radial weights (mode
reduction); mesh ends are handled directly on the 0-Laplacian of a bundle.

A uniform lower bound on small-ball volumes forces every end to have
infinite volume; that criterion stays documentation-only here (the model
families have known volume growth by construction, and no ball-volume
computation is performed).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    EmptyComplement,
    NonConvergent,
    TruncationTooTight,
    ValidationError,
)
from .linalg import smallest_eigenpairs
from .metric import OperatorBundle

__all__ = [
    "EndDescriptor",
    "HarmonicFunctionReport",
    "RadialEndModel",
    "TwoEndedModel",
    "detect_ends",
    "capacity",
    "capacity_model",
    "classify_parabolic",
    "li_tam_harmonic",
    "lambda0_estimate",
    "radial_end_model",
    "two_ended_model",
]


@dataclass
class EndDescriptor:
    """One unbounded-side component of the complement of a core.

    ``capacity_curve`` and classification fields are filled by capacity /
    classify_parabolic; vertex ids refer to the parent complex.
    """

    end_id: int
    vertices: np.ndarray
    interface_vertices: np.ndarray
    interface_edges: np.ndarray
    radii: Optional[np.ndarray] = None
    capacity_curve: Optional[np.ndarray] = None
    classification: str = "undetermined"
    trend_exponent: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "end_id": self.end_id,
            "size": int(len(self.vertices)),
            "radii": [] if self.radii is None else [float(r) for r in self.radii],
            "capacities": [] if self.capacity_curve is None
            else [float(c) for c in self.capacity_curve],
            "classification": self.classification,
            "trend_exponent": self.trend_exponent,
        }


@dataclass
class HarmonicFunctionReport:
    """Li-Tam exhaustion limit and its certificates."""

    grid: np.ndarray
    values: np.ndarray
    radii: tuple
    dirichlet_energy: tuple
    laplacian_residual: float
    end_values: tuple
    oscillation: float
    oscillation_per_radius: tuple
    deviations: dict
    max_abs: float
    converged_delta: float
    degenerating: bool


def detect_ends(complex, core_vertices: Sequence[int]):
    """Connected components of the complement of a vertex core.

    Returns one EndDescriptor per component with its interface edges
    (edges joining the component to the core).
    """
    core = set(int(v) for v in core_vertices)
    outside = [v for v in range(complex.n_vertices) if v not in core]
    if not outside:
        raise EmptyComplement("core covers every vertex")
    parent = {v: v for v in outside}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in complex.edges:
        a, b = int(a), int(b)
        if a in core or b in core:
            continue
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    groups: dict = {}
    for v in outside:
        groups.setdefault(find(v), []).append(v)

    ends = []
    for i, (_, verts) in enumerate(sorted(groups.items())):
        vset = set(verts)
        iface_edges, iface_verts = [], set()
        for e, (a, b) in enumerate(complex.edges):
            a, b = int(a), int(b)
            if a in core and b in vset:
                iface_edges.append(e)
                iface_verts.add(b)
            elif b in core and a in vset:
                iface_edges.append(e)
                iface_verts.add(a)
        ends.append(
            EndDescriptor(
                end_id=i,
                vertices=np.array(sorted(verts)),
                interface_vertices=np.array(sorted(iface_verts)),
                interface_edges=np.array(iface_edges, dtype=int),
            )
        )
    return ends


def _dirichlet_solve(S: sp.spmatrix, fixed: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Solve S u = 0 with u prescribed on ``fixed``; returns full u."""
    free = np.where(~fixed)[0]
    fx = np.where(fixed)[0]
    u = values.astype(float).copy()
    if len(free) == 0:
        return u
    S_ff = S[free][:, free].tocsc()
    rhs = -(S[free][:, fx] @ u[fx])
    u[free] = spla.spsolve(S_ff, rhs)
    return u


def capacity(
    bundle: OperatorBundle,
    end: EndDescriptor,
    radii_schedule: Sequence[float],
    radius_map: np.ndarray,
) -> np.ndarray:
    """Capacity curve C(R) of a mesh end.

    C(R) is the Dirichlet energy of the harmonic potential with value 1 on
    the interface vertices and 0 where ``radius_map`` >= R inside the end;
    non-increasing in R by the variational principle.
    """
    radii = np.asarray(radii_schedule, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValidationError("radii must be increasing")
    cx = bundle.complex
    d0, M1 = bundle.d0, bundle.M1
    S = (d0.T @ sp.diags(M1) @ d0).tocsr()

    domain = np.concatenate([end.vertices, end.interface_vertices])
    dset = set(int(v) for v in domain)
    keep_edges = np.array(
        [int(a) in dset and int(b) in dset for a, b in cx.edges], dtype=bool
    )
    curve = []
    for R in radii:
        u = np.zeros(cx.n_vertices)
        fixed = np.ones(cx.n_vertices, dtype=bool)
        u[end.interface_vertices] = 1.0
        inner = end.vertices[radius_map[end.vertices] < R]
        inner = np.setdiff1d(inner, end.interface_vertices)
        if len(inner) == 0:
            raise TruncationTooTight(f"no free vertices below radius {R}")
        fixed[inner] = False
        u = _dirichlet_solve(S, fixed, u)
        du = d0 @ u
        curve.append(float((du[keep_edges] * M1[keep_edges]) @ du[keep_edges]))
    return np.array(curve)


@dataclass(frozen=True)
class RadialEndModel:
    """1-D radial end on [r0, R_max] with volume density ``weight``.

    Cell conductances are midpoint-rule approximations of
    (int_cell dr / w)^{-1}; the grid carries every schedule radius as a
    node so truncations are exact.
    """

    r: np.ndarray
    weight: np.ndarray          # at nodes (mass density)
    conductance: np.ndarray     # per cell

    @property
    def mass(self) -> np.ndarray:
        c = np.zeros_like(self.r)
        dr = np.diff(self.r)
        c[:-1] += 0.5 * dr
        c[1:] += 0.5 * dr
        return self.weight * c

    def stiffness(self) -> sp.csr_matrix:
        n = len(self.r)
        G = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n), format="csr")
        return (G.T @ sp.diags(self.conductance) @ G).tocsr()


def radial_end_model(
    weight_fn: Callable[[np.ndarray], np.ndarray],
    r0: float,
    r_max: float,
    points_per_decade: int = 32,
    include: Sequence[float] = (),
) -> RadialEndModel:
    """Log-spaced radial grid with explicit nodes at ``include`` radii."""
    if not (0 < r0 < r_max):
        raise ValidationError("need 0 < r0 < r_max")
    n = max(int(np.ceil(points_per_decade * np.log10(r_max / r0))), 8)
    r = np.geomspace(r0, r_max, n + 1)
    r = np.unique(np.concatenate([r, np.asarray(include, dtype=float)]))
    mid = 0.5 * (r[:-1] + r[1:])
    cond = weight_fn(mid) / np.diff(r)
    return RadialEndModel(r=r, weight=weight_fn(r), conductance=cond)


def capacity_model(model: RadialEndModel, radii_schedule: Sequence[float]) -> np.ndarray:
    """Capacity curve of a radial model end (h = 1 at r0, h = 0 at R)."""
    radii = np.asarray(radii_schedule, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValidationError("radii must be increasing")
    S = model.stiffness()
    curve = []
    for R in radii:
        if R > model.r[-1] + 1e-12:
            raise TruncationTooTight(f"radius {R} beyond the grid")
        fixed = np.zeros(len(model.r), dtype=bool)
        fixed[0] = True
        fixed[model.r >= R - 1e-12] = True
        if fixed.all():
            raise TruncationTooTight(f"no free nodes below radius {R}")
        u = np.zeros(len(model.r))
        u[0] = 1.0
        u = _dirichlet_solve(S, fixed, u)
        curve.append(float(u @ (S @ u)))
    return np.array(curve)


def classify_parabolic(
    radii: Sequence[float],
    capacity_curve: Sequence[float],
    eps_cap: Optional[float] = None,
    window: int = 3,
    flat_tol: float = 0.05,
    decay_tol: float = 0.1,
):
    """Classify an end from its capacity curve.

    Returns (classification, trend_exponent): non-parabolic when the tail
    exceeds the floor with a flat log-log trend, parabolic when the curve
    decays at a stable rate, undetermined otherwise (always undetermined
    below 4 curve points).
    """
    R = np.asarray(radii, dtype=float)
    C = np.asarray(capacity_curve, dtype=float)
    if len(R) != len(C):
        raise ValidationError("radii and capacities must align")
    if len(C) < 4:
        return "undetermined", float("nan")
    if eps_cap is None:
        eps_cap = 1e-3 * C[0]
    w = min(window, len(C) - 1)
    logR, logC = np.log(R[-w - 1:]), np.log(C[-w - 1:])
    slope = float(np.polyfit(logR, logC, 1)[0])
    steps = np.diff(np.log(C)) / np.diff(np.log(R))
    if C[-1] > eps_cap and abs(slope) < flat_tol:
        return "non-parabolic", slope
    if slope < -decay_tol and np.all(steps[-w:] < -flat_tol):
        return "parabolic", slope
    return "undetermined", slope


@dataclass(frozen=True)
class TwoEndedModel:
    """Two-ended 1-D model on [-R_max, R_max] with density ``weight``."""

    t: np.ndarray
    weight: np.ndarray
    conductance: np.ndarray

    def stiffness(self) -> sp.csr_matrix:
        n = len(self.t)
        G = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n), format="csr")
        return (G.T @ sp.diags(self.conductance) @ G).tocsr()

    @property
    def mass(self) -> np.ndarray:
        c = np.zeros_like(self.t)
        dt = np.diff(self.t)
        c[:-1] += 0.5 * dt
        c[1:] += 0.5 * dt
        return self.weight * c


def two_ended_model(
    weight_fn: Callable[[np.ndarray], np.ndarray], r_max: float, dt: float = 0.01
) -> TwoEndedModel:
    n = int(np.ceil(2 * r_max / dt))
    t = np.linspace(-r_max, r_max, n + 1)
    mid = 0.5 * (t[:-1] + t[1:])
    return TwoEndedModel(t=t, weight=weight_fn(t), conductance=weight_fn(mid) / np.diff(t))


def li_tam_harmonic(
    model: TwoEndedModel,
    radii: Sequence[float],
    boundary_levels: tuple = (1.0, -1.0),
    core_radius: Optional[float] = None,
    tol: float = 0.05,
) -> HarmonicFunctionReport:
    """Dirichlet exhaustion toward a harmonic function with prescribed end
    levels (+1 toward +infinity, -1 toward -infinity by default).

    Each truncation solves the Dirichlet problem on |t| < R with the level
    values imposed outside and extends by the levels; exhaustion energies
    are non-increasing and every iterate obeys the maximum principle.
    Raises NonConvergent when the common-core values still move more than
    ``tol`` between the last two radii.
    """
    radii = [float(R) for R in radii]
    if sorted(radii) != radii or len(radii) < 2:
        raise ValidationError("need at least two increasing radii")
    if radii[-1] > model.t[-1] + 1e-12:
        raise ValidationError("largest radius beyond the grid")
    lvl_plus, lvl_minus = boundary_levels
    if core_radius is None:
        core_radius = radii[0]
    core = np.abs(model.t) <= core_radius + 1e-12

    S = model.stiffness()
    mass = model.mass
    lo, hi = min(boundary_levels), max(boundary_levels)

    energies, oscillations, devs_plus, devs_minus = [], [], [], []
    prev_core, delta = None, float("nan")
    u = np.zeros_like(model.t)
    residual = float("nan")
    for R in radii:
        fixed = np.abs(model.t) >= R - 1e-12
        if (~fixed).sum() == 0:
            raise TruncationTooTight(f"radius {R} leaves no interior")
        u = np.where(model.t > 0, lvl_plus, lvl_minus).astype(float)
        u = _dirichlet_solve(S, fixed, u)
        if u.min() < lo - 1e-9 or u.max() > hi + 1e-9:
            raise ValidationError("maximum principle violated")
        energies.append(float(u @ (S @ u)))
        oscillations.append(float(u[core].max() - u[core].min()))
        outer_p = model.t > core_radius
        outer_m = model.t < -core_radius
        devs_plus.append(float(((u[outer_p] - lvl_plus) ** 2 * mass[outer_p]).sum()))
        devs_minus.append(float(((u[outer_m] - lvl_minus) ** 2 * mass[outer_m]).sum()))
        interior = ~fixed
        r_vec = (S @ u)[interior]
        scale = max(float(np.abs(S.diagonal()).max()) * float(np.abs(u).max()), 1e-300)
        residual = float(np.abs(r_vec).max()) / scale
        if prev_core is not None:
            delta = float(np.abs(u[core] - prev_core).max())
        prev_core = u[core].copy()

    if not np.isnan(delta) and delta > tol:
        raise NonConvergent(f"core moved {delta:.3g} between the last two radii")

    t_markers = 0.8 * radii[-1]
    i_plus = int(np.argmin(np.abs(model.t - t_markers)))
    i_minus = int(np.argmin(np.abs(model.t + t_markers)))
    osc = oscillations[-1]
    degenerating = (
        len(oscillations) >= 2
        and oscillations[-1] < oscillations[0] / 1.2
        and all(np.diff(oscillations) <= 1e-12)
    )
    return HarmonicFunctionReport(
        grid=model.t,
        values=u,
        radii=tuple(radii),
        dirichlet_energy=tuple(energies),
        laplacian_residual=residual,
        end_values=(float(u[i_plus]), float(u[i_minus])),
        oscillation=osc,
        oscillation_per_radius=tuple(oscillations),
        deviations={"plus": tuple(devs_plus), "minus": tuple(devs_minus)},
        max_abs=float(np.abs(u).max()),
        converged_delta=delta,
        degenerating=degenerating,
    )


def lambda0_estimate(bundle: OperatorBundle, domain_mask: np.ndarray, seed: int = 0) -> float:
    """Smallest eigenvalue of the 0-Laplacian restricted to a vertex mask
    (Dirichlet outside)."""
    mask = np.asarray(domain_mask, dtype=bool)
    if mask.sum() == 0:
        raise ValidationError("empty domain mask")
    S = (bundle.d0.T @ sp.diags(bundle.M1) @ bundle.d0).tocsr()
    idx = np.where(mask)[0]
    S = S[idx][:, idx]
    M = bundle.M0[idx]
    vals, _ = smallest_eigenpairs(S, M, 1, seed=seed)
    return float(vals[0])
