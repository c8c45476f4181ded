"""1-D mode reduction of the warped collar ]0, L[ x N with metric
dr^2 + e^{2r} h.

Separation over cross-section Laplacian eigenmodes (circle: m^2, flat
torus: |m|^2) turns every degree-k check into weighted radial problems.
A degree-k mode-form is the coefficient pair (a1, a2) of

    alpha = dr ^ a1(r) Xi  +  a2(r) Omega,

where Xi is an h-normalized co-closed (k-1)-eigenform of the cross
section, Omega = d Xi / nu its exact k-form partner (nu = sqrt(mu)), and
the volume density e^{(n-1)r} together with the fiber-norm factors
e^{-2(k-1)r} / e^{-2kr} is folded into the component weights

    w1 = e^{(n-1-2(k-1)) r},    w2 = e^{(n-1-2k) r}.

The staggered grid (section components at nodes, dr-components at
midpoints) makes the discrete d o d vanish identically; codifferentials
are exact matrix adjoints in the weighted inner products.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    GridTooCoarse,
    NotClosed,
    TailTooFat,
    UnknownOracle,
    ValidationError,
)
from .linalg import cg_solve, smallest_eigenpairs

__all__ = [
    "ModeProblem",
    "ModeForm",
    "InequalityReport",
    "mode_problem",
    "mode_lambda0",
    "mode_gap_check",
    "hardy_check",
    "donnelly_xavier_check",
    "flow_primitive",
    "least_squares_primitive",
    "vanishing_check",
    "pullback_shift_norms",
    "analytic_oracles",
    "random_mode_form",
    "form_laplacian",
]


@dataclass(frozen=True)
class ModeProblem:
    """Radial grid, warp data and angular mode set for ]0, L[ x N.

    Attributes:
        n: ambient dimension (cross section has dimension n-1).
        k: form degree, 0 <= k <= n.
        L: radial length of the truncated collar.
        dr: uniform radial step.
        modes: angular eigenvalues mu >= 0 retained.
        bc: one of none | compact_support | absolute_at_0 | relative_at_0
            | harmonic_field.
        epsilon_k: n - 1 - 2(k - 1), the Hardy weight exponent.
    """

    n: int
    k: int
    L: float
    dr: float
    modes: tuple
    bc: str
    r_nodes: np.ndarray = field(repr=False, default=None)
    r_mid: np.ndarray = field(repr=False, default=None)

    @property
    def epsilon_k(self) -> float:
        return self.n - 1 - 2 * (self.k - 1)

    @property
    def n_cells(self) -> int:
        return len(self.r_mid)

    def w1(self, r: np.ndarray) -> np.ndarray:
        return np.exp((self.n - 1 - 2 * (self.k - 1)) * r)

    def w2(self, r: np.ndarray) -> np.ndarray:
        return np.exp((self.n - 1 - 2 * self.k) * r)

    def trapezoid(self) -> np.ndarray:
        c = np.full(len(self.r_nodes), self.dr)
        c[0] = c[-1] = 0.5 * self.dr
        return c


VALID_BC = ("none", "compact_support", "absolute_at_0", "relative_at_0", "harmonic_field")


def mode_problem(
    n: int,
    k: int,
    L: float,
    dr: float,
    modes: Sequence[float],
    bc: str = "compact_support",
) -> ModeProblem:
    """Assemble the staggered-grid radial reduction.

    Raises GridTooCoarse when dr > 0.1.
    """
    # n = 1 (point cross-section, weight 1) is allowed as a degenerate test
    # hook for flat-interval oracles
    if n < 1 or not (0 <= k <= n) or L <= 0:
        raise ValidationError(f"bad (n, k, L) = {(n, k, L)}")
    if dr > 0.1:
        raise GridTooCoarse(f"dr = {dr} exceeds 0.1")
    if bc not in VALID_BC:
        raise ValidationError(f"bc {bc!r} not in {VALID_BC}")
    mus = tuple(float(m) for m in modes)
    if any(m < 0 for m in mus):
        raise ValidationError("angular eigenvalues must be >= 0")
    J = int(round(L / dr))
    r_nodes = np.linspace(0.0, J * dr, J + 1)
    r_mid = 0.5 * (r_nodes[:-1] + r_nodes[1:])
    return ModeProblem(n=n, k=k, L=J * dr, dr=dr, modes=mus, bc=bc,
                       r_nodes=r_nodes, r_mid=r_mid)


@dataclass
class ModeForm:
    """Degree-k mode-form: per angular eigenvalue the pair (a1, a2) of
    radial coefficients (a1 on midpoints, a2 on nodes)."""

    problem: ModeProblem
    comps: dict

    def copy(self) -> "ModeForm":
        return ModeForm(self.problem, {m: (a1.copy(), a2.copy()) for m, (a1, a2) in self.comps.items()})


class _Ops:
    """Discrete d / delta and weights for one (problem, mode) pair."""

    def __init__(self, p: ModeProblem, mu: float):
        self.p = p
        self.nu = float(np.sqrt(mu))
        J = p.n_cells
        self.G = sp.diags([-np.ones(J), np.ones(J)], [0, 1], shape=(J, J + 1), format="csr") / p.dr
        c = p.trapezoid()
        self.Wb = p.w1(p.r_nodes) * c          # (k-1)-sector, nodes
        self.Wa1 = p.w1(p.r_mid) * p.dr        # dr-component, midpoints
        self.Wa2 = p.w2(p.r_nodes) * c         # section component, nodes
        self.Wg = p.w2(p.r_mid) * p.dr         # (k+1)-sector, midpoints

    def d_down(self, b: np.ndarray):
        return self.G @ b, self.nu * b

    def d_up(self, a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
        return self.G @ a2 - self.nu * a1

    def delta(self, a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
        return (self.G.T @ (self.Wa1 * a1) + self.nu * (self.Wa2 * a2)) / self.Wb


def _norm2_form(p: ModeProblem, form: ModeForm) -> float:
    total = 0.0
    for mu, (a1, a2) in form.comps.items():
        ops = _Ops(p, mu)
        total += float(a1 @ (ops.Wa1 * a1)) + float(a2 @ (ops.Wa2 * a2))
    return total


def _norm2_up(p: ModeProblem, parts: dict) -> float:
    total = 0.0
    for mu, g in parts.items():
        total += float(g @ (_Ops(p, mu).Wg * g))
    return total


def _norm2_down(p: ModeProblem, parts: dict) -> float:
    total = 0.0
    for mu, b in parts.items():
        total += float(b @ (_Ops(p, mu).Wb * b))
    return total


def d_apply(p: ModeProblem, form: ModeForm) -> dict:
    # a degree-n form has no section component to differentiate and no
    # dr ^ Omega successor
    if p.k == p.n:
        return {mu: np.zeros(p.n_cells) for mu in form.comps}
    return {mu: _Ops(p, mu).d_up(a1, a2) for mu, (a1, a2) in form.comps.items()}


def delta_apply(p: ModeProblem, form: ModeForm) -> dict:
    # degree-0 forms have no dr-component and no (k-1)-sector below
    if p.k == 0:
        return {mu: np.zeros(len(p.r_nodes)) for mu in form.comps}
    return {mu: _Ops(p, mu).delta(a1, a2) for mu, (a1, a2) in form.comps.items()}


@dataclass(frozen=True)
class InequalityReport:
    """Margins of one inequality suite over seeded samples.

    ``worst_margin`` is the most negative normalized margin
    (lhs - rhs) / ||alpha||^2; violations counts samples beyond -1e-8.
    """

    check: str
    params: dict
    samples: int
    worst_margin: float
    violations: int
    margins: tuple = ()

    def as_dict(self) -> dict:
        out = {"check": self.check, "samples": self.samples,
               "worst_margin": self.worst_margin, "violations": self.violations}
        out.update(self.params)
        return out


def _window_profile(x: np.ndarray, rng, n_harmonics: int = 6) -> np.ndarray:
    """Random C1 bump supported on x in (0, 1), zero value and slope at ends."""
    y = np.zeros_like(x)
    inside = (x > 0) & (x < 1)
    xi = x[inside]
    env = np.sin(np.pi * xi)
    acc = np.zeros_like(xi)
    for j in range(1, n_harmonics + 1):
        acc += rng.standard_normal() * np.sin(np.pi * j * xi) / j
    y[inside] = env * acc
    return y


def random_mode_form(
    p: ModeProblem,
    rng: np.random.Generator,
    support: tuple = (0.15, 0.85),
) -> ModeForm:
    """Seeded compactly supported mode-form (zero near both ends)."""
    lo, hi = support[0] * p.L, support[1] * p.L
    comps = {}
    for mu in p.modes:
        a1 = _window_profile((p.r_mid - lo) / (hi - lo), rng)
        a2 = _window_profile((p.r_nodes - lo) / (hi - lo), rng)
        if p.k == 0:
            a1 = np.zeros_like(a1)
        if p.k == p.n:
            a2 = np.zeros_like(a2)
        comps[mu] = (a1, a2)
    return ModeForm(p, comps)


def mode_lambda0(
    problem: ModeProblem, dirichlet: bool = True, seed: int = 0
) -> float:
    """Smallest eigenvalue of the function Laplacian (degree 0) with
    Dirichlet ends, minimized over the retained modes."""
    if problem.k != 0:
        raise ValidationError("mode_lambda0 needs a degree-0 problem")
    p1 = mode_problem(problem.n, 1, problem.L, problem.dr, problem.modes, "none")
    best = np.inf
    for mu in problem.modes:
        ops = _Ops(p1, mu)  # k=1 sector weights receive df
        S = ops.G.T @ sp.diags(ops.Wa1) @ ops.G + ops.nu**2 * sp.diags(ops.Wa2)
        M = problem.w2(problem.r_nodes) * problem.trapezoid()  # w_f = e^{(n-1)r}
        if dirichlet:
            S, M = S[1:-1][:, 1:-1], M[1:-1]
        vals, _ = smallest_eigenpairs(S.tocsr(), M, 1, seed=seed)
        best = min(best, float(vals[0]))
    return best


def mode_gap_check(
    problem: ModeProblem, sample_count: int, seed: int
) -> InequalityReport:
    """||d a||^2 + ||delta a||^2 >= 0.5 ((n-1)/2 - k)^2 ||a||^2 on
    compactly supported samples (requires k < (n-1)/2)."""
    if not problem.k < (problem.n - 1) / 2:
        raise ValidationError("gap constant needs k < (n-1)/2")
    const = 0.5 * ((problem.n - 1) / 2 - problem.k) ** 2
    rng = np.random.default_rng(seed)
    margins = []
    for _ in range(sample_count):
        form = random_mode_form(problem, rng)
        nrm2 = _norm2_form(problem, form)
        if nrm2 == 0.0:
            margins.append(0.0)
            continue
        lhs = _norm2_up(problem, d_apply(problem, form)) + _norm2_down(
            problem, delta_apply(problem, form)
        )
        margins.append(lhs / nrm2 - const)
    worst = min(margins) if margins else 0.0
    return InequalityReport(
        check="gap",
        params={"n": problem.n, "k": problem.k, "L": problem.L,
                "dr": problem.dr, "modes": list(problem.modes),
                "constant": const, "seed": seed},
        samples=sample_count,
        worst_margin=float(worst),
        violations=int(sum(m < -1e-8 for m in margins)),
        margins=tuple(margins),
    )


def hardy_check(
    n: int, k: int, grid: np.ndarray, sample_count: int, seed: int
) -> InequalityReport:
    """Weighted tail-integral operator bound
    ((n-1)/2 - (k-1))^2 ||Mv||_w^2 <= ||v||_w^2, trapezoid quadrature.

    Mv(r) = e^{-(k-1) r} int_r^inf v(s) e^{(k-1) s} ds and
    w = e^{(n-1) t}; requires k - 1 < (n-1)/2.
    """
    if not (k - 1) < (n - 1) / 2:
        raise ValidationError("Hardy constant needs k-1 < (n-1)/2")
    r = np.asarray(grid, dtype=float)
    const = ((n - 1) / 2 - (k - 1)) ** 2
    w = np.exp((n - 1) * r)
    rng = np.random.default_rng(seed)
    margins = []
    for _ in range(sample_count):
        v = _window_profile((r - r[0]) / (r[-1] - r[0]) / 0.85, rng)
        g = v * np.exp((k - 1) * r)
        tail = np.zeros_like(g)
        for j in range(len(r) - 2, -1, -1):
            tail[j] = tail[j + 1] + 0.5 * (g[j] + g[j + 1]) * (r[j + 1] - r[j])
        Mv = np.exp(-(k - 1) * r) * tail
        nv2 = float(np.trapezoid(v * v * w, r))
        if nv2 == 0.0:
            margins.append(0.0)
            continue
        nMv2 = float(np.trapezoid(Mv * Mv * w, r))
        margins.append((nv2 - const * nMv2) / nv2)
    worst = min(margins) if margins else 0.0
    return InequalityReport(
        check="hardy",
        params={"n": n, "k": k, "constant": const, "seed": seed,
                "grid_points": len(r)},
        samples=sample_count,
        worst_margin=float(worst),
        violations=int(sum(m < -1e-8 for m in margins)),
        margins=tuple(margins),
    )


def donnelly_xavier_check(
    problem: ModeProblem, sample_count: int, seed: int
) -> InequalityReport:
    """Radial integration-by-parts bound for X = -d/dr:
    int (i_X a, delta a) + (i_X da, a) >= ((n-1)/2 - k) int |a|^2
    on compactly supported samples."""
    p = problem
    const = (p.n - 1) / 2 - p.k
    rng = np.random.default_rng(seed)
    margins = []
    for _ in range(sample_count):
        form = random_mode_form(p, rng)
        nrm2 = _norm2_form(p, form)
        if nrm2 == 0.0:
            margins.append(0.0)
            continue
        lhs = 0.0
        for mu, (a1, a2) in form.comps.items():
            ops = _Ops(p, mu)
            da = ops.d_up(a1, a2)           # midpoints, Omega-type
            dl = ops.delta(a1, a2)          # nodes, Xi-type
            dl_mid = 0.5 * (dl[:-1] + dl[1:])
            a2_mid = 0.5 * (a2[:-1] + a2[1:])
            # i_X alpha = -a1 Xi ; i_X d alpha = -(d alpha) Omega
            lhs += float((-a1) @ (ops.Wa1 * dl_mid))
            lhs += float((-da) @ (ops.Wg * a2_mid))
        margins.append((lhs - const * nrm2) / nrm2)
    worst = min(margins) if margins else 0.0
    return InequalityReport(
        check="donnelly_xavier",
        params={"n": p.n, "k": p.k, "L": p.L, "dr": p.dr,
                "modes": list(p.modes), "constant": const, "seed": seed},
        samples=sample_count,
        worst_margin=float(worst),
        violations=int(sum(m < -1e-8 for m in margins)),
        margins=tuple(margins),
    )


def flow_primitive(
    problem: ModeProblem,
    form: ModeForm,
    closed_tol: float = 1e-10,
    tail_margin: Optional[float] = None,
):
    """Primitive of a closed mode-form by radial flow quadrature.

    The translation flow r -> r + s pulls a mode-form back by shifting its
    coefficients (their pointwise norms pick up e^{(k-1)s} / e^{ks}); the
    tail integral of the dr-contraction gives a primitive with certified
    norm bound 2 / ((n-1)/2 - (k-1)).

    Returns (beta, report): beta maps mode -> node coefficients of the
    (k-1)-form; report carries the relative residual ||d beta - alpha|| /
    ||alpha|| and the norm ratio against the certified bound.

    Raises NotClosed / TailTooFat per the documented guards.
    """
    p = problem
    if not p.k <= (p.n - 1) / 2:
        raise ValidationError("flow primitive needs k <= (n-1)/2")
    if tail_margin is None:
        tail_margin = min(1.0, p.L / 10)
    nrm2 = _norm2_form(p, form)
    nrm = np.sqrt(nrm2)
    scale = 0.0
    for a1, a2 in form.comps.values():
        scale = max(scale, float(np.max(np.abs(a1), initial=0.0)),
                    float(np.max(np.abs(a2), initial=0.0)))
    d_parts = d_apply(p, form)
    closed_defect = max((np.max(np.abs(g)) for g in d_parts.values()), default=0.0)
    if closed_defect > closed_tol * max(1.0, scale):
        raise NotClosed(f"discrete d alpha = {closed_defect:.2e} above {closed_tol:g}")

    if nrm2 > 0:
        tail_idx_n = p.r_nodes >= p.L - tail_margin
        tail_idx_m = p.r_mid >= p.L - tail_margin
        tail = 0.0
        for mu, (a1, a2) in form.comps.items():
            ops = _Ops(p, mu)
            tail += float(a1[tail_idx_m] @ (ops.Wa1[tail_idx_m] * a1[tail_idx_m]))
            tail += float(a2[tail_idx_n] @ (ops.Wa2[tail_idx_n] * a2[tail_idx_n]))
        if tail > 1e-8 * nrm2:
            raise TailTooFat(f"tail mass fraction {tail / nrm2:.2e} beyond L - {tail_margin:g}")

    beta = {}
    res2 = 0.0
    beta_nrm2 = 0.0
    for mu, (a1, a2) in form.comps.items():
        ops = _Ops(p, mu)
        # b(r) = -int_r^L a1, evaluated exactly on the staggered grid
        b = -np.concatenate(([0.0], np.cumsum(a1[::-1] * p.dr)))[::-1]
        beta[mu] = b
        g1, g2 = ops.d_down(b)
        res2 += float((g1 - a1) @ (ops.Wa1 * (g1 - a1)))
        res2 += float((g2 - a2) @ (ops.Wa2 * (g2 - a2)))
        beta_nrm2 += float(b @ (ops.Wb * b))

    bound = 2.0 / ((p.n - 1) / 2 - (p.k - 1))
    report = {
        "residual": float(np.sqrt(res2) / nrm) if nrm > 0 else 0.0,
        "norm_ratio": float(np.sqrt(beta_nrm2) / nrm) if nrm > 0 else 0.0,
        "bound": bound,
        "within_bound": (np.sqrt(beta_nrm2) <= (bound + 1e-6) * nrm) if nrm > 0 else True,
    }
    return beta, report


def least_squares_primitive(problem: ModeProblem, form: ModeForm, tol: float = 1e-12):
    """Independent primitive via CG on the normal equations (oracle for
    flow_primitive; both solve d beta = alpha)."""
    p = problem
    beta = {}
    for mu, (a1, a2) in form.comps.items():
        ops = _Ops(p, mu)
        D = sp.vstack([ops.G, ops.nu * sp.identity(len(p.r_nodes), format="csr")])
        W = np.concatenate([ops.Wa1, ops.Wa2])
        A = (D.T @ sp.diags(W) @ D).tocsr()
        rhs = D.T @ (W * np.concatenate([a1, a2]))
        # symmetric diagonal scaling keeps the residual criterion fair
        # across the e^{+-(n-1)r} weight range
        s = 1.0 / np.sqrt(np.maximum(A.diagonal(), 1e-300))
        A_hat = sp.diags(s) @ A @ sp.diags(s)
        y = cg_solve(A_hat.tocsr(), s * rhs, tol=tol, max_iter=60 * A.shape[0])
        beta[mu] = s * y
    return beta


def form_laplacian(problem: ModeProblem, mu: float, bc: Optional[str] = None):
    """Stiffness/mass pair for the degree-k mode-form Laplacian of one mode.

    Dofs are stacked [a1 (midpoints); a2 (nodes)].  Boundary handling:
    compact_support deletes both end nodes of a2; absolute_at_0 is natural
    at 0 and deletes a2 at L; relative_at_0 deletes a2 at 0 and is natural
    at L; harmonic_field keeps all dofs but drops the boundary rows of
    delta (no boundary condition, the harmonic-field count surrogate).

    Returns (S, M, keep) with keep the retained stacked-dof indices.
    """
    p = problem
    bc = p.bc if bc is None else bc
    if bc not in VALID_BC:
        raise ValidationError(f"bc {bc!r} not in {VALID_BC}")
    ops = _Ops(p, mu)
    J = p.n_cells
    n_nodes = J + 1

    Dup = sp.hstack([-ops.nu * sp.identity(J, format="csr"), ops.G]).tocsr()
    Ddown = sp.vstack([ops.G, ops.nu * sp.identity(n_nodes, format="csr")]).tocsr()
    Wa = np.concatenate([ops.Wa1, ops.Wa2])

    keep = np.ones(J + n_nodes, dtype=bool)
    if bc == "compact_support":
        keep[J] = keep[-1] = False
    elif bc == "absolute_at_0":
        keep[-1] = False
    elif bc == "relative_at_0":
        keep[J] = False
    idx = np.where(keep)[0]

    delta_rows = np.ones(n_nodes, dtype=bool)
    if bc == "harmonic_field":
        delta_rows[0] = delta_rows[-1] = False
    rdx = np.where(delta_rows)[0]

    DdownT = (sp.diags(Wa) @ Ddown)[idx][:, rdx]
    S = (
        Dup[:, idx].T @ sp.diags(ops.Wg) @ Dup[:, idx]
        + DdownT @ sp.diags(1.0 / ops.Wb[rdx]) @ DdownT.T
    )
    M = Wa[idx]
    return S.tocsr(), M, idx


def vanishing_check(
    problem: ModeProblem,
    bc: Optional[str] = None,
    count: int = 2,
    near_kernel_tol: float = 1e-3,
    seed: int = 0,
) -> dict:
    """Smallest eigenvalues of the mode-form Laplacian per retained mode.

    Reports the minimum over modes plus the near-kernel count below
    ``near_kernel_tol`` (the growth surrogate at middle degree).
    """
    per_mode = []
    near = 0
    smallest = np.inf
    for mu in problem.modes:
        S, M, _ = form_laplacian(problem, mu, bc)
        c = min(count, len(M) - 1)
        vals, _ = smallest_eigenpairs(S, M, c, seed=seed)
        per_mode.append({"mu": mu, "eigenvalues": [float(v) for v in vals]})
        smallest = min(smallest, float(vals[0]))
        near += int(np.sum(vals < near_kernel_tol))
    return {
        "n": problem.n, "k": problem.k, "L": problem.L, "dr": problem.dr,
        "bc": bc or problem.bc,
        "modes": list(problem.modes),
        "per_mode": per_mode,
        "min_eigenvalue": smallest,
        "near_kernel_count": near,
        "near_kernel_tol": near_kernel_tol,
    }


def pullback_shift_norms(problem: ModeProblem, form: ModeForm, t: float) -> dict:
    """Quadrature check of the pullback norm chain for the flow r -> r + t.

    Returns ||(Phi^t)* alpha||^2, the bound e^{2kt} * (mass of alpha beyond
    t evaluated against the weight shifted back), and ||alpha||^2 on
    [t, L] (the decay chain endpoint).  t is rounded to a grid multiple.
    """
    p = problem
    m = int(round(t / p.dr))
    if m < 0:
        raise ValidationError("t >= 0 required")
    t = m * p.dr
    pulled2 = 0.0
    tail2 = 0.0
    for mu, (a1, a2) in form.comps.items():
        ops = _Ops(p, mu)
        a1s = np.concatenate([a1[m:], np.zeros(m)])
        a2s = np.concatenate([a2[m:], np.zeros(m)])
        pulled2 += float(a1s @ (ops.Wa1 * a1s)) + float(a2s @ (ops.Wa2 * a2s))
        sel_m, sel_n = p.r_mid >= t, p.r_nodes >= t
        tail2 += float(a1[sel_m] @ (ops.Wa1[sel_m] * a1[sel_m]))
        tail2 += float(a2[sel_n] @ (ops.Wa2[sel_n] * a2[sel_n]))
    return {"t": t, "pulled_norm2": pulled2, "tail_norm2": tail2,
            "k_bound_ok": pulled2 <= tail2 * (1 + 1e-12)}


def analytic_oracles(name: str, r: np.ndarray, **params) -> np.ndarray:
    """Closed-form radial profiles used as oracles.

    sigma_harmonic: A e^{-t} + B, the harmonic radial profile of the
        expanding surface end; cosh_tanh: tanh(t), harmonic for the
        cosh^2 warp; flat_log: log r, harmonic for the flat 2-D radial
        weight; r3_capacity: (1/r - 1/R) / (1 - 1/R), the capacity
        minimizer of the 3-D radial model on [1, R].
    """
    r = np.asarray(r, dtype=float)
    if name == "sigma_harmonic":
        return params.get("A", 1.0) * np.exp(-r) + params.get("B", 0.0)
    if name == "cosh_tanh":
        return np.tanh(r)
    if name == "flat_log":
        return np.log(r)
    if name == "r3_capacity":
        R = params.get("R", 10.0)
        return (1.0 / r - 1.0 / R) / (1.0 - 1.0 / R)
    raise UnknownOracle(f"no oracle named {name!r}")
