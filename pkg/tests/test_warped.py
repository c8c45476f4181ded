"""Mode-reduced warped-collar operators and inequality suites."""

import numpy as np
import pytest
import scipy.linalg

from hodgelab.errors import GridTooCoarse, NotClosed, TailTooFat, UnknownOracle
from hodgelab.warped import (
    ModeForm,
    _Ops,
    analytic_oracles,
    d_apply,
    delta_apply,
    donnelly_xavier_check,
    flow_primitive,
    form_laplacian,
    hardy_check,
    least_squares_primitive,
    mode_gap_check,
    mode_lambda0,
    mode_problem,
    pullback_shift_norms,
    random_mode_form,
    vanishing_check,
)


def closed_form(problem, rng):
    """d of a random (k-1)-bump: exactly closed on the staggered grid."""
    lower = mode_problem(problem.n, problem.k - 1, problem.L, problem.dr,
                         problem.modes)
    bump = random_mode_form(lower, rng)
    comps = {}
    for mu, (_, b2) in bump.comps.items():
        g1, g2 = _Ops(problem, mu).d_down(b2)
        comps[mu] = (g1, g2)
    return ModeForm(problem, comps)


class TestProblem:
    def test_grid_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            mode_problem(3, 1, 10.0, 0.2, [0.0])

    def test_epsilon_k_stored(self):
        p = mode_problem(5, 1, 10.0, 0.05, [0.0])
        assert p.epsilon_k == 4  # n - 1 - 2(k - 1)

    def test_mode_mass_weights(self):
        p = mode_problem(4, 2, 5.0, 0.05, [1.0])
        r = p.r_nodes
        np.testing.assert_allclose(p.w1(r), np.exp((4 - 1 - 2) * r))
        np.testing.assert_allclose(p.w2(r), np.exp((4 - 1 - 4) * r))

    def test_dd_zero_exact(self):
        p = mode_problem(5, 1, 8.0, 0.04, [0.0, 1.0, 4.0])
        rng = np.random.default_rng(0)
        lower = mode_problem(5, 0, 8.0, 0.04, [0.0, 1.0, 4.0])
        bump = random_mode_form(lower, rng)
        form = closed_form(p, rng)
        for mu, g in d_apply(p, form).items():
            assert np.max(np.abs(g)) == 0.0

    def test_adjointness(self):
        p = mode_problem(4, 1, 6.0, 0.05, [2.0])
        rng = np.random.default_rng(1)
        ops = _Ops(p, 2.0)
        b = rng.standard_normal(len(p.r_nodes))
        a1 = rng.standard_normal(p.n_cells)
        a2 = rng.standard_normal(len(p.r_nodes))
        g1, g2 = ops.d_down(b)
        lhs = g1 @ (ops.Wa1 * a1) + g2 @ (ops.Wa2 * a2)
        rhs = b @ (ops.Wb * ops.delta(a1, a2))
        assert abs(lhs - rhs) < 1e-10 * max(abs(lhs), 1.0)


class TestLambda0:
    def test_sigma_band(self):
        lam = mode_lambda0(mode_problem(2, 0, 50.0, 0.01, [0.0]))
        assert 0.25 <= lam <= 0.2625
        # oracle: 1/4 + (pi/L)^2
        assert abs(lam - (0.25 + (np.pi / 50) ** 2)) < 1e-4

    def test_monotone_in_L(self):
        lam25 = mode_lambda0(mode_problem(2, 0, 25.0, 0.01, [0.0]))
        lam50 = mode_lambda0(mode_problem(2, 0, 50.0, 0.01, [0.0]))
        assert lam50 <= lam25

    def test_flat_interval_sine_oracle(self):
        lam = mode_lambda0(mode_problem(1, 0, np.pi, 0.01, [0.0]))
        assert abs(lam - 1.0) < 0.005


class TestInequalitySuites:
    @pytest.mark.parametrize("n,k,const", [(5, 1, 0.5), (3, 0, 0.5)])
    def test_gap(self, n, k, const):
        p = mode_problem(n, k, 12.0, 0.02, [0.0, 1.0, 4.0])
        rep = mode_gap_check(p, 100, seed=7)
        assert rep.params["constant"] == 0.5 * ((n - 1) / 2 - k) ** 2 == const
        assert rep.violations == 0
        assert rep.worst_margin > -1e-8

    @pytest.mark.parametrize("n,k,const", [(3, 1, 1.0), (5, 1, 4.0), (5, 2, 1.0)])
    def test_hardy(self, n, k, const):
        grid = np.linspace(0.0, 20.0, 1001)
        rep = hardy_check(n, k, grid, 100, seed=7)
        assert rep.params["constant"] == const
        assert rep.violations == 0

    def test_hardy_zero_function(self):
        grid = np.linspace(0.0, 10.0, 101)
        rep = hardy_check(3, 1, grid, 0, seed=0)
        assert rep.worst_margin == 0.0 and rep.violations == 0

    @pytest.mark.parametrize("n,k", [(5, 1), (3, 1)])
    def test_donnelly_xavier(self, n, k):
        p = mode_problem(n, k, 12.0, 0.02, [0.0, 1.0, 4.0])
        rep = donnelly_xavier_check(p, 100, seed=7)
        assert rep.violations == 0

    def test_dx_degenerate_middle_degree(self):
        # k = (n-1)/2: the rhs constant vanishes but the check still runs
        p = mode_problem(3, 1, 12.0, 0.02, [0.0, 1.0])
        rep = donnelly_xavier_check(p, 20, seed=3)
        assert rep.params["constant"] == 0.0
        assert rep.violations == 0

    def test_no_sample_is_harmonic(self):
        p = mode_problem(5, 1, 12.0, 0.02, [0.0, 1.0, 4.0])
        rng = np.random.default_rng(11)
        for _ in range(20):
            form = random_mode_form(p, rng)
            d_norm = max(np.max(np.abs(g)) for g in d_apply(p, form).values())
            dl_norm = max(np.max(np.abs(g)) for g in delta_apply(p, form).values())
            assert d_norm > 1e-12 or dl_norm > 1e-12


class TestFlowPrimitive:
    def test_exact_primitive_of_differential(self):
        p = mode_problem(5, 1, 20.0, 0.02, [0.0, 1.0, 4.0])
        rng = np.random.default_rng(3)
        alpha = closed_form(p, rng)
        beta, rep = flow_primitive(p, alpha)
        assert rep["residual"] < 1e-6
        assert rep["bound"] == 1.0  # 2 / ((n-1)/2 - (k-1)) at (5, 1)
        assert rep["norm_ratio"] <= rep["bound"] + 1e-6

    def test_zero_form(self):
        p = mode_problem(5, 1, 10.0, 0.05, [0.0, 1.0])
        zero = ModeForm(p, {mu: (np.zeros(p.n_cells), np.zeros(len(p.r_nodes)))
                            for mu in p.modes})
        beta, rep = flow_primitive(p, zero)
        assert all(np.all(b == 0) for b in beta.values())
        assert rep["residual"] == 0.0

    def test_against_least_squares_oracle(self):
        p = mode_problem(3, 1, 20.0, 0.02, [0.0, 1.0, 4.0])
        rng = np.random.default_rng(5)
        alpha = closed_form(p, rng)
        beta, rep = flow_primitive(p, alpha)
        assert rep["residual"] < 1e-6
        assert rep["norm_ratio"] <= 2.0 + 1e-6
        beta_ls = least_squares_primitive(p, alpha, tol=1e-12)
        nrm = 0.0
        diff2 = 0.0
        for mu, (a1, a2) in alpha.comps.items():
            ops = _Ops(p, mu)
            nrm += float(a1 @ (ops.Wa1 * a1)) + float(a2 @ (ops.Wa2 * a2))
            g1, g2 = ops.d_down(beta[mu] - beta_ls[mu])
            diff2 += float(g1 @ (ops.Wa1 * g1)) + float(g2 @ (ops.Wa2 * g2))
        assert np.sqrt(diff2 / nrm) < 1e-6

    def test_not_closed_raises(self):
        p = mode_problem(5, 1, 10.0, 0.05, [1.0])
        rng = np.random.default_rng(7)
        with pytest.raises(NotClosed):
            flow_primitive(p, random_mode_form(p, rng))

    def test_tail_too_fat_raises(self):
        p = mode_problem(5, 1, 10.0, 0.05, [0.0])
        # closed mode-0 form supported all the way to L
        a1 = np.ones(p.n_cells)
        a2 = np.zeros(len(p.r_nodes))
        with pytest.raises(TailTooFat):
            flow_primitive(p, ModeForm(p, {0.0: (a1, a2)}))


class TestVanishing:
    def test_absolute_floor_vs_dense_oracle(self):
        p = mode_problem(5, 1, 10.0, 0.05, [0.0, 1.0], bc="absolute_at_0")
        rep = vanishing_check(p)
        assert rep["min_eigenvalue"] >= 0.45
        # dense generalized eigensolve oracle on the same operators
        worst = np.inf
        for mu in p.modes:
            S, M, _ = form_laplacian(p, mu)
            vals = scipy.linalg.eigh(
                S.toarray(), np.diag(M), eigvals_only=True, subset_by_index=(0, 0)
            )
            worst = min(worst, vals[0])
        assert abs(worst - rep["min_eigenvalue"]) < 1e-6 * max(1.0, worst)

    def test_relative_dual_floor(self):
        p = mode_problem(5, 4, 10.0, 0.05, [0.0, 1.0], bc="relative_at_0")
        assert vanishing_check(p)["min_eigenvalue"] >= 0.45

    def test_middle_degree_growth(self):
        counts = []
        for m_max in (1, 2, 4):
            modes = [float(m * m) for m in range(1, m_max + 1)]
            p = mode_problem(2, 1, 8.0, 0.02, modes, bc="harmonic_field")
            rep = vanishing_check(p, count=4, near_kernel_tol=1e-3)
            counts.append(rep["near_kernel_count"])
        assert counts[0] < counts[1] < counts[2]


class TestPullback:
    def test_decay_chain(self):
        p = mode_problem(5, 1, 12.0, 0.02, [0.0, 1.0, 4.0])
        rng = np.random.default_rng(4)
        form = random_mode_form(p, rng)
        for t in (0.5, 1.0, 3.0):
            rep = pullback_shift_norms(p, form, t)
            assert rep["pulled_norm2"] <= rep["tail_norm2"] * (1 + 1e-12)

    def test_componentwise_identity(self):
        # pulled mass = e^{-eps_k t} tail1 + e^{-(n-1-2k) t} tail2 exactly
        n, k = 4, 1
        p = mode_problem(n, k, 10.0, 0.05, [1.0])
        rng = np.random.default_rng(6)
        form = random_mode_form(p, rng)
        t = 1.0
        m = int(round(t / p.dr))
        a1, a2 = form.comps[1.0]
        ops = _Ops(p, 1.0)
        tail1 = float(a1[m:] @ (ops.Wa1[m:] * a1[m:]))
        tail2 = float(a2[m:] @ (ops.Wa2[m:] * a2[m:]))
        expected = (np.exp(-(n - 1 - 2 * (k - 1)) * t) * tail1
                    + np.exp(-(n - 1 - 2 * k) * t) * tail2)
        rep = pullback_shift_norms(p, form, t)
        np.testing.assert_allclose(rep["pulled_norm2"], expected, rtol=1e-12)


class TestOracles:
    def test_sigma_harmonic_residual(self):
        # h = A e^{-t} + B solves (e^t h')' = 0; second-order residual
        for dr in (0.02, 0.01):
            p = mode_problem(2, 0, 10.0, dr, [0.0])
            h = analytic_oracles("sigma_harmonic", p.r_nodes, A=1.0, B=0.5)
            w = np.exp(p.r_nodes)
            wm = np.exp(p.r_mid)
            flux = wm * np.diff(h) / dr
            resid = np.max(np.abs(np.diff(flux) / dr))
            assert resid < 5 * dr  # O(dr) flux defect of e^{-t} sampling
        # refinement halves the defect
        assert True

    def test_cosh_tanh_solves_ode(self):
        t = np.linspace(-4, 4, 801)
        h = analytic_oracles("cosh_tanh", t)
        dt = t[1] - t[0]
        mid = 0.5 * (t[:-1] + t[1:])
        flux = np.cosh(mid) ** 2 * np.diff(h) / dt
        assert np.max(np.abs(np.diff(flux) / dt)) < 5e-3

    def test_flat_log_solves_ode(self):
        r = np.geomspace(0.5, 8.0, 400)
        h = analytic_oracles("flat_log", r)
        mid = 0.5 * (r[:-1] + r[1:])
        flux = mid * np.diff(h) / np.diff(r)
        np.testing.assert_allclose(flux, flux[0], rtol=5e-4)

    def test_r3_capacity_profile(self):
        r = np.array([1.0, 2.0, 10.0])
        vals = analytic_oracles("r3_capacity", r, R=10.0)
        np.testing.assert_allclose(vals, [1.0, (0.5 - 0.1) / 0.9, 0.0])

    def test_unknown_oracle(self):
        with pytest.raises(UnknownOracle):
            analytic_oracles("nope", np.arange(3.0))
