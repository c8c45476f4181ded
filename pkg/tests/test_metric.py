"""Metric fields and lumped mass operators."""

import numpy as np
import pytest

from hodgelab.complexes import build_complex, gen_annulus, gen_closed_surface
from hodgelab.errors import DegenerateTriangle
from hodgelab.metric import (
    conformal_rescale,
    mass_matrices,
    metric_from_embedding,
    metric_uniform,
    warped_annulus_metric,
)


@pytest.fixture(scope="module")
def torus_bundle():
    cx = gen_closed_surface(1, 3)
    metric = metric_from_embedding(cx, cx.coords)
    return cx, metric, mass_matrices(cx, metric)


class TestEmbedding:
    def test_unit_right_triangle(self):
        c = build_complex(3, [(0, 1, 2)])
        coords = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], float)
        m = metric_from_embedding(c, coords)
        assert sorted(np.round(m.edge_length, 12)) == [1.0, 1.0, round(np.sqrt(2), 12)]

    def test_octahedron_sphere_edges(self):
        cx = gen_closed_surface(0, 1)
        m = metric_from_embedding(cx, cx.coords)
        np.testing.assert_allclose(m.edge_length, np.sqrt(2), rtol=1e-14)

    def test_flat_annulus_radial_edges_equal(self):
        cx = gen_annulus(3, 12, 0.5, 2.0)
        m = metric_from_embedding(cx, cx.coords)
        radial = []
        for (a, b), e in cx.edge_index.items():
            ra = np.linalg.norm(cx.coords[a][:2])
            rb = np.linalg.norm(cx.coords[b][:2])
            same_angle = np.allclose(
                np.arctan2(*cx.coords[a][1::-1]), np.arctan2(*cx.coords[b][1::-1])
            )
            if same_angle and not np.isclose(ra, rb):
                radial.append(m.edge_length[e])
        assert len(set(np.round(radial, 12))) == 1

    def test_degenerate_raises(self):
        c = build_complex(3, [(0, 1, 2)])
        coords = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], float)
        with pytest.raises(DegenerateTriangle):
            metric_from_embedding(c, coords)


class TestMasses:
    def test_unit_right_triangle_m2(self):
        c = build_complex(3, [(0, 1, 2)])
        coords = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], float)
        b = mass_matrices(c, metric_from_embedding(c, coords))
        np.testing.assert_allclose(b.M2, [2.0], rtol=1e-14)

    def test_m0_partitions_area(self, torus_bundle):
        _, _, b = torus_bundle
        total = (1.0 / b.M2).sum()
        np.testing.assert_allclose(b.M0.sum(), total, rtol=1e-12)

    def test_adjointness(self, torus_bundle):
        cx, _, b = torus_bundle
        rng = np.random.default_rng(0)
        for k in (0, 1):
            x = rng.standard_normal(cx.simplex_count(k))
            y = rng.standard_normal(cx.simplex_count(k + 1))
            lhs = (b.coboundary(k) @ x) @ (b.mass(k + 1) * y)
            rhs = x @ (b.mass(k) * (b.codifferential(k + 1) @ y))
            assert abs(lhs - rhs) <= 1e-11 * max(abs(lhs), 1.0)

    def test_all_positive(self, torus_bundle):
        _, _, b = torus_bundle
        assert b.M0.min() > 0 and b.M1.min() > 0 and b.M2.min() > 0


class TestConformal:
    def test_identity_rescale(self, torus_bundle):
        cx, metric, b = torus_bundle
        m2 = conformal_rescale(metric, np.zeros(cx.n_triangles))
        b2 = mass_matrices(cx, m2)
        np.testing.assert_array_equal(b2.M0, b.M0)
        np.testing.assert_array_equal(b2.M1, b.M1)

    def test_constant_rescale_scales_area(self, torus_bundle):
        cx, metric, b = torus_bundle
        c = 0.3
        b2 = mass_matrices(cx, conformal_rescale(metric, np.full(cx.n_triangles, c)))
        np.testing.assert_allclose(b2.M0.sum(), np.exp(2 * c) * b.M0.sum(), rtol=1e-12)
        np.testing.assert_allclose(
            (1 / b2.M2).sum(), np.exp(2 * c) * (1 / b.M2).sum(), rtol=1e-12
        )

    def test_rescale_group_inverse(self, torus_bundle):
        cx, metric, b = torus_bundle
        rng = np.random.default_rng(4)
        u = rng.standard_normal(cx.n_triangles)
        m3 = conformal_rescale(conformal_rescale(metric, u), -u)
        b3 = mass_matrices(cx, m3)
        np.testing.assert_allclose(1 / b3.M2, 1 / b.M2, rtol=1e-12)

    def test_middle_degree_mass_invariance(self, torus_bundle):
        cx, metric, b = torus_bundle
        rng = np.random.default_rng(9)
        for _ in range(5):
            u = rng.standard_normal(cx.n_triangles)
            b2 = mass_matrices(cx, conformal_rescale(metric, u))
            rel = np.max(np.abs(b2.M1 - b.M1) / b.M1)
            assert rel < 1e-12


class TestWarpedAnnulus:
    def test_flat_cylinder_rings_congruent(self):
        cx, m = warped_annulus_metric(10, 12, 1.0, 0.0)
        assert len(set(np.round(m.edge_length, 12))) <= 3

    def test_warp_ratio_e(self):
        cx, m = warped_annulus_metric(10, 16, 1.0, 1.0)
        # rings at r=0 and r=1: angular lengths differ by factor e
        arcs = sorted(set(np.round(m.edge_length, 10)))
        assert any(np.isclose(a * np.e, b, rtol=1e-9) for a in arcs for b in arcs)

    def test_total_area_quadrature(self):
        # int_0^3 e^r dr x 2 pi = 2 pi (e^3 - 1)
        cx, m = warped_annulus_metric(96, 288, 3.0, 1.0)
        b = mass_matrices(cx, m)
        exact = 2 * np.pi * (np.exp(3) - 1)
        assert abs(b.M0.sum() - exact) / exact < 0.02

    def test_under_resolved_warp_raises(self):
        from hodgelab.errors import AspectBlowup

        with pytest.raises(AspectBlowup):
            warped_annulus_metric(4, 3, 8.0, 2.0)


def test_uniform_metric_valid_on_genus2():
    cx = gen_closed_surface(2, 2)
    b = mass_matrices(cx, metric_uniform(cx))
    assert b.M0.min() > 0 and b.M1.min() > 0
