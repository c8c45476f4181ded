"""Complex construction, generators and the exact topology oracle."""

import numpy as np
import pytest

from hodgelab.complexes import (
    betti,
    build_complex,
    coboundary,
    detect_boundary_cycles,
    euler_characteristic,
    gen_annulus,
    gen_closed_surface,
    is_consistently_oriented,
    triangle_subcomplex,
)
from hodgelab.errors import BadRadii, DanglingFace, NonManifoldEdge, OpenBoundaryChain

from test_linalg import rational_rank


class TestBuild:
    def test_single_triangle(self):
        c = build_complex(3, [(0, 1, 2)])
        assert (c.n_vertices, c.n_edges, c.n_triangles) == (3, 3, 1)
        assert c.boundary_edge.all()

    def test_two_triangles_shared_edge(self):
        c = build_complex(4, [(0, 1, 2), (1, 3, 2)])
        assert (c.n_vertices, c.n_edges) == (4, 5)
        assert (~c.boundary_edge).sum() == 1  # the shared edge (1,2)

    def test_octahedron_counts(self):
        c = gen_closed_surface(0, 1)
        # chi = 6 - 12 + 8 = 2
        assert (c.n_vertices, c.n_edges, c.n_triangles) == (6, 12, 8)
        assert euler_characteristic(c) == 2
        assert not c.boundary_edge.any()

    def test_nonmanifold_edge(self):
        with pytest.raises(NonManifoldEdge):
            build_complex(5, [(0, 1, 2), (0, 1, 3), (0, 1, 4)])

    def test_dangling_face(self):
        with pytest.raises(DanglingFace):
            build_complex(3, [(0, 1, 7)])


class TestCoboundary:
    def test_single_triangle_d0(self):
        c = build_complex(3, [(0, 1, 2)])
        d0 = coboundary(c, 0).toarray()
        assert d0.shape == (3, 3)
        assert np.all(np.sort(np.abs(d0), axis=1)[:, 1:] == 1)
        assert np.all(d0.sum(axis=1) == 0)

    @pytest.mark.parametrize("genus,refinement", [(0, 2), (1, 2), (2, 2)])
    def test_dd_zero(self, genus, refinement):
        c = gen_closed_surface(genus, refinement)
        prod = coboundary(c, 1) @ coboundary(c, 0)
        assert abs(prod).sum() == 0

    def test_torus_d0_rank(self):
        c = gen_closed_surface(1, 2)
        d0 = coboundary(c, 0).toarray()
        assert rational_rank(d0) == c.n_vertices - 1


class TestGenerators:
    @pytest.mark.parametrize(
        "genus,chi", [(0, 2), (1, 0), (2, -2), (3, -4)]
    )
    def test_closed_surface_euler(self, genus, chi):
        c = gen_closed_surface(genus, 2)
        assert euler_characteristic(c) == chi
        assert not c.boundary_edge.any()
        assert is_consistently_oriented(c)

    def test_annulus_small(self):
        c = gen_annulus(2, 4, 0.5, 1.0)
        assert c.n_vertices == 12
        assert euler_characteristic(c) == 0
        assert c.boundary_edge.sum() == 2 * 4

    def test_annulus_b1(self):
        c = gen_annulus(3, 8, 0.5, 2.0)
        assert betti(c).b == (1, 1, 0)

    def test_bad_radii(self):
        with pytest.raises(BadRadii):
            gen_annulus(2, 4, 1.0, 0.5)


class TestBetti:
    def test_sphere(self):
        assert betti(gen_closed_surface(0, 2)).b == (1, 0, 1)

    def test_torus(self):
        assert betti(gen_closed_surface(1, 2)).b == (1, 2, 1)

    def test_annulus_relative(self):
        rep = betti(gen_annulus(3, 8, 0.5, 2.0), relative=True)
        assert rep.b == (0, 1, 1)

    @pytest.mark.parametrize("genus", [0, 1, 2])
    def test_euler_equals_alternating_sum(self, genus):
        for refinement in (1, 2):
            c = gen_closed_surface(genus, refinement)
            assert betti(c).euler == euler_characteristic(c)

    def test_relative_euler_on_annulus(self):
        c = gen_annulus(4, 10, 0.3, 1.0)
        rep = betti(c, relative=True)
        iv = int((~c.boundary_vertex).sum())
        ie = int((~c.boundary_edge).sum())
        assert rep.euler == iv - ie + c.n_triangles

    def test_two_primes_recorded(self):
        rep = betti(gen_closed_surface(0, 1))
        assert len(rep.prime_used) == 2
        assert min(rep.prime_used) > 10**6


class TestBoundaryCycles:
    def test_annulus_two_loops(self):
        assert len(detect_boundary_cycles(gen_annulus(3, 8, 0.5, 1.0))) == 2

    def test_torus_zero_loops(self):
        assert detect_boundary_cycles(gen_closed_surface(1, 2)) == []

    def test_disk_one_loop(self):
        # fan triangulation of a disk
        m = 8
        faces = [(0, 1 + i, 1 + (i + 1) % m) for i in range(m)]
        c = build_complex(m + 1, faces)
        loops = detect_boundary_cycles(c)
        assert len(loops) == 1
        assert len(loops[0]) == m + 1

    def test_open_chain_raises(self):
        # two triangles sharing only a vertex: boundary vertex of degree 4
        c = build_complex(5, [(0, 1, 2), (0, 3, 4)])
        with pytest.raises(OpenBoundaryChain):
            detect_boundary_cycles(c)


class TestSubcomplex:
    def test_torus_half_is_cylinder(self):
        c = gen_closed_surface(1, 2)
        n = 6
        half = [t for t in range(c.n_triangles) if (t // 2) // n < n // 2]
        sub, vmap = triangle_subcomplex(c, half)
        assert betti(sub).b == (1, 1, 0)
        assert len(detect_boundary_cycles(sub)) == 2
