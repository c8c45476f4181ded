"""Oriented simplicial 2-complexes: construction, generators and exact topology.

A complex stores simplices as sorted vertex tuples plus an explicit
orientation sign per triangle, so incidence signs are deterministic.
Only dimensions <= 2 are supported; higher-dimensional content is handled
by 1-D mode reduction elsewhere in the package.

Complexes are immutable after construction and safe to share read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    BadRadii,
    DanglingFace,
    DegreeOutOfRange,
    NonManifoldEdge,
    OpenBoundaryChain,
    PrimeTooSmall,
    ValidationError,
)
from .linalg import rank_gfp, random_primes

__all__ = [
    "SimplicialComplex",
    "BettiReport",
    "HandleMarker",
    "build_complex",
    "coboundary",
    "gen_closed_surface",
    "gen_annulus",
    "betti",
    "detect_boundary_cycles",
    "euler_characteristic",
    "is_consistently_oriented",
    "triangle_subcomplex",
]


@dataclass(frozen=True)
class HandleMarker:
    """Compactly supported closed 1-cochain dual to a handle loop.

    ``values`` maps sorted vertex pairs to the cochain coefficient on that
    edge (direction low -> high vertex); absent edges carry zero.
    ``loop`` is a closed vertex path crossing the handle band exactly once.
    """

    values: dict
    loop: tuple

    def remap(self, vmap: dict) -> "HandleMarker":
        vals = {}
        for (a, b), x in self.values.items():
            u, v = vmap[a], vmap[b]
            vals[(u, v) if u < v else (v, u)] = x if u < v else -x
        return HandleMarker(vals, tuple(vmap[v] for v in self.loop))

    def to_edge_vector(self, complex: "SimplicialComplex") -> np.ndarray:
        vec = np.zeros(complex.n_edges)
        for key, x in self.values.items():
            e = complex.edge_index.get(key)
            if e is None:
                raise ValidationError(f"marker edge {key} not in complex")
            vec[e] = x
        return vec


@dataclass(frozen=True)
class SimplicialComplex:
    """Oriented simplicial 2-complex with signed integer incidence.

    Attributes:
        n_vertices: vertex count; vertices are 0..n_vertices-1.
        edges: (E, 2) int array of sorted vertex pairs.
        triangles: (F, 3) int array of sorted vertex triples.
        tri_orientation: (F,) array of +-1, the parity of the permutation
            from the stored sorted triple to the intended orientation.
        boundary_edge: (E,) bool, edges lying in exactly one triangle.
        boundary_vertex: (V,) bool, vertices of boundary edges.
        edge_index: sorted pair -> edge row.
        coords: optional (V, 3) vertex coordinates (generators fill this).
        handles: handle markers recorded by generators.
    """

    n_vertices: int
    edges: np.ndarray
    triangles: np.ndarray
    tri_orientation: np.ndarray
    boundary_edge: np.ndarray
    boundary_vertex: np.ndarray
    edge_index: dict
    coords: Optional[np.ndarray] = None
    handles: tuple = field(default_factory=tuple)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def simplex_count(self, k: int) -> int:
        if k == 0:
            return self.n_vertices
        if k == 1:
            return self.n_edges
        if k == 2:
            return self.n_triangles
        raise DegreeOutOfRange(f"no simplices of dimension {k}")

    def oriented_triangle(self, t: int) -> tuple:
        a, b, c = self.triangles[t]
        return (a, b, c) if self.tri_orientation[t] > 0 else (a, c, b)

    def with_metadata(self, coords=None, handles=None) -> "SimplicialComplex":
        return SimplicialComplex(
            self.n_vertices, self.edges, self.triangles, self.tri_orientation,
            self.boundary_edge, self.boundary_vertex, self.edge_index,
            coords=self.coords if coords is None else coords,
            handles=self.handles if handles is None else tuple(handles),
        )


@dataclass(frozen=True)
class BettiReport:
    """Betti numbers over a prime field.

    Attributes:
        b: (b0, b1, b2).
        relative: True when boundary simplices were deleted first.
        prime_used: field characteristics that agreed on all ranks.
    """

    b: tuple
    relative: bool
    prime_used: tuple

    @property
    def euler(self) -> int:
        return self.b[0] - self.b[1] + self.b[2]


def _perm_sign(tri: Sequence[int]) -> int:
    a, b, c = tri
    s = sorted(tri)
    if tuple(tri) == tuple(s):
        return 1
    # parity of the permutation sorting three distinct labels
    inv = sum(1 for i in range(3) for j in range(i + 1, 3) if tri[i] > tri[j])
    return 1 if inv % 2 == 0 else -1


def build_complex(
    n_vertices: int,
    triangles: Sequence[Sequence[int]],
    edges: Optional[Sequence[Sequence[int]]] = None,
) -> SimplicialComplex:
    """Build an oriented complex from triangle (and extra edge) lists.

    Triangle vertex order fixes its orientation.  All faces are generated,
    boundary edges are marked and the manifold-with-boundary condition is
    enforced.

    Raises:
        DanglingFace: vertex index out of range or repeated in a simplex.
        NonManifoldEdge: an edge with more than two incident triangles.
    """
    tri_sorted = []
    tri_sign = []
    seen = set()
    for tri in triangles:
        tri = tuple(int(v) for v in tri)
        if len(set(tri)) != 3:
            raise DanglingFace(f"degenerate triangle {tri}")
        if any(v < 0 or v >= n_vertices for v in tri):
            raise DanglingFace(f"triangle {tri} references a missing vertex")
        key = tuple(sorted(tri))
        if key in seen:
            raise ValidationError(f"duplicate triangle {key}")
        seen.add(key)
        tri_sorted.append(key)
        tri_sign.append(_perm_sign(tri))

    edge_set = {}
    for key in tri_sorted:
        a, b, c = key
        for pair in ((a, b), (a, c), (b, c)):
            edge_set.setdefault(pair, 0)
            edge_set[pair] += 1
    if edges is not None:
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v or min(u, v) < 0 or max(u, v) >= n_vertices:
                raise DanglingFace(f"bad edge {(u, v)}")
            edge_set.setdefault((min(u, v), max(u, v)), 0)

    for pair, count in edge_set.items():
        if count > 2:
            raise NonManifoldEdge(f"edge {pair} lies in {count} triangles")

    edge_list = sorted(edge_set)
    edge_index = {pair: i for i, pair in enumerate(edge_list)}
    E = np.array(edge_list, dtype=np.int64).reshape(-1, 2)
    T = np.array(tri_sorted, dtype=np.int64).reshape(-1, 3)
    boundary_edge = np.array([edge_set[pair] == 1 for pair in edge_list], dtype=bool)
    boundary_vertex = np.zeros(n_vertices, dtype=bool)
    for pair, is_b in zip(edge_list, boundary_edge):
        if is_b:
            boundary_vertex[pair[0]] = True
            boundary_vertex[pair[1]] = True
    return SimplicialComplex(
        n_vertices=n_vertices,
        edges=E,
        triangles=T,
        tri_orientation=np.array(tri_sign, dtype=np.int64),
        boundary_edge=boundary_edge,
        boundary_vertex=boundary_vertex,
        edge_index=edge_index,
    )


def coboundary(complex: SimplicialComplex, k: int) -> sp.csr_matrix:
    """Signed integer coboundary operator d_k.

    d_0 maps vertex cochains to edge cochains (value on (i, j), i<j, is
    f(j) - f(i)); d_1 maps edge cochains to triangle cochains using the
    stored orientation.  d_1 @ d_0 = 0 exactly over the integers.
    """
    if k == 0:
        rows = np.repeat(np.arange(complex.n_edges), 2)
        cols = complex.edges.ravel()
        data = np.tile(np.array([-1, 1], dtype=np.int64), complex.n_edges)
        return sp.csr_matrix(
            (data, (rows, cols)), shape=(complex.n_edges, complex.n_vertices)
        )
    if k == 1:
        rows, cols, data = [], [], []
        for t in range(complex.n_triangles):
            a, b, c = complex.triangles[t]
            s = int(complex.tri_orientation[t])
            # boundary of (a,b,c) = (b,c) - (a,c) + (a,b)
            for pair, sign in (((b, c), 1), ((a, c), -1), ((a, b), 1)):
                rows.append(t)
                cols.append(complex.edge_index[pair])
                data.append(s * sign)
        return sp.csr_matrix(
            (np.array(data, dtype=np.int64), (rows, cols)),
            shape=(complex.n_triangles, complex.n_edges),
        )
    raise DegreeOutOfRange(f"coboundary degree {k} not in {{0, 1}}")


def euler_characteristic(complex: SimplicialComplex) -> int:
    return complex.n_vertices - complex.n_edges + complex.n_triangles


def is_consistently_oriented(complex: SimplicialComplex) -> bool:
    """True when every interior edge gets opposite inductions from its two
    triangles (the discrete orientability certificate)."""
    d1 = coboundary(complex, 1)
    signed = np.asarray(d1.sum(axis=0)).ravel()
    counts = np.asarray(np.abs(d1).sum(axis=0)).ravel()
    return bool(np.all(signed[counts == 2] == 0))


# --- generators -------------------------------------------------------------

_OCTAHEDRON_COORDS = np.array(
    [
        [1, 0, 0], [-1, 0, 0],
        [0, 1, 0], [0, -1, 0],
        [0, 0, 1], [0, 0, -1],
    ],
    dtype=float,
)

_OCTAHEDRON_FACES = [
    (0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
    (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5),
]


def _subdivide(coords: np.ndarray, faces: list, project_sphere: bool):
    midpoint = {}
    pts = [row for row in coords]

    def mid(u, v):
        key = (u, v) if u < v else (v, u)
        if key not in midpoint:
            p = 0.5 * (pts[u] + pts[v])
            if project_sphere:
                p = p / np.linalg.norm(p)
            midpoint[key] = len(pts)
            pts.append(p)
        return midpoint[key]

    out = []
    for (p, q, r) in faces:
        a, b, c = mid(p, q), mid(q, r), mid(r, p)
        out.extend([(p, a, c), (q, b, a), (r, c, b), (a, b, c)])
    return np.array(pts), out


def _torus_grid(n: int):
    """Flat n x n periodic grid; returns (n_vertices, faces, coords, handle)."""
    if n < 3:
        raise ValidationError("torus grid needs n >= 3")

    def v(i, j):
        return (i % n) * n + (j % n)

    faces = []
    for i in range(n):
        for j in range(n):
            A, B, C, D = v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)
            faces.append((A, B, C))
            faces.append((A, C, D))

    R, r = 2.0, 1.0
    coords = np.zeros((n * n, 3))
    for i in range(n):
        th = 2 * np.pi * i / n
        for j in range(n):
            ph = 2 * np.pi * j / n
            coords[v(i, j)] = [
                (R + r * np.cos(ph)) * np.cos(th),
                (R + r * np.cos(ph)) * np.sin(th),
                r * np.sin(ph),
            ]

    # handle band: ramp of rho across columns i in [1, 3]; dual loop runs in
    # the i-direction at j = 0 and crosses the band exactly once
    ramp_lo, ramp_hi = 1, min(3, n - 2)
    rho = np.zeros(n)
    for i in range(n):
        if i <= ramp_lo:
            rho[i] = 0.0
        elif i >= ramp_hi:
            rho[i] = 1.0
        else:
            rho[i] = (i - ramp_lo) / (ramp_hi - ramp_lo)
    values = {}
    for i in range(n - 1):          # i-wrap edges excluded: they carry zero
        drho = rho[i + 1] - rho[i]
        if drho == 0.0:
            continue
        for j in range(n):
            for head in (v(i + 1, j), v(i + 1, j + 1)):
                a, b = v(i, j), head
                key = (a, b) if a < b else (b, a)
                values[key] = drho if a < b else -drho
    loop = tuple(v(i, 0) for i in range(n)) + (v(0, 0),)
    return n * n, faces, coords, HandleMarker(values, loop)


def _connect_sum(parts):
    """Chain connected sum of oriented closed parts.

    Each part is (n_vertices, faces, handle_markers, glue_faces): faces are
    oriented vertex triples and glue_faces two face indices reserved for
    gluing (chain ends use only the first).  Gluing removes the reserved
    faces and identifies their vertex triples orientation-reversed, which
    keeps the union consistently oriented.
    """
    n_total, faces_acc, markers_acc = 0, [], []
    prev_hole = None
    for idx, (nv, faces, markers, glue) in enumerate(parts):
        first, last = idx == 0, idx == len(parts) - 1
        g_prev = None if first else glue[0]
        g_next = None if last else (glue[0] if first else glue[1])
        removed = {g for g in (g_prev, g_next) if g is not None}

        if first:
            relabel = {v: n_total + v for v in range(nv)}
            n_total += nv
        else:
            a0, a1, a2 = prev_hole
            b0, b1, b2 = faces[g_prev]
            ident = {b0: a0, b1: a2, b2: a1}
            relabel, fresh = {}, n_total
            for v in range(nv):
                if v in ident:
                    relabel[v] = ident[v]
                else:
                    relabel[v] = fresh
                    fresh += 1
            n_total += nv - 3

        faces_acc.extend(
            tuple(relabel[x] for x in f)
            for i, f in enumerate(faces)
            if i not in removed
        )
        markers_acc.extend(m.remap(relabel) for m in markers)
        if g_next is not None:
            prev_hole = tuple(relabel[x] for x in faces[g_next])
    return n_total, faces_acc, markers_acc


def gen_closed_surface(genus: int, refinement: int = 1) -> SimplicialComplex:
    """Closed oriented surface of the given genus.

    genus 0: octahedron subdivided ``refinement - 1`` times, vertices on the
    unit sphere.  genus 1: flat periodic grid with a torus handle marker,
    coordinates on a standard torus of revolution.  genus >= 2: chain
    connected sum of tori (coordinates dropped; metric is assigned
    combinatorially downstream).
    """
    if genus < 0 or refinement < 1:
        raise ValidationError("genus >= 0 and refinement >= 1 required")
    if genus == 0:
        coords, faces = _OCTAHEDRON_COORDS.copy(), list(_OCTAHEDRON_FACES)
        for _ in range(refinement - 1):
            coords, faces = _subdivide(coords, faces, project_sphere=True)
        cx = build_complex(len(coords), faces)
        out = cx.with_metadata(coords=coords)
    elif genus == 1:
        nv, faces, coords, handle = _torus_grid(3 * refinement)
        cx = build_complex(nv, faces)
        out = cx.with_metadata(coords=coords, handles=(handle,))
    else:
        n = max(6, 3 * refinement)
        parts = []
        for _ in range(genus):
            nv, faces, _, handle = _torus_grid(n)
            # reserve two faces away from the handle band and the dual loop:
            # cells (n-2, n//2) upper and (n-2, n//2 + 2) upper
            def cell_face(i, j):
                return 2 * ((i % n) * n + (j % n)) + 1
            glue = [cell_face(n - 2, n // 2), cell_face(n - 2, n // 2 + 2)]
            parts.append((nv, faces, [handle], glue))
        nv, faces, markers = _connect_sum(parts)
        cx = build_complex(nv, faces)
        out = cx.with_metadata(handles=tuple(markers))
    if not is_consistently_oriented(out):
        raise ValidationError("generator produced inconsistent orientation")
    return out


def gen_annulus(
    n_radial: int,
    n_angular: int,
    r_inner: float,
    r_outer: float,
    grading: str = "linear",
) -> SimplicialComplex:
    """Planar annulus mesh with ``n_radial`` cells across and ``n_angular``
    around; ``grading`` is "linear" or "log" ring spacing.

    Raises BadRadii unless 0 < r_inner < r_outer.
    """
    if not (0 < r_inner < r_outer):
        raise BadRadii(f"need 0 < r_inner < r_outer, got {(r_inner, r_outer)}")
    if n_radial < 1 or n_angular < 3:
        raise ValidationError("need n_radial >= 1 and n_angular >= 3")
    if grading == "linear":
        radii = np.linspace(r_inner, r_outer, n_radial + 1)
    elif grading == "log":
        radii = np.geomspace(r_inner, r_outer, n_radial + 1)
    else:
        raise ValidationError(f"unknown grading {grading!r}")

    m = n_angular

    def v(k, j):
        return k * m + (j % m)

    faces = []
    for k in range(n_radial):
        for j in range(m):
            A, B, C, D = v(k, j), v(k, j + 1), v(k + 1, j + 1), v(k + 1, j)
            faces.append((A, B, C))
            faces.append((A, C, D))
    coords = np.zeros(((n_radial + 1) * m, 3))
    for k, r in enumerate(radii):
        for j in range(m):
            th = 2 * np.pi * j / m
            coords[v(k, j)] = [r * np.cos(th), r * np.sin(th), 0.0]
    cx = build_complex((n_radial + 1) * m, faces)
    return cx.with_metadata(coords=coords)


def betti(complex: SimplicialComplex, relative: bool = False, seed: int = 0) -> BettiReport:
    """Betti numbers from GF(p) incidence ranks, two-prime cross-checked.

    The relative variant deletes boundary simplices first (cochains of the
    pair (closure, boundary)).  Rank disagreement across primes triggers up
    to two retries with fresh primes before raising PrimeTooSmall.
    """
    d0 = coboundary(complex, 0)
    d1 = coboundary(complex, 1)
    if relative:
        iv = ~complex.boundary_vertex
        ie = ~complex.boundary_edge
        d0 = d0[ie][:, iv]
        d1 = d1[:, ie]
        n0, n1 = int(iv.sum()), int(ie.sum())
    else:
        n0, n1 = complex.n_vertices, complex.n_edges
    n2 = complex.n_triangles

    d0d = d0.toarray()
    d1d = d1.toarray()
    for attempt in range(3):
        p, q = random_primes(2, seed=seed + 7 * attempt)
        r0p, r0q = rank_gfp(d0d, p), rank_gfp(d0d, q)
        r1p, r1q = rank_gfp(d1d, p), rank_gfp(d1d, q)
        if r0p == r0q and r1p == r1q:
            b0 = n0 - r0p
            b1 = n1 - r0p - r1p
            b2 = n2 - r1p
            return BettiReport(b=(b0, b1, b2), relative=relative, prime_used=(p, q))
    raise PrimeTooSmall("GF(p) ranks disagree across primes after 3 attempts")


def detect_boundary_cycles(complex: SimplicialComplex) -> list:
    """Boundary loops as closed vertex paths; loops partition boundary edges.

    Raises OpenBoundaryChain when a boundary vertex has degree != 2 in the
    boundary graph or walking fails to close a loop.
    """
    adj: dict = {}
    n_boundary = 0
    for (a, b), is_b in zip(complex.edges, complex.boundary_edge):
        if not is_b:
            continue
        n_boundary += 1
        adj.setdefault(int(a), []).append(int(b))
        adj.setdefault(int(b), []).append(int(a))
    for v, nbrs in adj.items():
        if len(nbrs) != 2:
            raise OpenBoundaryChain(f"boundary vertex {v} has degree {len(nbrs)}")
    loops = []
    visited = set()
    for start in sorted(adj):
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        prev, cur = None, start
        while True:
            nxt = [w for w in adj[cur] if w != prev]
            if not nxt:
                raise OpenBoundaryChain(f"chain from {start} dead-ends at {cur}")
            prev, cur = cur, nxt[0]
            if cur == start:
                loop.append(start)
                break
            if cur in visited:
                raise OpenBoundaryChain(f"chain from {start} re-enters at {cur}")
            visited.add(cur)
            loop.append(cur)
        loops.append(loop)
    assert sum(len(l) - 1 for l in loops) == n_boundary
    return loops


def triangle_subcomplex(complex: SimplicialComplex, triangle_ids: Sequence[int]):
    """Induced subcomplex on a triangle subset.

    Returns (subcomplex, vertex_map) where vertex_map sends old vertex ids
    to new ones.  Orientations are inherited; coordinates are sliced when
    present.
    """
    tri_ids = sorted(set(int(t) for t in triangle_ids))
    if not tri_ids:
        raise ValidationError("empty triangle subset")
    verts = sorted({int(v) for t in tri_ids for v in complex.triangles[t]})
    vmap = {v: i for i, v in enumerate(verts)}
    faces = [tuple(vmap[v] for v in complex.oriented_triangle(t)) for t in tri_ids]
    sub = build_complex(len(verts), faces)
    if complex.coords is not None:
        sub = sub.with_metadata(coords=complex.coords[verts])
    return sub, vmap
