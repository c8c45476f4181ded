"""Mesh and metric text formats.

Meshes are stored OFF-style (vertex coordinates then oriented triangle
list); incidence and boundary marks are re-derived on load, never stored.
The metric sidecar lists per-edge base lengths and per-triangle conformal
factors at full precision (%.17g round-trips doubles).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .complexes import SimplicialComplex, build_complex
from .errors import ParseError, ValidationError
from .metric import MetricField

__all__ = ["write_mesh", "read_mesh", "write_metric", "read_metric"]

_FMT = "%.17g"


def write_mesh(path, complex: SimplicialComplex) -> None:
    """Write an OFF file; zero coordinates when the complex carries none."""
    coords = complex.coords
    if coords is None:
        coords = np.zeros((complex.n_vertices, 3))
    lines = ["OFF", f"{complex.n_vertices} {complex.n_triangles} {complex.n_edges}"]
    for row in coords:
        lines.append(" ".join(_FMT % x for x in row))
    for t in range(complex.n_triangles):
        a, b, c = complex.oriented_triangle(t)
        lines.append(f"3 {a} {b} {c}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_mesh(path) -> SimplicialComplex:
    """Parse an OFF file back into an oriented complex (coords attached)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != "OFF":
        raise ParseError("missing OFF header", line=1)
    if len(lines) < 2:
        raise ParseError("missing count line", line=2)
    try:
        nv, nf = [int(x) for x in lines[1].split()[:2]]
    except (ValueError, IndexError) as exc:
        raise ParseError(f"bad count line: {exc}", line=2) from None
    if len(lines) < 2 + nv + nf:
        raise ParseError(
            f"expected {nv} vertex and {nf} face lines", line=len(lines)
        )
    coords = np.zeros((nv, 3))
    for i in range(nv):
        ln = 2 + i
        parts = lines[ln].split()
        if len(parts) < 3:
            raise ParseError("vertex line needs 3 coordinates", line=ln + 1)
        try:
            coords[i] = [float(x) for x in parts[:3]]
        except ValueError as exc:
            raise ParseError(str(exc), line=ln + 1) from None
    faces = []
    for i in range(nf):
        ln = 2 + nv + i
        parts = lines[ln].split()
        if len(parts) != 4 or parts[0] != "3":
            raise ParseError("face line must read '3 a b c'", line=ln + 1)
        try:
            faces.append(tuple(int(x) for x in parts[1:]))
        except ValueError as exc:
            raise ParseError(str(exc), line=ln + 1) from None
    cx = build_complex(nv, faces)
    if np.any(coords != 0.0):
        cx = cx.with_metadata(coords=coords)
    return cx


def write_metric(path, complex: SimplicialComplex, metric: MetricField) -> None:
    lines = [f"hodgelab-metric 1 {metric.source}"]
    for (a, b), e in sorted(complex.edge_index.items()):
        lines.append(f"edge {a} {b} " + _FMT % metric.edge_length[e])
    for t in range(complex.n_triangles):
        a, b, c = complex.triangles[t]
        lines.append(f"tri {a} {b} {c} " + _FMT % metric.conformal_factor[t])
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_metric(path, complex: SimplicialComplex) -> MetricField:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].startswith("hodgelab-metric 1"):
        raise ParseError("missing metric header", line=1)
    source = lines[0].split()[2] if len(lines[0].split()) > 2 else "embedding"
    lengths = np.full(complex.n_edges, np.nan)
    u = np.full(complex.n_triangles, np.nan)
    tri_index = {tuple(t): i for i, t in enumerate(map(tuple, complex.triangles))}
    for ln, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if not parts:
            continue
        try:
            if parts[0] == "edge":
                a, b = int(parts[1]), int(parts[2])
                val = float(parts[3])
                if val <= 0:
                    raise ValidationError(f"edge length {val} not positive")
                e = complex.edge_index.get((min(a, b), max(a, b)))
                if e is None:
                    raise ValidationError(f"edge {(a, b)} not in complex")
                lengths[e] = val
            elif parts[0] == "tri":
                key = tuple(sorted(int(x) for x in parts[1:4]))
                if key not in tri_index:
                    raise ValidationError(f"triangle {key} not in complex")
                u[tri_index[key]] = float(parts[4])
            else:
                raise ParseError(f"unknown record {parts[0]!r}", line=ln)
        except (ValueError, IndexError) as exc:
            raise ParseError(str(exc), line=ln) from None
    if np.any(np.isnan(lengths)) or np.any(np.isnan(u)):
        raise ValidationError("metric sidecar incomplete")
    return MetricField(lengths, u, source=source)
