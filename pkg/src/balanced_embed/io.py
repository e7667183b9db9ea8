"""File formats: edge lists, measure files, point files, coordinate CSV.

Edge list: one ``u v`` pair per line, whitespace separated, 0-indexed,
``#`` starts a comment. Vertex count is inferred as max index + 1 unless
given explicitly.

Measure file: lines of ``vertex weight`` where weight is a decimal or an
exact ``p/q`` rational. If every weight is rational the measure is kept
exact.

Point file: one point per line, whitespace-separated coordinates; optional
metadata columns follow a ``|`` separator, named by a ``# meta: name1 name2``
header comment.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np

from .graph import Graph, GraphError, build_graph
from .measures import VertexMeasure


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def read_edge_list(path, n: int | None = None) -> Graph:
    text = Path(path).read_text()
    return parse_edge_list(text, n=n)


def parse_edge_list(text: str, n: int | None = None) -> Graph:
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise GraphError(f"line {lineno}: non-integer vertex in {raw!r}") from exc
    return build_graph(edges, n=n)


def write_edge_list(g: Graph, path) -> None:
    lines = [f"{u} {v}" for u, v in g.edges()]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def format_rational(x: Fraction | float) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def parse_weight(token: str) -> Fraction | float:
    if "/" in token:
        num, den = token.split("/", 1)
        return Fraction(int(num), int(den))
    return float(token)


def read_measure_file(path, n: int) -> VertexMeasure:
    entries: dict[int, Fraction | float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'vertex weight', got {raw!r}")
        v = int(parts[0])
        if not 0 <= v < n:
            raise ValueError(f"line {lineno}: vertex {v} out of range for n={n}")
        entries[v] = parse_weight(parts[1])
    all_exact = all(isinstance(w, Fraction) for w in entries.values())
    if all_exact:
        exact = [Fraction(0)] * n
        for v, w in entries.items():
            exact[v] = w
        return VertexMeasure.from_fractions(exact)
    weights = np.zeros(n)
    for v, w in entries.items():
        weights[v] = float(w)
    return VertexMeasure.from_weights(weights)


def write_measure_file(mu: VertexMeasure, path) -> None:
    lines = []
    for v in mu.support():
        w = mu.exact[v] if mu.exact is not None else float(mu.weights[v])
        lines.append(f"{v} {format_rational(w)}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_point_file(path):
    from .generators import PointCloud

    meta_names: list[str] | None = None
    coord_rows: list[list[float]] = []
    meta_rows: list[list[float]] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("# meta:"):
            meta_names = stripped[len("# meta:"):].split()
            continue
        line = _strip_comment(raw)
        if not line:
            continue
        if "|" in line:
            coord_part, meta_part = line.split("|", 1)
            meta_rows.append([float(t) for t in meta_part.split()])
        else:
            coord_part = line
        coord_rows.append([float(t) for t in coord_part.split()])
    if not coord_rows:
        raise ValueError(f"{path}: no points found")
    points = np.array(coord_rows, dtype=np.float64)
    meta: dict[str, np.ndarray] = {}
    if meta_rows:
        if len(meta_rows) != len(coord_rows):
            raise ValueError(f"{path}: metadata present on only some lines")
        cols = np.array(meta_rows, dtype=np.float64)
        if meta_names is None:
            meta_names = [f"meta_{i}" for i in range(cols.shape[1])]
        for i, name in enumerate(meta_names):
            meta[name] = cols[:, i]
    return PointCloud(points=points, meta=meta)


def write_point_file(cloud, path) -> None:
    meta_names = sorted(cloud.meta)
    lines = []
    if meta_names:
        lines.append("# meta: " + " ".join(meta_names))
        meta_cols = np.stack([cloud.meta[k] for k in meta_names], axis=1)
    for i, p in enumerate(cloud.points):
        coords = " ".join(repr(float(x)) for x in p)
        if meta_names:
            extra = " ".join(repr(float(x)) for x in meta_cols[i])
            lines.append(f"{coords} | {extra}")
        else:
            lines.append(coords)
    Path(path).write_text("\n".join(lines) + "\n")


def write_coords_csv(emb, path) -> None:
    """Embedding coordinates: header names columns by support vertex."""
    header = "vertex," + ",".join(str(int(w)) for w in emb.support)
    lines = [header]
    for v in range(emb.coords.shape[0]):
        lines.append(str(v) + "," + ",".join(repr(float(x)) for x in emb.coords[v]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_points_csv(points: np.ndarray, path, prefix: str = "x") -> None:
    header = "vertex," + ",".join(f"{prefix}{j}" for j in range(points.shape[1]))
    lines = [header]
    for v in range(points.shape[0]):
        lines.append(str(v) + "," + ",".join(repr(float(x)) for x in points[v]))
    Path(path).write_text("\n".join(lines) + "\n")
