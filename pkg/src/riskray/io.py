"""File formats and result serialization.

JSON is the canonical machine-readable output; numbers are written with
17 significant digits so parsing back reproduces the doubles exactly.
OFF meshes are emitted for d=3 regions as a visualization hand-off.
"""

from __future__ import annotations

import csv
import io as _io
import math

import numpy as np

from .errors import DataError, RiskrayError
from .geometry import Facet, Polytope
from .region import Region, Sample
from .solver import SolveOutcome
from .weights import WeightVector


def parse_sample_csv(path) -> Sample:
    """Read an n x d sample from CSV, auto-detecting a header row.

    Decimal parsing is locale-independent (dot only).  Ragged rows and
    non-numeric cells are reported with their 1-based coordinates.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: no data rows")

    start = 0
    try:
        [float(cell) for cell in rows[0]]
    except ValueError:
        start = 1           # non-numeric first row is a header
        if len(rows) == 1:
            raise DataError(f"{path}: header but no data rows") from None

    d = len(rows[start])
    data = []
    for i, row in enumerate(rows[start:], start=start + 1):
        if len(row) != d:
            raise DataError(f"{path}: row {i} has {len(row)} cells, expected {d}")
        parsed = []
        for j, cell in enumerate(row, start=1):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell at row {i}, column {j}: {cell!r}"
                ) from None
        data.append(parsed)
    return Sample(np.asarray(data))


def parse_univariate_csv(path) -> np.ndarray:
    """Single-column CSV (optional header) as a 1-D array."""
    sample = parse_sample_csv(path)
    if sample.d != 1:
        raise DataError(f"{path}: expected one column, found {sample.d}")
    return sample.rows[:, 0]


def parse_generator_csv(path) -> np.ndarray:
    """Two-column (t, r(t)) grid for a custom weight-generating function."""
    sample = parse_sample_csv(path)
    if sample.d != 2:
        raise DataError(f"{path}: generator grid needs two columns (t, r)")
    return sample.rows


# ---------------------------------------------------------------------------
# JSON with fixed float formatting

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return f"{x:.17g}"


def jsonify(obj, indent: int = 0) -> str:
    """Serialize to JSON text with 17-significant-digit floats."""
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        import json
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [jsonify(v, indent) for v in (obj.tolist()
                                              if isinstance(obj, np.ndarray)
                                              else obj)]
        return "[" + ", ".join(items) + "]"
    if isinstance(obj, dict):
        inner = ",\n".join(
            f'{pad}  "{k}": {jsonify(v, indent + 2)}' for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise RiskrayError(f"cannot serialize {type(obj).__name__} to JSON")


def weights_to_json(w: WeightVector) -> str:
    return jsonify(w.to_list())


def weights_from_json(text: str) -> WeightVector:
    import json
    arr = json.loads(text)
    if not isinstance(arr, list):
        raise DataError("weight JSON must be an array (ascending order)")
    return WeightVector(np.asarray(arr, dtype=float))


def polytope_to_dict(poly: Polytope) -> dict:
    return {
        "dim": poly.dim,
        "affine_dim": poly.affine_dim,
        "vertices": poly.vertices,
        "facets": [
            {
                "normal": f.normal,
                "intercept": f.intercept,
                "vertex_ids": list(f.vertex_ids),
                "neighbor_ids": list(f.neighbor_ids),
            }
            for f in poly.facets
        ],
    }


def polytope_from_dict(data: dict) -> Polytope:
    facets = tuple(
        Facet(np.asarray(f["normal"], dtype=float), float(f["intercept"]),
              tuple(f["vertex_ids"]), tuple(f["neighbor_ids"]))
        for f in data.get("facets", [])
    )
    return Polytope(np.asarray(data["vertices"], dtype=float), facets,
                    int(data["dim"]), int(data["affine_dim"]))


def region_to_json(region: Region) -> str:
    return jsonify({
        "weights": region.weights.to_list(),
        "exact": region.exact,
        "notes": list(region.notes),
        "polytope": polytope_to_dict(region.polytope),
    })


def region_from_json(text: str) -> tuple[Polytope, WeightVector, bool]:
    import json
    data = json.loads(text)
    poly = polytope_from_dict(data["polytope"])
    w = WeightVector(np.asarray(data["weights"], dtype=float))
    return poly, w, bool(data.get("exact", False))


def outcome_to_dict(outcome: SolveOutcome, region: Region | None = None,
                    timings_ms: dict | None = None,
                    seed: int | None = None) -> dict:
    doc: dict = {"status": outcome.status}
    if outcome.x_star is not None:
        doc["x"] = outcome.x_star
        doc["value"] = outcome.value
    if outcome.maximized and outcome.value is not None:
        doc["objective_value"] = outcome.objective_value
    if outcome.active_facet is not None:
        doc["active_facet"] = {
            "normal": outcome.active_facet.normal,
            "intercept": outcome.active_facet.intercept,
        }
    if outcome.lambda_star is not None:
        doc["lambda"] = outcome.lambda_star
    if outcome.margin is not None:
        doc["margin"] = outcome.margin
    doc["iterations"] = outcome.iterations
    doc["certified"] = outcome.certified
    if region is not None:
        doc["region"] = {
            "n_vertices": region.polytope.n_vertices,
            "n_facets": region.polytope.n_facets,
            "exact": region.exact,
        }
    doc["timings_ms"] = timings_ms or {}
    if seed is not None:
        doc["seed"] = seed
    doc["trace"] = list(outcome.trace)
    return doc


def emit_result(outcome: SolveOutcome, fmt: str = "json", **kw) -> bytes:
    """Serialize a solve outcome; only JSON carries full fidelity."""
    if fmt != "json":
        raise RiskrayError(f"unsupported result format {fmt!r}")
    return (jsonify(outcome_to_dict(outcome, **kw)) + "\n").encode()


# ---------------------------------------------------------------------------
# OFF meshes (d = 3)

def off_string(poly: Polytope) -> str:
    """OFF mesh of a 3-D polytope, facet vertices in cyclic order."""
    if poly.dim != 3:
        raise RiskrayError("OFF export is defined for d=3 polytopes")
    if poly.degenerate or not poly.facets:
        raise RiskrayError("OFF export needs a full-dimensional polytope")
    buf = _io.StringIO()
    buf.write("OFF\n")
    n_edges = sum(len(f.vertex_ids) for f in poly.facets) // 2
    buf.write(f"{poly.n_vertices} {poly.n_facets} {n_edges}\n")
    for v in poly.vertices:
        buf.write(" ".join(_fmt_float(c) for c in v) + "\n")
    for f in poly.facets:
        cycle = _facet_cycle(poly, f)
        buf.write(str(len(cycle)) + " " + " ".join(map(str, cycle)) + "\n")
    return buf.getvalue()


def _facet_cycle(poly: Polytope, facet: Facet) -> list[int]:
    """Order a facet's vertices by angle around the facet centroid."""
    ids = list(facet.vertex_ids)
    pts = poly.vertices[ids]
    center = pts.mean(axis=0)
    n = facet.normal
    # in-plane orthonormal basis
    a = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = np.cross(n, a)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    rel = pts - center
    ang = np.arctan2(rel @ v, rel @ u)
    order = np.argsort(ang)
    return [ids[i] for i in order]
