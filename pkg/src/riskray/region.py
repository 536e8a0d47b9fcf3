"""Weighted-mean trimmed regions: the uncertainty sets of distortion risk.

For a sample ``a^1..a^n`` and an ascending weight vector ``w`` the region
is the convex hull of all weighted means of permuted rows.  Its support
function in direction ``p`` is the w-weighted sum of the ascending-sorted
projections, and the matching weighted permuted mean is an extreme point.
Those two facts give an exact separation oracle, which is how the region
is constructed without touching all n! permutations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ._util import affine_rank, as_matrix, coord_scale, dedup_points, sphere_directions
from .errors import BudgetError, RiskrayError
from .geometry import Polytope, convex_hull
from .weights import WeightVector

EXACT_N_LIMIT = 9          # n! enumeration budget
ORACLE_RTOL = 1e-9         # facet-violation tolerance, relative to scale


@dataclass(frozen=True)
class Sample:
    """An n x d table of observed coefficient/return vectors."""

    rows: np.ndarray

    def __post_init__(self):
        arr = as_matrix(self.rows)
        arr.flags.writeable = False
        object.__setattr__(self, "rows", arr)

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    @property
    def d(self) -> int:
        return int(self.rows.shape[1])

    @property
    def scale(self) -> float:
        return coord_scale(self.rows)

    def mean(self) -> np.ndarray:
        return self.rows.mean(axis=0)


def _rows_of(sample) -> np.ndarray:
    if isinstance(sample, Sample):
        return sample.rows
    return as_matrix(sample)


@dataclass(frozen=True)
class Region:
    """A constructed uncertainty set, with provenance and an exactness flag."""

    polytope: Polytope
    weights: WeightVector
    sample: Sample
    exact: bool
    rounds_used: int = 0
    notes: tuple[str, ...] = ()

    @property
    def degenerate(self) -> bool:
        return self.polytope.degenerate


def support_function(sample, w: WeightVector, p) -> float:
    """Support value of the region in direction ``p``.

    Sum of ``w[j]`` times the (j+1)-th smallest projection of the rows
    onto ``p``.  Positively homogeneous in ``p``, so non-unit directions
    are allowed (the feasibility check relies on that).
    """
    w.require_coherent("support_function")
    rows = _rows_of(sample)
    if rows.shape[0] != w.n:
        raise RiskrayError(f"sample has {rows.shape[0]} rows, weights {w.n}")
    proj = rows @ np.asarray(p, dtype=float)
    return float(np.dot(w.w, np.sort(proj)))


def extreme_point(sample, w: WeightVector, p) -> np.ndarray:
    """Weighted permuted mean maximizing the projection onto ``p``.

    Ties in the projections are broken by original row index (stable
    sort), so tie directions return a deterministic boundary point.
    """
    w.require_coherent("extreme_point")
    rows = _rows_of(sample)
    if rows.shape[0] != w.n:
        raise RiskrayError(f"sample has {rows.shape[0]} rows, weights {w.n}")
    proj = rows @ np.asarray(p, dtype=float)
    order = np.argsort(proj, kind="stable")
    return w.w @ rows[order]


def extreme_points_batch(rows: np.ndarray, w: np.ndarray, directions: np.ndarray,
                         chunk: int = 64) -> np.ndarray:
    """Extreme points for many directions, chunked to bound memory."""
    m = directions.shape[0]
    out = np.empty((m, rows.shape[1]))
    for start in range(0, m, chunk):
        dirs = directions[start:start + chunk]
        proj = rows @ dirs.T                       # (n, m_chunk)
        order = np.argsort(proj, axis=0, kind="stable")
        gathered = rows[order]                     # (n, m_chunk, d)
        out[start:start + chunk] = np.einsum("j,jmd->md", w, gathered)
    return out


def region_exact(sample, w: WeightVector) -> Region:
    """Region by full permutation enumeration (n <= 9).

    Enumerates every weighted permuted mean, deduplicates and hulls.
    The budget error points big instances to ``region_support_oracle``.
    """
    w.require_coherent("region_exact")
    smp = sample if isinstance(sample, Sample) else Sample(sample)
    if smp.n != w.n:
        raise RiskrayError(f"sample has {smp.n} rows, weights {w.n}")
    if smp.n > EXACT_N_LIMIT:
        raise BudgetError(
            f"n={smp.n} exceeds the n! budget (n <= {EXACT_N_LIMIT}); "
            "use region_support_oracle instead"
        )
    rows = smp.rows
    perms = np.array(list(itertools.permutations(range(smp.n))), dtype=np.intp)
    points = np.empty((perms.shape[0], smp.d))
    step = 100_000
    for start in range(0, perms.shape[0], step):
        block = perms[start:start + step]
        points[start:start + step] = np.einsum("j,pjd->pd", w.w, rows[block])
    points = dedup_points(points, 1e-9 * smp.scale)
    poly = convex_hull(points)
    return Region(poly, w, smp, exact=True)


def region_support_oracle(sample, w: WeightVector, max_rounds: int = 100,
                          seed: int = 0, n_seed_dirs: int | None = None) -> Region:
    """Region by support-oracle hull refinement.

    Seeds vertices with extreme points along the +-axis directions plus
    random ones, then repeatedly hulls and queries the extreme-point
    oracle along each facet's outward normal.  A facet violated by more
    than 1e-9 * scale gets the oracle point added; termination with no
    violated facet certifies the region exactly.  Exhausting
    ``max_rounds`` returns the current inner approximation flagged
    inexact.
    """
    w.require_coherent("region_support_oracle")
    smp = sample if isinstance(sample, Sample) else Sample(sample)
    if smp.n != w.n:
        raise RiskrayError(f"sample has {smp.n} rows, weights {w.n}")
    rows = smp.rows
    d = smp.d
    scale = smp.scale
    tol = ORACLE_RTOL * scale
    notes = []

    if n_seed_dirs is None:
        n_seed_dirs = max(2 * d, 8)
    seed_dirs = sphere_directions(d, n_seed_dirs, seed=seed, include_axes=True)
    points = extreme_points_batch(rows, w.w, seed_dirs)
    points = dedup_points(points, tol)

    points, flat = probe_flat_directions(rows, w, points, tol)
    if flat:
        poly = convex_hull(points)
        notes.append(
            f"degenerate region (affine dim {poly.affine_dim} < {d}): "
            "vertex-only representation, flatness certified by support widths"
        )
        # the support-width certificate makes the vertex set authoritative
        # only for zero-dimensional regions; wider flats stay uncertified
        exact = poly.affine_dim == 0
        return Region(poly, w, smp, exact=exact, rounds_used=0,
                      notes=tuple(notes))

    if d == 1:
        lo = -support_function(rows, w, np.array([-1.0]))
        hi = support_function(rows, w, np.array([1.0]))
        poly = convex_hull(np.array([[lo], [hi]]))
        return Region(poly, w, smp, exact=True, rounds_used=1)

    try:
        hull = ConvexHull(points, incremental=True)
    except QhullError as exc:
        raise RiskrayError(f"hull seeding failed: {exc}") from exc

    cache: dict[tuple, tuple[float, np.ndarray]] = {}
    exact = False
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        eqs = np.unique(np.round(hull.equations, 12), axis=0)
        keys = [tuple(e) for e in eqs]
        fresh = [k for k in keys if k not in cache]
        if fresh:
            dirs = np.array([k[:-1] for k in fresh])
            eps = extreme_points_batch(rows, w.w, dirs)
            sup = np.einsum("md,md->m", eps, dirs)
            for k, e, s in zip(fresh, eps, sup):
                cache[k] = (float(s), e)
        new_pts = []
        for k in keys:
            s, ep = cache[k]
            # qhull plane: n.x + off <= 0 inside; violation means ep beyond
            if s + k[-1] > tol:
                new_pts.append(ep)
        if not new_pts:
            exact = True
            break
        new_pts = dedup_points(np.asarray(new_pts), tol)
        before = hull.points.shape[0]
        fresh_mask = ~_already_present(hull.points, new_pts, tol)
        if not np.any(fresh_mask):
            notes.append("oracle points collided with existing vertices")
            break
        hull.add_points(new_pts[fresh_mask])
        if hull.points.shape[0] == before:
            break
    hull.close()

    poly = convex_hull(hull.points[hull.vertices])
    if not exact:
        notes.append(f"round budget ({max_rounds}) exhausted; region is an "
                     "inner approximation")
    return Region(poly, w, smp, exact=exact, rounds_used=rounds,
                  notes=tuple(notes))


def _already_present(existing: np.ndarray, candidates: np.ndarray,
                     tol: float) -> np.ndarray:
    """Mask of candidate rows that already occur in ``existing`` within tol."""
    keys = set(map(tuple, np.round(existing / max(tol, 1e-300)).astype(np.int64)))
    cand = np.round(candidates / max(tol, 1e-300)).astype(np.int64)
    return np.array([tuple(c) in keys for c in cand])


def probe_flat_directions(rows: np.ndarray, w: WeightVector,
                          points: np.ndarray, tol: float,
                          max_tries: int = 8) -> tuple[np.ndarray, bool]:
    """Grow a flat extreme-point set along its missing directions.

    While the collected points do not span the ambient space, query the
    oracle along the null directions of their affine hull.  The
    support function gives an exact width certificate: if the region's
    width along every missing direction is within tolerance, the region
    itself is flat and (points, True) is returned; otherwise the
    width-realizing extreme points are added and (points, False) comes
    back once full dimension is reached.
    """
    d = rows.shape[1]
    for _ in range(max_tries):
        if affine_rank(points) >= d:
            return points, False
        center = points.mean(axis=0)
        _, _, vt = np.linalg.svd(points - center, full_matrices=True)
        adim = affine_rank(points)
        null_basis = vt[adim:]
        widths = []
        probes = []
        for v in null_basis:
            h_pos = support_function(rows, w, v)
            h_neg = support_function(rows, w, -v)
            widths.append(h_pos + h_neg)       # extent of the region along v
            probes.append(v)
            probes.append(-v)
        if max(widths) <= tol:
            return points, True
        new_pts = extreme_points_batch(rows, w.w, np.asarray(probes))
        merged = dedup_points(np.vstack([points, new_pts]), tol)
        if merged.shape[0] == points.shape[0]:
            return points, True
        points = merged
    return points, affine_rank(points) < d
