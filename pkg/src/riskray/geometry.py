"""Dimension-generic convex polytope primitives.

Polytopes are held in a dual representation: the extreme points plus
facets with *inward* unit normals, so the body is the intersection of
halfspaces ``{a : normal . a >= intercept}``.  Hulls are computed by
qhull (via scipy) and the triangulated output is merged back into
proper facets, because weighted-mean regions produce many coplanar
candidate points by construction.

Flat inputs (affine dimension below the ambient one) yield a flagged
vertex-only polytope instead of an error; consumers that need facets
decide how to react.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ._util import affine_rank, as_matrix, coord_scale, dedup_points
from .errors import DegeneracyError, RiskrayError

COPLANAR_RTOL = 1e-9   # facet-merge tolerance, relative to data scale
VERTEX_RTOL = 1e-9     # duplicate-vertex tolerance, relative to data scale


@dataclass(frozen=True)
class Facet:
    """One facet of a full-dimensional polytope.

    ``normal`` is the inward unit normal: every point ``a`` of the body
    satisfies ``normal . a >= intercept``, with equality exactly on the
    facet's ``vertex_ids``.  ``neighbor_ids`` are the facets sharing a
    ridge with this one.
    """

    normal: np.ndarray
    intercept: float
    vertex_ids: tuple[int, ...]
    neighbor_ids: tuple[int, ...]

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(-1)
        norm = float(np.linalg.norm(n))
        if abs(norm - 1.0) > 1e-9:
            raise RiskrayError("facet normal must be a unit vector")
        n = n / norm
        n.flags.writeable = False
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "intercept", float(self.intercept))


@dataclass(frozen=True)
class Polytope:
    """Convex polytope as extreme points plus inward-normal facets."""

    vertices: np.ndarray
    facets: tuple[Facet, ...]
    dim: int
    affine_dim: int

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "facets", tuple(self.facets))

    @property
    def degenerate(self) -> bool:
        return self.affine_dim < self.dim

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_facets(self) -> int:
        return len(self.facets)

    @property
    def scale(self) -> float:
        return coord_scale(self.vertices)

    def normals(self) -> np.ndarray:
        """Facet normals stacked as an (F, d) array."""
        if not self.facets:
            return np.zeros((0, self.dim))
        return np.vstack([f.normal for f in self.facets])

    def intercepts(self) -> np.ndarray:
        return np.array([f.intercept for f in self.facets])

    def support(self, p) -> float:
        """Support function h(p) = max over vertices of p . v."""
        return float(np.max(self.vertices @ np.asarray(p, dtype=float)))

    def support_batch(self, directions) -> np.ndarray:
        """Support values for many directions at once, shape (m,)."""
        dirs = np.asarray(directions, dtype=float)
        return np.max(dirs @ self.vertices.T, axis=1)

    def negated(self) -> "Polytope":
        """The point reflection -P, with facets remapped exactly."""
        flipped = [
            Facet(-f.normal, f.intercept, f.vertex_ids, f.neighbor_ids)
            for f in self.facets
        ]
        verts = -self.vertices
        return _canonicalize(verts, flipped, self.dim, self.affine_dim)


def convex_hull(points) -> Polytope:
    """Convex hull with merged facets and adjacency.

    Duplicates and interior points are removed; the result's vertices
    are exactly the extreme points of the input.  Inputs whose affine
    hull is lower-dimensional come back as a flagged vertex-only
    polytope with no facets.
    """
    pts = as_matrix(points)
    d = pts.shape[1]
    scale = coord_scale(pts)
    pts = dedup_points(pts, VERTEX_RTOL * scale)
    adim = affine_rank(pts)

    if adim == 0:
        return Polytope(pts[:1], (), d, 0)
    if adim < d:
        return _degenerate_hull(pts, d, adim)
    if d == 1:
        return _hull_1d(pts)
    return _hull_qhull(pts, d, scale)


def _degenerate_hull(pts: np.ndarray, d: int, adim: int) -> Polytope:
    """Extreme points of a flat set, found inside its affine hull."""
    center = pts.mean(axis=0)
    centered = pts - center
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    basis = vt[:adim]
    projected = centered @ basis.T
    if adim == 1:
        coords = projected[:, 0]
        ids = [int(np.argmin(coords)), int(np.argmax(coords))]
        verts = pts[ids]
    else:
        sub = convex_hull(projected)
        # recover original-coordinate vertices by matching projections
        back = sub.vertices @ basis + center
        verts = back
    verts = dedup_points(verts, VERTEX_RTOL * coord_scale(pts))
    order = np.lexsort(verts.T[::-1])
    return Polytope(verts[order], (), d, adim)


def _hull_1d(pts: np.ndarray) -> Polytope:
    lo, hi = float(np.min(pts)), float(np.max(pts))
    verts = np.array([[lo], [hi]])
    facets = (
        Facet(np.array([1.0]), lo, (0,), (1,)),
        Facet(np.array([-1.0]), -hi, (1,), (0,)),
    )
    return _canonicalize(verts, list(facets), 1, 1)


def _hull_qhull(pts: np.ndarray, d: int, scale: float) -> Polytope:
    try:
        hull = ConvexHull(pts)
    except QhullError:
        # borderline-flat input that slipped past the rank cut
        adim = affine_rank(pts, rtol=1e-7)
        if adim < d:
            return _degenerate_hull(pts, d, adim)
        hull = ConvexHull(pts, qhull_options="QJ")

    vert_ids = np.array(sorted(hull.vertices))
    verts = pts[vert_ids]
    groups, normals, offsets = _merge_coplanar(hull, scale)
    interior = verts.mean(axis=0)

    facets = []
    adjacency = []
    for gi, members in enumerate(groups):
        n = normals[gi]
        dj = offsets[gi]
        if float(n @ interior) < dj:            # orient inward
            n, dj = -n, -dj
        on_plane = np.abs(verts @ n - dj) <= COPLANAR_RTOL * scale * 10
        vids = tuple(int(i) for i in np.flatnonzero(on_plane))
        facets.append(Facet(n, dj, vids, ()))
        adjacency.append(set())

    simplex_group = _simplex_groups(groups, hull.simplices.shape[0])
    for si, nbrs in enumerate(hull.neighbors):
        for nj in nbrs:
            a, b = simplex_group[si], simplex_group[nj]
            if a != b:
                adjacency[a].add(b)
                adjacency[b].add(a)
    facets = [
        Facet(f.normal, f.intercept, f.vertex_ids, tuple(sorted(adjacency[i])))
        for i, f in enumerate(facets)
    ]
    return _canonicalize(verts, facets, d, d)


def _merge_coplanar(hull: ConvexHull, scale: float):
    """Union-find over adjacent qhull simplices with matching planes."""
    eq = hull.equations                    # outward: n.x + off <= 0 inside
    m = eq.shape[0]
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tol = COPLANAR_RTOL * max(scale, 1.0)
    for si in range(m):
        for nj in hull.neighbors[si]:
            if nj < 0 or nj <= si:
                continue
            if (np.max(np.abs(eq[si, :-1] - eq[nj, :-1])) <= 1e-7
                    and abs(eq[si, -1] - eq[nj, -1]) <= tol):
                ra, rb = find(si), find(nj)
                if ra != rb:
                    parent[rb] = ra

    roots = {}
    groups = []
    for si in range(m):
        r = find(si)
        if r not in roots:
            roots[r] = len(groups)
            groups.append([])
        groups[roots[r]].append(si)

    normals = []
    offsets = []
    for members in groups:
        n_out = eq[members, :-1].mean(axis=0)
        n_out /= np.linalg.norm(n_out)
        n_in = -n_out
        # intercept from the member vertices for best accuracy
        vids = np.unique(hull.simplices[members])
        dj = float(np.mean(hull.points[vids] @ n_in))
        normals.append(n_in)
        offsets.append(dj)
    return groups, normals, offsets


def _simplex_groups(groups, n_simplices):
    out = np.empty(n_simplices, dtype=int)
    for gi, members in enumerate(groups):
        out[members] = gi
    return out


def _canonicalize(verts: np.ndarray, facets: list[Facet], d: int,
                  adim: int) -> Polytope:
    """Sort vertices and facets into a reproducible order and remap ids.

    Vertices ascend lexicographically; facets descend lexicographically
    by normal (then intercept), which fixes deterministic tie-breaking
    downstream.
    """
    v_order = np.lexsort(verts.T[::-1])
    v_rank = np.empty(len(v_order), dtype=int)
    v_rank[v_order] = np.arange(len(v_order))
    verts_sorted = verts[v_order]

    if facets:
        keys = np.array([np.concatenate([f.normal, [f.intercept]]) for f in facets])
        f_order = np.lexsort(np.round(-keys, 12).T[::-1])
        f_rank = np.empty(len(f_order), dtype=int)
        f_rank[f_order] = np.arange(len(f_order))
        new_facets = []
        for fi in f_order:
            f = facets[fi]
            new_facets.append(Facet(
                f.normal,
                f.intercept,
                tuple(sorted(int(v_rank[v]) for v in f.vertex_ids)),
                tuple(sorted(int(f_rank[nb]) for nb in f.neighbor_ids)),
            ))
        facets_sorted = tuple(new_facets)
    else:
        facets_sorted = ()
    return Polytope(verts_sorted, facets_sorted, d, adim)


def contains(poly: Polytope, x, tol: float) -> bool:
    """Halfspace membership test: inward-normal slack at least -tol everywhere."""
    if poly.degenerate:
        raise DegeneracyError(
            f"containment needs a full-dimensional polytope "
            f"(affine dim {poly.affine_dim} < {poly.dim})",
            affine_dim=poly.affine_dim, dim=poly.dim,
        )
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != poly.dim:
        raise RiskrayError(f"point has dim {x.size}, polytope has {poly.dim}")
    return bool(np.all(poly.normals() @ x >= poly.intercepts() - tol))


def hausdorff_estimate(a: Polytope, b: Polytope, directions) -> float:
    """Support-based lower bound of the Hausdorff distance.

    Max over the supplied unit directions of |h_a(p) - h_b(p)|; exact in
    the limit of dense directions.  Works for vertex-only (degenerate)
    polytopes as well.
    """
    if a.dim != b.dim:
        raise RiskrayError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.n_vertices == 0 or b.n_vertices == 0:
        raise RiskrayError("polytopes must be nonempty")
    dirs = np.asarray(directions, dtype=float)
    if dirs.ndim != 2 or dirs.shape[0] < 1 or dirs.shape[1] != a.dim:
        raise RiskrayError("directions must be a nonempty (m, d) array")
    return float(np.max(np.abs(a.support_batch(dirs) - b.support_batch(dirs))))
