"""Robust linear programs over weighted-mean uncertainty regions.

Solves ``min c.x  s.t.  a.x >= b for every a in U`` where U is the
uncertainty region of a coherent distortion risk constraint.  The finite
case reduces to intersecting the ray through ``c`` with the region's
efficient facet set: the crossing plane certifies the optimal value and
its inward normal, scaled by ``b/intercept``, attains it.

Status semantics (certified against an LP oracle in the test suite):

* ``none``      - infeasible; only possible for b > 0, exactly when the
                  origin lies in U.
* ``infinite``  - unbounded; the ray through ``c`` misses U, i.e. ``c``
                  is outside the cone spanned by U.
* ``finite``    - the ray crosses the efficient surface; for b > 0 the
                  entry facet carries the optimum (arg max of the plane
                  crossings), for b < 0 the exit facet does (arg min).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._util import affine_rank, coord_scale, sphere_directions
from .errors import DegeneracyError, RiskrayError
from .geometry import Facet, Polytope, contains, convex_hull
from .region import (Region, Sample, extreme_point, extreme_points_batch,
                     region_support_oracle, support_function)
from .weights import WeightVector

INTERCEPT_TOL = 1e-12      # efficient-set sign cut on facet intercepts
RAY_PARALLEL_TOL = 1e-12   # |u.n| below this counts as parallel to the facet
MARGIN_RTOL = 1e-8         # feasibility certificate, relative to scale


@dataclass(frozen=True)
class RobustLP:
    """One robust LP instance: goal, right-hand side and region source."""

    c: np.ndarray
    b: float
    region: Region | None = None
    sample: Sample | None = None
    weights: WeightVector | None = None
    nonneg: bool = False
    maximize: bool = False

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if not np.all(np.isfinite(c)) or np.linalg.norm(c) <= 0.0:
            raise RiskrayError("goal vector c must be finite and nonzero")
        c.flags.writeable = False
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", float(self.b))
        if self.region is None and self.sample is None:
            raise RiskrayError("RobustLP needs a region or a sample source")
        if self.region is None and self.weights is None:
            raise RiskrayError("sample-sourced RobustLP needs weights")

    def transformed(self) -> "RobustLP":
        """Negate goal, right-hand side and data; flip the max/min sense."""
        region = None
        if self.region is not None:
            region = Region(
                self.region.polytope.negated(),
                self.region.weights,
                Sample(-self.region.sample.rows),
                self.region.exact,
                self.region.rounds_used,
                self.region.notes,
            )
        sample = Sample(-self.sample.rows) if self.sample is not None else None
        return replace(self, c=-self.c, b=-self.b, region=region,
                       sample=sample, maximize=not self.maximize)


def transform_max(c, b, sample=None, region: Region | None = None,
                  weights: WeightVector | None = None,
                  nonneg: bool = False) -> RobustLP:
    """Rewrite ``max c.x s.t. a.x <= b for all a`` as a min-form RobustLP.

    Negates goal, right-hand side and the data; the optimal point is
    unchanged and the original maximum is minus the min-form value
    (``SolveOutcome.objective_value`` reports it mapped back).
    """
    smp = None
    if sample is not None:
        smp = sample if isinstance(sample, Sample) else Sample(sample)
    lp = RobustLP(c=c, b=b, region=region, sample=smp, weights=weights,
                  nonneg=nonneg, maximize=False)
    return lp.transformed()


@dataclass(frozen=True)
class SolveOutcome:
    """Tagged result of a robust LP solve."""

    status: str                       # finite | infinite | none
    x_star: np.ndarray | None = None
    value: float | None = None        # min-form value c.x_star
    active_facet: Facet | None = None
    active_index: int | None = None
    lambda_star: float | None = None
    margin: float | None = None
    iterations: int = 0
    certified: bool = True
    maximized: bool = False
    trace: tuple[str, ...] = field(default_factory=tuple)

    @property
    def objective_value(self) -> float | None:
        """Value in the caller's original sense (negated for max-form)."""
        if self.value is None:
            return None
        return -self.value if self.maximized else self.value


def feasibility_margin(sample, w: WeightVector, x, b: float) -> float:
    """Worst-case slack of ``a.x >= b`` over the whole region.

    Equals ``min_{a in U} a.x - b`` computed straight from the support
    function, so no region construction is needed; nonnegative iff ``x``
    is feasible for every a in U.
    """
    x = np.asarray(x, dtype=float)
    return -support_function(sample, w, -x) - float(b)


def _efficient_indices(poly: Polytope, b: float) -> np.ndarray:
    d = poly.intercepts()
    if b < 0:
        return np.flatnonzero(d <= INTERCEPT_TOL)
    return np.flatnonzero(d >= -INTERCEPT_TOL)


def efficient_set(region: Region, b_sign: float) -> list[Facet]:
    """Facets able to carry the optimum for the given sign of b.

    For b >= 0 these are the facets visible from the origin (intercept
    >= 0); for b < 0 the invisible ones (intercept <= 0).
    """
    poly = region.polytope
    if poly.degenerate:
        raise DegeneracyError(
            f"efficient set needs a full-dimensional region "
            f"(affine dim {poly.affine_dim} < {poly.dim})",
            affine_dim=poly.affine_dim, dim=poly.dim,
        )
    idx = _efficient_indices(poly, float(b_sign))
    return [poly.facets[i] for i in idx]


def _ray_hits_polytope(poly: Polytope, u: np.ndarray, tol: float) -> bool:
    """Does {lam * u : lam >= 0} meet the polytope? (slab clipping)"""
    s = poly.normals() @ u
    d = poly.intercepts()
    lo, hi = 0.0, math.inf
    par = np.abs(s) <= RAY_PARALLEL_TOL * max(1.0, float(np.linalg.norm(u)))
    if np.any(d[par] > tol):
        return False
    pos = (~par) & (s > 0)
    neg = (~par) & (s < 0)
    if np.any(pos):
        lo = max(lo, float(np.max(d[pos] / s[pos])))
    if np.any(neg):
        hi = float(np.min(d[neg] / s[neg]))
    return lo <= hi + tol


def _ray_search(poly: Polytope, cand: np.ndarray, u: np.ndarray, b: float,
                tol: float, trace: list[str]):
    """Plane crossings lam_j = d_j / (u.n_j) over candidate facets.

    Picks arg max for b > 0 (entry crossing) or arg min for b < 0 (exit
    crossing), breaking near-ties by lowest canonical facet index, then
    verifies the crossing point really lies on the region.  Returns
    (facet index, lambda) or None when the ray misses.
    """
    if cand.size == 0:
        trace.append("no candidate facets")
        return None
    normals = poly.normals()[cand]
    inter = poly.intercepts()[cand]
    s = normals @ u
    usable = np.abs(s) > RAY_PARALLEL_TOL * max(1.0, float(np.linalg.norm(u)))
    lam = np.full(cand.size, np.nan)
    lam[usable] = inter[usable] / s[usable]
    positive = usable & (lam > 0)
    if not np.any(positive):
        trace.append("no positive plane crossing on this ray")
        return None
    lam_pos = np.where(positive, lam, np.nan)
    lam_star = float(np.nanmax(lam_pos) if b > 0 else np.nanmin(lam_pos))
    ties = np.flatnonzero(positive
                          & (np.abs(lam - lam_star) <= 1e-9 * max(1.0, abs(lam_star))))
    values = b / lam[ties]
    if values.size > 1:
        spread = float(np.max(values) - np.min(values))
        if spread > 1e-7 * max(1.0, float(np.abs(values).max())):
            raise RiskrayError(
                f"tied crossings disagree on the objective (spread {spread})"
            )
        trace.append(f"tie across {ties.size} facets; lowest index wins")
    j_local = int(ties[0])
    j_star = int(cand[j_local])
    crossing = lam[j_local] * u
    if not contains(poly, crossing, tol):
        trace.append(
            f"crossing of facet {j_star} at lambda={lam[j_local]:.6g} lies "
            "outside the region; ray misses the efficient surface"
        )
        return None
    return j_star, float(lam[j_local])


def solve_ray(lp: RobustLP) -> SolveOutcome:
    """Ray-intersection solve on a materialized region.

    Implements the geometric algorithm: efficient-facet selection by the
    sign of b (optionally restricted to nonnegative normals), plane
    crossings along the ray through ``c``, arg max / arg min selection,
    and the none/infinite special cases.  The optimum, when finite, is
    ``x* = (b / d_j*) n_j*`` on the selected facet.
    """
    if lp.region is None:
        raise RiskrayError("solve_ray needs a materialized region")
    region = lp.region
    poly = region.polytope
    if poly.degenerate:
        raise DegeneracyError(
            f"solve_ray needs a full-dimensional region (affine dim "
            f"{poly.affine_dim} < {poly.dim}); the sample does not span "
            "all coordinates",
            affine_dim=poly.affine_dim, dim=poly.dim,
        )
    c, b = lp.c, lp.b
    if c.size != poly.dim:
        raise RiskrayError(f"goal has dim {c.size}, region has {poly.dim}")
    scale = max(abs(b), poly.scale)
    tol = 1e-9 * scale
    certified = region.exact
    trace: list[str] = []
    if not certified:
        trace.append("region is inexact; outcome not certified")

    def _final(**kw):
        kw.setdefault("certified", certified)
        kw.setdefault("maximized", lp.maximize)
        kw.setdefault("trace", tuple(trace))
        return SolveOutcome(**kw)

    if b == 0.0:
        if _ray_hits_polytope(poly, c, tol):
            trace.append("b=0: ray meets the region; optimum at the origin")
            return _final(status="finite", x_star=np.zeros(poly.dim),
                          value=0.0, margin=0.0)
        trace.append("b=0: ray misses the region")
        return _final(status="infinite")

    if b > 0 and contains(poly, np.zeros(poly.dim), tol):
        trace.append("origin inside the region: constraints are infeasible")
        return _final(status="none")

    cand = _efficient_indices(poly, b)
    trace.append(f"{cand.size} efficient facets for b {'>' if b > 0 else '<'} 0")
    if lp.nonneg:
        normals = poly.normals()
        keep = np.all(normals[cand] >= -INTERCEPT_TOL, axis=1)
        cand = cand[keep]
        trace.append(f"nonnegative-normal filter keeps {cand.size} facets")

    hit = _ray_search(poly, cand, c, b, tol, trace)
    if hit is None and b > 0:
        trace.append("retrying with the opposite ray")
        opposite = _ray_search(poly, cand, -c, b, tol, trace)
        if opposite is not None:
            # The region sits on the -c side: c is still outside its cone,
            # so the minimum is unbounded; keep the crossing as diagnostic.
            trace.append(
                f"opposite ray crosses facet {opposite[0]}: the goal points "
                "away from the region; minimum unbounded"
            )
        hit = None
    if hit is None:
        return _final(status="infinite")

    j_star, lam_star = hit
    facet = poly.facets[j_star]
    x_star = (b / facet.intercept) * facet.normal
    value = float(c @ x_star)
    margin = None
    if region.sample is not None and region.weights is not None:
        margin = feasibility_margin(region.sample, region.weights, x_star, b)
    trace.append(f"active facet {j_star}, lambda*={lam_star:.6g}")
    return _final(status="finite", x_star=x_star, value=value,
                  active_facet=facet, active_index=j_star,
                  lambda_star=lam_star, margin=margin)


def _point_region_solve(lp: RobustLP, u: np.ndarray, scale: float) -> SolveOutcome:
    """Closed form when the region is the single point ``u``."""
    c, b = lp.c, lp.b
    trace = [f"region is the single point {u.tolist()}"]
    nu = float(u @ u)
    if nu <= (1e-12 * scale) ** 2:
        if b > 0:
            return SolveOutcome(status="none", maximized=lp.maximize,
                                trace=tuple(trace))
        return SolveOutcome(status="infinite", maximized=lp.maximize,
                            trace=tuple(trace))
    t = float(c @ u) / nu
    aligned = np.linalg.norm(c - t * u) <= 1e-9 * max(1.0, np.linalg.norm(c))
    if aligned and t > 0:
        x_star = b * u / nu
        facet = Facet(u / math.sqrt(nu), math.sqrt(nu), (0,), ())
        return SolveOutcome(status="finite", x_star=x_star,
                            value=float(c @ x_star), active_facet=facet,
                            active_index=0, lambda_star=float(np.linalg.norm(c)
                                                              / math.sqrt(nu)),
                            margin=0.0, maximized=lp.maximize,
                            trace=tuple(trace))
    trace.append("goal not positively aligned with the single constraint")
    return SolveOutcome(status="infinite", maximized=lp.maximize,
                        trace=tuple(trace))


def solve_iterative(lp: RobustLP, max_rounds: int | None = None,
                    seed: int = 0) -> SolveOutcome:
    """Cut-generation solve straight from the sample.

    Keeps a working set of region extreme points, solves the ray problem
    on their hull (a relaxation: fewer constraint vectors means a larger
    feasible set) and, while the candidate optimum violates the exact
    support-function feasibility check, adds the most violating region
    point.  Optimality at termination follows from the relaxation value
    matching a feasible point.  Non-finite statuses are confirmed on the
    fully constructed region before being reported.
    """
    if lp.sample is None or lp.weights is None:
        raise RiskrayError("solve_iterative needs a sample and weights")
    lp.weights.require_coherent("solve_iterative")
    rows = lp.sample.rows
    n, d = rows.shape
    if lp.c.size != d:
        raise RiskrayError(f"goal has dim {lp.c.size}, sample has {d}")
    scale = max(abs(lp.b), coord_scale(rows))
    if max_rounds is None:
        max_rounds = int(math.ceil(10 * d * math.sqrt(n))) + 10

    c_unit = lp.c / np.linalg.norm(lp.c)
    seed_dirs = np.vstack([c_unit, -c_unit, np.eye(d), -np.eye(d)])
    points = extreme_points_batch(rows, lp.weights.w, seed_dirs)
    points = _dedup(points, 1e-9 * scale)

    if points.shape[0] == 1 and affine_rank(rows) == 0:
        return _point_region_solve(lp, points[0], scale)

    tries = 0
    while affine_rank(points) < d and tries < 5:
        extra = sphere_directions(d, 8 * (tries + 1), seed=seed + 23 + tries)
        points = np.vstack([points,
                            extreme_points_batch(rows, lp.weights.w, extra)])
        points = _dedup(points, 1e-9 * scale)
        tries += 1
    if affine_rank(points) < d:
        if points.shape[0] == 1:
            return _point_region_solve(lp, points[0], scale)
        adim = affine_rank(rows)
        raise DegeneracyError(
            f"region is flat (affine dim {min(affine_rank(points), adim)} < {d}); "
            "the sample does not span all coordinates",
            affine_dim=adim, dim=d,
        )

    trace: list[str] = []
    margin_tol = MARGIN_RTOL * scale
    enrich_fails = 0
    last_outcome = None
    for rounds in range(1, max_rounds + 1):
        inner_poly = convex_hull(points)
        inner = Region(inner_poly, lp.weights, lp.sample, exact=False,
                       notes=("inner approximation",))
        out = solve_ray(replace(lp, region=inner, sample=None))
        last_outcome = out

        if out.status == "none":
            # origin inside the inner hull, hence inside the full region
            trace.append(f"round {rounds}: origin inside inner hull")
            return replace(out, certified=True, iterations=rounds,
                           trace=tuple(trace) + out.trace)

        if out.status == "finite":
            margin = feasibility_margin(lp.sample, lp.weights, out.x_star, lp.b)
            if margin >= -margin_tol:
                trace.append(f"round {rounds}: margin {margin:.3e} certifies "
                             "feasibility")
                return replace(out, certified=True, margin=margin,
                               iterations=rounds,
                               trace=tuple(trace) + out.trace)
            cut_dir = -out.x_star / max(np.linalg.norm(out.x_star), 1e-300)
            new_pt = extreme_point(lp.sample, lp.weights, cut_dir)
            grown = _grow(points, new_pt[None, :], 1e-9 * scale)
            if grown is None:
                extra = sphere_directions(d, 8, seed=seed + 101 + rounds)
                grown = _grow(points, extreme_points_batch(
                    rows, lp.weights.w, extra), 1e-9 * scale)
            if grown is None:
                trace.append(f"round {rounds}: cuts stopped making progress")
                break
            points = grown
            continue

        # infinite on the relaxation: the inner cone may be too small
        extra = np.vstack([
            sphere_directions(d, 8 + 4 * enrich_fails, seed=seed + 57 + rounds),
            c_unit[None, :], -c_unit[None, :],
        ])
        grown = _grow(points, extreme_points_batch(rows, lp.weights.w, extra),
                      1e-9 * scale)
        if grown is None:
            enrich_fails += 1
            if enrich_fails >= 3:
                trace.append(f"round {rounds}: working set stopped growing")
                break
        else:
            points = grown

    # confirmation pass on the fully constructed region
    trace.append("confirming on the fully constructed region")
    full = region_support_oracle(lp.sample, lp.weights, seed=seed)
    out = solve_ray(replace(lp, region=full, sample=None))
    return replace(out, iterations=max_rounds, trace=tuple(trace) + out.trace)


def _dedup(points: np.ndarray, tol: float) -> np.ndarray:
    from ._util import dedup_points
    return dedup_points(points, tol)


def _grow(points: np.ndarray, new: np.ndarray, tol: float):
    """Append genuinely new rows; None when nothing new was added."""
    merged = _dedup(np.vstack([points, new]), tol)
    if merged.shape[0] == points.shape[0]:
        return None
    return merged
