"""Statistical consistency and runtime-scaling experiments.

Sample uncertainty regions converge (Hausdorff) to the population one
as the sample grows; the experiments here measure that empirically by
comparing support functions of regions built from increasing samples
against a large-sample reference region, on a fixed direction set.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from ._util import sphere_directions
from .errors import RiskrayError
from .geometry import hausdorff_estimate
from .region import Sample, region_support_oracle
from .solver import RobustLP, solve_iterative
from .weights import DistortionSpec, make_weights_named


@dataclass(frozen=True)
class DistributionSpec:
    """Seeded generator of i.i.d. coefficient vectors."""

    kind: str                       # uniform_box | gaussian | mixture | point_mass
    seed: int = 0
    bounds: tuple | None = None     # uniform_box: ((lo, hi), ...) per coordinate
    mean: tuple | None = None       # gaussian
    cov: tuple | None = None        # gaussian
    components: tuple | None = None  # mixture: DistributionSpecs
    weights: tuple | None = None    # mixture: simplex weights
    point: tuple | None = None      # point_mass

    def __post_init__(self):
        if self.kind == "uniform_box":
            b = np.asarray(self.bounds, dtype=float)
            if b.ndim != 2 or b.shape[1] != 2 or np.any(b[:, 0] > b[:, 1]):
                raise RiskrayError("uniform_box needs per-coordinate (lo, hi) pairs")
            object.__setattr__(self, "bounds", tuple(map(tuple, b)))
        elif self.kind == "gaussian":
            m = np.asarray(self.mean, dtype=float)
            c = np.asarray(self.cov, dtype=float)
            if c.shape != (m.size, m.size):
                raise RiskrayError("covariance shape must match the mean")
            if np.max(np.abs(c - c.T)) > 1e-9:
                raise RiskrayError("covariance must be symmetric")
            if np.min(np.linalg.eigvalsh((c + c.T) / 2)) < -1e-9:
                raise RiskrayError("covariance must be positive semidefinite")
            object.__setattr__(self, "mean", tuple(m))
            object.__setattr__(self, "cov", tuple(map(tuple, c)))
        elif self.kind == "mixture":
            if not self.components:
                raise RiskrayError("mixture needs components")
            wts = np.asarray(self.weights, dtype=float)
            if wts.size != len(self.components) or np.any(wts < 0) \
                    or abs(wts.sum() - 1.0) > 1e-9:
                raise RiskrayError("mixture weights must lie on the simplex")
            object.__setattr__(self, "weights", tuple(wts))
            object.__setattr__(self, "components", tuple(self.components))
        elif self.kind == "point_mass":
            object.__setattr__(self, "point",
                               tuple(np.asarray(self.point, dtype=float)))
        else:
            raise RiskrayError(f"unknown distribution kind {self.kind!r}")

    @property
    def dim(self) -> int:
        if self.kind == "uniform_box":
            return len(self.bounds)
        if self.kind == "gaussian":
            return len(self.mean)
        if self.kind == "mixture":
            return self.components[0].dim
        return len(self.point)

    @classmethod
    def uniform_box(cls, bounds, seed: int = 0) -> "DistributionSpec":
        return cls(kind="uniform_box", bounds=tuple(map(tuple, bounds)), seed=seed)

    @classmethod
    def gaussian(cls, mean, cov, seed: int = 0) -> "DistributionSpec":
        return cls(kind="gaussian", mean=tuple(mean),
                   cov=tuple(map(tuple, cov)), seed=seed)

    @classmethod
    def mixture(cls, components, weights, seed: int = 0) -> "DistributionSpec":
        return cls(kind="mixture", components=tuple(components),
                   weights=tuple(weights), seed=seed)

    @classmethod
    def point_mass(cls, point, seed: int = 0) -> "DistributionSpec":
        return cls(kind="point_mass", point=tuple(point), seed=seed)


def draw_sample(dist: DistributionSpec, n: int) -> Sample:
    """n i.i.d. rows from the spec, deterministic for a given seed."""
    if n < 1:
        raise RiskrayError("sample size must be >= 1")
    rng = np.random.default_rng(dist.seed)
    return Sample(_draw(dist, n, rng))


def _draw(dist: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if dist.kind == "point_mass":
        return np.tile(np.asarray(dist.point, dtype=float), (n, 1))
    if dist.kind == "uniform_box":
        b = np.asarray(dist.bounds, dtype=float)
        return rng.uniform(b[:, 0], b[:, 1], size=(n, b.shape[0]))
    if dist.kind == "gaussian":
        return rng.multivariate_normal(np.asarray(dist.mean),
                                       np.asarray(dist.cov), size=n,
                                       method="svd")
    # mixture: component counts first, then per-component blocks, shuffled
    counts = rng.multinomial(n, np.asarray(dist.weights))
    blocks = [_draw(comp, k, rng) for comp, k in zip(dist.components, counts) if k]
    rows = np.vstack(blocks)
    rng.shuffle(rows, axis=0)
    return rows


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-sample-size Hausdorff gaps against a reference region."""

    n_list: tuple[int, ...]
    medians: tuple[float, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]   # one row per n, one col per rep
    reps: int
    n_dirs: int
    n_ref: int
    inexact_cells: tuple[tuple[int, int], ...]   # (n, rep) with budget overruns

    def rows(self) -> list[dict]:
        return [
            {"n": n, "median": med, "min": lo, "max": hi}
            for n, med, lo, hi in zip(self.n_list, self.medians, self.mins,
                                      self.maxs)
        ]


def convergence_experiment(dist: DistributionSpec, measure: DistortionSpec,
                           n_list, reps: int, n_dirs: int = 500,
                           max_rounds: int = 14,
                           ref_factor: int = 10) -> ConvergenceReport:
    """Hausdorff gap of sample regions against a large-sample reference.

    The reference region is built from a sample ``ref_factor`` times the
    largest requested size; each (n, rep) cell rebuilds the region from
    a fresh seeded sample and records the support-gap estimate on one
    fixed direction set.  Region builds run under a round budget; cells
    that exhaust it are flagged, not failed.
    """
    n_list = tuple(int(n) for n in n_list)
    if any(b > a for a, b in zip(n_list[1:], n_list)):
        raise RiskrayError("n_list must be ascending")
    if reps < 3:
        raise RiskrayError("need at least 3 replications")
    d = dist.dim
    root = np.random.SeedSequence(dist.seed)
    seeds = root.generate_state(1 + len(n_list) * reps, dtype=np.uint32)

    n_ref = ref_factor * max(n_list)
    ref_sample = draw_sample(replace(dist, seed=int(seeds[0])), n_ref)
    w_ref = make_weights_named(measure, n_ref)
    ref_region = region_support_oracle(ref_sample, w_ref, max_rounds=max_rounds,
                                       seed=int(seeds[0]))

    directions = sphere_directions(d, n_dirs, seed=dist.seed, include_axes=True)

    values = []
    inexact = []
    k = 1
    for n in n_list:
        w_n = make_weights_named(measure, n)
        row = []
        for rep in range(reps):
            cell = draw_sample(replace(dist, seed=int(seeds[k])), n)
            k += 1
            reg = region_support_oracle(cell, w_n, max_rounds=max_rounds,
                                        seed=int(seeds[0]) + rep)
            if not reg.exact:
                inexact.append((n, rep))
            row.append(hausdorff_estimate(reg.polytope, ref_region.polytope,
                                          directions))
        values.append(tuple(row))
    arr = np.asarray(values)
    return ConvergenceReport(
        n_list=n_list,
        medians=tuple(float(v) for v in np.median(arr, axis=1)),
        mins=tuple(float(v) for v in arr.min(axis=1)),
        maxs=tuple(float(v) for v in arr.max(axis=1)),
        values=tuple(tuple(float(x) for x in row) for row in arr),
        reps=reps, n_dirs=n_dirs, n_ref=n_ref,
        inexact_cells=tuple(inexact),
    )


@dataclass(frozen=True)
class BenchmarkReport:
    """Wall-clock medians of iterative solves over a (d, n) grid."""

    d_list: tuple[int, ...]
    n_list: tuple[int, ...]
    medians: tuple[tuple[float, ...], ...]   # [d][n] seconds
    slopes: tuple[float, ...]                # log-log slope in n, per d
    reps: int
    alpha: float | None
    timeouts: tuple[tuple[int, int], ...]    # (d, n) cells over the limit

    def rows(self) -> list[dict]:
        out = []
        for i, d in enumerate(self.d_list):
            for j, n in enumerate(self.n_list):
                out.append({"d": d, "n": n, "median_s": self.medians[i][j]})
        return out


def paper_style_mixture(d: int, seed: int = 0) -> DistributionSpec:
    """Uniform-box/Gaussian mixture in the positive orthant."""
    box = DistributionSpec.uniform_box([(1.0, 2.0)] * d, seed=seed)
    gauss = DistributionSpec.gaussian([1.5] * d, (0.04 * np.eye(d)).tolist(),
                                      seed=seed)
    return DistributionSpec.mixture([box, gauss], [0.5, 0.5], seed=seed)


def benchmark(d_list, n_list, measure: DistortionSpec, reps: int = 3,
              seed: int = 0, timeout_s: float = 120.0) -> BenchmarkReport:
    """Time the iterative solver over a (d, n) grid and fit the n-slope.

    Instances follow the positive-orthant mixture with goal near the
    sample mean and b = 1, so every solve is a regular finite one.
    Cells exceeding ``timeout_s`` are recorded, not fatal.
    """
    d_list = tuple(int(d) for d in d_list)
    n_list = tuple(int(n) for n in n_list)
    medians = []
    timeouts = []
    rng = np.random.default_rng(seed)
    for d in d_list:
        row = []
        for n in n_list:
            w = make_weights_named(measure, n)
            times = []
            for rep in range(reps):
                dist = paper_style_mixture(d, seed=seed + 7919 * rep + 31 * n + d)
                sample = draw_sample(dist, n)
                c = sample.mean() * (1.0 + 0.05 * rng.standard_normal(d))
                lp = RobustLP(c=c, b=1.0, sample=sample, weights=w)
                t0 = time.perf_counter()
                solve_iterative(lp, seed=seed + rep)
                times.append(time.perf_counter() - t0)
            med = float(np.median(times))
            row.append(med)
            if med > timeout_s:
                timeouts.append((d, n))
        medians.append(tuple(row))

    slopes = []
    logn = np.log(np.asarray(n_list, dtype=float))
    for row in medians:
        logt = np.log(np.maximum(np.asarray(row), 1e-9))
        slopes.append(float(np.polyfit(logn, logt, 1)[0]) if len(n_list) > 1
                      else float("nan"))
    alpha = measure.alpha if measure.kind == "expected_shortfall" else None
    return BenchmarkReport(d_list=d_list, n_list=n_list,
                           medians=tuple(medians), slopes=tuple(slopes),
                           reps=reps, alpha=alpha, timeouts=tuple(timeouts))
