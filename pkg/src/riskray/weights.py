"""Coherent distortion risk measures on empirical distributions.

A distortion risk measure on an empirical sample is a weighted sum of
order statistics.  We store the weight vector ``w`` in *ascending*
convention: ``w[0] <= ... <= w[n-1]`` for a coherent measure, with
``w[j]`` applied to the (j+1)-th *largest* observation, so the heaviest
weights sit on the worst outcomes.  The same vector drives the support
function of the matching uncertainty region, where ``w[j]`` multiplies
the (j+1)-th *smallest* projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RiskrayError

SUM_TOL = 1e-9
ORDER_TOL = 1e-12


def _is_ascending(w: np.ndarray, tol: float = ORDER_TOL) -> bool:
    return bool(np.all(np.diff(w) >= -tol))


@dataclass(frozen=True)
class WeightVector:
    """Simplex-normalized weights of an empirical distortion risk measure.

    Parameters
    ----------
    w : array-like, shape (n,)
        Nonnegative weights summing to one.  Ascending order means the
        measure is coherent; non-ascending vectors (V@R-style) are
        representable but flagged, and region/solver code rejects them.
    """

    w: np.ndarray
    coherent: bool = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.w, dtype=float).reshape(-1)
        if arr.size < 1:
            raise RiskrayError("weight vector must have length >= 1")
        if not np.all(np.isfinite(arr)):
            raise RiskrayError("weights must be finite")
        if np.any(arr < -ORDER_TOL):
            raise RiskrayError("weights must be nonnegative")
        if abs(float(arr.sum()) - 1.0) > SUM_TOL:
            raise RiskrayError(f"weights must sum to 1, got {arr.sum()!r}")
        arr = np.clip(arr, 0.0, None)
        arr.flags.writeable = False
        object.__setattr__(self, "w", arr)
        object.__setattr__(self, "coherent", _is_ascending(arr))

    @property
    def n(self) -> int:
        return int(self.w.size)

    def require_coherent(self, context: str = "this operation"):
        if not self.coherent:
            raise RiskrayError(
                f"{context} requires a coherent (ascending) weight vector"
            )

    def to_list(self) -> list[float]:
        return [float(v) for v in self.w]


@dataclass(frozen=True)
class DistortionSpec:
    """Named or custom specification of a distortion risk measure.

    ``kind`` is one of ``expected_shortfall`` (needs ``alpha`` in (0, 1]),
    ``expectation``, ``custom_generator`` (needs a ``grid`` of (t, r(t))
    pairs) or ``explicit_weights`` (needs ``weights``).
    """

    kind: str
    alpha: float | None = None
    grid: np.ndarray | None = None
    weights: WeightVector | None = None

    def __post_init__(self):
        if self.kind == "expected_shortfall":
            if self.alpha is None or not (0.0 < self.alpha <= 1.0):
                raise RiskrayError(
                    f"expected_shortfall needs alpha in (0, 1], got {self.alpha!r}"
                )
        elif self.kind == "expectation":
            pass
        elif self.kind == "custom_generator":
            object.__setattr__(self, "grid", _validate_grid(self.grid))
        elif self.kind == "explicit_weights":
            if self.weights is None:
                raise RiskrayError("explicit_weights needs a WeightVector")
        else:
            raise RiskrayError(f"unknown distortion kind {self.kind!r}")

    @classmethod
    def expected_shortfall(cls, alpha: float) -> "DistortionSpec":
        return cls(kind="expected_shortfall", alpha=alpha)

    @classmethod
    def expectation(cls) -> "DistortionSpec":
        return cls(kind="expectation")

    @classmethod
    def custom_generator(cls, grid) -> "DistortionSpec":
        return cls(kind="custom_generator", grid=grid)

    @classmethod
    def explicit(cls, weights: WeightVector) -> "DistortionSpec":
        return cls(kind="explicit_weights", weights=weights)


def _validate_grid(grid) -> np.ndarray:
    """Check a (t, r(t)) generator grid: monotone, r(0)=0, r(1)=1."""
    g = np.asarray(grid, dtype=float)
    if g.ndim != 2 or g.shape[1] != 2 or g.shape[0] < 2:
        raise RiskrayError("generator grid must be an (m, 2) table of (t, r(t))")
    t, r = g[:, 0], g[:, 1]
    if np.any(np.diff(t) < -ORDER_TOL) or np.any(np.diff(r) < -SUM_TOL):
        raise RiskrayError("generator grid must be nondecreasing in t and r(t)")
    if abs(t[0]) > SUM_TOL or abs(t[-1] - 1.0) > SUM_TOL:
        raise RiskrayError("generator grid must cover t in [0, 1]")
    if abs(r[0]) > SUM_TOL or abs(r[-1] - 1.0) > SUM_TOL:
        raise RiskrayError("generator must satisfy r(0)=0 and r(1)=1")
    g = g.copy()
    g.flags.writeable = False
    return g


def make_weights_named(spec: DistortionSpec, n: int) -> WeightVector:
    """Weight vector of a named measure at sample size ``n``.

    Expected shortfall at level ``alpha`` uses the zonoid-region weights

        w_j = 1/(n*alpha)                    if j >  n - floor(n*alpha),
        w_j = (n*alpha - floor(n*alpha))/(n*alpha)   if j == n - floor(n*alpha),
        w_j = 0                              otherwise   (1-based j),

    and the expectation is the uniform vector.
    """
    if n < 1:
        raise RiskrayError(f"sample size must be >= 1, got {n}")
    if spec.kind == "expectation":
        return WeightVector(np.full(n, 1.0 / n))
    if spec.kind == "expected_shortfall":
        return _zonoid_weights(spec.alpha, n)
    if spec.kind == "custom_generator":
        return weights_from_generator(spec.grid, n)
    if spec.kind == "explicit_weights":
        if spec.weights.n != n:
            raise RiskrayError(
                f"explicit weights have length {spec.weights.n}, expected {n}"
            )
        return spec.weights
    raise RiskrayError(f"unknown distortion kind {spec.kind!r}")


def _zonoid_weights(alpha: float, n: int) -> WeightVector:
    if not (0.0 < alpha <= 1.0):
        raise RiskrayError(f"alpha must lie in (0, 1], got {alpha!r}")
    na = n * alpha
    m = int(np.floor(na + 1e-12))
    w = np.zeros(n)
    if m > 0:
        w[n - m:] = 1.0 / na
    frac = na - m
    if frac > 1e-12 and n - m - 1 >= 0:
        w[n - m - 1] = frac / na
    return WeightVector(w / w.sum())


def weights_from_generator(r_grid, n: int) -> WeightVector:
    """Weights from a weight-generating function given as a grid.

    ``r`` is evaluated at the probability levels k/n by linear
    interpolation; the weight on the (j+1)-th largest observation is the
    increment of ``r`` over the matching upper-tail interval:
    ``w_j = r((n+1-j)/n) - r((n-j)/n)`` (1-based j).  Concave ``r`` gives
    nonincreasing increments toward t=1, hence an ascending (coherent) w.
    """
    if n < 1:
        raise RiskrayError(f"sample size must be >= 1, got {n}")
    grid = _validate_grid(r_grid)
    levels = np.arange(n + 1) / n
    r_at = np.interp(levels, grid[:, 0], grid[:, 1])
    increments = np.diff(r_at)              # increment on [(k-1)/n, k/n]
    w = increments[::-1]                    # w_j pairs with the upper tail
    total = w.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise RiskrayError("generator increments do not sum to 1")
    return WeightVector(w / total)


def eval_risk(w: WeightVector, y) -> float:
    """Distortion risk of an empirical sample: -sum_i w_i * y_[i].

    ``y_[i]`` is the i-th largest observation, so the largest weights of
    a coherent vector multiply the worst outcomes.  Ties in the sort do
    not affect the value.
    """
    ys = np.asarray(y, dtype=float).reshape(-1)
    if ys.size != w.n:
        raise RiskrayError(f"length mismatch: {w.n} weights vs {ys.size} values")
    if not np.all(np.isfinite(ys)):
        raise RiskrayError("sample values must be finite")
    # ascending sort dotted with reversed weights == descending sort with w
    return -float(np.dot(w.w[::-1], np.sort(ys)))


def check_majorization(w_a: WeightVector, w_b: WeightVector) -> bool:
    """Prefix-sum dominance of weight vectors.

    True iff every prefix sum of ``w_a`` is <= the matching prefix sum of
    ``w_b`` (plus 1e-12).  Dominance nests the induced regions: the
    region of ``w_b`` sits inside the region of ``w_a``.
    """
    if w_a.n != w_b.n:
        raise RiskrayError(f"length mismatch: {w_a.n} vs {w_b.n}")
    return bool(np.all(np.cumsum(w_a.w) <= np.cumsum(w_b.w) + 1e-12))
