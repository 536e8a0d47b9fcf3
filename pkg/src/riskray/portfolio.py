"""Mean-risk portfolio selection via the robust-LP reduction.

The portfolio problem ``max E[r].x  s.t.  rho(r.x) <= rho0`` reduces to
the core solver: the risk constraint says the loss-row region's support
at ``x`` is at most ``rho0``, i.e. ``l.x <= rho0`` for every l in
U(losses).  Rewriting that max-form gives a min-form robust LP on the
return rows with right-hand side ``-rho0`` and goal equal to the mean
loss.  The solver's ray solution is scaled to the unit budget at the
end; positive homogeneity of the risk measure makes that sound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._util import affine_rank, as_matrix, null_direction
from .errors import DegeneracyError, RiskrayError
from .region import Sample, region_support_oracle
from .solver import RobustLP, SolveOutcome, solve_iterative, solve_ray, transform_max
from .weights import DistortionSpec, WeightVector, eval_risk, make_weights_named

ITERATIVE_N_CUTOFF = 400   # auto mode switches to cut generation above this


@dataclass(frozen=True)
class PortfolioResult:
    """Normalized allocation with risk/return diagnostics."""

    status: str
    x: np.ndarray | None = None
    expected_return: float | None = None
    risk: float | None = None
    var_level: float | None = None
    risk_bound: float | None = None
    flags: tuple[str, ...] = ()
    solver: SolveOutcome | None = None

    def __post_init__(self):
        if self.x is not None:
            x = np.asarray(self.x, dtype=float)
            x.flags.writeable = False
            object.__setattr__(self, "x", x)


def _resolve_weights(measure, n: int) -> tuple[WeightVector, float | None]:
    """Accept a WeightVector or a DistortionSpec; report alpha when known."""
    if isinstance(measure, WeightVector):
        if measure.n != n:
            raise RiskrayError(f"weights have length {measure.n}, need {n}")
        return measure, None
    if isinstance(measure, DistortionSpec):
        w = make_weights_named(measure, n)
        alpha = measure.alpha if measure.kind == "expected_shortfall" else None
        return w, alpha
    raise RiskrayError("measure must be a WeightVector or DistortionSpec")


def _check_full_dimensional(returns: np.ndarray):
    """Reject collinear scenario tables, naming the offending combination."""
    n, d = returns.shape
    if d == 1:
        return
    stds = returns.std(axis=0)
    flat = np.flatnonzero(stds <= 1e-12 * max(1.0, float(np.abs(returns).max())))
    if flat.size:
        raise DegeneracyError(
            f"asset column(s) {flat.tolist()} are riskless (constant returns); "
            "drop them or pass jitter=True",
            affine_dim=affine_rank(returns), dim=d,
        )
    adim = affine_rank(returns)
    if adim < d:
        v = null_direction(returns)
        raise DegeneracyError(
            "return columns are collinear: the combination "
            f"{np.round(v, 6).tolist()} . r is constant across scenarios; "
            "drop a redundant asset or pass jitter=True",
            affine_dim=adim, dim=d,
        )


def _empirical_var(s: np.ndarray, alpha: float) -> float:
    """Empirical value at risk: negative lower alpha-quantile."""
    return -float(np.quantile(s, alpha, method="inverted_cdf"))


def portfolio_solve(returns, measure, rho0: float, nonneg: bool = True,
                    mode: str = "auto", jitter: bool = False,
                    seed: int = 0) -> PortfolioResult:
    """Maximize expected return under a distortion-risk bound.

    Parameters
    ----------
    returns : array-like, shape (n, d)
        Scenario rows of asset returns.
    measure : DistortionSpec or WeightVector
        Coherent risk measure; named specs are instantiated at n.
    rho0 : float
        Upper bound on the portfolio risk (the recipe treats it as the
        scale of the pre-normalization solution).
    nonneg : bool
        Exclude short sales by restricting the facet search to
        nonnegative normals.
    mode : str
        "exact" materializes the region, "iterative" runs cut
        generation, "auto" picks by sample size.
    jitter : bool
        Break collinear/riskless degeneracy with seeded 1e-8 noise
        instead of rejecting the input.
    """
    rows = as_matrix(returns)
    n, d = rows.shape
    w, alpha = _resolve_weights(measure, n)
    w.require_coherent("portfolio_solve")
    rho0 = float(rho0)
    flags: list[str] = []

    if d == 1:
        x = np.array([1.0])
        s = rows[:, 0]
        risk = eval_risk(w, s)
        if risk > rho0 + 1e-9:
            flags.append("budget forces the single asset; risk exceeds rho0")
        return PortfolioResult(
            status="finite", x=x, expected_return=float(s.mean()), risk=risk,
            var_level=_empirical_var(s, alpha) if alpha else None,
            risk_bound=rho0, flags=tuple(flags),
        )

    try:
        _check_full_dimensional(rows)
    except DegeneracyError:
        if not jitter:
            raise
        rng = np.random.default_rng(seed)
        rows = rows + rng.normal(0.0, 1e-8, rows.shape)
        flags.append("degenerate returns jittered by 1e-8")
        _check_full_dimensional(rows)

    losses = -rows
    mean_return = rows.mean(axis=0)
    # max mean_return.x s.t. l.x <= rho0 for all l in U(losses)
    lp = transform_max(c=mean_return, b=rho0, sample=losses, weights=w,
                       nonneg=nonneg)

    if mode not in ("auto", "exact", "iterative"):
        raise RiskrayError(f"unknown mode {mode!r}")
    use_iterative = mode == "iterative" or (mode == "auto" and n > ITERATIVE_N_CUTOFF)
    if use_iterative:
        outcome = solve_iterative(lp, seed=seed)
    else:
        region = region_support_oracle(lp.sample, w, seed=seed)
        from dataclasses import replace
        outcome = solve_ray(replace(lp, region=region, sample=None))

    if outcome.status != "finite":
        flags.append(f"solver status {outcome.status}: "
                     + ("no allocation satisfies the risk bound"
                        if outcome.status == "none"
                        else "the pre-normalization problem is unbounded "
                             "(some direction has nonpositive risk)"))
        return PortfolioResult(status=outcome.status, risk_bound=rho0,
                               flags=tuple(flags), solver=outcome)

    x_raw = outcome.x_star
    risk_raw = eval_risk(w, rows @ x_raw)
    if abs(risk_raw - rho0) > 1e-6 * max(1.0, abs(rho0)):
        flags.append(f"pre-normalization risk {risk_raw:.6g} is not binding "
                     f"at rho0={rho0:.6g}")

    total = float(x_raw.sum())
    if abs(total) <= 1e-12:
        flags.append("allocation sums to ~0; unit-budget normalization "
                     "impossible, returning the raw solution")
        x = x_raw
    else:
        if total < 0:
            flags.append("allocation sum negative; normalization flips signs")
        x = x_raw / total

    s = rows @ x
    return PortfolioResult(
        status="finite", x=x, expected_return=float(mean_return @ x),
        risk=eval_risk(w, s),
        var_level=_empirical_var(s, alpha) if alpha else None,
        risk_bound=rho0, flags=tuple(flags), solver=outcome,
    )


def portfolio_report(x, returns, measure) -> dict:
    """Scenario metrics of a fixed allocation: mean, risk and V@R."""
    rows = as_matrix(returns)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != rows.shape[1]:
        raise RiskrayError(f"allocation has {x.size} entries, returns {rows.shape[1]}")
    if abs(float(x.sum()) - 1.0) > 1e-9:
        raise RiskrayError("allocation must sum to 1")
    w, alpha = _resolve_weights(measure, rows.shape[0])
    s = rows @ x
    report = {"mean": float(s.mean()), "risk": eval_risk(w, s)}
    if alpha is not None:
        report["var"] = _empirical_var(s, alpha)
    return report


def simplex_grid(d: int, step: float) -> np.ndarray:
    """All allocations on the unit simplex with the given resolution."""
    k = int(round(1.0 / step))
    if abs(k * step - 1.0) > 1e-9:
        raise RiskrayError("step must divide 1")
    if d == 1:
        return np.array([[1.0]])
    if d == 2:
        i = np.arange(k + 1)
        return np.column_stack([i, k - i]) / k
    pts = [(i, j, k - i - j)
           for i, j in itertools.product(range(k + 1), repeat=2) if i + j <= k]
    return np.asarray(pts, dtype=float) / k


def grid_oracle(returns, measure, rho0: float, step: float = 0.005):
    """Exhaustive simplex-grid solve of the budget-constrained problem.

    Independent verification oracle: keeps grid allocations whose risk
    is within the bound and returns the one with the best mean return
    (lexicographically smallest among ties).  Returns None when no grid
    point is feasible.
    """
    rows = as_matrix(returns)
    n, d = rows.shape
    if d > 3:
        raise RiskrayError("grid oracle supports d <= 3")
    if step > 0.005 + 1e-12:
        raise RiskrayError("grid oracle requires step <= 0.005")
    w, _ = _resolve_weights(measure, n)
    grid = simplex_grid(d, step)
    scen = rows @ grid.T                          # (n, m)
    scen.sort(axis=0)
    risks = -(w.w[::-1] @ scen)
    feasible = risks <= float(rho0) + 1e-12
    if not np.any(feasible):
        return None
    means = rows.mean(axis=0) @ grid.T
    means = np.where(feasible, means, -np.inf)
    best = float(np.max(means))
    ties = np.flatnonzero(means >= best - 1e-12)
    order = np.lexsort(grid[ties].T[::-1])
    return grid[ties[order[0]]]
