"""Small numeric helpers used across modules."""

from __future__ import annotations

import numpy as np


def as_matrix(rows) -> np.ndarray:
    """Coerce row data to a finite 2-D float array (n, d)."""
    a = np.asarray(rows, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected an (n, d) table of rows, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("rows contain non-finite entries")
    return a


def coord_scale(a) -> float:
    """Scale reference for relative tolerances: max |coordinate|, floored at 1."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 1.0
    return max(1.0, float(np.max(np.abs(a))))


def affine_rank(points: np.ndarray, rtol: float = 1e-9) -> int:
    """Dimension of the affine hull of a point set.

    Rank of the centered matrix with singular values cut relative to the
    data scale, so translated copies of a flat set stay flat.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] <= 1:
        return 0
    centered = pts - pts.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    cutoff = rtol * coord_scale(pts) * np.sqrt(pts.shape[0])
    return int(np.sum(s > cutoff))


def null_direction(points: np.ndarray) -> np.ndarray:
    """Unit vector orthogonal to the affine hull of a rank-deficient set."""
    pts = np.asarray(points, dtype=float)
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=True)
    return vt[-1]


def sphere_directions(d: int, count: int, seed: int | None = 0,
                      include_axes: bool = False) -> np.ndarray:
    """Seeded uniform unit directions in R^d, optionally prefixed by +-axes.

    For d == 2 the directions are evenly spaced angles (denser coverage
    per sample than random draws); higher dimensions use normalized
    Gaussians.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    blocks = []
    if include_axes:
        eye = np.eye(d)
        blocks.append(np.vstack([eye, -eye]))
    if d == 1:
        blocks.append(np.array([[1.0], [-1.0]]))
    elif d == 2:
        theta = 2.0 * np.pi * (np.arange(count) + 0.5) / max(count, 1)
        if seed is not None:
            theta = theta + np.random.default_rng(seed).uniform(0, 2 * np.pi)
        blocks.append(np.column_stack([np.cos(theta), np.sin(theta)]))
    else:
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((count, d))
        norms = np.linalg.norm(g, axis=1)
        keep = norms > 1e-12
        blocks.append(g[keep] / norms[keep, None])
    dirs = np.vstack(blocks)
    return dirs


def dedup_points(points: np.ndarray, tol: float) -> np.ndarray:
    """Remove near-duplicate rows (within ``tol`` in max-norm), keeping first."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] <= 1:
        return pts.copy()
    keys = np.round(pts / max(tol, 1e-300)).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return pts[np.sort(idx)]
