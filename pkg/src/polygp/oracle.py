"""Brute-force estimation of a polynomial's global minimum.

Used to cross-check the certified bounds: the estimate is the value of f at
the best point found (a symmetric grid plus seeded multistart gradient
descent), hence always an upper bound on the true infimum.  Every bound the
package certifies must therefore come out below the estimate, up to solver
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .polynomial import SparsePolynomial


@dataclass(frozen=True)
class SearchBudget:
    starts: int = 64
    iters_per_start: int = 500
    box_radius: float = 5.0
    grid_points_per_axis: int = 21

    def __post_init__(self):
        if min(self.starts, self.iters_per_start, self.grid_points_per_axis) <= 0:
            raise ValueError("budget fields must be positive")
        if self.box_radius <= 0:
            raise ValueError("box_radius must be positive")


def _term_arrays(f: SparsePolynomial):
    exps = np.array([list(a) for a in f.terms], dtype=np.int64).reshape(len(f.terms), f.n)
    coeffs = np.array([f.terms[a] for a in f.terms], dtype=float)
    return exps, coeffs


def _batch_eval(exps: np.ndarray, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    if exps.shape[0] == 0:
        return np.zeros(points.shape[0])
    # integer exponent dtype keeps negative bases exact (no nan from pow)
    monomials = np.prod(points[:, None, :] ** exps[None, :, :], axis=2)
    return monomials @ coeffs


def _batch_gradient(exps: np.ndarray, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    S, n = points.shape
    grad = np.zeros((S, n))
    for j in range(n):
        mask = exps[:, j] > 0
        if not np.any(mask):
            continue
        shifted = exps[mask].copy()
        shifted[:, j] -= 1
        monomials = np.prod(points[:, None, :] ** shifted[None, :, :], axis=2)
        grad[:, j] = monomials @ (coeffs[mask] * exps[mask, j])
    return grad


def gradient(f: SparsePolynomial, point: Sequence[float]) -> list:
    """Exact partial derivatives of f at the point."""
    if len(point) != f.n:
        raise ValueError(f"point has length {len(point)}, expected {f.n}")
    exps, coeffs = _term_arrays(f)
    p = np.asarray([point], dtype=float)
    return _batch_gradient(exps, coeffs, p)[0].tolist()


def estimate_global_min(
    f: SparsePolynomial,
    budget: Optional[SearchBudget] = None,
    seed: int = 0,
) -> float:
    """Best value of f found by grid sampling plus multistart descent.

    The grid covers [-R, R]^n (skipped for n > 3); descent runs a fixed
    number of backtracking gradient steps from seeded uniform starts.  For
    coercive f this estimates the global minimum; otherwise it merely reports
    the best value seen.  Deterministic for a fixed seed.
    """
    budget = budget or SearchBudget()
    if f.n == 0:
        return f.coefficient(())
    exps, coeffs = _term_arrays(f)
    best = np.inf

    if f.n <= 3:
        axes = [np.linspace(-budget.box_radius, budget.box_radius, budget.grid_points_per_axis)] * f.n
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=1)
        best = float(np.min(_batch_eval(exps, coeffs, grid)))

    rng = np.random.default_rng(seed)
    pos = rng.uniform(-budget.box_radius, budget.box_radius, size=(budget.starts, f.n))
    val = _batch_eval(exps, coeffs, pos)
    step = np.full(budget.starts, 0.25)
    for _ in range(budget.iters_per_start):
        grad = _batch_gradient(exps, coeffs, pos)
        gnorm2 = np.sum(grad * grad, axis=1)
        cand = pos - step[:, None] * grad
        cval = _batch_eval(exps, coeffs, cand)
        ok = np.isfinite(cval) & (cval <= val - 1e-4 * step * gnorm2)
        pos[ok] = cand[ok]
        val[ok] = cval[ok]
        step[ok] *= 1.3
        step[~ok] *= 0.5
        if float(np.max(step)) < 1e-18:
            break
    return float(min(best, float(np.min(val))))
