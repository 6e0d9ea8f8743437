"""Derivative-free simplex minimization (Nelder-Mead).

Deterministic by construction: fixed initial simplex, no randomness, stable
tie handling. Convergence is declared when the simplex diameter (max
distance of any vertex from the best one) drops below `diameter_tol`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class OptimizerError(RuntimeError):
    """Raised when the simplex cannot make progress (non-finite collapse)."""


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    fx: float
    iterations: int
    converged: bool


def nelder_mead(
    f,
    x0,
    step: float = 0.25,
    diameter_tol: float = 1e-6,
    max_iter: int = 2000,
) -> OptimResult:
    """Minimize f from x0 with an axis-aligned initial simplex of size `step`.

    f may return +inf to reject a point; it must be finite at x0.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    n = len(x0)
    if n == 0:
        return OptimResult(x0, float(f(x0)), 0, True)

    verts = np.tile(x0, (n + 1, 1))
    for i in range(n):
        verts[i + 1, i] += step
    fvals = np.array([float(f(v)) for v in verts])
    if not np.isfinite(fvals[0]):
        raise OptimizerError("objective is not finite at the starting point")

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    iterations = 0
    converged = False
    while iterations < max_iter:
        order = np.argsort(fvals, kind="stable")
        verts = verts[order]
        fvals = fvals[order]

        diameter = float(np.max(np.abs(verts[1:] - verts[0])))
        if diameter < diameter_tol:
            converged = True
            break
        iterations += 1

        centroid = verts[:-1].mean(axis=0)
        worst = verts[-1]
        reflected = centroid + alpha * (centroid - worst)
        f_r = float(f(reflected))

        if f_r < fvals[0]:
            expanded = centroid + gamma * (reflected - centroid)
            f_e = float(f(expanded))
            if f_e < f_r:
                verts[-1], fvals[-1] = expanded, f_e
            else:
                verts[-1], fvals[-1] = reflected, f_r
        elif f_r < fvals[-2]:
            verts[-1], fvals[-1] = reflected, f_r
        else:
            if f_r < fvals[-1]:
                contracted = centroid + rho * (reflected - centroid)
            else:
                contracted = centroid + rho * (worst - centroid)
            f_c = float(f(contracted))
            if f_c < min(f_r, fvals[-1]):
                verts[-1], fvals[-1] = contracted, f_c
            else:
                # shrink toward the best vertex
                verts[1:] = verts[0] + sigma * (verts[1:] - verts[0])
                fvals[1:] = [float(f(v)) for v in verts[1:]]
                if not np.any(np.isfinite(fvals)):
                    raise OptimizerError("simplex collapsed onto non-finite values")

    best = int(np.argmin(fvals))
    return OptimResult(verts[best].copy(), float(fvals[best]), iterations, converged)
