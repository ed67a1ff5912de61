"""
Local best L_p approximation by Π^{r1,r2} on a prism J×S.

All fits work in the element's LocalFrame (τ ∈ [0, 1], z = (x - centroid)/diam)
at the nodes of a quadrature rule; the reported error is the discrete
L_p residual on those nodes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr, solve_triangular
from scipy.optimize import linprog

from ANISOST.exceptions import AnisoError
from Mesh.geometry import Prism
from Polynomials.polyspace import AnisoPolynomial, LocalFrame, vandermonde
from Polynomials.quadrature import QuadratureRule, discrete_norm, field_values, prism_rule

logger = logging.getLogger(__name__)

IRLS_TOL = 1e-8
IRLS_MAX_ITER = 200
RANK_TOL = 1e-12


class SingularGram(AnisoError):
    """The weighted Vandermonde matrix is rank deficient on this element."""


class NoConvergence(AnisoError):
    """An iterative solver stopped without meeting its tolerance; `.fit` holds the best iterate."""

    def __init__(self, message: str, fit: LocalFit | None = None):
        super().__init__(message)
        self.fit = fit


@dataclass
class LocalFit:
    """
    Best-fit polynomial on one element.

    Fields:
        element (Prism): the element J×S
        poly (AnisoPolynomial): fitted polynomial in the element's local frame
        error (float): discrete L_p residual ‖f - poly‖ at the rule's nodes
        p (float): exponent, may be ∞
        solver_meta (dict): method, iterations, converged and solver details
    """
    element: Prism
    poly: AnisoPolynomial
    error: float
    p: float
    solver_meta: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return bool(self.solver_meta.get('converged', True))


def default_rule(J, S, r1: int, r2: int, subdivisions: int = 0) -> QuadratureRule:
    """r1+2 Gauss points in t times a simplex rule of degree 2·r2+2."""
    return prism_rule(J, S, r1 + 2, 2 * r2 + 2, subdivisions)


def _least_squares(V: np.ndarray, y: np.ndarray, weights: np.ndarray) -> np.ndarray:
    if V.shape[0] < V.shape[1]:
        raise SingularGram(f"{V.shape[0]} nodes cannot determine {V.shape[1]} coefficients")
    root = np.sqrt(weights)
    Q, R = qr(root[:, None] * V, mode='economic')
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag.min() <= RANK_TOL * max(diag.max(), 1.0):
        raise SingularGram(f"rank deficient fit matrix (min |R_ii| = {diag.min():.3e})")
    return solve_triangular(R, Q.T @ (root * y))


def _irls(V, y, weights, p, coeffs):
    """Reweighted least squares for p ≠ 2; damped for p < 1."""
    eps = 1e-12 * max(float(np.abs(y).max()), 1.0)
    best = (discrete_norm(y - V @ coeffs, weights, p), coeffs)
    history = [best[0]]
    converged = False
    iterations = 0
    for iterations in range(1, IRLS_MAX_ITER + 1):
        residual = np.maximum(np.abs(y - V @ coeffs), eps)
        update = _least_squares(V, y, weights * residual ** (p - 2.0))
        if p < 1:
            update = 0.5 * (coeffs + update)
        step = np.linalg.norm(update - coeffs) / max(np.linalg.norm(update), eps)
        coeffs = update
        error = discrete_norm(y - V @ coeffs, weights, p)
        history.append(error)
        if error < best[0]:
            best = (error, coeffs)
        if step < IRLS_TOL:
            converged = True
            break
    oscillating = p < 1 and len(history) > 2 and np.any(np.diff(history[-5:]) > 0)
    meta = {
        'method': 'irls-damped' if p < 1 else 'irls',
        'iterations': iterations,
        'converged': converged and not oscillating,
    }
    return best[1], best[0], meta


def _chebyshev(V, y):
    """min_c max_i |y_i - (V c)_i| as a linear program in (c, s)."""
    n, k = V.shape
    ones = np.ones((n, 1))
    A_ub = np.block([[V, -ones], [-V, -ones]])
    b_ub = np.concatenate([y, -y])
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    bounds = [(None, None)] * k + [(0, None)]
    result = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method='highs')
    meta = {'method': 'linprog-highs', 'iterations': int(getattr(result, 'nit', 0) or 0),
            'converged': bool(result.success), 'status': result.message}
    if not result.success:
        return None, meta
    return result.x[:k], meta


def best_fit(f, J, S, r1: int, r2: int, p: float, rule: QuadratureRule | None = None, *,
             element: Prism | None = None, strict: bool = False,
             subdivisions: int = 0) -> LocalFit:
    """
    Discrete best approximation of f by Π^{r1,r2} on J×S.

    p = 2 solves the weighted least-squares problem by QR; p ∈ (0, ∞) runs
    IRLS from the least-squares start; p = ∞ solves the Chebyshev problem
    at the nodes by linear programming. With strict=True a non-converged
    solver raises NoConvergence, otherwise the best iterate is returned with
    converged=False in solver_meta.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    element = element or Prism(J, S)
    rule = rule or default_rule(J, S, r1, r2, subdivisions)
    frame = LocalFrame.for_element(J, S)
    tau, z = frame.to_local(rule.times, rule.points)
    V = vandermonde(r1, r2, tau, z)
    y = field_values(f, rule.times, rule.points)
    weights = rule.weights

    # Scale-free start; also the answer for p = 2.
    coeffs = _least_squares(V, y, weights)
    if p == 2:
        residual = y - V @ coeffs
        error = discrete_norm(residual, weights, 2)
        gram = np.abs(V.T @ (weights * residual)).max()
        reference = max(float(np.abs(V.T @ (weights * y)).max()), np.finfo(float).tiny)
        meta = {'method': 'qr', 'iterations': 1, 'converged': True,
                'gram_residual': float(gram / reference)}
    elif math.isinf(p):
        solution, meta = _chebyshev(V, y)
        if solution is not None:
            coeffs = solution
        error = discrete_norm(y - V @ coeffs, weights, math.inf)
    else:
        coeffs, error, meta = _irls(V, y, weights, p, coeffs)

    meta['nodes'] = rule.size
    fit = LocalFit(element, AnisoPolynomial(r1, r2, S.d, coeffs, frame), float(error), p, meta)
    logger.debug("fit %s p=%s: error %.3e (%s, %d it)", element.element_id, p, fit.error,
                 meta['method'], meta['iterations'])
    if not fit.converged:
        logger.warning("fit on %s did not converge (%s)", element.element_id, meta['method'])
        if strict:
            raise NoConvergence(f"{meta['method']} did not converge on {element.element_id}", fit)
    return fit


def fit_element(f, element: Prism, r1: int, r2: int, p: float, subdivisions: int = 0,
                strict: bool = False) -> LocalFit:
    return best_fit(f, element.time, element.space, r1, r2, p, element=element,
                    strict=strict, subdivisions=subdivisions)
