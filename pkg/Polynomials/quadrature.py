"""
Quadrature on intervals, simplices and space-time prisms; discrete L_p norms.

Simplex rules on the reference simplex {ξ ≥ 0, Σξ ≤ 1}:

  d = 1        Gauss-Legendre
  d = 2        symmetric Strang-Fix / Zienkiewicz-Taylor rules for degree ≤ 6
  d = 3        symmetric rules for degree ≤ 2
  otherwise    collapsed Gauss-Jacobi (Stroud conical product)

Only rules with positive weights are used, so every discrete L_p norm is a
genuine weighted norm.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from ANISOST.exceptions import AnisoError
from Mesh.geometry import Interval, bisect_interval, uniform_refine

logger = logging.getLogger(__name__)

MAX_SIMPLEX_DEGREE = 30
SUP_PASSES = 4
SUP_RTOL = 1e-3


class UnsupportedOrder(AnisoError):
    """No simplex rule exists for the requested degree and dimension."""


class NonFiniteValue(AnisoError):
    """The integrand returned NaN or ±∞ at a quadrature node."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Nodes and positive weights on a prism (or a union of prisms).

    Fields:
        times (ndarray): (n,) temporal coordinates of the nodes
        points (ndarray): (n, d) spatial coordinates of the nodes
        weights (ndarray): (n,) positive weights summing to |J×S|
        order (tuple): exactness degree (temporal, spatial total degree)
    """
    times: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    order: tuple[int, int]

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def measure(self) -> float:
        return math.fsum(self.weights)

    @property
    def nodes(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.times.tolist(), self.points))


def gauss_interval(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [a, b], exact to degree 2n-1."""
    if n < 1:
        raise UnsupportedOrder("a Gauss rule needs at least one point")
    xi, w = leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (xi + 1.0), half * w


def _triangle_table(degree: int):
    if degree <= 1:
        x = [[1.0 / 3.0, 1.0 / 3.0]]
        w = [0.5]
    elif degree == 2:
        x = [[1.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0], [2.0 / 3.0, 1.0 / 6.0]]
        w = [1.0 / 6.0] * 3
    elif degree <= 4:
        x = [[0.816847572980459, 0.091576213509771],
             [0.091576213509771, 0.816847572980459],
             [0.091576213509771, 0.091576213509771],
             [0.108103018168070, 0.445948490915965],
             [0.445948490915965, 0.108103018168070],
             [0.445948490915965, 0.445948490915965]]
        w = [0.109951743655322 / 2.0] * 3 + [0.223381589678011 / 2.0] * 3
    elif degree == 5:
        x = [[0.33333333333333333, 0.33333333333333333],
             [0.79742698535308720, 0.10128650732345633],
             [0.10128650732345633, 0.79742698535308720],
             [0.10128650732345633, 0.10128650732345633],
             [0.05971587178976981, 0.47014206410511505],
             [0.47014206410511505, 0.05971587178976981],
             [0.47014206410511505, 0.47014206410511505]]
        w = [0.225 / 2.0] + [0.12593918054482717 / 2.0] * 3 + [0.13239415278850616 / 2.0] * 3
    else:
        x = [[0.873821971016996, 0.063089014491502],
             [0.063089014491502, 0.873821971016996],
             [0.063089014491502, 0.063089014491502],
             [0.501426509658179, 0.249286745170910],
             [0.249286745170910, 0.501426509658179],
             [0.249286745170910, 0.249286745170910],
             [0.636502499121399, 0.310352451033785],
             [0.636502499121399, 0.053145049844816],
             [0.310352451033785, 0.636502499121399],
             [0.310352451033785, 0.053145049844816],
             [0.053145049844816, 0.636502499121399],
             [0.053145049844816, 0.310352451033785]]
        w = ([0.050844906370207 / 2.0] * 3 + [0.116786275726379 / 2.0] * 3
             + [0.082851075618374 / 2.0] * 6)
    return np.array(x), np.array(w)


def _tetrahedron_table(degree: int):
    if degree <= 1:
        return np.array([[0.25, 0.25, 0.25]]), np.array([1.0 / 6.0])
    a, b = 0.585410196624969, 0.138196601125011
    x = np.array([[a, b, b], [b, a, b], [b, b, a], [b, b, b]])
    return x, np.full(4, 1.0 / 24.0)


def collapsed_rule(d: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Conical product rule on the reference d-simplex, exact to total degree
    `degree`: Gauss-Jacobi with weight (1-u)^{d-1-k} along the k-th collapsed
    axis, mapped by x_k = u_k Π_{j<k} (1 - u_j).
    """
    n = degree // 2 + 1
    axes = []
    for k in range(d):
        alpha = d - 1 - k
        xi, w = roots_jacobi(n, alpha, 0.0)
        axes.append(((1.0 + xi) / 2.0, w / 2.0 ** (alpha + 1)))
    u = np.array(list(itertools.product(*(nodes for nodes, _ in axes))))
    weights = np.prod(np.array(list(itertools.product(*(w for _, w in axes)))), axis=1)
    x = np.empty_like(u)
    remaining = np.ones(u.shape[0])
    for k in range(d):
        x[:, k] = u[:, k] * remaining
        remaining = remaining * (1.0 - u[:, k])
    return x, weights


@lru_cache(maxsize=None)
def reference_rule(d: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule on the reference simplex; weights sum to 1/d!."""
    if d < 1 or d > 3:
        raise UnsupportedOrder(f"simplex rules are available for d = 1, 2, 3, not {d}")
    if degree < 0 or degree > MAX_SIMPLEX_DEGREE:
        raise UnsupportedOrder(f"no simplex rule of degree {degree} (max {MAX_SIMPLEX_DEGREE})")
    if d == 1:
        nodes, weights = gauss_interval(0.0, 1.0, degree // 2 + 1)
        x, w = nodes[:, None], weights
    elif d == 2 and degree <= 6:
        x, w = _triangle_table(degree)
    elif d == 3 and degree <= 2:
        x, w = _tetrahedron_table(degree)
    else:
        x, w = collapsed_rule(d, degree)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def simplex_rule(S, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Reference rule mapped affinely onto S; weights sum to |S|."""
    ref_x, ref_w = reference_rule(S.d, degree)
    points = S.vertices[0] + ref_x @ S.edge_matrix.T
    return points, ref_w * (math.factorial(S.d) * S.volume)


def spatial_rule(S, degree: int, subdivisions: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Simplex rule on every piece of S, each bisected subdivisions·d times."""
    points, weights = [], []
    for base in S.triangulate():
        for simplex in uniform_refine(base, subdivisions * base.d):
            sx, sw = simplex_rule(simplex, degree)
            points.append(sx)
            weights.append(sw)
    return np.vstack(points), np.concatenate(weights)


def temporal_rule(J: Interval, n: int, subdivisions: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss rule on each of the 2^subdivisions dyadic pieces of J."""
    pieces = [J]
    for _ in range(subdivisions):
        pieces = [child for piece in pieces for child in bisect_interval(piece)]
    rules = [gauss_interval(piece.a, piece.b, n) for piece in pieces]
    return np.concatenate([t for t, _ in rules]), np.concatenate([w for _, w in rules])


def tensor_rule(tt: np.ndarray, tw: np.ndarray, sx: np.ndarray, sw: np.ndarray,
                order: tuple[int, int] = (0, 0)) -> QuadratureRule:
    return QuadratureRule(
        np.repeat(tt, sx.shape[0]), np.tile(sx, (tt.shape[0], 1)),
        np.outer(tw, sw).ravel(), order,
    )


def prism_rule(J: Interval, S, temporal_order: int, spatial_order: int,
               subdivisions: int = 0) -> QuadratureRule:
    """
    Tensor rule on J×S: a `temporal_order`-point Gauss rule in t (exact to
    degree 2·temporal_order-1) times a simplex rule exact to total degree
    `spatial_order`.

    S may be a Simplex or a triangulated Region. With `subdivisions` = k the
    rule is applied on 2^k temporal pieces times 2^{k·d} bisected simplices.
    """
    if temporal_order < 1 or spatial_order < 1:
        raise UnsupportedOrder("prism rules need orders ≥ 1")
    tt, tw = temporal_rule(J, temporal_order, subdivisions)
    sx, sw = spatial_rule(S, spatial_order, subdivisions)
    return tensor_rule(tt, tw, sx, sw, order=(2 * temporal_order - 1, spatial_order))


def field_values(f, t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate f at the given nodes; NonFiniteValue on NaN/∞."""
    values = np.broadcast_to(np.asarray(f(t, x), dtype=float), t.shape)
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.isfinite(values)))
        raise NonFiniteValue(f"non-finite value at t={t[bad]!r}, x={x[bad].tolist()!r}")
    return values


def integrate(f, rule: QuadratureRule) -> float:
    return float(field_values(f, rule.times, rule.points) @ rule.weights)


def discrete_norm(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """(Σ w |v|^p)^{1/p}; for p = ∞ the max of |v|."""
    if values.size == 0:
        return 0.0
    magnitude = np.abs(values)
    if math.isinf(p):
        return float(magnitude.max())
    return float((weights @ magnitude ** p) ** (1.0 / p))


@lru_cache(maxsize=None)
def _barycentric_lattice(d: int, m: int) -> np.ndarray:
    """Barycentric points with denominators m (vertices, edges, centroids...)."""
    counts = [c for c in itertools.product(range(m + 1), repeat=d) if sum(c) <= m]
    lam = np.array(counts, dtype=float) / m
    return np.column_stack([1.0 - lam.sum(axis=1), lam])


def sup_norm(f, J: Interval, S, rule: QuadratureRule | None = None) -> float:
    """
    L_∞ estimate: the max over the rule's nodes, then over lattices of
    J×S refined dyadically, at most SUP_PASSES times, until the max changes
    by less than SUP_RTOL relative.
    """
    best = 0.0
    if rule is not None:
        best = discrete_norm(field_values(f, rule.times, rule.points), rule.weights, math.inf)
    for level in range(1, SUP_PASSES + 1):
        m = 2 ** level
        tt = np.linspace(J.a, J.b, m + 1)
        lattice = _barycentric_lattice(S.d, m)
        spatial = np.vstack([lattice @ simplex.vertices for simplex in S.triangulate()])
        times = np.repeat(tt, spatial.shape[0])
        points = np.tile(spatial, (tt.shape[0], 1))
        current = max(best, discrete_norm(field_values(f, times, points), None, math.inf))
        if level > 1 and current - best <= SUP_RTOL * current:
            return current
        best = current
    return best


def lp_norm(f, J: Interval, S, p: float, rule: QuadratureRule | None = None) -> float:
    """
    Discrete ‖f‖_{L_p(J×S)} for p ∈ (0, ∞].

    p < ∞ uses (Σ w_i |f(node_i)|^p)^{1/p}; p = ∞ uses sup_norm's refinement
    passes. Without an explicit rule a (4-point, degree 7) rule is used.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    if rule is None:
        rule = prism_rule(J, S, 4, 7)
    if math.isinf(p):
        return sup_norm(f, J, S, rule)
    return discrete_norm(field_values(f, rule.times, rule.points), rule.weights, p)
