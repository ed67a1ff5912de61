"""
The anisotropic polynomial space Π^{r1,r2}: polynomials of degree < r1 in t
and total degree < r2 in x.

Coefficient layout: time-major over i = 0..r1-1; inside each i the spatial
multi-indices α with |α| < r2 in graded-lexicographic order (by |α|, then
lexicographically descending, so x1 precedes x2). Serialized coefficient
vectors use exactly this order.

A polynomial may carry a LocalFrame, in which case it is a polynomial in the
element's reference coordinates τ = (t - t0)/T, z = (x - x0)/X. Fits on deep
refinement levels are done in such frames to keep Vandermonde matrices well
conditioned.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ANISOST.exceptions import AnisoError

logger = logging.getLogger(__name__)


class DimensionMismatch(AnisoError):
    """A point or coefficient vector does not match the polynomial space."""


class SingularMap(AnisoError):
    """The affine map of a pullback is not invertible."""


def _check_orders(r1: int, r2: int, d: int):
    if r1 < 1 or r2 < 1 or d < 1:
        raise ValueError(f"orders and dimension must be positive, got r1={r1}, r2={r2}, d={d}")


@lru_cache(maxsize=None)
def multi_indices(d: int, r2: int) -> tuple[tuple[int, ...], ...]:
    """All α ∈ ℕ0^d with |α| < r2 in graded-lexicographic order."""
    indices = []
    for total in range(r2):
        level = [a for a in itertools.product(range(total + 1), repeat=d) if sum(a) == total]
        indices.extend(sorted(level, reverse=True))
    return tuple(indices)


@lru_cache(maxsize=None)
def basis_index(r1: int, r2: int, d: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """The (i, α) pairs in coefficient order."""
    _check_orders(r1, r2, d)
    return tuple((i, alpha) for i in range(r1) for alpha in multi_indices(d, r2))


def basis_dimension(r1: int, r2: int, d: int) -> int:
    """r1 · #{α ∈ ℕ0^d : |α| < r2} = r1 · C(r2-1+d, d)."""
    _check_orders(r1, r2, d)
    return r1 * math.comb(r2 - 1 + d, d)


@dataclass(frozen=True, eq=False)
class LocalFrame:
    """Affine reference coordinates τ = (t - t0)/T, z = (x - x0)/X."""
    t0: float = 0.0
    T: float = 1.0
    x0: np.ndarray = field(default_factory=lambda: np.zeros(1))
    X: float = 1.0

    @classmethod
    def for_element(cls, J, S) -> LocalFrame:
        return cls(t0=J.a, T=J.length, x0=np.asarray(S.centroid, dtype=float), X=S.diameter)

    def to_local(self, t, x) -> tuple[np.ndarray, np.ndarray]:
        return (t - self.t0) / self.T, (x - self.x0) / self.X


def _as_points(t, x, d: int) -> tuple[np.ndarray, np.ndarray, bool]:
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != d:
        raise DimensionMismatch(f"expected points in R^{d}, got shape {x.shape}")
    x = x.reshape(-1, d)
    if x.shape[0] != t.shape[0]:
        if t.shape[0] == 1:
            t = np.full(x.shape[0], t[0])
        elif x.shape[0] == 1:
            x = np.repeat(x, t.shape[0], axis=0)
        else:
            raise DimensionMismatch(f"{t.shape[0]} times against {x.shape[0]} points")
    return t, x, scalar


def spatial_monomials(z: np.ndarray, r2: int) -> np.ndarray:
    """Matrix of z^α for |α| < r2, columns in graded-lex order."""
    n, d = z.shape
    powers = z[:, :, None] ** np.arange(r2)[None, None, :]
    columns = [
        np.prod(powers[:, np.arange(d), list(alpha)], axis=1)
        for alpha in multi_indices(d, r2)
    ]
    return np.column_stack(columns) if columns else np.ones((n, 1))


def vandermonde(r1: int, r2: int, tau, z) -> np.ndarray:
    """Rows [τ^i z^α] in coefficient order, shape (n, basis_dimension)."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    z = np.atleast_2d(np.asarray(z, dtype=float))
    temporal = tau[:, None] ** np.arange(r1)[None, :]
    spatial = spatial_monomials(z, r2)
    return (temporal[:, :, None] * spatial[:, None, :]).reshape(tau.shape[0], -1)


@dataclass(frozen=True, eq=False)
class AnisoPolynomial:
    """
    An element of Π^{r1,r2}_{t,x}.

    Fields:
        r1 (int): temporal order, degree in t is < r1
        r2 (int): spatial order, total degree in x is < r2
        d (int): spatial dimension
        coeffs (ndarray): coefficients in the documented (i, α) order
        frame (LocalFrame | None): reference coordinates, None for global ones
    """
    r1: int
    r2: int
    d: int
    coeffs: np.ndarray
    frame: LocalFrame | None = None

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float).ravel()
        expected = basis_dimension(self.r1, self.r2, self.d)
        if coeffs.shape[0] != expected:
            raise DimensionMismatch(f"expected {expected} coefficients, got {coeffs.shape[0]}")
        coeffs.setflags(write=False)
        object.__setattr__(self, 'coeffs', coeffs)

    @classmethod
    def zero(cls, r1: int, r2: int, d: int, frame: LocalFrame | None = None) -> AnisoPolynomial:
        return cls(r1, r2, d, np.zeros(basis_dimension(r1, r2, d)), frame)

    @classmethod
    def random(cls, r1: int, r2: int, d: int, rng: np.random.Generator,
               frame: LocalFrame | None = None) -> AnisoPolynomial:
        return cls(r1, r2, d, rng.standard_normal(basis_dimension(r1, r2, d)), frame)

    @classmethod
    def from_terms(cls, r1: int, r2: int, d: int, terms: dict) -> AnisoPolynomial:
        """Build from {(i, α): coefficient}; unknown index pairs raise DimensionMismatch."""
        position = {pair: k for k, pair in enumerate(basis_index(r1, r2, d))}
        coeffs = np.zeros(len(position))
        for (i, alpha), value in terms.items():
            pair = (i, tuple(alpha))
            if pair not in position:
                raise DimensionMismatch(f"term {pair} lies outside Π^{{{r1},{r2}}}")
            coeffs[position[pair]] += value
        return cls(r1, r2, d, coeffs)

    @property
    def dimension(self) -> int:
        return self.coeffs.shape[0]

    def _local(self, t, x):
        t, x, scalar = _as_points(t, x, self.d)
        if self.frame is not None:
            t, x = self.frame.to_local(t, x)
        return t, x, scalar

    def evaluate(self, t, x, method: str = 'horner'):
        """Value at (t, x); vectorized over rows of x."""
        tau, z, scalar = self._local(t, x)
        if method == 'horner':
            blocks = self.coeffs.reshape(self.r1, -1)
            spatial = spatial_monomials(z, self.r2) @ blocks.T
            values = spatial[:, -1].copy()
            for i in range(self.r1 - 2, -1, -1):
                values = values * tau + spatial[:, i]
        elif method == 'naive':
            values = np.zeros(tau.shape[0])
            for c, (i, alpha) in zip(self.coeffs, basis_index(self.r1, self.r2, self.d)):
                values += c * tau ** i * np.prod(z ** np.array(alpha), axis=1)
        else:
            raise ValueError(f"unknown evaluation method {method!r}")
        return float(values[0]) if scalar else values

    def __call__(self, t, x):
        return self.evaluate(t, x)

    def terms(self) -> dict:
        return {pair: c for pair, c in zip(basis_index(self.r1, self.r2, self.d), self.coeffs)}


def evaluate(P: AnisoPolynomial, t, x, method: str = 'horner'):
    return P.evaluate(t, x, method=method)


def _linear_power(row: np.ndarray, const: float, e: int, d: int) -> dict:
    """(row·z + const)^e as {β: coefficient}."""
    result = {(0,) * d: 1.0}
    form = {(0,) * d: const}
    for k in range(d):
        unit = [0] * d
        unit[k] = 1
        form[tuple(unit)] = form.get(tuple(unit), 0.0) + row[k]
    for _ in range(e):
        result = _multiply(result, form)
    return result


def _multiply(left: dict, right: dict) -> dict:
    product = {}
    for a, ca in left.items():
        if ca == 0.0:
            continue
        for b, cb in right.items():
            if cb == 0.0:
                continue
            key = tuple(i + j for i, j in zip(a, b))
            product[key] = product.get(key, 0.0) + ca * cb
    return product


def pullback(P: AnisoPolynomial, a: float, b: float, M=None, v=None) -> AnisoPolynomial:
    """
    Q(τ, z) = P(aτ + b, M z + v) expressed in global monomials.

    The temporal map acts on t alone and the spatial one on x alone, so the
    composition stays in Π^{r1,r2}; coefficients are expanded exactly by
    binomial and multinomial products.
    """
    d = P.d
    M = np.eye(d) if M is None else np.atleast_2d(np.asarray(M, dtype=float))
    v = np.zeros(d) if v is None else np.asarray(v, dtype=float).reshape(d)
    if M.shape != (d, d):
        raise DimensionMismatch(f"spatial map must be {d}x{d}, got {M.shape}")
    if a == 0 or not np.isfinite(a):
        raise SingularMap("temporal scaling a must be nonzero")
    if abs(np.linalg.det(M)) == 0 or np.linalg.cond(M) > 1e12:
        raise SingularMap("spatial matrix M is singular")

    # Fold the polynomial's own frame into the map.
    if P.frame is not None:
        frame = P.frame
        a, b = a / frame.T, (b - frame.t0) / frame.T
        M, v = M / frame.X, (v - frame.x0) / frame.X

    temporal = [
        [math.comb(i, k) * a ** k * b ** (i - k) for k in range(i + 1)]
        for i in range(P.r1)
    ]
    power_cache = {}

    def spatial_expansion(alpha):
        result = {(0,) * d: 1.0}
        for j, e in enumerate(alpha):
            if e == 0:
                continue
            if (j, e) not in power_cache:
                power_cache[(j, e)] = _linear_power(M[j], v[j], e, d)
            result = _multiply(result, power_cache[(j, e)])
        return result

    position = {pair: k for k, pair in enumerate(basis_index(P.r1, P.r2, d))}
    coeffs = np.zeros(P.dimension)
    expansions = {}
    for c, (i, alpha) in zip(P.coeffs, basis_index(P.r1, P.r2, d)):
        if c == 0.0:
            continue
        if alpha not in expansions:
            expansions[alpha] = spatial_expansion(alpha)
        for k, tcoef in enumerate(temporal[i]):
            for beta, scoef in expansions[alpha].items():
                coeffs[position[(k, beta)]] += c * tcoef * scoef
    return AnisoPolynomial(P.r1, P.r2, d, coeffs)


def to_global(P: AnisoPolynomial) -> AnisoPolynomial:
    """The same polynomial with its local frame expanded away."""
    if P.frame is None:
        return P
    return pullback(P, 1.0, 0.0)


class PiecewisePolynomial:
    """
    Σ 1_{J×S} P_{J×S} over a partition.

    Points on shared faces are assigned to the first element (in id order)
    that contains them.
    """

    def __init__(self, partition, pieces: dict):
        self.partition = partition
        self.pieces = pieces

    def __len__(self) -> int:
        return len(self.pieces)

    def piece(self, element) -> AnisoPolynomial:
        return self.pieces[element.key]

    def evaluate(self, t, x):
        d = self.partition.d
        t, x, scalar = _as_points(t, x, d)
        owner = self.partition.locate(t, x)
        values = np.full(t.shape[0], np.nan)
        for idx in np.unique(owner[owner >= 0]):
            mask = owner == idx
            element = self.partition.elements[idx]
            values[mask] = self.pieces[element.key].evaluate(t[mask], x[mask])
        return float(values[0]) if scalar else values

    def __call__(self, t, x):
        return self.evaluate(t, x)
