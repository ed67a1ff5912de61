"""
Built-in scalar fields on space-time cylinders.

Every evaluator is vectorized: it receives t of shape (n,) and x of shape
(n, d) and returns n values. Claimed regularity is metadata for experiment
reports only; no estimator reads it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ANISOST.exceptions import AnisoError
from Polynomials.polyspace import AnisoPolynomial, DimensionMismatch

logger = logging.getLogger(__name__)

BUILTIN_NAMES = (
    'polynomial', 'smooth_wave', 'temporal_cusp',
    'spatial_corner', 'mixed_cusp', 'indicator_strip',
)

# Subdivision levels applied to every quadrature rule on a rough field.
ROUGH_SUBDIVISIONS = 2


class UnknownName(AnisoError):
    """No built-in field has the requested name."""


class InvalidParameter(AnisoError):
    """A field parameter is missing or outside its admissible range."""


@dataclass(frozen=True, eq=False)
class ScalarField:
    """
    A callable f(t, x) → ℝ with metadata.

    Fields:
        evaluator (callable): vectorized (t[n], x[n, d]) → values[n]
        label (str): builtin name or a user label
        d (int): spatial dimension
        params (dict): parameters the field was built with
        known_regularity (dict | None): claimed {"s1", "s2", "q"} if known
        rough (bool): has a kink or jump that plain Gauss rules under-resolve
    """
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str
    d: int
    params: dict = field(default_factory=dict)
    known_regularity: dict | None = None
    rough: bool = False

    @property
    def quadrature_subdivisions(self) -> int:
        """Default subdivision depth for quadrature rules on this field."""
        return ROUGH_SUBDIVISIONS if self.rough else 0

    def __call__(self, t, x):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.d:
            raise DimensionMismatch(f"field {self.label} expects points in R^{self.d}")
        x = x.reshape(-1, self.d)
        if t.shape[0] == 1 and x.shape[0] > 1:
            t = np.full(x.shape[0], t[0])
        elif x.shape[0] == 1 and t.shape[0] > 1:
            x = np.repeat(x, t.shape[0], axis=0)
        values = np.asarray(self.evaluator(t, x), dtype=float)
        return float(values[0]) if scalar else values


def _point(params: dict, key: str, d: int, default: float) -> np.ndarray:
    value = params.get(key, default)
    point = np.full(d, float(value)) if np.ndim(value) == 0 else np.asarray(value, dtype=float)
    if point.shape != (d,):
        raise InvalidParameter(f"{key} must be a scalar or a point in R^{d}")
    return point


def _exponent(params: dict, key: str, default: float) -> float:
    value = float(params.get(key, default))
    if not value > 0:
        raise InvalidParameter(f"{key} must be positive, got {value}")
    return value


def polynomial_field(d: int, poly=None, **params) -> ScalarField:
    if poly is None:
        raise InvalidParameter("polynomial needs a 'poly' parameter")
    if not isinstance(poly, AnisoPolynomial):
        try:
            poly = AnisoPolynomial(int(poly['r1']), int(poly['r2']), d, poly['coeffs'])
        except (KeyError, TypeError, ValueError, DimensionMismatch) as exc:
            raise InvalidParameter(f"invalid polynomial specification: {exc}") from exc
    if poly.d != d:
        raise InvalidParameter(f"polynomial lives in d={poly.d}, field in d={d}")
    return ScalarField(
        poly.evaluate, 'polynomial', d, {'poly': poly, **params},
        known_regularity={'exact_orders': (poly.r1, poly.r2)},
    )


def smooth_wave(d: int, k: float = 1.0, **params) -> ScalarField:
    k = float(k)

    def evaluator(t, x):
        return np.sin(k * np.pi * t) * np.prod(np.sin(k * np.pi * x), axis=1)

    return ScalarField(evaluator, 'smooth_wave', d, {'k': k, **params},
                       known_regularity={'s1': np.inf, 's2': np.inf, 'q': None})


def temporal_cusp(d: int, **params) -> ScalarField:
    alpha = _exponent(params, 'alpha', 0.5)
    t0 = float(params.get('t0', 0.5))

    def evaluator(t, x):
        return np.abs(t - t0) ** alpha * np.exp(-np.sum(x ** 2, axis=1))

    return ScalarField(evaluator, 'temporal_cusp', d, {'alpha': alpha, 't0': t0},
                       known_regularity={'s1': alpha + 0.5, 's2': np.inf, 'q': 2},
                       rough=True)


def spatial_corner(d: int, **params) -> ScalarField:
    beta = _exponent(params, 'beta', 0.5)
    x0 = _point(params, 'x0', d, 0.5)

    def evaluator(t, x):
        return np.linalg.norm(x - x0, axis=1) ** beta * (1.0 + t)

    return ScalarField(evaluator, 'spatial_corner', d, {'beta': beta, 'x0': x0.tolist()},
                       known_regularity={'s1': np.inf, 's2': beta + d / 2.0, 'q': 2},
                       rough=True)


def mixed_cusp(d: int, **params) -> ScalarField:
    alpha = _exponent(params, 'alpha', 0.5)
    beta = _exponent(params, 'beta', 0.5)
    t0 = float(params.get('t0', 0.5))
    x0 = _point(params, 'x0', d, 0.5)

    def evaluator(t, x):
        return np.abs(t - t0) ** alpha + np.linalg.norm(x - x0, axis=1) ** beta

    return ScalarField(
        evaluator, 'mixed_cusp', d,
        {'alpha': alpha, 'beta': beta, 't0': t0, 'x0': x0.tolist()},
        known_regularity={'s1': alpha + 0.5, 's2': beta + d / 2.0, 'q': 2},
        rough=True,
    )


def indicator_strip(d: int, **params) -> ScalarField:
    center = float(params.get('center', 0.3))
    velocity = float(params.get('velocity', 0.4))
    width = _exponent(params, 'width', 0.2)

    def evaluator(t, x):
        return (np.abs(x[:, 0] - (center + velocity * t)) < 0.5 * width).astype(float)

    return ScalarField(
        evaluator, 'indicator_strip', d,
        {'center': center, 'velocity': velocity, 'width': width},
        known_regularity={'s1': 0.5, 's2': 0.5, 'q': 2},
        rough=True,
    )


_BUILDERS = {
    'polynomial': polynomial_field,
    'smooth_wave': smooth_wave,
    'temporal_cusp': temporal_cusp,
    'spatial_corner': spatial_corner,
    'mixed_cusp': mixed_cusp,
    'indicator_strip': indicator_strip,
}


def builtin(name: str, params: dict | None = None, d: int = 1) -> ScalarField:
    """The named built-in field in dimension d; UnknownName for other names."""
    if name not in _BUILDERS:
        raise UnknownName(f"unknown field {name!r}; choose one of {', '.join(BUILTIN_NAMES)}")
    params = dict(params or {})
    params.pop('d', None)
    try:
        return _BUILDERS[name](d, **params)
    except TypeError as exc:
        raise InvalidParameter(f"invalid parameters for {name}: {exc}") from exc


def field_from_spec(spec: dict, d: int) -> ScalarField:
    """Build a field from {"name": ..., "params": {...}} as used by the CLI."""
    return builtin(spec['name'], spec.get('params') or {}, d=d)
