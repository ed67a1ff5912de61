"""
Anisotropic Besov seminorms through the dyadic-sum form.

With r_i = ⌊s_i⌋ + 1 and the element's own scales L_t = |J|, L_x = diam(D):

    |f|^q ≈ Σ_n (2^n / L_t)^{s1 q} ω_{r1,t}(f, 2^{-n} L_t)^q
          + Σ_n (2^n / L_x)^{s2 q} ω_{r2,x}(f, 2^{-n} L_x)^q,    n = 0..n_max.

Per-level terms are reported for the element rescaled to L_t = L_x = 1,
where the moduli pick up the factor (L_t·L_x^d)^{-1/p}; on the unit
cylinder the two seminorms coincide.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .moduli import ProfileCache, SamplingConfig, SPATIAL, TEMPORAL, modulus_profile

logger = logging.getLogger(__name__)

TRUNCATION_RATIO = 0.9


class TruncationWarning(UserWarning):
    """The last dyadic terms have not decayed; n_max is too small."""


def smoothness_orders(s1: float, s2: float) -> tuple[int, int]:
    """r_i = ⌊s_i⌋ + 1."""
    return math.floor(s1) + 1, math.floor(s2) + 1


@dataclass
class BesovEstimate:
    """
    Dyadic estimate of |f|_{B^{s1,s2}_{q,q}(J×D)}.

    Fields:
        seminorm (float): value on the actual element
        unit_seminorm (float): value after rescaling to |J| = diam(D) = 1
        s1, s2 (float): smoothness pair
        p, q (float): exponents, may be ∞
        n_max (int): last dyadic level
        r1, r2 (int): difference orders ⌊s_i⌋ + 1
        per_level (list): (n, temporal term, spatial term), unit-scaled
        scale (dict): time_length, diameter and the modulus factor
        tail_ratio (float): ratio of the last two combined terms
        tail_estimate (float): geometric tail of the unit seminorm^q beyond n_max
        truncated (bool): tail_ratio > 0.9
        averaged (bool): built from averaged moduli
    """
    seminorm: float
    unit_seminorm: float
    s1: float
    s2: float
    p: float
    q: float
    n_max: int
    r1: int
    r2: int
    per_level: list = field(default_factory=list)
    scale: dict = field(default_factory=dict)
    tail_ratio: float = 0.0
    tail_estimate: float = 0.0
    truncated: bool = False
    averaged: bool = False
    sample_meta: dict = field(default_factory=dict)


def _combine(values, q: float) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if math.isinf(q):
        return float(values.max())
    return float(np.sum(values ** q) ** (1.0 / q))


def besov_seminorm(f, J, D, s1: float, s2: float, p: float, q: float, n_max: int = 10,
                   sampling: SamplingConfig | None = None, *, averaged: bool = False,
                   executor=None, cache: ProfileCache | None = None) -> BesovEstimate:
    """Dyadic Besov seminorm of f on J×D; warns with TruncationWarning when the sum has not decayed."""
    if not (s1 > 0 and s2 > 0):
        raise ValueError("s1 and s2 must be positive")
    if not q > 0:
        raise ValueError("q must be positive")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    sampling = sampling or SamplingConfig()
    if n_max > sampling.n_mag:
        logger.warning("n_max=%d exceeds n_mag=%d; levels past n_mag read zero moduli",
                       n_max, sampling.n_mag)
    r1, r2 = smoothness_orders(s1, s2)
    d = D.d
    time_length, diameter = J.length, D.diameter
    factor = 1.0 if math.isinf(p) else (time_length * diameter ** d) ** (-1.0 / p)
    region = sampling.averaging_region

    temporal = modulus_profile(f, J, D, TEMPORAL, r1, p, sampling, executor=executor, cache=cache)
    spatial = modulus_profile(f, J, D, SPATIAL, r2, p, sampling, executor=executor, cache=cache)

    def query(profile, delta):
        return profile.averaged(delta, region) if averaged else profile.sup(delta)

    per_level = []
    for n in range(n_max + 1):
        t_term = 2.0 ** (n * s1) * factor * query(temporal, 2.0 ** -n * time_length)
        x_term = 2.0 ** (n * s2) * factor * query(spatial, 2.0 ** -n * diameter)
        per_level.append((n, t_term, x_term))

    t_terms = np.array([t for _, t, _ in per_level])
    x_terms = np.array([x for _, _, x in per_level])
    unit = _combine(np.concatenate([t_terms, x_terms]), q)
    # Back to the actual element: moduli lose the factor, levels gain L^{-s}.
    actual = _combine(np.concatenate([
        t_terms / factor * time_length ** -s1,
        x_terms / factor * diameter ** -s2,
    ]), q)

    combined = [_combine([t, x], q) for _, t, x in per_level]
    tail_ratio = combined[-1] / combined[-2] if combined[-2] > 0 else 0.0
    truncated = tail_ratio > TRUNCATION_RATIO
    if math.isinf(q):
        tail_estimate = combined[-1] if truncated else 0.0
    elif tail_ratio < 1.0:
        rho = tail_ratio ** q
        tail_estimate = combined[-1] ** q * rho / (1.0 - rho)
    else:
        tail_estimate = math.inf
    if truncated:
        warnings.warn(
            f"dyadic sum truncated at n_max={n_max} with last-term ratio {tail_ratio:.3f}",
            TruncationWarning, stacklevel=2,
        )
        logger.warning("Besov sum not decayed at n_max=%d (ratio %.3f)", n_max, tail_ratio)

    return BesovEstimate(
        seminorm=actual, unit_seminorm=unit, s1=s1, s2=s2, p=p, q=q, n_max=n_max,
        r1=r1, r2=r2, per_level=per_level,
        scale={'time_length': time_length, 'diameter': diameter, 'factor': factor},
        tail_ratio=tail_ratio, tail_estimate=tail_estimate, truncated=truncated,
        averaged=averaged,
        sample_meta={'temporal': temporal.meta, 'spatial': spatial.meta},
    )


@dataclass
class PartitionSeminorm:
    """
    Σ over elements of the local seminorm^q (max for q = ∞).

    Fields:
        total (float): the sum
        local (dict): element id → local seminorm
        global_q (float | None): global seminorm^q when requested
        constant (float | None): total / global_q
    """
    total: float
    local: dict
    global_q: float | None = None
    constant: float | None = None


def partition_seminorm_sum(f, P, s1: float, s2: float, p: float, q: float, n_max: int = 10,
                           sampling: SamplingConfig | None = None, *, compare_global: bool = False,
                           averaged: bool = False, executor=None,
                           cache: ProfileCache | None = None) -> PartitionSeminorm:
    """Sum of local seminorms^q over P, optionally against the global seminorm^q."""
    cache = cache if cache is not None else ProfileCache()

    def local(element):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', TruncationWarning)
            estimate = besov_seminorm(f, element.time, element.space, s1, s2, p, q, n_max,
                                      sampling, averaged=averaged, cache=cache)
        return element.element_id, estimate.seminorm

    pairs = list(executor.map(local, P.elements) if executor is not None else map(local, P.elements))
    values = np.array([value for _, value in pairs])
    total = float(values.max()) if math.isinf(q) else float(np.sum(values ** q))

    global_q = constant = None
    if compare_global:
        if len(P) == 1:
            element = P.elements[0]
            J, D = element.time, element.space
        else:
            J, D = P.time_span(), P.spatial_domain()
        estimate = besov_seminorm(f, J, D, s1, s2, p, q, n_max, sampling,
                                  averaged=averaged, executor=executor, cache=cache)
        global_q = estimate.seminorm if math.isinf(q) else estimate.seminorm ** q
        constant = total / global_q if global_q > 0 else None
    return PartitionSeminorm(total, dict(pairs), global_q, constant)


def level_slopes(estimate: BesovEstimate) -> dict:
    """
    Least-squares slopes of log2 of the per-level terms against n.

    A negative slope means the terms decay; a slope near zero means s_i sits
    at the field's regularity threshold.
    """
    slopes = {}
    for name, column in (('temporal', 1), ('spatial', 2)):
        levels = np.array([row[0] for row in estimate.per_level if row[column] > 0])
        terms = np.array([row[column] for row in estimate.per_level if row[column] > 0])
        slopes[name] = float(np.polyfit(levels, np.log2(terms), 1)[0]) if levels.size >= 2 else None
    return slopes
