"""
Jackson and Whitney verification harnesses.

A check compares the local best-fit error (lhs) with the right-hand side of
the corresponding inequality and reports the ratio, which is the empirical
constant. Constants are reported, never asserted.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ANISOST.exceptions import AnisoError
from Mesh.geometry import Prism, split_prism
from Smoothness.besov import TruncationWarning, besov_seminorm, smoothness_orders
from Smoothness.moduli import ProfileCache, SamplingConfig, SPATIAL, TEMPORAL, sup_modulus

from .fitting import best_fit, fit_element

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-10
RHS_FLOOR = 1e-14


class DegenerateRHS(AnisoError):
    """The moduli vanish while the fit error does not; the estimators disagree."""


class PreconditionViolated(AnisoError):
    """1/(1/s1 + d/s2) - 1/q + 1/p must be positive for the Whitney estimate."""


@dataclass
class CheckReport:
    """
    One row of a Jackson or Whitney check.

    Fields:
        element_id (str): stable id of the element
        measure (float): |J×S|
        lhs (float): best-fit error
        rhs (float): right-hand side of the inequality
        ratio (float | None): lhs/rhs, None in the exact case
        exact (bool): both sides vanish
        level (int): prism level of the element
        seminorm (float | None): local Besov seminorm (Whitney only)
        exponent (float | None): Whitney exponent (Whitney only)
        meta (dict): solver and sampling metadata
    """
    element_id: str
    measure: float
    lhs: float
    rhs: float
    ratio: float | None
    exact: bool = False
    level: int = 0
    seminorm: float | None = None
    exponent: float | None = None
    meta: dict = field(default_factory=dict)


def whitney_exponent(s1: float, s2: float, d: int, p: float, q: float) -> float:
    """1/(1/s1 + d/s2) - 1/q + 1/p; PreconditionViolated unless positive."""
    exponent = 1.0 / (1.0 / s1 + d / s2) - 1.0 / q + 1.0 / p
    if exponent <= 0:
        raise PreconditionViolated(
            f"Whitney exponent {exponent:.6g} ≤ 0 for s=({s1}, {s2}), d={d}, p={p}, q={q}"
        )
    return exponent


def _subdivisions(sampling: SamplingConfig | None) -> int:
    return sampling.subdivisions if sampling is not None else 0


def jackson_check(f, J, S, r1: int, r2: int, p: float, sampling: SamplingConfig | None = None, *,
                  element: Prism | None = None, executor=None,
                  cache: ProfileCache | None = None) -> CheckReport:
    """lhs = best-fit error, rhs = ω_{r1,t}(f, |J|)_p + ω_{r2,x}(f, diam S)_p."""
    element = element or Prism(J, S)
    fit = best_fit(f, J, S, r1, r2, p, element=element, subdivisions=_subdivisions(sampling))
    temporal = sup_modulus(f, J, S, TEMPORAL, r1, J.length, p, sampling,
                           executor=executor, cache=cache)
    spatial = sup_modulus(f, J, S, SPATIAL, r2, S.diameter, p, sampling,
                          executor=executor, cache=cache)
    lhs, rhs = fit.error, temporal.value + spatial.value
    meta = {'solver': fit.solver_meta, 'temporal': temporal.value, 'spatial': spatial.value,
            'sampling': 'sup over sampled shifts, a lower estimate'}
    if rhs <= RHS_FLOOR:
        if lhs > EXACT_TOL:
            raise DegenerateRHS(
                f"moduli vanish on {element.element_id} but the fit error is {lhs:.3e}"
            )
        return CheckReport(element.element_id, element.measure, lhs, rhs, None, True,
                           element.level, meta=meta)
    return CheckReport(element.element_id, element.measure, lhs, rhs, lhs / rhs, False,
                       element.level, meta=meta)


def whitney_check(f, J, S, s1: float, s2: float, p: float, q: float,
                  sampling: SamplingConfig | None = None, *, n_max: int = 10,
                  element: Prism | None = None, executor=None,
                  cache: ProfileCache | None = None) -> CheckReport:
    """lhs = best-fit error in Π^{r1,r2}, r_i = ⌊s_i⌋+1; rhs = |J×S|^exponent · |f|_B(J×S)."""
    exponent = whitney_exponent(s1, s2, S.d, p, q)
    element = element or Prism(J, S)
    r1, r2 = smoothness_orders(s1, s2)
    fit = best_fit(f, J, S, r1, r2, p, element=element, subdivisions=_subdivisions(sampling))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', TruncationWarning)
        estimate = besov_seminorm(f, J, S, s1, s2, p, q, n_max, sampling,
                                  executor=executor, cache=cache)
    lhs = fit.error
    rhs = element.measure ** exponent * estimate.seminorm
    meta = {'solver': fit.solver_meta, 'r': [r1, r2], 'truncated': bool(caught),
            'tail_ratio': estimate.tail_ratio}
    if rhs <= RHS_FLOOR and lhs <= EXACT_TOL:
        return CheckReport(element.element_id, element.measure, lhs, rhs, None, True,
                           element.level, estimate.seminorm, exponent, meta)
    ratio = lhs / rhs if rhs > 0 else math.inf
    return CheckReport(element.element_id, element.measure, lhs, rhs, ratio, False,
                       element.level, estimate.seminorm, exponent, meta)


@dataclass
class SweepResult:
    """
    Checks on a chain of representative elements, one per refinement level.

    Fields:
        rows (list[CheckReport]): one report per level
        slope (float | None): fitted log-log slope
        raw_slope (float | None): slope of log lhs against log |J×S|
        target (float | None): exponent the slope is compared with
    """
    rows: list
    slope: float | None = None
    raw_slope: float | None = None
    target: float | None = None


def loglog_slope(x, y) -> float | None:
    """Least-squares slope of log y against log x over the positive pairs."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if keep.sum() < 2:
        return None
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def representative_chain(P0, s1: float, s2: float, levels: int) -> list[Prism]:
    """
    Elements of levels 0..levels, each an atomic child of the previous one.

    The chain follows the child nearest to the centre of the first root, so
    every level of a uniform refinement is represented by an interior element.
    """
    current = P0.elements[0]
    anchor_t, anchor_x = current.time.midpoint, current.space.centroid
    chain = [current]
    for _ in range(levels):
        children = split_prism(current, s1, s2)
        distance = [
            (child.time.midpoint - anchor_t) ** 2 / current.time.length ** 2
            + float(np.sum((child.space.centroid - anchor_x) ** 2)) / current.diameter ** 2
            for child in children
        ]
        current = children[int(np.argmin(distance))]
        chain.append(current)
    return chain


def jackson_sweep(f, P0, r1: int, r2: int, p: float, s1: float, s2: float, levels: int,
                  sampling: SamplingConfig | None = None, *, executor=None) -> SweepResult:
    """Jackson ratios along a representative chain; slope of log ratio against log |J×S|."""
    cache = ProfileCache()
    chain = representative_chain(P0, s1, s2, levels)

    def check(element):
        return jackson_check(f, element.time, element.space, r1, r2, p, sampling,
                             element=element, cache=cache)

    rows = list(executor.map(check, chain) if executor is not None else map(check, chain))
    ratios = [row.ratio if row.ratio is not None else 0.0 for row in rows]
    result = SweepResult(rows, slope=loglog_slope([row.measure for row in rows], ratios),
                         raw_slope=loglog_slope([row.measure for row in rows],
                                                [row.lhs for row in rows]),
                         target=0.0)
    logger.info("jackson sweep: %d levels, ratio slope %s", len(rows), result.slope)
    return result


def whitney_sweep(f, P0, s1: float, s2: float, p: float, q: float, levels: int,
                  sampling: SamplingConfig | None = None, *, n_max: int = 10,
                  executor=None) -> SweepResult:
    """
    Whitney checks along a representative chain.

    slope is fitted on log(lhs / local seminorm) against log |J×S| and is
    compared with the Whitney exponent; raw_slope uses lhs alone.
    """
    exponent = whitney_exponent(s1, s2, P0.d, p, q)
    cache = ProfileCache()
    chain = representative_chain(P0, s1, s2, levels)

    def check(element):
        return whitney_check(f, element.time, element.space, s1, s2, p, q, sampling,
                             n_max=n_max, element=element, cache=cache)

    rows = list(executor.map(check, chain) if executor is not None else map(check, chain))
    measures = [row.measure for row in rows]
    normalized = [row.lhs / row.seminorm if row.seminorm else 0.0 for row in rows]
    result = SweepResult(rows, slope=loglog_slope(measures, normalized),
                         raw_slope=loglog_slope(measures, [row.lhs for row in rows]),
                         target=exponent)
    logger.info("whitney sweep: %d levels, slope %s against exponent %.4f",
                len(rows), result.slope, exponent)
    return result


@dataclass
class GlobalWhitney:
    """
    Piecewise best-fit error against max |J×S|^exponent · |f|_B(I×D).

    Fields:
        error (float): (Σ local errors^p)^{1/p}, max for p = ∞
        rhs (float): the global right-hand side
        ratio (float | None): error/rhs
        exponent (float): Whitney exponent
        seminorm (float): global seminorm
        elements (int): number of elements
    """
    error: float
    rhs: float
    ratio: float | None
    exponent: float
    seminorm: float
    elements: int


def combine_errors(errors, p: float) -> float:
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        return 0.0
    if math.isinf(p):
        return float(errors.max())
    return float(np.sum(errors ** p) ** (1.0 / p))


def global_whitney(f, P, s1: float, s2: float, p: float, q: float,
                   sampling: SamplingConfig | None = None, *, n_max: int = 10,
                   executor=None) -> GlobalWhitney:
    exponent = whitney_exponent(s1, s2, P.d, p, q)
    r1, r2 = smoothness_orders(s1, s2)

    def fit(element):
        return fit_element(f, element, r1, r2, p, _subdivisions(sampling)).error

    errors = list(executor.map(fit, P.elements) if executor is not None else map(fit, P.elements))
    error = combine_errors(errors, p)
    J, D = P.time_span(), P.spatial_domain()
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', TruncationWarning)
        seminorm = besov_seminorm(f, J, D, s1, s2, p, q, n_max, sampling,
                                  executor=executor).seminorm
    rhs = max(el.measure for el in P.elements) ** exponent * seminorm
    ratio = error / rhs if rhs > RHS_FLOOR else None
    return GlobalWhitney(error, rhs, ratio, exponent, seminorm, len(P))
