"""
Atomic anisotropic refinement, the greedy loop and the direct-estimate driver.

greedy(δ) marks every element whose discrete best-fit error exceeds δ,
splits all marked elements atomically and repeats until nothing is marked.
Marking runs in parallel; splitting is sequential in key order, so a run is
reproducible for any worker count.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ANISOST.exceptions import AnisoError
from Approximation.checks import PreconditionViolated, combine_errors, loglog_slope, whitney_exponent
from Approximation.fitting import LocalFit, default_rule, fit_element
from Mesh.geometry import Partition, Prism, split_count, split_prism
from Polynomials.polyspace import PiecewisePolynomial
from Polynomials.quadrature import discrete_norm, field_values, lp_norm
from Smoothness.besov import TruncationWarning, besov_seminorm
from Smoothness.moduli import SamplingConfig

logger = logging.getLogger(__name__)

__all__ = [
    'RefinementConfig', 'GreedyRound', 'GreedyTrace', 'AuditReport', 'DirectRun', 'RateSweep',
    'MaxRoundsExceeded', 'ElementLimitExceeded',
    'split_count', 'atomic_split', 'greedy', 'audit', 'direct_theorem_run', 'rate_sweep',
]

AUDIT_SLACK = 1e-8
ZERO_SEMINORM = 1e-8


class MaxRoundsExceeded(AnisoError):
    """The greedy loop still marks elements after max_rounds rounds; `.trace` is partial."""

    def __init__(self, message: str, trace: GreedyTrace | None = None):
        super().__init__(message)
        self.trace = trace


class ElementLimitExceeded(AnisoError):
    """The next round would grow the partition beyond max_elements."""


@dataclass(frozen=True)
class RefinementConfig:
    """
    Parameters of a greedy or direct-estimate run.

    Fields:
        s1, s2 (float): smoothness pair, drives the split counts
        d (int): spatial dimension
        r1, r2 (int): polynomial orders of the local fits
        p, q (float): error and Besov exponents
        delta (float | None): greedy tolerance
        epsilon (float | None): direct-estimate accuracy, sets delta
        max_rounds (int): greedy round limit
        max_elements (int): hard cap on the partition size
        sampling (SamplingConfig): moduli sampling for the Besov seminorm
        n_max (int): dyadic levels of the Besov sum
        fit_subdivisions (int): quadrature subdivisions of the marking rule
        audit_subdivisions (int): extra subdivisions of the audit rule
        require_direct (bool): enforce r_i > s_i
    """
    s1: float
    s2: float
    d: int
    r1: int
    r2: int
    p: float = 2.0
    q: float = 2.0
    delta: float | None = None
    epsilon: float | None = None
    max_rounds: int = 30
    max_elements: int = 10 ** 6
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    n_max: int = 10
    fit_subdivisions: int = 0
    audit_subdivisions: int = 1
    require_direct: bool = False

    def __post_init__(self):
        if not (self.s1 > 0 and self.s2 > 0):
            raise ValueError("s1 and s2 must be positive")
        if self.r1 < 1 or self.r2 < 1:
            raise ValueError("r1 and r2 must be at least 1")
        if not (self.p > 0 and self.q > 0):
            raise ValueError("p and q must be positive")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.require_direct and not (self.r1 > self.s1 and self.r2 > self.s2):
            raise PreconditionViolated(
                f"direct estimates need r_i > s_i, got r=({self.r1}, {self.r2}), "
                f"s=({self.s1}, {self.s2})"
            )
        whitney_exponent(self.s1, self.s2, self.d, self.p, self.q)

    @property
    def delta_exponent(self) -> float:
        """1 + 1/(s1 p) + d/(s2 p), the power of ε in the direct-estimate tolerance."""
        if math.isinf(self.p):
            return 1.0
        return 1.0 + 1.0 / (self.s1 * self.p) + self.d / (self.s2 * self.p)

    @property
    def complexity_exponent(self) -> float:
        """1/s1 + d/s2, the predicted growth exponent of #P - #P0 in 1/ε."""
        return 1.0 / self.s1 + self.d / self.s2


@dataclass
class GreedyRound:
    round: int
    marked: int
    elements: int
    max_error: float


@dataclass
class GreedyTrace:
    """
    Per-round record of a greedy run.

    Fields:
        rounds (list[GreedyRound]): one row per marking pass, the last one
            has marked = 0 when the loop terminated
        partition (Partition): the partition reached
        terminated (bool): no element was marked in the last pass
        delta (float): tolerance
        errors (dict): element key → local error on the final partition
        added (int): #P - #P0
        splits (int): number of atomic splits performed
    """
    rounds: list
    partition: Partition
    terminated: bool
    delta: float
    errors: dict = field(default_factory=dict)
    added: int = 0
    splits: int = 0

    @property
    def rounds_performed(self) -> int:
        return sum(1 for row in self.rounds if row.marked)

    @property
    def marked_total(self) -> int:
        return sum(row.marked for row in self.rounds)


def atomic_split(element: Prism, cfg: RefinementConfig) -> list[Prism]:
    """Spatial bisection plus m temporal bisections; 2^{m+1} prisms of level ℓ(J×S)+1."""
    return split_prism(element, cfg.s1, cfg.s2)


def _map(executor, fn, items):
    return list(executor.map(fn, items) if executor is not None else map(fn, items))


def greedy(f, P0: Partition, cfg: RefinementConfig, executor=None,
           ) -> tuple[Partition, GreedyTrace, PiecewisePolynomial]:
    """
    Refine P0 until every element's best-fit error is at most cfg.delta.

    Returns the final partition, the trace and Σ 1_{J×S} P_{J×S}.
    """
    if cfg.delta is None:
        raise ValueError("greedy needs cfg.delta")
    delta = cfg.delta
    P = P0
    fits: dict[tuple, LocalFit] = {}
    trace = GreedyTrace([], P, False, delta)

    def fit(element):
        return fit_element(f, element, cfg.r1, cfg.r2, cfg.p, cfg.fit_subdivisions)

    k = 0
    while True:
        pending = [el for el in P.elements if el.key not in fits]
        for el, result in zip(pending, _map(executor, fit, pending)):
            fits[el.key] = result
        errors = {el.key: fits[el.key].error for el in P.elements}
        marked = sorted(key for key, error in errors.items() if error > delta)
        trace.rounds.append(GreedyRound(k, len(marked), len(P), max(errors.values())))
        trace.partition, trace.errors = P, errors
        logger.info("greedy round %d: %d elements, %d marked, max error %.3e",
                    k, len(P), len(marked), max(errors.values()))
        if not marked:
            trace.terminated = True
            break
        if k >= cfg.max_rounds:
            raise MaxRoundsExceeded(f"still {len(marked)} marked after {k} rounds", trace)

        splits = {key: atomic_split(P[key], cfg) for key in marked}
        grown = len(P) + sum(len(children) - 1 for children in splits.values())
        if grown > cfg.max_elements:
            raise ElementLimitExceeded(
                f"round {k} would grow the partition to {grown} > {cfg.max_elements} elements"
            )
        P = P.refined(splits)
        for key in marked:
            del fits[key]
        trace.splits += len(marked)
        k += 1

    trace.added = len(P) - len(P0)
    approximant = PiecewisePolynomial(P, {el.key: fits[el.key].poly for el in P.elements})
    return P, trace, approximant


@dataclass
class AuditReport:
    """
    Re-check of a final partition.

    Fields:
        delta (float): tolerance
        max_error (float): max best-fit error with the marking rule
        holds (bool): max_error ≤ δ(1 + 1e-8)
        fine_max_error (float): max best-fit error with a finer rule
        gap (float): largest increase of an element's error under the finer rule
        approximant_error (float): global error of the approximant, finer rule
    """
    delta: float
    max_error: float
    holds: bool
    fine_max_error: float
    gap: float
    approximant_error: float


def audit(f, partition: Partition, approximant: PiecewisePolynomial,
          cfg: RefinementConfig, executor=None) -> AuditReport:
    delta = cfg.delta
    fine = cfg.fit_subdivisions + cfg.audit_subdivisions

    def check(element):
        coarse = fit_element(f, element, cfg.r1, cfg.r2, cfg.p, cfg.fit_subdivisions).error
        refined = fit_element(f, element, cfg.r1, cfg.r2, cfg.p, fine).error
        rule = default_rule(element.time, element.space, cfg.r1, cfg.r2, fine)
        residual = (field_values(f, rule.times, rule.points)
                    - approximant.piece(element).evaluate(rule.times, rule.points))
        return coarse, refined, discrete_norm(residual, rule.weights, cfg.p)

    rows = np.array(_map(executor, check, partition.elements))
    max_error = float(rows[:, 0].max())
    report = AuditReport(
        delta=delta,
        max_error=max_error,
        holds=max_error <= delta * (1.0 + AUDIT_SLACK),
        fine_max_error=float(rows[:, 1].max()),
        gap=float(max(0.0, (rows[:, 1] - rows[:, 0]).max())),
        approximant_error=combine_errors(rows[:, 2], cfg.p),
    )
    if not report.holds:
        logger.warning("audit: max error %.3e exceeds delta %.3e", max_error, delta)
    return report


@dataclass
class DirectRun:
    """
    One direct-estimate experiment.

    Fields:
        epsilon (float): accuracy parameter ε
        delta (float): greedy tolerance ε^{1+1/(s1 p)+d/(s2 p)}·|f|_B
        seminorm (float): averaged Besov seminorm of f on I×D
        elements (int): #P
        added (int): #P - #P0
        error (float): global error (Σ local errors^p)^{1/p}
        error_ratio (float | None): error / (ε |f|_B)
        c2 (float | None): #P^{1/p}·δ / (ε |f|_B), the recorded constant with
            error ≤ c2·ε·|f|_B (δ / (ε |f|_B) for p = ∞)
        exact (bool): zero seminorm, f itself is the approximant
        trace (GreedyTrace | None): greedy trace, None when exact
        approximant: PiecewisePolynomial, or f when exact
    """
    epsilon: float
    delta: float
    seminorm: float
    elements: int
    added: int
    error: float
    error_ratio: float | None
    c2: float | None
    exact: bool = False
    trace: GreedyTrace | None = None
    approximant: object = None


def domain_seminorm(f, P0: Partition, cfg: RefinementConfig, executor=None) -> tuple[float, bool]:
    """Averaged |f|_{B^{s1,s2}_{q,q}(I×D)} and whether the dyadic sum was truncated."""
    J, D = P0.time_span(), P0.spatial_domain()
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', TruncationWarning)
        estimate = besov_seminorm(f, J, D, cfg.s1, cfg.s2, cfg.p, cfg.q, cfg.n_max,
                                  cfg.sampling, averaged=True, executor=executor)
    return estimate.seminorm, estimate.truncated


def direct_theorem_run(f, P0: Partition, cfg: RefinementConfig, executor=None, *,
                       seminorm: float | None = None) -> DirectRun:
    if cfg.epsilon is None:
        raise ValueError("direct_theorem_run needs cfg.epsilon")
    eps = cfg.epsilon
    if seminorm is None:
        seminorm, _ = domain_seminorm(f, P0, cfg, executor)
    norm = lp_norm(f, P0.time_span(), P0.spatial_domain(), cfg.p)
    if seminorm <= ZERO_SEMINORM * max(1.0, norm):
        logger.info("seminorm %.3e vanishes; f is its own approximant", seminorm)
        return DirectRun(eps, 0.0, seminorm, len(P0), 0, 0.0, None, None, True, None, f)

    delta = eps ** cfg.delta_exponent * seminorm
    P, trace, approximant = greedy(f, P0, replace(cfg, delta=delta), executor)
    error = combine_errors(list(trace.errors.values()), cfg.p)
    # Every local error is at most delta once the greedy loop returns.
    bound = delta if math.isinf(cfg.p) else len(P) ** (1.0 / cfg.p) * delta
    c2 = bound / (eps * seminorm)
    error_ratio = error / (eps * seminorm)
    logger.info("eps=%.4g delta=%.4g: %d elements (+%d), error %.4g, ratio %.4g, C2 %.4g",
                eps, delta, len(P), trace.added, error, error_ratio, c2)
    return DirectRun(eps, delta, seminorm, len(P), trace.added, error, error_ratio, c2, False,
                     trace, approximant)


@dataclass
class RateSweep:
    """
    Direct-estimate runs over a list of ε.

    Fields:
        runs (list[DirectRun]): one run per ε, in input order
        slope (float | None): fitted exponent of #P - #P0 against 1/ε
        target (float): 1/s1 + d/s2
        c2_spread (float | None): max C2 / min C2
        seminorm (float): shared Besov seminorm
    """
    runs: list
    slope: float | None
    target: float
    c2_spread: float | None
    seminorm: float

    @property
    def exact(self) -> bool:
        return all(run.exact for run in self.runs)


def rate_sweep(f, P0: Partition, cfg: RefinementConfig, eps_list, executor=None) -> RateSweep:
    seminorm, truncated = domain_seminorm(f, P0, cfg, executor)
    if truncated:
        logger.warning("Besov sum for the rate sweep was truncated at n_max=%d", cfg.n_max)
    runs = [
        direct_theorem_run(f, P0, replace(cfg, epsilon=float(eps)), executor, seminorm=seminorm)
        for eps in eps_list
    ]
    slope = loglog_slope([1.0 / run.epsilon for run in runs], [run.added for run in runs])
    constants = [run.c2 for run in runs if run.c2]
    spread = max(constants) / min(constants) if constants else None
    return RateSweep(runs, slope, cfg.complexity_exponent, spread, seminorm)
