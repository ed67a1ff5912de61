"""
Test suite for the Refinement application

This module contains test cases for the greedy refinement loop, its audit
and the direct-estimate driver with its rate sweep.

Key areas tested:
- Configuration validation and derived exponents
- Termination of the greedy loop and its per-round bookkeeping
- Monotonicity of the final partition size in the tolerance
- Round and element limits
- Exact reproduction of polynomial fields
- Complexity growth against 1/ε

Test Structure:
- TestRefinementConfig: parameter checks
- TestGreedy: the marking/splitting loop and its audit
- TestDirectEstimate: direct runs and rate sweeps
"""

import math

import numpy as np
import pytest

from Approximation.checks import PreconditionViolated
from Fields.library import ScalarField, builtin
from Mesh.geometry import kuhn_mesh
from Polynomials.polyspace import AnisoPolynomial
from Refinement.adaptive import (
    ElementLimitExceeded, MaxRoundsExceeded, RefinementConfig, atomic_split, audit,
    direct_theorem_run, greedy, rate_sweep,
)
from Refinement.serializer import (
    AuditReportSerializer, DirectRunSerializer, GreedyTraceSerializer, RateSweepSerializer,
)
from Smoothness.moduli import SamplingConfig

SAMPLING = SamplingConfig(n_mag=6, n_dir=4, seed=0, quad_order=4)


def make_config(**overrides):
    """Smooth d = 1 setup: s = (1, 1), r = (2, 2), p = q = 2."""
    params = dict(s1=1.0, s2=1.0, d=1, r1=2, r2=2, p=2.0, q=2.0, sampling=SAMPLING, n_max=4)
    params.update(overrides)
    return RefinementConfig(**params)


def polynomial_field():
    P = AnisoPolynomial.random(2, 2, 1, np.random.default_rng(9))
    return ScalarField(P.evaluate, 'polynomial', 1)


class TestRefinementConfig:
    """
    Test cases for RefinementConfig

    This class tests:
    - Derived exponents
    - Rejection of invalid parameters
    """

    def test_exponents(self):
        """
        Test the derived exponents

        Purpose: δ = ε^{1+1/(s1 p)+d/(s2 p)}|f| and #P ~ ε^{-(1/s1+d/s2)}.

        What it tests:
        - delta_exponent = 2 and complexity_exponent = 2 for the smooth setup
        - delta_exponent = 1 for p = ∞
        """
        cfg = make_config()
        assert cfg.delta_exponent == 2.0  # 1 + 1/2 + 1/2
        assert cfg.complexity_exponent == 2.0  # 1 + 1
        assert make_config(p=math.inf, q=math.inf).delta_exponent == 1.0  # p = ∞

    def test_invalid(self):
        """
        Test invalid configurations

        Purpose: nonpositive parameters and r_i ≤ s_i for direct runs are refused.

        What it tests:
        - ValueError for delta = 0 and r1 = 0
        - PreconditionViolated for r = s with require_direct
        - PreconditionViolated for a nonpositive Whitney exponent
        """
        with pytest.raises(ValueError):
            make_config(delta=0.0)
        with pytest.raises(ValueError):
            make_config(r1=0)
        with pytest.raises(PreconditionViolated):
            make_config(s1=2.0, s2=2.0, require_direct=True)
        with pytest.raises(PreconditionViolated):
            make_config(s1=0.5, s2=0.5, d=2, p=math.inf, q=1.0)


class TestGreedy:
    """
    Test cases for the greedy loop

    This class tests:
    - Zero rounds for polynomials
    - Termination with every local error below δ
    - Strictly growing partitions while elements are marked
    - Nested partitions for decreasing δ
    - Split accounting and limits
    """

    def test_polynomial_needs_no_rounds(self):
        """
        Test greedy on a polynomial field

        Purpose: P ∈ Π^{r1,r2} is fitted exactly on P0.

        What it tests:
        - No element is ever marked
        - The partition is unchanged
        """
        P0 = kuhn_mesh(1)
        P, trace, _ = greedy(polynomial_field(), P0, make_config(delta=1e-8))
        assert trace.rounds_performed == 0  # nothing marked
        assert trace.terminated and trace.added == 0  # P = P0
        assert len(P) == len(P0)  # unchanged

    def test_terminates_and_audit_holds(self):
        """
        Test termination and the audit

        Purpose: on exit every element error is at most δ, and each round
        with marked elements grows the partition.

        What it tests:
        - Audit holds for smooth_wave with δ = 0.01
        - Element counts strictly increase across marking rounds
        - The approximant covers every element
        """
        f = builtin('smooth_wave', d=1)
        cfg = make_config(delta=0.01)
        P, trace, approximant = greedy(f, kuhn_mesh(1), cfg)
        report = audit(f, P, approximant, cfg)
        assert trace.terminated  # loop stopped by itself
        assert report.holds and report.max_error <= 0.01 * (1 + 1e-8)  # all errors ≤ δ
        counts = [row.elements for row in trace.rounds]
        assert all(a < b for a, b in zip(counts, counts[1:]))  # strictly growing
        assert len(approximant) == len(P)  # one piece per element
        data = AuditReportSerializer(report).data
        assert data['holds'] is True  # serialized flag

    def test_nested_in_delta(self):
        """
        Test monotonicity of #P in δ

        Purpose: a smaller tolerance marks a superset in every round.

        What it tests:
        - #P nondecreasing for δ = 0.05, 0.01, 0.002 on mixed_cusp
        """
        f = builtin('mixed_cusp', d=1)
        sizes = [len(greedy(f, kuhn_mesh(1), make_config(delta=delta))[0])
                 for delta in (0.05, 0.01, 0.002)]
        assert sizes[0] <= sizes[1] <= sizes[2]  # nondecreasing

    def test_split_accounting(self):
        """
        Test the complexity bookkeeping

        Purpose: each atomic split replaces one prism by 2^{m+1}; with
        s1 = s2 and d = 1 that is four children.

        What it tests:
        - len(atomic_split) = 4 at every level
        - added = 3 · splits and splits = total marked
        - The serializer can include the partition
        """
        P0 = kuhn_mesh(1)
        cfg = make_config(delta=0.005)
        assert len(atomic_split(P0.elements[0], cfg)) == 4  # m = 1
        P, trace, _ = greedy(builtin('temporal_cusp', d=1), P0, cfg)
        assert trace.added == 3 * trace.splits  # four children per split
        assert trace.splits == trace.marked_total  # one split per mark
        data = GreedyTraceSerializer(trace, include_partition=True).data
        assert len(data['partition']['elements']) == len(P)  # partition included

    def test_round_limit(self):
        """
        Test MaxRoundsExceeded

        Purpose: with max_rounds = 0 any marked element stops the loop.

        What it tests:
        - The exception carries the partial trace
        """
        with pytest.raises(MaxRoundsExceeded) as excinfo:
            greedy(builtin('smooth_wave', d=1), kuhn_mesh(1), make_config(delta=1e-6, max_rounds=0))
        assert excinfo.value.trace is not None  # partial trace
        assert len(excinfo.value.trace.rounds) == 1  # first marking pass only

    def test_element_limit(self):
        """
        Test ElementLimitExceeded

        Purpose: a round that would exceed max_elements is refused.

        What it tests:
        - max_elements = 2 with a four-child split
        """
        with pytest.raises(ElementLimitExceeded):
            greedy(builtin('smooth_wave', d=1), kuhn_mesh(1), make_config(delta=1e-6, max_elements=2))

    def test_parallel_marking_is_reproducible(self):
        """
        Test reproducibility across worker counts

        Purpose: marking in a thread pool gives the same partition.

        What it tests:
        - Identical element keys with and without an executor
        """
        from concurrent.futures import ThreadPoolExecutor

        f = builtin('mixed_cusp', d=2)
        cfg = make_config(d=2, delta=0.05)
        serial, _, _ = greedy(f, kuhn_mesh(2), cfg)
        with ThreadPoolExecutor(max_workers=3) as executor:
            parallel, _, _ = greedy(f, kuhn_mesh(2), cfg, executor)
        assert [el.key for el in serial] == [el.key for el in parallel]  # same partition


class TestDirectEstimate:
    """
    Test cases for direct-estimate runs

    This class tests:
    - The exact case for polynomials
    - Complexity growth and constants over an ε sweep
    """

    def test_polynomial_is_exact(self):
        """
        Test a direct run on a polynomial field

        Purpose: a vanishing seminorm returns f itself with no refinement.

        What it tests:
        - exact is True, added = 0, c2 is None
        """
        run = direct_theorem_run(polynomial_field(), kuhn_mesh(1),
                                 make_config(epsilon=0.1, require_direct=True))
        assert run.exact  # f is its own approximant
        assert run.added == 0 and run.c2 is None  # no refinement, no constant
        assert DirectRunSerializer(run).data['trace'] is None  # no greedy trace

    def test_rate_sweep(self):
        """
        Test the complexity growth over ε

        Purpose: #P - #P0 grows like ε^{-(1/s1 + d/s2)} and the achieved
        error stays under the recorded constant C2·ε·|f|_B, with C2 stable
        across the sweep.

        What it tests:
        - Fitted slope 2 ± 0.4 for smooth_wave, s = (1, 1), d = 1, p = q = 2
        - #P nondecreasing as ε decreases
        - error / (ε |f|_B) ≤ C2 on every run
        - max C2 / min C2 ≤ 3
        """
        cfg = make_config(require_direct=True, sampling=SamplingConfig(), n_max=10)
        sweep = rate_sweep(builtin('smooth_wave', d=1), kuhn_mesh(1), cfg,
                           [0.2, 0.1, 0.05, 0.025])
        assert sweep.target == 2.0  # 1/s1 + d/s2
        assert not sweep.exact  # smooth_wave is not a polynomial
        sizes = [run.elements for run in sweep.runs]
        assert all(a <= b for a, b in zip(sizes, sizes[1:]))  # nondecreasing
        assert sweep.slope is not None and abs(sweep.slope - 2.0) <= 0.4  # complexity exponent
        for run in sweep.runs:
            assert 0 < run.c2 < math.inf  # recorded constant
            assert run.error_ratio <= run.c2 * (1 + 1e-12)  # error ≤ C2·ε·|f|_B
            assert math.isclose(run.c2, math.sqrt(run.elements) * run.delta
                                / (run.epsilon * run.seminorm))  # #P^{1/p}·δ / (ε |f|_B)
        assert sweep.c2_spread is not None and sweep.c2_spread <= 3.0  # stable constant
        data = RateSweepSerializer(sweep).data
        assert len(data['runs']) == 4 and data['exact'] is False
        assert 'error_ratio' in data['runs'][0]  # both quantities reported
