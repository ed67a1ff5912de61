"""
Test suite for the Approximation application

This module contains test cases for local best approximation by
anisotropic polynomials and for the Jackson and Whitney harnesses.

Key areas tested:
- Closed-form best constants and errors
- Reproduction of polynomials for p = 2, p ≠ 2 and p = ∞
- Optimality against perturbed candidates
- Monotonicity of the error in the polynomial orders
- Jackson checks, including the exact and degenerate cases
- Whitney exponents, preconditions and the measured sweep slope

Test Structure:
- TestBestFit: local fitting on single prisms
- TestJacksonCheck: Jackson harness
- TestWhitneyCheck: Whitney harness and sweeps
- TestApproximationSerializers: JSON rows
"""

import math
from unittest.mock import patch

import numpy as np
import pytest

from Approximation.checks import (
    DegenerateRHS, PreconditionViolated, combine_errors, global_whitney, jackson_check,
    jackson_sweep, loglog_slope, representative_chain, whitney_check, whitney_exponent,
    whitney_sweep,
)
from Approximation.fitting import SingularGram, best_fit, default_rule, fit_element
from Approximation.serializer import CheckReportSerializer, LocalFitSerializer, SweepResultSerializer
from Fields.library import ScalarField, builtin
from Mesh.geometry import Interval, Simplex, kuhn_mesh
from Polynomials.polyspace import AnisoPolynomial
from Polynomials.quadrature import discrete_norm, field_values, prism_rule
from Smoothness.moduli import ModulusEstimate, SamplingConfig

SAMPLING = SamplingConfig(n_mag=6, n_dir=4, seed=0, quad_order=4)
UNIT_J = Interval(0.0, 1.0)
AREA_ONE = Simplex([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]], tag=2)
TRIANGLE = Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], tag=2)


def _polynomial_field(P):
    return ScalarField(P.evaluate, 'polynomial', P.d)


class TestBestFit:
    """
    Test cases for best_fit

    This class tests:
    - The best constant for f(t, x) = t
    - Exact reproduction of polynomials
    - Optimality and normal equations for p = 2
    - Error monotonicity in (r1, r2)
    - Rank-deficient rules
    """

    def test_best_constant(self):
        """
        Test the best L_2 constant for f(t, x) = t

        Purpose: on [0, 1]×S with |S| = 1 the best constant is 1/2 and the
        error is 1/√12.

        What it tests:
        - Constant coefficient 0.5
        - Error 1/√12 to 1e-12
        """
        f = ScalarField(lambda t, x: t.copy(), 'time', 2)
        fit = best_fit(f, UNIT_J, AREA_ONE, 1, 1, 2.0)
        assert math.isclose(fit.poly.coeffs[0], 0.5, rel_tol=1e-12)  # mean of t
        assert math.isclose(fit.error, 1.0 / math.sqrt(12.0), rel_tol=1e-12)  # ‖t - 1/2‖_2
        assert fit.solver_meta['method'] == 'qr'  # direct solver

    @pytest.mark.parametrize('p,tol', [(2.0, 1e-9), (1.0, 1e-7), (0.5, 1e-7), (math.inf, 1e-6)])
    def test_polynomial_reproduction(self, p, tol):
        """
        Test that Π^{r1,r2} is reproduced

        Purpose: a polynomial of the fitted orders has zero best-fit error.

        What it tests:
        - Random P ∈ Π^{2,3} in d = 2 on a small prism
        - Error below tol for every solver
        - Values of the fit agree with P
        """
        P = AnisoPolynomial.random(2, 3, 2, np.random.default_rng(11))
        S = Simplex([[0.2, 0.2], [0.4, 0.2], [0.2, 0.4]], tag=2)
        J = Interval(0.25, 0.5)
        fit = best_fit(_polynomial_field(P), J, S, 2, 3, p)
        assert fit.error <= tol  # reproduced
        t = np.linspace(0.25, 0.5, 5)
        x = np.tile(S.centroid, (5, 1))
        assert np.allclose(fit.poly(t, x), P(t, x), atol=100 * tol)  # same polynomial

    @pytest.mark.parametrize('p', [2.0, 1.0, math.inf])
    def test_optimal_against_candidates(self, p):
        """
        Test optimality against perturbed candidates

        Purpose: no nearby polynomial has a smaller discrete error.

        What it tests:
        - 50 random perturbations of the fitted coefficients
        - For p = 2 the normal-equation residual is tiny
        """
        f = builtin('mixed_cusp', d=2)
        rule = default_rule(UNIT_J, TRIANGLE, 2, 2)
        fit = best_fit(f, UNIT_J, TRIANGLE, 2, 2, p, rule)
        values = field_values(f, rule.times, rule.points)
        rng = np.random.default_rng(2)
        for _ in range(50):
            coeffs = fit.poly.coeffs + 0.1 * rng.standard_normal(fit.poly.dimension)
            candidate = AnisoPolynomial(2, 2, 2, coeffs, fit.poly.frame)
            error = discrete_norm(values - candidate(rule.times, rule.points), rule.weights, p)
            assert error >= fit.error * (1 - 1e-6)  # fit is optimal
        if p == 2.0:
            assert fit.solver_meta['gram_residual'] <= 1e-9  # normal equations hold

    def test_monotone_in_orders(self):
        """
        Test error monotonicity in (r1, r2)

        Purpose: nested spaces on a shared rule give nonincreasing errors.

        What it tests:
        - (1,1) ⊂ (2,2) ⊂ (3,3) for spatial_corner, p = 2
        """
        f = builtin('spatial_corner', d=2)
        rule = default_rule(UNIT_J, TRIANGLE, 3, 3)
        errors = [best_fit(f, UNIT_J, TRIANGLE, r, r, 2.0, rule).error for r in (1, 2, 3)]
        assert errors[0] >= errors[1] - 1e-12  # (1,1) vs (2,2)
        assert errors[1] >= errors[2] - 1e-12  # (2,2) vs (3,3)

    def test_singular_gram(self):
        """
        Test a rule with too few nodes

        Purpose: a one-node rule cannot determine six coefficients.

        What it tests:
        - SingularGram is raised
        """
        f = builtin('smooth_wave', d=2)
        with pytest.raises(SingularGram):
            best_fit(f, UNIT_J, TRIANGLE, 2, 2, 2.0, prism_rule(UNIT_J, TRIANGLE, 1, 1))

    def test_fit_element(self):
        """
        Test fitting a partition element

        Purpose: fit_element keeps the element and a frame-carrying polynomial.

        What it tests:
        - The element is attached
        - The serializer exposes the documented keys
        """
        element = kuhn_mesh(2).elements[0]
        fit = fit_element(builtin('smooth_wave', d=2), element, 2, 2, 2.0)
        assert fit.element is element  # attached
        assert fit.poly.frame is not None  # local frame
        data = LocalFitSerializer(fit).data
        assert {'element', 'poly', 'error', 'p', 'solver_meta'} <= set(data)


class TestJacksonCheck:
    """
    Test cases for the Jackson harness

    This class tests:
    - The exact case for polynomials
    - The degenerate right-hand side
    - Finite ratios along a sweep
    """

    def test_polynomial_exact(self):
        """
        Test the exact case

        Purpose: both sides vanish for P ∈ Π^{r1,r2}.

        What it tests:
        - exact is True and ratio is None
        """
        P = AnisoPolynomial.random(2, 2, 1, np.random.default_rng(5))
        report = jackson_check(_polynomial_field(P), UNIT_J, Simplex([[0.0], [1.0]]), 2, 2,
                               2.0, SAMPLING)
        assert report.exact  # both sides vanish
        assert report.ratio is None  # no ratio reported

    @patch('Approximation.checks.sup_modulus')
    def test_degenerate_rhs(self, mock_sup_modulus):
        """
        Test moduli that vanish while the fit error does not

        Purpose: the estimators disagree and DegenerateRHS is raised.
        Uses mocking to force vanishing moduli.

        What it tests:
        - DegenerateRHS for smooth_wave with zero moduli
        """
        mock_sup_modulus.return_value = ModulusEstimate(0.0, 'sup', 'temporal', 1, 1.0, 2.0)
        with pytest.raises(DegenerateRHS):
            jackson_check(builtin('smooth_wave', d=1), UNIT_J, Simplex([[0.0], [1.0]]),
                          1, 1, 2.0, SAMPLING)
        assert mock_sup_modulus.call_count == 2  # temporal and spatial

    def test_sweep_ratios(self):
        """
        Test a Jackson sweep

        Purpose: ratios are finite and positive on every level.

        What it tests:
        - One row per level
        - Positive finite ratios for mixed_cusp
        """
        P0 = kuhn_mesh(1)
        sweep = jackson_sweep(builtin('mixed_cusp', d=1), P0, 1, 1, 2.0, 1.0, 1.0, 2, SAMPLING)
        assert [row.level for row in sweep.rows] == [0, 1, 2]  # one per level
        assert all(row.ratio is not None and 0 < row.ratio < math.inf for row in sweep.rows)


class TestWhitneyCheck:
    """
    Test cases for the Whitney harness

    This class tests:
    - The Whitney exponent and its precondition
    - The fitted sweep slope against the exponent
    - Global piecewise errors
    """

    def test_exponent(self):
        """
        Test the Whitney exponent

        Purpose: 1/(1/s1 + d/s2) - 1/q + 1/p with a positivity check.

        What it tests:
        - s = (1, 1), d = 1, p = q = 2 gives 0.5
        - A negative exponent raises PreconditionViolated
        """
        assert math.isclose(whitney_exponent(1.0, 1.0, 1, 2.0, 2.0), 0.5)  # 1/2
        assert math.isclose(whitney_exponent(2.0, 2.0, 1, math.inf, math.inf), 1.0)  # 1/(1/2 + 1/2)
        with pytest.raises(PreconditionViolated):
            whitney_exponent(0.5, 0.5, 2, math.inf, 1.0)
        with pytest.raises(PreconditionViolated):
            whitney_check(builtin('smooth_wave', d=2), UNIT_J, TRIANGLE, 0.5, 0.5, math.inf, 1.0)

    def test_representative_chain(self):
        """
        Test the chain of representative elements

        Purpose: each element is an atomic child of the previous one.

        What it tests:
        - Levels 0..3 and nested keys
        """
        chain = representative_chain(kuhn_mesh(1), 1.0, 1.0, 3)
        assert [el.level for el in chain] == [0, 1, 2, 3]  # one per level
        for parent, child in zip(chain, chain[1:]):
            assert child.key[:-1] == parent.key  # nested keys

    def test_sweep_slope(self):
        """
        Test the measured Whitney slope

        Purpose: log(error / local seminorm) against log |J×S| has slope
        close to the Whitney exponent for a smooth field.

        What it tests:
        - smooth_wave, s = (1, 1), d = 1, p = q = 2 over 6 levels: slope
          within 15% of 0.5
        - The raw error decays faster than the normalized one
        """
        sweep = whitney_sweep(builtin('smooth_wave', d=1), kuhn_mesh(1), 1.0, 1.0, 2.0, 2.0, 6,
                              SamplingConfig())
        assert sweep.target == 0.5  # Whitney exponent
        assert 0.425 < sweep.slope < 0.575  # within 15% of the exponent
        assert sweep.raw_slope > sweep.slope  # seminorm shrinks too
        data = SweepResultSerializer(sweep).data
        assert len(data['rows']) == 7  # levels 0..6
        assert set(CheckReportSerializer(sweep.rows[0]).data) >= {'element_id', 'lhs', 'rhs', 'ratio'}

    def test_global_whitney(self):
        """
        Test the global piecewise comparison

        Purpose: local errors combine in ℓ_p and the ratio is reported.

        What it tests:
        - combine_errors for p = 2 and p = ∞
        - A positive ratio on the Kuhn mesh
        """
        assert combine_errors([3.0, 4.0], 2.0) == 5.0  # ℓ_2
        assert combine_errors([3.0, 4.0], math.inf) == 4.0  # max
        result = global_whitney(builtin('smooth_wave', d=2), kuhn_mesh(2), 1.0, 1.0, 2.0, 2.0,
                                SAMPLING, n_max=3)
        assert result.elements == 2  # two Kuhn prisms
        assert result.ratio is not None and result.ratio > 0  # measured constant

    def test_loglog_slope(self):
        """
        Test the log-log fit

        Purpose: exact power laws give their exponent; too few points give None.

        What it tests:
        - y = x^1.5
        - A single positive point
        """
        x = np.array([1.0, 0.5, 0.25, 0.125])
        assert math.isclose(loglog_slope(x, x ** 1.5), 1.5, rel_tol=1e-10)
        assert loglog_slope([1.0, 0.5], [1.0, 0.0]) is None  # one usable pair
