"""
Test suite for the Polynomials application

This module contains test cases for the anisotropic polynomial space, its
affine pullbacks, piecewise polynomials and the quadrature layer.

Key areas tested:
- Basis indexing and dimension of Π^{r1,r2}
- Evaluation (Horner against the naive sum)
- Exact pullbacks under affine maps and local frames
- Quadrature exactness on intervals, triangles and tetrahedra
- Discrete L_p norms and their scaling behaviour
- Polynomial serialization

Test Structure:
- TestPolynomialSpace: indexing, evaluation, error cases
- TestPullback: affine composition and frames
- TestQuadrature: rule exactness and measures
- TestNorms: discrete norms and the norm-equivalence bracket
- TestAnisoPolynomialSerializer: JSON interchange
"""

import math

import numpy as np
import pytest

from Mesh.geometry import Interval, Simplex, kuhn_mesh
from Polynomials.polyspace import (
    AnisoPolynomial, DimensionMismatch, LocalFrame, PiecewisePolynomial, SingularMap,
    basis_dimension, multi_indices, pullback, to_global,
)
from Polynomials.quadrature import (
    NonFiniteValue, UnsupportedOrder, gauss_interval, integrate, lp_norm, prism_rule,
    reference_rule, simplex_rule,
)
from Polynomials.serializer import AnisoPolynomialSerializer


class TestPolynomialSpace:
    """
    Test cases for the space Π^{r1,r2}

    This class tests:
    - Multi-index ordering and dimension
    - Evaluation methods
    - Dimension errors
    """

    def test_indices_and_dimension(self):
        """
        Test basis ordering and dimension

        Purpose: Verify the documented graded-lexicographic order and the
        dimension formula r1·C(r2-1+d, d).

        What it tests:
        - multi_indices for d=2, r2=3
        - basis_dimension for a few (r1, r2, d)
        """
        assert multi_indices(2, 3) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))  # graded lex
        assert basis_dimension(2, 2, 1) == 4  # {1, x} × {1, t}
        assert basis_dimension(3, 3, 2) == 18  # 3 × 6
        assert basis_dimension(1, 1, 3) == 1  # constants

    def test_horner_matches_naive(self):
        """
        Test the two evaluation methods against each other

        Purpose: Horner evaluation in t must agree with the term-by-term sum.

        What it tests:
        - Random polynomials in d = 1, 2, 3
        - Agreement to 1e-12 relative
        """
        rng = np.random.default_rng(0)
        for d in (1, 2, 3):
            P = AnisoPolynomial.random(3, 3, d, rng)
            t = rng.uniform(-1, 1, 40)
            x = rng.uniform(-1, 1, (40, d))
            assert np.allclose(P.evaluate(t, x), P.evaluate(t, x, method='naive'),
                               rtol=1e-12, atol=1e-12)  # same values

    def test_from_terms(self):
        """
        Test construction from (i, α) terms

        Purpose: from_terms places coefficients at the documented positions.

        What it tests:
        - P(t, x) = 2 + 3 t x1 evaluates correctly
        - Terms outside the space raise DimensionMismatch
        """
        P = AnisoPolynomial.from_terms(2, 2, 2, {(0, (0, 0)): 2.0, (1, (1, 0)): 3.0})
        assert math.isclose(P(0.5, [2.0, 7.0]), 2.0 + 3.0 * 0.5 * 2.0)  # 2 + 3 t x1
        with pytest.raises(DimensionMismatch):
            AnisoPolynomial.from_terms(2, 2, 1, {(2, (0,)): 1.0})  # t^2 is not in Π^{2,2}

    def test_dimension_errors(self):
        """
        Test dimension checking

        Purpose: Wrong coefficient counts and wrongly shaped points are refused.

        What it tests:
        - Coefficient vector of the wrong length
        - Points in the wrong dimension
        """
        with pytest.raises(DimensionMismatch):
            AnisoPolynomial(2, 2, 1, [1.0, 2.0, 3.0])
        P = AnisoPolynomial.zero(2, 2, 2)
        with pytest.raises(DimensionMismatch):
            P.evaluate(0.0, [1.0, 2.0, 3.0])


class TestPullback:
    """
    Test cases for affine pullbacks

    This class tests:
    - Exact composition with (t, x) ↦ (a t + b, M x + v)
    - Frames folded into global coefficients
    - Singular maps
    """

    def test_composition(self):
        """
        Test that the pullback equals the composition

        Purpose: Q(t, x) = P(a t + b, M x + v) at random points.

        What it tests:
        - d = 2 with a general invertible M
        - Agreement to 1e-9 relative
        """
        rng = np.random.default_rng(1)
        P = AnisoPolynomial.random(3, 3, 2, rng)
        a, b = 0.7, -0.2
        M = np.array([[1.5, 0.3], [-0.4, 0.8]])
        v = np.array([0.1, -0.6])
        Q = pullback(P, a, b, M, v)
        t = rng.uniform(0, 1, 30)
        x = rng.uniform(0, 1, (30, 2))
        expected = P.evaluate(a * t + b, x @ M.T + v)
        assert np.allclose(Q.evaluate(t, x), expected, rtol=1e-9, atol=1e-9)  # exact algebra

    def test_frame_to_global(self):
        """
        Test expanding a local frame

        Purpose: to_global keeps the values of a frame-carrying polynomial.

        What it tests:
        - Values before and after expansion agree
        - The result carries no frame
        """
        rng = np.random.default_rng(2)
        frame = LocalFrame(t0=0.25, T=0.5, x0=np.array([0.3]), X=0.2)
        P = AnisoPolynomial.random(2, 3, 1, rng, frame=frame)
        G = to_global(P)
        t = rng.uniform(0.25, 0.75, 20)
        x = rng.uniform(0.2, 0.4, (20, 1))
        assert G.frame is None  # global monomials
        assert np.allclose(G.evaluate(t, x), P.evaluate(t, x), rtol=1e-9)  # same function

    def test_singular_maps(self):
        """
        Test singular affine maps

        Purpose: a = 0 or a singular M raise SingularMap.

        What it tests:
        - Zero temporal scaling
        - Rank-deficient spatial matrix
        """
        P = AnisoPolynomial.zero(2, 2, 2)
        with pytest.raises(SingularMap):
            pullback(P, 0.0, 1.0)
        with pytest.raises(SingularMap):
            pullback(P, 1.0, 0.0, np.array([[1.0, 2.0], [2.0, 4.0]]))

    def test_piecewise_polynomial(self):
        """
        Test piecewise evaluation on a partition

        Purpose: Each point is evaluated with the polynomial of its element.

        What it tests:
        - Two Kuhn prisms carrying different constants
        - Values at interior points of each prism
        """
        P = kuhn_mesh(2)
        pieces = {
            P.elements[0].key: AnisoPolynomial(1, 1, 2, [1.0]),
            P.elements[1].key: AnisoPolynomial(1, 1, 2, [2.0]),
        }
        approximant = PiecewisePolynomial(P, pieces)
        first = P.elements[0].space.centroid
        second = P.elements[1].space.centroid
        assert approximant(0.5, first) == 1.0  # first piece
        assert approximant(0.5, second) == 2.0  # second piece


class TestQuadrature:
    """
    Test cases for quadrature rules

    This class tests:
    - Gauss exactness on intervals
    - Simplex rule exactness against closed-form monomial integrals
    - Prism rule measures and error cases
    """

    def test_gauss_interval(self):
        """
        Test Gauss-Legendre exactness

        Purpose: an n-point rule integrates degree 2n-1 exactly.

        What it tests:
        - ∫_0^2 t^5 dt = 64/6 with 3 points
        """
        t, w = gauss_interval(0.0, 2.0, 3)
        assert math.isclose(w @ t ** 5, 64.0 / 6.0, rel_tol=1e-13)  # degree 5 exact

    @pytest.mark.parametrize('d,degree', [(2, 1), (2, 2), (2, 4), (2, 5), (2, 6), (2, 9),
                                          (3, 1), (3, 2), (3, 5)])
    def test_simplex_exactness(self, d, degree):
        """
        Test simplex rules against ∫ x^α = α!/(|α|+d)! on the reference simplex

        Purpose: every reference rule is exact up to its degree.

        What it tests:
        - All monomials of total degree ≤ degree
        - Weights sum to 1/d!
        """
        x, w = reference_rule(d, degree)
        assert math.isclose(w.sum(), 1.0 / math.factorial(d), rel_tol=1e-12)  # measure
        for alpha in multi_indices(d, degree + 1):
            exact = math.prod(math.factorial(a) for a in alpha) / math.factorial(sum(alpha) + d)
            approx = float(w @ np.prod(x ** np.array(alpha), axis=1))
            assert math.isclose(approx, exact, rel_tol=1e-10)  # exact for |α| ≤ degree

    def test_mapped_rules(self):
        """
        Test rules mapped to physical elements

        Purpose: mapped weights sum to the element measure and prism rules
        integrate tensor polynomials exactly.

        What it tests:
        - simplex_rule weights sum to |S|
        - prism_rule integrates t^2 x1 on [0, 2]×S exactly
        """
        S = Simplex([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]], tag=2)
        _, w = simplex_rule(S, 4)
        assert math.isclose(w.sum(), 1.0, rel_tol=1e-12)  # |S| = 1

        rule = prism_rule(Interval(0.0, 2.0), S, 3, 4)
        assert math.isclose(rule.measure, 2.0, rel_tol=1e-12)  # |J×S|
        value = integrate(lambda t, x: t ** 2 * x[:, 0], rule)
        # ∫_0^2 t^2 dt · ∫_S x1 dx = (8/3) · (|S| · 2/3)
        assert math.isclose(value, 8.0 / 3.0 * 2.0 / 3.0, rel_tol=1e-10)

    def test_errors(self):
        """
        Test quadrature error cases

        Purpose: unsupported orders and non-finite integrands are reported.

        What it tests:
        - UnsupportedOrder for too high degree and d = 4
        - NonFiniteValue for an integrand returning NaN
        """
        with pytest.raises(UnsupportedOrder):
            reference_rule(2, 99)
        with pytest.raises(UnsupportedOrder):
            reference_rule(4, 2)
        rule = prism_rule(Interval(0.0, 1.0), Simplex([[0.0], [1.0]]), 2, 2)
        with pytest.raises(NonFiniteValue):
            integrate(lambda t, x: np.full(t.shape, np.nan), rule)


class TestNorms:
    """
    Test cases for discrete L_p norms

    This class tests:
    - Norms of constants
    - Scaling invariance of the norm-equivalence ratio for polynomials
    """

    def test_constant_norms(self):
        """
        Test norms of the constant 1

        Purpose: ‖1‖_p = |J×S|^{1/p} and ‖1‖_∞ = 1.

        What it tests:
        - p = 0.5, 1, 2, ∞ on a prism of measure 1/4
        """
        J = Interval(0.0, 0.5)
        S = Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], tag=2)
        one = lambda t, x: np.ones(t.shape)  # noqa: E731
        for p in (0.5, 1.0, 2.0):
            assert math.isclose(lp_norm(one, J, S, p), 0.25 ** (1.0 / p), rel_tol=1e-12)
        assert lp_norm(one, J, S, math.inf) == 1.0  # sup of a constant

    @pytest.mark.parametrize('p,q', [(2.0, 1.0), (math.inf, 2.0), (1.0, 0.5)])
    def test_norm_equivalence_bracket(self, p, q):
        """
        Test the norm-equivalence ratio for anisotropic polynomials

        Purpose: ‖P‖_p / (|J×S|^{1/p-1/q} ‖P‖_q) lies in a fixed bracket for
        Π^{r1,r2} and does not change under affine scaling of the element.

        What it tests:
        - Ratio is positive and finite for random polynomials
        - Ratio is identical (1e-8) on a translated and scaled copy
        """
        rng = np.random.default_rng(5)
        base = (Interval(0.0, 1.0), Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], tag=2))
        scaled = (Interval(2.0, 2.25), Simplex([[1.0, 1.0], [1.5, 1.0], [1.0, 1.5]], tag=2))

        def ratio(coeffs, J, S):
            P = AnisoPolynomial(2, 2, 2, coeffs, LocalFrame.for_element(J, S))
            rule = prism_rule(J, S, 4, 6)
            measure = J.length * S.volume
            return lp_norm(P, J, S, p, rule) / (measure ** (1.0 / p - 1.0 / q)
                                                * lp_norm(P, J, S, q, rule))

        ratios = []
        for _ in range(20):
            coeffs = rng.standard_normal(basis_dimension(2, 2, 2))
            first, second = ratio(coeffs, *base), ratio(coeffs, *scaled)
            assert math.isclose(first, second, rel_tol=1e-8)  # scaling invariant
            ratios.append(first)
        assert 0.0 < min(ratios) <= max(ratios) < math.inf  # one finite bracket


class TestAnisoPolynomialSerializer:
    """
    Test cases for polynomial JSON interchange

    This class tests:
    - Representation of frame-carrying polynomials
    - Validation of coefficient counts
    """

    def test_representation_and_parse(self):
        """
        Test representing and parsing a polynomial with a frame

        Purpose: the parsed polynomial evaluates like the original.

        What it tests:
        - Representation keys
        - Values at random points after parsing
        """
        rng = np.random.default_rng(4)
        frame = LocalFrame(t0=0.0, T=0.5, x0=np.array([0.5, 0.5]), X=2.0)
        P = AnisoPolynomial.random(2, 3, 2, rng, frame=frame)
        data = AnisoPolynomialSerializer(P).data
        assert set(data) == {'r1', 'r2', 'd', 'coeffs', 'frame'}  # documented keys

        serializer = AnisoPolynomialSerializer(data=data)
        assert serializer.is_valid(), serializer.errors
        Q = serializer.save()
        t, x = rng.uniform(0, 1, 10), rng.uniform(0, 1, (10, 2))
        assert np.allclose(Q(t, x), P(t, x))  # same function

    def test_wrong_coefficient_count(self):
        """
        Test validation of the coefficient vector

        Purpose: a vector of the wrong length is a field-level error.

        What it tests:
        - is_valid() is False
        - The error is attached to coeffs
        """
        serializer = AnisoPolynomialSerializer(data={'r1': 2, 'r2': 2, 'd': 1, 'coeffs': [1.0]})
        assert not serializer.is_valid()  # rejected
        assert 'coeffs' in serializer.errors  # field-level message
