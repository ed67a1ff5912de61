"""
Test suite for the Smoothness application

This module contains test cases for moduli of smoothness and the dyadic
Besov seminorm estimates built on them.

Key areas tested:
- Monotonicity of sup moduli and the averaged ≤ sampled-max relation
- Vanishing moduli for polynomials of matching order
- Closed-form moduli of linear fields
- Scaling, order reduction and subadditivity of the moduli for p in {0.5, 1, 2, ∞}
- Rejection of δ below the sampled lattice
- Besov seminorm behaviour: polynomials, n_max, truncation, unit scaling
- Serializers for exponents and estimates

Test Structure:
- TestModuli: single-element modulus estimates
- TestModulusInequalities: structural inequalities on sampled shifts
- TestBesovSeminorm: dyadic sums
- TestSmoothnessSerializers: JSON representation
"""

import math
import warnings

import numpy as np
import pytest

from Fields.library import ROUGH_SUBDIVISIONS, ScalarField, builtin
from Mesh.geometry import Interval, Simplex
from Polynomials.polyspace import AnisoPolynomial
from Smoothness.besov import (
    TruncationWarning, besov_seminorm, level_slopes, partition_seminorm_sum, smoothness_orders,
)
from Smoothness.moduli import (
    BelowLattice, ProfileCache, SamplingConfig, averaged_modulus, magnitude_lattice, marchaud_bound,
    modulus_profile, modulus_table, shifted_domain, sup_modulus,
)
from Smoothness.serializer import BesovEstimateSerializer, ExponentField, ModulusEstimateSerializer

SAMPLING = SamplingConfig(n_mag=5, n_dir=4, seed=0, quad_order=3)
FINE = SamplingConfig(n_mag=6, n_dir=4, seed=0, quad_order=8)
ROUGH = SamplingConfig(n_mag=6, n_dir=4, seed=0, quad_order=8, subdivisions=ROUGH_SUBDIVISIONS)
CUSP = SamplingConfig(n_mag=8, n_dir=8, seed=0, quad_order=5, subdivisions=ROUGH_SUBDIVISIONS)
UNIT_J = Interval(0.0, 1.0)
UNIT_1D = Simplex([[0.0], [1.0]], tag=1)
TRIANGLE = Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], tag=2)


def _sum_field(f, g):
    return ScalarField(lambda t, x: f(t, x) + g(t, x), 'sum', f.d, rough=f.rough or g.rough)


def _domain(d):
    return UNIT_1D if d == 1 else TRIANGLE


def _mu(p):
    """Exponent that turns L_p with p < 1 into a subadditive quantity."""
    return min(1.0, p)


class TestModuli:
    """
    Test cases for sup and averaged moduli

    This class tests:
    - Monotonicity of the sup estimate in δ
    - averaged ≤ largest sample used
    - Polynomials annihilated by differences of their order
    - Exact values for f(t, x) = t
    """

    @pytest.mark.parametrize('name', ['smooth_wave', 'temporal_cusp', 'mixed_cusp'])
    @pytest.mark.parametrize('p', [0.5, 1.0, 2.0, math.inf])
    @pytest.mark.parametrize('d, direction', [(1, 'temporal'), (1, 'spatial'), (2, 'spatial')])
    def test_sup_monotone_and_averaged_bounded(self, name, p, d, direction):
        """
        Test monotonicity and the averaged bound

        Purpose: the sup estimate never decreases in δ and the averaged
        estimate never exceeds the largest sample it used.

        What it tests:
        - Smooth and cusp fields, the latter under subdivided quadrature
        - Every p, temporal and spatial moduli, box and ball regions
        - A grid of δ values
        """
        f = builtin(name, d=d)
        sampling = ROUGH if f.rough else FINE
        profile = modulus_profile(f, UNIT_J, _domain(d), direction, 1, p, sampling)
        deltas = [0.05, 0.1, 0.2, 0.4, 0.8]
        sups = [profile.sup(delta) for delta in deltas]
        assert all(a <= b for a, b in zip(sups, sups[1:]))  # nondecreasing
        for delta in deltas:
            for region in ('box', 'ball'):
                averaged = profile.averaged(delta, region)
                assert averaged <= profile.sample_max(delta, region) * (1 + 1e-12)  # mean ≤ max
        assert profile.sup(0.0) == 0.0  # no shifts at δ = 0

    def test_polynomial_moduli_vanish(self):
        """
        Test moduli of polynomials in Π^{r1,r2}

        Purpose: r1-th temporal and r2-th spatial differences annihilate
        Π^{r1,r2}, so both moduli vanish up to rounding.

        What it tests:
        - Random P ∈ Π^{2,3} in d = 2
        - Temporal r = 2 and spatial r = 3 moduli ≤ 1e-10
        """
        P = AnisoPolynomial.random(2, 3, 2, np.random.default_rng(3))
        f = ScalarField(P.evaluate, 'polynomial', 2)
        temporal = sup_modulus(f, UNIT_J, TRIANGLE, 'temporal', 2, 0.5, 2.0, SAMPLING)
        spatial = sup_modulus(f, UNIT_J, TRIANGLE, 'spatial', 3, 0.3, 2.0, SAMPLING)
        assert temporal.value <= 1e-10  # annihilated in t
        assert spatial.value <= 1e-10  # annihilated in x

    def test_linear_in_time(self):
        """
        Test the closed form ω_1(t, δ)_∞ = δ

        Purpose: for f(t, x) = t every first difference equals h, so the
        sup modulus is the largest sampled |h| ≤ δ.

        What it tests:
        - δ on the lattice (1/2, 1/3, 1/4) gives exactly δ
        - averaged with p = ∞ aliases sup
        """
        f = ScalarField(lambda t, x: t.copy(), 'time', 1)
        cache = ProfileCache()
        for delta in (0.5, 1.0 / 3.0, 0.25):
            estimate = sup_modulus(f, UNIT_J, UNIT_1D, 'temporal', 1, delta, math.inf,
                                   SAMPLING, cache=cache)
            assert math.isclose(estimate.value, delta, rel_tol=1e-12)  # sup |h|
        averaged = averaged_modulus(f, UNIT_J, UNIT_1D, 'temporal', 1, 0.25, math.inf,
                                    SAMPLING, cache=cache)
        assert math.isclose(averaged.value, 0.25, rel_tol=1e-12)  # p = ∞ alias
        assert len(cache) == 1  # one profile answers every δ

    def test_modulus_table(self):
        """
        Test the δ × direction × kind table

        Purpose: modulus_table returns four estimates per δ.

        What it tests:
        - Count and ordering of kinds/directions
        """
        f = builtin('smooth_wave', d=1)
        table = modulus_table(f, UNIT_J, UNIT_1D, [0.5, 0.25], 2, 2, 2.0, SAMPLING)
        assert len(table) == 8  # 2 δ × 2 directions × 2 kinds
        assert [(e.direction, e.kind) for e in table[:4]] == [
            ('temporal', 'sup'), ('temporal', 'averaged'),
            ('spatial', 'sup'), ('spatial', 'averaged'),
        ]

    def test_shifted_domain(self):
        """
        Test D ∩ (D - r h)

        Purpose: shifted domains are exact polytopes.

        What it tests:
        - Shifting the unit triangle by (0.25, 0) with r = 2 leaves a
          triangle of legs 1/2, area 1/8
        - A shift larger than the domain leaves nothing
        """
        pieces = shifted_domain(TRIANGLE, 2, [0.25, 0.0])
        assert math.isclose(sum(piece.volume for piece in pieces), 0.125, rel_tol=1e-10)
        assert shifted_domain(TRIANGLE, 2, [0.6, 0.0]) == []  # empty


class TestModulusInequalities:
    """
    Test cases for structural inequalities of the estimators

    This class tests:
    - ω_r(m δ)^μ ≤ m^r ω_r(δ)^μ for m = 2, 3 with μ = min(1, p)
    - ω_r(δ)^μ ≤ 2^{r-k} ω_k(δ)^μ for k < r
    - ω(f + g)^μ ≤ ω(f)^μ + ω(g)^μ
    - Rejection of δ below the sampled lattice
    - The Marchaud diagnostic produces a finite constant
    """

    @pytest.mark.parametrize('m', [2, 3])
    @pytest.mark.parametrize('r', [1, 2])
    @pytest.mark.parametrize('p', [0.5, 2.0])
    @pytest.mark.parametrize('d, direction', [(1, 'temporal'), (2, 'spatial')])
    def test_scaling_law(self, m, r, p, d, direction):
        """
        Test the scaling law on the sampled lattice

        Purpose: the magnitude lattice is closed under h ↦ h/2, h/3, so the
        inequality carries over to the estimates.

        What it tests:
        - smooth_wave, temporal in d = 1 and spatial on a triangle
        - p = 0.5 through the μ-power form and p = 2
        """
        f = builtin('smooth_wave', d=d)
        profile = modulus_profile(f, UNIT_J, _domain(d), direction, r, p, FINE)
        mu = _mu(p)
        for delta in (0.1, 0.15):
            lhs = profile.sup(m * delta) ** mu
            rhs = m ** r * profile.sup(delta) ** mu
            assert lhs <= rhs * (1 + 1e-12)  # scaling law

    @pytest.mark.parametrize('m', [2, 3])
    def test_scaling_law_sup_norm(self, m):
        """
        Test the scaling law for p = ∞

        Purpose: for f(t, x) = t the first difference is h everywhere, so
        ω_1(δ)_∞ is the largest lattice magnitude below δ and the law holds
        with equality whenever that magnitude times m is on the lattice.

        What it tests:
        - ω_1(m δ)_∞ ≤ m ω_1(δ)_∞ on a grid of δ
        """
        f = ScalarField(lambda t, x: t.copy(), 'time', 1)
        profile = modulus_profile(f, UNIT_J, UNIT_1D, 'temporal', 1, math.inf, FINE)
        for delta in (0.05, 0.1, 0.15, 0.2, 0.3):
            assert profile.sup(m * delta) <= m * profile.sup(delta) * (1 + 1e-12)  # linear growth

    @pytest.mark.parametrize('k, r', [(1, 2), (1, 3), (2, 3)])
    @pytest.mark.parametrize('p', [0.5, 1.0, 2.0, math.inf])
    @pytest.mark.parametrize('d, direction', [(1, 'temporal'), (1, 'spatial'), (2, 'spatial')])
    def test_order_reduction_smooth(self, k, r, p, d, direction):
        """
        Test ω_r(δ)^μ ≤ 2^{r-k} ω_k(δ)^μ on a smooth field

        Purpose: a difference of order k+1 is the difference of two shifted
        differences of order k.

        What it tests:
        - smooth_wave for every p including ∞
        - Orders one and two apart
        """
        f = builtin('smooth_wave', d=d)
        cache = ProfileCache()
        mu = _mu(p)
        for delta in (0.1, 0.2, 0.3):
            low = sup_modulus(f, UNIT_J, _domain(d), direction, k, delta, p, FINE, cache=cache)
            high = sup_modulus(f, UNIT_J, _domain(d), direction, r, delta, p, FINE, cache=cache)
            assert high.value ** mu <= 2 ** (r - k) * low.value ** mu * (1 + 1e-12)  # order reduction

    @pytest.mark.parametrize('k, r', [(1, 2), (1, 3), (2, 3)])
    @pytest.mark.parametrize('p', [0.5, 1.0, 2.0])
    @pytest.mark.parametrize('direction', ['temporal', 'spatial'])
    def test_order_reduction_cusp(self, k, r, p, direction):
        """
        Test order reduction on a cusp under subdivided quadrature

        Purpose: with plain Gauss rules the cusp of |t - 1/2|^{1/2} is
        under-resolved and the low-order modulus comes out far too small;
        subdivided rules restore the inequality.

        What it tests:
        - mixed_cusp in d = 1, both directions
        - p = 0.5, 1, 2 with sampling subdivided twice
        """
        f = builtin('mixed_cusp', d=1)
        assert f.quadrature_subdivisions == CUSP.subdivisions  # the field's own default
        cache = ProfileCache()
        mu = _mu(p)
        for delta in (0.05, 0.1, 0.2):
            low = sup_modulus(f, UNIT_J, UNIT_1D, direction, k, delta, p, CUSP, cache=cache)
            high = sup_modulus(f, UNIT_J, UNIT_1D, direction, r, delta, p, CUSP, cache=cache)
            assert high.value ** mu <= 2 ** (r - k) * low.value ** mu * (1 + 1e-12)  # order reduction

    @pytest.mark.parametrize('p', [0.5, 1.0, 2.0, math.inf])
    @pytest.mark.parametrize('direction', ['temporal', 'spatial'])
    def test_subadditivity(self, p, direction):
        """
        Test ω(f + g)^μ ≤ ω(f)^μ + ω(g)^μ

        Purpose: shared nodes make the discrete norms exact (quasi-)seminorms.

        What it tests:
        - temporal_cusp + spatial_corner in d = 2 under subdivided quadrature
        - Every p including 0.5 and ∞
        """
        f = builtin('temporal_cusp', d=2)
        g = builtin('spatial_corner', d=2)
        h = _sum_field(f, g)
        assert h.rough  # sum of rough fields
        mu = _mu(p)
        for delta in (0.15, 0.3):
            values = [sup_modulus(field, UNIT_J, TRIANGLE, direction, 1, delta, p, ROUGH).value
                      for field in (f, g, h)]
            bound = values[0] ** mu + values[1] ** mu
            assert values[2] ** mu <= bound * (1 + 1e-12)  # μ-triangle inequality

    def test_delta_below_lattice(self):
        """
        Test δ under the smallest sampled shift

        Purpose: no sampled shift fits under such a δ, so a modulus read
        there would be 0 and break the scaling law against m δ.

        What it tests:
        - BelowLattice (a ValueError) from sup and averaged moduli
        - δ = 0 and δ at the floor stay valid
        """
        f = builtin('smooth_wave', d=1)
        floor = 2.0 ** -SAMPLING.n_mag
        cache = ProfileCache()
        for estimator in (sup_modulus, averaged_modulus):
            with pytest.raises(ValueError, match='n_mag'):
                estimator(f, UNIT_J, UNIT_1D, 'temporal', 1, 0.5 * floor, 2.0, SAMPLING, cache=cache)
            with pytest.raises(BelowLattice):
                estimator(f, UNIT_J, UNIT_1D, 'spatial', 1, 0.5 * floor, 2.0, SAMPLING, cache=cache)
        at_floor = sup_modulus(f, UNIT_J, UNIT_1D, 'temporal', 1, floor, 2.0, SAMPLING, cache=cache)
        assert at_floor.value > 0  # smallest shift is sampled
        zero = sup_modulus(f, UNIT_J, UNIT_1D, 'temporal', 1, 0.0, 2.0, SAMPLING, cache=cache)
        assert zero.value == 0.0  # no shift at δ = 0

    def test_marchaud_constant(self):
        """
        Test the Marchaud diagnostic

        Purpose: both sides are finite and the measured constant is reported.

        What it tests:
        - k = 1, r = 2 on temporal_cusp in d = 1
        - Invalid orders raise ValueError
        """
        f = builtin('temporal_cusp', d=1)
        report = marchaud_bound(f, UNIT_J, UNIT_1D, 'temporal', 1, 2, 0.1, 2.0, SAMPLING)
        assert report.lhs > 0 and report.rhs > 0  # finite sides
        assert report.constant is not None and math.isfinite(report.constant)
        with pytest.raises(ValueError):
            marchaud_bound(f, UNIT_J, UNIT_1D, 'temporal', 2, 2, 0.1, 2.0, SAMPLING)

    def test_lattice(self):
        """
        Test the magnitude lattice

        Purpose: magnitudes are L·2^{-a}·3^{-b} above L·2^{-n_mag}.

        What it tests:
        - Ascending order, largest value L, smallest ≥ L·2^{-n_mag}
        - Closure under halving above the floor
        """
        lattice = magnitude_lattice(2.0, 5)
        assert np.all(np.diff(lattice) > 0)  # ascending
        assert lattice[-1] == 2.0 and lattice[0] >= 2.0 / 32  # range
        assert np.any(np.isclose(lattice, 2.0 / 9))  # 3^{-2}
        for h in lattice[lattice >= 2.0 / 16]:
            assert np.any(np.isclose(lattice, h / 2))  # closed under halving


class TestBesovSeminorm:
    """
    Test cases for the dyadic Besov seminorm

    This class tests:
    - Zero seminorm for polynomials
    - Monotonicity in n_max
    - The truncation warning
    - Unit scaling and partition sums
    """

    def test_polynomial_is_zero(self):
        """
        Test the seminorm of a polynomial in Π^{r1,r2}

        Purpose: with r_i = ⌊s_i⌋ + 1 the differences vanish on Π^{r1,r2}.

        What it tests:
        - smoothness_orders(1, 1.5) = (2, 2)
        - Seminorm of a random P ∈ Π^{2,2} ≤ 1e-10
        """
        assert smoothness_orders(1.0, 1.5) == (2, 2)  # ⌊s⌋ + 1
        P = AnisoPolynomial.random(2, 2, 1, np.random.default_rng(7))
        f = ScalarField(P.evaluate, 'polynomial', 1)
        estimate = besov_seminorm(f, UNIT_J, UNIT_1D, 1.0, 1.5, 2.0, 2.0, 4, SAMPLING)
        assert estimate.seminorm <= 1e-10  # annihilated

    def test_nondecreasing_in_n_max(self):
        """
        Test monotonicity in the number of dyadic levels

        Purpose: more levels add nonnegative terms.

        What it tests:
        - n_max = 2, 3, 4 on mixed_cusp, sharing one profile cache
        """
        f = builtin('mixed_cusp', d=1)
        cache = ProfileCache()
        values = [besov_seminorm(f, UNIT_J, UNIT_1D, 0.5, 0.5, 2.0, 2.0, n, SAMPLING,
                                 cache=cache).seminorm for n in (2, 3, 4)]
        assert values[0] <= values[1] <= values[2]  # nondecreasing

    def test_truncation_warning(self):
        """
        Test the truncation warning

        Purpose: a field rougher than (s1, s2) keeps the dyadic terms growing.

        What it tests:
        - indicator_strip with s1 = s2 = 1.5 warns with TruncationWarning
        - The estimate is flagged as truncated with a nonzero tail
        """
        f = builtin('indicator_strip', d=1)
        with pytest.warns(TruncationWarning, match='n_max=3'):
            estimate = besov_seminorm(f, UNIT_J, UNIT_1D, 1.5, 1.5, 2.0, 2.0, 3, ROUGH)
        assert estimate.truncated  # flagged
        assert estimate.tail_ratio > 0.9  # last terms have not decayed
        assert estimate.tail_estimate > 0  # nonzero tail

    def test_unit_cylinder_and_slopes(self):
        """
        Test scaling on the unit cylinder and level slopes

        Purpose: with |J| = diam(D) = 1 the actual and unit seminorms agree,
        and a smooth field has decaying dyadic terms.

        What it tests:
        - seminorm == unit_seminorm
        - Negative level slopes for smooth_wave with s1 = s2 = 1
        """
        f = builtin('smooth_wave', d=1)
        with warnings.catch_warnings():
            warnings.simplefilter('error', TruncationWarning)
            estimate = besov_seminorm(f, UNIT_J, UNIT_1D, 1.0, 1.0, 2.0, 2.0, 4, SAMPLING)
        assert math.isclose(estimate.seminorm, estimate.unit_seminorm, rel_tol=1e-12)
        slopes = level_slopes(estimate)
        assert slopes['temporal'] < 0 and slopes['spatial'] < 0  # decaying terms

    def test_partition_sum(self):
        """
        Test the partition sum against the global seminorm

        Purpose: Σ local^q and the measured constant are reported.

        What it tests:
        - Two local entries for a two-prism partition
        - A finite positive constant
        """
        from Mesh.geometry import kuhn_mesh

        P = kuhn_mesh(2)
        f = builtin('smooth_wave', d=2)
        result = partition_seminorm_sum(f, P, 1.0, 1.0, 2.0, 2.0, 3, SAMPLING, compare_global=True)
        assert len(result.local) == 2  # one per prism
        assert result.total > 0  # smooth_wave is not a polynomial
        assert result.constant is not None and result.constant > 0  # measured constant


class TestSmoothnessSerializers:
    """
    Test cases for the Smoothness serializers

    This class tests:
    - Exponent round trip through "inf"
    - Representation of estimates
    """

    def test_exponent_field(self):
        """
        Test ExponentField

        Purpose: ∞ travels as "inf" and invalid exponents are refused.

        What it tests:
        - Representation of ∞ and of a float
        - Parsing "inf" and rejecting 0 and text
        """
        from rest_framework.exceptions import ValidationError

        field = ExponentField()
        assert field.to_representation(math.inf) == 'inf'  # string form
        assert field.to_representation(2) == 2.0  # plain float
        assert field.to_internal_value('inf') == math.inf  # parsed
        for bad in (0, 'abc', -1.5):
            with pytest.raises(ValidationError):
                field.to_internal_value(bad)

    def test_estimate_representation(self):
        """
        Test serializing modulus and Besov estimates

        Purpose: records expose their documented keys with ∞ as "inf".

        What it tests:
        - ModulusEstimateSerializer with p = ∞
        - BesovEstimateSerializer per-level rows
        """
        f = builtin('smooth_wave', d=1)
        estimate = sup_modulus(f, UNIT_J, UNIT_1D, 'temporal', 1, 0.25, math.inf, SAMPLING)
        data = ModulusEstimateSerializer(estimate).data
        assert data['p'] == 'inf' and data['kind'] == 'sup'  # representation

        besov = besov_seminorm(f, UNIT_J, UNIT_1D, 1.0, 1.0, 2.0, 2.0, 3, SAMPLING)
        data = BesovEstimateSerializer(besov).data
        assert len(data['per_level']) == 4  # n = 0..3
        assert set(data['per_level'][0]) == {'n', 'temporal_term', 'spatial_term'}
