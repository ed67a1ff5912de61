"""
Test suite for the Fields application

This module contains test cases for the built-in scalar fields used by the
experiments.

Key areas tested:
- Lookup of built-in fields by name
- Vectorized evaluation and broadcasting
- Parameter validation and quadrature defaults of rough fields
- Polynomial fields built from JSON-style specifications

Test Structure:
- TestBuiltinLookup: names, unknown names, parameter errors
- TestEvaluation: values and broadcasting of evaluators
"""

import math

import numpy as np
import pytest

from Fields.library import (
    BUILTIN_NAMES, ROUGH_SUBDIVISIONS, InvalidParameter, ScalarField, UnknownName, builtin,
    field_from_spec,
)
from Polynomials.polyspace import AnisoPolynomial, DimensionMismatch


class TestBuiltinLookup:
    """
    Test cases for builtin()

    This class tests:
    - Every documented name builds a field in d = 1, 2, 3
    - Unknown names and bad parameters
    - Subdivision defaults of rough and smooth fields
    """

    @pytest.mark.parametrize('name', [n for n in BUILTIN_NAMES if n != 'polynomial'])
    @pytest.mark.parametrize('d', [1, 2, 3])
    def test_every_builtin_builds(self, name, d):
        """
        Test building each parameter-free builtin

        Purpose: defaults are enough for every field except polynomial.

        What it tests:
        - The result is a ScalarField of the requested dimension
        - Values at random points are finite
        """
        f = builtin(name, d=d)
        rng = np.random.default_rng(0)
        values = f(rng.uniform(0, 1, 16), rng.uniform(0, 1, (16, d)))
        assert isinstance(f, ScalarField)  # correct type
        assert f.d == d and f.label == name  # metadata
        assert np.all(np.isfinite(values))  # finite everywhere

    def test_unknown_name(self):
        """
        Test an unknown field name

        Purpose: UnknownName lists the available names.

        What it tests:
        - The exception type and message
        """
        with pytest.raises(UnknownName, match='smooth_wave'):
            builtin('not_a_field')

    def test_invalid_parameters(self):
        """
        Test parameter validation

        Purpose: non-positive exponents, missing polynomials and misshaped
        points raise InvalidParameter.

        What it tests:
        - alpha = 0 for temporal_cusp
        - polynomial without 'poly'
        - x0 of the wrong dimension
        - a polynomial living in another dimension
        """
        with pytest.raises(InvalidParameter):
            builtin('temporal_cusp', {'alpha': 0.0})
        with pytest.raises(InvalidParameter):
            builtin('polynomial', {})
        with pytest.raises(InvalidParameter):
            builtin('spatial_corner', {'x0': [0.1, 0.2, 0.3]}, d=2)
        with pytest.raises(InvalidParameter):
            builtin('polynomial', {'poly': AnisoPolynomial.zero(2, 2, 2)}, d=1)

    def test_polynomial_from_spec(self):
        """
        Test a polynomial field from a JSON-style specification

        Purpose: {"r1", "r2", "coeffs"} builds the same function as the
        polynomial itself.

        What it tests:
        - field_from_spec with name and params
        - P(t, x) = 1 + 2x + 3t for Π^{2,2}, d = 1
        """
        f = field_from_spec({'name': 'polynomial',
                             'params': {'poly': {'r1': 2, 'r2': 2, 'coeffs': [1, 2, 3, 0]}}}, d=1)
        assert math.isclose(f(0.5, [0.25]), 1.0 + 2 * 0.25 + 3 * 0.5)  # coefficient order (i, α)

    def test_rough_fields_subdivide(self):
        """
        Test the quadrature subdivision default of each builtin

        Purpose: fields with a cusp, corner or jump must ask for subdivided
        quadrature so that Gauss rules do not smooth the singularity away.

        What it tests:
        - Cusp, corner and strip fields are rough with ROUGH_SUBDIVISIONS
        - smooth_wave and polynomial fields need no subdivision
        """
        for name in ('temporal_cusp', 'spatial_corner', 'mixed_cusp', 'indicator_strip'):
            f = builtin(name, d=2)
            assert f.rough  # singular somewhere in the cylinder
            assert f.quadrature_subdivisions == ROUGH_SUBDIVISIONS == 2  # two extra levels
        smooth = builtin('smooth_wave', d=2)
        assert not smooth.rough and smooth.quadrature_subdivisions == 0  # plain rule suffices
        poly = builtin('polynomial', {'poly': AnisoPolynomial.zero(2, 2, 1)}, d=1)
        assert poly.quadrature_subdivisions == 0  # polynomials integrate exactly


class TestEvaluation:
    """
    Test cases for field evaluation

    This class tests:
    - Closed-form values of the builtins
    - Scalar and broadcast evaluation
    - Dimension checks
    """

    def test_closed_forms(self):
        """
        Test values against closed forms

        Purpose: the builtins evaluate the documented formulas.

        What it tests:
        - smooth_wave at the centre of the unit cube
        - temporal_cusp at t0 vanishes
        - indicator_strip inside and outside the moving strip
        """
        wave = builtin('smooth_wave', d=2)
        assert math.isclose(wave(0.5, [0.5, 0.5]), 1.0)  # sin(π/2)^3
        cusp = builtin('temporal_cusp', {'alpha': 0.5, 't0': 0.25}, d=1)
        assert cusp(0.25, [0.7]) == 0.0  # |t - t0|^α = 0
        strip = builtin('indicator_strip', {'center': 0.3, 'velocity': 0.4, 'width': 0.2})
        assert strip(0.5, [0.5]) == 1.0  # centre moved to 0.5
        assert strip(0.0, [0.5]) == 0.0  # outside at t = 0

    def test_broadcasting(self):
        """
        Test broadcasting of a single time or point

        Purpose: a scalar t pairs with many points and one point with many times.

        What it tests:
        - Shapes of the returned arrays
        - Agreement with explicit repetition
        """
        f = builtin('mixed_cusp', d=2)
        x = np.array([[0.1, 0.2], [0.3, 0.4], [0.9, 0.9]])
        by_points = f(0.3, x)
        explicit = f(np.full(3, 0.3), x)
        assert by_points.shape == (3,)  # broadcast over points
        assert np.allclose(by_points, explicit)  # same values
        by_times = f(np.array([0.0, 0.5]), np.array([[0.2, 0.2]]))
        assert by_times.shape == (2,)  # broadcast over times

    def test_dimension_mismatch(self):
        """
        Test evaluation at points of the wrong dimension

        Purpose: the field refuses points outside R^d.

        What it tests:
        - DimensionMismatch for a 3-vector given to a d = 2 field
        """
        f = builtin('smooth_wave', d=2)
        with pytest.raises(DimensionMismatch):
            f(0.0, [0.1, 0.2, 0.3])
