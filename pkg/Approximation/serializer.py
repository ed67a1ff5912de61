from rest_framework import serializers

from Mesh.serializer import PrismSerializer
from Polynomials.serializer import AnisoPolynomialSerializer
from Smoothness.serializer import ExponentField, RatioField


class LocalFitSerializer(serializers.Serializer):
    """
    Serializer for LocalFit records.

    Fields:
        element (prism): the element J×S
        poly (polynomial): fitted polynomial in the local frame
        error (float): discrete L_p residual
        p (exponent): exponent of the fit
        solver_meta (dict): method, iterations, converged
    """
    element = PrismSerializer()
    poly = AnisoPolynomialSerializer()
    error = serializers.FloatField(min_value=0.0)
    p = ExponentField()
    solver_meta = serializers.DictField()


class CheckReportSerializer(serializers.Serializer):
    """
    JSON row of a Jackson or Whitney check: {element_id, lhs, rhs, ratio, meta}
    plus the level, measure and Whitney quantities when present.
    """
    element_id = serializers.CharField()
    level = serializers.IntegerField(min_value=0)
    measure = serializers.FloatField()
    lhs = serializers.FloatField()
    rhs = serializers.FloatField()
    ratio = RatioField(allow_null=True)
    exact = serializers.BooleanField()
    seminorm = RatioField(allow_null=True, required=False)
    exponent = RatioField(allow_null=True, required=False)
    meta = serializers.DictField()


class SweepResultSerializer(serializers.Serializer):
    rows = CheckReportSerializer(many=True)
    slope = RatioField(allow_null=True)
    raw_slope = RatioField(allow_null=True)
    target = RatioField(allow_null=True)
