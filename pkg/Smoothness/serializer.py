import math

from rest_framework import serializers


class ExponentField(serializers.Field):
    """
    An exponent in (0, ∞]; ∞ travels as the string "inf".
    """
    default_error_messages = {
        'invalid': "Enter a positive number or \"inf\".",
    }

    def to_representation(self, value):
        return 'inf' if math.isinf(value) else float(value)

    def to_internal_value(self, data):
        if isinstance(data, str) and data.strip().lower() in ('inf', 'infinity', '∞'):
            return math.inf
        try:
            value = float(data)
        except (TypeError, ValueError):
            self.fail('invalid')
        if math.isnan(value) or not value > 0:
            self.fail('invalid')
        return value


class RatioField(serializers.FloatField):
    """A float that serializes NaN, ±∞ and None as null."""

    def to_representation(self, value):
        if value is None or not math.isfinite(value):
            return None
        return float(value)


class ModulusEstimateSerializer(serializers.Serializer):
    """
    Serializer for ModulusEstimate records.

    Fields:
        value (float): estimate
        kind (str): "sup" or "averaged"
        direction (str): "temporal" or "spatial"
        r (int): difference order
        delta (float): shift bound
        p (exponent): integrability exponent
        sample_meta (dict): sampling metadata
    """
    value = RatioField()
    kind = serializers.ChoiceField(choices=['sup', 'averaged'])
    direction = serializers.ChoiceField(choices=['temporal', 'spatial'])
    r = serializers.IntegerField(min_value=1)
    delta = serializers.FloatField(min_value=0.0)
    p = ExponentField()
    sample_meta = serializers.DictField()


class BesovLevelSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=0)
    temporal_term = RatioField()
    spatial_term = RatioField()

    def to_representation(self, row):
        n, temporal, spatial = row
        return super().to_representation(
            {'n': n, 'temporal_term': temporal, 'spatial_term': spatial}
        )


class BesovEstimateSerializer(serializers.Serializer):
    """
    Serializer for BesovEstimate records, per-level terms included.
    """
    seminorm = RatioField()
    unit_seminorm = RatioField()
    s1 = serializers.FloatField()
    s2 = serializers.FloatField()
    p = ExponentField()
    q = ExponentField()
    n_max = serializers.IntegerField()
    r1 = serializers.IntegerField()
    r2 = serializers.IntegerField()
    per_level = BesovLevelSerializer(many=True)
    scale = serializers.DictField(child=serializers.FloatField())
    tail_ratio = RatioField()
    tail_estimate = RatioField()
    truncated = serializers.BooleanField()
    averaged = serializers.BooleanField()
