from rest_framework import serializers

from .polyspace import AnisoPolynomial, DimensionMismatch, LocalFrame, basis_dimension


class LocalFrameSerializer(serializers.Serializer):
    """Affine reference coordinates τ = (t - t0)/T, z = (x - x0)/X."""
    t0 = serializers.FloatField()
    T = serializers.FloatField()
    x0 = serializers.ListField(child=serializers.FloatField(), min_length=1)
    X = serializers.FloatField()

    def to_representation(self, frame):
        return {'t0': frame.t0, 'T': frame.T, 'x0': list(map(float, frame.x0)), 'X': frame.X}

    def validate(self, attrs):
        if attrs['T'] <= 0 or attrs['X'] <= 0:
            raise serializers.ValidationError("frame scales T and X must be positive.")
        return attrs


class AnisoPolynomialSerializer(serializers.Serializer):
    """
    Serializer for an element of Π^{r1,r2}_{t,x}.

    Representation:
        {"r1": 2, "r2": 2, "d": 1, "coeffs": [...], "frame": {...} | null}

    Coefficients follow the (i, α) order: time-major, spatial multi-indices
    graded and lexicographically descending within a degree.
    """
    r1 = serializers.IntegerField(min_value=1)
    r2 = serializers.IntegerField(min_value=1)
    d = serializers.IntegerField(min_value=1, max_value=3)
    coeffs = serializers.ListField(child=serializers.FloatField())
    frame = LocalFrameSerializer(required=False, allow_null=True)

    def to_representation(self, poly):
        return {
            'r1': poly.r1,
            'r2': poly.r2,
            'd': poly.d,
            'coeffs': poly.coeffs.tolist(),
            'frame': LocalFrameSerializer(poly.frame).data if poly.frame is not None else None,
        }

    def validate(self, attrs):
        expected = basis_dimension(attrs['r1'], attrs['r2'], attrs['d'])
        if len(attrs['coeffs']) != expected:
            raise serializers.ValidationError(
                {'coeffs': f"expected {expected} coefficients for this (r1, r2, d)."}
            )
        frame = attrs.get('frame')
        if frame and len(frame['x0']) != attrs['d']:
            raise serializers.ValidationError({'frame': "x0 must be a point in R^d."})
        return attrs

    def create(self, validated_data):
        frame = validated_data.get('frame')
        if frame:
            frame = LocalFrame(frame['t0'], frame['T'], frame['x0'], frame['X'])
        try:
            return AnisoPolynomial(validated_data['r1'], validated_data['r2'],
                                   validated_data['d'], validated_data['coeffs'], frame)
        except DimensionMismatch as exc:
            raise serializers.ValidationError(str(exc))
