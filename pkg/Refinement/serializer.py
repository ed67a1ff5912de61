from rest_framework import serializers

from Mesh.serializer import PartitionSerializer
from Smoothness.serializer import RatioField


class GreedyRoundSerializer(serializers.Serializer):
    round = serializers.IntegerField(min_value=0)
    marked = serializers.IntegerField(min_value=0)
    elements = serializers.IntegerField(min_value=1)
    max_error = RatioField()


class GreedyTraceSerializer(serializers.Serializer):
    """
    Serializer for GreedyTrace records.

    Fields:
        delta (float): tolerance
        terminated (bool): no element marked in the last pass
        added (int): #P - #P0
        splits (int): atomic splits performed
        rounds (list): one row per marking pass
        partition (dict): the partition reached, optional
    """
    delta = serializers.FloatField()
    terminated = serializers.BooleanField()
    added = serializers.IntegerField()
    splits = serializers.IntegerField()
    rounds = GreedyRoundSerializer(many=True)

    def __init__(self, *args, include_partition=False, **kwargs):
        super().__init__(*args, **kwargs)
        self.include_partition = include_partition

    def to_representation(self, trace):
        data = super().to_representation(trace)
        if self.include_partition:
            data['partition'] = PartitionSerializer(trace.partition).data
        return data


class AuditReportSerializer(serializers.Serializer):
    delta = serializers.FloatField()
    max_error = serializers.FloatField()
    holds = serializers.BooleanField()
    fine_max_error = serializers.FloatField()
    gap = serializers.FloatField()
    approximant_error = serializers.FloatField()


class DirectRunSerializer(serializers.Serializer):
    """
    Serializer for one direct-estimate run; the approximant itself is not
    serialized, the trace only by its summary rows.
    """
    epsilon = serializers.FloatField()
    delta = serializers.FloatField()
    seminorm = serializers.FloatField()
    elements = serializers.IntegerField()
    added = serializers.IntegerField()
    error = serializers.FloatField()
    error_ratio = RatioField(allow_null=True)
    c2 = RatioField(allow_null=True)
    exact = serializers.BooleanField()
    trace = GreedyTraceSerializer(allow_null=True)


class RateSweepSerializer(serializers.Serializer):
    runs = DirectRunSerializer(many=True)
    slope = RatioField(allow_null=True)
    target = serializers.FloatField()
    c2_spread = RatioField(allow_null=True)
    seminorm = serializers.FloatField()
    exact = serializers.BooleanField()
