from rest_framework import serializers

from .geometry import Interval, Partition, Prism, Simplex


class LevelsSerializer(serializers.Serializer):
    """
    Level bookkeeping of a prism.

    Fields:
        prism (int): ℓ(J×S), number of atomic splits from the root
        time (int): ℓ(J), number of interval bisections
        space (int): ℓ(S), number of simplex bisections
    """
    prism = serializers.IntegerField(min_value=0)
    time = serializers.IntegerField(min_value=0)
    space = serializers.IntegerField(min_value=0)


class PrismSerializer(serializers.Serializer):
    """
    Serializer for a single space-time element J×S.

    Representation:
        {"id": "0-3-1", "time": [a, b], "vertices": [[...], ...],
         "levels": {"prism": k, "time": ℓ(J), "space": ℓ(S)}, "tag": t}

    The id encodes the path of child indices from the root element and is
    parsed back into the prism key when deserializing.
    """
    id = serializers.CharField(required=False)
    time = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2)
    vertices = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=1),
        min_length=2,
    )
    levels = LevelsSerializer()
    tag = serializers.IntegerField(min_value=1)

    def to_representation(self, prism):
        return {
            'id': prism.element_id,
            'time': [prism.time.a, prism.time.b],
            'vertices': prism.space.vertices.tolist(),
            'levels': {
                'prism': prism.level,
                'time': prism.time.level,
                'space': prism.space.level,
            },
            'tag': prism.space.tag,
        }

    def validate_time(self, value):
        if not value[0] < value[1]:
            raise serializers.ValidationError("time interval must satisfy a < b.")
        return value

    def validate_vertices(self, value):
        d = len(value) - 1
        if any(len(vertex) != d for vertex in value):
            raise serializers.ValidationError("a d-simplex needs d+1 vertices in R^d.")
        return value

    def validate_id(self, value):
        try:
            tuple(int(part) for part in value.split('-'))
        except ValueError:
            raise serializers.ValidationError("id must be dash-separated integers.")
        return value

    def create(self, validated_data):
        levels = validated_data['levels']
        key = tuple(int(part) for part in validated_data.get('id', '0').split('-'))
        return Prism(
            time=Interval(*validated_data['time'], level=levels['time']),
            space=Simplex(validated_data['vertices'], tag=validated_data['tag'],
                          level=levels['space']),
            level=levels['prism'],
            key=key,
        )


class PartitionSerializer(serializers.Serializer):
    """
    Serializer for a space-time partition and its root P0.

    Fields:
        d (int): spatial dimension
        aniso_params ([s1, s2]): smoothness pair that drives a(P)
        elements (list): current elements, sorted by id
        root (list): elements of the initial partition P0
    """
    d = serializers.IntegerField(min_value=1, max_value=3)
    aniso_params = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), min_length=2, max_length=2
    )
    elements = PrismSerializer(many=True)
    root = PrismSerializer(many=True)

    def to_representation(self, partition):
        return {
            'd': partition.d,
            'aniso_params': list(partition.aniso_params),
            'elements': PrismSerializer(partition.elements, many=True).data,
            'root': PrismSerializer(partition.root, many=True).data,
        }

    def validate(self, attrs):
        for entry in attrs['elements'] + attrs['root']:
            if len(entry['vertices']) != attrs['d'] + 1:
                raise serializers.ValidationError(
                    {'elements': "vertex count does not match d."}
                )
        if min(attrs['aniso_params']) <= 0:
            raise serializers.ValidationError({'aniso_params': "s1 and s2 must be positive."})
        return attrs

    def create(self, validated_data):
        def build(entries):
            prisms = []
            for index, entry in enumerate(entries):
                data = _plain(entry)
                # Position in the list stands in for a missing id.
                data.setdefault('id', str(index))
                child = PrismSerializer(data=data)
                child.is_valid(raise_exception=True)
                prisms.append(child.save())
            return prisms

        return Partition(
            build(validated_data['elements']),
            root=build(validated_data['root']),
            aniso_params=tuple(validated_data['aniso_params']),
        )


def _plain(entry):
    """Nested validated data back to primitive form for a child serializer."""
    return {key: (dict(value) if isinstance(value, dict) else value) for key, value in entry.items()}
