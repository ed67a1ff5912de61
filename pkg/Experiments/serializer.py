import hashlib
import json
import math

from django.conf import settings
from rest_framework import serializers
from rest_framework.exceptions import ValidationError

from Approximation.checks import PreconditionViolated, whitney_exponent
from Fields.library import BUILTIN_NAMES, InvalidParameter, UnknownName, builtin
from Smoothness.serializer import ExponentField

SUBCOMMANDS = ('moduli', 'besov', 'jackson', 'whitney', 'greedy', 'rates')

# Keys that change where or how fast a run happens, never its results.
EXECUTION_KEYS = ('threads', 'out', 'plot')


class ConfigError(ValidationError):
    """A run configuration failed validation; `.detail` holds field-level messages."""


def _defaults():
    defaults = settings.ANISOST
    return {
        'n_mag': defaults['N_MAG'],
        'n_dir': defaults['N_DIR'],
        'seed': defaults['SEED'],
        'max_rounds': defaults['MAX_ROUNDS'],
        'max_elements': defaults['MAX_ELEMENTS'],
        'out': defaults['OUTPUT_DIR'],
    }


class RunConfigSerializer(serializers.Serializer):
    """
    Serializer for validating an experiment configuration.

    Every numeric parameter is checked against the preconditions of the
    module the subcommand drives before any work starts.

    Fields:
        subcommand (str): moduli, besov, jackson, whitney, greedy or rates
        field (str): built-in field name
        field_params (dict): parameters of the field
        d (int): spatial dimension, 1 to 3
        time (list): [t0, t1] of the cylinder
        scale (float): edge length of the spatial cube
        r1, r2 (int): polynomial / difference orders, default ⌊s_i⌋+1
        s1, s2 (float): smoothness pair
        p, q (exponent): "inf" allowed
        eps_list, delta_list (list): sweep values
        levels (int): refinement levels of sweeps
        n_max (int): dyadic levels of Besov sums
        n_mag, n_dir, seed, quad_order, averaging_region: moduli sampling
        subdivisions (int): quadrature subdivision levels, default 2 for
            rough fields and 0 otherwise
        max_rounds, max_elements (int): greedy limits
        threads (int): worker pool size (execution only)
        out (str): output directory (execution only)
        plot (bool): also write an SVG (execution only)
    """
    subcommand = serializers.ChoiceField(choices=SUBCOMMANDS)
    field = serializers.ChoiceField(choices=BUILTIN_NAMES, default='smooth_wave')
    field_params = serializers.DictField(default=dict)
    d = serializers.IntegerField(min_value=1, max_value=3, default=1)
    time = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2,
                                 default=lambda: [0.0, 1.0])
    scale = serializers.FloatField(min_value=1e-12, default=1.0)
    r1 = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    r2 = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    s1 = serializers.FloatField(min_value=1e-12, default=1.0)
    s2 = serializers.FloatField(min_value=1e-12, default=1.0)
    p = ExponentField(default=2.0)
    q = ExponentField(default=2.0)
    eps_list = serializers.ListField(child=serializers.FloatField(min_value=1e-12),
                                     default=lambda: [0.2, 0.1, 0.05, 0.025])
    delta_list = serializers.ListField(child=serializers.FloatField(min_value=1e-15),
                                       default=lambda: [0.5, 0.25, 0.125, 0.0625])
    levels = serializers.IntegerField(min_value=0, max_value=12, default=3)
    n_max = serializers.IntegerField(min_value=1, max_value=40, default=10)
    n_mag = serializers.IntegerField(min_value=1, max_value=30, required=False)
    n_dir = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    seed = serializers.IntegerField(min_value=0, required=False)
    quad_order = serializers.IntegerField(min_value=1, max_value=15, default=5)
    averaging_region = serializers.ChoiceField(choices=['box', 'ball'], default='box')
    subdivisions = serializers.IntegerField(min_value=0, max_value=4, required=False,
                                            allow_null=True, default=None)
    max_rounds = serializers.IntegerField(min_value=0, required=False)
    max_elements = serializers.IntegerField(min_value=1, required=False)
    threads = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    out = serializers.CharField(required=False)
    plot = serializers.BooleanField(default=False)

    def validate_time(self, value):
        if not value[0] < value[1]:
            raise serializers.ValidationError("time must be [t0, t1] with t0 < t1.")
        return value

    def validate(self, attrs):
        for key, value in _defaults().items():
            attrs.setdefault(key, value)
        if attrs['r1'] is None:
            attrs['r1'] = math.floor(attrs['s1']) + 1
        if attrs['r2'] is None:
            attrs['r2'] = math.floor(attrs['s2']) + 1

        try:
            f = builtin(attrs['field'], attrs['field_params'], d=attrs['d'])
        except UnknownName as exc:
            raise serializers.ValidationError({'field': str(exc)})
        except InvalidParameter as exc:
            raise serializers.ValidationError({'field_params': str(exc)})
        if attrs['subdivisions'] is None:
            attrs['subdivisions'] = f.quadrature_subdivisions

        subcommand = attrs['subcommand']
        if subcommand in ('whitney', 'greedy', 'rates'):
            try:
                whitney_exponent(attrs['s1'], attrs['s2'], attrs['d'], attrs['p'], attrs['q'])
            except PreconditionViolated as exc:
                raise serializers.ValidationError({'p': str(exc)})
        if subcommand == 'rates':
            if not (attrs['r1'] > attrs['s1'] and attrs['r2'] > attrs['s2']):
                raise serializers.ValidationError(
                    {'r1': "rates needs r1 > s1 and r2 > s2."}
                )
            if not attrs['eps_list']:
                raise serializers.ValidationError({'eps_list': "give at least one epsilon."})
        if subcommand in ('moduli', 'greedy') and not attrs['delta_list']:
            raise serializers.ValidationError({'delta_list': "give at least one delta."})
        if subcommand == 'whitney' and attrs['levels'] < 1:
            raise serializers.ValidationError({'levels': "a slope needs at least two levels."})
        return attrs


def validate_run_config(data: dict) -> dict:
    """Validated config for the given raw data; ConfigError with field-level messages otherwise."""
    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigError(serializer.errors)
    return dict(serializer.validated_data)


def canonical_json(config: dict) -> str:
    """Sorted, compact JSON of the result-relevant part of the config."""
    data = RunConfigSerializer(config).data
    for key in EXECUTION_KEYS:
        data.pop(key, None)
    return json.dumps(data, sort_keys=True, separators=(',', ':'))


def run_id(config: dict) -> str:
    """First 12 hex digits of the SHA-1 of the canonical config."""
    return hashlib.sha1(canonical_json(config).encode('utf-8')).hexdigest()[:12]
