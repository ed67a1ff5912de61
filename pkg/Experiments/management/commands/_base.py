"""
Shared base class of the experiment management commands.

Every subcommand accepts the same flags; a --config JSON file supplies the
baseline and explicit flags override it. Validation happens before any work,
and ConfigError or library errors leave through CommandError with a nonzero
exit status.
"""

import json
from concurrent.futures import ThreadPoolExecutor

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ANISOST.exceptions import AnisoError
from Experiments.runner import run
from Experiments.serializer import ConfigError, validate_run_config


def _float_list(value: str) -> list[str]:
    return [part.strip() for part in value.split(',') if part.strip()]


class ExperimentCommand(BaseCommand):
    subcommand = None

    # flag → config key for flags that pass through unchanged
    PASSTHROUGH = (
        'field', 'd', 'r1', 'r2', 's1', 's2', 'p', 'q', 'levels', 'n_max',
        'n_mag', 'n_dir', 'seed', 'subdivisions', 'threads', 'out',
    )

    def add_arguments(self, parser):
        parser.add_argument('--config', help="JSON file with a run configuration")
        parser.add_argument('--field', help="built-in field name")
        parser.add_argument('--field-params', help="field parameters as a JSON object")
        parser.add_argument('--d', type=int, help="spatial dimension")
        parser.add_argument('--r1', type=int, help="temporal polynomial/difference order")
        parser.add_argument('--r2', type=int, help="spatial polynomial/difference order")
        parser.add_argument('--s1', type=float, help="temporal smoothness")
        parser.add_argument('--s2', type=float, help="spatial smoothness")
        parser.add_argument('--p', help="integrability exponent, 'inf' allowed")
        parser.add_argument('--q', help="Besov exponent, 'inf' allowed")
        parser.add_argument('--eps-list', type=_float_list, help="comma-separated epsilons")
        parser.add_argument('--delta-list', type=_float_list, help="comma-separated deltas")
        parser.add_argument('--levels', type=int, help="refinement levels of sweeps")
        parser.add_argument('--n-max', type=int, help="dyadic levels of Besov sums")
        parser.add_argument('--n-mag', type=int, help="depth of the shift magnitude lattice")
        parser.add_argument('--n-dir', type=int, help="number of spatial shift directions")
        parser.add_argument('--seed', type=int, help="sampling seed")
        parser.add_argument('--subdivisions', type=int,
                            help="quadrature subdivision levels, default 2 on rough fields")
        parser.add_argument('--threads', type=int, help="worker threads")
        parser.add_argument('--out', help="output directory")
        parser.add_argument('--plot', action='store_true', help="also write an SVG plot")

    def load_config(self, options) -> dict:
        data = {}
        if options.get('config'):
            try:
                with open(options['config'], encoding='utf-8') as handle:
                    data = json.load(handle)
            except (OSError, json.JSONDecodeError) as exc:
                raise CommandError(f"cannot read config {options['config']}: {exc}")
            if not isinstance(data, dict):
                raise CommandError("config file must hold a JSON object")
        for key in self.PASSTHROUGH:
            if options.get(key) is not None:
                data[key] = options[key]
        if isinstance(options.get('field_params'), dict):
            data['field_params'] = options['field_params']
        elif options.get('field_params') is not None:
            try:
                data['field_params'] = json.loads(options['field_params'])
            except json.JSONDecodeError as exc:
                raise CommandError(f"--field-params is not valid JSON: {exc}")
        for key in ('eps_list', 'delta_list'):
            value = options.get(key)
            if value is not None:
                data[key] = _float_list(value) if isinstance(value, str) else value
        if options.get('plot'):
            data['plot'] = True
        data['subcommand'] = self.subcommand
        return data

    def handle(self, *args, **options):
        try:
            config = validate_run_config(self.load_config(options))
        except ConfigError as exc:
            raise CommandError(f"invalid configuration: {json.dumps(exc.detail)}")

        threads = config.get('threads') or settings.ANISOST['THREADS']
        try:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                result = run(config, executor)
        except AnisoError as exc:
            raise CommandError(f"{type(exc).__name__}: {exc}")

        self.stdout.write(self.style.SUCCESS(result.summary))
        self.stdout.write(f"run {result.run_id} → {result.directory}")
