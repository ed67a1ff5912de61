"""
Test suite for the Experiments application

This module contains test cases for the experiment configuration, the
runner and the management commands that form the command-line surface.

Key areas tested:
- Configuration validation and defaults
- Stable run identifiers
- End-to-end subcommands through call_command
- Reproducible artifacts (byte-identical CSV for a repeated run)
- Error reporting for invalid configurations

Test Structure:
- TestRunConfig: validation, defaults and run ids
- TestReports: cell formatting and CSV layout
- TestCommands: subcommands end to end
"""

import json
import math
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from Experiments.reports import CSV_HEADERS, format_cell
from Experiments.runner import refinement_from, sampling_from
from Experiments.serializer import ConfigError, run_id, validate_run_config

FAST = ['--n-mag', '6', '--n-dir', '4', '--n-max', '4']


def run_command(name, *args):
    """Run a subcommand and return its stdout."""
    out = StringIO()
    call_command(name, *args, stdout=out)
    return out.getvalue()


def run_directory(out_dir):
    """The single run directory created under out_dir."""
    children = [child for child in out_dir.iterdir() if child.is_dir()]
    assert len(children) == 1
    return children[0]


class TestRunConfig:
    """
    Test cases for run configuration validation

    This class tests:
    - Defaults filled from settings and smoothness
    - Field-level errors
    - Run id stability
    - Quadrature subdivision defaults
    """

    def test_defaults(self):
        """
        Test defaults of a minimal configuration

        Purpose: a bare subcommand gets documented defaults.

        What it tests:
        - r_i = ⌊s_i⌋ + 1
        - Sampling defaults from the test settings
        - "inf" parsed as an exponent
        """
        config = validate_run_config({'subcommand': 'besov', 's1': 1.5, 'p': 'inf'})
        assert config['field'] == 'smooth_wave'  # default field
        assert (config['r1'], config['r2']) == (2, 2)  # ⌊s⌋ + 1
        assert config['n_mag'] == 8 and config['n_dir'] == 4  # test settings
        assert config['p'] == math.inf  # parsed exponent

    def test_field_level_errors(self):
        """
        Test field-level validation messages

        Purpose: each failed precondition names the offending key.

        What it tests:
        - Unknown field name
        - Invalid field parameters
        - Nonpositive Whitney exponent for whitney
        - r ≤ s for rates
        """
        cases = [
            ({'subcommand': 'moduli', 'field': 'nope'}, 'field'),
            ({'subcommand': 'moduli', 'field': 'temporal_cusp',
              'field_params': {'alpha': -1}}, 'field_params'),
            ({'subcommand': 'whitney', 's1': 0.5, 's2': 0.5, 'd': 2, 'p': 'inf', 'q': 1}, 'p'),
            ({'subcommand': 'rates', 's1': 2.0, 'r1': 2}, 'r1'),
        ]
        for data, key in cases:
            with pytest.raises(ConfigError) as excinfo:
                validate_run_config(data)
            assert key in excinfo.value.detail  # names the key

    def test_run_id(self):
        """
        Test run id stability

        Purpose: the id depends on result-relevant keys only.

        What it tests:
        - 12 hex digits
        - Same id for a different out/threads
        - Different id for a different seed
        """
        base = {'subcommand': 'greedy', 'delta_list': [0.1]}
        first = run_id(validate_run_config(base))
        assert len(first) == 12 and int(first, 16) >= 0  # hex digits
        again = run_id(validate_run_config(dict(base, out='/elsewhere', threads=3)))
        assert again == first  # execution keys ignored
        other = run_id(validate_run_config(dict(base, seed=1)))
        assert other != first  # seed matters

    def test_subdivision_defaults(self):
        """
        Test the quadrature subdivision setting

        Purpose: rough fields get subdivided quadrature unless the
        configuration says otherwise, and the setting reaches both the
        moduli sampling and the greedy fits.

        What it tests:
        - 2 for mixed_cusp, 0 for smooth_wave
        - An explicit value wins over the field default
        - sampling_from and refinement_from carry the value
        - Values above 4 are rejected
        """
        rough = validate_run_config({'subcommand': 'greedy', 'field': 'mixed_cusp'})
        assert rough['subdivisions'] == 2  # cusp default
        smooth = validate_run_config({'subcommand': 'greedy'})
        assert smooth['subdivisions'] == 0  # smooth default
        explicit = validate_run_config({'subcommand': 'greedy', 'field': 'mixed_cusp',
                                        'subdivisions': 1})
        assert explicit['subdivisions'] == 1  # explicit value kept

        assert sampling_from(rough).subdivisions == 2  # moduli quadrature
        cfg = refinement_from(rough, delta=0.1)
        assert cfg.fit_subdivisions == 2  # marking fits
        assert cfg.sampling.subdivisions == 2  # seminorm sampling
        assert run_id(rough) != run_id(explicit)  # result-relevant key

        with pytest.raises(ConfigError) as excinfo:
            validate_run_config({'subcommand': 'greedy', 'subdivisions': 5})
        assert 'subdivisions' in excinfo.value.detail  # names the key


class TestReports:
    """
    Test cases for artifact formatting

    This class tests:
    - CSV cell formatting
    - CSV schemas
    """

    def test_format_cell(self):
        """
        Test CSV cell formatting

        Purpose: floats carry 12 significant digits; None is empty.

        What it tests:
        - Floats, ints, booleans, None and infinities
        """
        assert format_cell(1.0 / 3.0) == '0.333333333333'  # 12 digits
        assert format_cell(7) == '7'  # integer
        assert format_cell(True) == 'true'  # boolean
        assert format_cell(None) == ''  # empty
        assert format_cell(math.inf) == 'inf'  # infinity

    def test_headers(self):
        """
        Test CSV schemas

        Purpose: each subcommand has its documented columns.

        What it tests:
        - rates and greedy headers
        """
        assert CSV_HEADERS['rates'] == ['epsilon', 'delta', 'elements', 'added', 'error',
                                        'error_ratio', 'c2']
        assert CSV_HEADERS['greedy'][0] == 'delta'  # one block per tolerance


class TestCommands:
    """
    Test cases for the management commands

    This class tests:
    - rates on a polynomial field
    - whitney target exponent in the summary
    - Invalid configurations
    - Byte-identical CSV for repeated runs
    - Config files overridden by flags
    """

    def test_rates_polynomial(self, tmp_path):
        """
        Test rates on a polynomial field

        Purpose: a field in Π^{r1,r2} needs no refinement at any ε.

        What it tests:
        - The exact-reproduction message
        - Artifacts: config.json, rates.csv, rates.json
        """
        poly = json.dumps({'poly': {'r1': 2, 'r2': 2, 'coeffs': [1.0, -2.0, 0.5, 3.0]}})
        output = run_command('rates', '--field', 'polynomial', '--field-params', poly,
                             '--d', '1', '--eps-list', '0.2,0.1', '--out', str(tmp_path), *FAST)
        assert 'exact reproduction, 0 refinements' in output  # exact case
        directory = run_directory(tmp_path)
        assert {path.name for path in directory.iterdir()} == {'config.json', 'rates.csv', 'rates.json'}
        echo = json.loads((directory / 'config.json').read_text())
        assert echo['run_id'] == directory.name  # id echoed
        rows = (directory / 'rates.csv').read_text().splitlines()
        assert rows[0] == 'epsilon,delta,elements,added,error,error_ratio,c2'  # header
        assert len(rows) == 3  # one row per ε

    def test_whitney_summary(self, tmp_path):
        """
        Test the whitney summary line

        Purpose: the target exponent and the fitted slope are reported.

        What it tests:
        - "target exponent 0.5" for s = (1, 1), d = 1, p = q = 2
        """
        output = run_command('whitney', '--field', 'smooth_wave', '--s1', '1', '--s2', '1',
                             '--levels', '2', '--out', str(tmp_path), *FAST)
        assert 'target exponent 0.5' in output  # 1/(1 + 1) - 1/2 + 1/2
        assert 'fitted slope' in output  # measured slope

    def test_invalid_configuration(self, tmp_path):
        """
        Test invalid configurations

        Purpose: validation errors leave through CommandError before any work.

        What it tests:
        - Nonpositive Whitney exponent
        - Unknown field
        - No artifacts written
        """
        with pytest.raises(CommandError, match='invalid configuration'):
            run_command('greedy', '--s1', '0.5', '--s2', '0.5', '--d', '2', '--p', 'inf',
                        '--q', '1', '--out', str(tmp_path))
        with pytest.raises(CommandError, match='invalid configuration'):
            run_command('moduli', '--field', 'nope', '--out', str(tmp_path))
        assert list(tmp_path.iterdir()) == []  # nothing written

    def test_repeat_is_byte_identical(self, tmp_path):
        """
        Test reproducibility of artifacts

        Purpose: the same config and seed give byte-identical CSV output.

        What it tests:
        - greedy run twice into different output directories
        - Same run id and identical greedy.csv bytes
        """
        args = ['--field', 'mixed_cusp', '--delta-list', '0.05,0.02', *FAST]
        run_command('greedy', *args, '--out', str(tmp_path / 'first'))
        run_command('greedy', *args, '--out', str(tmp_path / 'second'), '--threads', '2')
        first = run_directory(tmp_path / 'first')
        second = run_directory(tmp_path / 'second')
        assert first.name == second.name  # same run id
        assert (first / 'greedy.csv').read_bytes() == (second / 'greedy.csv').read_bytes()

    def test_config_file_with_overrides(self, tmp_path):
        """
        Test --config with flag overrides

        Purpose: flags override values from the config file.

        What it tests:
        - moduli with a JSON config and an overriding --d
        - The echoed config carries the override
        - --plot writes an SVG
        """
        config_path = tmp_path / 'run.json'
        config_path.write_text(json.dumps({'field': 'spatial_corner', 'd': 1,
                                           'delta_list': [0.5, 0.25]}))
        out_dir = tmp_path / 'out'
        output = run_command('moduli', '--config', str(config_path), '--d', '2',
                             '--out', str(out_dir), '--plot', *FAST)
        assert '8 modulus estimates' in output  # 2 δ × 2 directions × 2 kinds
        directory = run_directory(out_dir)
        echo = json.loads((directory / 'config.json').read_text())
        assert echo['config']['d'] == 2  # flag wins
        assert echo['config']['field'] == 'spatial_corner'  # file value kept
        assert (directory / 'moduli.svg').exists()  # plot written
