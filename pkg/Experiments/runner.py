"""
Experiment runner behind the management commands.

run(config) builds the field, the initial partition and the sampling from a
validated RunConfig, executes one subcommand and writes its artifacts into
<out>/<run_id>/.
"""

import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from Approximation.checks import jackson_sweep, whitney_exponent, whitney_sweep
from Approximation.serializer import SweepResultSerializer
from Fields.library import builtin
from Mesh.geometry import kuhn_mesh
from Refinement.adaptive import RefinementConfig, audit, greedy, rate_sweep
from Refinement.serializer import AuditReportSerializer, GreedyTraceSerializer, RateSweepSerializer
from Smoothness.besov import TruncationWarning, besov_seminorm, level_slopes
from Smoothness.moduli import SamplingConfig, modulus_table
from Smoothness.serializer import BesovEstimateSerializer, ModulusEstimateSerializer

from . import reports
from .serializer import canonical_json, run_id

logger = logging.getLogger(__name__)

EXACT_MESSAGE = "exact reproduction, 0 refinements"


@dataclass
class RunResult:
    """
    Outcome of one experiment run.

    Fields:
        run_id (str): 12 hex digits identifying the config
        directory (Path): artifact directory
        files (list[Path]): written artifacts
        summary (str): one-line result
        rows (list[dict]): CSV rows
    """
    run_id: str
    directory: Path
    files: list = field(default_factory=list)
    summary: str = ''
    rows: list = field(default_factory=list)


def sampling_from(config: dict) -> SamplingConfig:
    return SamplingConfig(
        n_mag=config['n_mag'],
        n_dir=config['n_dir'],
        seed=config['seed'],
        quad_order=config['quad_order'],
        averaging_region=config['averaging_region'],
        subdivisions=config['subdivisions'],
    )


def refinement_from(config: dict, **overrides) -> RefinementConfig:
    return RefinementConfig(
        s1=config['s1'], s2=config['s2'], d=config['d'],
        r1=config['r1'], r2=config['r2'], p=config['p'], q=config['q'],
        max_rounds=config['max_rounds'], max_elements=config['max_elements'],
        sampling=sampling_from(config), n_max=config['n_max'],
        fit_subdivisions=config['subdivisions'],
        **overrides,
    )


def _domain(P0):
    return P0.time_span(), P0.spatial_domain()


def run_moduli(f, P0, config, executor):
    J, D = _domain(P0)
    estimates = modulus_table(f, J, D, config['delta_list'], config['r1'], config['r2'],
                              config['p'], sampling_from(config), executor=executor)
    rows = [
        {'delta': e.delta, 'direction': e.direction, 'kind': e.kind, 'r': e.r,
         'p': e.p, 'value': e.value}
        for e in estimates
    ]
    data = ModulusEstimateSerializer(estimates, many=True).data
    return rows, data, f"{len(rows)} modulus estimates"


def run_besov(f, P0, config, executor):
    J, D = _domain(P0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', TruncationWarning)
        estimate = besov_seminorm(f, J, D, config['s1'], config['s2'], config['p'], config['q'],
                                  config['n_max'], sampling_from(config), executor=executor)
    slopes = level_slopes(estimate)
    rows = [{'n': n, 'temporal_term': t, 'spatial_term': x} for n, t, x in estimate.per_level]
    data = dict(BesovEstimateSerializer(estimate).data, slopes=slopes)
    summary = f"seminorm {estimate.seminorm:.6g}"
    if caught:
        summary += f" (truncated, tail ratio {estimate.tail_ratio:.3f})"
    return rows, data, summary


def run_jackson(f, P0, config, executor):
    sweep = jackson_sweep(f, P0, config['r1'], config['r2'], config['p'], config['s1'],
                          config['s2'], config['levels'], sampling_from(config),
                          executor=executor)
    rows = [
        {'level': r.level, 'element_id': r.element_id, 'measure': r.measure,
         'lhs': r.lhs, 'rhs': r.rhs, 'ratio': r.ratio}
        for r in sweep.rows
    ]
    ratios = [r.ratio for r in sweep.rows if r.ratio is not None]
    if ratios:
        summary = f"Jackson ratios in [{min(ratios):.4g}, {max(ratios):.4g}]"
    else:
        summary = "exact reproduction on every level"
    return rows, SweepResultSerializer(sweep).data, summary


def run_whitney(f, P0, config, executor):
    exponent = whitney_exponent(config['s1'], config['s2'], config['d'], config['p'], config['q'])
    sweep = whitney_sweep(f, P0, config['s1'], config['s2'], config['p'], config['q'],
                          config['levels'], sampling_from(config), n_max=config['n_max'],
                          executor=executor)
    rows = [
        {'level': r.level, 'element_id': r.element_id, 'measure': r.measure, 'lhs': r.lhs,
         'seminorm': r.seminorm, 'rhs': r.rhs, 'ratio': r.ratio}
        for r in sweep.rows
    ]
    slope = 'n/a' if sweep.slope is None else f"{sweep.slope:.4f}"
    summary = f"target exponent {exponent:.4g}, fitted slope {slope}"
    return rows, SweepResultSerializer(sweep).data, summary


def run_greedy(f, P0, config, executor):
    rows, records = [], []
    for delta in config['delta_list']:
        cfg = refinement_from(config, delta=delta)
        partition, trace, approximant = greedy(f, P0, cfg, executor)
        report = audit(f, partition, approximant, cfg, executor)
        rows.extend(
            {'delta': delta, 'round': r.round, 'marked': r.marked,
             'elements': r.elements, 'max_error': r.max_error}
            for r in trace.rounds
        )
        records.append({
            'trace': GreedyTraceSerializer(trace).data,
            'audit': AuditReportSerializer(report).data,
        })
    sizes = ', '.join(str(record['trace']['added'] + len(P0)) for record in records)
    return rows, records, f"final partition sizes {sizes}"


def run_rates(f, P0, config, executor):
    cfg = refinement_from(config, require_direct=True)
    sweep = rate_sweep(f, P0, cfg, config['eps_list'], executor)
    rows = [
        {'epsilon': r.epsilon, 'delta': r.delta, 'elements': r.elements, 'added': r.added,
         'error': r.error, 'error_ratio': r.error_ratio, 'c2': r.c2}
        for r in sweep.runs
    ]
    if sweep.exact:
        summary = EXACT_MESSAGE
    else:
        slope = 'n/a' if sweep.slope is None else f"{sweep.slope:.4f}"
        spread = 'n/a' if sweep.c2_spread is None else f"{sweep.c2_spread:.3g}"
        summary = (f"fitted complexity exponent {slope} (theorem bound {sweep.target:.4g}), "
                   f"C2 spread {spread}")
    return rows, RateSweepSerializer(sweep).data, summary


RUNNERS = {
    'moduli': run_moduli,
    'besov': run_besov,
    'jackson': run_jackson,
    'whitney': run_whitney,
    'greedy': run_greedy,
    'rates': run_rates,
}


def run(config: dict, executor=None) -> RunResult:
    """
    Execute a validated config and write config.json, <subcommand>.csv,
    <subcommand>.json and, with plot, <subcommand>.svg.
    """
    subcommand = config['subcommand']
    identifier = run_id(config)
    directory = Path(config['out']) / identifier
    directory.mkdir(parents=True, exist_ok=True)
    logger.info("run %s: %s on %s (d=%d)", identifier, subcommand, config['field'], config['d'])

    f = builtin(config['field'], config['field_params'], d=config['d'])
    P0 = kuhn_mesh(config['d'], time=tuple(config['time']), scale=config['scale'],
                   aniso_params=(config['s1'], config['s2']))
    rows, data, summary = RUNNERS[subcommand](f, P0, config, executor)

    result = RunResult(identifier, directory, summary=summary, rows=rows)
    echo = {'run_id': identifier, 'seed': config['seed'], 'config': json.loads(canonical_json(config))}
    result.files.append(reports.write_json(directory / 'config.json', echo))
    result.files.append(reports.write_csv(directory / f'{subcommand}.csv', subcommand, rows))
    result.files.append(reports.write_json(directory / f'{subcommand}.json',
                                           {'run_id': identifier, 'summary': summary,
                                            'result': data}))
    if config.get('plot'):
        result.files.append(reports.plot_svg(directory / f'{subcommand}.svg', subcommand, rows))
    logger.info("run %s finished: %s", identifier, summary)
    return result
