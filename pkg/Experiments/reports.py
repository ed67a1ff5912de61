"""
Artifact writers: CSV tables, JSON records and optional SVG plots.

CSV floats carry 12 significant digits and no timestamps are written, so
two runs with the same config and seed produce byte-identical tables.
"""

import csv
import logging
import math
from pathlib import Path

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
from rest_framework.renderers import JSONRenderer  # noqa: E402

logger = logging.getLogger(__name__)

CSV_HEADERS = {
    'moduli': ['delta', 'direction', 'kind', 'r', 'p', 'value'],
    'besov': ['n', 'temporal_term', 'spatial_term'],
    'jackson': ['level', 'element_id', 'measure', 'lhs', 'rhs', 'ratio'],
    'whitney': ['level', 'element_id', 'measure', 'lhs', 'seminorm', 'rhs', 'ratio'],
    'greedy': ['delta', 'round', 'marked', 'elements', 'max_error'],
    'rates': ['epsilon', 'delta', 'elements', 'added', 'error', 'error_ratio', 'c2'],
}


def format_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if math.isnan(value):
            return 'nan'
        return format(value, '.12g')
    return str(value)


def write_csv(path: Path, subcommand: str, rows) -> Path:
    header = CSV_HEADERS[subcommand]
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(row[column]) for column in header])
    logger.info("wrote %s", path)
    return path


def write_json(path: Path, data) -> Path:
    Path(path).write_bytes(JSONRenderer().render(data) + b'\n')
    logger.info("wrote %s", path)
    return path


def plot_svg(path: Path, subcommand: str, rows) -> Path:
    """
    Log-log plot of the subcommand's main quantity; static, for offline inspection.
    """
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if subcommand == 'moduli':
        for (direction, kind) in sorted({(row['direction'], row['kind']) for row in rows}):
            points = [(row['delta'], row['value']) for row in rows
                      if row['direction'] == direction and row['kind'] == kind and row['value'] > 0]
            if points:
                ax.loglog(*zip(*points), 'o-', label=f'{kind} {direction}')
        ax.set_xlabel(r'$\delta$')
        ax.set_ylabel('modulus')
    elif subcommand == 'besov':
        ax.semilogy([row['n'] for row in rows], [row['temporal_term'] for row in rows],
                    'o-', label='temporal')
        ax.semilogy([row['n'] for row in rows], [row['spatial_term'] for row in rows],
                    's-', label='spatial')
        ax.set_xlabel('n')
        ax.set_ylabel('dyadic term')
    elif subcommand in ('jackson', 'whitney'):
        ax.loglog([row['measure'] for row in rows], [row['lhs'] for row in rows],
                  'o-', label='best-fit error')
        ax.loglog([row['measure'] for row in rows], [row['rhs'] for row in rows],
                  's--', label='bound')
        ax.set_xlabel(r'$|J\times S|$')
    elif subcommand == 'greedy':
        for delta in sorted({row['delta'] for row in rows}, reverse=True):
            series = [row for row in rows if row['delta'] == delta]
            ax.semilogy([row['round'] for row in series], [row['max_error'] for row in series],
                        'o-', label=rf'$\delta$={delta:g}')
        ax.set_xlabel('round')
        ax.set_ylabel('max local error')
    elif subcommand == 'rates':
        points = [(1.0 / row['epsilon'], row['added']) for row in rows if row['added'] > 0]
        if points:
            ax.loglog(*zip(*points), 'o-', label=r'$\#P-\#P_0$')
        ax.set_xlabel(r'$1/\varepsilon$')
    ax.grid(True, which='both', alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc='best')
    # Fixed salt and no date keep the SVG stable between runs.
    with plt.rc_context({'svg.hashsalt': 'anisost'}):
        fig.savefig(path, format='svg', bbox_inches='tight', metadata={'Date': None})
    plt.close(fig)
    logger.info("wrote %s", path)
    return path
