from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Temporal and spatial moduli of smoothness (sup and averaged) against delta."
    subcommand = 'moduli'
