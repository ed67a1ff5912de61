from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Per-level dyadic terms and the anisotropic Besov seminorm of a field."
    subcommand = 'besov'
