from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Whitney checks over refinement levels with a log-log slope fit."
    subcommand = 'whitney'
