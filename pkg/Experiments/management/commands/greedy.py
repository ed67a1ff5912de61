from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Greedy adaptive refinement for every delta, with a post-run audit."
    subcommand = 'greedy'
