from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Jackson ratios along a chain of atomically refined elements."
    subcommand = 'jackson'
