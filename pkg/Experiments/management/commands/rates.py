from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Direct-estimate epsilon sweep with the fitted complexity exponent."
    subcommand = 'rates'
