"""
Render one of the reference tables with symbolic coefficients.

    python manage.py repro V --gamma 0.1 --format csv
"""

from adshor.cli import AdshorCommand
from adshor.repro import TABLE_IDS


class Command(AdshorCommand):
    help = 'Render a reference table (I-VII) evaluated at --gamma'
    subcommand = 'repro'

    def add_arguments(self, parser):
        parser.add_argument('table_id', type=str.upper, choices=TABLE_IDS)
        super().add_arguments(parser)
