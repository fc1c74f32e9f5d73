"""
Worst-case logical fidelity sweep with either decoder backend.

    python manage.py fidelity --gamma 0.1 --export-branches branches.jsonl
"""

from adshor.cli import AdshorCommand


class Command(AdshorCommand):
    help = 'Run encode, damp, recover and decode over a gamma grid'
    subcommand = 'fidelity'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--export-branches', help='Write the damping branches of every codeword as JSON lines')
