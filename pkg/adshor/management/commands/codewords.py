"""
Print the codewords of an AD Shor code as amplitude lists.
"""

from adshor.cli import AdshorCommand


class Command(AdshorCommand):
    help = 'Emit the codewords |i> of the [[(w+1)(w+K),K]] code'
    subcommand = 'codewords'
