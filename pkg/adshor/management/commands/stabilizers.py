"""
Print the Z and X stabilizer generators and the logical operators.
"""

from adshor.cli import AdshorCommand


class Command(AdshorCommand):
    help = 'Emit stabilizer generators and logical Paulis, checking commutation and rank'
    subcommand = 'stabilizers'
