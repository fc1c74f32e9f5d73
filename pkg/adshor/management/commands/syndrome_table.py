from adshor.cli import AdshorCommand


class Command(AdshorCommand):
    help = 'Emit the syndrome lookup table for damping patterns of weight <= w'
    subcommand = 'syndrome_table'
