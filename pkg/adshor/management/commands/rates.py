from adshor.cli import AdshorCommand


class Command(AdshorCommand):
    help = 'Emit the rate formulas and the (N1, N2) qubit counts'
    subcommand = 'rates'
