from adshor.cli import AdshorCommand


class Command(AdshorCommand):
    help = 'Compare the closed-form threshold round count of [[4,1]] with the numeric crossing'
    subcommand = 'threshold'
