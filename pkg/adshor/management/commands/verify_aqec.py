"""
Check the approximate error-correction conditions over a gamma grid.

Exits with status 1 when an off-diagonal overlap is not zero or the
residual does not fall like gamma^(w+1).
"""

from adshor.cli import AdshorCommand


class Command(AdshorCommand):
    help = 'Verify the overlap structure and residual scaling of a code'
    subcommand = 'verify_aqec'
