import csv
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from adshor.cli import FAILURE_TRAILER, RunConfig, monte_carlo_fidelity, parse_grid, run
from adshor.codes import CodeSpec, PauliString
from adshor.decoder import logical_channel
from adshor.verify import rate_tables


def call(name, *args, **options):
    out, err = StringIO(), StringIO()
    call_command(name, *args, stdout=out, stderr=err, **options)
    return out.getvalue(), err.getvalue()


class RunConfigTests(SimpleTestCase):

    def test_parse_grid(self):
        self.assertEqual(parse_grid('0.1, 0.01,'), (0.1, 0.01))
        self.assertIsNone(parse_grid(None))

    def test_single_gamma_wins(self):
        config = RunConfig.from_options('fidelity', {'gamma_grid': '0.1,0.2', 'gamma': 0.05})
        self.assertEqual(config.gammas, (0.05,))
        self.assertEqual(config.grid((0.3,)), (0.05,))

    def test_invalid_options(self):
        for options in (
            {'gamma': 1.5},
            {'trajectories': 10},
            {'cutoff': 9},
            {'rounds': -1},
            {'format': 'xml'},
            {'decoder': 'tensor'},
            {'w': 3, 'K': 3},
        ):
            with self.assertRaises(ValueError, msg=options):
                RunConfig.from_options('fidelity', options)

    def test_unknown_subcommand(self):
        with self.assertRaises(ValueError):
            run(RunConfig('decode'))


class CommandTests(SimpleTestCase):

    def test_codewords(self):
        out, err = call('codewords', K=2)
        data = json.loads(out)
        self.assertTrue(data['pass'])
        self.assertEqual(data['spec'], '[[6,2]]')
        self.assertEqual(len(data['codewords']), 4)
        self.assertEqual(err, '')

    def test_output_is_deterministic(self):
        self.assertEqual(call('stabilizers', w=2, K=2), call('stabilizers', w=2, K=2))
        self.assertEqual(call('fidelity', K=2, gamma_grid='0.01,0.001', format='csv'),
                         call('fidelity', K=2, gamma_grid='0.01,0.001', format='csv'))

    def test_csv_header(self):
        out, _ = call('verify_aqec', format='csv')
        rows = list(csv.reader(StringIO(out)))
        self.assertEqual(rows[0], ['spec', 'gamma', 'metric', 'value', 'tolerance', 'pass'])
        self.assertIn('slope', {row[2] for row in rows[1:]})

    def test_syndrome_table(self):
        data = json.loads(call('syndrome_table', K=2)[0])
        self.assertEqual(sorted(data['entries']), ['000', '001', '010', '100'])

    def test_dual_rail_aqec(self):
        data = json.loads(call('verify_aqec', dual_rail=True)[0])
        self.assertTrue(data['pass'])
        self.assertTrue(data['ce']['pass'])

    def test_aqec_12_2_reports_the_quadratic_residual(self):
        data = json.loads(call('verify_aqec', w=2, K=2)[0])
        self.assertTrue(data['pass'], data['failures'])
        scaling = data['scaling']
        self.assertEqual((scaling['expected'], scaling['nominal']), (2, 3))
        self.assertEqual(scaling['diagonal_gap'], {'order': 2, 'coefficient': '9/2'})

    def test_stabilizers_check_codewords(self):
        data = json.loads(call('stabilizers', K=2, dual_rail=True)[0])
        self.assertTrue(data['pass'])
        self.assertLessEqual(max(data['codeword_defects'].values()), 1e-12)

    def test_wrong_stabilizer_sign_fails(self):
        def flipped(spec):
            return [PauliString.from_support(spec.n_qubits, 'Z', [0, 1], phase=-1)]

        err = StringIO()
        with mock.patch('adshor.cli.z_stabilizers', flipped):
            with self.assertRaises(CommandError) as caught:
                call_command('stabilizers', stdout=StringIO(), stderr=err)
        self.assertEqual(caught.exception.returncode, 1)
        failures = json.loads(err.getvalue().strip()[len(FAILURE_TRAILER):])['failures']
        self.assertEqual(len(failures), 1)
        self.assertIn('+1 eigenstates', failures[0])

    def test_export_branches(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / 'branches.jsonl'
            data = json.loads(call('fidelity', gamma=0.1, export_branches=str(target))[0])
            records = [json.loads(line) for line in target.read_text().splitlines()]
        self.assertEqual(data['branch_export']['records'], 23)
        self.assertEqual(len(records), 23)
        self.assertEqual(records[0]['a'], '0000')
        self.assertEqual({r['i'] for r in records}, {'0', '1'})
        for label in ('0', '1'):
            total = sum(r['weight'] for r in records if r['i'] == label)
            self.assertAlmostEqual(total, 1.0, places=12)

    def test_fidelity_with_circuit_decoder(self):
        data = json.loads(call('fidelity', decoder='circuit', gamma_grid='0.01,0.003')[0])
        self.assertTrue(data['pass'], data['failures'])
        self.assertEqual(data['agreement']['cases'], 10)

    def test_threshold_and_rates(self):
        self.assertEqual(len(json.loads(call('threshold')[0])['points']), 3)
        self.assertEqual(json.loads(call('rates')[0])['fewer_qubits'], 12)

    def test_repro(self):
        out, _ = call('repro', 'v', gamma=0.1, format='csv')
        self.assertEqual(out.splitlines()[0], 'k,i,ket,coefficient,value')
        self.assertEqual(len(out.splitlines()), 29)

    def test_writes_to_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / 'codewords.json'
            out, _ = call('codewords', out=str(target))
            self.assertIn('Wrote', out)
            self.assertTrue(json.loads(target.read_text())['pass'])

    def test_failed_checks_exit_with_trailer(self):
        err = StringIO()
        with mock.patch('adshor.cli.rate_tables', lambda: rate_tables()[:-1]):
            with self.assertRaises(CommandError) as caught:
                call_command('rates', stdout=StringIO(), stderr=err)
        self.assertEqual(caught.exception.returncode, 1)
        trailer = err.getvalue().strip()
        self.assertTrue(trailer.startswith(FAILURE_TRAILER))
        failures = json.loads(trailer[len(FAILURE_TRAILER):])['failures']
        self.assertIn('17 rate rows, expected 18', failures)

    def test_invalid_configuration_exits_with_two(self):
        with self.assertRaises(CommandError) as caught:
            call('fidelity', trajectories=100)
        self.assertEqual(caught.exception.returncode, 2)
        with self.assertRaises(CommandError) as caught:
            call('codewords', w=3, K=3)
        self.assertEqual(caught.exception.returncode, 2)


class MonteCarloTests(SimpleTestCase):

    def test_sampled_fidelity_matches_exact(self):
        spec = CodeSpec(1, 1)
        channel = logical_channel(spec, 0.1)
        psi = np.array([1.0, 1.0]) / np.sqrt(2)
        mean, sigma, exact = monte_carlo_fidelity(spec, 0.1, psi, 4000, seed=7, channel=channel)
        self.assertAlmostEqual(exact, channel.fidelity(psi), places=12)
        self.assertGreater(sigma, 0.0)
        self.assertLessEqual(abs(mean - exact), 4 * sigma)

    def test_seeded_runs_repeat(self):
        spec = CodeSpec(1, 1)
        first = monte_carlo_fidelity(spec, 0.05, [1.0, 0.0], 500, seed=11)
        second = monte_carlo_fidelity(spec, 0.05, [1.0, 0.0], 500, seed=11)
        self.assertEqual(first, second)
