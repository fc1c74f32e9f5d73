import json

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from adshor import exports
from adshor.codes import CodeSpec, codeword, encode
from adshor.decoder import (
    PROCEDURES_622,
    artificial_ad,
    build_recovery,
    build_table,
    circuit_recovery_411,
    circuit_recovery_622,
    decode_logical,
    extract_syndrome,
    extract_syndrome_circuit,
    logical_channel,
    procedures_for,
    projector_recovery,
    reencode,
)
from adshor.exceptions import DimensionError, UncorrectableSyndrome, ZeroProbabilityBranch
from adshor.noise import ad_branches, iter_error_strings, kraus_string
from adshor.qla import StateVector, inner


def block_syndrome(spec, positions):
    bits = ['0'] * spec.n_blocks
    for q in positions:
        bits[q // spec.block_size] = '1'
    return ''.join(bits)


class SyndromeTests(SimpleTestCase):

    def test_trivial_syndrome_on_codewords(self):
        spec = CodeSpec(1, 2)
        for i in range(spec.logical_dim):
            branches = extract_syndrome(codeword(spec, i), spec)
            self.assertEqual(len(branches), 1)
            self.assertTrue(branches[0].syndrome.is_trivial)
            self.assertAlmostEqual(branches[0].probability, 1.0)

    def test_single_damping_flags_its_block(self):
        spec = CodeSpec(1, 2)
        for q in range(spec.n_qubits):
            damped = kraus_string(''.join('1' if p == q else '0' for p in range(6)), 0.1).apply(codeword(spec, 0))
            branches = extract_syndrome(damped, spec)
            self.assertEqual([b.syndrome.bits for b in branches], [block_syndrome(spec, (q,))])

    def test_superposition_splits(self):
        spec = CodeSpec(1, 2)
        state = StateVector.from_kets({'000000': 1.0, '011111': 1.0}).normalized()
        branches = extract_syndrome(state, spec)
        self.assertEqual([b.syndrome.bits for b in branches], ['000', '100'])
        assert_allclose([b.probability for b in branches], [0.5, 0.5])
        self.assertTrue(branches[1].post_state.is_normalized())

    def test_register_size_is_checked(self):
        with self.assertRaises(DimensionError):
            extract_syndrome(codeword(CodeSpec(1, 1), 0), CodeSpec(1, 2))

    def test_zero_state(self):
        with self.assertRaises(ZeroProbabilityBranch):
            extract_syndrome(StateVector(4, np.zeros(16)), CodeSpec(1, 1))


class SyndromeTableTests(SimpleTestCase):

    def test_622_table(self):
        table = build_table(CodeSpec(1, 2))
        self.assertEqual(set(table.entries), set(PROCEDURES_622))
        self.assertEqual(table.lookup('000'), ())
        self.assertEqual(table.candidates('100'), ((0,), (1,)))
        self.assertEqual(table.lookup('001'), (4,))
        self.assertEqual(len(table.collisions), 3)

    def test_unknown_syndrome(self):
        with self.assertRaises(UncorrectableSyndrome):
            build_table(CodeSpec(1, 1)).lookup('11')

    def test_9_1_table_covers_pairs_of_blocks(self):
        spec = CodeSpec(2, 1)
        table = build_table(spec)
        self.assertEqual(table.lookup('000000'), ())
        # one damped qubit in the middle of a block flips both of its checks
        self.assertEqual(table.lookup('110000'), (1,))
        self.assertEqual(table.to_json()['spec'], '[[9,1]]')


class ProjectorRecoveryTests(SimpleTestCase):

    def test_unknown_variant(self):
        with self.assertRaises(ValueError):
            build_recovery(CodeSpec(1, 1), 0.1, 'greedy')

    def test_completeness_defect_by_variant(self):
        spec = CodeSpec(1, 2)
        self.assertAlmostEqual(build_recovery(spec, 0.1, 'literal').completeness_defect(), 0.75)
        self.assertAlmostEqual(build_recovery(spec, 0.1, 'transfer').completeness_defect(), 0.0)
        self.assertGreater(build_recovery(spec, 0.1, 'balanced').completeness_defect(), 0.0)

    def test_transfer_restores_damped_codewords(self):
        spec = CodeSpec(1, 2)
        for i in range(spec.logical_dim):
            result = projector_recovery(spec, ad_branches(codeword(spec, i), 0.05), 'transfer')
            for branch in result.branch_fidelities:
                if branch.label.count('1') <= spec.w:
                    self.assertAlmostEqual(branch.fidelity, 1.0, places=12)

    def test_balanced_restores_superpositions(self):
        spec = CodeSpec(1, 1)
        psi = np.array([0.6, 0.8j])
        target = encode(spec, psi)
        result = projector_recovery(spec, ad_branches(target, 0.05), 'balanced')
        low = [b for b in result.ensemble if b.label.split('>')[0].count('1') <= spec.w]
        self.assertEqual(len(low), 5)
        for branch in low:
            overlap = abs(inner(target, branch.state)) ** 2 / branch.state.squared_norm
            self.assertAlmostEqual(overlap, 1.0, places=12)
        self.assertGreater(result.leakage, 0.0)

    def test_requires_source(self):
        spec = CodeSpec(1, 1)
        ensemble = ad_branches(codeword(spec, 0), 0.1)
        with self.assertRaises(ValueError):
            projector_recovery(spec, type(ensemble)(ensemble.branches), 'transfer')

    def test_decode_logical(self):
        spec = CodeSpec(1, 2)
        amps, leakage = decode_logical(encode(spec, [0.5, 0.5, 0.5, -0.5]), spec)
        assert_allclose(amps, [0.5, 0.5, 0.5, -0.5], atol=1e-14)
        self.assertAlmostEqual(leakage, 0.0)
        assert_allclose(reencode(spec, amps).amps, encode(spec, [0.5, 0.5, 0.5, -0.5]).amps, atol=1e-14)


class CircuitRecoveryTests(SimpleTestCase):

    def test_622_recovers_every_correctable_branch(self):
        spec = CodeSpec(1, 2)
        cases = 0
        for error in iter_error_strings(spec.n_qubits, spec.w):
            for i in range(spec.logical_dim):
                damped = kraus_string(error, 0.1).apply(codeword(spec, i))
                result = circuit_recovery_622(damped, 0.1, syndrome=block_syndrome(spec, error.positions))
                self.assertEqual(result.recovered_index, i)
                cases += 1
        self.assertEqual(cases, 28)

    def test_411_recovers_every_correctable_branch(self):
        spec = CodeSpec(1, 1)
        for error in iter_error_strings(spec.n_qubits, spec.w):
            for i in range(spec.logical_dim):
                damped = kraus_string(error, 0.2).apply(codeword(spec, i))
                self.assertEqual(circuit_recovery_411(damped, 0.2).recovered_index, i)

    def test_expected_syndrome_is_checked(self):
        damped = kraus_string('100000', 0.1).apply(codeword(CodeSpec(1, 2), 0))
        with self.assertRaises(UncorrectableSyndrome):
            circuit_recovery_622(damped, 0.1, syndrome='001')

    def test_uncorrectable_pattern(self):
        damped = kraus_string('1010', 0.1).apply(codeword(CodeSpec(1, 1), 0))
        with self.assertRaises(UncorrectableSyndrome):
            circuit_recovery_411(damped, 0.1)

    def test_circuit_extraction_matches_projective_syndrome(self):
        spec = CodeSpec(1, 2)
        damped = kraus_string('000010', 0.1).apply(codeword(spec, '10'))
        self.assertEqual([bits for bits, _ in extract_syndrome_circuit(spec, damped)], ['001'])

    def test_recovery_trace(self):
        spec = CodeSpec(1, 2)
        damped = kraus_string('000010', 0.1).apply(codeword(spec, '10'))
        result = circuit_recovery_622(damped, 0.1, syndrome='001')
        data = json.loads(exports.to_json(result.to_json()))
        self.assertEqual(data['syndrome'], '001')
        self.assertEqual(data['recovered'], 2)
        for path in data['paths']:
            steps = path['steps']
            self.assertEqual([s['step'] for s in steps], ['discard', 'x', 'artificial', 'cnot', 'output'])
            self.assertEqual(steps[0]['qubits'], [4])
            self.assertIn('outcome', steps[0])
            self.assertEqual(steps[1]['qubits'], [0, 2])
            self.assertAlmostEqual(steps[2]['gamma_prime'], 0.1)
            self.assertEqual(steps[3]['qubits'], [0, 2])
            self.assertEqual(steps[4]['qubits'], [2, 0])

    def test_only_small_codes(self):
        for spec in (CodeSpec(2, 1), CodeSpec(1, 3), CodeSpec(1, 1, dual_rail=True)):
            with self.assertRaises(DimensionError):
                procedures_for(spec)


class ArtificialDampingTests(SimpleTestCase):

    def test_excited_qubit(self):
        decayed = artificial_ad(StateVector.from_bits('1'), 0, 0.3, postselect=1)
        self.assertAlmostEqual(decayed.probability, 0.3)
        self.assertEqual(set(decayed.post_state.kets(1e-14)), {'0'})
        survived = artificial_ad(StateVector.from_bits('1'), 0, 0.3, postselect=0)
        self.assertAlmostEqual(survived.probability, 0.7)
        self.assertEqual(set(survived.post_state.kets(1e-14)), {'1'})

    def test_ground_state_never_decays(self):
        with self.assertRaises(ZeroProbabilityBranch):
            artificial_ad(StateVector.from_bits('0'), 0, 0.3, postselect=1)
        self.assertAlmostEqual(artificial_ad(StateVector.from_bits('0'), 0, 0.3).probability, 1.0)

    def test_invalid_rate(self):
        with self.assertRaises(ValueError):
            artificial_ad(StateVector.from_bits('1'), 0, 1.2)


class LogicalChannelTests(SimpleTestCase):

    def test_noiseless_channel_is_identity(self):
        channel = logical_channel(CodeSpec(1, 2), 0.0, variant='transfer')
        rng = np.random.default_rng(5)
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        self.assertAlmostEqual(channel.fidelity(psi), 1.0, places=12)
        self.assertAlmostEqual(channel.lost, 0.0)

    def test_basis_states_survive_both_backends(self):
        spec = CodeSpec(1, 1)
        for backend in ('projector', 'circuit'):
            channel = logical_channel(spec, 0.01, backend=backend, variant='transfer')
            self.assertEqual(channel.ops.shape[1:], (2, 2))
            self.assertGreater(channel.fidelity([1.0, 0.0]), 0.99)
            self.assertLessEqual(channel.fidelity([1.0, 0.0]), 1.0 + 1e-12)

    def test_output_is_a_density_matrix(self):
        channel = logical_channel(CodeSpec(1, 1), 0.1)
        rho = channel.apply(np.array([[0.5, 0.5], [0.5, 0.5]]))
        assert_allclose(rho, rho.conj().T, atol=1e-14)
        self.assertLessEqual(np.trace(rho).real, 1.0 + 1e-12)

    def test_unknown_backend(self):
        with self.assertRaises(ValueError):
            logical_channel(CodeSpec(1, 1), 0.1, backend='tensor')
