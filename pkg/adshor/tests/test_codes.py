from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase, override_settings
from numpy.testing import assert_allclose

from adshor.codes import (
    CodeSpec,
    PauliString,
    apply_encoding,
    apply_logical_hadamard,
    codeword,
    codeword_defects,
    codeword_support,
    codewords,
    dual_rail_lift,
    encode,
    encoding_isometry,
    equivalent_modulo,
    excitation_number,
    in_group_span,
    layout_ascii,
    logical_ops,
    stabilizer_rank,
    x_stabilizers,
    z_stabilizers,
)
from adshor.exceptions import DimensionError, NormalizationError, QubitLimitError
from adshor.qla import StateVector, inner

REFERENCE_SPECS = [CodeSpec(1, 1), CodeSpec(1, 2), CodeSpec(2, 1), CodeSpec(1, 3), CodeSpec(2, 2)]


class CodeSpecTests(SimpleTestCase):

    def test_sizes(self):
        self.assertEqual(CodeSpec(1, 1).n_qubits, 4)
        self.assertEqual(CodeSpec(1, 2).n_qubits, 6)
        self.assertEqual(CodeSpec(2, 1).n_qubits, 9)
        self.assertEqual(CodeSpec(2, 2).n_qubits, 12)
        self.assertEqual(CodeSpec(1, 1, dual_rail=True).n_qubits, 8)
        self.assertEqual(CodeSpec(1, 2).label, '[[6,2]]')

    def test_rate(self):
        self.assertEqual(CodeSpec(1, 2).rate, Fraction(1, 3))
        self.assertEqual(CodeSpec(1, 2, dual_rail=True).rate, Fraction(1, 6))

    def test_invalid_parameters(self):
        for w, K in ((0, 1), (1, 0), (-1, 2), (1.5, 1)):
            with self.assertRaises(ValueError):
                CodeSpec(w, K)

    @override_settings(ADSHOR_MAX_QUBITS=20)
    def test_qubit_guard(self):
        with self.assertRaises(QubitLimitError):
            CodeSpec(3, 3).check_size()
        CodeSpec(3, 3).check_size(max_qubits=24)


class CodewordTests(SimpleTestCase):

    def test_411_codewords(self):
        spec = CodeSpec(1, 1)
        self.assertEqual(set(codeword(spec, 0).kets(1e-14)), {'0000', '1111'})
        self.assertEqual(set(codeword(spec, 1).kets(1e-14)), {'0011', '1100'})
        assert_allclose(codeword(spec, 0).amps[0b1111], 1 / np.sqrt(2))

    def test_622_codewords(self):
        spec = CodeSpec(1, 2)
        expected = {
            '00': {'000000', '111111'},
            '01': {'000011', '111100'},
            '10': {'001100', '110011'},
            '11': {'001111', '110000'},
        }
        for label, kets in expected.items():
            self.assertEqual(set(codeword(spec, label).kets(1e-14)), kets)

    def test_9_1_codeword_support(self):
        spec = CodeSpec(2, 1)
        kets = set(codeword(spec, 0).kets(1e-14))
        self.assertEqual(kets, {'000000000', '000111111', '111000111', '111111000'})
        _, amplitude = codeword_support(spec, 0)
        self.assertAlmostEqual(amplitude, 0.5)

    def test_gram_is_identity(self):
        for spec in REFERENCE_SPECS + [CodeSpec(1, 2, dual_rail=True)]:
            words = codewords(spec)
            gram = np.array([[inner(a, b) for b in words] for a in words])
            assert_allclose(gram, np.eye(spec.logical_dim), atol=1e-12)

    def test_dual_rail_codewords_have_constant_excitation(self):
        spec = CodeSpec(1, 2, dual_rail=True)
        self.assertEqual({excitation_number(c) for c in codewords(spec)}, {spec.n_outer})
        self.assertIsNone(excitation_number(codeword(CodeSpec(1, 1), 0)))

    def test_dual_rail_pairs(self):
        kets = set(codeword(CodeSpec(1, 1, dual_rail=True), 0).kets(1e-14))
        self.assertEqual(kets, {'01010101', '10101010'})

    def test_encode_rejects_unnormalized_input(self):
        with self.assertRaises(NormalizationError):
            encode(CodeSpec(1, 1), [1.0, 1.0])
        state = apply_encoding(CodeSpec(1, 1), [1.0, 1.0])
        self.assertAlmostEqual(state.squared_norm, 2.0)

    def test_encode_is_linear(self):
        spec = CodeSpec(1, 2)
        amps = np.array([0.5, 0.5j, -0.5, 0.5])
        expected = sum((codeword(spec, i).scaled(a) for i, a in enumerate(amps)), StateVector(6, np.zeros(64)))
        assert_allclose(encode(spec, amps).amps, expected.amps, atol=1e-14)

    def test_logical_index_out_of_range(self):
        with self.assertRaises(DimensionError):
            codeword(CodeSpec(1, 1), 2)
        with self.assertRaises(DimensionError):
            codeword(CodeSpec(1, 2), '1')

    def test_isometry(self):
        V = encoding_isometry(CodeSpec(1, 2))
        self.assertEqual(V.shape, (64, 4))
        assert_allclose(V.conj().T @ V, np.eye(4), atol=1e-12)

    @override_settings(ADSHOR_DENSE_MAX_QUBITS=10)
    def test_isometry_guard(self):
        with self.assertRaises(QubitLimitError):
            encoding_isometry(CodeSpec(2, 2))


class StabilizerTests(SimpleTestCase):

    def test_12_2_generators(self):
        spec = CodeSpec(2, 2)
        z = [str(p) for p in z_stabilizers(spec)]
        self.assertEqual(z, ['Z0Z1', 'Z1Z2', 'Z3Z4', 'Z4Z5', 'Z6Z7', 'Z7Z8', 'Z9Z10', 'Z10Z11'])
        x = [str(p) for p in x_stabilizers(spec)]
        self.assertEqual(x, ['X0X1X2X6X7X8X9X10X11', 'X3X4X5X6X7X8X9X10X11'])
        pairwise = [str(p) for p in x_stabilizers(spec, 'pairwise')]
        self.assertEqual(pairwise, ['X0X1X2X3X4X5', 'X3X4X5X6X7X8X9X10X11'])

    def test_12_2_logicals(self):
        ops = logical_ops(CodeSpec(2, 2))
        self.assertEqual([str(p) for p in ops.x], ['X6X7X8', 'X9X10X11'])
        self.assertEqual([str(p) for p in ops.z], ['Z0Z3Z6', 'Z0Z3Z9'])
        self.assertEqual(str(ops.x_all), 'X0X1X2')

    def test_parse_listing_form(self):
        spec = CodeSpec(2, 2)
        z = logical_ops(spec).z[1]
        self.assertEqual(PauliString.parse('Z0Z3Z9', 12), z)
        generators = z_stabilizers(spec) + x_stabilizers(spec)
        # Z on the second qubit of each block is equivalent modulo the ZZ checks
        self.assertTrue(equivalent_modulo(PauliString.parse('Z1Z4Z10', 12), z, generators))
        self.assertFalse(in_group_span(z, generators))

    def test_layouts_span_the_same_group(self):
        spec = CodeSpec(2, 2)
        pairwise = x_stabilizers(spec, 'pairwise')
        for generator in x_stabilizers(spec, 'chains'):
            self.assertTrue(in_group_span(generator, pairwise))

    def test_z_signs_odd_parity_indices(self):
        one = StateVector(1, [0.0, 1.0])
        assert_allclose(PauliString('Z').apply(one).amps, [0.0, -1.0])
        state = StateVector(3, np.full(8, 1 / np.sqrt(8)))
        flipped = PauliString('ZZZ').apply(state)
        parity = np.array([bin(i).count('1') % 2 for i in range(8)])
        assert_allclose(flipped.amps, np.where(parity == 1, -1.0, 1.0) / np.sqrt(8))
        self.assertAlmostEqual(inner(flipped, flipped).real, 1.0)
        y = PauliString('Y').apply(one)
        assert_allclose(y.amps, [-1j, 0.0])

    def test_rank(self):
        for spec in REFERENCE_SPECS + [CodeSpec(1, 2, dual_rail=True)]:
            self.assertEqual(stabilizer_rank(spec), spec.n_qubits - spec.K)

    def test_codewords_are_stabilized(self):
        for spec in REFERENCE_SPECS + [CodeSpec(1, 1, dual_rail=True), CodeSpec(1, 2, dual_rail=True)]:
            generators = z_stabilizers(spec) + x_stabilizers(spec)
            for word in codewords(spec):
                for g in generators:
                    assert_allclose(g.apply(word).amps, word.amps, atol=1e-14)

    def test_codeword_defects(self):
        for spec in REFERENCE_SPECS + [CodeSpec(1, 1, dual_rail=True), CodeSpec(1, 2, dual_rail=True)]:
            defects = codeword_defects(spec)
            self.assertLessEqual(max(defects.values()), 1e-12, spec.label)
        spec = CodeSpec(1, 1)
        flipped = [PauliString.from_support(4, 'Z', [0, 1], phase=-1)]
        self.assertAlmostEqual(codeword_defects(spec, flipped)['stabilizers'], np.sqrt(2))

    def test_sparse_action_matches_dense(self):
        spec = CodeSpec(1, 2)
        word = codeword(spec, '11')
        support, amplitude = codeword_support(spec, '11')
        for op in list(logical_ops(spec).z) + [logical_ops(spec).y(1)]:
            indices, amps = op.apply_sparse(support, np.full(len(support), amplitude))
            dense = np.zeros(word.dim, dtype=np.complex128)
            dense[indices] = amps
            assert_allclose(dense, op.apply(word).amps, atol=1e-14)

    def test_logical_action(self):
        spec = CodeSpec(1, 2)
        ops = logical_ops(spec)
        assert_allclose(ops.x[0].apply(codeword(spec, '01')).amps, codeword(spec, '11').amps, atol=1e-14)
        assert_allclose(ops.z[1].apply(codeword(spec, '01')).amps, -codeword(spec, '01').amps, atol=1e-14)
        assert_allclose(ops.x_all.apply(codeword(spec, '01')).amps, codeword(spec, '10').amps, atol=1e-14)

    def test_logical_y(self):
        spec = CodeSpec(1, 1)
        y = logical_ops(spec).y(0)
        assert_allclose(y.apply(codeword(spec, 0)).amps, 1j * codeword(spec, 1).amps, atol=1e-14)

    def test_logical_hadamard(self):
        spec = CodeSpec(1, 1)
        plus = apply_logical_hadamard(spec, codeword(spec, 0), 0)
        expected = encode(spec, [1 / np.sqrt(2), 1 / np.sqrt(2)])
        assert_allclose(plus.amps, expected.amps, atol=1e-14)

    def test_dual_rail_logicals_act_on_codewords(self):
        spec = CodeSpec(1, 2, dual_rail=True)
        ops = logical_ops(spec)
        assert_allclose(ops.x[1].apply(codeword(spec, '00')).amps, codeword(spec, '01').amps, atol=1e-14)
        assert_allclose(ops.z[0].apply(codeword(spec, '10')).amps, -codeword(spec, '10').amps, atol=1e-14)

    def test_dual_rail_lift(self):
        self.assertEqual(dual_rail_lift(PauliString('XZ')).letters, 'XXZI')
        self.assertEqual(dual_rail_lift(PauliString('YI')).letters, 'YXII')

    def test_products_and_commutation(self):
        x, z = PauliString('X'), PauliString('Z')
        self.assertEqual(x * z, PauliString('Y', -1j))
        self.assertFalse(x.commutes_with(z))
        self.assertTrue(PauliString('XX').commutes_with(PauliString('ZZ')))

    def test_layout_lists_every_block(self):
        text = layout_ascii(CodeSpec(2, 2))
        self.assertEqual(sum(1 for line in text.splitlines() if line.startswith('block')), 4)
