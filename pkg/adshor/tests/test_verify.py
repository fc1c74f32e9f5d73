import numpy as np
import sympy as sp
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from adshor.codes import CodeSpec, codeword
from adshor.exceptions import QubitLimitError, TruncationError
from adshor.noise import iter_error_strings, kraus_string
from adshor.verify import (
    K_SYM,
    alpha_factorized_norm,
    backend_agreement,
    ce_certify,
    fidelity_sweep,
    expected_residual_order,
    fit_infidelity,
    gram_form_residual,
    leading_diagonal_gap,
    logical_test_states,
    no_damping_series,
    overlap_matrix,
    rate_formulas,
    rate_tables,
    reference_fidelity_411,
    residual_scaling,
    sweep_point,
    threshold_gap,
    threshold_rounds,
)


class OverlapMatrixTests(SimpleTestCase):

    def test_structural_zeros(self):
        for spec in (CodeSpec(1, 1), CodeSpec(1, 2), CodeSpec(2, 1), CodeSpec(2, 2)):
            report = overlap_matrix(spec, 0.05)
            self.assertLessEqual(report.step_zero_max, 1e-12, spec.label)
            self.assertLessEqual(report.hermiticity, 1e-14, spec.label)

    def test_622_pairs(self):
        report = overlap_matrix(CodeSpec(1, 2), 0.1)
        self.assertEqual(len(report.errors), 7)
        self.assertEqual(report.off_diagonal_pairs, 42)
        self.assertEqual(report.M.shape, (4, 4, 7, 7))
        self.assertGreater(report.residual, 0.0)

    def test_w_max_is_bounded(self):
        with self.assertRaises(ValueError):
            overlap_matrix(CodeSpec(1, 1), 0.1, w_max=2)

    def test_noiseless_residual_is_zero(self):
        self.assertEqual(overlap_matrix(CodeSpec(1, 2), 0.0).residual, 0.0)


class ResidualScalingTests(SimpleTestCase):

    def test_slope_is_one_more_than_the_weight(self):
        for spec in (CodeSpec(1, 1), CodeSpec(1, 2), CodeSpec(1, 3), CodeSpec(2, 1)):
            fit = residual_scaling(spec)
            self.assertFalse(fit.exact)
            self.assertEqual(fit.expected, spec.w + 1)
            self.assertAlmostEqual(fit.slope, spec.w + 1, delta=0.15)
            self.assertTrue(fit.passes())

    def test_several_logical_qubits_cap_the_slope_at_two(self):
        spec = CodeSpec(2, 2)
        fit = residual_scaling(spec)
        self.assertEqual((fit.expected, fit.nominal), (2, 3))
        self.assertAlmostEqual(fit.slope, 2.0, delta=0.15)
        self.assertTrue(fit.passes())
        self.assertEqual(expected_residual_order(CodeSpec(3, 2)), 2)
        self.assertEqual(expected_residual_order(CodeSpec(3, 1)), 4)

    def test_no_damping_diagonal_series(self):
        spec = CodeSpec(2, 2)
        self.assertEqual(no_damping_series(spec, '00')[:3], [1, -6, sp.Rational(87, 4)])
        self.assertEqual(no_damping_series(spec, '01')[:3], [1, -6, sp.Rational(69, 4)])
        self.assertEqual(leading_diagonal_gap(spec), (2, sp.Rational(9, 2)))
        self.assertEqual(leading_diagonal_gap(CodeSpec(2, 1)), (3, sp.Rational(27, 4)))
        self.assertEqual(leading_diagonal_gap(CodeSpec(1, 1, dual_rail=True)), (None, 0))

    def test_residual_tracks_the_diagonal_gap(self):
        # gamma^2 term dominates the (2,2) residual at small gamma
        residual = overlap_matrix(CodeSpec(2, 2), 1e-3).residual
        self.assertAlmostEqual(residual / 1e-6, 4.5, delta=0.1)

    def test_dual_rail_is_exact(self):
        fit = residual_scaling(CodeSpec(1, 1, dual_rail=True))
        self.assertTrue(fit.exact)
        self.assertIsNone(fit.slope)
        self.assertTrue(fit.to_json()['pass'])

    def test_grid_validation(self):
        with self.assertRaises(ValueError):
            residual_scaling(CodeSpec(1, 1), [0.1, 0.01, 0.001])
        with self.assertRaises(ValueError):
            residual_scaling(CodeSpec(1, 1), [0.1, 0.01, 0.03, 0.001])


class FactorizationTests(SimpleTestCase):

    def test_blockwise_norms_match_direct_application(self):
        spec = CodeSpec(1, 2)
        for error in iter_error_strings(spec.n_qubits, 2):
            for i in range(spec.logical_dim):
                direct = kraus_string(error, 0.2).apply(codeword(spec, i)).squared_norm
                self.assertAlmostEqual(alpha_factorized_norm(spec, error, i, 0.2), direct, places=14)

    def test_dual_rail_rejected(self):
        with self.assertRaises(ValueError):
            alpha_factorized_norm(CodeSpec(1, 1, dual_rail=True), '0' * 8, 0, 0.1)

    def test_gram_form(self):
        for bits in ('000', '101', '111'):
            self.assertLess(gram_form_residual(bits, 0.4), 1e-14)


class ConstantExcitationTests(SimpleTestCase):

    def test_dual_rail_codes_certify(self):
        for K in (1, 2):
            report = ce_certify(CodeSpec(1, K, dual_rail=True))
            self.assertTrue(report.passed, report.failures)
            self.assertEqual(set(report.excitations), {CodeSpec(1, K).n_qubits})
            assert_allclose(np.abs(report.phases), 1.0, atol=1e-12)

    def test_outer_code_fails(self):
        report = ce_certify(CodeSpec(1, 1), check_scaling=False)
        self.assertFalse(report.passed)
        self.assertIn('excitation number is not constant across the codewords', report.failures)
        self.assertIsNone(report.scaling)


class FidelityTests(SimpleTestCase):

    def test_reference_curve(self):
        self.assertEqual(reference_fidelity_411(0.0), 1.0)
        self.assertAlmostEqual(1 - reference_fidelity_411(1e-4), 5e-8, delta=1e-10)

    def test_test_states(self):
        self.assertEqual(set(logical_test_states(CodeSpec(1, 1))), {'0', '1', '+', '-', '+i', '-i'})
        states = logical_test_states(CodeSpec(1, 2), seed=3, haar_samples=5)
        self.assertEqual(len(states), 9)
        for psi in states.values():
            self.assertAlmostEqual(np.linalg.norm(psi), 1.0)
        again = logical_test_states(CodeSpec(1, 2), seed=3, haar_samples=5)
        assert_allclose(states['haar4'], again['haar4'])

    def test_fit_recovers_coefficients(self):
        gammas = [1e-2, 3e-3, 1e-3]
        fit = fit_infidelity(gammas, [5 * g ** 2 - 7 * g ** 3 for g in gammas])
        self.assertAlmostEqual(fit.coefficient, 5.0, places=8)
        self.assertAlmostEqual(fit.cubic, -7.0, places=5)
        self.assertTrue(fit.linear_ok)

    def test_411_coefficient(self):
        sweep = fidelity_sweep(CodeSpec(1, 1))
        self.assertTrue(sweep.fit.within(5.0))
        for point in sweep.points:
            self.assertGreaterEqual(point.fidelity, point.reference - 1e-12)
            self.assertGreater(point.fidelity, point.raw_fidelity)

    def test_dual_rail_coefficient(self):
        sweep = fidelity_sweep(CodeSpec(1, 1, dual_rail=True))
        self.assertTrue(sweep.fit.within(6.0))

    def test_sweep_records(self):
        sweep = fidelity_sweep(CodeSpec(1, 1), gammas=[0.01])
        self.assertIsNone(sweep.fit)
        metrics = [row[2] for row in sweep.records()]
        self.assertEqual(metrics, ['fidelity', 'raw_fidelity', 'reference_fidelity', 'truncation_bound'])

    def test_sweep_guards(self):
        with self.assertRaises(QubitLimitError):
            sweep_point(CodeSpec(3, 3), 0.01)
        with self.assertRaises(TruncationError):
            sweep_point(CodeSpec(1, 1), 0.1, cutoff=1)
        with self.assertRaises(ValueError):
            sweep_point(CodeSpec(1, 1), 0.1, rounds=0)

    def test_backend_agreement(self):
        agreement = backend_agreement(CodeSpec(1, 2))
        self.assertEqual(len(agreement.cases), 28)
        self.assertEqual(agreement.correct, 28)
        self.assertTrue(agreement.passed)


class ThresholdTests(SimpleTestCase):

    def test_crossing_matches_closed_form(self):
        for gamma in (0.01, 0.05, 0.1):
            report = threshold_rounds(gamma)
            self.assertLess(report.relative_gap, 0.05)
            self.assertAlmostEqual(threshold_gap(report.crossing, gamma), 0.0, places=10)

    def test_before_threshold_correction_helps(self):
        report = threshold_rounds(0.05)
        self.assertGreater(threshold_gap(report.crossing / 2, 0.05), 0.0)
        self.assertLess(threshold_gap(report.crossing * 2, 0.05), 0.0)

    def test_invalid_gamma(self):
        for gamma in (0.0, 1.0):
            with self.assertRaises(ValueError):
                threshold_rounds(gamma)


class RateTests(SimpleTestCase):

    def test_formulas(self):
        formulas = {f.name: f for f in rate_formulas()}
        self.assertEqual(len(formulas), 5)
        self.assertEqual(formulas['[[(w+1)(w+K),K]]'].value(1, 2), sp.Rational(1, 3))
        self.assertEqual(formulas['[[(w+1)(w+K),K]]'].limit(1), sp.Rational(1, 2))
        self.assertEqual(formulas['[[2(w+1)(w+K),K]] dual-rail'].limit(2), sp.Rational(1, 6))
        self.assertEqual(formulas['[[2(K+1),K]]'].rate.subs(K_SYM, 3), sp.Rational(3, 8))

    def test_rate_table(self):
        rows = rate_tables()
        self.assertEqual(len(rows), 18)
        self.assertEqual(sum(row.fewer_qubits for row in rows), 12)
        first = rows[0]
        self.assertEqual((first.N1, first.N2, first.rate), (4, 8, sp.Rational(1, 4)))
