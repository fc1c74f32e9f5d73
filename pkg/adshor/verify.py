"""
Numerical certification of the code family: Knill-Laflamme style overlap
matrices, residual scaling, constant-excitation immunity, fidelity sweeps,
threshold rounds and rate tables.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import sympy as sp
from django.conf import settings
from scipy import sparse
from scipy.optimize import brentq
from scipy.stats import unitary_group

from .codes import CodeSpec, codeword, codeword_support, codewords, excitation_number, parse_logical
from .decoder import build_recovery, logical_channel, run_circuit_recovery
from .exceptions import QubitLimitError, TruncationError
from .noise import (
    ErrorString,
    KrausString,
    ad_branches,
    cc_unitary,
    choose_cutoff,
    composite_cc_ad,
    global_phase_between,
    iter_error_strings,
    truncation_bound,
)
from .qla import apply_local, inner

logger = logging.getLogger(__name__)

EXACT_RESIDUAL = 1e-13
SLOPE_TOL = 0.15
SWEEP_MAX_QUBITS = 18
DENSE_CUTOFF_QUBITS = 12
LINEAR_TERM_RATIO = 1e-3


@dataclass(frozen=True, eq=False)
class OverlapReport:
    """
    M[i, j, k, l] = <i| A_k^dagger A_l |j> over every error string of
    weight <= w_max, with C[k, l] = M[0, 0, k, l].
    """

    spec: CodeSpec
    gamma: float
    errors: tuple
    M: np.ndarray
    C: np.ndarray
    residual: float
    step_zero_max: float
    off_diagonal_pairs: int
    diagonal_spread: float
    hermiticity: float

    def to_json(self):
        return {
            'spec': self.spec.label,
            'gamma': self.gamma,
            'errors': len(self.errors),
            'residual': self.residual,
            'step_zero_max': self.step_zero_max,
            'off_diagonal_pairs': self.off_diagonal_pairs,
            'diagonal_spread': self.diagonal_spread,
            'hermiticity': self.hermiticity,
        }


def _error_state_matrix(spec, gamma, errors):
    """Sparse rows A_k|i>, row index i * len(errors) + k."""
    rows, cols, data = [], [], []
    for i in range(spec.logical_dim):
        support, amplitude = codeword_support(spec, i)
        amps = np.full(support.shape, amplitude)
        for k, error in enumerate(errors):
            target, values = KrausString(error, gamma).apply_sparse(support, amps)
            rows.append(np.full(target.shape, i * len(errors) + k))
            cols.append(target)
            data.append(values)
    shape = (spec.logical_dim * len(errors), 1 << spec.n_qubits)
    return sparse.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=shape)


def overlap_matrix(spec: CodeSpec, gamma: float, w_max: Optional[int] = None) -> OverlapReport:
    w_max = spec.w if w_max is None else w_max
    if w_max > spec.w:
        raise ValueError(f"w_max={w_max} exceeds the correction weight of {spec}")
    errors = tuple(iter_error_strings(spec.n_qubits, w_max))
    E, D = len(errors), spec.logical_dim

    T = _error_state_matrix(spec, gamma, errors)
    G = (T.conj() @ T.T).toarray().reshape(D, E, D, E)
    M = G.transpose(0, 2, 1, 3)
    C = M[0, 0].copy()

    delta = np.eye(D)[:, :, None, None]
    residual = float(np.max(np.abs(M - delta * C[None, None])))
    structural = (1.0 - np.eye(D))[:, :, None, None] + (1.0 - np.eye(E))[None, None]
    step_zero_max = float(np.max(np.abs(M) * (structural > 0)))
    diagonal = np.einsum('iikk->ik', M).real
    spread = float(np.max(diagonal.max(axis=0) - diagonal.min(axis=0)))
    hermiticity = float(np.max(np.abs(M - M.conj().transpose(1, 0, 3, 2))))

    return OverlapReport(
        spec=spec,
        gamma=float(gamma),
        errors=errors,
        M=M,
        C=C,
        residual=residual,
        step_zero_max=step_zero_max,
        off_diagonal_pairs=E * (E - 1),
        diagonal_spread=spread,
        hermiticity=hermiticity,
    )


@dataclass(frozen=True, eq=False)
class ScalingFit:
    spec: CodeSpec
    gammas: tuple
    residuals: tuple
    slope: Optional[float]
    intercept: Optional[float]
    exact: bool

    @property
    def nominal(self):
        return self.spec.w + 1

    @property
    def expected(self):
        return expected_residual_order(self.spec)

    def passes(self, tol=SLOPE_TOL):
        return self.exact or abs(self.slope - self.expected) <= tol

    def to_json(self):
        return {
            'spec': self.spec.label,
            'gammas': list(self.gammas),
            'residuals': list(self.residuals),
            'slope': self.slope,
            'intercept': self.intercept,
            'expected': self.expected,
            'nominal': self.nominal,
            'exact': self.exact,
            'pass': self.passes(),
        }


def expected_residual_order(spec: CodeSpec) -> int:
    """
    Leading power of gamma in the overlap residual.

    w+1 for a single logical qubit. With K >= 2 the logical blocks of |i>
    carry |i|-dependent weight, so the no-damping diagonal already differs
    across codewords at gamma^2 (see leading_diagonal_gap).
    """
    return spec.w + 1 if spec.K == 1 else 2


def no_damping_series(spec: CodeSpec, i) -> list:
    """Exact coefficients of <i|A_0^dagger A_0|i> as a polynomial in gamma, lowest order first."""
    gamma = sp.Symbol('gamma')
    support, _ = codeword_support(spec, i)
    weights, counts = np.unique(np.bitwise_count(support), return_counts=True)
    norm = sp.Rational(1, len(support))
    expr = sp.expand(sum(norm * int(c) * (1 - gamma) ** int(wt) for wt, c in zip(weights, counts)))
    return sp.Poly(expr, gamma).all_coeffs()[::-1]


def leading_diagonal_gap(spec: CodeSpec):
    """
    First power of gamma at which <i|A_0^dagger A_0|i> depends on i, and
    the spread of that coefficient across codewords. (None, 0) when the
    diagonal is the same for every codeword.
    """
    series = [no_damping_series(spec, i) for i in range(spec.logical_dim)]
    length = max(len(s) for s in series)
    padded = [s + [sp.Integer(0)] * (length - len(s)) for s in series]
    for order in range(length):
        column = [s[order] for s in padded]
        if len(set(column)) > 1:
            return order, max(column) - min(column)
    return None, sp.Integer(0)


def residual_scaling(spec: CodeSpec, gamma_grid=None) -> ScalingFit:
    """Least-squares slope of log residual against log gamma."""
    gammas = tuple(float(g) for g in (settings.ADSHOR_GAMMA_GRID if gamma_grid is None else gamma_grid))
    if len(gammas) < 4:
        raise ValueError(f"Residual scaling needs at least 4 points, got {len(gammas)}")
    if any(b >= a for a, b in zip(gammas, gammas[1:])):
        raise ValueError(f"The gamma grid must be strictly decreasing, got {gammas}")

    residuals = tuple(overlap_matrix(spec, g).residual for g in gammas)
    if all(r < EXACT_RESIDUAL for r in residuals):
        logger.info(f"{spec.label}: residual below {EXACT_RESIDUAL} on the whole grid, exact within precision")
        return ScalingFit(spec, gammas, residuals, None, None, True)

    usable = [(g, r) for g, r in zip(gammas, residuals) if r >= EXACT_RESIDUAL]
    if len(usable) < 2:
        logger.warning(f"{spec.label}: only {len(usable)} residuals above precision, fit is degenerate")
        return ScalingFit(spec, gammas, residuals, None, None, True)
    log_g, log_r = np.log([u[0] for u in usable]), np.log([u[1] for u in usable])
    slope, intercept = np.polyfit(log_g, log_r, 1)
    fit = ScalingFit(spec, gammas, residuals, float(slope), float(intercept), False)
    if not fit.passes():
        logger.warning(f"{spec.label}: residual slope {slope:.3f}, expected {fit.expected}")
    return fit


def alpha_factor(block_value, error_bits, gamma):
    """Blockwise <block|A_k^dagger A_k|block> for a constant block."""
    factor = 1.0
    for bit in error_bits:
        if block_value == 0:
            factor *= 0.0 if bit == '1' else 1.0
        else:
            factor *= gamma if bit == '1' else 1.0 - gamma
    return factor


def alpha_factorized_norm(spec: CodeSpec, error, i, gamma):
    """
    <i|A_k^dagger A_k|i> as 2^-w times the sum over parity strings of the
    product of per-block factors. Outer codes only.
    """
    if spec.dual_rail:
        raise ValueError("The blockwise factorization is defined for outer codes")
    error = ErrorString(error) if isinstance(error, str) else error
    bits = parse_logical(spec, i)
    complement = ''.join('1' if b == '0' else '0' for b in bits)
    size = spec.block_size
    blocks = [error.bits[size * b:size * (b + 1)] for b in range(spec.n_blocks)]
    total = 0.0
    for parity in itertools.product((0, 1), repeat=spec.w):
        tail = bits if sum(parity) % 2 == 0 else complement
        values = list(parity) + [int(b) for b in tail]
        total += math.prod(alpha_factor(v, blocks[b], gamma) for b, v in enumerate(values))
    return total / 2 ** spec.w


def gram_form_residual(error, gamma):
    """Largest gap between A^dagger A from dense factors and from the tensor form."""
    kraus = KrausString(ErrorString(error) if isinstance(error, str) else error, gamma)
    dense = kraus.dense()
    return float(np.max(np.abs(dense.conj().T @ dense - np.diag(kraus.gram_diagonal()))))


@dataclass(frozen=True, eq=False)
class CEReport:
    spec: CodeSpec
    passed: bool
    excitations: tuple
    gdt_grid: tuple
    phases: tuple
    overlap_defect: float
    phase_spread: float
    branch_phase_defect: float
    scaling: Optional[ScalingFit]
    failures: tuple = field(default_factory=tuple)

    def to_json(self):
        return {
            'spec': self.spec.label,
            'pass': self.passed,
            'excitations': list(self.excitations),
            'gdt_grid': list(self.gdt_grid),
            'phases': [[p.real, p.imag] for p in self.phases],
            'overlap_defect': self.overlap_defect,
            'phase_spread': self.phase_spread,
            'branch_phase_defect': self.branch_phase_defect,
            'scaling': self.scaling.to_json() if self.scaling else None,
            'failures': list(self.failures),
        }


def ce_certify(spec: CodeSpec, gdt_grid=None, g=None, gamma_grid=None, tol=1e-10, check_scaling=True) -> CEReport:
    """
    Every codeword must have constant excitation and pick up one common
    phase under the collective rotation; the damping branches with and
    without the rotation must agree up to that phase.
    """
    g = settings.ADSHOR_DEFAULT_G if g is None else float(g)
    grid = tuple(float(v) for v in (settings.ADSHOR_CC_GDT_GRID if gdt_grid is None else gdt_grid))
    words = codewords(spec)
    failures = []

    excitations = tuple(excitation_number(c) for c in words)
    if any(e is None for e in excitations) or len(set(excitations)) != 1:
        failures.append('excitation number is not constant across the codewords')

    phases, defect, spread = [], 0.0, 0.0
    for value in grid:
        dt = value / abs(g) if g else 0.0
        U = cc_unitary(spec.n_qubits, g, dt)
        overlaps = [inner(c, apply_local(c, U)) for c in words]
        defect = max(defect, max(abs(abs(o) - 1.0) for o in overlaps))
        spread = max(spread, max(abs(o - overlaps[0]) for o in overlaps))
        phases.append(overlaps[0])
    if defect > tol:
        failures.append(f'codewords are not rotation eigenstates (defect {defect:.3e})')
    if spread > tol:
        failures.append(f'eigenphases differ across codewords (spread {spread:.3e})')

    branch_defect = 0.0
    if not failures:
        sample_gamma = 0.05
        plain = ad_branches(words[0], sample_gamma).by_label()
        for value in grid:
            rotated = composite_cc_ad(words[0], sample_gamma, g, value / abs(g)).by_label()
            if set(rotated) != set(plain):
                branch_defect = math.inf
                break
            shared = None
            for label, branch in rotated.items():
                phase = global_phase_between(plain[label].state, branch.state, tol)
                if phase is None or (shared is not None and abs(phase - shared) > tol):
                    branch_defect = math.inf
                    break
                shared = phase if shared is None else shared
        if branch_defect > tol:
            failures.append('rotated damping branches differ from the plain ones beyond a global phase')

    scaling = residual_scaling(spec, gamma_grid) if check_scaling and not failures else None
    if scaling is not None and not scaling.passes():
        failures.append(f'residual slope {scaling.slope:.3f} below {scaling.expected}')

    report = CEReport(
        spec=spec,
        passed=not failures,
        excitations=excitations,
        gdt_grid=grid,
        phases=tuple(phases),
        overlap_defect=defect,
        phase_spread=spread,
        branch_phase_defect=branch_defect,
        scaling=scaling,
        failures=tuple(failures),
    )
    logger.info(f"CE certification of {spec.label}: {'pass' if report.passed else 'fail'}")
    return report


def bloch_states():
    s = 1.0 / np.sqrt(2.0)
    return {
        '0': np.array([1, 0], dtype=np.complex128),
        '1': np.array([0, 1], dtype=np.complex128),
        '+': np.array([s, s], dtype=np.complex128),
        '-': np.array([s, -s], dtype=np.complex128),
        '+i': np.array([s, 1j * s], dtype=np.complex128),
        '-i': np.array([s, -1j * s], dtype=np.complex128),
    }


def logical_test_states(spec: CodeSpec, seed=None, haar_samples=None):
    """Logical basis states plus Bloch (K=1) or seeded Haar (K>=2) samples."""
    if spec.K == 1:
        return bloch_states()
    dim = spec.logical_dim
    states = {label: np.eye(dim, dtype=np.complex128)[i] for i, label in enumerate(spec.logical_labels())}
    seed = settings.ADSHOR_DEFAULT_SEED if seed is None else seed
    samples = settings.ADSHOR_HAAR_SAMPLES if haar_samples is None else haar_samples
    rng = np.random.default_rng(seed)
    for n in range(samples):
        states[f'haar{n}'] = unitary_group.rvs(dim, random_state=rng)[:, 0]
    return states


def reference_fidelity_411(gamma):
    """Worst-case [[4,1]] fidelity with every weight-2 damping counted as lost."""
    return (1.0 - gamma) ** 2 + 4.0 * (gamma * (1.0 - gamma) ** 3 / 2.0)


@dataclass(frozen=True)
class FidelityPoint:
    gamma: float
    fidelity: float
    worst_state: str
    raw_fidelity: float
    reference: Optional[float]
    truncation_bound: float
    lost: float


@dataclass(frozen=True)
class InfidelityFit:
    coefficient: float
    cubic: float
    linear: float

    @property
    def linear_ok(self):
        return abs(self.linear) <= LINEAR_TERM_RATIO * abs(self.coefficient)

    def within(self, expected, rel=0.1):
        return abs(self.coefficient - expected) <= rel * expected


def fit_infidelity(gammas, infidelities) -> InfidelityFit:
    """Leading coefficient with the linear term held at 0, and the linear term of a free fit."""
    g = np.asarray(gammas, dtype=np.float64)
    y = np.asarray(infidelities, dtype=np.float64)
    (quadratic, cubic), *_ = np.linalg.lstsq(np.column_stack([g ** 2, g ** 3]), y, rcond=None)
    (linear, _, _), *_ = np.linalg.lstsq(np.column_stack([g, g ** 2, g ** 3]), y, rcond=None)
    return InfidelityFit(float(quadratic), float(cubic), float(linear))


@dataclass(frozen=True, eq=False)
class FidelitySweep:
    spec: CodeSpec
    backend: str
    variant: str
    rounds: int
    points: tuple
    fit: Optional[InfidelityFit]

    def records(self, tolerance=None):
        """Flat rows in the sweep CSV schema."""
        rows = []
        for point in self.points:
            rows.append((self.spec.label, point.gamma, 'fidelity', point.fidelity, tolerance, None))
            rows.append((self.spec.label, point.gamma, 'raw_fidelity', point.raw_fidelity, None, None))
            if point.reference is not None:
                rows.append((self.spec.label, point.gamma, 'reference_fidelity', point.reference, None, None))
            rows.append((self.spec.label, point.gamma, 'truncation_bound', point.truncation_bound,
                         settings.ADSHOR_TRUNCATION_TOL, point.truncation_bound * self.rounds <= settings.ADSHOR_TRUNCATION_TOL))
        return rows


def sweep_point(spec: CodeSpec, gamma, backend='projector', rounds=1, variant='balanced', cutoff=None,
                g=None, dt=None, seed=None, haar_samples=None, tol=None) -> FidelityPoint:
    """Worst-case fidelity over the test states at one damping rate."""
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    n = spec.n_qubits
    if n > SWEEP_MAX_QUBITS:
        raise QubitLimitError(f"Fidelity sweeps stop at {SWEEP_MAX_QUBITS} qubits, {spec} has {n}")
    tol = settings.ADSHOR_TRUNCATION_TOL if tol is None else tol
    if cutoff is None:
        cutoff = n if n <= DENSE_CUTOFF_QUBITS else choose_cutoff(n, gamma, tol / rounds)
    bound = truncation_bound(n, gamma, cutoff)
    if bound * rounds > tol:
        raise TruncationError(f"Cutoff {cutoff} leaves {bound * rounds:.3e} over {rounds} rounds (tolerance {tol:.1e})")

    channel = logical_channel(spec, gamma, backend, variant, cutoff, g, dt)
    worst_label, worst = None, math.inf
    for label, psi in logical_test_states(spec, seed, haar_samples).items():
        value = channel.fidelity(psi, rounds)
        if value < worst:
            worst_label, worst = label, value
    reference = None
    if spec == CodeSpec(1, 1) and rounds == 1:
        reference = reference_fidelity_411(gamma)
    return FidelityPoint(
        gamma=float(gamma),
        fidelity=worst,
        worst_state=worst_label,
        raw_fidelity=(1.0 - gamma) ** rounds,
        reference=reference,
        truncation_bound=bound,
        lost=channel.lost,
    )


def fidelity_sweep(spec: CodeSpec, gammas=None, backend='projector', rounds=1, variant='balanced',
                   cutoff=None, g=None, dt=None, seed=None, haar_samples=None, tol=None) -> FidelitySweep:
    """
    Encode, damp, recover and decode for ``rounds`` rounds at every gamma.

    The leading infidelity coefficient is fitted when every gamma is
    positive and there are at least three points.
    """
    gammas = tuple(float(g) for g in (settings.ADSHOR_FIT_GAMMA_GRID if gammas is None else gammas))
    if not gammas:
        raise ValueError("The gamma grid is empty")
    logger.info(f"Fidelity sweep of {spec.label}: backend={backend}, variant={variant}, rounds={rounds}, {len(gammas)} points")
    points = tuple(
        sweep_point(spec, gamma, backend, rounds, variant, cutoff, g, dt, seed, haar_samples, tol)
        for gamma in gammas
    )
    return finish_sweep(spec, backend, variant, rounds, points)


def finish_sweep(spec, backend, variant, rounds, points) -> FidelitySweep:
    fit = None
    positive = [p for p in points if p.gamma > 0.0]
    if len(positive) >= 3:
        fit = fit_infidelity([p.gamma for p in positive], [1.0 - p.fidelity for p in positive])
        logger.info(f"{spec.label}: infidelity coefficient {fit.coefficient:.4f}, linear term {fit.linear:.3e}")
        if not fit.linear_ok:
            logger.warning(f"{spec.label}: linear infidelity term {fit.linear:.3e} is not negligible")
    return FidelitySweep(spec, backend, variant, rounds, tuple(points), fit)


@dataclass(frozen=True)
class AgreementCase:
    i: str
    error: str
    syndrome: str
    circuit_index: str
    projector_index: str
    differences: tuple


@dataclass(frozen=True, eq=False)
class BackendAgreement:
    gammas: tuple
    cases: tuple
    coefficient: float

    @property
    def correct(self):
        return sum(1 for c in self.cases if c.circuit_index == c.i and c.projector_index == c.i)

    @property
    def scales_quadratically(self):
        """Differences divided by gamma^2 must not grow as gamma shrinks."""
        largest, smallest = np.argmax(self.gammas), np.argmin(self.gammas)
        for case in self.cases:
            ratios = [d / g ** 2 for d, g in zip(case.differences, self.gammas)]
            if ratios[smallest] > 1.5 * ratios[largest] + 1e-6:
                return False
        return True

    @property
    def passed(self):
        return self.correct == len(self.cases) and self.scales_quadratically


def backend_agreement(spec=None, gammas=None) -> BackendAgreement:
    """
    Compare the circuit and balanced projector backends on every codeword
    and every damping pattern of weight <= w.
    """
    spec = CodeSpec(1, 2) if spec is None else spec
    gammas = tuple(float(g) for g in (settings.ADSHOR_FIT_GAMMA_GRID if gammas is None else gammas))
    labels = spec.logical_labels()
    cases = []
    for i, error in itertools.product(range(spec.logical_dim), iter_error_strings(spec.n_qubits, spec.w)):
        differences = []
        circuit_index = projector_index = syndrome = None
        for gamma in gammas:
            damped = KrausString(error, gamma).apply(codeword(spec, i))
            results = run_circuit_recovery(spec, damped, gamma)
            result = results[0]
            syndrome = result.syndrome
            circuit_population = sum(abs(path.logical[i]) ** 2 for path in result.paths)
            outputs = build_recovery(spec, gamma, 'balanced').apply_logical(damped)
            projector_population = float(np.sum(np.abs(outputs[:, i]) ** 2))
            differences.append(abs(circuit_population - projector_population))
            circuit_index = labels[result.recovered_index]
            projector_index = labels[int(np.argmax(np.sum(np.abs(outputs) ** 2, axis=0)))]
        cases.append(AgreementCase(labels[i], error.bits, syndrome, circuit_index, projector_index, tuple(differences)))

    g2 = np.array(gammas) ** 2
    coefficient = max(float(np.max(np.array(c.differences) / g2)) for c in cases)
    agreement = BackendAgreement(gammas, tuple(cases), coefficient)
    logger.info(f"Backend agreement on {spec.label}: {agreement.correct}/{len(cases)} correct, c={coefficient:.3f}")
    return agreement


@dataclass(frozen=True)
class ThresholdReport:
    gamma: float
    closed_form: float
    crossing: float

    @property
    def relative_gap(self):
        return abs(self.crossing - self.closed_form) / self.closed_form

    def __float__(self):
        return self.closed_form


def threshold_gap(T, gamma):
    """Corrected minus uncorrected worst-case [[4,1]] fidelity after T rounds."""
    u = (1.0 - gamma) ** T
    return u ** 2 + 4.0 * ((1.0 - u) * u ** 3 / 2.0) - u


def threshold_rounds(gamma) -> ThresholdReport:
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma!r}")
    rate = -math.log1p(-gamma)
    closed_form = math.log(2.0) / (2.0 * rate)
    crossing = brentq(threshold_gap, 0.01 / rate, 10.0 / rate, args=(gamma,), xtol=1e-14, rtol=1e-12)
    return ThresholdReport(gamma, closed_form, float(crossing))


K_SYM, W_SYM = sp.symbols('K w', positive=True, integer=True)


@dataclass(frozen=True)
class RateFormula:
    name: str
    correction_weight: object
    rate: sp.Expr

    def value(self, w=1, K=1):
        return self.rate.subs({W_SYM: w, K_SYM: K})

    def limit(self, w=1):
        return sp.limit(self.rate.subs(W_SYM, w), K_SYM, sp.oo)


def rate_formulas():
    return [
        RateFormula('[[4,1]]', 1, sp.Rational(1, 4)),
        RateFormula('[[2(K+1),K]]', 1, sp.Rational(1, 2) * K_SYM / (K_SYM + 1)),
        RateFormula('[[(w+1)^2,1]]', W_SYM, 1 / (W_SYM + 1) ** 2),
        RateFormula('[[(w+1)(w+K),K]]', W_SYM, 1 / (W_SYM + 1) * K_SYM / (K_SYM + W_SYM)),
        RateFormula('[[2(w+1)(w+K),K]] dual-rail', W_SYM, 1 / (2 * (W_SYM + 1)) * K_SYM / (K_SYM + W_SYM)),
    ]


# Reference qubit counts N2 of the outer-stabilizer construction, by (w, K).
REFERENCE_N2 = {
    (1, 1): 8, (1, 2): 8, (1, 3): 12, (1, 4): 12, (1, 5): 16, (1, 6): 16,
    (2, 1): 10, (2, 2): 16, (2, 3): 16, (2, 4): 20, (2, 5): 22, (2, 6): 24,
    (3, 1): 20, (3, 2): 20, (3, 3): 24, (3, 4): 24, (3, 5): 28, (3, 6): 28,
}


@dataclass(frozen=True)
class RateRow:
    name: str
    w: int
    K: int
    rate: sp.Rational
    N1: int
    N2: int

    @property
    def fewer_qubits(self):
        return self.N1 < self.N2

    @property
    def n1_le_n2(self):
        return self.N1 <= self.N2

    def to_json(self):
        return {
            'name': self.name,
            'w': self.w,
            'K': self.K,
            'rate': str(self.rate),
            'rate_value': float(self.rate),
            'N1': self.N1,
            'N2': self.N2,
            'fewer_qubits': self.fewer_qubits,
            'n1_le_n2': self.n1_le_n2,
        }


def rate_tables():
    rows = []
    for (w, K), n2 in REFERENCE_N2.items():
        spec = CodeSpec(w, K)
        rows.append(RateRow(spec.label, w, K, sp.Rational(K, spec.n_qubits), spec.n_qubits, n2))
    return rows
