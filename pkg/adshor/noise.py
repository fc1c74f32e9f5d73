"""
Noise models: amplitude damping, collective-coherent rotation and the
stochastic-Pauli approximation of amplitude damping.

Multi-qubit damping is never built as a dense matrix. A Kraus string
``A_a`` acts on basis index ``b`` only when every damped position of ``a``
holds a 1; the result is ``b`` with those bits cleared, scaled by
``sqrt(gamma)^wt(a) * sqrt(1-gamma)^(surviving ones)``.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterator, Optional

import numpy as np
import sympy as sp
from django.conf import settings
from scipy.stats import binom

from .exceptions import DimensionError, NormalizationError, QubitLimitError, TruncationError
from .qla import (
    I2,
    NORMALIZATION_TOL,
    X,
    Y,
    Z,
    Branch,
    BranchEnsemble,
    LocalOperator,
    StateVector,
    apply_local,
)

logger = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-12


def _check_rate(value, name='gamma'):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Kraus operators sharing the same target qubits."""

    ops: tuple
    label: str = ''

    def __post_init__(self):
        ops = tuple(self.ops)
        if not ops:
            raise DimensionError("A Kraus set needs at least one operator")
        targets = ops[0].targets
        if any(op.targets != targets for op in ops):
            raise DimensionError("Kraus operators must share their targets")
        object.__setattr__(self, 'ops', ops)

    @classmethod
    def from_matrices(cls, matrices, label='', targets=(0,)):
        return cls(tuple(LocalOperator(targets=targets, matrix=m, label=f'{label}{k}')
                         for k, m in enumerate(matrices)), label)

    @property
    def targets(self):
        return self.ops[0].targets

    @property
    def matrices(self):
        return [op.dense() for op in self.ops]

    def on(self, *targets):
        """The same operators retargeted onto ``targets``."""
        return KrausSet.from_matrices(self.matrices, self.label, targets)

    def completeness_defect(self):
        total = sum(m.conj().T @ m for m in self.matrices)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def is_complete(self, tol=COMPLETENESS_TOL):
        return self.completeness_defect() <= tol

    def apply_to_density(self, rho):
        stack = np.stack(self.matrices)
        rho = np.asarray(rho, dtype=np.complex128)
        if rho.shape != stack.shape[1:]:
            raise DimensionError(f"Density matrix of shape {rho.shape} does not fit {self.label}")
        return np.einsum('kab,bc,kdc->ad', stack, rho, stack.conj())

    def apply(self, state: StateVector) -> BranchEnsemble:
        """One raw branch per operator, labelled by its position."""
        total = state.squared_norm
        branches = []
        for k, op in enumerate(self.ops):
            branch = apply_local(state, op)
            if branch.squared_norm > 0.0:
                branches.append(Branch(branch, branch.squared_norm / total, str(k)))
        return BranchEnsemble(tuple(branches))

    def __len__(self):
        return len(self.ops)


def ad_matrices(gamma):
    gamma = _check_rate(gamma)
    a0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=np.complex128)
    a1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return a0, a1


def ad_kraus(gamma) -> KrausSet:
    """A0 = |0><0| + sqrt(1-g)|1><1|, A1 = sqrt(g)|0><1|."""
    return KrausSet.from_matrices(ad_matrices(gamma), 'A')


def artificial_ad_kraus(gamma_prime) -> KrausSet:
    """
    Damping applied on purpose through a controlled-Y rotation and an ancilla.

    A'0 is the ancilla-0 branch; A'1 is the ancilla-1 branch after the
    conditional X correction.
    """
    return KrausSet.from_matrices(ad_matrices(_check_rate(gamma_prime, 'gamma_prime')), "A'")


def pauli_probabilities(gamma):
    gamma = float(gamma)
    if gamma < 0.0:
        raise ValueError(f"gamma must be non-negative, got {gamma!r}")
    p0 = 1.0 - gamma / 2.0 - gamma ** 2 / 16.0
    if p0 < 0.0:
        raise ValueError(f"gamma={gamma!r} gives a negative identity weight p0={p0!r}")
    return p0, gamma / 4.0, gamma / 4.0, gamma ** 2 / 16.0


def pauli_approx(gamma) -> KrausSet:
    probabilities = pauli_probabilities(gamma)
    matrices = [np.sqrt(p) * m for p, m in zip(probabilities, (I2, X, Y, Z))]
    return KrausSet.from_matrices(matrices, 'P')


def validate_density(rho, tol=NORMALIZATION_TOL):
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (2, 2):
        raise DimensionError(f"Expected a single-qubit density matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise NormalizationError("Density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise NormalizationError(f"Density matrix has trace {np.trace(rho).real!r}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise NormalizationError("Density matrix is not positive semidefinite")
    return rho


def channel_delta(rho, gamma):
    """True amplitude-damping output minus the Pauli-approximated output."""
    rho = validate_density(rho)
    return ad_kraus(gamma).apply_to_density(rho) - pauli_approx(gamma).apply_to_density(rho)


def delta_expansion():
    """
    Closed-form element-wise outputs of both channels.

    Returns ``(gamma, rho_symbols, ad_output, pauli_output)`` as sympy
    objects; ``rho_symbols`` is the 2x2 matrix of input entries.
    """
    gamma = sp.Symbol('gamma', nonnegative=True)
    r = sp.Matrix(2, 2, sp.symbols('rho00 rho01 rho10 rho11'))
    decay = sp.sqrt(1 - gamma)
    ad_output = sp.Matrix([
        [r[0, 0] + gamma * r[1, 1], decay * r[0, 1]],
        [decay * r[1, 0], (1 - gamma) * r[1, 1]],
    ])
    coherence = 1 - gamma / 2 - gamma ** 2 / 8
    pauli_output = sp.Matrix([
        [(1 - gamma / 2) * r[0, 0] + gamma / 2 * r[1, 1], coherence * r[0, 1]],
        [coherence * r[1, 0], (1 - gamma / 2) * r[1, 1] + gamma / 2 * r[0, 0]],
    ])
    return gamma, r, ad_output, pauli_output


@dataclass(frozen=True)
class ErrorString:
    """Damping pattern over n qubits; bit q is 1 when qubit q decays."""

    bits: str

    def __post_init__(self):
        if not self.bits or set(self.bits) - set('01'):
            raise ValueError(f"Invalid error string {self.bits!r}")

    @classmethod
    def from_mask(cls, mask, n_qubits):
        return cls(format(mask, f'0{n_qubits}b'))

    @classmethod
    def from_positions(cls, positions, n_qubits):
        mask = 0
        for q in positions:
            if not 0 <= q < n_qubits:
                raise DimensionError(f"Qubit {q} is outside a {n_qubits}-qubit register")
            mask |= 1 << (n_qubits - 1 - q)
        return cls.from_mask(mask, n_qubits)

    @property
    def n_qubits(self):
        return len(self.bits)

    @property
    def mask(self):
        return int(self.bits, 2)

    @property
    def weight(self):
        return self.bits.count('1')

    @property
    def positions(self):
        return tuple(q for q, bit in enumerate(self.bits) if bit == '1')

    def __str__(self):
        return self.bits


def iter_error_strings(n_qubits, max_weight=None) -> Iterator[ErrorString]:
    """Error strings by weight, then by ascending integer value."""
    max_weight = n_qubits if max_weight is None else min(max_weight, n_qubits)
    for weight in range(max_weight + 1):
        masks = sorted(
            sum(1 << (n_qubits - 1 - q) for q in positions)
            for positions in itertools.combinations(range(n_qubits), weight)
        )
        for mask in masks:
            yield ErrorString.from_mask(mask, n_qubits)


@dataclass(frozen=True, eq=False)
class KrausString:
    """The product operator A_a0 x A_a1 x ... at damping rate ``gamma``."""

    error: ErrorString
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, 'gamma', _check_rate(self.gamma))

    @property
    def n_qubits(self):
        return self.error.n_qubits

    @cached_property
    def _rewrite(self):
        n = self.n_qubits
        mask = self.error.mask
        index = np.arange(1 << n)
        valid = (index & mask) == mask
        survivors = np.bitwise_count(index & ~mask & ((1 << n) - 1))
        coefficient = (np.sqrt(self.gamma) ** self.error.weight
                       * np.sqrt(1.0 - self.gamma) ** survivors.astype(np.float64))
        return valid, index & ~mask, coefficient

    def apply_sparse(self, indices, amps):
        """Act on a state given by its support; returns the damped support."""
        mask = self.error.mask
        indices = np.asarray(indices, dtype=np.int64)
        valid = (indices & mask) == mask
        target = indices[valid] & ~mask
        coefficient = (np.sqrt(self.gamma) ** self.error.weight
                       * np.sqrt(1.0 - self.gamma) ** np.bitwise_count(target).astype(np.float64))
        return target, np.asarray(amps)[valid] * coefficient

    def apply(self, state: StateVector) -> StateVector:
        if state.n_qubits != self.n_qubits:
            raise DimensionError(f"Error string {self.error} needs {self.n_qubits} qubits, state has {state.n_qubits}")
        valid, target, coefficient = self._rewrite
        out = np.zeros(state.dim, dtype=np.complex128)
        out[target[valid]] = state.amps[valid] * coefficient[valid]
        return StateVector(state.n_qubits, out)

    def factors(self):
        a0, a1 = ad_matrices(self.gamma)
        return [
            LocalOperator(targets=(q,), matrix=a1 if bit == '1' else a0, label=f'A{bit}')
            for q, bit in enumerate(self.error.bits)
        ]

    def gram_diagonal(self):
        """
        Diagonal of A_a^dagger A_a from the per-qubit tensor form
        I/2 + (-1)^a_j (I/2 - gamma|1><1|).
        """
        half = np.eye(2) / 2.0
        excited = np.diag([0.0, self.gamma])
        factors = [np.diag(half + (-1) ** int(bit) * (half - excited)) for bit in self.error.bits]
        return reduce(np.kron, factors)

    def dense(self, max_qubits=None):
        limit = settings.ADSHOR_DENSE_MAX_QUBITS if max_qubits is None else max_qubits
        if self.n_qubits > limit:
            raise QubitLimitError(f"Refusing a dense {self.n_qubits}-qubit Kraus string (limit {limit})")
        return reduce(np.kron, [op.matrix for op in self.factors()])

    def __str__(self):
        return f"A_{self.error}"


def kraus_string(error, gamma) -> KrausString:
    if isinstance(error, str):
        error = ErrorString(error)
    return KrausString(error, gamma)


def cc_unitary(n_qubits, g=None, dt=1.0) -> LocalOperator:
    """Diagonal exp(-i g dt Z) on every qubit: entry b is exp(-i g dt (n - 2 wt(b)))."""
    g = settings.ADSHOR_DEFAULT_G if g is None else float(g)
    if g > 0.0:
        raise ValueError(f"The coupling g must be non-positive, got {g!r}")
    if dt < 0.0:
        raise ValueError(f"The circuit time must be non-negative, got {dt!r}")
    weights = np.bitwise_count(np.arange(1 << n_qubits)).astype(np.float64)
    diagonal = np.exp(-1j * g * dt * (n_qubits - 2.0 * weights))
    return LocalOperator.from_diagonal(diagonal, range(n_qubits), label=f'U_CC(g={g}, dt={dt})')


def truncation_bound(n_qubits, gamma, cutoff):
    """Probability mass of damping patterns heavier than ``cutoff``."""
    if cutoff >= n_qubits:
        return 0.0
    return float(binom.sf(cutoff, n_qubits, _check_rate(gamma)))


def choose_cutoff(n_qubits, gamma, tol=None):
    """Smallest weight cutoff whose truncated mass is at most ``tol``."""
    tol = settings.ADSHOR_TRUNCATION_TOL if tol is None else tol
    for cutoff in range(n_qubits + 1):
        if truncation_bound(n_qubits, gamma, cutoff) <= tol:
            return cutoff
    return n_qubits


def ad_branches(state: StateVector, gamma, cutoff=None, tol=None) -> BranchEnsemble:
    """
    Every nonzero damping branch of ``state`` up to weight ``cutoff``.

    Branches keep their raw amplitudes and are labelled by the error string.
    """
    if not state.is_normalized():
        raise NormalizationError(f"Channel input must be normalized, squared norm is {state.squared_norm!r}")
    n = state.n_qubits
    cutoff = n if cutoff is None else cutoff
    if not 0 <= cutoff <= n:
        raise ValueError(f"Cutoff must lie in [0, {n}], got {cutoff}")
    bound = truncation_bound(n, gamma, cutoff)
    tol = settings.ADSHOR_TRUNCATION_TOL if tol is None else tol
    if bound > tol:
        raise TruncationError(f"Cutoff {cutoff} leaves {bound:.3e} of the damping mass on {n} qubits (tolerance {tol:.1e})")

    branches = []
    for error in iter_error_strings(n, cutoff):
        branch = KrausString(error, gamma).apply(state)
        if branch.squared_norm > 0.0:
            branches.append(Branch(branch, branch.squared_norm, error.bits))
    logger.debug(f"{len(branches)} damping branches on {n} qubits at gamma={gamma}, cutoff={cutoff}")
    return BranchEnsemble(tuple(branches), gamma=float(gamma), source=state, truncation_bound=bound)


def composite_cc_ad(state: StateVector, gamma, g=None, dt=1.0, cutoff=None, tol=None) -> BranchEnsemble:
    """Collective rotation followed by independent damping on every qubit."""
    rotated = apply_local(state, cc_unitary(state.n_qubits, g, dt))
    ensemble = ad_branches(rotated, gamma, cutoff, tol)
    return BranchEnsemble(ensemble.branches, gamma=ensemble.gamma, source=state,
                          truncation_bound=ensemble.truncation_bound)


def branch_records(ensemble: BranchEnsemble, amplitudes=False, tol=1e-14):
    """JSON-lines friendly rows for an ensemble."""
    for branch in ensemble:
        row = {
            'a': branch.label,
            'weight': branch.weight,
            'squared_norm': branch.state.squared_norm,
        }
        if amplitudes:
            row['amplitudes'] = [[i, amp.real, amp.imag] for i, amp in branch.state.support(tol)]
        yield row


def global_phase_between(a: StateVector, b: StateVector, tol=1e-10) -> Optional[complex]:
    """Unit phase p with b = p a, or None when the states are not phase-equivalent."""
    overlap = np.vdot(a.amps, b.amps)
    if abs(overlap) <= tol:
        return None
    phase = overlap / abs(overlap)
    if np.max(np.abs(b.amps - phase * a.amps)) > tol:
        return None
    return complex(phase)
