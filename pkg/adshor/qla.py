"""
Dense state-vector kernels for multi-qubit registers.

Qubit 0 is the leftmost ket factor and the most significant bit of the
amplitude index. Every operation returns a new object; nothing here is
mutated after construction.
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np

from .exceptions import DimensionError, NormalizationError, ZeroProbabilityBranch

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12
PARALLEL_TOL = 1e-12

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
CNOT = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
], dtype=np.complex128)


def _frozen(values):
    array = np.array(values, dtype=np.complex128)
    array.setflags(write=False)
    return array


def bit_of(index, qubit, n_qubits):
    """Value of ``qubit`` in basis index ``index`` of an n-qubit register."""
    return (index >> (n_qubits - 1 - qubit)) & 1


def bitstring(index, n_qubits):
    return format(index, f'0{n_qubits}b')


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Amplitudes of an n-qubit register.

    Error branches are kept un-renormalized: ``squared_norm`` is the branch
    weight and the raw coefficients stay readable.
    """

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError(f"A register needs at least one qubit, got {self.n_qubits}")
        amps = _frozen(np.asarray(self.amps).reshape(-1))
        if amps.shape[0] != 1 << self.n_qubits:
            raise DimensionError(
                f"{self.n_qubits} qubits need {1 << self.n_qubits} amplitudes, got {amps.shape[0]}"
            )
        object.__setattr__(self, 'amps', amps)

    @classmethod
    def basis(cls, n_qubits, index):
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_bits(cls, bits):
        return cls.basis(len(bits), int(bits, 2))

    @classmethod
    def from_kets(cls, kets):
        """Build a state from a ``{'0101': amplitude}`` mapping."""
        n_qubits = len(next(iter(kets)))
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        for bits, amplitude in kets.items():
            if len(bits) != n_qubits:
                raise DimensionError(f"Ket {bits!r} does not have {n_qubits} qubits")
            amps[int(bits, 2)] += amplitude
        return cls(n_qubits, amps)

    @property
    def dim(self):
        return self.amps.shape[0]

    @cached_property
    def squared_norm(self):
        return float(np.vdot(self.amps, self.amps).real)

    def is_normalized(self, tol=NORMALIZATION_TOL):
        return abs(np.sqrt(self.squared_norm) - 1.0) <= tol

    def normalized(self):
        if self.squared_norm <= 0.0:
            raise NormalizationError("Cannot normalize a zero state")
        return self.scaled(1.0 / np.sqrt(self.squared_norm))

    def scaled(self, factor):
        return StateVector(self.n_qubits, self.amps * factor)

    def __add__(self, other):
        _check_same_register(self, other)
        return StateVector(self.n_qubits, self.amps + other.amps)

    def __sub__(self, other):
        _check_same_register(self, other)
        return StateVector(self.n_qubits, self.amps - other.amps)

    def support(self, tol=0.0):
        """Indices and amplitudes of the entries with magnitude above ``tol``."""
        indices = np.flatnonzero(np.abs(self.amps) > tol)
        return [(int(i), complex(self.amps[i])) for i in indices]

    def kets(self, tol=0.0):
        return {bitstring(i, self.n_qubits): amp for i, amp in self.support(tol)}

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits}, squared_norm={self.squared_norm:.6g})"


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """
    Operator acting on an ordered tuple of target qubits.

    Diagonal operators keep only their diagonal so register-wide phases never
    need a dense 2^n x 2^n matrix.
    """

    targets: tuple
    matrix: Optional[np.ndarray] = None
    diagonal: Optional[np.ndarray] = None
    label: str = ''

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, 'targets', targets)
        if not targets:
            raise DimensionError("An operator needs at least one target")
        if len(set(targets)) != len(targets):
            raise DimensionError(f"Targets must be distinct, got {targets}")
        if min(targets) < 0:
            raise DimensionError(f"Targets must be non-negative, got {targets}")
        dim = 1 << len(targets)
        if (self.matrix is None) == (self.diagonal is None):
            raise DimensionError("Give exactly one of matrix or diagonal")
        if self.matrix is not None:
            matrix = _frozen(self.matrix)
            if matrix.shape != (dim, dim):
                raise DimensionError(
                    f"Arity {len(targets)} needs a {dim}x{dim} matrix, got {matrix.shape}"
                )
            object.__setattr__(self, 'matrix', matrix)
        else:
            diagonal = _frozen(np.asarray(self.diagonal).reshape(-1))
            if diagonal.shape != (dim,):
                raise DimensionError(f"Arity {len(targets)} needs {dim} diagonal entries, got {diagonal.shape}")
            object.__setattr__(self, 'diagonal', diagonal)

    @classmethod
    def from_diagonal(cls, values, targets, label=''):
        return cls(targets=tuple(targets), diagonal=values, label=label)

    @property
    def arity(self):
        return len(self.targets)

    @property
    def is_diagonal(self):
        return self.diagonal is not None

    def dense(self):
        if self.is_diagonal:
            return np.diag(self.diagonal)
        return np.array(self.matrix)

    def is_unitary(self, tol=NORMALIZATION_TOL):
        if self.is_diagonal:
            return bool(np.all(np.abs(np.abs(self.diagonal) - 1.0) <= tol))
        product = self.matrix.conj().T @ self.matrix
        return bool(np.allclose(product, np.eye(product.shape[0]), atol=tol))


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """
    One branch of a Z-basis measurement.

    ``probability`` is relative to the squared norm of the measured state;
    ``post_state`` is the renormalized branch and ``branch`` the raw projection.
    """

    qubit: int
    outcome: int
    probability: float
    post_state: Optional[StateVector]
    branch: Optional[StateVector] = None


@dataclass(frozen=True, eq=False)
class Branch:
    state: StateVector
    weight: float
    label: str = ''


@dataclass(frozen=True, eq=False)
class BranchEnsemble:
    """
    Pure-state branches standing in for a mixed state.

    Branch states are raw (un-renormalized) and ``weight`` is their share of
    the total. ``gamma`` and ``source`` are set when the ensemble comes from
    a noise channel so recoveries know what they are restoring.
    """

    branches: tuple
    gamma: Optional[float] = None
    source: Optional[StateVector] = None
    truncation_bound: float = 0.0

    def __iter__(self) -> Iterator[Branch]:
        return iter(self.branches)

    def __len__(self):
        return len(self.branches)

    def __getitem__(self, item):
        return self.branches[item]

    @property
    def is_pure(self):
        return len(self.branches) == 1

    @property
    def n_qubits(self):
        return self.branches[0].state.n_qubits if self.branches else None

    @property
    def total_weight(self):
        return float(sum(branch.weight for branch in self.branches))

    @property
    def total_squared_norm(self):
        return float(sum(branch.state.squared_norm for branch in self.branches))

    def by_label(self):
        return {branch.label: branch for branch in self.branches}


def _check_same_register(a, b):
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"Registers differ: {a.n_qubits} vs {b.n_qubits} qubits")


def _check_qubit(qubit, n_qubits):
    if not 0 <= qubit < n_qubits:
        raise DimensionError(f"Qubit {qubit} is outside a {n_qubits}-qubit register")


@lru_cache(maxsize=256)
def _local_index(n_qubits, targets):
    """Map every global basis index to its index on ``targets``."""
    index = np.arange(1 << n_qubits)
    local = np.zeros_like(index)
    for position, qubit in enumerate(targets):
        shift = len(targets) - 1 - position
        local |= ((index >> (n_qubits - 1 - qubit)) & 1) << shift
    local.setflags(write=False)
    return local


def apply_local(state: StateVector, op: LocalOperator) -> StateVector:
    """Contract ``op`` onto its target qubits of ``state``."""
    n = state.n_qubits
    for qubit in op.targets:
        _check_qubit(qubit, n)
    if op.is_diagonal:
        if op.targets == tuple(range(n)):
            return StateVector(n, state.amps * op.diagonal)
        return StateVector(n, state.amps * op.diagonal[_local_index(n, op.targets)])

    arity = op.arity
    psi = state.amps.reshape((2,) * n)
    gate = op.matrix.reshape((2,) * (2 * arity))
    out = np.tensordot(gate, psi, axes=(list(range(arity, 2 * arity)), list(op.targets)))
    out = np.moveaxis(out, list(range(arity)), list(op.targets))
    return StateVector(n, out.reshape(-1))


def apply_all(state: StateVector, ops: Sequence[LocalOperator]) -> StateVector:
    for op in ops:
        state = apply_local(state, op)
    return state


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _check_same_register(a, b)
    return complex(np.vdot(a.amps, b.amps))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.n_qubits + b.n_qubits, np.kron(a.amps, b.amps))


def _project(state, qubit, outcome):
    n = state.n_qubits
    psi = np.array(state.amps).reshape(1 << qubit, 2, 1 << (n - qubit - 1))
    psi[:, 1 - outcome, :] = 0.0
    return StateVector(n, psi.reshape(-1))


def _record(state, qubit, outcome, total):
    branch = _project(state, qubit, outcome)
    weight = branch.squared_norm
    post_state = branch.scaled(1.0 / np.sqrt(weight)) if weight > 0.0 else None
    return MeasurementRecord(
        qubit=qubit,
        outcome=outcome,
        probability=weight / total,
        post_state=post_state,
        branch=branch,
    )


def measure_z(state: StateVector, qubit: int, outcome: Optional[int] = None):
    """
    Projective Z measurement of one qubit.

    With ``outcome`` the matching record is returned (post-selection);
    without it both records come back as a tuple ordered by outcome.
    """
    _check_qubit(qubit, state.n_qubits)
    total = state.squared_norm
    if total <= 0.0:
        raise ZeroProbabilityBranch("Cannot measure a zero-norm state")
    if outcome is None:
        return tuple(_record(state, qubit, bit, total) for bit in (0, 1))
    if outcome not in (0, 1):
        raise ValueError(f"Outcome must be 0 or 1, got {outcome}")
    record = _record(state, qubit, outcome, total)
    if record.post_state is None:
        raise ZeroProbabilityBranch(f"Outcome {outcome} on qubit {qubit} has zero probability")
    return record


def _parallel(a, b):
    overlap = abs(np.vdot(a.amps, b.amps)) ** 2
    return overlap >= (1.0 - PARALLEL_TOL) * a.squared_norm * b.squared_norm


def discard(state: StateVector, qubit: int, merge: bool = True) -> BranchEnsemble:
    """
    Trace out ``qubit``.

    Branches are the Z-basis values of the discarded qubit, labelled '0' and
    '1'. With ``merge`` a retained register that is pure comes back as a
    single branch carrying the combined norm.
    """
    n = state.n_qubits
    _check_qubit(qubit, n)
    if n == 1:
        raise DimensionError("Cannot discard the only qubit of a register")

    total = state.squared_norm
    psi = state.amps.reshape(1 << qubit, 2, 1 << (n - qubit - 1))
    parts = [StateVector(n - 1, psi[:, bit, :].reshape(-1)) for bit in (0, 1)]
    nonzero = [(bit, part) for bit, part in enumerate(parts) if part.squared_norm > 0.0]

    if merge and len(nonzero) == 2 and _parallel(parts[0], parts[1]):
        first = parts[0]
        merged = first.scaled(np.sqrt(total / first.squared_norm))
        return BranchEnsemble((Branch(merged, 1.0, ''),))

    return BranchEnsemble(tuple(
        Branch(part, part.squared_norm / total, str(bit)) for bit, part in nonzero
    ))


def single_qubit(matrix, qubit, label=''):
    return LocalOperator(targets=(qubit,), matrix=matrix, label=label)


def cnot(control, target):
    return LocalOperator(targets=(control, target), matrix=CNOT, label=f'CNOT{control}->{target}')


def permute_qubits(state: StateVector, order: Sequence[int]) -> StateVector:
    """Reorder qubits so that new qubit p is old qubit ``order[p]``."""
    n = state.n_qubits
    if sorted(order) != list(range(n)):
        raise DimensionError(f"{order} is not a permutation of {n} qubits")
    psi = state.amps.reshape((2,) * n).transpose(list(order))
    return StateVector(n, psi.reshape(-1))
