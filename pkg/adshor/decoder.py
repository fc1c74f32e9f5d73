"""
Syndrome extraction, lookup-table decoding and the two recovery backends.

The projector backend maps every normalized error state of weight <= w
back onto its codeword. The circuit backend runs the gate-level procedure
(CNOT extraction, discards, X corrections, artificial damping, re-encoding
CNOT) and exists for the [[4,1]] and [[6,2]] codes only.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from django.conf import settings

from .codes import CodeSpec, apply_encoding, codeword, codeword_support, z_stabilizers
from .exceptions import DimensionError, OrthogonalityError, UncorrectableSyndrome, ZeroProbabilityBranch
from .noise import KrausString, cc_unitary, iter_error_strings, truncation_bound
from .qla import (
    X,
    BranchEnsemble,
    Branch,
    LocalOperator,
    MeasurementRecord,
    StateVector,
    apply_local,
    cnot,
    discard,
    measure_z,
    permute_qubits,
    single_qubit,
)

logger = logging.getLogger(__name__)

VARIANTS = ('literal', 'transfer', 'balanced')
TABLE_PROBE_GAMMA = 0.5


@dataclass(frozen=True)
class Syndrome:
    bits: str

    @property
    def is_trivial(self):
        return '1' not in self.bits

    @property
    def value(self):
        return int(self.bits, 2) if self.bits else 0

    def __str__(self):
        return self.bits


@dataclass(frozen=True, eq=False)
class SyndromeBranch:
    syndrome: Syndrome
    probability: float
    state: StateVector
    post_state: StateVector


@lru_cache(maxsize=64)
def _syndrome_values(spec: CodeSpec):
    """Syndrome value of every basis index, generator 0 as the leading bit."""
    index = np.arange(1 << spec.n_qubits)
    values = np.zeros_like(index)
    for generator in z_stabilizers(spec):
        bit = np.bitwise_count(index & generator.z_mask) & 1
        if generator.phase == -1:
            bit ^= 1
        values = (values << 1) | bit
    values.setflags(write=False)
    return values


def syndrome_length(spec: CodeSpec):
    return len(z_stabilizers(spec))


def extract_syndrome(state: StateVector, spec: CodeSpec):
    """
    Split ``state`` by the outcomes of every Z-type generator.

    Damping branches of codewords sit on a single syndrome, so only one
    branch comes back for them.
    """
    if state.n_qubits != spec.n_qubits:
        raise DimensionError(f"{spec} acts on {spec.n_qubits} qubits, state has {state.n_qubits}")
    total = state.squared_norm
    if total <= 0.0:
        raise ZeroProbabilityBranch("Cannot extract a syndrome from a zero-norm state")
    values = _syndrome_values(spec)
    length = syndrome_length(spec)
    branches = []
    for value in np.unique(values[np.abs(state.amps) > 0.0]):
        amps = np.where(values == value, state.amps, 0.0)
        branch = StateVector(state.n_qubits, amps)
        branches.append(SyndromeBranch(
            syndrome=Syndrome(format(int(value), f'0{length}b')),
            probability=branch.squared_norm / total,
            state=branch,
            post_state=branch.normalized(),
        ))
    return branches


@dataclass(frozen=True)
class SyndromeTable:
    """
    Syndrome to minimum-weight damped positions.

    Every minimal candidate is kept; ``lookup`` returns the first one, which
    is the one with the lowest qubit indices.
    """

    spec: CodeSpec
    entries: dict = field(hash=False)

    def candidates(self, syndrome):
        key = syndrome.bits if isinstance(syndrome, Syndrome) else str(syndrome)
        try:
            return self.entries[key]
        except KeyError:
            raise UncorrectableSyndrome(key) from None

    def lookup(self, syndrome):
        return self.candidates(syndrome)[0]

    @property
    def collisions(self):
        return {key: positions for key, positions in self.entries.items() if len(positions) > 1}

    def to_json(self):
        return {
            'spec': self.spec.label,
            'w': self.spec.w,
            'K': self.spec.K,
            'dual_rail': self.spec.dual_rail,
            'entries': {key: [list(p) for p in positions] for key, positions in sorted(self.entries.items())},
        }

    def __len__(self):
        return len(self.entries)


def build_table(spec: CodeSpec, max_weight=None) -> SyndromeTable:
    max_weight = spec.w if max_weight is None else max_weight
    source = codeword(spec, 0)
    found = defaultdict(list)
    for error in iter_error_strings(spec.n_qubits, max_weight):
        damped = KrausString(error, TABLE_PROBE_GAMMA).apply(source)
        if damped.squared_norm == 0.0:
            continue
        branches = extract_syndrome(damped, spec)
        if len(branches) != 1:
            logger.warning(f"Error {error} on {spec.label} splits over {len(branches)} syndromes")
        for branch in branches:
            found[branch.syndrome.bits].append(error.positions)

    entries = {}
    for key, positions in found.items():
        lightest = min(len(p) for p in positions)
        entries[key] = tuple(sorted(p for p in positions if len(p) == lightest))
    table = SyndromeTable(spec, entries)
    logger.info(f"Built syndrome table for {spec.label}: {len(table)} syndromes, {len(table.collisions)} with several candidates")
    return table


@dataclass(frozen=True, eq=False)
class RecoveryKraus:
    """
    Projector recovery as one Kraus element per error class.

    Class ``c`` with error string ``a`` applies
    sum_i coefficients[c, i] |i><i'_(a)|. The literal variant replaces the
    weight-0 class by the (I - P)/2 complement, of which only the
    codespace part is tracked. Error states of weight <= w have disjoint
    supports, so ``owner`` maps each basis index to the flattened
    (class, i) state it belongs to.
    """

    spec: CodeSpec
    gamma: float
    variant: str
    errors: tuple
    norms: np.ndarray
    coefficients: np.ndarray
    owner: np.ndarray
    conj_amps: np.ndarray
    max_overlap: float

    @property
    def n_classes(self):
        return len(self.errors)

    def labels(self):
        if self.variant == 'literal':
            return ['complement'] + [e.bits for e in self.errors[1:]]
        return [e.bits for e in self.errors]

    def overlaps_sparse(self, indices, amps):
        """<i'_(a)|phi> for every class and codeword, shape (classes, 2^K)."""
        indices = np.asarray(indices, dtype=np.int64)
        owners = self.owner[indices]
        hit = owners >= 0
        products = self.conj_amps[indices[hit]] * np.asarray(amps)[hit]
        size = self.n_classes * self.spec.logical_dim
        real = np.bincount(owners[hit], weights=products.real, minlength=size)
        imag = np.bincount(owners[hit], weights=products.imag, minlength=size)
        return (real + 1j * imag).reshape(self.n_classes, self.spec.logical_dim)

    def overlaps(self, state: StateVector):
        nonzero = np.flatnonzero(state.amps)
        return self.overlaps_sparse(nonzero, state.amps[nonzero])

    def apply_logical_sparse(self, indices, amps):
        """Logical output of every Kraus element, shape (classes, 2^K)."""
        return self.coefficients * self.overlaps_sparse(indices, amps)

    def apply_logical(self, state: StateVector):
        return self.coefficients * self.overlaps(state)

    def completeness_defect(self):
        """Largest 1 - <v|sum R^dagger R|v> over the tracked error states."""
        present = self.norms > 0.0
        return float(np.max(1.0 - np.abs(self.coefficients[present]) ** 2))

    def __repr__(self):
        return f"RecoveryKraus({self.spec.label}, gamma={self.gamma}, variant={self.variant}, classes={self.n_classes})"


@lru_cache(maxsize=32)
def build_recovery(spec: CodeSpec, gamma: float, variant: str = 'balanced', tol=None) -> RecoveryKraus:
    if variant not in VARIANTS:
        raise ValueError(f"Unknown recovery variant {variant!r}, expected one of {VARIANTS}")
    tol = settings.ADSHOR_ORTHOGONALITY_TOL if tol is None else tol
    n, dim = spec.n_qubits, spec.logical_dim
    errors = tuple(iter_error_strings(n, spec.w))

    owner = np.full(1 << n, -1, dtype=np.int64)
    conj_amps = np.zeros(1 << n, dtype=np.complex128)
    norms = np.zeros((len(errors), dim))
    max_overlap = 0.0
    for c, error in enumerate(errors):
        kraus = KrausString(error, gamma)
        for i in range(dim):
            support, amplitude = codeword_support(spec, i)
            if variant == 'literal' and c == 0:
                target, amps = support, np.full(support.shape, amplitude, dtype=np.complex128)
            else:
                target, amps = kraus.apply_sparse(support, np.full(support.shape, amplitude))
            norm = float(np.sqrt(np.sum(np.abs(amps) ** 2)))
            if norm == 0.0:
                continue
            norms[c, i] = norm
            flat = c * dim + i
            taken = owner[target] >= 0
            if np.any(taken):
                max_overlap = max(max_overlap, _shared_overlap(owner, conj_amps, target, amps / norm))
                if max_overlap > tol:
                    raise OrthogonalityError(
                        f"Error state {error} of codeword {i} overlaps another error state by {max_overlap:.3e} on {spec.label}"
                    )
            owner[target] = flat
            conj_amps[target] = np.conj(amps / norm)

    if variant == 'literal':
        coefficients = np.where(norms > 0.0, 1.0, 0.0)
        coefficients[0] = 0.5
    elif variant == 'transfer':
        coefficients = np.where(norms > 0.0, 1.0, 0.0)
    else:
        smallest = np.min(norms, axis=1, keepdims=True)
        coefficients = np.divide(smallest, norms, out=np.zeros_like(norms), where=norms > 0.0)

    owner.setflags(write=False)
    conj_amps.setflags(write=False)
    recovery = RecoveryKraus(
        spec=spec,
        gamma=float(gamma),
        variant=variant,
        errors=errors,
        norms=norms,
        coefficients=coefficients.astype(np.complex128),
        owner=owner,
        conj_amps=conj_amps,
        max_overlap=max_overlap,
    )
    logger.debug(f"Built {recovery!r}")
    return recovery


def _shared_overlap(owner, conj_amps, target, amps):
    taken = owner[target] >= 0
    overlaps = defaultdict(complex)
    for flat, conj, amp in zip(owner[target][taken], conj_amps[target][taken], amps[taken]):
        overlaps[int(flat)] += conj * amp
    return max(abs(value) for value in overlaps.values())


@dataclass(frozen=True, eq=False)
class BranchFidelity:
    label: str
    squared_norm: float
    fidelity: float


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    ensemble: BranchEnsemble
    fidelity: float
    branch_fidelities: tuple
    leakage: float
    variant: str


def projector_recovery(spec: CodeSpec, ensemble: BranchEnsemble, variant='transfer', gamma=None) -> RecoveryResult:
    """
    Apply the projector recovery to every branch of ``ensemble``.

    ``fidelity`` is the overlap of the recovered mixture with the encoded
    input ``ensemble.source``; ``branch_fidelities`` are normalized per
    incoming branch.
    """
    gamma = ensemble.gamma if gamma is None else gamma
    if gamma is None:
        raise ValueError("The damping rate is needed to build the recovery")
    if ensemble.source is None:
        raise ValueError("The ensemble does not carry its encoded input")
    recovery = build_recovery(spec, float(gamma), variant)
    target = decode_logical(ensemble.source, spec)[0]
    labels = recovery.labels()

    recovered = []
    per_branch = []
    total = 0.0
    kept = 0.0
    for branch in ensemble:
        outputs = recovery.apply_logical(branch.state)
        branch_fidelity = 0.0
        for c, logical in enumerate(outputs):
            if not np.any(logical):
                continue
            state = reencode(spec, logical)
            kept += state.squared_norm
            branch_fidelity += abs(np.vdot(target, logical)) ** 2
            recovered.append(Branch(state, state.squared_norm, f"{branch.label}>{labels[c]}"))
        total += branch_fidelity
        norm = branch.state.squared_norm
        per_branch.append(BranchFidelity(branch.label, norm, branch_fidelity / norm if norm > 0.0 else 0.0))

    leakage = ensemble.total_squared_norm - kept
    return RecoveryResult(
        ensemble=BranchEnsemble(tuple(recovered), gamma=gamma, source=ensemble.source,
                                truncation_bound=ensemble.truncation_bound),
        fidelity=float(total),
        branch_fidelities=tuple(per_branch),
        leakage=float(leakage),
        variant=variant,
    )


def decode_logical(state: StateVector, spec: CodeSpec):
    """Codeword amplitudes of ``state`` and the squared norm left outside the codespace."""
    if state.n_qubits != spec.n_qubits:
        raise DimensionError(f"{spec} acts on {spec.n_qubits} qubits, state has {state.n_qubits}")
    amps = np.zeros(spec.logical_dim, dtype=np.complex128)
    for i in range(spec.logical_dim):
        support, amplitude = codeword_support(spec, i)
        amps[i] = amplitude * np.sum(state.amps[support])
    leakage = state.squared_norm - float(np.sum(np.abs(amps) ** 2))
    return amps, max(leakage, 0.0)


def reencode(spec: CodeSpec, logical) -> StateVector:
    """Re-encode a recovered logical vector onto fresh codewords."""
    return apply_encoding(spec, logical)


CY_LABEL = 'CY'


def controlled_y(theta):
    """|0><0| x I + |1><1| x exp(-i theta/2 Y), control first."""
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, c, -s],
        [0, 0, s, c],
    ], dtype=np.complex128)


def _artificial_branch(state: StateVector, qubit: int, gamma_prime: float, outcome: int) -> StateVector:
    """Raw branch of the artificial damping for one ancilla outcome."""
    if not 0.0 <= gamma_prime <= 1.0:
        raise ValueError(f"gamma_prime must lie in [0, 1], got {gamma_prime!r}")
    theta = 2.0 * np.arcsin(np.sqrt(gamma_prime))
    n = state.n_qubits
    extended = StateVector(n + 1, np.kron(state.amps, [1.0, 0.0]))
    extended = apply_local(extended, LocalOperator(targets=(qubit, n), matrix=controlled_y(theta), label=CY_LABEL))
    kept = StateVector(n, extended.amps.reshape(-1, 2)[:, outcome])
    if outcome == 1:
        kept = apply_local(kept, single_qubit(X, qubit, 'X'))
    return kept


def artificial_ad(state: StateVector, qubit: int, gamma_prime: float, postselect: int = 0) -> MeasurementRecord:
    """
    Damp ``qubit`` on purpose: adjoin an ancilla in |0>, apply CY(theta)
    with sin^2(theta/2) = gamma_prime, measure the ancilla and keep
    ``postselect``. Outcome 1 is followed by an X on the data qubit.
    """
    if postselect not in (0, 1):
        raise ValueError(f"Outcome must be 0 or 1, got {postselect}")
    total = state.squared_norm
    if total <= 0.0:
        raise ZeroProbabilityBranch("Cannot damp a zero-norm state")
    branch = _artificial_branch(state, qubit, gamma_prime, postselect)
    weight = branch.squared_norm
    if weight <= 0.0:
        raise ZeroProbabilityBranch(f"Artificial damping outcome {postselect} on qubit {qubit} has zero probability")
    return MeasurementRecord(
        qubit=qubit,
        outcome=postselect,
        probability=weight / total,
        post_state=branch.normalized(),
        branch=branch,
    )


GAMMA_PRIME_RULES = {
    'same': lambda gamma: gamma,
    'squared': lambda gamma: 1.0 - (1.0 - gamma) ** 2,
}


@dataclass(frozen=True)
class RecoveryStep:
    """One gate-level step; ``qubits`` are labels of the original register."""

    kind: str
    qubits: tuple
    rule: Optional[str] = None

    def describe(self, gamma=None):
        if self.kind == 'artificial':
            value = f"{GAMMA_PRIME_RULES[self.rule](gamma):.6g}" if gamma is not None else self.rule
            return f"artificial-AD(gamma'={value}) on {self.qubits}"
        return f"{self.kind} {self.qubits}"

    def to_json(self, gamma=None):
        entry = {'step': self.kind, 'qubits': list(self.qubits), 'text': self.describe(gamma)}
        if self.kind == 'artificial':
            entry['rule'] = self.rule
            entry['gamma_prime'] = GAMMA_PRIME_RULES[self.rule](gamma) if gamma is not None else None
        return entry


@dataclass(frozen=True)
class RecoveryProcedure:
    syndrome: str
    steps: tuple
    output: tuple


def _cnot(control, target):
    return RecoveryStep('cnot', (control, target))


def _discard(qubit):
    return RecoveryStep('discard', (qubit,))


def _x(*qubits):
    return RecoveryStep('x', qubits)


def _artificial(rule, *qubits):
    return RecoveryStep('artificial', qubits, rule)


PROCEDURES_622 = {
    '000': RecoveryProcedure('000', (_cnot(0, 2), _cnot(0, 4), _discard(0)), (2, 4)),
    '100': RecoveryProcedure('100', (_discard(0), _x(2, 4), _artificial('squared', 2, 4)), (2, 4)),
    '001': RecoveryProcedure('001', (_discard(4), _x(0, 2), _artificial('same', 0, 2), _cnot(0, 2)), (2, 0)),
    '010': RecoveryProcedure('010', (_discard(2), _x(0, 4), _artificial('same', 0, 4), _cnot(0, 4)), (0, 4)),
}

PROCEDURES_411 = {
    '00': RecoveryProcedure('00', (_cnot(0, 2), _discard(0)), (2,)),
    '10': RecoveryProcedure('10', (_discard(0), _x(2), _artificial('squared', 2)), (2,)),
    '01': RecoveryProcedure('01', (_discard(2), _x(0), _artificial('squared', 0)), (0,)),
}


def procedures_for(spec: CodeSpec):
    if spec.dual_rail or spec.w != 1 or spec.K not in (1, 2):
        raise DimensionError(f"Circuit recovery is defined for [[4,1]] and [[6,2]] only, not {spec}")
    return PROCEDURES_411 if spec.K == 1 else PROCEDURES_622


@dataclass(frozen=True, eq=False)
class CircuitPath:
    """One surviving path: syndrome, discard outcomes and the logical output."""

    syndrome: str
    label: str
    logical: np.ndarray
    trace: tuple

    def to_json(self):
        return {
            'syndrome': self.syndrome,
            'label': self.label,
            'steps': [dict(step) for step in self.trace],
            'logical': [[float(a.real), float(a.imag)] for a in self.logical],
        }


@dataclass(frozen=True, eq=False)
class CircuitResult:
    syndrome: str
    paths: tuple

    @property
    def logical(self):
        """Coherent sum of the path outputs, the form the lookup tables print."""
        return sum((path.logical for path in self.paths), np.zeros_like(self.paths[0].logical))

    @property
    def recovered_index(self):
        return int(np.argmax(np.abs(self.logical)))

    def to_json(self):
        return {
            'syndrome': self.syndrome,
            'recovered': self.recovered_index,
            'paths': [path.to_json() for path in self.paths],
        }


def extract_syndrome_circuit(spec: CodeSpec, state: StateVector):
    """CNOT each block's first qubit onto its second, then measure the second qubits."""
    for b in range(spec.n_blocks):
        state = apply_local(state, cnot(2 * b, 2 * b + 1))
    branches = [('', state)]
    for qubit in reversed(range(1, spec.n_qubits, 2)):
        measured = []
        for bits, branch in branches:
            if branch.squared_norm <= 0.0:
                continue
            for record in measure_z(branch, qubit):
                if record.probability > 0.0:
                    part = discard(record.branch, qubit, merge=False)[0].state
                    measured.append((str(record.outcome) + bits, part))
        branches = measured
    return branches


def run_circuit_recovery(spec: CodeSpec, state: StateVector, gamma: float, strict=True):
    """
    Gate-level recovery of a damped [[4,1]] or [[6,2]] state.

    Returns one CircuitResult per syndrome observed. With ``strict`` an
    unknown syndrome raises; otherwise it is skipped.
    """
    procedures = procedures_for(spec)
    if state.n_qubits != spec.n_qubits:
        raise DimensionError(f"{spec} acts on {spec.n_qubits} qubits, state has {state.n_qubits}")
    if state.squared_norm <= 0.0:
        return []

    results = []
    for syndrome, data in extract_syndrome_circuit(spec, state):
        procedure = procedures.get(syndrome)
        if procedure is None:
            if strict:
                raise UncorrectableSyndrome(syndrome, f"No recovery procedure for syndrome {syndrome} on {spec.label}")
            logger.debug(f"Skipping unknown syndrome {syndrome} on {spec.label}")
            continue
        paths = _run_procedure(procedure, data, gamma, labels=tuple(range(0, spec.n_qubits, 2)))
        results.append(CircuitResult(syndrome, tuple(paths)))
    return results


def _run_procedure(procedure: RecoveryProcedure, state: StateVector, gamma, labels):
    paths = [('', state, list(labels), ())]
    for step in procedure.steps:
        advanced = []
        for tag, current, current_labels, trace in paths:
            trace = trace + (step.to_json(gamma),)
            positions = [current_labels.index(q) for q in step.qubits]
            if step.kind == 'cnot':
                advanced.append((tag, apply_local(current, cnot(*positions)), current_labels, trace))
            elif step.kind == 'x':
                for position in positions:
                    current = apply_local(current, single_qubit(X, position, 'X'))
                advanced.append((tag, current, current_labels, trace))
            elif step.kind == 'artificial':
                gamma_prime = GAMMA_PRIME_RULES[step.rule](gamma)
                for position in positions:
                    current = _artificial_branch(current, position, gamma_prime, 0)
                advanced.append((tag, current, current_labels, trace))
            elif step.kind == 'discard':
                remaining = [q for q in current_labels if q != step.qubits[0]]
                for branch in discard(current, positions[0], merge=False):
                    kept = trace[:-1] + ({**trace[-1], 'outcome': branch.label},)
                    advanced.append((tag + f"d{step.qubits[0]}={branch.label}", branch.state, remaining, kept))
            else:
                raise ValueError(f"Unknown recovery step {step.kind!r}")
        paths = advanced

    out = []
    for tag, current, current_labels, trace in paths:
        order = [current_labels.index(q) for q in procedure.output]
        logical = permute_qubits(current, order).amps
        trace = trace + ({'step': 'output', 'qubits': list(procedure.output), 'text': f"output {procedure.output}"},)
        out.append(CircuitPath(procedure.syndrome, tag, np.array(logical), trace))
    return out


def circuit_recovery_622(branch: StateVector, gamma: float, syndrome=None) -> CircuitResult:
    """Recover a damped [[6,2]] branch; ``syndrome`` is checked when given."""
    return _circuit_recovery(CodeSpec(1, 2), branch, gamma, syndrome)


def circuit_recovery_411(branch: StateVector, gamma: float, syndrome=None) -> CircuitResult:
    return _circuit_recovery(CodeSpec(1, 1), branch, gamma, syndrome)


def _circuit_recovery(spec, branch, gamma, syndrome):
    results = run_circuit_recovery(spec, branch, gamma, strict=True)
    if len(results) != 1:
        raise UncorrectableSyndrome(
            ','.join(r.syndrome for r in results),
            f"Branch spreads over {len(results)} syndromes; expected a single damping pattern",
        )
    result = results[0]
    if syndrome is not None and str(syndrome) != result.syndrome:
        raise UncorrectableSyndrome(result.syndrome, f"Measured syndrome {result.syndrome}, expected {syndrome}")
    return result


@dataclass(frozen=True, eq=False)
class LogicalChannel:
    """
    Kraus operators of encode -> noise -> recover -> decode on the logical
    register, shape (ops, 2^K, 2^K). ``lost`` is the largest per-input mass
    that no operator carries (truncation, leakage, unknown syndromes).
    """

    spec: CodeSpec
    gamma: float
    backend: str
    ops: np.ndarray
    labels: tuple
    truncation_bound: float
    lost: float

    def apply(self, rho):
        return np.einsum('kab,bc,kdc->ad', self.ops, rho, self.ops.conj())

    def fidelity(self, psi, rounds=1):
        psi = np.asarray(psi, dtype=np.complex128)
        rho = np.outer(psi, psi.conj())
        for _ in range(rounds):
            rho = self.apply(rho)
        return float(np.real(np.vdot(psi, rho @ psi)))


def _encoded_support(spec, i, rotation):
    support, amplitude = codeword_support(spec, i)
    amps = np.full(support.shape, amplitude, dtype=np.complex128)
    if rotation is not None:
        amps = amps * rotation.diagonal[support]
    return support, amps


def logical_channel(spec: CodeSpec, gamma: float, backend='projector', variant='balanced',
                    cutoff=None, g=None, dt=None, tol=None) -> LogicalChannel:
    """
    Assemble the logical channel one damping pattern at a time.

    ``g``/``dt`` add the collective rotation before damping.
    """
    n, dim = spec.n_qubits, spec.logical_dim
    cutoff = n if cutoff is None else cutoff
    bound = truncation_bound(n, gamma, cutoff)
    rotation = cc_unitary(n, g, dt) if dt else None

    ops = defaultdict(lambda: np.zeros((dim, dim), dtype=np.complex128))
    if backend == 'projector':
        recovery = build_recovery(spec, float(gamma), variant, tol)
        labels = recovery.labels()
        for error in iter_error_strings(n, cutoff):
            kraus = KrausString(error, gamma)
            for i in range(dim):
                target, amps = kraus.apply_sparse(*_encoded_support(spec, i, rotation))
                if target.size == 0:
                    continue
                outputs = recovery.apply_logical_sparse(target, amps)
                for c in np.flatnonzero(np.any(outputs != 0, axis=1)):
                    ops[(error.bits, labels[c])][:, i] = outputs[c]
    elif backend == 'circuit':
        for error in iter_error_strings(n, cutoff):
            kraus = KrausString(error, gamma)
            for i in range(dim):
                target, amps = kraus.apply_sparse(*_encoded_support(spec, i, rotation))
                if target.size == 0:
                    continue
                damped = np.zeros(1 << n, dtype=np.complex128)
                damped[target] = amps
                for result in run_circuit_recovery(spec, StateVector(n, damped), gamma, strict=False):
                    for path in result.paths:
                        ops[(error.bits, f"{path.syndrome}:{path.label}")][:, i] = path.logical
    else:
        raise ValueError(f"Unknown decoder backend {backend!r}")

    labels = tuple(ops)
    stack = np.stack([ops[key] for key in labels]) if labels else np.zeros((0, dim, dim), dtype=np.complex128)
    carried = np.einsum('kai,kai->i', stack.conj(), stack).real if labels else np.zeros(dim)
    channel = LogicalChannel(
        spec=spec,
        gamma=float(gamma),
        backend=backend,
        ops=stack,
        labels=labels,
        truncation_bound=bound,
        lost=float(np.max(1.0 - carried)),
    )
    logger.debug(f"Logical channel for {spec.label} at gamma={gamma}: {len(labels)} operators, lost={channel.lost:.3e}")
    return channel
