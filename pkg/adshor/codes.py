"""
The [[(w+1)(w+K), K]] amplitude-damping Shor code family.

A code with correction weight ``w`` and ``K`` logical qubits has ``w+K``
blocks of ``w+1`` qubits each. The first ``w`` blocks carry an even or odd
parity string; the last ``K`` blocks carry the logical bits (flipped on odd
parity). Block ``i`` occupies qubits ``(w+1)i .. (w+1)i+w``.
"""

import itertools
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from django.conf import settings

from .exceptions import DimensionError, NormalizationError, QubitLimitError
from .qla import NORMALIZATION_TOL, StateVector

logger = logging.getLogger(__name__)

PHASES = (1, -1, 1j, -1j)

# single-qubit products: (a, b) -> (phase, letter) with a*b = phase * letter
_PAULI_PRODUCTS = {
    ('I', 'I'): (1, 'I'), ('I', 'X'): (1, 'X'), ('I', 'Y'): (1, 'Y'), ('I', 'Z'): (1, 'Z'),
    ('X', 'I'): (1, 'X'), ('X', 'X'): (1, 'I'), ('X', 'Y'): (1j, 'Z'), ('X', 'Z'): (-1j, 'Y'),
    ('Y', 'I'): (1, 'Y'), ('Y', 'X'): (-1j, 'Z'), ('Y', 'Y'): (1, 'I'), ('Y', 'Z'): (1j, 'X'),
    ('Z', 'I'): (1, 'Z'), ('Z', 'X'): (1j, 'Y'), ('Z', 'Y'): (-1j, 'X'), ('Z', 'Z'): (1, 'I'),
}


@dataclass(frozen=True)
class CodeSpec:
    """Parameters of one member of the family."""

    w: int
    K: int
    dual_rail: bool = False

    def __post_init__(self):
        for name in ('w', 'K'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
            object.__setattr__(self, name, int(value))
        object.__setattr__(self, 'dual_rail', bool(self.dual_rail))

    @property
    def block_size(self):
        return self.w + 1

    @property
    def n_blocks(self):
        return self.w + self.K

    @property
    def n_outer(self):
        return self.block_size * self.n_blocks

    @property
    def n_qubits(self):
        return 2 * self.n_outer if self.dual_rail else self.n_outer

    @property
    def rate(self):
        return Fraction(self.K, self.n_qubits)

    @property
    def logical_dim(self):
        return 1 << self.K

    @property
    def label(self):
        return f"[[{self.n_qubits},{self.K}]]"

    def outer(self):
        return replace(self, dual_rail=False)

    def block(self, i):
        if not 0 <= i < self.n_blocks:
            raise DimensionError(f"Block {i} does not exist in {self}")
        return range(self.block_size * i, self.block_size * (i + 1))

    def logical_labels(self):
        return [format(i, f'0{self.K}b') for i in range(self.logical_dim)]

    def check_size(self, max_qubits=None):
        limit = settings.ADSHOR_MAX_QUBITS if max_qubits is None else max_qubits
        if self.n_qubits > limit:
            raise QubitLimitError(
                f"{self} needs {self.n_qubits} qubits, above the limit of {limit} "
                f"(raise ADSHOR_MAX_QUBITS to override)"
            )
        return self

    def __str__(self):
        suffix = ', dual-rail' if self.dual_rail else ''
        return f"{self.label} (w={self.w}, K={self.K}{suffix})"


@dataclass(frozen=True)
class PauliString:
    """
    Tensor product of single-qubit Paulis with a global phase.

    ``letters[q]`` acts on qubit ``q``.
    """

    letters: str
    phase: complex = 1

    def __post_init__(self):
        letters = str(self.letters).upper()
        if not letters or set(letters) - set('IXYZ'):
            raise ValueError(f"Invalid Pauli letters {self.letters!r}")
        phase = complex(self.phase)
        if phase not in PHASES:
            raise ValueError(f"Phase must be one of {PHASES}, got {self.phase!r}")
        object.__setattr__(self, 'letters', letters)
        object.__setattr__(self, 'phase', phase)

    @classmethod
    def from_support(cls, n_qubits, kind, support, phase=1):
        letters = ['I'] * n_qubits
        for qubit in support:
            if not 0 <= qubit < n_qubits:
                raise DimensionError(f"Qubit {qubit} is outside a {n_qubits}-qubit register")
            letters[qubit] = kind
        return cls(''.join(letters), phase)

    @classmethod
    def parse(cls, text, n_qubits):
        """Parse the compact form used in listings, e.g. ``-Z0Z3Z7``."""
        text = text.strip()
        phase = 1
        for prefix, value in (('-i', -1j), ('+i', 1j), ('i', 1j), ('-', -1), ('+', 1)):
            if text.startswith(prefix) and len(text) > len(prefix) and text[len(prefix)] in 'IXYZ':
                phase = value
                text = text[len(prefix):]
                break
        letters = ['I'] * n_qubits
        for kind, qubit in _tokenize(text):
            if not 0 <= qubit < n_qubits:
                raise DimensionError(f"Qubit {qubit} is outside a {n_qubits}-qubit register")
            letters[qubit] = kind
        return cls(''.join(letters), phase)

    @property
    def n_qubits(self):
        return len(self.letters)

    @property
    def support(self):
        return tuple(q for q, letter in enumerate(self.letters) if letter != 'I')

    @property
    def weight(self):
        return len(self.support)

    @property
    def x_mask(self):
        n = self.n_qubits
        return sum(1 << (n - 1 - q) for q, letter in enumerate(self.letters) if letter in 'XY')

    @property
    def z_mask(self):
        n = self.n_qubits
        return sum(1 << (n - 1 - q) for q, letter in enumerate(self.letters) if letter in 'ZY')

    def to_symplectic(self):
        """Binary vector (x | z) of length 2n."""
        x = [1 if letter in 'XY' else 0 for letter in self.letters]
        z = [1 if letter in 'ZY' else 0 for letter in self.letters]
        return np.array(x + z, dtype=np.uint8)

    def commutes_with(self, other):
        if self.n_qubits != other.n_qubits:
            raise DimensionError("Pauli strings act on different registers")
        clashes = sum(
            1 for a, b in zip(self.letters, other.letters)
            if a != 'I' and b != 'I' and a != b
        )
        return clashes % 2 == 0

    def __mul__(self, other):
        if self.n_qubits != other.n_qubits:
            raise DimensionError("Pauli strings act on different registers")
        phase = self.phase * other.phase
        letters = []
        for a, b in zip(self.letters, other.letters):
            factor, letter = _PAULI_PRODUCTS[(a, b)]
            phase *= factor
            letters.append(letter)
        return PauliString(''.join(letters), phase)

    def apply_sparse(self, indices, amps):
        """Act on a support as an index rewrite: X flips bits, Z signs them."""
        indices = np.asarray(indices, dtype=np.int64)
        parity = np.bitwise_count(indices & self.z_mask) & 1
        signs = np.where(parity == 1, -1.0, 1.0)
        factor = self.phase * (1j ** self.letters.count('Y'))
        return indices ^ self.x_mask, factor * signs * np.asarray(amps, dtype=np.complex128)

    def apply(self, state: StateVector) -> StateVector:
        if state.n_qubits != self.n_qubits:
            raise DimensionError(f"{self} acts on {self.n_qubits} qubits, state has {state.n_qubits}")
        target, values = self.apply_sparse(np.arange(state.dim), state.amps)
        out = np.zeros(state.dim, dtype=np.complex128)
        out[target] = values
        return StateVector(state.n_qubits, out)

    def __str__(self):
        prefix = {1: '', -1: '-', 1j: 'i', -1j: '-i'}[self.phase]
        body = ''.join(f"{self.letters[q]}{q}" for q in self.support)
        return prefix + (body or 'I')


def _tokenize(text):
    kind = None
    digits = ''
    for char in text:
        if char in 'IXYZ':
            if kind is not None:
                yield kind, int(digits)
            kind, digits = char, ''
        elif char.isdigit():
            digits += char
        elif char not in ' _*':
            raise ValueError(f"Unexpected character {char!r} in Pauli string")
    if kind is not None:
        yield kind, int(digits)


@dataclass(frozen=True)
class LogicalOperators:
    x: tuple
    z: tuple
    x_all: PauliString

    def y(self, ell):
        """Y = -i Z X on logical qubit ``ell``."""
        return PauliString(self.z[ell].letters, -1j * self.z[ell].phase) * self.x[ell]


def _block_value(blocks, block_size):
    value = 0
    ones = (1 << block_size) - 1
    for bit in blocks:
        value = (value << block_size) | (ones if bit else 0)
    return value


def dual_rail_index(index, n_outer):
    """Expand every outer bit b into the pair (b, 1-b)."""
    value = 0
    for q in range(n_outer):
        bit = (index >> (n_outer - 1 - q)) & 1
        value = (value << 2) | (0b10 if bit else 0b01)
    return value


def parse_logical(spec: CodeSpec, i) -> str:
    """Accept a K-bit string, an integer index or a bit sequence."""
    if isinstance(i, str):
        bits = i
    elif isinstance(i, (int, np.integer)):
        if not 0 <= i < spec.logical_dim:
            raise DimensionError(f"Logical index {i} is outside 0..{spec.logical_dim - 1}")
        bits = format(int(i), f'0{spec.K}b')
    else:
        bits = ''.join(str(int(b)) for b in i)
    if len(bits) != spec.K or set(bits) - set('01'):
        raise DimensionError(f"{spec} needs a {spec.K}-bit logical string, got {i!r}")
    return bits


@lru_cache(maxsize=512)
def _codeword_support(w, K, dual_rail, bits):
    block_size = w + 1
    complement = ''.join('1' if b == '0' else '0' for b in bits)
    indices = []
    for parity_blocks in itertools.product((0, 1), repeat=w):
        tail = bits if sum(parity_blocks) % 2 == 0 else complement
        blocks = list(parity_blocks) + [int(b) for b in tail]
        indices.append(_block_value(blocks, block_size))
    n_outer = block_size * (w + K)
    if dual_rail:
        indices = [dual_rail_index(index, n_outer) for index in indices]
    indices = np.array(indices, dtype=np.int64)
    indices.setflags(write=False)
    return indices, 1.0 / np.sqrt(2.0 ** w)


def codeword_support(spec: CodeSpec, i):
    """Basis indices and the common amplitude of codeword ``i``."""
    return _codeword_support(spec.w, spec.K, spec.dual_rail, parse_logical(spec, i))


def codeword(spec: CodeSpec, i) -> StateVector:
    indices, amplitude = codeword_support(spec, i)
    amps = np.zeros(1 << spec.n_qubits, dtype=np.complex128)
    amps[indices] = amplitude
    return StateVector(spec.n_qubits, amps)


def codewords(spec: CodeSpec):
    return [codeword(spec, i) for i in range(spec.logical_dim)]


def apply_encoding(spec: CodeSpec, logical_amps) -> StateVector:
    """Linear map sum_i logical_amps[i] |i>_AD with no normalization check."""
    logical_amps = np.asarray(logical_amps, dtype=np.complex128).reshape(-1)
    if logical_amps.shape[0] != spec.logical_dim:
        raise DimensionError(f"{spec} needs {spec.logical_dim} logical amplitudes, got {logical_amps.shape[0]}")
    amps = np.zeros(1 << spec.n_qubits, dtype=np.complex128)
    for i, value in enumerate(logical_amps):
        if value != 0:
            indices, amplitude = codeword_support(spec, i)
            amps[indices] += value * amplitude
    return StateVector(spec.n_qubits, amps)


def encode(spec: CodeSpec, logical_amps) -> StateVector:
    """Encode a normalized logical state. Non-normalized input is rejected."""
    logical_amps = np.asarray(logical_amps, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(logical_amps)
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(f"Logical amplitudes have norm {norm!r}, expected 1")
    return apply_encoding(spec, logical_amps)


def encoding_isometry(spec: CodeSpec, max_qubits=None) -> np.ndarray:
    """Dense 2^n x 2^K isometry whose columns are the codewords."""
    limit = settings.ADSHOR_DENSE_MAX_QUBITS if max_qubits is None else max_qubits
    if spec.n_qubits > limit:
        raise QubitLimitError(f"Refusing a dense isometry for {spec.n_qubits} qubits (limit {limit})")
    return np.stack([codeword(spec, i).amps for i in range(spec.logical_dim)], axis=1)


def dual_rail_lift(pauli: PauliString, phase=None) -> PauliString:
    """Carry an outer-code Pauli onto the dual-rail register."""
    letters = []
    for letter in pauli.letters:
        letters.extend({'I': 'II', 'X': 'XX', 'Z': 'ZI', 'Y': 'YX'}[letter])
    return PauliString(''.join(letters), pauli.phase if phase is None else phase)


def _outer_z_stabilizers(spec):
    n = spec.n_outer
    size = spec.block_size
    return [
        PauliString.from_support(n, 'Z', [size * i + j, size * i + j + 1])
        for i in range(spec.n_blocks)
        for j in range(spec.w)
    ]


def z_stabilizers(spec: CodeSpec):
    """
    Z-type generators Z_{(w+1)i+j} Z_{(w+1)i+j+1}, block-major.

    Dual-rail codes get the lifted generators followed by one -ZZ check per
    rail pair.
    """
    generators = _outer_z_stabilizers(spec)
    if not spec.dual_rail:
        return generators
    lifted = [dual_rail_lift(g) for g in generators]
    pairs = [
        PauliString.from_support(spec.n_qubits, 'Z', [2 * q, 2 * q + 1], phase=-1)
        for q in range(spec.n_outer)
    ]
    return lifted + pairs


def _blocks_support(spec, blocks):
    return [q for i in blocks for q in spec.block(i)]


def x_stabilizers(spec: CodeSpec, layout='chains'):
    """
    X-type generators.

    ``chains`` pairs every parity block with all logical blocks, which is the
    listed [[12,2]] generator set. ``pairwise`` links neighbouring parity
    blocks and closes with the wide generator over blocks w-1 .. w-1+K. Both
    generate the same group.
    """
    n = spec.n_outer
    w, K = spec.w, spec.K
    logical_blocks = list(range(w, w + K))
    if layout == 'pairwise':
        blocks = [[i, i + 1] for i in range(w - 1)] + [list(range(w - 1, w + K))]
    elif layout == 'chains':
        blocks = [[i] + logical_blocks for i in range(w)]
    else:
        raise ValueError(f"Unknown X-stabilizer layout {layout!r}")
    generators = [PauliString.from_support(n, 'X', _blocks_support(spec, b)) for b in blocks]
    if spec.dual_rail:
        return [dual_rail_lift(g) for g in generators]
    return generators


def logical_ops(spec: CodeSpec) -> LogicalOperators:
    n = spec.n_outer
    w, size = spec.w, spec.block_size
    x_ops = [PauliString.from_support(n, 'X', spec.block(w + ell)) for ell in range(spec.K)]
    z_ops = [
        PauliString.from_support(n, 'Z', [size * i for i in range(w)] + [size * (w + ell)])
        for ell in range(spec.K)
    ]
    x_all = PauliString.from_support(n, 'X', spec.block(0))
    if spec.dual_rail:
        x_ops = [dual_rail_lift(p) for p in x_ops]
        z_ops = [dual_rail_lift(p) for p in z_ops]
        x_all = dual_rail_lift(x_all)
    return LogicalOperators(x=tuple(x_ops), z=tuple(z_ops), x_all=x_all)


def apply_logical_hadamard(spec: CodeSpec, state: StateVector, ell: int) -> StateVector:
    """H = (X + Z)/sqrt(2) on logical qubit ``ell``."""
    ops = logical_ops(spec)
    return (ops.x[ell].apply(state) + ops.z[ell].apply(state)).scaled(1.0 / np.sqrt(2.0))


def _support_distance(a, b):
    """Largest amplitude difference between two sparse states (indices, amps)."""
    diff = {}
    for sign, (indices, amps) in ((1, a), (-1, b)):
        for index, amp in zip(indices.tolist(), amps.tolist()):
            diff[index] = diff.get(index, 0.0) + sign * amp
    return max((abs(v) for v in diff.values()), default=0.0)


def codeword_defects(spec: CodeSpec, generators=None, logicals=None) -> dict:
    """
    Largest deviation, over every codeword, from S|i> = |i>, from
    X_l|i> = |i with bit l flipped> and from Z_l|i> = (-1)^(i_l) |i>.
    """
    generators = z_stabilizers(spec) + x_stabilizers(spec) if generators is None else list(generators)
    logicals = logical_ops(spec) if logicals is None else logicals
    supports = []
    for i in range(spec.logical_dim):
        indices, amplitude = codeword_support(spec, i)
        supports.append((np.asarray(indices, dtype=np.int64), np.full(len(indices), amplitude, dtype=np.complex128)))

    stabilizers = logical_x = logical_z = 0.0
    for i, word in enumerate(supports):
        for g in generators:
            stabilizers = max(stabilizers, _support_distance(g.apply_sparse(*word), word))
        for ell in range(spec.K):
            bit = 1 << (spec.K - 1 - ell)
            logical_x = max(logical_x, _support_distance(logicals.x[ell].apply_sparse(*word), supports[i ^ bit]))
            sign = -1.0 if i & bit else 1.0
            logical_z = max(logical_z, _support_distance(logicals.z[ell].apply_sparse(*word), (word[0], sign * word[1])))
    return {'stabilizers': stabilizers, 'logical_x': logical_x, 'logical_z': logical_z}


def excitation_number(state: StateVector, tol=1e-14):
    """Common Hamming weight of the support, or None when it is not constant."""
    indices = np.flatnonzero(np.abs(state.amps) > tol)
    if indices.size == 0:
        return None
    weights = np.unique(np.bitwise_count(indices))
    if weights.size != 1:
        return None
    return int(weights[0])


def gf2_rank(matrix) -> int:
    """Rank over GF(2) by Gaussian elimination."""
    rows = np.array(matrix, dtype=np.uint8) % 2
    if rows.size == 0:
        return 0
    rank = 0
    n_rows, n_cols = rows.shape
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if rows[r, col]), None)
        if pivot is None:
            continue
        rows[[rank, pivot]] = rows[[pivot, rank]]
        for r in range(n_rows):
            if r != rank and rows[r, col]:
                rows[r] ^= rows[rank]
        rank += 1
        if rank == n_rows:
            break
    return rank


def stabilizer_rank(spec: CodeSpec) -> int:
    generators = z_stabilizers(spec) + x_stabilizers(spec)
    return gf2_rank([g.to_symplectic() for g in generators])


def in_group_span(pauli: PauliString, generators: Sequence[PauliString]) -> bool:
    """True when ``pauli`` is a product of ``generators`` up to phase."""
    rows = [g.to_symplectic() for g in generators]
    return gf2_rank(rows + [pauli.to_symplectic()]) == gf2_rank(rows)


def equivalent_modulo(a: PauliString, b: PauliString, generators: Sequence[PauliString]) -> bool:
    return in_group_span(a * b, generators)


def layout_ascii(spec: CodeSpec) -> str:
    """Plain-text block layout: one row per block, ZZ checks drawn as '--'."""
    lines = [f"{spec.label} layout (w={spec.w}, K={spec.K})"]
    width = len(str(spec.n_outer - 1))
    for i in range(spec.n_blocks):
        role = 'parity' if i < spec.w else f'logical {i - spec.w}'
        cells = ' -- '.join(str(q).rjust(width) for q in spec.block(i))
        lines.append(f"block {i:>2} [{role:>10}]  {cells}")
    lines.append(f"X_all on block 0; X_l on block w+l; Z_l on qubit 0 of blocks 0..{spec.w - 1} and block w+l")
    if spec.dual_rail:
        lines.append("each qubit q above is the rail pair (2q, 2q+1)")
    return '\n'.join(lines)
