"""
Machine-diffable renderings of the reference tables.

Coefficients are kept as sympy expressions in gamma and evaluated at the
requested rate; every rendered value is cross-checked against the
state-vector simulation and mismatches land in ``failures``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .codes import CodeSpec, codeword, codeword_support
from .decoder import PROCEDURES_622, circuit_recovery_622, extract_syndrome_circuit
from .noise import KrausString, iter_error_strings
from .qla import bitstring
from .verify import rate_formulas, rate_tables

logger = logging.getLogger(__name__)

GAMMA = sp.Symbol('gamma', positive=True)
CHECK_TOL = 1e-12
TABLE_IDS = ('I', 'II', 'III', 'IV', 'V', 'VI', 'VII')

ARTIFICIAL_FACTORS = {
    'same': sp.sqrt(1 - GAMMA),
    'squared': 1 - GAMMA,
}


@dataclass
class TableRendering:
    table_id: str
    title: str
    columns: tuple
    gamma: float = None
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_json(self):
        data = {
            'table': self.table_id,
            'title': self.title,
            'gamma': self.gamma,
            'columns': list(self.columns),
            'rows': self.rows,
            'failures': self.failures,
        }
        if self.traces:
            data['traces'] = self.traces
        return data

    def csv_rows(self):
        return [[row.get(column) for column in self.columns] for row in self.rows]


def _value(expr, gamma):
    if gamma is not None:
        expr = sp.sympify(expr).subs(GAMMA, gamma)
    return complex(sp.N(expr, 30))


def _fmt(expr):
    return sp.sstr(sp.simplify(expr))


def term_coefficient(spec: CodeSpec, term: int, error_mask: int):
    """Symbolic amplitude of A_k on one codeword term."""
    survivors = bin(term & ~error_mask).count('1')
    weight = bin(error_mask).count('1')
    return sp.sqrt(GAMMA) ** weight * sp.sqrt(1 - GAMMA) ** survivors / sp.sqrt(2) ** spec.w


def damped_terms(spec: CodeSpec, i, error):
    """(ket index, symbolic coefficient) of A_k|i>, ascending ket index."""
    support, _ = codeword_support(spec, i)
    mask = error.mask
    terms = [(int(t) & ~mask, term_coefficient(spec, int(t), mask)) for t in support if int(t) & mask == mask]
    return sorted(terms)


def _codeword_table(table_id, title, specs, gamma):
    rendering = TableRendering(table_id, title, ('spec', 'i', 'ket', 'coefficient', 'value'), gamma)
    for spec in specs:
        for i, label in enumerate(spec.logical_labels()):
            state = codeword(spec, i)
            support, amplitude = codeword_support(spec, i)
            coefficient = 1 / sp.sqrt(2) ** spec.w
            for index in sorted(int(s) for s in support):
                value = _value(coefficient, gamma)
                if abs(state.amps[index] - value) > CHECK_TOL:
                    rendering.failures.append(f"{spec.label} |{label}>: amplitude of {bitstring(index, spec.n_qubits)} differs")
                rendering.rows.append({
                    'spec': spec.label,
                    'i': label,
                    'ket': bitstring(index, spec.n_qubits),
                    'coefficient': _fmt(coefficient),
                    'value': value.real,
                })
            if np.count_nonzero(state.amps) != len(support):
                rendering.failures.append(f"{spec.label} |{label}>: support size differs")
    return rendering


def table_codewords_k1(gamma=None):
    return _codeword_table('III', 'Codewords of the [[4,1]] and [[9,1]] codes', [CodeSpec(1, 1), CodeSpec(2, 1)], gamma)


def table_codewords_multi(gamma=None):
    specs = [CodeSpec(1, K) for K in (1, 2, 3)] + [CodeSpec(2, K) for K in (1, 2)]
    return _codeword_table('IV', 'Codewords of the [[2(1+K),K]] and [[3(2+K),K]] codes', specs, gamma)


SPEC_622 = CodeSpec(1, 2)


def table_error_states(gamma):
    """A_k|i> for the seven damping patterns of weight <= 1 on [[6,2]]."""
    spec = SPEC_622
    rendering = TableRendering('V', 'Damped codewords of the [[6,2]] code', ('k', 'i', 'ket', 'coefficient', 'value'), gamma)
    for error in iter_error_strings(spec.n_qubits, spec.w):
        kraus = KrausString(error, gamma)
        for i, label in enumerate(spec.logical_labels()):
            simulated = kraus.apply(codeword(spec, i))
            terms = damped_terms(spec, i, error)
            for ket, coefficient in terms:
                value = _value(coefficient, gamma)
                if abs(simulated.amps[ket] - value) > CHECK_TOL:
                    rendering.failures.append(f"k={error} i={label}: amplitude of {bitstring(ket, 6)} differs")
            if np.count_nonzero(simulated.amps) != len(terms):
                rendering.failures.append(f"k={error} i={label}: support size differs")
            rendering.rows.append({
                'k': error.bits,
                'i': label,
                'ket': ' + '.join(bitstring(ket, 6) for ket, _ in terms),
                'coefficient': '; '.join(_fmt(c) for _, c in terms),
                'value': '; '.join(format(_value(c, gamma).real, '.17g') for _, c in terms),
            })
    return rendering


def extracted_terms(spec: CodeSpec, i, error):
    """Syndrome and (remaining ket on qubits 0,2,4..., coefficient) after CNOT extraction."""
    terms = []
    syndromes = set()
    n = spec.n_qubits
    for ket, coefficient in damped_terms(spec, i, error):
        bits = bitstring(ket, n)
        syndromes.add(''.join(str(int(bits[2 * b]) ^ int(bits[2 * b + 1])) for b in range(spec.n_blocks)))
        terms.append((bits[0::2], coefficient))
    if len(syndromes) != 1:
        raise ValueError(f"Error {error} on codeword {i} does not give a single syndrome")
    return syndromes.pop(), terms


def table_syndromes(gamma):
    spec = SPEC_622
    rendering = TableRendering('VI', 'Post-extraction states of the [[6,2]] code',
                               ('k', 'syndrome', 'i', 'ket', 'coefficient', 'value'), gamma)
    for error in iter_error_strings(spec.n_qubits, spec.w):
        kraus = KrausString(error, gamma)
        for i, label in enumerate(spec.logical_labels()):
            syndrome, terms = extracted_terms(spec, i, error)
            simulated = dict(extract_syndrome_circuit(spec, kraus.apply(codeword(spec, i))))
            if set(simulated) != {syndrome}:
                rendering.failures.append(f"k={error} i={label}: circuit syndrome {sorted(simulated)} != {syndrome}")
            else:
                for ket, coefficient in terms:
                    if abs(simulated[syndrome].amps[int(ket, 2)] - _value(coefficient, gamma)) > CHECK_TOL:
                        rendering.failures.append(f"k={error} i={label}: amplitude of {ket} differs")
            rendering.rows.append({
                'k': error.bits,
                'syndrome': syndrome,
                'i': label,
                'ket': ' + '.join(ket for ket, _ in terms),
                'coefficient': '; '.join(_fmt(c) for _, c in terms),
                'value': '; '.join(format(_value(c, gamma).real, '.17g') for _, c in terms),
            })
    return rendering


def symbolic_recovery(procedure, ket, coefficient, labels=(0, 2, 4)):
    """Run a recovery procedure on one basis ket with a symbolic amplitude."""
    bits = {q: int(b) for q, b in zip(labels, ket)}
    for step in procedure.steps:
        if step.kind == 'cnot':
            control, target = step.qubits
            bits[target] ^= bits[control]
        elif step.kind == 'x':
            for q in step.qubits:
                bits[q] ^= 1
        elif step.kind == 'discard':
            del bits[step.qubits[0]]
        elif step.kind == 'artificial':
            for q in step.qubits:
                if bits[q]:
                    coefficient = coefficient * ARTIFICIAL_FACTORS[step.rule]
        else:
            raise ValueError(f"Unknown recovery step {step.kind!r}")
    return ''.join(str(bits[q]) for q in procedure.output), coefficient


def table_recovered(gamma):
    spec = SPEC_622
    rendering = TableRendering('VII', 'Recovered logical states of the [[6,2]] code',
                               ('k', 'syndrome', 'i', 'ket', 'coefficient', 'leading', 'value', 'recovered'), gamma)
    for error in iter_error_strings(spec.n_qubits, spec.w):
        kraus = KrausString(error, gamma)
        for i, label in enumerate(spec.logical_labels()):
            syndrome, terms = extracted_terms(spec, i, error)
            procedure = PROCEDURES_622[syndrome]
            outputs = {}
            for ket, coefficient in terms:
                out, value = symbolic_recovery(procedure, ket, coefficient)
                outputs[out] = outputs.get(out, 0) + value

            result = circuit_recovery_622(kraus.apply(codeword(spec, i)), gamma, syndrome)
            simulated = result.logical
            for out, coefficient in outputs.items():
                if abs(simulated[int(out, 2)] - _value(coefficient, gamma)) > CHECK_TOL:
                    rendering.failures.append(f"k={error} i={label}: recovered amplitude of {out} differs")
            rendering.traces.append({'k': error.bits, 'i': label, **result.to_json()})
            recovered = spec.logical_labels()[result.recovered_index]
            if recovered != label:
                rendering.failures.append(f"k={error} i={label}: recovered {recovered}")
            for out, coefficient in sorted(outputs.items()):
                rendering.rows.append({
                    'k': error.bits,
                    'syndrome': syndrome,
                    'i': label,
                    'ket': out,
                    'coefficient': _fmt(coefficient),
                    'leading': sp.sstr(sp.series(coefficient, GAMMA, 0, 2).removeO()) if error.weight == 0 else _fmt(coefficient),
                    'value': _value(coefficient, gamma).real,
                    'recovered': recovered,
                })
    return rendering


def table_rate_formulas(gamma=None, w=1, K=1):
    rendering = TableRendering('I', 'Rates of amplitude-damping codes',
                               ('code', 'correction_weight', 'rate', 'asymptotic_rate', 'value'), gamma)
    for formula in rate_formulas():
        rendering.rows.append({
            'code': formula.name,
            'correction_weight': str(formula.correction_weight),
            'rate': sp.sstr(formula.rate),
            'asymptotic_rate': sp.sstr(sp.simplify(formula.limit(w))),
            'value': float(formula.value(w, K)),
        })
    return rendering


def table_qubit_counts(gamma=None):
    rendering = TableRendering('II', 'Physical qubits (N1, N2) by (w, K)',
                               ('w', 'K', 'N1', 'N2', 'rate', 'fewer_qubits', 'n1_le_n2'), gamma)
    for row in rate_tables():
        if sp.Rational(row.K, row.N1) != row.rate:
            rendering.failures.append(f"(w={row.w}, K={row.K}): rate is not K/N1")
        rendering.rows.append({
            'w': row.w,
            'K': row.K,
            'N1': row.N1,
            'N2': row.N2,
            'rate': str(row.rate),
            'fewer_qubits': row.fewer_qubits,
            'n1_le_n2': row.n1_le_n2,
        })
    return rendering


RENDERERS = {
    'I': table_rate_formulas,
    'II': table_qubit_counts,
    'III': table_codewords_k1,
    'IV': table_codewords_multi,
    'V': table_error_states,
    'VI': table_syndromes,
    'VII': table_recovered,
}


def render_table(table_id, gamma=0.1) -> TableRendering:
    table_id = str(table_id).upper()
    if table_id not in RENDERERS:
        raise ValueError(f"Unknown table {table_id!r}, expected one of {TABLE_IDS}")
    if table_id in ('V', 'VI', 'VII') and not 0.0 < float(gamma) < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma!r}")
    rendering = RENDERERS[table_id](float(gamma))
    if rendering.failures:
        logger.warning(f"Table {table_id}: {len(rendering.failures)} mismatches")
    else:
        logger.info(f"Table {table_id} rendered at gamma={gamma}: {len(rendering.rows)} rows")
    return rendering
