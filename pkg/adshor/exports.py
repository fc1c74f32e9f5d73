"""
JSON, JSON-lines and CSV writers for reports.

CSV numbers use 17 significant digits with '.' decimals regardless of
locale. JSON floats smaller than 1e-300 in magnitude are written as
strings so no reader flushes them to zero.
"""

import csv
import io
import json
import math

import numpy as np
import sympy as sp

from .codes import CodeSpec, codeword

SWEEP_HEADER = ('spec', 'gamma', 'metric', 'value', 'tolerance', 'pass')
UNDERFLOW = 1e-300
AMPLITUDE_TOL = 1e-14


def json_number(value):
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        return repr(value)
    if value != 0.0 and abs(value) < UNDERFLOW:
        return repr(value)
    return value


def clean(payload):
    """Turn numpy, sympy and complex values into JSON-safe data."""
    if isinstance(payload, dict):
        return {str(key): clean(value) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [clean(value) for value in payload]
    if isinstance(payload, np.ndarray):
        return clean(payload.tolist())
    if isinstance(payload, (bool, np.bool_)):
        return bool(payload)
    if isinstance(payload, (int, np.integer)):
        return int(payload)
    if isinstance(payload, (complex, np.complexfloating)):
        return [json_number(payload.real), json_number(payload.imag)]
    if isinstance(payload, (float, np.floating)):
        return json_number(payload)
    if isinstance(payload, sp.Basic):
        return str(payload)
    return payload


def to_json(payload, indent=2):
    return json.dumps(clean(payload), sort_keys=True, indent=indent)


def to_json_lines(records):
    return ''.join(json.dumps(clean(record), sort_keys=True) + '\n' for record in records)


def csv_value(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return format(float(value), '.17g')
    if isinstance(value, (complex, np.complexfloating)):
        return f"{format(value.real, '.17g')}{format(value.imag, '+.17g')}j"
    return str(value)


def to_csv(rows, header=SWEEP_HEADER):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        if isinstance(row, dict):
            row = [row.get(column) for column in header]
        writer.writerow([csv_value(value) for value in row])
    return buffer.getvalue()


def codeword_json(spec: CodeSpec, i):
    state = codeword(spec, i)
    return {
        'spec': spec.label,
        'w': spec.w,
        'K': spec.K,
        'dual_rail': spec.dual_rail,
        'i': spec.logical_labels()[i] if isinstance(i, int) else i,
        'amplitudes': [[index, amp.real, amp.imag] for index, amp in state.support(AMPLITUDE_TOL)],
    }


def pauli_json(paulis):
    return [{'string': str(p), 'letters': p.letters, 'phase': p.phase} for p in paulis]
