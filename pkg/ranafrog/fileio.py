# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import csv
import json
import logging
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ranafrog.errors import FrogError, ParseError
from ranafrog.pulse import ComplexField, TimeGrid
from ranafrog.tracesynth import FrogTrace, Geometry
from ranafrog.version import get_version_string

logger = logging.getLogger(__name__)

TRACE_TAGS = {Geometry.pg: 'FROG-PG', Geometry.tg: 'FROG-TG'}
TRACE_FORMAT_VERSION = '1'

# Full double precision text for a number
def _number(value):
    return repr(float(value))

def _parse_number(text, what):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ParseError('Invalid number {0!r} in {1}'.format(text, what))

def write_json(path, data):
    'JSON document with sorted keys and the package version added'
    data = dict(data)
    data.setdefault('version', get_version_string())
    with Path(path).open('w') as data_file:
        json.dump(data, data_file, sort_keys=True, indent=4)

def read_json(path):
    with Path(path).open('r') as data_file:
        try:
            return json.load(data_file)
        except json.JSONDecodeError as e:
            raise ParseError('{0} is not valid JSON: {1}'.format(path, e)) from e


# Pulses

def pulse_to_dict(field, seed=None, target_tbp=None):
    data = {
        'n': field.grid.n,
        'dt_fs': _number(field.grid.dt),
        'samples_re': [_number(v) for v in np.real(field.samples)],
        'samples_im': [_number(v) for v in np.imag(field.samples)],
    }
    if seed is not None:
        data['seed'] = int(seed)
    if target_tbp is not None:
        data['target_tbp'] = _number(target_tbp)
    return data

def pulse_from_dict(data):
    try:
        n = int(data['n'])
        dt = _parse_number(data['dt_fs'], 'dt_fs')
        real = [_parse_number(v, 'samples_re') for v in data['samples_re']]
        imag = [_parse_number(v, 'samples_im') for v in data['samples_im']]
    except (KeyError, TypeError) as e:
        raise ParseError('Pulse record is missing {0}'.format(e)) from e
    if len(real) != n or len(imag) != n:
        raise ParseError('Pulse record declares {0} samples but holds {1}/{2}'.format(
            n, len(real), len(imag)))
    try:
        grid = TimeGrid(n, dt)
    except ValueError as e:
        raise ParseError(str(e)) from e
    return ComplexField(grid, np.array(real) + 1j * np.array(imag))

def write_pulse(path, field, seed=None, target_tbp=None):
    with Path(path).open('w') as data_file:
        json.dump(pulse_to_dict(field, seed, target_tbp), data_file, sort_keys=True, indent=4)

def read_pulse(path):
    'Returns the field and the optional seed and target TBP of a pulse file'
    data = read_json(path)
    target = data.get('target_tbp')
    return (pulse_from_dict(data), data.get('seed'),
            None if target is None else _parse_number(target, 'target_tbp'))


# Traces

def write_trace(path, trace):
    'Text trace file, values peak-normalized, one row per frequency bin'
    trace = trace.peak_normalized()
    lines = [' '.join((TRACE_TAGS[trace.geometry], TRACE_FORMAT_VERSION, str(trace.n),
                       str(trace.n), _number(trace.dtau), _number(trace.domega)))]
    for row in trace.values:
        lines.append(' '.join(_number(v) for v in row))
    Path(path).write_text('\n'.join(lines) + '\n')

def read_trace(path):
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines:
        raise ParseError('{0} is empty'.format(path))
    header = lines[0].split()
    if len(header) != 6:
        raise ParseError('Trace header needs 6 fields, got {0}'.format(len(header)))
    tag, version, rows, cols = header[:4]
    geometries = {value: key for key, value in TRACE_TAGS.items()}
    if tag not in geometries:
        raise ParseError('Unknown trace tag {0}'.format(tag))
    if version != TRACE_FORMAT_VERSION:
        raise ParseError('Unsupported trace format version {0}'.format(version))
    try:
        n, m = int(rows), int(cols)
    except ValueError:
        raise ParseError('Trace dimensions {0} x {1} are not integers'.format(rows, cols))
    if n != m:
        raise ParseError('Trace must be square, header says {0} x {1}'.format(n, m))
    dtau = _parse_number(header[4], 'trace header')
    domega = _parse_number(header[5], 'trace header')
    body = lines[1:]
    if len(body) != n:
        raise ParseError('Trace header declares {0} rows, file has {1}'.format(n, len(body)))
    values = []
    for index, line in enumerate(body):
        row = [_parse_number(v, 'trace row {0}'.format(index)) for v in line.split()]
        if len(row) != n:
            raise ParseError('Trace row {0} has {1} values, expected {2}'.format(
                index, len(row), n))
        values.append(row)
    try:
        trace = FrogTrace(np.array(values), dtau, domega, geometries[tag])
        return trace.peak_normalized()
    except FrogError:
        raise
    except ValueError as e:
        raise ParseError(str(e)) from e


# Spectra, results and diagnostics

def write_spectrum(path, spectrum, metadata):
    'Two-column CSV (omega, intensity) plus a JSON metadata file next to it'
    path = Path(path)
    with path.open('w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['omega_rad_per_fs', 'intensity'])
        for omega, intensity in zip(spectrum.frequencies, spectrum.intensity):
            writer.writerow([_number(omega), _number(intensity)])
    write_json(path.with_suffix('.json'), metadata)

def result_to_dict(result, extra=None):
    data = {
        'scheme': result.scheme,
        'converged': bool(result.converged),
        'metrics': {key: float(value) for key, value in asdict(result.metrics).items()},
        'iterations_total': int(result.iterations_total),
        'wall_time_s': float(result.wall_time),
        'level_g_history': {k: float(v) for k, v in result.level_g_history.items()},
        'level_iterations': {k: int(v) for k, v in result.level_iterations.items()},
        'pool_g': {k: [float(g) for g in v] for k, v in result.pool_g.items()},
        'field': pulse_to_dict(result.field),
    }
    if extra:
        data.update(extra)
    return data

def write_result(path, result, extra=None):
    write_json(path, result_to_dict(result, extra))

def write_g_history(path, result):
    'Per-iteration G of every candidate as CSV rows (level, candidate, iteration, g)'
    with Path(path).open('w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['level', 'candidate', 'iteration', 'g'])
        for level, histories in result.g_histories.items():
            for candidate, history in enumerate(histories):
                for iteration, g in enumerate(history, start=1):
                    writer.writerow([level, candidate, iteration, _number(g)])

def write_rows_csv(path, rows):
    'List of flat dictionaries as CSV, columns from the first row'
    if not rows:
        Path(path).write_text('')
        return
    with Path(path).open('w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)

def append_jsonl(path, record):
    with Path(path).open('a') as f:
        f.write(json.dumps(record, sort_keys=True) + '\n')

def read_jsonl(path):
    records = []
    for index, line in enumerate(Path(path).read_text().splitlines()):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise ParseError('Line {0} of {1} is not valid JSON: {2}'.format(index + 1, path, e))
    return records
