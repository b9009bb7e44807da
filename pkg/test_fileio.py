# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import csv

import numpy as np
import pytest

from ranafrog import fileio
from ranafrog.errors import AllZero, ParseError
from ranafrog.gpengine import ConvergenceCriteria
from ranafrog.pulse import TimeGrid, gaussian_pulse, generate_random_pulse
from ranafrog.rana import gp_baseline_retrieve
from ranafrog.tracesynth import Geometry, NoiseSpec, add_noise, synthesize_trace


def test_trace_file_round_trip(tmp_path):
    trace = synthesize_trace(generate_random_pulse(TimeGrid(64, 1.5), 2.5, 1))
    path = tmp_path / 'a.frog'
    fileio.write_trace(path, trace)
    back = fileio.read_trace(path)
    assert np.array_equal(back.values, trace.values)
    assert back.dtau == trace.dtau
    assert back.domega == trace.domega
    assert back.geometry is Geometry.pg
    assert path.read_text().startswith('FROG-PG 1 64 64 1.5 ')

def test_trace_file_normalizes_and_keeps_geometry(tmp_path):
    trace = synthesize_trace(gaussian_pulse(TimeGrid(32, 1.0), 3.0), Geometry.tg, normalize=False)
    path = tmp_path / 'b.frog'
    fileio.write_trace(path, trace.with_values(trace.values * 40.0))
    back = fileio.read_trace(path)
    assert back.geometry is Geometry.tg
    assert np.max(back.values) == 1.0

def test_noisy_trace_file_keeps_negative_values(tmp_path):
    trace = add_noise(synthesize_trace(gaussian_pulse(TimeGrid(32, 1.0), 3.0)), NoiseSpec(seed=2))
    path = tmp_path / 'noisy.frog'
    fileio.write_trace(path, trace)
    assert np.min(fileio.read_trace(path).values) < 0

def _trace_text(header, rows):
    return '\n'.join([header] + [' '.join(row) for row in rows]) + '\n'

@pytest.mark.parametrize('text', [
    '',
    'FROG-PG 1 16 16 1.0\n',
    'FROG-XX 1 16 16 1.0 0.1\n',
    'FROG-PG 2 16 16 1.0 0.1\n',
    'FROG-PG 1 16 8 1.0 0.1\n',
    'FROG-PG 1 sixteen 16 1.0 0.1\n',
    'FROG-PG 1 16 16 fast 0.1\n',
    _trace_text('FROG-PG 1 16 16 1.0 0.1', [['1.0'] * 16] * 15),
    _trace_text('FROG-PG 1 16 16 1.0 0.1', [['1.0'] * 16] * 15 + [['1.0'] * 15]),
    _trace_text('FROG-PG 1 16 16 1.0 0.1', [['1.0'] * 16] * 15 + [['x'] * 16]),
    _trace_text('FROG-PG 1 12 12 1.0 0.1', [['1.0'] * 12] * 12),
])
def test_malformed_trace_files(tmp_path, text):
    path = tmp_path / 'bad.frog'
    path.write_text(text)
    with pytest.raises(ParseError):
        fileio.read_trace(path)

def test_all_zero_trace_file(tmp_path):
    path = tmp_path / 'zero.frog'
    path.write_text(_trace_text('FROG-PG 1 16 16 1.0 0.1', [['0.0'] * 16] * 16))
    with pytest.raises(AllZero):
        fileio.read_trace(path)

def test_pulse_file_round_trip(tmp_path):
    field = generate_random_pulse(TimeGrid(64, 0.8), 2.5, 4)
    path = tmp_path / 'p.pulse.json'
    fileio.write_pulse(path, field, seed=4, target_tbp=2.5)
    back, seed, target = fileio.read_pulse(path)
    assert np.array_equal(back.samples, field.samples)
    assert back.grid == field.grid
    assert seed == 4
    assert target == 2.5

def test_pulse_record_validation():
    data = fileio.pulse_to_dict(gaussian_pulse(TimeGrid(16, 1.0), 2.0))
    data['samples_im'] = data['samples_im'][:-1]
    with pytest.raises(ParseError):
        fileio.pulse_from_dict(data)
    with pytest.raises(ParseError):
        fileio.pulse_from_dict({'n': 16})
    with pytest.raises(ParseError):
        fileio.pulse_from_dict(dict(fileio.pulse_to_dict(gaussian_pulse(TimeGrid(16, 1.0), 2.0)),
                                    dt_fs='-1.0'))

def test_bad_json(tmp_path):
    path = tmp_path / 'x.json'
    path.write_text('{')
    with pytest.raises(ParseError):
        fileio.read_json(path)

def _result():
    trace = synthesize_trace(generate_random_pulse(TimeGrid(64, 1.0), 2.5, 3))
    return gp_baseline_retrieve(trace, 4, 1, ConvergenceCriteria(1e-6, 1e-6))

def test_result_file(tmp_path):
    result = _result()
    path = tmp_path / 'r.json'
    fileio.write_result(path, result, {'seed': 1})
    data = fileio.read_json(path)
    assert data['scheme'] == 'gp'
    assert data['seed'] == 1
    assert data['iterations_total'] == 4
    assert data['converged'] is False
    assert data['metrics']['g'] == result.metrics.g
    assert 'version' in data
    assert np.array_equal(fileio.pulse_from_dict(data['field']).samples, result.field.samples)

def test_g_history_file(tmp_path):
    result = _result()
    path = tmp_path / 'h.csv'
    fileio.write_g_history(path, result)
    with path.open() as f:
        rows = list(csv.DictReader(f))
    assert [int(row['iteration']) for row in rows] == [1, 2, 3, 4]
    assert {row['level'] for row in rows} == {'full'}
    assert [float(row['g']) for row in rows] == list(result.g_histories['full'][0])

def test_jsonl(tmp_path):
    path = tmp_path / 'a.jsonl'
    fileio.append_jsonl(path, {'a': 1})
    fileio.append_jsonl(path, {'b': [1.5]})
    assert fileio.read_jsonl(path) == [{'a': 1}, {'b': [1.5]}]
    path.write_text('{"a": 1}\n{oops\n')
    with pytest.raises(ParseError):
        fileio.read_jsonl(path)
