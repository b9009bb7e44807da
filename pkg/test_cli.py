# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import csv
import json

import numpy as np
import pytest

from ranafrog import fileio, main
from ranafrog.bench import aggregate, audit_path
from ranafrog.pulse import TimeGrid, compute_stats, gaussian_pulse
from ranafrog.tracesynth import synthesize_trace


@pytest.fixture
def small_schedule(tmp_path):
    path = tmp_path / 'schedule.json'
    path.write_text(json.dumps({'tbp': 2.5, 'igs_quarter': 4, 'iters_quarter': 2,
                                'igs_half': 4, 'iters_half': 2, 'iters_full': 2}))
    return str(path)

def _simulate(prefix, *extra):
    return main(['simulate', '--tbp', '2.5', '--n', '64', '--seed', '3', '--out', str(prefix)]
                + list(extra))

def _sibling(prefix, suffix):
    return prefix.with_name(prefix.name + suffix)

def test_simulate_writes_pulse_and_traces(tmp_out):
    assert _simulate(tmp_out) == 0
    field, seed, target = fileio.read_pulse(_sibling(tmp_out, '.pulse.json'))
    assert seed == 3
    assert target == 2.5
    sidecar = fileio.read_json(_sibling(tmp_out, '.sidecar.json'))
    assert sidecar['measured_tbp'] == compute_stats(field).tbp
    for suffix in ('.clean.frog', '.noisy.frog', '.frog'):
        assert fileio.read_trace(_sibling(tmp_out, suffix)).n == 64
    noisy = fileio.read_trace(_sibling(tmp_out, '.noisy.frog'))
    clean = fileio.read_trace(_sibling(tmp_out, '.clean.frog'))
    assert not np.array_equal(noisy.values, clean.values)

def test_simulate_without_noise(tmp_out):
    assert _simulate(tmp_out, '--noise_mult', '0', '--noise_add', '0') == 0
    assert (_sibling(tmp_out, '.noisy.frog').read_bytes()
            == _sibling(tmp_out, '.clean.frog').read_bytes())

def test_simulate_accepts_dashed_noise_flags(tmp_out):
    assert _simulate(tmp_out, '--noise-mult', '0', '--noise-add', '0') == 0
    assert (_sibling(tmp_out, '.noisy.frog').read_bytes()
            == _sibling(tmp_out, '.clean.frog').read_bytes())

def test_simulate_is_reproducible(tmp_path):
    first, second = tmp_path / 'a', tmp_path / 'b'
    assert _simulate(first) == 0
    assert _simulate(second) == 0
    for suffix in ('.pulse.json', '.clean.frog', '.noisy.frog', '.frog', '.sidecar.json'):
        assert _sibling(first, suffix).read_bytes() == _sibling(second, suffix).read_bytes()

def test_simulate_warns_off_table(tmp_out, caplog):
    assert main(['simulate', '--tbp', '2.5', '--n', '128', '--out', str(tmp_out)]) == 0
    assert 'off the schedule table' in caplog.text

def test_simulate_rejects_bad_grid(tmp_out):
    assert main(['simulate', '--tbp', '2.5', '--n', '48', '--out', str(tmp_out)]) == 2

def test_retrieve_gp_is_deterministic(tmp_path, tmp_out):
    assert _simulate(tmp_out) == 0
    trace = str(_sibling(tmp_out, '.frog'))
    results = []
    for name in ('a.json', 'b.json'):
        out = tmp_path / name
        assert main(['retrieve', trace, '--scheme', 'gp', '--max_iterations', '5', '--seed', '2',
                     '--reference', str(_sibling(tmp_out, '.pulse.json')),
                     '--out', str(out)]) == 0
        results.append(fileio.read_json(out))
    a, b = results
    assert a['scheme'] == 'gp'
    assert a['iterations_total'] <= 5
    assert a['field'] == b['field']
    assert a['field_error'] == b['field_error']
    assert (tmp_path / 'a.retrieved.frog').exists()
    assert (tmp_path / 'a.spectrum.csv').exists()
    assert fileio.read_json(tmp_path / 'a.spectrum.json')['p'] == 0.73

def test_retrieve_rana_with_schedule_file(tmp_path, tmp_out, small_schedule):
    assert _simulate(tmp_out) == 0
    out = tmp_path / 'r.json'
    assert main(['--schedule', small_schedule, 'retrieve', str(_sibling(tmp_out, '.frog')),
                 '--diagnostics', '--threads', '2', '--out', str(out)]) == 0
    result = fileio.read_json(out)
    assert result['scheme'] == 'rana'
    assert result['level_iterations']['quarter'] <= 8
    assert len(result['pool_g']['half']) == 4
    with (tmp_path / 'r.ghistory.csv').open() as f:
        levels = {row['level'] for row in csv.DictReader(f)}
    assert levels == {'quarter', 'half', 'full'}

def test_retrieve_bad_input(tmp_path):
    bad = tmp_path / 'bad.frog'
    bad.write_text('FROG-PG 1 16 16 1.0\n')
    assert main(['retrieve', str(bad), '--scheme', 'gp', '--out', str(tmp_path / 'r.json')]) == 2
    missing = tmp_path / 'missing.frog'
    assert main(['retrieve', str(missing), '--out', str(tmp_path / 'r.json')]) == 3

def test_retrieve_trace_without_schedule_row(tmp_path):
    trace = tmp_path / 'small.frog'
    fileio.write_trace(trace, synthesize_trace(gaussian_pulse(TimeGrid(32, 1.0), 3.0)))
    assert main(['retrieve', str(trace), '--out', str(tmp_path / 'r.json')]) == 2

    # The gp schemes only need convergence criteria
    out = tmp_path / 'gp.json'
    assert main(['retrieve', str(trace), '--scheme', 'gp', '--max_iterations', '3',
                 '--out', str(out)]) == 0
    assert fileio.read_json(out)['iterations_total'] <= 3

def test_calibrate_needs_ten_pulses(tmp_out):
    assert main(['calibrate_p', '--count', '5', '--out', str(tmp_out)]) == 2

def test_calibrate_writes_curves(tmp_out):
    assert main(['calibrate_p', '--tbps', '2.5', '--count', '10', '--n', '128',
                 '--p_values', '0.7', '0.75', '--out', str(tmp_out)]) == 0
    summary = fileio.read_json(tmp_out.with_suffix('.json'))
    assert summary['p_star'] in (0.7, 0.75)
    assert summary['count_per_tbp'] == 10
    with tmp_out.with_suffix('.csv').open() as f:
        rows = list(csv.DictReader(f))
    assert [float(row['p']) for row in rows] == [0.7, 0.75]

@pytest.mark.slow
def test_calibrate_default_tbps_on_default_grid(tmp_out):
    assert main(['calibrate_p', '--count', '10', '--p_values', '0.73', '--threads', '2',
                 '--out', str(tmp_out)]) == 0
    summary = fileio.read_json(tmp_out.with_suffix('.json'))
    assert sorted(summary['per_tbp']) == ['10.0', '2.0', '5.0']

def test_bench_audit_reproduces_report(tmp_out, small_schedule):
    assert main(['--schedule', small_schedule, 'bench', '--tbps', '2.5', '--count', '2',
                 '--max_iterations', '5', '--ablation', '--out', str(tmp_out)]) == 0
    records = fileio.read_jsonl(audit_path(tmp_out))
    assert [r['index'] for r in records] == [0, 1]
    with tmp_out.with_suffix('.csv').open() as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 1
    row = aggregate(records, 2.5, 64)
    assert float(rows[0]['rana_convergence_fraction']) == row.rana_convergence_fraction
    assert float(rows[0]['gp_first_guess_fraction']) == row.gp_first_guess_fraction
    assert float(rows[0]['published_gp_fraction']) == 0.907
    summary = fileio.read_json(tmp_out.with_suffix('.json'))
    assert summary['complete'] is True
    assert summary['environment']['threads'] == 1
