# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import time

import pytest

from ranafrog import bench, fileio
from ranafrog.bench import (BenchConfig, PUBLISHED_GP_CONVERGENCE, aggregate, audit_path,
                            build_report, failed_record, pulse_seeds, run_bench)
from ranafrog.schedules import schedule_for
from ranafrog.intervaltimer import IntervalTimer, ProgressCounter


def _record(index, rana, gp, gp_time, aided=None):
    record = {'tbp': 20.0, 'n': 512, 'tbp_index': 0, 'index': index, 'failed': False,
              'rana_converged': rana, 'rana_g': 0.001 * (index + 1), 'rana_g_prime': 0.05,
              'rana_time_s': 2.0, 'gp_converged': gp, 'gp_g': 0.02, 'gp_g_prime': 0.2,
              'gp_time_s': gp_time, 'spectrum_rms': 0.01, 'g_prime_cutoff': 0.1,
              'noise_g_prime': 0.07}
    if aided is not None:
        record['gp_spectrum_converged'] = aided
    return record

def test_aggregate_fractions_and_times():
    records = [_record(0, True, True, 1.0, True), _record(1, True, False, 9.0, True),
               _record(2, False, True, 3.0, False), _record(3, True, False, 9.0, True)]
    row = aggregate(records, 20.0, 512)
    assert row.count == 4
    assert row.rana_convergence_fraction == 0.75
    assert row.gp_first_guess_fraction == 0.5
    assert row.gp_spectrum_fraction == 0.75
    # Non-converging baseline runs are left out of its mean time
    assert row.mean_time_gp_s == 2.0
    assert row.time_ratio == 1.0
    assert row.published_gp_fraction == PUBLISHED_GP_CONVERGENCE[20]
    assert len(row.g_quantiles) == 3

def test_aggregate_without_converged_baseline():
    row = aggregate([_record(0, True, False, 5.0)], 20.0, 512)
    assert row.mean_time_gp_s is None
    assert row.time_ratio is None
    assert row.gp_spectrum_fraction is None

def test_flat_row_columns():
    flat = aggregate([_record(0, True, True, 1.0)], 20.0, 512).flat()
    assert {'g_q10', 'g_q50', 'g_q90', 'spectrum_rms_q10', 'g_prime_q50', 'gp_g_prime_q50',
            'noise_g_prime_q90'} <= set(flat)
    assert 'g_quantiles' not in flat
    assert flat['g_prime_cutoff'] == 0.1
    assert flat['gp_g_prime_q50'] == 0.2

def test_flat_row_keeps_columns_without_records():
    schedule = schedule_for(20)
    empty = aggregate([failed_record(schedule, 0, 0, ValueError('x'))], 20.0, 512).flat()
    full = aggregate([_record(0, True, True, 1.0)], 20.0, 512).flat()
    assert list(empty) == list(full)
    assert empty['g_q50'] is None

def test_aggregate_leaves_out_failed_pulses():
    schedule = schedule_for(20)
    records = [_record(0, True, True, 1.0), failed_record(schedule, 0, 1, ValueError('bad')),
               _record(2, False, True, 1.0)]
    row = aggregate(records, 20.0, 512)
    assert row.count == 2
    assert row.failed == 1
    assert row.rana_convergence_fraction == 0.5
    report = build_report(records, BenchConfig(tbps=[20], count=3))
    assert any('1 pulses failed' in note for note in report.notes)

def test_report_rows_follow_tbp_order():
    config = BenchConfig(tbps=[20, 5], count=1, ablation=True)
    records = [dict(_record(0, True, True, 1.0), tbp_index=1, tbp=5.0, n=128),
               _record(0, False, True, 1.0)]
    report = build_report(records, config, complete=False)
    assert [row.tbp for row in report.rows] == [20.0, 5.0]
    assert not report.complete
    assert any('ablation' in note for note in report.notes)
    assert any('interrupted' in note for note in report.notes)

def test_pulse_seeds_are_independent():
    a = pulse_seeds(0, 0, 0)
    assert len(set(a)) == 4
    assert a == pulse_seeds(0, 0, 0)
    assert a != pulse_seeds(0, 0, 1)
    assert a != pulse_seeds(0, 1, 0)

def test_bench_config_validation():
    with pytest.raises(ValueError):
        BenchConfig(tbps=[2.5], count=0)
    with pytest.raises(ValueError):
        BenchConfig(tbps=[2.5], count=1, threads=0)

def test_progress_counter():
    counter = ProgressCounter(3)
    counter.increment()
    counter.increment()
    assert counter.get_done() == 2
    assert counter.get_rate() > 0

def test_interval_timer_calls_until_stopped():
    calls = []
    with IntervalTimer(0.01, calls.append, 1) as timer:
        time.sleep(0.2)
    count = timer.get_count()
    assert count >= 1
    assert len(calls) == count
    time.sleep(0.05)
    assert len(calls) == count

def test_bench_keeps_going_after_a_failing_pulse(tmp_out, monkeypatch):
    def fake_run_pulse(config, schedule, tbp_index, index):
        if index == 1:
            raise RuntimeError('diverged')
        return dict(_record(index, True, True, 1.0), tbp=schedule.tbp_label, n=schedule.n_full)

    monkeypatch.setattr(bench, 'run_pulse', fake_run_pulse)
    report = run_bench(BenchConfig(tbps=[2.5], count=3), tmp_out)
    records = fileio.read_jsonl(audit_path(tmp_out))
    assert [r['index'] for r in records] == [0, 1, 2]
    assert [r['failed'] for r in records] == [False, True, False]
    assert 'diverged' in records[1]['error']
    assert report.rows[0].failed == 1
    assert report.rows[0].count == 2
    assert tmp_out.with_suffix('.csv').exists()
    assert fileio.read_json(tmp_out.with_suffix('.json'))['complete'] is True
