# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


def _prefixed(prefix, suffix):
    prefix = Path(prefix)
    return prefix.with_name(prefix.name + suffix)

def _warn_off_table(tbp, n, table):
    from ranafrog import schedules
    expected = schedules.expected_n(tbp, table)
    if expected != n:
        logger.warning('TBP %s on a %d-point grid is off the schedule table pairing (%s)',
                       tbp, n, 'none' if expected is None else 'n={0}'.format(expected))

def cmd_simulate(args):
    from ranafrog import fileio, schedules
    from ranafrog.pulse import TimeGrid, compute_stats, generate_random_pulse
    from ranafrog.tracesynth import NoiseSpec, add_noise, preprocess, synthesize_trace

    _warn_off_table(args.tbp, args.n, schedules.load_schedule(args.schedule))
    field = generate_random_pulse(TimeGrid(args.n, args.dt), args.tbp, args.seed)
    noise = NoiseSpec(args.noise_mult, args.noise_add, args.seed)
    clean = synthesize_trace(field, args.geometry)
    noisy = add_noise(clean, noise)
    processed = preprocess(noisy)

    fileio.write_pulse(_prefixed(args.out, '.pulse.json'), field, args.seed, args.tbp)
    fileio.write_trace(_prefixed(args.out, '.clean.frog'), clean)
    fileio.write_trace(_prefixed(args.out, '.noisy.frog'), noisy)
    fileio.write_trace(_prefixed(args.out, '.frog'), processed)
    stats = compute_stats(field)
    fileio.write_json(_prefixed(args.out, '.sidecar.json'), {
        'seed': args.seed,
        'target_tbp': args.tbp,
        'measured_tbp': stats.tbp,
        'n': args.n,
        'dt_fs': args.dt,
        'geometry': clean.geometry.value,
        'noise': {'multiplicative_fraction': noise.multiplicative_fraction,
                  'additive_fraction': noise.additive_fraction,
                  'seed': noise.seed},
    })
    print('Pulse TBP: {0:.4f} (target {1})'.format(stats.tbp, args.tbp))
    return 0

def cmd_retrieve(args):
    from ranafrog import fileio, schedules
    from ranafrog.marginals import resample_robustness_check
    from ranafrog.pulse import compare_fields
    from ranafrog.rana import gp_baseline_retrieve, rana_retrieve
    from ranafrog.tracesynth import synthesize_trace

    trace = fileio.read_trace(args.trace)
    table = schedules.load_schedule(args.schedule)
    if args.scheme == 'rana':
        schedule = schedules.schedule_for_n(trace.n, table)
        result = rana_retrieve(trace, schedule, args.p, args.seed, args.workers)
    else:
        criteria = schedules.criteria_for_n(trace.n, table)
        result = gp_baseline_retrieve(trace, args.max_iterations, args.seed, criteria,
                                      with_retrieved_spectrum=args.scheme == 'gp+spectrum',
                                      p=args.p)

    out = Path(args.out)
    extra = {'trace_file': str(args.trace), 'p': args.p, 'seed': args.seed}
    if args.reference:
        reference, _, _ = fileio.read_pulse(args.reference)
        extra['field_error'] = compare_fields(reference, result.field)
    fileio.write_result(out, result, extra)
    fileio.write_trace(out.with_suffix('.retrieved.frog'),
                       synthesize_trace(result.field, trace.geometry))
    spectrum = resample_robustness_check(trace, args.stretch, args.p)
    fileio.write_spectrum(out.with_suffix('.spectrum.csv'), spectrum,
                          {'p': args.p, 'delta': 1e-3, 'stretch': args.stretch,
                           'trace_file': str(args.trace)})
    if args.diagnostics:
        fileio.write_g_history(out.with_suffix('.ghistory.csv'), result)

    print('{0}: G {1:.5f}, G\' {2:.4f}, converged {3}, {4} iterations, {5:.2f} s'.format(
        result.scheme, result.metrics.g, result.metrics.g_prime, result.converged,
        result.iterations_total, result.wall_time))
    return 0

def cmd_calibrate_p(args):
    from ranafrog import fileio
    from ranafrog.marginals import DEFAULT_P_GRID, best_p, calibrate_p
    from ranafrog.pulse import TimeGrid, generate_random_pulse

    if args.count < 10:
        raise ValueError('Calibration needs at least 10 pulses per TBP')
    p_grid = np.asarray(args.p_values if args.p_values else DEFAULT_P_GRID, dtype=float)
    grid = TimeGrid(args.n, args.dt)
    curves, summary = {}, {'per_tbp': {}}
    for tbp_index, tbp in enumerate(args.tbps):
        seeds = [int(np.random.SeedSequence([args.seed, tbp_index, i]).generate_state(1)[0])
                 for i in range(args.count)]
        pulses = [generate_random_pulse(grid, tbp, s) for s in seeds]
        calibration = calibrate_p(pulses, p_grid, args.workers)
        curves[tbp] = calibration.mean_rms
        summary['per_tbp'][str(tbp)] = calibration.p_star
        logger.info('TBP %s: best p %.2f', tbp, calibration.p_star)

    pooled = np.mean([curves[tbp] for tbp in args.tbps], axis=0)
    summary['p_star'] = best_p(p_grid, pooled)
    summary['count_per_tbp'] = args.count
    rows = []
    for i, p in enumerate(p_grid):
        row = {'p': float(p)}
        row.update({'mean_rms_tbp_{0}'.format(tbp): float(curves[tbp][i]) for tbp in args.tbps})
        row['mean_rms_pooled'] = float(pooled[i])
        rows.append(row)
    out = Path(args.out)
    fileio.write_rows_csv(out.with_suffix('.csv'), rows)
    fileio.write_json(out.with_suffix('.json'), summary)
    print('Best p: {0:.2f}'.format(summary['p_star']))
    return 0

def cmd_bench(args):
    from ranafrog import schedules
    from ranafrog.bench import BenchConfig, run_bench

    config = BenchConfig(tbps=args.tbps, count=args.count, seed=args.seed, threads=args.threads,
                         p=args.p, max_gp_iterations=args.max_iterations, ablation=args.ablation,
                         schedule_table=schedules.load_schedule(args.schedule))
    report = run_bench(config, args.out, args.format)
    for row in report.rows:
        print('TBP {0}: multi-grid {1:.1%}, plain GP {2:.1%}'.format(
            row.tbp, row.rana_convergence_fraction, row.gp_first_guess_fraction))
    return 0

def build_parser():
    from ranafrog.marginals import DEFAULT_P
    from ranafrog.rana import DEFAULT_BASELINE_ITERATIONS
    from ranafrog.tracesynth import DEFAULT_ADDITIVE_NOISE, DEFAULT_MULTIPLICATIVE_NOISE

    parser = argparse.ArgumentParser(prog='ranafrog',
                                     description='PG/TG FROG simulation and pulse retrieval')
    parser.add_argument('--log_level', default='info',
                        choices=['debug', 'info', 'warning', 'error'],
                        help='Logging verbosity. Default: info')
    parser.add_argument('--schedule',
                        help='Schedule JSON file. Default: $RANAFROG_SCHEDULE or built-in table')
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser('simulate', help='Simulate a random pulse and its traces')
    simulate.add_argument('--tbp', type=float, required=True,
                          help='Target time-bandwidth product')
    simulate.add_argument('--n', type=int, required=True,
                          help='Grid size, a power of two')
    simulate.add_argument('--seed', type=int, default=0,
                          help='Random seed for pulse and noise. Default: 0')
    simulate.add_argument('--dt', type=float, default=1.0,
                          help='Sample spacing in fs. Default: 1.0')
    simulate.add_argument('--noise_mult', '--noise-mult', dest='noise_mult', type=float,
                          default=DEFAULT_MULTIPLICATIVE_NOISE,
                          help='Multiplicative noise fraction. Default: 0.01')
    simulate.add_argument('--noise_add', '--noise-add', dest='noise_add', type=float,
                          default=DEFAULT_ADDITIVE_NOISE,
                          help='Additive noise fraction of the peak. Default: 0.01')
    simulate.add_argument('--geometry', default='pg', choices=['pg', 'tg'],
                          help='Gate geometry recorded in the trace files. Default: pg')
    simulate.add_argument('--out', default='pulse',
                          help='Output path prefix. Default: pulse')
    simulate.set_defaults(func=cmd_simulate)

    retrieve = commands.add_parser('retrieve', help='Retrieve a pulse from a trace file')
    retrieve.add_argument('trace', help='Trace file')
    retrieve.add_argument('--scheme', default='rana', choices=['rana', 'gp', 'gp+spectrum'],
                          help='Retrieval scheme. Default: rana')
    retrieve.add_argument('--p', type=float, default=DEFAULT_P,
                          help='Delay marginal exponent. Default: 0.73')
    retrieve.add_argument('--seed', type=int, default=0,
                          help='Seed for initial guesses. Default: 0')
    retrieve.add_argument('--max_iterations', type=int, default=DEFAULT_BASELINE_ITERATIONS,
                          help='Iteration limit for the gp schemes. Default: 200')
    retrieve.add_argument('--workers', '--threads', dest='workers', type=int, default=1,
                          help='Threads for candidate retrievals. Default: 1')
    retrieve.add_argument('--reference',
                          help='Pulse file to compare the retrieved field against')
    retrieve.add_argument('--stretch', type=float, default=1.0,
                          help='Resample the trace by this factor for the spectrum estimate. '
                               'Default: 1.0')
    retrieve.add_argument('--diagnostics', action='store_true',
                          help='Write per-iteration G history as CSV. Default: False')
    retrieve.add_argument('--out', default='result.json',
                          help='Result JSON path. Default: result.json')
    retrieve.set_defaults(func=cmd_retrieve)

    calibrate = commands.add_parser('calibrate_p', help='Calibrate the marginal exponent p')
    calibrate.add_argument('--tbps', type=float, nargs='+', default=[2.0, 5.0, 10.0],
                           help='TBPs of the calibration pulses. Default: 2 5 10')
    calibrate.add_argument('--count', type=int, default=50,
                           help='Pulses per TBP, at least 10. Default: 50')
    calibrate.add_argument('--n', type=int, default=256,
                           help='Grid size. Default: 256')
    calibrate.add_argument('--dt', type=float, default=1.0,
                           help='Sample spacing in fs. Default: 1.0')
    calibrate.add_argument('--seed', type=int, default=0,
                           help='Root seed. Default: 0')
    calibrate.add_argument('--p_values', type=float, nargs='+',
                           help='Exponents to scan. Default: 0.60 to 0.80 in steps of 0.01')
    calibrate.add_argument('--workers', '--threads', dest='workers', type=int, default=1,
                           help='Threads. Default: 1')
    calibrate.add_argument('--out', default='calibration',
                           help='Output path without suffix. Default: calibration')
    calibrate.set_defaults(func=cmd_calibrate_p)

    bench = commands.add_parser('bench', help='Compare multi-grid retrieval with plain GP')
    bench.add_argument('--tbps', type=float, nargs='+', default=[2.5],
                       help='TBPs to benchmark, taken from the schedule table. Default: 2.5')
    bench.add_argument('--count', type=int, default=20,
                       help='Pulses per TBP. Default: 20')
    bench.add_argument('--seed', type=int, default=0,
                       help='Root seed. Default: 0')
    bench.add_argument('--threads', type=int, default=1,
                       help='Pulses retrieved in parallel. Default: 1')
    bench.add_argument('--p', type=float, default=DEFAULT_P,
                       help='Delay marginal exponent. Default: 0.73')
    bench.add_argument('--max_iterations', type=int, default=DEFAULT_BASELINE_ITERATIONS,
                       help='Iteration limit for plain GP. Default: 200')
    bench.add_argument('--ablation', action='store_true',
                       help='Also run plain GP seeded with the retrieved spectrum. Default: False')
    bench.add_argument('--format', default='csv', choices=['csv', 'json'],
                       help='Report format. Default: csv')
    bench.add_argument('--out', default='bench',
                       help='Report path without suffix. Default: bench')
    bench.set_defaults(func=cmd_bench)
    return parser

def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper()),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    from ranafrog.errors import FrogError
    try:
        return args.func(args)
    except (FrogError, ValueError) as e:
        logger.error('%s', e)
        return 2
    except OSError as e:
        logger.error('%s', e, exc_info=True)
        return 3

if __name__ == '__main__':
    sys.exit(main())
