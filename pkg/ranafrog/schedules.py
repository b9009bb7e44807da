# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import json
import logging
import os

from ranafrog.errors import ParseError
from ranafrog.gpengine import DEFAULT_G_CUTOFF, DEFAULT_G_PRIME_CUTOFF, ConvergenceCriteria
from ranafrog.rana import DEFAULT_FULL_ITERATIONS, GridSchedule, Level, LevelBudget

logger = logging.getLogger(__name__)

SCHEDULE_ENV = 'RANAFROG_SCHEDULE'

# Initial guesses and iterations per grid level, keyed by TBP. The published
# G' column reads 0.2 in every row; the rows carry the recalibrated cutoff.
default = {
    2.5: {
        'tbp': 2.5,
        'n': 64,
        'igs_quarter': 12,
        'iters_quarter': 20,
        'igs_half': 8,
        'iters_half': 20,
        'igs_full': 4,
        'g_cutoff': 0.0090,
        'g_prime_cutoff': DEFAULT_G_PRIME_CUTOFF,
    },
    5: {
        'tbp': 5,
        'n': 128,
        'igs_quarter': 12,
        'iters_quarter': 25,
        'igs_half': 8,
        'iters_half': 20,
        'igs_full': 4,
        'g_cutoff': 0.0080,
        'g_prime_cutoff': DEFAULT_G_PRIME_CUTOFF,
    },
    10: {
        'tbp': 10,
        'n': 256,
        'igs_quarter': 20,
        'iters_quarter': 25,
        'igs_half': 12,
        'iters_half': 25,
        'igs_full': 4,
        'g_cutoff': 0.0070,
        'g_prime_cutoff': DEFAULT_G_PRIME_CUTOFF,
    },
    20: {
        'tbp': 20,
        'n': 512,
        'igs_quarter': 24,
        'iters_quarter': 30,
        'igs_half': 16,
        'iters_half': 25,
        'igs_full': 4,
        'g_cutoff': 0.0065,
        'g_prime_cutoff': DEFAULT_G_PRIME_CUTOFF,
    },
    40: {
        'tbp': 40,
        'n': 1024,
        'igs_quarter': 28,
        'iters_quarter': 35,
        'igs_half': 16,
        'iters_half': 30,
        'igs_full': 4,
        'g_cutoff': 0.0045,
        'g_prime_cutoff': DEFAULT_G_PRIME_CUTOFF,
    },
    80: {
        'tbp': 80,
        'n': 2048,
        'igs_quarter': 36,
        'iters_quarter': 40,
        'igs_half': 24,
        'iters_half': 35,
        'igs_full': 4,
        'g_cutoff': 0.0035,
        'g_prime_cutoff': DEFAULT_G_PRIME_CUTOFF,
    },
    100: {
        'tbp': 100,
        'n': 4096,
        'igs_quarter': 48,
        'iters_quarter': 40,
        'igs_half': 28,
        'iters_half': 35,
        'igs_full': 4,
        'g_cutoff': 0.0020,
        'g_prime_cutoff': DEFAULT_G_PRIME_CUTOFF,
    },
}

REQUIRED_KEYS = ('tbp', 'n', 'igs_quarter', 'iters_quarter', 'igs_half', 'iters_half',
                 'igs_full', 'g_cutoff')


def from_row(row):
    'GridSchedule from one table row'
    missing = [key for key in REQUIRED_KEYS if key not in row]
    if missing:
        raise ParseError('Schedule row is missing {0}'.format(', '.join(missing)))
    try:
        return GridSchedule(
            tbp_label=float(row['tbp']),
            n_full=int(row['n']),
            levels={
                Level.quarter: LevelBudget(int(row['igs_quarter']), int(row['iters_quarter'])),
                Level.half: LevelBudget(int(row['igs_half']), int(row['iters_half'])),
                Level.full: LevelBudget(int(row['igs_full']),
                                        int(row.get('iters_full', DEFAULT_FULL_ITERATIONS))),
            },
            criteria=ConvergenceCriteria(float(row['g_cutoff']),
                                         float(row.get('g_prime_cutoff', DEFAULT_G_PRIME_CUTOFF))))
    except (TypeError, ValueError) as e:
        raise ParseError('Invalid schedule row: {0}'.format(e)) from e

def to_row(schedule):
    return {
        'tbp': schedule.tbp_label,
        'n': schedule.n_full,
        'igs_quarter': schedule.levels[Level.quarter].num_initial_guesses,
        'iters_quarter': schedule.levels[Level.quarter].iterations,
        'igs_half': schedule.levels[Level.half].num_initial_guesses,
        'iters_half': schedule.levels[Level.half].iterations,
        'igs_full': schedule.levels[Level.full].num_initial_guesses,
        'iters_full': schedule.levels[Level.full].iterations,
        'g_cutoff': schedule.criteria.g_cutoff,
        'g_prime_cutoff': schedule.criteria.g_prime_cutoff,
    }

def load_schedule(path=None):
    '''
    Schedule table keyed by TBP: the defaults overlaid with the rows of a
    JSON file holding one row object or a list of rows. Without a path the
    file named by RANAFROG_SCHEDULE is used, if set.
    '''
    table = {float(tbp): dict(row) for tbp, row in default.items()}
    path = path or os.environ.get(SCHEDULE_ENV)
    if not path:
        return table
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError('Schedule file {0} is not valid JSON: {1}'.format(path, e)) from e
    rows = data if isinstance(data, list) else [data]
    for row in rows:
        if not isinstance(row, dict) or 'tbp' not in row:
            raise ParseError('Schedule rows must be objects with a tbp key')
        merged = {**table.get(float(row['tbp']), {}), **row}
        from_row(merged)
        table[float(row['tbp'])] = merged
    logger.info('Loaded %d schedule rows from %s', len(rows), path)
    return table

def schedule_for(tbp, table=None):
    'Schedule of the table row nearest to tbp'
    table = table if table is not None else load_schedule()
    key = min(table, key=lambda label: abs(float(label) - tbp))
    if abs(float(key) - tbp) > 1e-9:
        logger.warning('No schedule row for TBP %s, using the row for TBP %s', tbp, key)
    return from_row(table[key])

def schedule_for_n(n, table=None):
    'Schedule of the table row with grid size n'
    table = table if table is not None else load_schedule()
    for row in table.values():
        if int(row['n']) == n:
            return from_row(row)
    raise ValueError('No schedule row for a {0}x{0} trace'.format(n))

def expected_n(tbp, table=None):
    table = table if table is not None else load_schedule()
    row = table.get(float(tbp))
    return int(row['n']) if row else None

def criteria_for_n(n, table=None):
    'Convergence criteria of the row with grid size n, or the defaults when no row matches'
    try:
        return schedule_for_n(n, table).criteria
    except ValueError:
        logger.warning('No schedule row for a %dx%d trace, using G <= %s or G\' <= %s',
                       n, n, DEFAULT_G_CUTOFF, DEFAULT_G_PRIME_CUTOFF)
        return ConvergenceCriteria(DEFAULT_G_CUTOFF, DEFAULT_G_PRIME_CUTOFF)
