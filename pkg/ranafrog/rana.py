# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np

from ranafrog.errors import DimensionMismatch, IncompatibleGrids, IndivisibleGrid
from ranafrog.gpengine import ConvergenceCriteria, ErrorMetrics, GpState, gp_iterate
from ranafrog.marginals import DEFAULT_P, delay_marginal, retrieve_spectrum
from ranafrog.pulse import (ComplexField, Spectrum, TimeGrid, autocorrelation, fft_centered,
                            field_from_spectrum, ifft_centered)
from ranafrog.tracesynth import FrogTrace
from ranafrog.utils import block_mean, centered_crop, centered_decimate, centered_indices, \
    is_power_of_two, rms, scale_fit, super_gaussian

logger = logging.getLogger(__name__)

FULL_LEVEL_CANDIDATES = 4
DEFAULT_FULL_ITERATIONS = 20
DEFAULT_BASELINE_ITERATIONS = 200
PHASE_HARMONICS = 4         # cosine and sine per harmonic: 8 modes
WINDOW_ORDER = 6
WINDOW_FLOOR = 1e-4
WINDOW_MARGIN = 0.1         # fraction of bins per side held below the floor


class Level(str, Enum):
    quarter = 'quarter'
    half = 'half'
    full = 'full'

    @property
    def factor(self):
        'Full grid size over level grid size'
        return {Level.quarter: 4, Level.half: 2, Level.full: 1}[self]

    @property
    def delay_factor(self):
        'Level sample spacing over full sample spacing'
        return {Level.quarter: 2, Level.half: 2, Level.full: 1}[self]

    @property
    def frequency_factor(self):
        'Level spectral spacing over full spectral spacing'
        return self.factor // self.delay_factor


@dataclass(frozen=True)
class LevelBudget:
    num_initial_guesses: int
    iterations: int


@dataclass(frozen=True)
class GridSchedule:
    tbp_label: float
    n_full: int
    levels: Dict[Level, LevelBudget]
    criteria: ConvergenceCriteria

    def __post_init__(self):
        if not is_power_of_two(self.n_full):
            raise ValueError('Full grid size must be a power of two, got {0}'.format(self.n_full))
        if set(self.levels) != set(Level):
            raise ValueError('Schedule needs quarter, half and full levels')
        for level, budget in self.levels.items():
            if budget.num_initial_guesses < 1 or budget.iterations < 1:
                raise ValueError('Schedule counts must be positive at level {0}'.format(level.value))
        if self.levels[Level.full].num_initial_guesses != FULL_LEVEL_CANDIDATES:
            raise ValueError('The full level keeps exactly {0} candidates'.format(
                FULL_LEVEL_CANDIDATES))


@dataclass(frozen=True)
class Candidate:
    field: ComplexField
    metrics: ErrorMetrics
    level: Level
    index: int

    @property
    def g(self):
        return self.metrics.g


class CandidatePool:
    'Candidates of one level sorted by G, ties broken by index'

    def __init__(self, candidates, capacity):
        self.capacity = capacity
        self.candidates = sorted(candidates, key=lambda c: (c.g, c.index))[:capacity]

    def best(self):
        return self.candidates[0]

    def g_values(self):
        return [c.g for c in self.candidates]

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)


@dataclass(frozen=True)
class RetrievalResult:
    field: ComplexField
    metrics: ErrorMetrics
    converged: bool
    iterations_total: int
    wall_time: float
    level_g_history: Dict[str, float]
    level_iterations: Dict[str, int] = dataclass_field(default_factory=dict)
    pool_g: Dict[str, List[float]] = dataclass_field(default_factory=dict)
    g_histories: Dict[str, List[Tuple[float, ...]]] = dataclass_field(default_factory=dict)
    scheme: str = 'rana'


# Grids

def bin_trace(trace, factor):
    if factor < 1 or trace.n % factor != 0:
        raise IndivisibleGrid('Trace of size {0} cannot be binned by {1}'.format(trace.n, factor))
    if factor == 1:
        return trace
    values = block_mean(trace.values, factor)
    return FrogTrace(values / np.max(values), trace.dtau * factor, trace.domega * factor,
                     trace.geometry)

def level_grid(full_grid, level):
    '''
    Grid of a level: n / factor samples spaced delay_factor * dt. The half
    level spans the full time window and half the spectral window, the
    quarter level half of each.
    '''
    return TimeGrid(full_grid.n // level.factor, full_grid.dt * level.delay_factor, full_grid.t0)

def level_trace(trace, level):
    '''
    Measured trace resampled onto the axes a field on the level grid
    produces: delays decimated by the delay factor, frequencies by the
    frequency factor, both cropped to the central n / factor bins.
    '''
    if trace.n % level.factor != 0:
        raise IndivisibleGrid('Trace of size {0} has no {1} level'.format(trace.n, level.value))
    if level is Level.full:
        return trace
    n = trace.n // level.factor
    values = centered_decimate(trace.values, level.delay_factor, axis=1)
    values = centered_decimate(values, level.frequency_factor, axis=0)
    values = centered_crop(centered_crop(values, n, axis=1), n, axis=0)
    return FrogTrace(values / np.max(values), trace.dtau * level.delay_factor,
                     trace.domega * level.frequency_factor, trace.geometry)

def level_spectrum(spectrum, grid, level):
    'Spectrum on the conjugate axis of a level grid, windowed again after cropping'
    if level is Level.full:
        return spectrum
    intensity = centered_crop(centered_decimate(spectrum.intensity, level.frequency_factor),
                              grid.n)
    return apply_spectral_window(Spectrum(grid.frequencies, np.clip(intensity, 0.0, None)))


# Spectra and guesses

def apply_spectral_window(spectrum):
    n = spectrum.n
    edge = max(1, int(round(WINDOW_MARGIN * n)))
    # Innermost bin of the outer margins sits at (n/2 - edge) bins from zero
    spacing = abs(spectrum.frequencies[1] - spectrum.frequencies[0])
    cutoff = (n // 2 - edge) * spacing
    window = super_gaussian(spectrum.frequencies, cutoff, WINDOW_ORDER, WINDOW_FLOOR)
    return Spectrum(spectrum.frequencies, spectrum.intensity * window, spectrum.phase)

def smooth_random_phase(n, rng, amplitude=np.pi):
    'Sum of the lowest harmonics over the frequency axis with coefficients in [-amplitude, amplitude]'
    x = np.pi * centered_indices(n) / (n / 2.0)
    coefficients = rng.uniform(-amplitude, amplitude, size=2 * PHASE_HARMONICS)
    phase = np.zeros(n)
    for m in range(1, PHASE_HARMONICS + 1):
        phase += coefficients[2 * m - 2] * np.cos(m * x) + coefficients[2 * m - 1] * np.sin(m * x)
    return phase

def make_initial_guesses(spectrum, count, grid, seed, phase_amplitude=np.pi):
    if spectrum.n != grid.n:
        raise DimensionMismatch('Spectrum has {0} bins, grid has {1} samples'.format(
            spectrum.n, grid.n))
    amplitude = np.sqrt(spectrum.intensity)
    guesses = []
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        guesses.append(field_from_spectrum(grid, amplitude,
                                           smooth_random_phase(grid.n, rng, phase_amplitude)))
    return guesses


# Transitions

def _resample_spectrally(field, to_grid):
    'Interpolate the complex spectrum onto the conjugate axis of to_grid, zero outside'
    source = field.grid.frequencies
    target = to_grid.frequencies
    spectral = fft_centered(field.samples)
    resampled = (np.interp(target, source, np.real(spectral), left=0.0, right=0.0)
                 + 1j * np.interp(target, source, np.imag(spectral), left=0.0, right=0.0))
    samples = ifft_centered(resampled)
    energy = np.sum(np.abs(samples) ** 2) * to_grid.dt
    if energy > 0:
        samples *= np.sqrt(field.energy * field.grid.dt / energy)
    return ComplexField(to_grid, samples)

def transition_field(field, from_grid, to_grid):
    if field.grid != from_grid:
        raise IncompatibleGrids('Field does not live on the source grid')
    if to_grid.n < from_grid.n:
        raise IncompatibleGrids('Cannot transition from {0} to {1} samples'.format(
            from_grid.n, to_grid.n))
    return _resample_spectrally(field, to_grid)

def restrict_field(field, to_grid):
    'Inverse of transition_field: sample the spectrum on the smaller grid'
    if to_grid.n > field.grid.n:
        raise IncompatibleGrids('Restriction target is larger than the field grid')
    return _resample_spectrally(field, to_grid)

def _delay_marginal_rms(field, measured):
    third = autocorrelation(field, 3).values
    mu = scale_fit(measured, third)
    return rms(measured - mu * third)

def maybe_reapply_spectrum(field, spectrum, measured_delay_marginal):
    n = field.grid.n
    if spectrum.n != n or len(measured_delay_marginal.values) != n:
        raise DimensionMismatch('Field, spectrum and delay marginal sizes differ')
    spectral = fft_centered(field.samples)
    amplitude = np.sqrt(spectrum.intensity)
    norm = np.sum(amplitude ** 2)
    if norm > 0:
        amplitude = amplitude * np.sqrt(np.sum(np.abs(spectral) ** 2) / norm)
    candidate = ComplexField(field.grid, ifft_centered(amplitude * np.exp(1j * np.angle(spectral))))

    measured = np.clip(measured_delay_marginal.values, 0.0, None)
    measured = measured / np.max(measured)
    field_rms = _delay_marginal_rms(field, measured)
    candidate_rms = _delay_marginal_rms(candidate, measured)
    if candidate_rms < field_rms * (1.0 - 1e-12):
        return candidate
    return field


# Retrieval

def _run_level(fields, trace, budget, criteria, workers):
    def task(field):
        return gp_iterate(GpState(field), trace, budget.iterations, criteria)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        return list(executor.map(task, fields))

def rana_retrieve(trace, schedule, p=DEFAULT_P, seed=0, workers=1):
    '''
    Multi-grid retrieval: many spectrum-seeded guesses on the quarter grid,
    pruned by G on the way up through the half grid to four candidates on
    the full grid.
    '''
    start = time.perf_counter()
    if trace.n != schedule.n_full:
        raise DimensionMismatch('Trace is {0}x{0}, schedule expects {1}'.format(
            trace.n, schedule.n_full))
    criteria = schedule.criteria
    full_grid = TimeGrid(trace.n, trace.dtau)
    spectrum = apply_spectral_window(retrieve_spectrum(trace, p))

    level_g_history, level_iterations, pool_g, g_histories = {}, {}, {}, {}
    capacities = {Level.quarter: schedule.levels[Level.half].num_initial_guesses,
                  Level.half: FULL_LEVEL_CANDIDATES,
                  Level.full: 1}
    pool, previous_grid = None, None
    for level in Level:
        grid = level_grid(full_grid, level)
        measured = level_trace(trace, level)
        target = level_spectrum(spectrum, grid, level)
        budget = schedule.levels[level]
        if pool is None:
            fields = make_initial_guesses(target, budget.num_initial_guesses, grid, seed)
        else:
            marginal = delay_marginal(measured)
            fields = [maybe_reapply_spectrum(transition_field(c.field, previous_grid, grid),
                                             target, marginal) for c in pool]

        results = _run_level(fields, measured, budget, criteria, workers)
        candidates = [Candidate(state.field, metrics, level, index)
                      for index, (state, metrics) in enumerate(results)]
        level_iterations[level.value] = sum(len(state.g_history) for state, _ in results)
        pool = CandidatePool(candidates, capacities[level])
        level_g_history[level.value] = pool.best().g
        pool_g[level.value] = pool.g_values()
        g_histories[level.value] = [state.g_history for state, _ in results]
        previous_grid = grid
        logger.info('Level %s (%dx%d): %d candidates, best G %.5f, kept %d',
                    level.value, grid.n, grid.n, len(candidates), pool.best().g, len(pool))

    best = pool.best()
    return RetrievalResult(
        field=best.field,
        metrics=best.metrics,
        converged=criteria.is_met(best.metrics),
        iterations_total=sum(level_iterations.values()),
        wall_time=time.perf_counter() - start,
        level_g_history=level_g_history,
        level_iterations=level_iterations,
        pool_g=pool_g,
        g_histories=g_histories,
        scheme='rana')

def random_initial_guess(trace, seed, spectrum=None):
    '''
    Single guess with white random spectral phase. Its amplitude is random
    unless a spectrum is given. Both cases draw the same random numbers.
    '''
    grid = TimeGrid(trace.n, trace.dtau)
    rng = np.random.default_rng(seed)
    random_amplitude = rng.uniform(0.0, 1.0, size=grid.n)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=grid.n)
    if spectrum is None:
        spectrum = Spectrum(grid.frequencies, random_amplitude ** 2)
    windowed = apply_spectral_window(spectrum)
    return field_from_spectrum(grid, np.sqrt(windowed.intensity), phase)

def gp_baseline_retrieve(trace, max_iterations, seed, criteria,
                         with_retrieved_spectrum=False, p=DEFAULT_P):
    'Plain GP from one random guess on the full grid'
    start = time.perf_counter()
    spectrum = retrieve_spectrum(trace, p) if with_retrieved_spectrum else None
    guess = random_initial_guess(trace, seed, spectrum)
    state, metrics = gp_iterate(GpState(guess), trace, max_iterations, criteria)
    iterations = len(state.g_history)
    return RetrievalResult(
        field=state.field,
        metrics=metrics,
        converged=criteria.is_met(metrics),
        iterations_total=iterations,
        wall_time=time.perf_counter() - start,
        level_g_history={Level.full.value: metrics.g},
        level_iterations={Level.full.value: iterations},
        g_histories={Level.full.value: [state.g_history]},
        scheme='gp+spectrum' if with_retrieved_spectrum else 'gp')
