# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import logging
from dataclasses import dataclass, field as dataclass_field
from typing import Tuple

import numpy as np

from ranafrog.errors import DimensionMismatch
from ranafrog.pulse import ComplexField, fft_centered, ifft_centered
from ranafrog.tracesynth import delay_shifted, signal_matrix, trace_values
from ranafrog.utils import centered_indices, scale_fit

logger = logging.getLogger(__name__)

PUBLISHED_G_PRIME_CUTOFF = 0.2
# Between the 1%+1% noise floor (G' 0.06-0.08) and stagnated retrievals (near 0.18)
DEFAULT_G_PRIME_CUTOFF = 0.1
# Usual G < 1% rule of thumb, for traces without a schedule row
DEFAULT_G_CUTOFF = 0.01
DESCENT_STEPS = 2
BACKTRACK_FACTOR = 0.5
MAX_HALVINGS = 20
ARMIJO_SLOPE = 1e-4


@dataclass(frozen=True)
class ErrorMetrics:
    g: float
    g_prime: float
    mu: float


@dataclass(frozen=True)
class ConvergenceCriteria:
    g_cutoff: float
    g_prime_cutoff: float = DEFAULT_G_PRIME_CUTOFF

    def __post_init__(self):
        if not (self.g_cutoff > 0 and self.g_prime_cutoff > 0):
            raise ValueError('Convergence cutoffs must be positive')

    def is_met(self, metrics):
        return metrics.g <= self.g_cutoff or metrics.g_prime <= self.g_prime_cutoff


@dataclass(frozen=True)
class GpState:
    field: ComplexField
    iteration: int = 0
    g_history: Tuple[float, ...] = dataclass_field(default_factory=tuple)


# Error metrics

def trace_metrics(measured, retrieved):
    'G and G\' for two trace arrays of equal shape'
    if measured.shape != retrieved.shape:
        raise DimensionMismatch('Trace shapes {0} and {1} differ'.format(
            measured.shape, retrieved.shape))
    mu = scale_fit(measured, retrieved)
    residual = measured - mu * retrieved
    squared = np.sum(residual ** 2)
    g = float(np.sqrt(squared / residual.size))
    g_prime = float(np.sqrt(squared / np.sum(measured ** 2)))
    return ErrorMetrics(g, g_prime, mu)

def g_error(measured, retrieved):
    return trace_metrics(measured.values, retrieved.values)

def field_metrics(field, measured):
    'Metrics of the trace synthesized from field against a measured trace'
    if field.grid.n != measured.n:
        raise DimensionMismatch('Field has {0} samples, trace is {1}x{1}'.format(
            field.grid.n, measured.n))
    return trace_metrics(measured.values, trace_values(field.samples))


# Projections

def project_data(field, measured):
    'Signal field over (time, delay) with trace magnitudes replaced by sqrt(measured)'
    if field.grid.n != measured.n:
        raise DimensionMismatch('Field has {0} samples, trace is {1}x{1}'.format(
            field.grid.n, measured.n))
    spectrum = fft_centered(signal_matrix(field.samples), axis=0)
    magnitude = np.abs(spectrum)
    target = np.sqrt(np.clip(measured.values, 0.0, None))
    phase = np.divide(spectrum, magnitude, out=np.ones_like(spectrum), where=magnitude > 0)
    return ifft_centered(target * phase, axis=0)

def form_distance(samples, signal):
    'Z = sum over (t, tau) of |signal - E(t) |E(t - tau)|^2|^2'
    return float(np.sum(np.abs(signal - signal_matrix(samples)) ** 2))

def form_gradient(samples, signal):
    'dZ/dRe(E) + i dZ/dIm(E)'
    samples = np.asarray(samples)
    n = len(samples)
    gate = delay_shifted(np.abs(samples) ** 2)
    residual = samples[:, None] * gate - signal
    direct = np.sum(residual * gate, axis=1)
    # Each sample also acts as the gate for the sample at t + tau
    weighted = np.real(residual * np.conj(samples)[:, None])
    source = np.arange(n)[:, None] + centered_indices(n)[None, :]
    inside = (source >= 0) & (source < n)
    columns = np.broadcast_to(np.arange(n)[None, :], source.shape)
    gated = np.where(inside, weighted[np.clip(source, 0, n - 1), columns], 0.0)
    return 2.0 * (direct + 2.0 * samples * np.sum(gated, axis=1))

def line_polynomial(samples, direction, signal):
    'Coefficients (highest power first) of Z(E + alpha d) as a degree-6 polynomial in alpha'
    a = np.asarray(samples)[:, None]
    b = np.asarray(direction)[:, None]
    c = delay_shifted(np.asarray(samples))
    e = delay_shifted(np.asarray(direction))
    cc = np.abs(c) ** 2
    ce = np.real(c * np.conj(e))
    ee = np.abs(e) ** 2
    r0 = a * cc - signal
    r1 = b * cc + 2.0 * a * ce
    r2 = 2.0 * b * ce + a * ee
    r3 = b * ee

    def inner(x, y):
        return float(np.real(np.sum(x * np.conj(y))))

    return np.array([
        inner(r3, r3),
        2.0 * inner(r3, r2),
        inner(r2, r2) + 2.0 * inner(r3, r1),
        2.0 * (inner(r3, r0) + inner(r2, r1)),
        inner(r1, r1) + 2.0 * inner(r2, r0),
        2.0 * inner(r1, r0),
        inner(r0, r0),
    ])

def minimize_along(coefficients):
    'Real step length minimizing the line polynomial, 0 if nothing improves'
    roots = np.roots(np.polyder(coefficients))
    scale = 1.0 + np.abs(roots)
    candidates = np.real(roots[np.abs(np.imag(roots)) <= 1e-8 * scale])
    candidates = np.append(candidates, 0.0)
    values = np.polyval(coefficients, candidates)
    return float(candidates[np.argmin(values)])

def descent_step(samples, signal):
    '''
    One steepest-descent step. Backtracking starts at the minimum of the
    line polynomial (or at Z / |grad Z|^2 when that minimum is not ahead)
    and falls back to the exact line minimum after MAX_HALVINGS.
    '''
    gradient = form_gradient(samples, signal)
    slope = float(np.sum(np.abs(gradient) ** 2))
    if slope == 0.0:
        return samples
    direction = -gradient
    coefficients = line_polynomial(samples, direction, signal)
    z0 = coefficients[-1]
    step = minimize_along(coefficients)
    if step <= 0.0:
        step = z0 / slope
    for _ in range(MAX_HALVINGS + 1):
        if np.polyval(coefficients, step) <= z0 - ARMIJO_SLOPE * step * slope:
            return samples + step * direction
        step *= BACKTRACK_FACTOR
    step = minimize_along(coefficients)
    if step == 0.0:
        return samples
    return samples + step * direction

def project_form(signal, current, steps=DESCENT_STEPS):
    samples = np.array(current.samples)
    if signal.shape != (len(samples), len(samples)):
        raise DimensionMismatch('Signal shape {0} does not match field of {1} samples'.format(
            signal.shape, len(samples)))
    for _ in range(steps):
        samples = descent_step(samples, signal)
    return ComplexField(current.grid, samples)


# Iteration

def center_field(field):
    'Roll the intensity centroid onto the grid center'
    n = field.grid.n
    intensity = field.intensity
    centroid = np.sum(np.arange(n) * intensity) / np.sum(intensity)
    shift = n // 2 - int(round(centroid))
    if shift == 0:
        return field
    return ComplexField(field.grid, np.roll(field.samples, shift))

def match_trace_scale(field, measured):
    'Rescale the field so its trace best matches the measured trace in least squares'
    mu = scale_fit(measured.values, trace_values(field.samples))
    if mu <= 0:
        return field
    return field.scaled(mu ** (1.0 / 6.0))

def gp_iterate(state, measured, iterations, criteria):
    '''
    Alternate data and form projections up to `iterations` times, stopping
    once the criteria are met. Returns the best-g iterate of this run with
    its metrics; g_history holds the g of every iteration of this run.
    '''
    if iterations < 1:
        raise ValueError('At least one iteration is required')
    if state.field.grid.n != measured.n:
        raise DimensionMismatch('Field has {0} samples, trace is {1}x{1}'.format(
            state.field.grid.n, measured.n))
    field = match_trace_scale(state.field, measured)
    history = []
    best_field, best_metrics = field, None
    for iteration in range(iterations):
        signal = project_data(field, measured)
        field = center_field(project_form(signal, field))
        metrics = field_metrics(field, measured)
        history.append(metrics.g)
        logger.debug('GP iteration %d: G %.5f, G\' %.4f', iteration + 1, metrics.g, metrics.g_prime)
        if best_metrics is None or metrics.g < best_metrics.g:
            best_field, best_metrics = field, metrics
        if criteria.is_met(metrics):
            break
    return GpState(best_field, state.iteration + len(history), tuple(history)), best_metrics
