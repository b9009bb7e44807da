# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ranafrog.errors import DegenerateMarginal, NonFiniteQuotient
from ranafrog.pulse import Spectrum, autocorrelation, fft_centered, ifft_centered
from ranafrog.tracesynth import FrogTrace, synthesize_trace
from ranafrog.utils import rms, scale_fit

logger = logging.getLogger(__name__)

DEFAULT_P = 0.73
DEFAULT_DELTA = 1e-3
DEFAULT_P_GRID = np.round(np.arange(0.60, 0.805, 0.01), 2)


class MarginalKind(str, Enum):
    frequency = 'frequency'
    delay = 'delay'


@dataclass(frozen=True)
class Marginal:
    axis: np.ndarray
    values: np.ndarray
    kind: MarginalKind

    def with_values(self, values):
        return Marginal(self.axis, values, self.kind)


@dataclass(frozen=True)
class ScaledFit:
    mu: float
    rms: float


@dataclass(frozen=True)
class PCalibration:
    p_grid: np.ndarray
    mean_rms: np.ndarray
    p_star: float


# Marginals

def frequency_marginal(trace):
    return Marginal(trace.frequencies, trace.values.sum(axis=1) * trace.dtau,
                    MarginalKind.frequency)

def delay_marginal(trace):
    return Marginal(trace.delays, trace.values.sum(axis=0) * trace.domega,
                    MarginalKind.delay)

def symmetrize(m):
    'Average with the reflection about the center bin; the first bin has no partner'
    reflected = np.roll(m.values[::-1], 1)
    return m.with_values(0.5 * (m.values + reflected))

def power_modify(m, p):
    if not 0 < p <= 1:
        raise ValueError('Exponent p must lie in (0, 1], got {0}'.format(p))
    values = np.clip(m.values, 0.0, None)
    peak = np.max(values)
    if peak <= 0:
        raise DegenerateMarginal('{0} marginal has no positive values'.format(m.kind.value))
    return m.with_values((values / peak) ** p)

def rms_fit(a2, b, p):
    'Closed-form scale fit of b^p to the peak-normalized second-order autocorrelation'
    a = np.asarray(getattr(a2, 'values', a2), dtype=float)
    a = a / np.max(a)
    modified = np.clip(np.asarray(getattr(b, 'values', b), dtype=float), 0.0, None) ** p
    if not np.any(modified > 0):
        raise DegenerateMarginal('Modified delay marginal is identically zero')
    mu = scale_fit(a, modified)
    return ScaledFit(mu, rms(a - mu * modified))


# p calibration

def _calibration_curve(field, p_grid):
    a2 = autocorrelation(field, 2)
    b = symmetrize(delay_marginal(synthesize_trace(field)))
    b = b.with_values(b.values / np.max(b.values))
    return np.array([rms_fit(a2, b, p).rms for p in p_grid])

def calibration_curves(pulse_set, p_grid=DEFAULT_P_GRID, workers=1):
    'Per-pulse rms residual versus p, one row per pulse in input order'
    p_grid = np.asarray(p_grid, dtype=float)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        rows = list(executor.map(lambda field: _calibration_curve(field, p_grid), pulse_set))
    return np.array(rows)

def best_p(p_grid, mean_rms):
    p_grid = np.asarray(p_grid, dtype=float)
    best = np.flatnonzero(np.isclose(mean_rms, np.min(mean_rms), rtol=1e-12, atol=0.0))
    # Ties go to the grid point nearest the default exponent
    return float(p_grid[best[np.argmin(np.abs(p_grid[best] - DEFAULT_P))]])

def calibrate_p(pulse_set, p_grid=DEFAULT_P_GRID, workers=1):
    pulse_set = list(pulse_set)
    if len(pulse_set) < 10:
        logger.warning('Calibrating p on only %d pulses', len(pulse_set))
    p_grid = np.asarray(p_grid, dtype=float)
    mean_rms = calibration_curves(pulse_set, p_grid, workers).mean(axis=0)
    return PCalibration(p_grid, mean_rms, best_p(p_grid, mean_rms))


# Spectrum retrieval

def _patch_denominator(denominator, delta):
    'Replace bins at or below delta * peak with the nearest bin above it'
    good = np.flatnonzero(denominator > delta * np.max(denominator))
    bad = np.flatnonzero(denominator <= delta * np.max(denominator))
    if len(bad) == 0:
        return denominator
    n = len(denominator)
    center = n // 2
    pos = np.searchsorted(good, bad)
    below = good[np.clip(pos - 1, 0, len(good) - 1)]
    above = good[np.clip(pos, 0, len(good) - 1)]
    below_distance = np.abs(bad - below)
    above_distance = np.abs(bad - above)
    # Equal distances resolve toward zero delay
    take_below = (below_distance < above_distance) | (
        (below_distance == above_distance) & (np.abs(below - center) <= np.abs(above - center)))
    patched = denominator.copy()
    patched[bad] = denominator[np.where(take_below, below, above)]
    return patched

def retrieve_spectrum(trace, p=DEFAULT_P, delta=DEFAULT_DELTA):
    '''
    Spectrum estimate from the trace marginals.

    The inverse transform of the frequency marginal is divided by the
    symmetrized delay marginal raised to p, which stands in for the
    second-order autocorrelation, and transformed back. The estimate is
    the magnitude of that transform.
    '''
    marginal = frequency_marginal(trace).values
    if not np.any(marginal > 0):
        raise DegenerateMarginal('Frequency marginal has no positive values')
    numerator = ifft_centered(marginal)
    numerator = numerator / np.max(np.abs(numerator))
    denominator = power_modify(symmetrize(delay_marginal(trace)), p).values
    quotient = numerator / _patch_denominator(denominator, delta)
    estimate = np.abs(fft_centered(quotient))
    if not np.all(np.isfinite(estimate)):
        raise NonFiniteQuotient('Spectrum deconvolution produced non-finite values')
    peak = np.max(estimate)
    if peak <= 0:
        raise DegenerateMarginal('Retrieved spectrum is identically zero')
    return Spectrum(trace.frequencies, estimate / peak)

def resample_trace(trace, stretch):
    'Trace interpolated onto delays stretched by `stretch` and frequencies compressed by it'
    interpolator = RegularGridInterpolator((trace.frequencies, trace.delays), trace.values,
                                           method='linear', bounds_error=False, fill_value=0.0)
    resampled = FrogTrace(np.zeros_like(trace.values), trace.dtau * stretch,
                          trace.domega / stretch, trace.geometry)
    w, tau = np.meshgrid(resampled.frequencies, resampled.delays, indexing='ij')
    values = interpolator(np.stack((w.ravel(), tau.ravel()), axis=-1)).reshape(w.shape)
    return resampled.with_values(values)

def resample_robustness_check(trace, stretch, p=DEFAULT_P, delta=DEFAULT_DELTA):
    if not 0.5 <= stretch <= 2.0:
        raise ValueError('Stretch must lie in [0.5, 2], got {0}'.format(stretch))
    if stretch == 1.0:
        return retrieve_spectrum(trace, p, delta)
    resampled = resample_trace(trace, stretch)
    estimate = retrieve_spectrum(resampled, p, delta)
    common = np.interp(trace.frequencies, resampled.frequencies, estimate.intensity,
                       left=0.0, right=0.0)
    return Spectrum(trace.frequencies, common / np.max(common))

def spectrum_rms_error(estimate, truth):
    'rms difference of peak-normalized spectral intensities, in units of the peak'
    a = estimate.intensity / np.max(estimate.intensity)
    b = truth.intensity / np.max(truth.intensity)
    return rms(a - b)
