# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft
import scipy.signal

from ranafrog.errors import GridTooSmall, ZeroEnergy
from ranafrog.utils import centered_indices, is_power_of_two

logger = logging.getLogger(__name__)

MIN_GRID_SIZE = 16
CONTAINMENT_FLOOR = 1e-4    # intensity relative to peak
CONTAINMENT_MARGIN = 0.1    # fraction of the grid on each side
TBP_TOLERANCE = 0.1
MAX_RESCALE_STEPS = 30
MAX_BISECTION_STEPS = 60
MAX_PULSE_ATTEMPTS = 16

# Fourier transforms
# Unitary, centered, kernel exp(-i w t). Index n // 2 is zero time / zero frequency.

def fft_centered(values, axis=-1):
    shifted = scipy.fft.ifftshift(values, axes=axis)
    return scipy.fft.fftshift(scipy.fft.fft(shifted, axis=axis, norm='ortho'), axes=axis)

def ifft_centered(values, axis=-1):
    shifted = scipy.fft.ifftshift(values, axes=axis)
    return scipy.fft.fftshift(scipy.fft.ifft(shifted, axis=axis, norm='ortho'), axes=axis)


@dataclass(frozen=True)
class TimeGrid:
    'Uniform time axis with n samples of spacing dt (fs) centered on t0'
    n: int
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        if not is_power_of_two(self.n) or self.n < MIN_GRID_SIZE:
            raise ValueError('Grid size must be a power of two >= {0}, got {1}'.format(
                MIN_GRID_SIZE, self.n))
        if not self.dt > 0:
            raise ValueError('Sample spacing must be positive, got {0}'.format(self.dt))

    @property
    def times(self):
        return self.t0 + centered_indices(self.n) * self.dt

    @property
    def dw(self):
        'Conjugate frequency spacing in rad/fs'
        return 2.0 * np.pi / (self.n * self.dt)

    @property
    def frequencies(self):
        return centered_indices(self.n) * self.dw

    def resized(self, n):
        'Same spacing and center, different sample count'
        return TimeGrid(n, self.dt, self.t0)


@dataclass(frozen=True)
class ComplexField:
    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex)
        if samples.shape != (self.grid.n,):
            raise ValueError('Field has {0} samples, grid expects {1}'.format(
                samples.shape, self.grid.n))
        samples.flags.writeable = False
        object.__setattr__(self, 'samples', samples)

    @property
    def intensity(self):
        return np.abs(self.samples) ** 2

    @property
    def energy(self):
        return float(np.sum(self.intensity))

    def peak_normalized(self):
        peak = np.max(self.intensity)
        if peak <= 0:
            raise ZeroEnergy('Cannot normalize a field with zero energy')
        return ComplexField(self.grid, self.samples / np.sqrt(peak))

    def scaled(self, factor):
        return ComplexField(self.grid, self.samples * factor)


@dataclass(frozen=True)
class SpectralField:
    'Complex spectrum on the conjugate frequency axis of its time grid'
    grid: TimeGrid
    samples: np.ndarray

    @property
    def frequencies(self):
        return self.grid.frequencies

    @property
    def intensity(self):
        return np.abs(self.samples) ** 2

    @property
    def phase(self):
        return np.angle(self.samples)


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    intensity: np.ndarray
    phase: Optional[np.ndarray] = None

    def __post_init__(self):
        intensity = np.asarray(self.intensity, dtype=float)
        if intensity.shape != np.shape(self.frequencies):
            raise ValueError('Spectrum intensity and frequency axis differ in length')
        if np.any(intensity < 0):
            raise ValueError('Spectral intensity must be nonnegative')
        object.__setattr__(self, 'intensity', intensity)

    @property
    def n(self):
        return len(self.intensity)

    def peak_normalized(self):
        peak = np.max(self.intensity)
        if peak <= 0:
            return self
        return Spectrum(self.frequencies, self.intensity / peak, self.phase)


@dataclass(frozen=True)
class Autocorrelation:
    delays: np.ndarray
    values: np.ndarray
    order: int

    def peak_normalized(self):
        return Autocorrelation(self.delays, self.values / np.max(self.values), self.order)


@dataclass(frozen=True)
class PulseStats:
    rms_t: float
    rms_w: float
    tbp: float


def forward_fourier(field):
    return SpectralField(field.grid, fft_centered(field.samples))

def inverse_fourier(spectral):
    return ComplexField(spectral.grid, ifft_centered(spectral.samples))

def spectrum_of(field):
    'Spectral intensity and phase of a field as a Spectrum'
    spectral = forward_fourier(field)
    return Spectrum(field.grid.frequencies, spectral.intensity, spectral.phase)

def field_from_spectrum(grid, amplitude, phase):
    'Field whose spectrum is amplitude * exp(i phase) on the conjugate axis of grid'
    return inverse_fourier(SpectralField(grid, amplitude * np.exp(1j * phase)))


def _rms_width(axis, weights):
    total = np.sum(weights)
    mean = np.sum(axis * weights) / total
    variance = np.sum((axis - mean) ** 2 * weights) / total
    return float(np.sqrt(max(variance, 0.0)))

def compute_stats(field):
    intensity = field.intensity
    if np.sum(intensity) <= 0:
        raise ZeroEnergy('Field has zero total energy')
    rms_t = _rms_width(field.grid.times, intensity)
    rms_w = _rms_width(field.grid.frequencies, forward_fourier(field).intensity)
    return PulseStats(rms_t, rms_w, rms_t * rms_w)


def autocorrelation(field, order):
    'Intensity autocorrelation sum_t I(t) I(t - tau)^(order - 1) without wrap-around'
    if order not in (2, 3):
        raise ValueError('Autocorrelation order must be 2 or 3, got {0}'.format(order))
    n = field.grid.n
    intensity = field.intensity
    gate = intensity ** (order - 1)
    # Full linear correlation has 2n - 1 lags; lag 0 sits at index n - 1
    full = scipy.signal.correlate(intensity, gate, mode='full')
    values = np.maximum(full[n // 2 - 1:n // 2 - 1 + n], 0.0)
    return Autocorrelation(centered_indices(n) * field.grid.dt, values, order)


# Test pulses

def gaussian_pulse(grid, duration, spectral_chirp=0.0):
    'Gaussian field exp(-t^2 / 2 duration^2), optionally with spectral phase c w^2'
    samples = np.exp(-(grid.times - grid.t0) ** 2 / (2.0 * duration ** 2))
    field = ComplexField(grid, samples)
    if spectral_chirp == 0.0:
        return field
    spectral = forward_fourier(field)
    chirped = spectral.samples * np.exp(1j * spectral_chirp * grid.frequencies ** 2)
    return inverse_fourier(SpectralField(grid, chirped))

def is_contained(field, floor=CONTAINMENT_FLOOR, margin=CONTAINMENT_MARGIN):
    'True if time and spectral intensity stay below floor * peak over the outer margin'
    edge = max(1, int(round(margin * field.grid.n)))
    for intensity in (field.intensity, forward_fourier(field).intensity):
        wings = np.concatenate((intensity[:edge], intensity[-edge:]))
        if np.max(wings) > floor * np.max(intensity):
            return False
    return True


class _RandomPulseFamily:
    '''
    One noise realization shaped by a time envelope of width T and a spectral
    envelope of width W, parametrized by the product m = T * W. The widths are
    balanced so the time and frequency extents use equal fractions of the grid.
    '''

    def __init__(self, grid, rng):
        self.grid = grid
        self.noise = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) / np.sqrt(2.0)
        half_span = grid.n * grid.dt / 2.0
        max_frequency = np.pi / grid.dt
        self.base_duration = np.sqrt(half_span / max_frequency)

    def field(self, m):
        grid = self.grid
        duration = self.base_duration * (1.0 + m * m) ** 0.25
        w = grid.frequencies
        if m <= 0:
            spectral_envelope = (w == 0).astype(float)
        else:
            width = m / duration
            spectral_envelope = np.exp(-w ** 2 / (2.0 * width ** 2))
        carrier = ifft_centered(self.noise * spectral_envelope)
        envelope = np.exp(-(grid.times - grid.t0) ** 2 / (2.0 * duration ** 2))
        samples = carrier * envelope
        return ComplexField(grid, samples / np.sqrt(np.max(np.abs(samples) ** 2)))

    def tbp(self, m):
        return compute_stats(self.field(m)).tbp

    def nominal_limit(self):
        'Largest m whose envelopes reach 1e-6 at the inner edge of the outer margin'
        grid = self.grid
        half_span = grid.n * grid.dt / 2.0
        limit = (1.0 - 2.0 * CONTAINMENT_MARGIN) * half_span / np.sqrt(np.log(1e6))
        ratio = (limit / self.base_duration) ** 4
        return float(np.sqrt(max(ratio - 1.0, 0.0)))

    def fit(self, target_tbp):
        '''
        Contained field of this realization with a TBP within tolerance of
        target_tbp, or None. The envelope product is bisected on the measured
        TBP; when the nominal envelope limit is not enough the upper bracket
        grows by 25% per step while the pulse stays contained.
        '''
        tolerance = 0.2 * TBP_TOLERANCE * target_tbp
        low = 0.0
        if abs(self.tbp(low) - target_tbp) <= tolerance:
            return self.field(low)

        high = max(self.nominal_limit(), 1.0)
        steps = 0
        while self.tbp(high) < target_tbp:
            steps += 1
            high *= 1.25
            if steps > MAX_RESCALE_STEPS or not is_contained(self.field(high)):
                return None

        m = high
        for _ in range(MAX_BISECTION_STEPS):
            m = 0.5 * (low + high)
            tbp = self.tbp(m)
            if abs(tbp - target_tbp) <= tolerance:
                break
            if tbp < target_tbp:
                low = m
            else:
                high = m

        field = self.field(m)
        if not is_contained(field):
            return None
        if abs(compute_stats(field).tbp - target_tbp) > TBP_TOLERANCE * target_tbp:
            return None
        return field


def generate_random_pulse(grid, target_tbp, seed):
    '''
    Random pulse with an rms time-bandwidth product within 10% of target_tbp.

    Gaussian white noise in frequency is shaped by a Gaussian spectral
    envelope, transformed to time and windowed by a Gaussian temporal
    envelope. A noise realization whose speckle cannot reach the target
    while contained is replaced by the next draw of the seed; GridTooSmall
    is raised after MAX_PULSE_ATTEMPTS draws.
    '''
    if target_tbp < 0.5:
        raise ValueError('Target TBP must be at least 0.5, got {0}'.format(target_tbp))
    for attempt in range(MAX_PULSE_ATTEMPTS):
        rng = np.random.default_rng(seed if attempt == 0 else [seed, attempt])
        field = _RandomPulseFamily(grid, rng).fit(target_tbp)
        if field is not None:
            logger.debug('Random pulse seed %d: target TBP %.3f after %d draws',
                         seed, target_tbp, attempt + 1)
            return field
    raise GridTooSmall('TBP {0} does not fit on a {1}-point grid'.format(target_tbp, grid.n))


def compare_fields(reference, retrieved):
    '''
    Relative rms field error after removing the trivial ambiguities of a PG
    trace: an integer time shift and a constant phase. Both fields are
    normalized to unit energy first.
    '''
    a = reference.samples / np.sqrt(reference.energy)
    b = retrieved.samples / np.sqrt(retrieved.energy)
    # Circular cross-correlation picks the shift
    correlation = scipy.fft.ifft(scipy.fft.fft(a) * np.conj(scipy.fft.fft(b)))
    shift = int(np.argmax(np.abs(correlation)))
    b = np.roll(b, shift)
    phase = np.angle(np.sum(a * np.conj(b)))
    return float(np.sqrt(np.sum(np.abs(a - b * np.exp(1j * phase)) ** 2)))
