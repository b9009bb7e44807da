# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ranafrog.errors import AllZero
from ranafrog.pulse import fft_centered, ifft_centered
from ranafrog.utils import centered_indices, is_power_of_two, super_gaussian

logger = logging.getLogger(__name__)

DEFAULT_MULTIPLICATIVE_NOISE = 0.01
DEFAULT_ADDITIVE_NOISE = 0.01
CORNER_BLOCK = 8
PASSBAND_ORDER = 6
PASSBAND_WIDTH = 0.75    # fraction of each axis inside the half-maximum points


class Geometry(str, Enum):
    'PG and TG share the signal field E(t)|E(t - tau)|^2 and therefore the trace'
    pg = 'pg'
    tg = 'tg'


@dataclass(frozen=True)
class FrogTrace:
    '''
    Trace values indexed (frequency bin, delay bin) on centered axes.
    Noisy traces may hold negative values until they are preprocessed.
    '''
    values: np.ndarray
    dtau: float
    domega: float
    geometry: Geometry = Geometry.pg

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError('Trace must be square, got shape {0}'.format(values.shape))
        if not is_power_of_two(values.shape[0]):
            raise ValueError('Trace size must be a power of two, got {0}'.format(values.shape[0]))
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'geometry', Geometry(self.geometry))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def delays(self):
        return centered_indices(self.n) * self.dtau

    @property
    def frequencies(self):
        return centered_indices(self.n) * self.domega

    def with_values(self, values):
        return FrogTrace(values, self.dtau, self.domega, self.geometry)

    def peak_normalized(self):
        peak = np.max(self.values)
        if peak <= 0:
            raise AllZero('Trace has no positive values')
        return self.with_values(self.values / peak)


@dataclass(frozen=True)
class NoiseSpec:
    multiplicative_fraction: float = DEFAULT_MULTIPLICATIVE_NOISE
    additive_fraction: float = DEFAULT_ADDITIVE_NOISE
    seed: int = 0

    def __post_init__(self):
        if self.multiplicative_fraction < 0 or self.additive_fraction < 0:
            raise ValueError('Noise fractions must be nonnegative')


# Signal field

def delay_shifted(values):
    'Matrix G[k, j] = values[k - (j - n/2)], zero where the shift leaves the grid'
    n = len(values)
    source = np.arange(n)[:, None] - centered_indices(n)[None, :]
    inside = (source >= 0) & (source < n)
    return np.where(inside, values[np.clip(source, 0, n - 1)], 0)

def signal_matrix(samples):
    'E_sig[k, j] = E(t_k) |E(t_k - tau_j)|^2 over (time, delay)'
    samples = np.asarray(samples)
    return samples[:, None] * delay_shifted(np.abs(samples) ** 2)

def trace_values(samples):
    'Unnormalized trace |FT_t E_sig|^2 indexed (frequency, delay)'
    return np.abs(fft_centered(signal_matrix(samples), axis=0)) ** 2

def pg_signal_field(field, delay_index):
    'E(t) |E(t - tau)|^2 for tau = delay_index * dt'
    n = field.grid.n
    if abs(delay_index) >= n:
        raise ValueError('Delay index {0} outside grid of {1} samples'.format(delay_index, n))
    intensity = field.intensity
    gate = np.zeros(n)
    if delay_index >= 0:
        gate[delay_index:] = intensity[:n - delay_index]
    else:
        gate[:n + delay_index] = intensity[-delay_index:]
    return field.samples * gate

def synthesize_trace(field, geometry=Geometry.pg, normalize=True):
    values = trace_values(field.samples)
    if normalize:
        values = values / np.max(values)
    return FrogTrace(values, field.grid.dt, field.grid.dw, geometry)


# Noise and preprocessing

def add_noise(trace, spec):
    rng = np.random.default_rng(spec.seed)
    shape = trace.values.shape
    multiplicative = rng.standard_normal(shape)
    additive = rng.standard_normal(shape)
    peak = np.max(trace.values)
    noisy = (trace.values * (1.0 + spec.multiplicative_fraction * multiplicative)
             + spec.additive_fraction * peak * additive)
    return trace.with_values(noisy)

def corner_background(values, block=CORNER_BLOCK):
    'Mean of the four block x block corner regions'
    block = min(block, values.shape[0] // 2)
    corners = (values[:block, :block], values[:block, -block:],
               values[-block:, :block], values[-block:, -block:])
    return float(np.mean([c.mean() for c in corners]))

def lowpass_passband(n, order=PASSBAND_ORDER, width=PASSBAND_WIDTH):
    'Separable super-Gaussian passband reaching one half at width * n / 2 bins from center'
    axis = super_gaussian(centered_indices(n), width * n / 2.0, order, 0.5)
    return axis[:, None] * axis[None, :]

def preprocess(trace):
    values = trace.values - corner_background(trace.values)
    if np.max(values) <= 0:
        raise AllZero('Trace is entirely non-positive after background subtraction')
    spectrum = fft_centered(fft_centered(values, axis=0), axis=1)
    spectrum *= lowpass_passband(trace.n)
    filtered = np.real(ifft_centered(ifft_centered(spectrum, axis=0), axis=1))
    filtered = np.clip(filtered, 0.0, None)
    peak = np.max(filtered)
    if peak <= 0:
        raise AllZero('Trace vanished after filtering')
    return trace.with_values(filtered / peak)
