# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import numpy as np
import scipy.ndimage

# True for 1, 2, 4, 8...
def is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0

# Centered sample indices: zero at n // 2
def centered_indices(n):
    return np.arange(n) - n // 2

# Super-Gaussian profile exp(-ln(1/floor) * |x / x0|^order), equal to floor at |x| = x0
def super_gaussian(x, x0, order, floor):
    return np.exp(-np.log(1.0 / floor) * np.abs(np.asarray(x) / x0) ** order)

# Closed-form least squares scale mu minimizing sum((a - mu * b)^2)
def scale_fit(a, b):
    denominator = np.sum(b * b)
    if denominator <= 0:
        return 0.0
    return float(np.sum(a * b) / denominator)

# Block means over non-overlapping groups of `factor` samples along every axis
def block_mean(values, factor):
    values = np.asarray(values)
    if values.ndim == 1:
        return values.reshape(-1, factor).mean(axis=1)
    rows, cols = values.shape
    return values.reshape(rows // factor, factor, cols // factor, factor).mean(axis=(1, 3))

# Triangular average over 2 * factor - 1 samples, then every factor-th sample.
# The sample at index n // 2 is kept, so centered axes stay centered.
def centered_decimate(values, factor, axis=-1):
    values = np.asarray(values, dtype=float)
    if factor == 1:
        return values
    weights = np.concatenate((np.arange(1, factor + 1), np.arange(factor - 1, 0, -1)))
    smoothed = scipy.ndimage.convolve1d(values, weights / np.sum(weights), axis=axis,
                                        mode='constant')
    n = values.shape[axis]
    return np.take(smoothed, np.arange((n // 2) % factor, n, factor), axis=axis)

# Central m samples of a centered axis
def centered_crop(values, m, axis=-1):
    values = np.asarray(values)
    start = values.shape[axis] // 2 - m // 2
    return np.take(values, np.arange(start, start + m), axis=axis)

# Root mean square of an array
def rms(values):
    return float(np.sqrt(np.mean(np.abs(values) ** 2)))
