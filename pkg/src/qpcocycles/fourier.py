"""Uniform-grid Fourier helpers (axis 0 is the grid axis)."""

import numpy as np


def grid(n, period=1.0):
    return np.arange(n) * (period / n)


def wavenumbers(n, period=1.0):
    """Angular wavenumbers 2 pi k / period, Nyquist mode zeroed."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0
    return 2 * np.pi * k / period


def derivative(samples, period=1.0, order=1):
    samples = np.asarray(samples)
    n = samples.shape[0]
    w = wavenumbers(n, period)
    w = w.reshape((n,) + (1,) * (samples.ndim - 1))
    out = np.fft.ifft((1j * w) ** order * np.fft.fft(samples, axis=0), axis=0)
    return out if np.iscomplexobj(samples) else out.real


def shift(samples, c, period=1.0):
    """Trigonometric interpolant evaluated at grid + c."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    k = np.fft.fftfreq(n, d=1.0 / n)
    phase = np.exp(2j * np.pi * k * c / period)
    if n % 2 == 0:
        phase[n // 2] = np.cos(np.pi * n * c / period)
    phase = phase.reshape((n,) + (1,) * (samples.ndim - 1))
    out = np.fft.ifft(phase * np.fft.fft(samples, axis=0), axis=0)
    return out if np.iscomplexobj(samples) else out.real


def coefficients(samples):
    """Fourier coefficients c_k (k = fftfreq order) with f = sum c_k e^{2 pi i k t}."""
    samples = np.asarray(samples)
    return np.fft.fft(samples, axis=0) / samples.shape[0]


def modes(n):
    return np.fft.fftfreq(n, d=1.0 / n).astype(int)


def mean(samples):
    """Periodic trapezoid rule."""
    return np.mean(np.asarray(samples), axis=0)


def l1(samples):
    return float(np.mean(np.linalg.norm(np.atleast_2d(np.asarray(samples).T).T, axis=-1)))
