"""Hemodynamic alignment: [0,1] normalization, double-gamma HRF convolution,
and downsampling from activation rate (50 Hz) to acquisition rate (0.5 Hz).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import gamma as gamma_dist

from .types import FeatureMatrix

# Double-gamma constants: main lobe peaking at (PEAK_SHAPE-1)*DISPERSION = 5 s,
# undershoot peaking at 15 s with 1/6 amplitude, 32 s support.
PEAK_SHAPE = 6.0
UNDERSHOOT_SHAPE = 16.0
DISPERSION = 1.0
UNDERSHOOT_RATIO = 1.0 / 6.0
DEFAULT_DURATION = 32.0


@dataclass
class HrfKernel:
    samples: np.ndarray
    oversample_hz: float
    duration_seconds: float

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("kernel contains non-finite values")


@dataclass
class ResampleSpec:
    input_rate: float = 50.0
    output_rate: float = 0.5
    n_output: int = 0

    def __post_init__(self) -> None:
        if not (self.input_rate > self.output_rate > 0):
            raise ValueError(f"need input_rate > output_rate > 0, got {self.input_rate}, {self.output_rate}")


def minmax_normalize(activations: FeatureMatrix) -> FeatureMatrix:
    """Map each column independently to [0, 1]; constant columns become zeros."""
    data = activations.data
    lo = data.min(axis=0)
    span = data.max(axis=0) - lo
    out = np.zeros_like(data)
    live = span > 0
    out[:, live] = (data[:, live] - lo[live]) / span[live]
    return FeatureMatrix(out, activations.sample_rate, activations.name, activations.layer_index)


def glover_hrf(oversample_hz: float = 50.0, duration_seconds: float = DEFAULT_DURATION) -> HrfKernel:
    """Canonical double-gamma impulse response, peak-normalized to 1.

    Positive lobe peaks near 5 s, followed by a negative undershoot.
    """
    if oversample_hz < 10:
        raise ValueError("oversample_hz must be >= 10")
    if duration_seconds < 20:
        raise ValueError("duration_seconds must be >= 20")
    n = int(round(duration_seconds * oversample_hz))
    t = np.arange(n) / oversample_hz
    main = gamma_dist.pdf(t, PEAK_SHAPE / DISPERSION, scale=DISPERSION)
    under = gamma_dist.pdf(t, UNDERSHOOT_SHAPE / DISPERSION, scale=DISPERSION)
    kernel = main - UNDERSHOOT_RATIO * under
    kernel /= kernel.max()
    return HrfKernel(kernel, oversample_hz, duration_seconds)


def convolve_downsample(
    activations: FeatureMatrix, kernel: HrfKernel, spec: ResampleSpec
) -> FeatureMatrix:
    """Causal convolution with the HRF, then nearest-sample pick at scan times.

    Scan k reads the convolved signal at t_k = k / output_rate. History before
    onset is zero-padded, so early scans see only the kernel's rising edge.
    """
    if activations.sample_rate != spec.input_rate:
        raise ValueError(
            f"activation rate {activations.sample_rate} != spec input_rate {spec.input_rate}"
        )
    if kernel.oversample_hz != spec.input_rate:
        raise ValueError(
            f"kernel rate {kernel.oversample_hz} != spec input_rate {spec.input_rate}"
        )
    data = activations.data
    n_in = data.shape[0]
    conv_len = n_in + len(kernel.samples) - 1
    scan_idx = np.rint(np.arange(spec.n_output) / spec.output_rate * spec.input_rate).astype(int)
    if spec.n_output > 0 and scan_idx[-1] >= conv_len:
        raise ValueError(
            f"scan {spec.n_output - 1} at sample {scan_idx[-1]} beyond convolved support {conv_len}"
        )
    # FFT convolution over all columns at once; causal "full" mode.
    n_fft = 1 << (conv_len - 1).bit_length()
    spec_x = np.fft.rfft(data, n=n_fft, axis=0)
    spec_h = np.fft.rfft(kernel.samples, n=n_fft)
    conv = np.fft.irfft(spec_x * spec_h[:, None], n=n_fft, axis=0)[:conv_len]
    out = conv[scan_idx]
    return FeatureMatrix(
        out, spec.output_rate, activations.name, activations.layer_index
    )


def hrf_align(
    activations: FeatureMatrix,
    n_scans: int,
    tr_seconds: float = 2.0,
    normalize: bool = True,
) -> FeatureMatrix:
    """Full alignment pipeline: [0,1] normalize, convolve, downsample to TR."""
    if normalize:
        activations = minmax_normalize(activations)
    kernel = glover_hrf(oversample_hz=activations.sample_rate)
    spec = ResampleSpec(activations.sample_rate, 1.0 / tr_seconds, n_scans)
    return convolve_downsample(activations, kernel, spec)
