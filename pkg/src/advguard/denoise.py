"""Scalar quantization, cross-mask smoothing, and the combined denoising filter.

The adaptive filter quantizes every input; images above the high-entropy
threshold are additionally smoothed, and the final output keeps, per pixel,
whichever candidate (quantized or smoothed-quantized) stays closer to the
original intensity. Ties keep the quantized value.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .entropy import entropy_2d, select_strategy
from .image import Image


@dataclass(frozen=True)
class Quantizer:
    """Interval partition of 0..255; codeword is each interval's lower bound."""

    intervals: int
    codebook: tuple  # (lower, upper, codeword) per interval


@dataclass(eq=False)
class FilterMask:
    """5x5 integer filter mask; weights indexed by [s + 2, t + 2]."""

    weights: np.ndarray

    @property
    def normalizer(self):
        return int(self.weights.sum())


@dataclass(eq=False)
class FilteredTriple:
    """Quantized, optionally smoothed-quantized, and combined output images."""

    quantized: Image
    smoothed_quantized: Optional[Image]
    combined: Image


def make_quantizer(intervals):
    """Build the uniform left-value quantizer with 2, 4, or 6 intervals.

    Steps are 128, 64, and 50; with 6 intervals the last interval is the
    short [250, 255] one.
    """
    steps = {2: 128, 4: 64, 6: 50}
    if intervals not in steps:
        raise ValueError(f"unsupported interval count: {intervals}")
    step = steps[intervals]
    codebook = tuple(
        (lo, min(lo + step - 1, 255), lo) for lo in range(0, 256, step)
    )
    return Quantizer(intervals, codebook)


def quantize(img, q):
    """Replace every pixel with its interval's codeword, per plane."""
    lowers = np.array([lo for lo, _, _ in q.codebook])
    codes = np.array([code for _, _, code in q.codebook], dtype=np.uint8)
    idx = np.searchsorted(lowers, img.pixels, side="right") - 1
    return Image(codes[idx])


def cross_mask():
    """The 5x5 mask weighting the center pixel and its axis neighbors by 1."""
    w = np.zeros((5, 5), dtype=np.int64)
    w[2, :] = 1
    w[:, 2] = 1
    return FilterMask(w)


def averaging_mask():
    """The plain 5x5 averaging mask (all weights 1)."""
    return FilterMask(np.ones((5, 5), dtype=np.int64))


def _convolve_plane(arr, mask):
    # out[x, y] = round(sum_{s,t} w(s,t) f(x-s, y-t) / normalizer),
    # replicate padding, ties away from zero, exact integer arithmetic
    h, w = arr.shape
    padded = np.pad(arr, 2, mode="edge").astype(np.int64)
    acc = np.zeros((h, w), dtype=np.int64)
    for s in range(-2, 3):
        for t in range(-2, 3):
            wt = int(mask.weights[s + 2, t + 2])
            if wt:
                acc += wt * padded[2 - s:2 - s + h, 2 - t:2 - t + w]
    n = mask.normalizer
    return ((2 * acc + n) // (2 * n)).astype(np.uint8)


def smooth(img, mask=None):
    """Normalized mask convolution of each plane (default: cross mask)."""
    if mask is None:
        mask = cross_mask()
    out = np.stack(
        [_convolve_plane(img.pixels[:, :, k], mask) for k in range(img.planes)],
        axis=2,
    )
    return Image(out)


def combine(original, quantized, smoothed_quantized):
    """Per pixel, keep whichever candidate is closer to the original.

    Ties go to the quantized value.
    """
    if not (original.pixels.shape == quantized.pixels.shape == smoothed_quantized.pixels.shape):
        raise ValueError("shape mismatch between original and filtered images")
    f = original.pixels.astype(np.int16)
    q = quantized.pixels.astype(np.int16)
    s = smoothed_quantized.pixels.astype(np.int16)
    out = np.where(np.abs(q - f) <= np.abs(s - f), q, s)
    return Image(out.astype(np.uint8))


def adaptive_filter(img, strategy=None):
    """Denoise an image according to its 2-D entropy.

    When `strategy` is omitted it is selected from the image's entropy.
    Smoothing (6-interval strategy only) operates on the quantized image,
    and the combined output applies the per-pixel closest-candidate rule;
    otherwise the combined output is simply the quantized image.
    """
    if strategy is None:
        strategy = select_strategy(entropy_2d(img))
    quantized = quantize(img, make_quantizer(strategy.intervals))
    if not strategy.smooth:
        return FilteredTriple(quantized, None, quantized)
    smoothed = smooth(quantized, cross_mask())
    return FilteredTriple(quantized, smoothed, combine(img, quantized, smoothed))
