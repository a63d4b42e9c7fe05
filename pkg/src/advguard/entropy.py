"""Two-dimensional image entropy and denoising-strategy selection.

The 2-D entropy is the Shannon entropy of the joint distribution of
(pixel value, rounded 5x5 neighborhood average). It drives how hard an
image is denoised: high-entropy images get a fine quantizer plus
smoothing, low-entropy ones an aggressive two-interval quantizer.
"""

from dataclasses import dataclass

import numpy as np

from .image import Image


@dataclass(frozen=True)
class DenoiseStrategy:
    """Interval count plus whether the quantized image is also smoothed."""

    intervals: int
    smooth: bool

    def __post_init__(self):
        if self.intervals not in (2, 4, 6):
            raise ValueError(f"interval count must be 2, 4, or 6, got {self.intervals}")
        if self.smooth != (self.intervals == 6):
            raise ValueError("smoothing is applied exactly when intervals == 6")


@dataclass(eq=False)
class JointHistogram:
    """256x256 counts indexed by (pixel value, rounded neighborhood average)."""

    counts: np.ndarray
    total: int


@dataclass(frozen=True)
class EntropyProfile:
    """2-D entropy in bits; for RGB, h2d averages the three plane entropies."""

    h2d: float
    per_plane: tuple


def _plane_array(plane):
    if isinstance(plane, Image):
        if plane.planes != 1:
            raise ValueError("expected a single-plane image")
        return plane.pixels[:, :, 0]
    arr = np.asarray(plane)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D plane")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 255:
            raise ValueError("plane values must be integers in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def neighborhood_average(plane):
    """Rounded mean over each pixel's 5x5 neighborhood, replicate-padded.

    Accepts a single-plane Image or a 2-D uint8 array and returns the same
    kind. Rounding is half away from zero, done in exact integer arithmetic.
    """
    arr = _plane_array(plane)
    h, w = arr.shape
    padded = np.pad(arr, 2, mode="edge").astype(np.int64)
    acc = np.zeros((h, w), dtype=np.int64)
    for dr in range(5):
        for dc in range(5):
            acc += padded[dr:dr + h, dc:dc + w]
    # round(acc / 25) with ties away from zero; operands are nonnegative
    avg = ((2 * acc + 25) // 50).astype(np.uint8)
    return Image(avg) if isinstance(plane, Image) else avg


def joint_histogram(plane):
    """Count (pixel value, neighborhood average) pairs over one plane."""
    arr = _plane_array(plane)
    avg = neighborhood_average(arr)
    pairs = arr.astype(np.int64).ravel() * 256 + avg.astype(np.int64).ravel()
    counts = np.bincount(pairs, minlength=256 * 256).reshape(256, 256)
    return JointHistogram(counts, int(arr.size))


def _plane_entropy_bits(hist):
    counts = hist.counts.ravel()  # row-major over (value, average)
    nz = counts[counts > 0]
    p = nz / hist.total
    return float(-(p * np.log2(p)).sum()) + 0.0  # +0.0 normalizes -0.0


def entropy_2d(img):
    """2-D entropy of an image, per plane and averaged across planes."""
    per = tuple(
        _plane_entropy_bits(joint_histogram(img.pixels[:, :, k]))
        for k in range(img.planes)
    )
    return EntropyProfile(float(np.mean(per)), per)


def select_strategy(profile):
    """Pick the denoising strategy for a 2-D entropy value.

    Above 9.50 bits: 6 intervals with smoothing; 8.50 through 9.50
    inclusive: 4 intervals; below 8.50: 2 intervals. Accepts an
    EntropyProfile or a bare entropy value.
    """
    h = profile.h2d if isinstance(profile, EntropyProfile) else float(profile)
    if h > 9.50:
        return DenoiseStrategy(6, True)
    if h >= 8.50:
        return DenoiseStrategy(4, False)
    return DenoiseStrategy(2, False)
