"""SpecAugment policies on log-mel feature matrices.

Three policies: local time warping, frequency masking, and time masking.
Masked cells are filled with the mean of the matrix the operation receives,
which keeps the global feature mean unchanged. Every operation consumes
draws from the caller's RNG in a fixed, documented order so augmentation is
reproducible from (input, policy, seed):

    time_warp:  pivot, displacement
    each mask:  width, then start
    spec_augment: time_warp, then freq masks, then time masks, one stream
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from .dsp import FeatureMatrix
from .errors import DataError

logger = logging.getLogger(__name__)


@dataclass
class SpecAugPolicy:
    """Mask/warp bounds. T and F cap mask widths; W bounds the warp shift."""

    T: int = 40
    F: int = 30
    n_time_masks: int = 2
    n_freq_masks: int = 2
    W: int = 5
    seed: int = 0

    def validate(self) -> None:
        if min(self.T, self.F, self.W, self.n_time_masks, self.n_freq_masks) < 0:
            raise DataError("SpecAugment bounds and counts must be non-negative")


def _with_data(feat: FeatureMatrix, data: np.ndarray) -> FeatureMatrix:
    return FeatureMatrix(data, feat.kind, feat.frame_shift_ms, feat.source_rate)


def freq_mask(
    feat: FeatureMatrix, policy: SpecAugPolicy, rng: np.random.Generator
) -> FeatureMatrix:
    """Mask n_freq_masks random channel blocks of width uniform{0..F}."""
    policy.validate()
    dim = feat.dim
    if policy.F > dim:
        raise DataError(f"frequency mask bound F={policy.F} exceeds feature dim {dim}")
    data = feat.data.copy()
    fill = np.float32(feat.data.mean()) if data.size else np.float32(0.0)
    for _ in range(policy.n_freq_masks):
        width = int(rng.integers(0, policy.F, endpoint=True))
        start = int(rng.integers(0, dim - width, endpoint=True))
        data[:, start : start + width] = fill
    return _with_data(feat, data)


def time_mask(
    feat: FeatureMatrix, policy: SpecAugPolicy, rng: np.random.Generator
) -> FeatureMatrix:
    """Mask n_time_masks random frame blocks of width uniform{0..min(T, n_frames)}."""
    policy.validate()
    n_frames = feat.n_frames
    bound = min(policy.T, n_frames)
    data = feat.data.copy()
    fill = np.float32(feat.data.mean()) if data.size else np.float32(0.0)
    for _ in range(policy.n_time_masks):
        width = int(rng.integers(0, bound, endpoint=True))
        start = int(rng.integers(0, n_frames - width, endpoint=True))
        data[start : start + width, :] = fill
    return _with_data(feat, data)


def time_warp(
    feat: FeatureMatrix, policy: SpecAugPolicy, rng: np.random.Generator
) -> FeatureMatrix:
    """Shift a random pivot frame by up to W frames, linearly interpolating
    the frames on either side.

    Frame count is unchanged and the first and last frames are fixed points;
    to guarantee that, a displaced pivot is clamped to [1, n_frames - 2].
    Inputs with n_frames <= 2 * W are returned unchanged (no draws consumed).
    """
    policy.validate()
    n = feat.n_frames
    w = policy.W
    if n <= 2 * w:
        logger.warning("time_warp skipped: %d frames <= 2*W=%d", n, 2 * w)
        return _with_data(feat, feat.data.copy())
    pivot = int(rng.integers(w, n - w - 1, endpoint=True))
    shift = int(rng.integers(-w, w, endpoint=True))
    if shift == 0:
        return _with_data(feat, feat.data.copy())
    target = min(max(pivot + shift, 1), n - 2)

    src = np.empty(n, dtype=np.float64)
    idx = np.arange(n, dtype=np.float64)
    src[: target + 1] = idx[: target + 1] * (pivot / target)
    src[target:] = pivot + (idx[target:] - target) * ((n - 1 - pivot) / (n - 1 - target))

    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, n - 1)
    frac = (src - lo).astype(np.float32)[:, None]
    data = feat.data[lo] * (1.0 - frac) + feat.data[hi] * frac
    return _with_data(feat, data.astype(np.float32))


def spec_augment(
    feat: FeatureMatrix, policy: SpecAugPolicy, rng: np.random.Generator
) -> FeatureMatrix:
    """Apply time warp, then frequency masks, then time masks."""
    out = time_warp(feat, policy, rng)
    out = freq_mask(out, policy, rng)
    out = time_mask(out, policy, rng)
    return out


def utterance_rng(seed: int, utt_id: str) -> np.random.Generator:
    """Per-utterance RNG stream derived from the global seed and the id."""
    digest = hashlib.sha256(utt_id.encode("utf-8")).digest()
    return np.random.default_rng(
        np.random.SeedSequence([seed, int.from_bytes(digest[:8], "little")])
    )
