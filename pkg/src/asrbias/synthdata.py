"""Synthetic formant corpora for exercising the VTLN pipeline end to end.

Speakers are parameterized by a vocal-tract scale: a speaker with scale s
has every formant at center / s, so child-like speakers (s < 1, shorter
tract, higher formants) should be assigned warp factors below 1. The warp
estimator is expected to recover approximately s for each utterance.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import corpus, dsp

BASE_FORMANTS = ((500.0, 90.0), (1500.0, 110.0), (2500.0, 140.0), (3500.0, 180.0))


def make_warp_corpus(
    out_dir,
    scales=(0.85, 1.0, 1.15),
    n_per_scale: int | dict = 10,
    duration_s: float = 2.0,
    rate: int = 16000,
    seed: int = 0,
    noise_level: float = 1e-4,
    name: str = "train",
) -> Path:
    """Write WAVs plus a manifest; returns the manifest path.

    n_per_scale is either one count for all scales or a {scale: count}
    mapping (a reference-heavy training set anchors the warp estimates).
    Speaker groups are labeled Norm for scale 1.0, DC for the smallest
    scale, and DOA for other scales, mirroring a child / norm / long-tract
    split. Pitch varies per speaker; the vocal-tract scale does not vary
    within a group.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    small = min(scales)
    counts = (
        {s: n_per_scale for s in scales} if isinstance(n_per_scale, int) else dict(n_per_scale)
    )
    records = []
    for s_idx, scale in enumerate(scales):
        for k in range(counts[scale]):
            # Low pitch keeps at least two harmonics inside every mel channel,
            # so the features trace the formant envelope rather than the comb.
            f0 = 62.0 + 0.9 * ((7 * k + 3 * s_idx) % 12)
            wave = dsp.synth_formants(
                f0, list(BASE_FORMANTS), duration_s, rate, scale=1.0 / scale
            )
            samples = wave.samples + noise_level * rng.standard_normal(len(wave)).astype(
                np.float32
            )
            wave = dsp.Waveform(samples, rate)
            utt_id = f"{name}-s{scale:g}-{k:02d}"
            wav_path = out_dir / f"{utt_id}.wav"
            corpus.write_wav(wave, wav_path)
            if scale == 1.0:
                group = "Norm"
            elif scale == small:
                group = "DC"
            else:
                group = "DOA"
            records.append(
                corpus.UtteranceRecord(
                    utt_id=utt_id,
                    audio_path=str(wav_path),
                    transcript="synthetic vowel",
                    speaker_id=f"spk-{name}-{s_idx}-{k}",
                    group=group,
                    style="Read",
                )
            )
    manifest = out_dir / f"{name}.tsv"
    corpus.write_manifest(records, manifest)
    return manifest


def true_scale(utt_id: str) -> float:
    """Recover the generation scale from a make_warp_corpus utterance id."""
    part = utt_id.split("-s")[1]
    return float(part.split("-")[0])
