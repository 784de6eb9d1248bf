"""Waveform-level augmentation and feature extraction.

Covers speed perturbation by windowed-sinc resampling, STFT power spectra,
VTLN-warped mel filterbanks, log-mel and MFCC features, and a deterministic
formant synthesizer used as a test oracle.

All functions are pure: they never mutate their inputs and are safe to call
concurrently on different utterances.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct, idct

from .errors import AudioError, DataError

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-10

# Sanity bounds for speed and warp factors.
SPEED_MIN, SPEED_MAX = 0.5, 2.0
WARP_MIN, WARP_MAX = 0.5, 2.0

# Zero crossings on each side of the resampling kernel.
_SINC_ZEROS = 16

FEATURE_KINDS = ("power", "logmel", "mfcc")


@dataclass
class Waveform:
    """Mono PCM audio: float32 samples nominally in [-1, 1) plus a rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 1:
            raise AudioError("waveform must be one-dimensional")
        if not np.all(np.isfinite(self.samples)):
            raise AudioError("waveform contains non-finite samples")
        if self.sample_rate <= 0:
            raise AudioError("sample rate must be positive")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class FrameConfig:
    """Short-time analysis settings for the feature frontend."""

    frame_length_ms: float = 25.0
    frame_shift_ms: float = 10.0
    preemphasis: float = 0.97
    window: str = "hamming"
    fft_size: int = 512

    def validate(self, sample_rate: int) -> None:
        if self.frame_shift_ms > self.frame_length_ms:
            raise DataError("frame shift must not exceed frame length")
        if not 0.0 <= self.preemphasis < 1.0:
            raise DataError("preemphasis must be in [0, 1)")
        if self.window not in ("hamming", "hann"):
            raise DataError(f"unknown window {self.window!r}")
        n = self.frame_samples(sample_rate)
        if self.fft_size < n:
            raise DataError(f"fft_size {self.fft_size} < frame length {n} samples")
        if self.fft_size & (self.fft_size - 1):
            raise DataError("fft_size must be a power of two")

    def frame_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_length_ms * sample_rate / 1000.0))

    def shift_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_shift_ms * sample_rate / 1000.0))


@dataclass
class MelConfig:
    """Mel filterbank settings. f_max / vtln_high of None resolve from the rate."""

    n_mels: int = 80
    f_min: float = 20.0
    f_max: float | None = None
    vtln_low: float = 100.0
    vtln_high: float | None = None

    def resolved(self, sample_rate: int) -> tuple[float, float, float, float]:
        """Return (f_min, f_max, vtln_low, vtln_high) with rate-derived defaults."""
        nyquist = sample_rate / 2.0
        f_max = nyquist if self.f_max is None else self.f_max
        vtln_high = nyquist - 500.0 if self.vtln_high is None else self.vtln_high
        if not 0.0 <= self.f_min < f_max <= nyquist:
            raise DataError("need 0 <= f_min < f_max <= Nyquist")
        if self.vtln_low <= self.f_min:
            raise DataError("vtln_low must exceed f_min")
        if vtln_high >= f_max:
            raise DataError("vtln_high must be below f_max")
        return self.f_min, f_max, self.vtln_low, vtln_high


@dataclass
class FeatureMatrix:
    """Frames x dims feature matrix with framing metadata.

    data is always float32 so archive round trips are bit-exact.
    """

    data: np.ndarray
    kind: str
    frame_shift_ms: float
    source_rate: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise DataError("feature matrix must be 2-D")
        if self.kind not in FEATURE_KINDS:
            raise DataError(f"unknown feature kind {self.kind!r}")
        if not np.all(np.isfinite(self.data)):
            raise DataError("feature matrix contains non-finite entries")

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def hz_to_mel(freq):
    return 2595.0 * np.log10(1.0 + np.asarray(freq, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def speed_perturb(wave: Waveform, beta: float) -> Waveform:
    """Resample so the signal plays at beta times its original speed.

    The output keeps the input sample rate, has round(N / beta) samples, and
    the spectral content of a stationary tone at f Hz moves to beta * f Hz.
    Resampling uses a Hann-windowed sinc kernel with 16 zero crossings and a
    cutoff lowered to Nyquist / beta when beta > 1 (anti-aliasing).
    """
    beta = float(beta)
    if not SPEED_MIN <= beta <= SPEED_MAX:
        raise DataError(f"speed factor {beta} outside [{SPEED_MIN}, {SPEED_MAX}]")
    if len(wave) == 0:
        raise AudioError("cannot speed-perturb an empty waveform")
    if beta == 1.0:
        return Waveform(wave.samples.copy(), wave.sample_rate)

    x = wave.samples.astype(np.float64)
    n_in = len(x)
    n_out = int(np.floor(n_in / beta + 0.5))
    cutoff = min(1.0, 1.0 / beta)
    half = int(np.ceil(_SINC_ZEROS / cutoff))

    pos = np.arange(n_out, dtype=np.float64) * beta
    base = np.floor(pos).astype(np.int64)
    offsets = np.arange(-half, half + 1, dtype=np.int64)
    idx = base[:, None] + offsets[None, :]
    # Distance from each tap to the interpolation point, in cutoff units.
    d = (idx - pos[:, None]) * cutoff
    kernel = cutoff * np.sinc(d) * (0.5 + 0.5 * np.cos(np.pi * d / _SINC_ZEROS))
    kernel[np.abs(d) > _SINC_ZEROS] = 0.0

    valid = (idx >= 0) & (idx < n_in)
    gathered = np.where(valid, x[np.clip(idx, 0, n_in - 1)], 0.0)
    y = np.sum(gathered * kernel, axis=1)
    return Waveform(y.astype(np.float32), wave.sample_rate)


def warp_freq(alpha: float, freq, mel_cfg: MelConfig, nyquist: float):
    """Piecewise-linear VTLN frequency map g_alpha on [0, nyquist].

    The central band maps f -> f / alpha; linear end segments pin
    g_alpha(0) = 0 and g_alpha(nyquist) = nyquist. Identity for alpha = 1.
    Accepts a scalar or an array of frequencies.
    """
    alpha = float(alpha)
    if not WARP_MIN <= alpha <= WARP_MAX:
        raise DataError(f"warp factor {alpha} outside [{WARP_MIN}, {WARP_MAX}]")
    f = np.asarray(freq, dtype=np.float64)
    if np.any(f < 0) or np.any(f > nyquist):
        raise DataError("frequency outside [0, nyquist]")
    if alpha == 1.0:
        return f if f.ndim else float(f)

    _, _, _, vtln_high = mel_cfg.resolved(int(round(2 * nyquist)))
    hi = vtln_high * min(1.0, alpha)
    scale = 1.0 / alpha
    # With g(0) pinned at 0 the lower segment is collinear with the central
    # band, so only the upper segment needs its own slope.
    upper_slope = (nyquist - hi * scale) / (nyquist - hi)
    out = np.where(f <= hi, f * scale, hi * scale + (f - hi) * upper_slope)
    return out if out.ndim else float(out)


def mel_filterbank(
    mel_cfg: MelConfig,
    frame_cfg: FrameConfig,
    sample_rate: int,
    alpha: float = 1.0,
) -> np.ndarray:
    """Triangular mel filterbank matrix of shape (n_mels, fft_size // 2 + 1).

    Filter node frequencies are spaced evenly on the mel scale; for
    alpha != 1 each node is moved through the VTLN map before the triangles
    are evaluated, so alpha < 1 shifts the filters toward higher frequencies.
    """
    frame_cfg.validate(sample_rate)
    f_min, f_max, _, _ = mel_cfg.resolved(sample_rate)
    nyquist = sample_rate / 2.0
    n_bins = frame_cfg.fft_size // 2 + 1
    bin_hz = np.arange(n_bins, dtype=np.float64) * sample_rate / frame_cfg.fft_size

    nodes_mel = np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), mel_cfg.n_mels + 2)
    if alpha != 1.0:
        # Clip away the ~1e-12 Hz overshoot of the mel round trip.
        nodes_hz = np.clip(mel_to_hz(nodes_mel), 0.0, nyquist)
        nodes_mel = hz_to_mel(warp_freq(alpha, nodes_hz, mel_cfg, nyquist))

    bin_mel = hz_to_mel(bin_hz)
    left = nodes_mel[:-2, None]
    center = nodes_mel[1:-1, None]
    right = nodes_mel[2:, None]
    up = (bin_mel[None, :] - left) / (center - left)
    down = (right - bin_mel[None, :]) / (right - center)
    fbank = np.maximum(0.0, np.minimum(up, down))

    row_sums = fbank.sum(axis=1)
    if np.any(row_sums <= 0.0):
        bad = int(np.argmin(row_sums))
        raise DataError(
            f"mel filter {bad} has empty support; reduce n_mels or raise fft_size"
        )
    return fbank


def _frame_signal(wave: Waveform, frame_cfg: FrameConfig) -> np.ndarray:
    frame_cfg.validate(wave.sample_rate)
    n_frame = frame_cfg.frame_samples(wave.sample_rate)
    n_shift = frame_cfg.shift_samples(wave.sample_rate)
    x = wave.samples.astype(np.float64)
    if len(x) < n_frame:
        raise AudioError(
            f"audio of {len(x)} samples is shorter than one {n_frame}-sample frame"
        )
    if frame_cfg.preemphasis > 0.0:
        y = np.empty_like(x)
        y[0] = x[0]
        y[1:] = x[1:] - frame_cfg.preemphasis * x[:-1]
        x = y
    n_frames = 1 + (len(x) - n_frame) // n_shift
    starts = np.arange(n_frames) * n_shift
    frames = x[starts[:, None] + np.arange(n_frame)[None, :]]
    if frame_cfg.window == "hamming":
        win = np.hamming(n_frame)
    else:
        win = np.hanning(n_frame)
    return frames * win


def power_spectrum(wave: Waveform, frame_cfg: FrameConfig) -> FeatureMatrix:
    """Framed short-time power spectrum, dim = fft_size // 2 + 1."""
    frames = _frame_signal(wave, frame_cfg)
    spec = np.abs(np.fft.rfft(frames, n=frame_cfg.fft_size, axis=1)) ** 2
    return FeatureMatrix(
        spec.astype(np.float32), "power", frame_cfg.frame_shift_ms, wave.sample_rate
    )


def _mel_energies(wave, frame_cfg, mel_cfg, alpha):
    frames = _frame_signal(wave, frame_cfg)
    spec = np.abs(np.fft.rfft(frames, n=frame_cfg.fft_size, axis=1)) ** 2
    fbank = mel_filterbank(mel_cfg, frame_cfg, wave.sample_rate, alpha)
    return np.log(np.maximum(spec @ fbank.T, LOG_FLOOR))


def log_mel(
    wave: Waveform,
    frame_cfg: FrameConfig,
    mel_cfg: MelConfig,
    alpha: float = 1.0,
) -> FeatureMatrix:
    """Log mel filterbank features; the log is floored at 1e-10."""
    feats = _mel_energies(wave, frame_cfg, mel_cfg, alpha)
    return FeatureMatrix(
        feats.astype(np.float32), "logmel", frame_cfg.frame_shift_ms, wave.sample_rate
    )


def mfcc(
    wave: Waveform,
    frame_cfg: FrameConfig,
    mel_cfg: MelConfig,
    n_ceps: int = 13,
    alpha: float = 1.0,
    mean_norm: bool = False,
) -> FeatureMatrix:
    """MFCC features: orthonormal type-II DCT of the log mel energies.

    Keeps coefficients 0 .. n_ceps-1; mean_norm subtracts the per-utterance
    mean of each coefficient.
    """
    if n_ceps > mel_cfg.n_mels:
        raise DataError(f"n_ceps {n_ceps} exceeds n_mels {mel_cfg.n_mels}")
    feats = _mel_energies(wave, frame_cfg, mel_cfg, alpha)
    ceps = dct(feats, type=2, norm="ortho", axis=1)[:, :n_ceps]
    if mean_norm:
        ceps = ceps - ceps.mean(axis=0, keepdims=True)
    return FeatureMatrix(
        ceps.astype(np.float32), "mfcc", frame_cfg.frame_shift_ms, wave.sample_rate
    )


def inverse_mfcc(coeffs: np.ndarray, n_mels: int) -> np.ndarray:
    """Invert the orthonormal DCT, zero-padding missing coefficients."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    padded = np.zeros((coeffs.shape[0], n_mels))
    padded[:, : coeffs.shape[1]] = coeffs
    return idct(padded, type=2, norm="ortho", axis=1)


def _resonator_gain(freqs: np.ndarray, center: float, bandwidth: float, rate: int):
    """Magnitude response of a unit-peak two-pole resonator."""
    r = np.exp(-np.pi * bandwidth / rate)
    theta = 2.0 * np.pi * center / rate

    def mag(f):
        w = 2.0 * np.pi * f / rate
        z = np.exp(-1j * w)
        h = 1.0 / ((1.0 - r * np.exp(1j * theta) * z) * (1.0 - r * np.exp(-1j * theta) * z))
        return np.abs(h)

    return mag(freqs) / mag(np.asarray(center))


def synth_formants(
    f0: float,
    formants: list[tuple[float, float]],
    duration_s: float,
    rate: int,
    scale: float = 1.0,
) -> Waveform:
    """Deterministic vowel-like signal: a harmonic pulse train at f0 shaped
    by two-pole resonators placed at scale * center.

    Raises if any scaled formant reaches the Nyquist frequency.
    """
    nyquist = rate / 2.0
    if f0 <= 0 or duration_s <= 0:
        raise DataError("f0 and duration must be positive")
    for center, bandwidth in formants:
        if center * scale >= nyquist:
            raise DataError(
                f"formant {center} Hz scaled by {scale} reaches Nyquist {nyquist} Hz"
            )
        if bandwidth <= 0:
            raise DataError("formant bandwidth must be positive")

    n = int(round(duration_s * rate))
    t = np.arange(n, dtype=np.float64) / rate
    n_harm = int(np.floor(0.95 * nyquist / f0))
    harmonics = f0 * np.arange(1, max(n_harm, 1) + 1)
    amps = np.ones_like(harmonics)
    for center, bandwidth in formants:
        amps = amps * _resonator_gain(harmonics, center * scale, bandwidth, rate)

    sig = np.zeros(n)
    for fk, ak in zip(harmonics, amps):
        sig += ak * np.cos(2.0 * np.pi * fk * t)
    peak = np.max(np.abs(sig))
    if peak > 0:
        sig *= 0.5 / peak
    return Waveform(sig.astype(np.float32), rate)
