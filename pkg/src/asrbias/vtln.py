"""Vocal tract length normalization: model training and warp estimation.

A VTLN model is a diagonal GMM plus one affine feature transform per warp
factor on a grid (default 0.80 .. 1.20, step 0.02). Each transform maps
unwarped MFCC frames to the frames the frontend would produce at that warp
factor. Warp estimation scores every grid point as

    sum_t log p_gmm(A x_t + b) + n_frames * log |det A|

and picks the argmax, breaking exact ties toward the factor nearest 1.0 and
then toward the smaller factor.

Model files start with the magic bytes ``VTLN1`` followed by a u32 length
and a JSON header (grid, sizes, feature fingerprint), then little-endian
float64 arrays in order: GMM weights (K), means (K*D), variances (K*D),
and per grid point A (D*D) then b (D).
"""

from __future__ import annotations

import json
import logging
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import corpus, dsp
from .errors import DataError, ModelFormatError, NumericError
from .gmm import DiagGmm, train_gmm

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"VTLN1"
_MIN_ABS_DET = 1e-12


@dataclass
class WarpGrid:
    """Uniform warp-factor grid; must contain 1.0 exactly."""

    alpha_min: float = 0.80
    alpha_max: float = 1.20
    step: float = 0.02

    def values(self) -> tuple[float, ...]:
        if self.step <= 0 or self.alpha_max < self.alpha_min:
            raise DataError("invalid warp grid")
        n = int(round((self.alpha_max - self.alpha_min) / self.step)) + 1
        vals = tuple(round(self.alpha_min + i * self.step, 6) for i in range(n))
        if 1.0 not in vals:
            raise DataError(f"warp grid {vals[0]}..{vals[-1]} step {self.step} misses 1.0")
        return vals


@dataclass
class AffineTransform:
    """y = A x + b with |det A| > 1e-12; log|det A| is cached."""

    A: np.ndarray
    b: np.ndarray
    log_det: float = None  # type: ignore[assignment]

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        sign, logabsdet = np.linalg.slogdet(self.A)
        if sign == 0 or np.exp(logabsdet) < _MIN_ABS_DET:
            raise NumericError("affine transform is numerically singular")
        if self.log_det is None:
            self.log_det = float(logabsdet)
        elif abs(self.log_det - logabsdet) > 1e-8:
            raise DataError("cached log|det A| disagrees with A")

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) @ self.A.T + self.b


@dataclass
class WarpAssignment:
    utt_id: str
    alpha: float
    score: float


@dataclass
class VtlnConfig:
    """Hyperparameters for VTLN training and feature extraction."""

    grid: WarpGrid = field(default_factory=WarpGrid)
    n_components: int = 64
    em_iters: int = 10
    outer_iters: int = 2
    ridge_scale: float = 1e-6
    seed: int = 0
    n_ceps: int = 13
    mean_norm: bool = False
    frame: dsp.FrameConfig = field(default_factory=dsp.FrameConfig)
    mel: dsp.MelConfig = field(default_factory=lambda: dsp.MelConfig(n_mels=23))


@dataclass
class VtlnModel:
    grid: tuple[float, ...]
    gmm: DiagGmm
    transforms: dict[float, AffineTransform]
    fingerprint: dict

    def __post_init__(self):
        missing = [a for a in self.grid if a not in self.transforms]
        if missing:
            raise DataError(f"missing transforms for grid points {missing}")

    @property
    def dim(self) -> int:
        return self.gmm.dim

    def save(self, path) -> None:
        header = json.dumps(
            {
                "grid": list(self.grid),
                "n_components": self.gmm.n_components,
                "dim": self.gmm.dim,
                "fingerprint": self.fingerprint,
            },
            sort_keys=True,
        ).encode("utf-8")
        parts = [MODEL_MAGIC, struct.pack("<I", len(header)), header]
        parts.append(np.ascontiguousarray(self.gmm.weights, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(self.gmm.means, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(self.gmm.variances, dtype="<f8").tobytes())
        for alpha in self.grid:
            t = self.transforms[alpha]
            parts.append(np.ascontiguousarray(t.A, dtype="<f8").tobytes())
            parts.append(np.ascontiguousarray(t.b, dtype="<f8").tobytes())
        corpus.atomic_write_bytes(path, b"".join(parts))

    @classmethod
    def load(cls, path) -> "VtlnModel":
        blob = Path(path).read_bytes()
        if blob[: len(MODEL_MAGIC)] != MODEL_MAGIC:
            raise ModelFormatError(f"{path}: bad model magic")
        off = len(MODEL_MAGIC)
        try:
            (header_len,) = struct.unpack_from("<I", blob, off)
            off += 4
            header = json.loads(blob[off : off + header_len].decode("utf-8"))
            off += header_len
            grid = tuple(float(a) for a in header["grid"])
            k, d = int(header["n_components"]), int(header["dim"])

            def take(count):
                nonlocal off
                arr = np.frombuffer(blob, dtype="<f8", count=count, offset=off).copy()
                off += 8 * count
                return arr

            weights = take(k)
            means = take(k * d).reshape(k, d)
            variances = take(k * d).reshape(k, d)
            transforms = {}
            for alpha in grid:
                a_mat = take(d * d).reshape(d, d)
                b_vec = take(d)
                transforms[alpha] = AffineTransform(a_mat, b_vec)
        except (KeyError, ValueError, struct.error) as exc:
            raise ModelFormatError(f"{path}: corrupt model file ({exc})") from exc
        if off != len(blob):
            raise ModelFormatError(f"{path}: trailing bytes in model file")
        return cls(grid, DiagGmm(weights, means, variances), transforms, header["fingerprint"])


def estimate_transform(base: np.ndarray, warped: np.ndarray, ridge: float) -> AffineTransform:
    """Least-squares affine map from base to warped frames.

    Minimizes sum_t ||A x_t + b - y_t||^2 + ridge * ||A - I||_F^2; the ridge
    pulls A toward the identity and does not penalize b.
    """
    x = np.asarray(base, dtype=np.float64)
    y = np.asarray(warped, dtype=np.float64)
    if x.shape != y.shape:
        raise DataError("base and warped frames must be aligned (same shape)")
    n, d = x.shape
    if n < d + 1:
        raise DataError(f"need at least dim + 1 = {d + 1} frames, got {n}")
    gram, cross = _transform_stats(x, y)
    return _solve_transform(gram, cross, d, ridge)


def _transform_stats(x, y):
    """Sufficient statistics for the ridge fit: x~ = [x; 1]."""
    n, d = x.shape
    xt = np.hstack([x, np.ones((n, 1))])
    return xt.T @ xt, y.T @ xt


_MAX_GRAM_CONDITION = 1e12


def _solve_transform(gram, cross, d, ridge):
    reg = np.eye(d + 1)
    reg[d, d] = 0.0  # no penalty on the offset
    system = gram + ridge * reg
    condition = np.linalg.cond(system)
    if not np.isfinite(condition) or condition > _MAX_GRAM_CONDITION:
        raise NumericError(
            f"transform fit is rank-deficient beyond ridge repair "
            f"(condition {condition:.2e})"
        )
    rhs = cross + ridge * np.hstack([np.eye(d), np.zeros((d, 1))])
    try:
        w = np.linalg.solve(system, rhs.T).T
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"transform fit is rank-deficient: {exc}") from exc
    return AffineTransform(w[:, :d], w[:, d])


def warp_scores(feats: dsp.FeatureMatrix, model: VtlnModel) -> dict[float, float]:
    """Grid-search objective per warp factor, including the Jacobian term."""
    x = np.asarray(feats.data, dtype=np.float64)
    if x.shape[1] != model.dim:
        raise DataError(f"feature dim {x.shape[1]} does not match model dim {model.dim}")
    n = x.shape[0]
    scores = {}
    for alpha in model.grid:
        t = model.transforms[alpha]
        scores[alpha] = float(np.sum(model.gmm.log_prob(t.apply(x)))) + n * t.log_det
    return scores


def estimate_warp(feats: dsp.FeatureMatrix, model: VtlnModel, utt_id: str = "") -> WarpAssignment:
    """Exhaustive grid search for the best warp factor of one utterance."""
    scores = warp_scores(feats, model)
    best = min(scores.items(), key=lambda kv: (-kv[1], abs(kv[0] - 1.0), kv[0]))
    return WarpAssignment(utt_id=utt_id, alpha=best[0], score=best[1])


def apply_warp(
    wave: dsp.Waveform,
    alpha: float,
    kind: str,
    frame_cfg: dsp.FrameConfig,
    mel_cfg: dsp.MelConfig,
    n_ceps: int = 13,
    mean_norm: bool = False,
) -> dsp.FeatureMatrix:
    """Re-extract features with the frequency axis warped by alpha."""
    if not 0.8 <= alpha <= 1.2:
        raise DataError(f"warp factor {alpha} outside [0.8, 1.2]")
    if kind == "logmel":
        return dsp.log_mel(wave, frame_cfg, mel_cfg, alpha=alpha)
    if kind == "mfcc":
        return dsp.mfcc(wave, frame_cfg, mel_cfg, n_ceps=n_ceps, alpha=alpha, mean_norm=mean_norm)
    raise DataError(f"cannot warp feature kind {kind!r}")


def _extract_mfcc(wave, cfg: VtlnConfig, alpha: float) -> np.ndarray:
    fm = dsp.mfcc(
        wave, cfg.frame, cfg.mel, n_ceps=cfg.n_ceps, alpha=alpha, mean_norm=cfg.mean_norm
    )
    return fm.data.astype(np.float64)


def feature_fingerprint(cfg: VtlnConfig, sample_rate: int) -> dict:
    fp = {
        "feature_kind": "mfcc",
        "n_ceps": cfg.n_ceps,
        "mean_norm": cfg.mean_norm,
        "sample_rate": sample_rate,
        "frame": asdict(cfg.frame),
        "mel": asdict(cfg.mel),
    }
    return fp


def train_vtln(
    records: list[corpus.UtteranceRecord],
    cfg: VtlnConfig,
    audio_root=None,
    jobs: int = 1,
) -> VtlnModel:
    """Train a VTLN model on the audio of a manifest.

    Procedure: extract unwarped MFCC for every utterance; fit one ridge
    least-squares transform per grid point from pooled (unwarped, warped)
    frame pairs; train a GMM on the unwarped frames; then for outer_iters
    rounds assign each utterance its best warp factor, retrain the GMM on
    the transformed frames, and refit the transforms. Deterministic for a
    fixed config.
    """
    if len(records) < 2:
        raise DataError("VTLN training needs at least 2 utterances")
    grid = cfg.grid.values()
    root = Path(audio_root) if audio_root else None

    def load_wave(rec):
        path = Path(rec.audio_path)
        if root and not path.is_absolute():
            path = root / path
        return corpus.read_wav(path)

    waves = parallel_map(load_wave, records, jobs)
    rates = {w.sample_rate for w in waves}
    if len(rates) != 1:
        raise DataError(f"mixed sample rates in training corpus: {sorted(rates)}")

    base = parallel_map(lambda w: _extract_mfcc(w, cfg, 1.0), waves, jobs)
    total_frames = sum(f.shape[0] for f in base)
    dim = base[0].shape[1]
    ridge = cfg.ridge_scale * total_frames

    # Pooled sufficient statistics per grid point; the (base, warped) pairs
    # do not depend on later assignments, so accumulate once.
    gram = None
    cross = {}
    for alpha in grid:
        cross[alpha] = np.zeros((dim, dim + 1))
    for wave, x in zip(waves, base):
        g, _ = _transform_stats(x, x)
        gram = g if gram is None else gram + g
        for alpha in grid:
            warped = x if alpha == 1.0 else _extract_mfcc(wave, cfg, alpha)
            _, c = _transform_stats(x, warped)
            cross[alpha] += c

    def fit_transforms():
        out = {}
        for alpha in grid:
            try:
                out[alpha] = _solve_transform(gram, cross[alpha], dim, ridge)
            except NumericError as exc:
                raise NumericError(f"transform fit failed at alpha={alpha}: {exc}") from exc
        return out

    transforms = fit_transforms()
    gmm = train_gmm(
        np.concatenate(base, axis=0), cfg.n_components, cfg.em_iters, seed=cfg.seed
    )
    fingerprint = feature_fingerprint(cfg, waves[0].sample_rate)
    model = VtlnModel(grid, gmm, transforms, fingerprint)

    for round_idx in range(cfg.outer_iters):
        assigned = []
        for rec, x in zip(records, base):
            fm = dsp.FeatureMatrix(
                x.astype(np.float32), "mfcc", cfg.frame.frame_shift_ms, waves[0].sample_rate
            )
            assigned.append(estimate_warp(fm, model, utt_id=rec.utt_id))
        normalized = [
            model.transforms[a.alpha].apply(x) for a, x in zip(assigned, base)
        ]
        gmm = train_gmm(
            np.concatenate(normalized, axis=0), cfg.n_components, cfg.em_iters, seed=cfg.seed
        )
        transforms = fit_transforms()
        model = VtlnModel(grid, gmm, transforms, fingerprint)
        logger.info(
            "vtln outer round %d: mean warp %.4f",
            round_idx + 1,
            float(np.mean([a.alpha for a in assigned])),
        )
    return model


def warp_statistics(by_group: dict[str, list[float]]) -> dict[str, dict[str, float]]:
    """Five-number summary (min, q1, median, q3, max) per speaker group.

    Quartiles use linear interpolation. Empty groups are skipped with a
    warning. Insertion order of the input mapping is preserved.
    """
    stats = {}
    for group, values in by_group.items():
        if not values:
            logger.warning("group %s has no warp assignments; skipped", group)
            continue
        arr = np.asarray(values, dtype=np.float64)
        q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
        stats[group] = {
            "min": float(arr.min()),
            "q1": float(q1),
            "median": float(med),
            "q3": float(q3),
            "max": float(arr.max()),
        }
    return stats


def write_assignments(assignments: list[WarpAssignment], path) -> None:
    lines = ["#utt_id\talpha\tscore"]
    for a in assignments:
        lines.append(f"{a.utt_id}\t{a.alpha:g}\t{a.score:.6f}")
    corpus.atomic_write_text(path, "\n".join(lines) + "\n")


def read_assignments(path) -> list[WarpAssignment]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields")
            out.append(WarpAssignment(fields[0], float(fields[1]), float(fields[2])))
    return out


def parallel_map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
