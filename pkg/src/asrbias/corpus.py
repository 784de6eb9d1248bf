"""Dataset manifests, WAV I/O, and binary feature-archive persistence.

Manifest format: UTF-8 TSV with six columns
    utt_id <TAB> audio_path <TAB> transcript <TAB> speaker_id <TAB> group <TAB> style
Lines starting with '#' and blank lines are ignored. Transcripts are
whitespace-collapsed at load; nothing else is normalized here.

Feature archive format (little-endian throughout): file magic ``VTK1``,
then one entry after another until EOF. Each entry is
    u16  utt_id byte length
    ...  utt_id (UTF-8)
    u32  n_frames
    u32  dim
    u8   feature kind (0 = power, 1 = logmel, 2 = mfcc)
    f32  frame_shift_ms
    u32  sample_rate
    ...  n_frames * dim float32 values, row-major
Round trips are bit-exact. Archives are immutable once written; reads are
safe from multiple threads.
"""

from __future__ import annotations

import io
import os
import struct
import tempfile
import wave as wave_mod
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp import FeatureMatrix, Waveform
from .errors import ArchiveError, AudioError, ManifestError

KNOWN_GROUPS = ("Norm", "DC", "DT", "NnT", "NnA", "DOA")
KNOWN_STYLES = ("Read", "HMI", "CTS", "Conversational")
NORM_GROUP = "Norm"

ARCHIVE_MAGIC = b"VTK1"
_KIND_CODES = {"power": 0, "logmel": 1, "mfcc": 2}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}


@dataclass
class UtteranceRecord:
    """One evaluation unit: audio, transcript, and speaker metadata."""

    utt_id: str
    audio_path: str
    transcript: str
    speaker_id: str
    group: str
    style: str


def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


def load_manifest(path, allow_custom_labels: bool = False) -> list[UtteranceRecord]:
    """Parse a manifest file into records, in file order.

    Unknown group/style labels are errors unless allow_custom_labels is set,
    in which case any non-empty label is accepted.
    """
    records = []
    seen = set()
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 6:
                raise ManifestError(
                    f"{path}:{lineno}: expected 6 tab-separated fields, got {len(fields)}"
                )
            utt_id, audio_path, transcript, speaker_id, group, style = (
                f.strip() for f in fields
            )
            if not utt_id:
                raise ManifestError(f"{path}:{lineno}: empty utt_id")
            if utt_id in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate utt_id {utt_id!r}")
            if not audio_path:
                raise ManifestError(f"{path}:{lineno}: empty audio_path")
            if group not in KNOWN_GROUPS and not (allow_custom_labels and group):
                raise ManifestError(f"{path}:{lineno}: unknown group label {group!r}")
            if style not in KNOWN_STYLES and not (allow_custom_labels and style):
                raise ManifestError(f"{path}:{lineno}: unknown style label {style!r}")
            seen.add(utt_id)
            records.append(
                UtteranceRecord(
                    utt_id=utt_id,
                    audio_path=audio_path,
                    transcript=_collapse_ws(transcript),
                    speaker_id=speaker_id,
                    group=group,
                    style=style,
                )
            )
    return records


def write_manifest(records, path) -> None:
    lines = []
    for r in records:
        for value in (r.utt_id, r.audio_path, r.transcript, r.speaker_id, r.group, r.style):
            if "\t" in value or "\n" in value:
                raise ManifestError(f"field {value!r} contains a tab or newline")
        lines.append(
            "\t".join((r.utt_id, r.audio_path, r.transcript, r.speaker_id, r.group, r.style))
        )
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_hypotheses(path) -> dict[str, str]:
    """Read a hypothesis TSV (utt_id <TAB> text) into an id -> text map."""
    hyps = {}
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"hypothesis file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t", 1)
            utt_id = fields[0].strip()
            text = fields[1] if len(fields) == 2 else ""
            if not utt_id:
                raise ManifestError(f"{path}:{lineno}: empty utt_id")
            if utt_id in hyps:
                raise ManifestError(f"{path}:{lineno}: duplicate utt_id {utt_id!r}")
            hyps[utt_id] = _collapse_ws(text)
    return hyps


def read_wav(path) -> Waveform:
    """Read a RIFF PCM16 mono WAV file, scaling samples to [-1, 1)."""
    try:
        with wave_mod.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            sampwidth = wf.getsampwidth()
            comptype = wf.getcomptype()
            rate = wf.getframerate()
            n_frames = wf.getnframes()
            if comptype != "NONE":
                raise AudioError(f"{path}: unsupported codec {comptype!r} (PCM only)")
            if n_channels != 1:
                raise AudioError(f"{path}: unsupported channel count {n_channels} (mono only)")
            if sampwidth != 2:
                raise AudioError(f"{path}: unsupported sample width {sampwidth * 8} bits")
            payload = wf.readframes(n_frames)
    except wave_mod.Error as exc:
        raise AudioError(f"{path}: not a readable WAV file ({exc})") from exc
    except EOFError as exc:
        raise AudioError(f"{path}: truncated WAV file") from exc
    if len(payload) != 2 * n_frames:
        raise AudioError(f"{path}: truncated WAV payload")
    samples = np.frombuffer(payload, dtype="<i2").astype(np.float32) / 32768.0
    return Waveform(samples, rate)


def write_wav(wave: Waveform, path) -> int:
    """Write PCM16 mono; returns the number of samples clipped to full scale."""
    scaled = wave.samples.astype(np.float64) * 32768.0
    clipped = np.clip(scaled, -32768.0, 32767.0)
    n_clipped = int(np.count_nonzero(scaled != clipped))
    pcm = np.rint(clipped).astype("<i2")
    buf = io.BytesIO()
    with wave_mod.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(wave.sample_rate)
        wf.writeframes(pcm.tobytes())
    atomic_write_bytes(path, buf.getvalue())
    return n_clipped


class FeatureArchive:
    """In-memory view of a feature archive with O(1) lookup by utt_id."""

    def __init__(self, entries: dict[str, FeatureMatrix]):
        self.entries = entries

    def __len__(self):
        return len(self.entries)

    def __contains__(self, utt_id):
        return utt_id in self.entries

    def get(self, utt_id: str) -> FeatureMatrix:
        if utt_id not in self.entries:
            raise ArchiveError(f"utt_id {utt_id!r} not in archive")
        return self.entries[utt_id]

    def ids(self):
        return list(self.entries.keys())


def write_feature_archive(entries, path) -> None:
    """Write (utt_id, FeatureMatrix) pairs; accepts a dict or an iterable."""
    if isinstance(entries, dict):
        entries = entries.items()
    buf = io.BytesIO()
    buf.write(ARCHIVE_MAGIC)
    for utt_id, fm in entries:
        id_bytes = utt_id.encode("utf-8")
        if len(id_bytes) > 0xFFFF:
            raise ArchiveError(f"utt_id too long: {utt_id[:32]!r}...")
        data = np.ascontiguousarray(fm.data, dtype="<f4")
        buf.write(struct.pack("<H", len(id_bytes)))
        buf.write(id_bytes)
        buf.write(
            struct.pack(
                "<IIBfI",
                fm.n_frames,
                fm.dim,
                _KIND_CODES[fm.kind],
                np.float32(fm.frame_shift_ms),
                fm.source_rate,
            )
        )
        buf.write(data.tobytes())
    atomic_write_bytes(path, buf.getvalue())


def read_feature_archive(path) -> FeatureArchive:
    path = Path(path)
    if not path.exists():
        raise ArchiveError(f"archive not found: {path}")
    blob = path.read_bytes()
    if blob[:4] != ARCHIVE_MAGIC:
        raise ArchiveError(f"{path}: bad magic {blob[:4]!r}, expected {ARCHIVE_MAGIC!r}")
    entries: dict[str, FeatureMatrix] = {}
    off = 4
    n = len(blob)
    while off < n:
        try:
            (id_len,) = struct.unpack_from("<H", blob, off)
            off += 2
            utt_id = blob[off : off + id_len].decode("utf-8")
            off += id_len
            n_frames, dim, kind_code, shift_ms, rate = struct.unpack_from("<IIBfI", blob, off)
            off += struct.calcsize("<IIBfI")
        except (struct.error, UnicodeDecodeError) as exc:
            raise ArchiveError(f"{path}: corrupt entry header at offset {off}") from exc
        if kind_code not in _CODE_KINDS:
            raise ArchiveError(f"{path}: unknown feature kind code {kind_code}")
        payload = 4 * n_frames * dim
        if off + payload > n:
            raise ArchiveError(
                f"{path}: entry {utt_id!r} payload exceeds file size "
                f"(header says {n_frames}x{dim})"
            )
        data = np.frombuffer(blob, dtype="<f4", count=n_frames * dim, offset=off)
        off += payload
        if utt_id in entries:
            raise ArchiveError(f"{path}: duplicate utt_id {utt_id!r}")
        entries[utt_id] = FeatureMatrix(
            data.reshape(n_frames, dim).copy(),
            _CODE_KINDS[kind_code],
            float(np.float32(shift_ms)),
            rate,
        )
    return FeatureArchive(entries)


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
