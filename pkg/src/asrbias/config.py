"""Pipeline configuration: one YAML file drives every CLI command.

Defaults match the reference recipe: speed factors 0.9/1.0/1.1, SpecAugment
T=40 F=30, 80 mel channels for the recognizer features, 23 mels / 13
cepstra for the warp model, and a warp grid of 0.80..1.20 step 0.02.
parse(render(config)) == config holds for every serializable config.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path

import yaml

from .dsp import FrameConfig, MelConfig
from .errors import ConfigError
from .specaug import SpecAugPolicy
from .vtln import VtlnConfig, WarpGrid


@dataclass
class ScoringOptions:
    mode: str = "word"
    lowercase: bool = False
    strip_punct: bool = False


@dataclass
class PipelineConfig:
    seed: int = 0
    jobs: int = 1
    speed_factors: tuple[float, ...] = (0.9, 1.0, 1.1)
    frame: FrameConfig = field(default_factory=FrameConfig)
    logmel: MelConfig = field(default_factory=lambda: MelConfig(n_mels=80))
    specaug: SpecAugPolicy = field(default_factory=SpecAugPolicy)
    vtln: VtlnConfig = field(default_factory=VtlnConfig)
    scoring: ScoringOptions = field(default_factory=ScoringOptions)


def _to_plain(obj):
    if is_dataclass(obj):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, tuple):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, list):
        return [_to_plain(v) for v in obj]
    return obj


def _from_plain(cls, data):
    if not isinstance(data, dict):
        raise ConfigError(f"expected a mapping for {cls.__name__}, got {type(data).__name__}")
    kwargs = {}
    known = {f.name: f for f in fields(cls)}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown {cls.__name__} key {key!r}")
        kwargs[key] = value
    for name, f in known.items():
        if name not in kwargs:
            continue
        value = kwargs[name]
        nested = _NESTED.get((cls, name))
        if nested is not None and value is not None:
            kwargs[name] = _from_plain(nested, value)
        elif name == "speed_factors":
            kwargs[name] = tuple(float(v) for v in value)
    return cls(**kwargs)


_NESTED = {
    (PipelineConfig, "frame"): FrameConfig,
    (PipelineConfig, "logmel"): MelConfig,
    (PipelineConfig, "specaug"): SpecAugPolicy,
    (PipelineConfig, "vtln"): VtlnConfig,
    (PipelineConfig, "scoring"): ScoringOptions,
    (VtlnConfig, "grid"): WarpGrid,
    (VtlnConfig, "frame"): FrameConfig,
    (VtlnConfig, "mel"): MelConfig,
}


def render_config(cfg: PipelineConfig) -> str:
    return yaml.safe_dump(_to_plain(cfg), sort_keys=False)


def parse_config(text: str) -> PipelineConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    if data is None:
        return PipelineConfig()
    return _from_plain(PipelineConfig, data)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"))
