"""Pipeline configuration: one YAML file, flags override."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .model import Emotion, Polarity, Session


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    dictionary: Path
    cache_dir: Path
    output_dir: Path
    blocklist: Path | None = None
    exemplars: Path | None = None
    phrases: Path | None = None
    mora_table: Path | None = None
    endpoint: str = ""
    model_name: str = "gpt-3.5-turbo-0301"
    temperature: float = 1.0
    max_tokens: int = 256
    api_key_env: str = "NVSCRIPT_API_KEY"
    concurrency: int = 2
    scripts_per_bucket: int = 12
    exemplar_count: int = 3
    backend: str = "baseline"
    remote_url: str = ""
    precomputed: Path | None = None
    preset: str = "core"
    scale_divisor: int = 1
    max_injections: int = 5
    custom_quotas: dict[tuple[Emotion, Session], int] | None = None
    routing: dict[Emotion, Polarity] | None = None
    rng_seed: int = 0

    def validate(self) -> None:
        for name in ("dictionary", "blocklist", "exemplars", "phrases", "mora_table", "precomputed"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise ConfigError(f"configured path does not exist: {name} = {path}")
        if self.backend not in ("baseline", "precomputed", "remote"):
            raise ConfigError(f"unknown scorer backend {self.backend!r}")
        if self.backend == "precomputed" and self.precomputed is None:
            raise ConfigError("precomputed backend needs scoring.precomputed path")
        if self.backend == "remote" and not self.remote_url:
            raise ConfigError("remote backend needs scoring.remote_url")
        if self.preset not in ("core", "extra", "both", "custom"):
            raise ConfigError(f"unknown quota preset {self.preset!r}")
        if self.preset == "custom" and not self.custom_quotas:
            raise ConfigError("preset custom needs selection.custom_quotas")
        if self.scale_divisor < 1:
            raise ConfigError("selection.scale_divisor must be >= 1")
        if self.scripts_per_bucket < 1:
            raise ConfigError("llm.scripts_per_bucket must be >= 1")
        if self.exemplar_count < 1:
            raise ConfigError("llm.exemplar_count must be >= 1")


def _resolve(base: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


def _parse_quotas(raw: dict) -> dict[tuple[Emotion, Session], int]:
    """Custom quota table: `emotion/session` keys mapped to counts."""
    quotas: dict[tuple[Emotion, Session], int] = {}
    for key, count in raw.items():
        emotion_label, _, session_label = str(key).partition("/")
        if not session_label:
            raise ConfigError(f"custom quota key {key!r} must be emotion/session")
        try:
            bucket = (Emotion.parse(emotion_label), Session.parse(session_label))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if int(count) < 0:
            raise ConfigError(f"custom quota for {key!r} is negative")
        quotas[bucket] = int(count)
    return quotas


def _parse_routing(raw: dict) -> dict[Emotion, Polarity]:
    routing: dict[Emotion, Polarity] = {}
    for emotion_label, polarity_label in raw.items():
        try:
            routing[Emotion.parse(str(emotion_label))] = Polarity.parse(str(polarity_label))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return routing


def load_config(path: str | Path) -> PipelineConfig:
    """Parse the YAML config; relative paths resolve against the file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text("utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    base = path.parent
    paths = raw.get("paths", {})
    llm = raw.get("llm", {})
    scoring = raw.get("scoring", {})
    selection = raw.get("selection", {})
    if "dictionary" not in paths:
        raise ConfigError("config needs paths.dictionary")
    cfg = PipelineConfig(
        dictionary=_resolve(base, paths["dictionary"]),
        blocklist=_resolve(base, paths.get("blocklist")),
        exemplars=_resolve(base, paths.get("exemplars")),
        phrases=_resolve(base, paths.get("phrases")),
        mora_table=_resolve(base, paths.get("mora_table")),
        cache_dir=_resolve(base, paths.get("cache_dir", "cache")),
        output_dir=_resolve(base, paths.get("output_dir", "out")),
        endpoint=llm.get("endpoint", ""),
        model_name=llm.get("model", "gpt-3.5-turbo-0301"),
        temperature=float(llm.get("temperature", 1.0)),
        max_tokens=int(llm.get("max_tokens", 256)),
        api_key_env=llm.get("api_key_env", "NVSCRIPT_API_KEY"),
        concurrency=int(llm.get("concurrency", 2)),
        scripts_per_bucket=int(llm.get("scripts_per_bucket", 12)),
        exemplar_count=int(llm.get("exemplar_count", 3)),
        backend=scoring.get("backend", "baseline"),
        remote_url=scoring.get("remote_url", ""),
        precomputed=_resolve(base, scoring.get("precomputed")),
        preset=selection.get("preset", "core"),
        scale_divisor=int(selection.get("scale_divisor", 1)),
        max_injections=int(selection.get("max_injections", 5)),
        custom_quotas=_parse_quotas(selection["custom_quotas"])
        if selection.get("custom_quotas")
        else None,
        routing=_parse_routing(raw["routing"]) if raw.get("routing") else None,
        rng_seed=int(raw.get("seed", 0)),
    )
    cfg.validate()
    return cfg
