"""Pipeline configuration.

One dataclass holds every tunable of the pipeline with its documented
default. Values can be overridden from a line-based config file
(``key = value``, UTF-8, ``#`` comments) and from CLI flags; unknown keys
are rejected so typos fail loudly instead of silently using defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

DATA_DIR = Path(__file__).parent / "data"


@dataclass
class PipelineConfig:
    # tokenization / weighting
    metadata_weight: float = 2.0        # weight multiplier for tokens from metadata fields
    # suitability
    min_tokens: int = 150               # shorter documents are rejected
    doc_type_exclude: tuple[str, ...] = ("appointment", "dismissal", "imenovanje", "razrjesenje")
    # corpus split
    split_ratio: float = 0.75
    seed: int = 1
    # dictionary
    dict_size: int = 500                # top-K terms kept
    min_phrase_support: int = 5         # minimum corpus frequency of a multiword phrase
    pmi_threshold: float = 3.0          # bits
    max_phrase_len: int = 4
    group_k: int = 50                   # latent dimensions for term grouping
    group_cosine: float = 0.85          # single-link clustering threshold
    # concept extraction
    window: int = 5                     # neighbor distance in tokens, same sentence
    min_neighbor_freq: int = 3          # distinct sentences required by the neighbor rule
    # relationship extraction
    theta_high: int = 2                 # same-sentence co-occurrences for a high degree
    theta_med: int = 2                  # adjacent-sentence co-occurrences for a medium degree
    # summarization
    svd_k: int = 10                     # latent dimensions for proposition ranking
    svd_tol: float = 1e-9               # relative cutoff for retained singular values
    target_concepts: int = 20
    floor_concepts: int = 15
    cap_concepts: int = 25
    # evaluation
    strict_label_match: bool = False    # require equal link labels when matching propositions
    # resource files (None means the packaged default, or empty for the lexicon)
    stopwords_path: str | None = None
    stem_rules_path: str | None = None
    lexicon_path: str | None = None
    abbreviations_path: str | None = None
    # execution
    jobs: int = 1

    def stopwords_file(self) -> Path:
        return Path(self.stopwords_path) if self.stopwords_path else DATA_DIR / "stopwords_hr.txt"

    def stem_rules_file(self) -> Path:
        return Path(self.stem_rules_path) if self.stem_rules_path else DATA_DIR / "stem_rules_hr.tsv"


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _parse_value(name: str, raw: str):
    f = _FIELDS[name]
    raw = raw.strip()
    base = f.type
    try:
        if base == "int":
            return int(raw)
        if base == "float":
            return float(raw)
        if base == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if base == "tuple[str, ...]":
            return tuple(part.strip() for part in raw.split(",") if part.strip())
        # str | None fields
        return raw or None
    except ValueError as exc:
        raise ConfigError(f"bad value for {name!r}: {raw!r}") from exc


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Build a config from defaults, an optional file and explicit overrides.

    Raises ConfigError on unknown keys or unparsable values.
    """
    values: dict = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _FIELDS:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _parse_value(key, raw)
    for key, val in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        if val is not None:
            values[key] = val
    cfg = PipelineConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: PipelineConfig) -> None:
    if not 0.0 < cfg.split_ratio < 1.0:
        raise ConfigError("split_ratio must be strictly between 0 and 1")
    if cfg.metadata_weight < 1.0:
        raise ConfigError("metadata_weight must be >= 1.0")
    for name in ("min_tokens", "dict_size", "min_phrase_support", "window",
                 "min_neighbor_freq", "theta_high", "theta_med", "svd_k",
                 "group_k", "max_phrase_len", "jobs"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be a positive integer")
    if cfg.svd_tol <= 0:
        raise ConfigError("svd_tol must be positive")
    if not (cfg.floor_concepts <= cfg.target_concepts <= cfg.cap_concepts):
        raise ConfigError("need floor_concepts <= target_concepts <= cap_concepts")
