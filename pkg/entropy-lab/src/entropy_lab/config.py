"""Lab configuration and its plain key = value file format.

Example file:

    corpus = corpus.txt
    out_dir = runs/default
    lambdas = 0.0, 0.1, 1.0, 5.0
    steps = 600
    samples = 100
    seed = 3

Lines starting with '#' and blank lines are ignored. Keys map one to
one onto LabConfig fields; unknown keys are an error so typos fail
fast rather than silently running defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class LabConfig:
    corpus: str
    out_dir: str
    lambdas: tuple[float, ...] = (0.0, 0.1, 1.0, 5.0)
    steps: int = 600
    batch_size: int = 32
    context: int = 128
    dim: int = 128
    n_layers: int = 3
    n_heads: int = 4
    lr: float = 3e-3
    temperature: float = 0.7
    samples: int = 100
    sample_len: int = 256
    seed: int = 3
    min_corpus_tokens: int = 100_000
    stylodiv_cmd: str = "stylodiv"

    def __post_init__(self):
        if not self.lambdas:
            raise ValueError("lambdas must not be empty")
        for lam in self.lambdas:
            if lam < 0:
                raise ValueError(f"lambda values must be nonnegative, got {lam}")
        if self.samples < 2:
            raise ValueError(f"need at least 2 samples per lambda, got {self.samples}")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")


_FIELD_KEYS = {"corpus", "out_dir"}  # required


def _coerce(name: str, kind, raw: str):
    if kind == "tuple[float, ...]":
        vals = tuple(float(v) for v in raw.split(",") if v.strip())
        return vals
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config_text(text: str, source: str = "<config>") -> LabConfig:
    schema = {f.name: f.type for f in fields(LabConfig)}
    seen: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in schema:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            seen[key] = _coerce(key, schema[key], raw)
        except ValueError as e:
            raise ValueError(f"{source}:{lineno}: bad value for {key!r}: {e}") from None
    missing = _FIELD_KEYS - seen.keys()
    if missing:
        raise ValueError(f"{source}: missing required keys: {', '.join(sorted(missing))}")
    return LabConfig(**seen)


def load_config(path: str | Path) -> LabConfig:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))
