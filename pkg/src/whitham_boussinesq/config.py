"""Run configuration: a flat ``key = value`` file with command-line overrides."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import WhithamError


class ConfigError(WhithamError, ValueError):
    pass


INITIAL_KINDS = ("pulse", "constant", "profile", "reference")


@dataclass(frozen=True)
class RunConfig:
    n: int | None = None
    L: float | None = None
    dt: float | None = None
    cfl: float = 1.0
    t_end: float | None = None
    out: str = "out"
    sample_every: int = 10
    tol: float = 1e-10
    max_iter: int = 500
    c: float = 1.25
    c_min: float = 1.01
    c_max: float = 1.5
    steps: int = 50
    seed: int = 0
    initial: str = "pulse"
    initial_file: str | None = None
    amplitude: float = 0.3
    width: float = 4.0
    velocity: float = 0.0
    reference: str | None = None
    parallel: bool = False
    workers: int = 2

    def validate(self) -> "RunConfig":
        positive = ("n", "L", "dt", "cfl", "t_end", "sample_every", "tol", "max_iter", "steps", "width", "workers")
        for name in positive:
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.n is not None and (self.n % 2 or self.n < 8):
            raise ConfigError(f"n must be an even integer >= 8, got {self.n}")
        if self.initial not in INITIAL_KINDS:
            raise ConfigError(f"initial must be one of {', '.join(INITIAL_KINDS)}, got {self.initial!r}")
        if self.initial in ("profile", "reference") and not self.initial_file:
            raise ConfigError(f"initial={self.initial} requires initial_file")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        return self

    def with_defaults(self, **defaults) -> "RunConfig":
        """Fill unset (``None``) fields from ``defaults``."""
        filled = {k: v for k, v in defaults.items() if getattr(self, k) is None}
        return replace(self, **filled)

    def overridden(self, **overrides) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, float):
                value = f"{value:.17g}"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(name: str, raw: str):
    kind = _TYPES[name]
    raw = raw.strip()
    if raw.lower() in ("none", ""):
        return None
    try:
        if kind.startswith("bool"):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot read {name} = {raw!r} as {kind}") from None
    return raw


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def as_dict(config: RunConfig) -> dict:
    return asdict(config)
