"""Experiment configuration: canonical TOML form and override plumbing.

A config fully determines an experiment (criterion: same config + seed give
identical artifacts).  The canonical TOML emitted by ``to_toml`` parses back
to an equal config, and every CSV artifact carries ``canonical_line`` in a
header comment.
"""

import math
from dataclasses import dataclass, fields

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    """Anything wrong with user-supplied configuration."""


# section layout of the TOML form, one section per concern
SECTIONS = {
    "regime": ("alpha", "beta", "A", "B"),
    "experiment": ("t", "u", "n", "ladder", "seed", "paths", "threads",
                   "out"),
    "family": ("K", "J"),
    "grid": ("x_max", "dx", "dt"),
}

_FLOATS = {"alpha", "beta", "A", "B", "t", "u", "x_max", "dx", "dt"}
_INTS = {"n", "seed", "paths", "threads", "K", "J"}


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float = 2.0
    beta: float = 1.0
    A: float = 1.0
    B: float = 1.0
    t: float = 0.5
    u: float = 1.0
    n: int = 100
    ladder: tuple = (50, 100, 200, 400, 800)
    seed: int = 0
    paths: int = 0
    threads: int = 1
    out: str = "."
    K: int = 16
    J: int = 16
    x_max: float = None
    dx: float = None
    dt: float = None

    def __post_init__(self):
        for name in ("alpha", "beta", "A", "B", "t"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or (v < 0 and not math.isnan(v)):
                raise ConfigError(f"{name} must be a nonnegative number")
        if not self.u > 0:
            raise ConfigError("u must be positive")
        if self.n < 1:
            raise ConfigError("n must be a positive integer")
        if not self.ladder or any(int(v) < 1 for v in self.ladder):
            raise ConfigError("ladder must list positive integers")
        object.__setattr__(self, "ladder",
                           tuple(int(v) for v in self.ladder))
        if self.K < 1 or self.J < 0:
            raise ConfigError("family truncation needs K >= 1 and J >= 0")
        if self.paths < 0:
            raise ConfigError("paths must be nonnegative")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        for name in ("x_max", "dx", "dt"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive when given")

    def to_toml(self):
        lines = []
        for section, keys in SECTIONS.items():
            body = []
            for key in keys:
                value = getattr(self, key)
                if value is None:
                    continue
                body.append(f"{key} = {_toml_value(value)}")
            if body:
                lines.append(f"[{section}]")
                lines.extend(body)
                lines.append("")
        return "\n".join(lines)

    def canonical_line(self):
        """One-line canonical form carried in CSV header comments.

        The output directory and thread count are plumbing, not experiment
        identity: results are thread-invariant by construction, so reruns
        into other directories or on other machines stay byte-identical.
        """
        parts = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or f.name in ("out", "threads"):
                continue
            if isinstance(value, tuple):
                value = "[" + ",".join(str(v) for v in value) + "]"
            elif isinstance(value, float):
                value = repr(value)
            parts.append(f"{f.name}={value}")
        return " ".join(parts)


def _toml_value(value):
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return "[" + ", ".join(str(int(v)) for v in value) + "]"
    return str(value)


def _coerce(key, value):
    if key in _FLOATS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        return float(value)
    if key in _INTS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return int(value)
    if key == "ladder":
        if not isinstance(value, (list, tuple)) \
                or not all(isinstance(v, int) for v in value):
            raise ConfigError("ladder must be a list of integers")
        return tuple(value)
    if key == "out":
        if not isinstance(value, str):
            raise ConfigError("out must be a string")
        return value
    raise ConfigError(f"unknown configuration key {key!r}")


def parse_config(text):
    """ExperimentConfig from canonical (or hand-written) TOML text."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad TOML: {exc}") from exc
    values = {}
    for section, table in doc.items():
        if section not in SECTIONS:
            raise ConfigError(f"unknown configuration section {section!r}")
        if not isinstance(table, dict):
            raise ConfigError(f"section {section!r} must be a table")
        for key, value in table.items():
            if key not in SECTIONS[section]:
                raise ConfigError(
                    f"unknown key {key!r} in section {section!r}")
            values[key] = _coerce(key, value)
    return ExperimentConfig(**values)


def load_config(path=None, overrides=None):
    """Config from an optional TOML file with flag overrides on top."""
    if path is None:
        base = {}
    else:
        try:
            with open(path, "rb") as fh:
                text = fh.read().decode()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        base = {f.name: getattr(parse_config(text), f.name)
                for f in fields(ExperimentConfig)}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        base[key] = _coerce(key, value)
    return ExperimentConfig(**base)
