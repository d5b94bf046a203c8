"""Run configuration: a flat ``key = value`` text file plus flag overrides.

Per-type settings use dotted keys, e.g. ``cap.actor = 6`` or
``budget.director = 12.5``. Lines starting with ``#`` are comments.
Command-line flags are merged over the file; flags win.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .design import DEFAULT_CAPACITIES, DEFAULT_RESOLUTION
from .walks import DEFAULT_DELTA, PathWeights


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (a usage error)."""


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


@dataclass
class RunConfig:
    ratings: str | None = None
    membership: str | None = None
    bundle: str | None = None
    alpha: float = 0.5
    beta: float = 0.2
    gamma: float = 0.3
    delta: float = DEFAULT_DELTA
    ties_positive: bool = True
    rating_low: float = 1.0
    rating_high: float = 5.0
    duplicates: str = "last"
    caps: dict = field(default_factory=lambda: dict(DEFAULT_CAPACITIES))
    budget: dict = field(default_factory=dict)
    costs: str | None = None
    mode: str = "cardinality"  # cardinality | exact | greedy
    resolution: int = DEFAULT_RESOLUTION
    strict: bool = False
    target: str = "all"  # "all" or a file with one user id per line
    folds: int = 5
    seed: int | None = None
    workers: int = 1
    out: str = "."
    knn_k: int = 20
    min_users_per_movie: int = 20
    min_features_per_movie: int = 2
    min_movies_per_user: int = 20
    min_movies_per_feature: int = 2

    @property
    def weights(self) -> PathWeights:
        return PathWeights(self.alpha, self.beta, self.gamma)

    def validate(self, needs_seed: bool = False) -> "RunConfig":
        try:
            self.weights
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.delta < 0:
            raise ConfigError("delta must be nonnegative")
        if needs_seed and self.seed is None:
            raise ConfigError("this command is randomized: give --seed or seed = N in the config")
        if self.mode not in ("cardinality", "exact", "greedy"):
            raise ConfigError(f"mode must be cardinality, exact or greedy, not {self.mode!r}")
        if self.duplicates not in ("last", "first", "error"):
            raise ConfigError(f"duplicates must be last, first or error, not {self.duplicates!r}")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if any(v < 0 for v in self.caps.values()) or any(v < 0 for v in self.budget.values()):
            raise ConfigError("capacities and budgets must be nonnegative")
        if self.rating_high <= self.rating_low:
            raise ConfigError("rating_high must exceed rating_low")
        return self

    def resolved(self) -> dict:
        """Every setting as plain data, for embedding in reports."""
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_DICT_PREFIX = {"cap": ("caps", int), "budget": ("budget", float)}


def _coerce(name: str, raw):
    if not isinstance(raw, str):
        return raw
    default = getattr(RunConfig(), name)
    kind = _FIELDS[name].type
    if "bool" in kind:
        try:
            return _BOOL[raw.strip().lower()]
        except KeyError:
            raise ConfigError(f"{name}: expected a boolean, got {raw!r}") from None
    if "int" in kind:
        caster = int
    elif "float" in kind:
        caster = float
    else:
        return raw.strip() if raw.strip() != "" else default
    try:
        return caster(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None


def parse_pairs(pairs, base: RunConfig | None = None, source: str = "<flags>") -> RunConfig:
    """Apply ``(key, value)`` pairs onto a copy of ``base``."""
    cfg = dataclasses.replace(base) if base is not None else RunConfig()
    cfg.caps = dict(cfg.caps)
    cfg.budget = dict(cfg.budget)
    replaced_dicts = set()
    for key, value in pairs:
        key = key.strip()
        if "." in key:
            prefix, label = key.split(".", 1)
            if prefix not in _DICT_PREFIX or not label:
                raise ConfigError(f"{source}: unknown key {key!r}")
            attr, caster = _DICT_PREFIX[prefix]
            if attr not in replaced_dicts:
                # a file or flag naming any cap/budget defines the whole profile
                setattr(cfg, attr, {})
                replaced_dicts.add(attr)
            try:
                getattr(cfg, attr)[label] = caster(value)
            except ValueError:
                raise ConfigError(f"{source}: cannot parse {key} = {value!r}") from None
        elif key in _FIELDS and key not in ("caps", "budget"):
            setattr(cfg, key, _coerce(key, value))
        else:
            raise ConfigError(f"{source}: unknown key {key!r}")
    return cfg


def read_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    pairs = []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = s.split("=", 1)
        pairs.append((k, v.strip()))
    return parse_pairs(pairs, source=str(path))


def write_config(path, cfg: RunConfig) -> None:
    lines = []
    for name, value in cfg.resolved().items():
        if name in ("caps", "budget"):
            prefix = "cap" if name == "caps" else "budget"
            lines.extend(f"{prefix}.{k} = {v}" for k, v in sorted(value.items()))
        elif value is not None:
            lines.append(f"{name} = {value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
