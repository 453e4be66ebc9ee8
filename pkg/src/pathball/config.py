"""Flat key-value experiment configuration.

Config files are plain text, one ``key = value`` pair per line; blank lines
and ``#`` comments are ignored.  Unknown keys are errors.  Recognized keys:

    experiment        verify | invariance | concentration | jacobian
    dim               matrix size d of the rotation group (default 3)
    n_values          comma-separated partition counts, e.g. 8,32,128
    alpha             radius exponent in (1/2, 1) (default 0.75)
    scale             radius scale c in R_N = c * N**alpha (default 1.0)
    g_partition       coarse partition the translator g lives on (default 8)
    g_coords          optional comma-separated coordinates of g
    g_seed            seed used to draw g when g_coords is absent (default 999)
    g_normalize       l2 | sup | none, normalization applied to g (default l2)
    samples           Monte Carlo sample count per N
    seed              master seed (default 42)
    quad_points       quadrature nodes per interval (default 32)
    refine_multiple   projection refinement for pushforwards (default 4)
    witness_anchors   number of anchor witnesses for the dual bound (default 8)
    angle_eps         comma-separated tail thresholds (default 0.1,0.15,0.2)
    lipschitz_pairs   random pairs for the exponential Lipschitz check (default 10000)
    verify_paths      random paths for identity checks (default 1000)
    verify_triples    random triples for the group-axiom check (default 100)
    grid_points       pointwise evaluation grid size (default 101)
    jacobian_points   base points for determinant checks (default 20)
    jacobian_h        finite-difference step (default 1e-5)
    jacobian_n        partition count for Jacobian checks (default 4)
    jacobian_radius   sampling radius for Jacobian base points (default 5.0)
    threads           worker threads; affects speed only (default 1)
"""

from __future__ import annotations

from dataclasses import dataclass, fields

EXPERIMENTS = ("verify", "invariance", "concentration", "jacobian")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "verify"
    dim: int = 3
    n_values: tuple[int, ...] = (8, 32, 128)
    alpha: float = 0.75
    scale: float = 1.0
    g_partition: int = 8
    g_coords: tuple[float, ...] | None = None
    g_seed: int = 999
    g_normalize: str = "l2"
    samples: int = 256
    seed: int = 42
    quad_points: int = 32
    refine_multiple: int = 4
    witness_anchors: int = 8
    angle_eps: tuple[float, ...] = (0.1, 0.15, 0.2)
    lipschitz_pairs: int = 10_000
    verify_paths: int = 1000
    verify_triples: int = 100
    grid_points: int = 101
    jacobian_points: int = 20
    jacobian_h: float = 1e-5
    jacobian_n: int = 4
    jacobian_radius: float = 5.0
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.n_values:
            raise ConfigError("n_values must not be empty")
        if any(n < 1 for n in self.n_values):
            raise ConfigError("all entries of n_values must be >= 1")
        if self.experiment in ("invariance", "concentration"):
            bad = [n for n in self.n_values if n % self.g_partition]
            if bad:
                raise ConfigError(
                    f"n_values {bad} are not multiples of g_partition={self.g_partition}")
        if not 0.5 < self.alpha < 1.0:
            raise ConfigError("alpha must lie strictly between 1/2 and 1")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.g_normalize not in ("l2", "sup", "none"):
            raise ConfigError(f"unknown g_normalize {self.g_normalize!r}")
        if self.dim < 2:
            raise ConfigError("dim must be >= 2")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}

_INT_KEYS = {"dim", "g_partition", "g_seed", "samples", "seed", "quad_points",
             "refine_multiple", "witness_anchors", "lipschitz_pairs",
             "verify_paths", "verify_triples", "grid_points",
             "jacobian_points", "jacobian_n", "threads"}
_FLOAT_KEYS = {"alpha", "scale", "jacobian_h", "jacobian_radius"}
_INT_LIST_KEYS = {"n_values"}
_FLOAT_LIST_KEYS = {"g_coords", "angle_eps"}


def _convert(key: str, raw: str, lineno: int):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_LIST_KEYS:
            return tuple(int(p) for p in raw.split(",") if p.strip())
        if key in _FLOAT_LIST_KEYS:
            return tuple(float(p) for p in raw.split(",") if p.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad value for {key!r}: {raw!r} ({exc})")


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse the flat key-value format; raises ConfigError with line numbers."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw, lineno)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc))


def load_config(path: str, **overrides) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), **overrides)


def config_dict(config: ExperimentConfig) -> dict:
    out = {}
    for f in fields(ExperimentConfig):
        v = getattr(config, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out
