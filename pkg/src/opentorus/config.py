"""Plain-text key=value experiment configuration.

One key per line, `#` starts a comment, unknown keys are errors.  Every
field has a default, so an empty file is a valid configuration.  Floats
serialize via repr, which round-trips binary64 exactly; parse(serialize(c))
reproduces c field for field.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError, OpenTorusError
from .system import Point, ToralSystem, make_system


@dataclass(frozen=True)
class ExperimentConfig:
    matrix: tuple = ((2, 1), (1, 1))
    mode: str = "float"
    q: int = 0                       # exact-mode denominator, 0 when unused
    hole_center: tuple = (0.0, 0.0)
    hole_radius: float = 0.2
    radius_list: tuple = (0.08, 0.12, 0.16, 0.2)
    base_point: tuple = (0.4142135, 0.7320508)
    t: int = 6
    k: int = 2
    delta: float = 0.0               # grid pitch, 0 = per-command default
    scale_list: tuple = ()           # box scales, empty = per-command default
    lambda_prime: float = 1.2
    p: float = 1.0
    ell: int = 1
    k_em: int = 1
    seed: int = 0
    out_dir: str = "out"
    workers: int = 1


_INT_FIELDS = {"q", "t", "k", "ell", "k_em", "seed", "workers"}
_FLOAT_FIELDS = {"hole_radius", "delta", "lambda_prime", "p"}
_TUPLE_FLOAT_FIELDS = {"hole_center", "radius_list", "base_point", "scale_list"}


def _parse_value(key: str, raw: str):
    try:
        if key == "matrix":
            rows = [row.split() for row in raw.split(";")]
            return tuple(tuple(int(v) for v in row) for row in rows)
        if key in _INT_FIELDS:
            return int(raw)
        if key in _FLOAT_FIELDS:
            return float(raw)
        if key in _TUPLE_FLOAT_FIELDS:
            return tuple(float(v) for v in raw.split())
        return raw
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {raw!r}: {exc}") from None


def parse_config(text: str) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
        if key in values:
            raise ConfigError(key, "duplicate key")
        values[key] = _parse_value(key, raw)
    cfg = replace(ExperimentConfig(), **values)
    validate_config(cfg)
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(value) -> str:
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return "; ".join(" ".join(str(v) for v in row) for row in value)
    if isinstance(value, tuple):
        return " ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"{f.name} = {_fmt(getattr(cfg, f.name))}"
             for f in fields(ExperimentConfig)]
    return "\n".join(lines) + "\n"


def build_system(cfg: ExperimentConfig) -> ToralSystem:
    try:
        return make_system(cfg.matrix)
    except (ValueError, OpenTorusError) as exc:
        raise ConfigError("matrix", str(exc)) from None


def build_base_point(cfg: ExperimentConfig, sys: ToralSystem) -> Point:
    if len(cfg.base_point) != sys.m:
        raise ConfigError("base_point",
                          f"needs {sys.m} coordinates, got {len(cfg.base_point)}")
    if cfg.mode == "exact":
        nums = [round(c * cfg.q) for c in cfg.base_point]
        return Point.exact(nums, cfg.q)
    return Point.from_floats(cfg.base_point)


def validate_config(cfg: ExperimentConfig) -> None:
    sys = build_system(cfg)
    if cfg.mode not in ("float", "exact"):
        raise ConfigError("mode", f"must be 'float' or 'exact', got {cfg.mode!r}")
    if cfg.mode == "exact" and cfg.q < 2:
        raise ConfigError("q", f"exact mode needs a denominator >= 2, got {cfg.q}")
    if not 0.0 < cfg.hole_radius < sys.r0:
        raise ConfigError(
            "hole_radius",
            f"radius {cfg.hole_radius} must lie in (0, r0 = {sys.r0})")
    for r in cfg.radius_list:
        if not 0.0 < r < sys.r0:
            raise ConfigError(
                "radius_list",
                f"radius {r} must lie in (0, r0 = {sys.r0})")
    if len(cfg.hole_center) != sys.m:
        raise ConfigError("hole_center",
                          f"needs {sys.m} coordinates, got {len(cfg.hole_center)}")
    if cfg.t < 1:
        raise ConfigError("t", f"must be at least 1, got {cfg.t}")
    if cfg.k < 1:
        raise ConfigError("k", f"must be at least 1, got {cfg.k}")
    if cfg.delta < 0:
        raise ConfigError("delta", f"must be nonnegative, got {cfg.delta}")
    if any(s <= 0 for s in cfg.scale_list):
        raise ConfigError("scale_list", "scales must be positive")
    if cfg.lambda_prime <= 0:
        raise ConfigError("lambda_prime", f"must be positive, got {cfg.lambda_prime}")
    if cfg.p < 1:
        raise ConfigError("p", f"must be at least 1, got {cfg.p}")
    if cfg.ell < 0:
        raise ConfigError("ell", f"must be nonnegative, got {cfg.ell}")
    if cfg.k_em < 1:
        raise ConfigError("k_em", f"must be at least 1, got {cfg.k_em}")
    if cfg.workers < 1:
        raise ConfigError("workers", f"must be at least 1, got {cfg.workers}")
    build_base_point(cfg, sys)
