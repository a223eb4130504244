"""Experiment configuration: a single JSON tree, fully validated up front.

Every range check any dispatched operation relies on happens here, at load
time, so a numerical stage never sees an out-of-range parameter. The config
round-trips through JSON unchanged (load(dump(c)) == c) and is echoed into
the run manifest for archival.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field as dc_field, replace
from pathlib import Path

from .errors import ConfigInvalid
from .fraclap import QuadratureSpec

COMMANDS = (
    "eval",
    "oracle",
    "decay",
    "cutoff-bound",
    "truncation",
    "tube",
    "assouad",
    "capacity",
    "removability",
    "bootstrap",
    "superharmonic",
    "suite",
)


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    problem: dict = dc_field(default_factory=dict)
    field: dict | None = None
    set: dict | None = None
    cutoff: dict | None = None
    quadrature: QuadratureSpec = QuadratureSpec()
    sweeps: dict = dc_field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    out_dir: str = "runs"

    def to_dict(self) -> dict:
        out = asdict(self)
        return out

    def with_overrides(
        self,
        seed: int | None = None,
        workers: int | None = None,
        out_dir: str | None = None,
    ) -> "ExperimentConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=int(seed), quadrature=replace(cfg.quadrature, seed=int(seed)))
        if workers is not None:
            cfg = replace(
                cfg, workers=int(workers), quadrature=replace(cfg.quadrature, workers=int(workers))
            )
        if out_dir is not None:
            cfg = replace(cfg, out_dir=str(out_dir))
        validate_config(cfg)
        return cfg


def config_from_dict(raw: dict) -> ExperimentConfig:
    data = dict(raw)
    unknown = set(data) - {
        "command",
        "problem",
        "field",
        "set",
        "cutoff",
        "quadrature",
        "sweeps",
        "seed",
        "workers",
        "out_dir",
    }
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    if "command" not in data:
        raise ConfigInvalid("config needs a command")
    quad_raw = dict(data.get("quadrature", {}))
    try:
        quad = QuadratureSpec(**quad_raw)
    except TypeError as exc:
        raise ConfigInvalid(f"bad quadrature block: {exc}") from exc
    seed = int(data.get("seed", quad.seed))
    workers = int(data.get("workers", quad.workers))
    quad = replace(quad, seed=seed, workers=workers)
    cfg = ExperimentConfig(
        command=data["command"],
        problem=dict(data.get("problem", {})),
        field=data.get("field"),
        set=data.get("set"),
        cutoff=data.get("cutoff"),
        quadrature=quad,
        sweeps=dict(data.get("sweeps", {})),
        seed=seed,
        workers=workers,
        out_dir=str(data.get("out_dir", "runs")),
    )
    validate_config(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigInvalid(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigInvalid("config root must be a JSON object")
    return config_from_dict(raw)


def dump_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True), encoding="utf-8")


# ---------------------------------------------------------------------------
# Validation. One place, one error type, messages name the violated range.
# ---------------------------------------------------------------------------


def _need(problem: dict, key: str, command: str) -> float:
    if key not in problem:
        raise ConfigInvalid(f"command {command!r} needs problem.{key}")
    return problem[key]


def _check_dim(n) -> int:
    if not isinstance(n, int) or n < 1:
        raise ConfigInvalid(f"dimension n must be an integer >= 1, got {n!r}")
    return n


def _check_order(value: float, n: int, name: str, open_top: bool = False) -> float:
    top = n / 2.0
    value = float(value)
    if not 0.0 < value <= top or (open_top and value == top):
        bracket = ")" if open_top else "]"
        raise ConfigInvalid(f"{name} must lie in (0, n/2{bracket} = (0, {top}{bracket}, got {value}")
    return value


def _check_positive_list(values, name: str) -> list[float]:
    if not isinstance(values, (list, tuple)) or not values:
        raise ConfigInvalid(f"{name} must be a nonempty list")
    out = [float(v) for v in values]
    if any(v <= 0.0 for v in out):
        raise ConfigInvalid(f"{name} entries must be positive")
    return out


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigInvalid(f"unknown command {cfg.command!r} (known: {', '.join(COMMANDS)})")
    if cfg.workers < 1:
        raise ConfigInvalid("workers must be >= 1")
    if cfg.quadrature.mc_samples < 100:
        raise ConfigInvalid("mc_samples must be >= 100")
    if cfg.quadrature.rel_tol <= 0:
        raise ConfigInvalid("rel_tol must be positive")
    p = cfg.problem
    command = cfg.command

    if command == "eval":
        if cfg.field is None:
            raise ConfigInvalid("command 'eval' needs a field descriptor")
        n = _check_dim(cfg.field.get("dim", p.get("n")))
        _check_order(_need(p, "sigma", command), n, "sigma")
        if "x" not in p and "r" not in p:
            raise ConfigInvalid("command 'eval' needs problem.x or problem.r")

    elif command == "oracle":
        if cfg.field is None:
            raise ConfigInvalid("command 'oracle' needs a field descriptor")
        n = _check_dim(cfg.field.get("dim", p.get("n")))
        _check_order(_need(p, "sigma", command), n, "sigma")
        _check_positive_list(cfg.sweeps.get("radii", [1.0]), "sweeps.radii")

    elif command == "decay":
        if cfg.field is None:
            raise ConfigInvalid("command 'decay' needs a field descriptor")
        n = _check_dim(cfg.field.get("dim", p.get("n")))
        _check_order(_need(p, "sigma", command), n, "sigma")
        radii = cfg.sweeps.get("radii")
        if radii is not None:
            radii = _check_positive_list(radii, "sweeps.radii")
            if len(radii) < 8 or max(radii) / min(radii) < 10.0 - 1e-9:
                raise ConfigInvalid("sweeps.radii must hold >= 8 radii spanning a decade")

    elif command == "cutoff-bound":
        if cfg.cutoff is None:
            raise ConfigInvalid("command 'cutoff-bound' needs a cutoff descriptor")
        n = _check_dim(cfg.cutoff.get("dim", cfg.cutoff.get("set", {}).get("dim", p.get("n", 1))))
        sigma = float(_need(p, "sigma", command))
        if not (0.0 < sigma < 1.0 or 1.0 < sigma < 2.0):
            raise ConfigInvalid(f"sigma must lie in (0,1) or (1,2), got {sigma}")
        eps = _check_positive_list(cfg.sweeps.get("eps", []), "sweeps.eps")
        kind = cfg.cutoff.get("kind")
        if kind == "point-annulus":
            outer = float(cfg.cutoff.get("outer_radius", 0.0))
            if any(e >= outer / 4.0 for e in eps):
                raise ConfigInvalid("point-annulus needs every eps < outer_radius/4")
        if kind == "manifold-fermi":
            rho = float(cfg.cutoff.get("rho", 0.0))
            if rho <= 0.0:
                raise ConfigInvalid("manifold-fermi needs rho > 0")
            if any(e >= rho / 4.0 for e in eps):
                raise ConfigInvalid("manifold-fermi needs every eps < rho/4")

    elif command == "truncation":
        if cfg.field is None:
            raise ConfigInvalid("command 'truncation' needs a field descriptor")
        n = _check_dim(cfg.field.get("dim", p.get("n")))
        _check_order(_need(p, "gamma", command), n, "gamma", open_top=True)
        _check_positive_list(cfg.sweeps.get("eps", []), "sweeps.eps")

    elif command in ("tube", "assouad"):
        if cfg.set is None:
            raise ConfigInvalid(f"command {command!r} needs a set descriptor")
        if command == "tube":
            _check_positive_list(cfg.sweeps.get("radii", []), "sweeps.radii")
        else:
            pairs = cfg.sweeps.get("scale_pairs", [])
            if not pairs:
                raise ConfigInvalid("command 'assouad' needs sweeps.scale_pairs")
            for pair in pairs:
                r, big = float(pair[0]), float(pair[1])
                if not 0.0 < r < big:
                    raise ConfigInvalid("each scale pair needs 0 < r < R")

    elif command == "capacity":
        if cfg.set is None:
            raise ConfigInvalid("command 'capacity' needs a set descriptor")
        n = _check_dim(cfg.set.get("dim", p.get("n", 1)))
        _check_order(_need(p, "sigma", command), n, "sigma")
        k_max = p.get("k_max", 6)
        if not isinstance(k_max, int) or k_max < 2:
            raise ConfigInvalid("problem.k_max must be an integer >= 2")

    elif command == "removability":
        if cfg.set is None:
            raise ConfigInvalid("command 'removability' needs a set descriptor")
        n = _check_dim(cfg.set.get("dim", p.get("n", 3)))
        gamma = _check_order(_need(p, "gamma", command), n, "gamma", open_top=True)
        pp = float(_need(p, "p", command))
        if pp <= 1.0:
            raise ConfigInvalid(f"p must exceed 1, got {pp}")
        beta = float(_need(p, "beta", command))
        if beta <= 0.0:
            raise ConfigInvalid(f"beta must be positive, got {beta}")
        eps = cfg.sweeps.get("eps")
        if eps is not None:
            _check_positive_list(eps, "sweeps.eps")

    elif command == "bootstrap":
        n = _check_dim(_need(p, "n", command))
        _check_order(_need(p, "gamma", command), n, "gamma", open_top=True)
        pp = float(_need(p, "p", command))
        if pp <= 1.0:
            raise ConfigInvalid(f"p must exceed 1, got {pp}")

    elif command == "superharmonic":
        if cfg.field is None:
            raise ConfigInvalid("command 'superharmonic' needs a field descriptor")
        n = _check_dim(cfg.field.get("dim", p.get("n")))
        gamma = _check_order(_need(p, "gamma", command), n, "gamma", open_top=True)
        sigmas = p.get("sigma_list")
        if not sigmas:
            raise ConfigInvalid("command 'superharmonic' needs problem.sigma_list")
        for s in sigmas:
            s = float(s)
            if not 0.0 < s < gamma:
                raise ConfigInvalid(f"each sigma must lie in (0, gamma) = (0, {gamma}), got {s}")

    elif command == "suite":
        pass
