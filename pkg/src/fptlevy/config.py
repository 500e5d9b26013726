"""Run configuration: model, grids, quadrature and reference settings.

A run is one JSON document.  Parsing is strict: unknown keys are an error
at every level, so a typo never silently falls back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .ioutil import atomic_write_text
from .kernel import QuadratureConfig
from .models import LsbmSpec, VarianceGamma, lsbm_from_json, lsbm_to_json
from .oracles import FdConfig, McConfig

_LAWS = ("quadratic", "linear")


@dataclass(frozen=True)
class GridConfig:
    n_t: int = 50
    n_x: int = 10
    X: float = 10.0
    law: str = "quadratic"

    def __post_init__(self):
        if self.n_t < 1:
            raise ValueError(f"n_t must be positive, got {self.n_t}")
        if self.n_x < 2:
            raise ValueError(f"n_x must be at least 2, got {self.n_x}")
        if not self.X > 0:
            raise ValueError(f"X must be positive, got {self.X}")
        if self.law not in _LAWS:
            raise ValueError(f"law must be one of {_LAWS}, got {self.law!r}")


@dataclass(frozen=True)
class IterConfig:
    n_iter: int = 4
    tol: float = 1e-4

    def __post_init__(self):
        if not 1 <= self.n_iter <= 64:
            raise ValueError(f"n_iter must be in [1, 64], got {self.n_iter}")
        if self.tol < 0:
            raise ValueError(f"tol must be nonnegative, got {self.tol}")


@dataclass(frozen=True)
class RunConfig:
    model: LsbmSpec
    x0: float = 0.5
    T: float = 5.0
    grid: GridConfig = field(default_factory=GridConfig)
    iteration: IterConfig = field(default_factory=IterConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    fd: FdConfig = field(default_factory=FdConfig)
    mc: McConfig = field(default_factory=McConfig)

    def __post_init__(self):
        if not 0 < self.x0 < self.grid.X:
            raise ValueError(f"x0 must lie in (0, X), got {self.x0}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")


def _check_keys(d: dict, allowed: tuple, where: str) -> None:
    extra = set(d) - set(allowed)
    if extra:
        raise ValueError(f"unknown keys in {where}: {sorted(extra)}")


def _section(cls, d: dict, allowed: tuple, where: str):
    if not isinstance(d, dict):
        raise ValueError(f"{where} must be an object")
    _check_keys(d, allowed, where)
    return cls(**d)


def config_to_json(cfg: RunConfig) -> dict:
    q = cfg.quadrature
    return {
        "model": lsbm_to_json(cfg.model),
        "x0": cfg.x0,
        "T": cfg.T,
        "grid": {"n_t": cfg.grid.n_t, "n_x": cfg.grid.n_x,
                 "X": cfg.grid.X, "law": cfg.grid.law},
        "iteration": {"n_iter": cfg.iteration.n_iter, "tol": cfg.iteration.tol},
        "quadrature": {"truncation": q.truncation, "n_points": q.n_points,
                       "pv_excision": q.pv_excision,
                       "contour_shift": q.contour_shift},
        "fd": {"n_t": cfg.fd.n_t, "n_x": cfg.fd.n_x, "X": cfg.fd.X},
        "mc": {"n_paths": cfg.mc.n_paths, "dt_sim": cfg.mc.dt_sim,
               "seed": cfg.mc.seed, "horizon": cfg.mc.horizon,
               "n_buckets": cfg.mc.n_buckets},
    }


def config_from_json(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ValueError("configuration must be a JSON object")
    _check_keys(doc, ("model", "x0", "T", "grid", "iteration",
                      "quadrature", "fd", "mc"), "configuration")
    if "model" not in doc:
        raise ValueError("configuration is missing the 'model' section")
    kwargs = {"model": lsbm_from_json(doc["model"])}
    if "x0" in doc:
        kwargs["x0"] = float(doc["x0"])
    if "T" in doc:
        kwargs["T"] = float(doc["T"])
    if "grid" in doc:
        kwargs["grid"] = _section(GridConfig, doc["grid"],
                                  ("n_t", "n_x", "X", "law"), "grid")
    if "iteration" in doc:
        kwargs["iteration"] = _section(IterConfig, doc["iteration"],
                                       ("n_iter", "tol"), "iteration")
    if "quadrature" in doc:
        kwargs["quadrature"] = _section(
            QuadratureConfig, doc["quadrature"],
            ("truncation", "n_points", "pv_excision", "contour_shift"),
            "quadrature")
    if "fd" in doc:
        kwargs["fd"] = _section(FdConfig, doc["fd"], ("n_t", "n_x", "X"), "fd")
    if "mc" in doc:
        kwargs["mc"] = _section(
            McConfig, doc["mc"],
            ("n_paths", "dt_sim", "seed", "horizon", "n_buckets"), "mc")
    return RunConfig(**kwargs)


def set_config(name: str) -> RunConfig:
    """The two parameter sets used throughout: I drifts up, II drifts down."""
    if name == "I":
        model = LsbmSpec(beta=0.2, subordinator=VarianceGamma(nu=1.0))
    elif name == "II":
        model = LsbmSpec(beta=-0.2, subordinator=VarianceGamma(nu=2.0))
    else:
        raise ValueError(f"unknown parameter set {name!r}; choose 'I' or 'II'")
    return RunConfig(model=model)


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_json(doc)


def dump_config(cfg: RunConfig, path: str) -> None:
    atomic_write_text(path, json.dumps(config_to_json(cfg), indent=2) + "\n")
