"""Experiment configuration: schema, per-experiment defaults and TOML loading."""
from __future__ import annotations

import sys
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Strict):
    start: float = -2.0
    stop: float = 2.0
    num: int = Field(21, ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.stop > self.start:
            raise ValueError("t_grid.stop must exceed t_grid.start")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


class ModelConfig(_Strict):
    m: float = -1.0
    width: int = Field(30, ge=4)
    height: int = Field(30, ge=4)
    radius: float = Field(8.0, gt=0)
    center: Optional[tuple[float, float]] = None
    k_grid: int = Field(40, ge=4)


# tolerances every experiment understands, and the keys each one reads
TOLERANCES: dict[str, dict[str, float]] = {
    "check-moves": {"flip": 1e-9, "commutation": 1e-9, "inverse": 1e-10, "counterexample": 1e-3},
    "markov-lab": {"cmi": 1e-10, "markov_move": 1e-8, "k_decomposition": 1e-7, "spearman": 0.9},
    "derivative": {"derivative_exact": 1e-4, "derivative_gaussian": 1e-5},
    "facts": {"facts": 1e-8, "overlap_J": 1e-4, "overlap_sigma": 1e-3, "order": 0.25,
              "markov_sigma": 1e-8},
    "toric": {"stabilizer": 1e-12, "a1": 1e-10, "annulus": 1e-8, "J": 1e-8, "pump_flat": 1e-8,
              "deform_identity": 1e-7},
    "chern": {"J_rel": 0.10, "sigma_rel": 0.10, "J_trivial": 0.02},
    "pump-entropy": {"slope_rel": 0.15, "r2": 0.99, "trivial_slope": 0.02, "pump_flat": 1e-8},
    "pump-charge": {"slope_rel": 0.15, "r2": 0.99, "trivial_slope": 0.02, "pump_flat": 1e-8},
    "deform": {"deform_exact": 1e-8, "deform_drift": 0.10},
    "oracle": {"oracle": 1e-6},
}
# thresholds that are lower bounds; --tolerance-scale leaves them alone
LOWER_BOUNDS = {"counterexample", "spearman", "r2"}

PRESETS: dict[str, dict] = {
    "check-moves": {"n_states": 100, "n_qubits": [8, 9, 10]},
    "markov-lab": {"n_states": 100},
    "derivative": {"n_states": 50, "n_qubits": [8]},
    "facts": {"n_states": 100, "n_qubits": [8]},
    "toric": {},
    "chern": {"trivial_m": 3.0},
    "pump-entropy": {"backend": "gaussian", "trivial_m": 3.0},
    "pump-charge": {"backend": "gaussian", "trivial_m": 3.0},
    "deform": {},
    "oracle": {"n_states": 5, "n_modes": 8},
}


class ExperimentConfig(_Strict):
    experiment: Literal[tuple(TOLERANCES)]  # type: ignore[valid-type]
    backend: Literal["exact", "gaussian"] = "exact"
    seed: int = 0
    n_states: int = Field(10, ge=1)
    n_qubits: list[int] = Field(default_factory=lambda: [8])
    n_modes: int = Field(10, ge=4, le=12)
    t_values: list[float] = Field(default_factory=lambda: [-0.5, 0.5, 1.0, 2.0])
    t_grid: GridConfig = Field(default_factory=GridConfig)
    h: float = Field(1e-3, gt=0)
    h_sweep: list[float] = Field(default_factory=lambda: [4e-2, 2e-2, 1e-2])
    sweep_points: int = Field(10, ge=3)
    model: ModelConfig = Field(default_factory=ModelConfig)
    radii: list[float] = Field(default_factory=lambda: [5.0, 8.0, 11.0])
    trivial_m: Optional[float] = None
    tolerances: dict[str, float] = Field(default_factory=dict)
    tolerance_scale: float = Field(1.0, gt=0)
    jobs: int = Field(1, ge=1)
    out: str = "modflow-out"

    @model_validator(mode="after")
    def _resolve(self):
        base = dict(TOLERANCES[self.experiment])
        unknown = set(self.tolerances) - set(base)
        if unknown:
            raise ValueError(f"unknown tolerance keys for {self.experiment}: {sorted(unknown)}")
        base.update(self.tolerances)
        if self.tolerance_scale != 1.0:
            base = {k: v if k in LOWER_BOUNDS else v * self.tolerance_scale for k, v in base.items()}
        # store the fully resolved table so reports echo every threshold
        self.tolerances = base
        self.tolerance_scale = 1.0
        if any(n < 3 or n > 20 for n in self.n_qubits) or not self.n_qubits:
            raise ValueError("n_qubits entries must lie in [3, 20]")
        if not self.h_sweep or sorted(self.h_sweep, reverse=True) != list(self.h_sweep):
            raise ValueError("h_sweep must be a non-empty decreasing list")
        return self


def resolve(experiment: str, data: dict | None = None, **overrides) -> ExperimentConfig:
    """Preset for ``experiment`` overlaid by ``data`` (file) and ``overrides`` (flags)."""
    if experiment not in PRESETS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    merged = {"experiment": experiment, **PRESETS[experiment]}
    data = dict(data or {})
    if data.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for {data['experiment']!r}, not {experiment!r}")
    merged.update(data)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**merged)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_toml(path) -> dict:
    try:
        with open(Path(path), "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
