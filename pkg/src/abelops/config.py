"""Run configuration: defaults, TOML files, and flag overrides.

A configuration names a curve (five increasing real branch points), the two
twist vectors, the tolerance table, a seed, a grid resolution, and an
output directory.  Files use TOML; command-line flags override file values;
anything left unset falls back to the defaults below.  Complex vectors are
written as pairs [re, im] per component.
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curve import make_curve
from .verify import DEFAULT_TOLERANCES


class ConfigError(Exception):
    """Invalid or unknown configuration input."""


DEFAULT_BRANCH = [0.0, 1.0, 2.0, 3.0, 4.0]
DEFAULT_C = [[0.0, 0.13], [0.0, 0.29]]

VALID_KEYS = {
    "branch": "five strictly increasing real branch points",
    "c": "twist vector, two [re, im] pairs",
    "cprime": "second twist vector, two [re, im] pairs (default: curve derived)",
    "tolerances": "map of check-name tolerance overrides",
    "seed": "random seed for all sampled checks",
    "grid": "grid resolution per axis for scans",
    "tol_scale": "multiplier applied to every tolerance",
    "output_dir": "artifact directory",
    "regime": "verification regime: theorem1, theorem2, or all",
}


@dataclass
class RunConfig:
    branch: list = field(default_factory=lambda: list(DEFAULT_BRANCH))
    c: np.ndarray = None
    cprime: np.ndarray | None = None
    tolerances: dict = field(default_factory=dict)
    seed: int = 42
    grid: int = 10
    tol_scale: float = 1.0
    output_dir: Path = Path("out")
    regime: str = "all"

    def __post_init__(self):
        if self.c is None:
            self.c = _parse_cvec(DEFAULT_C, "c")
        self.output_dir = Path(self.output_dir)

    def effective_tolerances(self) -> dict:
        tol = {**DEFAULT_TOLERANCES, **self.tolerances}
        return {k: v * self.tol_scale for k, v in tol.items()}

    def as_document(self) -> dict:
        """Plain serializable view used for hashing and report stamping."""
        return {
            "branch": [float(b) for b in self.branch],
            "c": [[v.real, v.imag] for v in np.asarray(self.c, dtype=complex)],
            "cprime": None
            if self.cprime is None
            else [[v.real, v.imag] for v in np.asarray(self.cprime, dtype=complex)],
            "tolerances": {k: float(v) for k, v in
                           sorted(self.effective_tolerances().items())},
            "seed": int(self.seed),
            "grid": int(self.grid),
            "tol_scale": float(self.tol_scale),
            "regime": self.regime,
        }


def _parse_cvec(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape == (4,):
        arr = arr.reshape(2, 2)
    if arr.shape != (2, 2):
        raise ConfigError(
            f"{name} must be two [re, im] pairs, got shape {arr.shape}"
        )
    return arr[:, 0] + 1j * arr[:, 1]


def _validate(cfg: RunConfig) -> RunConfig:
    if len(cfg.branch) != 5:
        raise ConfigError("branch must list exactly five points")
    make_curve([float(b) for b in cfg.branch])  # surfaces ordering errors
    for k, v in cfg.tolerances.items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(
                f"unknown tolerance {k!r}; valid names: "
                + ", ".join(sorted(DEFAULT_TOLERANCES))
            )
        if not v > 0:
            raise ConfigError(f"tolerance {k!r} must be positive")
    if cfg.tol_scale <= 0:
        raise ConfigError("tol_scale must be positive")
    if cfg.grid < 2:
        raise ConfigError("grid must be at least 2")
    if cfg.regime not in ("theorem1", "theorem2", "all"):
        raise ConfigError("regime must be theorem1, theorem2, or all")
    return cfg


def parse_config(file_path: str | None = None, overrides: dict | None = None
                 ) -> RunConfig:
    """Merge defaults, an optional TOML file, and explicit overrides."""
    data: dict = {}
    if file_path is not None:
        with open(file_path, "rb") as fh:
            data = tomllib.load(fh)
    unknown = set(data) - set(VALID_KEYS)
    if unknown:
        raise ConfigError(
            "unknown configuration keys: "
            + ", ".join(sorted(unknown))
            + "; valid keys: "
            + ", ".join(sorted(VALID_KEYS))
        )
    merged = {**data, **{k: v for k, v in (overrides or {}).items()
                         if v is not None}}
    kwargs = {}
    for key in VALID_KEYS:
        if key not in merged:
            continue
        v = merged[key]
        if key in ("c", "cprime") and v is not None and not isinstance(
            v, np.ndarray
        ):
            v = _parse_cvec(v, key)
        kwargs[key] = v
    return _validate(RunConfig(**kwargs))
