"""Experiment configuration: a flat "key = value" file with '#' comments.

Unknown keys are errors so a stale or misspelled parameter can never
silently fall back to a default. parse_config(serialize_config(c)) == c.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kinetics import CubicKinetics, CubicParams, FhnKinetics, FhnParams
from .spectral import GridSpec

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config", "load_config"]


class ConfigError(ValueError):
    """Malformed, unknown, or inconsistent configuration input."""


@dataclass(frozen=True)
class RunConfig:
    """Full description of one simulation run."""

    n: int = 128
    length: float = 64.0
    kinetics: str = "fhn"  # "fhn" | "cubic"
    eps: float = 0.2
    beta_kin: float = 0.0
    gamma_kin: float = 0.5
    du: float = 1.0
    dv: float = 0.0
    clamp: float = 5.0
    mu: float = 1.0
    alpha_c: float = 1.0
    gamma: float | None = 0.0  # scalar shorthand for C = -gamma I
    coupling_matrix: tuple[tuple[float, ...], ...] | None = None
    dt: float = 0.05
    t_end: float = 100.0
    record_stride: int = 10
    seed: int = 42
    noise_sigma: float = 0.1
    c0: float = 1.0
    lp_jmax: int = 0
    ic_path: str | None = None
    output_dir: str | None = None
    emit_csv: bool = True
    emit_snapshots: bool = True
    emit_pgm: bool = False

    def __post_init__(self):
        if self.kinetics not in ("fhn", "cubic"):
            raise ConfigError(f"unknown kinetics '{self.kinetics}'")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end must be >= 0")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be >= 1")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if (self.gamma is None) == (self.coupling_matrix is None):
            raise ConfigError("give exactly one of gamma / coupling_matrix")

    @property
    def n_components(self) -> int:
        return 2 if self.kinetics == "fhn" else 1

    def build_grid(self) -> GridSpec:
        return GridSpec(self.n, self.length, components=self.n_components)

    def build_kinetics(self):
        if self.kinetics == "fhn":
            return FhnKinetics(
                FhnParams(
                    eps=self.eps,
                    beta_kin=self.beta_kin,
                    gamma_kin=self.gamma_kin,
                    du=self.du,
                    dv=self.dv,
                    clamp=self.clamp,
                )
            )
        return CubicKinetics(CubicParams(mu=self.mu, alpha_c=self.alpha_c), d0=self.du)

    def coupling(self) -> np.ndarray:
        """The N x N coupling matrix, expanding the scalar shorthand."""
        n = self.n_components
        if self.gamma is not None:
            return -float(self.gamma) * np.eye(n)
        c = np.array(self.coupling_matrix, dtype=np.float64)
        if c.shape != (n, n):
            raise ConfigError(
                f"coupling matrix shape {c.shape} does not match {n} components"
            )
        return c

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def with_gamma(self, gamma: float) -> "RunConfig":
        return self.replace(gamma=float(gamma), coupling_matrix=None)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_BOOL_KEYS = {"emit_csv", "emit_snapshots", "emit_pgm"}
_INT_KEYS = {"n", "record_stride", "seed", "lp_jmax"}
_STR_KEYS = {"kinetics", "ic_path", "output_dir"}


def _parse_matrix(text: str) -> tuple[tuple[float, ...], ...]:
    try:
        rows = tuple(
            tuple(float(x) for x in row.split(",")) for row in text.split(";")
        )
    except ValueError as exc:
        raise ConfigError(f"bad coupling matrix '{text}'") from exc
    if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
        raise ConfigError(f"coupling matrix '{text}' is not square")
    return rows


def _format_matrix(rows: tuple[tuple[float, ...], ...]) -> str:
    return ";".join(",".join(repr(float(x)) for x in row) for row in rows)


def _parse_value(key: str, raw: str):
    if raw == "none":
        return None
    if key == "coupling_matrix":
        return _parse_matrix(raw)
    if key in _BOOL_KEYS:
        if raw not in ("true", "false"):
            raise ConfigError(f"{key} must be true or false, got '{raw}'")
        return raw == "true"
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key} expects an integer, got '{raw}'") from exc
    if key in _STR_KEYS:
        return raw
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} expects a number, got '{raw}'") from exc


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{body}'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        values[key] = _parse_value(key, raw)
    try:
        return RunConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _format_value(key: str, value) -> str:
    if value is None:
        return "none"
    if key == "coupling_matrix":
        return _format_matrix(value)
    if key in _BOOL_KEYS:
        return "true" if value else "false"
    if key in _INT_KEYS or key in _STR_KEYS:
        return str(value)
    return repr(float(value))


def serialize_config(config: RunConfig) -> str:
    lines = [
        f"{f.name} = {_format_value(f.name, getattr(config, f.name))}"
        for f in dataclasses.fields(RunConfig)
    ]
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
