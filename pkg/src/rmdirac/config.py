"""Run configuration: flat key=value sections, canonical defaults embedded.

The file format is INI-style (zero-dependency, diffable):

    [params]
    M = 5.0
    ...
    [run]
    symmetry = spin
    [tolerances]
    rtol_2f1 = 1e-12
    ...
    [output]
    directory = out
    format = csv
"""

from __future__ import annotations

import configparser
import dataclasses
import io
from dataclasses import dataclass

from .errors import ConfigError
from .model import PhysicalParams, SymmetryKind
from .spectrum import DEFAULT_TOL_Q, MARGIN_FRAC

SCHEMA_VERSION = 1

_PARAM_FIELDS = ("M", "hbar_c", "alpha", "V1", "V2", "r_e", "kappa", "C_s", "C_ps")


@dataclass(frozen=True)
class Tolerances:
    rtol_2f1: float = 1e-12
    tol_q: float = DEFAULT_TOL_Q
    n_grid: int = 400
    oracle_steps: int = 6000
    wf_points: int = 2048
    margin_frac: float = MARGIN_FRAC

    def __post_init__(self):
        for name in ("rtol_2f1", "tol_q", "margin_frac"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"tolerance {name} must be positive")
        for name in ("n_grid", "oracle_steps", "wf_points"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"grid size {name} must be positive")


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"output format must be csv or json, got {self.format!r}")


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    symmetry: SymmetryKind
    tolerances: Tolerances = Tolerances()
    output: OutputSpec = OutputSpec()


def canonical_params() -> PhysicalParams:
    """Dimensionless multi-level well used as the default desk-scale fixture."""
    return PhysicalParams(M=5.0, hbar_c=1.0, alpha=0.25, V1=3.0, V2=0.5,
                          r_e=2.5, kappa=1, C_s=0.0, C_ps=0.0)


def refutation_params() -> PhysicalParams:
    """Shallow well with inverted bias where polynomial-truncation candidates exist.

    The canonical well has none (its upper exponent is too large for the
    truncation condition to have roots), so the refutation harness ships
    with this companion set.
    """
    return PhysicalParams(M=5.0, hbar_c=1.0, alpha=0.25, V1=0.5, V2=-2.5,
                          r_e=2.5, kappa=-1, C_s=0.0, C_ps=0.0)


def default_config() -> RunConfig:
    return RunConfig(params=canonical_params(), symmetry=SymmetryKind.spin)


def refutation_config() -> RunConfig:
    return RunConfig(params=refutation_params(), symmetry=SymmetryKind.spin)


def _get_typed(section, key, kind, where):
    raw = section.get(key)
    if raw is None:
        raise ConfigError(f"missing field {key!r} in section [{where}]")
    try:
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"field {key!r} in [{where}]: {exc}") from exc


def parse_config_text(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc

    known = {"params", "run", "tolerances", "output"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    base = default_config()

    kwargs = {}
    if cp.has_section("params"):
        sec = cp["params"]
        extra = set(sec) - set(f.lower() for f in _PARAM_FIELDS)
        if extra:
            raise ConfigError(f"unknown fields in [params]: {sorted(extra)}")
        for f in _PARAM_FIELDS:
            if f.lower() in sec:
                kind = int if f == "kappa" else float
                kwargs[f] = _get_typed(sec, f.lower(), kind, "params")
    try:
        params = dataclasses.replace(base.params, **kwargs)
    except Exception as exc:
        raise ConfigError(f"invalid [params]: {exc}") from exc

    symmetry = base.symmetry
    if cp.has_section("run"):
        sec = cp["run"]
        extra = set(sec) - {"symmetry"}
        if extra:
            raise ConfigError(f"unknown fields in [run]: {sorted(extra)}")
        if "symmetry" in sec:
            try:
                symmetry = SymmetryKind(sec["symmetry"])
            except ValueError as exc:
                raise ConfigError(f"field 'symmetry' in [run]: {exc}") from exc

    tol_kwargs = {}
    if cp.has_section("tolerances"):
        sec = cp["tolerances"]
        fields = {f.name: f.type for f in dataclasses.fields(Tolerances)}
        extra = set(sec) - set(fields)
        if extra:
            raise ConfigError(f"unknown fields in [tolerances]: {sorted(extra)}")
        for name in fields:
            if name in sec:
                kind = int if name in ("n_grid", "oracle_steps", "wf_points") else float
                tol_kwargs[name] = _get_typed(sec, name, kind, "tolerances")
    tolerances = Tolerances(**tol_kwargs)

    out_kwargs = {}
    if cp.has_section("output"):
        sec = cp["output"]
        extra = set(sec) - {"directory", "format"}
        if extra:
            raise ConfigError(f"unknown fields in [output]: {sorted(extra)}")
        if "directory" in sec:
            out_kwargs["directory"] = sec["directory"]
        if "format" in sec:
            out_kwargs["format"] = sec["format"]
    output = OutputSpec(**out_kwargs)

    return RunConfig(params=params, symmetry=symmetry, tolerances=tolerances,
                     output=output)


def parse_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config_text(text)


def dump_config(cfg: RunConfig) -> str:
    """Serialize a RunConfig so that parse_config_text round-trips it exactly."""
    buf = io.StringIO()
    buf.write("[params]\n")
    for f in _PARAM_FIELDS:
        buf.write(f"{f} = {getattr(cfg.params, f)!r}\n")
    buf.write("\n[run]\n")
    buf.write(f"symmetry = {cfg.symmetry.value}\n")
    buf.write("\n[tolerances]\n")
    for f in dataclasses.fields(Tolerances):
        buf.write(f"{f.name} = {getattr(cfg.tolerances, f.name)!r}\n")
    buf.write("\n[output]\n")
    buf.write(f"directory = {cfg.output.directory}\n")
    buf.write(f"format = {cfg.output.format}\n")
    return buf.getvalue()
