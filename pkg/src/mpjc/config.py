"""Scenario configuration files.

A scenario is a single INI file with a ``[scenario]`` section and optional
``[lindblad]`` and ``[scan]`` sections::

    [scenario]
    schema_version = 1
    kind = negativity
    n1 = 0
    n2 = 0
    m = 3
    phi = 0.7853981633974483
    t_stop = 30

Floats are written with ``repr`` so a file read and written again is
byte-identical.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import asdict, dataclass, field, fields

from .errors import InvalidParameterError
from .hamiltonian import ModelParams
from .lindblad import LindbladConfig

__all__ = ["SCHEMA_VERSION", "KINDS", "ConfigError", "ScenarioConfig", "load_config", "loads_config"]

SCHEMA_VERSION = 1
KINDS = ("evolve", "negativity", "phi-scan", "transfer-scan", "detuning-scan", "decoherence",
         "symmetry-check", "beamsplitter")
ENGINES = ("numeric", "auto", "analytic")


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


@dataclass
class ScanSettings:
    phi_points: int = 19
    n1_max: int = 5
    m_max: int = 5
    delta_min: float = -2.0
    delta_max: float = 2.0
    delta_points: int = 21
    n_max: int = 4
    theta_points: int = 181


@dataclass
class ScenarioConfig:
    kind: str = "evolve"
    n1: int = 0
    n2: int = 0
    m: int = 1
    g1: float = 1 / math.sqrt(2)
    g2: float = 1 / math.sqrt(2)
    delta: float = 0.0
    phi: float = 0.0
    t_start: float = 0.0
    t_stop: float = 30.0
    t_points: int = 301
    which: int = 1
    tol: float = 1e-6
    engine: str = "numeric"
    output: str = ""
    lambda_r: float = 0.0
    lambda_d: float = 0.0
    n_th: float = 0.0
    cutoff: int | None = None
    strict: bool = False
    rtol: float = 1e-11
    atol: float = 1e-13
    scan: ScanSettings = field(default_factory=ScanSettings)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    # ---------------------------------------------------------------- checks
    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version} (expected {SCHEMA_VERSION})")
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.engine not in ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}; choose from {', '.join(ENGINES)}")
        if self.which not in (1, 2):
            raise ConfigError("which must be 1 or 2")
        if self.t_points < 1 or self.t_stop < self.t_start:
            raise ConfigError("time grid needs t_points >= 1 and t_stop >= t_start")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        try:
            self.params()
            self.lindblad()
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    # ----------------------------------------------------------- conversions
    def params(self) -> ModelParams:
        return ModelParams(self.n1, self.n2, self.m, self.g1, self.g2, self.delta, self.phi)

    def lindblad(self) -> LindbladConfig:
        return LindbladConfig(self.lambda_r, self.lambda_d, self.n_th, self.cutoff, self.rtol, self.atol, self.strict)

    def times(self):
        import numpy as np

        if self.t_points == 1:
            return np.array([self.t_start])
        return np.linspace(self.t_start, self.t_stop, self.t_points)

    def as_dict(self) -> dict:
        return asdict(self)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        d = self.as_dict()
        scan = d.pop("scan")
        lind = {k: d.pop(k) for k in ("lambda_r", "lambda_d", "n_th", "cutoff", "strict", "rtol", "atol")}
        head = {"schema_version": d.pop("schema_version")}
        cp["scenario"] = {k: _fmt(v) for k, v in {**head, **d}.items()}
        cp["lindblad"] = {k: _fmt(v) for k, v in lind.items()}
        cp["scan"] = {k: _fmt(v) for k, v in scan.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def with_overrides(self, **changes) -> "ScenarioConfig":
        d = self.as_dict()
        scan = dict(d.pop("scan"))
        for k, v in changes.items():
            if v is None:
                continue
            if k in scan:
                scan[k] = v
            elif k in d:
                d[k] = v
            else:
                raise ConfigError(f"unknown setting {k!r}")
        return ScenarioConfig(scan=ScanSettings(**scan), **d)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _convert(name, raw, typ):
    raw = raw.strip()
    try:
        if typ in ("int | None", int | None) or name == "cutoff":
            return None if raw == "" else int(raw)
        if typ in (bool, "bool"):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ in (int, "int"):
            return int(raw)
        if typ in (float, "float"):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"cannot parse {name} = {raw!r}") from exc


def loads_config(text: str) -> ScenarioConfig:
    """Parse a scenario from INI text."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if "scenario" not in cp:
        raise ConfigError("missing [scenario] section")
    if "schema_version" not in cp["scenario"]:
        raise ConfigError("missing schema_version in [scenario]")
    types = {f.name: f.type for f in fields(ScenarioConfig)}
    scan_types = {f.name: f.type for f in fields(ScanSettings)}
    values = {}
    for section in ("scenario", "lindblad"):
        if section not in cp:
            continue
        for k, raw in cp[section].items():
            if k not in types or k == "scan":
                raise ConfigError(f"unknown key {k!r} in [{section}]")
            values[k] = _convert(k, raw, types[k])
    scan = {}
    if "scan" in cp:
        for k, raw in cp["scan"].items():
            if k not in scan_types:
                raise ConfigError(f"unknown key {k!r} in [scan]")
            scan[k] = _convert(k, raw, scan_types[k])
    extra = set(cp.sections()) - {"scenario", "lindblad", "scan"}
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")
    return ScenarioConfig(scan=ScanSettings(**scan), **values)


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
