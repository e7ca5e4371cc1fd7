"""Experiment configuration: one INI-style file with fixed sections and named tolerances."""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, field

import numpy as np

TOLERANCES = {
    "mass_tol": 5e-3,
    "chk_tol": 1e-3,
    "series_tol": 1e-6,
    "quad_tol": 1e-6,
    "tol_fft": 1e-8,
    "tol_inv": 1e-10,
    "neg_tol": 1e-9,
    "mol_tol": 2e-2,
    "approach_tol": 1e-2,
}

DEFAULT_SEED = 0x5EED

# key -> (type, default); a default of None marks an optional key
_SCHEMA = {
    "profile": {
        "family": (str, "stable"), "alpha": (float, 1.0), "dimension": (int, 1),
        "truncation_radius": (float, None), "tempering": (float, None), "comparability": (float, 1.0),
    },
    "coefficient": {
        "name": (str, "constant"), "c0": (float, None), "amp": (float, None), "level": (float, None),
        "center": (float, None), "width": (float, None), "omega": (float, None), "beta": (float, None),
        "periodize": (bool, True),
    },
    "grid": {
        "l": (float, 32.0), "n": (int, 2048), "geometry": (str, "torus"), "t_min": (float, 0.0625),
        "t_max": (float, 1.0), "t_count": (int, 121), "spacing": (str, "uniform"), "times": (list, None),
    },
    "case": {"case": (str, "P3"), "targets": (list, [0.0])},
    "tolerances": {k: (float, v) for k, v in TOLERANCES.items()},
    "checks": {
        "suite": (str, "main"), "seed": (int, DEFAULT_SEED), "t0": (float, 0.5), "epsilon": (float, 0.01),
        "ck": (list, [0.25, 0.25]), "gammas": (list, [0.25, 0.5]),
        "holder_targets": (list, [-1.0, -0.25, 0.0, 0.125, 0.5, 2.0]),
        "mol_t0": (float, 0.5), "mol_dt": (float, 0.25), "mol_n": (int, 1024),
        "ie_times": (list, [0.25, 1.0]), "closed_form_tol": (float, 1e-5), "closed_form_window": (float, 16.0),
        "semigroup_t_min": (float, 1e-3), "draws": (int, 10_000), "convolutions": (bool, True),
    },
}

SUITES = ("main", "appendix", "all")
CASES = ("P1", "P2", "P3")


class ConfigError(ValueError):
    def __init__(self, message: str, section: str | None = None, key: str | None = None,
                 line: int | None = None):
        where = ""
        if section:
            where = f"[{section}]" + (f" {key}" if key else "")
        if line:
            where = f"line {line}: " + where
        super().__init__(f"{where}: {message}" if where else message)
        self.section, self.key, self.line = section, key, line


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    cur = None
    for i, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        m = re.match(r"^\[(.+)\]$", s)
        if m:
            cur = m.group(1).strip().lower()
            if key is None and cur == section:
                return i
            continue
        if cur == section and key is not None:
            k = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            if k == key:
                return i
    return None


def _parse_value(kind, raw: str):
    raw = raw.strip()
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind is int:
        return int(raw, 0)
    if kind is float:
        return float(raw)
    if kind is list:
        return [float(v) for v in re.split(r"[,\s]+", raw) if v]
    return raw


@dataclass
class Config:
    profile: dict
    coefficient: dict
    grid: dict
    case: str
    targets: list
    tolerances: dict
    checks: dict
    text: str = ""
    path: str | None = None
    overrides: dict = field(default_factory=dict)

    # -- builders --------------------------------------------------------------------

    def build_profile(self):
        from .measure import make_profile
        p = self.profile
        return make_profile(p["family"], p["alpha"], p["dimension"], p["truncation_radius"], p["tempering"],
                            p["comparability"])

    def build_coefficient(self, periodize: bool | None = None):
        from .symbol import make_coefficient
        c = dict(self.coefficient)
        name = c.pop("name")
        do_periodize = c.pop("periodize") if periodize is None else periodize
        params = {k: v for k, v in c.items() if v is not None}
        coeff = make_coefficient(name, self.profile["dimension"], **params)
        if do_periodize and self.grid["geometry"] == "torus" and not coeff.is_constant:
            coeff = coeff.periodized(self.grid["l"])
        return coeff

    def times(self) -> np.ndarray:
        g = self.grid
        if g["times"]:
            return np.array(sorted(g["times"]), dtype=float)
        if g["spacing"] == "geometric":
            return np.geomspace(g["t_min"], g["t_max"], g["t_count"])
        return np.linspace(g["t_min"], g["t_max"], g["t_count"])

    def build_grid(self, n: int | None = None, times=None):
        from .frozen import SpaceTimeGrid
        g = self.grid
        return SpaceTimeGrid(g["l"], n or g["n"], self.times() if times is None else np.asarray(times),
                             dimension=self.profile["dimension"], geometry=g["geometry"])

    @property
    def seed(self) -> int:
        return int(self.checks["seed"])

    def canonical(self) -> dict:
        """Everything that determines the outputs, in a stable form."""
        return {"profile": self.profile, "coefficient": self.coefficient, "grid": self.grid, "case": self.case,
                "targets": self.targets, "tolerances": self.tolerances, "checks": self.checks}

    def hash(self) -> str:
        import json
        return hashlib.sha256(json.dumps(self.canonical(), sort_keys=True).encode()).hexdigest()


def parse_config(text: str, path: str | None = None, overrides=None, seed: int | None = None) -> Config:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=path or "<config>")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], line=line) from None
    values = {}
    for sec in cp.sections():
        if sec.lower() not in _SCHEMA:
            raise ConfigError(f"unknown section; expected one of {sorted(_SCHEMA)}", sec,
                              line=_line_of(text, sec.lower()))
    for sec, schema in _SCHEMA.items():
        out = {k: (list(d) if isinstance(d, list) else d) for k, (_, d) in schema.items()}
        if cp.has_section(sec):
            for key, raw in cp.items(sec):
                if key not in schema:
                    raise ConfigError(f"unknown key; expected one of {sorted(schema)}", sec, key,
                                      _line_of(text, sec, key))
                kind = schema[key][0]
                try:
                    out[key] = _parse_value(kind, raw) if raw.strip() != "" else schema[key][1]
                except ValueError as exc:
                    raise ConfigError(str(exc), sec, key, _line_of(text, sec, key)) from None
        values[sec] = out
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must have the form KEY=VAL", "tolerances")
        k, v = (s.strip() for s in item.split("=", 1))
        if k not in TOLERANCES:
            raise ConfigError(f"unknown tolerance {k!r}", "tolerances", k)
        try:
            values["tolerances"][k] = float(v)
        except ValueError:
            raise ConfigError(f"tolerance value {v!r} is not a number", "tolerances", k) from None
    if seed is not None:
        values["checks"]["seed"] = int(seed)
    cfg = Config(values["profile"], values["coefficient"], values["grid"], values["case"]["case"].upper(),
                 [float(t) for t in values["case"]["targets"]], values["tolerances"], values["checks"],
                 text, path, {"tolerances": list(overrides or [])})
    validate(cfg)
    return cfg


def load_config(path, overrides=None, seed: int | None = None) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, str(path), overrides, seed)


def _fail(cfg: Config, msg: str, section: str, key: str):
    raise ConfigError(msg, section, key, _line_of(cfg.text, section, key))


def validate(cfg: Config) -> None:
    """Static checks; the scaling certificate and case admissibility are checked by ``admissibility``."""
    p, c, g, ch = cfg.profile, cfg.coefficient, cfg.grid, cfg.checks
    if not 0 < p["alpha"] < 2:
        _fail(cfg, "alpha must lie in (0, 2)", "profile", "alpha")
    if p["dimension"] not in (1, 2):
        _fail(cfg, "dimension must be 1 or 2", "profile", "dimension")
    if p["family"].replace("_", "-") not in ("stable", "truncated-stable", "tempered-stable", "log", "log-profile"):
        _fail(cfg, f"unknown family {p['family']!r}", "profile", "family")
    if not 1.0 <= p["comparability"] < math.inf:
        _fail(cfg, "comparability must be a finite number >= 1", "profile", "comparability")
    if c["name"].replace("_", "-") not in ("constant", "tanh-ramp", "cosine-modulated"):
        _fail(cfg, "coefficient must be a named builtin: constant, tanh-ramp or cosine-modulated",
              "coefficient", "name")
    if c["beta"] is not None and not 0 < c["beta"] < 1:
        _fail(cfg, "beta must lie in (0, 1); for Lipschitz fields use any exponent below 1", "coefficient", "beta")
    allowed = {"constant": {"c0"}, "tanh-ramp": {"amp", "center", "width", "level", "beta"},
               "cosine-modulated": {"amp", "omega", "level", "beta"}}[c["name"].replace("_", "-")]
    for k, v in c.items():
        if k in ("name", "periodize") or v is None:
            continue
        if k not in allowed:
            _fail(cfg, f"parameter not used by {c['name']}", "coefficient", k)
    if g["geometry"] not in ("torus", "line"):
        _fail(cfg, "geometry must be torus or line", "grid", "geometry")
    if g["n"] < 16 or g["n"] & (g["n"] - 1):
        _fail(cfg, "n must be a power of two >= 16", "grid", "n")
    if g["l"] <= 0:
        _fail(cfg, "L must be positive", "grid", "l")
    if g["spacing"] not in ("uniform", "geometric"):
        _fail(cfg, "spacing must be uniform or geometric", "grid", "spacing")
    if g["times"] is not None and min(g["times"], default=1.0) <= 0:
        _fail(cfg, "times must be positive", "grid", "times")
    if not 0 < g["t_min"] <= g["t_max"] or g["t_count"] < 1:
        _fail(cfg, "need 0 < t_min <= t_max and t_count >= 1", "grid", "t_min")
    if cfg.case not in CASES:
        _fail(cfg, "case must be P1, P2 or P3", "case", "case")
    if not cfg.targets:
        _fail(cfg, "at least one target is required", "case", "targets")
    for k, v in cfg.tolerances.items():
        if not v > 0:
            _fail(cfg, "tolerances must be positive", "tolerances", k)
    if ch["suite"] not in SUITES:
        _fail(cfg, f"suite must be one of {SUITES}", "checks", "suite")
    for gm in ch["gammas"]:
        if not 0 <= gm <= 1:
            _fail(cfg, "Hölder exponents must lie in [0, 1]", "checks", "gammas")
    if len(ch["ck"]) != 2 or min(ch["ck"]) <= 0:
        _fail(cfg, "ck needs two positive times s, t", "checks", "ck")
    if ch["mol_n"] < 16 or ch["mol_n"] & (ch["mol_n"] - 1):
        _fail(cfg, "mol_n must be a power of two", "checks", "mol_n")


def admissibility(cfg: Config, profile=None, coeff=None):
    """Scaling certificate plus the case and exponent restrictions; raises before any heavy compute."""
    from .measure import InadmissibleCaseError, estimate_scaling, validate_case
    profile = profile or cfg.build_profile()
    coeff = coeff or cfg.build_coefficient()
    cert = estimate_scaling(profile)
    try:
        validate_case(cfg.case, cert, profile, coeff)
    except InadmissibleCaseError as exc:
        raise ConfigError(str(exc), "case", "case", _line_of(cfg.text, "case", "case")) from None
    for gm in cfg.checks["gammas"]:
        if gm >= cert.alpha_h:
            _fail(cfg, f"Hölder exponent {gm} must be below alpha_h = {cert.alpha_h:g}", "checks", "gammas")
        if not coeff.is_constant and gm >= coeff.beta:
            _fail(cfg, f"Hölder exponent {gm} must be below the coefficient exponent {coeff.beta:g}",
                  "checks", "gammas")
    return profile, coeff, cert
