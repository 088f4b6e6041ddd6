"""Run configuration: a sectioned key-value file that fully determines a run.

Expression values are written in double quotes so they survive the INI
parser untouched::

    [problem]
    n = 1
    m = 0
    a1 = "1"
    b1 = "0.5"
    f = "x1^2"
    g = "-1"
    T = 1.0

    [grid]
    J = 32
    dt = 0.025

    [norms]
    alpha = 0.5

    [verify]
    experiments = maxprin, oracle

Rough initial data is requested with ``f = rough`` together with
``rough_beta``, ``rough_kind`` and ``rough_x0``.  Every key has a fixed
default below; nothing is read from the environment.
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import exprlang as el
from .interpolation import eps_grid
from .operator import CoefficientSet
from .solver import BOUNDARY_MODES, SCHEMES, SolveConfig, config_hash
from .verify import THRESHOLDS, Problem, RoughData

__all__ = ["ConfigError", "RunConfig", "EXPERIMENTS", "load_config", "parse_config"]

EXPERIMENTS = ("maxprin", "comparison", "interp", "local", "global", "smoothing",
               "oracle", "lemma", "cutoff")

_COEFF_PREFIXES = ("atilde", "a", "b", "c", "d", "e")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    name: str
    n: int
    m: int
    coefficients: dict
    f: str
    g: str | None
    T: float
    rough: dict | None
    # grid
    J: int = 32
    x_max: float = 4.0
    Ny: int = 8
    y_max: float = 1.0
    dt: float = 0.025
    scheme: str = "implicit-euler"
    boundary: str = "buffer-extrapolation"
    margin: float = 0.5
    drift: str = "central"
    # norms
    alpha: float = 0.5
    k: int = 0
    pair_budget: int = 2_000_000
    # verify
    experiments: tuple = ("maxprin",)
    thresholds: dict = field(default_factory=lambda: dict(THRESHOLDS))
    eps_count: int = 20
    eps_lo: float = 1e-3
    eps_hi: float = 0.99
    levels: int = 3
    T0: float = 0.2
    r: float = 0.5
    z0: tuple | None = None
    betas: tuple = (1.0, 2 / 3, 1 / 2, 1 / 3)
    oracle_degree: int = 4
    # output
    out: str = "out"

    @property
    def hash(self) -> str:
        d = asdict(self)
        d.pop("out")
        return config_hash(d)

    @property
    def operator(self) -> CoefficientSet:
        return CoefficientSet.from_mapping(self.n, self.m, self.coefficients)

    @property
    def initial(self):
        if self.rough is not None:
            return RoughData(n=self.n, m=self.m, **self.rough)
        return self.f

    def problem(self) -> Problem:
        return Problem(self.name, self.operator, self.initial, self.g, T=self.T,
                       x_max=self.x_max, y_max=self.y_max, scheme=self.scheme,
                       boundary=self.boundary, drift=self.drift, margin=self.margin)

    def solve_config(self, **kw) -> SolveConfig:
        base = dict(n=self.n, m=self.m, J=self.J, x_max=self.x_max, Ny=self.Ny,
                    y_max=self.y_max, T=self.T, dt=self.dt, scheme=self.scheme,
                    boundary=self.boundary, margin=self.margin, drift=self.drift)
        base.update(kw)
        return SolveConfig(**base)

    @property
    def center(self) -> tuple:
        if self.z0 is not None:
            return tuple(self.z0)
        return (0.5,) * min(self.n, 1) + (0.0,) * (self.n + self.m - min(self.n, 1))

    def eps(self):
        return eps_grid(self.eps_count, self.eps_lo, self.eps_hi)


def _unquote(v: str) -> str:
    v = v.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'":
        return v[1:-1]
    return v


def _floats(v: str) -> tuple:
    return tuple(float(s) for s in v.replace(",", " ").split())


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    known = {"problem", "grid", "norms", "verify", "output"}
    extra = set(cp.sections()) - known
    if extra:
        raise ConfigError(f"unknown sections {sorted(extra)}")
    if not cp.has_section("problem"):
        raise ConfigError("missing [problem] section")
    P = cp["problem"]
    try:
        n, m = P.getint("n", 1), P.getint("m", 0)
        coeffs, rough = {}, None
        for key, val in P.items():
            if any(key.lower().startswith(p) and key[len(p):].isdigit() for p in _COEFF_PREFIXES):
                coeffs[key] = _unquote(val)
        f = _unquote(P.get("f", "0"))
        g = _unquote(P["g"]) if "g" in P else None
        if f == "rough":
            rough = {"beta": P.getfloat("rough_beta", 0.5),
                     "kind": _unquote(P.get("rough_kind", "interior")),
                     "x0": P.getfloat("rough_x0", 0.5)}
        kw = {}
        G = cp["grid"] if cp.has_section("grid") else {}
        for key, conv in (("J", int), ("x_max", float), ("Ny", int), ("y_max", float),
                          ("dt", float), ("margin", float)):
            if key in G:
                kw[key] = conv(G[key])
        for key in ("scheme", "boundary", "drift"):
            if key in G:
                kw[key] = _unquote(G[key])
        N = cp["norms"] if cp.has_section("norms") else {}
        if "alpha" in N:
            kw["alpha"] = float(N["alpha"])
        if "k" in N:
            kw["k"] = int(N["k"])
        if "pair_budget" in N:
            kw["pair_budget"] = int(N["pair_budget"])
        V = cp["verify"] if cp.has_section("verify") else {}
        if "experiments" in V:
            kw["experiments"] = tuple(s.strip() for s in V["experiments"].split(",") if s.strip())
        th = dict(THRESHOLDS)
        for key in THRESHOLDS:
            if key in V:
                th[key] = float(V[key])
        kw["thresholds"] = th
        for key, conv in (("eps_count", int), ("eps_lo", float), ("eps_hi", float),
                          ("levels", int), ("T0", float), ("r", float), ("oracle_degree", int)):
            if key in V:
                kw[key] = conv(V[key])
        for key in ("z0", "betas"):
            if key in V:
                kw[key] = _floats(V[key])
        if cp.has_section("output") and "dir" in cp["output"]:
            kw["out"] = _unquote(cp["output"]["dir"])
        cfg = RunConfig(name=_unquote(P.get("name", "problem")), n=n, m=m, coefficients=coeffs,
                        f=f, g=g, T=P.getfloat("T", 1.0), rough=rough, **kw)
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config value: {exc}") from exc
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.n < 0 or cfg.m < 0 or cfg.n + cfg.m < 1:
        raise ConfigError("need n, m >= 0 and n + m >= 1")
    if not 0 < cfg.alpha < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {cfg.alpha}")
    if cfg.scheme not in SCHEMES:
        raise ConfigError(f"scheme must be one of {SCHEMES}")
    if cfg.boundary not in BOUNDARY_MODES:
        raise ConfigError(f"boundary must be one of {BOUNDARY_MODES}")
    bad = [e for e in cfg.experiments if e not in EXPERIMENTS]
    if bad:
        raise ConfigError(f"unknown experiments {bad}; known: {', '.join(EXPERIMENTS)}")
    try:
        cfg.operator
    except (KeyError, el.ExprError, ValueError) as exc:
        raise ConfigError(f"bad coefficient: {exc}") from exc
    for what, src in (("f", None if cfg.rough else cfg.f), ("g", cfg.g)):
        if src is None:
            continue
        try:
            el.parse(src, n=cfg.n, m=cfg.m, allow_t=(what == "g"))
        except (el.ExprError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad expression for {what}: {exc}") from exc
    if cfg.rough is not None:
        try:
            RoughData(n=cfg.n, m=cfg.m, **cfg.rough)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if len(cfg.center) != cfg.n + cfg.m:
        raise ConfigError("z0 must have n + m coordinates")


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
