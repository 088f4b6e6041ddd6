"""Config-driven command line entry point.

Subcommands::

    kimuralab validate  --config run.ini
    kimuralab solve     --config run.ini [--out DIR]
    kimuralab norms     --config run.ini [--field FILE]
    kimuralab verify    EXPERIMENT --config run.ini
    kimuralab oracle    --config run.ini
    kimuralab all       --config run.ini [--threads K]

Exit status: 0 when every report passes (or is not applicable), 1 on any
FAIL, 2 on a configuration error.  Every output file name starts with the
config hash; timestamps go only to the ``<hash>_run.log`` sidecar.
"""
from __future__ import annotations

import argparse
import datetime
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import EXPERIMENTS, ConfigError, RunConfig, load_config
from .reports import VerifyReport, atomic_write, fmt

__all__ = ["main", "run", "run_experiment"]

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Precondition(Exception):
    """Experiment does not apply to this configuration."""


def _out(cfg: RunConfig, args, name: str) -> str:
    return os.path.join(args.out or cfg.out, f"{cfg.hash}_{name}")


def _log(cfg: RunConfig, args, line: str) -> None:
    path = _out(cfg, args, "run.log")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    stamp = datetime.datetime.now().isoformat(timespec="seconds")
    with open(path, "a") as fh:
        fh.write(f"{stamp} {line}\n")


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def _exp_maxprin(cfg):
    from .verify import max_principle_check
    return [max_principle_check(cfg.problem(), J=cfg.J, dt=cfg.dt, Ny=cfg.Ny)]


def _exp_comparison(cfg):
    from .verify import comparison_check
    try:
        return [comparison_check(cfg.problem(), J=cfg.J, dt=cfg.dt, Ny=cfg.Ny)]
    except ValueError as exc:
        raise _Precondition(str(exc)) from exc


def _exp_interp(cfg):
    from .verify import interp_check
    try:
        return [interp_check(cfg.n, cfg.m, cfg.alpha, eps=cfg.eps(), pair_budget=cfg.pair_budget)]
    except KeyError as exc:
        raise _Precondition(f"no calibrated constants: {exc}") from exc


def _family(cfg):
    from .verify import Problem, RoughDataFamily
    kind = cfg.rough["kind"] if cfg.rough else "interior"
    x0 = cfg.rough["x0"] if cfg.rough else 0.5
    fam = RoughDataFamily(tuple(cfg.betas), kind, x0, cfg.n, cfg.m)
    p = cfg.problem()
    return [Problem(f"beta={mb.beta!r}", p.L, mb, p.g, T=p.T, x_max=p.x_max, y_max=p.y_max,
                    scheme=p.scheme, boundary=p.boundary, drift=p.drift, margin=p.margin)
            for mb in fam.members()]


def _J0(cfg):
    return max(8, cfg.J // 2 ** (cfg.levels - 1))


def _exp_local(cfg):
    from .verify import schauder_ratio_local
    return [schauder_ratio_local(_family(cfg), cfg.T0, cfg.r, cfg.center, cfg.alpha, cfg.k,
                                 J0=_J0(cfg), levels=cfg.levels, thresholds=cfg.thresholds,
                                 pair_budget=cfg.pair_budget)]


def _exp_global(cfg):
    from .verify import schauder_ratio_global
    if cfg.rough is not None:
        raise _Precondition("the global ratio needs smooth initial data")
    return [schauder_ratio_global(cfg.problem(), cfg.alpha, cfg.k, J0=_J0(cfg),
                                  levels=cfg.levels, thresholds=cfg.thresholds,
                                  pair_budget=cfg.pair_budget)]


def _exp_smoothing(cfg):
    from .verify import smoothing_check
    return [smoothing_check(cfg.problem(), cfg.T0, cfg.alpha, cfg.k, J0=_J0(cfg),
                            levels=cfg.levels, thresholds=cfg.thresholds,
                            pair_budget=cfg.pair_budget)]


def _exp_oracle(cfg):
    from .oracle import OracleError
    from .verify import oracle_compare
    if cfg.rough is not None:
        raise _Precondition("the oracle needs polynomial data")
    p = cfg.problem()
    try:
        return [oracle_compare(p, mode, J0=_J0(cfg), levels=cfg.levels, d=cfg.oracle_degree,
                               thresholds=cfg.thresholds) for mode in ("space", "time")]
    except OracleError as exc:
        raise _Precondition(str(exc)) from exc


def _exp_lemma(cfg):
    from .holder import check_lemma_Lu_bound
    from .interpolation import family_field, smooth_family
    members = [mb for mb in smooth_family(cfg.n, cfg.m) if mb.support is not None]
    L = cfg.operator
    if not L.is_constant:
        raise _Precondition("the L u estimate is checked for constant coefficients")
    reps = []
    for mb in members:
        u = family_field(mb, cfg.n, cfg.m)
        try:
            r = check_lemma_Lu_bound(L, u, mb.support, cfg.alpha, cfg.eps(), cfg.k,
                                     pair_budget=cfg.pair_budget)
        except KeyError as exc:
            raise _Precondition(f"no calibrated constants: {exc}") from exc
        r.notes = mb.name
        reps.append(r)
    return reps


def _exp_cutoff(cfg):
    from .cutoff import build_cutoff_sequence, cutoff_growth
    from .geometry import SpatialPoint
    from .solver import config_hash
    t0 = time.perf_counter()
    c = cfg.center
    seq = build_cutoff_sequence(SpatialPoint(c[:cfg.n], c[cfg.n:]), cfg.r, cfg.T0, cfg.T,
                                N_max=6, k=cfg.k)
    g = cutoff_growth(seq)
    rows = [{"N": int(N), "measured": float(v), "shape": float(s)}
            for N, v, s in zip(g["N"], g["measured"], g["shape"])]
    return [VerifyReport("cutoff", config_hash(c, cfg.r, cfg.T0, cfg.T, cfg.k),
                         {"c": float(g["c"]), "residual": float(g["residual"]), "rho": float(g["rho"])},
                         bool(g["residual"] <= 0.1), {"residual": 0.1},
                         time.perf_counter() - t0, table=rows)]


REGISTRY = {
    "maxprin": _exp_maxprin, "comparison": _exp_comparison, "interp": _exp_interp,
    "local": _exp_local, "global": _exp_global, "smoothing": _exp_smoothing,
    "oracle": _exp_oracle, "lemma": _exp_lemma, "cutoff": _exp_cutoff,
}
assert set(REGISTRY) == set(EXPERIMENTS)


def run_experiment(name: str, cfg: RunConfig) -> list:
    """Reports of one registered experiment; inapplicable ones come back as N/A."""
    from .solver import SolverBreakdown
    from .operator import AssumptionViolation
    t0 = time.perf_counter()
    try:
        return REGISTRY[name](cfg)
    except _Precondition as exc:
        return [VerifyReport(name, cfg.hash, {}, True, {}, time.perf_counter() - t0,
                             applicable=False, notes=str(exc))]
    except (SolverBreakdown, AssumptionViolation) as exc:
        return [VerifyReport(name, cfg.hash, {}, False, {}, time.perf_counter() - t0,
                             notes=f"{type(exc).__name__}: {exc}")]


def _emit(cfg, args, reports: list) -> int:
    unique = len({r.name for r in reports}) == len(reports)
    for i, r in enumerate(reports):
        tag = r.name if unique else f"{r.name}-{i}"
        atomic_write(_out(cfg, args, f"{tag}.csv"), r.to_csv())
        if r.table:
            atomic_write(_out(cfg, args, f"{tag}_table.csv"), r.table_csv())
        line = r.summary_line() + (f" ({r.notes})" if r.notes else "")
        print(line)
        _log(cfg, args, f"{line} runtime={r.runtime:.3f}s")
    return EXIT_FAIL if any(r.status == "FAIL" for r in reports) else EXIT_PASS


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_validate(cfg: RunConfig, args) -> int:
    from .operator import SamplingSpec, validate_assumptions
    spec = SamplingSpec(x_max=cfg.x_max, y_max=cfg.y_max, alpha=cfg.alpha, seed=args.seed)
    rep = validate_assumptions(cfg.operator, spec)
    lines = ["quantity,value"] + [f"{k},{fmt(v)}" for k, v in rep.rows()]
    lines += [f"violation,{v}" for v in rep.violations]
    atomic_write(_out(cfg, args, "validate.csv"), "\n".join(lines) + "\n")
    status = "PASS" if rep.ok else "FAIL"
    extra = f" violations={','.join(rep.violations)}" if rep.violations else ""
    print(f"{status} validate [{cfg.hash}] delta_hat={rep.delta_hat:.6g}, "
          f"K_hat={rep.K_hat:.6g}, b_min_boundary={rep.b_min_boundary:.6g}{extra}")
    _log(cfg, args, f"validate {status}")
    return EXIT_PASS if rep.ok else EXIT_FAIL


def _solve(cfg: RunConfig):
    from .solver import solve_ivp
    return solve_ivp(cfg.operator, cfg.initial, cfg.g, cfg.solve_config())


def cmd_solve(cfg: RunConfig, args) -> int:
    from .operator import AssumptionViolation
    from .solver import SolverBreakdown
    from .fieldio import write_field_csv
    try:
        u = _solve(cfg)
    except (AssumptionViolation, SolverBreakdown) as exc:
        print(f"FAIL solve [{cfg.hash}] {type(exc).__name__}: {exc}")
        _log(cfg, args, f"solve FAIL {exc}")
        return EXIT_FAIL
    path = _out(cfg, args, "field.csv")
    write_field_csv(u, path, config_hash=cfg.hash)
    print(f"PASS solve [{cfg.hash}] nodes={u.grid.size}, steps={len(u.times) - 1}, "
          f"sup={float(np.max(np.abs(u.values))):.6g} -> {path}")
    _log(cfg, args, f"solve wrote {path}")
    return EXIT_PASS


def cmd_norms(cfg: RunConfig, args) -> int:
    from .holder import wf_norm_2alpha
    from .solver import estimate_derivatives
    from .verify import _region_box
    if args.field:
        from .fieldio import read_field_csv
        try:
            u = estimate_derivatives(read_field_csv(args.field))
        except (OSError, ValueError) as exc:
            print(f"cannot read field {args.field}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        u = estimate_derivatives(_solve(cfg))
    u = u.restrict(box=_region_box(cfg.problem()))
    rep = wf_norm_2alpha(u, cfg.alpha, cfg.k, cfg.pair_budget)
    atomic_write(_out(cfg, args, "norms.csv"), rep.to_csv())
    print(f"PASS norms [{cfg.hash}] total={rep.total:.6g}, sup={rep.sup_norm:.6g}, "
          f"pairs={rep.pair_count_used}")
    _log(cfg, args, "norms")
    return EXIT_PASS


def cmd_verify(cfg: RunConfig, args) -> int:
    return _emit(cfg, args, run_experiment(args.experiment, cfg))


def cmd_oracle(cfg: RunConfig, args) -> int:
    return _emit(cfg, args, run_experiment("oracle", cfg))


def cmd_all(cfg: RunConfig, args) -> int:
    names = list(EXPERIMENTS)
    threads = max(1, args.threads or 1)
    if threads == 1:
        results = [run_experiment(n, cfg) for n in names]
    else:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(lambda n: run_experiment(n, cfg), names))
    code = EXIT_PASS
    for reps in results:
        code = max(code, _emit(cfg, args, reps))
    return code


COMMANDS = {"validate": cmd_validate, "solve": cmd_solve, "norms": cmd_norms,
            "verify": cmd_verify, "oracle": cmd_oracle, "all": cmd_all}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kimuralab", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="run configuration file")
    common.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    common.add_argument("--threads", type=int, default=1, help="concurrent experiments for 'all'")
    common.add_argument("--seed", type=int, default=0, help="sampling seed for 'validate'")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "verify":
            p.add_argument("experiment", choices=EXPERIMENTS)
        if name == "norms":
            p.add_argument("--field", default=None, help="field table to evaluate instead of solving")
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[args.command](cfg, args)


def main() -> None:
    sys.exit(run())
