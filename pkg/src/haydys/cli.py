"""``haydys`` command line front end.

Exit codes: 0 success, 1 a check failed, 2 a solver did not converge,
64 malformed command line, 65 unreadable or corrupt HMF1 input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import io as hio
from . import lattice as lat

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_NOT_CONVERGED = 2
EXIT_USAGE = 64
EXIT_DATA = 65

QUICK_MAX_N = 33
DEFAULT_N = 65
DEFAULT_RADIUS = 8.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    rng_seed: int = 0
    threads: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for key in ("tol", "cg_tol", "t_tol"):
            if key in self.params and self.params[key] is not None and not self.params[key] > 0:
                raise UsageError(f"--{key.replace('_', '-')} must be positive")
        n = self.params.get("n")
        if n is not None and (n % 2 == 0 or n < lat.MIN_SITES):
            raise UsageError(f"--n must be odd and >= {lat.MIN_SITES}")
        if self.threads < 1:
            raise UsageError("thread count must be >= 1")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def strip_timing(report):
    """Copy of a report without ``wall_time`` entries, for reproducibility checks."""
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items() if k != "wall_time"}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report


def _emit(cfg: RunConfig, grid: lat.Grid | None, result: dict, start: float, path: str | None) -> dict:
    report = {
        "command": cfg.command,
        "version": __version__,
        "grid": grid.metadata() if grid is not None else None,
        "rng_seed": cfg.rng_seed,
        "threads": cfg.threads,
        "params": cfg.params,
        "result": result,
        "wall_time": time.perf_counter() - start,
    }
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)
    return report


def _threads(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("HAYDYS_THREADS")
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"HAYDYS_THREADS={env!r} is not an integer") from exc


def _apply_threads(n: int) -> None:
    import numba

    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


# ----------------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------------


def _cmd_seed(a, cfg, start):
    from .monopole import bps_seed

    grid = lat.Grid.from_radius(a.n, a.radius)
    m = bps_seed(grid)
    hio.save_config(a.out, m)
    _emit(cfg, grid, {"out": a.out}, start, a.report)
    return EXIT_OK


def _cmd_residual(a, cfg, start):
    from .monopole import bogomolny_residual, interior_norm
    from .solver import kappa, kw_residual

    c = hio.load_config(a.inp, a.exterior)
    g = c.grid
    bog = bogomolny_residual(c)
    res = {
        "bogomolny": {"l2": lat.norm(bog, g), "interior": interior_norm(bog, g)},
        "kappa": [lat.norm(k, g) for k in kappa(c)],
        "kw": [lat.norm(k, g) for k in kw_residual(c)],
    }
    _emit(cfg, g, res, start, a.report)
    return EXIT_OK


def _cmd_energy(a, cfg, start):
    from .monopole import energy

    c = hio.load_config(a.inp, a.exterior)
    total, terms = energy(c)
    _emit(cfg, c.grid, {"energy": total, "terms": terms}, start, a.report)
    return EXIT_OK


def _cmd_charge(a, cfg, start):
    from .monopole import ShellError, charge

    c = hio.load_config(a.inp, a.exterior)
    try:
        q = charge(c, a.shell)
    except ShellError as exc:
        _emit(cfg, c.grid, {"error": str(exc)}, start, a.report)
        return EXIT_CHECK_FAILED
    _emit(cfg, c.grid, {"charge": q, "shell": a.shell}, start, a.report)
    return EXIT_OK


def _operator(c):
    from .linops import LinearizedOperator

    return LinearizedOperator(c.real())


def _cmd_tangent(a, cfg, start):
    from .linops import DegenerateTangent, GreenSolveError, make_tangent, tangent_defect

    c = hio.load_config(a.inp, a.exterior)
    op = _operator(c)
    try:
        v = make_tangent(op, a.dir)
    except DegenerateTangent as exc:
        _emit(cfg, c.grid, {"error": str(exc)}, start, a.report)
        return EXIT_CHECK_FAILED
    except GreenSolveError as exc:
        _emit(cfg, c.grid, {"error": str(exc)}, start, a.report)
        return EXIT_NOT_CONVERGED
    hio.write(a.out, c.grid, {"a": lat.one_part(v), "psi": lat.zero_part(v)})
    res = {"direction": a.dir, "defect": tangent_defect(op, v), "l2_norm": lat.norm(v, c.grid), "out": a.out}
    _emit(cfg, c.grid, res, start, a.report)
    return EXIT_OK


def _cmd_gap(a, cfg, start):
    from .linops import GreenSolveError, StagnationError, lambda_min_DDstar, norm_Dstar

    c = hio.load_config(a.inp, a.exterior)
    op = _operator(c)
    nd = norm_Dstar(op, seed=cfg.rng_seed)
    try:
        lmin = lambda_min_DDstar(op, seed=cfg.rng_seed)
    except (GreenSolveError, StagnationError) as exc:
        _emit(cfg, c.grid, {"error": str(exc), "norm_Dstar": nd}, start, a.report)
        return EXIT_NOT_CONVERGED
    res = {"lambda_min": lmin, "lambda_max": nd**2, "norm_Dstar": nd}
    if a.low_modes:
        from .linops import low_spectrum

        vals, _, resid = low_spectrum(op, a.low_modes, seed=cfg.rng_seed)
        res["low_spectrum"] = vals
        res["low_spectrum_residuals"] = resid
    if a.kernel:
        from .linops import NEAR_KERNEL_DIM, kernel_and_gap

        vals, _, resid, lanczos = kernel_and_gap(op, seed=cfg.rng_seed)
        res["kernel"] = {"values": vals, "residuals": resid, "lanczos_values": lanczos,
                         "count_below_1e-4_gap": int(np.sum(vals < 1e-4 * vals[NEAR_KERNEL_DIM]))}
    _emit(cfg, c.grid, res, start, a.report)
    return EXIT_OK


def _load_tangent(a, c, op):
    from .linops import make_tangent

    if a.tangent:
        grid, fields = hio.read(a.tangent)
        if grid.n != c.grid.n or not np.isclose(grid.h, c.grid.h, rtol=1e-12):
            raise hio.HMF1Error("tangent and seed live on different grids")
        try:
            return lat.make_pair(fields["a"], fields["psi"])
        except KeyError as exc:
            raise hio.HMF1Error(f"tangent file lacks field {exc.args[0]!r}") from exc
    return make_tangent(op, a.dir)


def _cmd_solve(a, cfg, start):
    from .linops import GreenSolveError
    from .solver import fixed_point_solve

    m0 = hio.load_config(a.seed, a.exterior).real()
    op = _operator(m0)
    try:
        v0 = _load_tangent(a, m0, op)
        c, rep, _ = fixed_point_solve(m0, v0, a.t, tol=a.tol, max_outer=a.max_outer, op=op, cg_tol=a.cg_tol)
    except GreenSolveError as exc:
        _emit(cfg, m0.grid, {"error": str(exc), "converged": False}, start, a.report)
        return EXIT_NOT_CONVERGED
    if a.out:
        hio.save_config(a.out, c)
    res = rep.as_dict()
    res["monotone"] = rep.monotone
    res["direction"] = a.dir
    _emit(cfg, m0.grid, res, start, a.report)
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def _cmd_tmax(a, cfg, start):
    from .linops import GreenSolveError
    from .solver import t_max_probe

    m0 = hio.load_config(a.seed, a.exterior).real()
    op = _operator(m0)
    try:
        v0 = _load_tangent(a, m0, op)
        res = t_max_probe(m0, v0, op=op, t_start=a.t_start)
    except GreenSolveError as exc:
        _emit(cfg, m0.grid, {"error": str(exc)}, start, a.report)
        return EXIT_NOT_CONVERGED
    res["direction"] = a.dir
    _emit(cfg, m0.grid, res, start, a.report)
    return EXIT_OK


def _cmd_dimred(a, cfg, start):
    from .dimred import dimred_check

    c = hio.load_config(a.inp, a.exterior)
    res = dimred_check(c)
    ok = all(res[k] <= a.tol for k in ("re_defect", "im_defect", "coulomb_defect"))
    res["passed"] = ok
    _emit(cfg, c.grid, res, start, a.report)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _group(name: str) -> int:
    if not name.startswith("su"):
        raise UsageError(f"unsupported group {name!r}; use su2, su3, ...")
    try:
        N = int(name[2:])
    except ValueError as exc:
        raise UsageError(f"unsupported group {name!r}") from exc
    if N < 2:
        raise UsageError("group rank must be at least su2")
    return N


def _cmd_linear_model(a, cfg, start):
    from . import linear_model as lm

    N = _group(a.group)
    res = {
        "clifford": lm.clifford_check(N, a.trials, cfg.rng_seed),
        "moment_transforms": lm.moment_transform_check(N, a.trials, cfg.rng_seed),
        "lagrangian": lm.lagrangian_check(N, a.trials, cfg.rng_seed),
        "equivariance": lm.equivariance_check(N, min(a.trials, 200), cfg.rng_seed),
        "hamiltonian": lm.hamiltonian_check(N, min(a.trials, 200), cfg.rng_seed),
    }
    ok = all(res[k]["passed"] for k in ("clifford", "moment_transforms", "lagrangian", "equivariance", "hamiltonian"))
    res["passed"] = ok
    _emit(cfg, None, res, start, a.report)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_verify_all(a, cfg, start):
    from .verify import run_suite

    res = run_suite(quick=a.quick, seed=cfg.rng_seed, max_n=QUICK_MAX_N if a.quick else DEFAULT_N)
    _emit(cfg, None, res, start, a.report)
    return EXIT_OK if res["passed"] else EXIT_CHECK_FAILED


# ----------------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="haydys", description="Lattice workbench for Haydys monopoles.")
    p.add_argument("--version", action="version", version=f"haydys {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", help="write the JSON report here instead of stdout")
    common.add_argument("--threads", type=int, help="thread count (default: $HAYDYS_THREADS or 1)")
    common.add_argument("--rng-seed", type=int, default=0)
    common.add_argument("--exterior", choices=("bps", "zero"), default="bps",
                        help="exterior model attached to loaded configurations")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("seed", parents=[common], help="write the charge-1 seed monopole")
    s.add_argument("--n", type=int, default=DEFAULT_N)
    s.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    s.add_argument("--out", required=True)

    for name, helptext in (("residual", "Bogomolny and Haydys residual norms"), ("energy", "energy and its terms")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--in", dest="inp", required=True)

    s = sub.add_parser("charge", parents=[common], help="flux charge on a sphere")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--shell", type=float, default=6.0)

    s = sub.add_parser("tangent", parents=[common], help="projected tangent vector")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--dir", choices=("x", "y", "z", "phase"), required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("gap", parents=[common], help="spectral bounds of D D*")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--low-modes", type=int, default=0, help="also compute this many low eigenvalues of D*D")
    s.add_argument("--kernel", action="store_true", help="count the near kernel of D*D below the first gap")

    for name, helptext in (("solve", "fixed-point Haydys solve"), ("tmax", "empirical t_max probe")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--seed", required=True)
        s.add_argument("--dir", choices=("x", "y", "z", "phase"), default="x")
        s.add_argument("--tangent", help="precomputed tangent file (skips the projection)")
        if name == "solve":
            s.add_argument("--t", type=float, default=0.05)
            s.add_argument("--tol", type=float, default=1e-6)
            s.add_argument("--max-outer", type=int, default=50)
            s.add_argument("--cg-tol", type=float, default=1e-8)
            s.add_argument("--out")
        else:
            s.add_argument("--t-start", type=float, default=0.05)

    s = sub.add_parser("dimred", parents=[common], help="dimensional reduction identities")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--tol", type=float, default=1e-12)

    s = sub.add_parser("linear-model", parents=[common], help="linear-model identity suite")
    s.add_argument("--group", default="su2")
    s.add_argument("--trials", type=int, default=1000)

    s = sub.add_parser("verify-all", parents=[common], help="machine-precision and convergence suites")
    s.add_argument("--quick", action="store_true", help=f"cap grids at n = {QUICK_MAX_N}")
    return p


_COMMANDS = {
    "seed": _cmd_seed,
    "residual": _cmd_residual,
    "energy": _cmd_energy,
    "charge": _cmd_charge,
    "tangent": _cmd_tangent,
    "gap": _cmd_gap,
    "solve": _cmd_solve,
    "tmax": _cmd_tmax,
    "dimred": _cmd_dimred,
    "linear-model": _cmd_linear_model,
    "verify-all": _cmd_verify_all,
}

_PARAM_KEYS = ("n", "radius", "t", "tol", "max_outer", "cg_tol", "dir", "shell", "trials", "group", "quick", "t_start",
               "low_modes", "kernel", "exterior")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    start = time.perf_counter()
    try:
        params = {k: getattr(a, k) for k in _PARAM_KEYS if hasattr(a, k)}
        cfg = RunConfig(a.command, a.rng_seed, _threads(a.threads), params)
        _apply_threads(cfg.threads)
        return _COMMANDS[a.command](a, cfg, start)
    except UsageError as exc:
        print(f"haydys: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except hio.HMF1Error as exc:
        print(f"haydys: bad input: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
