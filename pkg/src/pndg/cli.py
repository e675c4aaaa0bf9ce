"""Command-line driver: ``python -m pndg <subcommand> [--config PATH] [--out DIR] ...``.

Subcommands: solve, convergence, eps-sweep, n-sweep, verify-matrices.
Exit codes: 0 ok, 1 configuration or usage error, 2 solver failure,
3 failed verification.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import io
import json
import math
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .errors import ConfigurationError, InputError, PnDGError, SolverError
from .harmonics import MomentBasis, eval_basis, moment_matrices
from .solver import SolverConfig
from .study import ErrorReport, StudyConfig, run_convergence, run_n_sweep, solve_single

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3

CSV_COLUMNS = ("d", "N", "k", "eps", "h", "err_l2", "err_q", "err_triple", "eoc_l2", "wall_ms")
NSWEEP_COLUMNS = ("N", "eps", "err_total", "err_moments")
DEFAULT_EPS_SWEEP = (1.0, 1e-2, 1e-4, 1e-6)
DEFAULT_N_LIST = (1, 3, 5, 7)

# section -> key -> (StudyConfig field or extra key, parser)
_FLOATS = lambda s: tuple(float(v) for v in _split(s))  # noqa: E731
_INTS = lambda s: tuple(int(v) for v in _split(s))  # noqa: E731
_KEYS = {
    "problem": {"d": int, "N": int, "oracle": str, "forcing": str, "wave": _INTS, "amplitude": float},
    "discretization": {"k": int, "cells": _INTS, "solver": str, "tolerance": float,
                       "max_iterations": int, "error_quadrature": int},
    "materials": {"sigma_t": float, "sigma_a": float, "variation": float},
    "study": {"eps": _FLOATS, "norms": lambda s: tuple(_split(s)), "N_list": _INTS, "eps_sweep": _FLOATS},
}


def _split(text: str) -> list[str]:
    return [t for t in (p.strip() for p in text.replace(";", ",").split(",")) if t]


def _param(x) -> str:
    """Shortest round-trip text for parameters such as eps and h."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _fmt(x) -> str:
    """17 significant digits for floats; ``nan`` for undefined values."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    return "nan" if math.isnan(x) else format(x, ".17g")


# ----------------------------------------------------------------------------- configuration


def read_config(path: str | None) -> dict:
    """Parse an INI file into ``{section: {key: value}}`` with typed values."""
    parsed = {s: {} for s in _KEYS}
    if path is None:
        return parsed
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keys are case-sensitive (N vs n)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config file {path}: {exc}") from exc
    return parse_mapping({s: dict(cp[s]) for s in cp.sections()})


def parse_mapping(raw: dict) -> dict:
    parsed = {s: {} for s in _KEYS}
    for section, items in raw.items():
        if section not in _KEYS:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key, value in items.items():
            if key not in _KEYS[section]:
                raise ConfigurationError(f"unknown key {key!r} in [{section}]")
            try:
                parsed[section][key] = _KEYS[section][key](str(value))
            except ValueError as exc:
                raise ConfigurationError(f"bad value for {section}.{key}: {value!r}") from exc
    return parsed


def study_config(parsed: dict, oracle: str | None = None) -> StudyConfig:
    p, dz, m, st = (parsed[s] for s in ("problem", "discretization", "materials", "study"))
    kwargs = {}
    for key in ("d", "N", "forcing", "wave", "amplitude", "oracle"):
        if key in p:
            kwargs[key] = p[key]
    for key in ("k", "cells", "error_quadrature"):
        if key in dz:
            kwargs[key] = dz[key]
    for key in ("sigma_t", "sigma_a"):
        if key in m:
            kwargs[key] = m[key]
    if "variation" in m:
        kwargs["material_variation"] = m["variation"]
    for key in ("eps", "norms"):
        if key in st:
            kwargs[key] = st[key]
    if oracle is not None:
        kwargs["oracle"] = oracle
    try:
        kwargs["solver"] = SolverConfig(method=dz.get("solver", "auto"), tolerance=dz.get("tolerance", 1e-10),
                                        max_iterations=dz.get("max_iterations", 2000))
    except InputError as exc:
        raise ConfigurationError(str(exc)) from exc
    if "wave" not in kwargs:
        kwargs["wave"] = (1,) * kwargs.get("d", 1)
    return StudyConfig(**kwargs)


def config_echo(cfg: StudyConfig, parsed: dict) -> dict:
    """Canonical ``{section: {key: text}}`` that parses back to the same run."""
    echo = {
        "problem": {"d": str(cfg.d), "N": str(cfg.N), "oracle": cfg.oracle, "forcing": cfg.forcing,
                    "wave": ", ".join(map(str, cfg.wave)), "amplitude": _param(cfg.amplitude)},
        "discretization": {"k": str(cfg.k), "cells": ", ".join(map(str, cfg.cells)),
                           "solver": cfg.solver.method, "tolerance": _param(cfg.solver.tolerance),
                           "max_iterations": str(cfg.solver.max_iterations)},
        "materials": {"sigma_t": _param(cfg.sigma_t), "sigma_a": _param(cfg.sigma_a),
                      "variation": _param(cfg.material_variation)},
        "study": {"eps": ", ".join(_param(e) for e in cfg.eps), "norms": ", ".join(cfg.norms)},
    }
    if cfg.error_quadrature is not None:
        echo["discretization"]["error_quadrature"] = str(cfg.error_quadrature)
    for key in ("N_list", "eps_sweep"):
        if key in parsed["study"]:
            echo["study"][key] = ", ".join(_param(v) for v in parsed["study"][key])
    return echo


# ----------------------------------------------------------------------------- output


def _write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row.get(c, "") for c in columns])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _report_rows(report: ErrorReport, timings: bool) -> list[dict]:
    rows = []
    for r in report.rows():
        rows.append({
            "d": _fmt(r["d"]), "N": _fmt(r["N"]), "k": _fmt(r["k"]), "eps": _param(r["eps"]), "h": _param(r["h"]),
            "err_l2": _fmt(r["err_l2"]), "err_q": _fmt(r["err_q"]), "err_triple": _fmt(r["err_triple"]),
            "eoc_l2": _fmt(r["eoc_l2"]),
            "wall_ms": _fmt(round(1e3 * r["wall_s"], 3)) if timings else "",
        })
    return rows


def _runs(report: ErrorReport) -> list[dict]:
    cfg = report.config
    out = []
    for r in report.results:
        out.append({
            "params": {"d": cfg.d, "N": cfg.N, "k": cfg.k, "eps": r.eps, "h": r.h, "cells": r.cells},
            "errors": {k: _json_float(v) for k, v in r.errors.items()},
            "timings": {"wall_ms": 1e3 * r.wall_s},
            "status": r.status,
            "solver": {k: (_json_float(v) if isinstance(v, float) else v) for k, v in r.solver.items()},
        })
    return out


def _json_float(x):
    x = float(x)
    return None if not math.isfinite(x) else x


def _write_manifest(out: Path, command: str, echo: dict, runs: list, files: list[Path]) -> Path:
    path = out / f"{command}.manifest.json"
    manifest = {
        "version": __version__,
        "command": command,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": echo,
        "runs": runs,
        "outputs": [str(p.name) for p in files + [path]],
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ----------------------------------------------------------------------------- subcommands


def _cmd_convergence(args, parsed, out: Path) -> int:
    cfg = study_config(parsed, args.oracle)
    report = run_convergence(cfg, workers=args.threads)
    csv_path = out / "convergence.csv"
    _write_csv(csv_path, CSV_COLUMNS, _report_rows(report, args.timings))
    _write_manifest(out, "convergence", config_echo(cfg, parsed), _runs(report), [csv_path])
    for e in cfg.eps:
        print(f"eps={e:g}: errors {np.array2string(report.errors(e), precision=3)}, "
              f"EOC {np.array2string(report.eoc(e), precision=2)}")
    return EXIT_OK


def _cmd_eps_sweep(args, parsed, out: Path) -> int:
    cfg = study_config(parsed, args.oracle)
    eps_list = parsed["study"].get("eps_sweep", DEFAULT_EPS_SWEEP)
    report = run_convergence(cfg.with_(eps=tuple(eps_list)), workers=args.threads)
    csv_path = out / "eps-sweep.csv"
    _write_csv(csv_path, CSV_COLUMNS, _report_rows(report, args.timings))
    _write_manifest(out, "eps-sweep", config_echo(report.config, parsed), _runs(report), [csv_path])
    base = report.errors(report.config.eps[0])
    for e in report.config.eps:
        ratio = report.errors(e) / base
        print(f"eps={e:g}: error ratio to eps={report.config.eps[0]:g}: {np.array2string(ratio, precision=3)}")
    return EXIT_OK


def _cmd_solve(args, parsed, out: Path) -> int:
    cfg = study_config(parsed, args.oracle)
    cell, uh = solve_single(cfg)
    report = ErrorReport(cfg.with_(eps=(cell.eps,), cells=(cell.cells,)), [cell])
    csv_path = out / "solve.csv"
    _write_csv(csv_path, CSV_COLUMNS, _report_rows(report, args.timings))
    sol_path = out / "solution.npz"
    np.savez(sol_path, coeffs=uh.coeffs, d=cfg.d, N=cfg.N, k=cfg.k, cells=cell.cells, eps=cell.eps)
    _write_manifest(out, "solve", config_echo(report.config, parsed), _runs(report), [csv_path, sol_path])
    print(f"h=1/{cell.cells} eps={cell.eps:g}: " + ", ".join(f"{k}={v:.6e}" for k, v in cell.errors.items()))
    return EXIT_OK


def _cmd_n_sweep(args, parsed, out: Path) -> int:
    cfg = study_config(parsed, "kinetic")
    N_list = parsed["study"].get("N_list", DEFAULT_N_LIST)
    rows = []
    runs = []
    for e in cfg.eps:
        rep = run_n_sweep(cfg, N_list, eps=e)
        for r in rep.rows():
            rows.append({"N": _param(r["N"]), "eps": _param(r["eps"]), "err_total": _fmt(r["err_total"]),
                         "err_moments": _fmt(r["err_moments"])})
            runs.append({"params": {"d": cfg.d, "N": r["N"], "eps": e},
                         "errors": {"total": r["err_total"], "moments": r["err_moments"]},
                         "timings": {}, "status": "ok"})
            print(f"eps={e:g} N={r['N']}: total {r['err_total']:.6e}, moments {r['err_moments']:.6e}")
    csv_path = out / "n-sweep.csv"
    _write_csv(csv_path, NSWEEP_COLUMNS, rows)
    echo = config_echo(cfg, parsed)
    echo["study"]["N_list"] = ", ".join(map(str, N_list))
    _write_manifest(out, "n-sweep", echo, runs, [csv_path])
    return EXIT_OK


def verify_matrices(N_max: int, n_random: int = 100, seed: int = 0) -> list[tuple[str, bool, str]]:
    """Moment-matrix invariant suite for every ``N <= N_max``."""
    rng = np.random.default_rng(seed)
    checks = []
    for N in range(N_max + 1):
        basis = MomentBasis(N)
        mm = moment_matrices(basis)
        deg = basis.degrees
        omega = rng.standard_normal((n_random, 3))
        omega /= np.linalg.norm(omega, axis=1, keepdims=True)
        m = eval_basis(omega, basis)
        for i in range(3):
            A = mm.A[i]
            sym = float(np.max(np.abs(A - A.T)))
            checks.append((f"N={N} A{i + 1} symmetric", sym <= 1e-12, f"{sym:.2e}"))
            off = np.abs(deg[:, None] - deg[None, :]) != 1
            leak = float(np.max(np.abs(A[off]), initial=0.0))
            checks.append((f"N={N} A{i + 1} block-tridiagonal", leak == 0.0, f"{leak:.2e}"))
            norm = float(np.linalg.norm(A, 2))
            checks.append((f"N={N} A{i + 1} spectral norm", norm <= 1.0 + 1e-10, f"{norm:.12f}"))
            if N >= 1:
                # omega_i m_l = A_{l,l+1} m_{l+1} + A_{l,l-1} m_{l-1} for degrees l < N
                rows = deg < N
                lhs = omega[:, i : i + 1] * m[:, rows]
                rhs = m @ A[:, rows]
                res = float(np.max(np.abs(lhs - rhs)))
                checks.append((f"N={N} A{i + 1} recursion", res <= 1e-11, f"{res:.2e}"))
    return checks


def _cmd_verify(args, parsed, out: Path) -> int:
    if args.N is None:
        raise ConfigurationError("verify-matrices needs --N")
    if not 0 <= args.N <= 15:
        raise ConfigurationError(f"--N must lie in [0, 15], got {args.N}")
    checks = verify_matrices(args.N)
    ok = True
    rows = []
    for name, passed, value in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name} ({value})")
        ok &= passed
        rows.append({"check": name, "status": "PASS" if passed else "FAIL", "value": value})
    csv_path = out / "verify-matrices.csv"
    _write_csv(csv_path, ("check", "status", "value"), rows)
    runs = [{"params": {"check": r["check"]}, "errors": {"value": r["value"]}, "timings": {},
             "status": r["status"]} for r in rows]
    _write_manifest(out, "verify-matrices", {"problem": {"N": str(args.N)}}, runs, [csv_path])
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "solve": _cmd_solve,
    "convergence": _cmd_convergence,
    "eps-sweep": _cmd_eps_sweep,
    "n-sweep": _cmd_n_sweep,
    "verify-matrices": _cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pndg", description="P_N discontinuous Galerkin convergence studies.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="INI file with [problem], [discretization], "
                       "[materials] and [study] sections")
        p.add_argument("--out", metavar="DIR", default="pndg-out", help="output directory (default: pndg-out)")
        p.add_argument("--threads", metavar="INT", type=int, default=1, help="parallel study cells")
        p.add_argument("--oracle", choices=("pn-fourier", "kinetic", "manufactured"), default=None)
        p.add_argument("--N", type=int, default=None, help="maximal degree for verify-matrices")
        p.add_argument("--timings", action="store_true", help="fill the wall_ms CSV column "
                       "(CSV output is then no longer reproducible byte for byte)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("pndg: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        parsed = read_config(args.config)
        if args.N is not None and args.command != "verify-matrices":
            parsed["problem"]["N"] = args.N
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        # single-threaded BLAS inside each cell keeps results independent of scheduling
        with threadpool_limits(limits=1):
            return COMMANDS[args.command](args, parsed, out)
    except (ConfigurationError, InputError) as exc:
        print(f"pndg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"pndg: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except PnDGError as exc:
        print(f"pndg: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"pndg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
