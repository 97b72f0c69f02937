"""Command-line harness: single runs, scheme comparison tables and mesh-convergence studies.

Exit status is 0 on success, 2 on a usage error, 3 when a run diverges and 4
when ``--strict`` is set and a run stops at ``--max-iter`` without converging.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .benchmarks import (
    PROBLEMS,
    SMITH_HUTTON_LADDER,
    TVD_RELAXATION,
    error_metrics,
    exact_field,
    extract_profile,
    make_problem,
)
from .grid import write_field_csv
from .schemes import LIMITERS, SchemeConfig
from .solver import Divergence, SolveConfig, SweepPolicy, solve, write_residuals_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGED = 3
EXIT_NOT_CONVERGED = 4

SCHEME_CHOICES = ("upwind", "dstream", "tvd", *LIMITERS)
DEFAULT_SCHEMES = (
    "upwind",
    *(f"dstream-r{r}" for r in range(1, 6)),
    "minmod",
    "quick",
    "superbee",
)

DEFAULTS = {
    "problem": "step",
    "scheme": "dstream",
    "range": 1,
    "limited": False,
    "limiter": "minmod",
    "nx": None,
    "ny": None,
    "epsilon": 1e-8,
    "relax": None,
    "max_iter": 50000,
    "sweep": None,
    "out": "dstream-out",
    "strict": False,
}


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ configuration

def scheme_from_key(key: str) -> SchemeConfig:
    """Parse ``upwind``, ``dstream-r3``, ``dstream-r3-limited`` or a limiter name."""
    if key == "upwind":
        return SchemeConfig.upwind()
    if key in LIMITERS:
        return SchemeConfig.tvd(key)
    parts = key.split("-")
    if parts[0] == "dstream" and len(parts) in (2, 3) and parts[1][:1] == "r" and parts[1][1:].isdigit():
        limited = len(parts) == 3
        if limited and parts[2] != "limited":
            raise UsageError(f"unknown scheme {key!r}")
        try:
            return SchemeConfig.dstream(int(parts[1][1:]), limited)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    raise UsageError(f"unknown scheme {key!r}; use upwind, dstream-r<1..5>[-limited], "
                     f"or one of {sorted(LIMITERS)}")


def default_relaxation(problem: str, scheme: SchemeConfig) -> float:
    if scheme.kind == "tvd":
        return TVD_RELAXATION.get(problem, {}).get(scheme.limiter, 1.0)
    return 1.0


@dataclass
class RunConfig:
    problem: str
    scheme: SchemeConfig
    nx: int | None
    ny: int | None
    solve: SolveConfig
    policy: SweepPolicy
    out: Path
    strict: bool = False

    def echo(self) -> dict:
        """Flat dictionary that ``--config`` accepts back."""
        s = self.scheme
        scheme = {"upwind": "upwind", "dstream": "dstream", "tvd": "tvd"}[s.kind]
        return {
            "problem": self.problem,
            "scheme": scheme,
            "range": s.range,
            "limited": s.limited,
            "limiter": s.limiter,
            "nx": self.nx,
            "ny": self.ny,
            "epsilon": self.solve.epsilon,
            "relax": self.solve.alpha,
            "max_iter": self.solve.max_iter,
            "sweep": self.policy.kind,
        }


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    # a report.json is accepted as well
    data = data.get("config", data)
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def merged_options(ns: argparse.Namespace) -> dict:
    """Defaults, then the JSON config, then flags given on the command line."""
    opts = dict(DEFAULTS)
    given = vars(ns)
    if given.get("config"):
        opts.update(load_config(given["config"]))
    opts.update({k: v for k, v in given.items() if k in DEFAULTS})
    return opts


def _scheme_from_options(opts: dict) -> SchemeConfig:
    name = opts["scheme"]
    try:
        if name == "upwind":
            return SchemeConfig.upwind()
        if name == "dstream":
            return SchemeConfig.dstream(int(opts["range"]), bool(opts["limited"]))
        if name == "tvd":
            return SchemeConfig.tvd(opts["limiter"])
        if name in LIMITERS:
            return SchemeConfig.tvd(name)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return scheme_from_key(str(name))


def _solve_config(opts: dict, problem: str, scheme: SchemeConfig) -> SolveConfig:
    relax = opts["relax"] if opts["relax"] is not None else default_relaxation(problem, scheme)
    try:
        return SolveConfig(epsilon=float(opts["epsilon"]), alpha=float(relax), max_iter=int(opts["max_iter"]))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _policy(opts: dict, scheme: SchemeConfig) -> SweepPolicy:
    if opts["sweep"] is None:
        return SweepPolicy.default_for(scheme)
    if opts["sweep"] == "fixed":
        return SweepPolicy.fixed()
    if opts["sweep"] == "rotating":
        return SweepPolicy.rotating()
    raise UsageError(f"unknown sweep policy {opts['sweep']!r}")


def _check_problem(name):
    if name not in PROBLEMS:
        raise UsageError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}")


def run_config(opts: dict) -> RunConfig:
    _check_problem(opts["problem"])
    scheme = _scheme_from_options(opts)
    return RunConfig(
        problem=opts["problem"],
        scheme=scheme,
        nx=opts["nx"],
        ny=opts["ny"],
        solve=_solve_config(opts, opts["problem"], scheme),
        policy=_policy(opts, scheme),
        out=Path(opts["out"]),
        strict=bool(opts["strict"]),
    )


def _build(problem: str, nx, ny):
    try:
        return make_problem(problem, nx, ny)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None


# ------------------------------------------------------------------ file output

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _num(x) -> str:
    return format(float(x), ".17g")


# ------------------------------------------------------------------ run

@dataclass
class CaseResult:
    label: str
    key: str
    alpha: float
    iterations: int
    residual: float
    max_error: float
    overshoot: float
    undershoot: float
    converged: bool
    diverged: bool = False
    l1_error: float = math.nan
    wall_time: float = 0.0
    nx: int = 0
    ny: int = 0


def run_case(problem, scheme: SchemeConfig, cfg: SolveConfig, policy: SweepPolicy | None = None):
    """Solve one case; returns ``(field, report, CaseResult)``. Divergence gives ``field=None``."""
    label = dict(label=scheme.label, key=scheme.key, alpha=cfg.alpha, nx=problem.grid.nx, ny=problem.grid.ny)
    try:
        phi, report = solve(problem, scheme, policy, cfg)
    except Divergence as exc:
        nan = math.nan
        return None, exc, CaseResult(iterations=exc.iteration or 0, residual=nan, max_error=nan,
                                     overshoot=nan, undershoot=nan, converged=False, diverged=True, **label)
    exact = exact_field(problem)
    m = error_metrics(phi, exact, problem.boundary.data_bounds())
    result = CaseResult(
        iterations=report.iterations,
        residual=report.final_residual,
        max_error=m.max_abs_diff,
        overshoot=m.overshoot,
        undershoot=m.undershoot,
        converged=report.converged,
        l1_error=float(np.mean(np.abs(phi.values - exact.values))),
        wall_time=report.wall_time,
        **label,
    )
    return phi, report, result


def cmd_run(rc: RunConfig) -> int:
    problem = _build(rc.problem, rc.nx, rc.ny)
    phi, report, res = run_case(problem, rc.scheme, rc.solve, rc.policy)
    out = rc.out
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "problem": rc.problem,
        "scheme": rc.scheme.label,
        "grid": [problem.grid.nx, problem.grid.ny],
        "alpha": rc.solve.alpha,
        "iterations": res.iterations,
        "final_residual": res.residual,
        "converged": res.converged,
        "diverged": res.diverged,
        "max_error": res.max_error,
        "l1_error": res.l1_error,
        "overshoot": res.overshoot,
        "undershoot": res.undershoot,
        "wall_time": res.wall_time,
        "config": rc.echo(),
    }
    if res.diverged:
        summary["diverged_at"] = list(report.node)
        _atomic_write(out / "report.json", json.dumps(summary, indent=2, allow_nan=True) + "\n")
        print(f"diverged: {report}", file=sys.stderr)
        return EXIT_DIVERGED

    x, values, exact, row = extract_profile(problem, phi)
    summary["profile_row"] = row
    write_field_csv(phi, out / "field.csv")
    _atomic_write(out / "profile.csv",
                  _csv_text(["x", "phi", "exact"], [[_num(a), _num(b), _num(c)] for a, b, c in zip(x, values, exact)]))
    write_residuals_csv(report, out / "residuals.csv")
    _atomic_write(out / "report.json", json.dumps(summary, indent=2) + "\n")
    state = "converged" if res.converged else "stopped"
    print(f"{rc.scheme.label} on {rc.problem}: {state} after {res.iterations} iterations, "
          f"residual {format_residual(res.residual)}, max error {res.max_error:.3g}")
    if not res.converged and rc.strict:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


# ------------------------------------------------------------------ compare

def format_residual(r: float) -> str:
    """``0`` for an exact zero, otherwise two significant digits."""
    if isinstance(r, float) and math.isnan(r):
        return "nan"
    if r == 0:
        return "0"
    return f"{r:.1e}"


@dataclass
class ComparisonTable:
    problem: str
    grid: tuple
    rows: list = field(default_factory=list)

    COLUMNS = ("scheme", "alpha", "iterations", "residual", "max_error", "overshoot", "undershoot", "status")

    def _status(self, row: CaseResult) -> str:
        if row.diverged:
            return "diverged"
        return "converged" if row.converged else "max-iter"

    def csv_rows(self):
        return [[r.label, _num(r.alpha), r.iterations, "0" if r.residual == 0 else _num(r.residual),
                 _num(r.max_error), _num(r.overshoot), _num(r.undershoot), self._status(r)] for r in self.rows]

    def to_csv(self) -> str:
        return _csv_text(self.COLUMNS, self.csv_rows())

    def to_markdown(self) -> str:
        head = ["Scheme", "α", "Iterations", "Residual", "Max error", "Overshoot", "Undershoot", "Status"]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for r in self.rows:
            cells = [r.label, f"{r.alpha:g}", str(r.iterations), format_residual(r.residual),
                     f"{r.max_error:.3g}", f"{r.overshoot:.3g}", f"{r.undershoot:.3g}", self._status(r)]
            lines.append("| " + " | ".join(cells) + " |")
        ratio = self.ratio_line()
        if ratio:
            lines += ["", ratio]
        return "\n".join(lines) + "\n"

    def ratios(self) -> dict:
        """Iterations of each TVD row divided by the slowest upwind/DStreaM row."""
        direct = [r.iterations for r in self.rows if r.key == "upwind" or r.key.startswith("dstream")
                  if not r.diverged]
        if not direct:
            return {}
        base = max(direct)
        return {r.label: r.iterations / base for r in self.rows if r.key in LIMITERS and not r.diverged}

    def ratio_line(self) -> str:
        ratios = self.ratios()
        if not ratios:
            return ""
        parts = ", ".join(f"{label} {q:.3g}x" for label, q in ratios.items())
        return f"Upwind/DStreaM need fewer iterations than: {parts}"


def cmd_compare(problem_name: str, nx, ny, schemes, opts: dict) -> tuple[ComparisonTable, int]:
    _check_problem(problem_name)
    configs = [scheme_from_key(k) for k in schemes]
    problem = _build(problem_name, nx, ny)
    table = ComparisonTable(problem_name, (problem.grid.nx, problem.grid.ny))
    code = EXIT_OK
    for sc in configs:
        cfg = _solve_config(opts, problem_name, sc)
        _, _, res = run_case(problem, sc, cfg, _policy(opts, sc))
        table.rows.append(res)
        if res.diverged:
            code = max(code, EXIT_DIVERGED)
        elif not res.converged and opts["strict"]:
            code = max(code, EXIT_NOT_CONVERGED)
    out = Path(opts["out"])
    _atomic_write(out / "comparison.csv", table.to_csv())
    _atomic_write(out / "comparison.md", table.to_markdown())
    return table, code


# ------------------------------------------------------------------ converge

def parse_ladder(text: str):
    sizes = []
    for item in text.split(","):
        try:
            a, b = item.lower().split("x")
            sizes.append((int(a), int(b)))
        except ValueError:
            raise UsageError(f"bad ladder entry {item!r}; expected NXxNY") from None
    return tuple(sizes)


def default_ladder(problem_name: str):
    if problem_name == "smith-hutton":
        return SMITH_HUTTON_LADDER
    return ((15, 15), (30, 30), (60, 60), (120, 120))


def cmd_converge(problem_name: str, schemes, ladder, opts: dict) -> tuple[list, int]:
    _check_problem(problem_name)
    configs = [scheme_from_key(k) for k in schemes]
    results = []
    code = EXIT_OK
    for nx, ny in ladder:
        problem = _build(problem_name, nx, ny)
        for sc in configs:
            cfg = _solve_config(opts, problem_name, sc)
            _, _, res = run_case(problem, sc, cfg, _policy(opts, sc))
            res.nx, res.ny = nx, ny
            results.append(res)
            if res.diverged:
                code = max(code, EXIT_DIVERGED)
            elif not res.converged and opts["strict"]:
                code = max(code, EXIT_NOT_CONVERGED)
    rows = [[r.label, r.nx, r.ny, _nodes(problem_name, r), r.iterations, _num(r.residual),
             int(r.converged), _num(r.max_error), _num(r.l1_error)] for r in results]
    out = Path(opts["out"])
    _atomic_write(out / "convergence.csv",
                  _csv_text(["scheme", "nx", "ny", "nodes", "iterations", "residual", "converged",
                             "max_error", "l1_error"], rows))
    _atomic_write(out / "convergence.md", convergence_markdown(problem_name, results))
    return results, code


def _nodes(problem_name, r):
    if problem_name == "smith-hutton":
        return (r.nx + 1) * (r.ny + 1)
    return r.nx * r.ny


def convergence_markdown(problem_name: str, results) -> str:
    """Per-scheme table with the observed log-log slope of the L1 error against node count."""
    lines = []
    by_scheme = {}
    for r in results:
        by_scheme.setdefault(r.label, []).append(r)
    for label, rows in by_scheme.items():
        lines += [f"### {label}", "", "| Grid | Nodes | Iterations | Max error | L1 error | L1 slope |",
                  "|---|---|---|---|---|---|"]
        prev = None
        for r in rows:
            n = _nodes(problem_name, r)
            slope = ""
            if prev is not None and r.l1_error > 0 and prev[1] > 0:
                slope = f"{math.log(r.l1_error / prev[1]) / math.log(n / prev[0]):.2f}"
            lines.append(f"| {r.nx}x{r.ny} | {n} | {r.iterations} | {r.max_error:.3g} | {r.l1_error:.3g} | {slope} |")
            prev = (n, r.l1_error)
        lines.append("")
    return "\n".join(lines)


# ------------------------------------------------------------------ parser

def _add_common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--problem", default=S, help=f"one of {sorted(PROBLEMS)} (default step)")
    p.add_argument("--nx", type=int, default=S,
                   help="nodes in x for profile problems, cells for smith-hutton (default 30 / 40)")
    p.add_argument("--ny", type=int, default=S, help="as --nx, in y (default 30 / 20)")
    p.add_argument("--epsilon", type=float, default=S, help="convergence threshold (default 1e-8)")
    p.add_argument("--relax", type=float, default=S,
                   help="under-relaxation in (0, 1]; default 1 for upwind/DStreaM, tuned per problem for TVD")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=S, help="iteration cap (default 50000)")
    p.add_argument("--sweep", choices=("fixed", "rotating"), default=S,
                   help="start-corner policy (default fixed for TVD, rotating otherwise)")
    p.add_argument("--out", default=S, help="output directory (default dstream-out)")
    p.add_argument("--config", default=None, help="JSON file of defaults; flags override it")
    p.add_argument("--strict", action="store_true", default=S, help="exit 4 when a run hits --max-iter")


def _add_scheme_opts(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--range", type=int, choices=range(1, 6), default=S, help="DStreaM range (default 1)")
    lim = p.add_mutually_exclusive_group()
    lim.add_argument("--limited", dest="limited", action="store_true", default=S,
                     help="clamp DStreaM weights at zero")
    lim.add_argument("--unlimited", dest="limited", action="store_false", default=S,
                     help="raw DStreaM weights (default)")
    p.add_argument("--limiter", choices=sorted(LIMITERS), default=S, help="TVD limiter for --scheme tvd")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dstream", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one case and write field, profile, residuals and report",
                         formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(run)
    run.add_argument("--scheme", choices=SCHEME_CHOICES, default=argparse.SUPPRESS,
                     help="upwind, dstream, tvd (with --limiter) or a limiter name (default dstream)")
    _add_scheme_opts(run)

    key_help = "scheme key: upwind, dstream-r<1..5>[-limited], minmod, quick, superbee; repeatable"
    cmp_ = sub.add_parser("compare", help="table of iterations, residual and errors across schemes")
    _add_common(cmp_)
    cmp_.add_argument("--scheme", dest="schemes", action="append", default=None, help=key_help)

    conv = sub.add_parser("converge", help="error and iteration count along a mesh ladder")
    _add_common(conv)
    conv.add_argument("--scheme", dest="schemes", action="append", default=None, help=key_help)
    conv.add_argument("--ladder", default=None,
                      help="comma-separated NXxNY sizes (default 20x10..320x160 for smith-hutton)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        opts = merged_options(ns)
        if ns.command == "run":
            return cmd_run(run_config(opts))
        schemes = ns.schemes or list(DEFAULT_SCHEMES)
        if ns.command == "compare":
            table, code = cmd_compare(opts["problem"], opts["nx"], opts["ny"], schemes, opts)
            print(table.to_markdown(), end="")
            return code
        ladder = parse_ladder(ns.ladder) if ns.ladder else default_ladder(opts["problem"])
        results, code = cmd_converge(opts["problem"], schemes, ladder, opts)
        print(convergence_markdown(opts["problem"], results), end="")
        return code
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dstream: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
