"""Batch runner that solves catalog problems and writes traces and summaries.

Output layout inside ``--out-dir`` (``<tag>`` is ``<problem>_<mode>``)::

    <tag>_iterations.csv     one row per outer iteration (unless --trace none)
    <tag>_summary.json       problem, iter, pivot, f_evals, f, v, kkt, rho, exit
    <tag>_pivots.jsonl       one record per simplex iterate (--trace pivot only)
    aggregate_<mode>.json    list of all summaries
    aggregate_<mode>.txt     the same as a fixed-width table
    pivot_histogram_<mode>.csv   bin counts of pivots per outer iteration

Data files carry no timestamps; wall-clock times go to the log on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .catalog import CatalogEntry, catalog, get as get_entry, names as entry_names
from .solver import IterationRecord, SolveReport, SolverConfig, solve

log = logging.getLogger("inexact_slp")

MODES = ("inexact", "exact")
TRACES = ("none", "iter", "pivot")
# right-open bins for pivots per outer iteration; the last bin is closed
HIST_EDGES = (0, 1, 2, 3, 4, 5, 6, 11, 21, 51, 101)

SCALAR_COLUMNS = (
    "k", "f", "v", "rho", "gamma", "delta", "alpha", "delta_l_opt", "delta_l_fea", "pivots",
    "E_opt", "E_fea", "E_c", "kkt", "step_type", "rho_tilde", "phi", "phi_new", "sigma",
    "rho_reductions",
)


class UsageError(ValueError):
    """Bad selector, flag or config entry; maps to process exit code 2."""


@dataclass
class RunConfig:
    problem: str = "all"
    mode: str = "inexact"
    out_dir: Path = Path("runs")
    trace: str = "iter"
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}")
        if self.trace not in TRACES:
            raise UsageError(f"trace must be one of {TRACES}")
        self.out_dir = Path(self.out_dir)

    @property
    def effective_solver(self) -> SolverConfig:
        return self.solver.exact_mode() if self.mode == "exact" else self.solver

    def entries(self) -> list[CatalogEntry]:
        if self.problem.lower() == "all":
            return catalog()
        try:
            return [get_entry(self.problem)]
        except KeyError:
            raise UsageError(f"unknown problem {self.problem!r}; choose from {', '.join(entry_names())} or all")


def fmt(value) -> str:
    """17 significant digits for floats, so a CSV round-trip is exact."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def csv_header(n: int) -> list[str]:
    return list(SCALAR_COLUMNS) + [f"x_{i}" for i in range(n)] + [f"d_{i}" for i in range(n)]


def csv_row(rec: IterationRecord) -> list[str]:
    row = [fmt(getattr(rec, name)) for name in SCALAR_COLUMNS]
    return row + [fmt(xi) for xi in rec.x] + [fmt(di) for di in rec.d]


def write_trace_csv(path: Path, report: SolveReport, n: int):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_header(n))
        for rec in report.trace:
            writer.writerow(csv_row(rec))


def read_trace_csv(path: Path) -> list[dict]:
    """Parse an iteration CSV back into dicts of floats (step_type stays a string)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append({key: val if key == "step_type" else float(val) for key, val in row.items()})
    return out


def _json_safe(value):
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def summary_dict(report: SolveReport, mode: str) -> dict:
    s = {key: _json_safe(val) for key, val in report.summary().items()}
    s["mode"] = mode
    return s


def pivot_histogram(reports: Sequence[SolveReport]) -> list[tuple[str, int]]:
    counts = [rec.pivots for r in reports for rec in r.trace]
    hist, _ = np.histogram(np.minimum(counts, HIST_EDGES[-1] - 1), bins=HIST_EDGES)
    labels = []
    for lo, hi in zip(HIST_EDGES[:-1], HIST_EDGES[1:]):
        labels.append(str(lo) if hi == lo + 1 else f"{lo}-{hi - 1}")
    return list(zip(labels, (int(c) for c in hist)))


def format_table(summaries: Sequence[dict]) -> str:
    cols = ("problem", "iter", "pivot", "f_evals", "f", "v", "kkt", "rho", "exit")
    lines = ["{:<8} {:>6} {:>6} {:>7} {:>14} {:>10} {:>10} {:>10} {:>5}".format(*cols)]
    for s in summaries:
        num = lambda key: s[key] if isinstance(s[key], float) else float("nan")
        lines.append(
            f"{s['problem']:<8} {s['iter']:>6} {s['pivot']:>6} {s['f_evals']:>7} {num('f'):>14.7g} "
            f"{num('v'):>10.3e} {num('kkt'):>10.3e} {num('rho'):>10.3e} {s['exit']:>5}"
        )
    return "\n".join(lines) + "\n"


def run_one(entry: CatalogEntry, config: RunConfig) -> SolveReport:
    tag = f"{entry.name}_{config.mode}"
    pivot_path = config.out_dir / f"{tag}_pivots.jsonl"
    start = time.perf_counter()
    if config.trace == "pivot":
        with open(pivot_path, "w") as fh:
            report = solve(entry.problem, entry.x0, config.effective_solver, pivot_trace=fh)
    else:
        report = solve(entry.problem, entry.x0, config.effective_solver)
    log.info("%s: %s in %.3fs (%d iter, %d pivots)", tag, report.status.value,
             time.perf_counter() - start, report.n_iter, report.n_pivots)
    if config.trace != "none":
        write_trace_csv(config.out_dir / f"{tag}_iterations.csv", report, entry.problem.n)
    with open(config.out_dir / f"{tag}_summary.json", "w") as fh:
        json.dump(summary_dict(report, config.mode), fh, indent=2)
    return report


def run(config: RunConfig) -> int:
    """Solve the selected problems; return the process exit code (0, or 2 on usage errors)."""
    try:
        entries = config.entries()
    except UsageError as exc:
        log.error("%s", exc)
        return 2
    config.out_dir.mkdir(parents=True, exist_ok=True)
    reports = [run_one(entry, config) for entry in entries]
    summaries = [summary_dict(r, config.mode) for r in reports]
    with open(config.out_dir / f"aggregate_{config.mode}.json", "w") as fh:
        json.dump(summaries, fh, indent=2)
    (config.out_dir / f"aggregate_{config.mode}.txt").write_text(format_table(summaries))
    with open(config.out_dir / f"pivot_histogram_{config.mode}.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pivots_per_iteration", "count"])
        writer.writerows(pivot_histogram(reports))
    return 0


def _coerce(name: str, raw: str):
    fields = {f.name: f for f in dataclasses.fields(SolverConfig)}
    if name not in fields:
        raise UsageError(f"unknown config key {name!r}")
    kind = fields[name].type
    try:
        if kind in ("bool", bool):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if kind in ("int", int):
            return int(raw)
        return float(raw)
    except ValueError:
        raise UsageError(f"bad value {raw!r} for {name}")


def read_config_file(path: Path) -> dict:
    """key = value lines; '#' starts a comment. Keys are SolverConfig fields, mode, trace or problem."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = raw if key in ("mode", "trace", "problem") else _coerce(key, raw)
    return out


FLAG_TO_FIELD = {
    "kkt_tol": "kkt_tol", "feas_tol": "feas_tol", "max_iter": "max_iter",
    "max_pivots": "max_pivots", "delta0": "delta0",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="inexact-slp", description=__doc__.splitlines()[0])
    p.add_argument("--problem", help="catalog name or 'all' (default all)")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--out-dir", type=Path)
    p.add_argument("--kkt-tol", type=float)
    p.add_argument("--feas-tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--max-pivots", type=int)
    p.add_argument("--delta0", type=float)
    p.add_argument("--trace", choices=TRACES)
    p.add_argument("--config", type=Path, help="key = value file; flags override it")
    p.add_argument("--list", action="store_true", help="print catalog names and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    settings = read_config_file(args.config) if args.config else {}
    top = {key: settings.pop(key) for key in ("mode", "trace", "problem") if key in settings}
    for flag, name in FLAG_TO_FIELD.items():
        value = getattr(args, flag)
        if value is not None:
            settings[name] = value
    for key in ("mode", "trace", "problem"):
        value = getattr(args, key)
        if value is not None:
            top[key] = value
    try:
        solver = SolverConfig(**settings)
    except ValueError as exc:
        raise UsageError(str(exc))
    return RunConfig(
        problem=top.get("problem", "all"), mode=top.get("mode", "inexact"),
        out_dir=args.out_dir or Path("runs"), trace=top.get("trace", "iter"), solver=solver,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.setLevel(logging.INFO)
    if args.list:
        print("\n".join(entry_names()))
        return 0
    try:
        config = config_from_args(args)
    except (UsageError, OSError) as exc:
        log.error("%s", exc)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
