"""Batch front end: read polynomials, run bound methods, emit reports.

Subcommands: ``bound`` (per-method report for one input file), ``bench``
(random-instance timing table) and ``certify`` (binomial-square certificate
JSON from the optimal witness).  The worker count for bench comes from
POLYGP_THREADS, then --workers, then the CPU count.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import bounds as bounds_mod
from .bounds import BoundPreconditionError, BoundResult, compute_fgp
from .certificates import (
    check_fk,
    check_fk_improved,
    check_lasserre,
    check_newcrt,
    extend_witness_to_homogenization,
    suffcnd_certificate,
)
from .gpsolver import GpSolverError
from .oracle import SearchBudget, estimate_global_min
from .polynomial import (
    ExponentVector,
    ParseError,
    SparsePolynomial,
    homogenize,
    infer_variable_names,
    parse_polynomial,
    render,
)

ALL_METHODS = ("gp", "rl", "rfk", "rdmt", "criteria", "oracle")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2


@dataclass
class Report:
    input_echo: str
    methods: Dict[str, dict] = field(default_factory=dict)
    oracle_estimate: Optional[float] = None
    timings_ms: Dict[str, float] = field(default_factory=dict)
    solver_diagnostics: Dict[str, dict] = field(default_factory=dict)
    seed: int = 0

    def to_json_dict(self) -> dict:
        return {
            "input_echo": self.input_echo,
            "methods": self.methods,
            "oracle_estimate": self.oracle_estimate,
            "timings_ms": self.timings_ms,
            "solver_diagnostics": self.solver_diagnostics,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Report":
        return cls(
            input_echo=data["input_echo"],
            methods=data["methods"],
            oracle_estimate=data["oracle_estimate"],
            timings_ms=data["timings_ms"],
            solver_diagnostics=data["solver_diagnostics"],
            seed=data["seed"],
        )

    def render_text(self) -> str:
        lines = [f"input: {self.input_echo}"]
        lines.append(f"{'method':<10}{'value':<22}{'time_ms':<10}detail")
        for name in self.methods:
            entry = self.methods[name]
            ms = self.timings_ms.get(name, 0.0)
            if "error" in entry:
                value, detail = "-", f"error: {entry['error']}"
            elif name == "criteria":
                value = "-"
                detail = " ".join(f"{k}={v}" for k, v in entry.items())
            elif name == "oracle":
                value, detail = f"{entry['value']:.10g}", f"seed={self.seed}"
            else:
                raw = entry["value"]
                value = raw if isinstance(raw, str) else f"{raw:.10g}"
                detail = entry.get("detail", "")
            lines.append(f"{name:<10}{value:<22}{ms:<10.2f}{detail}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# random instances (bench and the test suites share this recipe)
# ---------------------------------------------------------------------------

def exponents_up_to(n: int, max_degree: int) -> List[ExponentVector]:
    """All exponent vectors in n variables of total degree <= max_degree."""
    out: List[ExponentVector] = []

    def fill(prefix, remaining, slots):
        if slots == 0:
            out.append(ExponentVector(prefix))
            return
        for e in range(remaining + 1):
            fill(prefix + [e], remaining - e, slots - 1)

    fill([], max_degree, n)
    return out


def random_coercive_polynomial(
    n: int,
    two_d: int,
    rng: np.random.Generator,
    density: float = 0.5,
    coeff_bound: float = 10.0,
) -> SparsePolynomial:
    """Unit diagonal sum of X_i^2d plus uniform-coefficient lower-degree noise."""
    pool = exponents_up_to(n, two_d - 1)
    count = min(len(pool), max(1, round(density * n * two_d)))
    picks = rng.choice(len(pool), size=count, replace=False)
    terms = {ExponentVector.axis(n, i, two_d): 1.0 for i in range(n)}
    for idx in picks:
        terms[pool[int(idx)]] = float(rng.uniform(-coeff_bound, coeff_bound))
    return SparsePolynomial(n, terms)


# ---------------------------------------------------------------------------
# bound subcommand
# ---------------------------------------------------------------------------

def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _parse_budget(text: Optional[str]) -> SearchBudget:
    if not text:
        return SearchBudget()
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError("budget must be starts,iters,box_radius,grid_points")
    return SearchBudget(int(parts[0]), int(parts[1]), float(parts[2]), int(parts[3]))


def _criteria_entry(f: SparsePolynomial) -> dict:
    entry: dict = {}
    try:
        entry["lasserre"] = check_lasserre(f)
    except ValueError as exc:
        entry["lasserre"] = f"error: {exc}"
    form = f if f.is_form else homogenize(f)
    for name, fn in (("fk", check_fk), ("fk_improved", check_fk_improved), ("newcrt", check_newcrt)):
        try:
            entry[name] = fn(form)
        except ValueError as exc:
            entry[name] = f"error: {exc}"
    return entry


def run_bound(args) -> int:
    try:
        text = _read_input(args.input)
        names = infer_variable_names(text)
        f = parse_polynomial(text, names or None)
    except (OSError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    requested = ALL_METHODS if args.method == "all" else tuple(args.method.split(","))
    for m in requested:
        if m not in ALL_METHODS:
            print(f"error: unknown method {m!r}", file=sys.stderr)
            return EXIT_INPUT

    report = Report(input_echo=render(f, names or None), seed=args.seed)
    solver_failed = False
    budget = _parse_budget(args.budget)
    bound_fns = {"rl": bounds_mod.bound_rl, "rfk": bounds_mod.bound_rfk, "rdmt": bounds_mod.bound_rdmt}

    for method in requested:
        start = time.perf_counter()
        try:
            if method == "gp":
                result = compute_fgp(f)
                report.methods["gp"] = result.to_json_dict()
                if result.diagnostics:
                    report.solver_diagnostics["gp"] = result.diagnostics
            elif method in bound_fns:
                report.methods[method] = bound_fns[method](f).to_json_dict()
            elif method == "criteria":
                report.methods["criteria"] = _criteria_entry(f)
            elif method == "oracle":
                value = estimate_global_min(f, budget, seed=args.seed)
                report.oracle_estimate = value
                report.methods["oracle"] = {"value": value, "seed": args.seed}
        except GpSolverError as exc:
            report.methods[method] = {"error": str(exc)}
            solver_failed = True
        except (BoundPreconditionError, ValueError) as exc:
            report.methods[method] = {"error": str(exc)}
        report.timings_ms[method] = (time.perf_counter() - start) * 1000.0

    _emit(report.render_text() if args.format == "text" else json.dumps(report.to_json_dict(), indent=2) + "\n", args.out)
    return EXIT_SOLVER if solver_failed else EXIT_OK


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# bench subcommand
# ---------------------------------------------------------------------------

def _parse_cells(spec: str) -> List[int]:
    values: List[int] = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if ":" in chunk:
            lo, hi = chunk.split(":")
            values.extend(range(int(lo), int(hi) + 1))
        elif chunk:
            values.append(int(chunk))
    return values


def _bench_one(task) -> tuple:
    n, two_d, seed, density, coeff_bound = task
    rng = np.random.default_rng(seed)
    f = random_coercive_polynomial(n, two_d, rng, density, coeff_bound)
    start = time.perf_counter()
    result = compute_fgp(f)
    ms = (time.perf_counter() - start) * 1000.0
    return n, two_d, seed, result.value, ms


def worker_count(flag: Optional[int]) -> int:
    env = os.environ.get("POLYGP_THREADS")
    if env:
        return max(1, int(env))
    if flag:
        return max(1, flag)
    return os.cpu_count() or 1


def run_bench(args) -> int:
    try:
        ns = _parse_cells(args.n)
        two_ds = _parse_cells(args.two_d)
        if any(d % 2 for d in two_ds):
            raise ValueError("degrees must be even")
        if args.count < 0:
            raise ValueError("count must be nonnegative")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    tasks = [
        (n, two_d, args.seed + 1000 * i + 7 * n + two_d, args.density, args.coeff_bound)
        for n, two_d in itertools.product(ns, two_ds)
        for i in range(args.count)
    ]
    workers = worker_count(args.workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_one, tasks))
    else:
        rows = [_bench_one(t) for t in tasks]

    cells: Dict[tuple, List[tuple]] = {}
    for n, two_d, seed, value, ms in rows:
        cells.setdefault((n, two_d), []).append((seed, value, ms))

    summary = []
    for (n, two_d) in sorted(cells):
        times = [ms for _, _, ms in cells[(n, two_d)]]
        summary.append(
            {
                "n": n,
                "two_d": two_d,
                "count": len(times),
                "mean_ms": statistics.fmean(times),
                "median_ms": statistics.median(times),
                "values": [v for _, v, _ in cells[(n, two_d)]],
            }
        )
    payload = {
        "seed": args.seed,
        "density": args.density,
        "coeff_bound": args.coeff_bound,
        "cells": summary,
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        lines = [f"{'n':<4}{'2d':<5}{'count':<7}{'mean_ms':<10}{'median_ms':<11}"]
        for cell in summary:
            lines.append(
                f"{cell['n']:<4}{cell['two_d']:<5}{cell['count']:<7}"
                f"{cell['mean_ms']:<10.2f}{cell['median_ms']:<11.2f}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# certify subcommand
# ---------------------------------------------------------------------------

def run_certify(args) -> int:
    try:
        text = _read_input(args.input)
        names = infer_variable_names(text)
        f = parse_polynomial(text, names or None)
    except (OSError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        result = compute_fgp(f)
    except GpSolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if result.value == -math.inf or result.witness is None:
        print("error: no finite bound with witness; nothing to certify", file=sys.stderr)
        return EXIT_SOLVER
    shifted = f.add_constant(-(result.value - args.tolerance))
    lifted = extend_witness_to_homogenization(shifted, result.witness)
    cert = suffcnd_certificate(homogenize(shifted), lifted)
    payload = cert.to_json_dict()
    payload["bound"] = result.value
    payload["margin"] = args.tolerance
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polygp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="compute lower bounds for one polynomial")
    p_bound.add_argument("input", help="polynomial file, or - for stdin")
    p_bound.add_argument("--method", default="all",
                         help="comma list from gp,rl,rfk,rdmt,criteria,oracle or 'all'")
    p_bound.add_argument("--format", choices=("text", "json"), default="text")
    p_bound.add_argument("--seed", type=int, default=0)
    p_bound.add_argument("--tolerance", type=float, default=1e-6)
    p_bound.add_argument("--budget", default=None, help="oracle budget: starts,iters,radius,grid")
    p_bound.add_argument("--out", default=None)
    p_bound.set_defaults(func=run_bound)

    p_bench = sub.add_parser("bench", help="time the gp bound on random instances")
    p_bench.add_argument("--n", required=True, help="variable counts, e.g. 3,4 or 3:5")
    p_bench.add_argument("--two-d", dest="two_d", required=True, help="even degrees, e.g. 4:8")
    p_bench.add_argument("--count", type=int, default=10)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--density", type=float, default=0.5)
    p_bench.add_argument("--coeff-bound", dest="coeff_bound", type=float, default=10.0)
    p_bench.add_argument("--workers", type=int, default=None)
    p_bench.add_argument("--format", choices=("text", "json"), default="text")
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=run_bench)

    p_cert = sub.add_parser("certify", help="emit a binomial-square certificate JSON")
    p_cert.add_argument("input", help="polynomial file, or - for stdin")
    p_cert.add_argument("--method", choices=("gp-witness",), default="gp-witness")
    p_cert.add_argument("--tolerance", type=float, default=1e-6,
                        help="margin subtracted from the bound before certifying")
    p_cert.add_argument("--out", default=None)
    p_cert.set_defaults(func=run_certify)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
