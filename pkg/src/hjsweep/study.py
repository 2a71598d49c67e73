"""Convergence studies and CFL scans with CSV / JSON-lines reports.

Each (problem, N, gamma) run is independent, so runs are farmed out to worker
processes; every individual solve stays sequential.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .grid import classify_points
from .problems import convergence_order, get_problem, masked_error
from .reconstruction import WeightParams
from .solver import Diverged, NotConverged, SchemeConfig, SchemeKind, solve

log = logging.getLogger(__name__)

WORKERS_ENV = "HJSWEEP_WORKERS"

CONVERGED, NOT_CONVERGED, DIVERGED = "converged", "not-converged", "diverged"

CSV_FIELDS = ("N", "L1", "order_L1", "Linf", "order_Linf", "iter", "wall_time", "status",
              "L1_full", "Linf_full", "linear_hits", "hweno_evals")


@dataclass(frozen=True)
class RunConfig:
    problem: str
    ladder: tuple[int, ...]
    scheme: SchemeKind = SchemeKind.FE_FSM
    cfl: Optional[float] = None
    mode: str = "hweno"
    tol: float = 1e-14
    max_iter: int = 100_000
    out: Path = Path("results")
    stride: int = 4
    weights: WeightParams = WeightParams()

    def __post_init__(self):
        ladder = tuple(int(n) for n in self.ladder)
        object.__setattr__(self, "ladder", ladder)
        object.__setattr__(self, "scheme", SchemeKind(self.scheme))
        object.__setattr__(self, "out", Path(self.out))
        if not ladder:
            raise ValueError("mesh ladder is empty")
        if min(ladder) < 20:
            raise ValueError("every N in the ladder must be >= 20")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("mesh ladder must be strictly increasing")
        if self.mode not in ("hweno", "hybrid"):
            raise ValueError(f"mode must be 'hweno' or 'hybrid', got {self.mode!r}")
        if self.stride < 1:
            raise ValueError("history stride must be >= 1")
        get_problem(self.problem)  # raises KeyError for unknown names

    def scheme_config(self, cfl: Optional[float] = None) -> SchemeConfig:
        return SchemeConfig(self.scheme, cfl=self.cfl if cfl is None else cfl,
                            weights=self.weights, reconstruction=self.mode, tol=self.tol,
                            max_iter=self.max_iter, history_stride=self.stride)

    def to_json(self) -> dict:
        d = asdict(self)
        d["scheme"] = self.scheme.value
        d["out"] = str(self.out)
        d["ladder"] = list(self.ladder)
        return d


@dataclass
class RunResult:
    n: int
    cfl: float
    status: str
    l1: Optional[float] = None
    linf: Optional[float] = None
    iterations: int = 0
    wall_time: float = 0.0
    linear_hits: int = 0
    hweno_evals: int = 0
    message: str = ""
    delta_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    error_history: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == CONVERGED


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def solve_one(problem_name: str, n: int, config: SchemeConfig) -> RunResult:
    """Solve one mesh and measure errors; failures are captured, not raised."""
    problem = get_problem(problem_name)
    grid = problem.grid(n)
    cat = classify_points(grid, problem)
    X, Y = grid.mesh
    reference = problem.pinned_values(X, Y)
    status, message = CONVERGED, ""
    try:
        state, stats = solve(problem, grid, config, reference=reference)
    except NotConverged as exc:
        state, stats, status, message = exc.state, exc.stats, NOT_CONVERGED, str(exc)
    except Diverged as exc:
        state, stats, status, message = exc.state, exc.stats, DIVERGED, str(exc)

    res = RunResult(n, config.gamma, status, iterations=stats.iterations,
                    wall_time=stats.wall_time, linear_hits=stats.linear_hits,
                    hweno_evals=stats.hweno_evals, message=message,
                    delta_history=list(stats.delta_history),
                    residual_history=list(stats.residual_history),
                    error_history=list(stats.error_history))
    if status != DIVERGED and state is not None and np.all(np.isfinite(state.phi)):
        err = masked_error(state.phi, problem, grid, cat, reference=reference)
        res.l1, res.linf = err.l1, err.linf
    return res


def _run_many(jobs: Sequence[tuple[str, int, SchemeConfig]]) -> list[RunResult]:
    workers = min(worker_count(), len(jobs))
    if workers <= 1:
        return [solve_one(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(solve_one, *job) for job in jobs]
        return [f.result() for f in futures]


# --------------------------------------------------------------------------
# report writers
# --------------------------------------------------------------------------

def _fmt(x: Optional[float], digits: int = 2) -> str:
    return "" if x is None else f"{x:.{digits}e}"


def _fmt_order(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.2f}"


def table_rows(results: Sequence[RunResult]) -> list[dict]:
    """CSV rows with orders against the previous mesh (``log2`` of the error ratio)."""
    rows = []
    prev: Optional[RunResult] = None
    for r in results:
        o1 = oinf = None
        if prev is not None and None not in (prev.l1, r.l1, prev.linf, r.linf):
            ratio = r.n / prev.n
            o1 = convergence_order(prev.l1, r.l1)
            oinf = convergence_order(prev.linf, r.linf)
            if o1 is not None and ratio != 2:
                o1 /= np.log2(ratio)
            if oinf is not None and ratio != 2:
                oinf /= np.log2(ratio)
        rows.append({
            "N": r.n, "L1": _fmt(r.l1), "order_L1": _fmt_order(o1), "Linf": _fmt(r.linf),
            "order_Linf": _fmt_order(oinf), "iter": r.iterations,
            "wall_time": f"{r.wall_time:.3f}", "status": r.status,
            "L1_full": "" if r.l1 is None else repr(r.l1),
            "Linf_full": "" if r.linf is None else repr(r.linf),
            "linear_hits": r.linear_hits, "hweno_evals": r.hweno_evals,
        })
        prev = r
    return rows


def write_csv(path: Path, rows: Sequence[dict], fields: Sequence[str] = CSV_FIELDS):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields))
        w.writeheader()
        for row in rows:
            w.writerow(row)


def write_history(path: Path, result: RunResult):
    """One JSON object per checkpoint: iteration, delta and (when recorded) residual/error."""
    resid = dict(result.residual_history)
    errs = dict(result.error_history)
    with open(path, "w") as fh:
        for it, delta in result.delta_history:
            rec = {"iter": int(it), "delta": float(delta)}
            if it in resid:
                rec["residual"] = float(resid[it])
            if it in errs:
                rec["error_l1"] = float(errs[it])
            fh.write(json.dumps(rec) + "\n")


def content_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(out: Path, kind: str, config: RunConfig, extra: dict, files: Sequence[str]):
    inputs = {"kind": kind, "config": config.to_json(), **extra}
    manifest = {
        **inputs,
        "input_hash": content_hash(inputs),
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "files": sorted(files),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------------------
# studies
# --------------------------------------------------------------------------

def _tag(config: RunConfig) -> str:
    return f"{get_problem(config.problem).name}_{config.scheme.value}_{config.mode}"


def run_convergence_study(config: RunConfig) -> list[RunResult]:
    """Solve every mesh of the ladder; write the table CSV, histories and manifest."""
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    sc = config.scheme_config()
    results = _run_many([(config.problem, n, sc) for n in config.ladder])
    tag = _tag(config)
    files = [f"{tag}.csv"]
    write_csv(out / f"{tag}.csv", table_rows(results))
    for r in results:
        name = f"{tag}_N{r.n}.history.jsonl"
        write_history(out / name, r)
        files.append(name)
        log.info("%s N=%d %s iter=%d L1=%s", config.problem, r.n, r.status, r.iterations,
                 _fmt(r.l1))
    write_manifest(out, "run", config, {"cfl": sc.gamma}, files)
    return results


SCAN_FIELDS = ("cfl", "status", "iter", "wall_time", "L1", "Linf", "fastest")


def run_cfl_scan(config: RunConfig, cfls: Sequence[float]) -> list[RunResult]:
    """One solve per gamma on the finest mesh of the ladder; names the fastest gamma."""
    cfls = [float(c) for c in cfls]
    if not cfls or min(cfls) <= 0:
        raise ValueError("CFL list must be non-empty and positive")
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    n = config.ladder[-1]
    results = _run_many([(config.problem, n, config.scheme_config(c)) for c in cfls])
    fastest = fastest_cfl(results)
    tag = f"{_tag(config)}_N{n}_scan"
    files = [f"{tag}.csv"]
    rows = [{"cfl": f"{r.cfl:g}", "status": r.status, "iter": r.iterations,
             "wall_time": f"{r.wall_time:.3f}", "L1": _fmt(r.l1), "Linf": _fmt(r.linf),
             "fastest": int(r.cfl == fastest)} for r in results]
    write_csv(out / f"{tag}.csv", rows, SCAN_FIELDS)
    for r in results:
        name = f"{tag}_cfl{r.cfl:g}.history.jsonl"
        write_history(out / name, r)
        files.append(name)
    write_manifest(out, "scan-cfl", config, {"cfls": cfls, "N": n}, files)
    return results


def fastest_cfl(results: Sequence[RunResult]) -> Optional[float]:
    done = [r for r in results if r.ok]
    return min(done, key=lambda r: r.wall_time).cfl if done else None
