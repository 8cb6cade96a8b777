"""Batch sweeps over (n, d, eps, mode) grids with CSV, fit and manifest output."""

import csv
import hashlib
import io
import itertools
import json
import logging
import math
import time
from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.core.adversary.families import ny_hard_family
from app.core.adversary.game import make_strategy, play_mi_game
from app.core.catalog import bundled_suite, load_instance
from app.core.centerpoint import CenterpointStrategy, SolverConfig, solve
from app.core.constants import CSV_FLOAT_FORMAT
from app.core.halving import halving_report, shifted_family
from app.core.instances import brute_force_opt
from app.core.oracles import QueryCounter, fixed_point_bit, sgn
from app.core.recovery import approx_unit_vector, approx_vector_bits
from app.schemas.experiment import CellResult, ExperimentConfig, FitRow, SweepResult

logger = logging.getLogger(__name__)

PACKAGE_VERSION = "v0.1.0"
CSV_COLUMNS = ["n", "d", "eps", "mode", "instance", "seed", "repetition", "status", "query_total", "gap", "stop_round", "seconds"]
GAME_M = 1.0
GAME_R = 1.0


@dataclass(frozen=True)
class CellSpec:
    n: int
    d: int
    eps: float
    mode: str
    seed: int
    repetition: int
    instance_path: str = ""


def config_version(config: ExperimentConfig) -> str:
    """Package version plus the first eight hex digits of the config hash."""
    digest = hashlib.sha256(config.model_dump_json().encode("utf-8")).hexdigest()
    return f"{PACKAGE_VERSION}-{digest[:8]}"


def iter_cells(config: ExperimentConfig) -> Iterator[CellSpec]:
    """Cells in declared order; solver sweeps over files take (n, d) from each file."""
    if config.kind == "solver" and config.instances:
        for path, eps, mode, seed in itertools.product(config.instances, config.eps, config.mode, config.seeds):
            inst = load_instance(path)
            for repetition in range(config.repetitions):
                yield CellSpec(inst.n, inst.d, eps, mode, seed, repetition, path)
        return
    for n, d, eps, mode, seed in itertools.product(config.n, config.d, config.eps, config.mode, config.seeds):
        for repetition in range(config.repetitions):
            yield CellSpec(n, d, eps, mode, seed, repetition)


def _solver_cell(config: ExperimentConfig, spec: CellSpec) -> CellResult:
    if spec.instance_path:
        inst = load_instance(spec.instance_path)
    else:
        inst = bundled_suite(n_values=(spec.n,), d_values=(spec.d,), per_cell=1, seed=spec.seed + spec.repetition)[0]
    solver_config = SolverConfig(eps=spec.eps, mode=spec.mode, seed=spec.seed, centerpoint_samples=config.samples)
    report = solve(inst, solver_config)
    gap = report.value - brute_force_opt(inst).value
    return _row(spec, inst.label, query_total=report.query_total, gap=gap)


def _recovery_cell(config: ExperimentConfig, spec: CellSpec) -> CellResult:
    dim = spec.n + spec.d
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, spec.repetition, dim]))
    counter = QueryCounter()
    worst = 0.0
    for _ in range(config.trials):
        g = rng.uniform(-1.0, 1.0, size=dim)
        if spec.mode == "bit":
            estimate = approx_vector_bits(
                lambda coord, index: fixed_point_bit(float(g[coord]), index),
                dim,
                1.0,
                spec.eps / math.sqrt(dim),
                counter,
            )
            worst = max(worst, float(np.linalg.norm(estimate - g)))
        else:
            estimate = approx_unit_vector(lambda a: sgn(float(a @ g)), dim, spec.eps, counter)
            worst = max(worst, float(np.linalg.norm(estimate - g / np.linalg.norm(g))))
    return _row(spec, query_total=counter.total // config.trials, gap=worst)


def _game_cell(config: ExperimentConfig, spec: CellSpec) -> CellResult:
    family = ny_hard_family(spec.d, GAME_M, GAME_R, spec.eps, config.family_size)
    strategy = make_strategy(spec.mode, spec.n, spec.d, GAME_R, spec.seed + spec.repetition)
    report = play_mi_game(family, spec.n, spec.eps, strategy, config.max_rounds, audit_samples=20, seed=spec.seed)
    if not report.consistent:
        return _row(spec, status="failed", stop_round=report.stop_round, error="transcript not reproduced by any ψ_F")
    return _row(spec, query_total=report.stop_round, stop_round=report.stop_round)


def _halving_cell(config: ExperimentConfig, spec: CellSpec) -> CellResult:
    family = shifted_family(config.family_size, spec.eps, spec.seed, d=spec.d, n=spec.n)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, spec.repetition]))
    true_instance = family[int(rng.integers(len(family)))]
    wrapped = CenterpointStrategy(
        family[0].params, SolverConfig(eps=spec.eps, seed=spec.seed, centerpoint_samples=config.samples)
    )
    report = halving_report(family, true_instance, wrapped, spec.eps)
    status = "ok" if report.bound_met and report.gap <= spec.eps else "failed"
    error = None if status == "ok" else f"gap {report.gap:.4g} or {report.queries.total} queries over bound"
    return _row(spec, true_instance.label, status=status, query_total=report.queries.total, gap=report.gap, error=error)


CELL_RUNNERS = {
    "solver": _solver_cell,
    "recovery": _recovery_cell,
    "game": _game_cell,
    "halving": _halving_cell,
}


def _row(spec: CellSpec, instance: str = "", status: str = "ok", **values) -> CellResult:
    return CellResult(
        n=spec.n,
        d=spec.d,
        eps=spec.eps,
        mode=spec.mode,
        instance=instance,
        seed=spec.seed,
        repetition=spec.repetition,
        status=status,
        **values,
    )


def run_cell(config: ExperimentConfig, spec: CellSpec) -> CellResult:
    """Run one cell; any failure becomes a failed row."""
    start = time.perf_counter()
    try:
        result = CELL_RUNNERS[config.kind](config, spec)
    except Exception as e:
        logger.error(f"Cell {spec} failed: {e}")
        result = _row(spec, status="failed", error=f"{type(e).__name__}: {e}")
    if config.timing:
        result.seconds = time.perf_counter() - start
    return result


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Run every cell of the sweep, in parallel when config.workers > 1, keeping declared order."""
    specs = list(iter_cells(config))
    logger.info(f"Running {config.kind} sweep with {len(specs)} cells on {config.workers} worker(s)")
    if config.workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            cells = list(pool.map(run_cell, itertools.repeat(config), specs))
    else:
        cells = [run_cell(config, spec) for spec in specs]
    result = SweepResult(kind=config.kind, version=config_version(config), config=config, cells=cells)
    result.fit = fit_scaling(result)
    failed = sum(cell.status == "failed" for cell in cells)
    logger.info(f"Sweep finished: {len(cells) - failed} ok, {failed} failed")
    return result


def _slope(x: np.ndarray, y: np.ndarray) -> float | None:
    if np.unique(x).size < 2:
        return None
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def fit_scaling(result: SweepResult) -> list[FitRow]:
    """Log-log slopes of query_total against d and against 2^n, per mode."""
    rows = []
    for mode in dict.fromkeys(cell.mode for cell in result.cells):
        usable = [c for c in result.cells if c.mode == mode and c.status == "ok" and c.query_total]
        if len(usable) < 2:
            continue
        log_q = np.log([c.query_total for c in usable])
        for axis, xs in (("d", [math.log(c.d) for c in usable]), ("2^n", [c.n * math.log(2.0) for c in usable])):
            slope = _slope(np.asarray(xs), log_q)
            if slope is not None:
                rows.append(FitRow(mode=mode, axis=axis, slope=slope, points=len(usable)))
    return rows


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT.format(value)
    return str(value)


def results_csv(cells: list[CellResult]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for cell in cells:
        writer.writerow([_format(getattr(cell, column)) for column in CSV_COLUMNS])
    return buffer.getvalue()


def fit_csv(rows: list[FitRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["mode", "axis", "slope", "points"])
    for row in rows:
        writer.writerow([row.mode, row.axis, _format(row.slope), row.points])
    return buffer.getvalue()


def write_results(result: SweepResult, out_dir: str | Path) -> dict[str, Path]:
    """Write results.csv, fit.csv and manifest.json into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"results": out / "results.csv", "fit": out / "fit.csv", "manifest": out / "manifest.json"}
    paths["results"].write_text(results_csv(result.cells), encoding="utf-8")
    paths["fit"].write_text(fit_csv(result.fit), encoding="utf-8")
    manifest = {
        "version": result.version,
        "kind": result.kind,
        "status": result.status,
        "cells": len(result.cells),
        "failed": [i for i, cell in enumerate(result.cells) if cell.status == "failed"],
        "config": result.config.model_dump(mode="json"),
        "files": sorted(path.name for key, path in paths.items() if key != "manifest"),
    }
    paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote sweep results to {out}")
    return paths


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))
