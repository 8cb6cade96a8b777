"""Command-line entry point: ``mioracle <command> ...``.

Exit codes: 0 on success, 1 when a sweep recorded failed cells, 2 on a domain error.
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from pydantic import BaseModel

from app.config.env_settings import settings
from app.config.logging_settings import configure_logging
from app.core.adversary.families import check_game_family, ny_hard_family
from app.core.adversary.game import STRATEGIES, make_strategy, measure_hardness, play_mi_game
from app.core.catalog import load_family, load_instance
from app.core.centerpoint import CenterpointStrategy, OracleMode, SolverConfig, solve
from app.core.exceptions import MioracleError, StructuralError
from app.core.experiments import load_config, run_sweep, write_results
from app.core.halving import halving_report, shifted_family
from app.core.inexact.robustify import robustify
from app.core.instances import Instance, InstanceParams
from app.core.oracles import Transcript

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CELLS = 1
EXIT_ERROR = 2

WRAPPED: dict[str, Callable[[InstanceParams, SolverConfig], CenterpointStrategy]] = {
    CenterpointStrategy.name: CenterpointStrategy,
}


def _emit(report: BaseModel, out: str | None = None) -> None:
    text = report.model_dump_json(indent=2) + "\n"
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote report to {path}")
    sys.stdout.write(text)


def _load_family(path: str) -> list[Instance]:
    """A directory of instance files, or one instance file."""
    return load_family(path) if Path(path).is_dir() else [load_instance(path)]


def _noise(text: str) -> tuple[float, float]:
    parts = text.split(",")
    try:
        values = [float(part) for part in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"noise must be eta_f,eta_g; got {text!r}") from None
    if len(values) == 1:
        values *= 2
    if len(values) != 2 or min(values) < 0:
        raise argparse.ArgumentTypeError(f"noise must be two non-negative numbers; got {text!r}")
    return values[0], values[1]


def _solver_config(args: argparse.Namespace, mode: str = "exact") -> SolverConfig:
    return SolverConfig(
        eps=args.eps,
        mode=mode,
        seed=settings.DEFAULT_SEED if args.seed is None else args.seed,
        max_iterations=args.max_iterations,
        centerpoint_samples=args.samples or settings.CENTERPOINT_SAMPLES,
        centerpoint_directions=settings.CENTERPOINT_DIRECTIONS,
    )


def cmd_solve(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    transcript = Transcript() if args.transcript else None
    report = solve(inst, _solver_config(args, args.mode), transcript=transcript)
    if transcript is not None:
        transcript.write(args.transcript)
    _emit(report, args.out)
    return EXIT_OK


def cmd_game(args: argparse.Namespace) -> int:
    if args.family:
        family = check_game_family(_load_family(args.family), args.eps)
        d, R = family[0].d, family[0].params.R
    else:
        family = ny_hard_family(args.d, args.M, args.R, args.eps, args.k)
        d, R = args.d, args.R
    measured = None
    if args.measure:
        measured = measure_hardness(family, args.eps, seeds=tuple(range(args.measure_seeds)), max_rounds=args.max_rounds)
        logger.info(f"Measured continuous hardness: {measured} rounds")
    strategy = make_strategy(args.strategy, args.n, d, R, args.seed)
    report = play_mi_game(
        family,
        args.n,
        args.eps,
        strategy,
        args.max_rounds,
        measured_ell=measured,
        audit_samples=args.audit_samples,
        seed=args.seed,
    )
    _emit(report, args.out)
    return EXIT_OK


def cmd_halving(args: argparse.Namespace) -> int:
    seed = settings.DEFAULT_SEED if args.seed is None else args.seed
    if args.family:
        family = load_family(args.family)
    else:
        family = shifted_family(args.size, args.eps, seed, d=args.d, n=args.n)
    label = args.true or family[0].label
    true_instance = next((inst for inst in family if inst.label == label), None)
    if true_instance is None:
        raise StructuralError(f"no family member is labelled {label!r}")
    transcript = Transcript() if args.transcript else None
    wrapped = WRAPPED[args.wrapped](family[0].params, _solver_config(args))
    report = halving_report(family, true_instance, wrapped, args.eps, transcript)
    if transcript is not None:
        transcript.write(args.transcript)
    _emit(report, args.out)
    return EXIT_OK


def cmd_robustify(args: argparse.Namespace) -> int:
    eta_f, eta_g = args.noise
    report = robustify(
        load_instance(args.instance),
        eta_f,
        eta_g,
        algo=args.algo,
        rounds=args.rounds,
        seed=settings.DEFAULT_SEED if args.seed is None else args.seed,
        projection_points=args.projection_points,
    )
    _emit(report, args.out)
    return EXIT_OK


def cmd_experiments_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.workers is not None:
        config = config.model_copy(update={"workers": args.workers})
    result = run_sweep(config)
    paths = write_results(result, args.out or settings.RESULTS_DIR)
    if args.record:
        # Imported lazily so that sweeps without --record never touch the database.
        from app.config.db_settings import Base, SessionLocal, engine
        from app.repositories.runs_repository import RunsRepository

        Base.metadata.create_all(bind=engine)
        with SessionLocal() as db:
            stored = RunsRepository(db).create(result)
        logger.info(f"Recorded run {stored.id}")
    sys.stdout.write(f"{result.status}: {len(result.cells)} cells written to {paths['results'].parent}\n")
    return EXIT_OK if result.status == "ok" else EXIT_FAILED_CELLS


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port, reload=args.reload)
    return EXIT_OK


def _add_solver_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eps", type=float, default=0.05, help="target accuracy")
    parser.add_argument("--seed", type=int, default=None, help="sampling seed (default DEFAULT_SEED)")
    parser.add_argument("--max-iterations", type=int, default=None, help="iteration cap below the computed budget")
    parser.add_argument("--samples", type=int, default=None, help="centerpoint samples per iteration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mioracle", description="Oracle-based mixed-integer convex optimization")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level (default LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    solve_parser = commands.add_parser("solve", help="run the centerpoint solver on an instance file")
    solve_parser.add_argument("--instance", required=True, help="instance JSON file")
    solve_parser.add_argument("--mode", choices=[mode.value for mode in OracleMode], default="exact")
    solve_parser.add_argument("--transcript", help="write the query log as JSON lines")
    solve_parser.add_argument("--out", help="also write the report JSON here")
    _add_solver_options(solve_parser)
    solve_parser.set_defaults(handler=cmd_solve)

    game_parser = commands.add_parser("game", help="play a strategy against the mixed-integer adversary")
    game_parser.add_argument("--family", help="instance JSON file or directory (default: built-in hard family)")
    game_parser.add_argument("--n", type=int, default=1, help="integer dimension")
    game_parser.add_argument("--d", type=int, default=1, help="continuous dimension")
    game_parser.add_argument("--k", type=int, default=8, help="family size")
    game_parser.add_argument("--M", type=float, default=1.0, help="Lipschitz constant")
    game_parser.add_argument("--R", type=float, default=1.0, help="box half-width")
    game_parser.add_argument("--eps", type=float, default=0.04)
    game_parser.add_argument("--strategy", choices=sorted(STRATEGIES), default="bisect")
    game_parser.add_argument("--seed", type=int, default=0)
    game_parser.add_argument("--max-rounds", type=int, default=200)
    game_parser.add_argument("--audit-samples", type=int, default=100)
    game_parser.add_argument("--measure", action="store_true", help="measure continuous hardness first")
    game_parser.add_argument("--measure-seeds", type=int, default=5, help="random-strategy seeds when measuring")
    game_parser.add_argument("--out", help="also write the report JSON here")
    game_parser.set_defaults(handler=cmd_game)

    halving_parser = commands.add_parser("halving", help="solve over a finite family with binary queries")
    halving_parser.add_argument("--family", help="directory of instance JSON files (default: shifted family)")
    halving_parser.add_argument("--true", help="label of the hidden instance (default: first member)")
    halving_parser.add_argument("--size", type=int, default=16, help="shifted family size")
    halving_parser.add_argument("--n", type=int, default=0)
    halving_parser.add_argument("--d", type=int, default=1)
    halving_parser.add_argument("--transcript", help="write the binary-query log as JSON lines")
    halving_parser.add_argument("--wrapped", choices=sorted(WRAPPED), default=CenterpointStrategy.name)
    halving_parser.add_argument("--out", help="also write the report JSON here")
    _add_solver_options(halving_parser)
    halving_parser.set_defaults(handler=cmd_halving)

    robust_parser = commands.add_parser("robustify", help="run an exact strategy against a noisy oracle")
    robust_parser.add_argument("--instance", required=True, help="instance JSON file")
    robust_parser.add_argument("--noise", type=_noise, default=(1e-3, 1e-3), help="eta_f,eta_g")
    robust_parser.add_argument("--algo", choices=["subgradient", "centerpoint"], default="subgradient")
    robust_parser.add_argument("--rounds", type=int, default=100)
    robust_parser.add_argument("--seed", type=int, default=None)
    robust_parser.add_argument("--projection-points", type=int, default=0, help="points for the projection audit")
    robust_parser.add_argument("--out", help="also write the report JSON here")
    robust_parser.set_defaults(handler=cmd_robustify)

    experiments_parser = commands.add_parser("experiments", help="batch sweeps")
    experiment_commands = experiments_parser.add_subparsers(dest="experiments_command", required=True)
    run_parser = experiment_commands.add_parser("run", help="run a sweep from a JSON config")
    run_parser.add_argument("--config", required=True, help="sweep configuration JSON")
    run_parser.add_argument("--out", default=None, help="output directory (default RESULTS_DIR)")
    run_parser.add_argument("--workers", type=int, default=None, help="override the configured worker count")
    run_parser.add_argument("--record", action="store_true", help="store the run in DATABASE_URL")
    run_parser.set_defaults(handler=cmd_experiments_run)

    serve_parser = commands.add_parser("serve", help="run the HTTP service")
    serve_parser.add_argument("--host", default="127.0.0.1")
    serve_parser.add_argument("--port", type=int, default=8000)
    serve_parser.add_argument("--reload", action="store_true")
    serve_parser.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except MioracleError as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return EXIT_ERROR
    except (OSError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
