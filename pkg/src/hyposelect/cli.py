#!/usr/bin/env python3

import argparse
import json
import math
import sys
from typing import Any

from .logging_config import get_logger, setup_logging
from .paths import default_bench_csv, ensure_user_directories

logger = get_logger(__name__)

ALGORITHM_CHOICES = ("yatracos", "basic", "refined", "select")
PLAYER_CHOICES = ("max-entropy", "arbitrary")
ADVERSARY_CHOICES = ("greedy", "random", "primal-induced")


def _overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    """Collect non-None CLI config overrides keyed by their config name."""
    algo = getattr(args, "algo", None)
    mapping: dict[str, Any] = {
        "eps": getattr(args, "eps", None),
        "delta": getattr(args, "delta", None),
        "oracle_mode": getattr(args, "mode", None),
        "n": getattr(args, "n", None),
        "domain_size": getattr(args, "domain_size", None),
        "instance_kind": getattr(args, "kind", None),
        "trials": getattr(args, "trials", None),
        "workers": getattr(args, "workers", None),
        "algorithms": list(algo) if isinstance(algo, list) else None,
    }
    if getattr(args, "no_wall_time", False):
        mapping["record_wall_time"] = False
    return {k: v for k, v in mapping.items() if v is not None}


def _load_config(args: argparse.Namespace) -> dict[str, Any]:
    from .config import load_app_config
    from .validation import validate_json_config

    config = load_app_config(getattr(args, "config", None))
    config.update(validate_json_config(_overrides_from_args(args)))
    return config


def _run_select(args: argparse.Namespace) -> int:
    from .distributions import tv_distance
    from .experiments import SELECTORS
    from .instances import brute_force_opt, generate_instance, load_instance
    from .reports import build_run_report, write_report
    from .sampling import SampleOracle
    from .selectors import RefinedParams, SelectionTrace

    config = _load_config(args)
    if args.instance:
        Q, p = load_instance(args.instance)
    else:
        Q, p = generate_instance(
            args.seed, config["n"], config["domain_size"], config["instance_kind"]
        )
    oracle = SampleOracle(p, args.seed, config["oracle_mode"])
    trace = SelectionTrace()
    errors: list[str] = []
    output = None
    try:
        output = SELECTORS[args.algo](
            Q, oracle, config["eps"], config["delta"], RefinedParams.from_config(config), trace
        )
    except Exception as e:
        logger.error(f"{args.algo} failed: {type(e).__name__}: {e}")
        errors.append(f"{type(e).__name__}: {e}")

    opt = brute_force_opt(p, Q)
    tv_out = tv_distance(output, p) if output is not None else None
    report = build_run_report(
        algorithm=args.algo,
        samples_drawn=oracle.samples_drawn,
        exact_queries=oracle.exact_queries,
        output=output,
        trace=trace,
        tv_out=tv_out,
        opt=opt,
        errors=errors,
    )
    if not args.no_report:
        write_report(report)
    if args.out:
        with open(args.out, "w") as f:
            json.dump(report, f, indent=2, sort_keys=True)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if output is not None else 1


def _run_game(args: argparse.Namespace) -> int:
    from .games import (
        MaxEntropyDualPlayer,
        PrimalInducedAdversary,
        RandomDirectionAdversary,
        arbitrary_test_player,
        dual_round_bound,
        greedy_diameter_adversary,
        run_dual_game,
        serialize_dual_transcript,
    )
    from .instances import generate_instance
    from .sampling import OracleMode, SampleOracle

    eps = args.eps if args.eps is not None else 0.5
    if eps <= 0:
        logger.error(f"--eps must be positive, got {eps}")
        return 1
    player = MaxEntropyDualPlayer() if args.player == "max-entropy" else arbitrary_test_player
    if args.adversary == "greedy":
        adversary: Any = greedy_diameter_adversary
        game_eps = eps
    elif args.adversary == "random":
        adversary = RandomDirectionAdversary(args.seed)
        game_eps = eps
    else:
        if not 0 < eps < 1:
            logger.error(f"--eps must lie in (0, 1) for primal-induced cuts, got {eps}")
            return 1
        Q, p = generate_instance(args.seed, args.n, args.domain_size, "random-dirichlet")
        oracle = SampleOracle(p, args.seed, OracleMode.EXACT)
        adversary = PrimalInducedAdversary(Q, oracle, eps)
        game_eps = eps / 4

    bound = dual_round_bound(args.n, game_eps) if args.n >= 2 else 1
    max_rounds = args.max_rounds or max(bound, 4 * args.n) + 1
    transcript = run_dual_game(args.n, game_eps, player, adversary, max_rounds)
    print(
        f"rounds={transcript.rounds} emptied={transcript.emptied} "
        f"bound={bound} radius={game_eps:.6g}"
    )
    if args.out:
        with open(args.out, "w") as f:
            f.write(serialize_dual_transcript(transcript))
        logger.info(f"Transcript written to {args.out}")
    return 0


def _run_bench(args: argparse.Namespace) -> int:
    from .experiments import ExperimentConfig, run_experiment

    config = _load_config(args)
    experiment = ExperimentConfig.from_config(config, master_seed=args.seed)
    out = args.out or str(default_bench_csv(config["results_dir"], args.seed))
    records = run_experiment(experiment, out)
    errors = [record for record in records if record.status != "ok"]
    misses = [record for record in records if not record.guarantee_ok]
    print(f"runs={len(records)} errors={len(errors)} guarantee_misses={len(misses)} csv={out}")
    return 1 if errors else 0


def _run_check(args: argparse.Namespace) -> int:
    from dataclasses import asdict

    from .checks import run_checks
    from .selectors import RefinedParams

    config = _load_config(args)
    eps = args.eps if args.eps is not None else 0.25
    results = run_checks(
        seed=args.seed, count=args.count, eps=eps, params=RefinedParams.from_config(config)
    )
    for result in results:
        status = "pass" if result.passed else "FAIL"
        print(f"{result.name}: {status} {result.detail}".rstrip())
    if args.out:
        with open(args.out, "w") as f:
            json.dump([asdict(result) for result in results], f, indent=2)
        logger.info(f"Check results written to {args.out}")
    return 0 if all(result.passed for result in results) else 1


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0 < value < 1 or math.isnan(value):
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="hyposelect - agnostic hypothesis selection over finite domains"
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Enable verbose (DEBUG) logging"
    )
    parser.add_argument(
        "-q", "--quiet", action="store_true", help="Suppress all but ERROR messages"
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--seed", type=int, default=0, help="Master seed (default: 0)")
        sub.add_argument("--config", help="Extra JSON config layer, highest precedence")
        sub.add_argument("--out", help="Output path")

    select_parser = subparsers.add_parser("select", help="Run one selector on one instance")
    add_common(select_parser)
    select_parser.add_argument("--algo", choices=ALGORITHM_CHOICES, default="select")
    select_parser.add_argument("--eps", type=_unit_interval, help="Accuracy (default: config)")
    select_parser.add_argument("--delta", type=_unit_interval, help="Failure probability")
    select_parser.add_argument("--mode", choices=("sampled", "exact"), help="Oracle mode")
    select_parser.add_argument("--instance", help="Instance JSON file (default: generate one)")
    select_parser.add_argument("--n", type=_positive_int, help="Hypotheses to generate")
    select_parser.add_argument("--domain-size", type=int, help="Domain size to generate")
    select_parser.add_argument(
        "--kind",
        choices=("random-dirichlet", "adversarial-corners", "near-realizable"),
        help="Generated instance kind",
    )
    select_parser.add_argument(
        "--no-report", action="store_true", help="Skip writing the run report"
    )

    game_parser = subparsers.add_parser("game", help="Simulate the cutting-with-margin game")
    add_common(game_parser)
    game_parser.add_argument("--n", type=_positive_int, default=4, help="Dimension (default: 4)")
    game_parser.add_argument("--eps", type=float, help="Ball radius (default: 0.5)")
    game_parser.add_argument("--player", choices=PLAYER_CHOICES, default="max-entropy")
    game_parser.add_argument("--adversary", choices=ADVERSARY_CHOICES, default="greedy")
    game_parser.add_argument("--max-rounds", type=_positive_int, help="Round cap")
    game_parser.add_argument(
        "--domain-size", type=int, default=8, help="Domain size for primal-induced cuts"
    )

    bench_parser = subparsers.add_parser("bench", help="Run an experiment grid to CSV")
    add_common(bench_parser)
    bench_parser.add_argument(
        "--algo", choices=ALGORITHM_CHOICES, action="append", help="Repeat to run several"
    )
    bench_parser.add_argument("--eps", type=_unit_interval)
    bench_parser.add_argument("--delta", type=_unit_interval)
    bench_parser.add_argument("--mode", choices=("sampled", "exact"))
    bench_parser.add_argument("--trials", type=_positive_int)
    bench_parser.add_argument("--n", type=_positive_int)
    bench_parser.add_argument("--domain-size", type=int)
    bench_parser.add_argument(
        "--kind", choices=("random-dirichlet", "adversarial-corners", "near-realizable")
    )
    bench_parser.add_argument("--workers", type=_positive_int)
    bench_parser.add_argument(
        "--no-wall-time", action="store_true", help="Write 0 wall times for byte-identical CSVs"
    )

    check_parser = subparsers.add_parser("check", help="Run the invariant suite")
    add_common(check_parser)
    check_parser.add_argument("--count", type=_positive_int, default=20)
    check_parser.add_argument("--eps", type=_unit_interval, help="Margin used by the checks")

    return parser


def main(argv: list[str] | None = None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Create user directories on first real invocation (not at import time).
    ensure_user_directories()
    setup_logging(verbose=args.verbose, quiet=args.quiet)

    handlers = {
        "select": _run_select,
        "game": _run_game,
        "bench": _run_bench,
        "check": _run_check,
    }
    if args.command not in handlers:
        parser.print_help()
        sys.exit(1)
    try:
        sys.exit(handlers[args.command](args))
    except (ValueError, OSError) as e:
        logger.error(str(e))
        sys.exit(1)


if __name__ == "__main__":
    main()
