# main.py

import argparse
import logging
import os
import sys
from fractions import Fraction
from typing import Optional

import uvicorn

from numerics import NumericMode, format_scalar
from learners import LearnerConfig, LearnerKind
from recovery import decode_matrix, encode_probe
from bounds import theoretical_bounds
from harness import (
    ExperimentConfig, OracleKind, bounds_table, default_eps_values, emit_curves, run_experiment, verify_suite,
)
from formats import load_alphabet, load_matrix
from config import (
    ConfigError, as_fraction, as_int, as_mode, default_mode, default_output_dir, default_seed,
    default_upper_c, load_config_file, log_level, resolve,
)

logger = logging.getLogger(__name__)

# Типові горизонти, якщо не задано ні прапорцем, ні у файлі
DEFAULT_HORIZON = {
    LearnerKind.UNIFORM: 0,
    LearnerKind.TWO_QUERY: 2,
    LearnerKind.BASIS_RECOVERY: 0,
    LearnerKind.FICTITIOUS_PLAY: 256,
    LearnerKind.OPTIMISTIC_MWU: 256,
    LearnerKind.PROBE_DECODE: 1,
    LearnerKind.RANDOM_QUERY: 16,
}


def _learner_config(args, values: dict, default_T: Optional[int] = None) -> LearnerConfig:
    try:
        kind = LearnerKind(resolve("learner.kind", args.learner, values, LearnerKind.OPTIMISTIC_MWU.value))
    except ValueError:
        raise ConfigError(f"learner.kind: невідомий вид {args.learner or values.get('learner.kind')!r}")
    fallback = default_T if default_T is not None else DEFAULT_HORIZON[kind]
    horizon = as_int("learner.T", resolve("learner.T", args.T, values, fallback))
    eta = as_fraction("learner.eta", resolve("learner.eta", args.eta, values, "1/4"))
    seed = as_int("learner.seed", resolve("learner.seed", args.seed, values, default_seed()))
    alphabet = load_alphabet(args.alphabet) if getattr(args, "alphabet", None) else None
    try:
        return LearnerConfig(kind=kind, horizon=horizon, eta=eta, seed=seed,
                             allow_partial=getattr(args, "allow_partial", False), alphabet=alphabet)
    except ValueError as e:
        raise ConfigError(str(e))


def _finish(records, args, values: dict, c) -> int:
    for record in records:
        print(
            f"повторення {record.repetition}: запитів {record.queries_used}, "
            f"розрив {format_scalar(record.gap)} (≈ {float(record.gap):.6g})"
        )
    output_dir = resolve("output.dir", args.output_dir, values, None)
    if output_dir:
        emit_curves(records, output_dir, c=c)
    return 0


def cmd_solve(args) -> int:
    values = load_config_file(args.config)
    mode = as_mode("mode", resolve("mode", args.mode, values, default_mode().value))
    matrix_path = resolve("oracle.matrix", args.matrix, values, None)
    matrix = load_matrix(matrix_path, mode) if matrix_path else None
    if matrix is None and args.k is None and "game.K" not in values:
        raise ConfigError("Потрібна матриця (--matrix) або розмір K (--k)")
    K = matrix.K if matrix is not None else as_int("game.K", resolve("game.K", args.k, values, None))
    c = as_fraction("bounds.c", resolve("bounds.c", args.c, values, default_upper_c()))
    config = ExperimentConfig(
        oracle=OracleKind.FIXED,
        learner=_learner_config(args, values),
        K=K,
        mode=mode,
        repetitions=as_int("repetitions", resolve("repetitions", args.repetitions, values, 1)),
        matrix=matrix,
        seed=as_int("learner.seed", resolve("learner.seed", args.seed, values, default_seed())),
        output_dir=resolve("output.dir", args.output_dir, values, None),
        upper_c=c,
    )
    return _finish(run_experiment(config), args, values, c)


def cmd_adversary(args) -> int:
    values = load_config_file(args.config)
    case = resolve("oracle.kind", args.case, values, "exact")
    oracle = OracleKind.APPROX_ADVERSARY if case in ("approx", OracleKind.APPROX_ADVERSARY.value) \
        else OracleKind.EXACT_ADVERSARY
    K = as_int("game.K", resolve("game.K", args.k, values, 16))
    horizon = resolve("oracle.T", args.horizon, values, None)
    horizon = as_int("oracle.T", horizon) if horizon is not None else None
    if horizon is None:
        horizon = (K - 2) // 2 if oracle == OracleKind.EXACT_ADVERSARY else max(1, (K - 3) // 2)
    c = as_fraction("bounds.c", resolve("bounds.c", args.c, values, default_upper_c()))
    config = ExperimentConfig(
        oracle=oracle,
        learner=_learner_config(args, values, default_T=horizon),
        K=K,
        mode=NumericMode.EXACT,
        repetitions=as_int("repetitions", resolve("repetitions", args.repetitions, values, 1)),
        oracle_T=horizon,
        seed=as_int("learner.seed", resolve("learner.seed", args.seed, values, default_seed())),
        output_dir=resolve("output.dir", args.output_dir, values, None),
        upper_c=c,
    )
    records = run_experiment(config)
    for record in records:
        if record.trace:
            last = record.trace[-1]
            print(f"повторення {record.repetition}: потенціал {last['potential']}, зсув {last['drift']}, "
                  f"свідок {record.witness_side}")
    return _finish(records, args, values, c)


def cmd_recover(args) -> int:
    alphabet = load_alphabet(args.alphabet)
    M = load_matrix(args.matrix, NumericMode.EXACT)
    K = args.k or M.K
    if K != M.K:
        raise ConfigError(f"--k {K} не відповідає матриці {M.K}×{M.K}")
    probe = encode_probe(alphabet, K)
    observed = M.matrix.tmul_vec(probe.weights)
    print("probe:", " ".join(probe.to_strings()))
    print("observation:", " ".join(observed.to_strings()))
    decoded = decode_matrix(alphabet, K, observed)
    print("decoded:")
    for row in decoded.matrix.to_strings():
        print("  " + " ".join(row))
    if decoded.matrix != M.matrix:
        logger.error("Декодована матриця не збігається з вихідною")
        return 2
    return 0


def cmd_bounds(args) -> int:
    c = Fraction(args.c) if args.c is not None else default_upper_c()
    if args.T is not None:
        record = theoretical_bounds(args.k, T=args.T, c=c)
        print(f"K={record.K}, T={record.T}: lower_eps = {format_scalar(record.lower_eps)} "
              f"(≈ {float(record.lower_eps):.6g}), exact_lower_T = {record.exact_lower_T}")
    eps_values = [Fraction(e) for e in args.eps] if args.eps else default_eps_values()
    table = bounds_table(args.k, eps_values, c)
    print(table.to_string(index=False))
    output_dir = args.output_dir or default_output_dir()
    if args.write:
        os.makedirs(output_dir, exist_ok=True)
        path = os.path.join(output_dir, "bounds.csv")
        table.to_csv(path, index=False)
        logger.info(f"Записано {path}")
    return 0


def cmd_verify(args) -> int:
    results = verify_suite(quick=not args.full)
    for result in results:
        print(f"{'OK  ' if result.passed else 'FAIL'} {result.name}: {result.detail}")
    return 0 if all(r.passed for r in results) else 2


def cmd_serve(args) -> int:
    uvicorn.run("oracle_api:app", host=args.host, port=args.port)
    return 0


def _add_learner_options(parser: argparse.ArgumentParser):
    parser.add_argument("--learner", choices=[k.value for k in LearnerKind])
    parser.add_argument("--T", type=int, help="горизонт навчання")
    parser.add_argument("--eta", help="крок оптимістичних ваг (раціональне число)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--repetitions", type=int)
    parser.add_argument("--config", help="файл key=value")
    parser.add_argument("--output-dir")
    parser.add_argument("--c", help="константа верхньої межі для кривих")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matrix-query", description="Запити першого порядку в матричних іграх")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="фіксована матриця + стратегія навчання")
    solve.add_argument("--matrix", help="JSON-файл матриці")
    solve.add_argument("--k", type=int)
    solve.add_argument("--mode", choices=[m.value for m in NumericMode])
    solve.add_argument("--alphabet", help="JSON-файл алфавіту (probe_decode)")
    _add_learner_options(solve)
    solve.set_defaults(handler=cmd_solve)

    adversary = sub.add_parser("adversary", help="адаптивний супротивник")
    adversary.add_argument("--case", choices=["exact", "approx"])
    adversary.add_argument("--k", type=int)
    adversary.add_argument("--horizon", type=int, help="горизонт супротивника")
    adversary.add_argument("--allow-partial", action="store_true")
    _add_learner_options(adversary)
    adversary.set_defaults(handler=cmd_adversary)

    recover = sub.add_parser("recover", help="декодування матриці з одного запиту")
    recover.add_argument("--alphabet", required=True)
    recover.add_argument("--k", type=int)
    recover.add_argument("--matrix", required=True)
    recover.set_defaults(handler=cmd_recover)

    bounds = sub.add_parser("bounds", help="теоретичні межі")
    bounds.add_argument("--k", type=int, required=True)
    bounds.add_argument("--T", type=int)
    bounds.add_argument("--eps", nargs="*")
    bounds.add_argument("--c")
    bounds.add_argument("--output-dir")
    bounds.add_argument("--write", action="store_true")
    bounds.set_defaults(handler=cmd_bounds)

    verify = sub.add_parser("verify", help="набір перевірок властивостей")
    verify.add_argument("--full", action="store_true")
    verify.set_defaults(handler=cmd_verify)

    serve = sub.add_parser("serve", help="HTTP-оракул")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(handler=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        logging.basicConfig(level=log_level(), stream=sys.stdout)
        return args.handler(args)
    except (ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
