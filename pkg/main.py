"""
命令行入口
det / verify / map / enumerate / bench 五个子命令。
结果写到标准输出，诊断信息写到标准错误；退出码见 exceptions.exit_code_for。
"""
import argparse
import json
import sys
import time
import uuid
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from bijection import (
    check_enumeration_bound, classify, map_S, map_T, map_T_inverse, map_trace_to_json, verify_alice_formal,
    verify_alice_numeric
)
from condensation import (
    METHODS, condensation_trace_to_json, evaluate_det, gen_matrix, parse_matrix_text
)
from config import config
from exceptions import (
    EXIT_OK, EXIT_VERIFICATION_FAILED, ErrorCode, InternalConsistencyException, ParseException, SizeGuardException,
    error_reporter, exit_code_for, handle_exception
)
from logging_config import logger
from matchings import PairingClass, enumerate_class, pairing_from_json, pairing_to_json, pairing_weight, weight_to_json
from monitoring import PerformanceMonitor, get_performance_report
from scalars import format_scalar

BENCH_COLUMNS = ["n", "seed", "method", "wall_time", "repairs", "fallbacks", "digest"]


class CliConfig(BaseModel):
    """解析后的命令行参数；数值参数在这里统一校验"""
    model_config = ConfigDict(extra="ignore")

    command: Literal["det", "verify", "map", "enumerate", "bench"]

    # det
    matrix: Optional[str] = None
    method: Literal["condensation", "bareiss", "leibniz"] = "condensation"
    retries: Optional[int] = Field(default=None, ge=0)
    trace: Optional[str] = None

    # verify / enumerate
    n: Optional[int] = Field(default=None, ge=1)
    formal: bool = False
    random: Optional[int] = Field(default=None, ge=1)
    bound: int = Field(default=9, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)
    pairing_class: Optional[Literal["A", "B", "C"]] = None
    output_format: Literal["json", "table"] = "table"
    only_bad: bool = False

    # map
    op: Optional[Literal["T", "Tinv", "S"]] = None
    input: str = "-"

    # bench
    sizes: List[int] = Field(default_factory=list)
    methods: List[Literal["condensation", "bareiss", "leibniz"]] = Field(default_factory=list)
    entry_bits: int = Field(default=8, ge=1, le=256)
    corpus: Literal["random", "singular-interior"] = "random"
    trials: int = Field(default=1, ge=1)
    out: Optional[str] = None

    seed: int = Field(default_factory=lambda: config.SEED, ge=0)


def _comma_list(item_type: Callable):
    def parse(text: str) -> list:
        try:
            return [item_type(part.strip()) for part in text.split(",") if part.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid comma-separated list: {text!r}")
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dodgson",
        description="Exact determinants by Dodgson condensation and a bijective check of the identity behind it.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    det = subparsers.add_parser("det", help="evaluate an exact determinant")
    det.add_argument("matrix", help="matrix text file, or - for standard input")
    det.add_argument("--method", choices=METHODS, default="condensation")
    det.add_argument("--retries", type=int, default=None, help="repair attempts before falling back to Bareiss")
    det.add_argument("--seed", type=int, default=None)
    det.add_argument("--trace", default=None, help="write a JSON trace to this path")

    verify = subparsers.add_parser("verify", help="verify the condensation identity")
    verify.add_argument("--n", type=int, required=True)
    mode = verify.add_mutually_exclusive_group(required=True)
    mode.add_argument("--formal", action="store_true", help="exact polynomial check by enumeration")
    mode.add_argument("--random", type=int, metavar="TRIALS", help="numeric check on seeded random matrices")
    verify.add_argument("--bound", type=int, default=9, help="entry bound for random matrices")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--workers", type=int, default=None)

    mapper = subparsers.add_parser("map", help="apply T, its inverse, or S to a pairing")
    mapper.add_argument("--op", choices=("T", "Tinv", "S"), required=True)
    mapper.add_argument("--input", default="-", help="pairing or trace JSON file, or - for standard input")

    enum = subparsers.add_parser("enumerate", help="list a class of pairings")
    enum.add_argument("--n", type=int, required=True)
    enum.add_argument("--class", dest="pairing_class", choices=("A", "B", "C"), required=True)
    enum.add_argument("--format", dest="output_format", choices=("json", "table"), default="table")
    enum.add_argument("--only-bad", action="store_true")

    bench = subparsers.add_parser("bench", help="time determinant methods on seeded matrices")
    bench.add_argument("--sizes", type=_comma_list(int), required=True)
    bench.add_argument("--methods", type=_comma_list(str), default=["condensation", "bareiss"])
    bench.add_argument("--entry-bits", type=int, default=8)
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--corpus", choices=("random", "singular-interior"), default="random")
    bench.add_argument("--trials", type=int, default=1)
    bench.add_argument("--out", default=None, help="CSV path; standard output when omitted")

    return parser


def build_cli_config(args: argparse.Namespace) -> CliConfig:
    raw = {k: v for k, v in vars(args).items() if v is not None}
    try:
        return CliConfig.model_validate(raw)
    except ValidationError as e:
        problems = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ParseException(f"Invalid arguments: {'; '.join(problems)}", ErrorCode.PARSE_ERROR,
                             details={"problems": problems})


def _read_text(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    return Path(source).read_text(encoding="utf-8")


def _print_json(payload) -> None:
    print(json.dumps(payload, ensure_ascii=False, indent=2))


def cmd_det(cfg: CliConfig) -> int:
    M = parse_matrix_text(_read_text(cfg.matrix))
    result = evaluate_det(M, cfg.method, retries=cfg.retries, seed=cfg.seed)
    print(format_scalar(result.value))

    if cfg.trace:
        if result.trace is not None:
            payload = condensation_trace_to_json(result.trace, result.value)
        else:
            payload = {"determinant": format_scalar(result.value)}
        payload = {"method": result.method, **payload}
        Path(cfg.trace).write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_verify(cfg: CliConfig) -> int:
    if cfg.n < 2:
        raise SizeGuardException(f"n must be ≥ 2, got {cfg.n}", details={"n": cfg.n})

    if cfg.formal:
        report = verify_alice_formal(cfg.n, workers=cfg.workers)
        print(report.summary())
        print(f"terms: lhs={report.lhs_terms} rhs={report.rhs_terms}")
        passed = report.passed
    else:
        failures = []
        for trial in range(cfg.random):
            M = gen_matrix("random", cfg.n, bound=cfg.bound, seed=cfg.seed + trial)
            numeric = verify_alice_numeric(M)
            if not numeric.passed:
                failures.append(trial)
        print(f"n={cfg.n} trials={cfg.random} failed={len(failures)}")
        passed = not failures

    print("PASS" if passed else "FAIL")
    if not passed:
        raise InternalConsistencyException(
            f"Identity violated for n={cfg.n}",
            ErrorCode.IDENTITY_VIOLATION,
            details={"n": cfg.n},
        )
    return EXIT_OK


def _load_pairing(text: str):
    data = json.loads(text)
    # 允许直接接上一步 map 的输出
    if isinstance(data, dict) and "output" in data and "input" in data:
        data = data["output"]
    return pairing_from_json(data)


def cmd_map(cfg: CliConfig) -> int:
    pairing = _load_pairing(_read_text(cfg.input))
    if cfg.op == "T":
        output, chain = map_T(pairing)
    else:
        chain = classify(pairing).chain
        output = map_T_inverse(pairing) if cfg.op == "Tinv" else map_S(pairing)
    _print_json(map_trace_to_json(pairing, chain, output))
    return EXIT_OK


def _format_relation(mapping) -> str:
    return " ".join(f"{man}→{woman}" for man, woman in mapping.pairs) or "∅"


def cmd_enumerate(cfg: CliConfig) -> int:
    check_enumeration_bound(cfg.n)
    pairing_class = PairingClass(cfg.pairing_class)

    rows = []
    for pairing in enumerate_class(cfg.n, pairing_class):
        tag = None if pairing_class is PairingClass.A else classify(pairing).verdict.value
        if cfg.only_bad and tag != "Bad":
            continue
        rows.append((pairing, pairing_weight(pairing), tag))

    if cfg.output_format == "json":
        _print_json([
            {"pairing": pairing_to_json(pairing), "weight": weight_to_json(weight), "tag": tag}
            for pairing, weight, tag in rows
        ])
        return EXIT_OK

    print("marriages\taffairs\tsign\tcells\ttag")
    for pairing, weight, tag in rows:
        cells = " ".join(f"a{i},{j}" for i, j in weight.cells)
        print(f"{_format_relation(pairing.marriages)}\t{_format_relation(pairing.affairs)}\t"
              f"{weight.sign:+d}\t{cells}\t{tag or '-'}")
    return EXIT_OK


def cmd_bench(cfg: CliConfig) -> int:
    if not cfg.sizes or not cfg.methods:
        raise ParseException("bench needs at least one size and one method", ErrorCode.PARSE_ERROR)
    for n in cfg.sizes:
        if n < 1:
            raise SizeGuardException(f"bench sizes must be ≥ 1, got {n}", details={"n": n})
        if "leibniz" in cfg.methods and n > config.LEIBNIZ_LIMIT:
            raise SizeGuardException(
                f"leibniz_det is limited to n ≤ {config.LEIBNIZ_LIMIT}, got n={n}",
                details={"n": n, "limit": config.LEIBNIZ_LIMIT},
            )

    bound = 2 ** cfg.entry_bits - 1
    monitor = PerformanceMonitor()
    records = []
    for n in cfg.sizes:
        for trial in range(cfg.trials):
            seed = cfg.seed + trial
            M = gen_matrix(cfg.corpus, n, bound=bound, seed=seed)
            for method in cfg.methods:
                with monitor.measure("det", method=method, n=n) as timing:
                    result = evaluate_det(M, method, seed=seed)
                monitor.record_run(True, timing["elapsed"])
                records.append({
                    "n": n,
                    "seed": seed,
                    "method": method,
                    "wall_time": timing["elapsed"],
                    "repairs": result.repairs,
                    "fallbacks": result.fallbacks,
                    "digest": format_scalar(result.value),
                })

    frame = pd.DataFrame(records, columns=BENCH_COLUMNS)
    if cfg.out:
        frame.to_csv(cfg.out, index=False)
    else:
        frame.to_csv(sys.stdout, index=False)
    logger.log_performance_metrics({"bench": get_performance_report(monitor)})
    return EXIT_OK


COMMANDS: Dict[str, Callable[[CliConfig], int]] = {
    "det": cmd_det,
    "verify": cmd_verify,
    "map": cmd_map,
    "enumerate": cmd_enumerate,
    "bench": cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse 自己会把用法信息写到标准错误
        return e.code if isinstance(e.code, int) else EXIT_OK

    request_id = str(uuid.uuid4())
    start_time = time.time()
    logger.log_command_start(args.command, request_id)

    try:
        exit_code = COMMANDS[args.command](build_cli_config(args))
    except Exception as e:
        wrapped = handle_exception(e, f"cmd_{args.command}")
        error_reporter.report_error(wrapped)
        exit_code = exit_code_for(wrapped)
        if exit_code == EXIT_VERIFICATION_FAILED:
            logger.log_exception(wrapped, context=f"cmd_{args.command}", request_id=request_id)
        else:
            logger.log_rejected_input(wrapped, context=f"cmd_{args.command}", request_id=request_id)
        print(f"error: {wrapped.message}", file=sys.stderr)

    logger.log_command_end(args.command, request_id, time.time() - start_time, exit_code)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
