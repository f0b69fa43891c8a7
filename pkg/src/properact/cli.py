"""Command-line surface: decide / construct / verify / probe / catalog.

Every command prints a self-contained report that echoes its inputs
(including seeds and budgets) so the run can be reproduced exactly.
Exact commands (decide, catalog default to JSON or tables of exact data);
numeric commands print a human summary by default and the full report
with ``--json``.

Exit codes:
  0  success
  1  unexpected internal failure
  2  bad parameters / malformed input
  3  rank cap exceeded
  4  precondition failed (e.g. construct on a negative decision)
  5  construction-stage failure (cone, generators, powering)
  6  word-ball verification failure (the report names check and word)
  7  overflow risk / budget exceeded
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, replace
from typing import Any, Mapping, Sequence

import numpy as np

from . import SCHEMA_VERSION
from .cartan import census, growth_probe, margin_fn_for, MarginFn
from .chamber import (
    FAMILY_DESCRIPTIONS,
    FAMILY_PARAM_NAMES,
    RANK_CAP_ENV,
    build_pair_spec,
    decide_existence,
    iter_family_cases,
)
from .errors import (
    BadParameters,
    BadIndex,
    BudgetExceeded,
    DimensionMismatch,
    KindMismatch,
    MaxPowerExceeded,
    NoDirectionFound,
    NotCertified,
    NotFound,
    NotProximal,
    OverflowRisk,
    PreconditionFailed,
    ProperactError,
    RankCapExceeded,
    RetryBudgetExhausted,
    SingularInput,
    TransversalityFailed,
    WordBallCheckFailure,
)
from .schottky import (
    DEFAULT_L,
    DEFAULT_MAX_M,
    DEFAULT_T,
    construct_witness,
    verify_word_ball,
)
from .serialize import (
    decision_to_json,
    dumps_canonical,
    load_witness,
    matrix_from_lists,
    save_witness,
    witness_to_json,
    word_ball_to_json,
)
from .wordball import GROUP, SEMIGROUP, ball_size

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_BAD_PARAMETERS = 2
EXIT_RANK_CAP = 3
EXIT_PRECONDITION = 4
EXIT_CONSTRUCTION = 5
EXIT_VERIFY = 6
EXIT_BUDGET = 7

_CONSTRUCTION_ERRORS = (
    NoDirectionFound,
    RetryBudgetExhausted,
    MaxPowerExceeded,
    NotProximal,
    SingularInput,
    TransversalityFailed,
    NotCertified,
    NotFound,
)
_PARAMETER_ERRORS = (BadParameters, KindMismatch, DimensionMismatch, BadIndex)


def exit_code_for(exc: ProperactError) -> int:
    if isinstance(exc, WordBallCheckFailure):
        return EXIT_VERIFY
    if isinstance(exc, RankCapExceeded):
        return EXIT_RANK_CAP
    if isinstance(exc, (OverflowRisk, BudgetExceeded)):
        return EXIT_BUDGET
    if isinstance(exc, PreconditionFailed):
        return EXIT_PRECONDITION
    if isinstance(exc, _CONSTRUCTION_ERRORS):
        return EXIT_CONSTRUCTION
    if isinstance(exc, _PARAMETER_ERRORS):
        return EXIT_BAD_PARAMETERS
    return EXIT_INTERNAL


@dataclass(frozen=True)
class CommandReport:
    """Self-contained record of one CLI invocation."""

    command: str
    inputs: dict
    outcome: dict
    timing_ms: float

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "outcome": self.outcome,
            "timing_ms": self.timing_ms,
            "schema_version": SCHEMA_VERSION,
        }


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def _parse_params(text: str) -> dict[str, int]:
    """Parse "n=4,m=3" into {"n": 4, "m": 3}."""
    params: dict[str, int] = {}
    if not text:
        return params
    for item in text.split(","):
        if "=" not in item:
            raise BadParameters(f"malformed parameter {item!r} (expected name=value)")
        name, _, value = item.partition("=")
        try:
            params[name.strip()] = int(value)
        except ValueError as exc:
            raise BadParameters(f"parameter {name!r} needs an integer value") from exc
    return params


def _parse_target(text: str) -> tuple[str, dict[str, int]]:
    """Parse "family:n=4,m=3" (also accepts "family/n=4,m=3")."""
    for sep in (":", "/"):
        if sep in text:
            family, _, rest = text.partition(sep)
            return family, _parse_params(rest)
    return text, {}


def _load_matrix(path: str) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise BadParameters(f"cannot read matrix file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadParameters(f"matrix file {path} is not valid JSON: {exc}") from exc
    if isinstance(doc, Mapping):
        doc = doc.get("matrix", doc.get("rows"))
    if doc is None:
        raise BadParameters(f"matrix file {path} holds no row-major matrix")
    return matrix_from_lists(doc)


def _margin_from_spec(text: str | None, rank_cap: int | None) -> MarginFn | None:
    if text is None:
        return None
    family, params = _parse_target(text)
    pair = build_pair_spec(family, params, rank_cap=rank_cap)
    margin = margin_fn_for(pair)
    if margin is None:
        raise BadParameters(
            f"family {family} carries no special-linear margin functional"
        )
    return margin


def _emit(report: CommandReport, as_json: bool, human_lines: Sequence[str]) -> None:
    if as_json:
        sys.stdout.write(dumps_canonical(report.to_json()))
    else:
        for line in human_lines:
            print(line)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_decide(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    params = _parse_params(args.params)
    pair = build_pair_spec(args.family, params, rank_cap=args.rank_cap)
    decision = decide_existence(pair, rank_cap=args.rank_cap)
    report = CommandReport(
        command="decide",
        inputs={
            "family": args.family,
            "params": params,
            "rank_cap": args.rank_cap,
        },
        outcome=decision_to_json(decision),
        timing_ms=_elapsed_ms(start),
    )
    # an exact command: JSON is the primary output
    sys.stdout.write(dumps_canonical(report.to_json()))
    return EXIT_OK


def cmd_construct(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    family, params = _parse_target(args.target)
    pair = build_pair_spec(family, params, rank_cap=args.rank_cap)
    if args.n is not None and args.n != pair.chamber.ambient_dim:
        raise BadParameters(
            f"--n {args.n} does not match the target's ambient dimension "
            f"{pair.chamber.ambient_dim}"
        )
    decision, witness, stage_seconds = construct_witness(
        pair, t=args.t, seed=args.seed, max_m=args.max_m, mode=args.mode
    )
    save_witness(witness, args.out)
    report = CommandReport(
        command="construct",
        inputs={
            "target": args.target,
            "n": pair.chamber.ambient_dim,
            "t": args.t,
            "seed": args.seed,
            "max_m": args.max_m,
            "mode": args.mode,
            "out": args.out,
        },
        outcome={
            "decision": decision_to_json(decision),
            "witness_file": args.out,
            "power_m": witness.power_m,
            "epsilon": witness.epsilon,
            "min_pair_margin": witness.min_pair_margin,
            "stage_seconds": {k: round(v, 6) for k, v in stage_seconds.items()},
        },
        timing_ms=_elapsed_ms(start),
    )
    _emit(
        report,
        args.json,
        [
            f"decision: {decision.outcome}",
            f"witness:  {args.out}",
            f"power m = {witness.power_m}, epsilon = {witness.epsilon:.6g}, "
            f"min pair margin = {witness.min_pair_margin:.6g}",
        ],
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    if args.threads < 1:
        raise BadParameters("--threads must be a positive integer")
    witness = load_witness(args.witness)
    if args.mode is not None and args.mode != witness.mode:
        witness = replace(witness, mode=args.mode)
    margin = _margin_from_spec(args.margin, args.rank_cap)
    completed = verify_word_ball(witness, margin, args.max_len)
    ball = completed.word_ball
    report = CommandReport(
        command="verify",
        inputs={
            "witness": args.witness,
            "max_len": args.max_len,
            "margin": args.margin,
            "mode": completed.mode,
            "threads": args.threads,
            "seed": completed.seed,
        },
        outcome={
            "word_ball": word_ball_to_json(ball),
            "empirical_constants": completed.empirical_constants,
            "witness": witness_to_json(completed),
        },
        timing_ms=_elapsed_ms(start),
    )
    freeness_label = (
        "n/a  (group-mode check)"
        if ball.mode == SEMIGROUP
        else ("pass" if ball.freeness_pass else "FAIL")
    )
    lines = [
        f"mode {ball.mode}, {ball.word_count} words up to length {ball.max_len}",
        f"freeness        {freeness_label} "
        f"(min separation {ball.min_separation:.3e})",
        f"cone membership {'pass' if ball.cone_pass else 'FAIL'} "
        f"(max direction error {ball.max_direction_error:.3e})",
        f"additivity      {'pass' if ball.additivity_pass else 'FAIL'} "
        f"(M_box {ball.m_box:.3e}, max residual {ball.max_residual:.3e})",
    ]
    lines.append("syllables l : max residual / allowance (l+1)*M_box")
    for l, res in enumerate(ball.residual_by_syllables, start=1):
        lines.append(f"  l = {l}: {res:.3e} / {(l + 1) * ball.m_box:.3e}")
    if ball.margin_by_length is not None:
        lines.append(
            f"margin ({ball.margin_kind}) slope {ball.margin_slope:.4f}: "
            + ", ".join(
                f"L{k + 1}={v:.4f}" for k, v in enumerate(ball.margin_by_length)
            )
        )
    counts = [
        ball_size(completed.t, l, completed.mode)
        - ball_size(completed.t, l - 1, completed.mode)
        for l in range(1, ball.max_len + 1)
    ]
    lines.append(
        "words per length: "
        + ", ".join(f"L{l + 1}={c}" for l, c in enumerate(counts))
    )
    _emit(report, args.json, lines)
    return EXIT_OK


def cmd_probe_growth(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    g = _load_matrix(args.g)
    f = _load_matrix(args.f)
    fprime = f if args.fprime is None else _load_matrix(args.fprime)
    probe = growth_probe(g, f, fprime, p_max=args.pmax)
    report = CommandReport(
        command="probe growth",
        inputs={
            "g": args.g,
            "f": args.f,
            "fprime": args.fprime,
            "pmax": args.pmax,
        },
        outcome={
            "sup_diff": probe.sup_diff,
            "diffs": [float(v) for v in probe.diffs],
            "mu_f_final": [float(v) for v in probe.mu_f[-1]],
        },
        timing_ms=_elapsed_ms(start),
    )
    lines = [
        "p : ||mu(g^p f g^-p) - mu(g^p f' g^-p)||_inf"
    ] + [f"{p + 1:3d}: {v:.6e}" for p, v in enumerate(probe.diffs)]
    lines.append(f"sup: {probe.sup_diff:.6e}")
    _emit(report, args.json, lines)
    return EXIT_OK


def cmd_probe_census(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    witness = load_witness(args.witness)
    margin = _margin_from_spec(args.margin, args.rank_cap)
    if margin is None:
        raise BadParameters("census needs --margin")
    result = census(
        witness.generators,
        margin,
        radius=args.radius,
        max_len=args.max_len,
        mode=witness.mode,
    )
    report = CommandReport(
        command="probe census",
        inputs={
            "witness": args.witness,
            "radius": args.radius,
            "max_len": args.max_len,
            "margin": args.margin,
            "seed": witness.seed,
        },
        outcome={
            "count": result.count,
            "per_length": list(result.per_length),
            "log_radius": result.log_radius,
        },
        timing_ms=_elapsed_ms(start),
    )
    lines = [f"census radius {args.radius:g} (log {result.log_radius:.4f})"]
    for l, c in enumerate(result.per_length):
        lines.append(f"  length {l}: {c} inside")
    lines.append(f"total |Gamma_R| = {result.count}")
    _emit(report, args.json, lines)
    return EXIT_OK


def cmd_catalog(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    families = []
    lines = []
    for family, names in FAMILY_PARAM_NAMES.items():
        cases = []
        for params in iter_family_cases(family):
            try:
                pair = build_pair_spec(family, params, rank_cap=args.rank_cap)
                decision = decide_existence(pair, rank_cap=args.rank_cap)
            except RankCapExceeded:
                continue
            cases.append(
                {
                    "params": params,
                    "outcome": decision.outcome,
                    "no_compact_quotient": decision.no_compact_quotient,
                }
            )
            shown = ",".join(f"{k}={v}" for k, v in params.items())
            lines.append(f"{family}:{shown} -> {decision.outcome}")
        families.append(
            {
                "family": family,
                "description": FAMILY_DESCRIPTIONS[family],
                "param_names": list(names),
                "cases": cases,
            }
        )
    report = CommandReport(
        command="catalog",
        inputs={"rank_cap": args.rank_cap},
        outcome={"families": families},
        timing_ms=_elapsed_ms(start),
    )
    _emit(report, args.json, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def _elapsed_ms(start: float) -> float:
    return round((time.perf_counter() - start) * 1000.0, 3)


def _default_rank_cap() -> int | None:
    raw = os.environ.get(RANK_CAP_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise BadParameters(
            f"environment variable {RANK_CAP_ENV}={raw!r} is not an integer"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="properact",
        description=(
            "Decide proper-action existence for the encoded homogeneous "
            "families, construct cone-confined Schottky witnesses, and "
            "verify them on word balls."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_decide = sub.add_parser("decide", help="classify one family instance")
    p_decide.add_argument("--family", required=True)
    p_decide.add_argument("--params", required=True, help='e.g. "n=4,m=3"')
    p_decide.add_argument("--rank-cap", type=int, default=None)
    p_decide.add_argument("--json", action="store_true", help="(always JSON)")
    p_decide.set_defaults(func=cmd_decide)

    p_con = sub.add_parser("construct", help="build a certified witness file")
    p_con.add_argument("--n", type=int, default=None)
    p_con.add_argument("--target", required=True, help='e.g. "sl_n_over_sl_m_x_i:n=4,m=3"')
    p_con.add_argument("--t", type=int, default=DEFAULT_T)
    p_con.add_argument("--seed", type=int, default=0)
    p_con.add_argument("--max-m", type=int, default=DEFAULT_MAX_M)
    p_con.add_argument("--mode", choices=(GROUP, SEMIGROUP), default=GROUP)
    p_con.add_argument("--out", required=True)
    p_con.add_argument("--rank-cap", type=int, default=None)
    p_con.add_argument("--json", action="store_true")
    p_con.set_defaults(func=cmd_construct)

    p_ver = sub.add_parser("verify", help="run word-ball checks on a witness")
    p_ver.add_argument("--witness", required=True)
    p_ver.add_argument("--max-len", type=int, default=DEFAULT_L)
    p_ver.add_argument("--margin", default=None, help='e.g. "sl_n_over_sl_m_x_i:n=4,m=3"')
    p_ver.add_argument("--mode", choices=(GROUP, SEMIGROUP), default=None)
    p_ver.add_argument("--threads", type=int, default=1,
                       help="worker count; output is independent of it")
    p_ver.add_argument("--rank-cap", type=int, default=None)
    p_ver.add_argument("--json", action="store_true")
    p_ver.set_defaults(func=cmd_verify)

    p_probe = sub.add_parser("probe", help="growth probe or margin census")
    probe_sub = p_probe.add_subparsers(dest="probe_kind", required=True)

    p_growth = probe_sub.add_parser("growth", help="conjugation-growth probe")
    p_growth.add_argument("--g", required=True, help="matrix JSON file")
    p_growth.add_argument("--f", required=True, help="matrix JSON file")
    p_growth.add_argument("--fprime", default=None, help="matrix JSON file")
    p_growth.add_argument("--pmax", type=int, default=30)
    p_growth.add_argument("--json", action="store_true")
    p_growth.set_defaults(func=cmd_probe_growth)

    p_census = probe_sub.add_parser("census", help="projection-norm ball census")
    p_census.add_argument("--witness", required=True)
    p_census.add_argument("--radius", type=float, required=True)
    p_census.add_argument("--max-len", type=int, default=DEFAULT_L)
    p_census.add_argument("--margin", required=True)
    p_census.add_argument("--rank-cap", type=int, default=None)
    p_census.add_argument("--json", action="store_true")
    p_census.set_defaults(func=cmd_probe_census)

    p_cat = sub.add_parser("catalog", help="list families and swept decisions")
    p_cat.add_argument("--rank-cap", type=int, default=None)
    p_cat.add_argument("--json", action="store_true")
    p_cat.set_defaults(func=cmd_catalog)

    return parser


def cli_entry(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "rank_cap", None) is None and hasattr(args, "rank_cap"):
            args.rank_cap = _default_rank_cap()
        return args.func(args)
    except ProperactError as exc:
        code = exit_code_for(exc)
        payload: dict[str, Any] = {
            "error": type(exc).__name__,
            "message": str(exc),
            "exit_code": code,
        }
        stage = getattr(exc, "stage", None)
        if stage is not None:
            payload["stage"] = stage
        word = getattr(exc, "word", None)
        if word is not None:
            payload["word"] = list(word)
        sys.stderr.write(dumps_canonical(payload))
        return code


def main() -> None:
    sys.exit(cli_entry())


if __name__ == "__main__":
    main()
