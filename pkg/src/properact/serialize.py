"""JSON (de)serialization for witnesses, decisions, and reports.

Conventions, stable across the package:

* rationals are encoded as ``"p/q"`` strings (``"p"`` when q == 1);
* matrices are row-major nested lists of binary64 floats;
* every top-level document carries ``schema_version``;
* dictionaries are emitted with sorted keys so that re-serializing a
  loaded document is byte-identical.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from . import SCHEMA_VERSION
from .cartan import LogVector, MarginFn, margin_fn
from .chamber import ChamberData, Decision, SignedMap, chamber_a, chamber_b, chamber_d
from .errors import BadParameters
from .proximal import EpsCertificate
from .schottky import Cone, SchottkyWitness, WordBallReport

__all__ = [
    "rational_to_str",
    "rational_from_str",
    "matrix_to_lists",
    "matrix_from_lists",
    "chamber_to_json",
    "chamber_from_json",
    "signed_map_to_json",
    "decision_to_json",
    "margin_fn_to_json",
    "margin_fn_from_json",
    "cone_to_json",
    "cone_from_json",
    "certificate_to_json",
    "certificate_from_json",
    "word_ball_to_json",
    "word_ball_from_json",
    "witness_to_json",
    "witness_from_json",
    "dumps_canonical",
    "save_witness",
    "load_witness",
]


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------


def rational_to_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rational_from_str(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise BadParameters(f"malformed rational {s!r}") from exc


def matrix_to_lists(m: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.asarray(m, dtype=float)]


def matrix_from_lists(rows: Sequence[Sequence[float]]) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadParameters("matrix JSON must be a list of equal-length rows") from exc
    if arr.ndim != 2:
        raise BadParameters("matrix JSON must be a list of equal-length rows")
    return arr


# ---------------------------------------------------------------------------
# Chamber / decision
# ---------------------------------------------------------------------------

_CHAMBER_FACTORIES = {"A": chamber_a, "B": chamber_b, "D": chamber_d}


def chamber_to_json(chamber: ChamberData) -> dict:
    return {"series": chamber.series, "rank": chamber.rank}


def chamber_from_json(doc: Mapping) -> ChamberData:
    series = doc.get("series")
    if series not in _CHAMBER_FACTORIES:
        raise BadParameters(f"unknown chamber series {series!r}")
    return _CHAMBER_FACTORIES[series](int(doc["rank"]))


def signed_map_to_json(w: SignedMap) -> dict:
    return {"perm": list(w.perm), "sign": list(w.sign)}


def decision_to_json(decision: Decision) -> dict:
    return {
        "outcome": decision.outcome,
        "witness_w": (
            None if decision.witness_w is None else signed_map_to_json(decision.witness_w)
        ),
        "no_compact_quotient": decision.no_compact_quotient,
        "dims": {"fixed_cone": decision.dims[0], "subgroup_flat": decision.dims[1]},
    }


# ---------------------------------------------------------------------------
# Margin functionals
# ---------------------------------------------------------------------------


def margin_fn_to_json(m: MarginFn) -> dict:
    return {"kind": m.kind, "params": {k: v for k, v in m.params}}


def margin_fn_from_json(doc: Mapping) -> MarginFn:
    return margin_fn(doc["kind"], **{k: int(v) for k, v in doc["params"].items()})


# ---------------------------------------------------------------------------
# Cone
# ---------------------------------------------------------------------------


def cone_to_json(cone: Cone) -> dict:
    return {
        "apex_rational": [rational_to_str(v) for v in cone.apex_rational],
        "apex_float": [float(v) for v in cone.apex_direction.coords],
        "angular_radius": float(cone.angular_radius),
        "iota_invariant": bool(cone.iota_invariant),
        "chamber": chamber_to_json(cone.chamber),
    }


def cone_from_json(doc: Mapping) -> Cone:
    return Cone(
        apex_direction=LogVector(coords=tuple(float(v) for v in doc["apex_float"])),
        angular_radius=float(doc["angular_radius"]),
        iota_invariant=bool(doc["iota_invariant"]),
        chamber=chamber_from_json(doc["chamber"]),
        apex_rational=tuple(rational_from_str(v) for v in doc["apex_rational"]),
    )


# ---------------------------------------------------------------------------
# Certificates and word-ball reports
# ---------------------------------------------------------------------------


def certificate_to_json(cert: EpsCertificate) -> dict:
    checks: dict[str, Any] = {}
    for key, value in cert.checks.items():
        if isinstance(value, (bool, str)) or value is None:
            checks[key] = value
        else:
            checks[key] = float(value)
    return {
        "epsilon": float(cert.epsilon),
        "checks": checks,
        "sample_count": int(cert.sample_count),
        "seed": int(cert.seed),
        "verdict": cert.verdict,
    }


def certificate_from_json(doc: Mapping) -> EpsCertificate:
    return EpsCertificate(
        epsilon=float(doc["epsilon"]),
        checks=dict(doc["checks"]),
        sample_count=int(doc["sample_count"]),
        seed=int(doc["seed"]),
        verdict=doc["verdict"],
    )


def word_ball_to_json(report: WordBallReport) -> dict:
    return {
        "max_len": report.max_len,
        "mode": report.mode,
        "word_count": report.word_count,
        "freeness_pass": report.freeness_pass,
        "min_separation": float(report.min_separation),
        "cone_pass": report.cone_pass,
        "max_direction_error": float(report.max_direction_error),
        "additivity_pass": report.additivity_pass,
        "m_box": float(report.m_box),
        "residual_by_syllables": [float(v) for v in report.residual_by_syllables],
        "max_residual": float(report.max_residual),
        "iota_consistency": float(report.iota_consistency),
        "margin_kind": report.margin_kind,
        "margin_by_length": (
            None
            if report.margin_by_length is None
            else [float(v) for v in report.margin_by_length]
        ),
        "margin_slope": (
            None if report.margin_slope is None else float(report.margin_slope)
        ),
        "margin_intercept": (
            None if report.margin_intercept is None else float(report.margin_intercept)
        ),
        "margin_pass": report.margin_pass,
    }


def word_ball_from_json(doc: Mapping) -> WordBallReport:
    return WordBallReport(
        max_len=int(doc["max_len"]),
        mode=doc["mode"],
        word_count=int(doc["word_count"]),
        freeness_pass=bool(doc["freeness_pass"]),
        min_separation=float(doc["min_separation"]),
        cone_pass=bool(doc["cone_pass"]),
        max_direction_error=float(doc["max_direction_error"]),
        additivity_pass=bool(doc["additivity_pass"]),
        m_box=float(doc["m_box"]),
        residual_by_syllables=tuple(float(v) for v in doc["residual_by_syllables"]),
        max_residual=float(doc["max_residual"]),
        iota_consistency=float(doc["iota_consistency"]),
        margin_kind=doc["margin_kind"],
        margin_by_length=(
            None
            if doc["margin_by_length"] is None
            else tuple(float(v) for v in doc["margin_by_length"])
        ),
        margin_slope=(
            None if doc["margin_slope"] is None else float(doc["margin_slope"])
        ),
        margin_intercept=(
            None if doc["margin_intercept"] is None else float(doc["margin_intercept"])
        ),
        margin_pass=doc["margin_pass"],
    )


# ---------------------------------------------------------------------------
# Witness
# ---------------------------------------------------------------------------


def witness_to_json(witness: SchottkyWitness) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "n": witness.n,
        "t": witness.t,
        "mode": witness.mode,
        "seed": witness.seed,
        "epsilon": float(witness.epsilon),
        "power_m": witness.power_m,
        "cone": cone_to_json(witness.cone),
        "scales": [rational_to_str(s) for s in witness.scales],
        "conjugators": [matrix_to_lists(h) for h in witness.conjugators],
        "base_generators": [matrix_to_lists(g) for g in witness.base_generators],
        "generators": [matrix_to_lists(g) for g in witness.generators],
        "lambda_logs": [
            [rational_to_str(v) for v in row] for row in witness.lambda_logs
        ],
        "certificates": [
            {"rep": i, "letter": letter, "certificate": certificate_to_json(cert)}
            for (i, letter), cert in sorted(witness.certificates.items())
        ],
        "pair_margins": [
            {"rep": i, "letter_a": a, "letter_b": b, "margin": float(v)}
            for (i, a, b), v in sorted(witness.pair_margins.items())
        ],
        "min_pair_margin": float(witness.min_pair_margin),
        "word_ball": (
            None if witness.word_ball is None else word_ball_to_json(witness.word_ball)
        ),
        "empirical_constants": (
            None
            if witness.empirical_constants is None
            else {k: float(v) for k, v in sorted(witness.empirical_constants.items())}
        ),
    }


def witness_from_json(doc: Mapping) -> SchottkyWitness:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise BadParameters(
            f"unsupported witness schema_version {version!r} (expected {SCHEMA_VERSION!r})"
        )
    return SchottkyWitness(
        n=int(doc["n"]),
        t=int(doc["t"]),
        mode=doc["mode"],
        seed=int(doc["seed"]),
        epsilon=float(doc["epsilon"]),
        power_m=int(doc["power_m"]),
        cone=cone_from_json(doc["cone"]),
        scales=tuple(rational_from_str(s) for s in doc["scales"]),
        conjugators=tuple(matrix_from_lists(h) for h in doc["conjugators"]),
        base_generators=tuple(matrix_from_lists(g) for g in doc["base_generators"]),
        generators=tuple(matrix_from_lists(g) for g in doc["generators"]),
        lambda_logs=tuple(
            tuple(rational_from_str(v) for v in row) for row in doc["lambda_logs"]
        ),
        certificates={
            (int(e["rep"]), int(e["letter"])): certificate_from_json(e["certificate"])
            for e in doc["certificates"]
        },
        pair_margins={
            (int(e["rep"]), int(e["letter_a"]), int(e["letter_b"])): float(e["margin"])
            for e in doc["pair_margins"]
        },
        min_pair_margin=float(doc["min_pair_margin"]),
        word_ball=(
            None if doc["word_ball"] is None else word_ball_from_json(doc["word_ball"])
        ),
        empirical_constants=(
            None
            if doc["empirical_constants"] is None
            else {k: float(v) for k, v in doc["empirical_constants"].items()}
        ),
    )


# ---------------------------------------------------------------------------
# Canonical text form and file IO
# ---------------------------------------------------------------------------


def dumps_canonical(doc: Mapping) -> str:
    """Sorted-key, fixed-separator JSON text; equal documents give equal bytes."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def save_witness(witness: SchottkyWitness, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(witness_to_json(witness)))


def load_witness(path: str) -> SchottkyWitness:
    with open(path, "r", encoding="utf-8") as fh:
        return witness_from_json(json.load(fh))
