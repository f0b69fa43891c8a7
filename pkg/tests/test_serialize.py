"""JSON round trips: exact scalars, canonical bytes, schema guard."""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction

import numpy as np
import pytest

from properact import SCHEMA_VERSION
from properact.cartan import margin_fn_for
from properact.chamber import FAMILY_SL_WINDOW, build_pair_spec, decide_existence
from properact.errors import BadParameters
from properact.serialize import (
    certificate_from_json,
    certificate_to_json,
    chamber_from_json,
    chamber_to_json,
    cone_from_json,
    cone_to_json,
    decision_to_json,
    dumps_canonical,
    load_witness,
    margin_fn_from_json,
    margin_fn_to_json,
    matrix_from_lists,
    matrix_to_lists,
    rational_from_str,
    rational_to_str,
    save_witness,
    signed_map_to_json,
    witness_from_json,
    witness_to_json,
    word_ball_from_json,
    word_ball_to_json,
)


# ---------------------------------------------------------------------------
# Scalars and matrices
# ---------------------------------------------------------------------------


def test_rational_strings_round_trip():
    cases = [Fraction(3, 4), Fraction(5), Fraction(-7, 2), Fraction(0), Fraction(-1)]
    for x in cases:
        s = rational_to_str(x)
        assert rational_from_str(s) == x
    assert rational_to_str(Fraction(5)) == "5"  # integer form drops the /1
    assert rational_to_str(Fraction(-7, 2)) == "-7/2"


def test_rational_from_str_rejects_garbage():
    with pytest.raises(BadParameters):
        rational_from_str("three quarters")
    with pytest.raises(BadParameters):
        rational_from_str("1/0")


def test_matrix_lists_round_trip():
    m = np.array([[1.5, -2.0], [0.25, 1e-9]])
    lists = matrix_to_lists(m)
    assert lists == [[1.5, -2.0], [0.25, 1e-9]]
    assert np.array_equal(matrix_from_lists(lists), m)


def test_matrix_from_lists_rejects_non_rectangular():
    with pytest.raises(BadParameters):
        matrix_from_lists([[1.0], [2.0, 3.0]])
    with pytest.raises(BadParameters):
        matrix_from_lists([1.0, 2.0])


# ---------------------------------------------------------------------------
# Chamber, decision, margin functional
# ---------------------------------------------------------------------------


def test_chamber_round_trip(sl4_sl3_pair):
    doc = chamber_to_json(sl4_sl3_pair.chamber)
    assert doc == {"series": "A", "rank": 3}
    rebuilt = chamber_from_json(doc)
    assert rebuilt.series == "A" and rebuilt.rank == 3
    assert rebuilt.simple_roots == sl4_sl3_pair.chamber.simple_roots
    with pytest.raises(BadParameters):
        chamber_from_json({"series": "E", "rank": 8})


def test_decision_documents(sl4_sl3_pair):
    positive = decision_to_json(decide_existence(sl4_sl3_pair))
    assert positive["outcome"] == "ExistsFreeZariskiDense"
    assert positive["witness_w"] is None
    assert set(positive["dims"]) == {"fixed_cone", "subgroup_flat"}

    negative_pair = build_pair_spec(FAMILY_SL_WINDOW, {"n": 3, "m": 2})
    negative = decision_to_json(decide_existence(negative_pair))
    assert negative["outcome"] == "OnlyVirtuallyAbelian"
    w_doc = negative["witness_w"]
    assert set(w_doc) == {"perm", "sign"}
    assert sorted(w_doc["perm"]) == list(range(3))
    assert all(s in (1, -1) for s in w_doc["sign"])


def test_signed_map_document(sl4_sl3_pair):
    negative_pair = build_pair_spec(FAMILY_SL_WINDOW, {"n": 3, "m": 2})
    w = decide_existence(negative_pair).witness_w
    doc = signed_map_to_json(w)
    assert doc["perm"] == list(w.perm)
    assert doc["sign"] == list(w.sign)


def test_margin_fn_round_trip(sl4_sl3_pair):
    margin = margin_fn_for(sl4_sl3_pair)
    rebuilt = margin_fn_from_json(margin_fn_to_json(margin))
    assert rebuilt.kind == margin.kind
    assert rebuilt.params == margin.params


# ---------------------------------------------------------------------------
# Cone, certificate, word-ball report
# ---------------------------------------------------------------------------


def test_cone_round_trip(semigroup_witness):
    cone = semigroup_witness.cone
    rebuilt = cone_from_json(cone_to_json(cone))
    assert rebuilt.apex_rational == cone.apex_rational  # exact rationals
    assert rebuilt.angular_radius == cone.angular_radius
    assert rebuilt.iota_invariant == cone.iota_invariant
    assert rebuilt.chamber.series == cone.chamber.series
    assert rebuilt.chamber.rank == cone.chamber.rank


def test_certificate_round_trip(semigroup_witness):
    cert = next(iter(semigroup_witness.certificates.values()))
    rebuilt = certificate_from_json(certificate_to_json(cert))
    assert rebuilt.epsilon == cert.epsilon
    assert rebuilt.sample_count == cert.sample_count
    assert rebuilt.seed == cert.seed
    assert rebuilt.verdict == cert.verdict
    assert set(rebuilt.checks) == set(cert.checks)


def test_word_ball_round_trip(semigroup_witness):
    report = semigroup_witness.word_ball
    rebuilt = word_ball_from_json(word_ball_to_json(report))
    assert dataclasses.asdict(rebuilt) == dataclasses.asdict(report)
    doc = word_ball_to_json(report)
    assert doc["word_count"] == 126
    assert doc["margin_by_length"] is not None


# ---------------------------------------------------------------------------
# Witness documents
# ---------------------------------------------------------------------------


def _assert_witness_equal(a, b):
    assert a.n == b.n and a.t == b.t and a.mode == b.mode and a.seed == b.seed
    assert a.epsilon == b.epsilon and a.power_m == b.power_m
    assert a.scales == b.scales
    assert a.lambda_logs == b.lambda_logs  # exact rationals
    for x, y in zip(a.conjugators, b.conjugators):
        assert np.array_equal(x, y)
    for x, y in zip(a.generators, b.generators):
        assert np.array_equal(x, y)
    assert a.min_pair_margin == b.min_pair_margin
    assert set(a.certificates) == set(b.certificates)
    assert a.pair_margins == b.pair_margins
    assert (a.word_ball is None) == (b.word_ball is None)
    if a.word_ball is not None:
        assert dataclasses.asdict(a.word_ball) == dataclasses.asdict(b.word_ball)
    assert a.empirical_constants == b.empirical_constants


@pytest.mark.parametrize("fixture_name", ["group_witness", "semigroup_witness"])
def test_witness_round_trip_is_byte_identical(fixture_name, request):
    witness = request.getfixturevalue(fixture_name)
    doc = witness_to_json(witness)
    assert doc["schema_version"] == SCHEMA_VERSION == "1"
    text = dumps_canonical(doc)
    rebuilt = witness_from_json(json.loads(text))
    _assert_witness_equal(rebuilt, witness)
    assert dumps_canonical(witness_to_json(rebuilt)) == text


def test_witness_schema_version_guard(group_witness):
    doc = witness_to_json(group_witness)
    doc["schema_version"] = "0"
    with pytest.raises(BadParameters):
        witness_from_json(doc)
    del doc["schema_version"]
    with pytest.raises(BadParameters):
        witness_from_json(doc)


def test_save_and_load_witness(tmp_path, semigroup_witness):
    path = tmp_path / "witness.json"
    save_witness(semigroup_witness, str(path))
    raw = path.read_text(encoding="utf-8")
    assert raw.endswith("\n")
    assert json.loads(raw)["mode"] == "semigroup"
    loaded = load_witness(str(path))
    _assert_witness_equal(loaded, semigroup_witness)
    # Saving the loaded witness reproduces the file byte for byte.
    again = tmp_path / "again.json"
    save_witness(loaded, str(again))
    assert again.read_text(encoding="utf-8") == raw


# ---------------------------------------------------------------------------
# Canonical text form
# ---------------------------------------------------------------------------


def test_dumps_canonical_properties():
    text = dumps_canonical({"b": 1, "a": [1, 2]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')  # keys sorted
    assert '\n  "a"' in text  # two-space indent
    assert dumps_canonical({"a": [1, 2], "b": 1}) == text
    with pytest.raises(ValueError):
        dumps_canonical({"x": float("nan")})
