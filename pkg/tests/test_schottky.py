"""Cone selection, generator construction, powering, and ball verification."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from properact.cartan import LogVector, margin_fn_for
from properact.chamber import (
    FAMILY_SL_WINDOW,
    FAMILY_SO_FORMS,
    FAMILY_SP,
    b_plus_span,
    build_pair_spec,
    enumerate_weyl,
    longest_element,
    opposition_involution,
)
from properact.errors import (
    BadParameters,
    FreenessFailure,
    MaxPowerExceeded,
    PreconditionFailed,
    RetryBudgetExhausted,
    UnsupportedFamily,
)
from properact.proximal import CERTIFIED
from properact.schottky import (
    Cone,
    build_avoiding_cone,
    construct_generators,
    construct_witness,
    power_search,
    properness_pipeline,
    verify_word_ball,
)
from properact.wordball import SEMIGROUP, state_matrix_normalized


def _cone_for(pair):
    weyl = enumerate_weyl(pair.chamber)
    w0 = longest_element(pair.chamber, weyl)
    e_iota = b_plus_span(opposition_involution(w0), pair.chamber)
    return build_avoiding_cone(e_iota, pair.v_h, weyl, pair.chamber)


@pytest.fixture(scope="module")
def sl4_cone(sl4_sl3_pair):
    return _cone_for(sl4_sl3_pair)


@pytest.fixture(scope="module")
def sl4_candidates(sl4_cone):
    return construct_generators(4, sl4_cone, 2, 0)


@pytest.fixture(scope="module")
def sl4_powered(sl4_candidates):
    return power_search(sl4_candidates)


# ---------------------------------------------------------------------------
# Avoiding cones
# ---------------------------------------------------------------------------


def test_cone_apex_is_exact_and_symmetric(sl4_cone):
    assert sl4_cone.apex_rational == (
        Fraction(1),
        Fraction(1, 3),
        Fraction(-1, 3),
        Fraction(-1),
    )
    assert sl4_cone.angular_radius == pytest.approx(1.0 / 6.0)
    assert sl4_cone.iota_invariant
    # Apex direction is its own reversed negation (involution-fixed).
    apex = np.array(sl4_cone.apex_direction.coords)
    assert np.allclose(apex, -apex[::-1])


def test_cone_membership_is_scale_invariant(sl4_cone):
    apex = np.array(sl4_cone.apex_direction.coords)
    assert sl4_cone.contains(apex)
    assert sl4_cone.contains(17.0 * apex)
    assert sl4_cone.direction_error(3.0 * apex) == 0.0
    assert not sl4_cone.contains(np.zeros(4))
    assert not sl4_cone.contains(apex[::-1])  # reversed: outside the chamber
    # Perturbation beyond the angular radius.
    far = apex + np.array([0.0, 0.5, -0.5, 0.0])
    assert sl4_cone.direction_error(far) > sl4_cone.angular_radius
    assert not sl4_cone.contains(far)


def test_cone_trivial_subgroup_caps_radius_at_wall_clearance():
    pair = build_pair_spec(FAMILY_SL_WINDOW, {"n": 2, "m": 1})
    cone = _cone_for(pair)
    assert cone.apex_rational == (Fraction(1), Fraction(-1))
    assert cone.angular_radius == pytest.approx(2.0)


def test_cone_validation(sl4_sl3_pair):
    chamber = sl4_sl3_pair.chamber
    with pytest.raises(BadParameters):  # apex must have unit sup norm
        Cone(
            apex_direction=LogVector(coords=(2.0, 0.0, 0.0, -2.0)),
            angular_radius=0.1,
            iota_invariant=True,
            chamber=chamber,
            apex_rational=(Fraction(2), Fraction(0), Fraction(0), Fraction(-2)),
        )
    with pytest.raises(BadParameters):  # apex on a chamber wall
        Cone(
            apex_direction=LogVector(coords=(1.0, 1.0, -1.0, -1.0)),
            angular_radius=0.1,
            iota_invariant=True,
            chamber=chamber,
            apex_rational=(Fraction(1), Fraction(1), Fraction(-1), Fraction(-1)),
        )
    with pytest.raises(BadParameters):  # radius must be positive
        Cone(
            apex_direction=LogVector(coords=(1.0, 0.5, -0.5, -1.0)),
            angular_radius=0.0,
            iota_invariant=True,
            chamber=chamber,
            apex_rational=(Fraction(1), Fraction(1, 2), Fraction(-1, 2), Fraction(-1)),
        )


def test_cone_refused_when_span_meets_every_direction():
    # Negative pair: some Weyl translate of the subgroup span contains the
    # involution-fixed span, so no avoiding cone can exist.
    pair = build_pair_spec(FAMILY_SL_WINDOW, {"n": 3, "m": 2})
    with pytest.raises(PreconditionFailed):
        _cone_for(pair)


# ---------------------------------------------------------------------------
# Generator construction
# ---------------------------------------------------------------------------


def test_generators_meet_margin_floor_first_try(sl4_candidates):
    gens = sl4_candidates
    assert gens.attempts == 1
    assert gens.min_pair_margin >= gens.margin_floor == 0.05
    assert gens.min_pair_margin == min(gens.pair_margins.values())
    # 3 exterior powers x 12 admissible ordered letter pairs.
    assert len(gens.pair_margins) == 36
    assert gens.no_common_flag
    assert gens.scales == (Fraction(8), Fraction(17, 2))


def test_generators_are_conjugated_diagonals(sl4_candidates):
    gens = sl4_candidates
    apex = gens.cone.apex_rational
    for j, (h, g) in enumerate(zip(gens.conjugators, gens.generators)):
        assert np.allclose(h @ h.T, np.eye(4), atol=1e-12)  # orthogonal frame
        assert np.allclose(g, g.T, atol=1e-9)  # symmetric letters
        expected_logs = tuple(gens.scales[j] * v for v in apex)
        assert gens.lambda_logs[j] == expected_logs
        eigs = np.sort(np.linalg.eigvalsh(g))[::-1]
        assert np.allclose(
            np.log(eigs), [float(v) for v in expected_logs], atol=1e-9
        )


def test_generators_deterministic_per_seed(sl4_cone, sl4_candidates):
    again = construct_generators(4, sl4_cone, 2, 0)
    for a, b in zip(again.conjugators, sl4_candidates.conjugators):
        assert np.array_equal(a, b)
    other = construct_generators(4, sl4_cone, 2, 1)
    assert not np.allclose(other.conjugators[0], sl4_candidates.conjugators[0])


def test_generators_parameter_guards(sl4_cone):
    with pytest.raises(BadParameters):
        construct_generators(4, sl4_cone, 1, 0)  # need two generators
    with pytest.raises(BadParameters):
        construct_generators(5, sl4_cone, 2, 0)  # cone lives in dimension 4


def test_generators_retry_budget_exhausted(sl4_cone):
    # No orthogonal draw can push every pair margin to nearly sqrt(2).
    with pytest.raises(RetryBudgetExhausted):
        construct_generators(4, sl4_cone, 2, 0, margin_floor=1.41, retry_budget=2)


# ---------------------------------------------------------------------------
# Power search
# ---------------------------------------------------------------------------


def test_power_search_certifies_every_representation(sl4_candidates, sl4_powered):
    wit = sl4_powered
    assert wit.power_m == 2
    assert wit.epsilon == pytest.approx(
        min(sl4_candidates.min_pair_margin / 6.0, 0.2)
    )
    assert len(wit.certificates) == 12  # 3 exterior powers x 4 letters
    assert all(c.verdict == CERTIFIED for c in wit.certificates.values())
    assert wit.min_pair_margin >= 6.0 * wit.epsilon * (1.0 - 1e-9)
    assert wit.word_ball is None and wit.empirical_constants is None


def test_powered_letters_are_exact_inverse_pairs(sl4_powered):
    wit = sl4_powered
    for letter in (1, 2):
        prod = wit.letter_matrix(letter) @ wit.letter_matrix(letter + wit.t)
        dev = float(np.abs(prod - np.eye(wit.n)).max())
        # Conditioning ~e^34 leaves rounding debris near 0.1; an unrelated
        # pairing would leave entries near e^17, so 1.0 separates cleanly.
        assert dev < 1.0
    lam = wit.letter_lambda(1)
    lam_inv = wit.letter_lambda(1 + wit.t)
    assert np.allclose(lam_inv, np.sort(-lam)[::-1])
    # Powered logs are the candidate logs times the common power.
    apex = np.array([float(v) for v in wit.cone.apex_rational])
    assert np.allclose(lam, wit.power_m * float(wit.scales[0]) * apex)


def test_letter_states_match_letter_matrices(sl4_powered):
    wit = sl4_powered
    for letter in (1, 2, 3, 4):
        mat, lg = state_matrix_normalized(wit.letter_state(letter))
        assert np.allclose(
            math.exp(lg) * mat, wit.letter_matrix(letter), rtol=1e-10
        )
    for j in range(wit.t):
        assert np.allclose(wit.generators[j], wit.letter_matrix(j + 1))


def test_power_search_capped_below_needed_power(sl4_candidates):
    with pytest.raises(MaxPowerExceeded):
        power_search(sl4_candidates, max_m=1)


def test_power_search_start_point_does_not_change_answer(sl4_candidates, sl4_powered):
    from_two = power_search(sl4_candidates, start_m=2)
    assert from_two.power_m == sl4_powered.power_m
    assert from_two.epsilon == sl4_powered.epsilon


def test_power_search_parameter_guards(sl4_candidates):
    with pytest.raises(BadParameters):
        power_search(sl4_candidates, max_m=0)
    with pytest.raises(BadParameters):
        power_search(sl4_candidates, start_m=0)


# ---------------------------------------------------------------------------
# Word-ball verification
# ---------------------------------------------------------------------------


def test_semigroup_ball_report(semigroup_witness, sl4_sl3_pair):
    report = semigroup_witness.word_ball
    assert report.mode == SEMIGROUP
    assert report.max_len == 6
    assert report.word_count == 126  # 2 + 4 + ... + 64
    assert report.freeness_pass  # one-sided words: vacuous, data recorded
    assert report.min_separation > 0.0
    assert report.cone_pass
    assert report.max_direction_error < semigroup_witness.cone.angular_radius
    assert report.additivity_pass
    assert report.m_box > 0.0
    assert len(report.residual_by_syllables) == 6
    assert report.max_residual == max(report.residual_by_syllables)
    # Worst allowance at six syllables: (6 + 1) box radii.
    assert report.max_residual <= 7.0 * report.m_box
    assert report.iota_consistency == 0.0  # inverse letters absent
    assert report.margin_kind == margin_fn_for(sl4_sl3_pair).kind
    assert len(report.margin_by_length) == 6
    assert all(
        a < b for a, b in zip(report.margin_by_length, report.margin_by_length[1:])
    )
    assert report.margin_pass and report.margin_slope > 0.0
    assert set(semigroup_witness.empirical_constants) == {"m_box", "ln_c_emp"}


def test_single_letter_ball_is_exact(semigroup_witness):
    checked = verify_word_ball(semigroup_witness, None, 1)
    report = checked.word_ball
    assert report.word_count == 2
    assert report.max_residual <= 2.0 * report.m_box
    assert report.margin_kind is None
    assert report.margin_slope is None
    assert report.margin_pass is None


def test_group_ball_flags_reversed_word_collision(group_witness, sl4_sl3_pair):
    # Symmetric letters make a word and its reversal transposes of each
    # other; strong powering collapses that pair below the separation
    # floor, which the freeness scan must report as a named failure.
    with pytest.raises(FreenessFailure) as info:
        verify_word_ball(group_witness, margin_fn_for(sl4_sl3_pair), 6)
    word = info.value.word
    assert isinstance(word, tuple) and len(word) > 0
    assert all(letter in (1, 2, 3, 4) for letter in word)


def test_verify_word_ball_needs_positive_length(semigroup_witness):
    with pytest.raises(BadParameters):
        verify_word_ball(semigroup_witness, None, 0)


# ---------------------------------------------------------------------------
# End-to-end pipeline
# ---------------------------------------------------------------------------


def test_construct_witness_reports_stage_times(sl4_sl3_pair):
    decision, witness, times = construct_witness(
        sl4_sl3_pair, seed=0, mode=SEMIGROUP
    )
    assert decision.exists
    assert witness.word_ball is None
    assert set(times) == {"decide", "cone", "generators", "powering"}
    assert all(v >= 0.0 for v in times.values())


def test_construct_witness_refuses_negative_pair():
    pair = build_pair_spec(FAMILY_SL_WINDOW, {"n": 3, "m": 2})
    with pytest.raises(PreconditionFailed):
        construct_witness(pair)


def test_construct_witness_refuses_orthogonal_forms():
    pair = build_pair_spec(FAMILY_SO_FORMS, {"p": 2, "q": 4})
    with pytest.raises(UnsupportedFamily):
        construct_witness(pair)


def test_pipeline_negative_returns_probe_companion():
    pair = build_pair_spec(FAMILY_SP, {"m": 2})
    result = properness_pipeline(pair, seed=0)
    assert result.decision.outcome == "OnlyVirtuallyAbelian"
    assert result.decision.witness_w is not None  # the refuting Weyl element
    assert result.witness is None and result.cone is None
    assert set(result.stage_seconds) == {"decide", "probe"}
    # Projections of the conjugated generic element stay near the
    # involution-fixed span while their norms diverge.
    dists = result.probe_b_plus_distances
    assert dists is not None and dists.shape == (30,)
    assert float(dists.max()) < 2.0
    assert float(np.abs(result.probe.mu_f[-1]).max()) > 20.0


def test_pipeline_positive_attaches_verified_ball(sl4_sl3_pair):
    result = properness_pipeline(sl4_sl3_pair, seed=1, max_len=4, mode=SEMIGROUP)
    assert result.decision.outcome == "ExistsFreeZariskiDense"
    assert result.probe is None and result.probe_b_plus_distances is None
    assert result.cone is not None
    report = result.witness.word_ball
    assert report is not None and report.max_len == 4
    assert report.word_count == 30  # 2 + 4 + 8 + 16
    assert set(result.stage_seconds) == {
        "decide",
        "cone",
        "generators",
        "powering",
        "verification",
    }


def test_pipeline_parameter_guards(sl4_sl3_pair):
    with pytest.raises(BadParameters):
        properness_pipeline(sl4_sl3_pair, n=5)
    with pytest.raises(UnsupportedFamily):
        properness_pipeline(build_pair_spec(FAMILY_SO_FORMS, {"p": 1, "q": 3}))
