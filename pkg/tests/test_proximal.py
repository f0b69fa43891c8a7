"""Projective metric, proximality certificates, compounds, product bounds."""

from __future__ import annotations

import math

import numpy as np
import pytest

from properact import (
    BadIndex,
    BadParameters,
    EpsCertificate,
    NotCertified,
    NotProximal,
    PreconditionFailed,
    ProjHyperplane,
    ProjPoint,
    SingularInput,
    TransversalityFailed,
    compound_matrix,
    delta_to_hyperplane,
    eps_proximal_certificate,
    product_bound_check,
    proj_distance,
    proximal_data,
    proximality_from_contraction,
    singular_values,
)
from properact.proximal import CERTIFIED, INCONCLUSIVE, REFUTED, compound_index_sets

from conftest import random_orthogonal

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Projective metric
# ---------------------------------------------------------------------------


def test_proj_distance_examples():
    e1 = ProjPoint.from_vector([1.0, 0.0])
    e2 = ProjPoint.from_vector([0.0, 1.0])
    assert proj_distance(e1, e2) == pytest.approx(SQRT2)
    assert proj_distance(e1, e1) == pytest.approx(0.0)
    # Lines, not vectors: the antipode is the same point.
    minus = ProjPoint.from_vector([-1.0, 0.0])
    assert proj_distance(e1, minus) == pytest.approx(0.0)


def test_delta_to_hyperplane_half_inner_product():
    x = ProjPoint.from_vector([1.0, 0.0])
    h = ProjHyperplane.from_normal([0.5, math.sqrt(3.0) / 2.0])
    assert delta_to_hyperplane(x, h) == pytest.approx(math.sqrt(2.0 - math.sqrt(3.0)))


def test_delta_to_hyperplane_extremes():
    x = ProjPoint.from_vector([1.0, 0.0])
    assert delta_to_hyperplane(x, ProjHyperplane.from_normal([0.0, 1.0])) == (
        pytest.approx(0.0)
    )
    assert delta_to_hyperplane(x, ProjHyperplane.from_normal([1.0, 0.0])) == (
        pytest.approx(SQRT2)
    )


# ---------------------------------------------------------------------------
# Proximal eigendata
# ---------------------------------------------------------------------------


def test_proximal_data_of_diagonal():
    data = proximal_data(np.diag([3.0, 1.0]))
    assert data is not None
    assert data.lambda1 == pytest.approx(3.0)
    assert data.gap == pytest.approx(1.0 / 3.0)
    assert data.margin == pytest.approx(SQRT2)
    assert proj_distance(data.attracting, ProjPoint.from_vector([1, 0])) < 1e-12
    assert abs(abs(data.repelling.normal[0]) - 1.0) < 1e-12


def test_proximal_data_absent_for_rotation_and_jordan_block():
    rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert proximal_data(rotation) is None
    jordan = np.array([[1.0, 1.0], [0.0, 1.0]])
    assert proximal_data(jordan) is None


def test_proximal_data_input_guards():
    with pytest.raises(SingularInput):
        proximal_data(np.diag([1.0, 0.0]))
    with pytest.raises(SingularInput):
        proximal_data(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(BadParameters):
        proximal_data(np.ones((2, 3)))


# ---------------------------------------------------------------------------
# Sampled certificates
# ---------------------------------------------------------------------------


def test_certificate_strong_contraction_certified():
    cert = eps_proximal_certificate(np.diag([1e6, 1.0, 1e-6]), 0.1, seed=1)
    assert isinstance(cert, EpsCertificate)
    assert cert.verdict == CERTIFIED
    assert cert.checks["margin"] == pytest.approx(SQRT2)
    assert cert.checks["margin_ok"] and cert.checks["containment_ok"]
    assert cert.checks["lipschitz_max"] <= 0.9 * 0.1


def test_certificate_weak_contraction_not_certified():
    cert = eps_proximal_certificate(np.diag([1.01, 1.0, 0.99]), 0.1, seed=1)
    assert cert.verdict in (REFUTED, INCONCLUSIVE)


def test_certificate_thin_margin_refuted_without_sampling():
    # Attracting direction nearly inside the repelling hyperplane.
    g = np.array([[10.0, 1000.0], [0.0, 0.1]])
    data = proximal_data(g)
    assert data.margin < 0.2
    cert = eps_proximal_certificate(g, 0.1, seed=1)
    assert cert.verdict == REFUTED
    assert cert.checks["margin_ok"] is False
    assert cert.sample_count == 0


def test_certificate_guards():
    with pytest.raises(BadParameters):
        eps_proximal_certificate(np.diag([2.0, 1.0]), 0.0)
    with pytest.raises(NotProximal):
        eps_proximal_certificate(np.array([[0.0, -1.0], [1.0, 0.0]]), 0.1)


def test_certificate_stable_under_powers():
    # Powering sharpens the contraction, so one certified epsilon keeps
    # certifying every power (up to 8) of the same matrix.
    rng = np.random.default_rng(2)
    q = random_orthogonal(rng, 3)
    g = q @ np.diag([100.0, 1.0, 0.01]) @ q.T
    for k in range(1, 9):
        cert = eps_proximal_certificate(np.linalg.matrix_power(g, k), 0.25, seed=k)
        assert cert.verdict == CERTIFIED, f"power {k}: {cert.verdict}"


# ---------------------------------------------------------------------------
# Locating proximality from contraction
# ---------------------------------------------------------------------------


def test_proximality_from_contraction_good_guess():
    rng = np.random.default_rng(3)
    q = random_orthogonal(rng, 3)
    g = q @ np.diag([1e6, 1.0, 1e-6]) @ q.T
    located = proximality_from_contraction(
        g,
        ProjPoint.from_vector(q[:, 0]),
        ProjHyperplane.from_normal(q[:, 0]),
        epsilon=0.1,
        seed=1,
    )
    assert located.passed
    assert located.guess_margin == pytest.approx(SQRT2)
    assert located.distance_attracting < 0.1
    assert located.distance_repelling < 0.1


def test_proximality_from_contraction_wrong_axis_fails():
    rng = np.random.default_rng(3)
    q = random_orthogonal(rng, 3)
    g = q @ np.diag([1e6, 1.0, 1e-6]) @ q.T
    located = proximality_from_contraction(
        g,
        ProjPoint.from_vector(q[:, 1]),  # middle axis: images leave it
        ProjHyperplane.from_normal(q[:, 1]),
        epsilon=0.1,
        seed=1,
    )
    assert not located.passed
    assert located.containment_max > 0.1


def test_proximality_from_contraction_requires_margin():
    g = np.diag([10.0, 1.0])
    x = ProjPoint.from_vector([1.0, 0.02])
    h = ProjHyperplane.from_normal([1.0, 0.0])  # x nearly inside the hyperplane
    with pytest.raises(PreconditionFailed):
        proximality_from_contraction(g, x, h, epsilon=0.25)


# ---------------------------------------------------------------------------
# Compound matrices
# ---------------------------------------------------------------------------


def test_compound_of_diagonal_is_product_diagonal():
    c2 = compound_matrix(np.diag([2.0, 3.0, 5.0]), 2)
    assert np.allclose(c2, np.diag([6.0, 10.0, 15.0]))


def test_compound_index_sets_lexicographic():
    assert compound_index_sets(4, 2) == [
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 3),
        (2, 3),
    ]


def test_compound_singular_values_are_subset_products():
    rng = np.random.default_rng(17)
    g = rng.uniform(-1.0, 1.0, size=(4, 4)) + 2.0 * np.eye(4)
    s = singular_values(g)
    for i in (1, 2, 3):
        got = singular_values(compound_matrix(g, i))
        want = sorted(
            (float(np.prod(s[list(sel)])) for sel in compound_index_sets(4, i)),
            reverse=True,
        )
        assert np.allclose(got, want, rtol=1e-10)


def test_compound_multiplicativity():
    rng = np.random.default_rng(19)
    a = rng.normal(size=(4, 4))
    b = rng.normal(size=(4, 4))
    lhs = compound_matrix(a @ b, 2)
    rhs = compound_matrix(a, 2) @ compound_matrix(b, 2)
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_compound_index_guards():
    g = np.eye(3)
    with pytest.raises(BadIndex):
        compound_matrix(g, 0)
    with pytest.raises(BadIndex):
        compound_matrix(g, 3)
    with pytest.raises(BadParameters):
        compound_matrix(np.ones((2, 3)), 1)


# ---------------------------------------------------------------------------
# Product spectral additivity
# ---------------------------------------------------------------------------


def _transversal_letters():
    # Two symmetric letters with the same strong spectrum whose attracting
    # axes are tilted far from each other's repelling planes: the conjugating
    # frame sends e1 to (3, 2, 2)/sqrt(17), keeping every junction angle wide.
    d = np.diag([1e3, 1.0, 1e-3])
    lead = np.array([3.0, 2.0, 2.0])
    lead /= np.linalg.norm(lead)
    frame = np.column_stack([lead, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    qb, r = np.linalg.qr(frame)
    qb = qb * np.sign(np.diag(r))
    return d, qb @ d @ qb.T


def test_product_bound_transversal_alternating_word():
    a, b = _transversal_letters()
    da, db = proximal_data(a), proximal_data(b)
    margins = (
        delta_to_hyperplane(da.attracting, db.repelling),
        delta_to_hyperplane(db.attracting, da.repelling),
    )
    assert min(margins) > 6.0 * 0.12  # junctions clear the transversality bar
    report = product_bound_check([(a, 3), (b, 3), (a, 3)], 0.12, seed=4)
    assert report.syllable_count == 3
    assert len(report.pair_margins) == 3
    assert report.certificate.verdict == CERTIFIED
    # Dominant-eigenvalue additivity up to junction defects.
    assert report.predicted_log_lambda1 == pytest.approx(9.0 * math.log(1e3))
    assert report.residual_spectral < 1.5
    assert report.residual_norm < 1.5
    assert report.product.shape == (3, 3)


def test_product_bound_requires_certified_factors():
    weak = np.diag([1.01, 1.0, 0.99])
    with pytest.raises(NotCertified):
        product_bound_check([(weak, 2)], 0.1, seed=1)


def test_product_bound_detects_transversality_failure():
    d = np.diag([1e3, 1.0, 1e-3])
    swapped = np.diag([1.0, 1e3, 1e-3])  # attracting axis inside the other's
    with pytest.raises(TransversalityFailed):
        product_bound_check([(d, 2), (swapped, 2)], 0.11, seed=1)


def test_product_bound_parameter_guards():
    with pytest.raises(BadParameters):
        product_bound_check([], 0.1)
    with pytest.raises(BadParameters):
        product_bound_check([(np.diag([1e3, 1.0, 1e-3]), 0)], 0.1)
