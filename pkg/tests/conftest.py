"""Shared fixtures: one catalog pair and one witness per mode, built once.

Witness construction runs the full decide -> cone -> generators -> powering
pipeline, so the session-scoped fixtures keep the suite fast while every
test still exercises real certified data.
"""

from __future__ import annotations

import numpy as np
import pytest

from properact import (
    FAMILY_SL_WINDOW,
    SEMIGROUP,
    build_pair_spec,
    construct_witness,
    margin_fn_for,
    verify_word_ball,
)


@pytest.fixture(scope="session")
def sl4_sl3_pair():
    """SL(4) over a block-embedded SL(3): the standard positive example."""
    return build_pair_spec(FAMILY_SL_WINDOW, {"n": 4, "m": 3})


@pytest.fixture(scope="session")
def group_witness(sl4_sl3_pair):
    """A certified group-mode witness, no word-ball report attached yet."""
    decision, witness, _ = construct_witness(sl4_sl3_pair, seed=0)
    assert decision.exists
    return witness


@pytest.fixture(scope="session")
def semigroup_witness(sl4_sl3_pair):
    """A fully verified semigroup witness (word ball of radius 6 attached)."""
    decision, witness, _ = construct_witness(sl4_sl3_pair, seed=0, mode=SEMIGROUP)
    assert decision.exists
    return verify_word_ball(witness, margin_fn_for(sl4_sl3_pair), max_len=6)


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish orthogonal frame with deterministic column signs."""
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))
