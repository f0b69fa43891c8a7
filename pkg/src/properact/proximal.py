"""Projective-space dynamics: distances, proximality, sampling certificates.

A matrix is proximal when its largest eigenvalue modulus is attained by a
single simple eigenvalue: it then contracts projective space toward the
attracting eigenline and away from the invariant complementary hyperplane.
This module measures those objects, certifies quantified (epsilon-scale)
contraction by seeded sampling, and provides the exterior-power (compound)
matrices through which every fundamental representation of SL(n) is
realized downstream.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    BadIndex,
    BadParameters,
    DimensionMismatch,
    NotCertified,
    NotProximal,
    PreconditionFailed,
    SingularInput,
    TransversalityFailed,
)
from .exact import rank_exact
from .rng import STREAM_CERT_CONTAINMENT, STREAM_CERT_LIPSCHITZ, substream

CERTIFIED = "Certified"
REFUTED = "Refuted"
INCONCLUSIVE = "Inconclusive"

SAFETY_FACTOR = 0.9
DEFAULT_GAP_TOL = 1e-6
DEFAULT_SAMPLES = 1000


# ---------------------------------------------------------------------------
# Projective points and hyperplanes
# ---------------------------------------------------------------------------


def _canonical_unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not math.isfinite(norm):
        raise BadParameters("cannot normalize a zero or non-finite vector")
    v = v / norm
    lead = v[np.flatnonzero(np.abs(v) > 1e-14)[0]] if np.any(np.abs(v) > 1e-14) else 1.0
    return -v if lead < 0 else v


@dataclass(frozen=True)
class ProjPoint:
    """A point of projective space: a sign-canonical unit vector."""

    rep: np.ndarray

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "ProjPoint":
        return cls(rep=_canonical_unit(np.asarray(v, dtype=float)))

    @property
    def dim(self) -> int:
        return self.rep.shape[0]


@dataclass(frozen=True)
class ProjHyperplane:
    """A projective hyperplane given by its sign-canonical unit normal."""

    normal: np.ndarray

    @classmethod
    def from_normal(cls, v: Sequence[float]) -> "ProjHyperplane":
        return cls(normal=_canonical_unit(np.asarray(v, dtype=float)))

    @property
    def dim(self) -> int:
        return self.normal.shape[0]


def proj_distance(x1: ProjPoint, x2: ProjPoint) -> float:
    """Distance between projective points: min over unit representatives."""
    if x1.dim != x2.dim:
        raise DimensionMismatch("projective points in different dimensions")
    c = min(1.0, abs(float(x1.rep @ x2.rep)))
    return math.sqrt(max(0.0, 2.0 - 2.0 * c))


def delta_to_hyperplane(x: ProjPoint, h: ProjHyperplane) -> float:
    """Distance from a projective point to a projective hyperplane."""
    if x.dim != h.dim:
        raise DimensionMismatch("point and hyperplane in different dimensions")
    c = min(1.0, abs(float(x.rep @ h.normal)))
    return math.sqrt(max(0.0, 2.0 - 2.0 * math.sqrt(max(0.0, 1.0 - c * c))))


def _sine_for_distance(eps: float) -> float:
    """|<v, n>| threshold equivalent to delta_to_hyperplane >= eps."""
    if eps <= 0:
        return 0.0
    s = 1.0 - eps * eps / 2.0
    return math.sqrt(max(0.0, 1.0 - s * s))


def apply_to_point(g: np.ndarray, x: ProjPoint) -> ProjPoint:
    return ProjPoint.from_vector(np.asarray(g, dtype=float) @ x.rep)


# ---------------------------------------------------------------------------
# Proximality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProximalData:
    """Eigendata of a proximal matrix.

    ``lambda1`` is the dominant eigenvalue modulus, ``gap`` the ratio of the
    second-largest modulus to it, ``margin`` the projective distance from
    the attracting point to the repelling hyperplane.
    """

    lambda1: float
    attracting: ProjPoint
    repelling: ProjHyperplane
    gap: float
    margin: float


def proximal_data(
    g: np.ndarray, gap_tol: float = DEFAULT_GAP_TOL
) -> ProximalData | None:
    """Eigendata of g, or None when no simple dominant modulus exists.

    The repelling hyperplane is the orthogonal complement of the transpose's
    dominant eigenvector, which for a simple dominant eigenvalue is exactly
    the invariant complement of the attracting line.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if g.shape != (n, n):
        raise BadParameters("proximal_data expects a square matrix")
    if not np.all(np.isfinite(g)):
        raise SingularInput("matrix has non-finite entries")
    # Only exact rank loss is rejected: strongly graded but invertible
    # matrices (powered exterior compounds) keep a well-conditioned dominant
    # eigenpair even when their smallest eigenvalues underflow, and that
    # dominant pair is all this function extracts.  Invertibility is decided
    # by exact rational rank because both floating LU pivots and eigensolver
    # deflation are free to round the underflowed small part to exact zero.
    if rank_exact([[Fraction(float(x)) for x in row] for row in g]) < n:
        raise SingularInput("matrix has exact rank loss")
    vals, vecs = np.linalg.eig(g)
    moduli = np.abs(vals)
    order = np.argsort(-moduli)
    top, second = order[0], order[1] if n > 1 else order[0]
    lam1 = float(moduli[top])
    lam2 = float(moduli[second]) if n > 1 else 0.0
    if lam1 <= 0.0 or (n > 1 and (lam1 - lam2) <= gap_tol * lam1):
        return None
    # The dominant eigenvalue is real (a complex one pairs with its
    # conjugate of equal modulus and is rejected by the gap test above).
    attracting = ProjPoint.from_vector(np.real(vecs[:, top]))
    tvals, tvecs = np.linalg.eig(g.T)
    ttop = int(np.argmax(np.abs(tvals)))
    repelling = ProjHyperplane.from_normal(np.real(tvecs[:, ttop]))
    return ProximalData(
        lambda1=lam1,
        attracting=attracting,
        repelling=repelling,
        gap=lam2 / lam1,
        margin=delta_to_hyperplane(attracting, repelling),
    )


# ---------------------------------------------------------------------------
# Sampling certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EpsCertificate:
    """Outcome of the sampled quantified-proximality check.

    ``checks`` records the measured margin, the worst sampled image distance
    to the attracting point, and the worst sampled Lipschitz ratio, plus the
    pass/fail of each against the safety-scaled epsilon.
    """

    epsilon: float
    checks: dict
    sample_count: int
    seed: int
    verdict: str


def _sample_unit_sphere(rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    v = rng.standard_normal((count, dim))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / norms


def _sample_off_hyperplane(
    rng: np.random.Generator,
    normal: np.ndarray,
    eps: float,
    count: int,
) -> np.ndarray:
    """Unit vectors whose projective distance to the hyperplane is >= eps."""
    c_min = _sine_for_distance(eps)
    out = np.empty((count, normal.shape[0]))
    have = 0
    attempts = 0
    while have < count:
        attempts += 1
        if attempts > 200:
            raise PreconditionFailed(
                "rejection sampling starved: epsilon-complement too thin"
            )
        batch = _sample_unit_sphere(rng, normal.shape[0], max(count, 256))
        keep = batch[np.abs(batch @ normal) >= c_min]
        take = min(count - have, keep.shape[0])
        out[have : have + take] = keep[:take]
        have += take
    return out


def eps_proximal_certificate(
    g: np.ndarray,
    epsilon: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    gap_tol: float = DEFAULT_GAP_TOL,
) -> EpsCertificate:
    """Sampled verdict on quantified proximality at scale epsilon.

    Three checks: (1) attracting/repelling margin >= 2*epsilon, exactly on
    the computed eigendata; (2) the image of every sampled point at distance
    >= epsilon from the repelling hyperplane lands within 0.9*epsilon of the
    attracting point; (3) sampled pairs contract distances by factor
    <= 0.9*epsilon.  Any raw violation (> epsilon) refutes; passing raw but
    not with the 0.9 safety factor is Inconclusive.
    """
    if epsilon <= 0:
        raise BadParameters("epsilon must be positive")
    g = np.asarray(g, dtype=float)
    data = proximal_data(g, gap_tol=gap_tol)
    if data is None:
        raise NotProximal("no simple dominant eigenvalue at the gap tolerance")

    margin_ok = data.margin >= 2.0 * epsilon
    checks: dict = {
        "margin": data.margin,
        "margin_required": 2.0 * epsilon,
        "margin_ok": bool(margin_ok),
        "containment_max": None,
        "containment_ok": None,
        "lipschitz_max": None,
        "lipschitz_ok": None,
    }
    if not margin_ok:
        return EpsCertificate(
            epsilon=epsilon,
            checks=checks,
            sample_count=0,
            seed=int(seed),
            verdict=REFUTED,
        )

    normal = data.repelling.normal
    attract = data.attracting.rep

    rng_c = substream(seed, STREAM_CERT_CONTAINMENT)
    pts = _sample_off_hyperplane(rng_c, normal, epsilon, samples)
    images = pts @ g.T
    inorms = np.linalg.norm(images, axis=1, keepdims=True)
    images = images / inorms
    cos = np.minimum(1.0, np.abs(images @ attract))
    dist_attract = np.sqrt(np.maximum(0.0, 2.0 - 2.0 * cos))
    containment_max = float(dist_attract.max())
    checks["containment_max"] = containment_max
    checks["containment_ok"] = bool(containment_max <= SAFETY_FACTOR * epsilon)

    rng_l = substream(seed, STREAM_CERT_LIPSCHITZ)
    xs = _sample_off_hyperplane(rng_l, normal, epsilon, samples)
    ys = _sample_off_hyperplane(rng_l, normal, epsilon, samples)
    d_before = _pair_proj_distances(xs, ys)
    gx = xs @ g.T
    gy = ys @ g.T
    gx = gx / np.linalg.norm(gx, axis=1, keepdims=True)
    gy = gy / np.linalg.norm(gy, axis=1, keepdims=True)
    d_after = _pair_proj_distances(gx, gy)
    mask = d_before > 1e-12
    ratios = d_after[mask] / d_before[mask]
    lipschitz_max = float(ratios.max()) if ratios.size else 0.0
    checks["lipschitz_max"] = lipschitz_max
    checks["lipschitz_ok"] = bool(lipschitz_max <= SAFETY_FACTOR * epsilon)

    if containment_max > epsilon or lipschitz_max > epsilon:
        verdict = REFUTED
    elif checks["containment_ok"] and checks["lipschitz_ok"]:
        verdict = CERTIFIED
    else:
        verdict = INCONCLUSIVE
    return EpsCertificate(
        epsilon=epsilon,
        checks=checks,
        sample_count=int(samples),
        seed=int(seed),
        verdict=verdict,
    )


def _pair_proj_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    cos = np.minimum(1.0, np.abs(np.sum(a * b, axis=1)))
    return np.sqrt(np.maximum(0.0, 2.0 - 2.0 * cos))


@dataclass(frozen=True)
class LocatedProximality:
    """Result of certifying proximality from a guessed axis/hyperplane pair."""

    passed: bool
    guess_margin: float
    containment_max: float
    lipschitz_max: float
    distance_attracting: float
    distance_repelling: float
    sample_count: int
    seed: int


def proximality_from_contraction(
    g: np.ndarray,
    x_plus: ProjPoint,
    hyperplane: ProjHyperplane,
    epsilon: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> LocatedProximality:
    """Contraction near a guessed axis implies proximality with located data.

    Requires the guess margin delta(x_plus, hyperplane) >= 6*epsilon.  Checks
    by sampling that g maps the epsilon-complement of the hyperplane into
    the epsilon-ball at x_plus and contracts by factor <= epsilon there; on
    a pass, computes the true eigendata and reports its distances to the
    guess (expected <= epsilon for both).
    """
    if epsilon <= 0:
        raise BadParameters("epsilon must be positive")
    g = np.asarray(g, dtype=float)
    guess_margin = delta_to_hyperplane(x_plus, hyperplane)
    if guess_margin < 6.0 * epsilon:
        raise PreconditionFailed(
            f"guess margin {guess_margin:.6g} below 6*epsilon = {6 * epsilon:.6g}"
        )

    rng_c = substream(seed, STREAM_CERT_CONTAINMENT)
    pts = _sample_off_hyperplane(rng_c, hyperplane.normal, epsilon, samples)
    images = pts @ g.T
    images = images / np.linalg.norm(images, axis=1, keepdims=True)
    cos = np.minimum(1.0, np.abs(images @ x_plus.rep))
    containment_max = float(np.sqrt(np.maximum(0.0, 2.0 - 2.0 * cos)).max())

    rng_l = substream(seed, STREAM_CERT_LIPSCHITZ)
    xs = _sample_off_hyperplane(rng_l, hyperplane.normal, epsilon, samples)
    ys = _sample_off_hyperplane(rng_l, hyperplane.normal, epsilon, samples)
    d_before = _pair_proj_distances(xs, ys)
    gx = xs @ g.T
    gy = ys @ g.T
    gx = gx / np.linalg.norm(gx, axis=1, keepdims=True)
    gy = gy / np.linalg.norm(gy, axis=1, keepdims=True)
    d_after = _pair_proj_distances(gx, gy)
    mask = d_before > 1e-12
    ratios = d_after[mask] / d_before[mask]
    lipschitz_max = float(ratios.max()) if ratios.size else 0.0

    passed = containment_max <= epsilon and lipschitz_max <= epsilon
    dist_attracting = math.inf
    dist_repelling = math.inf
    if passed:
        data = proximal_data(g)
        if data is None:
            passed = False
        else:
            dist_attracting = proj_distance(data.attracting, x_plus)
            dist_repelling = proj_distance(
                ProjPoint(rep=data.repelling.normal),
                ProjPoint(rep=hyperplane.normal),
            )
            passed = dist_attracting <= epsilon and dist_repelling <= epsilon
    return LocatedProximality(
        passed=bool(passed),
        guess_margin=guess_margin,
        containment_max=containment_max,
        lipschitz_max=lipschitz_max,
        distance_attracting=dist_attracting,
        distance_repelling=dist_repelling,
        sample_count=int(samples),
        seed=int(seed),
    )


# ---------------------------------------------------------------------------
# Compound (exterior-power) matrices
# ---------------------------------------------------------------------------


def compound_index_sets(n: int, i: int) -> list[tuple[int, ...]]:
    """Sorted index sets labeling compound rows/columns, lexicographic."""
    return list(itertools.combinations(range(n), i))


def compound_matrix(g: np.ndarray, i: int) -> np.ndarray:
    """The i-th compound: all i x i minors, lexicographic index order.

    Multiplicative in g, and its singular values are the i-fold products of
    the singular values of g.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if g.shape != (n, n):
        raise BadParameters("compound_matrix expects a square matrix")
    if not 1 <= i <= n - 1:
        raise BadIndex(f"compound index {i} outside 1..{n - 1}")
    if i == 1:
        return g.copy()
    sets = compound_index_sets(n, i)
    k = len(sets)
    blocks = np.empty((k, k, i, i))
    for a, rows in enumerate(sets):
        sub = g[np.asarray(rows), :]
        for b, cols in enumerate(sets):
            blocks[a, b] = sub[:, np.asarray(cols)]
    return np.linalg.det(blocks)


# ---------------------------------------------------------------------------
# Product spectral estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductBoundReport:
    """Spectral additivity report for a transversal product of powers."""

    syllable_count: int
    lambda1: float
    predicted_log_lambda1: float
    residual_spectral: float
    residual_norm: float
    pair_margins: tuple[float, ...]
    certificate: EpsCertificate
    product: np.ndarray = field(repr=False)


def product_bound_check(
    factors: Sequence[tuple[np.ndarray, int]],
    epsilon: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> ProductBoundReport:
    """Check spectral additivity of g = g_l^{n_l} ... g_1^{n_1}.

    Requires every factor to carry a Certified epsilon certificate and every
    cyclically-consecutive pair to satisfy the 6*epsilon transversality
    margin.  Reports the dominant eigenvalue of the product against the sum
    of the factors' contributions, the operator-norm analog, and a
    certificate for the product at 2*epsilon.
    """
    if not factors:
        raise BadParameters("need at least one factor")
    mats = [np.asarray(g, dtype=float) for g, _ in factors]
    powers = [int(k) for _, k in factors]
    if any(k < 1 for k in powers):
        raise BadParameters("factor powers must be >= 1")

    datas = []
    for j, g in enumerate(mats):
        cert = eps_proximal_certificate(g, epsilon, samples=samples, seed=seed)
        if cert.verdict != CERTIFIED:
            raise NotCertified(
                f"factor {j + 1} not certified at epsilon={epsilon} "
                f"(verdict {cert.verdict})"
            )
        datas.append(proximal_data(g))

    l = len(mats)
    margins = []
    for j in range(l):
        prev = datas[j - 1]  # j = 0 wraps to the last factor (cyclic)
        cur = datas[j]
        m = delta_to_hyperplane(prev.attracting, cur.repelling)
        margins.append(m)
        if m < 6.0 * epsilon:
            raise TransversalityFailed(
                f"pair ({(j - 1) % l + 1} -> {j + 1}) margin {m:.6g} "
                f"below 6*epsilon = {6 * epsilon:.6g}"
            )

    product = np.eye(mats[0].shape[0])
    for g, k in zip(mats, powers):
        product = np.linalg.matrix_power(g, k) @ product

    predicted = float(sum(k * math.log(d.lambda1) for k, d in zip(powers, datas)))
    prod_data = proximal_data(product)
    if prod_data is None:
        raise NotProximal("product lost its dominant-eigenvalue gap")
    log_lam = math.log(prod_data.lambda1)
    log_norm = math.log(float(np.linalg.norm(product, 2)))
    cert = eps_proximal_certificate(
        product, 2.0 * epsilon, samples=samples, seed=seed
    )
    return ProductBoundReport(
        syllable_count=l,
        lambda1=prod_data.lambda1,
        predicted_log_lambda1=predicted,
        residual_spectral=abs(log_lam - predicted),
        residual_norm=abs(log_norm - predicted),
        pair_margins=tuple(margins),
        certificate=cert,
        product=product,
    )
