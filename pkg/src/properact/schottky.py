"""Cone-confined free subgroups of SL(n, R) with word-ball verification.

Pipeline: pick an involution-fixed direction whose surrounding cone misses
every Weyl translate of the subgroup's projection span; place conjugated
diagonal generators on that direction; power them until every exterior
power carries a certified projective contraction; then sweep the reduced
word ball checking freeness, cone confinement, additivity of the log
projections, and growth of the distance-to-subgroup margin.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .cartan import GrowthProbe, LogVector, MarginFn, growth_probe, margin_fn_for, mu_margin
from .chamber import (
    ChamberData,
    Decision,
    FAMILY_SO_FORMS,
    PairSpec,
    SignedMap,
    SubspaceQ,
    WeylGroup,
    b_plus_span,
    decide_existence,
    enumerate_weyl,
    involution_signed_map,
    longest_element,
    opposition_involution,
)
from .errors import (
    AdditivityFailure,
    BadParameters,
    ConeEscape,
    FreenessFailure,
    MarginDegeneration,
    MaxPowerExceeded,
    NoDirectionFound,
    NotProximal,
    PreconditionFailed,
    ProperactError,
    RetryBudgetExhausted,
    SingularInput,
    UnsupportedFamily,
)
from .exact import dot, vec
from .proximal import (
    CERTIFIED,
    DEFAULT_GAP_TOL,
    DEFAULT_SAMPLES,
    EpsCertificate,
    ProximalData,
    compound_index_sets,
    compound_matrix,
    delta_to_hyperplane,
    eps_proximal_certificate,
    proximal_data,
)
from .rng import STREAM_CONJUGATORS, STREAM_PROBE, STREAM_SAMPLES, derive_seed, substream
from .wordball import (
    GROUP,
    SEMIGROUP,
    LetterSystem,
    RepState,
    is_very_reduced,
    iter_ball,
    state_mu,
    syllables,
)

DEFAULT_T = 2
DEFAULT_L = 6
DEFAULT_MAX_M = 64
DEFAULT_RETRY_BUDGET = 100
DEFAULT_MARGIN_FLOOR = 0.05
DEFAULT_LATTICE_BUDGET = 5000
DEFAULT_WORD_BUDGET = 500_000
EPSILON_CAP = 0.2
FREENESS_SEPARATION = 1e-6
# Absolute floor keeping the fitted additivity box above float dust when all
# fit words have numerically exact log projections.
M_BOX_FLOOR = 1e-12
# Log strength of the generator diagonals: scale j is BASE_SCALE + j/2.
# Strong enough that one power usually certifies the contraction, weak
# enough that reversed words (transposes of each other, since the
# generators are symmetric) keep a resolvable matrix separation.
BASE_SCALE = 8
SCALE_STEP = Fraction(1, 2)
PROBE_POWERS = 30


# ---------------------------------------------------------------------------
# Cones
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cone:
    """Open cone of chamber directions around a rational apex.

    Membership: x != 0, x strictly inside the chamber, and the sup-norm
    deviation of x/||x||_inf from the apex is below angular_radius.
    """

    apex_direction: LogVector
    angular_radius: float
    iota_invariant: bool
    chamber: ChamberData
    apex_rational: tuple[Fraction, ...]

    def __post_init__(self):
        apex = np.asarray(self.apex_direction.coords)
        if abs(np.abs(apex).max() - 1.0) > 1e-12:
            raise BadParameters("cone apex must have unit sup norm")
        if not self._in_open_chamber(apex):
            raise BadParameters("cone apex must lie strictly inside the chamber")
        if self.angular_radius <= 0:
            raise BadParameters("cone angular radius must be positive")

    def _in_open_chamber(self, x: np.ndarray) -> bool:
        roots = np.array(
            [[float(c) for c in row] for row in self.chamber.simple_roots]
        )
        return bool(np.all(roots @ x > 0.0))

    def direction_error(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        scale = float(np.abs(x).max())
        if scale == 0.0:
            return math.inf
        return float(
            np.abs(x / scale - np.asarray(self.apex_direction.coords)).max()
        )

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        if float(np.abs(x).max()) == 0.0:
            return False
        return self.direction_error(x) < self.angular_radius and self._in_open_chamber(x)


def _sup_angular_distance(basis: np.ndarray, apex: np.ndarray) -> float:
    """min ||v - apex||_inf over v in rowspace(basis) with ||v||_inf = 1.

    Solved as 2d small linear programs, one per active coordinate and sign
    of the sup-norm constraint.
    """
    k, d = basis.shape
    cols = basis.T  # v = z @ basis, v_i = cols[i] . z
    c = np.zeros(k + 1)
    c[-1] = 1.0
    a_ub = []
    b_ub = []
    for i in range(d):
        a_ub.append(np.concatenate([cols[i], [-1.0]]))
        b_ub.append(apex[i])
        a_ub.append(np.concatenate([-cols[i], [-1.0]]))
        b_ub.append(-apex[i])
        a_ub.append(np.concatenate([cols[i], [0.0]]))
        b_ub.append(1.0)
        a_ub.append(np.concatenate([-cols[i], [0.0]]))
        b_ub.append(1.0)
    a_ub = np.array(a_ub)
    b_ub = np.array(b_ub)
    bounds = [(None, None)] * k + [(0.0, None)]
    best = math.inf
    for coord in range(d):
        row = np.concatenate([cols[coord], [0.0]])
        for sign in (1.0, -1.0):
            res = linprog(
                c,
                A_ub=a_ub,
                b_ub=b_ub,
                A_eq=row[None, :],
                b_eq=np.array([sign]),
                bounds=bounds,
                method="highs",
            )
            if res.status == 0:
                best = min(best, float(res.fun))
    return best


def _interior_exact(chamber: ChamberData, point: Sequence) -> bool:
    return all(dot(row, point) > 0 for row in chamber.simple_roots)


def _apex_candidates(
    chamber: ChamberData, iota: SignedMap, budget: int
) -> Iterator[tuple[Fraction, ...]]:
    """Symmetrized interior lattice directions, canonical point first."""
    d = chamber.ambient_dim
    seen: set[tuple[Fraction, ...]] = set()
    produced = 0

    def emit(point) -> Iterator[tuple[Fraction, ...]]:
        nonlocal produced
        sym = tuple(a + b for a, b in zip(vec(point), iota.apply(vec(point))))
        if all(v == 0 for v in sym) or not _interior_exact(chamber, sym):
            return
        top = max(abs(v) for v in sym)
        unit = tuple(Fraction(v, 1) / top for v in sym)
        if unit in seen:
            return
        seen.add(unit)
        produced += 1
        yield unit

    rho = vec(chamber.interior_point())
    yield from emit(rho)
    shifts = []
    if chamber.trace_constraint is not None:
        for i in range(d):
            for j in range(d):
                if i != j:
                    shifts.append(
                        tuple(
                            Fraction(1 if k == i else (-1 if k == j else 0))
                            for k in range(d)
                        )
                    )
    else:
        for i in range(d):
            for s in (1, -1):
                shifts.append(tuple(Fraction(s if k == i else 0) for k in range(d)))
    scale = 1
    while produced < budget:
        base = tuple(v * scale for v in rho)
        for shift in shifts:
            yield from emit(tuple(a + b for a, b in zip(base, shift)))
            if produced >= budget:
                return
        scale += 1


def build_avoiding_cone(
    e_iota: SubspaceQ,
    v_h: SubspaceQ,
    weyl: WeylGroup,
    chamber: ChamberData,
    lattice_budget: int = DEFAULT_LATTICE_BUDGET,
) -> Cone:
    """Choose an involution-fixed cone whose closure misses every w.V_H.

    The apex is picked exactly (rational arithmetic) outside each Weyl
    translate of the subgroup span; the angular radius is half the minimum
    sup-norm angular distance to those translates (float linear programs),
    capped by the apex's clearance from the chamber walls.
    """
    w0 = longest_element(chamber, weyl)
    iota = involution_signed_map(w0)

    translates: list[SubspaceQ] = []
    seen_bases: set = set()
    if v_h.dim > 0:
        for w in weyl:
            moved = v_h.transformed(w)
            if moved.basis not in seen_bases:
                seen_bases.add(moved.basis)
                translates.append(moved)
        for moved in translates:
            if moved.contains_subspace(e_iota):
                raise PreconditionFailed(
                    "a Weyl translate of the subgroup span contains the "
                    "involution-fixed chamber span; no avoiding cone exists"
                )

    apex: tuple[Fraction, ...] | None = None
    for candidate in _apex_candidates(chamber, iota, lattice_budget):
        if all(not moved.contains_vector(candidate) for moved in translates):
            apex = candidate
            break
    if apex is None:
        raise NoDirectionFound(
            f"no involution-fixed interior direction found outside the "
            f"{len(translates)} subspace translates within budget {lattice_budget}"
        )

    apex_float = np.array([float(v) for v in apex])
    wall_clearance = min(
        float(dot(row, apex)) for row in chamber.simple_roots
    )
    theta = wall_clearance
    for moved in translates:
        basis = np.array([[float(f) for f in row] for row in moved.basis])
        dist = _sup_angular_distance(basis, apex_float)
        theta = min(theta, 0.5 * dist)
    if theta <= 0:
        raise NoDirectionFound("avoiding cone collapsed to zero angular radius")

    return Cone(
        apex_direction=LogVector(coords=tuple(apex_float), ordering=True),
        angular_radius=float(theta),
        iota_invariant=True,
        chamber=chamber,
        apex_rational=apex,
    )


# ---------------------------------------------------------------------------
# Letters built from conjugated diagonals
# ---------------------------------------------------------------------------


def _unit_scale(m: np.ndarray) -> tuple[np.ndarray, float]:
    scale = float(np.abs(m).max())
    if scale == 0.0 or not math.isfinite(scale):
        raise BadParameters("degenerate matrix while scaling a compound")
    return m / scale, math.log(scale)


def _conjugated_compound(
    h: np.ndarray, log_diag: np.ndarray, i: int
) -> tuple[np.ndarray, float]:
    """Unit max-norm i-th compound of h diag(exp(log_diag)) h^T, plus log scale.

    Built from the factorization so extreme diagonal spreads never overflow
    the minor products.
    """
    n = len(log_diag)
    comp_h = compound_matrix(h, i)
    sums = np.array(
        [sum(log_diag[j] for j in s) for s in compound_index_sets(n, i)]
    )
    top = float(sums.max())
    mat, lg = _unit_scale((comp_h * np.exp(sums - top)) @ comp_h.T)
    return mat, lg + top


def _conjugated_state(h: np.ndarray, log_diag: np.ndarray) -> RepState:
    n = len(log_diag)
    mats: list[np.ndarray] = []
    logs = np.zeros(n - 1)
    for i in range(1, n):
        mat, lg = _conjugated_compound(h, log_diag, i)
        mats.append(mat)
        logs[i - 1] = lg
    return RepState(n, mats, logs, float(np.sum(log_diag)))


def _letter_ids(t: int, mode: str) -> list[int]:
    return list(range(1, (2 * t if mode == GROUP else t) + 1))


def _inverse_id(letter: int, t: int) -> int:
    return letter + t if letter <= t else letter - t


def _admissible_pairs(t: int, mode: str) -> list[tuple[int, int]]:
    """Ordered letter pairs (first, then) whose product never cancels."""
    letters = _letter_ids(t, mode)
    if mode == SEMIGROUP:
        return [(a, b) for a in letters for b in letters]
    return [
        (a, b) for a in letters for b in letters if b != _inverse_id(a, t)
    ]


def _letter_log_diag(
    scales: Sequence[Fraction],
    apex: Sequence[Fraction],
    letter: int,
    t: int,
    power: int = 1,
) -> np.ndarray:
    base = letter if letter <= t else letter - t
    sign = 1 if letter <= t else -1
    s = float(scales[base - 1]) * sign * power
    return s * np.array([float(v) for v in apex])


def _proximal_table(
    conjugators: Sequence[np.ndarray],
    scales: Sequence[Fraction],
    apex: Sequence[Fraction],
    t: int,
    mode: str,
    power: int,
    gap_tol: float,
) -> dict[tuple[int, int], ProximalData] | None:
    """Proximal eigendata of every exterior power of every letter, or None
    when some representation lacks a usable spectral gap."""
    n = len(apex)
    table: dict[tuple[int, int], ProximalData] = {}
    for letter in _letter_ids(t, mode):
        base = letter if letter <= t else letter - t
        log_diag = _letter_log_diag(scales, apex, letter, t, power)
        for i in range(1, n):
            mat, _ = _conjugated_compound(conjugators[base - 1], log_diag, i)
            try:
                data = proximal_data(mat, gap_tol=gap_tol)
            except SingularInput:
                # The powered compound is invertible in exact arithmetic but
                # its determinant underflows binary64; treat the power as
                # unusable rather than crashing the caller.
                return None
            if data is None:
                return None
            table[(i, letter)] = data
    return table


def _pair_margins(
    table: Mapping[tuple[int, int], ProximalData], t: int, mode: str, n: int
) -> dict[tuple[int, int, int], float]:
    margins: dict[tuple[int, int, int], float] = {}
    for i in range(1, n):
        for a, b in _admissible_pairs(t, mode):
            margins[(i, a, b)] = delta_to_hyperplane(
                table[(i, a)].attracting, table[(i, b)].repelling
            )
    return margins


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """Candidate generators: conjugated diagonals on the cone apex ray."""

    n: int
    t: int
    mode: str
    seed: int
    cone: Cone
    scales: tuple[Fraction, ...]
    conjugators: tuple[np.ndarray, ...]
    generators: tuple[np.ndarray, ...]
    lambda_logs: tuple[tuple[Fraction, ...], ...]  # exact log eigenvalues
    pair_margins: dict[tuple[int, int, int], float]
    min_pair_margin: float
    margin_floor: float
    attempts: int
    no_common_flag: bool


def construct_generators(
    n: int,
    cone: Cone,
    t: int,
    seed: int,
    mode: str = GROUP,
    margin_floor: float = DEFAULT_MARGIN_FLOOR,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    gap_tol: float = DEFAULT_GAP_TOL,
) -> GeneratorSet:
    """Conjugate distinct apex-ray diagonals by seeded orthogonal frames.

    Retries fresh conjugators until, in every exterior power, every
    admissible letter pair has attracting-point-to-hyperplane margin at
    least margin_floor.  The log eigenvalues of each generator are the
    exact rationals scale_j * apex.
    """
    if t < 2:
        raise BadParameters("need at least two generators")
    if n != cone.chamber.ambient_dim:
        raise BadParameters("cone chamber dimension does not match n")
    apex = cone.apex_rational
    scales = tuple(BASE_SCALE + j * SCALE_STEP for j in range(t))
    diags = [np.exp(_letter_log_diag(scales, apex, j + 1, t)) for j in range(t)]

    rng = substream(seed, STREAM_CONJUGATORS)
    best_seen = 0.0
    for attempt in range(1, retry_budget + 1):
        conjugators = []
        for _ in range(t):
            q, r = np.linalg.qr(rng.normal(size=(n, n)))
            q = q * np.sign(np.diag(r))  # fix column signs for determinism
            conjugators.append(q)
        table = _proximal_table(conjugators, scales, apex, t, mode, 1, gap_tol)
        if table is None:
            continue
        margins = _pair_margins(table, t, mode, n)
        worst = min(margins.values())
        best_seen = max(best_seen, worst)
        if worst >= margin_floor:
            generators = tuple(
                h @ np.diag(d) @ h.T for h, d in zip(conjugators, diags)
            )
            lambda_logs = tuple(
                tuple(s * v for v in apex) for s in scales
            )
            no_common_flag = True
            for i in range(1, n):
                points = [table[(i, j + 1)].attracting for j in range(t)]
                close = all(
                    math.sqrt(
                        max(0.0, 2.0 - 2.0 * abs(float(np.dot(a.rep, b.rep))))
                    )
                    < 1e-6
                    for ai, a in enumerate(points)
                    for b in points[ai + 1 :]
                )
                if t > 1 and close:
                    no_common_flag = False
            return GeneratorSet(
                n=n,
                t=t,
                mode=mode,
                seed=seed,
                cone=cone,
                scales=scales,
                conjugators=tuple(conjugators),
                generators=generators,
                lambda_logs=lambda_logs,
                pair_margins=margins,
                min_pair_margin=worst,
                margin_floor=margin_floor,
                attempts=attempt,
                no_common_flag=no_common_flag,
            )
    raise RetryBudgetExhausted(
        f"no conjugator draw reached pair margin {margin_floor} in "
        f"{retry_budget} attempts (best {best_seen:.4f})"
    )


# ---------------------------------------------------------------------------
# Powering until certified
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WordBallReport:
    """Summary of the reduced-word-ball verification."""

    max_len: int
    mode: str
    word_count: int
    freeness_pass: bool
    min_separation: float
    cone_pass: bool
    max_direction_error: float
    additivity_pass: bool
    m_box: float
    residual_by_syllables: tuple[float, ...]
    max_residual: float
    iota_consistency: float
    margin_kind: str | None
    margin_by_length: tuple[float, ...] | None
    margin_slope: float | None
    margin_intercept: float | None
    margin_pass: bool | None


@dataclass(frozen=True, eq=False)
class SchottkyWitness:
    """A certified cone-confined generating set plus verification data."""

    n: int
    t: int
    mode: str
    seed: int
    epsilon: float
    power_m: int
    cone: Cone
    scales: tuple[Fraction, ...]
    conjugators: tuple[np.ndarray, ...]
    base_generators: tuple[np.ndarray, ...]
    generators: tuple[np.ndarray, ...]  # the powered generators actually used
    lambda_logs: tuple[tuple[Fraction, ...], ...]  # exact logs of powered gens
    certificates: dict[tuple[int, int], EpsCertificate]
    pair_margins: dict[tuple[int, int, int], float]
    min_pair_margin: float
    word_ball: WordBallReport | None
    empirical_constants: dict[str, float] | None

    def letter_matrix(self, letter: int) -> np.ndarray:
        base = letter if letter <= self.t else letter - self.t
        h = self.conjugators[base - 1]
        log_diag = _letter_log_diag(
            self.scales, self.cone.apex_rational, letter, self.t, self.power_m
        )
        return h @ np.diag(np.exp(log_diag)) @ h.T

    def letter_lambda(self, letter: int) -> np.ndarray:
        lam = np.array(
            [float(v) for v in self.lambda_logs[(letter - 1) % self.t]]
        )
        return lam if letter <= self.t else np.sort(-lam)[::-1]

    def letter_state(self, letter: int) -> RepState:
        base = letter if letter <= self.t else letter - self.t
        log_diag = _letter_log_diag(
            self.scales, self.cone.apex_rational, letter, self.t, self.power_m
        )
        return _conjugated_state(self.conjugators[base - 1], log_diag)


def power_search(
    candidates: GeneratorSet,
    max_m: int = DEFAULT_MAX_M,
    samples: int = DEFAULT_SAMPLES,
    start_m: int = 1,
    gap_tol: float = DEFAULT_GAP_TOL,
) -> SchottkyWitness:
    """Double the common power until every exterior power is certified.

    epsilon is locked to min(candidate pair margin / 6, 0.2); a power m
    succeeds when every letter's every exterior power earns a Certified
    projective-contraction certificate at epsilon and all admissible pair
    margins stay at or above 6 epsilon.
    """
    if max_m < 1 or start_m < 1:
        raise BadParameters("powers must be >= 1")
    n, t, mode = candidates.n, candidates.t, candidates.mode
    apex = candidates.cone.apex_rational
    epsilon = min(candidates.min_pair_margin / 6.0, EPSILON_CAP)
    letters = _letter_ids(t, mode)
    last_failure = "no power attempted"
    m = start_m
    while m <= max_m:
        table = _proximal_table(
            candidates.conjugators, candidates.scales, apex, t, mode, m, gap_tol
        )
        if table is None:
            last_failure = f"m={m}: spectral gap below tolerance"
            m *= 2
            continue
        margins = _pair_margins(table, t, mode, n)
        worst = min(margins.values())
        # Tolerant comparison: 6*(margin/6) may round one ulp above margin,
        # and the margins recomputed at power m drift at machine precision.
        if worst < 6.0 * epsilon * (1.0 - 1e-9):
            key = min(margins, key=margins.get)
            last_failure = (
                f"m={m}: pair margin {worst:.4f} < 6*epsilon "
                f"(representation {key[0]}, letters {key[1]},{key[2]})"
            )
            m *= 2
            continue
        certificates: dict[tuple[int, int], EpsCertificate] = {}
        failed = None
        for letter in letters:
            base = letter if letter <= t else letter - t
            log_diag = _letter_log_diag(candidates.scales, apex, letter, t, m)
            for i in range(1, n):
                mat, _ = _conjugated_compound(
                    candidates.conjugators[base - 1], log_diag, i
                )
                try:
                    cert = eps_proximal_certificate(
                        mat,
                        epsilon,
                        samples=samples,
                        seed=derive_seed(
                            candidates.seed, STREAM_SAMPLES, m, i, letter
                        ),
                        gap_tol=gap_tol,
                    )
                except (SingularInput, NotProximal) as exc:
                    failed = (i, letter, type(exc).__name__)
                    break
                certificates[(i, letter)] = cert
                if cert.verdict != CERTIFIED:
                    failed = (i, letter, cert.verdict)
                    break
            if failed:
                break
        if failed is None:
            lambda_logs = tuple(
                tuple(s * m * v for v in apex) for s in candidates.scales
            )
            generators = tuple(
                h
                @ np.diag(
                    np.exp(_letter_log_diag(candidates.scales, apex, j + 1, t, m))
                )
                @ h.T
                for j, h in enumerate(candidates.conjugators)
            )
            return SchottkyWitness(
                n=n,
                t=t,
                mode=mode,
                seed=candidates.seed,
                epsilon=float(epsilon),
                power_m=m,
                cone=candidates.cone,
                scales=candidates.scales,
                conjugators=candidates.conjugators,
                base_generators=candidates.generators,
                generators=generators,
                lambda_logs=lambda_logs,
                certificates=certificates,
                pair_margins=margins,
                min_pair_margin=worst,
                word_ball=None,
                empirical_constants=None,
            )
        i, letter, verdict = failed
        last_failure = (
            f"m={m}: representation {i}, letter {letter} verdict {verdict}"
        )
        m *= 2
    raise MaxPowerExceeded(
        f"no power up to {max_m} certified at epsilon={epsilon:.4f}; "
        f"last failure: {last_failure}"
    )


# ---------------------------------------------------------------------------
# Word-ball verification
# ---------------------------------------------------------------------------


def _freeness_scan(
    flats: np.ndarray, words: list[tuple[int, ...]]
) -> tuple[float, tuple[int, ...] | None, tuple[int, ...] | None]:
    """Minimum pairwise sup distance over (normalized matrix, log scale) rows."""
    count = len(flats)
    best = math.inf
    pair = (None, None)
    chunk = 128
    for start in range(0, count, chunk):
        block = flats[start : start + chunk]
        diffs = np.abs(block[:, None, :] - flats[None, :, :]).max(axis=2)
        local_rows = np.arange(start, min(start + chunk, count))
        diffs[local_rows - start, local_rows] = math.inf  # self-distances
        idx = np.unravel_index(np.argmin(diffs), diffs.shape)
        val = float(diffs[idx])
        if val < best:
            best = val
            pair = (words[start + idx[0]], words[idx[1]])
    return best, pair[0], pair[1]


def verify_word_ball(
    witness: SchottkyWitness,
    margin: MarginFn | None,
    max_len: int,
    budget: int = DEFAULT_WORD_BUDGET,
) -> SchottkyWitness:
    """Sweep the reduced word ball and attach the verification report.

    Checks, in order: freeness (pairwise separation of word matrices),
    cone membership of every non-identity projection, additivity of log
    projections against the exact per-letter predictions (box fitted on
    words of at most two syllables, non-very-reduced words get one extra
    box), and, when a margin function is supplied, a positive linear growth
    fit of the per-length margin minima.  Failures raise and name the
    lexicographically smallest offending word.
    """
    if max_len < 1:
        raise BadParameters("max_len must be >= 1")
    letters = _letter_ids(witness.t, witness.mode)
    states = [witness.letter_state(letter) for letter in letters]
    system = LetterSystem(
        [witness.letter_matrix(j + 1) for j in range(witness.t)],
        witness.mode,
        states=states,
        inverses=(
            [witness.letter_matrix(witness.t + j + 1) for j in range(witness.t)]
            if witness.mode == GROUP
            else None
        ),
    )
    lambdas = {letter: witness.letter_lambda(letter) for letter in letters}

    words: list[tuple[int, ...]] = []
    mus: list[np.ndarray] = []
    residuals: list[float] = []
    syllable_counts: list[int] = []
    very_reduced_flags: list[bool] = []
    top_residuals: list[float] = []
    flats: list[np.ndarray] = []
    for word, state in iter_ball(system, max_len, budget=budget):
        mu, _ = state_mu(state)
        parts = syllables(word, witness.t)
        pred = np.zeros(witness.n)
        for base, exp in parts:
            letter = base if exp > 0 else base + witness.t
            pred += abs(exp) * lambdas[letter]
        words.append(word)
        mus.append(mu)
        residuals.append(float(np.abs(mu - pred).max()))
        top_residuals.append(float(abs(mu[0] - pred[0])))
        syllable_counts.append(len(parts))
        very_reduced_flags.append(is_very_reduced(word, witness.t))
        flats.append(
            np.concatenate([state.mats[0].ravel(), [state.logs[0]]])
        )

    # (i) freeness: a group-mode check; semigroup balls record the pairwise
    # separation as data but pass vacuously.
    min_sep, word_a, word_b = _freeness_scan(np.array(flats), words)
    if witness.mode == GROUP:
        freeness_pass = bool(min_sep >= FREENESS_SEPARATION)
        if not freeness_pass:
            offender = min(word_a, word_b)
            raise FreenessFailure(
                f"words {word_a} and {word_b} coincide within separation "
                f"{min_sep:.3e}",
                offender,
            )
    else:
        freeness_pass = True

    # (ii) cone membership
    cone = witness.cone
    max_dir_err = 0.0
    for word, mu in zip(words, mus):
        max_dir_err = max(max_dir_err, cone.direction_error(mu))
        if not cone.contains(mu):
            raise ConeEscape(
                f"projection of word {word} leaves the cone "
                f"(direction error {cone.direction_error(mu):.4f} vs radius "
                f"{cone.angular_radius:.4f})",
                word,
            )
    cone_pass = True

    # (iii) additivity: fit the box on <=2-syllable words, validate the rest.
    # The box radius is the largest residual seen on the fit set; the claim
    # validated on longer words is that residuals grow at most linearly in
    # the syllable count with that radius as the slope.
    m_box = M_BOX_FLOOR
    ln_c_emp = 0.0
    for res, top_res, count in zip(residuals, top_residuals, syllable_counts):
        if count <= 2:
            m_box = max(m_box, res)
            ln_c_emp = max(ln_c_emp, top_res)
    max_syll = max(syllable_counts)
    residual_by_syll = [0.0] * max_syll
    for word, res, count, very in zip(
        words, residuals, syllable_counts, very_reduced_flags
    ):
        residual_by_syll[count - 1] = max(residual_by_syll[count - 1], res)
        allowance = (count + 1 if very else count + 2) * m_box
        if res > allowance:
            raise AdditivityFailure(
                f"word {word} has residual {res:.4f} above "
                f"{'' if very else 'non-very-reduced '}allowance {allowance:.4f}",
                word,
            )
    additivity_pass = True

    # involution consistency across the ball (group mode)
    iota_err = 0.0
    if witness.mode == GROUP:
        index = {w: k for k, w in enumerate(words)}
        for word, mu in zip(words, mus):
            inv_word = tuple(
                _inverse_id(letter, witness.t) for letter in reversed(word)
            )
            k = index.get(inv_word)
            if k is not None:
                iota_err = max(
                    iota_err,
                    float(np.abs(mus[k] - np.sort(-mu)[::-1]).max()),
                )

    # (iv) margin growth
    margin_by_length = None
    slope = intercept = None
    margin_pass = None
    if margin is not None:
        minima = [math.inf] * max_len
        argmin_word = None
        overall = math.inf
        for word, mu in zip(words, mus):
            val = mu_margin(mu, margin)
            l = len(word) - 1
            if val < minima[l]:
                minima[l] = val
            if val < overall:
                overall = val
                argmin_word = word
        margin_by_length = tuple(minima)
        if max_len >= 3:
            xs = np.arange(2, max_len + 1, dtype=float)
            ys = np.array(minima[1:])
            slope, intercept = (float(v) for v in np.polyfit(xs, ys, 1))
        else:
            slope, intercept = 0.0, float(minima[-1])
        margin_pass = bool(slope > 0.0)
        if not margin_pass:
            raise MarginDegeneration(
                f"margin minima fit has non-positive slope {slope:.4f} "
                f"(overall minimum {overall:.4f} at word {argmin_word})",
                argmin_word,
            )

    report = WordBallReport(
        max_len=max_len,
        mode=witness.mode,
        word_count=len(words),
        freeness_pass=freeness_pass,
        min_separation=float(min_sep),
        cone_pass=cone_pass,
        max_direction_error=float(max_dir_err),
        additivity_pass=additivity_pass,
        m_box=float(m_box),
        residual_by_syllables=tuple(residual_by_syll),
        max_residual=float(max(residuals)),
        iota_consistency=float(iota_err),
        margin_kind=margin.kind if margin is not None else None,
        margin_by_length=margin_by_length,
        margin_slope=slope,
        margin_intercept=intercept,
        margin_pass=margin_pass,
    )
    return replace(
        witness,
        word_ball=report,
        empirical_constants={"m_box": float(m_box), "ln_c_emp": float(ln_c_emp)},
    )


# ---------------------------------------------------------------------------
# End-to-end pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PipelineResult:
    pair: PairSpec
    decision: Decision
    cone: Cone | None
    witness: SchottkyWitness | None
    probe: GrowthProbe | None
    probe_b_plus_distances: np.ndarray | None
    stage_seconds: dict[str, float]


@contextmanager
def _stage(name: str):
    try:
        yield
    except ProperactError as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


def _subgroup_probe(
    pair: PairSpec, e_iota: SubspaceQ, seed: int
) -> tuple[GrowthProbe | None, np.ndarray | None]:
    """Conjugation probe companion for negative decisions: a subgroup-line
    diagonal conjugating a generic element keeps the projection near the
    involution-fixed span while its norm diverges."""
    if pair.v_h.dim == 0:
        return None, None
    n = pair.chamber.ambient_dim
    coeffs = np.zeros(n)
    for k, row in enumerate(pair.v_h.basis):
        coeffs += (k + 1) * np.array([float(v) for v in row])
    if float(np.abs(coeffs).max()) == 0.0:
        return None, None
    g = np.diag(np.exp(coeffs))
    rng = substream(seed, STREAM_PROBE)
    f = rng.normal(size=(n, n))
    det = np.linalg.det(f)
    f = f / (np.sign(det) * abs(det) ** (1.0 / n))
    probe = growth_probe(g, f, np.linalg.inv(f), PROBE_POWERS)
    basis = np.array([[float(v) for v in row] for row in e_iota.basis])
    if basis.size == 0:
        return probe, None
    q, _ = np.linalg.qr(basis.T)
    proj = q @ (q.T @ probe.mu_f.T)
    dists = np.abs(probe.mu_f - proj.T).max(axis=1)
    return probe, dists


def construct_witness(
    pair: PairSpec,
    t: int = DEFAULT_T,
    seed: int = 0,
    max_m: int = DEFAULT_MAX_M,
    mode: str = GROUP,
    samples: int = DEFAULT_SAMPLES,
) -> tuple[Decision, SchottkyWitness, dict[str, float]]:
    """Decide, then build a certified witness without word-ball verification.

    Raises PreconditionFailed when the decision is negative (nothing to
    construct), UnsupportedFamily outside the special-linear families.
    Stage names are attached to propagated errors.
    """
    if pair.family == FAMILY_SO_FORMS:
        raise UnsupportedFamily(
            "the matrix-level pipeline needs a special-linear family; "
            "indefinite orthogonal pairs are decided at the chamber level only"
        )
    chamber = pair.chamber
    times: dict[str, float] = {}

    start = time.perf_counter()
    with _stage("decide"):
        decision = decide_existence(pair)
        weyl = enumerate_weyl(chamber)
        w0 = longest_element(chamber, weyl)
        e_iota = b_plus_span(opposition_involution(w0), chamber)
    times["decide"] = time.perf_counter() - start
    if not decision.exists:
        raise PreconditionFailed(
            f"decision is {decision.outcome}; no witness can exist"
        )

    start = time.perf_counter()
    with _stage("cone"):
        cone = build_avoiding_cone(e_iota, pair.v_h, weyl, chamber)
    times["cone"] = time.perf_counter() - start

    start = time.perf_counter()
    with _stage("generators"):
        candidates = construct_generators(
            chamber.ambient_dim, cone, t, seed, mode=mode
        )
    times["generators"] = time.perf_counter() - start

    start = time.perf_counter()
    with _stage("powering"):
        witness = power_search(candidates, max_m, samples=samples)
    times["powering"] = time.perf_counter() - start
    return decision, witness, times


def properness_pipeline(
    pair: PairSpec,
    n: int | None = None,
    t: int = DEFAULT_T,
    max_len: int = DEFAULT_L,
    seed: int = 0,
    max_m: int = DEFAULT_MAX_M,
    mode: str = GROUP,
    margin: MarginFn | None = None,
    samples: int = DEFAULT_SAMPLES,
) -> PipelineResult:
    """Decide, and on a positive decision construct and verify a witness.

    Negative decisions return the refuting Weyl element inside the decision
    together with a conjugation-probe companion showing the projections of
    conjugated generic elements hugging the involution-fixed span.
    """
    if pair.family == FAMILY_SO_FORMS:
        raise UnsupportedFamily(
            "the matrix-level pipeline needs a special-linear family; "
            "indefinite orthogonal pairs are decided at the chamber level only"
        )
    chamber = pair.chamber
    if n is None:
        n = chamber.ambient_dim
    if n != chamber.ambient_dim:
        raise BadParameters(
            f"pipeline dimension {n} does not match the pair's ambient "
            f"dimension {chamber.ambient_dim}"
        )
    times: dict[str, float] = {}

    start = time.perf_counter()
    with _stage("decide"):
        decision = decide_existence(pair)
        weyl = enumerate_weyl(chamber)
        w0 = longest_element(chamber, weyl)
        e_iota = b_plus_span(opposition_involution(w0), chamber)
    times["decide"] = time.perf_counter() - start

    if not decision.exists:
        start = time.perf_counter()
        with _stage("probe"):
            probe, dists = _subgroup_probe(pair, e_iota, seed)
        times["probe"] = time.perf_counter() - start
        return PipelineResult(
            pair=pair,
            decision=decision,
            cone=None,
            witness=None,
            probe=probe,
            probe_b_plus_distances=dists,
            stage_seconds=times,
        )

    start = time.perf_counter()
    with _stage("cone"):
        cone = build_avoiding_cone(e_iota, pair.v_h, weyl, chamber)
    times["cone"] = time.perf_counter() - start

    start = time.perf_counter()
    with _stage("generators"):
        candidates = construct_generators(n, cone, t, seed, mode=mode)
    times["generators"] = time.perf_counter() - start

    start = time.perf_counter()
    with _stage("powering"):
        witness = power_search(candidates, max_m, samples=samples)
    times["powering"] = time.perf_counter() - start

    start = time.perf_counter()
    with _stage("verification"):
        if margin is None:
            margin = margin_fn_for(pair)
        witness = verify_word_ball(witness, margin, max_len)
    times["verification"] = time.perf_counter() - start

    return PipelineResult(
        pair=pair,
        decision=decision,
        cone=cone,
        witness=witness,
        probe=None,
        probe_b_plus_distances=None,
        stage_seconds=times,
    )
