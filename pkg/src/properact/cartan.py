"""Log-scale projections of SL(n, R) matrices and distance-to-subgroup margins.

The two projections: sorted log singular values (polar/K-A-K data) and
sorted log eigenvalue moduli (spectral data).  Margin functions translate
"how far is this matrix from looking like an element of the subgroup H"
into a sup-norm lower bound computed from those log coordinates; word-ball
profiles, censuses, and the conjugated-power probe build on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
import scipy.linalg

from .chamber import PairSpec
from .errors import (
    BadParameters,
    KindMismatch,
    OverflowRisk,
    SingularInput,
)
from .wordball import (
    GROUP,
    LetterSystem,
    RepState,
    iter_ball,
    letter_state,
    state_mu,
    state_mul,
)

DEFAULT_WORD_BUDGET = 500_000
MAX_PROBE_POWER = 60


# ---------------------------------------------------------------------------
# Log vectors and projections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogVector:
    """A chamber point in log coordinates.

    ``ordering`` records that coords are sorted non-increasing; ``det_shift``
    is the per-coordinate normalization ln|det|^(1/n) subtracted so unit-
    determinant inputs (and all normalized outputs) sum to zero.
    """

    coords: tuple[float, ...]
    ordering: bool = True
    det_shift: float = 0.0

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords)

    def __len__(self) -> int:
        return len(self.coords)


def _as_coords(x) -> np.ndarray:
    if isinstance(x, LogVector):
        return x.array
    return np.asarray(x, dtype=float)


def singular_values(g: np.ndarray) -> np.ndarray:
    """Singular values of an invertible matrix, sorted non-increasing."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if g.ndim != 2 or g.shape != (n, n):
        raise BadParameters("singular_values expects a square matrix")
    if not np.all(np.isfinite(g)):
        raise BadParameters("matrix entries must be finite")
    vals = scipy.linalg.svd(g, compute_uv=False, lapack_driver="gesvd")
    if vals[0] == 0.0 or vals[-1] <= n * np.finfo(float).eps * vals[0]:
        raise SingularInput("matrix not invertible within binary64 tolerance")
    return vals


def cartan_projection(g: np.ndarray) -> LogVector:
    """Sorted log singular values, normalized to determinant one.

    The applied normalization (ln of |det|^(1/n)) is recorded in det_shift;
    it is ~0 for unit-determinant input.
    """
    g = np.asarray(g, dtype=float)
    vals = singular_values(g)
    sign, logdet = np.linalg.slogdet(g)
    if sign == 0:
        raise SingularInput("matrix not invertible within binary64 tolerance")
    shift = float(logdet) / g.shape[0]
    coords = np.log(vals) - shift
    return LogVector(coords=tuple(float(c) for c in coords), ordering=True, det_shift=shift)


def lyapunov_projection(g: np.ndarray) -> LogVector:
    """Sorted log eigenvalue moduli, normalized to determinant one."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if g.ndim != 2 or g.shape != (n, n):
        raise BadParameters("lyapunov_projection expects a square matrix")
    sign, logdet = np.linalg.slogdet(g)
    if sign == 0 or not math.isfinite(float(logdet)):
        raise SingularInput("matrix not invertible within binary64 tolerance")
    moduli = np.sort(np.abs(np.linalg.eigvals(g)))[::-1]
    shift = float(logdet) / n
    coords = np.log(moduli) - shift
    return LogVector(coords=tuple(float(c) for c in coords), ordering=True, det_shift=shift)


def opposition_logs(x) -> np.ndarray:
    """The opposition involution on sorted log coordinates: reverse and negate."""
    c = _as_coords(x)
    return np.sort(-c)[::-1]


def state_projection(state: RepState) -> LogVector:
    """Cartan projection read off a renormalized product state."""
    mu, shift = state_mu(state)
    return LogVector(coords=tuple(float(v) for v in mu), ordering=True, det_shift=shift)


# ---------------------------------------------------------------------------
# Margin functions
# ---------------------------------------------------------------------------

KIND_SL_BLOCK = "sl_block"
KIND_SL_WINDOW = "sl_window"
KIND_SP_PAIRS = "sp_pairs"
KIND_SO_PAIRS = "so_pairs"

_MARGIN_KINDS = (KIND_SL_BLOCK, KIND_SL_WINDOW, KIND_SP_PAIRS, KIND_SO_PAIRS)


@dataclass(frozen=True)
class MarginFn:
    """Sup-norm lower bound on the distance to a subgroup's log-projection set.

    kind selects the closed form; params carries the ambient size n plus the
    family parameter.  All kinds are 1-Lipschitz for the sup norm and vanish
    exactly on the coordinate-relaxed superset of the target set.
    """

    kind: str
    params: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if self.kind not in _MARGIN_KINDS:
            raise KindMismatch(f"unknown margin kind {self.kind!r}")

    def param(self, name: str) -> int:
        return dict(self.params)[name]

    @property
    def n(self) -> int:
        return self.param("n")


def margin_fn(kind: str, **params: int) -> MarginFn:
    return MarginFn(kind=kind, params=tuple(sorted((k, int(v)) for k, v in params.items())))


def margin_fn_for(pair: PairSpec) -> MarginFn | None:
    """The margin function attached to a catalog family, when one exists."""
    if pair.margin_kind is None:
        return None
    kind, n, value = pair.margin_kind
    name = {"sl_block": "p", "sl_window": "m", "sp_pairs": "m", "so_pairs": "d"}[kind]
    return margin_fn(kind, n=n, **{name: value})


def mu_margin(x, margin: MarginFn) -> float:
    """Evaluate a margin function on log coordinates.

    sl_block(n, p): min over size-p index sets S of |sum_S x| / p.
    sl_window(n, m): the (n-m)-th smallest |x_j| - the exact sup-distance to
        vectors with at least n-m vanishing coordinates.
    sp_pairs(n=2m, m): max_i |x_i + x_{n+1-i}| / 2.
    so_pairs(n, d): max of the d pair terms |x_i + x_{n+1-i}| / 2 and the
        middle coordinates |x_j|, d < j <= n-d.
    """
    coords = _as_coords(x)
    n = margin.n
    if coords.shape != (n,):
        raise KindMismatch(
            f"margin kind {margin.kind} expects length {n}, got {coords.shape}"
        )
    if margin.kind == KIND_SL_BLOCK:
        p = margin.param("p")
        best = min(abs(float(coords[list(s)].sum())) for s in combinations(range(n), p))
        return best / p
    if margin.kind == KIND_SL_WINDOW:
        k = n - margin.param("m")
        if k <= 0:
            return 0.0
        return float(np.partition(np.abs(coords), k - 1)[k - 1])
    if margin.kind == KIND_SP_PAIRS:
        m = margin.param("m")
        return float(
            max(abs(coords[i] + coords[n - 1 - i]) for i in range(m)) / 2.0
        )
    if margin.kind == KIND_SO_PAIRS:
        d = margin.param("d")
        worst = max(
            (abs(coords[i] + coords[n - 1 - i]) / 2.0 for i in range(d)), default=0.0
        )
        mid = max((abs(coords[j]) for j in range(d, n - d)), default=0.0)
        return float(max(worst, mid))
    raise KindMismatch(f"unknown margin kind {margin.kind!r}")


# ---------------------------------------------------------------------------
# Word-ball profiles and censuses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarginProfile:
    """Per-length minima of a margin over the reduced word ball."""

    mode: str
    max_len: int
    min_margins: tuple[float, ...]  # index l-1 holds the length-l minimum
    word_counts: tuple[int, ...]
    best_word: tuple[int, ...]
    best_margin: float

    def floor_at(self, length: int) -> float:
        return self.min_margins[length - 1]


def margin_profile(
    generators: Sequence[np.ndarray],
    margin: MarginFn,
    max_len: int,
    mode: str = GROUP,
    budget: int = DEFAULT_WORD_BUDGET,
) -> MarginProfile:
    """Minimum margin per word length, plus the overall minimizing word.

    Ties on the global minimum keep the first word in enumeration order
    (lexicographic, shortest prefix first).
    """
    if max_len < 1:
        raise BadParameters("max_len must be >= 1")
    system = LetterSystem(generators, mode)
    mins = [math.inf] * max_len
    counts = [0] * max_len
    best_word: tuple[int, ...] = ()
    best = math.inf
    for word, state in iter_ball(system, max_len, budget=budget):
        value = mu_margin(state_mu(state)[0], margin)
        l = len(word)
        counts[l - 1] += 1
        if value < mins[l - 1]:
            mins[l - 1] = value
        if value < best:
            best = value
            best_word = word
    return MarginProfile(
        mode=mode,
        max_len=max_len,
        min_margins=tuple(mins),
        word_counts=tuple(counts),
        best_word=best_word,
        best_margin=best,
    )


@dataclass(frozen=True)
class CensusResult:
    """Words whose margin stays at or below the log radius."""

    radius: float
    log_radius: float
    max_len: int
    mode: str
    count: int
    per_length: tuple[int, ...]  # index l holds the count at length l (l=0: identity)
    words: tuple[tuple[int, ...], ...]
    margins: tuple[float, ...]


def census(
    generators: Sequence[np.ndarray],
    margin: MarginFn,
    radius: float,
    max_len: int,
    mode: str = GROUP,
    budget: int = DEFAULT_WORD_BUDGET,
) -> CensusResult:
    """Exact census of low-margin words over the enumerated ball.

    The identity word (length 0, margin 0) is part of the ball; it is
    counted whenever log(radius) >= 0.
    """
    if radius <= 0:
        raise BadParameters("radius must be positive")
    if max_len < 0:
        raise BadParameters("max_len must be >= 0")
    log_radius = math.log(radius)
    system = LetterSystem(generators, mode)
    per_length = [0] * (max_len + 1)
    words: list[tuple[int, ...]] = []
    margins: list[float] = []
    for word, state in iter_ball(
        system, max_len, include_identity=True, budget=budget
    ):
        value = 0.0 if not word else mu_margin(state_mu(state)[0], margin)
        if value <= log_radius:
            per_length[len(word)] += 1
            words.append(word)
            margins.append(value)
    return CensusResult(
        radius=float(radius),
        log_radius=log_radius,
        max_len=max_len,
        mode=mode,
        count=len(words),
        per_length=tuple(per_length),
        words=tuple(words),
        margins=tuple(margins),
    )


# ---------------------------------------------------------------------------
# Conjugated-power growth probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthProbe:
    """Projection paths of g^p f g^-p and g^p f' g^-p for p = 1..p_max."""

    p_max: int
    mu_f: np.ndarray  # shape (p_max, n)
    mu_fprime: np.ndarray
    diffs: np.ndarray  # sup-norm differences per p
    sup_diff: float


def growth_probe(
    g: np.ndarray, f: np.ndarray, fprime: np.ndarray, p_max: int
) -> GrowthProbe:
    """Track how conjugation by growing powers moves the two projections.

    Evaluated through renormalized exterior-power products, so the result
    stays accurate far beyond the condition range of one binary64 SVD; the
    power cap is still enforced as a documented guard.
    """
    if p_max < 1:
        raise BadParameters("p_max must be >= 1")
    if p_max > MAX_PROBE_POWER:
        raise OverflowRisk(f"p_max {p_max} exceeds the documented cap {MAX_PROBE_POWER}")
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    for other in (f, fprime):
        if np.asarray(other).shape != (n, n):
            raise BadParameters("probe matrices must share one square shape")
    s_g = letter_state(g)
    s_gi = letter_state(np.linalg.inv(g))
    s_f = letter_state(np.asarray(f, dtype=float))
    s_fp = letter_state(np.asarray(fprime, dtype=float))

    mu_f = np.empty((p_max, n))
    mu_fp = np.empty((p_max, n))
    diffs = np.empty(p_max)
    left = s_g
    right = s_gi
    for p in range(1, p_max + 1):
        if p > 1:
            left = state_mul(left, s_g)
            right = state_mul(right, s_gi)
        m1, _ = state_mu(state_mul(state_mul(left, s_f), right))
        m2, _ = state_mu(state_mul(state_mul(left, s_fp), right))
        mu_f[p - 1] = m1
        mu_fp[p - 1] = m2
        diffs[p - 1] = float(np.abs(m1 - m2).max())
    return GrowthProbe(
        p_max=p_max,
        mu_f=mu_f,
        mu_fprime=mu_fp,
        diffs=diffs,
        sup_diff=float(diffs.max()),
    )
