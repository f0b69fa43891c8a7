"""Restricted root systems, Weyl groups, and the chamber-level decision.

Everything in this module is exact: root data and subspaces live over the
rationals, Weyl elements are signed permutations stored as integer arrays,
and the scans used by the decision procedure run in (exact) int64 numpy with
any found witness re-verified by a Fraction rank test.

The central question answered here: given a reductive symmetric pair encoded
by a Weyl chamber and the canonical flat of the subgroup, does the ambient
group admit a non-virtually-abelian discrete subgroup acting properly on the
quotient?  The answer is read off from whether some Weyl translate of the
subgroup's flat contains the fixed subspace of the opposition involution.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    BadParameters,
    DimensionMismatch,
    NotFound,
    RankCapExceeded,
    UnsupportedFamily,
)
from .exact import (
    Mat,
    Vec,
    dot,
    identity_mat,
    integerize_rows,
    mat,
    mat_neg,
    mat_vec,
    nullspace,
    rank_exact,
    rref,
    to_fraction,
    vec,
)

DEFAULT_RANK_CAP = 7
RANK_CAP_ENV = "PROPERACT_RANK_CAP"


def effective_rank_cap(rank_cap: int | None = None) -> int:
    """Resolve the enumeration cap: explicit arg, else env var, else 7."""
    if rank_cap is not None:
        return int(rank_cap)
    env = os.environ.get(RANK_CAP_ENV)
    return int(env) if env else DEFAULT_RANK_CAP


# ---------------------------------------------------------------------------
# Chamber data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChamberData:
    """A closed Weyl chamber presented in orthogonal coordinates.

    ``simple_roots`` and ``positive_roots`` are rational linear functionals
    on the ambient space (rows).  ``trace_constraint`` is the functional cut
    out by the determinant for type A, None otherwise.
    """

    type_label: str
    series: str  # "A" | "B" | "D"
    rank: int
    ambient_dim: int
    simple_roots: Mat
    positive_roots: Mat
    weyl_generators: tuple[Mat, ...]
    trace_constraint: Vec | None

    def interior_point(self) -> Vec:
        """A fixed integral point strictly inside the chamber."""
        d = self.ambient_dim
        if self.series == "A":
            return vec(d - 1 - 2 * i for i in range(d))  # sums to zero
        return vec(range(d, 0, -1))

    def chamber_span_dim(self) -> int:
        return self.rank


def _unit(d: int, i: int, s: int = 1) -> Vec:
    return tuple(Fraction(s) if j == i else Fraction(0) for j in range(d))


def _perm_sign_matrix(perm: Sequence[int], sign: Sequence[int]) -> Mat:
    d = len(perm)
    return tuple(_unit(d, perm[i], sign[i]) for i in range(d))


def chamber_a(rank: int) -> ChamberData:
    """Type A_rank: dominant diagonals of the special linear group."""
    if rank < 1:
        raise BadParameters("type A needs rank >= 1")
    n = rank + 1
    simple = [vec([0] * i + [1, -1] + [0] * (n - i - 2)) for i in range(n - 1)]
    positive = [
        tuple(
            Fraction(1) if k == i else Fraction(-1) if k == j else Fraction(0)
            for k in range(n)
        )
        for i in range(n)
        for j in range(i + 1, n)
    ]
    gens = []
    for i in range(n - 1):
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        gens.append(_perm_sign_matrix(perm, [1] * n))
    return ChamberData(
        type_label=f"A{rank}",
        series="A",
        rank=rank,
        ambient_dim=n,
        simple_roots=tuple(simple),
        positive_roots=tuple(positive),
        weyl_generators=tuple(gens),
        trace_constraint=vec([1] * n),
    )


def chamber_b(rank: int) -> ChamberData:
    """Type B_rank: signed permutations, chamber x1 >= ... >= x_m >= 0."""
    if rank < 1:
        raise BadParameters("type B needs rank >= 1")
    m = rank
    simple = [vec([0] * i + [1, -1] + [0] * (m - i - 2)) for i in range(m - 1)]
    simple.append(_unit(m, m - 1))
    positive = []
    for i in range(m):
        for j in range(i + 1, m):
            positive.append(
                tuple(
                    Fraction(1) if k == i else Fraction(-1) if k == j else Fraction(0)
                    for k in range(m)
                )
            )
            positive.append(
                tuple(
                    Fraction(1) if k in (i, j) else Fraction(0) for k in range(m)
                )
            )
        positive.append(_unit(m, i))
    gens = []
    for i in range(m - 1):
        perm = list(range(m))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        gens.append(_perm_sign_matrix(perm, [1] * m))
    gens.append(_perm_sign_matrix(list(range(m)), [1] * (m - 1) + [-1]))
    return ChamberData(
        type_label=f"B{rank}",
        series="B",
        rank=rank,
        ambient_dim=m,
        simple_roots=tuple(simple),
        positive_roots=tuple(positive),
        weyl_generators=tuple(gens),
        trace_constraint=None,
    )


def chamber_d(rank: int) -> ChamberData:
    """Type D_rank: evenly signed permutations, chamber x1 >= ... >= |x_m|."""
    if rank < 2:
        raise BadParameters("type D needs rank >= 2")
    m = rank
    simple = [vec([0] * i + [1, -1] + [0] * (m - i - 2)) for i in range(m - 1)]
    simple.append(
        tuple(Fraction(1) if k in (m - 2, m - 1) else Fraction(0) for k in range(m))
    )
    positive = []
    for i in range(m):
        for j in range(i + 1, m):
            positive.append(
                tuple(
                    Fraction(1) if k == i else Fraction(-1) if k == j else Fraction(0)
                    for k in range(m)
                )
            )
            positive.append(
                tuple(Fraction(1) if k in (i, j) else Fraction(0) for k in range(m))
            )
    gens = []
    for i in range(m - 1):
        perm = list(range(m))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        gens.append(_perm_sign_matrix(perm, [1] * m))
    # Reflection in e_{m-1} + e_m: swaps the last two coordinates with signs.
    perm = list(range(m))
    perm[m - 2], perm[m - 1] = perm[m - 1], perm[m - 2]
    sign = [1] * m
    sign[m - 2] = sign[m - 1] = -1
    gens.append(_perm_sign_matrix(perm, sign))
    return ChamberData(
        type_label=f"D{rank}",
        series="D",
        rank=rank,
        ambient_dim=m,
        simple_roots=tuple(simple),
        positive_roots=tuple(positive),
        weyl_generators=tuple(gens),
        trace_constraint=None,
    )


def classical_weyl_order(series: str, rank: int) -> int:
    if series == "A":
        return math.factorial(rank + 1)
    if series == "B":
        return 2**rank * math.factorial(rank)
    if series == "D":
        return 2 ** (rank - 1) * math.factorial(rank)
    raise BadParameters(f"unknown series {series!r}")


# ---------------------------------------------------------------------------
# Signed permutations and the Weyl group
# ---------------------------------------------------------------------------


class SignedMap:
    """A signed permutation acting by (w x)_i = sign_i * x_{perm_i}."""

    __slots__ = ("perm", "sign")

    def __init__(self, perm: Sequence[int], sign: Sequence[int]):
        self.perm = tuple(int(p) for p in perm)
        self.sign = tuple(int(s) for s in sign)

    def apply(self, x: Sequence) -> tuple:
        return tuple(s * x[p] for p, s in zip(self.perm, self.sign))

    def apply_float(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        return np.asarray(self.sign) * x[list(self.perm)]

    @property
    def matrix(self) -> Mat:
        return _perm_sign_matrix(self.perm, self.sign)

    def compose(self, other: "SignedMap") -> "SignedMap":
        """self o other (apply ``other`` first)."""
        perm = tuple(other.perm[p] for p in self.perm)
        sign = tuple(s * other.sign[p] for p, s in zip(self.perm, self.sign))
        return SignedMap(perm, sign)

    def inverse_map(self) -> "SignedMap":
        d = len(self.perm)
        perm = [0] * d
        sign = [0] * d
        for i, (p, s) in enumerate(zip(self.perm, self.sign)):
            perm[p] = i
            sign[p] = s
        return SignedMap(perm, sign)

    def is_identity(self) -> bool:
        return self.perm == tuple(range(len(self.perm))) and all(
            s == 1 for s in self.sign
        )

    def key(self) -> tuple:
        return (self.perm, self.sign)

    def __eq__(self, other):
        return isinstance(other, SignedMap) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


class WeylElement(SignedMap):
    """A Weyl group element: a signed permutation plus chamber context.

    ``matrix`` (rational) and ``word`` (a shortest expression in the simple
    generators, found by the descent algorithm) are computed lazily.
    """

    __slots__ = ("chamber", "index", "_word")

    def __init__(
        self,
        perm: Sequence[int],
        sign: Sequence[int],
        chamber: ChamberData,
        index: int | None = None,
    ):
        super().__init__(perm, sign)
        self.chamber = chamber
        self.index = index
        self._word: tuple[int, ...] | None = None

    def inverse(self) -> "WeylElement":
        inv = self.inverse_map()
        return WeylElement(inv.perm, inv.sign, self.chamber)

    def times(self, other: "WeylElement") -> "WeylElement":
        comp = self.compose(other)
        return WeylElement(comp.perm, comp.sign, self.chamber)

    @property
    def word(self) -> tuple[int, ...]:
        """One shortest expression as indices into ``chamber.weyl_generators``."""
        if self._word is None:
            self._word = self._descent_word()
        return self._word

    def _descent_word(self) -> tuple[int, ...]:
        gens = [
            SignedMap(
                tuple(row.index(next(x for x in row if x != 0)) for row in g),
                tuple(int(next(x for x in row if x != 0)) for row in g),
            )
            for g in self.chamber.weyl_generators
        ]
        simple = self.chamber.simple_roots
        w: SignedMap = SignedMap(self.perm, self.sign)
        picked: list[int] = []
        guard = 4 * len(simple) ** 2 + 8
        while not w.is_identity():
            for i, alpha in enumerate(simple):
                img = w.apply(alpha)
                lead = next((x for x in img if x != 0), None)
                if lead is not None and lead < 0:
                    w = w.compose(gens[i])
                    picked.append(i)
                    break
            else:
                raise NotFound("descent stalled; element not in this Weyl group")
            if len(picked) > guard:
                raise NotFound("descent did not terminate")
        return tuple(reversed(picked))

    def __repr__(self):
        return f"WeylElement(perm={self.perm}, sign={self.sign})"


class WeylGroup(Sequence):
    """The full Weyl group as a lazily materialized sequence.

    Elements are stored as two integer arrays (permutations and signs); a
    ``WeylElement`` wrapper is built on indexing.  Index 0 is the identity.
    """

    def __init__(self, chamber: ChamberData, perms: np.ndarray, signs: np.ndarray):
        self.chamber = chamber
        self.perms = perms
        self.signs = signs

    def __len__(self) -> int:
        return self.perms.shape[0]

    def __getitem__(self, i) -> WeylElement:
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return WeylElement(
            tuple(int(x) for x in self.perms[i]),
            tuple(int(x) for x in self.signs[i]),
            self.chamber,
            index=int(i) if i >= 0 else len(self) + int(i),
        )

    def __iter__(self) -> Iterator[WeylElement]:
        for i in range(len(self)):
            yield self[i]

    @property
    def identity(self) -> WeylElement:
        return self[0]


_WEYL_ARRAYS: dict[tuple[str, int], tuple[np.ndarray, np.ndarray]] = {}


def _weyl_arrays(series: str, rank: int) -> tuple[np.ndarray, np.ndarray]:
    key = (series, rank)
    if key in _WEYL_ARRAYS:
        return _WEYL_ARRAYS[key]
    if series == "A":
        d = rank + 1
        perms = np.array(list(itertools.permutations(range(d))), dtype=np.int16)
        signs = np.ones_like(perms, dtype=np.int8)
    else:
        d = rank
        base = np.array(list(itertools.permutations(range(d))), dtype=np.int16)
        patterns = np.array(
            list(itertools.product((1, -1), repeat=d)), dtype=np.int8
        )
        if series == "D":
            keep = (patterns < 0).sum(axis=1) % 2 == 0
            patterns = patterns[keep]
        k = patterns.shape[0]
        perms = np.repeat(base, k, axis=0)
        signs = np.tile(patterns, (base.shape[0], 1))
    expected = classical_weyl_order(series, rank)
    if perms.shape[0] != expected:
        raise NotFound(
            f"enumeration produced {perms.shape[0]} elements, expected {expected}"
        )
    _WEYL_ARRAYS[key] = (perms, signs)
    return _WEYL_ARRAYS[key]


def enumerate_weyl(chamber: ChamberData, rank_cap: int | None = None) -> WeylGroup:
    """Enumerate the Weyl group of ``chamber`` (identity first, fixed order).

    The order is deterministic: permutations lexicographically, then sign
    patterns lexicographically with +1 before -1.  Raises RankCapExceeded
    above the configured cap.
    """
    cap = effective_rank_cap(rank_cap)
    if chamber.rank > cap:
        raise RankCapExceeded(
            f"rank {chamber.rank} exceeds enumeration cap {cap}"
        )
    perms, signs = _weyl_arrays(chamber.series, chamber.rank)
    return WeylGroup(chamber, perms, signs)


def _apply_all(
    perms: np.ndarray, signs: np.ndarray, point: np.ndarray
) -> np.ndarray:
    """Image of an integer point under every group element; exact int64."""
    return signs.astype(np.int64) * point.astype(np.int64)[perms]


def longest_element(chamber: ChamberData, weyl: WeylGroup) -> WeylElement:
    """The unique element sending the open chamber to its negative.

    Found by scanning the full group against a fixed interior point; raises
    NotFound unless exactly one element qualifies.
    """
    point = np.array([int(x) for x in chamber.interior_point()], dtype=np.int64)
    roots = integerize_rows(chamber.simple_roots)
    images = _apply_all(weyl.perms, weyl.signs, point)
    vals = images @ roots.T.astype(np.int64)
    mask = (vals < 0).all(axis=1)
    hits = np.flatnonzero(mask)
    if hits.size != 1:
        raise NotFound(f"expected one longest element, found {hits.size}")
    return weyl[int(hits[0])]


def opposition_involution(w0: WeylElement) -> Mat:
    """The opposition involution in the log picture: x -> -w0 x."""
    return mat_neg(w0.matrix)


def involution_signed_map(w0: WeylElement) -> SignedMap:
    """Same involution as a signed permutation (sign-negated longest element)."""
    return SignedMap(w0.perm, tuple(-s for s in w0.sign))


# ---------------------------------------------------------------------------
# Rational subspaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubspaceQ:
    """A rational subspace in canonical (RREF-basis) form."""

    basis: Mat  # rows; RREF, zero rows dropped
    dim: int

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence]) -> "SubspaceQ":
        reduced, _ = rref(mat(rows))
        return cls(basis=reduced, dim=len(reduced))

    @classmethod
    def from_equations(cls, rows: Iterable[Sequence], ambient: int) -> "SubspaceQ":
        basis = nullspace(mat(rows), ncols=ambient)
        return cls(basis=basis, dim=len(basis))

    @classmethod
    def zero(cls, ambient: int) -> "SubspaceQ":
        return cls(basis=(), dim=0)

    def ambient_dim(self, default: int | None = None) -> int:
        if self.basis:
            return len(self.basis[0])
        if default is None:
            raise DimensionMismatch("zero subspace has no recorded ambient dimension")
        return default

    def annihilator_rows(self, ambient: int) -> Mat:
        """Functionals vanishing exactly on the subspace."""
        if not self.basis:
            return identity_mat(ambient)
        return nullspace(self.basis, ncols=ambient)

    def contains_subspace(self, other: "SubspaceQ") -> bool:
        if other.dim == 0:
            return True
        if other.dim > self.dim:
            return False
        stacked = self.basis + other.basis
        return rank_exact(stacked) == self.dim

    def contains_vector(self, x: Sequence) -> bool:
        x = vec(x)
        if all(v == 0 for v in x):
            return True
        return rank_exact(self.basis + (x,)) == self.dim

    def intersection_dim(self, other: "SubspaceQ") -> int:
        if self.dim == 0 or other.dim == 0:
            return 0
        stacked = self.basis + other.basis
        return self.dim + other.dim - rank_exact(stacked)

    def transformed(self, w: SignedMap) -> "SubspaceQ":
        return SubspaceQ.from_rows([w.apply(row) for row in self.basis])


def b_plus_span(iota: Mat, chamber: ChamberData) -> SubspaceQ:
    """Span of the involution-fixed part of the chamber.

    Returns the kernel of (iota - identity), intersected with the trace
    constraint for type A (automatic for these involutions, but enforcing it
    keeps the contract explicit).  This subspace is spanned by the fixed
    cone inside the chamber: symmetrizing any interior point of the chamber
    yields a fixed interior point, which the function verifies.
    """
    d = chamber.ambient_dim
    ident = identity_mat(d)
    rows = [tuple(iota[i][j] - ident[i][j] for j in range(d)) for i in range(d)]
    if chamber.trace_constraint is not None:
        rows.append(chamber.trace_constraint)
    out = SubspaceQ.from_equations(rows, ambient=d)
    # Sanity: symmetrizing the canonical interior point must land strictly
    # inside the chamber (the involution permutes the simple roots).
    c = chamber.interior_point()
    sym = tuple((a + b) / 2 for a, b in zip(c, mat_vec(iota, c)))
    for alpha in chamber.simple_roots:
        if dot(alpha, sym) <= 0:
            raise NotFound("involution does not preserve the chamber")
    return out


def b_plus_decomposition(x: Sequence, iota: Mat):
    """Split x = b + m with b fixed and m anti-fixed by the involution.

    Exact on rational input; float otherwise.  Returns (b, m).  When x lies
    in the chamber, b does too (the chamber is convex and involution-stable).
    """
    if all(isinstance(v, (int, Fraction)) for v in x):
        xv = vec(x)
        ix = mat_vec(iota, xv)
        b = tuple((a + c) / 2 for a, c in zip(xv, ix))
        m = tuple((a - c) / 2 for a, c in zip(xv, ix))
        return b, m
    xf = np.asarray(x, dtype=float)
    iota_f = np.array([[float(v) for v in row] for row in iota])
    ix = iota_f @ xf
    return (xf + ix) / 2, (xf - ix) / 2


# ---------------------------------------------------------------------------
# Containment scans
# ---------------------------------------------------------------------------


def contains_b_plus(
    e_iota: SubspaceQ, v_h: SubspaceQ, weyl: WeylGroup | Iterable[WeylElement]
) -> WeylElement | None:
    """First Weyl element w (lowest index) with e_iota contained in w(v_h).

    Uses the exact integer identity <c, w^{-1} b> = <w c, b> for annihilator
    rows c of v_h and basis vectors b of e_iota; any hit is confirmed
    with the Fraction rank test.  Returns None when no element qualifies,
    in particular immediately when dim e_iota > dim v_h.
    """
    fixed_space = e_iota
    if fixed_space.dim > v_h.dim:
        return None
    if fixed_space.dim == 0:
        first = weyl[0] if isinstance(weyl, WeylGroup) else next(iter(weyl))
        return first

    if isinstance(weyl, WeylGroup):
        ambient = weyl.chamber.ambient_dim
        constraints = integerize_rows(v_h.annihilator_rows(ambient))
        basis = integerize_rows(fixed_space.basis)
        perms = weyl.perms
        signs = weyl.signs.astype(np.int64)
        mask = np.ones(len(weyl), dtype=bool)
        for c in constraints:
            wc = signs * c.astype(np.int64)[perms]
            prods = wc @ basis.T
            mask &= (prods == 0).all(axis=1)
            if not mask.any():
                return None
        idx = int(np.flatnonzero(mask)[0])
        w = weyl[idx]
        transformed = v_h.transformed(w)
        if not transformed.contains_subspace(fixed_space):
            raise NotFound("integer scan and exact rank test disagree")
        return w

    for w in weyl:
        if v_h.transformed(w).contains_subspace(fixed_space):
            return w
    return None


def kobayashi_proper(
    v1: SubspaceQ, v2: SubspaceQ, weyl: WeylGroup | Iterable[WeylElement]
) -> bool:
    """Exact transversality criterion: v1 meets every Weyl image of v2 only at 0.

    A float singular-value prefilter certifies clearly full-rank stacks (the
    backward-error bound keeps this rigorous for small integer matrices);
    borderline cases fall through to the exact rank test.
    """
    if v1.dim == 0 or v2.dim == 0:
        return True
    elements = list(weyl) if not isinstance(weyl, WeylGroup) else weyl
    b1 = [list(map(to_fraction, row)) for row in v1.basis]
    full = v1.dim + v2.dim
    if full > v1.ambient_dim():
        return False  # every image intersects v1 by dimension count
    for w in elements:
        rows2 = [w.apply(row) for row in v2.basis]
        stacked = mat(b1 + [list(r) for r in rows2])
        arr = np.array([[float(x) for x in row] for row in stacked])
        if min(arr.shape) == 0:
            continue
        svals = np.linalg.svd(arr, compute_uv=False)
        if full <= arr.shape[1] and svals.size == full:
            smax = svals[0] if svals.size else 0.0
            if svals[-1] > 1e-7 * max(1.0, smax):
                continue  # certified full rank: trivial intersection
        if rank_exact(stacked) < full:
            return False
    return True


# ---------------------------------------------------------------------------
# Encoded families and the decision procedure
# ---------------------------------------------------------------------------


class Outcome:
    NO_INFINITE_DISCRETE = "NoInfiniteDiscrete"
    ONLY_VIRTUALLY_ABELIAN = "OnlyVirtuallyAbelian"
    EXISTS_FREE_ZARISKI_DENSE = "ExistsFreeZariskiDense"


NEGATIVE_OUTCOMES = (Outcome.NO_INFINITE_DISCRETE, Outcome.ONLY_VIRTUALLY_ABELIAN)


@dataclass(frozen=True)
class Decision:
    outcome: str
    witness_w: WeylElement | None
    no_compact_quotient: bool
    dims: tuple[int, int]  # (dim fixed subspace, dim v_h)

    @property
    def exists(self) -> bool:
        return self.outcome == Outcome.EXISTS_FREE_ZARISKI_DENSE


@dataclass(frozen=True)
class PairSpec:
    """An encoded homogeneous space G/H at the chamber level."""

    family: str
    params: tuple[tuple[str, int], ...]
    chamber: ChamberData
    v_h: SubspaceQ
    rank_h: int
    gh_noncompact: bool
    margin_kind: tuple[str, int, int] | None  # (kind, ambient length, parameter)

    def param(self, name: str) -> int:
        return dict(self.params)[name]

    def params_dict(self) -> dict[str, int]:
        return dict(self.params)


FAMILY_SL_BLOCK = "sl_n_over_sl_p_x_sl_np"
FAMILY_SL_WINDOW = "sl_n_over_sl_m_x_i"
FAMILY_SP = "sl_2m_over_sp"
FAMILY_SO_IN_SL = "sl_n_over_so_pq"
FAMILY_SO_FORMS = "so_p1q_over_so_pq"

FAMILY_PARAM_NAMES: dict[str, tuple[str, ...]] = {
    FAMILY_SL_BLOCK: ("n", "p"),
    FAMILY_SL_WINDOW: ("n", "m"),
    FAMILY_SP: ("m",),
    FAMILY_SO_IN_SL: ("p", "q"),
    FAMILY_SO_FORMS: ("p", "q"),
}

FAMILY_DESCRIPTIONS: dict[str, str] = {
    FAMILY_SL_BLOCK: "SL(n) / (SL(p) x SL(n-p))",
    FAMILY_SL_WINDOW: "SL(n) / (SL(m) x 1)",
    FAMILY_SP: "SL(2m) / Sp(m)",
    FAMILY_SO_IN_SL: "SL(p+q) / SO(p,q)",
    FAMILY_SO_FORMS: "SO(p+1,q) / SO(p,q)",
}


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise BadParameters(message)


def build_pair_spec(
    family: str,
    params: Mapping[str, int],
    rank_cap: int | None = None,
) -> PairSpec:
    """Build the chamber-level encoding of one cataloged family member.

    Validates parameters, selects the ambient chamber, and writes down the
    canonical flat of H as an exact subspace together with the tag of the
    distance function for the Weyl orbit of that flat.
    """
    if family not in FAMILY_PARAM_NAMES:
        raise UnsupportedFamily(f"unknown family {family!r}")
    names = FAMILY_PARAM_NAMES[family]
    missing = [k for k in names if k not in params]
    extra = [k for k in params if k not in names]
    if missing or extra:
        raise BadParameters(
            f"family {family} expects parameters {names}; "
            f"missing {missing}, unexpected {extra}"
        )
    p = {k: int(params[k]) for k in names}
    cap = effective_rank_cap(rank_cap)

    if family == FAMILY_SL_BLOCK:
        n, pp = p["n"], p["p"]
        _require(n >= 2, "need n >= 2")
        _require(1 <= pp <= n - 1, "need 1 <= p <= n-1")
        _check_cap(n - 1, cap)
        ch = chamber_a(n - 1)
        eq1 = vec([1] * pp + [0] * (n - pp))
        eq2 = vec([0] * pp + [1] * (n - pp))
        v_h = SubspaceQ.from_equations([eq1, eq2], ambient=n)
        return PairSpec(
            family=family,
            params=tuple(sorted(p.items())),
            chamber=ch,
            v_h=v_h,
            rank_h=n - 2,
            gh_noncompact=True,
            margin_kind=("sl_block", n, pp),
        )

    if family == FAMILY_SL_WINDOW:
        n, m = p["n"], p["m"]
        _require(n >= 2, "need n >= 2")
        _require(1 <= m <= n - 1, "need 1 <= m <= n-1")
        _check_cap(n - 1, cap)
        ch = chamber_a(n - 1)
        rows = [_unit(n, j) for j in range(m, n)]
        rows.append(vec([1] * n))
        v_h = SubspaceQ.from_equations(rows, ambient=n)
        return PairSpec(
            family=family,
            params=tuple(sorted(p.items())),
            chamber=ch,
            v_h=v_h,
            rank_h=m - 1,
            gh_noncompact=True,
            margin_kind=("sl_window", n, m),
        )

    if family == FAMILY_SP:
        m = p["m"]
        _require(m >= 1, "need m >= 1")
        n = 2 * m
        _check_cap(n - 1, cap)
        ch = chamber_a(n - 1)
        rows = []
        for i in range(m):
            row = [Fraction(0)] * n
            row[i] = Fraction(1)
            row[n - 1 - i] = Fraction(1)
            rows.append(tuple(row))
        v_h = SubspaceQ.from_equations(rows, ambient=n)
        return PairSpec(
            family=family,
            params=tuple(sorted(p.items())),
            chamber=ch,
            v_h=v_h,
            rank_h=m,
            gh_noncompact=m >= 2,
            margin_kind=("sp_pairs", n, m),
        )

    if family == FAMILY_SO_IN_SL:
        pp, q = p["p"], p["q"]
        _require(pp >= 1 and q >= 1, "need p, q >= 1")
        n = pp + q
        _require(n >= 2, "need p + q >= 2")
        _check_cap(n - 1, cap)
        d = min(pp, q)
        ch = chamber_a(n - 1)
        rows = []
        for i in range(d):
            row = [Fraction(0)] * n
            row[i] = Fraction(1)
            row[n - 1 - i] = Fraction(1)
            rows.append(tuple(row))
        for j in range(d, n - d):
            rows.append(_unit(n, j))
        v_h = SubspaceQ.from_equations(rows, ambient=n)
        return PairSpec(
            family=family,
            params=tuple(sorted(p.items())),
            chamber=ch,
            v_h=v_h,
            rank_h=d,
            gh_noncompact=True,
            margin_kind=("so_pairs", n, d),
        )

    if family == FAMILY_SO_FORMS:
        pp, q = p["p"], p["q"]
        _require(pp >= 0 and q >= 1, "need p >= 0 and q >= 1")
        _require(pp + 1 + q >= 3, "ambient form needs p+1+q >= 3")
        r = min(pp + 1, q)
        if pp + 1 == q:
            _require(q >= 2, "split-even chamber needs q >= 2")
            ch = chamber_d(q)
        else:
            _require(r >= 1, "need rank >= 1")
            ch = chamber_b(r)
        _check_cap(ch.rank, cap)
        h = min(pp, q)
        if h == 0:
            v_h = SubspaceQ.zero(ch.ambient_dim)
        else:
            v_h = SubspaceQ.from_rows(
                [_unit(ch.ambient_dim, i) for i in range(h)]
            )
        return PairSpec(
            family=family,
            params=tuple(sorted(p.items())),
            chamber=ch,
            v_h=v_h,
            rank_h=h,
            gh_noncompact=True,
            margin_kind=None,
        )

    raise UnsupportedFamily(family)


def _check_cap(rank: int, cap: int) -> None:
    if rank > cap:
        raise RankCapExceeded(f"chamber rank {rank} exceeds cap {cap}")


def decide_existence(pair: PairSpec, rank_cap: int | None = None) -> Decision:
    """Decide whether a free, Zariski-dense, properly acting subgroup exists.

    Order of business: equal ranks give the compactness obstruction
    (no infinite discrete subgroup acts properly at all); otherwise a Weyl
    translate of the subgroup flat containing the involution-fixed subspace
    blocks everything except virtually abelian groups; otherwise existence.
    """
    chamber = pair.chamber
    weyl = enumerate_weyl(chamber, rank_cap)
    w0 = longest_element(chamber, weyl)
    iota = opposition_involution(w0)
    e_iota = b_plus_span(iota, chamber)
    dims = (e_iota.dim, pair.v_h.dim)

    if pair.rank_h == chamber.rank:
        return Decision(
            outcome=Outcome.NO_INFINITE_DISCRETE,
            witness_w=None,
            no_compact_quotient=pair.gh_noncompact,
            dims=dims,
        )

    witness = contains_b_plus(e_iota, pair.v_h, weyl)
    if witness is not None:
        return Decision(
            outcome=Outcome.ONLY_VIRTUALLY_ABELIAN,
            witness_w=witness,
            no_compact_quotient=pair.gh_noncompact,
            dims=dims,
        )
    return Decision(
        outcome=Outcome.EXISTS_FREE_ZARISKI_DENSE,
        witness_w=None,
        no_compact_quotient=False,
        dims=dims,
    )


def iter_family_cases(
    family: str, n_max: int = 9, rank_max: int = 7
) -> Iterator[dict[str, int]]:
    """Yield the default catalog sweep parameters for one family."""
    if family == FAMILY_SL_BLOCK:
        for n in range(2, n_max + 1):
            for p in range(1, n):
                yield {"n": n, "p": p}
    elif family == FAMILY_SL_WINDOW:
        for n in range(2, n_max + 1):
            for m in range(1, n):
                yield {"n": n, "m": m}
    elif family == FAMILY_SP:
        for m in range(1, n_max // 2 + 1):
            yield {"m": m}
    elif family == FAMILY_SO_IN_SL:
        for n in range(2, n_max + 1):
            for p in range(1, n):
                q = n - p
                if p <= q:  # SO(p,q) ~ SO(q,p); list each space once
                    yield {"p": p, "q": q}
    elif family == FAMILY_SO_FORMS:
        for p in range(0, rank_max + 1):
            for q in range(1, rank_max + 1):
                if p + 1 + q < 3:
                    continue
                r = q if p + 1 == q else min(p + 1, q)
                if r <= rank_max and (p + 1 != q or q >= 2):
                    yield {"p": p, "q": q}
    else:
        raise UnsupportedFamily(family)
