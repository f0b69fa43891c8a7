"""Exact linear algebra over the rationals.

Small dense systems only.  Vectors are tuples of ``Fraction``; matrices are
tuples of such rows.  Everything here is decision-grade: no floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]


def to_fraction(x) -> Fraction:
    """Coerce ints, ``"p/q"`` strings, integral floats and Fractions."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if not x.is_integer():
            raise ValueError(f"refusing to coerce non-integral float {x!r} to a rational")
        return Fraction(int(x))
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def vec(xs: Iterable) -> Vec:
    return tuple(to_fraction(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    out = tuple(vec(r) for r in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def identity_mat(d: int) -> Mat:
    return tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(d)) for i in range(d)
    )


def zero_vec(d: int) -> Vec:
    return tuple(Fraction(0) for _ in range(d))


def mat_vec(a: Mat, x: Sequence) -> Vec:
    x = vec(x) if not (x and isinstance(x[0], Fraction)) else tuple(x)
    return tuple(sum(row[j] * x[j] for j in range(len(x))) for row in a)


def mat_mul(a: Mat, b: Mat) -> Mat:
    bt = list(zip(*b))
    return tuple(
        tuple(sum(ra[k] * col[k] for k in range(len(ra))) for col in bt) for ra in a
    )


def mat_sub(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_neg(a: Mat) -> Mat:
    return tuple(tuple(-x for x in row) for row in a)


def transpose(a: Mat) -> Mat:
    return tuple(zip(*a))


def dot(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    return sum(a * b for a, b in zip(x, y))


def rref(rows: Iterable[Sequence]) -> tuple[Mat, tuple[int, ...]]:
    """Reduced row echelon form.

    Returns (rref matrix with zero rows dropped, pivot column indices).
    The output is the canonical representative of the row space.
    """
    work = [list(vec(r)) for r in rows]
    if not work:
        return (), ()
    ncols = len(work[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        pv = work[r][c]
        work[r] = [x / pv for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    reduced = tuple(tuple(row) for row in work[:r])
    return reduced, tuple(pivots)


def rank_exact(rows: Iterable[Sequence]) -> int:
    return len(rref(rows)[0])


def nullspace(rows: Iterable[Sequence], ncols: int | None = None) -> Mat:
    """Canonical basis (RREF rows) of {x : A x = 0} for A given by ``rows``."""
    rows = mat(rows)
    if not rows:
        if ncols is None:
            raise ValueError("need ncols for an empty constraint system")
        return identity_mat(ncols)
    ncols = len(rows[0])
    reduced, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -reduced[r][fc]
        basis.append(v)
    # The free-variable basis is already echelon-like; normalize anyway so the
    # representation is canonical regardless of construction order.
    return rref(basis)[0]


def integerize_rows(rows: Mat) -> np.ndarray:
    """Scale each row by the LCM of its denominators; return an int64 array.

    Row scaling preserves row spaces and zero sets, which is all the callers
    rely on.  Entries stay tiny for the root-system data handled here, so
    int64 arithmetic downstream is exact.
    """
    out = []
    for row in rows:
        mult = lcm(*(f.denominator for f in row)) if row else 1
        out.append([int(f * mult) for f in row])
    if not out:
        return np.zeros((0, 0), dtype=np.int64)
    arr = np.array(out, dtype=np.int64)
    if out and np.abs(arr).max(initial=0) > 2**20:
        # Downstream scans multiply by coordinates and sum over <= 16 terms;
        # keep a loud guard rather than silent overflow.
        raise ValueError("integerized matrix entries unexpectedly large")
    return arr


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def parse_rational(s: str) -> Fraction:
    return Fraction(s)
