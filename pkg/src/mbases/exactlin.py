"""Exact linear algebra over the rationals and prime fields.

Vectors are plain tuples of field elements: :class:`fractions.Fraction` for
the rationals, ``int`` residues in ``range(p)`` for GF(p).  Every routine is
deterministic: pivots are searched column by column, taking the first row
with a nonzero entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class DimensionMismatch(ValueError):
    pass


class SingularBasis(ValueError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Field:
    """Scalar field tag.  ``p is None`` selects the rationals."""

    p: int | None = None

    def __post_init__(self):
        if self.p is not None and not _is_prime(self.p):
            raise ValueError(f"GF({self.p}): modulus is not prime")

    @property
    def name(self) -> str:
        return "Q" if self.p is None else f"GF({self.p})"

    def __call__(self, x):
        """Coerce ``x`` (int, Fraction, or a string such as ``"-3/4"``)."""
        if self.p is None:
            return Fraction(x)
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in {self.name}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def add(self, a, b):
        return a + b if self.p is None else (a + b) % self.p

    def sub(self, a, b):
        return a - b if self.p is None else (a - b) % self.p

    def mul(self, a, b):
        return a * b if self.p is None else (a * b) % self.p

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a if self.p is None else pow(a, -1, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def neg(self, a):
        return -a if self.p is None else (-a) % self.p

    def vector(self, entries) -> tuple:
        return tuple(self(x) for x in entries)

    def fmt(self, a) -> str:
        return str(a)

    @classmethod
    def parse(cls, tag: str) -> "Field":
        """``"Q"`` / ``"QQ"`` or ``"GF(p)"`` / ``"Fp"``."""
        t = tag.strip().upper().replace(" ", "")
        if t in ("Q", "QQ", "RATIONALS"):
            return cls()
        if t.startswith("GF(") and t.endswith(")"):
            return cls(int(t[3:-1]))
        if t.startswith("F") and t[1:].isdigit():
            return cls(int(t[1:]))
        raise ValueError(f"unknown field tag {tag!r}")


QQ = Field()


def GF(p: int) -> Field:
    return Field(p)


def _check_lengths(rows: Sequence[Sequence], k: int | None = None) -> int:
    lengths = {len(r) for r in rows}
    if k is not None:
        lengths.add(k)
    if len(lengths) > 1:
        raise DimensionMismatch(f"row lengths differ: {sorted(lengths)}")
    return lengths.pop() if lengths else 0


def rref(rows: Sequence[Sequence], field: Field = QQ) -> tuple[list[list], list[int]]:
    """Reduced row echelon form.  Returns the nonzero rows and pivot columns."""
    ncols = _check_lengths(rows)
    mat = [[field(x) for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        found = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if found is None:
            continue
        mat[r], mat[found] = mat[found], mat[r]
        inv = field.inv(mat[r][c])
        mat[r] = [field.mul(inv, x) for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def rank(rows: Sequence[Sequence], field: Field = QQ) -> int:
    return len(rref(rows, field)[1])


@dataclass(frozen=True)
class SubspaceRep:
    """A subspace of F^k held as its reduced echelon basis."""

    field: Field
    k: int
    rows: tuple[tuple, ...]
    pivots: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, v: Sequence) -> list:
        """Remainder of ``v`` after clearing the pivot columns."""
        f = self.field
        r = list(v)
        for row, c in zip(self.rows, self.pivots):
            if r[c] != 0:
                coef = r[c]
                r = [f.sub(x, f.mul(coef, y)) for x, y in zip(r, row)]
        return r

    def __contains__(self, v) -> bool:
        return all(x == 0 for x in self.reduce(v))

    def contains_space(self, other: "SubspaceRep") -> bool:
        return all(row in self for row in other.rows)

    def __eq__(self, other):
        if not isinstance(other, SubspaceRep):
            return NotImplemented
        return (self.field, self.k, self.rows) == (other.field, other.k, other.rows)

    def __hash__(self):
        return hash((self.field, self.k, self.rows))


def span(vectors: Sequence[Sequence], field: Field = QQ, k: int | None = None) -> SubspaceRep:
    if k is None:
        if not vectors:
            raise ValueError("ambient dimension needed for an empty span")
        k = len(vectors[0])
    _check_lengths(vectors, k)
    rows, pivots = rref(vectors, field)
    return SubspaceRep(field, k, tuple(tuple(r) for r in rows), tuple(pivots))


def coords_in_span(v: Sequence, basis: Sequence[Sequence], field: Field = QQ) -> list | None:
    """Coefficients of ``v`` in a linearly independent ``basis``, or None if
    ``v`` lies outside its span."""
    k = _check_lengths(list(basis) + [v]) if basis else len(v)
    r = len(basis)
    # augmented system: columns are the basis vectors, last column is v
    aug = [[basis[j][i] for j in range(r)] + [v[i]] for i in range(k)]
    red, pivots = rref(aug, field)
    if r in pivots:
        return None
    if pivots != list(range(r)):
        raise SingularBasis("basis vectors are linearly dependent")
    return [red[j][r] for j in range(r)]


def coords_in_basis(v: Sequence, basis: Sequence[Sequence], field: Field = QQ) -> list:
    """Coordinates of ``v`` in a basis of the whole space."""
    k = len(v)
    if len(basis) != k or rank(basis, field) < k:
        raise SingularBasis("basis does not have full rank")
    return coords_in_span(v, basis, field)


def extract_spanning_subset(vectors: Sequence[Sequence], field: Field = QQ) -> list[int]:
    """Greedy smallest-position-first maximal independent subset (0-based)."""
    chosen: list[int] = []
    echelon: SubspaceRep | None = None
    for pos, v in enumerate(vectors):
        if echelon is None:
            if any(x != 0 for x in v):
                chosen.append(pos)
                echelon = span([v], field)
            continue
        if v not in echelon:
            chosen.append(pos)
            echelon = span(list(echelon.rows) + [v], field)
    return chosen


def quotient_coords(v: Sequence, U: SubspaceRep) -> tuple:
    """Coordinates of ``v + U`` in ``F^k / U``, read off the non-pivot columns."""
    r = U.reduce(v)
    pivots = set(U.pivots)
    return tuple(x for c, x in enumerate(r) if c not in pivots)
