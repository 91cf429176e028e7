"""Systems (finite multisets) over the index set J = {1..n}.

A :class:`System` is an immutable count map.  Indices are 1-based, matching
the way configurations are written down by hand.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Iterator, Mapping, Sequence

from .exactlin import QQ, Field, SubspaceRep, rank

Slot = tuple[int, int]  # (index, copy number)


@dataclass(frozen=True, order=True)
class System:
    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for i, c in self.items:
            if c <= 0:
                raise ValueError(f"multiplicity of {i} must be positive, got {c}")
        if list(self.items) != sorted(self.items) or len({i for i, _ in self.items}) != len(self.items):
            raise ValueError("items must be sorted with distinct indices")

    @classmethod
    def of(cls, counts: Mapping[int, int] | Iterable[int] = ()) -> "System":
        """Build from a count map, or from an iterable of indices (with repeats)."""
        if isinstance(counts, Mapping):
            c = {int(i): int(v) for i, v in counts.items() if int(v) != 0}
        else:
            c = Counter(int(i) for i in counts)
        for i, v in c.items():
            if v < 0:
                raise ValueError(f"negative multiplicity for index {i}")
        return cls(tuple(sorted(c.items())))

    @classmethod
    def from_slots(cls, slots: Iterable[Slot]) -> "System":
        return cls.of([i for i, _ in slots])

    def __getitem__(self, i: int) -> int:
        for j, c in self.items:
            if j == i:
                return c
        return 0

    def counts(self) -> dict[int, int]:
        return dict(self.items)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.items)

    def __len__(self) -> int:
        return sum(c for _, c in self.items)

    def __bool__(self) -> bool:
        return bool(self.items)

    def __add__(self, other: "System") -> "System":
        c = Counter(self.counts())
        c.update(other.counts())
        return System.of(c)

    def __sub__(self, other: "System") -> "System":
        c = self.counts()
        for i, v in other.items:
            if c.get(i, 0) < v:
                raise ValueError(f"cannot remove {v} x [{i}] from {self}")
            c[i] -= v
        return System.of(c)

    def leq(self, other: "System") -> bool:
        """The partial order S <= T (pointwise multiplicities)."""
        return all(other[i] >= c for i, c in self.items)

    def factorial(self) -> int:
        from math import factorial

        out = 1
        for _, c in self.items:
            out *= factorial(c)
        return out

    def slots(self) -> list[Slot]:
        """Expansion into distinct occurrences, ordered by index then copy."""
        return [(i, r) for i, c in self.items for r in range(c)]

    def __str__(self) -> str:
        if not self.items:
            return "0"
        return " + ".join(f"[{i}]" if c == 1 else f"{c}[{i}]" for i, c in self.items)

    def __repr__(self) -> str:
        return f"System({dict(self.items)})"


def unit(i: int, count: int = 1) -> System:
    return System(((i, count),)) if count else System()


def d_H(S: System, T: System) -> int:
    idx = set(S.support) | set(T.support)
    return sum(abs(S[i] - T[i]) for i in idx)


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Configuration:
    """Ambient data: field, dim V = k, |J| = n, number of bases m, vectors v_1..v_n."""

    field: Field
    k: int
    m: int
    vectors: tuple[tuple, ...]
    n: int = dc_field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", len(self.vectors))
        object.__setattr__(self, "vectors", tuple(self.field.vector(v) for v in self.vectors))
        if self.k < 1 or self.m < 1:
            raise ConfigurationError("need k >= 1 and m >= 1")
        if self.n < self.k:
            raise ConfigurationError(f"n = {self.n} < k = {self.k}")
        if any(len(v) != self.k for v in self.vectors):
            raise ConfigurationError(f"every vector must have length k = {self.k}")
        if rank(self.vectors, self.field) != self.k:
            raise ConfigurationError("vectors do not span V (rank < k)")

    @classmethod
    def build(cls, vectors: Sequence[Sequence], m: int, field: Field = QQ, k: int | None = None):
        if k is None:
            k = len(vectors[0])
        return cls(field, k, m, tuple(tuple(v) for v in vectors))

    def v(self, i: int) -> tuple:
        if not 1 <= i <= self.n:
            raise IndexError(f"index {i} outside J = 1..{self.n}")
        return self.vectors[i - 1]

    def is_zero(self, i: int) -> bool:
        return all(x == 0 for x in self.v(i))

    def check_system(self, T: System) -> None:
        for i in T.support:
            if not 1 <= i <= self.n:
                raise ConfigurationError(f"index {i} outside J = 1..{self.n}")


def mu(config: Configuration, T: System, U: SubspaceRep) -> int:
    """Total multiplicity of the indices of T whose vectors lie in U."""
    return sum(c for i, c in T.items if config.v(i) in U)


def is_independent(config: Configuration, I: Iterable[int]) -> bool:
    I = list(I)
    if len(I) != config.k or len(set(I)) != len(I):
        return False
    return rank([config.v(i) for i in I], config.field) == config.k


def is_basis(config: Configuration, part: System) -> bool:
    """A k-system whose vectors form a basis (so every multiplicity is 1)."""
    return len(part) == config.k and is_independent(config, part.support)


def v_sys(config: Configuration, T: System) -> Counter:
    """Push T forward to a multiset of vectors."""
    out: Counter = Counter()
    for i, c in T.items:
        out[config.v(i)] += c
    return out


def iter_subsystems(T: System, size: int) -> Iterator[System]:
    """All S <= T with |S| = size, in lexicographic order of count vectors."""
    items = T.items

    def rec(pos: int, left: int, acc: list):
        if pos == len(items):
            if left == 0:
                yield System.of(dict(acc))
            return
        i, c = items[pos]
        rest = sum(cc for _, cc in items[pos + 1:])
        for take in range(min(c, left), -1, -1):
            if left - take > rest:
                break
            yield from rec(pos + 1, left - take, acc + [(i, take)])

    yield from rec(0, size, [])


@dataclass(frozen=True)
class Decomposition:
    """m parts plus a tail.  Strongness is checked by :meth:`verify`, not assumed."""

    parts: tuple[System, ...]
    tail: System = System()

    def total(self) -> System:
        out = self.tail
        for p in self.parts:
            out = out + p
        return out

    def problems(self, config: Configuration, T: System | None = None) -> list[str]:
        out = []
        if len(self.parts) != config.m:
            out.append(f"expected {config.m} parts, got {len(self.parts)}")
        for j, p in enumerate(self.parts, 1):
            if not is_basis(config, p):
                out.append(f"part {j} = {p} is not a basis")
        if T is not None and self.total() != T:
            out.append(f"parts and tail sum to {self.total()}, not {T}")
        return out

    def verify(self, config: Configuration, T: System | None = None) -> bool:
        return not self.problems(config, T)
