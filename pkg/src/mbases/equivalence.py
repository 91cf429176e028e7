"""Good decompositions and the exchange walk that connects any two of them."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .packing import Decomposition, SizeError, ViolationCertificate, compute_A1, split_into_bases, strong_decompose
from .systems import Configuration, System, d_H, is_basis, unit


class UnsupportedParameter(ValueError):
    pass


class NotStrong(ValueError):
    pass


@dataclass(frozen=True)
class GoodDecomposition:
    T1: System
    T2: System
    witness: Decomposition

    @property
    def total(self) -> System:
        return self.T1 + self.T2

    def problems(self, config: Configuration) -> list[str]:
        out = []
        if len(self.T2) != config.m * config.k + 1:
            out.append(f"|T2| = {len(self.T2)} != mk + 1")
        if len(self.witness.tail) != 1:
            out.append("witness tail is not a single element")
        out += self.witness.problems(config, self.T2)
        return out

    def verify(self, config: Configuration) -> bool:
        return not self.problems(config)

    def same_split(self, other: "GoodDecomposition") -> bool:
        return (self.T1, self.T2) == (other.T1, other.T2)


def good_decompose(config: Configuration, T: System):
    """A good decomposition of T, or a certificate that none exists.

    T has one iff it is strong with tail l = |T| - mk: a strong decomposition
    of a T2 <= T extends by putting T - T2 into the tail, and conversely any
    tail element together with the m bases forms a strong T2.
    """
    l = len(T) - config.m * config.k
    if l < 1:
        raise SizeError(f"|T| = {len(T)} < mk + 1")
    res = strong_decompose(config, T, l)
    if isinstance(res, ViolationCertificate):
        return res
    a = res.tail.support[0]
    T2 = sum(res.parts, System()) + unit(a)
    return GoodDecomposition(res.tail - unit(a), T2, Decomposition(res.parts, unit(a)))


def good_from_T1(config: Configuration, T: System, T1: System) -> GoodDecomposition:
    """Complete a chosen T1 to a verified good decomposition of T."""
    T2 = T - T1
    res = strong_decompose(config, T2, 1)
    if isinstance(res, ViolationCertificate):
        raise NotStrong(f"T2 = {T2} is not a strong (mk+1)-system")
    return GoodDecomposition(T1, T2, res)


@dataclass(frozen=True)
class LocalRelationWitness:
    left: GoodDecomposition
    right: GoodDecomposition
    shared_parts: tuple[System, ...]
    left_tail: System
    right_tail: System

    def problems(self, config: Configuration) -> list[str]:
        out = []
        for j, p in enumerate(self.shared_parts, 1):
            if not is_basis(config, p):
                out.append(f"shared part {j} = {p} is not a basis")
        if len(self.shared_parts) != config.m:
            out.append("wrong number of shared parts")
        shared = sum(self.shared_parts, System())
        if len(self.left_tail) != 1 or len(self.right_tail) != 1:
            out.append("tails must be single elements")
        if shared + self.left_tail != self.left.T2:
            out.append("shared parts + left tail != left T2")
        if shared + self.right_tail != self.right.T2:
            out.append("shared parts + right tail != right T2")
        return out


@dataclass(frozen=True)
class CaseAlpha:
    i: int
    witness: Decomposition  # of T2, tail [i]


@dataclass(frozen=True)
class CaseBeta:
    a: int
    witness_T: Decomposition  # of T2, tail [a]
    witness_S: Decomposition  # of S2, tail [a]


def lemma33_step(config: Configuration, S2: System, T2: System):
    """Either T2 has a tail element i with T2(i) > S2(i) (case alpha), or T2
    and S2 share a tail element (case beta)."""
    size = config.m * config.k + 1
    if len(S2) != size or len(T2) != size:
        raise SizeError("both systems must have size mk + 1")
    A1T = compute_A1(config, T2)
    if not A1T:
        raise NotStrong(f"{T2} is not strong")
    for i in sorted(A1T):
        if T2[i] > S2[i]:
            return CaseAlpha(i, A1T[i])
    A1S = compute_A1(config, S2)
    if not A1S:
        raise NotStrong(f"{S2} is not strong")
    a = min(A1S)
    if a not in A1T:
        raise AssertionError("internal: shared tail element missing from A1(T2)")
    return CaseBeta(a, A1T[a], A1S[a])


@dataclass
class WalkChain:
    members: list[GoodDecomposition]
    witnesses: list[LocalRelationWitness]
    # tail distance before each loop iteration, and at the end
    distances: list[int] = dc_field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)


def _local(left: GoodDecomposition, right: GoodDecomposition, parts, lt: int, rt: int):
    return LocalRelationWitness(left, right, tuple(parts), unit(lt), unit(rt))


def walk(config: Configuration, left: GoodDecomposition, right: GoodDecomposition) -> WalkChain:
    """A chain of locally related good decompositions from ``left`` to ``right``."""
    if config.m < 2:
        raise UnsupportedParameter("walk needs m >= 2")
    if left.total != right.total:
        raise ValueError("left and right decompose different systems")
    for g in (left, right):
        if not g.verify(config):
            raise NotStrong("; ".join(g.problems(config)))
    lhs, rhs = [left], [right]
    lw: list[LocalRelationWitness] = []
    rw: list[LocalRelationWitness] = []
    distances = []
    while lhs[-1].T2 != rhs[-1].T2:
        T, S = lhs[-1], rhs[-1]
        dist = d_H(T.T2, S.T2)
        distances.append(dist)
        step = lemma33_step(config, S.T2, T.T2)
        if isinstance(step, CaseAlpha):
            i = step.i
            j = next(x for x in sorted(set(T.T1.support) | set(S.T2.support))
                     if T.T1[x] > S.T1[x] and T.T2[x] < S.T2[x])
            R2 = T.T2 + unit(j) - unit(i)
            R = GoodDecomposition(T.T1 - unit(j) + unit(i), R2, Decomposition(step.witness.parts, unit(j)))
            lw.append(_local(T, R, step.witness.parts, i, j))
            lhs.append(R)
            new_dist = d_H(R2, S.T2)
        else:
            a = step.a
            idx = sorted(set(T.T1.support) | set(S.T1.support) | set(T.T2.support) | set(S.T2.support))
            b = next(x for x in idx if T.T1[x] > S.T1[x] and T.T2[x] < S.T2[x])
            c = next(x for x in idx if T.T1[x] < S.T1[x] and T.T2[x] > S.T2[x])
            R = GoodDecomposition(T.T1 - unit(b) + unit(a), T.T2 + unit(b) - unit(a),
                                  Decomposition(step.witness_T.parts, unit(b)))
            Q = GoodDecomposition(S.T1 - unit(c) + unit(a), S.T2 + unit(c) - unit(a),
                                  Decomposition(step.witness_S.parts, unit(c)))
            lw.append(_local(T, R, step.witness_T.parts, a, b))
            rw.append(_local(S, Q, step.witness_S.parts, a, c))
            lhs.append(R)
            rhs.append(Q)
            new_dist = d_H(R.T2, Q.T2)
        if new_dist != dist - 2:
            raise AssertionError(f"internal: tail distance went {dist} -> {new_dist}")
    distances.append(0)
    # the two halves meet; drop the duplicate and reverse the right half
    members = lhs + rhs[-2::-1]
    witnesses = lw + [LocalRelationWitness(w.right, w.left, w.shared_parts, w.right_tail, w.left_tail)
                      for w in reversed(rw)]
    if rw:
        # the right half's last member was dropped; re-anchor its witness on lhs[-1]
        w = witnesses[len(lw)]
        witnesses[len(lw)] = LocalRelationWitness(lhs[-1], w.right, w.shared_parts, w.left_tail, w.right_tail)
    chain = WalkChain(members, witnesses, distances)
    ok, why = verify_chain(config, chain)
    if not ok:
        raise AssertionError(f"internal: walk produced an invalid chain: {why}")
    return chain


def verify_chain(config: Configuration, chain: WalkChain) -> tuple[bool, str]:
    """Mechanical check of a chain; returns (ok, diagnostic of the first failure)."""
    if not chain.members:
        return False, "empty chain"
    total = chain.members[0].total
    for n, g in enumerate(chain.members):
        if g.total != total:
            return False, f"member {n} decomposes {g.total}, not {total}"
        probs = g.problems(config)
        if probs:
            return False, f"member {n}: {probs[0]}"
    if len(chain.witnesses) != len(chain.members) - 1:
        return False, "need one witness per consecutive pair"
    for n, w in enumerate(chain.witnesses):
        if not (w.left.same_split(chain.members[n]) and w.right.same_split(chain.members[n + 1])):
            return False, f"witness {n} does not link members {n} and {n + 1}"
        probs = w.problems(config)
        if probs:
            return False, f"witness {n}: {probs[0]}"
    return True, "ok"


def locally_related(config: Configuration, left: GoodDecomposition, right: GoodDecomposition):
    """A LocalRelationWitness for the pair, or None."""
    if left.total != right.total:
        return None
    if left.T2 == right.T2:
        w = left.witness
        return LocalRelationWitness(left, right, w.parts, w.tail, w.tail)
    if d_H(left.T2, right.T2) != 2:
        return None
    a = next(i for i in left.T2.support if left.T2[i] > right.T2[i])
    b = next(i for i in right.T2.support if right.T2[i] > left.T2[i])
    res = split_into_bases(config, left.T2 - unit(a))
    if isinstance(res, ViolationCertificate):
        return None
    return LocalRelationWitness(left, right, res.parts, unit(a), unit(b))
