"""Packing a vector system into m bases, or proving that it cannot be done.

The search works on *slots*: every occurrence of an index in a system is a
separate element ``(index, copy)``, so repeated vectors never have to be
rescaled to become distinct.  All choices are smallest-slot-first.

Overview of the algorithms:

* :func:`split_into_bases` (tail l = 0) starts from the sorted slots chunked
  k at a time and repeatedly applies :func:`improve_once`, an exchange along
  a chain R(0), R(1), ... of coefficient supports through the parts taken
  cyclically.  Every success raises the total rank of the parts by at least
  one; a chain that stops growing for m consecutive steps certifies a
  subspace U holding more than m * dim U slots.
* :func:`strong_decompose` handles a tail l >= 1.  For l = 1 it tries each
  possible tail element.  For l >= 2 it isolates the minimal tight subspace
  (found by enumeration), recurses inside it with l - 1, and splits the
  quotient with tail 0.

Violating subspaces are always reported in the span-of-support form.  This
is no loss: for any subspace U, the span U' of the system's vectors lying
in U carries the same slots and dim U' <= dim U, so U' violates the bound
whenever U does.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

from .exactlin import Field, SubspaceRep, coords_in_span, extract_spanning_subset, quotient_coords, span
from .systems import Configuration, Decomposition, Slot, System, mu


class PackingError(ValueError):
    pass


class SizeError(PackingError):
    pass


class PreconditionError(PackingError):
    pass


class NotQualified(PackingError):
    pass


@dataclass(frozen=True)
class ViolationCertificate:
    """A subspace U with mu(T, U) > l + m * dim U."""

    system: System
    l: int
    support_subset: tuple[int, ...]
    subspace: SubspaceRep
    mu_value: int
    bound: int

    def problems(self, config: Configuration) -> list[str]:
        out = []
        U = span([config.v(i) for i in self.support_subset], config.field, config.k)
        if U != self.subspace:
            out.append("subspace is not the span of support_subset")
        actual = mu(config, self.system, self.subspace)
        if actual != self.mu_value:
            out.append(f"recomputed mu {actual} != recorded {self.mu_value}")
        if self.bound != self.l + config.m * self.subspace.dim:
            out.append("bound is not l + m dim U")
        if actual < self.l + 1 + config.m * self.subspace.dim:
            out.append(f"mu {actual} does not exceed bound {self.bound}")
        return out

    def verify(self, config: Configuration) -> bool:
        return not self.problems(config)


def make_certificate(config: Configuration, T: System, l: int, indices) -> ViolationCertificate:
    indices = tuple(sorted(set(indices)))
    U = span([config.v(i) for i in indices], config.field, config.k)
    cert = ViolationCertificate(T, l, indices, U, mu(config, T, U), l + config.m * U.dim)
    if cert.mu_value <= cert.bound:
        raise AssertionError(f"internal: subspace {indices} does not violate the bound")
    return cert


# --------------------------------------------------------------------------
# slot workspace


@dataclass
class _Space:
    """Slots with vectors in some coordinate system of a dim-dimensional space."""

    field: Field
    dim: int
    m: int
    vec: dict[Slot, tuple]

    def span(self, slots) -> SubspaceRep:
        return span([self.vec[s] for s in slots], self.field, self.dim)

    def rank(self, slots) -> int:
        return self.span(slots).dim if slots else 0

    def is_zero(self, s: Slot) -> bool:
        return all(x == 0 for x in self.vec[s])

    def basis_of(self, slots: Sequence[Slot]) -> list[Slot]:
        return [slots[p] for p in extract_spanning_subset([self.vec[s] for s in slots], self.field)]

    def count_in(self, slots, U: SubspaceRep) -> int:
        return sum(1 for s in slots if self.vec[s] in U)


def _space(config: Configuration, T: System) -> tuple[_Space, list[Slot]]:
    slots = T.slots()
    return _Space(config.field, config.k, config.m, {s: config.v(s[0]) for s in slots}), slots


@dataclass(frozen=True)
class _Cert:
    """Internal certificate: slots spanning the violating subspace."""

    slots: tuple[Slot, ...]


def residue(j: int, m: int) -> int:
    """The label in 1..m congruent to j mod m."""
    return (j - 1) % m + 1


@dataclass
class AugmentState:
    """Trace of one exchange step.  Part labels are 1-based."""

    parts: list[list[Slot]]
    B: list[list[Slot]]
    R: list[list[Slot]] = dc_field(default_factory=list)
    N: int | None = None
    theta: int | None = None
    b: dict[int, Slot] = dc_field(default_factory=dict)
    new_parts: list[list[Slot]] | None = None
    certificate_slots: tuple[Slot, ...] | None = None
    dim_before: int = 0
    dim_after: int = 0


def _augment(ws: _Space, parts: list[list[Slot]]) -> AugmentState:
    m = ws.m
    f = ws.field
    if len(parts) != m:
        raise PreconditionError(f"expected {m} parts")
    if ws.rank(parts[0]) == ws.dim:
        raise PreconditionError("part 1 is already a basis")
    B = [ws.basis_of(p) for p in parts]
    st = AugmentState([list(p) for p in parts], B)
    st.dim_before = sum(len(b) for b in B)
    spans = [ws.span(p) if p else span([], f, ws.dim) for p in parts]
    bvecs = [[ws.vec[c] for c in Bj] for Bj in B]

    def lam(p: int, b: Slot) -> list:
        # coefficients of b in B^(p); b must lie in the span of part p
        co = coords_in_span(ws.vec[b], bvecs[p - 1], f)
        assert co is not None
        return co

    R0 = [s for s in parts[0] if s not in set(B[0])]
    R = [R0]
    j = 1
    while True:
        p = residue(j, m)
        if not all(ws.vec[b] in spans[p - 1] for b in R[j - 1]):
            st.N = j - 1
            break
        support = set()
        for b in R[j - 1]:
            for c, x in zip(B[p - 1], lam(p, b)):
                if x != 0:
                    support.add(c)
        Rj = [c for c in B[p - 1] if c in support]
        R.append(Rj)
        if j >= 2:
            assert R[j - 1] == [] or ws.span(R[j]).contains_space(ws.span(R[j - 1]))
        if j - m >= 1 and len(Rj) == len(R[j - m]):
            # the window R(j-m+1..j) spans one space U, one set per part,
            # each of size dim U, and R(0) adds at least one more slot
            st.R = R
            st.theta = j - m + 1
            st.certificate_slots = tuple(Rj)
            return st
        j += 1
    st.R = R
    N = st.N
    nxt = residue(N + 1, m)
    b: dict[int, Slot] = {}
    b[N] = next(s for s in R[N] if ws.vec[s] not in spans[nxt - 1])
    for jj in range(N, 0, -1):
        p = residue(jj, m)
        cands = [s for s in R[jj - 1] if dict(zip(B[p - 1], lam(p, s)))[b[jj]] != 0]
        b[jj - 1] = cands[0]
        if jj - 1 >= m + 1:
            assert b[jj - 1] not in R[jj - 1 - m]
    bset = set(B[nxt - 1])
    b[N + 1] = next(s for s in parts[nxt - 1] if s not in bset)
    assert len({b[i] for i in range(N + 1)}) == N + 1

    new = [list(pp) for pp in parts]
    # b_i moves from part [i] to part [i+1] for 1 <= i <= N,
    # b_{N+1} moves from part [N+1] to part 1
    for i in range(1, N + 1):
        new[residue(i, m) - 1].remove(b[i])
    if nxt != 1:
        new[nxt - 1].remove(b[N + 1])
    for i in range(1, N + 1):
        new[residue(i + 1, m) - 1].append(b[i])
    if nxt != 1:
        new[0].append(b[N + 1])
    new = [sorted(pp) for pp in new]
    st.b = b
    st.new_parts = new
    st.dim_after = sum(ws.rank(pp) for pp in new)
    if st.dim_after < st.dim_before + 1:
        raise AssertionError("internal: exchange did not raise the total rank")
    return st


def _split(ws: _Space, slots: Sequence[Slot], on_step: Callable | None = None):
    """Tail-0 split of ``slots`` (m*dim of them) into m bases, or a _Cert."""
    m, k = ws.m, ws.dim
    slots = sorted(slots)
    if len(slots) != m * k:
        raise SizeError(f"need {m * k} slots, got {len(slots)}")
    zeros = [s for s in slots if ws.is_zero(s)]
    if zeros:
        return _Cert(())
    parts = [slots[i * k:(i + 1) * k] for i in range(m)]
    steps = 0
    while True:
        bad = next((p for p in range(m) if ws.rank(parts[p]) < k), None)
        if bad is None:
            return parts
        rot = parts[bad:] + parts[:bad]
        st = _augment(ws, rot)
        if on_step is not None:
            on_step(st)
        if st.certificate_slots is not None:
            return _Cert(st.certificate_slots)
        new = st.new_parts
        parts = new[m - bad:] + new[:m - bad] if bad else new
        steps += 1
        if steps > m * k:
            raise AssertionError("internal: more than mk improvements")


def _strong(ws: _Space, slots: Sequence[Slot], l: int):
    """Split into m bases plus an l-tail; returns (parts, tail) or a _Cert."""
    m, k = ws.m, ws.dim
    slots = sorted(slots)
    if len(slots) != m * k + l:
        raise SizeError(f"need {m * k + l} slots, got {len(slots)}")
    zeros = [s for s in slots if ws.is_zero(s)]
    if len(zeros) > l:
        return _Cert(())
    rest = [s for s in slots if s not in set(zeros)]
    l -= len(zeros)
    if l == 0:
        out = _split(ws, rest)
        return out if isinstance(out, _Cert) else (out, zeros)
    if l == 1:
        out = _strong_one(ws, rest)
    else:
        out = _strong_recursive(ws, rest, l)
    if isinstance(out, _Cert):
        return out
    parts, tail = out
    return parts, sorted(tail + zeros)


def _first_by_index(slots: Sequence[Slot]) -> list[Slot]:
    """One representative slot per index (copies carry the same vector)."""
    seen, out = set(), []
    for s in slots:
        if s[0] not in seen:
            seen.add(s[0])
            out.append(s)
    return out


def _strong_one(ws: _Space, slots: list[Slot]):
    """Tail of size one, no zero vectors: try each tail element in turn."""
    failures: dict[Slot, _Cert] = {}
    for a in _first_by_index(slots):
        out = _split(ws, [s for s in slots if s != a])
        if not isinstance(out, _Cert):
            return out, [a]
        failures[a] = out
    return _shrink_to_certificate(ws, slots, 1, failures)


def _shrink_to_certificate(ws: _Space, slots: list[Slot], l: int, failures: dict[Slot, _Cert]) -> _Cert:
    """Combine the certificates of the failed subproblems T - a (tail l-1).

    Each such certificate U_a has mu(T, U_a) >= l + m dim U_a.  If a lies in
    U_a, U_a already violates the bound for T.  Otherwise intersect with the
    current tight space: either the intersection is tight too (and strictly
    smaller, as it misses a), or submodularity of mu makes U + U_a violate.
    """
    m = ws.m

    def cert_for(a: Slot) -> _Cert:
        rep = next(s for s in failures if s[0] == a[0])
        return failures[rep]

    def inside(U: SubspaceRep) -> list[Slot]:
        return [s for s in slots if ws.vec[s] in U]

    a = slots[0]
    U_slots = inside(ws.span(cert_for(a).slots))
    U = ws.span(U_slots)
    if ws.vec[a] in U:
        return _Cert(tuple(U_slots))
    while True:
        assert len(U_slots) >= l + m * U.dim
        a = U_slots[0]
        Ua_slots = inside(ws.span(cert_for(a).slots))
        Ua = ws.span(Ua_slots)
        if ws.vec[a] in Ua:
            return _Cert(tuple(Ua_slots))
        W_slots = [s for s in U_slots if ws.vec[s] in Ua]
        W = ws.span(W_slots) if W_slots else span([], ws.field, ws.dim)
        if len(W_slots) <= l - 1 + m * W.dim:
            both = sorted(set(U_slots) | set(Ua_slots))
            return _Cert(tuple(inside(ws.span(both))))
        if W.dim >= U.dim:
            raise AssertionError("internal: tight space did not shrink")
        U_slots, U = W_slots, W


def _tight_scan(ws: _Space, slots: list[Slot], l: int):
    """Enumerate spans of support subsets.

    Returns a _Cert for the first violating span, or the slots of the
    minimal tight subspace (intersection of all spans with equality).
    """
    m = ws.m
    reps = _first_by_index(slots)
    minimal = set(slots)
    for size in range(len(reps) + 1):
        for combo in itertools.combinations(reps, size):
            U = ws.span(combo) if combo else span([], ws.field, ws.dim)
            inside = [s for s in slots if ws.vec[s] in U]
            bound = l + m * U.dim
            if len(inside) > bound:
                return _Cert(tuple(inside))
            if len(inside) == bound:
                minimal &= set(inside)
    return sorted(minimal)


def _strong_recursive(ws: _Space, slots: list[Slot], l: int):
    """Tail l >= 2 without zero vectors: recurse through the minimal tight subspace."""
    m = ws.m
    found = _tight_scan(ws, slots, l)
    if isinstance(found, _Cert):
        return found
    A2 = found
    a = A2[0]
    U = ws.span(A2)
    g = U.dim
    basis = [ws.vec[s] for s in ws.basis_of(A2)]
    R = [s for s in A2 if s != a]
    inner = _Space(ws.field, g, m, {s: tuple(coords_in_span(ws.vec[s], basis, ws.field)) for s in R})
    sub = _strong(inner, R, l - 1)
    if isinstance(sub, _Cert):
        raise AssertionError("internal: subsystem on the tight subspace is not strong")
    r_parts, r_tail = sub
    outside = [s for s in slots if s not in set(A2)]
    quo = _Space(ws.field, ws.dim - g, m, {s: quotient_coords(ws.vec[s], U) for s in outside})
    if quo.dim == 0:
        if outside:
            raise AssertionError("internal: slots left outside a full tight space")
        q_parts = [[] for _ in range(m)]
    else:
        q_parts = _split(quo, outside)
        if isinstance(q_parts, _Cert):
            raise AssertionError("internal: quotient system is not strong")
    parts = [sorted(r + q) for r, q in zip(r_parts, q_parts)]
    return parts, sorted(r_tail + [a])


# --------------------------------------------------------------------------
# public operations


def _decomposition(parts, tail) -> Decomposition:
    return Decomposition(tuple(System.from_slots(p) for p in parts), System.from_slots(tail))


def _check(config: Configuration, T: System, size: int) -> None:
    config.check_system(T)
    if len(T) != size:
        raise SizeError(f"|T| = {len(T)}, expected {size}")


def improve_once(config: Configuration, parts: Sequence[Sequence[Slot]]):
    """One exchange step on m slot lists of size k whose first part is not a basis.

    Returns the :class:`AugmentState`; ``state.new_parts`` holds the improved
    parts, or ``state.certificate_slots`` the slots spanning a violating
    subspace.  Use :func:`improvement_result` for the plain result.
    """
    if len(parts) != config.m or any(len(p) != config.k for p in parts):
        raise PreconditionError(f"need {config.m} parts of size {config.k}")
    all_slots = [s for p in parts for s in p]
    ws = _Space(config.field, config.k, config.m, {s: config.v(s[0]) for s in all_slots})
    if all(ws.rank(p) == config.k for p in parts):
        raise PreconditionError("all parts are already bases")
    if ws.rank(parts[0]) == config.k:
        raise PreconditionError("part 1 is a basis; rotate a defective part to the front")
    return _augment(ws, [sorted(p) for p in parts])


def improvement_result(config: Configuration, parts):
    st = improve_once(config, parts)
    if st.certificate_slots is not None:
        T = System.from_slots(s for p in parts for s in p)
        return make_certificate(config, T, 0, [s[0] for s in st.certificate_slots])
    return st.new_parts


def split_into_bases(config: Configuration, T: System, on_step: Callable[[AugmentState], None] | None = None):
    """Split an mk-system into m bases; returns a Decomposition or a ViolationCertificate.

    ``on_step`` is called with every :class:`AugmentState` produced.
    """
    _check(config, T, config.m * config.k)
    ws, slots = _space(config, T)
    out = _split(ws, slots, on_step)
    if isinstance(out, _Cert):
        return make_certificate(config, T, 0, [s[0] for s in out.slots])
    dec = _decomposition(out, [])
    assert dec.verify(config, T), dec.problems(config, T)
    return dec


def strong_decompose(config: Configuration, T: System, l: int | None = None):
    """m bases plus an l-tail, or a ViolationCertificate.  ``l`` defaults to |T| - mk."""
    if l is None:
        l = len(T) - config.m * config.k
    if l < 0:
        raise SizeError("negative tail size")
    _check(config, T, config.m * config.k + l)
    ws, slots = _space(config, T)
    out = _strong(ws, slots, l)
    if isinstance(out, _Cert):
        return make_certificate(config, T, l, [s[0] for s in out.slots])
    dec = _decomposition(*out)
    assert dec.verify(config, T), dec.problems(config, T)
    return dec


def is_strong(config: Configuration, T: System, l: int | None = None) -> bool:
    return isinstance(strong_decompose(config, T, l), Decomposition)


def _support_spans(config: Configuration, T: System):
    """Spans of all subsets of supp T, smallest subsets first."""
    supp = T.support
    for size in range(len(supp) + 1):
        for combo in itertools.combinations(supp, size):
            yield combo, span([config.v(i) for i in combo], config.field, config.k)


def is_qualified_bruteforce(config: Configuration, T: System, l: int | None = None):
    """Check mu(T, U) <= l + m dim U over every span of support vectors.

    Returns ``(True, None)`` or ``(False, certificate)`` for the first
    violating span in subset order.
    """
    if l is None:
        l = len(T) - config.m * config.k
    _check(config, T, config.m * config.k + l)
    for combo, U in _support_spans(config, T):
        if mu(config, T, U) > l + config.m * U.dim:
            return False, make_certificate(config, T, l, combo)
    return True, None


def compute_A1(config: Configuration, T: System, jobs: int = 1) -> dict[int, Decomposition]:
    """Indices i for which T - [i] splits into m bases, with witnessing decompositions."""
    _check(config, T, config.m * config.k + 1)
    candidates = list(T.support)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(split_into_bases, [config] * len(candidates),
                                  [T - System.of([i]) for i in candidates]))
    else:
        results = [split_into_bases(config, T - System.of([i])) for i in candidates]
    out = {}
    for i, res in zip(candidates, results):
        if isinstance(res, Decomposition):
            out[i] = Decomposition(res.parts, System.of([i]))
    return out


def compute_A2_bruteforce(config: Configuration, T: System, l: int | None = None) -> set[int]:
    """Support of the minimal subspace U with mu(T, U) = l + m dim U."""
    if l is None:
        l = len(T) - config.m * config.k
    if l < 1:
        raise PackingError("A2 needs l >= 1")
    _check(config, T, config.m * config.k + l)
    result = set(T.support)
    for combo, U in _support_spans(config, T):
        val = mu(config, T, U)
        bound = l + config.m * U.dim
        if val > bound:
            raise NotQualified(f"T is not qualified: span of {combo} has mu {val} > {bound}")
        if val == bound:
            result &= {i for i in T.support if config.v(i) in U}
    return result
