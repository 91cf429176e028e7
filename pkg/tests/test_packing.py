import random

import pytest

from mbases.bruteforce import all_splits, qualified_bruteforce, random_configuration, random_system
from mbases.exactlin import GF, QQ, span
from mbases.packing import (NotQualified, PreconditionError, SizeError, ViolationCertificate, compute_A1,
                            compute_A2_bruteforce, improve_once, improvement_result, is_qualified_bruteforce,
                            is_strong, residue, split_into_bases, strong_decompose)
from mbases.systems import Configuration, Decomposition, System, mu


def s(*idx):
    return System.of(idx)


def test_residue():
    assert [residue(j, 3) for j in range(1, 8)] == [1, 2, 3, 1, 2, 3, 1]


def test_improve_once_trace(config_a):
    st = improve_once(config_a, [[(1, 0), (4, 0)], [(2, 0), (3, 0)]])
    assert [[i for i, _ in p] for p in st.new_parts] == [[2, 4], [1, 3]]
    assert (st.dim_before, st.dim_after) == (3, 4)
    assert [[i for i, _ in b] for b in st.B] == [[1], [2, 3]]
    assert [[i for i, _ in r] for r in st.R] == [[4], [1], [2, 3]]
    assert st.N == 2
    assert {j: b[0] for j, b in st.b.items()} == {0: 4, 1: 1, 2: 2, 3: 4}


def test_improve_once_precondition(config_a):
    with pytest.raises(PreconditionError):
        improve_once(config_a, [[(1, 0), (2, 0)], [(3, 0), (4, 0)]])


def test_improve_once_certificate(config_a):
    cert = improvement_result(config_a, [[(1, 0), (1, 1)], [(2, 0), (4, 0)]])
    assert isinstance(cert, ViolationCertificate)
    assert cert.subspace == span([(1, 0)], QQ)
    assert (cert.mu_value, cert.bound) == (3, 2)
    assert cert.verify(config_a)


def test_split_examples(config_a, systems):
    d = split_into_bases(config_a, systems["A"])
    assert d.parts == (s(1, 2), s(3, 4))
    cert = split_into_bases(config_a, systems["B"])
    assert isinstance(cert, ViolationCertificate)
    assert cert.subspace == span([(1, 0)], QQ) and (cert.mu_value, cert.bound) == (3, 2)
    line = Configuration.build([(1,), (2,)], 2, QQ)
    assert split_into_bases(line, s(1, 2)).parts == (s(1), s(2))
    with pytest.raises(SizeError):
        split_into_bases(config_a, systems["C"])


def test_strong_decompose_examples(config_a, systems):
    d = strong_decompose(config_a, systems["C"], 1)
    assert d.parts == (s(2, 3), s(2, 4)) and d.tail == s(1)
    d = strong_decompose(config_a, systems["D"], 2)
    assert d.parts == (s(2, 3), s(3, 4)) and d.tail == s(1, 2)
    d = strong_decompose(config_a, systems["F"], 1)
    assert d in all_splits(config_a, systems["F"], 1)


def test_zero_vector_goes_to_tail():
    cfg = Configuration.build([(1, 0), (0, 1), (1, 1), (1, 0), (0, 0)], 2, QQ)
    d = strong_decompose(cfg, s(1, 2, 3, 4, 5), 1)
    assert d.tail == s(5)
    assert d.parts == split_into_bases(cfg, s(1, 2, 3, 4)).parts
    cert = strong_decompose(cfg, s(1, 2, 3, 5, 5), 1)
    assert isinstance(cert, ViolationCertificate) and cert.subspace.dim == 0 and cert.mu_value == 2


def test_qualified_examples(config_a, systems):
    assert is_qualified_bruteforce(config_a, systems["A"], 0) == (True, None)
    ok, cert = is_qualified_bruteforce(config_a, systems["B"], 0)
    assert not ok and cert.subspace == span([(1, 0)], QQ)
    assert is_qualified_bruteforce(config_a, systems["F"], 1)[0]


def test_A1_A2_examples(config_a, systems):
    assert set(compute_A1(config_a, systems["C"])) == {1, 2, 3, 4}
    assert set(compute_A1(config_a, systems["F"])) == {1, 4}
    assert compute_A2_bruteforce(config_a, systems["F"], 1) == {1, 4}
    assert compute_A2_bruteforce(config_a, systems["C"], 1) == {1, 2, 3, 4}
    line = Configuration.build([(1,), (2,), (-1,)], 2, QQ)
    assert set(compute_A1(line, s(1, 2, 3))) == {1, 2, 3}
    assert compute_A2_bruteforce(line, s(1, 2, 3), 1) == {1, 2, 3}
    with pytest.raises(NotQualified):
        compute_A2_bruteforce(config_a, System.of({1: 3, 4: 2}), 1)


def test_A1_witnesses_verify(config_a, systems):
    for i, d in compute_A1(config_a, systems["C"]).items():
        assert d.tail == s(i) and d.verify(config_a, systems["C"])


def test_A1_parallel_matches_sequential(config_a, systems):
    assert compute_A1(config_a, systems["C"], jobs=2) == compute_A1(config_a, systems["C"])


def test_support_span_reduction():
    # every subspace of GF(3)^2: W = span of the support vectors inside U keeps
    # mu and has dim W <= dim U, so checking support spans suffices
    F = GF(3)
    subspaces = [span([], F, 2), span([(1, 0), (0, 1)], F)] + [span([v], F) for v in [(1, 0), (0, 1), (1, 1), (1, 2)]]
    rng = random.Random(3)
    for _ in range(50):
        cfg = random_configuration(rng, F, 2, 4, 2)
        T = random_system(rng, 4, rng.randint(4, 6))
        for U in subspaces:
            inside = [i for i in T.support if cfg.v(i) in U]
            W = span([cfg.v(i) for i in inside], F, 2)
            assert W.dim <= U.dim
            assert mu(cfg, T, W) == mu(cfg, T, U)


def _corpus(seed, count):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        field = rng.choice([QQ, GF(2), GF(3)])
        k, m = rng.randint(1, 3), rng.randint(1, 3)
        if m * k > 8:
            continue
        l = rng.randint(0, min(2, 9 - m * k))
        n = rng.randint(k, 6)
        cfg = random_configuration(rng, field, k, n, m)
        out.append((cfg, random_system(rng, n, m * k + l), l))
    return out


@pytest.mark.parametrize("seed", [11, 12])
def test_strong_iff_qualified_iff_brute(seed):
    for cfg, T, l in _corpus(seed, 120):
        res = strong_decompose(cfg, T, l)
        ok = isinstance(res, Decomposition)
        assert ok == qualified_bruteforce(cfg, T, l) == bool(all_splits(cfg, T, l))
        assert ok == is_qualified_bruteforce(cfg, T, l)[0]
        assert res.verify(cfg, T) if ok else res.verify(cfg)


def test_improvements_raise_rank_and_are_bounded():
    for cfg, T, l in _corpus(5, 150):
        if l:
            T = System.from_slots(T.slots()[: cfg.m * cfg.k])
        steps = []
        split_into_bases(cfg, T, on_step=steps.append)
        done = [st for st in steps if st.new_parts is not None]
        assert all(st.dim_after > st.dim_before for st in done)
        assert len(done) <= cfg.m * cfg.k


def test_A1_equals_A2_on_corpus():
    rng = random.Random(8)
    seen = 0
    while seen < 60:
        cfg = random_configuration(rng, rng.choice([QQ, GF(2), GF(3)]), rng.randint(1, 2), rng.randint(2, 5), 2)
        T = random_system(rng, cfg.n, 2 * cfg.k + 1)
        if is_strong(cfg, T, 1):
            assert set(compute_A1(cfg, T)) == compute_A2_bruteforce(cfg, T, 1)
            seen += 1
