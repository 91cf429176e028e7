import random
from dataclasses import replace

import pytest

from mbases.bruteforce import all_good_decompositions, random_configuration, random_system
from mbases.equivalence import (CaseAlpha, CaseBeta, GoodDecomposition, LocalRelationWitness, NotStrong,
                                UnsupportedParameter, WalkChain, good_decompose, good_from_T1, lemma33_step,
                                locally_related, verify_chain, walk)
from mbases.exactlin import GF, QQ
from mbases.packing import SizeError, ViolationCertificate, is_strong
from mbases.systems import Configuration, System, d_H


def s(*idx):
    return System.of(idx)


def test_good_decompose_TD(config_a, systems):
    g = good_decompose(config_a, systems["D"])
    assert g.T1 == s(2)
    assert g.T2 == System.of({1: 1, 2: 1, 3: 2, 4: 1})
    assert g.witness.parts == (s(2, 3), s(3, 4)) and g.witness.tail == s(1)
    assert g.verify(config_a)


def test_good_decompose_certificate(config_a):
    res = good_decompose(config_a, System.of({1: 3, 4: 2}))
    assert isinstance(res, ViolationCertificate) and res.verify(config_a)


def test_good_decompose_forced_split(config_a, systems):
    g = good_decompose(config_a, systems["C"])
    assert g.T1 == System() and g.T2 == systems["C"]
    with pytest.raises(SizeError):
        good_decompose(config_a, systems["A"])


def test_good_iff_brute_force():
    rng = random.Random(4)
    for _ in range(150):
        cfg = random_configuration(rng, rng.choice([QQ, GF(2), GF(3)]), rng.randint(1, 2), rng.randint(2, 5), 2)
        T = random_system(rng, cfg.n, rng.randint(2 * cfg.k + 1, 2 * cfg.k + 3))
        g = good_decompose(cfg, T)
        brute = all_good_decompositions(cfg, T)
        assert isinstance(g, GoodDecomposition) == bool(brute)
        if brute:
            assert g.verify(cfg) and g.total == T
            assert any(b.T2 == g.T2 for b in brute)


def test_lemma33_alpha(config_a):
    step = lemma33_step(config_a, System.of({1: 1, 2: 2, 3: 2}), System.of({2: 2, 3: 2, 4: 1}))
    assert isinstance(step, CaseAlpha) and step.i == 4
    assert step.witness.parts == (s(2, 3), s(2, 3)) and step.witness.tail == s(4)


def test_lemma33_beta(config_a, systems):
    step = lemma33_step(config_a, systems["F"], systems["F"])
    assert isinstance(step, CaseBeta) and step.a == 1
    T2 = System.of({2: 2, 3: 2, 4: 1})
    assert isinstance(lemma33_step(config_a, T2, T2), CaseBeta)


def test_lemma33_rejects_non_strong(config_a):
    with pytest.raises(NotStrong):
        lemma33_step(config_a, System.of({1: 3, 4: 2}), System.of({1: 3, 4: 2}))


def test_walk_TD(config_a, systems):
    left = good_from_T1(config_a, systems["D"], s(1))
    right = good_from_T1(config_a, systems["D"], s(4))
    chain = walk(config_a, left, right)
    assert len(chain) == 2
    assert chain.members[1].T1 == s(4) and chain.members[1].T2 == System.of({1: 1, 2: 2, 3: 2})
    w = chain.witnesses[0]
    assert (w.left_tail, w.right_tail) == (s(4), s(1))
    assert chain.distances == [2, 0]
    assert verify_chain(config_a, chain) == (True, "ok")


def test_walk_trivial(config_a, systems):
    g = good_decompose(config_a, systems["D"])
    chain = walk(config_a, g, g)
    assert len(chain) == 1 and chain.witnesses == []


def test_walk_refuses_m1():
    cfg = Configuration.build([(1,), (2,), (3,)], 1, QQ)
    g = good_decompose(cfg, s(1, 2))
    with pytest.raises(UnsupportedParameter):
        walk(cfg, g, g)


def test_walk_rejects_different_systems(config_a, systems):
    a = good_decompose(config_a, systems["D"])
    b = good_decompose(config_a, systems["C"])
    with pytest.raises(ValueError):
        walk(config_a, a, b)


def test_verify_chain_detects_corruption(config_a, systems):
    chain = walk(config_a, good_from_T1(config_a, systems["D"], s(1)), good_from_T1(config_a, systems["D"], s(4)))
    w = chain.witnesses[0]
    bad = replace(w, shared_parts=(s(1, 4),) + w.shared_parts[1:])
    ok, why = verify_chain(config_a, WalkChain(chain.members, [bad]))
    assert not ok and "not a basis" in why
    other = good_decompose(config_a, systems["C"])
    ok, why = verify_chain(config_a, WalkChain([chain.members[0], other], chain.witnesses))
    assert not ok and "decomposes" in why


def test_locally_related(config_a, systems):
    a = good_from_T1(config_a, systems["D"], s(1))
    b = good_from_T1(config_a, systems["D"], s(4))
    w = locally_related(config_a, a, b)
    assert isinstance(w, LocalRelationWitness) and not w.problems(config_a)


def test_random_walks():
    rng = random.Random(21)
    walks = 0
    while walks < 60:
        cfg = random_configuration(rng, GF(3), rng.randint(1, 2), rng.randint(3, 5), 2)
        T = random_system(rng, cfg.n, rng.randint(2 * cfg.k + 1, 2 * cfg.k + 3))
        goods = all_good_decompositions(cfg, T)
        if len(goods) < 2:
            continue
        a, b = rng.sample(goods, 2)
        left, right = GoodDecomposition(a.T1, a.T2, a.witness), GoodDecomposition(b.T1, b.T2, b.witness)
        chain = walk(cfg, left, right)
        assert verify_chain(cfg, chain)[0]
        assert chain.members[0].same_split(left) and chain.members[-1].same_split(right)
        assert len(chain) <= d_H(a.T2, b.T2) + 1
        assert all(x - y == 2 for x, y in zip(chain.distances, chain.distances[1:]))
        walks += 1


def test_alpha_move_gives_good_decomposition(config_a, systems):
    # (R1, R2) built in case alpha is witnessed by the alpha parts plus [j]
    chain = walk(config_a, good_from_T1(config_a, systems["D"], s(1)), good_from_T1(config_a, systems["D"], s(4)))
    R = chain.members[1]
    assert is_strong(config_a, R.T2, 1) and R.verify(config_a)
