"""Truncated multi-index polynomials and the potentials Q and L.

A structure oracle supplies pairing values S(C_T zeta, zeta, ..., zeta) as a
function of the total system T (Higgs invariance lets every m-fold pairing
be rewritten that way), plus derivatives of these values.  Q collects the
constant values over strong mk-systems; L is a Taylor polynomial at a
basepoint whose coefficients come from good decompositions.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import factorial
from typing import Iterable, Protocol, Sequence

from .bruteforce import all_good_decompositions
from .equivalence import GoodDecomposition, good_decompose
from .packing import is_strong
from .systems import Configuration, System, is_independent


class InconsistentCandidates(ArithmeticError):
    pass


def monomial_derivative(T: System, S: System) -> tuple[int, System] | None:
    """d_T (z - x)^S: None if T is not <= S, else (S!/(S-T)!, S - T)."""
    if not T.leq(S):
        return None
    coef = 1
    for i, c in T.items:
        s = S[i]
        coef *= factorial(s) // factorial(s - c)
    return coef, S - T


def _div(value, n: int):
    if isinstance(value, (int, Fraction)):
        return Fraction(value) / n
    return value / n


@dataclass
class MultiIndexPolynomial:
    """sum_T c_T (z - x)^T with finitely many nonzero coefficients."""

    n: int
    basepoint: tuple = ()
    coeffs: dict[System, object] = dc_field(default_factory=dict)

    def __post_init__(self):
        if not self.basepoint:
            self.basepoint = (0,) * self.n
        self.coeffs = {T: c for T, c in self.coeffs.items() if c != 0}

    def coefficient(self, T: System):
        return self.coeffs.get(T, 0)

    def set(self, T: System, value) -> None:
        if value == 0:
            self.coeffs.pop(T, None)
        else:
            self.coeffs[T] = value

    @property
    def degree(self) -> int:
        return max((len(T) for T in self.coeffs), default=-1)

    def is_homogeneous(self, d: int) -> bool:
        return all(len(T) == d for T in self.coeffs)

    def derivative(self, T: System) -> "MultiIndexPolynomial":
        out = {}
        for S, c in self.coeffs.items():
            d = monomial_derivative(T, S)
            if d is not None:
                k, rest = d
                out[rest] = out.get(rest, 0) + k * c
        return MultiIndexPolynomial(self.n, self.basepoint, out)

    def evaluate(self, z: Sequence) -> object:
        total = 0
        for S, c in self.coeffs.items():
            term = c
            for i, e in S.items:
                term = term * (z[i - 1] - self.basepoint[i - 1]) ** e
            total = total + term
        return total

    def derivative_at_base(self, T: System):
        """(d_T P)(x): only the monomial (z - x)^T survives."""
        return self.coefficient(T) * T.factorial()

    def records(self) -> list[tuple[System, object]]:
        return sorted(self.coeffs.items())


class StructureOracle(Protocol):
    """Pairing values of a Frobenius like structure.

    ``eval_S(T, z)`` is S(C_T zeta, zeta, ..., zeta) at z; ``s_flat(T)`` the
    constant value for strong mk-systems; ``deriv_S(T1, T2, x)`` is
    d_{T1} of eval_S(T2, .) at x.
    """

    n: int
    k: int
    m: int

    def s_flat(self, T: System): ...

    def eval_S(self, T: System, z: Sequence): ...

    def deriv_S(self, T1: System, T2: System, x: Sequence): ...


@dataclass
class MockOracle:
    """Every pairing value equals one constant, independent of z."""

    n: int
    k: int
    m: int
    value: object = Fraction(1)

    def s_flat(self, T):
        return self.value

    def eval_S(self, T, z):
        return self.value

    def deriv_S(self, T1, T2, x):
        return self.value if not T1 else 0


def all_multisets(n: int, size: int) -> Iterable[System]:
    for combo in itertools.combinations_with_replacement(range(1, n + 1), size):
        yield System.of(combo)


def enumerate_strong_systems(config: Configuration, size: int, l: int | None = None) -> list[System]:
    if l is None:
        l = size - config.m * config.k
    if size != config.m * config.k + l:
        raise ValueError("size must equal mk + l")
    return [T for T in all_multisets(config.n, size) if is_strong(config, T, l)]


def _check_oracle(config: Configuration, oracle) -> None:
    if (oracle.n, oracle.k, oracle.m) != (config.n, config.k, config.m):
        raise ValueError("oracle (n, k, m) does not match the configuration")


def build_Q(config: Configuration, oracle: StructureOracle) -> MultiIndexPolynomial:
    """Homogeneous degree-mk polynomial with coefficient s_flat(T)/T! on strong T."""
    _check_oracle(config, oracle)
    Q = MultiIndexPolynomial(config.n)
    for T in enumerate_strong_systems(config, config.m * config.k, 0):
        Q.set(T, _div(oracle.s_flat(T), T.factorial()))
    return Q


@dataclass
class CoefficientRecord:
    T: System
    value: object
    candidates: list[tuple[System, System, object]]
    spread: float = 0.0
    relative_spread: float = 0.0


@dataclass
class ConsistencyReport:
    records: dict[System, CoefficientRecord] = dc_field(default_factory=dict)
    tolerance: float = 1e-6
    zero_filled: list[System] = dc_field(default_factory=list)

    @property
    def max_relative_spread(self) -> float:
        return max((r.relative_spread for r in self.records.values() if len(r.candidates) > 1), default=0.0)

    @property
    def flagged(self) -> list[System]:
        return [T for T, r in self.records.items() if r.relative_spread > self.tolerance]


# coefficients that vanish in theory come out as pure round-off, so the
# spread is measured against max(|candidates|, SPREAD_FLOOR * largest candidate)
SPREAD_FLOOR = 1e-6


def _spread(values) -> float:
    if len(values) < 2:
        return 0.0
    return float(max(abs(a - b) for a, b in itertools.combinations(values, 2)))


def build_L(config: Configuration, oracle: StructureOracle, x: Sequence, D: int | None = None,
            mode: str = "first-found", tolerance: float = 1e-6) -> tuple[MultiIndexPolynomial, ConsistencyReport]:
    """Taylor polynomial of a potential of the second kind at ``x``, up to degree D.

    ``mode="cross-check"`` evaluates the coefficient through every good
    decomposition and raises :class:`InconsistentCandidates` when their
    relative spread exceeds ``tolerance``.
    """
    _check_oracle(config, oracle)
    mk = config.m * config.k
    if D is None:
        D = mk + 2
    if D < mk + 1:
        raise ValueError("truncation degree must be at least mk + 1")
    if mode not in ("first-found", "cross-check"):
        raise ValueError(f"unknown mode {mode!r}")
    x = tuple(x)
    L = MultiIndexPolynomial(config.n, x)
    report = ConsistencyReport(tolerance=tolerance)
    for size in range(mk + 1, D + 1):
        for T in all_multisets(config.n, size):
            g = good_decompose(config, T)
            if not isinstance(g, GoodDecomposition):
                report.zero_filled.append(T)
                continue
            fact = T.factorial()
            value = _div(oracle.deriv_S(g.T1, g.T2, x), fact)
            cands = [(g.T1, g.T2, value)]
            if mode == "cross-check":
                cands = [(p.T1, p.T2, _div(oracle.deriv_S(p.T1, p.T2, x), fact))
                         for p in all_good_decompositions(config, T)]
            rec = CoefficientRecord(T, value, cands)
            rec.spread = _spread([c[2] for c in cands])
            report.records[T] = rec
            L.set(T, value)
    largest = max((abs(c[2]) for r in report.records.values() for c in r.candidates), default=0.0)
    for rec in report.records.values():
        local = max(abs(c[2]) for c in rec.candidates)
        scale = max(local, SPREAD_FLOOR * largest, 1e-300)
        rec.relative_spread = float(rec.spread / scale)
    if mode == "cross-check" and report.flagged:
        worst = max(report.flagged, key=lambda T: report.records[T].relative_spread)
        raise InconsistentCandidates(
            f"coefficient of {worst}: relative spread {report.records[worst].relative_spread:.3g}")
    return L, report


@dataclass
class VerificationReport:
    q_checks: int = 0
    l_checks: int = 0
    q_max_abs: float = 0.0
    q_max_rel: float = 0.0
    l_max_abs: float = 0.0
    l_max_rel: float = 0.0
    worst: list = dc_field(default_factory=list)

    @property
    def max_rel(self) -> float:
        return max(self.q_max_rel, self.l_max_rel)


def independent_sets(config: Configuration) -> list[tuple[int, ...]]:
    return [I for I in itertools.combinations(range(1, config.n + 1), config.k) if is_independent(config, I)]


def verify_potentials(config: Configuration, oracle: StructureOracle, Q: MultiIndexPolynomial,
                      L: MultiIndexPolynomial | None = None, samples: int | None = None,
                      seed: int = 0, degree: int | None = None) -> VerificationReport:
    """Compare multi-derivatives of Q and L with oracle values.

    Q: d_{I_1}...d_{I_m} Q against s_flat(I_1 + ... + I_m).
    L: d_{T1} d_i d_{I_1}...d_{I_m} L at the basepoint against
    deriv_S(T1, [i] + I_1 + ... + I_m, x), for every T1 that keeps the total
    degree within the truncation.  Relative deviations are taken against
    max(|reference|, SPREAD_FLOOR * largest |reference| of the same kind).
    """
    rng = random.Random(seed)
    rep = VerificationReport()
    mk = config.m * config.k
    tuples = list(itertools.combinations_with_replacement(independent_sets(config), config.m))
    if samples is not None and len(tuples) > samples:
        tuples = rng.sample(tuples, samples)

    checks = {"Q": [], "L": []}
    for tup in tuples:
        T = System.of([i for I in tup for i in I])
        checks["Q"].append((T, Q.derivative(T).evaluate(Q.basepoint), oracle.s_flat(T)))
    if L is not None:
        if degree is None:
            degree = L.degree if L.coeffs else mk + 1
        x = L.basepoint
        for tup in tuples:
            base = System.of([i for I in tup for i in I])
            for i in range(1, config.n + 1):
                T2 = base + System.of([i])
                for extra in range(0, degree - mk):
                    for T1 in all_multisets(config.n, extra):
                        checks["L"].append((T1 + T2, L.derivative_at_base(T1 + T2), oracle.deriv_S(T1, T2, x)))

    for kind, rows in checks.items():
        largest = max((abs(w) for _, _, w in rows), default=0)
        worst_rel = 0.0
        for T, got, want in rows:
            a = abs(got - want)
            scale = max(abs(want), SPREAD_FLOOR * largest)
            r = float(a / scale) if scale else (0.0 if a == 0 else float("inf"))
            if kind == "Q":
                rep.q_checks += 1
                rep.q_max_abs = max(rep.q_max_abs, float(a))
            else:
                rep.l_checks += 1
                rep.l_max_abs = max(rep.l_max_abs, float(a))
            if r > worst_rel:
                worst_rel = r
                rep.worst.append((kind, T, got, want))
        if kind == "Q":
            rep.q_max_rel = worst_rel
        else:
            rep.l_max_rel = worst_rel
    return rep
