"""Numerical structure oracle from a weighted family of affine hyperplanes.

Hyperplanes f_i(z, t) = sum_j B[i, j] t_j + z_i in C^k, weights a_i, master
function Phi = sum a_i log f_i.  At a parameter z the algebra K_z is the
algebra of functions on the critical points of Phi in t; the Higgs field
multiplies by p_i = a_i / f_i and the pairing is the residue sum
sum_c g(c) h(c) / det Hess Phi(c).

For k = 1 the critical points are the roots of a degree n-1 polynomial,
found all at once by Aberth iteration and polished by Newton.  For k >= 2
with real data and positive weights, Phi is strictly concave on every
chamber and each bounded chamber holds exactly one critical point, so
Newton ascent is started next to every vertex in each sign direction.
Other k >= 2 inputs fall back to a seeded complex multistart.  Either way
the k >= 2 count is reported, not certified.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .exactlin import QQ
from .systems import Configuration, System

log = logging.getLogger(__name__)


class NearDiscriminant(ArithmeticError):
    """The parameter point is on, or numerically too close to, the discriminant."""


class DegeneratePairing(ArithmeticError):
    pass


@dataclass
class ArrangementModel:
    B: np.ndarray
    weights: np.ndarray
    fd_step: float = 1e-2
    grad_tol: float = 1e-9
    sep_tol: float = 1e-6
    seed: int = 0
    starts: int = 200
    m: int = 2
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.B = np.atleast_2d(np.asarray(self.B, dtype=complex if np.iscomplexobj(self.B) else float))
        self.weights = np.asarray(self.weights, dtype=complex if np.iscomplexobj(self.weights) else float)
        n, k = self.B.shape
        if self.weights.shape != (n,):
            raise ValueError(f"need {n} weights")
        if np.any(np.all(self.B == 0, axis=1)):
            raise ValueError("every row of B must be nonzero")
        if np.linalg.matrix_rank(self.B) != k:
            raise ValueError("B must have rank k")
        if np.any(self.weights == 0):
            raise ValueError("weights must be nonzero")
        if np.iscomplexobj(self.weights) or np.any(self.weights.real <= 0):
            log.warning("weights are not all positive reals; unbalancedness is not checked")

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def k(self) -> int:
        return self.B.shape[1]

    def f(self, z, t) -> np.ndarray:
        return self.B @ np.asarray(t) + np.asarray(z)

    def gradient(self, z, t) -> np.ndarray:
        return self.B.T @ (self.weights / self.f(z, t))

    def hessian(self, z, t) -> np.ndarray:
        w = self.weights / self.f(z, t) ** 2
        return -(self.B.T * w) @ self.B

    def configuration(self) -> Configuration:
        """The row vectors of B as an exact configuration over Q (real B only)."""
        if np.iscomplexobj(self.B):
            raise ValueError("exact configuration needs a real matrix")
        rows = [[Fraction(repr(float(x))) for x in row] for row in self.B]
        return Configuration.build(rows, self.m, QQ, self.k)


@dataclass
class CriticalData:
    z: np.ndarray
    points: np.ndarray  # (count, k)
    hess_det: np.ndarray  # (count,)
    f_values: np.ndarray  # (count, n)
    certified: bool
    expected: int | None = None

    @property
    def count(self) -> int:
        return len(self.points)


def aberth(coeffs: Sequence[complex], tol: float = 1e-15, maxiter: int = 500) -> np.ndarray:
    """All roots of sum coeffs[i] t^i at once (Aberth-Ehrlich)."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    deg = len(c) - 1
    if deg < 1:
        return np.zeros(0, dtype=complex)
    dc = P.polyder(c)
    radius = 1 + np.max(np.abs(c[:-1] / c[-1]))
    angles = 2 * np.pi * np.arange(deg) / deg + 0.4
    roots = 0.5 * radius * np.exp(1j * angles)
    for _ in range(maxiter):
        pv = P.polyval(roots, c)
        dv = P.polyval(roots, dc)
        ratio = np.where(dv != 0, pv / np.where(dv == 0, 1, dv), 0)
        diff = roots[:, None] - roots[None, :]
        np.fill_diagonal(diff, 1)
        inv = 1 / diff
        np.fill_diagonal(inv, 0)
        s = inv.sum(axis=1)
        step = ratio / (1 - ratio * s)
        roots = roots - step
        if np.all(np.abs(step) <= tol * (1 + np.abs(roots))):
            break
    return roots


def _numerator_poly(model: ArrangementModel, z) -> np.ndarray:
    """Coefficients of Phi'(t) * prod f_i for k = 1."""
    b = model.B[:, 0]
    a = model.weights
    total = np.zeros(model.n, dtype=complex)
    for i in range(model.n):
        term = np.array([a[i] * b[i]], dtype=complex)
        for j in range(model.n):
            if j != i:
                term = P.polymul(term, [z[j], b[j]])
        total[: len(term)] += term
    return total


def _finish(model: ArrangementModel, z, pts, certified: bool, expected) -> CriticalData:
    pts = np.asarray(pts, dtype=complex).reshape(-1, model.k)
    order = np.lexsort(tuple(np.concatenate([pts.imag.T[::-1], pts.real.T[::-1]])))
    pts = pts[order]
    fvals = np.array([model.f(z, t) for t in pts]).reshape(len(pts), model.n)
    dets = np.array([np.linalg.det(model.hessian(z, t)) for t in pts])
    scale = np.max(np.abs(model.weights)) / max(np.min(np.abs(fvals)) if fvals.size else 1, 1e-300)
    for t, fv, d in zip(pts, fvals, dets):
        if np.min(np.abs(fv)) < model.sep_tol * (1 + np.max(np.abs(z))):
            raise NearDiscriminant("a hyperplane passes through a critical point")
        g = np.linalg.norm(model.gradient(z, t))
        if g > model.grad_tol * scale:
            raise NearDiscriminant(f"critical point did not converge (|grad| = {g:.3g})")
        hscale = np.max(np.abs(model.weights[:, None, None] * np.einsum("ij,il->ijl", model.B, model.B)
                               / fv[:, None, None] ** 2))
        if abs(d) < model.sep_tol * hscale ** model.k:
            raise NearDiscriminant("degenerate critical point")
    return CriticalData(np.asarray(z), pts, dets, fvals, certified, expected)


def _critical_k1(model: ArrangementModel, z) -> CriticalData:
    b = model.B[:, 0]
    poles = -np.asarray(z) / b
    span_ = 1 + np.max(np.abs(poles))
    for i, j in itertools.combinations(range(model.n), 2):
        if abs(poles[i] - poles[j]) < model.sep_tol * span_:
            raise NearDiscriminant(f"hyperplanes {i + 1} and {j + 1} coincide")
    c = _numerator_poly(model, z)
    if abs(c[-1]) < model.sep_tol * np.max(np.abs(c)):
        raise NearDiscriminant("weights are balanced: a critical point escapes to infinity")
    roots = aberth(c)
    for _ in range(8):
        fv = b[None, :] * roots[:, None] + np.asarray(z)[None, :]
        g = (model.weights * b / fv).sum(axis=1)
        h = -(model.weights * b ** 2 / fv ** 2).sum(axis=1)
        roots = roots - g / h
    if len(roots) != model.n - 1:
        raise NearDiscriminant(f"found {len(roots)} critical points, expected {model.n - 1}")
    if len(roots) > 1:
        gaps = np.abs(roots[:, None] - roots[None, :])
        np.fill_diagonal(gaps, np.inf)
        if np.min(gaps) < model.sep_tol * span_:
            raise NearDiscriminant("critical points collide")
    return _finish(model, z, roots[:, None], True, model.n - 1)


def _is_real(model: ArrangementModel, z) -> bool:
    return (not np.iscomplexobj(model.B) and not np.iscomplexobj(model.weights)
            and not np.any(np.iscomplex(z)) and bool(np.all(model.weights > 0)))


def _phi(model: ArrangementModel, z, t) -> float:
    return float(np.sum(model.weights * np.log(np.abs(model.f(z, t)))))


def _chamber_ascent(model: ArrangementModel, z, t) -> np.ndarray | None:
    """Maximize Phi inside the chamber of t; None if the chamber is unbounded."""
    sign = np.sign(model.f(z, t))
    zscale = 1 + np.max(np.abs(z))
    for _ in range(200):
        g = model.gradient(z, t)
        step = np.linalg.solve(model.hessian(z, t), g)
        cur = _phi(model, z, t)
        lam = 1.0
        while lam > 1e-12:
            tn = t - lam * step
            if np.all(np.sign(model.f(z, tn)) == sign) and _phi(model, z, tn) >= cur:
                break
            lam /= 2
        else:
            return t if np.linalg.norm(g) < 1e-8 else None
        t = tn
        if np.linalg.norm(t) > 1e8 * zscale:
            return None
        if np.linalg.norm(lam * step) < 1e-15 * (1 + np.linalg.norm(t)):
            return t
    return t


def _critical_chambers(model: ArrangementModel, z) -> CriticalData:
    B = model.B.real
    z = np.asarray(z, dtype=float)
    k = model.k
    found: list[np.ndarray] = []
    for I in itertools.combinations(range(model.n), k):
        BI = B[list(I)]
        if abs(np.linalg.det(BI)) < 1e-12:
            continue
        v = np.linalg.solve(BI, -z[list(I)])
        fv = np.abs(model.f(z, v))
        others = [i for i in range(model.n) if i not in I]
        near = np.min(fv[others]) if others else 1.0
        eps = 0.25 * near / (1 + np.max(np.abs(B)))
        for signs in itertools.product((-1.0, 1.0), repeat=k):
            t = _chamber_ascent(model, z, v + np.linalg.solve(BI, eps * np.array(signs)))
            if t is None:
                continue
            for _ in range(4):
                t = t - np.linalg.solve(model.hessian(z, t), model.gradient(z, t))
            if all(np.linalg.norm(t - s) > 1e-7 * (1 + np.linalg.norm(t)) for s in found):
                found.append(t)
    expected = comb(model.n - 1, k)
    if len(found) != expected:
        log.warning("found %d critical points; a generic arrangement has %d", len(found), expected)
    return _finish(model, z, np.array(found) if found else np.zeros((0, k)), False, expected)


def _critical_newton(model: ArrangementModel, z) -> CriticalData:
    rng = np.random.default_rng(model.seed)
    k = model.k
    found: list[np.ndarray] = []
    zscale = 1 + np.max(np.abs(z))
    # |grad| alone also decays at infinity, so the line search uses
    # |grad| * (1 + |t|), which stays bounded away from zero out there
    def merit(t):
        return np.linalg.norm(model.gradient(z, t)) * (1 + np.linalg.norm(t))

    for _ in range(model.starts):
        t = zscale * (rng.standard_normal(k) + 1j * rng.standard_normal(k))
        ok = False
        for _ in range(100):
            try:
                step = np.linalg.solve(model.hessian(z, t), model.gradient(z, t))
            except (np.linalg.LinAlgError, ZeroDivisionError, FloatingPointError):
                break
            cur = merit(t)
            lam = 1.0
            while lam > 1e-6:
                tn = t - lam * step
                if np.all(np.abs(model.f(z, tn)) > 0) and merit(tn) < cur:
                    break
                lam /= 2
            t = t - lam * step
            if not np.all(np.isfinite(t)) or np.linalg.norm(t) > 1e6 * zscale:
                break
            if np.linalg.norm(step) * lam < 1e-14 * (1 + np.linalg.norm(t)):
                ok = True
                break
        if not ok:
            continue
        if all(np.linalg.norm(t - s) > 1e-7 * (1 + np.linalg.norm(t)) for s in found):
            found.append(t)
    expected = comb(model.n - 1, k)
    if len(found) != expected:
        log.warning("found %d critical points; a generic arrangement has %d", len(found), expected)
    return _finish(model, z, np.array(found) if found else np.zeros((0, k)), False, expected)


def critical_points(model: ArrangementModel, z) -> CriticalData:
    key = tuple(np.asarray(z, dtype=complex).ravel())
    if key not in model._cache:
        z = np.asarray(z)
        if z.shape != (model.n,):
            raise ValueError(f"z must have {model.n} entries")
        if model.k == 1:
            model._cache[key] = _critical_k1(model, z)
        elif _is_real(model, z):
            model._cache[key] = _critical_chambers(model, z)
        else:
            model._cache[key] = _critical_newton(model, z)
    return model._cache[key]


def higgs_values(model: ArrangementModel, crit: CriticalData, i: int) -> np.ndarray:
    """p_i = a_i / f_i at each critical point (i is 1-based)."""
    return model.weights[i - 1] / crit.f_values[:, i - 1]


def residue_pairing(model: ArrangementModel, crit: CriticalData, g, h):
    if crit.count == 0 or np.any(crit.hess_det == 0):
        raise DegeneratePairing("pairing needs nondegenerate critical points")
    return np.sum(np.asarray(g) * np.asarray(h) / crit.hess_det)


def _real_if_close(x, scale: float = 1.0):
    x = complex(x)
    return x.real if abs(x.imag) <= 1e-9 * max(abs(x.real), scale, 1e-300) else x


def higgs_product(model: ArrangementModel, crit: CriticalData, T: System) -> np.ndarray:
    out = np.ones(crit.count, dtype=complex)
    for i, c in T.items:
        out = out * higgs_values(model, crit, i) ** c
    return out


def oracle_eval_S(model: ArrangementModel, T: System, z):
    """S(C_T zeta, zeta) at z; zeta is the unit (all ones on critical points)."""
    crit = critical_points(model, z)
    val = residue_pairing(model, crit, higgs_product(model, crit, T), np.ones(crit.count))
    return _real_if_close(val, 1e-12)


def _steps(model: ArrangementModel, x) -> np.ndarray:
    return model.fd_step * np.maximum(1.0, np.abs(np.asarray(x)))


def oracle_deriv_S(model: ArrangementModel, T1: System, T2: System, x):
    """d_{T1} of z -> S(C_{T2} zeta, zeta) at x: nested central differences,
    each with one Richardson level."""
    x = np.asarray(x)
    x = x.astype(complex if np.iscomplexobj(x) else float)
    h = _steps(model, x)

    def F(z):
        return complex(oracle_eval_S(model, T2, z))

    func = F
    for i in [i for i, c in T1.items for _ in range(c)]:
        func = _partial(func, i - 1, h[i - 1])
    try:
        return _real_if_close(func(x), 1e-12)
    except NearDiscriminant as e:
        raise NearDiscriminant(f"finite-difference stencil hit the discriminant: {e}") from e


def _partial(F, i: int, h: float):
    def D(z):
        def central(s):
            e = np.zeros(len(z), dtype=z.dtype)
            e[i] = s
            return (F(z + e) - F(z - e)) / (2 * s)

        return (4 * central(h / 2) - central(h)) / 3

    return D


def check_flatness(model: ArrangementModel, I1: Sequence[int], I2: Sequence[int], z_samples) -> float:
    """max |S(C_{I1} zeta, C_{I2} zeta)(z) - value at the first sample|."""
    T = System.of(list(I1) + list(I2))
    vals = [complex(oracle_eval_S(model, T, z)) for z in z_samples]
    return max(abs(v - vals[0]) for v in vals)


def kernel_residual(model: ArrangementModel, crit: CriticalData) -> float:
    """max_j,c |sum_i B[i, j] p_i(c)| -- the Higgs field kills sum_i B[i, j] d_i."""
    p = model.weights[None, :] / crit.f_values
    return float(np.max(np.abs(p @ model.B))) if crit.count else 0.0


def sample_points(model: ArrangementModel, rng: np.random.Generator, count: int,
                  low: float = -3.0, high: float = 3.0, margin: float = 0.4) -> list[np.ndarray]:
    """Real parameter points whose k = 1 hyperplanes are pairwise >= margin apart."""
    out = []
    while len(out) < count:
        z = rng.uniform(low, high, model.n)
        if model.k == 1 and model.n > 1:
            poles = -z / model.B[:, 0]
            gaps = np.abs(poles[:, None] - poles[None, :])
            np.fill_diagonal(gaps, np.inf)
            if np.min(gaps) < margin:
                continue
        try:
            critical_points(model, z)
        except NearDiscriminant:
            continue
        out.append(z)
    return out


@dataclass
class ArrangementOracle:
    """StructureOracle backed by an arrangement model (m = 2)."""

    model: ArrangementModel
    reference: Sequence[float]

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def k(self) -> int:
        return self.model.k

    @property
    def m(self) -> int:
        return self.model.m

    def s_flat(self, T: System):
        return oracle_eval_S(self.model, T, self.reference)

    def eval_S(self, T: System, z):
        return oracle_eval_S(self.model, T, z)

    def deriv_S(self, T1: System, T2: System, x):
        if not T1:
            return oracle_eval_S(self.model, T2, x)
        return oracle_deriv_S(self.model, T1, T2, x)


@dataclass
class LineOracle:
    """Closed form for two points on a line (n = 2, k = 1, B = (1, 1)).

    S(C_T zeta, zeta) = -(-1)^T(2) a1 a2 (a1 + a2)^(|T| - 3) (z1 - z2)^(2 - |T|).
    """

    a1: float = 1.0
    a2: float = 1.0
    reference: Sequence[float] = (0.0, 2.0)
    n: int = 2
    k: int = 1
    m: int = 2

    def eval_S(self, T: System, z):
        d = len(T)
        sign = -1 if T[2] % 2 == 0 else 1
        return sign * self.a1 * self.a2 * (self.a1 + self.a2) ** (d - 3) * (z[0] - z[1]) ** (2 - d)

    def s_flat(self, T: System):
        return self.eval_S(T, self.reference)

    def deriv_S(self, T1: System, T2: System, x):
        # d/dz1 = -d/dz2 on a function of z1 - z2
        e = 2 - len(T2)
        coef = 1.0
        for _ in range(len(T1)):
            coef *= e
            e -= 1
        sign = -1 if T1[2] % 2 else 1
        d = len(T2)
        base = -(1 if T2[2] % 2 == 0 else -1) * self.a1 * self.a2 * (self.a1 + self.a2) ** (d - 3)
        return sign * coef * base * (x[0] - x[1]) ** e
