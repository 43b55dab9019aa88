"""The second-order q-difference system satisfied by the 2Phi1 series.

Every equation is multiplied by a product of linear forms that clears all
denominators, so a residual is a polynomial computed exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Sequence

from .ring import Poly, ScalarRing, _is_zero


def _check_index(f: Poly, i: int) -> None:
    if not 0 <= i < f.n:
        raise IndexError(f"variable index {i} out of range for {f.n} variables")


def q_shift(f: Poly, i: int, R: ScalarRing) -> Poly:
    """``tau_i f``: substitute ``z_i -> q z_i``."""
    _check_index(f, i)
    return Poly._raw(f.n, {e: v * R.q_pow(e[i]) if e[i] else v for e, v in f.c.items()}, f.D)


def q_derivative(f: Poly, i: int, R: ScalarRing) -> Poly:
    """``(1 - tau_i) f / ((1 - q) z_i)``, computed monomial by monomial."""
    _check_index(f, i)
    out = {}
    one_minus_q = 1 - R.q
    for e, v in f.c.items():
        m = e[i]
        if m == 0:
            continue
        e2 = list(e)
        e2[i] -= 1
        out[tuple(e2)] = v * ((1 - R.q_pow(m)) / one_minus_q)
    D = None if f.D is None else f.D - 1
    return Poly(f.n, out, D)


# ---------------------------------------------------------------------------
# rational coefficients with linear-form denominators


@dataclass
class Frac:
    num: Poly
    den: list


def _lin(n: int, R: ScalarRing, terms: Sequence[tuple[Any, int]]) -> Poly:
    c = {}
    for coef, idx in terms:
        e = [0] * n
        e[idx] = 1
        c[tuple(e)] = coef
    return Poly(n, c)


def _prod(factors, n, R) -> Poly:
    out = Poly.const(n, R.one)
    for f in factors:
        out = out * f
    return out


class QDifferenceSystem:
    """Equation ``i`` of the system for parameters ``a, b, c`` in ``n`` variables."""

    def __init__(self, n: int, a: Any, b: Any, c: Any, R: ScalarRing, corrected: bool = True):
        self.n, self.a, self.b, self.c, self.R = n, a, b, c, R
        self.corrected = corrected

    # factor helpers
    def _z(self, i):
        return Poly.var(self.n, i, self.R.one)

    def tau_A(self, i: int, j: int) -> Frac:
        """``tau_i(A_j(z;t))`` as a fraction."""
        R, n = self.R, self.n
        t, q = R.t, R.q
        num, den = [], []
        for l in range(n):
            if l == j:
                continue
            zj = (j, q if j == i else R.one)
            zl = (l, q if l == i else R.one)
            num.append(_lin(n, R, [(t * zj[1], zj[0]), (-zl[1], zl[0])]))
            den.append(_lin(n, R, [(zj[1], zj[0]), (-zl[1], zl[0])]))
        return Frac(_prod(num, n, R), den)

    def clearing_factors(self, i: int) -> list:
        R, n = self.R, self.n
        q, t = R.q, R.t
        D = []
        for l in range(n):
            if l != i:
                D.append(_lin(n, R, [(q, i), (-R.one, l)]))
                D.append(_lin(n, R, [(q, i), (-t, l)]))
        for j in range(n):
            for l in range(j + 1, n):
                if i not in (j, l):
                    D.append(_lin(n, R, [(R.one, j), (-R.one, l)]))
        return D

    def _clear(self, frac: Frac, D: list) -> Poly:
        rest = list(D)
        sign = 1
        for d in frac.den:
            for idx, f in enumerate(rest):
                if f == d:
                    break
                if f == -d:
                    sign = -sign
                    break
            else:
                raise ArithmeticError("denominator factor not cleared")
            del rest[idx]
        out = frac.num * _prod(rest, self.n, self.R)
        return out if sign == 1 else -out

    def cleared_terms(self, i: int) -> list[tuple[Poly, tuple]]:
        """``[(coefficient, derivative)]`` with derivative ``()``, ``(i,)`` or ``(i, j)``."""
        R, n = self.R, self.n
        a, b, c = self.a, self.b, self.c
        q, t = R.q, R.t
        tn1 = R.t_pow(n - 1)
        one_q = 1 - q
        D = self.clearing_factors(i)
        zi = self._z(i)
        terms = []
        tAi = self.tau_A(i, i)
        # second derivative in z_i
        f = Frac(zi * (c - a * b * q * zi) * tAi.num, tAi.den)
        terms.append((self._clear(f, D), (i, i)))
        second = (1 - t) if self.corrected else one_q
        for j in range(n):
            if j == i:
                continue
            zj = self._z(j)
            tAj = self.tau_A(i, j)
            den = tAj.den + [_lin(n, R, [(q, i), (-t, j)])]
            f = Frac(zi * zj * (c - a * b * zj) * tAj.num * second, den)
            terms.append((self._clear(f, D), (i, j)))
        # first derivative in z_i
        lin = (tn1 - c) / one_q + zi * (((1 - a) * (1 - b) * tn1 - (tn1 - a * b * q)) / one_q)
        coef = self._clear(Frac(lin, []), D)
        one_minus = Frac(_prod(tAi.den, n, R) - tAi.num, tAi.den)
        f = Frac(one_minus.num * (c - a * b * q * zi) * (1 / one_q), one_minus.den)
        coef = coef + self._clear(f, D)
        terms.append((coef, (i,)))
        for j in range(n):
            if j == i:
                continue
            zj = self._z(j)
            tAj = self.tau_A(i, j)
            den = tAj.den + [_lin(n, R, [(q, i), (-t, j)])]
            f = Frac(zj * (c - a * b * zj) * tAj.num * (-(1 - t) / one_q), den)
            terms.append((self._clear(f, D), (j,)))
        # zeroth order
        s = -((1 - a) * (1 - b) * tn1) / (one_q * one_q)
        terms.append((self._clear(Frac(Poly.const(n, s), []), D), ()))
        return terms

    def clearing_degree(self, i: int) -> int:
        return len(self.clearing_factors(i))

    def apply(self, S: Poly, i: int) -> Poly:
        """Cleared left-hand side applied to ``S`` (no truncation applied)."""
        R = self.R
        S0 = Poly(S.n, S.c, None)
        cache = {}

        def deriv(spec):
            if spec not in cache:
                f = S0
                for j in reversed(spec):
                    f = q_derivative(f, j, R)
                cache[spec] = Poly(f.n, f.c, None)
            return cache[spec]

        total = Poly(S.n, {}, None)
        for coef, spec in self.cleared_terms(i):
            total = total + coef * deriv(spec)
        return total


def valid_degree(S: Poly, system: QDifferenceSystem, i: int) -> int:
    """Highest total degree at which the cleared residual of a truncated ``S`` is exact."""
    return S.D - 1 + system.clearing_degree(i)


def qdif_residual(S: Poly, a, b, c, i: int, R: ScalarRing, corrected: bool = True) -> Poly:
    """Cleared residual of equation ``i`` on ``S``, restricted to its exact degrees."""
    if S.D is None:
        raise ValueError("the residual needs a truncated series")
    if not 0 <= i < S.n:
        raise IndexError(f"equation index {i} out of range")
    system = QDifferenceSystem(S.n, a, b, c, R, corrected)
    full = system.apply(S, i)
    top = valid_degree(S, system, i)
    return Poly(S.n, {e: v for e, v in full.c.items() if sum(e) <= top}, None)


# ---------------------------------------------------------------------------
# auxiliary identities used by the tests and the registry


def A_value(z: Sequence[Any], i: int, t: Any):
    out = 1
    for l, zl in enumerate(z):
        if l != i:
            out = out * (t * z[i] - zl) / (z[i] - zl)
    return out


def summation_sides(z: Sequence[Any], i: int, t: Any) -> tuple:
    """Both sides of the summation lemma for ``A_j`` at a rational point."""
    lhs = 0
    for j, zj in enumerate(z):
        if j != i:
            lhs = lhs + zj * A_value(z, j, t) / (t * zj - z[i])
    rhs = (A_value(z, i, t) - t ** (len(z) - 1)) / (1 - t)
    return lhs, rhs


def product_rule_sides(f: Poly, g: Poly, i: int, R: ScalarRing) -> tuple[Poly, Poly]:
    lhs = q_derivative(f * g, i, R)
    rhs = q_derivative(f, i, R) * g + q_shift(f, i, R) * q_derivative(g, i, R)
    return lhs, rhs


def scale_args(f: Poly, rho: Any) -> Poly:
    """``f(rho z)``."""
    return Poly._raw(f.n, {e: v * rho ** sum(e) if sum(e) else v for e, v in f.c.items()}, f.D)


def euler_mechanization(a, b, c, U: Poly, i: int, R: ScalarRing):
    """Apply the system to ``prod_l P_l * U`` and to ``V`` with the replaced parameters.

    ``P_l = (ab z_l / c)_inf / (z_l)_inf`` and ``U(z) = V(ab z / c)``.
    Returns ``(lhs, rhs, top)``: ``lhs`` is the cleared operator applied to
    ``P U``; ``rhs`` is ``tau_i(prod_l P_l)`` times the cleared replaced
    operator applied to ``V`` and evaluated at ``ab z / c``, times
    ``rho^(1 - d)`` where ``rho = ab/c`` and ``d`` is the number of clearing
    factors (rescaling ``z`` rescales each linear clearing factor by
    ``rho``).  Both are exact through degree ``top``.
    """
    from .hyperseries import prefactor_euler

    n, D = U.n, U.D
    rho = a * b / c
    P = prefactor_euler([(rho, R.one)], n, R, D)
    S = P * U
    sys1 = QDifferenceSystem(n, a, b, c, R)
    lhs = sys1.apply(S, i)
    V = scale_args(U, 1 / rho)
    sys2 = QDifferenceSystem(n, c / a, c / b, c, R)
    inner = scale_args(sys2.apply(V, i), rho)
    shifted = q_shift(P, i, R)
    rhs = Poly(n, shifted.c, None) * inner * rho ** (1 - sys1.clearing_degree(i))
    top = D - 1 + sys1.clearing_degree(i)
    cut = lambda f: Poly(n, {e: v for e, v in f.c.items() if sum(e) <= top}, None)  # noqa: E731
    return cut(lhs), cut(rhs), top


def random_symmetric(n: int, D: int, R: ScalarRing, rng: random.Random) -> Poly:
    """Random symmetric polynomial with rational coefficients and constant term 1."""
    from . import macdonald as mac
    from . import partition as pt

    coeffs = {}
    for lam in pt.enumerate_partitions(n, max_weight=D):
        v = R.coerce(rng.randint(-5, 5)) / rng.randint(1, 4) if lam else R.one
        if not _is_zero(v):
            coeffs[lam] = v
    return mac.monomial_to_poly(coeffs, n, D)
