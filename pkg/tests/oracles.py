"""Reference implementations that share no code with ``mhq``.

Everything here uses :class:`fractions.Fraction` and plain dictionaries so a
bug in the package's arithmetic cannot hide in both sides of a comparison.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial


def partitions_brute(w, n, max_part=None):
    """All partitions of ``w`` with at most ``n`` parts, by filtering compositions."""
    top = w if max_part is None else max_part
    out = set()
    for parts in itertools.product(range(top + 1), repeat=n):
        if sum(parts) == w:
            out.add(tuple(p for p in sorted(parts, reverse=True) if p))
    return out


def dominates(lam, mu):
    a = b = 0
    for i in range(max(len(lam), len(mu))):
        a += lam[i] if i < len(lam) else 0
        b += mu[i] if i < len(mu) else 0
        if a < b:
            return False
    return True


# Laurent polynomials: {exponent tuple: Fraction}

def lmul(f, g):
    out = {}
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def monomial_sym(mu, n):
    mu = tuple(mu) + (0,) * (n - len(mu))
    return {perm: Fraction(1) for perm in set(itertools.permutations(mu))}


def weight(n, q, k):
    """``prod_{i != j} (x_i/x_j; q)_k`` at a rational ``q``."""
    out = {(0,) * n: Fraction(1)}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for r in range(k):
                e = [0] * n
                e[i], e[j] = 1, -1
                out = lmul(out, {(0,) * n: Fraction(1), tuple(e): -q ** r})
    return out


class TorusProduct:
    """``<f, g> = CT f(x) g(1/x) Delta / n!`` with ``t = q^k``."""

    def __init__(self, n, q, k):
        self.n, self.q, self.k = n, Fraction(q), k
        self.delta = weight(n, self.q, k)

    def __call__(self, f, g):
        gbar = {tuple(-x for x in e): c for e, c in g.items()}
        total = Fraction(0)
        for e1, c1 in f.items():
            for e2, c2 in gbar.items():
                need = tuple(-(x + y) for x, y in zip(e1, e2))
                d = self.delta.get(need)
                if d:
                    total += c1 * c2 * d
        return total / factorial(self.n)


def gram_schmidt_P(lam, n, q, k):
    """``P_lam`` at ``t = q^k`` by Gram-Schmidt over monomials below ``lam``.

    Returns ``{mu: coefficient of m_mu}``.
    """
    ip = TorusProduct(n, q, k)
    w = sum(lam)
    lower = sorted((mu for mu in partitions_brute(w, n) if dominates(lam, mu) and mu != tuple(lam)),
                   key=lambda mu: tuple(mu) + (0,) * (n - len(mu)))
    basis = {}  # mu -> (laurent poly, monomial coefficients)
    for mu in lower:
        f = monomial_sym(mu, n)
        coeffs = {mu: Fraction(1)}
        for nu, (g, gc) in basis.items():
            c = ip(f, g) / ip(g, g)
            f = {e: f.get(e, 0) - c * g.get(e, 0) for e in set(f) | set(g)}
            f = {e: v for e, v in f.items() if v}
            for m, v in gc.items():
                coeffs[m] = coeffs.get(m, 0) - c * v
        basis[mu] = (f, coeffs)
    f = monomial_sym(lam, n)
    coeffs = {tuple(lam): Fraction(1)}
    for nu, (g, gc) in basis.items():
        c = ip(f, g) / ip(g, g)
        for m, v in gc.items():
            coeffs[m] = coeffs.get(m, 0) - c * v
    return {m: v for m, v in coeffs.items() if v}


def poch(a, q, m):
    out = Fraction(1)
    for i in range(m):
        out *= 1 - a * q ** i
    return out


def phi21_classical(a, b, c, q, z, terms):
    """Partial sum of the one-variable 2phi1."""
    return sum(poch(a, q, m) * poch(b, q, m) / (poch(c, q, m) * poch(q, q, m)) * z ** m for m in range(terms))


def series_product(factors, prec):
    """Multiply power series in ``q`` given as coefficient lists, truncating at ``prec``."""
    out = [Fraction(0)] * prec
    out[0] = Fraction(1)
    for f in factors:
        nxt = [Fraction(0)] * prec
        for i, a in enumerate(out):
            if a:
                for j, b in enumerate(f[: prec - i]):
                    nxt[i + j] += a * b
        out = nxt
    return out


class Laurent:
    """Truncated Laurent series in ``q``: coefficients below ``prec`` are exact."""

    def __init__(self, c, prec):
        self.prec = prec
        self.c = {e: Fraction(v) for e, v in c.items() if v and e < prec}

    @classmethod
    def mono(cls, coef, e, prec):
        return cls({e: coef}, prec)

    def __add__(self, o):
        prec = min(self.prec, o.prec)
        out = dict(self.c)
        for e, v in o.c.items():
            out[e] = out.get(e, 0) + v
        return Laurent(out, prec)

    def __sub__(self, o):
        return self + Laurent({e: -v for e, v in o.c.items()}, o.prec)

    def val(self):
        return min(self.c) if self.c else self.prec

    def __mul__(self, o):
        prec = min(self.prec + o.val(), o.prec + self.val())
        out = {}
        for e1, v1 in self.c.items():
            for e2, v2 in o.c.items():
                if e1 + e2 < prec:
                    out[e1 + e2] = out.get(e1 + e2, 0) + v1 * v2
        return Laurent(out, prec)

    def inverse(self):
        v = self.val()
        lead = self.c[v]
        rel = self.prec - v  # relative precision
        # 1/(lead q^v (1 + r)) with r of positive valuation
        r = {e - v: c / lead for e, c in self.c.items() if e != v}
        out = {0: Fraction(1)}
        power = {0: Fraction(1)}
        for _ in range(rel):
            nxt = {}
            for e1, c1 in power.items():
                for e2, c2 in r.items():
                    if e1 + e2 < rel:
                        nxt[e1 + e2] = nxt.get(e1 + e2, 0) - c1 * c2
            power = nxt
            for e, c in power.items():
                out[e] = out.get(e, 0) + c
        return Laurent({e - v: c / lead for e, c in out.items()}, rel - v)


def one_psi_one_classical(a, b, x_exp, prec, span=40):
    """``sum_m (a;q)_m / (b;q)_m x^m`` with ``a, b = (coef, exp)`` and ``x = q^x_exp``."""
    P = prec + 3 * span
    one = Laurent({0: 1}, P)

    def factors(coef, e, m):
        # prod (1 - coef q^(e+i)) for i in range(m), or i = -1..m for negative m
        out = one
        rng = range(m) if m >= 0 else range(m, 0)
        for i in rng:
            out = out * (one - Laurent.mono(coef, e + i, P))
        return out

    total = Laurent({}, prec)
    for m in range(-span, span + 1):
        A, B = factors(*a, m), factors(*b, m)
        # (u;q)_m is the product for m >= 0 and its reciprocal for m < 0
        num, den = (A, B) if m >= 0 else (B, A)
        if not num.c:
            continue
        total = total + num * den.inverse() * Laurent.mono(1, x_exp * m, P)
    return total


def _zmul(f, g, D):
    out = [Fraction(0)] * (D + 1)
    for i, x in enumerate(f[: D + 1]):
        if x:
            for j, y in enumerate(g[: D + 1 - i]):
                out[i + j] += x * y
    return out


def _zinv(f, D):
    out = [Fraction(0)] * (D + 1)
    out[0] = 1 / f[0]
    for m in range(1, D + 1):
        out[m] = -sum(f[j] * out[m - j] for j in range(1, min(m, len(f) - 1) + 1)) / f[0]
    return out


def pfaff_kummer_classical(a, b, c, q, D):
    """Both sides of the one-variable q-Pfaff-Kummer relation as z-coefficient lists.

    Left: 2phi1(a, b; c; z).  Right: (az)_inf / (z)_inf times
    2phi2(a, c/b; c, az; bz), with the (az)_m in the lower row expanded in z.
    """
    left = [poch(a, q, m) * poch(b, q, m) / (poch(c, q, m) * poch(q, q, m)) for m in range(D + 1)]
    ratio = [poch(a, q, j) / poch(q, q, j) for j in range(D + 1)]
    inner = [Fraction(0)] * (D + 1)
    for m in range(D + 1):
        coef = poch(a, q, m) * poch(c / b, q, m) / (poch(c, q, m) * poch(q, q, m))
        coef *= (-1) ** m * q ** (m * (m - 1) // 2) * b ** m
        azm = [Fraction(1)]
        for i in range(m):
            azm = _zmul(azm, [Fraction(1), -a * q ** i], D)
        tail = _zinv(azm + [Fraction(0)] * (D + 1 - len(azm)), D - m)
        for j, v in enumerate(tail):
            inner[m + j] += coef * v
    return left, _zmul(ratio, inner, D)
