"""Exact scalar and series arithmetic.

Two scalar modes are supported:

* ``formal``: truncated Laurent series in ``q`` with rational coefficients
  (:class:`QSeries`), with ``t = q^k``.
* ``rational``: exact rationals for ``q``, ``t`` and every parameter.

On top of the scalars sit :class:`ZSeries` (power series in one formal
variable ``z``) and :class:`Poly` (Laurent polynomials in ``x_1..x_n``,
optionally truncated by total degree).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from gmpy2 import mpq

Rational = mpq
INF = math.inf


class PrecisionError(ArithmeticError):
    """A formal series was used beyond its known precision."""


class NotCollapsible(ArithmeticError):
    """An infinite product ratio has no finite form in rational mode."""


class ValuationError(ArithmeticError):
    """A formal infinite product or sum would not converge."""


def _log_abs(x: mpq) -> float:
    return math.log(abs(int(x.numerator))) - math.log(int(x.denominator))


def rational(x: Any) -> mpq:
    if isinstance(x, str):
        return mpq(x.strip())
    return mpq(x)


class QSeries:
    """Truncated Laurent series in ``q``.

    ``prec`` is the absolute precision: coefficients of ``q^e`` with
    ``e >= prec`` are unknown.  ``prec=None`` marks an exact Laurent
    polynomial.  ``cap`` is the working precision used when an exact
    value must be expanded into an infinite series (inverses, infinite
    products).
    """

    __slots__ = ("c", "prec", "cap")

    def __init__(self, coeffs: Mapping[int, Any] | None = None, prec: int | None = None, cap: int = 20):
        c = {}
        if coeffs:
            for e, v in coeffs.items():
                if v and (prec is None or e < prec):
                    c[e] = v if isinstance(v, mpq) else mpq(v)
        self.c = c
        self.prec = prec
        self.cap = cap

    @classmethod
    def _raw(cls, c: dict, prec: int | None, cap: int) -> "QSeries":
        s = cls.__new__(cls)
        s.c = c
        s.prec = prec
        s.cap = cap
        return s

    @classmethod
    def monomial(cls, coef: Any, exp: int, cap: int = 20) -> "QSeries":
        coef = mpq(coef)
        return cls._raw({exp: coef} if coef else {}, None, cap)

    def _lift(self, other: Any) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, type(mpq(0)))):
            v = mpq(other)
            return QSeries._raw({0: v} if v else {}, None, self.cap)
        return NotImplemented

    # -- inspection -------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.prec is None

    def valuation(self) -> float:
        if self.c:
            return min(self.c)
        return INF if self.prec is None else self.prec

    def is_exact_zero(self) -> bool:
        return self.prec is None and not self.c

    def is_monomial(self) -> bool:
        return self.prec is None and len(self.c) == 1

    def leading(self) -> tuple[int, mpq]:
        v = min(self.c)
        return v, self.c[v]

    def coefficient(self, e: int) -> mpq:
        if self.prec is not None and e >= self.prec:
            raise PrecisionError(f"coefficient of q^{e} unknown (precision {self.prec})")
        return self.c.get(e, mpq(0))

    def truncate(self, prec: int) -> "QSeries":
        if self.prec is not None and self.prec <= prec:
            return self
        return QSeries._raw({e: v for e, v in self.c.items() if e < prec}, prec, self.cap)

    # -- arithmetic -------------------------------------------------
    def __neg__(self) -> "QSeries":
        return QSeries._raw({e: -v for e, v in self.c.items()}, self.prec, self.cap)

    def __add__(self, other: Any) -> "QSeries":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.prec is None:
            prec = other.prec
        elif other.prec is None:
            prec = self.prec
        else:
            prec = min(self.prec, other.prec)
        c = dict(self.c) if prec is None else {e: v for e, v in self.c.items() if e < prec}
        for e, v in other.c.items():
            if prec is not None and e >= prec:
                continue
            s = c.get(e)
            if s is None:
                c[e] = v
            else:
                s = s + v
                if s:
                    c[e] = s
                else:
                    del c[e]
        return QSeries._raw(c, prec, max(self.cap, other.cap))

    __radd__ = __add__

    def __sub__(self, other: Any) -> "QSeries":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other: Any) -> "QSeries":
        return (-self) + other

    def __mul__(self, other: Any) -> "QSeries":
        if isinstance(other, (int, type(mpq(0)))):
            if not other:
                return QSeries._raw({}, None, self.cap)
            v = mpq(other)
            return QSeries._raw({e: x * v for e, x in self.c.items()}, self.prec, self.cap)
        if not isinstance(other, QSeries):
            return NotImplemented
        cap = max(self.cap, other.cap)
        if self.is_exact_zero() or other.is_exact_zero():
            return QSeries._raw({}, None, cap)
        v1, v2 = self.valuation(), other.valuation()
        p1 = INF if self.prec is None else self.prec + v2
        p2 = INF if other.prec is None else other.prec + v1
        p = min(p1, p2)
        prec = None if p == INF else int(p)
        c: dict[int, mpq] = {}
        oc = list(other.c.items())
        for e1, a in self.c.items():
            for e2, b in oc:
                e = e1 + e2
                if prec is not None and e >= prec:
                    continue
                s = c.get(e)
                c[e] = a * b if s is None else s + a * b
        c = {e: v for e, v in c.items() if v}
        return QSeries._raw(c, prec, cap)

    __rmul__ = __mul__

    def inverse(self) -> "QSeries":
        if not self.c:
            raise ZeroDivisionError("inverse of a (possibly truncated) zero series")
        v, lead = self.leading()
        if self.prec is None and len(self.c) == 1:
            return QSeries._raw({-v: 1 / lead}, None, self.cap)
        target = self.cap - v if self.prec is None else self.prec - 2 * v
        rel = target + v
        if rel <= 0:
            raise PrecisionError("no precision left to invert series")
        inv_lead = 1 / lead
        u = {e - v: x * inv_lead for e, x in self.c.items() if e - v < rel}
        b = [mpq(0)] * rel
        b[0] = mpq(1)
        uitems = sorted((e, x) for e, x in u.items() if e > 0)
        for m in range(1, rel):
            s = mpq(0)
            for e, x in uitems:
                if e > m:
                    break
                bb = b[m - e]
                if bb:
                    s += x * bb
            b[m] = -s
        c = {m - v: bm * inv_lead for m, bm in enumerate(b) if bm}
        return QSeries._raw(c, target, self.cap)

    def __truediv__(self, other: Any) -> "QSeries":
        if isinstance(other, (int, type(mpq(0)))):
            if not other:
                raise ZeroDivisionError("division by zero")
            return self * (1 / mpq(other))
        if not isinstance(other, QSeries):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Any) -> "QSeries":
        return self.inverse() * other

    def __pow__(self, e: int) -> "QSeries":
        if e < 0:
            return self.inverse() ** (-e)
        out = QSeries._raw({0: mpq(1)}, None, self.cap)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __bool__(self) -> bool:
        return bool(self.c) or self.prec is not None

    def __eq__(self, other: Any) -> bool:
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        d = self - other
        return not d.c

    def __hash__(self):
        return hash((tuple(sorted(self.c.items())), self.prec))

    def __repr__(self) -> str:
        return f"QSeries({to_text(self)})"


def qseries_text(s: QSeries) -> str:
    terms = [f"{v}*q^{e}" for e, v in sorted(s.c.items())]
    body = " + ".join(terms) if terms else "0"
    if s.prec is not None:
        body += f" + O(q^{s.prec})"
    return body


def to_text(x: Any) -> str:
    """Canonical text form: rationals as ``p/q``, series as ``c*q^e`` terms."""
    if isinstance(x, QSeries):
        return qseries_text(x)
    x = mpq(x)
    return f"{x.numerator}/{x.denominator}"


def from_text(text: str, cap: int = 20) -> Any:
    text = text.strip()
    if "q^" not in text and "O(" not in text:
        return mpq(text)
    prec = None
    coeffs = {}
    for term in text.split(" + "):
        term = term.strip()
        if term.startswith("O(q^"):
            prec = int(term[4:-1])
        elif term != "0":
            coef, exp = term.split("*q^")
            coeffs[int(exp)] = mpq(coef)
    return QSeries(coeffs, prec, cap)


def scalar_equal(x: Any, y: Any, order: int | None = None) -> bool:
    """Exact equality, or equality through ``q^order`` for formal series."""
    d = x - y
    if isinstance(d, QSeries):
        if order is not None:
            if d.prec is not None and d.prec <= order:
                raise PrecisionError(f"difference known only below q^{d.prec}, need q^{order}")
            return all(e > order for e in d.c)
        return not d.c
    return d == 0


def first_difference(x: Any, y: Any, order: int | None = None):
    """First differing coefficient ``(exponent, value)``; ``None`` if equal."""
    d = x - y
    if isinstance(d, QSeries):
        bad = sorted(e for e in d.c if order is None or e <= order)
        return (bad[0], d.c[bad[0]]) if bad else None
    return None if d == 0 else (0, d)


# ---------------------------------------------------------------------------
# univariate z-series


class ZSeries:
    """Power series in a formal variable ``z`` over scalars, truncated at degree ``D``."""

    __slots__ = ("c", "D")

    def __init__(self, coeffs: Mapping[int, Any] | None, D: int):
        self.c = {d: v for d, v in (coeffs or {}).items() if d <= D and not _is_zero(v)}
        self.D = D

    @classmethod
    def _raw(cls, c, D):
        s = cls.__new__(cls)
        s.c = c
        s.D = D
        return s

    @classmethod
    def z(cls, coef: Any, D: int, degree: int = 1) -> "ZSeries":
        return cls({degree: coef}, D)

    def _lift(self, other):
        if isinstance(other, ZSeries):
            return other
        if isinstance(other, Poly):
            return NotImplemented
        return ZSeries._raw({} if _is_zero(other) else {0: other}, self.D)

    def coefficient(self, d: int):
        return self.c.get(d, 0)

    def __neg__(self):
        return ZSeries._raw({d: -v for d, v in self.c.items()}, self.D)

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        D = min(self.D, other.D)
        c = {d: v for d, v in self.c.items() if d <= D}
        for d, v in other.c.items():
            if d > D:
                continue
            c[d] = c[d] + v if d in c else v
        return ZSeries._raw({d: v for d, v in c.items() if not _is_zero(v)}, D)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, (ZSeries, Poly)):
            if _is_zero(other):
                return ZSeries._raw({}, self.D)
            return ZSeries._raw({d: v * other for d, v in self.c.items()}, self.D)
        if isinstance(other, Poly):
            return NotImplemented
        D = min(self.D, other.D)
        c: dict = {}
        for d1, a in self.c.items():
            for d2, b in other.c.items():
                d = d1 + d2
                if d > D:
                    continue
                c[d] = c[d] + a * b if d in c else a * b
        return ZSeries._raw({d: v for d, v in c.items() if not _is_zero(v)}, D)

    __rmul__ = __mul__

    def inverse(self):
        a0 = self.c.get(0)
        if a0 is None or _is_zero(a0):
            raise ZeroDivisionError("z-series without invertible constant term")
        inv0 = 1 / a0
        b = [inv0]
        for m in range(1, self.D + 1):
            s = 0
            for d in range(1, m + 1):
                if d in self.c:
                    s = s + self.c[d] * b[m - d]
            b.append(-(s * inv0))
        return ZSeries({d: v for d, v in enumerate(b)}, self.D)

    def __truediv__(self, other):
        if isinstance(other, ZSeries):
            return self * other.inverse()
        return self * (1 / other)

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = ZSeries({0: 1}, self.D)
        for _ in range(e):
            out = out * self
        return out

    def map(self, fn: Callable) -> "ZSeries":
        return ZSeries({d: fn(v) for d, v in self.c.items()}, self.D)

    def __repr__(self):
        return "ZSeries(" + ", ".join(f"z^{d}: {v!r}" for d, v in sorted(self.c.items())) + ")"


def _is_zero(v: Any) -> bool:
    if isinstance(v, QSeries):
        return not v.c and v.prec is None
    if isinstance(v, (ZSeries, Poly)):
        return not v.c
    return v == 0


# ---------------------------------------------------------------------------
# Laurent polynomials in n variables


class Poly:
    """Laurent polynomial in ``x_1..x_n`` with scalar coefficients.

    With ``D`` set, terms of total degree above ``D`` are discarded, which
    turns the type into a truncated power series.
    """

    __slots__ = ("n", "c", "D")

    def __init__(self, n: int, coeffs: Mapping[tuple, Any] | None = None, D: int | None = None):
        self.n = n
        self.D = D
        self.c = {
            tuple(e): v
            for e, v in (coeffs or {}).items()
            if not _is_zero(v) and (D is None or sum(e) <= D)
        }

    @classmethod
    def _raw(cls, n, c, D):
        s = cls.__new__(cls)
        s.n = n
        s.c = c
        s.D = D
        return s

    @classmethod
    def const(cls, n: int, v: Any, D: int | None = None) -> "Poly":
        return cls(n, {(0,) * n: v}, D)

    @classmethod
    def var(cls, n: int, i: int, coef: Any = 1, D: int | None = None) -> "Poly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): coef}, D)

    @classmethod
    def monomial(cls, n: int, exps: Sequence[int], coef: Any = 1, D: int | None = None) -> "Poly":
        return cls(n, {tuple(exps): coef}, D)

    def _lift(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, ZSeries):
            return NotImplemented
        return Poly._raw(self.n, {} if _is_zero(other) else {(0,) * self.n: other}, self.D)

    @staticmethod
    def _cap(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __neg__(self):
        return Poly._raw(self.n, {e: -v for e, v in self.c.items()}, self.D)

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        D = self._cap(self.D, other.D)
        c = dict(self.c)
        for e, v in other.c.items():
            c[e] = c[e] + v if e in c else v
        return Poly._raw(
            self.n, {e: v for e, v in c.items() if not _is_zero(v) and (D is None or sum(e) <= D)}, D
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            if isinstance(other, ZSeries):
                return NotImplemented
            if _is_zero(other):
                return Poly._raw(self.n, {}, self.D)
            return Poly._raw(self.n, {e: v * other for e, v in self.c.items()}, self.D)
        D = self._cap(self.D, other.D)
        c: dict = {}
        items = list(other.c.items())
        for e1, a in self.c.items():
            s1 = sum(e1)
            for e2, b in items:
                if D is not None and s1 + sum(e2) > D:
                    continue
                e = tuple(x + y for x, y in zip(e1, e2))
                c[e] = c[e] + a * b if e in c else a * b
        return Poly._raw(self.n, {e: v for e, v in c.items() if not _is_zero(v)}, D)

    __rmul__ = __mul__

    def inverse(self) -> "Poly":
        """Power-series inverse; needs a truncation degree and unit constant term."""
        if self.D is None:
            raise ValueError("inverse of a Laurent polynomial needs a truncation degree")
        zero = (0,) * self.n
        a0 = self.c.get(zero)
        if a0 is None or _is_zero(a0):
            raise ZeroDivisionError("power series without invertible constant term")
        if any(min(e) < 0 for e in self.c):
            raise ValueError("power-series inverse needs non-negative exponents")
        inv0 = 1 / a0
        rest = Poly._raw(self.n, {e: -(v * inv0) for e, v in self.c.items() if e != zero}, self.D)
        out = Poly.const(self.n, inv0, self.D)
        term = Poly.const(self.n, 1, self.D)
        for _ in range(self.D):
            term = term * rest
            if not term.c:
                break
            out = out + term * inv0
        return out

    def __truediv__(self, other):
        if isinstance(other, Poly):
            return self * other.inverse()
        return self * (1 / other)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = Poly.const(self.n, 1, self.D)
        for _ in range(e):
            out = out * self
        return out

    def truncate(self, D: int) -> "Poly":
        return Poly(self.n, self.c, D)

    def constant_term(self):
        return self.c.get((0,) * self.n, 0)

    def coefficient(self, exps: Sequence[int]):
        return self.c.get(tuple(exps), 0)

    def total_degrees(self) -> set[int]:
        return {sum(e) for e in self.c}

    def homogeneous(self, d: int) -> "Poly":
        return Poly._raw(self.n, {e: v for e, v in self.c.items() if sum(e) == d}, self.D)

    def reversed_vars(self) -> "Poly":
        """``f(x^{-1})``."""
        return Poly._raw(self.n, {tuple(-x for x in e): v for e, v in self.c.items()}, None)

    def times_monomial(self, exps: Sequence[int]) -> "Poly":
        return Poly._raw(self.n, {tuple(a + b for a, b in zip(e, exps)): v for e, v in self.c.items()}, self.D)

    def scale_vars(self, weights: Sequence[Any]) -> "Poly":
        """``f(w_1 x_1, ..., w_n x_n)`` for scalars ``w_i``."""
        out = {}
        for e, v in self.c.items():
            s = v
            for w, a in zip(weights, e):
                if a:
                    s = s * (w ** a)
            out[e] = s
        return Poly._raw(self.n, out, self.D)

    def evaluate(self, point: Sequence[Any]):
        total = 0
        powers: list[dict] = [dict() for _ in range(self.n)]
        for e, v in self.c.items():
            s = v
            for i, a in enumerate(e):
                if a:
                    p = powers[i].get(a)
                    if p is None:
                        p = point[i] ** a
                        powers[i][a] = p
                    s = s * p
            total = total + s
        return total

    def is_zero(self) -> bool:
        return not self.c

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = self._lift(other)
        d = self - other
        return not d.c

    __hash__ = None

    def __repr__(self):
        return f"Poly({self.c!r})"


# ---------------------------------------------------------------------------
# scalar rings


class ScalarRing:
    """Arithmetic context for one verification mode.

    ``formal``: scalars are :class:`QSeries`, ``q`` is the series variable,
    ``t = q^k`` and ``cap`` is the working precision.
    ``rational``: scalars are exact rationals ``q`` and ``t``.
    """

    def __init__(self, mode: str, *, k: int | None = None, q: Any = None, t: Any = None, cap: int = 20):
        if mode not in ("formal", "rational"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.cap = cap
        self.k = k
        if mode == "formal":
            if k is None:
                raise ValueError("formal mode needs an integer t-exponent k")
            self.q = QSeries.monomial(1, 1, cap)
            self.t = QSeries.monomial(1, k, cap)
        else:
            self.q = rational(q)
            if t is None:
                if k is None:
                    raise ValueError("rational mode needs t or k")
                t = self.q ** k
            self.t = rational(t)
            if self.q in (0, 1, -1):
                raise ValueError("q must differ from 0 and +-1")
        self._qpow: dict[int, Any] = {}

    @property
    def formal(self) -> bool:
        return self.mode == "formal"

    def fingerprint(self) -> str:
        if self.formal:
            return f"formal:k={self.k}"
        return f"rational:q={to_text(self.q)}:t={to_text(self.t)}"

    @property
    def one(self):
        return self.coerce(1)

    @property
    def zero(self):
        return self.coerce(0)

    def coerce(self, x: Any):
        if isinstance(x, (QSeries, ZSeries, Poly)):
            return x
        if self.formal:
            return QSeries.monomial(rational(x), 0, self.cap)
        return rational(x)

    def mono(self, coef: Any, exp: int):
        """``coef * q^exp`` as a scalar."""
        if self.formal:
            return QSeries.monomial(rational(coef), exp, self.cap)
        return rational(coef) * self.q_pow(exp)

    def q_pow(self, e: int):
        p = self._qpow.get(e)
        if p is None:
            if self.formal:
                p = QSeries.monomial(1, e, self.cap)
            else:
                p = self.q ** e
            self._qpow[e] = p
        return p

    def t_pow(self, e: int):
        if self.formal:
            return self.q_pow(self.k * e)
        return self.t ** e

    def qt_pow(self, a: int, b: int):
        """``q^a t^b``."""
        if self.formal:
            return self.q_pow(a + self.k * b)
        return self.q_pow(a) * self.t ** b

    def valuation(self, x: Any):
        if isinstance(x, QSeries):
            return x.valuation()
        return None

    def is_zero(self, x: Any) -> bool:
        return _is_zero(x)

    def equal(self, x: Any, y: Any, order: int | None = None) -> bool:
        return scalar_equal(x, y, order if self.formal else None)

    # -- q-Pochhammer symbols -------------------------------------------
    def poch(self, x: Any, m: int):
        """Finite ``(x;q)_m``; negative ``m`` gives ``1/prod_{i=1}^{-m} (1 - x q^{-i})``."""
        if m >= 0:
            out = self.one
            for i in range(m):
                out = out * (1 - x * self.q_pow(i))
            return out
        return 1 / self.poch_inverse(x, m)

    def poch_inverse(self, x: Any, m: int):
        """``1/(x;q)_m`` computed without dividing when the result is zero."""
        if m >= 0:
            return 1 / self.poch(x, m)
        out = self.one
        for i in range(1, -m + 1):
            out = out * (1 - x * self.q_pow(-i))
        return out

    def poch_inf(self, x: Any):
        """``(x;q)_inf`` for a scalar ``x`` (formal mode only)."""
        if isinstance(x, (ZSeries, Poly)):
            return euler_poch_inf(self, x)
        if not self.formal:
            raise NotCollapsible("(x;q)_inf has no exact rational value")
        x = self.coerce(x)
        if x.is_exact_zero():
            return self.one
        v = x.valuation()
        if not x.is_monomial() and v <= 0:
            raise ValuationError("(u;q)_inf needs positive q-valuation or a monomial argument")
        out = self.one
        i = 0
        while v + i < self.cap:
            out = out * (1 - x * self.q_pow(i))
            i += 1
        # the omitted factors are 1 + O(q^cap)
        return out.truncate(int(out.valuation()) + self.cap) if out.c else out

    def q_ratio(self, x: Any, y: Any) -> int | None:
        """The integer ``m`` with ``y = x q^m`` if it exists."""
        if _is_zero(x) or _is_zero(y):
            return 0 if _is_zero(x) and _is_zero(y) else None
        if self.formal:
            if not (x.is_monomial() and y.is_monomial()):
                return None
            ex, cx = x.leading()
            ey, cy = y.leading()
            return ey - ex if cx == cy else None
        r = y / x
        if r == 1:
            return 0
        if r <= 0 and self.q > 0:
            return None
        # |r| = |q|^m pins m down up to rounding; confirm exactly
        lr = _log_abs(r)
        lq = _log_abs(self.q)
        m0 = round(lr / lq)
        for m in (m0, m0 - 1, m0 + 1):
            if m and self.q ** m == r:
                return m
        return None

    def inf_ratio(self, nums: Iterable[Any], dens: Iterable[Any]):
        """``prod (n;q)_inf / prod (d;q)_inf`` for scalar arguments.

        Numerator/denominator pairs differing by an integer power of ``q``
        collapse to finite products.  Whatever is left is expanded as a
        series in formal mode and rejected in rational mode.
        """
        nums = [self.coerce(x) for x in nums]
        dens = [self.coerce(x) for x in dens]
        out = self.one
        left = []
        for x in nums:
            for j, y in enumerate(dens):
                m = self.q_ratio(x, y)
                if m is not None:
                    # (x)_inf / (x q^m)_inf = (x)_m
                    out = out * self.poch(x, m) if m >= 0 else out * self.poch_inverse(y, -m)
                    del dens[j]
                    break
            else:
                left.append(x)
        if left or dens:
            if not self.formal:
                raise NotCollapsible(f"{len(left)} numerator / {len(dens)} denominator infinite factors remain")
            for x in left:
                out = out * self.poch_inf(x)
            for y in dens:
                out = out / self.poch_inf(y)
        return out


def euler_poch_inf(ring: ScalarRing, u: Any, inverse: bool = False):
    """``(u;q)_inf`` (or its inverse) for ``u`` of positive degree in ``z``/``x``.

    Uses Euler's expansions; only finitely many terms survive the degree
    truncation, so this is exact in both scalar modes.
    """
    if isinstance(u, ZSeries):
        if 0 in u.c:
            raise ValuationError("(u;q)_inf needs u without a constant term")
        D = u.D
        one = ZSeries({0: ring.one}, D)
    elif isinstance(u, Poly):
        if u.D is None:
            raise ValuationError("Euler expansion needs a truncation degree")
        if any(sum(e) <= 0 for e in u.c):
            raise ValuationError("(u;q)_inf needs u of positive total degree")
        D = u.D
        one = Poly.const(u.n, ring.one, D)
    else:
        raise TypeError("euler_poch_inf expects a z-series or polynomial")
    out = one
    power = one
    qq = ring.one
    for m in range(1, D + 1):
        power = power * u
        if power.is_zero() if isinstance(power, Poly) else not power.c:
            break
        qq = qq * (1 - ring.q_pow(m))
        if inverse:
            coef = 1 / qq
        else:
            coef = ring.q_pow(m * (m - 1) // 2) / qq
            if m % 2:
                coef = -coef
        out = out + power * coef
    return out


def qpoch_finite(ring: ScalarRing, u: Any, a: int):
    """``(u;q)_a`` for integer ``a``; negative ``a`` expands the inverse factors."""
    if a >= 0:
        return ring.poch(u, a)
    inv = ring.poch_inverse(u, a)
    return 1 / inv


def qpoch_inf(ring: ScalarRing, u: Any):
    """``(u;q)_inf`` for a scalar or a positive-degree series ``u``."""
    if isinstance(u, (ZSeries, Poly)):
        return euler_poch_inf(ring, u)
    return ring.poch_inf(u)


def partial_product_inf(ring: ScalarRing, u: Any, factors: int):
    """``prod_{i<factors} (1 - u q^i)``; the independent check for :func:`qpoch_inf`."""
    out = ring.one if not isinstance(u, (ZSeries, Poly)) else u * 0 + ring.one
    for i in range(factors):
        out = out * (1 - u * ring.q_pow(i))
    return out


def constant_term(f: Poly):
    """Coefficient of the zero exponent vector."""
    return f.constant_term()


# ---------------------------------------------------------------------------
# parameter specifications


def parse_formal_param(value: Any) -> tuple[mpq, int]:
    """Accept ``e`` (meaning ``q^e``), ``(coef, e)`` or text ``"c*q^e"``/``"q^e"``."""
    if isinstance(value, (tuple, list)):
        return rational(value[0]), int(value[1])
    if isinstance(value, int):
        return mpq(1), value
    text = str(value).replace(" ", "")
    if "q" not in text:
        return mpq(1), int(text)
    if "*" in text:
        coef, rest = text.split("*", 1)
    else:
        coef, rest = "1", text
    exp = 1 if rest == "q" else int(rest.split("^", 1)[1])
    return rational(coef), exp


@dataclass(frozen=True)
class ParamSpec:
    """Specialization of ``q, t`` and named parameters, with truncation orders.

    In ``formal`` mode each parameter is ``coef * q^exp`` (``params`` maps a
    name to ``exp`` or ``(coef, exp)``); in ``rational`` mode each parameter
    is an exact rational.
    """

    mode: str
    n: int
    k: int | None = None
    q: Any = None
    t: Any = None
    params: Mapping[str, Any] = field(default_factory=dict)
    D_q: int = 10
    D_z: int = 4
    cap: int | None = None
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("formal", "rational"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.mode == "formal":
            if self.k is None or self.k < 1:
                raise ValueError("formal mode needs an integer k >= 1 (t = q^k)")
            for name, v in self.params.items():
                parse_formal_param(v)
        elif self.q is None:
            raise ValueError("rational mode needs q")

    @property
    def formal(self) -> bool:
        return self.mode == "formal"

    def ring(self) -> ScalarRing:
        if self.formal:
            return ScalarRing("formal", k=self.k, cap=self.cap or self.D_q + 12)
        return ScalarRing("rational", k=self.k, q=self.q, t=self.t)

    def exponent(self, name: str) -> int:
        return parse_formal_param(self.params[name])[1]

    def value(self, ring: ScalarRing, name: str):
        v = self.params[name]
        if ring.formal:
            coef, e = parse_formal_param(v)
            return ring.mono(coef, e)
        return rational(v)

    def with_params(self, **updates) -> "ParamSpec":
        p = dict(self.params)
        p.update(updates)
        return self.replace(params=p)

    def replace(self, **fields) -> "ParamSpec":
        data = dict(
            mode=self.mode, n=self.n, k=self.k, q=self.q, t=self.t,
            params=dict(self.params), D_q=self.D_q, D_z=self.D_z, cap=self.cap,
            extra=dict(self.extra),
        )
        data.update(fields)
        return ParamSpec(**data)

    def fingerprint(self) -> str:
        parts = [self.mode, f"n={self.n}"]
        if self.k is not None:
            parts.append(f"k={self.k}")
        if not self.formal:
            parts.append(f"q={to_text(rational(self.q))}")
            if self.t is not None:
                parts.append(f"t={to_text(rational(self.t))}")
        for name in sorted(self.params):
            v = self.params[name]
            if self.formal:
                c, e = parse_formal_param(v)
                parts.append(f"{name}={to_text(c)}*q^{e}")
            else:
                parts.append(f"{name}={to_text(rational(v))}")
        for name in sorted(self.extra):
            parts.append(f"{name}={self.extra[name]}")
        if self.formal:
            parts.append(f"D_q={self.D_q}")
        parts.append(f"D_z={self.D_z}")
        return ";".join(parts)

    def params_json(self) -> dict:
        out = {}
        for name in sorted(self.params):
            v = self.params[name]
            if self.formal:
                c, e = parse_formal_param(v)
                out[name] = f"{to_text(c)}*q^{e}"
            else:
                out[name] = to_text(rational(v))
        return out
