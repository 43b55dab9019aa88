"""Unilateral and bilateral multivariable basic hypergeometric series.

A series is described by :class:`SeriesSpec`.  Three argument kinds are
supported:

``general``
    symbolic ``z = (z_1..z_n)``; the result is a :class:`SymSeries`
    truncated at total degree ``D_z``.
``tdelta``
    ``z t^delta`` for a scalar or a :class:`ZSeries` ``z``.
``point``
    an explicit point ``(x_1..x_n)`` of scalars.

With a scalar argument in formal mode the sum is infinite.  It is cut off
by a certified lower bound on the q-valuation of each term, which is a
sum of one-row contributions (see :class:`RowValuation`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

from . import macdonald as mac
from . import partition as pt
from .ring import (
    Poly,
    QSeries,
    ScalarRing,
    ValuationError,
    ZSeries,
    _is_zero,
    euler_poch_inf,
)


class PoleError(ArithmeticError):
    """A lower factorial vanishes for a contributing index."""

    def __init__(self, lam, message: str = "lower factorial vanishes"):
        super().__init__(f"{message} at lambda={lam}")
        self.lam = lam


# ---------------------------------------------------------------------------
# symmetric series


@dataclass
class SymSeries:
    """Symmetric series stored in the Macdonald basis, truncated at degree ``D``."""

    n: int
    D: int
    coeffs: dict = field(default_factory=dict)

    def to_poly(self, R: ScalarRing) -> Poly:
        out = Poly(self.n, {}, self.D)
        for lam, c in self.coeffs.items():
            out = out + mac.macdonald_poly(lam, self.n, R).to_poly(self.D) * c
        return out

    def monomial_coeffs(self, R: ScalarRing) -> dict:
        out: dict = {}
        for lam, c in self.coeffs.items():
            for nu, v in mac.macdonald_poly(lam, self.n, R).coeffs.items():
                out[nu] = out[nu] + c * v if nu in out else c * v
        return {nu: v for nu, v in out.items() if not _is_zero(v)}

    @classmethod
    def from_monomial(cls, coeffs: dict, n: int, D: int, R: ScalarRing) -> "SymSeries":
        """Inverse of :meth:`monomial_coeffs` by peeling leading terms."""
        rest = {nu: v for nu, v in coeffs.items() if not _is_zero(v)}
        out = {}
        for w in range(D, -1, -1):
            for lam in pt.partitions_of(w, n):
                c = rest.get(lam)
                if c is None or _is_zero(c):
                    continue
                out[lam] = c
                for nu, v in mac.macdonald_poly(lam, n, R).coeffs.items():
                    rest[nu] = rest.get(nu, R.zero) - c * v
        return cls(n, D, dict(sorted(out.items(), key=lambda kv: (sum(kv[0]), [-p for p in kv[0]]))))

    @classmethod
    def from_poly(cls, f: Poly, R: ScalarRing) -> "SymSeries":
        return cls.from_monomial(mac.poly_to_monomial(f), f.n, f.D, R)


# ---------------------------------------------------------------------------
# series description


@dataclass
class SeriesSpec:
    kind: str
    upper: tuple
    lower: tuple
    b: Any = None
    arg: str = "tdelta"
    z: Any = None
    point: tuple | None = None
    terminate: int | None = None

    def __post_init__(self):
        if self.kind not in ("PHI", "PSI"):
            raise ValueError("kind must be PHI or PSI")
        if self.kind == "PSI" and self.b is None:
            raise ValueError("a bilateral series needs its distinguished lower parameter b")
        if self.arg not in ("general", "tdelta", "point"):
            raise ValueError(f"unknown argument kind {self.arg!r}")
        self.upper = tuple(self.upper)
        self.lower = tuple(self.lower)

    @property
    def twist(self) -> int:
        return len(self.lower) + 1 - len(self.upper)

    def balanced(self, R: ScalarRing, n: int) -> bool:
        lhs = R.qt_pow(1, n - 1)
        for a in self.upper:
            lhs = lhs * a
        rhs = R.one
        for b in self.lower:
            rhs = rhs * b
        return R.equal(lhs, rhs)


def phi(upper: Sequence, lower: Sequence, **kw) -> SeriesSpec:
    return SeriesSpec("PHI", tuple(upper), tuple(lower), **kw)


def psi(upper: Sequence, b: Any, lower: Sequence = (), **kw) -> SeriesSpec:
    return SeriesSpec("PSI", tuple(upper), tuple(lower), b=b, **kw)


def twist_factor(lam: Sequence[int], e: int, R: ScalarRing):
    """``((-1)^{|lam|} q^{n(lam')})^e``."""
    if e == 0:
        return R.one
    val = R.q_pow(e * pt.nlam_conj(lam))
    return -val if (e * sum(lam)) % 2 else val


def term_coefficient(lam: Sequence[int], spec: SeriesSpec, n: int, R: ScalarRing):
    """Scalar (or z-series) coefficient of ``P_lam`` in the series."""
    lam = tuple(lam)
    out = twist_factor(lam, spec.twist, R)
    for a in spec.upper:
        out = out * mac.gen_qfactorial(a, lam, R)
        if _is_zero(out):
            return out
    lowers = list(spec.lower)
    if spec.kind == "PSI":
        lowers.insert(0, spec.b * R.t_pow(n - 1))
        out = out * mac.qt_over_hprime(lam, n, R)
    else:
        out = out / mac.hprime(lam, R)
    for b in lowers:
        try:
            out = out * mac.gen_qfactorial(b, lam, R, inverse=True)
        except ZeroDivisionError as exc:
            raise PoleError(lam) from exc
    return out


def arg_factor(lam: Sequence[int], spec: SeriesSpec, n: int, R: ScalarRing):
    if spec.arg == "tdelta":
        return mac.eval_tdelta(lam, n, R, spec.z)
    if spec.arg == "point":
        return mac.evaluate(lam, spec.point, R)
    raise ValueError("general argument has no scalar value")


def term_value(lam: Sequence[int], spec: SeriesSpec, n: int, R: ScalarRing):
    c = term_coefficient(lam, spec, n, R)
    if _is_zero(c):
        return c
    return c * arg_factor(lam, spec, n, R)


# ---------------------------------------------------------------------------
# valuation model


def monomial_exponent(x: Any) -> tuple[int, bool]:
    """``(e, z_dependent)`` for a parameter ``c q^e`` or ``c q^e z``."""
    if isinstance(x, QSeries):
        if not x.is_monomial():
            raise ValuationError("formal parameters must be monomials c*q^e")
        return x.leading()[0], False
    if isinstance(x, ZSeries):
        if set(x.c) != {1} or not isinstance(x.c[1], QSeries) or not x.c[1].is_monomial():
            raise ValuationError("z-dependent parameters must have the form c*q^e*z")
        return x.c[1].leading()[0], True
    raise ValuationError("valuation bounds need formal-mode parameters")


def _fact_val(e: int, x: int) -> int:
    """Exact q-valuation of ``(c q^e; q)_x`` for a coefficient ``c`` (zero factors aside)."""
    if x >= 0:
        m = max(0, min(x, -e))
        return m * e + m * (m - 1) // 2
    y = -x
    j0 = max(1, e + 1)
    if y < j0:
        return 0
    m = y - j0 + 1
    s = m * e - (j0 + y) * m // 2
    return -s


class RowValuation:
    """Certified lower bound ``sum_i R_i(lam_i) + offset`` on term valuations."""

    def __init__(self, spec: SeriesSpec, n: int, R: ScalarRing, D_z: int = 0):
        if not R.formal:
            raise ValuationError("valuation windows exist only in formal mode")
        self.n = n
        self.k = R.k
        self.bilateral = spec.kind == "PSI"
        self.twist = spec.twist
        self.offset = 0
        self.up = []
        self.low = []
        for a in spec.upper:
            e, zdep = monomial_exponent(a)
            if zdep:
                self.offset += D_z * min(0, e - self.k * (n - 1))
            self.up.append((e, zdep))
        lowers = list(spec.lower)
        if self.bilateral:
            lowers.insert(0, spec.b * R.t_pow(n - 1))
        for b in lowers:
            e, zdep = monomial_exponent(b)
            if zdep:
                self.offset += D_z * min(0, e - self.k * (n - 1))
            self.low.append((e, zdep))
        if spec.arg == "tdelta":
            if isinstance(spec.z, ZSeries):
                raise ValuationError("a z-series argument is truncated by degree, not valuation")
            zeta, _ = monomial_exponent(R.coerce(spec.z))
            self.slopes = [zeta + self.k * i for i in range(n)]
        elif spec.arg == "point":
            chis = sorted(R.coerce(x).valuation() for x in spec.point)
            if any(c == float("inf") for c in chis):
                raise ValuationError("point coordinates must be nonzero")
            self.slopes = [int(c) for c in chis]
        else:
            raise ValuationError("general argument has no valuation window")
        self.sat = [
            2 + max([abs(e - self.k * i) for e, _ in self.up + self.low] + [0]) for i in range(n)
        ]

    def row(self, i: int, x: int) -> int:
        ki = self.k * i
        v = self.slopes[i] * x + self.twist * x * (x - 1) // 2
        for e, zdep in self.up:
            v += ki * x + (0 if zdep else _fact_val(e - ki, x))
        for e, zdep in self.low:
            v -= ki * x + (0 if zdep else _fact_val(e - ki, x))
        if self.bilateral:
            v += ki * x
        return v

    def bound(self, lam: Sequence[int]) -> int:
        lam = pt.pad(tuple(lam), self.n) if len(lam) < self.n else tuple(lam)
        return sum(self.row(i, p) for i, p in enumerate(lam)) + self.offset

    # -- window ---------------------------------------------------------
    def _stable(self, i: int, sign: int) -> int:
        """Distance beyond which row ``i`` increases monotonically in direction ``sign``."""
        S = self.sat[i]
        f = lambda y: self.row(i, sign * y)  # noqa: E731
        c2 = f(S + 2) - 2 * f(S + 1) + f(S)
        d = f(S + 1) - f(S)
        if c2 < 0 or (c2 == 0 and d <= 0):
            side = "positive" if sign > 0 else "negative"
            raise ValuationError(
                f"row {i + 1} valuation does not grow for {side} parts; the series is not truncatable"
            )
        if d <= 0:
            S += (-d) // c2 + 1
        return S

    def windows(self, D_q: int) -> list[tuple[int, int]]:
        n = self.n
        spans = []
        mins = []
        for i in range(n):
            hi = self._stable(i, 1)
            lo = -self._stable(i, -1) if self.bilateral else 0
            spans.append((lo, hi))
            mins.append(min(self.row(i, x) for x in range(lo, hi + 1)))
        self.mins = mins
        out = []
        total_min = sum(mins) + self.offset
        for i in range(n):
            T = D_q - (total_min - mins[i])
            lo, hi = spans[i]
            ok = [x for x in range(lo, hi + 1) if self.row(i, x) <= T]
            if not ok:
                out.append((1, 0))
                continue
            top, bot = max(ok), min(ok)
            if top == hi:
                while self.row(i, top + 1) <= T:
                    top += 1
            if self.bilateral and bot == lo:
                while self.row(i, bot - 1) <= T:
                    bot -= 1
            out.append((bot, top))
        return out

    def indices(self, D_q: int, widen: int = 0) -> Iterator[tuple]:
        """Every index whose bound is at most ``D_q`` (with ``widen``: the enlarged box)."""
        wins = self.windows(D_q)
        n = self.n
        mins = self.mins
        suffix = [0] * (n + 1)
        for i in range(n - 1, -1, -1):
            suffix[i] = suffix[i + 1] + mins[i]
        out = []

        def rec(i, prev, acc, parts):
            if i == n:
                if widen or acc + self.offset <= D_q:
                    out.append(tuple(parts))
                return
            lo, hi = wins[i]
            lo -= widen
            hi += widen
            for x in range(min(hi, prev), lo - 1, -1):
                r = acc + self.row(i, x)
                if not widen and r + suffix[i + 1] + self.offset > D_q:
                    continue
                parts.append(x)
                rec(i + 1, x, r, parts)
                parts.pop()

        rec(0, float("inf"), 0, [])
        out.sort(key=lambda lam: (sum(lam), tuple(-p for p in lam)))
        return iter(out)


def term_valuation_bound(lam: Sequence[int], spec: SeriesSpec, n: int, R: ScalarRing, D_z: int = 0) -> int:
    return RowValuation(spec, n, R, D_z).bound(lam)


def gen_window(spec: SeriesSpec, n: int, R: ScalarRing, D_q: int, D_z: int = 0) -> tuple[int, int]:
    """``(lo, hi)`` such that every index with bound ``<= D_q`` has parts in ``[lo, hi]``."""
    wins = RowValuation(spec, n, R, D_z).windows(D_q)
    return min(w[0] for w in wins), max(w[1] for w in wins)


# ---------------------------------------------------------------------------
# summation


@dataclass
class SeriesResult:
    value: Any
    terms: int
    indices: list


def _terminating_N(spec: SeriesSpec, R: ScalarRing) -> int | None:
    if spec.terminate is not None:
        return spec.terminate
    for a in spec.upper:
        if isinstance(a, (ZSeries, Poly)):
            continue
        m = R.q_ratio(R.one, R.coerce(a))
        if m is not None and m <= 0:
            return -m
    return None


def _bilateral_box(spec: SeriesSpec, n: int, R: ScalarRing) -> tuple[int, int] | None:
    """Parts window ``(lo, hi)`` when the bilateral sum terminates in both directions.

    An upper parameter ``q^{-N}`` kills ``lam_1 > N``; a lower parameter ``L``
    with ``L t^{1-n} = q^m`` (``m >= 1``) kills ``lam_n <= -m``.
    """
    if spec.arg == "general" or isinstance(spec.z, (ZSeries, Poly)):
        return None
    hi = _terminating_N(spec, R)
    lo = None
    for L in [spec.b * R.t_pow(n - 1), *spec.lower]:
        if isinstance(L, (ZSeries, Poly)):
            continue
        m = R.q_ratio(R.one, R.coerce(L) * R.t_pow(1 - n))
        if m is not None and m >= 1:
            lo = 1 - m if lo is None else max(lo, 1 - m)
    if hi is None or lo is None:
        return None
    return lo, hi


def index_set(spec: SeriesSpec, n: int, R: ScalarRing, D_z: int | None, D_q: int | None) -> list:
    if spec.kind == "PSI":
        box = _bilateral_box(spec, n, R)
        if box is not None:
            return pt.enumerate_partitions(n, gen_window=box)
        if not R.formal:
            raise ValuationError("a bilateral series is evaluated in formal mode unless it terminates both ways")
        return list(RowValuation(spec, n, R, D_z or 0).indices(D_q))
    N = _terminating_N(spec, R)
    by_degree = spec.arg == "general" or (spec.arg == "tdelta" and isinstance(spec.z, ZSeries))
    if by_degree:
        if D_z is None:
            raise ValueError("degree truncation D_z is required")
        idx = pt.enumerate_partitions(n, max_weight=D_z)
        if N is not None:
            idx = [lam for lam in idx if not lam or lam[0] <= N]
        return idx
    if N is not None:
        return pt.enumerate_partitions(n, box=(N, n))
    if not R.formal:
        raise ValuationError("a non-terminating series at a scalar argument needs formal mode")
    if D_q is None:
        raise ValueError("formal truncation D_q is required")
    return list(RowValuation(spec, n, R, D_z or 0).indices(D_q))


def phi_series(spec: SeriesSpec, n: int, R: ScalarRing, D_z: int | None = None, D_q: int | None = None) -> SeriesResult:
    """Sum the series over its index set (see :func:`index_set`)."""
    idx = index_set(spec, n, R, D_z, D_q)
    if spec.arg == "general":
        coeffs = {}
        for lam in idx:
            c = term_coefficient(lam, spec, n, R)
            if not _is_zero(c):
                coeffs[lam] = c
        return SeriesResult(SymSeries(n, D_z, coeffs), len(idx), idx)
    total = R.zero
    if isinstance(spec.z, ZSeries):
        total = ZSeries({0: R.zero}, spec.z.D)
    for lam in idx:
        total = total + term_value(lam, spec, n, R)
    return SeriesResult(total, len(idx), idx)


def psi_prefactor(b: Any, n: int, R: ScalarRing):
    """``prod_i (b t^{i-1})_inf (q)_inf / ((q t^{i-1})_inf (b)_inf)``."""
    nums, dens = [], []
    for i in range(n):
        nums += [b * R.t_pow(i), R.q]
        dens += [R.qt_pow(1, i), b]
    return R.inf_ratio(nums, dens)


def psi_series(spec: SeriesSpec, n: int, R: ScalarRing, D_q: int, D_z: int = 0) -> SeriesResult:
    """Prefactor times the bilateral sum, exact through ``q^{D_q}``."""
    if spec.kind != "PSI":
        raise ValueError("psi_series needs a PSI spec")
    res = phi_series(spec, n, R, D_z=D_z, D_q=D_q)
    return SeriesResult(psi_prefactor(spec.b, n, R) * res.value, res.terms, res.indices)


def check_shell(spec: SeriesSpec, n: int, R: ScalarRing, D_q: int, D_z: int = 0) -> int:
    """Assert every index in the 1-wider box but outside the sum has valuation above ``D_q``.

    Returns the number of shell terms examined.
    """
    model = RowValuation(spec, n, R, D_z)
    inside = set(model.indices(D_q))
    count = 0
    for lam in model.indices(D_q, widen=1):
        if lam in inside or (spec.kind == "PHI" and min(lam) < 0):
            continue
        v = term_value(lam, spec, n, R)
        count += 1
        val = v.valuation() if isinstance(v, QSeries) else None
        if val is not None and val <= D_q:
            raise ValuationError(f"term {lam} has valuation {val} <= {D_q} but was excluded")
        if model.bound(lam) <= D_q:
            raise ValuationError(f"index {lam} with bound <= {D_q} missing from the window")
    return count


# ---------------------------------------------------------------------------
# product prefactors


def prefactor_euler(pairs: Sequence[tuple[Any, Any]], n: int, R: ScalarRing, D: int) -> Poly:
    """``prod_i prod_(alpha, beta) (alpha z_i)_inf / (beta z_i)_inf`` via Euler's expansions."""
    out = Poly.const(n, R.one, D)
    for alpha, beta in pairs:
        for i in range(n):
            if not _is_zero(alpha):
                out = out * euler_poch_inf(R, Poly.var(n, i, alpha, D))
            if not _is_zero(beta):
                out = out * euler_poch_inf(R, Poly.var(n, i, beta, D), inverse=True)
    return out


def prefactor_qbin(alpha: Any, beta: Any, n: int, R: ScalarRing, D: int) -> SymSeries:
    """``prod_i (alpha z_i)_inf / (beta z_i)_inf`` as a one-term-per-index Macdonald series."""
    a = alpha / beta
    coeffs = {}
    for lam in pt.enumerate_partitions(n, max_weight=D):
        c = mac.gen_qfactorial(a, lam, R) / mac.hprime(lam, R)
        w = sum(lam)
        if w:
            c = c * beta ** w
        if not _is_zero(c):
            coeffs[lam] = c
    return SymSeries(n, D, coeffs)


def prefactor_product(pairs: Sequence[tuple[Any, Any]], n: int, R: ScalarRing, D: int) -> Poly:
    """Euler-route product, cross-checked against the one-term-per-index route."""
    out = prefactor_euler(pairs, n, R, D)
    if len(pairs) == 1 and not _is_zero(pairs[0][1]):
        other = prefactor_qbin(pairs[0][0], pairs[0][1], n, R, D).to_poly(R)
        if not (out - other).is_zero():
            raise ArithmeticError("prefactor expansions disagree")
    return out
