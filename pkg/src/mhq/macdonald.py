"""Macdonald polynomials and the quantities built from them.

``P_lambda`` is computed from the branching rule: the coefficient of a
monomial ``x^nu`` is a sum over chains of horizontal strips, and each strip
contributes a product of ratios ``b_mu(s)/b_lambda(s)``.  The result is
exact in either scalar mode and does not depend on the number of variables
beyond the length restriction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Mapping, Sequence

from . import cache as disk
from . import partition as pt
from .ring import Poly, QSeries, ScalarRing, _is_zero
from .ring import from_text as scalar_from_text
from .ring import to_text as scalar_text

# ---------------------------------------------------------------------------
# per-ring memo tables


def _memo(R: ScalarRing, name: str) -> dict:
    tables = R.__dict__.setdefault("_mhq_memo", {})
    return tables.setdefault(name, {})


def _qt(R: ScalarRing, a: int, b: int):
    return R.qt_pow(a, b)


def _b(R: ScalarRing, lam: tuple, conj: tuple, i: int, j: int):
    """``b_lam(s) = (1 - q^a t^{l+1}) / (1 - q^{a+1} t^l)``; 1 outside the diagram."""
    if i >= len(lam) or j >= lam[i]:
        return None
    arm = lam[i] - j - 1
    leg = conj[j] - i - 1
    return arm, leg


def psi_strip(lam: Sequence[int], mu: Sequence[int], R: ScalarRing):
    """Branching coefficient ``psi_{lam/mu}`` for a horizontal strip ``lam/mu``."""
    lam, mu = pt.strip(lam), pt.strip(mu)
    memo = _memo(R, "psi")
    key = (lam, mu)
    hit = memo.get(key)
    if hit is not None:
        return hit
    cl, cm = pt.conjugate(lam), pt.conjugate(mu)
    mu_p = pt.pad(mu, len(lam)) if len(mu) <= len(lam) else mu
    strip_rows = {i for i in range(len(lam)) if lam[i] > mu_p[i]}
    strip_cols = {j for i in strip_rows for j in range(mu_p[i], lam[i])}
    num_f = []
    den_f = []
    for i in strip_rows:
        for j in range(lam[i]):
            if j in strip_cols:
                continue
            am, lm = _b(R, mu, cm, i, j)
            al, ll = _b(R, lam, cl, i, j)
            # b_mu(s) / b_lam(s)
            num_f.append((am, lm + 1))
            den_f.append((am + 1, lm))
            num_f.append((al + 1, ll))
            den_f.append((al, ll + 1))
    num = R.one
    den = R.one
    for a, l in num_f:
        num = num * (1 - _qt(R, a, l))
    for a, l in den_f:
        den = den * (1 - _qt(R, a, l))
    val = num / den
    memo[key] = val
    return val


def mac_coeff(lam: Sequence[int], nu: Sequence[int], R: ScalarRing):
    """Coefficient of ``m_nu`` in ``P_lam`` (zero unless ``nu <= lam``)."""
    lam, nu = pt.strip(lam), pt.strip(nu)
    if pt.weight(lam) != pt.weight(nu) or len(lam) > len(nu):
        return R.zero
    return _mac_coeff(lam, nu, R)


def _mac_coeff(lam: tuple, nu: tuple, R: ScalarRing):
    if not nu:
        return R.one if not lam else R.zero
    memo = _memo(R, "mono")
    key = (lam, nu)
    hit = memo.get(key)
    if hit is not None:
        return hit
    last = nu[-1]
    rest = nu[:-1]
    total = R.zero
    target = pt.weight(lam) - last
    for mu in pt.horizontal_strips_inside(lam, len(rest)):
        if pt.weight(mu) != target:
            continue
        sub = _mac_coeff(mu, rest, R)
        if _is_zero(sub):
            continue
        total = total + psi_strip(lam, mu, R) * sub
    memo[key] = total
    return total


@dataclass(frozen=True)
class MacPoly:
    """``P_lam`` in ``n`` variables as a monomial-basis expansion."""

    lam: tuple
    n: int
    coeffs: Mapping[tuple, Any]

    def to_poly(self, D: int | None = None) -> Poly:
        return monomial_to_poly(self.coeffs, self.n, D)


def macdonald_poly(lam: Sequence[int], n: int, R: ScalarRing) -> MacPoly:
    lam = pt.partition(lam)
    if len(lam) > n:
        raise pt.PartitionError(f"P_{lam} needs at least {len(lam)} variables, got {n}")
    memo = _memo(R, "macpoly")
    key = (lam, n)
    hit = memo.get(key)
    if hit is None:
        dkey = _disk_key("macpoly", (lam,), n, R)
        coeffs = _disk_load(dkey, R)
        if coeffs is None:
            coeffs = _compute_macpoly(lam, n, R)
            _disk_store(dkey, coeffs, R)
        hit = MacPoly(lam, n, coeffs)
        memo[key] = hit
    return hit


def _compute_macpoly(lam: tuple, n: int, R: ScalarRing) -> dict:
    coeffs = {}
    for nu in pt.partitions_of(pt.weight(lam), n):
        c = mac_coeff(lam, nu, R)
        if not _is_zero(c):
            coeffs[nu] = c
    return coeffs


# ---------------------------------------------------------------------------
# disk cache glue


def _disk_key(kind: str, parts: Sequence[tuple], n: int, R: ScalarRing) -> str:
    return "|".join([kind, *(pt.to_text(p) for p in parts), f"n={n}", R.fingerprint()])


def _truncate(v: Any, cap: int) -> Any:
    # an entry stored at a higher order serves any lower one
    if isinstance(v, QSeries) and (v.prec is None or v.prec > cap):
        prec = cap if v.prec is not None else None
        return QSeries({e: c for e, c in v.c.items() if prec is None or e < prec}, prec, cap)
    return v


def _disk_load(key: str, R: ScalarRing) -> dict | None:
    c = disk.active()
    if c is None:
        return None
    entry = c.get(key, R.cap if R.formal else None)
    if entry is None:
        return None
    return {pt.from_text(k): _truncate(scalar_from_text(v, R.cap), R.cap) for k, v in entry.data.items()}


def _disk_store(key: str, coeffs: Mapping[tuple, Any], R: ScalarRing) -> None:
    c = disk.active()
    if c is not None:
        c.put(key, _serialize(coeffs), R.cap if R.formal else None)


def _serialize(coeffs: Mapping[tuple, Any]) -> dict[str, str]:
    return {pt.to_text(k): scalar_text(v) for k, v in coeffs.items()}


def recompute_entry(entry: disk.Entry) -> dict[str, str]:
    """Recompute a cached entry from its key alone (used by the integrity check)."""
    fields = entry.key.split("|")
    kind, ring_fp = fields[0], fields[-1]
    n = int(fields[-2][2:])
    parts = [pt.from_text(f) for f in fields[1:-2]]
    mode, _, rest = ring_fp.partition(":")
    vals = dict(item.split("=", 1) for item in rest.split(":"))
    if mode == "formal":
        R = ScalarRing("formal", k=int(vals["k"]), cap=entry.prec)
    else:
        R = ScalarRing("rational", q=scalar_from_text(vals["q"]), t=scalar_from_text(vals["t"]),
                       k=int(vals["k"]) if "k" in vals else None)
    if kind == "macpoly":
        return _serialize(_compute_macpoly(parts[0], n, R))
    if kind == "fexp":
        return _serialize(_compute_fexp(parts[0], parts[1], n, R))
    raise ValueError(f"unknown cache entry kind {kind!r}")


def distinct_permutations(nu: Sequence[int]):
    return sorted(set(itertools.permutations(nu)), reverse=True)


def monomial_to_poly(coeffs: Mapping[tuple, Any], n: int, D: int | None = None) -> Poly:
    out = {}
    for nu, c in coeffs.items():
        for alpha in distinct_permutations(pt.pad(nu, n)):
            out[alpha] = c
    return Poly(n, out, D)


def poly_to_monomial(f: Poly) -> dict:
    """Monomial-basis coefficients of a symmetric polynomial."""
    out = {}
    for e, v in f.c.items():
        if list(e) == sorted(e, reverse=True):
            out[pt.strip(e)] = v
    return out


def poly_of(lam: Sequence[int], n: int, R: ScalarRing, D: int | None = None) -> Poly:
    """``P_lam`` as a Laurent polynomial; negative parts use ``|x|^{lam_n} P_{lam - lam_n}``."""
    lam = tuple(lam)
    if lam and min(lam) < 0:
        lam = pt.gen_partition(pt.pad(lam, n) if len(lam) < n else lam)
        m = lam[-1]
        base = macdonald_poly(pt.shift(lam, -m), n, R).to_poly()
        return base.times_monomial((m,) * n)
    return macdonald_poly(lam, n, R).to_poly(D)


# ---------------------------------------------------------------------------
# hooks, factorials, specializations


def hook_products(lam: Sequence[int], R: ScalarRing):
    """``(h_lam, h'_lam)``."""
    lam = pt.partition(lam)
    memo = _memo(R, "hooks")
    hit = memo.get(lam)
    if hit is None:
        h = R.one
        hp = R.one
        for arm, leg in pt.arm_leg(lam):
            h = h * (1 - _qt(R, arm, leg + 1))
            hp = hp * (1 - _qt(R, arm + 1, leg))
        hit = (h, hp)
        memo[lam] = hit
    return hit


def hprime(lam: Sequence[int], R: ScalarRing):
    return hook_products(lam, R)[1]


def hprime_lapiz(lam: Sequence[int], n: int, R: ScalarRing):
    """``h'_lam`` from the infinite-product formula (pairs collapse to finite products)."""
    lam = pt.pad(pt.strip(lam), n) if not (lam and min(lam) < 0) else tuple(lam)
    q = R.q
    nums = [q] * n
    dens = []
    for i in range(n):
        dens.append(_qt(R, lam[i] + 1, n - 1 - i))
    for i in range(n):
        for j in range(i + 1, n):
            d = lam[i] - lam[j] + 1
            nums.append(_qt(R, d, j - i))
            dens.append(_qt(R, d, j - i - 1))
    return R.inf_ratio(nums, dens)


def gen_qfactorial(a: Any, lam: Sequence[int], R: ScalarRing, inverse: bool = False):
    """``(a)_lam = t^{n(lam)} prod_i (a t^{1-i}; q)_{lam_i}``.

    Negative parts follow the infinite-product reading, which is the same
    as the finite ``(x;q)_m`` with negative ``m``.  With ``inverse=True``
    the reciprocal is built directly, so vanishing reciprocals are exact.
    """
    lam = tuple(lam)
    out = R.one
    for i, p in enumerate(lam):
        if p == 0:
            continue
        x = a * R.t_pow(-i)
        if inverse:
            out = out * R.poch_inverse(x, p)
        else:
            out = out * R.poch(x, p)
    tn = R.t_pow(pt.nlam(lam))
    return out / tn if inverse else out * tn


def gen_qfactorial_inf(a: Any, lam: Sequence[int], n: int, R: ScalarRing):
    """The infinite-product definition, used to cross-check :func:`gen_qfactorial`."""
    lam = pt.pad(tuple(lam), n) if len(lam) < n else tuple(lam)
    nums = [a * R.t_pow(-i) for i in range(n)]
    dens = [a * R.t_pow(-i) * R.q_pow(lam[i]) for i in range(n)]
    return R.t_pow(pt.nlam(lam)) * R.inf_ratio(nums, dens)


def principal_spec(lam: Sequence[int], n: int, R: ScalarRing):
    """``P_lam(1, t, ..., t^{n-1}) = (t^n)_lam / h_lam``; generalized partitions allowed."""
    lam = tuple(lam)
    if lam and min(lam) < 0:
        full = pt.pad(lam, n) if len(lam) < n else lam
        m = full[-1]
        return R.t_pow(m * n * (n - 1) // 2) * principal_spec(pt.shift(full, -m), n, R)
    lam = pt.partition(lam)
    if len(lam) > n:
        raise pt.PartitionError(f"P_{lam} needs at least {len(lam)} variables, got {n}")
    memo = _memo(R, "principal")
    key = (lam, n)
    hit = memo.get(key)
    if hit is None:
        h, _ = hook_products(lam, R)
        hit = gen_qfactorial(R.t_pow(n), lam, R) / h
        memo[key] = hit
    return hit


def eval_tdelta(lam: Sequence[int], n: int, R: ScalarRing, z: Any = None):
    """``P_lam(z t^delta) = z^{|lam|} P_lam(t^delta)``."""
    val = principal_spec(lam, n, R)
    if z is None:
        return val
    w = sum(lam)
    if w >= 0:
        return val * z ** w if w else val
    return val / (z ** (-w))


def m_eval(nu: Sequence[int], point: Sequence[Any], R: ScalarRing):
    """Monomial symmetric function ``m_nu`` at a point."""
    n = len(point)
    total = R.zero
    for alpha in distinct_permutations(pt.pad(nu, n)):
        term = R.one
        for x, e in zip(point, alpha):
            if e:
                term = term * x ** e
        total = total + term
    return total


def evaluate(lam: Sequence[int], point: Sequence[Any], R: ScalarRing):
    """``P_lam`` at an explicit point; negative parts allowed."""
    n = len(point)
    lam = tuple(lam)
    if lam and min(lam) < 0:
        full = pt.pad(lam, n) if len(lam) < n else lam
        m = full[-1]
        prod = R.one
        for x in point:
            prod = prod * x
        base = evaluate(pt.shift(full, -m), point, R)
        return base * prod ** m if m >= 0 else base / prod ** (-m)
    mp = macdonald_poly(lam, n, R)
    total = R.zero
    for nu, c in mp.coeffs.items():
        total = total + c * m_eval(nu, point, R)
    return total


def u_point(lam: Sequence[int], n: int, R: ScalarRing) -> list:
    lam = pt.pad(tuple(lam), n) if len(lam) < n else tuple(lam)
    return [_qt(R, lam[i], n - 1 - i) for i in range(n)]


def u_eval(lam: Sequence[int], mu: Sequence[int], n: int, R: ScalarRing):
    """``u_lam(P_mu)``: ``P_mu`` at ``x_i = q^{lam_i} t^{n-i}``."""
    return evaluate(mu, u_point(lam, n, R), R)


# ---------------------------------------------------------------------------
# structure constants


def _coeff_of_exponent(coeffs: Mapping[tuple, Any], alpha: Sequence[int]):
    return coeffs.get(pt.strip(sorted(alpha, reverse=True)))


def f_expand(mu: Sequence[int], nu: Sequence[int], n: int, R: ScalarRing) -> dict:
    """Coefficients ``f^lam_{mu nu}`` of ``P_mu P_nu = sum_lam f^lam_{mu nu} P_lam``."""
    mu, nu = pt.partition(mu), pt.partition(nu)
    memo = _memo(R, "fexp")
    key = (mu, nu, n) if mu >= nu else (nu, mu, n)
    hit = memo.get(key)
    if hit is not None:
        return hit
    dkey = _disk_key("fexp", key[:2], n, R)
    out = _disk_load(dkey, R)
    if out is None:
        out = _compute_fexp(key[0], key[1], n, R)
        _disk_store(dkey, out, R)
    memo[key] = out
    return out


def _compute_fexp(mu: tuple, nu: tuple, n: int, R: ScalarRing) -> dict:
    A = macdonald_poly(mu, n, R).coeffs
    B = macdonald_poly(nu, n, R).coeffs
    w = pt.weight(mu) + pt.weight(nu)
    targets = list(pt.partitions_of(w, n))
    prod = {}
    for lam in targets:
        full = pt.pad(lam, n)
        s = R.zero
        for alpha in itertools.product(*(range(p + 1) for p in full)):
            if sum(alpha) != pt.weight(mu):
                continue
            a = _coeff_of_exponent(A, alpha)
            if a is None:
                continue
            b = _coeff_of_exponent(B, [p - x for p, x in zip(full, alpha)])
            if b is None:
                continue
            s = s + a * b
        if not _is_zero(s):
            prod[lam] = s
    out = {}
    for lam in targets:  # reverse-lex order refines dominance
        c = prod.get(lam)
        if c is None or _is_zero(c):
            continue
        out[lam] = c
        for sigma, v in macdonald_poly(lam, n, R).coeffs.items():
            if sigma in prod:
                prod[sigma] = prod[sigma] - c * v
            else:
                prod[sigma] = -(c * v)
    return out


# ---------------------------------------------------------------------------
# inner product and constant terms


def weight_delta(n: int, R: ScalarRing) -> Poly:
    """``prod_{i<j} (x_i/x_j;q)_k (x_j/x_i;q)_k`` with ``t = q^k``."""
    k = _require_k(R)
    memo = _memo(R, "delta")
    hit = memo.get(n)
    if hit is not None:
        return hit
    out = Poly.const(n, R.one)
    for i in range(n):
        for j in range(i + 1, n):
            e = [0] * n
            e[i], e[j] = 1, -1
            r = Poly.monomial(n, e, R.one)
            rinv = Poly.monomial(n, [-x for x in e], R.one)
            out = out * R.poch(r, k) * R.poch(rinv, k)
    memo[n] = out
    return out


def _require_k(R: ScalarRing) -> int:
    k = R.k
    if k is None or k < 0:
        raise ValueError("the constant-term inner product needs t = q^k with integer k >= 0")
    if not R.formal and R.t != R.q ** k:
        raise ValueError("t does not equal q^k")
    return k


def inner_product(f: Poly, g: Poly, n: int, R: ScalarRing):
    """``(1/n!) CT(f(x) g(1/x) Delta_q(x))``."""
    return _ct_against_delta(f * g.reversed_vars(), n, R)


def ground(n: int, R: ScalarRing):
    """Closed form of ``<1,1>``."""
    k = _require_k(R)
    q = R.q
    out = R.one
    for i in range(1, n + 1):
        out = out * R.poch(q, i * k - 1) / (R.poch(q, k - 1) * R.poch(q, (i - 1) * k))
    return out


def norm_closed(lam: Sequence[int], n: int, R: ScalarRing):
    """``<P_lam, P_lam>`` from the hook formula times ``<1,1>``."""
    h, hp = hook_products(lam, R)
    tn = gen_qfactorial(R.t_pow(n), lam, R)
    qt = gen_qfactorial(R.qt_pow(1, n - 1), lam, R)
    return hp / h * tn / qt * ground(n, R)


def ct_A(lam: Sequence[int], a: int, b: int, n: int, R: ScalarRing):
    """``(1/n!) CT{P_lam(x) prod_i (x_i;q)_a (q/x_i;q)_b Delta_q(x)}`` for integers ``a, b >= 0``."""
    if a < 0 or b < 0:
        raise ValueError("ct_A needs non-negative integer a and b")
    f = poly_of(lam, n, R)
    for i in range(n):
        xi = Poly.var(n, i, R.one)
        e = [0] * n
        e[i] = -1
        qxi = Poly.monomial(n, e, R.q)
        f = f * R.poch(xi, a) * R.poch(qxi, b)
    return _ct_against_delta(f, n, R)


def _ct_against_delta(f: Poly, n: int, R: ScalarRing):
    """``(1/n!) CT(f Delta_q)`` without forming the full product."""
    delta = weight_delta(n, R).c
    total = R.zero
    for e, v in f.c.items():
        w = delta.get(tuple(-x for x in e))
        if w is not None:
            total = total + v * w
    return total / math.factorial(n)


def ct_A_closed(lam: Sequence[int], a: int, b: int, n: int, R: ScalarRing):
    """Closed form of :func:`ct_A`."""
    lam = tuple(lam)
    w = sum(lam)
    nums, dens = [], []
    for i in range(n):
        nums += [_qt(R, 1 + a, i), _qt(R, 1 + b, i)]
        dens += [_qt(R, 1, i), _qt(R, 1 + a + b, i)]
    pre = R.q_pow((1 + b) * w) * R.inf_ratio(nums, dens)
    full = pt.pad(lam, n) if len(lam) < n and not (lam and min(lam) < 0) else lam
    ratio = gen_qfactorial(R.q_pow(-b), full, R) * gen_qfactorial(_qt(R, 1 + a, n - 1), full, R, inverse=True)
    return pre * ratio * principal_spec(full, n, R) * ground(n, R)


def qt_over_hprime(lam: Sequence[int], n: int, R: ScalarRing):
    """``(q t^{n-1})_lam / h'_lam`` for any generalized partition (needs ``t = q^k``).

    The two factors are singular separately once ``lam_i`` is very negative;
    their ratio is the finite product returned here.
    """
    k = _require_k(R)
    lam = pt.pad(tuple(lam), n) if len(lam) < n else tuple(lam)
    out = R.t_pow(pt.nlam(lam))
    for i in range(n):
        out = out / R.poch(R.q, k * (n - 1 - i))
    for i in range(n):
        for j in range(i + 1, n):
            out = out * R.poch(_qt(R, lam[i] - lam[j] + 1, j - i - 1), k)
    return out
