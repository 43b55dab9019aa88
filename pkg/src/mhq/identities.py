"""Registry of identities: executable left and right sides plus constraints.

Every entry builds a list of :class:`Comparison` pairs for a
:class:`~mhq.ring.ParamSpec` and :func:`verify` compares them exactly (in
formal mode: through ``q^{D_q}``).  Constraints are data attached to the
entry and are checked before anything is computed.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from gmpy2 import mpq

from . import macdonald as mac
from . import partition as pt
from .hyperseries import (
    PoleError,
    SymSeries,
    check_shell,
    phi,
    phi_series,
    prefactor_euler,
    psi,
    psi_series,
)
from .qdifference import (
    euler_mechanization,
    product_rule_sides,
    qdif_residual,
    random_symmetric,
    summation_sides,
)
from .ring import (
    NotCollapsible,
    ParamSpec,
    Poly,
    PrecisionError,
    QSeries,
    ScalarRing,
    ValuationError,
    ZSeries,
    _is_zero,
    euler_poch_inf,
    first_difference,
    rational,
    to_text,
)

PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"
FORMAL, RATIONAL = "formal", "rational"


class UnknownIdentity(KeyError):
    pass


@dataclass(frozen=True)
class Constraint:
    text: str
    test: Callable[[ParamSpec], bool]

    def holds(self, ps: ParamSpec) -> bool:
        try:
            return bool(self.test(ps))
        except (KeyError, ValueError, TypeError):
            return False


@dataclass
class Comparison:
    label: str
    lhs: Any
    rhs: Any


@dataclass
class Outcome:
    comparisons: list
    terms: int = 0


@dataclass(frozen=True)
class IdentityEntry:
    id: str
    anchor: str
    kind: str
    modes: tuple
    constraints: tuple
    build: Callable[[ParamSpec, ScalarRing], Outcome]
    defaults: Callable[[int], list]
    argument: str = ""

    def summary(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "kind": self.kind,
            "modes": list(self.modes),
            "argument": self.argument,
            "constraints": [c.text for c in self.constraints],
        }


@dataclass
class IdentityReport:
    identity: str
    mode: str
    params: dict
    truncation: dict
    status: str
    witness: Any
    terms: int
    elapsed_ms: float
    fingerprint: str = ""
    reason: str = ""

    def to_json(self) -> dict:
        out = {
            "identity": self.identity,
            "mode": self.mode,
            "params": self.params,
            "truncation": self.truncation,
            "status": self.status,
            "witness": self.witness,
            "terms": self.terms,
            "elapsed_ms": self.elapsed_ms,
        }
        if self.reason:
            out["reason"] = self.reason
        out["fingerprint"] = self.fingerprint
        return out


# ---------------------------------------------------------------------------
# comparing values


def _flatten(x: Any) -> tuple[dict, int | None]:
    """Map a value to ``{key: scalar}`` and the degree through which it is exact."""
    if isinstance(x, SymSeries):
        return {pt.to_text(k): v for k, v in x.coeffs.items()}, x.D
    if isinstance(x, Poly):
        return {",".join(map(str, e)): v for e, v in x.c.items()}, x.D
    if isinstance(x, ZSeries):
        return {f"z^{d}": v for d, v in x.c.items()}, x.D
    if isinstance(x, dict):
        out = {}
        for k, v in x.items():
            key = pt.to_text(k) if isinstance(k, tuple) else str(k)
            out[key] = v
        return out, None
    return {"": x}, None


def _degree(key: str) -> int:
    if key.startswith("z^"):
        return int(key[2:])
    try:
        return sum(int(p) for p in key.split(",")) if key else 0
    except ValueError:
        return 0


def _text(v: Any) -> str:
    if isinstance(v, (QSeries, mpq, int)):
        return to_text(v)
    return repr(v)


def compare(label: str, lhs: Any, rhs: Any, order: int | None) -> dict | None:
    """Witness for the first differing coefficient, or ``None``.

    Raises :class:`PrecisionError` when a formal difference is not known
    through ``q^order``.
    """
    a, Da = _flatten(lhs)
    b, Db = _flatten(rhs)
    degs = [D for D in (Da, Db) if D is not None]
    top = min(degs) if degs else None
    structured = not (set(a) == {""} and set(b) == {""})
    for key in sorted(set(a) | set(b), key=lambda s: (_degree(s) if structured else 0, s)):
        if top is not None and structured and _degree(key) > top:
            continue
        x, y = a.get(key, 0), b.get(key, 0)
        d = x - y
        if isinstance(d, QSeries):
            if order is not None and d.prec is not None and d.prec <= order:
                raise PrecisionError(f"{label}: difference known only below q^{d.prec}")
            hit = first_difference(x, y, order) if isinstance(x, QSeries) or isinstance(y, QSeries) else None
            if hit is None:
                continue
            e = hit[0]
            return {
                "check": label,
                "index": key,
                "q_exponent": e,
                "lhs": to_text(x.coefficient(e) if isinstance(x, QSeries) else (x if e == 0 else 0)),
                "rhs": to_text(y.coefficient(e) if isinstance(y, QSeries) else (y if e == 0 else 0)),
            }
        if not _is_zero(d):
            return {"check": label, "index": key, "lhs": _text(x), "rhs": _text(y)}
    return None


# ---------------------------------------------------------------------------
# registry and verification

_REGISTRY: dict[str, IdentityEntry] = {}


def register(entry: IdentityEntry) -> IdentityEntry:
    _REGISTRY[entry.id] = entry
    return entry


def get_entry(identity: str) -> IdentityEntry:
    try:
        return _REGISTRY[identity]
    except KeyError:
        raise UnknownIdentity(identity) from None


def list_identities() -> list[dict]:
    return [e.summary() for e in _REGISTRY.values()]


def _params_record(ps: ParamSpec) -> dict:
    out = {"n": ps.n}
    if ps.k is not None:
        out["k"] = ps.k
    if not ps.formal:
        out["q"] = to_text(rational(ps.q))
        if ps.t is not None:
            out["t"] = to_text(rational(ps.t))
    out.update(ps.params_json())
    for name in sorted(ps.extra):
        v = ps.extra[name]
        out[name] = list(v) if isinstance(v, tuple) else v
    return out


def _truncation(ps: ParamSpec) -> dict:
    out = {"D_z": ps.D_z}
    if ps.formal:
        out["D_q"] = ps.D_q
    return out


_DIAGNOSED = (PoleError, ValuationError, NotCollapsible, ZeroDivisionError, ArithmeticError)


def verify(identity: str, ps: ParamSpec, max_retries: int = 3) -> IdentityReport:
    """Build both sides of ``identity`` at ``ps`` and compare them exactly."""
    entry = get_entry(identity)
    start = time.perf_counter()

    def report(status, witness=None, terms=0, reason=""):
        elapsed = round((time.perf_counter() - start) * 1000, 3)
        return IdentityReport(
            identity, ps.mode, _params_record(ps), _truncation(ps), status,
            witness, terms, elapsed, ps.fingerprint(), reason,
        )

    if ps.mode not in entry.modes:
        return report(SKIPPED, reason=f"mode {ps.mode} not admissible")
    for c in entry.constraints:
        if not c.holds(ps):
            return report(SKIPPED, reason=f"constraint: {c.text}")
    order = ps.D_q if ps.formal else None
    cap = ps.cap or ps.D_q + 12
    for attempt in range(max_retries + 1):
        spec = ps.replace(cap=cap) if ps.formal else ps
        try:
            out = entry.build(spec, spec.ring())
            for comp in out.comparisons:
                w = compare(comp.label, comp.lhs, comp.rhs, order)
                if w is not None:
                    return report(FAIL, w, out.terms)
            return report(PASS, None, out.terms)
        except PrecisionError as exc:
            if not ps.formal or attempt == max_retries:
                return report(FAIL, {"error": "PrecisionError", "detail": str(exc)})
            cap *= 2
        except _DIAGNOSED as exc:
            return report(FAIL, {"error": type(exc).__name__, "detail": str(exc)})
    raise AssertionError("unreachable")


def coefficient_check(identity: str, lam: Sequence[int], ps: ParamSpec) -> IdentityReport:
    """Check the coefficient identity ``identity`` at the single index ``lam``."""
    if identity not in ("SAAL_COEFF", "CHU_VANDERMONDE", "MACDONALD_RECT", "BUSCAR"):
        raise ValueError(f"{identity} is not a coefficient identity")
    return verify(identity, ps.replace(extra={**ps.extra, "lam": pt.to_text(lam)}))


def verify_defaults(identity: str, seed: int = 0) -> list[IdentityReport]:
    entry = get_entry(identity)
    return [verify(identity, ps) for ps in entry.defaults(seed)]


# ---------------------------------------------------------------------------
# shared helpers


def _rng(seed: int, salt: str) -> random.Random:
    return random.Random(f"{seed}:{salt}")


def rand_rational(rng: random.Random, lo: int = -9, hi: int = 9, den: int = 9) -> mpq:
    """A random rational avoiding ``0`` and ``+-1``."""
    while True:
        v = mpq(rng.randint(lo, hi), rng.randint(1, den))
        if v not in (0, 1, -1):
            return v


def rand_q(rng: random.Random) -> mpq:
    while True:
        num = rng.randint(1, 6)
        den = rng.randint(num + 1, 9)
        v = mpq(num, den)
        if v != 0:
            return v if rng.random() < 0.8 else -v


def _degenerate(v: mpq, q: mpq, t: mpq, span: int = 8) -> bool:
    """``v q^i t^j = 1`` for some small ``i, j``: a factor of a q-factorial could vanish."""
    for j in range(-span, span + 1):
        w = v * t ** j
        for i in range(-span, span + 1):
            if w * q ** i == 1:
                return True
    return False


def draw(rng: random.Random, q: mpq, t: mpq, names: Sequence[str],
         derived: Callable[[dict], Iterable] | None = None) -> dict:
    """Random rational parameters, generic with respect to ``q`` and ``t``.

    ``derived`` lists further combinations (such as ``c/a``) that must be
    generic too.
    """
    while True:
        p = {name: rand_rational(rng) for name in names}
        vals = list(p.values()) + list(derived(p) if derived else [])
        if not any(v == 0 or _degenerate(v, q, t) for v in vals):
            return p


def rational_point(rng: random.Random, names: Sequence[str], derived=None, k: int | None = None) -> dict:
    """``q``, ``t`` (``t = q^k`` when ``k`` is given) and generic parameters."""
    q = rand_q(rng)
    t = q ** k if k is not None else rand_q(rng)
    while k is None and _degenerate(t, q, mpq(1), 4):
        t = rand_q(rng)
    return {"q": q, "t": t, "params": draw(rng, q, t, names, derived)}


def _p(ps: ParamSpec, R: ScalarRing, name: str):
    return ps.value(R, name)


def _point(ps: ParamSpec, R: ScalarRing) -> tuple:
    return tuple(ps.value(R, f"x{i + 1}") for i in range(ps.n))


def _lam(ps: ParamSpec, key: str = "lam") -> tuple:
    v = ps.extra[key]
    return pt.from_text(v, gen=True) if isinstance(v, str) else tuple(v)


def _zpoch(R: ScalarRing, coef: Any, D: int, inverse: bool = False) -> ZSeries:
    """``(coef z; q)_inf`` (or its inverse) as a z-series."""
    return euler_poch_inf(R, ZSeries.z(coef, D), inverse=inverse)


def _zprod(R: ScalarRing, nums: Iterable, dens: Iterable, D: int) -> ZSeries:
    out = ZSeries({0: R.one}, D)
    for c in nums:
        out = out * _zpoch(R, c, D)
    for c in dens:
        out = out * _zpoch(R, c, D, inverse=True)
    return out


def _formal_only(ps: ParamSpec) -> bool:
    return ps.formal


def _is_q_power(ps: ParamSpec, name: str, sign: int = -1) -> bool:
    """Formal parameter ``name`` is exactly ``q^e`` with ``sign*e >= 0``."""
    if not ps.formal:
        return False
    from .ring import parse_formal_param

    c, e = parse_formal_param(ps.params[name])
    return c == 1 and sign * e >= 0


def _scaled(series: SymSeries, rho: Any) -> SymSeries:
    """``F(rho z)`` for a Macdonald-basis series ``F``."""
    return SymSeries(series.n, series.D, {lam: c * rho ** sum(lam) for lam, c in series.coeffs.items()})


def _spec_list(specs: Iterable[ParamSpec]) -> list:
    return list(specs)


# ---------------------------------------------------------------------------
# q-binomial theorem


def _build_qbin(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    a = _p(ps, R, "a")
    if ps.extra.get("arg", "point") == "general":
        res = phi_series(phi([a], [], arg="general"), n, R, D_z=ps.D_z)
        rhs = prefactor_euler([(a, R.one)], n, R, ps.D_z)
        return Outcome([Comparison("general z", res.value.to_poly(R), rhs)], res.terms)
    x = _point(ps, R)
    spec = phi([a], [], arg="point", point=x)
    res = phi_series(spec, n, R, D_q=ps.D_q)
    rhs = R.inf_ratio([a * xi for xi in x], list(x))
    shell = check_shell(spec, n, R, ps.D_q)
    return Outcome([Comparison("point", res.value, rhs)], res.terms + shell)


def _point_ok(ps: ParamSpec) -> bool:
    if ps.extra.get("arg", "point") == "general":
        return True
    return ps.formal and all(ps.exponent(f"x{i + 1}") > 0 for i in range(ps.n))


def _defaults_qbin(seed: int) -> list:
    out = []
    for chi in ((1, 1), (2, 1), (2, 2)):
        out.append(ParamSpec(FORMAL, 2, k=2, params={"a": 3, "x1": chi[0], "x2": chi[1]}, D_q=12))
    rng = _rng(seed, "Q_BINOMIAL")
    for m in range(4):
        q = rand_q(rng)
        out.append(ParamSpec(RATIONAL, 2, q=q, t=rand_q(rng), params={"a": q ** m}, D_z=5,
                             extra={"arg": "general"}))
    return out


register(IdentityEntry(
    "Q_BINOMIAL", "q-binomial theorem", "series-identity", (FORMAL, RATIONAL),
    (Constraint("point argument x_i = c q^chi with chi > 0 (formal mode); general z in any mode", _point_ok),),
    _build_qbin, _defaults_qbin, argument="x or general z",
))


# ---------------------------------------------------------------------------
# Heine, Gauss and Euler


def _heine_rhs(a, b, c, z, n: int, R: ScalarRing, D_q: int, D_z: int):
    """Right side of the Heine transformation; ``z`` scalar or z-series."""
    tn1 = R.t_pow(n - 1)
    nums = [b * R.t_pow(-i) for i in range(n)]
    dens = [c * R.t_pow(-i) for i in range(n)]
    if isinstance(z, ZSeries):
        pre = _zprod(R, [a * R.t_pow(n - 1 - i) for i in range(n)], [R.t_pow(n - 1 - i) for i in range(n)], D_z)
        pre = pre * R.inf_ratio(nums, dens)
    else:
        nums += [a * z * R.t_pow(n - 1 - i) for i in range(n)]
        dens += [z * R.t_pow(n - 1 - i) for i in range(n)]
        pre = R.inf_ratio(nums, dens)
    spec = phi([c / b, z * tn1], [z * (a * tn1)], z=b * R.t_pow(1 - n))
    res = phi_series(spec, n, R, D_z=D_z, D_q=D_q)
    return pre * res.value, res.terms


def _heine_c(ps: ParamSpec, R: ScalarRing):
    if "N" in ps.extra:
        return _p(ps, R, "b") * R.q_pow(-int(ps.extra["N"]))
    return _p(ps, R, "c")


def _build_heine(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, D = ps.n, ps.D_z
    a, b = _p(ps, R, "a"), _p(ps, R, "b")
    c = _heine_c(ps, R)
    Z = ZSeries.z(R.one, D)
    lhs = phi_series(phi([a, b], [c], z=Z), n, R, D_z=D)
    rhs, terms = _heine_rhs(a, b, c, Z, n, R, ps.D_q, D)
    return Outcome([Comparison("heine", lhs.value, rhs)], lhs.terms + terms)


def _heine_ok(ps: ParamSpec) -> bool:
    if ps.formal:
        return "N" in ps.extra or ps.exponent("b") > ps.k * (ps.n - 1)
    return "N" in ps.extra and int(ps.extra["N"]) >= 0 and "c" not in ps.params


def _defaults_heine(seed: int) -> list:
    out = [
        ParamSpec(FORMAL, 1, k=1, params={"a": (2, 0), "b": (3, 1), "c": (5, 3)}, D_q=10, D_z=5),
        ParamSpec(FORMAL, 2, k=1, params={"a": (2, 0), "b": (3, 2), "c": (5, 5)}, D_q=10, D_z=5),
    ]
    rng = _rng(seed, "HEINE")
    for n in (1, 2):
        for N in (1, 2):
            pt_ = rational_point(rng, "ab", lambda p: [p["a"] / p["b"]])
            out.append(ParamSpec(RATIONAL, n, q=pt_["q"], t=pt_["t"], params=pt_["params"],
                                 D_z=5, extra={"N": N}))
    return out


register(IdentityEntry(
    "HEINE", "Heine transformation", "series-identity", (FORMAL, RATIONAL),
    (Constraint("rational mode: c = b q^-N (N >= 0) so both sides are finite; "
                "formal mode: b t^(1-n) has positive q-valuation", _heine_ok),),
    _build_heine, _defaults_heine, argument="z t^delta, z formal",
))


def _gauss_sides(a, b, c, n: int, R: ScalarRing, D_q: int):
    z0 = c / (a * b * R.t_pow(n - 1))
    res = phi_series(phi([a, b], [c], z=z0), n, R, D_q=D_q)
    ts = [R.t_pow(-i) for i in range(n)]
    rhs = R.inf_ratio([c / b * s for s in ts] + [c / a * s for s in ts],
                      [c / (a * b) * s for s in ts] + [c * s for s in ts])
    return res, rhs, z0


def _gauss_a(ps: ParamSpec, R: ScalarRing):
    if "N" in ps.extra:
        return R.q_pow(-int(ps.extra["N"]))
    return _p(ps, R, "a")


def _build_gauss(ps: ParamSpec, R: ScalarRing) -> Outcome:
    a, b, c = _gauss_a(ps, R), _p(ps, R, "b"), _p(ps, R, "c")
    res, rhs, _ = _gauss_sides(a, b, c, ps.n, R, ps.D_q)
    return Outcome([Comparison("gauss", res.value, rhs)], res.terms)


def _gauss_ok(ps: ParamSpec) -> bool:
    if "N" in ps.extra:
        return int(ps.extra["N"]) >= 0 and "a" not in ps.params
    if not ps.formal:
        return False
    return ps.exponent("c") - ps.exponent("a") - ps.exponent("b") - ps.k * (ps.n - 1) > 0


def _defaults_gauss(seed: int) -> list:
    rng = _rng(seed, "GAUSS")
    out = []
    for n in (1, 2, 3):
        for N in (1, 2, 3):
            for k in (1, 2):
                for _ in range(5):
                    pt_ = rational_point(rng, "bc", lambda p: [p["c"] / p["b"]], k=k)
                    out.append(ParamSpec(RATIONAL, n, k=k, q=pt_["q"], params=pt_["params"], extra={"N": N}))
    out.append(ParamSpec(FORMAL, 2, k=1, params={"a": (2, 0), "b": (3, 0), "c": (5, 3)}, D_q=10))
    return out


register(IdentityEntry(
    "GAUSS", "q-Gauss summation", "series-identity", (FORMAL, RATIONAL),
    (Constraint("terminating a = q^-N (rational mode), or c/(ab t^(n-1)) of positive valuation (formal)",
                _gauss_ok),),
    _build_gauss, _defaults_gauss, argument="c/(a b t^(n-1)) t^delta",
))


def _build_heine_gauss(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    a, b, c = _p(ps, R, "a"), _p(ps, R, "b"), _p(ps, R, "c")
    res, gauss_rhs, z0 = _gauss_sides(a, b, c, n, R, ps.D_q)
    heine, terms = _heine_rhs(a, b, c, z0, n, R, ps.D_q, 0)
    ts = [R.t_pow(-i) for i in range(n)]
    # at this argument the Heine prefactor and series simplify
    pre = R.inf_ratio([b * s for s in ts] + [c / b * s for s in ts], [c * s for s in ts] + [c / (a * b) * s for s in ts])
    reduced = phi_series(phi([c / (a * b)], [], z=b * R.t_pow(1 - n)), n, R, D_q=ps.D_q)
    qbin = R.inf_ratio([c / a * s for s in ts], [b * s for s in ts])
    return Outcome([
        Comparison("gauss", res.value, gauss_rhs),
        Comparison("heine at z=c/(ab t^(n-1))", res.value, heine),
        Comparison("reduced 1Phi0", reduced.value, qbin),
        Comparison("heine prefactor times 1Phi0", heine, pre * reduced.value),
    ], res.terms + terms + reduced.terms)


def _heine_gauss_ok(ps: ParamSpec) -> bool:
    return (ps.formal and ps.exponent("b") > ps.k * (ps.n - 1)
            and ps.exponent("c") - ps.exponent("a") - ps.exponent("b") - ps.k * (ps.n - 1) > 0)


register(IdentityEntry(
    "HEINE_GAUSS", "Heine transformation specialized to the Gauss argument", "series-identity", (FORMAL,),
    (Constraint("formal; b t^(1-n) and c/(ab t^(n-1)) of positive valuation", _heine_gauss_ok),),
    _build_heine_gauss,
    lambda seed: [
        ParamSpec(FORMAL, 1, k=1, params={"a": (2, 0), "b": (3, 1), "c": (5, 3)}, D_q=10),
        ParamSpec(FORMAL, 2, k=1, params={"a": (2, 0), "b": (3, 2), "c": (5, 5)}, D_q=10),
    ],
    argument="c/(a b t^(n-1)) t^delta",
))


def _build_heine_euler(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, D, Dq = ps.n, ps.D_z, ps.D_q
    a, b, c = _p(ps, R, "a"), _p(ps, R, "b"), _p(ps, R, "c")
    Z = ZSeries.z(R.one, D)
    tn1 = R.t_pow(n - 1)
    ts = [R.t_pow(-i) for i in range(n)]
    zt = [R.t_pow(n - 1 - i) for i in range(n)]
    f1 = phi_series(phi([a, b], [c], z=Z), n, R, D_z=D)
    f2, n2 = _heine_rhs(a, b, c, Z, n, R, Dq, D)
    pre3 = _zprod(R, [b * s for s in zt], [s for s in zt], D) * R.inf_ratio(
        [c / b * s for s in ts], [c * s for s in ts])
    s3 = phi_series(phi([Z * (a * b * tn1 / c), b], [Z * (b * tn1)], z=c / b * R.t_pow(1 - n)), n, R, D_z=D, D_q=Dq)
    f3 = pre3 * s3.value
    rho = a * b / c
    pre4 = _zprod(R, [rho * s for s in zt], [s for s in zt], D)
    s4 = phi_series(phi([c / a, c / b], [c], z=Z * rho), n, R, D_z=D)
    f4 = pre4 * s4.value
    return Outcome([
        Comparison("form 1 = form 2", f1.value, f2),
        Comparison("form 2 = form 3", f2, f3),
        Comparison("form 3 = euler", f3, f4),
        Comparison("form 1 = euler", f1.value, f4),
    ], f1.terms + n2 + s3.terms + s4.terms)


def _heine_euler_ok(ps: ParamSpec) -> bool:
    k1 = ps.k * (ps.n - 1)
    return ps.formal and ps.exponent("b") > k1 and ps.exponent("c") - ps.exponent("b") > k1


register(IdentityEntry(
    "HEINE_EULER", "Heine transformation iterated twice, ending at Euler", "series-identity", (FORMAL,),
    (Constraint("formal; b t^(1-n) and (c/b) t^(1-n) of positive valuation", _heine_euler_ok),),
    _build_heine_euler,
    lambda seed: [
        ParamSpec(FORMAL, 1, k=1, params={"a": (2, 0), "b": (3, 1), "c": (5, 3)}, D_q=10, D_z=5),
        ParamSpec(FORMAL, 2, k=1, params={"a": (2, 0), "b": (3, 2), "c": (5, 5)}, D_q=10, D_z=5),
    ],
    argument="z t^delta, z formal",
))


def _build_euler(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, D = ps.n, ps.D_z
    a, b, c = _p(ps, R, "a"), _p(ps, R, "b"), _p(ps, R, "c")
    rho = a * b / c
    left = phi_series(phi([a, b], [c], arg="general"), n, R, D_z=D)
    right = phi_series(phi([c / a, c / b], [c], arg="general"), n, R, D_z=D)
    rhs = prefactor_euler([(rho, R.one)], n, R, D) * _scaled(right.value, rho).to_poly(R)
    return Outcome([Comparison("euler", left.value.to_poly(R), rhs)], left.terms + right.terms)


def _euler_derived(p: dict) -> list:
    a, b, c = p["a"], p["b"], p["c"]
    return [c / a, c / b, a * b / c]


def _defaults_euler(seed: int) -> list:
    rng = _rng(seed, "EULER")
    out = []
    for n, D in ((2, 4),) * 5 + ((3, 3),):
        pt_ = rational_point(rng, "abc", _euler_derived)
        out.append(ParamSpec(RATIONAL, n, q=pt_["q"], t=pt_["t"], D_z=D, params=pt_["params"]))
    out.append(ParamSpec(FORMAL, 2, k=1, D_z=3, D_q=8, params={"a": (2, 0), "b": (3, 1), "c": (5, 2)}))
    return out


register(IdentityEntry(
    "EULER", "Euler transformation", "series-identity", (FORMAL, RATIONAL), (),
    _build_euler, _defaults_euler, argument="general z",
))


# ---------------------------------------------------------------------------
# q-difference system


def _build_kaneko(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, D = ps.n, ps.D_z
    a, b, c = _p(ps, R, "a"), _p(ps, R, "b"), _p(ps, R, "c")
    corrected = ps.extra.get("variant", "corrected") == "corrected"
    res = phi_series(phi([a, b], [c], arg="general"), n, R, D_z=D)
    S = res.value.to_poly(R)
    zero = Poly(n, {}, None)
    comps = [Comparison(f"equation {i + 1}", qdif_residual(S, a, b, c, i, R, corrected), zero) for i in range(n)]
    if corrected:
        rng = random.Random(ps.fingerprint())
        point = [rand_rational(rng) for _ in range(n)]
        while len(set(point)) < n or any(R.t * x == y for x in point for y in point):
            point = [rand_rational(rng) for _ in range(n)]
        for i in range(n):
            lhs, rhs = summation_sides(point, i, R.t)
            comps.append(Comparison(f"summation lemma {i + 1}", lhs, rhs))
        f = random_symmetric(n, min(D, 3), R, rng)
        g = random_symmetric(n, min(D, 3), R, rng)
        lhs, rhs = product_rule_sides(Poly(n, f.c, None), Poly(n, g.c, None), 0, R)
        comps.append(Comparison("q-product rule", lhs, rhs))
        U = random_symmetric(n, min(D, 4), R, rng)
        for i in range(n):
            lhs, rhs, _ = euler_mechanization(a, b, c, U, i, R)
            comps.append(Comparison(f"parameter replacement {i + 1}", lhs, rhs))
    return Outcome(comps, res.terms)


def _defaults_kaneko(seed: int) -> list:
    rng = _rng(seed, "KANEKO_SYSTEM")
    out = []
    for n, D in ((2, 5),) * 3 + ((3, 3),):
        pt_ = rational_point(rng, "abc", _euler_derived)
        out.append(ParamSpec(RATIONAL, n, q=pt_["q"], t=pt_["t"], D_z=D, params=pt_["params"]))
    return out


register(IdentityEntry(
    "KANEKO_SYSTEM", "q-difference system for 2Phi1", "residual-certificate", (RATIONAL, FORMAL),
    (Constraint("variant is 'corrected' or 'uncorrected'",
                lambda ps: ps.extra.get("variant", "corrected") in ("corrected", "uncorrected")),),
    _build_kaneko, _defaults_kaneko, argument="general z",
))


# ---------------------------------------------------------------------------
# q-Saalschutz family: coefficient identities and terminating sums


def _rect(ps: ParamSpec):
    """``(N, n)`` when the requested index is the rectangle ``(N^n)``."""
    n = ps.n
    if "lam" in ps.extra:
        lam = _lam(ps)
        if len(lam) == n and lam and len(set(lam)) == 1:
            return lam[0], n
        return None
    if "N" in ps.extra:
        return int(ps.extra["N"]), n
    return None


def _indices(ps: ParamSpec) -> list:
    if "lam" in ps.extra:
        return [pt.partition(_lam(ps))]
    if "N" in ps.extra:
        return [(int(ps.extra["N"]),) * ps.n]
    return pt.enumerate_partitions(ps.n, max_weight=int(ps.extra.get("max_weight", 3)))


def _fsum(lam, n: int, R: ScalarRing, A: Callable, B: Callable):
    """``sum_{mu,nu} A(mu) B(nu) f^lam_{mu nu}``."""
    w = sum(lam)
    total = R.zero
    for w1 in range(w + 1):
        for mu in pt.partitions_of(w1, n):
            a = A(mu)
            if _is_zero(a):
                continue
            for nu in pt.partitions_of(w - w1, n):
                f = mac.f_expand(mu, nu, n, R).get(lam)
                if f is not None:
                    total = total + a * B(nu) * f
    return total


def _rect_factor(mu, n: int, R: ScalarRing):
    """``(t^n)_mu h'_mu / ((q t^{n-1})_mu h_mu)``: the rectangle structure constant."""
    h, hp = mac.hook_products(mu, R)
    return mac.gen_qfactorial(R.t_pow(n), mu, R) * hp / (mac.gen_qfactorial(R.qt_pow(1, n - 1), mu, R) * h)


def _rect_sum(N: int, n: int, R: ScalarRing, A: Callable, B: Callable):
    """The same double sum at ``(N^n)`` with ``f`` replaced by its closed form."""
    total = R.zero
    for mu in pt.enumerate_partitions(n, box=(N, n)):
        total = total + A(mu) * B(pt.complement(mu, N, n)) * _rect_factor(mu, n, R)
    return total


def _build_saal_coeff(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    a, b, c = _p(ps, R, "a"), _p(ps, R, "b"), _p(ps, R, "c")
    rho = a * b / c
    fq = mac.gen_qfactorial

    def A(mu):
        return fq(c / a, mu, R) * fq(c / b, mu, R) * fq(c, mu, R, inverse=True) / mac.hprime(mu, R) * rho ** sum(mu)

    def B(nu):
        return fq(rho, nu, R) / mac.hprime(nu, R)

    lhs, rhs = {}, {}
    for lam in _indices(ps):
        lhs[lam] = fq(a, lam, R) * fq(b, lam, R) * fq(c, lam, R, inverse=True) / mac.hprime(lam, R)
        rhs[lam] = _fsum(lam, n, R, A, B)
    comps = [Comparison("coefficients", lhs, rhs)]
    rect = _rect(ps)
    if rect and rect[0] > 0:
        N = rect[0]
        lam = (N,) * n
        series = phi_series(_saal_spec(a, b, c, N, n, R), n, R)
        closed = fq(rho, lam, R) / mac.hprime(lam, R) * series.value
        comps.append(Comparison("rectangle: closed-form f", rhs[lam], _rect_sum(N, n, R, A, B)))
        comps.append(Comparison("rectangle: balanced 3Phi2", rhs[lam], closed))
    return Outcome(comps, len(lhs))


def _saal_spec(a, b, c, N: int, n: int, R: ScalarRing):
    return phi([R.q_pow(-N), c / a, c / b], [c, c * R.qt_pow(1 - N, n - 1) / (a * b)], z=R.q)


def _build_chu(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    b, c = _p(ps, R, "b"), _p(ps, R, "c")
    fq = mac.gen_qfactorial

    def A(mu):
        sign = -1 if sum(mu) % 2 else 1
        return (sign * R.q_pow(pt.nlam_conj(mu)) * fq(b, mu, R) * fq(c, mu, R, inverse=True)
                / mac.hprime(mu, R) * (c / b) ** sum(mu))

    def B(nu):
        return R.t_pow(pt.nlam(nu)) / mac.hprime(nu, R)

    lhs, rhs = {}, {}
    for lam in _indices(ps):
        lhs[lam] = R.t_pow(pt.nlam(lam)) * fq(c / b, lam, R) * fq(c, lam, R, inverse=True) / mac.hprime(lam, R)
        rhs[lam] = _fsum(lam, n, R, A, B)
    comps = [Comparison("coefficients", lhs, rhs)]
    rect = _rect(ps)
    if rect and rect[0] > 0:
        N = rect[0]
        comps.append(Comparison("rectangle: closed-form f", rhs[(N,) * n], _rect_sum(N, n, R, A, B)))
    return Outcome(comps, len(lhs))


def _defaults_coeff(name: str, names: str, derived) -> Callable[[int], list]:
    def make(seed: int) -> list:
        rng = _rng(seed, name)
        out = []
        for n in (1, 2, 3):
            pt_ = rational_point(rng, names, derived)
            out.append(ParamSpec(RATIONAL, n, q=pt_["q"], t=pt_["t"], params=pt_["params"],
                                 extra={"max_weight": 3}))
        for n, N in ((2, 1), (2, 2), (3, 1)):
            pt_ = rational_point(rng, names, derived)
            out.append(ParamSpec(RATIONAL, n, q=pt_["q"], t=pt_["t"], params=pt_["params"], extra={"N": N}))
        return out
    return make


register(IdentityEntry(
    "SAAL_COEFF", "coefficient form of the Euler transformation", "coefficient-identity", (RATIONAL, FORMAL),
    (Constraint("index set: lam, rectangle N, or max_weight", lambda ps: True),),
    _build_saal_coeff, _defaults_coeff("SAAL_COEFF", "abc", _euler_derived),
))


register(IdentityEntry(
    "CHU_VANDERMONDE", "Chu-Vandermonde coefficient identity", "coefficient-identity", (RATIONAL, FORMAL),
    (Constraint("index set: lam, rectangle N, or max_weight", lambda ps: True),),
    _build_chu, _defaults_coeff("CHU_VANDERMONDE", "bc", lambda p: [p["c"] / p["b"]]),
))


def _build_saalschutz(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, N = ps.n, int(ps.extra["N"])
    a, b, c = _p(ps, R, "a"), _p(ps, R, "b"), _p(ps, R, "c")
    lam = (N,) * n
    fq = mac.gen_qfactorial
    lhs = fq(a, lam, R) * fq(b, lam, R) * fq(c, lam, R, inverse=True) * fq(a * b / c, lam, R, inverse=True)
    spec = _saal_spec(a, b, c, N, n, R)
    res = phi_series(spec, n, R)
    return Outcome([Comparison("saalschutz", lhs, res.value)], res.terms)


def _sum_defaults(name: str, names: str, derived) -> Callable[[int], list]:
    def make(seed: int) -> list:
        rng = _rng(seed, name)
        out = []
        for n in (1, 2):
            for N in (1, 2):
                for k in (1, 2):
                    for _ in range(5):
                        pt_ = rational_point(rng, names, derived, k=k)
                        out.append(ParamSpec(RATIONAL, n, k=k, q=pt_["q"], params=pt_["params"], extra={"N": N}))
        return out
    return make


def _balanced_saal(ps: ParamSpec) -> bool:
    R = ps.ring()
    a, b, c = _p(ps, R, "a"), _p(ps, R, "b"), _p(ps, R, "c")
    return int(ps.extra["N"]) >= 0 and _saal_spec(a, b, c, int(ps.extra["N"]), ps.n, R).balanced(R, ps.n)


register(IdentityEntry(
    "SAALSCHUTZ", "q-Saalschutz summation", "series-identity", (RATIONAL, FORMAL),
    (Constraint("a = q^-N terminating upper parameter with N >= 0 integer", lambda ps: int(ps.extra["N"]) >= 0),
     Constraint("balanced: a1 a2 a3 q t^(n-1) = b1 b2", _balanced_saal)),
    _build_saalschutz, _sum_defaults("SAALSCHUTZ", "abc", _euler_derived), argument="q t^delta",
))


def _sears_specs(a, b, c, d, e, N: int, n: int, R: ScalarRing):
    w = R.qt_pow(1 - N, n - 1)
    left = phi([R.q_pow(-N), w / c, d, e], [w / a, w / b, a * b * d * e / c], z=R.q)
    right = phi([R.q_pow(-N), w / c, a * b * e / c, a * b * d / c], [w * a / c, w * b / c, a * b * d * e / c], z=R.q)
    return left, right


def _build_sears(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, N = ps.n, int(ps.extra["N"])
    a, b, c, d, e = (_p(ps, R, x) for x in "abcde")
    lam = (N,) * n
    fq = mac.gen_qfactorial
    left, right = _sears_specs(a, b, c, d, e, N, n, R)
    lhs = phi_series(left, n, R)
    rhs = phi_series(right, n, R)
    pre = (a * b / c) ** (n * N) * fq(c / a, lam, R) * fq(c / b, lam, R) / (fq(a, lam, R) * fq(b, lam, R))
    return Outcome([Comparison("sears", lhs.value, pre * rhs.value)], lhs.terms + rhs.terms)


def _sears_derived(p: dict) -> list:
    a, b, c, d, e = (p[x] for x in "abcde")
    return [c / a, c / b, a * b * d * e / c, a * b * d / c, a * b * e / c, a / c, b / c]


def _balanced_sears(ps: ParamSpec) -> bool:
    R = ps.ring()
    vals = [_p(ps, R, x) for x in "abcde"]
    left, right = _sears_specs(*vals, int(ps.extra["N"]), ps.n, R)
    return left.balanced(R, ps.n) and right.balanced(R, ps.n)


register(IdentityEntry(
    "SEARS", "Sears transformation of a balanced 4Phi3", "series-identity", (RATIONAL, FORMAL),
    (Constraint("terminating: q^-N upper parameter, N >= 0", lambda ps: int(ps.extra["N"]) >= 0),
     Constraint("both 4Phi3 series balanced", _balanced_sears)),
    _build_sears, _sum_defaults("SEARS", "abcde", _sears_derived), argument="q t^delta",
))


def _build_buscar(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    rect = _rect(ps)
    N = rect[0]
    a, b, c, d, e = (_p(ps, R, x) for x in "abcde")
    D = n * N
    rho = a * b / c
    f = abde_c = a * b * d * e / c
    g1 = phi_series(phi([a, b], [c], arg="general"), n, R, D_z=D).value
    g2 = phi_series(phi([d, e], [f], arg="general"), n, R, D_z=D).value
    P_direct = g1.to_poly(R) * _scaled(g2, rho).to_poly(R)
    g3 = phi_series(phi([a * b * e / c, a * b * d / c], [abde_c], arg="general"), n, R, D_z=D).value
    P_happy = prefactor_euler([(R.one, rho)], n, R, D) * g3.to_poly(R) * g1.to_poly(R)
    lam = (N,) * n
    coef_direct = SymSeries.from_poly(P_direct, R).coeffs.get(lam, R.zero)
    coef_happy = SymSeries.from_poly(P_happy, R).coeffs.get(lam, R.zero)
    fq = mac.gen_qfactorial
    hp = mac.hprime(lam, R)
    w = R.qt_pow(1 - N, n - 1)
    s1 = phi_series(phi([R.q_pow(-N), w / c, d, e], [w / a, w / b, abde_c], z=R.q), n, R).value
    s2 = phi_series(phi([R.q_pow(-N), w / c, a * b * e / c, a * b * d / c], [w * a / c, w * b / c, abde_c], z=R.q),
                    n, R).value
    closed1 = fq(a, lam, R) * fq(b, lam, R) / (fq(c, lam, R) * hp) * s1
    closed2 = rho ** (n * N) * fq(c / a, lam, R) * fq(c / b, lam, R) / (fq(c, lam, R) * hp) * s2
    return Outcome([
        Comparison("product expanded directly vs Euler-rewritten product", P_direct, P_happy),
        Comparison("coefficient vs first 4Phi3 form", coef_direct, closed1),
        Comparison("coefficient vs second 4Phi3 form", coef_happy, closed2),
    ], 4)


def _defaults_buscar(seed: int) -> list:
    rng = _rng(seed, "BUSCAR")
    out = []
    for n, N in ((1, 1), (1, 2), (2, 1), (2, 2)):
        pt_ = rational_point(rng, "abcde", _sears_derived)
        out.append(ParamSpec(RATIONAL, n, q=pt_["q"], t=pt_["t"], params=pt_["params"], extra={"N": N}))
    return out


register(IdentityEntry(
    "BUSCAR", "rectangle coefficient of a product of two 2Phi1 series", "coefficient-identity", (RATIONAL, FORMAL),
    (Constraint("index is a rectangle (N^n) with N >= 1", lambda ps: _rect(ps) is not None and _rect(ps)[0] >= 1),),
    _build_buscar, _defaults_buscar,
))


# ---------------------------------------------------------------------------
# structural identities


def _box(ps: ParamSpec) -> list:
    N = int(ps.extra["N"])
    return [(lam, pt.complement(lam, N, ps.n)) for lam in pt.enumerate_partitions(ps.n, box=(N, ps.n))]


def _small(ps: ParamSpec) -> list:
    return pt.enumerate_partitions(ps.n, max_weight=int(ps.extra.get("max_weight", 4)))


def _build_rect(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    if "lam" in ps.extra:
        lam = _lam(ps)
        if not (len(lam) == n and len(set(lam)) == 1):
            raise ValueError("MACDONALD_RECT needs a rectangular index")
        N = lam[0]
    else:
        N = int(ps.extra["N"])
    rect = (N,) * n
    inside = pt.enumerate_partitions(n, box=(N, n))
    lhs, rhs = {}, {}
    for mu in inside:
        for nu in inside:
            if sum(mu) + sum(nu) != n * N:
                continue
            key = f"{pt.to_text(mu)}|{pt.to_text(nu)}"
            lhs[key] = mac.f_expand(mu, nu, n, R).get(rect, R.zero)
            rhs[key] = _rect_factor(mu, n, R) if pt.complement(mu, N, n) == nu else R.zero
    return Outcome([Comparison("f^(N^n)_{mu nu}", lhs, rhs)], len(lhs))


def _box_defaults(name: str, Ns=(1, 2, 3), ns=(1, 2, 3), names: str = "", k=None) -> Callable[[int], list]:
    def make(seed: int) -> list:
        rng = _rng(seed, name)
        out = []
        for n in ns:
            for N in Ns:
                pt_ = rational_point(rng, names, k=k)
                out.append(ParamSpec(RATIONAL, n, k=k, q=pt_["q"], t=pt_["t"] if k is None else None,
                                     params=pt_["params"], extra={"N": N}))
        return out
    return make


register(IdentityEntry(
    "MACDONALD_RECT", "structure constants onto a rectangle", "coefficient-identity", (RATIONAL, FORMAL),
    (Constraint("rectangle (N^n) with N >= 0", lambda ps: "lam" in ps.extra or int(ps.extra["N"]) >= 0),),
    _build_rect, _box_defaults("MACDONALD_RECT"),
))


def _build_ototo(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, N = ps.n, int(ps.extra["N"])
    a = _p(ps, R, "a")
    fq = mac.gen_qfactorial
    full = fq(a, (N,) * n, R)
    lhs, rhs = {}, {}
    for lam, hat in _box(ps):
        w = sum(lam)
        lhs[lam] = fq(a, hat, R)
        scale = R.t_pow(pt.nlam(lam)) * R.q_pow(pt.nlam_conj(lam) - (N - 1) * w)
        rhs[lam] = scale * full / ((-a) ** w * fq(R.qt_pow(1 - N, n - 1) / a, lam, R))
    return Outcome([Comparison("(a)_hat", lhs, rhs)], len(lhs))


register(IdentityEntry(
    "OTOTO", "factorial of a complementary partition", "coefficient-identity", (RATIONAL, FORMAL),
    (Constraint("box (N^n) with N >= 0", lambda ps: int(ps.extra["N"]) >= 0),),
    _build_ototo, _box_defaults("OTOTO", names="a"),
))


def _build_shumi(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, N = ps.n, int(ps.extra["N"])
    fq = mac.gen_qfactorial
    rect = (N,) * n
    full = fq(R.qt_pow(1, n - 1), rect, R)
    lhs, rhs = {}, {}
    for lam, hat in _box(ps):
        w = sum(lam)
        lhs[lam] = mac.hprime(hat, R) / mac.hprime(lam, R)
        sign = -1 if w % 2 else 1
        scale = sign * R.t_pow(pt.nlam(lam) - pt.nlam(rect)) * R.q_pow(pt.nlam_conj(lam) - N * w)
        rhs[lam] = scale * full / (fq(R.q_pow(-N), lam, R) * fq(R.qt_pow(1, n - 1), lam, R))
    return Outcome([Comparison("h'_hat / h'", lhs, rhs)], len(lhs))


register(IdentityEntry(
    "SHUMI", "hook ratio of a complementary partition", "coefficient-identity", (RATIONAL, FORMAL),
    (Constraint("box (N^n) with N >= 0", lambda ps: int(ps.extra["N"]) >= 0),),
    _build_shumi, _box_defaults("SHUMI"),
))


def _build_lapiz(ps: ParamSpec, R: ScalarRing) -> Outcome:
    lhs, rhs = {}, {}
    for lam in _small(ps):
        lhs[lam] = mac.hprime(lam, R)
        rhs[lam] = mac.hprime_lapiz(lam, ps.n, R)
    return Outcome([Comparison("h' as infinite products", lhs, rhs)], len(lhs))


def _t_is_q_power(ps: ParamSpec) -> bool:
    return ps.formal or (ps.k is not None and (ps.t is None or rational(ps.t) == rational(ps.q) ** ps.k))


def _weight_defaults(name: str, ns=(1, 2, 3), ks=(None,), names: str = "", formal: bool = False):
    def make(seed: int) -> list:
        rng = _rng(seed, name)
        out = []
        for n in ns:
            for k in ks:
                pt_ = rational_point(rng, names, k=k)
                out.append(ParamSpec(RATIONAL, n, k=k, q=pt_["q"], t=pt_["t"] if k is None else None,
                                     params=pt_["params"], extra={"max_weight": 4}))
        if formal:
            out.append(ParamSpec(FORMAL, 2, k=2, D_q=12, extra={"max_weight": 3}))
        return out
    return make


register(IdentityEntry(
    "LAPIZ", "h' as a ratio of infinite products", "coefficient-identity", (RATIONAL, FORMAL),
    (Constraint("t = q^k (the infinite products pair up only then)", _t_is_q_power),),
    _build_lapiz, _weight_defaults("LAPIZ", ks=(1, 2), formal=True),
))


def _build_sombrero(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, N = ps.n, int(ps.extra["N"])
    comps = []
    for lam, hat in _box(ps):
        lhs = mac.poly_of(hat, n, R)
        rhs = mac.poly_of(lam, n, R).reversed_vars().times_monomial((N,) * n)
        comps.append(Comparison(f"P_hat for {pt.to_text(lam) or '0'}", lhs, rhs))
    return Outcome(comps, len(comps))


register(IdentityEntry(
    "SOMBRERO", "complement duality of Macdonald polynomials", "series-identity", (RATIONAL, FORMAL),
    (Constraint("box (N^n) with N >= 0", lambda ps: int(ps.extra["N"]) >= 0),),
    _build_sombrero, _box_defaults("SOMBRERO"),
))


def _build_symm(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    lams = _small(ps)
    zero = ()
    u0 = {lam: mac.u_eval(zero, lam, n, R) for lam in lams}
    lhs, rhs = {}, {}
    for i, lam in enumerate(lams):
        for mu in lams[i + 1:]:
            key = f"{pt.to_text(lam)}|{pt.to_text(mu)}"
            lhs[key] = mac.u_eval(lam, mu, n, R) * u0[lam]
            rhs[key] = mac.u_eval(mu, lam, n, R) * u0[mu]
    return Outcome([Comparison("u_lam(P_mu) u_0(P_lam) = u_mu(P_lam) u_0(P_mu)", lhs, rhs)], len(lhs))


register(IdentityEntry(
    "SYMM", "evaluation symmetry", "coefficient-identity", (RATIONAL, FORMAL), (),
    _build_symm, _weight_defaults("SYMM", ns=(2, 3)),
))


def _build_norm(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    lams = _small(ps)
    polys = {lam: mac.poly_of(lam, n, R) for lam in lams}
    norms, closed, ortho, zeros, tri, one = {}, {}, {}, {}, {}, {}
    for lam in lams:
        norms[lam] = mac.inner_product(polys[lam], polys[lam], n, R)
        closed[lam] = mac.norm_closed(lam, n, R)
        coeffs = mac.macdonald_poly(lam, n, R).coeffs
        # monic and dominance-triangular
        tri[lam] = all(nu == lam or pt.dominates(lam, nu) for nu in coeffs) and coeffs.get(lam) == R.one
        one[lam] = True
    for i, lam in enumerate(lams):
        for mu in lams[i + 1:]:
            if sum(lam) == sum(mu):
                key = f"{pt.to_text(lam)}|{pt.to_text(mu)}"
                ortho[key] = mac.inner_product(polys[lam], polys[mu], n, R)
                zeros[key] = R.zero
    unit = Poly.const(n, R.one)
    return Outcome([
        Comparison("<1,1>", mac.inner_product(unit, unit, n, R), mac.ground(n, R)),
        Comparison("norms", norms, closed),
        Comparison("orthogonality", ortho, zeros),
        Comparison("triangularity", tri, one),
    ], len(lams))


register(IdentityEntry(
    "NORM_GROUND", "norm formula and constant-term normalization", "coefficient-identity", (RATIONAL, FORMAL),
    (Constraint("t = q^k (constant-term inner product)", _t_is_q_power),),
    _build_norm, _weight_defaults("NORM_GROUND", ns=(2, 3), ks=(1, 2), formal=True),
))


def _build_shift(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    comps = []
    for lam in _small(ps):
        full = pt.pad(lam, n)
        for a in (-1, 1, 2):
            shifted = pt.shift(full, a)
            if min(shifted) < 0:
                continue
            lhs = mac.poly_of(full, n, R).times_monomial((a,) * n)
            rhs = mac.macdonald_poly(pt.strip(shifted), n, R).to_poly()
            comps.append(Comparison(f"|x|^{a} P_{pt.to_text(lam) or '0'}", lhs, rhs))
    return Outcome(comps, len(comps))


register(IdentityEntry(
    "SHIFT", "multiplication by a power of x_1...x_n", "series-identity", (RATIONAL, FORMAL), (),
    _build_shift, _weight_defaults("SHIFT"),
))


def _gen_small(ps: ParamSpec) -> list:
    r = int(ps.extra.get("radius", 2))
    return pt.enumerate_partitions(ps.n, gen_window=(-r, r))


def _build_jb(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    a = _p(ps, R, "a")
    fq = mac.gen_qfactorial
    # the printed closed form omits t^{n(lam)}; "printed" reproduces it verbatim
    printed = ps.extra.get("variant", "corrected") == "printed"
    f_lhs, f_rhs, r_lhs, r_rhs = {}, {}, {}, {}
    for lam in _gen_small(ps):
        neg = pt.neg_reverse(lam)
        w = sum(lam)
        sign = (-R.q / a) ** w if w >= 0 else (-a / R.q) ** (-w)
        tn = R.one if printed else R.t_pow(pt.nlam(lam))
        f_lhs[lam] = fq(a, neg, R)
        f_rhs[lam] = sign * tn * R.q_pow(pt.nlam_conj(lam)) * fq(R.qt_pow(1, n - 1) / a, lam, R, inverse=True)
        r_lhs[lam] = mac.qt_over_hprime(neg, n, R)
        r_rhs[lam] = R.t_pow((1 - n) * w) * mac.qt_over_hprime(lam, n, R)
    return Outcome([
        Comparison("(a)_{-lam^R}", f_lhs, f_rhs),
        Comparison("(q t^(n-1))_{-lam^R} / h'_{-lam^R}", r_lhs, r_rhs),
    ], len(f_lhs))


register(IdentityEntry(
    "JB", "factorials at the negated reversed partition", "coefficient-identity", (RATIONAL, FORMAL),
    (Constraint("t = q^k (h' of a generalized partition)", _t_is_q_power),
     Constraint("variant is 'corrected' or 'printed'",
                lambda ps: ps.extra.get("variant", "corrected") in ("corrected", "printed"))),
    _build_jb, _weight_defaults("JB", ks=(1, 2), names="a"),
))


def _build_neg_reverse(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    comps = []
    for lam in _gen_small(ps):
        lhs = mac.poly_of(pt.neg_reverse(lam), n, R)
        rhs = mac.poly_of(lam, n, R).reversed_vars()
        comps.append(Comparison(f"P at {pt.to_text(lam)}", lhs, rhs))
    return Outcome(comps, len(comps))


register(IdentityEntry(
    "NEG_REVERSE_P", "P at the negated reversed partition", "series-identity", (RATIONAL, FORMAL), (),
    _build_neg_reverse, _weight_defaults("NEG_REVERSE_P"),
))


# ---------------------------------------------------------------------------
# shifted Gauss, its b = c = 0 case, and Pfaff-Kummer


def _zero_z(D: int, R: ScalarRing) -> ZSeries:
    return ZSeries({0: R.zero}, D)


def _shifted_gauss_sides(a, c, x, lam, n: int, R: ScalarRing, D: int, printed: bool = False):
    """Both sides of the shifted Gauss sum with ``b = a c z x t^(n-1)``.

    ``printed`` uses ``(a x)_lam`` on the product side instead of ``(a)_lam``.
    """
    fq = mac.gen_qfactorial
    Z = ZSeries.z(R.one, D)
    b = Z * (a * c * x * R.t_pow(n - 1))
    lhs, terms = _zero_z(D, R), 0
    for sigma in pt.enumerate_partitions(n, max_weight=D):
        cs = fq(c, sigma, R) / mac.hprime(sigma, R)
        if _is_zero(cs):
            continue
        zs = Z ** pt.weight(sigma)
        for mu, f in mac.f_expand(lam, sigma, n, R).items():
            if _is_zero(f):
                continue
            s = cs * f * fq(a, mu, R) * x ** pt.weight(mu) * mac.principal_spec(mu, n, R)
            lhs = lhs + zs * s * fq(b, mu, R, inverse=True)
            terms += 1
    tp = R.t_pow
    pre = _zprod(R, [c * x * tp(n - 1 - i) for i in range(n)] + [a * x * tp(n - 1 - i) for i in range(n)],
                 [a * c * x * tp(n - 1 - i) for i in range(n)] + [x * tp(n - 1 - i) for i in range(n)], D)
    tail = fq(a * x if printed else a, lam, R) * x ** pt.weight(lam) * mac.principal_spec(lam, n, R)
    rhs = pre * tail * fq(Z * (a * x * tp(n - 1)), lam, R, inverse=True)
    return lhs, rhs, terms


def _build_shifted_gauss(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, D = ps.n, ps.D_z
    a, c, x = _p(ps, R, "a"), _p(ps, R, "c"), _p(ps, R, "x")
    lam = _lam(ps)
    printed = ps.extra.get("variant", "corrected") == "printed"
    lhs, rhs, terms = _shifted_gauss_sides(a, c, x, lam, n, R, D, printed)
    comps = [Comparison(f"lam={pt.to_text(lam)}", lhs, rhs)]
    if not lam:
        # the unshifted case is the plain Gauss-type 2Phi1 in the argument z x t^delta
        Z = ZSeries.z(R.one, D)
        b = Z * (a * c * x * R.t_pow(n - 1))
        res = phi_series(phi([a, c], [b], z=Z * x), n, R, D_z=D)
        comps.append(Comparison("2Phi1 at lam=0", res.value, rhs))
        terms += res.terms
    return Outcome(comps, terms)


def _no_explicit_b(ps: ParamSpec) -> bool:
    return "b" not in ps.params and ps.extra.get("variant", "corrected") in ("corrected", "printed")


def _lam_defaults(name: str, names: str, lams, D_z: int = 4) -> Callable[[int], list]:
    formal_all = {"a": (2, 1), "c": (3, 2), "x": (-1, 0)}
    formal_pts = {1: {v: formal_all[v] for v in names}, 2: {v: formal_all[v] for v in names}}

    def make(seed: int) -> list:
        out = []
        rng = _rng(seed, name)
        for n in (1, 2):
            for lam in lams(n):
                out.append(ParamSpec(FORMAL, n, k=1, params=formal_pts[n], D_q=10, D_z=D_z,
                                     extra={"lam": pt.to_text(lam)}))
                p = rational_point(rng, names)
                out.append(ParamSpec(RATIONAL, n, q=p["q"], t=p["t"], params=p["params"], D_z=D_z,
                                     extra={"lam": pt.to_text(lam)}))
        return out
    return make


def _small_lams(n: int, w: int = 2) -> list:
    return pt.enumerate_partitions(n, max_weight=w)


register(IdentityEntry(
    "SHIFTED_GAUSS", "shifted Gauss summation", "series-identity", (FORMAL, RATIONAL),
    (Constraint("b = a c z x t^(n-1) is derived, not supplied; variant 'corrected' or 'printed'",
                _no_explicit_b),),
    _build_shifted_gauss, _lam_defaults("SHIFTED_GAUSS", "acx", _small_lams), argument="z formal, lam fixed",
))


def _build_chichi(ps: ParamSpec, R: ScalarRing) -> Outcome:
    fq = mac.gen_qfactorial
    n, D = ps.n, ps.D_z
    a = _p(ps, R, "a")
    mu = pt.partition(_lam(ps))
    Z = ZSeries.z(R.one, D)
    u0 = lambda lam: mac.u_eval((), lam, n, R)  # noqa: E731
    pre = _zprod(R, [a * R.t_pow(n - 1 - i) for i in range(n)], [R.t_pow(n - 1 - i) for i in range(n)], D)
    lhs = pre * (fq(a, mu, R) * u0(mu)) * fq(Z * (a * R.t_pow(n - 1)), mu, R, inverse=True)
    rhs, terms = _zero_z(D, R), 0
    for nu in pt.enumerate_partitions(n, max_weight=D):
        zs = Z ** pt.weight(nu)
        for lam, f in mac.f_expand(mu, nu, n, R).items():
            if _is_zero(f):
                continue
            s = R.t_pow(pt.nlam(nu) - pt.nlam(lam)) * fq(a, lam, R) / mac.hprime(nu, R) * u0(lam) * f
            rhs = rhs + zs * s
            terms += 1
    comps = [Comparison(f"mu={pt.to_text(mu)}", lhs, rhs)]
    # the same identity read off the shifted Gauss sum at b = c = 0, x = 1
    _, sg, _ = _shifted_gauss_sides(a, R.zero, R.one, mu, n, R, D)
    comps.append(Comparison("shifted Gauss at b=c=0, x=1", lhs, sg))
    return Outcome(comps, terms)


register(IdentityEntry(
    "CHICHI", "evaluation form of the shifted Gauss sum", "series-identity", (FORMAL, RATIONAL), (),
    _build_chichi, _lam_defaults("CHICHI", "a", _small_lams), argument="z formal, mu fixed",
))


def _classical(upper, lower, Z: ZSeries, twist: int, R: ScalarRing, D: int) -> ZSeries:
    """One-variable basic series with z-series argument ``Z``, summed term by term."""
    out, term = _zero_z(D, R), ZSeries({0: R.one}, D)
    for k in range(D + 1):
        out = out + term
        num = ZSeries({0: R.one}, D)
        for u in upper:
            num = num * (1 - u * R.q_pow(k))
        den = ZSeries({0: 1 - R.q_pow(k + 1)}, D)
        for l in lower:
            den = den * (1 - l * R.q_pow(k))
        step = num * Z / den
        if twist:
            step = step * (-R.q_pow(k)) ** twist
        term = term * step
    return out


def _build_pfaff(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, D = ps.n, ps.D_z
    a, b, c = _p(ps, R, "a"), _p(ps, R, "b"), _p(ps, R, "c")
    Z = ZSeries.z(R.one, D)
    tn1 = R.t_pow(n - 1)
    lhs = phi_series(phi([a, b], [c], z=Z), n, R, D_z=D)
    pre = _zprod(R, [a * R.t_pow(n - 1 - i) for i in range(n)], [R.t_pow(n - 1 - i) for i in range(n)], D)
    inner = phi_series(phi([a, c / b], [c, Z * (a * tn1)], z=Z * b), n, R, D_z=D)
    rhs = pre * inner.value
    comps = [Comparison("pfaff-kummer", lhs.value, rhs)]
    if n == 1:
        classical_l = _classical([a, b], [c], Z, 0, R, D)
        classical_r = _zprod(R, [a], [R.one], D) * _classical([a, c / b], [c, Z * a], Z * b, 1, R, D)
        comps += [Comparison("n=1 left vs scalar series", lhs.value, classical_l),
                  Comparison("n=1 right vs scalar series", rhs, classical_r)]
    return Outcome(comps, lhs.terms + inner.terms)


def _defaults_pfaff(seed: int) -> list:
    out = [
        ParamSpec(FORMAL, 1, k=1, params={"a": (2, 1), "b": (3, 2), "c": (5, 3)}, D_q=10, D_z=4),
        ParamSpec(FORMAL, 2, k=1, params={"a": (2, 1), "b": (3, 2), "c": (5, 3)}, D_q=10, D_z=4),
        ParamSpec(FORMAL, 2, k=2, params={"a": (-1, 1), "b": (2, 0), "c": (3, 4)}, D_q=10, D_z=3),
    ]
    rng = _rng(seed, "PFAFF_KUMMER")
    for n in (1, 2):
        for _ in range(2):
            p = rational_point(rng, "abc", lambda p: [p["c"] / p["b"]])
            out.append(ParamSpec(RATIONAL, n, q=p["q"], t=p["t"], params=p["params"], D_z=4))
    return out


register(IdentityEntry(
    "PFAFF_KUMMER", "Pfaff-Kummer transformation", "series-identity", (FORMAL, RATIONAL), (),
    _build_pfaff, _defaults_pfaff, argument="z t^delta, z formal",
))


# ---------------------------------------------------------------------------
# bilateral series


def _one_psi_one_rhs(a, b, x, n: int, R: ScalarRing):
    nums, dens = [], []
    for i, xi in enumerate(x):
        ti = R.t_pow(i)
        nums += [a * xi, R.q / (a * xi), b * ti / a, R.q]
        dens += [xi, b / (a * xi), R.q * ti / a, b]
    return R.inf_ratio(nums, dens)


def _build_one_psi_one(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    a, b = _p(ps, R, "a"), _p(ps, R, "b")
    x = _point(ps, R)
    spec = psi([a], b, [], arg="point", point=x)
    res = psi_series(spec, n, R, ps.D_q)
    shell = check_shell(spec, n, R, ps.D_q)
    comps = [Comparison("1Psi1", res.value, _one_psi_one_rhs(a, b, x, n, R))]
    if R.equal(b, R.q):
        # negative indices drop out and the sum is the q-binomial series
        qb = phi_series(phi([a], [], arg="point", point=x), n, R, D_q=ps.D_q)
        comps.append(Comparison("b=q against the q-binomial sum", res.value, qb.value))
        comps.append(Comparison("b=q against the q-binomial product",
                                res.value, R.inf_ratio([a * xi for xi in x], list(x))))
    return Outcome(comps, res.terms + shell)


def _psi_window(ps: ParamSpec) -> bool:
    if not ps.formal:
        return False
    alpha, beta = ps.exponent("a"), ps.exponent("b")
    return all(0 < ps.exponent(f"x{i + 1}") < beta - alpha for i in range(ps.n))


def _defaults_one_psi_one(seed: int) -> list:
    out = []
    for n, k, xs in ((1, 1, ((1, 1),)), (1, 1, ((-2, 3),)), (2, 1, ((1, 1), (-1, 2))),
                     (2, 2, ((1, 2), (3, 1))), (2, 1, ((2, 3), (1, 3)))):
        params = {"a": (2, -1), "b": (3, 4)}
        params.update({f"x{i + 1}": v for i, v in enumerate(xs)})
        out.append(ParamSpec(FORMAL, n, k=k, params=params, D_q=10))
    for n, xs in ((1, ((1, 1),)), (2, ((1, 1), (-1, 2)))):
        params = {"a": (2, -2), "b": 1}
        params.update({f"x{i + 1}": v for i, v in enumerate(xs)})
        out.append(ParamSpec(FORMAL, n, k=1, params=params, D_q=10))
    return out


register(IdentityEntry(
    "ONE_PSI_ONE", "bilateral 1Psi1 summation", "series-identity", (FORMAL,),
    (Constraint("0 < chi_i < beta - alpha for x_i = c q^chi_i, a = c q^alpha, b = c q^beta "
                "(the window |b/a| < |x_i| < 1)", _psi_window),),
    _build_one_psi_one, _defaults_one_psi_one, argument="x",
))


# ---------------------------------------------------------------------------
# constant terms


def _ints(ps: ParamSpec, *names: str) -> list[int]:
    return [int(ps.extra[v]) for v in names]


def _ct_lams(ps: ParamSpec) -> list:
    """Generalized partitions with ``sum |lam_i| <= size`` (default 2)."""
    size = int(ps.extra.get("size", 2))
    return [lam for lam in pt.enumerate_partitions(ps.n, gen_window=(-size, size))
            if sum(abs(p) for p in lam) <= size]


def _build_kk(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    a, b = _ints(ps, "a", "b")
    direct, closed = {}, {}
    for lam in _ct_lams(ps):
        direct[lam] = mac.ct_A(lam, a, b, n, R)
        closed[lam] = mac.ct_A_closed(lam, a, b, n, R)
    comps = [Comparison("A_lam(a,b)", direct, closed)]
    zero = (0,) * n
    if a == b == 0:
        one = Poly.const(n, R.one)
        comps.append(Comparison("A_0(0,0) = <1,1>", direct[zero], mac.inner_product(one, one, n, R)))
    if n == 1 and a == b == 1:
        comps.append(Comparison("n=1, a=b=1", direct[zero], 1 + R.q))
    return Outcome(comps, len(direct))


def _ct_ok(ps: ParamSpec) -> bool:
    try:
        return ps.k is not None and all(v >= 0 for v in _ints(ps, "a", "b"))
    except KeyError:
        return False


def _defaults_kk(seed: int) -> list:
    rng = _rng(seed, "KADELL_KANEKO_CT")
    out = []
    for n in (1, 2):
        for a in range(3):
            for b in range(3):
                out.append(ParamSpec(RATIONAL, n, k=1, q=rand_q(rng), extra={"a": a, "b": b}))
    out.append(ParamSpec(RATIONAL, 2, k=2, q=rand_q(rng), extra={"a": 1, "b": 2}))
    out.append(ParamSpec(FORMAL, 2, k=1, D_q=10, extra={"a": 2, "b": 1}))
    return out


register(IdentityEntry(
    "KADELL_KANEKO_CT", "constant term of P_lam against (x)_a (q/x)_b", "constant-term", (RATIONAL, FORMAL),
    (Constraint("t = q^k; a, b non-negative integers (extra a, b)", _ct_ok),),
    _build_kk, _defaults_kk, argument="lam with sum |lam_i| <= size",
))


def _llave_product(a: int, b: int, u: int, n: int, R: ScalarRing) -> Poly:
    """``prod_i (q^{-u}/x_i)_a (q^{1+u} x_i)_b`` as a Laurent polynomial."""
    f = Poly.const(n, R.one)
    for i in range(n):
        e = [0] * n
        e[i] = -1
        f = f * R.poch(Poly.monomial(n, e, R.q_pow(-u)), a) * R.poch(Poly.var(n, i, R.q_pow(1 + u)), b)
    return f


def _build_llave(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    a, b, u = _ints(ps, "a", "b", "u")
    prod = _llave_product(a, b, u, n, R)
    lhs, rhs, closed = {}, {}, {}
    for lam in _ct_lams(ps):
        f = mac.poly_of(lam, n, R).reversed_vars() * prod
        lhs[lam] = mac._ct_against_delta(f, n, R)
        s = R.q_pow(u * sum(lam))
        rhs[lam] = s * mac.ct_A(lam, a, b, n, R)
        closed[lam] = s * mac.ct_A_closed(lam, a, b, n, R)
    return Outcome([Comparison("shifted constant term", lhs, rhs),
                    Comparison("shifted constant term, closed form", lhs, closed)], len(lhs))


def _defaults_llave(seed: int) -> list:
    rng = _rng(seed, "LLAVE")
    out = []
    for n in (1, 2):
        for a, b in ((0, 1), (1, 1), (2, 1), (1, 2), (2, 2)):
            for u in (-2, -1, 0, 1):
                out.append(ParamSpec(RATIONAL, n, k=1, q=rand_q(rng), extra={"a": a, "b": b, "u": u}))
    return out


def _llave_ok(ps: ParamSpec) -> bool:
    return _ct_ok(ps) and "u" in ps.extra


register(IdentityEntry(
    "LLAVE", "constant term under x -> q^-u / x", "constant-term", (RATIONAL, FORMAL),
    (Constraint("t = q^k; a, b non-negative integers; integer u (extra a, b, u)", _llave_ok),),
    _build_llave, _defaults_llave, argument="lam with sum |lam_i| <= size",
))


# ---------------------------------------------------------------------------
# 2Psi2 transformations


def _psi22(a1, a2, b, b1, n: int, R: ScalarRing, D_q: int | None, z=None, point=None):
    """``2Psi2(a1, a2; b, b1)`` at ``z t^delta`` or at a point, prefactor included."""
    if point is not None:
        spec = psi([a1, a2], b, [b1], arg="point", point=tuple(point))
    else:
        spec = psi([a1, a2], b, [b1], z=z)
    res = psi_series(spec, n, R, D_q)
    return res.value, res.terms


def _alphas(ps: ParamSpec, R: ScalarRing) -> tuple:
    return tuple(_p(ps, R, f"a{i}") for i in range(1, 5))


def _prod_ratio(R: ScalarRing, n: int, num: Callable, den: Callable):
    """``prod_i`` of infinite-product ratios whose arguments depend on ``t^i``."""
    nums, dens = [], []
    for i in range(n):
        ti = R.t_pow(i)
        nums += num(ti)
        dens += den(ti)
    return R.inf_ratio(nums, dens)


def _beetroot_rhs(A1, A2, A3, A4, n: int, R: ScalarRing, D_q):
    q, tn1 = R.q, R.t_pow(n - 1)
    pre = _prod_ratio(R, n, lambda ti: [q, A3 * ti / A1, A4 * ti / A2, A3 * ti / A2],
                      lambda ti: [A3, A4 * ti, q * ti / A2, A3 * ti / (A1 * A2)])
    res = phi_series(phi([q / A4, q * A2 / A3], [q * tn1 / A1], z=A4 / A2), n, R, D_q=D_q)
    return pre * res.value, res.terms


def _i_integral(a: int, b: int, a2: int, b2: int, u: int, n: int, R: ScalarRing):
    """Constant-term definition of the I-integral."""
    f = Poly.const(n, R.one)
    for i in range(n):
        e = [0] * n
        e[i] = -1
        xi = Poly.var(n, i, R.one)
        f = f * R.poch(xi, a) * R.poch(Poly.monomial(n, e, R.q), b)
        f = f * R.poch(Poly.monomial(n, e, R.q_pow(-u)), a2) * R.poch(Poly.var(n, i, R.q_pow(u + 1)), b2)
    return mac._ct_against_delta(f, n, R)


def _i_bilateral(a: int, b: int, a2: int, b2: int, u: int, n: int, R: ScalarRing, D_q=None):
    """The I-integral as a product times a 2Psi2 (finite when all four are non-negative integers)."""
    Q, q = R.q_pow, R.q
    pre = _prod_ratio(R, n, lambda ti: [Q(1 + a), Q(1 + b) * ti, Q(1 + a2) * ti, Q(1 + b2) * ti],
                      lambda ti: [q, q * ti, Q(1 + a + b) * ti, Q(1 + a2 + b2) * ti])
    val, terms = _psi22(Q(-b), Q(-b2), Q(1 + a), Q(1 + a2) * R.t_pow(n - 1), n, R, D_q, z=Q(b + b2 + 2 + u))
    return pre * mac.ground(n, R) * val, terms


def _i_unilateral(a: int, b: int, a2: int, b2: int, n: int, R: ScalarRing):
    """The ``u = a - 1`` case of the I-integral as a terminating 2Phi1."""
    Q = R.q_pow
    pre = _prod_ratio(R, n, lambda ti: [Q(1 + b) * ti, Q(1 + a + b2) * ti],
                      lambda ti: [R.q * ti, Q(1 + a + b + b2) * ti])
    res = phi_series(phi([Q(-a2), Q(-a - b2)], [Q(1 + b) * R.t_pow(n - 1)], z=Q(1 + a2 + b2)), n, R)
    return pre * mac.ground(n, R) * res.value, res.terms


def _build_two_psi_two_a(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    if "a1" not in ps.params:
        a, b, a2, b2 = _ints(ps, "a", "b", "a2", "b2")
        idef = _i_integral(a, b, a2, b2, a - 1, n, R)
        bil, t1 = _i_bilateral(a, b, a2, b2, a - 1, n, R)
        uni, t2 = _i_unilateral(a, b, a2, b2, n, R)
        return Outcome([Comparison("I: constant term vs 2Psi2", idef, bil),
                        Comparison("I: constant term vs 2Phi1", idef, uni)], t1 + t2)
    A1, A2, A3, A4 = _alphas(ps, R)
    lhs, t1 = _psi22(A1, A2, A3, A4 * R.t_pow(n - 1), n, R, ps.D_q, z=A3 / (A1 * A2))
    rhs, t2 = _beetroot_rhs(A1, A2, A3, A4, n, R, ps.D_q)
    return Outcome([Comparison("2Psi2 to 2Phi1", lhs, rhs)], t1 + t2)


def _formal_alphas_or_ints(*names: str) -> Callable[[ParamSpec], bool]:
    def ok(ps: ParamSpec) -> bool:
        if ps.formal:
            return all(f"a{i}" in ps.params for i in range(1, 5))
        return ps.k is not None and all(int(ps.extra[v]) >= 0 for v in names)
    return ok


def _bilateral_defaults(name: str, formal_params: list[dict], ints: list[dict] = (),
                        extras: list[dict] = ({},)) -> Callable[[int], list]:
    def make(seed: int) -> list:
        rng = _rng(seed, name)
        out = []
        for n, k in ((1, 1), (2, 1), (2, 2)):
            for params in formal_params:
                for extra in extras:
                    out.append(ParamSpec(FORMAL, n, k=k, params=dict(params), D_q=8, extra=dict(extra)))
        for n in (1, 2):
            for ex in ints:
                out.append(ParamSpec(RATIONAL, n, k=1, q=rand_q(rng), extra=dict(ex)))
        return out
    return make


_ALPHAS = [{"a1": (2, -1), "a2": (3, 0), "a3": (5, 1), "a4": (7, 2)}]

register(IdentityEntry(
    "TWO_PSI_TWO_A", "2Psi2 to 2Phi1 transformation", "series-identity", (FORMAL, RATIONAL),
    (Constraint("formal: alpha_1..alpha_4 as monomials (a1..a4); rational: t = q^k and "
                "non-negative integers a, b, a2, b2 for the u = a-1 integral", _formal_alphas_or_ints("a", "b", "a2", "b2")),),
    _build_two_psi_two_a,
    _bilateral_defaults("TWO_PSI_TWO_A", _ALPHAS,
                        [{"a": 1, "b": 1, "a2": 1, "b2": 1}, {"a": 2, "b": 1, "a2": 0, "b2": 1},
                         {"a": 1, "b": 2, "a2": 2, "b2": 0}, {"a": 2, "b": 2, "a2": 1, "b2": 2}]),
    argument="alpha_3/(alpha_1 alpha_2) t^delta",
))


def _build_two_psi_two_sum(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, q = ps.n, R.q
    A1, A2, A4 = (_p(ps, R, v) for v in ("a1", "a2", "a4"))
    lhs, t1 = _psi22(A1, A2, q * A1, A4 * R.t_pow(n - 1), n, R, ps.D_q, z=q / A2)
    rhs = _prod_ratio(R, n, lambda ti: [q, q * ti, q * A1 * ti / A2, A4 * ti / A1],
                      lambda ti: [q * A1, A4 * ti, q * ti / A2, q * ti / A1])
    # the same value through the 2Phi1 route before summing it
    via, t2 = _beetroot_rhs(A1, A2, q * A1, A4, n, R, ps.D_q)
    return Outcome([Comparison("2Psi2 sum", lhs, rhs), Comparison("2Phi1 route", via, rhs)], t1 + t2)


def _formal_alphas(ps: ParamSpec) -> bool:
    return ps.formal and all(f"a{i}" in ps.params for i in (1, 2, 4))


register(IdentityEntry(
    "TWO_PSI_TWO_SUM", "2Psi2 summation with alpha_3 = q alpha_1", "series-identity", (FORMAL,),
    (Constraint("alpha_1, alpha_2, alpha_4 as formal monomials (a1, a2, a4)", _formal_alphas),),
    _build_two_psi_two_sum,
    _bilateral_defaults("TWO_PSI_TWO_SUM", [{"a1": (2, -1), "a2": (3, 0), "a4": (7, 2)}]),
    argument="q/alpha_2 t^delta",
))


def _variant(ps: ParamSpec) -> str:
    return ps.extra.get("variant", "corrected")


def _corn_rhs(A1, A2, A3, A4, n: int, R: ScalarRing, D_q, printed: bool = False):
    q = R.q
    pre = _prod_ratio(R, n, lambda ti: [q / A2, A3 * ti, A4 * ti / A2, A3 * ti / A1],
                      lambda ti: [A3, q * ti / A2, q * ti / (A1 * A2), A3 * A4 * ti / q])
    # the parameter swap behind this formula gives q/alpha_3; the printed form has q alpha_3
    second = q * A3 if printed else q / A3
    val, terms = _psi22(A1, second, q / A2, A4 * R.t_pow(n - 1), n, R, D_q, z=A3 / A1)
    return pre * val, terms


def _build_two_psi_two_b(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n, q = ps.n, R.q
    if "a1" not in ps.params:
        a, b, a2, b2 = _ints(ps, "a", "b", "a2", "b2")
        idef = _i_integral(a, b, a2, b2, -1, n, R)
        swap = _i_integral(b2, b, a2, a, -1, n, R)
        bil, t1 = _i_bilateral(a, b, a2, b2, -1, n, R)
        bil2, t2 = _i_bilateral(b2, b, a2, a, -1, n, R)
        return Outcome([Comparison("I(a,b,a',b';-1) vs I(b',b,a',a;-1)", idef, swap),
                        Comparison("I: constant term vs 2Psi2", idef, bil),
                        Comparison("swapped I: constant term vs 2Psi2", swap, bil2)], t1 + t2)
    A1, A2, A3, A4 = _alphas(ps, R)
    lhs, t1 = _psi22(A1, A2, A3, A4 * R.t_pow(n - 1), n, R, ps.D_q, z=q / (A1 * A2))
    rhs, t2 = _corn_rhs(A1, A2, A3, A4, n, R, ps.D_q, _variant(ps) == "printed")
    return Outcome([Comparison("2Psi2 to 2Psi2", lhs, rhs)], t1 + t2)


def _variant_ok(ps: ParamSpec) -> bool:
    return _variant(ps) in ("corrected", "printed")


register(IdentityEntry(
    "TWO_PSI_TWO_B", "2Psi2 to 2Psi2 transformation", "series-identity", (FORMAL, RATIONAL),
    (Constraint("formal: alpha_1..alpha_4 as monomials (a1..a4); rational: t = q^k and "
                "non-negative integers a, b, a2, b2", _formal_alphas_or_ints("a", "b", "a2", "b2")),
     Constraint("variant is 'corrected' or 'printed'", _variant_ok)),
    _build_two_psi_two_b,
    _bilateral_defaults("TWO_PSI_TWO_B", [{"a1": (2, -1), "a2": (3, 0), "a3": (5, 1), "a4": (7, 2)}],
                        [{"a": 1, "b": 1, "a2": 1, "b2": 1}, {"a": 2, "b": 1, "a2": 0, "b2": 1},
                         {"a": 0, "b": 2, "a2": 2, "b2": 1}]),
    argument="q/(alpha_1 alpha_2) t^delta",
))


def _inversion_rhs(a, b, c, d, x, n: int, R: ScalarRing, D_q, printed: bool = False):
    q, tn1 = R.q, R.t_pow(n - 1)
    pre = _prod_ratio(R, n, lambda ti: [c * ti, q / a], lambda ti: [c, q * ti / a])
    w = c * d / (a * c) if printed else c * d / (a * b)
    return _psi22(q / c, q * tn1 / d, q / a, q * tn1 / b, n, R, D_q, point=[w / xi for xi in x]), pre


def _build_inversion(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    a, b, c, d = (_p(ps, R, v) for v in "abcd")
    x = _point(ps, R)
    lhs, t1 = _psi22(a, b, c, d, n, R, ps.D_q, point=x)
    (val, t2), pre = _inversion_rhs(a, b, c, d, x, n, R, ps.D_q, _variant(ps) == "printed")
    return Outcome([Comparison("lam -> -lam^R", lhs, pre * val)], t1 + t2)


def _defaults_inversion(seed: int) -> list:
    out = []
    base = {"a": (2, -1), "b": (3, 0), "c": (5, 1), "d": (7, 2)}
    for n, k, xs in ((1, 1, ((1, 1),)), (1, 1, ((-2, 2),)), (2, 1, ((1, 1), (-1, 2))), (2, 2, ((1, 1), (-1, 2)))):
        params = dict(base)
        params.update({f"x{i + 1}": v for i, v in enumerate(xs)})
        out.append(ParamSpec(FORMAL, n, k=k, params=params, D_q=8))
    return out


register(IdentityEntry(
    "PSI_INVERSION", "2Psi2 under lam -> -lam^R", "series-identity", (FORMAL,),
    (Constraint("variant is 'corrected' or 'printed'", _variant_ok),),
    _build_inversion, _defaults_inversion, argument="x and cd/(ab) x^-1",
))


def _bailey_rhs(A1, A2, A3, A4, z, n: int, R: ScalarRing, D_q, printed: bool = False):
    q, tn1 = R.q, R.t_pow(n - 1)
    pre = _prod_ratio(
        R, n,
        lambda ti: [A3 * ti, A3 * ti / A1, A4 * ti / A2, A2 * z, q * A4 * ti / (A1 * A2 * z)],
        lambda ti: [A3, q * ti / A1, A4 * ti, z * ti, A3 * A4 * ti / (A1 * A2 * z)],
    )
    # inverting the intermediate 2Psi2 gives the argument alpha_4/alpha_2; the printed one has an extra t^(n-1)
    arg = A4 * tn1 / A2 if printed else A4 / A2
    val, terms = _psi22(A2, A1 * A2 * z / A4, A2 * z, A3 * tn1, n, R, D_q, z=arg)
    return pre * val, terms


def _bailey_intermediate(A1, A2, A3, A4, z, n: int, R: ScalarRing, D_q):
    q, tn1 = R.q, R.t_pow(n - 1)
    pre = _prod_ratio(
        R, n,
        lambda ti: [A3 * ti / A1, A4 * ti / A2, A2 * z * ti, q * A4 * ti / (A1 * A2 * z), A3 * ti, q / A2],
        lambda ti: [q * ti / A1, A4 * ti, z * ti, A3 * A4 * ti / (A1 * A2 * z), q * ti / A2, A3],
    )
    val, terms = _psi22(q / (A2 * z), q / A3, q / A2, q * tn1 * A4 / (A1 * A2 * z), n, R, D_q, z=A3 / A1)
    return pre * val, terms


def _nectarine(b, c, b2, c2, a, x, n: int, R: ScalarRing, D_q):
    """Both sides of the product relation between four 1Psi1 series at a point."""
    q = R.q
    ax = [a * xi for xi in x]

    def one(u, v, pt_):
        return psi_series(psi([u], v, [], arg="point", point=tuple(pt_)), n, R, D_q).value

    lhs = one(b, c, ax) * one(a * b2, c2, x)
    pre = _prod_ratio(
        R, n,
        lambda ti: [c * ti / b, c2 * ti / (a * b2), q * ti / b2, q * ti / (a * b)],
        lambda ti: [q * ti / b, q * ti / (a * b2), c2 * ti / b2, c * ti / (a * b)],
    )
    return lhs, pre * one(b2, c2, ax) * one(a * b, c, x)


def _build_bailey(ps: ParamSpec, R: ScalarRing) -> Outcome:
    n = ps.n
    q = R.q
    if "b" in ps.params:
        b, c, b2, c2, a = (_p(ps, R, v) for v in ("b", "c", "b2", "c2", "a"))
        lhs, rhs = _nectarine(b, c, b2, c2, a, _point(ps, R), n, R, ps.D_q)
        return Outcome([Comparison("four 1Psi1 series", lhs, rhs)], 4)
    A1, A2, A3, A4 = _alphas(ps, R)
    special = ps.extra.get("specialize")
    z = {"A": A3 / (A1 * A2), "B": q / (A1 * A2)}.get(special) if special else _p(ps, R, "z")
    lhs, t1 = _psi22(A1, A2, A3, A4 * R.t_pow(n - 1), n, R, ps.D_q, z=z)
    rhs, t2 = _bailey_rhs(A1, A2, A3, A4, z, n, R, ps.D_q, _variant(ps) == "printed")
    comps = [Comparison("general 2Psi2 transformation", lhs, rhs)]
    terms = t1 + t2
    if special == "A":
        other, t3 = _beetroot_rhs(A1, A2, A3, A4, n, R, ps.D_q)
        comps.append(Comparison("specialization to the 2Phi1 form", rhs, other))
        terms += t3
    elif special == "B":
        other, t3 = _corn_rhs(A1, A2, A3, A4, n, R, ps.D_q)
        comps.append(Comparison("specialization to the second 2Psi2 form", rhs, other))
        terms += t3
    else:
        mid, t3 = _bailey_intermediate(A1, A2, A3, A4, z, n, R, ps.D_q)
        comps.append(Comparison("before inversion", lhs, mid))
        terms += t3
    return Outcome(comps, terms)


def _bailey_ok(ps: ParamSpec) -> bool:
    if not ps.formal or _variant(ps) not in ("corrected", "printed"):
        return False
    if "b" in ps.params:
        return all(v in ps.params for v in ("c", "b2", "c2", "a"))
    special = ps.extra.get("specialize")
    return special in ("A", "B") or (special is None and "z" in ps.params)


def _defaults_bailey(seed: int) -> list:
    out = []
    base = dict(_ALPHAS[0])
    for n, k in ((1, 1), (2, 1), (2, 2)):
        out.append(ParamSpec(FORMAL, n, k=k, params={**base, "z": (11, 1)}, D_q=8))
        for s in ("A", "B"):
            out.append(ParamSpec(FORMAL, n, k=k, params=dict(base), D_q=8, extra={"specialize": s}))
    for n, xs in ((1, ((1, 1),)), (2, ((1, 1), (-1, 2)))):
        params = {"b": (2, -1), "c": (5, 3), "b2": (3, -1), "c2": (7, 3), "a": (-1, 0)}
        params.update({f"x{i + 1}": v for i, v in enumerate(xs)})
        out.append(ParamSpec(FORMAL, n, k=1, params=params, D_q=8))
    return out


register(IdentityEntry(
    "BAILEY", "general 2Psi2 transformation", "series-identity", (FORMAL,),
    (Constraint("formal monomials a1..a4 with z (or extra specialize A/B), or b, c, b2, c2, a and a point "
                "for the 1Psi1 product relation; variant 'corrected' or 'printed'", _bailey_ok),),
    _build_bailey, _defaults_bailey, argument="z t^delta",
))
