import dataclasses
import json

import pytest
from gmpy2 import mpq

from mhq import identities as idt
from mhq.ring import ParamSpec

NAMES = [
    "Q_BINOMIAL", "HEINE", "GAUSS", "EULER", "KANEKO_SYSTEM", "SAAL_COEFF", "SAALSCHUTZ",
    "CHU_VANDERMONDE", "MACDONALD_RECT", "OTOTO", "SHUMI", "LAPIZ", "SOMBRERO", "SYMM",
    "NORM_GROUND", "CHICHI", "SHIFTED_GAUSS", "PFAFF_KUMMER", "SEARS", "ONE_PSI_ONE",
    "KADELL_KANEKO_CT", "LLAVE", "TWO_PSI_TWO_A", "TWO_PSI_TWO_SUM", "TWO_PSI_TWO_B",
    "PSI_INVERSION", "JB", "NEG_REVERSE_P", "BAILEY",
]
ALPHAS = {"a1": (2, -1), "a2": (3, 0), "a3": (5, 1), "a4": (7, 2)}
REGISTRY = [e["id"] for e in idt.list_identities()]


def test_registry_contents_and_order():
    assert set(NAMES) <= set(REGISTRY)
    assert REGISTRY == [e["id"] for e in idt.list_identities()]
    for e in idt.list_identities():
        assert e["anchor"]
        assert e["kind"] in ("series-identity", "coefficient-identity", "constant-term", "residual-certificate")
        assert set(e["modes"]) <= {idt.FORMAL, idt.RATIONAL}


def test_saalschutz_entry():
    e = idt.get_entry("SAALSCHUTZ").summary()
    assert any("a = q^-N" in c for c in e["constraints"])
    assert e["argument"] == "q t^delta"


def test_one_psi_one_window_is_declared_and_enforced():
    e = idt.get_entry("ONE_PSI_ONE").summary()
    assert any("|b/a| < |x_i| < 1" in c for c in e["constraints"])
    # x exponent 5 is outside 0 < chi < beta - alpha = 5
    ps = ParamSpec("formal", 1, k=1, params={"a": (2, -1), "b": (3, 4), "x1": (1, 5)}, D_q=8)
    assert idt.verify("ONE_PSI_ONE", ps).status == idt.SKIPPED


def test_unknown_identity():
    with pytest.raises(idt.UnknownIdentity):
        idt.get_entry("NOPE")


def test_gauss_two_term_example():
    q = mpq(1, 2)
    ps = ParamSpec("rational", 1, k=1, q=q, params={"b": mpq(1, 3), "c": mpq(1, 5)}, extra={"N": 1})
    r = idt.verify("GAUSS", ps)
    assert r.status == idt.PASS


def test_euler_at_a_equal_one():
    ps = ParamSpec("rational", 2, q=mpq(2, 5), t=mpq(3, 7), params={"a": 1, "b": mpq(3, 4), "c": mpq(-5, 2)}, D_z=4)
    assert idt.verify("EULER", ps).status == idt.PASS


def test_saalschutz_five_points():
    specs = [ps for ps in idt.get_entry("SAALSCHUTZ").defaults(0) if ps.n == 2 and ps.k == 1 and ps.extra["N"] == 1]
    assert len(specs) >= 5
    assert all(idt.verify("SAALSCHUTZ", ps).status == idt.PASS for ps in specs[:5])


def test_coefficient_checks():
    ps = ParamSpec("rational", 2, q=mpq(2, 5), t=mpq(3, 7), params={"a": mpq(1, 3), "b": mpq(-4, 5), "c": mpq(7, 2)})
    assert idt.coefficient_check("SAAL_COEFF", (), ps).status == idt.PASS
    assert idt.coefficient_check("SAAL_COEFF", (1,), ps).status == idt.PASS
    with pytest.raises(ValueError):
        idt.coefficient_check("GAUSS", (1,), ps)


@pytest.mark.parametrize("name", REGISTRY)
def test_registry_defaults_pass(name):
    reports = idt.verify_defaults(name, seed=0)
    assert reports
    bad = [(r.params, r.witness) for r in reports if r.status != idt.PASS]
    assert not bad


PRINTED = {
    "JB": ParamSpec("rational", 2, k=1, q=mpq(1, 2), params={"a": mpq(9, 2)}, extra={"variant": "printed"}),
    "SHIFTED_GAUSS": ParamSpec(
        "formal", 2, k=1, params={"a": (2, 1), "c": (3, 2), "x": (-1, 0)}, D_q=10, D_z=3,
        extra={"lam": "1", "variant": "printed"},
    ),
    "TWO_PSI_TWO_B": ParamSpec("formal", 2, k=1, params=ALPHAS, D_q=8, extra={"variant": "printed"}),
    "PSI_INVERSION": ParamSpec(
        "formal", 2, k=1,
        params={"a": (2, -1), "b": (3, 0), "c": (5, 1), "d": (7, 2), "x1": (1, 1), "x2": (-1, 2)},
        D_q=8, extra={"variant": "printed"},
    ),
    "BAILEY": ParamSpec("formal", 2, k=1, params={**ALPHAS, "z": (11, 1)}, D_q=8, extra={"variant": "printed"}),
}


@pytest.mark.parametrize("name", sorted(PRINTED))
def test_printed_variants_fail(name):
    ps = PRINTED[name]
    assert idt.verify(name, ps).status == idt.FAIL
    fixed = ps.replace(extra={**ps.extra, "variant": "corrected"})
    assert idt.verify(name, fixed).status == idt.PASS


def test_uncorrected_kaneko_variant_fails():
    base = next(ps for ps in idt.get_entry("KANEKO_SYSTEM").defaults(0) if ps.n == 2)
    assert idt.verify("KANEKO_SYSTEM", base).status == idt.PASS
    bad = base.replace(extra={**base.extra, "variant": "uncorrected"})
    assert idt.verify("KANEKO_SYSTEM", bad).status == idt.FAIL


def test_perturbed_identity_fails_with_witness(monkeypatch):
    entry = idt.get_entry("SAALSCHUTZ")
    original = entry.build

    def skewed(ps, R):
        out = original(ps, R)
        c = out.comparisons[0]
        out.comparisons[0] = idt.Comparison(c.label, c.lhs, c.rhs * 2)
        return out

    monkeypatch.setitem(idt._REGISTRY, "SAALSCHUTZ", dataclasses.replace(entry, build=skewed))
    ps = entry.defaults(0)[0]
    r = idt.verify("SAALSCHUTZ", ps)
    assert r.status == idt.FAIL
    assert r.witness["check"] == "saalschutz"
    assert r.witness["lhs"] != r.witness["rhs"]


def test_formal_witness_names_the_q_exponent(monkeypatch):
    entry = idt.get_entry("GAUSS")
    original = entry.build

    def skewed(ps, R):
        out = original(ps, R)
        c = out.comparisons[0]
        out.comparisons[0] = idt.Comparison(c.label, c.lhs, c.rhs + R.q_pow(3))
        return out

    monkeypatch.setitem(idt._REGISTRY, "GAUSS", dataclasses.replace(entry, build=skewed))
    ps = next(p for p in entry.defaults(0) if p.formal)
    r = idt.verify("GAUSS", ps)
    assert r.status == idt.FAIL
    assert r.witness["q_exponent"] == 3


def test_constraint_violation_is_skipped():
    ps = ParamSpec("rational", 2, k=1, q=mpq(1, 3), params={"a": 2, "b": mpq(1, 5), "c": mpq(2, 7)}, extra={"N": -1})
    r = idt.verify("SAALSCHUTZ", ps)
    assert r.status == idt.SKIPPED
    assert r.reason.startswith("constraint")


def test_inadmissible_mode_is_skipped():
    ps = ParamSpec("rational", 2, k=1, q=mpq(1, 3), params={"a": mpq(1, 2), "b": mpq(1, 5), "c": mpq(2, 7)})
    assert idt.verify("HEINE_GAUSS", ps).status == idt.SKIPPED


def test_pole_is_a_diagnosed_failure():
    # c = q^-1 makes a lower factorial vanish on a contributing index
    q = mpq(1, 3)
    ps = ParamSpec("rational", 1, k=1, q=q, params={"b": mpq(1, 5), "c": q ** -1}, extra={"N": 2})
    r = idt.verify("GAUSS", ps)
    assert r.status == idt.FAIL
    assert "error" in r.witness


def test_report_json_schema():
    ps = idt.get_entry("GAUSS").defaults(0)[0]
    out = idt.verify("GAUSS", ps).to_json()
    for key in ("identity", "mode", "params", "truncation", "status", "witness", "terms", "elapsed_ms"):
        assert key in out
    json.dumps(out)


def test_reports_are_deterministic_apart_from_timing():
    a = [r.to_json() for r in idt.verify_defaults("HEINE", seed=3)]
    b = [r.to_json() for r in idt.verify_defaults("HEINE", seed=3)]
    for x in a + b:
        x.pop("elapsed_ms")
    assert a == b
