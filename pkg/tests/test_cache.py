import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from mhq import cache
from mhq import macdonald as mac
from mhq.ring import ScalarRing


def rational():
    return ScalarRing("rational", q=mpq(1, 2), t=mpq(1, 3))


@pytest.fixture
def disk(tmp_path):
    return cache.configure(tmp_path / "c")


texts = st.text(st.characters(blacklist_characters="\t\n\r", blacklist_categories=("Cs",)), max_size=12)


@given(st.dictionaries(texts, texts, max_size=6), st.one_of(st.none(), st.integers(0, 99)))
def test_entry_round_trip(data, prec):
    e = cache.Entry("k|x|n=2", prec, data)
    back = cache.Entry.parse(e.render())
    assert back == e


def test_get_put_and_precision(disk):
    assert disk.get("a") is None
    disk.put("a", {"x": "1"}, prec=10)
    assert disk.get("a").data == {"x": "1"}
    assert disk.get("a", min_prec=8) is not None
    assert disk.get("a", min_prec=12) is None
    assert (disk.hits, disk.misses) == (2, 2)
    assert not list(disk.root.glob("*.tmp"))


def test_corrupt_file_is_quarantined(disk):
    disk.put("a", {"x": "1"})
    path = disk.path("a")
    path.write_text(path.read_text().replace("x\t1", "x\t2"))
    assert disk.get("a") is None
    assert not path.exists()
    assert (disk.quarantine_dir / path.name).exists()
    assert disk.stats()["quarantined"] == 1


def test_garbage_file_is_quarantined(disk):
    disk.path("b").write_bytes(b"\xff\xfe not a cache file")
    assert disk.get("b") is None
    assert disk.stats()["quarantined"] == 1


def test_stats_and_clear(disk):
    for i in range(3):
        disk.put(f"k{i}", {"v": str(i)})
    s = disk.stats()
    assert s["entries"] == 3 and s["bytes"] > 0
    assert disk.clear() == 3
    assert disk.stats()["entries"] == 0


def test_macdonald_values_survive_a_round_trip(disk):
    first = mac.macdonald_poly((2, 1), 3, rational()).coeffs
    assert disk.stats()["entries"] >= 1
    disk.hits = 0
    again = mac.macdonald_poly((2, 1), 3, rational()).coeffs
    assert again == first
    assert disk.hits >= 1


def test_structure_constants_are_cached(disk):
    f = mac.f_expand((1,), (2,), 2, rational())
    g = mac.f_expand((1,), (2,), 2, rational())
    assert f == g
    assert disk.hits >= 1


def test_formal_entries_serve_lower_orders(disk):
    big = mac.macdonald_poly((2, 1), 3, ScalarRing("formal", k=2, cap=14)).coeffs
    n_files = disk.stats()["entries"]
    small_ring = ScalarRing("formal", k=2, cap=8)
    small = mac.macdonald_poly((2, 1), 3, small_ring).coeffs
    assert disk.stats()["entries"] == n_files
    fresh = mac.macdonald_poly((2, 1), 3, ScalarRing("formal", k=2, cap=8))
    for lam, v in small.items():
        assert v.prec is None or v.prec <= 8
        d = v - big[lam]
        assert all(e >= d.prec for e in d.c)
    cache.configure(None)
    direct = mac.macdonald_poly((2, 1), 3, ScalarRing("formal", k=2, cap=8)).coeffs
    assert {k: (v.c, v.prec) for k, v in fresh.coeffs.items()} == {k: (v.c, v.prec) for k, v in direct.items()}


def test_verify_integrity_catches_a_wrong_value(disk):
    mac.macdonald_poly((2,), 2, rational())
    mac.macdonald_poly((1, 1), 2, rational())
    report = disk.verify_integrity(mac.recompute_entry)
    assert report["quarantined"] == [] and report["ok"] == report["checked"] >= 2

    # a well-formed entry with a wrong value passes the digest but not recomputation
    path = disk.files()[0]
    entry = disk.read(path)
    entry.data = {k: "7/3" for k in entry.data}
    path.write_text(entry.render())
    report = disk.verify_integrity(mac.recompute_entry)
    assert len(report["quarantined"]) == 1
    assert report["quarantined"][0]["problem"] == "recomputed value differs"


def test_verify_integrity_sample(disk):
    for lam in [(1,), (2,), (1, 1), (3,)]:
        mac.macdonald_poly(lam, 2, rational())
    assert disk.verify_integrity(mac.recompute_entry, sample=2, seed=1)["checked"] == 2


def test_environment_variable_selects_the_directory(tmp_path, monkeypatch):
    import mhq.cache as c

    monkeypatch.setattr(c, "_CONFIGURED", False)
    monkeypatch.setattr(c, "_ACTIVE", None)
    monkeypatch.setenv("MHQ_CACHE_DIR", str(tmp_path / "env"))
    assert c.active().root == tmp_path / "env"
    assert c.default_dir() == tmp_path / "env"


def test_cache_off_by_default():
    assert cache.active() is None
