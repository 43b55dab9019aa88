"""Command-line front end for ``mhq``.

Exit status: 0 when every requested verification passes (skips count as
passes only with ``--allow-skip``), 1 on any failure, 2 on a usage or
configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from gmpy2 import mpq

from . import cache as disk
from . import identities as idt
from . import macdonald as mac
from . import partition as pt
from .ring import ParamSpec, ScalarRing, to_text

MODES = {"formal": idt.FORMAL, "rational-point": idt.RATIONAL}
MAX_SEEDS = 64

DEFAULTS: dict[str, Any] = {
    "identity": None,
    "mode": None,
    "n": None,
    "k": None,
    "N": None,
    "q": None,
    "t": None,
    "param": [],
    "extra": [],
    "dq": None,
    "dz": None,
    "points": None,
    "seed": 0,
    "report": None,
    "allow_skip": False,
    "cache_dir": None,
    "no_cache": False,
    "jobs": 1,
    "json": False,
    "lam": None,
    "mu": None,
    "nu": None,
    "sample": None,
}

# options that change what gets computed, and so enter the config fingerprint
_FINGERPRINTED = ("command", "identity", "mode", "n", "k", "N", "q", "t", "param", "extra",
                  "dq", "dz", "points", "seed", "allow_skip")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing


def _rational(text: str) -> mpq:
    try:
        return mpq(str(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def _partition(text: str) -> tuple:
    try:
        return pt.partition(pt.from_text(str(text)))
    except ValueError as exc:
        raise UsageError(f"bad partition {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON file whose keys mirror the long flags; flags win")
    common.add_argument("--cache-dir", dest="cache_dir", help="cache directory (default: $MHQ_CACHE_DIR)")
    common.add_argument("--no-cache", dest="no_cache", action="store_true", help="do not touch the disk cache")
    common.add_argument("--report", help="write a JSON report here (atomically)")

    ring = argparse.ArgumentParser(add_help=False, argument_default=S)
    ring.add_argument("--mode", choices=sorted(MODES), help="formal q-series or exact rational point")
    ring.add_argument("--n", type=int, help="number of variables")
    ring.add_argument("--k", type=int, help="t = q^k")
    ring.add_argument("--q", help="rational q, e.g. 1/2")
    ring.add_argument("--t", help="rational t, e.g. 1/3")
    ring.add_argument("--dq", type=int, help="q-truncation order (formal mode)")

    p = argparse.ArgumentParser(prog="mhq", description="Exact checks of multivariable basic hypergeometric identities.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common, ring], argument_default=S,
                       help="verify identities at default or explicit parameters")
    v.add_argument("--identity", help="identity id, comma-separated ids, or 'all'")
    v.add_argument("--N", type=int, help="termination order")
    v.add_argument("--param", action="append",
                   help="name=value; a rational in rational-point mode, EXP or COEF:EXP for COEF*q^EXP in formal mode")
    v.add_argument("--extra", action="append", help="name=value passed through to the identity builder")
    v.add_argument("--dz", type=int, help="z-truncation order")
    v.add_argument("--points", type=int, help="number of parameter points per identity")
    v.add_argument("--seed", type=int, help="seed for sampled parameter points")
    v.add_argument("--allow-skip", dest="allow_skip", action="store_true", help="treat SKIPPED as success")
    v.add_argument("--jobs", type=int, help="worker processes")

    c = sub.add_parser("compute", help="compute objects")
    csub = c.add_subparsers(dest="object", required=True)
    m = csub.add_parser("macdonald", parents=[common, ring], argument_default=S,
                        help="monomial expansion of P_lambda")
    m.add_argument("--lambda", dest="lam", help="partition, e.g. 2,1")
    m.add_argument("--json", action="store_true")
    f = csub.add_parser("structure", parents=[common, ring], argument_default=S,
                        help="structure constants of P_mu P_nu")
    f.add_argument("--mu")
    f.add_argument("--nu")
    f.add_argument("--json", action="store_true")

    li = sub.add_parser("list-identities", parents=[common], argument_default=S, help="show the registry")
    li.add_argument("--json", action="store_true")

    ca = sub.add_parser("cache", help="inspect or maintain the disk cache")
    casub = ca.add_subparsers(dest="action", required=True)
    casub.add_parser("stats", parents=[common], argument_default=S)
    casub.add_parser("clear", parents=[common], argument_default=S)
    vi = casub.add_parser("verify-integrity", parents=[common], argument_default=S)
    vi.add_argument("--sample", type=int, help="re-derive only this many entries")
    vi.add_argument("--seed", type=int)
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Built-in defaults, then the config file, then explicit flags."""
    given = vars(args)
    cfg: dict = {}
    if "config" in given:
        try:
            cfg = json.loads(Path(given["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {given['config']}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        cfg = {key.replace("-", "_"): val for key, val in cfg.items()}
        if "lambda" in cfg:
            cfg["lam"] = cfg.pop("lambda")
        if key := next((k for k in cfg if k not in DEFAULTS), None):
            raise UsageError(f"unknown config key {key!r}")
    out = {**DEFAULTS, **cfg, **{k: v for k, v in given.items() if k != "config"}}
    for key in ("param", "extra"):
        if isinstance(out[key], str):
            out[key] = [out[key]]
    return out


# ---------------------------------------------------------------------------
# cache


def cache_root(cfg: dict) -> Path | None:
    if cfg["no_cache"]:
        return None
    return Path(cfg["cache_dir"]) if cfg["cache_dir"] else disk.default_dir()


def _init_worker(root: str | None) -> None:
    disk.configure(root)


# ---------------------------------------------------------------------------
# parameter specs


def _pairs(items: Sequence[str], what: str) -> dict[str, str]:
    out = {}
    for item in items:
        name, sep, val = str(item).partition("=")
        if not sep or not name:
            raise UsageError(f"--{what} expects name=value, got {item!r}")
        out[name.strip()] = val.strip()
    return out


def _formal_value(text: str):
    try:
        if ":" in text:
            coef, exp = text.split(":")
            return (int(coef) if "/" not in coef else mpq(coef), int(exp))
        return int(text)
    except ValueError:
        raise UsageError(f"formal parameters are EXP or COEF:EXP, got {text!r}") from None


def _extra_value(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def _mode(cfg: dict) -> str:
    # a bare --q or --t means a rational point
    if cfg["mode"] is None:
        return idt.RATIONAL if cfg["q"] is not None or cfg["t"] is not None else idt.FORMAL
    return MODES[cfg["mode"]]


def explicit_spec(cfg: dict) -> ParamSpec:
    mode = _mode(cfg)
    if cfg["n"] is None:
        raise UsageError("explicit parameters need --n")
    raw = _pairs(cfg["param"], "param")
    extra = {k: _extra_value(v) for k, v in _pairs(cfg["extra"], "extra").items()}
    if cfg["N"] is not None:
        extra["N"] = cfg["N"]
    fields: dict[str, Any] = {"extra": extra}
    if cfg["dq"] is not None:
        fields["D_q"] = cfg["dq"]
    if cfg["dz"] is not None:
        fields["D_z"] = cfg["dz"]
    if mode == idt.FORMAL:
        if cfg["q"] is not None or cfg["t"] is not None:
            raise UsageError("--q/--t belong to rational-point mode")
        params = {k: _formal_value(v) for k, v in raw.items()}
        spec_args = dict(k=cfg["k"])
    else:
        if cfg["q"] is None:
            raise UsageError("rational-point mode needs --q")
        q = _rational(cfg["q"])
        if cfg["t"] is not None:
            t = _rational(cfg["t"])
            if cfg["k"] is not None and t != q ** cfg["k"]:
                raise UsageError("--t disagrees with t = q^k")
        elif cfg["k"] is not None:
            t = q ** cfg["k"]
        else:
            raise UsageError("rational-point mode needs --t or --k")
        params = {k: _rational(v) for k, v in raw.items()}
        spec_args = dict(k=cfg["k"], q=q, t=t)
    try:
        return ParamSpec(mode, cfg["n"], params=params, **spec_args, **fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _matches(ps: ParamSpec, cfg: dict) -> bool:
    if cfg["mode"] is not None and ps.mode != MODES[cfg["mode"]]:
        return False
    if cfg["n"] is not None and ps.n != cfg["n"]:
        return False
    if cfg["k"] is not None and ps.k != cfg["k"]:
        return False
    if cfg["N"] is not None and ps.extra.get("N") != cfg["N"]:
        return False
    return True


def sampled_specs(identity: str, cfg: dict) -> list[ParamSpec]:
    """Registry default points that match the flags, drawn from successive seeds as needed."""
    entry = idt.get_entry(identity)
    want = cfg["points"]
    seen, out = set(), []
    for seed in range(cfg["seed"], cfg["seed"] + (MAX_SEEDS if want else 1)):
        for ps in entry.defaults(seed):
            if not _matches(ps, cfg):
                continue
            if cfg["dq"] is not None:
                ps = ps.replace(D_q=cfg["dq"])
            if cfg["dz"] is not None:
                ps = ps.replace(D_z=cfg["dz"])
            fp = ps.fingerprint()
            if fp in seen:
                continue
            seen.add(fp)
            out.append(ps)
            if want and len(out) == want:
                return out
    return out


def plan(cfg: dict) -> list[tuple[str, ParamSpec]]:
    spec = cfg["identity"]
    if not spec:
        raise UsageError("verify needs --identity")
    known = [e["id"] for e in idt.list_identities()]
    ids = known if spec == "all" else [s.strip() for s in str(spec).split(",") if s.strip()]
    for name in ids:
        if name not in known:
            raise UsageError(f"unknown identity {name!r}")
    if cfg["points"] is not None and cfg["points"] < 1:
        raise UsageError("--points must be positive")
    if cfg["jobs"] < 1:
        raise UsageError("--jobs must be positive")
    explicit = bool(cfg["param"]) or cfg["q"] is not None or cfg["t"] is not None
    if explicit:
        ps = explicit_spec(cfg)
        return [(name, ps) for name in ids]
    tasks = []
    for name in ids:
        specs = sampled_specs(name, cfg)
        if not specs:
            raise UsageError(f"no default parameter points of {name} match the given flags")
        tasks.extend((name, ps) for ps in specs)
    return tasks


def config_fingerprint(cfg: dict) -> str:
    body = {k: cfg[k] for k in _FINGERPRINTED if k in cfg}
    return hashlib.sha256(json.dumps(body, sort_keys=True, default=str).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# running


def _run_one(task: tuple[str, ParamSpec]) -> dict:
    name, ps = task
    return idt.verify(name, ps).to_json()


def run_tasks(tasks: list, jobs: int, root: Path | None) -> list[dict]:
    if jobs == 1 or len(tasks) < 2:
        return [_run_one(t) for t in tasks]
    # chunksize 1 lets idle workers pull the next task; map keeps canonical order
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                             initargs=(None if root is None else str(root),)) as pool:
        return list(pool.map(_run_one, tasks, chunksize=1))


def write_report(path: str, payload: Any) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _describe(rec: dict) -> str:
    params = " ".join(f"{k}={v}" for k, v in rec["params"].items())
    return f"{rec['status']:7} {rec['identity']} [{rec['mode']}] {params}"


def cmd_verify(cfg: dict) -> int:
    tasks = plan(cfg)
    root = cache_root(cfg)
    records = run_tasks(tasks, cfg["jobs"], root)
    fp = config_fingerprint(cfg)
    counts = {idt.PASS: 0, idt.FAIL: 0, idt.SKIPPED: 0}
    for rec in records:
        rec["config_fingerprint"] = fp
        counts[rec["status"]] += 1
        print(_describe(rec))
        if rec["status"] == idt.FAIL:
            print(f"FAIL {rec['identity']}: {json.dumps(rec['witness'])}", file=sys.stderr)
        elif rec["status"] == idt.SKIPPED:
            print(f"SKIPPED {rec['identity']}: {rec.get('reason', '')}", file=sys.stderr)
    print(f"{counts[idt.PASS]} passed, {counts[idt.FAIL]} failed, {counts[idt.SKIPPED]} skipped")
    if cfg["report"]:
        config = {k: cfg[k] for k in _FINGERPRINTED if k in cfg}
        write_report(cfg["report"], {"config": config, "config_fingerprint": fp,
                                     "summary": counts, "reports": records})
    if counts[idt.FAIL] or (counts[idt.SKIPPED] and not cfg["allow_skip"]):
        return 1
    return 0


def compute_ring(cfg: dict) -> ScalarRing:
    mode = _mode(cfg)
    if mode == idt.FORMAL:
        if cfg["k"] is None:
            raise UsageError("formal mode needs --k")
        if cfg["k"] < 1:
            raise UsageError("--k must be positive")
        return ScalarRing("formal", k=cfg["k"], cap=cfg["dq"] or 10)
    if cfg["q"] is None:
        raise UsageError("rational-point mode needs --q")
    q = _rational(cfg["q"])
    if cfg["t"] is not None:
        t = _rational(cfg["t"])
    elif cfg["k"] is not None:
        t = q ** cfg["k"]
    else:
        raise UsageError("rational-point mode needs --t or --k")
    return ScalarRing("rational", k=cfg["k"], q=q, t=t)


def _emit(cfg: dict, rows: list[tuple[str, Any]], label: str) -> None:
    data = {key: to_text(val) for key, val in rows}
    if cfg["json"]:
        print(json.dumps(data, indent=2))
    else:
        width = max((len(key) for key, _ in rows), default=0) + len(label) + 2
        for key, val in rows:
            print(f"{label}[{key}]".ljust(width), to_text(val))
    if cfg["report"]:
        write_report(cfg["report"], data)


def cmd_compute(cfg: dict, what: str) -> int:
    if cfg["n"] is None or cfg["n"] < 1:
        raise UsageError("compute needs --n >= 1")
    n = cfg["n"]
    R = compute_ring(cfg)
    if what == "macdonald":
        if cfg["lam"] is None:
            raise UsageError("compute macdonald needs --lambda")
        lam = _partition(cfg["lam"])
        if len(lam) > n:
            raise UsageError(f"{cfg['lam']} has more than {n} parts")
        P = mac.macdonald_poly(lam, n, R)
        order = sorted(P.coeffs, key=lambda nu: [-x for x in nu])
        _emit(cfg, [(pt.to_text(nu), P.coeffs[nu]) for nu in order], "m")
    else:
        if cfg["mu"] is None or cfg["nu"] is None:
            raise UsageError("compute structure needs --mu and --nu")
        mu, nu = _partition(cfg["mu"]), _partition(cfg["nu"])
        if max(len(mu), len(nu)) > n:
            raise UsageError(f"partitions must have at most {n} parts")
        f = mac.f_expand(mu, nu, n, R)
        order = sorted(f, key=lambda lam: [-x for x in lam])
        _emit(cfg, [(pt.to_text(lam), f[lam]) for lam in order], "f")
    return 0


def cmd_list(cfg: dict) -> int:
    rows = idt.list_identities()
    if cfg["json"]:
        print(json.dumps(rows, indent=2))
    else:
        width = max(len(r["id"]) for r in rows)
        for r in rows:
            print(f"{r['id']:<{width}}  {r['kind']:<20}  {','.join(r['modes']):<17}  {r['anchor']}")
    if cfg["report"]:
        write_report(cfg["report"], rows)
    return 0


def cmd_cache(cfg: dict, action: str) -> int:
    root = cache_root(cfg)
    if root is None:
        raise UsageError("cache commands need a cache directory")
    try:
        c = disk.DiskCache(root)
    except OSError as exc:
        raise UsageError(f"cannot use cache directory {root}: {exc}") from None
    status = 0
    if action == "stats":
        out = c.stats()
    elif action == "clear":
        out = {"root": str(c.root), "removed": c.clear()}
    else:
        disk.configure(None)  # recomputation must not read the entries under test
        out = c.verify_integrity(mac.recompute_entry, cfg["sample"], cfg["seed"])
        status = 1 if out["quarantined"] else 0
    print(json.dumps(out, indent=2))
    if cfg["report"]:
        write_report(cfg["report"], out)
    return status


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        if cfg["command"] == "verify":
            disk.configure(cache_root(cfg))
            return cmd_verify(cfg)
        if cfg["command"] == "compute":
            disk.configure(cache_root(cfg))
            return cmd_compute(cfg, cfg["object"])
        if cfg["command"] == "list-identities":
            return cmd_list(cfg)
        return cmd_cache(cfg, cfg["action"])
    except UsageError as exc:
        print(f"mhq: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mhq: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
