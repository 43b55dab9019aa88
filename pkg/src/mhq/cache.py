"""On-disk cache for Macdonald coefficients and product expansions.

One file per entry::

    MHQCACHE 1
    key macpoly|2,1|n=3|rational:q=1/2:t=1/3
    prec none
    sha256 <hex digest of the record lines>
    <partition text>\t<canonical scalar text>
    ...

Files are written to a temporary name and moved into place, so readers
never see a partial entry.  A file that fails to parse or whose digest
does not match is moved to ``quarantine/``.
"""

from __future__ import annotations

import hashlib
import os
import random
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

HEADER = "MHQCACHE 1"
SUFFIX = ".mhq"


class CorruptEntry(ValueError):
    pass


def default_dir() -> Path:
    env = os.environ.get("MHQ_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "mhq"


def _digest(lines: list[str]) -> str:
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


@dataclass
class Entry:
    key: str
    prec: int | None
    data: dict[str, str] = field(default_factory=dict)

    def render(self) -> str:
        body = [f"{k}\t{v}" for k, v in sorted(self.data.items())]
        head = [HEADER, f"key {self.key}", f"prec {'none' if self.prec is None else self.prec}"]
        return "\n".join(head + [f"sha256 {_digest(body)}"] + body) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Entry":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if len(lines) < 4 or lines[0] != HEADER:
            raise CorruptEntry("bad header")
        if not lines[1].startswith("key ") or not lines[2].startswith("prec ") or not lines[3].startswith("sha256 "):
            raise CorruptEntry("bad preamble")
        body = lines[4:]
        if _digest(body) != lines[3][7:]:
            raise CorruptEntry("digest mismatch")
        p = lines[2][5:]
        try:
            prec = None if p == "none" else int(p)
        except ValueError:
            raise CorruptEntry("bad precision line") from None
        data = {}
        for line in body:
            k, sep, v = line.partition("\t")
            if not sep:
                raise CorruptEntry("record without a tab")
            data[k] = v
        return cls(lines[1][4:], prec, data)


class DiskCache:
    def __init__(self, root: str | os.PathLike | None = None):
        self.root = Path(root) if root is not None else default_dir()
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    @property
    def quarantine_dir(self) -> Path:
        return self.root / "quarantine"

    def path(self, key: str) -> Path:
        return self.root / (hashlib.sha256(key.encode()).hexdigest()[:32] + SUFFIX)

    def files(self) -> list[Path]:
        return sorted(self.root.glob("*" + SUFFIX))

    def quarantine(self, path: Path) -> Path:
        self.quarantine_dir.mkdir(exist_ok=True)
        dest = self.quarantine_dir / path.name
        os.replace(path, dest)
        return dest

    def read(self, path: Path) -> Entry:
        return Entry.parse(path.read_text())

    def get(self, key: str, min_prec: int | None = None) -> Entry | None:
        """Entry for ``key`` whose precision is at least ``min_prec`` (``None`` = exact)."""
        path = self.path(key)
        try:
            entry = self.read(path)
        except FileNotFoundError:
            self.misses += 1
            return None
        except (CorruptEntry, UnicodeDecodeError):
            self.quarantine(path)
            self.misses += 1
            return None
        if entry.key != key or (min_prec is not None and entry.prec is not None and entry.prec < min_prec):
            self.misses += 1
            return None
        self.hits += 1
        return entry

    def put(self, key: str, data: Mapping[str, str], prec: int | None = None) -> None:
        entry = Entry(key, prec, dict(data))
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(entry.render())
            os.replace(tmp, self.path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def stats(self) -> dict:
        files = self.files()
        quarantined = list(self.quarantine_dir.glob("*")) if self.quarantine_dir.exists() else []
        return {
            "root": str(self.root),
            "entries": len(files),
            "bytes": sum(f.stat().st_size for f in files),
            "quarantined": len(quarantined),
        }

    def clear(self) -> int:
        files = self.files()
        for f in files:
            f.unlink()
        if self.quarantine_dir.exists():
            shutil.rmtree(self.quarantine_dir)
        return len(files)

    def verify_integrity(self, recompute: Callable[[Entry], dict[str, str]], sample: int | None = None,
                         seed: int = 0) -> dict:
        """Re-derive a sample of entries; corrupt or mismatching entries are quarantined."""
        files = self.files()
        if sample is not None and sample < len(files):
            files = random.Random(seed).sample(files, sample)
        checked, bad = 0, []
        for path in files:
            try:
                entry = self.read(path)
                if recompute(entry) != entry.data:
                    raise CorruptEntry("recomputed value differs")
            except (CorruptEntry, UnicodeDecodeError, ValueError) as exc:
                self.quarantine(path)
                bad.append({"file": path.name, "problem": str(exc)})
            checked += 1
        return {"checked": checked, "ok": checked - len(bad), "quarantined": bad}


_ACTIVE: DiskCache | None = None
_CONFIGURED = False


def configure(root: str | os.PathLike | None) -> DiskCache | None:
    """Turn the process-wide cache on at ``root`` (or off with ``None``)."""
    global _ACTIVE, _CONFIGURED
    _ACTIVE = DiskCache(root) if root is not None else None
    _CONFIGURED = True
    return _ACTIVE


def active() -> DiskCache | None:
    """The process-wide cache; without :func:`configure` it follows ``MHQ_CACHE_DIR``."""
    if not _CONFIGURED and os.environ.get("MHQ_CACHE_DIR"):
        configure(os.environ["MHQ_CACHE_DIR"])
    return _ACTIVE
