"""Partitions and generalized partitions.

Partitions are plain tuples of non-increasing non-negative integers with
trailing zeros stripped, so ``()`` is the empty partition.  Generalized
partitions are non-increasing integer tuples of a fixed length ``n`` whose
entries may be negative; they keep their zeros because the last entry
matters for the bilateral formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

Partition = tuple
GenPartition = tuple


class PartitionError(ValueError):
    pass


def partition(parts: Sequence[int]) -> Partition:
    """Validate ``parts`` and return the normalized tuple."""
    parts = tuple(int(p) for p in parts)
    for a, b in zip(parts, parts[1:]):
        if a < b:
            raise PartitionError(f"parts not non-increasing: {parts}")
    if parts and parts[-1] < 0:
        raise PartitionError(f"negative part in partition: {parts}")
    return strip(parts)


def gen_partition(parts: Sequence[int]) -> GenPartition:
    parts = tuple(int(p) for p in parts)
    for a, b in zip(parts, parts[1:]):
        if a < b:
            raise PartitionError(f"parts not non-increasing: {parts}")
    return parts


def strip(parts: Sequence[int]) -> Partition:
    parts = tuple(parts)
    end = len(parts)
    while end and parts[end - 1] == 0:
        end -= 1
    return parts[:end]


def pad(lam: Sequence[int], n: int) -> tuple:
    if len(lam) > n:
        raise PartitionError(f"{tuple(lam)} has more than {n} parts")
    return tuple(lam) + (0,) * (n - len(lam))


def weight(lam: Sequence[int]) -> int:
    return sum(lam)


def conjugate(lam: Sequence[int]) -> Partition:
    lam = strip(lam)
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p > j) for j in range(lam[0]))


def nlam(lam: Sequence[int]) -> int:
    """``n(lam) = sum (i-1) lam_i``; also defined for generalized partitions."""
    return sum(i * p for i, p in enumerate(lam))


def nlam_conj(lam: Sequence[int]) -> int:
    """``n(lam')`` computed row by row as ``sum lam_i (lam_i - 1) / 2``."""
    return sum(p * (p - 1) // 2 for p in lam)


def cells(lam: Sequence[int]) -> list[tuple[int, int]]:
    """Cells ``(i, j)`` (0-based row, column) of the diagram."""
    return [(i, j) for i, p in enumerate(lam) for j in range(p)]


def arm_leg(lam: Sequence[int]) -> list[tuple[int, int]]:
    """Arm and leg length of every cell, in row-major order."""
    lam = strip(lam)
    conj = conjugate(lam)
    return [(lam[i] - j - 1, conj[j] - i - 1) for i, j in cells(lam)]


@dataclass(frozen=True)
class DiagramStats:
    conjugate: Partition
    nlam: int
    nlam_conj: int
    cells: tuple[tuple[int, int], ...]


def diagram_stats(lam: Sequence[int]) -> DiagramStats:
    lam = partition(lam)
    return DiagramStats(conjugate(lam), nlam(lam), nlam_conj(lam), tuple(arm_leg(lam)))


def complement(lam: Sequence[int], N: int, n: int) -> Partition:
    """Complement of ``lam`` in the rectangle ``(N^n)``."""
    lam = partition(lam)
    if len(lam) > n or (lam and lam[0] > N):
        raise PartitionError(f"{lam} does not fit in the ({N}^{n}) box")
    full = pad(lam, n)
    return strip(N - full[n - 1 - i] for i in range(n))


def neg_reverse(lam: Sequence[int]) -> GenPartition:
    """``-lam^R = (-lam_n, ..., -lam_1)``."""
    return tuple(-p for p in reversed(tuple(lam)))


def shift(lam: Sequence[int], a: int) -> GenPartition:
    return tuple(p + a for p in lam)


def dominates(lam: Sequence[int], mu: Sequence[int]) -> bool:
    """True when ``lam >= mu`` in dominance order (equal weights required)."""
    lam, mu = strip(lam), strip(mu)
    if weight(lam) != weight(mu):
        return False
    s1 = s2 = 0
    for i in range(max(len(lam), len(mu))):
        s1 += lam[i] if i < len(lam) else 0
        s2 += mu[i] if i < len(mu) else 0
        if s1 < s2:
            return False
    return True


def contains(lam: Sequence[int], mu: Sequence[int]) -> bool:
    """Diagram inclusion ``mu ⊆ lam``."""
    lam, mu = strip(lam), strip(mu)
    if len(mu) > len(lam):
        return False
    return all(m <= l for m, l in zip(mu, lam))


def partitions_of(w: int, max_len: int, max_part: int | None = None) -> Iterator[Partition]:
    """Partitions of ``w`` with at most ``max_len`` parts, reverse-lex order."""
    if w < 0 or max_len < 0:
        return
    if max_part is None:
        max_part = w

    def rec(rem: int, cap: int, slots: int) -> Iterator[tuple]:
        if rem == 0:
            yield ()
            return
        if slots == 0:
            return
        for first in range(min(rem, cap), 0, -1):
            if first * slots < rem:
                break
            for rest in rec(rem - first, first, slots - 1):
                yield (first,) + rest

    yield from rec(w, max_part, max_len)


def enumerate_partitions(
    n: int,
    max_weight: int | None = None,
    box: tuple[int, int] | None = None,
    gen_window: tuple[int, int] | None = None,
) -> list:
    """Canonical enumeration: graded by weight, reverse-lex within a weight.

    Exactly one bound must be given.  ``box=(N, n_rows)`` lists the
    partitions inside ``(N^n_rows)``; ``gen_window=(lo, hi)`` lists every
    length-``n`` generalized partition with ``hi >= lam_1 >= lam_n >= lo``.
    """
    given = [b is not None for b in (max_weight, box, gen_window)]
    if sum(given) != 1:
        raise ValueError("exactly one of max_weight, box, gen_window is required")
    if n < 0:
        raise ValueError("n must be non-negative")
    if max_weight is not None:
        if max_weight < 0:
            raise ValueError("max_weight must be non-negative")
        return [lam for w in range(max_weight + 1) for lam in partitions_of(w, n)]
    if box is not None:
        N, rows = box
        if N < 0 or rows < 0:
            raise ValueError("box dimensions must be non-negative")
        rows = min(rows, n)
        return [lam for w in range(N * rows + 1) for lam in partitions_of(w, rows, N)]
    lo, hi = gen_window
    if hi < lo:
        return []
    out = []
    width = hi - lo
    for w in range(width * n + 1):
        for lam in partitions_of(w, n, width):
            out.append(tuple(p + lo for p in pad(lam, n)))
    out.sort(key=lambda lam: (sum(lam), tuple(-p for p in lam)))
    return out


def horizontal_strips_inside(lam: Sequence[int], max_len: int) -> Iterator[Partition]:
    """All ``mu`` with ``lam/mu`` a horizontal strip and ``len(mu) <= max_len``."""
    lam = strip(lam)
    if len(lam) > max_len + 1:
        return
    rows = len(lam)
    ranges = []
    for i in range(rows):
        lower = lam[i + 1] if i + 1 < rows else 0
        ranges.append(range(lower, lam[i] + 1))
    if rows > max_len:
        ranges[rows - 1] = range(0, 1)

    def rec(i: int) -> Iterator[tuple]:
        if i == rows:
            yield ()
            return
        for v in ranges[i]:
            for rest in rec(i + 1):
                yield (v,) + rest

    for mu in rec(0):
        yield strip(mu)


def to_text(lam: Sequence[int]) -> str:
    return ",".join(str(p) for p in lam)


def from_text(text: str, gen: bool = False) -> tuple:
    text = text.strip()
    parts = [int(p) for p in text.split(",")] if text else []
    return gen_partition(parts) if gen else partition(parts)
