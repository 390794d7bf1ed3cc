"""Small exact combinatorial helpers.

Set partitions are produced as restricted growth strings (RGS): a list
``a`` with ``a[0] == 0`` and ``a[i] <= 1 + max(a[:i])``.  Integer
partitions of ``m`` are produced as multiplicity profiles
``(s_1, ..., s_m)`` with ``sum(i * s_i) == m``.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb, factorial, prod
from typing import Iterator, Sequence

from .errors import InvalidProfile


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    """Bell number B_n via the Bell triangle."""
    if n < 0:
        raise ValueError("n must be non-negative")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def set_partitions(n: int) -> Iterator[list[int]]:
    """Yield every set partition of ``{0..n-1}`` as an RGS (the list is reused)."""
    if n == 0:
        yield []
        return
    a = [0] * n
    m = [0] * n  # m[i] = max(a[:i+1])
    while True:
        yield a
        i = n - 1
        while i > 0 and a[i] == m[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        m[i] = max(m[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            m[j] = m[i]


def rgs_blocks(rgs: Sequence[int]) -> list[list[int]]:
    nb = max(rgs) + 1 if len(rgs) else 0
    blocks: list[list[int]] = [[] for _ in range(nb)]
    for i, b in enumerate(rgs):
        blocks[b].append(i)
    return blocks


def integer_partitions(m: int) -> Iterator[tuple[int, ...]]:
    """Yield integer partitions of ``m`` as multiplicity profiles of length ``m``.

    The empty partition of 0 is yielded as ``()``.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if m == 0:
        yield ()
        return

    def parts(rem: int, cap: int) -> Iterator[list[int]]:
        if rem == 0:
            yield []
            return
        for p in range(min(rem, cap), 0, -1):
            for tail in parts(rem - p, p):
                yield [p] + tail

    for ps in parts(m, m):
        s = [0] * m
        for p in ps:
            s[p - 1] += 1
        yield tuple(s)


def check_profile(sigma: Sequence[int], total: int | None = None) -> tuple[int, ...]:
    """Validate a multiplicity profile and return it as a tuple."""
    sigma = tuple(int(x) for x in sigma)
    if any(x < 0 for x in sigma):
        raise InvalidProfile(f"negative multiplicity in {sigma}")
    if total is not None and profile_norm(sigma) != total:
        raise InvalidProfile(f"profile {sigma} does not sum to {total}")
    return sigma


def profile_norm(sigma: Sequence[int]) -> int:
    """``||sigma|| = sum_i i * s_i``."""
    return sum((i + 1) * s for i, s in enumerate(sigma))


def profile_size(sigma: Sequence[int]) -> int:
    """``|sigma| = sum_i s_i``, the number of blocks."""
    return sum(sigma)


def partition_count(sigma: Sequence[int]) -> int:
    """Number of set partitions of ``{1..||sigma||}`` with block profile ``sigma``."""
    sigma = check_profile(sigma)
    n = profile_norm(sigma)
    den = prod(factorial(i + 1) ** s * factorial(s) for i, s in enumerate(sigma))
    return factorial(n) // den


def profile_of_blocks(sizes: Sequence[int], length: int | None = None) -> tuple[int, ...]:
    length = max(sizes, default=0) if length is None else length
    s = [0] * length
    for b in sizes:
        s[b - 1] += 1
    return tuple(s)


def multinomial(*ks: int) -> int:
    out, acc = 1, 0
    for k in ks:
        acc += k
        out *= comb(acc, k)
    return out


def falling(n: int, k: int) -> int:
    return prod(range(n - k + 1, n + 1)) if k > 0 else 1

