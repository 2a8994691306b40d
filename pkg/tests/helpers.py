"""Shared oracles and instance generators for the test suite.

Everything here is deliberately independent of the library's sorting and
merging paths: plain pairwise comparisons, Python's built-in stable sort,
and brute-force scans over all pairs.
"""

from __future__ import annotations

import random


def oracle_lcp(a: bytes, b: bytes) -> int:
    n = min(len(a), len(b))
    for i in range(n):
        if a[i] != b[i]:
            return i
    return n


def oracle_sort(items: list[bytes]) -> list[bytes]:
    return sorted(items)


def oracle_sort_stable(items: list[bytes]) -> tuple[list[bytes], list[int]]:
    """Stable comparison sort returning (sorted items, permutation)."""
    order = sorted(range(len(items)), key=lambda i: items[i])
    return [items[i] for i in order], order


def oracle_lcp_array(sorted_items: list[bytes]) -> list[int]:
    if not sorted_items:
        return []
    return [0] + [
        oracle_lcp(sorted_items[i - 1], sorted_items[i])
        for i in range(1, len(sorted_items))
    ]


def oracle_dpre_bruteforce(items: list[bytes]) -> list[int]:
    """dpre per string via the defining max over all pairs."""
    out = []
    for i, s in enumerate(items):
        best = 0
        for j, t in enumerate(items):
            if i == j:
                continue
            best = max(best, oracle_lcp(s, t))
        out.append(min(best + 1, len(s) + 1) if len(items) > 1 else 1)
    return out


def oracle_dpre_sorted(items: list[bytes]) -> list[int]:
    """dpre per string via sorted neighbours (fast oracle for larger n)."""
    order = sorted(range(len(items)), key=lambda i: items[i])
    srt = [items[i] for i in order]
    lcps = oracle_lcp_array(srt)
    dpre = [0] * len(items)
    for k, i in enumerate(order):
        left = lcps[k] if k >= 1 else 0
        right = lcps[k + 1] if k + 1 < len(srt) else 0
        d = max(left, right) + 1
        dpre[i] = max(1, min(d, len(srt[k]) + 1))
    return dpre


def random_strings(
    rng: random.Random,
    n: int,
    sigma: int = 26,
    max_len: int = 64,
    min_len: int = 1,
    dup_fraction: float = 0.0,
) -> list[bytes]:
    """Random byte strings over alphabet 1..sigma.

    With dup_fraction > 0 a pool of that relative size is sampled with
    replacement, yielding duplicate-heavy inputs.
    """
    def one() -> bytes:
        length = rng.randint(min_len, max_len)
        return bytes(rng.randint(1, sigma) for _ in range(length))

    if dup_fraction > 0:
        pool = [one() for _ in range(max(1, int(n * dup_fraction)))]
        return [rng.choice(pool) for _ in range(n)]
    return [one() for _ in range(n)]


def skewed_strings(rng: random.Random, n: int, sigma: int = 26) -> list[bytes]:
    """Length-skewed inputs: mostly short strings plus a few very long ones."""
    out = []
    for _ in range(n):
        if rng.random() < 0.15:
            length = rng.randint(200, 400)
        else:
            length = rng.randint(1, 8)
        out.append(bytes(rng.randint(1, sigma) for _ in range(length)))
    return out


def split_round_robin(items: list[bytes], p: int) -> list[list[bytes]]:
    return [items[r::p] for r in range(p)]


def bucket_balance_instance(parts_sorted, p, v, mode):
    """Offline regular-sampling pipeline for the bucket-balance theorems.

    Takes per-PE sorted locals, samples each (string or char mode), sorts the
    gathered sample, reads splitters off it, and returns the global
    per-bucket string and character counts.
    """
    from dss.partition import (
        compute_buckets,
        sample_char_based,
        sample_string_based,
        splitters_from_sorted_sample,
    )

    samples = []
    for part in parts_sorted:
        if mode == "char":
            samples.extend(sample_char_based(part, v))
        else:
            samples.extend(sample_string_based(part, v))
    splitters = splitters_from_sorted_sample(sorted(samples), p, v)
    string_counts = [0] * p
    char_counts = [0] * p
    for part in parts_sorted:
        bounds = compute_buckets(part, splitters)
        for b in range(p):
            string_counts[b] += bounds[b + 1] - bounds[b]
            char_counts[b] += sum(len(s) for s in part[bounds[b] : bounds[b + 1]])
    return string_counts, char_counts, splitters
