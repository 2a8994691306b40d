"""K-way LCP-aware merging of sorted string runs with a loser tree.

Every node of the tournament tree stores, next to the losing run, the LCP of
the loser's current string relative to the winner that passed through.  A
replayed candidate arrives with its LCP relative to the same reference
string, so most comparisons are decided by comparing two integers:

  * candidate LCP > stored LCP: the candidate wins, nothing is inspected;
  * candidate LCP < stored LCP: the stored loser wins, nothing is inspected;
  * equal LCPs: characters are compared starting at the shared length.

Only the third case touches characters, which bounds the total number of
character comparisons by m*ceil(log2 K) plus the total growth of per-string
LCP values between run entry and merged output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .strings import LcpArray, StringSet, StringSetError, compute_lcp, validate_lcp_array


@dataclass
class MergeResult:
    strings: StringSet
    lcps: LcpArray
    charcmp: int
    # (run index, position within run) per output slot, for carrying payloads.
    sources: list[tuple[int, int]]


def _first_mismatch(a: bytes, b: bytes, start: int) -> int:
    """Smallest i >= start with a[i] != b[i], or min(len) when none differs.

    Chunked slice comparisons keep long shared prefixes at memcmp speed; the
    reported character-comparison counts are unaffected.
    """
    n = min(len(a), len(b))
    i = start
    chunk = 32
    while i < n:
        hi = min(i + chunk, n)
        if a[i:hi] == b[i:hi]:
            i = hi
            chunk = min(chunk * 4, 1 << 16)
        elif hi - i <= 8:
            while a[i] == b[i]:
                i += 1
            return i
        else:
            chunk = (hi - i) // 2
    return n


class LcpLoserTree:
    """Loser tree over K runs of (strings, lcps) with stable tie-breaking.

    K is padded to a power of two with exhausted sentinel runs; sentinels
    lose every comparison without inspecting characters.  Ties between equal
    strings go to the lower run index, which keeps merging stable.
    """

    __slots__ = ("k", "size", "runs", "run_lcps", "pos", "node_run",
                 "node_lcp", "winner", "winner_lcp", "charcmp", "aware")

    def __init__(
        self,
        runs: Sequence[tuple[Sequence[bytes], Sequence[int]]],
        *,
        aware: bool = True,
    ):
        self.aware = aware
        self.k = len(runs)
        size = 1
        while size < max(self.k, 1):
            size *= 2
        self.size = size
        self.runs: list[Sequence[bytes]] = [r[0] for r in runs]
        self.runs += [[] for _ in range(size - self.k)]
        self.run_lcps: list[Sequence[int]] = [r[1] for r in runs]
        self.run_lcps += [[] for _ in range(size - self.k)]
        self.pos = [0] * size
        # node_run/node_lcp for internal nodes 1..size-1.
        self.node_run = [-1] * size
        self.node_lcp = [0] * size
        self.winner = -1
        self.winner_lcp = 0
        self.charcmp = 0
        self._build()

    def _current(self, run: int) -> bytes | None:
        seq = self.runs[run]
        p = self.pos[run]
        return seq[p] if p < len(seq) else None

    def _compare(
        self, run_a: int, lcp_a: int, run_b: int, lcp_b: int
    ) -> tuple[int, int, int, int]:
        """Resolve two contenders; returns (winner, winner_lcp, loser, loser_lcp).

        Both LCP values refer to the same reference string, so unequal values
        decide for free; equal values fall back to character comparison
        starting at the common length.
        """
        a = self._current(run_a)
        b = self._current(run_b)
        if a is None:
            return run_b, lcp_b, run_a, 0
        if b is None:
            return run_a, lcp_a, run_b, 0
        if lcp_a != lcp_b:
            if lcp_a > lcp_b:
                return run_a, lcp_a, run_b, lcp_b
            return run_b, lcp_b, run_a, lcp_a
        h = lcp_a
        n = min(len(a), len(b))
        i = _first_mismatch(a, b, h)
        self.charcmp += i - h + 1
        if i < n:
            a_smaller = a[i] < b[i]
        elif len(a) != len(b):
            a_smaller = len(a) < len(b)
        else:
            a_smaller = run_a < run_b  # equal strings: stable by run index
        if not self.aware:
            # Ordinary (non LCP-aware) tournament: remember nothing, so every
            # future comparison starts from character 0 again.
            i = 0
        if a_smaller:
            return run_a, lcp_a, run_b, i
        return run_b, lcp_b, run_a, i

    def _build(self) -> None:
        # Play the initial tournament bottom-up; every contender enters with
        # LCP 0 since no reference string has been output yet.
        level = [(r, 0) for r in range(self.size)]
        base = self.size // 2
        while base >= 1:
            nxt = []
            for j in range(base):
                wa, la = level[2 * j]
                wb, lb = level[2 * j + 1]
                w, wl, lo, ll = self._compare(wa, la, wb, lb)
                self.node_run[base + j] = lo
                self.node_lcp[base + j] = ll
                nxt.append((w, wl))
            level = nxt
            base //= 2
        self.winner, self.winner_lcp = level[0]

    def pop(self) -> tuple[bytes, int, int, int]:
        """Extract the smallest string; returns (string, lcp, run, pos)."""
        run = self.winner
        s = self._current(run)
        assert s is not None, "pop on exhausted tree"
        lcp = self.winner_lcp
        p = self.pos[run]
        self.pos[run] = p + 1

        # Replay from the winner's leaf to the root.  The replacement enters
        # with its run-local LCP, which is relative to the string just output
        # (its predecessor in the same run).
        if self.aware and self.pos[run] < len(self.runs[run]):
            cand_lcp = self.run_lcps[run][self.pos[run]]
        else:
            cand_lcp = 0
        cand_run = run
        node = (self.size + run) // 2
        while node >= 1:
            w, wl, lo, ll = self._compare(
                cand_run, cand_lcp, self.node_run[node], self.node_lcp[node]
            )
            self.node_run[node] = lo
            self.node_lcp[node] = ll
            cand_run, cand_lcp = w, wl
            node //= 2
        self.winner, self.winner_lcp = cand_run, cand_lcp
        return s, lcp, run, p


def multiway_merge(
    runs: Sequence[tuple[Sequence[bytes], Sequence[int]]],
    *,
    validate: bool = False,
    aware: bool = True,
) -> MergeResult:
    """Merge sorted runs with their LCP arrays into one sorted sequence.

    Each run is (strings, lcps) with lcps[0] a sentinel.  The output LCP
    array is produced as a by-product of the tournament; charcmp reports the
    characters compared.  With validate=True every input LCP array is checked
    against recomputation first; inconsistencies raise StringSetError.

    aware=False runs the same tournament as an ordinary loser tree: input
    LCPs are ignored, every comparison inspects characters from position 0,
    and the output LCP array is recomputed afterwards.  The comparison
    bound of the aware tree does not apply in that mode.
    """
    if validate:
        for k, (strs, lcps) in enumerate(runs):
            try:
                validate_lcp_array(strs, lcps)
            except StringSetError as e:
                raise StringSetError("run %d: %s" % (k, e)) from None

    total = sum(len(r[0]) for r in runs)
    if len(runs) == 1:
        strs, lcps = list(runs[0][0]), runs[0][1]
        if aware:
            out_lcps = list(lcps)
        else:
            out_lcps = [0] + [
                compute_lcp(strs[i - 1], strs[i]) for i in range(1, len(strs))
            ]
        if out_lcps:
            out_lcps[0] = 0
        return MergeResult(
            StringSet(strs, validate=False),
            out_lcps,
            0,
            [(0, i) for i in range(len(strs))],
        )

    tree = LcpLoserTree(runs, aware=aware)
    out: list[bytes] = []
    out_lcp: list[int] = []
    sources: list[tuple[int, int]] = []
    for _ in range(total):
        s, lcp, run, pos = tree.pop()
        out.append(s)
        out_lcp.append(lcp)
        sources.append((run, pos))
    if not aware:
        out_lcp = [0] + [compute_lcp(out[i - 1], out[i]) for i in range(1, len(out))]
    if out_lcp:
        out_lcp[0] = 0
    return MergeResult(StringSet(out, validate=False), out_lcp, tree.charcmp, sources)


def merge_comparison_bound(
    runs: Sequence[tuple[Sequence[bytes], Sequence[int]]],
    result: MergeResult,
) -> int:
    """The m*ceil(log2 K) + delta-L budget for a merge instance.

    delta-L is the exact total increase of per-string LCP entries between the
    input runs and the merged output; sentinel entries count as zero.
    """
    m = len(result.lcps)
    k = max(1, len(runs))
    log_k = (k - 1).bit_length()  # ceil(log2 k)
    delta_l = sum(result.lcps) - sum(sum(r[1][1:]) for r in runs)
    return m * log_k + delta_l
