import operator
import random

import pytest

from dss.comm import (
    CommWorld,
    DeadlockError,
    PhaseCounts,
    WorldAborted,
    spawn,
)


class TestSpawn:
    def test_single_pe_returns_rank(self):
        results, _ = spawn(1, lambda pe: pe.rank)
        assert results == [0]

    def test_four_pes_return_ranks(self):
        results, _ = spawn(4, lambda pe: pe.rank)
        assert results == [0, 1, 2, 3]

    def test_ring_exchange(self):
        def program(pe):
            pe.send((pe.rank + 1) % 3, bytes([pe.rank]))
            return pe.recv((pe.rank - 1) % 3)[0]

        results, _ = spawn(3, program)
        assert results == [2, 0, 1]

    def test_worker_failure_reports_rank(self):
        def program(pe):
            if pe.rank == 2:
                raise ValueError("boom")
            pe.barrier()
            pe.barrier()

        with pytest.raises(WorldAborted) as exc:
            spawn(4, program)
        assert exc.value.rank == 2
        assert isinstance(exc.value.cause, ValueError)

    def test_mismatched_collective_deadlocks(self):
        def program(pe):
            if pe.rank == 0:
                return None  # never joins the barrier
            pe.barrier()

        with pytest.raises(WorldAborted) as exc:
            spawn(3, program, timeout=0.2)
        assert isinstance(exc.value.cause, DeadlockError)


class TestAlltoallv:
    def test_two_pe_swap(self):
        def program(pe):
            bufs = [b"", b"ab"] if pe.rank == 0 else [b"cd", b""]
            return pe.alltoallv(bufs)

        results, report = spawn(2, program)
        assert results[0] == [b"", b"cd"]
        assert results[1] == [b"ab", b""]
        # Only the off-diagonal blocks cross the network.
        assert report.total_sent() == 4

    def test_all_empty_zero_bytes(self):
        results, report = spawn(3, lambda pe: pe.alltoallv([b""] * 3))
        assert all(r == [b"", b"", b""] for r in results)
        assert report.total_sent() == 0
        assert report.total_received() == 0

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_receipt_is_transpose(self, p):
        rng = random.Random(p)
        matrix = [
            [bytes(rng.randrange(1, 256) for _ in range(rng.randrange(0, 9))) for _ in range(p)]
            for _ in range(p)
        ]

        results, _ = spawn(p, lambda pe: pe.alltoallv(matrix[pe.rank]))
        for dst in range(p):
            assert results[dst] == [matrix[src][dst] for src in range(p)]

    def test_envelope_counted_per_message(self):
        _, report = spawn(2, lambda pe: pe.alltoallv([b"", b"x"] if pe.rank == 0 else [b"y", b""]),
                          envelope_bytes=10)
        # one off-diagonal message each way: (1+10) * 2
        assert report.total_sent() == 22


class TestCollectives:
    def test_broadcast(self):
        results, _ = spawn(4, lambda pe: pe.broadcast(0, b"xyz" if pe.rank == 0 else None))
        assert results == [b"xyz"] * 4

    def test_broadcast_nontrivial_root(self):
        results, _ = spawn(5, lambda pe: pe.broadcast(3, b"q" if pe.rank == 3 else None))
        assert results == [b"q"] * 5

    def test_reduce_max_over_ranks(self):
        results, _ = spawn(6, lambda pe: pe.reduce(pe.rank, max))
        assert results[0] == 5
        assert all(r is None for r in results[1:])

    def test_allreduce_sum(self):
        results, _ = spawn(7, lambda pe: pe.allreduce(pe.rank, operator.add))
        assert results == [21] * 7

    @pytest.mark.parametrize("p", [1, 3, 4, 8])
    def test_allgather(self, p):
        results, _ = spawn(p, lambda pe: pe.allgather(bytes([65 + pe.rank])))
        want = [bytes([65 + r]) for r in range(p)]
        assert results == [want] * p

    def test_allgather_one_byte_p8_receives_seven(self):
        _, report = spawn(8, lambda pe: pe.allgather(bytes([pe.rank])))
        for counts in report.per_pe:
            assert sum(c.received for c in counts.values()) == 7

    def test_gather(self):
        results, _ = spawn(5, lambda pe: pe.gather(2, bytes([pe.rank])))
        assert results[2] == [bytes([r]) for r in range(5)]
        assert all(results[r] is None for r in range(5) if r != 2)

    def test_prefix_sum_exclusive(self):
        results, _ = spawn(5, lambda pe: pe.prefix_sum(pe.rank + 1))
        assert results == [0, 1, 3, 6, 10]


class TestAccounting:
    def test_conservation_global(self):
        def program(pe):
            pe.allgather(b"z" * (pe.rank + 1))
            pe.alltoallv([bytes(pe.rank + d) for d in range(pe.p)])
            pe.allreduce(pe.rank, operator.add)

        _, report = spawn(4, program)
        assert report.total_sent() == report.total_received()

    def test_phase_attribution(self):
        def program(pe):
            with pe.phase("one"):
                pe.allgather(b"a")
            with pe.phase("two"):
                pe.alltoallv([b"bb"] * pe.p)

        _, report = spawn(3, program)
        assert set(report.phases()) == {"one", "two"}
        assert report.total_sent("one") == report.total_received("one")
        assert report.total_sent("two") == 3 * 2 * 2  # 3 PEs x 2 off-diagonal blocks x 2 bytes

    def test_determinism_across_runs(self):
        def program(pe):
            rng = random.Random(pe.rank)
            data = bytes(rng.randrange(256) for _ in range(rng.randrange(40)))
            got = pe.alltoallv([data] * pe.p)
            return b"".join(got)

        r1, rep1 = spawn(4, program)
        r2, rep2 = spawn(4, program)
        assert r1 == r2
        assert rep1 == rep2

    def test_bottleneck_is_max_over_pes(self):
        def program(pe):
            # PE 0 ships a big block to everyone else.
            bufs = [b"x" * 100 if pe.rank == 0 and d != 0 else b"" for d in range(pe.p)]
            pe.alltoallv(bufs)

        _, report = spawn(4, program)
        assert report.bottleneck() == 300  # PE 0: 300 sent, 0 received
        assert report.total_sent() == 300

    def test_counts_are_dataclasses(self):
        _, report = spawn(2, lambda pe: pe.barrier())
        assert isinstance(report.per_pe[0]["default"], PhaseCounts)


class TestWorldValidation:
    def test_p_must_be_positive(self):
        with pytest.raises(ValueError):
            CommWorld(0)
