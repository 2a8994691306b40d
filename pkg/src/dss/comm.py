"""Simulated distributed machine: p PE workers with exact byte accounting.

Every PE runs as a thread; communication goes through per-pair FIFO queues,
so receives are addressed by source rank and the outcome of a run depends
only on inputs and seeds, never on thread scheduling.  Counters record, per
PE and per phase label, the bytes sent, bytes received, and messages sent.

Counted bytes are payload data volume: a point-to-point message counts its
byte-string length, collectives moving several blocks count the sum of block
lengths, and reduction values are accounted at their pickled size.  Message
framing (block boundaries, source ranks) is carried out of band, mirroring
the usual machine model where such metadata is part of the call, not the
data.  An optional fixed per-message envelope models startup cost
qualitatively and defaults to 0.

Collectives follow classic log-p schedules: binomial trees for broadcast,
gather, and reduce, and a dissemination allgather under which every PE
receives exactly p-1 blocks.  Personalized all-to-all is delivered directly;
the local block never touches the network and is not counted.
"""

from __future__ import annotations

import pickle
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence


class CommError(Exception):
    pass


class DeadlockError(CommError):
    """A receive waited longer than the world's timeout."""


class WorldAborted(CommError):
    """A worker failed; carries the failing rank and original error."""

    def __init__(self, rank: int, cause: BaseException):
        super().__init__("PE %d failed: %r" % (rank, cause))
        self.rank = rank
        self.cause = cause


class _Aborted(Exception):
    """Internal: unwinds workers once the world is going down."""


@dataclass
class PhaseCounts:
    sent: int = 0
    received: int = 0
    messages: int = 0


@dataclass
class VolumeReport:
    """Per-PE, per-phase traffic snapshot of a completed run."""

    per_pe: list[dict[str, PhaseCounts]]

    def phases(self) -> list[str]:
        seen: dict[str, None] = {}
        for c in self.per_pe:
            for ph in c:
                seen.setdefault(ph)
        return list(seen)

    def total_sent(self, phase: str | None = None) -> int:
        return sum(
            c.sent
            for counts in self.per_pe
            for ph, c in counts.items()
            if phase is None or ph == phase
        )

    def total_received(self, phase: str | None = None) -> int:
        return sum(
            c.received
            for counts in self.per_pe
            for ph, c in counts.items()
            if phase is None or ph == phase
        )

    def bottleneck(self, phase: str | None = None) -> int:
        """max over PEs of sent+received traffic within a phase."""
        best = 0
        for counts in self.per_pe:
            here = sum(
                c.sent + c.received
                for ph, c in counts.items()
                if phase is None or ph == phase
            )
            best = max(best, here)
        return best

    def bytes_per_string(self, n: int, phase: str | None = None) -> float:
        return self.total_sent(phase) / n if n else 0.0


class CommWorld:
    """A group of p simulated PEs with routed channels and byte counters."""

    def __init__(self, p: int, *, envelope_bytes: int = 0, timeout: float = 60.0):
        if p < 1:
            raise ValueError("need at least one PE")
        self.p = p
        self.envelope = envelope_bytes
        self.timeout = timeout
        self._queues = [[queue.Queue() for _src in range(p)] for _dst in range(p)]
        self.counters: list[dict[str, PhaseCounts]] = [{} for _ in range(p)]
        self._abort = threading.Event()
        self._failures: list[tuple[int, BaseException]] = []
        self._lock = threading.Lock()

    def run(self, program: Callable[["PE"], Any]) -> list[Any]:
        """Run one worker per PE to completion and collect results by rank.

        A worker exception aborts the whole world; the lowest failing rank is
        reported.  Counters accumulate per run.
        """
        results: list[Any] = [None] * self.p
        pes = [PE(self, r) for r in range(self.p)]

        def work(rank: int) -> None:
            try:
                results[rank] = program(pes[rank])
            except _Aborted:
                pass
            except BaseException as e:  # noqa: BLE001 - reported via WorldAborted
                with self._lock:
                    self._failures.append((rank, e))
                self._abort.set()

        threads = [
            threading.Thread(target=work, args=(r,), name="pe-%d" % r)
            for r in range(self.p)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if self._failures:
            rank, cause = min(self._failures, key=lambda f: f[0])
            raise WorldAborted(rank, cause)
        return results

    def volume_report(self) -> VolumeReport:
        return VolumeReport(
            [
                {ph: PhaseCounts(c.sent, c.received, c.messages) for ph, c in counts.items()}
                for counts in self.counters
            ]
        )


class PE:
    """Per-worker handle: rank, point-to-point messaging, and collectives."""

    def __init__(self, world: CommWorld, rank: int):
        self.world = world
        self.rank = rank
        self.p = world.p
        self._phase = "default"

    # -- phase tagging ----------------------------------------------------

    def set_phase(self, phase: str) -> None:
        self._phase = phase

    def phase(self, phase: str) -> "_PhaseContext":
        return _PhaseContext(self, phase)

    def _counts(self) -> PhaseCounts:
        counts = self.world.counters[self.rank]
        c = counts.get(self._phase)
        if c is None:
            c = counts[self._phase] = PhaseCounts()
        return c

    # -- transport --------------------------------------------------------

    def _transmit(self, dst: int, obj: Any, nbytes: int) -> None:
        if dst == self.rank:
            raise CommError("self-sends are delivered locally, not routed")
        c = self._counts()
        c.sent += nbytes + self.world.envelope
        c.messages += 1
        self.world._queues[dst][self.rank].put((obj, nbytes))

    def _receive(self, src: int) -> Any:
        q = self.world._queues[self.rank][src]
        waited = 0.0
        while True:
            if self.world._abort.is_set():
                raise _Aborted()
            try:
                obj, nbytes = q.get(timeout=0.02)
                break
            except queue.Empty:
                waited += 0.02
                if waited >= self.world.timeout:
                    raise DeadlockError(
                        "PE %d timed out receiving from %d (phase %r)"
                        % (self.rank, src, self._phase)
                    ) from None
        c = self._counts()
        c.received += nbytes + self.world.envelope
        return obj

    # -- point to point ---------------------------------------------------

    def send(self, dst: int, payload: bytes) -> None:
        self._transmit(dst, payload, len(payload))

    def recv(self, src: int) -> bytes:
        return self._receive(src)

    # -- collectives ------------------------------------------------------

    def broadcast(self, root: int, payload: bytes | None) -> bytes:
        """Binomial-tree broadcast; every PE returns the root's payload."""
        if self.p == 1:
            assert payload is not None
            return payload
        rel = (self.rank - root) % self.p
        mask = 1
        data = payload
        while mask < self.p:
            if rel & mask:
                data = self.recv((self.rank - mask) % self.p)
                break
            mask <<= 1
        assert data is not None
        mask >>= 1
        while mask > 0:
            if rel + mask < self.p:
                self.send((self.rank + mask) % self.p, data)
            mask >>= 1
        return data

    def gather(self, root: int, payload: bytes) -> list[bytes] | None:
        """Binomial-tree gather; the root returns all blocks by rank."""
        rel = (self.rank - root) % self.p
        blocks = {rel: payload}
        mask = 1
        while mask < self.p:
            if rel & mask:
                dst = (self.rank - mask) % self.p
                self._transmit(dst, blocks, sum(len(b) for b in blocks.values()))
                return None
            src_rel = rel | mask
            if src_rel < self.p:
                blocks.update(self._receive((src_rel + root) % self.p))
            mask <<= 1
        return [blocks[(r - root) % self.p] for r in range(self.p)]

    def allgather(self, payload: bytes) -> list[bytes]:
        """Dissemination allgather: log p rounds, p-1 blocks received per PE."""
        mine = [payload]  # blocks for ranks rank, rank+1, ... (mod p)
        k = 1
        while k < self.p:
            count = min(k, self.p - k)
            dst = (self.rank - k) % self.p
            src = (self.rank + k) % self.p
            out = mine[:count]
            self._transmit(dst, out, sum(len(b) for b in out))
            mine.extend(self._receive(src))
            k <<= 1
        return [mine[(r - self.rank) % self.p] for r in range(self.p)]

    def reduce(self, value: Any, op: Callable[[Any, Any], Any], root: int = 0) -> Any:
        """Binomial-tree reduction; returns the folded value at root, else None.

        Values are accounted at their pickled size.
        """
        rel = (self.rank - root) % self.p
        acc = value
        mask = 1
        while mask < self.p:
            if rel & mask:
                self._transmit((self.rank - mask) % self.p, acc, len(pickle.dumps(acc)))
                return None
            src_rel = rel | mask
            if src_rel < self.p:
                other = self._receive((src_rel + root) % self.p)
                acc = op(acc, other)
            mask <<= 1
        return acc

    def _broadcast_obj(self, root: int, obj: Any) -> Any:
        """broadcast() for arbitrary values, accounted at pickled size."""
        if self.p == 1:
            return obj
        rel = (self.rank - root) % self.p
        mask = 1
        while mask < self.p:
            if rel & mask:
                obj = self._receive((self.rank - mask) % self.p)
                break
            mask <<= 1
        mask >>= 1
        while mask > 0:
            if rel + mask < self.p:
                dst = (self.rank + mask) % self.p
                self._transmit(dst, obj, len(pickle.dumps(obj)))
            mask >>= 1
        return obj

    def allreduce(self, value: Any, op: Callable[[Any, Any], Any]) -> Any:
        return self._broadcast_obj(0, self.reduce(value, op, root=0))

    def prefix_sum(self, value: Any) -> Any:
        """Exclusive prefix sum over ranks (0 for rank 0); pickled-size accounting."""
        blocks = self.allgather(pickle.dumps(value))
        acc: Any = 0
        for r in range(self.rank):
            acc = acc + pickle.loads(blocks[r])
        return acc

    def barrier(self) -> None:
        self.allgather(b"")

    def alltoallv(self, buffers: Sequence[bytes]) -> list[bytes]:
        """Personalized all-to-all; buffer i->j arrives at j attributed to i.

        Delivery is direct and order-preserving.  The local block does not
        cross the network and is not counted.
        """
        if len(buffers) != self.p:
            raise CommError("alltoallv needs exactly p buffers")
        for dst in range(self.p):
            if dst != self.rank:
                self.send(dst, buffers[dst])
        out: list[bytes] = []
        for src in range(self.p):
            out.append(buffers[self.rank] if src == self.rank else self.recv(src))
        return out


class _PhaseContext:
    def __init__(self, pe: PE, phase: str):
        self.pe = pe
        self.new = phase
        self.old = pe._phase

    def __enter__(self) -> PE:
        self.old = self.pe._phase
        self.pe.set_phase(self.new)
        return self.pe

    def __exit__(self, *exc: object) -> None:
        self.pe.set_phase(self.old)


def spawn(
    p: int,
    program: Callable[[PE], Any],
    *,
    envelope_bytes: int = 0,
    timeout: float = 60.0,
) -> tuple[list[Any], VolumeReport]:
    """Run `program` on a fresh p-PE world; returns (results, volume report)."""
    world = CommWorld(p, envelope_bytes=envelope_bytes, timeout=timeout)
    results = world.run(program)
    return results, world.volume_report()


@dataclass
class PhaseTimer:
    """Wall-clock seconds per phase label, measured inside one PE."""

    seconds: dict[str, float] = field(default_factory=dict)

    def measure(self, phase: str) -> "_TimerContext":
        return _TimerContext(self, phase)


class _TimerContext:
    def __init__(self, timer: PhaseTimer, phase: str):
        self.timer = timer
        self.phase = phase

    def __enter__(self) -> None:
        self.t0 = time.perf_counter()

    def __exit__(self, *exc: object) -> None:
        dt = time.perf_counter() - self.t0
        self.timer.seconds[self.phase] = self.timer.seconds.get(self.phase, 0.0) + dt
