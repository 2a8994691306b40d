"""Benchmark harness: run sorters on the simulated machine, verify, report.

Every experiment spawns a fresh world, runs one algorithm variant, verifies
the outcome against independent oracles, and emits one metrics record.  The
CSV schema is fixed:

    algorithm,p,n,N,D,r,phase,seconds,bytes_sent,bytes_per_string,rounds,verdict

Sweep rows carry phase="total"; the JSON mirror additionally breaks traffic
and wall time down per phase.  Wall times are reported for orientation only;
simulated PEs on one host say nothing about cluster timing.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

from .comm import CommWorld
from .datagen import DNConfig, gen_dn, gen_skewed, gen_suffixes, ingest_lines
from .sorters import VARIANTS, SortConfig, SortOutcome, run_variant
from .strings import StringSet, compute_lcp

CSV_COLUMNS = [
    "algorithm", "p", "n", "N", "D", "r", "phase", "seconds",
    "bytes_sent", "bytes_per_string", "rounds", "verdict",
]


@dataclass
class ExperimentConfig:
    algorithm: str
    procs: int
    input: str = "dn"  # dn | skewed | suffixes | file:PATH | dna:PATH
    ratio: float = 0.0
    length: int = 500
    strings_per_pe: int = 100
    sigma: int = 26
    sampling: str = "string"
    oversample: int | None = None
    epsilon: float = 1.0
    golomb: bool | None = None  # None: decided by the algorithm name
    seed: int = 0
    reps: int = 1
    timeout: float = 300.0

    def __post_init__(self) -> None:
        if self.algorithm not in VARIANTS:
            raise ValueError(
                "unknown algorithm %r (choose from %s)" % (self.algorithm, ", ".join(VARIANTS))
            )
        if self.procs < 1:
            raise ValueError("need at least one PE")


@dataclass
class MetricsRecord:
    algorithm: str
    p: int
    n: int
    total_chars: int
    distinguishing: int
    r: float | None
    seconds: float
    bytes_sent: int
    bytes_per_string: float
    bottleneck: int
    rounds: int
    verdict: str
    phases: dict[str, dict[str, float]] = field(default_factory=dict)

    def csv_row(self) -> list[str]:
        return [
            self.algorithm,
            str(self.p),
            str(self.n),
            str(self.total_chars),
            str(self.distinguishing),
            "" if self.r is None else repr(self.r),
            "total",
            repr(self.seconds),
            str(self.bytes_sent),
            repr(self.bytes_per_string),
            str(self.rounds),
            self.verdict,
        ]

    @classmethod
    def from_csv_row(cls, row: list[str]) -> "MetricsRecord":
        return cls(
            algorithm=row[0],
            p=int(row[1]),
            n=int(row[2]),
            total_chars=int(row[3]),
            distinguishing=int(row[4]),
            r=None if row[5] == "" else float(row[5]),
            seconds=float(row[7]),
            bytes_sent=int(row[8]),
            bytes_per_string=float(row[9]),
            bottleneck=0,  # JSON-only detail, not part of the CSV schema
            rounds=int(row[10]),
            verdict=row[11],
        )


def build_inputs(cfg: ExperimentConfig) -> list[StringSet]:
    """Per-PE input sets for an experiment configuration."""
    if cfg.input == "dn" or cfg.input == "skewed":
        dn = DNConfig(
            strings_per_pe=cfg.strings_per_pe,
            ratio=cfg.ratio,
            sigma=cfg.sigma,
            procs=cfg.procs,
            length=cfg.length,
            seed=cfg.seed,
        )
        gen = gen_skewed if cfg.input == "skewed" else gen_dn
        return [gen(dn, r) for r in range(cfg.procs)]
    if cfg.input == "suffixes":
        return gen_suffixes(
            cfg.strings_per_pe * cfg.procs, cfg.sigma, cfg.seed, cfg.procs
        )
    if cfg.input.startswith("file:"):
        return ingest_lines(cfg.input[5:], cfg.procs, filter="none")
    if cfg.input.startswith("dna:"):
        return ingest_lines(cfg.input[4:], cfg.procs, filter="dna")
    raise ValueError("unknown input spec %r" % cfg.input)


def _oracle_order(inputs: list[StringSet]) -> list[tuple[bytes, int, int]]:
    tagged = [
        (s, r, i) for r, part in enumerate(inputs) for i, s in enumerate(part)
    ]
    tagged.sort()
    return tagged


def _dpre_of_sorted(tagged: list[tuple[bytes, int, int]]) -> list[int]:
    n = len(tagged)
    dpre = [0] * n
    lcps = [0] * n
    for i in range(1, n):
        lcps[i] = compute_lcp(tagged[i - 1][0], tagged[i][0])
    for i in range(n):
        left = lcps[i]
        right = lcps[i + 1] if i + 1 < n else 0
        dpre[i] = max(1, min(max(left, right) + 1, len(tagged[i][0]) + 1))
    return dpre


def verify_outcomes(
    inputs: list[StringSet], outcomes: list[SortOutcome]
) -> tuple[bool, str]:
    """Check a run's outcomes against the original inputs.

    Verifies cross-PE boundary order, per-PE LCP arrays, origin/multiset
    preservation, and (for prefix outcomes) that the shipped prefixes rank
    exactly like the full strings and are never shorter than the true
    distinguishing prefix.  Returns (ok, diagnostic of first violation).
    """
    mode = outcomes[0].mode if outcomes else "full"

    # (a) boundaries between PEs, ties resolved by origin
    keyed = []
    for rank, out in enumerate(outcomes):
        if len(out.strings) != len(out.lcps) or len(out.strings) != len(out.origins):
            return False, "PE %d: outcome arrays disagree in length" % rank
        if out.strings:
            first = (out.strings[0], *out.origins[0])
            last = (out.strings[len(out.strings) - 1], *out.origins[-1])
            keyed.append((rank, first, last))
    for (ra, _fa, la), (rb, fb, _lb) in zip(keyed, keyed[1:]):
        if la > fb:
            return False, (
                "boundary violation between PE %d and PE %d: %r > %r"
                % (ra, rb, la, fb)
            )

    # (b) per-PE sortedness and LCP arrays
    for rank, out in enumerate(outcomes):
        strs = list(out.strings)
        for i in range(1, len(strs)):
            if strs[i - 1] > strs[i]:
                return False, "PE %d: not sorted at position %d" % (rank, i)
            want = compute_lcp(strs[i - 1], strs[i])
            if out.lcps[i] != want:
                return False, (
                    "PE %d: LCP[%d] = %d, expected %d" % (rank, i, out.lcps[i], want)
                )
        if out.lcps and out.lcps[0] != 0:
            return False, "PE %d: LCP sentinel not zero" % rank

    # (c) origin tags form exactly the input index set; full mode also
    # preserves the string multiset
    want_tags = {(r, i) for r, part in enumerate(inputs) for i in range(len(part))}
    got_tags = [t for out in outcomes for t in out.origins]
    if len(got_tags) != len(want_tags) or set(got_tags) != want_tags:
        return False, "origin tags do not cover the input exactly"
    if mode == "full":
        got = sorted(s for out in outcomes for s in out.strings)
        want = sorted(s for part in inputs for s in part)
        if got != want:
            return False, "string multiset not preserved"

    # (d) prefix outcomes: rank equivalence with the full-string oracle plus
    # prefix validity against true distinguishing prefix lengths
    if mode == "prefixes":
        oracle = _oracle_order(inputs)
        got_seq = [t for out in outcomes for t in out.origins]
        want_seq = [(r, i) for _, r, i in oracle]
        if got_seq != want_seq:
            k = next(i for i, (a, b) in enumerate(zip(got_seq, want_seq)) if a != b)
            return False, (
                "prefix rank order diverges from oracle at global position %d" % k
            )
        dpre_by_tag = {
            (r, i): d for (_, r, i), d in zip(oracle, _dpre_of_sorted(oracle))
        }
        for rank, out in enumerate(outcomes):
            for s, (src, idx) in zip(out.strings, out.origins):
                full = inputs[src][idx]
                if full[: len(s)] != s:
                    return False, (
                        "PE %d ships a non-prefix for origin (%d, %d)" % (rank, src, idx)
                    )
                if len(s) < len(full) and len(s) < dpre_by_tag[(src, idx)]:
                    return False, (
                        "PE %d ships a prefix shorter than the distinguishing "
                        "prefix for origin (%d, %d)" % (rank, src, idx)
                    )
    return True, "ok"


def run_experiment(cfg: ExperimentConfig, seed: int | None = None) -> MetricsRecord:
    """Execute one config on a fresh world; verify and record metrics."""
    seed = cfg.seed if seed is None else seed
    inputs = build_inputs(
        cfg if seed == cfg.seed else ExperimentConfig(**{**asdict(cfg), "seed": seed})
    )
    base = SortConfig(
        sampling=cfg.sampling,
        oversample=cfg.oversample,
        compression=True,
        epsilon=cfg.epsilon,
        golomb=bool(cfg.golomb),
        sigma=cfg.sigma,
        seed=seed,
    )

    world = CommWorld(cfg.procs, timeout=cfg.timeout)
    t0 = time.perf_counter()
    outcomes = world.run(
        lambda pe: run_variant(pe, cfg.algorithm, inputs[pe.rank], base)
    )
    elapsed = time.perf_counter() - t0
    report = world.volume_report()

    ok, diag = verify_outcomes(inputs, outcomes)

    n = sum(len(part) for part in inputs)
    total_chars = sum(len(s) for part in inputs for s in part)
    oracle = _oracle_order(inputs)
    distinguishing = sum(_dpre_of_sorted(oracle))

    phases: dict[str, dict[str, float]] = {}
    for ph in report.phases():
        secs = max((out.phase_seconds.get(ph, 0.0) for out in outcomes), default=0.0)
        phases[ph] = {
            "seconds": secs,
            "bytes_sent": report.total_sent(ph),
            "bytes_per_string": report.bytes_per_string(n, ph),
        }
    for out in outcomes:
        for ph, secs in out.phase_seconds.items():
            if ph not in phases:
                phases[ph] = {"seconds": 0.0, "bytes_sent": 0, "bytes_per_string": 0.0}
            phases[ph]["seconds"] = max(phases[ph]["seconds"], secs)

    record = MetricsRecord(
        algorithm=cfg.algorithm,
        p=cfg.procs,
        n=n,
        total_chars=total_chars,
        distinguishing=distinguishing,
        r=cfg.ratio if cfg.input in ("dn", "skewed") else None,
        seconds=elapsed,
        bytes_sent=report.total_sent(),
        bytes_per_string=report.bytes_per_string(n),
        bottleneck=report.bottleneck(),
        rounds=max((out.rounds for out in outcomes), default=0),
        verdict="pass" if ok else "fail: " + diag,
        phases=phases,
    )
    return record


def sweep(configs: list[ExperimentConfig]) -> list[MetricsRecord]:
    """Run a grid of configs; failures are recorded per row, the run goes on."""
    records = []
    for cfg in configs:
        for rep in range(cfg.reps):
            try:
                records.append(run_experiment(cfg, seed=cfg.seed + rep))
            except Exception as e:  # noqa: BLE001 - recorded per row
                records.append(
                    MetricsRecord(
                        algorithm=cfg.algorithm,
                        p=cfg.procs,
                        n=0,
                        total_chars=0,
                        distinguishing=0,
                        r=cfg.ratio if cfg.input in ("dn", "skewed") else None,
                        seconds=0.0,
                        bytes_sent=0,
                        bytes_per_string=0.0,
                        bottleneck=0,
                        rounds=0,
                        verdict="error: %r" % e,
                    )
                )
    return records


def write_csv(records: list[MetricsRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.csv_row())


def read_csv(path: str) -> list[MetricsRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS, "unexpected CSV schema"
    return [MetricsRecord.from_csv_row(row) for row in rows[1:]]


def write_json(records: list[MetricsRecord], path: str) -> None:
    with open(path, "w") as fh:
        json.dump([asdict(rec) for rec in records], fh, indent=2, sort_keys=True)


def _parse_bool(value: str) -> bool:
    if value in ("on", "true", "1", "yes"):
        return True
    if value in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError("expected on/off, got %r" % value)


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--procs", type=int, default=4)
    sub.add_argument("--input", default="dn",
                     help="dn | skewed | suffixes | file:PATH | dna:PATH")
    sub.add_argument("--ratio", type=float, default=0.0)
    sub.add_argument("--len", dest="length", type=int, default=500)
    sub.add_argument("--strings-per-pe", type=int, default=100)
    sub.add_argument("--sigma", type=int, default=26)
    sub.add_argument("--sampling", choices=["string", "char", "fk"], default="string")
    sub.add_argument("--oversample", type=int, default=None)
    sub.add_argument("--epsilon", type=float, default=1.0)
    sub.add_argument("--golomb", type=_parse_bool, default=None)
    sub.add_argument("--seed", type=int, default=None,
                     help="defaults to $DSS_SEED, then 0")
    sub.add_argument("--reps", type=int, default=1)
    sub.add_argument("--out", default=None, help="metrics file prefix (.csv/.json)")


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    return int(os.environ.get("DSS_SEED", "0"))


def _emit(records: list[MetricsRecord], out: str | None) -> None:
    for rec in records:
        phases = " ".join(
            "%s=%dB" % (ph, int(m["bytes_sent"])) for ph, m in sorted(rec.phases.items())
        )
        print(
            "%s p=%d n=%d N=%d D=%d bytes/str=%.2f rounds=%d %s [%s]"
            % (
                rec.algorithm, rec.p, rec.n, rec.total_chars, rec.distinguishing,
                rec.bytes_per_string, rec.rounds, phases, rec.verdict,
            )
        )
    if out:
        write_csv(records, out + ".csv")
        write_json(records, out + ".json")
        print("wrote %s.csv and %s.json" % (out, out))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dss-bench",
        description="Run distributed string sorting experiments on the simulator.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="run one algorithm and verify the result")
    run_p.add_argument("--algo", choices=VARIANTS, required=True)
    _add_common_flags(run_p)

    sweep_p = subs.add_parser("sweep", help="run a grid of algorithms x ratios")
    sweep_p.add_argument("--algos", default="ms,pdms",
                         help="comma-separated algorithm list")
    sweep_p.add_argument("--ratios", default=None,
                         help="comma-separated D/N ratios for dn inputs")
    sweep_p.add_argument("--procs-list", default=None,
                         help="comma-separated PE counts (weak scaling shape)")
    _add_common_flags(sweep_p)

    args = parser.parse_args(argv)
    seed = _resolve_seed(args.seed)

    def cfg_for(algo: str, procs: int, ratio: float) -> ExperimentConfig:
        return ExperimentConfig(
            algorithm=algo,
            procs=procs,
            input=args.input,
            ratio=ratio,
            length=args.length,
            strings_per_pe=args.strings_per_pe,
            sigma=args.sigma,
            sampling=args.sampling,
            oversample=args.oversample,
            epsilon=args.epsilon,
            golomb=args.golomb if args.golomb is not None else algo == "pdms-golomb",
            seed=seed,
            reps=args.reps,
        )

    if args.command == "run":
        configs = [cfg_for(args.algo, args.procs, args.ratio)]
    else:
        algos = [a.strip() for a in args.algos.split(",") if a.strip()]
        ratios = (
            [float(x) for x in args.ratios.split(",")]
            if args.ratios is not None
            else [args.ratio]
        )
        procs_list = (
            [int(x) for x in args.procs_list.split(",")]
            if args.procs_list is not None
            else [args.procs]
        )
        configs = [
            cfg_for(a, p, r) for a in algos for r in ratios for p in procs_list
        ]

    records = sweep(configs)
    _emit(records, args.out)
    return 0 if all(rec.verdict == "pass" for rec in records) else 1


if __name__ == "__main__":
    sys.exit(main())
