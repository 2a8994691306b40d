#!/usr/bin/env python3
"""Tunable-ratio grid: how exchange volume responds to shared-prefix mass.

Runs the merge-sort variants over the ratio grid used in the experiments
(r in {0, 0.25, 0.5, 0.75, 1.0}) and prints exchange-phase bytes per string.
Writes metrics next to the script unless --out is given.
"""

import argparse

from dss.bench import ExperimentConfig, sweep, write_csv, write_json

RATIOS = (0.0, 0.25, 0.5, 0.75, 1.0)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--algos", default="ms-simple,ms,pdms,pdms-golomb")
    ap.add_argument("--procs", type=int, default=8)
    ap.add_argument("--strings-per-pe", type=int, default=500)
    ap.add_argument("--len", dest="length", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="ratio_grid")
    args = ap.parse_args()

    configs = [
        ExperimentConfig(
            algorithm=a,
            procs=args.procs,
            input="dn",
            ratio=r,
            length=args.length,
            strings_per_pe=args.strings_per_pe,
            seed=args.seed,
        )
        for a in args.algos.split(",")
        for r in RATIOS
    ]
    records = sweep(configs)
    print(f"{'algorithm':>12} {'r':>5} {'exch B/str':>11} {'total B/str':>12} verdict")
    for rec in records:
        exch = rec.phases.get("exchange", {}).get("bytes_per_string", 0.0)
        print(f"{rec.algorithm:>12} {rec.r:>5.2f} {exch:>11.2f} "
              f"{rec.bytes_per_string:>12.2f} {rec.verdict}")
    write_csv(records, args.out + ".csv")
    write_json(records, args.out + ".json")
    return 0 if all(r.verdict == "pass" for r in records) else 1


if __name__ == "__main__":
    raise SystemExit(main())
