#!/usr/bin/env python3
"""Weak scaling: fixed strings per PE while the PE count grows.

Bytes sent per string should stay near-flat for the merge-sort variants and
grow for the hypercube sorter, which reshuffles everything log p times.
"""

import argparse

from dss.bench import ExperimentConfig, sweep, write_csv, write_json


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--algos", default="hquick,ms-simple,ms,pdms")
    ap.add_argument("--procs-list", default="2,4,8,16")
    ap.add_argument("--ratio", type=float, default=0.0)
    ap.add_argument("--strings-per-pe", type=int, default=500)
    ap.add_argument("--len", dest="length", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="weak_scaling")
    args = ap.parse_args()

    configs = [
        ExperimentConfig(
            algorithm=a,
            procs=p,
            input="dn",
            ratio=args.ratio,
            length=args.length,
            strings_per_pe=args.strings_per_pe,
            seed=args.seed,
        )
        for a in args.algos.split(",")
        for p in (int(x) for x in args.procs_list.split(","))
    ]
    records = sweep(configs)
    print(f"{'algorithm':>12} {'p':>3} {'n':>7} {'B/str':>9} {'bottleneck':>11} verdict")
    for rec in records:
        print(f"{rec.algorithm:>12} {rec.p:>3} {rec.n:>7} {rec.bytes_per_string:>9.2f} "
              f"{rec.bottleneck:>11} {rec.verdict}")
    write_csv(records, args.out + ".csv")
    write_json(records, args.out + ".json")
    return 0 if all(r.verdict == "pass" for r in records) else 1


if __name__ == "__main__":
    raise SystemExit(main())
