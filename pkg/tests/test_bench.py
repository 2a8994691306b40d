import random

import pytest

from dss.bench import (
    CSV_COLUMNS,
    ExperimentConfig,
    main,
    read_csv,
    run_experiment,
    sweep,
    verify_outcomes,
    write_csv,
)
from dss.comm import CommWorld
from dss.sorters import SortConfig, run_variant
from dss.strings import StringSet

from helpers import random_strings


def make_outcomes(parts, algorithm="ms", **cfg_kw):
    inputs = [StringSet(p) for p in parts]
    world = CommWorld(len(parts))
    base = SortConfig(seed=3, sigma=26, **cfg_kw)
    outcomes = world.run(lambda pe: run_variant(pe, algorithm, inputs[pe.rank], base))
    return inputs, outcomes


class TestRunExperiment:
    def test_ms_on_dn_passes(self):
        cfg = ExperimentConfig("ms", procs=4, input="dn", ratio=0.0,
                               length=50, strings_per_pe=100, seed=1)
        rec = run_experiment(cfg)
        assert rec.verdict == "pass"
        assert rec.n == 400
        assert rec.bytes_per_string == rec.bytes_sent / rec.n
        assert "exchange" in rec.phases

    def test_hquick_single_pe_zero_bytes(self):
        cfg = ExperimentConfig("hquick", procs=1, input="dn", ratio=0.5,
                               length=30, strings_per_pe=50, seed=2)
        rec = run_experiment(cfg)
        assert rec.verdict == "pass"
        assert rec.bytes_sent == 0
        assert rec.bytes_per_string == 0.0

    def test_pdms_beats_ms_simple_on_low_ratio(self):
        common = dict(procs=4, input="dn", ratio=0.0, length=200,
                      strings_per_pe=200, seed=3)
        simple = run_experiment(ExperimentConfig("ms-simple", **common))
        pdms = run_experiment(ExperimentConfig("pdms", **common))
        assert simple.verdict == pdms.verdict == "pass"
        ex_simple = simple.phases["exchange"]["bytes_per_string"]
        ex_pdms = pdms.phases["exchange"]["bytes_per_string"]
        assert ex_pdms < ex_simple

    def test_suffix_input(self):
        cfg = ExperimentConfig("ms", procs=3, input="suffixes",
                               strings_per_pe=40, sigma=4, seed=4)
        assert run_experiment(cfg).verdict == "pass"

    def test_file_input(self, tmp_path):
        f = tmp_path / "corpus.txt"
        rng = random.Random(0)
        lines = [bytes(rng.randrange(97, 123) for _ in range(rng.randrange(1, 20)))
                 for _ in range(200)]
        f.write_bytes(b"\n".join(lines) + b"\n")
        cfg = ExperimentConfig("pdms", procs=4, input="file:%s" % f, seed=5)
        assert run_experiment(cfg).verdict == "pass"

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig("quickish", procs=2)


class TestVerifier:
    def test_accepts_good_run(self):
        rng = random.Random(7)
        parts = [random_strings(rng, 40, sigma=26, max_len=12) for _ in range(4)]
        inputs, outcomes = make_outcomes(parts)
        ok, diag = verify_outcomes(inputs, outcomes)
        assert ok, diag

    def test_detects_boundary_swap(self):
        rng = random.Random(8)
        parts = [random_strings(rng, 40, sigma=26, max_len=12) for _ in range(4)]
        inputs, outcomes = make_outcomes(parts)
        a, b = outcomes[1], outcomes[2]
        sa, sb = list(a.strings), list(b.strings)
        assert sa[-1] != sb[0]
        sa[-1], sb[0] = sb[0], sa[-1]
        a.origins[-1], b.origins[0] = b.origins[0], a.origins[-1]
        a.strings = StringSet(sa, validate=False)
        b.strings = StringSet(sb, validate=False)
        # keep per-PE LCP arrays consistent so only the boundary check can fire
        from dss.strings import compute_lcp
        a.lcps = [0] + [compute_lcp(sa[i - 1], sa[i]) for i in range(1, len(sa))]
        b.lcps = [0] + [compute_lcp(sb[i - 1], sb[i]) for i in range(1, len(sb))]
        ok, diag = verify_outcomes(inputs, outcomes)
        assert not ok and ("boundary" in diag or "not sorted" in diag)

    def test_detects_lcp_corruption(self):
        rng = random.Random(9)
        parts = [random_strings(rng, 40, sigma=26, max_len=12) for _ in range(4)]
        inputs, outcomes = make_outcomes(parts)
        victim = next(o for o in outcomes if len(o.lcps) > 1)
        victim.lcps[1] += 1
        ok, diag = verify_outcomes(inputs, outcomes)
        assert not ok and "LCP" in diag

    def test_detects_underlong_pdms_prefix(self):
        from dss.strings import compute_lcp

        from helpers import oracle_dpre_bruteforce

        rng = random.Random(10)
        parts = [random_strings(rng, 40, sigma=4, max_len=12) for _ in range(4)]
        inputs, outcomes = make_outcomes(parts, algorithm="pdms")
        flat = [s for part in parts for s in part]
        tags = [(r, i) for r, part in enumerate(parts) for i in range(len(part))]
        dpre = dict(zip(tags, oracle_dpre_bruteforce(flat)))

        # truncate one shipped prefix strictly below its distinguishing length
        mutated = False
        for out in outcomes:
            strs = list(out.strings)
            for i, s in enumerate(strs):
                d = dpre[out.origins[i]]
                if d >= 2 and len(s) >= d:
                    strs[i] = s[: d - 1]
                    out.strings = StringSet(strs, validate=False)
                    out.lcps = [0] + [
                        compute_lcp(strs[k - 1], strs[k]) for k in range(1, len(strs))
                    ]
                    mutated = True
                    break
            if mutated:
                break
        assert mutated
        ok, diag = verify_outcomes(inputs, outcomes)
        assert not ok

    def test_detects_missing_origin(self):
        rng = random.Random(11)
        parts = [random_strings(rng, 10, sigma=26, max_len=8) for _ in range(2)]
        inputs, outcomes = make_outcomes(parts)
        outcomes[0].origins[0] = (0, 9999)
        ok, diag = verify_outcomes(inputs, outcomes)
        assert not ok and "origin" in diag


class TestSweepAndCsv:
    def test_r_grid_row_count(self):
        configs = [
            ExperimentConfig(a, procs=2, input="dn", ratio=r, length=30,
                             strings_per_pe=20, seed=6)
            for a in ("ms", "pdms")
            for r in (0.0, 0.25, 0.5, 0.75, 1.0)
        ]
        records = sweep(configs)
        assert len(records) == 10
        assert all(rec.verdict == "pass" for rec in records)

    def test_weak_scaling_shape(self):
        configs = [
            ExperimentConfig("ms", procs=p, input="dn", ratio=0.5, length=30,
                             strings_per_pe=16, seed=7)
            for p in (2, 4, 8)
        ]
        records = sweep(configs)
        assert [rec.p for rec in records] == [2, 4, 8]
        assert all(rec.n == 16 * rec.p for rec in records)

    def test_partial_failure_recorded(self):
        good = ExperimentConfig("ms", procs=2, input="dn", ratio=0.0,
                                length=30, strings_per_pe=10, seed=8)
        bad = ExperimentConfig("ms", procs=2, input="file:/does/not/exist", seed=8)
        records = sweep([good, bad])
        assert records[0].verdict == "pass"
        assert records[1].verdict.startswith("error:")

    def test_csv_round_trip(self, tmp_path):
        configs = [
            ExperimentConfig("pdms", procs=2, input="dn", ratio=0.25,
                             length=30, strings_per_pe=12, seed=9),
            ExperimentConfig("hquick", procs=2, input="suffixes",
                             strings_per_pe=10, sigma=4, seed=9),
        ]
        records = sweep(configs)
        path = tmp_path / "metrics.csv"
        write_csv(records, str(path))
        again = read_csv(str(path))
        for a, b in zip(records, again):
            assert a.csv_row() == b.csv_row()

    def test_reps_multiply_rows(self):
        cfg = ExperimentConfig("ms", procs=2, input="dn", ratio=0.0, length=30,
                               strings_per_pe=10, seed=1, reps=3)
        assert len(sweep([cfg])) == 3


class TestCli:
    def test_run_exit_zero(self, tmp_path, capsys):
        rc = main([
            "run", "--algo", "ms", "--procs", "2", "--input", "dn",
            "--ratio", "0.5", "--len", "40", "--strings-per-pe", "20",
            "--seed", "3", "--out", str(tmp_path / "m"),
        ])
        assert rc == 0
        assert (tmp_path / "m.csv").exists()
        assert (tmp_path / "m.json").exists()
        assert "pass" in capsys.readouterr().out

    def test_sweep_cli(self, capsys):
        rc = main([
            "sweep", "--algos", "ms,pdms", "--ratios", "0,1.0", "--procs", "2",
            "--len", "30", "--strings-per-pe", "10", "--seed", "2",
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.count("pass") == 4

    def test_seed_env_fallback(self, monkeypatch, capsys):
        monkeypatch.setenv("DSS_SEED", "17")
        rc = main([
            "run", "--algo", "ms", "--procs", "2", "--len", "30",
            "--strings-per-pe", "10",
        ])
        assert rc == 0


class TestSchema:
    def test_columns_fixed(self):
        assert CSV_COLUMNS == [
            "algorithm", "p", "n", "N", "D", "r", "phase", "seconds",
            "bytes_sent", "bytes_per_string", "rounds", "verdict",
        ]
