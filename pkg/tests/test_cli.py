import csv
import json

import numpy as np
import pytest

from iterqaoa.cli import (
    ExperimentConfig,
    _json_line,
    cmd_fit,
    cmd_gen,
    cmd_plotdata,
    cmd_run,
    cmd_verify,
    main,
    power_law_table,
)
from iterqaoa.portfolio import classical_sampler_prob


def small_maxcut_config(outdir, count=5):
    return ExperimentConfig(
        problem="maxcut",
        sizes=[4],
        count=count,
        p=1,
        order_t=4,
        epsilon=1e-12,
        iterations=2,
        budget=25,
        shots_opt=64,
        shots_final=64,
        seed=99,
        outdir=str(outdir),
    )


RECORD_SCHEMA = {
    "iter": int,
    "theta": list,
    "r_init": float,
    "r_post": float,
    "selected": list,
    "distance": (float, type(None)),
    "converged": bool,
}


class TestGen:
    def test_five_cubic_graph_files(self, tmp_path):
        config = ExperimentConfig(
            problem="maxcut", sizes=[8], count=5, seed=21, outdir=str(tmp_path)
        )
        assert cmd_gen(config) == 0
        files = sorted((tmp_path / "instances").glob("*.json"))
        assert len(files) == 5
        from iterqaoa.graphs import Graph

        for f in files:
            graph = Graph.from_dict(json.loads(f.read_text()))
            assert graph.n_vertices == 8
            assert graph.is_regular(3)

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        cmd_gen(small_maxcut_config(a))
        cmd_gen(small_maxcut_config(b))
        for fa, fb in zip(sorted((a / "instances").glob("*")), sorted((b / "instances").glob("*"))):
            assert fa.read_bytes() == fb.read_bytes()

    def test_dgmvp_instances_psd(self, tmp_path):
        config = ExperimentConfig(
            problem="dgmvp", sizes=[[4, 3]], count=2, seed=5, outdir=str(tmp_path)
        )
        cmd_gen(config)
        files = list((tmp_path / "instances").glob("*.json"))
        assert len(files) == 2
        for f in files:
            payload = json.loads(f.read_text())
            sigma = np.array(payload["sigma"])
            assert np.linalg.eigvalsh(sigma).min() >= -1e-10


class TestRun:
    def test_record_count_and_schema(self, tmp_path):
        config = small_maxcut_config(tmp_path)
        cmd_gen(config)
        assert cmd_run(config) == 0
        lines = (tmp_path / "results.jsonl").read_text().splitlines()
        records = [json.loads(l) for l in lines]
        # 5 instances x iterations 0..2
        assert len(records) == 15
        for rec in records:
            for key, kind in RECORD_SCHEMA.items():
                assert key in rec
                assert isinstance(rec[key], kind) or (
                    kind is float and isinstance(rec[key], int)
                )
            for sel in rec["selected"]:
                assert set(sel) == {"x", "count"}
        assert (tmp_path / "summary.csv").exists()

    def test_rerun_skips_done(self, tmp_path, capsys):
        config = small_maxcut_config(tmp_path, count=2)
        cmd_gen(config)
        cmd_run(config)
        first = (tmp_path / "results.jsonl").read_text()
        cmd_run(config)
        assert (tmp_path / "results.jsonl").read_text() == first

    def test_deterministic_across_directories(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            config = small_maxcut_config(d, count=3)
            cmd_gen(config)
            cmd_run(config)
        assert (a / "results.jsonl").read_bytes() == (b / "results.jsonl").read_bytes()

    def test_resume_after_interrupt_no_duplicates(self, tmp_path):
        config = small_maxcut_config(tmp_path, count=3)
        cmd_gen(config)
        cmd_run(config)
        uninterrupted = set((tmp_path / "results.jsonl").read_text().splitlines())

        # simulate a crash after writing one instance's records but before
        # marking it done: drop it from the manifest, keep its records
        manifest_path = tmp_path / "manifest.json"
        manifest = json.loads(manifest_path.read_text())
        victim = sorted(manifest["instances"])[1]
        del manifest["instances"][victim]
        manifest_path.write_text(json.dumps(manifest))

        cmd_run(config)
        resumed = (tmp_path / "results.jsonl").read_text().splitlines()
        assert len(resumed) == len(uninterrupted)
        assert set(resumed) == uninterrupted

    def test_manifest_covers_every_record(self, tmp_path):
        config = small_maxcut_config(tmp_path, count=3)
        cmd_gen(config)
        cmd_run(config)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        record_ids = {
            json.loads(l)["instance_id"]
            for l in (tmp_path / "results.jsonl").read_text().splitlines()
        }
        assert record_ids <= set(manifest["instances"])
        for iid in record_ids:
            assert manifest["instances"][iid]["status"] == "done"

    def test_worker_pool_matches_serial(self, tmp_path):
        serial_dir, pool_dir = tmp_path / "serial", tmp_path / "pool"
        for d, workers in ((serial_dir, 1), (pool_dir, 2)):
            config = small_maxcut_config(d, count=3)
            config.workers = workers
            cmd_gen(config)
            cmd_run(config)
        assert (serial_dir / "results.jsonl").read_bytes() == (pool_dir / "results.jsonl").read_bytes()

    def test_bad_instance_logged_run_continues(self, tmp_path, capsys):
        config = small_maxcut_config(tmp_path, count=2)
        cmd_gen(config)
        bad = tmp_path / "instances" / "maxcut_N04_zzz.json"
        bad.write_text(json.dumps({"id": "maxcut_N04_zzz", "kind": "maxcut",
                                   "n": 4, "edges": [[0, 0]], "seed": 0}))
        assert cmd_run(config) == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["instances"]["maxcut_N04_zzz"]["status"] == "failed"
        done = [i for i, st in manifest["instances"].items() if st["status"] == "done"]
        assert len(done) == 2
        assert "FAILED" in capsys.readouterr().err

    def test_config_mismatch_rejected(self, tmp_path):
        config = small_maxcut_config(tmp_path, count=2)
        cmd_gen(config)
        cmd_run(config)
        other = small_maxcut_config(tmp_path, count=2)
        other.budget = 999
        from iterqaoa.errors import InvalidInputError

        with pytest.raises(InvalidInputError):
            cmd_run(other)


def synthetic_dgmvp_records(points, p_gm_by_iter):
    """Records whose mean p_gm per (n, l) follows a chosen law exactly."""
    rows = []
    for (n, l) in points:
        for it, law in p_gm_by_iter.items():
            pc = float(classical_sampler_prob(n, l))
            for k in range(3):
                rows.append({
                    "instance_id": f"dgmvp_n{n}_l{l}_{k:03d}",
                    "problem": {"kind": "dgmvp", "n": n, "l": l},
                    "iter": it,
                    "theta": [0.0, 0.0],
                    "r_init": 0.5,
                    "r_post": 0.25,
                    "selected": [],
                    "distance": None,
                    "converged": False,
                    "e_init": 1.0,
                    "e_post": 0.5,
                    "delta_c": None,
                    "evaluations": 10,
                    "alpha_min": 0.0,
                    "p_min": 0.5,
                    "p_gm": law(pc),
                })
    return rows


class TestFit:
    def test_recovers_known_exponent(self, tmp_path):
        points = [(4, 1), (4, 2), (4, 3)]
        rows = synthetic_dgmvp_records(points, {0: lambda pc: 0.7 * pc**1.4, 4: lambda pc: 0.2 * pc**0.1})
        (tmp_path / "results.jsonl").write_text(
            "".join(_json_line(r) + "\n" for r in rows)
        )
        table = power_law_table(rows)
        by_iter = {row["iter"]: row for row in table}
        assert by_iter[0]["b"] == pytest.approx(1.4, abs=1e-9)
        assert by_iter[4]["b"] == pytest.approx(0.1, abs=1e-9)
        config = ExperimentConfig(problem="dgmvp", sizes=[[4, 1]], outdir=str(tmp_path))
        assert cmd_fit(config) == 0
        assert (tmp_path / "fit_report.csv").exists()

    def test_all_zero_pgm_gives_no_fit_row(self, tmp_path):
        points = [(4, 1), (4, 2), (4, 3)]
        rows = synthetic_dgmvp_records(points, {0: lambda pc: 0.0})
        with pytest.warns(UserWarning):
            table = power_law_table(rows)
        assert table[0]["status"].startswith("no fit")
        assert table[0]["b"] is None

    def test_no_records_is_runtime_error(self, tmp_path):
        config = ExperimentConfig(problem="dgmvp", sizes=[[4, 1]], outdir=str(tmp_path))
        assert cmd_fit(config) == 3


class TestVerify:
    def test_oracles_pass(self, capsys):
        assert cmd_verify("oracles") == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_g6_via_main(self, capsys):
        assert main(["verify", "g6"]) == 0
        out = capsys.readouterr().out
        assert "0.6924" in out and "FAIL" not in out


class TestPlotdata:
    def test_fig2a_schema(self, tmp_path):
        config = small_maxcut_config(tmp_path, count=2)
        cmd_gen(config)
        cmd_run(config)
        assert cmd_plotdata(config, "fig2a") == 0
        with (tmp_path / "plotdata" / "fig2a.csv").open() as fh:
            reader = csv.DictReader(fh)
            assert {"N", "iter", "mean_r", "stderr"} <= set(reader.fieldnames)
            rows = list(reader)
        assert {row["iter"] for row in rows} == {"0", "1", "2"}

    def test_fig9a_schema(self, tmp_path):
        rows = synthetic_dgmvp_records([(4, 1), (4, 2), (4, 3)], {0: lambda pc: pc})
        (tmp_path / "results.jsonl").write_text(
            "".join(_json_line(r) + "\n" for r in rows)
        )
        config = ExperimentConfig(problem="dgmvp", sizes=[[4, 1]], outdir=str(tmp_path))
        assert cmd_plotdata(config, "fig9a") == 0
        with (tmp_path / "plotdata" / "fig9a.csv").open() as fh:
            reader = csv.DictReader(fh)
            assert {"P_c", "mean_Pgm", "fit_a", "fit_b"} <= set(reader.fieldnames)

    def test_empty_results_writes_header(self, tmp_path, capsys):
        config = ExperimentConfig(problem="maxcut", sizes=[4], outdir=str(tmp_path))
        assert cmd_plotdata(config, "fig2a") == 0
        assert "warning" in capsys.readouterr().err
        text = (tmp_path / "plotdata" / "fig2a.csv").read_text().splitlines()
        assert len(text) == 1

    def test_unknown_figure_exit_code(self, tmp_path):
        rc = main(["plotdata", "figX", "--outdir", str(tmp_path)])
        assert rc == 1


class TestMain:
    def test_usage_error_exit_1(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bogus-command"])
        assert exc.value.code == 1

    def test_gen_via_main(self, tmp_path):
        rc = main([
            "gen", "--problem", "maxcut", "--sizes", "4", "--count", "2",
            "--seed", "3", "--outdir", str(tmp_path),
        ])
        assert rc == 0
        assert len(list((tmp_path / "instances").glob("*.json"))) == 2

    def test_config_file_toml(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text(
            'problem = "maxcut"\nsizes = [4]\ncount = 2\nseed = 12\n'
            f'outdir = "{tmp_path}/out"\n'
        )
        assert main(["gen", "--config", str(cfg)]) == 0
        assert len(list((tmp_path / "out" / "instances").glob("*.json"))) == 2

    def test_env_var_output_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ITERQAOA_OUTDIR", str(tmp_path / "envout"))
        config = ExperimentConfig(problem="maxcut", sizes=[4])
        assert config.outdir == str(tmp_path / "envout")
