"""Batch experiment runner: instance generation, ensemble execution with
resumable JSONL results, scaling fits, verification checks, and plot-ready
series files.

Exit codes: 0 ok, 1 usage error, 2 verification failure, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .ansatz import alpha_g6_landscape, build_dgmvp_cost, fold_g6_angles
from .errors import InvalidInputError
from .graphs import Graph, brute_force_maxcut, classify_edge_subgraphs, gen_random_cubic, gen_worst_case_graph
from .metrics import SUMMARY_COLUMNS, EnsembleSummary, fit_power_law, summary_row
from .portfolio import PortfolioInstance, classical_sampler_prob, classical_values, enumerate_feasible, feasible_count, gen_instance
from .warmstart import AnsatzSpec, WarmStartConfig, dgmvp_problem, maxcut_problem, run_iterative

DESK_DEFAULT_COUNT = 20
PAPER_DEFAULT_COUNT = 100


@dataclass
class ExperimentConfig:
    problem: str = "maxcut"            # maxcut | dgmvp
    sizes: list = field(default_factory=lambda: [8, 10, 12])
    count: int = DESK_DEFAULT_COUNT    # instances per size point
    p: int = 1
    order_t: int | None = 20
    percentile_t: float | None = None
    epsilon: float = 1e-6
    iterations: int = 4
    budget: int = 5000                 # optimizer evaluation cap per iteration
    shots_opt: int = 8000              # shots per objective evaluation (0 = exact)
    shots_final: int = 8000            # shots for the post-optimization measurement
    theta_init: str = "zeros"
    polish: bool = True
    seed: int = 2024
    outdir: str = ""
    workers: int = 1
    paper_scale: bool = False

    def __post_init__(self):
        if self.problem not in ("maxcut", "dgmvp"):
            raise InvalidInputError(f"unknown problem {self.problem!r}")
        if self.count < 1 or self.p < 1 or self.iterations < 0:
            raise InvalidInputError("counts must be positive")
        if not self.outdir:
            self.outdir = os.environ.get("ITERQAOA_OUTDIR", "runs")

    def size_points(self) -> list[tuple]:
        if self.problem == "maxcut":
            return [(int(n),) for n in self.sizes]
        return [(int(n), int(l)) for n, l in self.sizes]

    def warmstart_config(self) -> WarmStartConfig:
        return WarmStartConfig(
            order_t=self.order_t,
            percentile_t=self.percentile_t,
            epsilon=self.epsilon,
            max_iterations=self.iterations,
            theta_init=self.theta_init,
            shots_optimize=self.shots_opt,
            shots_measure=self.shots_final,
            optimizer_budget=self.budget,
            polish=self.polish,
        )

    def scientific_dict(self) -> dict:
        d = asdict(self)
        d.pop("outdir")
        d.pop("workers")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.scientific_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config_file(path: str) -> dict:
    text = Path(path).read_bytes()
    if path.endswith(".json"):
        return json.loads(text)
    try:
        import tomllib
    except ImportError:
        import tomli as tomllib
    return tomllib.loads(text.decode())


def _dump_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    tmp.replace(path)


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _instance_seed(master: int, point_index: int, k: int) -> int:
    ss = np.random.SeedSequence((master, point_index, k))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _run_seed(master: int, instance_id: str) -> int:
    digest = hashlib.sha256(f"{master}:{instance_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def cmd_gen(config: ExperimentConfig) -> int:
    outdir = Path(config.outdir)
    inst_dir = outdir / "instances"
    inst_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for pi, point in enumerate(config.size_points()):
        for k in range(config.count):
            seed = _instance_seed(config.seed, pi, k)
            if config.problem == "maxcut":
                (n,) = point
                graph = gen_random_cubic(n, seed)
                instance_id = f"maxcut_N{n:02d}_{k:03d}"
                payload = {"id": instance_id, "kind": "maxcut", "seed": seed, **graph.to_dict()}
            else:
                n, l = point
                inst = gen_instance(n, l, seed)
                instance_id = f"dgmvp_n{n}_l{l}_{k:03d}"
                payload = {"id": instance_id, "kind": "dgmvp", **inst.to_dict(), "seed": seed}
            path = inst_dir / f"{instance_id}.json"
            path.write_text(_json_line(payload) + "\n")
            written.append(instance_id)
    _dump_json(outdir / "gen_manifest.json", {
        "config_hash": config.config_hash(),
        "config": config.scientific_dict(),
        "instances": written,
    })
    print(f"wrote {len(written)} instance files under {inst_dir}")
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _load_instances(config: ExperimentConfig) -> list[dict]:
    inst_dir = Path(config.outdir) / "instances"
    files = sorted(inst_dir.glob("*.json"))
    if not files:
        raise InvalidInputError(f"no instance files under {inst_dir}; run gen first")
    return [json.loads(f.read_text()) for f in files]


def _execute_instance(payload: dict, config_dict: dict) -> tuple[str, list[dict], str | None]:
    """Run one instance end to end; failures are returned, not raised, so a
    bad instance cannot take down the batch."""
    instance_id = payload["id"]
    try:
        config = ExperimentConfig(**config_dict)
        if payload["kind"] == "maxcut":
            problem = maxcut_problem(Graph.from_dict(payload))
            problem_meta = {"kind": "maxcut", "n": payload["n"]}
        else:
            inst = PortfolioInstance.from_dict(payload)
            problem = dgmvp_problem(inst)
            problem_meta = {"kind": "dgmvp", "n": payload["n"], "l": payload["l"]}
        records = run_iterative(
            problem,
            AnsatzSpec(p=config.p),
            config.warmstart_config(),
            _run_seed(config.seed, instance_id),
        )
    except Exception as exc:
        return instance_id, [], f"{type(exc).__name__}: {exc}"
    lines = []
    for rec in records:
        row = {"instance_id": instance_id, "problem": problem_meta}
        row.update(rec.to_dict())
        lines.append(row)
    return instance_id, lines, None


def _read_manifest(outdir: Path) -> dict:
    path = outdir / "manifest.json"
    if path.exists():
        return json.loads(path.read_text())
    return {}


def cmd_run(config: ExperimentConfig) -> int:
    outdir = Path(config.outdir)
    instances = _load_instances(config)
    results_path = outdir / "results.jsonl"
    manifest = _read_manifest(outdir)
    if manifest and manifest.get("config_hash") != config.config_hash():
        raise InvalidInputError(
            "existing manifest was produced by a different configuration; "
            "use a fresh output directory"
        )
    done = {iid for iid, st in manifest.get("instances", {}).items() if st.get("status") == "done"}

    # drop records of instances that never completed (interrupted runs)
    kept_lines = []
    if results_path.exists():
        for line in results_path.read_text().splitlines():
            if line.strip() and json.loads(line)["instance_id"] in done:
                kept_lines.append(line)
        results_path.write_text("".join(l + "\n" for l in kept_lines))

    manifest = {
        "config_hash": config.config_hash(),
        "config": config.scientific_dict(),
        "code_version": __version__,
        "started": manifest.get("started", time.strftime("%Y-%m-%dT%H:%M:%S")),
        "instances": manifest.get("instances", {}),
    }
    todo = [p for p in instances if p["id"] not in done]
    print(f"{len(done)} instance(s) already done, {len(todo)} to run")

    failures = 0

    def consume(instance_id: str, lines: list[dict], error: str | None) -> None:
        nonlocal failures
        if error is not None:
            failures += 1
            manifest["instances"][instance_id] = {"status": "failed", "error": error}
            _dump_json(outdir / "manifest.json", manifest)
            print(f"  FAILED {instance_id}: {error}", file=sys.stderr)
            return
        with results_path.open("a") as fh:
            for row in lines:
                fh.write(_json_line(row) + "\n")
        manifest["instances"][instance_id] = {"status": "done", "records": len(lines)}
        _dump_json(outdir / "manifest.json", manifest)
        print(f"  done {instance_id}")

    config_dict = asdict(config)
    if config.workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for result in pool.map(_execute_instance, todo, [config_dict] * len(todo)):
                consume(*result)
    else:
        for payload in todo:
            consume(*_execute_instance(payload, config_dict))

    manifest["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    _dump_json(outdir / "manifest.json", manifest)
    _write_summary(outdir)
    if failures:
        print(f"{failures} instance(s) failed", file=sys.stderr)
    return 0


def _read_records(outdir: Path) -> list[dict]:
    path = outdir / "results.jsonl"
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def _write_summary(outdir: Path) -> Path:
    records = _read_records(outdir)
    path = outdir / "summary.csv"
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for rec in records:
            row = summary_row(rec["instance_id"], rec)
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return path


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def power_law_table(records: list[dict]) -> list[dict]:
    """Mean p_gm per (n, l) point vs the constrained-sampler baseline, fitted
    per iteration index."""
    by_point: dict[tuple[int, int], dict[int, list[float]]] = {}
    for rec in records:
        prob = rec.get("problem", {})
        if prob.get("kind") != "dgmvp" or rec.get("p_gm") is None:
            continue
        point = (int(prob["n"]), int(prob["l"]))
        by_point.setdefault(point, {}).setdefault(rec["iter"], []).append(rec["p_gm"])
    if not by_point:
        return []
    iterations = sorted({i for per in by_point.values() for i in per})
    rows = []
    for it in iterations:
        xs, ys = [], []
        for (n, l), per_iter in sorted(by_point.items()):
            if it in per_iter:
                xs.append(float(classical_sampler_prob(n, l)))
                ys.append(float(np.mean(per_iter[it])))
        row = {"iter": it, "n_points": len(xs)}
        try:
            fit = fit_power_law(xs, ys)
            row.update(a=fit.a, b=fit.b, stderr_a=fit.stderr_a, stderr_b=fit.stderr_b,
                       dropped=fit.n_dropped, status="ok")
        except InvalidInputError as exc:
            row.update(a=None, b=None, stderr_a=None, stderr_b=None, dropped=None,
                       status=f"no fit ({exc})")
        rows.append(row)
    return rows


def cmd_fit(config: ExperimentConfig) -> int:
    outdir = Path(config.outdir)
    records = _read_records(outdir)
    rows = power_law_table(records)
    if not rows:
        print("no portfolio records with p_gm found; nothing to fit", file=sys.stderr)
        return 3
    path = outdir / "fit_report.csv"
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["iter", "n_points", "a", "b", "stderr_a", "stderr_b", "dropped", "status"])
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    for row in rows:
        if row["status"] == "ok":
            print(f"iter {row['iter']}: P_gm ~ {row['a']:.4g} * P_c^{row['b']:.4f} "
                  f"(+- {row['stderr_b']:.4f}, {row['n_points']} points)")
        else:
            print(f"iter {row['iter']}: {row['status']}")
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _verify_g6(report: list[str]) -> bool:
    best, gamma, beta, _ = alpha_g6_landscape(256)
    g_fold, b_fold = fold_g6_angles(gamma, beta)
    g_deg, b_deg = math.degrees(g_fold), math.degrees(b_fold)
    ok_val = abs(best - 0.6924) <= 5e-4
    ok_ang = abs(g_deg - 17.8) <= 0.5 and abs(b_deg - 22.5) <= 0.5
    report.append(f"worst-case edge ratio: {best:.6f} (expect 0.6924 +- 5e-4) "
                  f"{'PASS' if ok_val else 'FAIL'}")
    report.append(f"optimal angles (folded): gamma={g_deg:.2f} deg, beta={b_deg:.2f} deg "
                  f"(expect 17.8, 22.5 +- 0.5) {'PASS' if ok_ang else 'FAIL'}")
    return ok_val and ok_ang


def _verify_oracles(report: list[str]) -> bool:
    ok = True

    inst = gen_instance(2, 2, 11)
    diag = build_dgmvp_cost(inst).values
    cls = classical_values(inst)
    gap = float(np.abs((diag - diag[0]) - (cls - cls[0])).max())
    good = gap < 1e-10
    ok &= good
    report.append(f"risk diagonal vs classical cost (n=2,l=2): max mismatch {gap:.2e} "
                  f"{'PASS' if good else 'FAIL'}")

    good = True
    for n in range(1, 6):
        for l in range(1, 4):
            enumerated = len(enumerate_feasible(PortfolioInstance(n, l, np.eye(n))))
            good &= enumerated == feasible_count(n, l)
    ok &= good
    report.append(f"feasible-set count matches binomial formula (n<=5, l<=3) "
                  f"{'PASS' if good else 'FAIL'}")

    good = classical_sampler_prob(4, 3) == Fraction(1, 120)
    ok &= good
    report.append(f"constrained-sampler probability P_c(4,3) = 1/120 {'PASS' if good else 'FAIL'}")

    c_max, _ = brute_force_maxcut(gen_worst_case_graph("petersen", 10))
    good = c_max == 12
    ok &= good
    report.append(f"Petersen brute-force MaxCut = 12 {'PASS' if good else 'FAIL'}")

    classes = set(classify_edge_subgraphs(gen_worst_case_graph("petersen", 10)).values())
    good = {c.value for c in classes} == {"g6"}
    ok &= good
    report.append(f"Petersen edges all classify tree-like {'PASS' if good else 'FAIL'}")
    return bool(ok)


def cmd_verify(what: str) -> int:
    report: list[str] = []
    if what == "g6":
        ok = _verify_g6(report)
    elif what == "oracles":
        ok = _verify_oracles(report)
    elif what == "all":
        ok = _verify_g6(report) & _verify_oracles(report)
    else:
        raise InvalidInputError(f"unknown verification target {what!r}")
    print("\n".join(report))
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# plotdata
# ---------------------------------------------------------------------------


def _maxcut_series(records: list[dict], value_key: str) -> list[dict]:
    groups: dict[tuple[int, int], EnsembleSummary] = {}
    for rec in records:
        prob = rec.get("problem", {})
        if prob.get("kind") != "maxcut":
            continue
        n = int(prob["n"])
        summ = groups.setdefault((n, rec["iter"]), EnsembleSummary())
        if value_key == "R":
            if rec["r_init"] != 0:
                summ.add(0, (rec["r_init"] - rec["r_post"]) / rec["r_init"])
        else:
            summ.add(0, rec[value_key])
    rows = []
    for (n, it), summ in sorted(groups.items()):
        if not summ.values.get(0):
            continue
        agg = summ.aggregates()[0]
        rows.append({"N": n, "iter": it,
                     f"mean_{'r' if value_key == 'r_post' else value_key}": agg.mean,
                     "stderr": agg.stderr, "count": agg.count})
    return rows


def _convergence_series(records: list[dict]) -> list[dict]:
    by_instance: dict[str, dict] = {}
    for rec in records:
        info = by_instance.setdefault(rec["instance_id"], {"n": rec["problem"].get("n"), "conv": None, "max_iter": 0})
        info["max_iter"] = max(info["max_iter"], rec["iter"])
        if rec["converged"] and info["conv"] is None:
            info["conv"] = rec["iter"]
    by_n: dict[int, list[dict]] = {}
    for info in by_instance.values():
        by_n.setdefault(int(info["n"]), []).append(info)
    rows = []
    max_iter = max((i["max_iter"] for i in by_instance.values()), default=0)
    for n, infos in sorted(by_n.items()):
        total = len(infos)
        for it in range(1, max_iter + 1):
            static = sum(1 for i in infos if i["conv"] is not None and i["conv"] <= it)
            rows.append({"N": n, "iter": it, "P": (total - static) / total, "count": total})
    return rows


def _dgmvp_series(records: list[dict], metric: str) -> list[dict]:
    groups: dict[tuple[int, int, int], EnsembleSummary] = {}
    for rec in records:
        prob = rec.get("problem", {})
        if prob.get("kind") != "dgmvp" or rec.get(metric) is None:
            continue
        key = (int(prob["n"]), int(prob["l"]), rec["iter"])
        groups.setdefault(key, EnsembleSummary()).add(0, rec[metric])
    rows = []
    for (n, l, it), summ in sorted(groups.items()):
        agg = summ.aggregates()[0]
        rows.append({"n": n, "l": l, "iter": it, f"mean_{metric}": agg.mean,
                     "stderr": agg.stderr, "p10": agg.p10, "p90": agg.p90,
                     "p30": agg.p30, "p70": agg.p70, "count": agg.count})
    return rows


def _fig9_series(records: list[dict]) -> list[dict]:
    fit_rows = {row["iter"]: row for row in power_law_table(records)}
    by_point: dict[tuple[int, int], dict[int, list[float]]] = {}
    for rec in records:
        prob = rec.get("problem", {})
        if prob.get("kind") != "dgmvp" or rec.get("p_gm") is None:
            continue
        by_point.setdefault((int(prob["n"]), int(prob["l"])), {}).setdefault(rec["iter"], []).append(rec["p_gm"])
    rows = []
    for (n, l), per_iter in sorted(by_point.items()):
        pc = float(classical_sampler_prob(n, l))
        for it, vals in sorted(per_iter.items()):
            fit = fit_rows.get(it, {})
            rows.append({"iter": it, "n": n, "l": l, "P_c": pc,
                         "mean_Pgm": float(np.mean(vals)),
                         "fit_a": fit.get("a"), "fit_b": fit.get("b")})
    return rows


FIGURE_SERIES = {
    "fig2a": lambda recs: _maxcut_series(recs, "r_post"),
    "fig2b": lambda recs: _maxcut_series(recs, "R"),
    "fig2c": _convergence_series,
    "fig6a": lambda recs: _dgmvp_series(recs, "r_post"),
    "fig6c": lambda recs: _dgmvp_series(recs, "alpha_min"),
    "fig6e": lambda recs: _dgmvp_series(recs, "p_min"),
    "fig9a": _fig9_series,
}

_FIGURE_HEADERS = {
    "fig2a": ["N", "iter", "mean_r", "stderr", "count"],
    "fig2b": ["N", "iter", "mean_R", "stderr", "count"],
    "fig2c": ["N", "iter", "P", "count"],
    "fig6a": ["n", "l", "iter", "mean_r_post", "stderr", "p10", "p90", "p30", "p70", "count"],
    "fig6c": ["n", "l", "iter", "mean_alpha_min", "stderr", "p10", "p90", "p30", "p70", "count"],
    "fig6e": ["n", "l", "iter", "mean_p_min", "stderr", "p10", "p90", "p30", "p70", "count"],
    "fig9a": ["iter", "n", "l", "P_c", "mean_Pgm", "fit_a", "fit_b"],
}


def cmd_plotdata(config: ExperimentConfig, figure_id: str, out: str | None = None) -> int:
    if figure_id not in FIGURE_SERIES:
        raise InvalidInputError(f"unknown figure id {figure_id!r}; known: {sorted(FIGURE_SERIES)}")
    outdir = Path(config.outdir)
    records = _read_records(outdir)
    rows = FIGURE_SERIES[figure_id](records)
    if not rows:
        print(f"warning: no matching records for {figure_id}; writing header only", file=sys.stderr)
    path = Path(out) if out else outdir / "plotdata" / f"{figure_id}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_FIGURE_HEADERS[figure_id])
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in _FIGURE_HEADERS[figure_id]})
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="TOML or JSON config file")
    sub.add_argument("--problem", choices=["maxcut", "dgmvp"])
    sub.add_argument("--sizes", help="maxcut: comma list of N (8,10,12); dgmvp: n:l pairs (4:1,4:2,4:3)")
    sub.add_argument("--count", type=int)
    sub.add_argument("--p", type=int)
    sub.add_argument("--order-t", type=int, dest="order_t")
    sub.add_argument("--percentile-t", type=float, dest="percentile_t")
    sub.add_argument("--epsilon", type=float)
    sub.add_argument("--iterations", type=int)
    sub.add_argument("--budget", type=int)
    sub.add_argument("--shots-opt", type=int, dest="shots_opt")
    sub.add_argument("--shots-final", type=int, dest="shots_final")
    sub.add_argument("--theta-init", choices=["zeros", "random", "carry"], dest="theta_init")
    sub.add_argument("--no-polish", action="store_true")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--outdir")
    sub.add_argument("--workers", type=int)
    sub.add_argument("--paper-scale", action="store_true", dest="paper_scale")


def _parse_sizes(problem: str, text: str):
    if problem == "maxcut":
        return [int(tok) for tok in text.split(",") if tok]
    out = []
    for tok in text.split(","):
        if not tok:
            continue
        n, l = tok.split(":")
        out.append([int(n), int(l)])
    return out


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    fields: dict = {}
    if getattr(args, "config", None):
        fields.update(load_config_file(args.config))
    for name in ("problem", "count", "p", "order_t", "percentile_t", "epsilon",
                 "iterations", "budget", "shots_opt", "shots_final", "theta_init",
                 "seed", "outdir", "workers"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    if getattr(args, "paper_scale", False):
        fields["paper_scale"] = True
        fields.setdefault("count", PAPER_DEFAULT_COUNT)
    if getattr(args, "no_polish", False):
        fields["polish"] = False
    if getattr(args, "sizes", None):
        fields["sizes"] = _parse_sizes(fields.get("problem", "maxcut"), args.sizes)
    if fields.get("percentile_t") is not None and "order_t" not in fields:
        fields["order_t"] = None
    return ExperimentConfig(**fields)


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(prog="iterqaoa", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("gen", "run", "fit"):
        _add_config_flags(subs.add_parser(name))
    verify = subs.add_parser("verify")
    verify.add_argument("what", choices=["g6", "oracles", "all"])
    plot = subs.add_parser("plotdata")
    _add_config_flags(plot)
    plot.add_argument("figure_id")
    plot.add_argument("--out")

    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.what)
        config = build_config(args)
        if args.command == "gen":
            return cmd_gen(config)
        if args.command == "run":
            return cmd_run(config)
        if args.command == "fit":
            return cmd_fit(config)
        if args.command == "plotdata":
            return cmd_plotdata(config, args.figure_id, args.out)
        raise InvalidInputError(f"unknown command {args.command}")
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
