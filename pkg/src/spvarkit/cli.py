"""Command-line front end: ``generate``, ``solve`` and ``metrics``.

Campaign configs are JSON documents; results and metadata are JSON lines, one
record per instance, written in canonical instance order.
"""
from __future__ import annotations

import argparse
import glob
import hashlib
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import generators
from .metrics import InstanceResult, format_table, summarize
from .model import qubo_to_ising, read_instance, write_instance
from .multistart import MultiStartParams, run_multistart, run_restarts
from .rng import derive_seed
from .samplers import SamplerSpec
from .spvar import SpvarParams

log = logging.getLogger("spvarkit")

SAMPLER_ALIASES = {"sa": "sa", "pticm": "pticm", "bruteforce": "brute_force",
                   "brute_force": "brute_force"}


def _load_config(path):
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _dumps(record):
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


# -- generate ---------------------------------------------------------------

def _generate_one(family, params, seed):
    """Return ``(IsingProblem, extra_metadata)`` for one instance."""
    if family == "weak_strong":
        return generators.gen_weak_strong(params.get("grid", 1), params.get("h_w", -0.42),
                                          seed), {}
    if family == "reduced_degeneracy":
        return generators.gen_reduced_degeneracy(params.get("m", 2), params.get("n", 5),
                                                 params.get("nonzero_bias", True), seed), {}
    if family == "u_range":
        return generators.gen_u_range(params.get("m", 2), params.get("r", 10), seed), {}
    if family == "lattice3d":
        return generators.gen_3d_lattice(params.get("L", 4),
                                         params.get("distribution", "gaussian"), seed), {}
    if family == "maxksat":
        inst = generators.gen_maxksat(params.get("k", 2), params.get("num_literals", 20),
                                      params.get("num_clauses", 20), seed)
        qubo, aux = generators.maxksat_to_qubo(inst)
        return qubo_to_ising(qubo), {"clauses": [list(c) for c in inst.clauses],
                                     "num_literals": inst.num_literals, "phi": inst.phi,
                                     "num_aux": len(aux)}
    raise ValueError(f"unknown instance family {family!r}")


def cmd_generate(config, seed, out):
    family = config["family"]
    params = config.get("params", {})
    count = int(config.get("count", 1))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    meta = []
    paths = []
    for k in range(count):
        inst_seed = derive_seed(seed, k, "generate")
        problem, extra = _generate_one(family, params, inst_seed)
        name = f"{family}_{k:04d}.txt"
        (out / name).write_text(write_instance(problem))
        meta.append({"file": name, "family": family, "params": params, "seed": inst_seed,
                     "num_vars": problem.num_vars, "num_couplers": len(problem.couplers),
                     **extra})
        paths.append(out / name)
    with open(out / "metadata.jsonl", "w") as fh:
        for rec in meta:
            fh.write(_dumps(rec) + "\n")
    return paths


# -- solve ------------------------------------------------------------------

def _instance_paths(config, extra):
    patterns = list(config.get("instances", [])) + list(extra)
    paths = []
    for pat in patterns:
        hits = sorted(glob.glob(pat))
        paths.extend(hits if hits else [pat])
    return sorted(dict.fromkeys(paths))


def _multistart_params(cfg, master_seed):
    cfg = dict(cfg)
    spvar_keys = ("fixing_threshold", "elite_threshold", "adaptive_elite",
                  "correlation_threshold", "correlation_elite_threshold")
    sp = SpvarParams(**{k: cfg.pop(k) for k in spvar_keys if k in cfg})
    total = cfg.pop("total_sample_size", None)
    if total is not None:
        zero_bias = cfg.pop("zero_bias_mode", False)
        return MultiStartParams.from_budget(total, zero_bias, spvar=sp, master_seed=master_seed,
                                            **cfg)
    return MultiStartParams(spvar=sp, master_seed=master_seed, **cfg)


def _config_string(config):
    return "".join("+" if v > 0 else "-" for v in config)


def _solve_one(args):
    index, path, sampler_cfg, ms_cfg, mode, seed = args
    record = {"instance_id": Path(path).stem, "path": str(path), "mode": mode,
              "sampler": sampler_cfg.get("kind", "sa")}
    t0 = time.perf_counter()
    try:
        problem = read_instance(path)
        instance_seed = derive_seed(seed, index, "instance")
        spec = SamplerSpec(**sampler_cfg)
        params = _multistart_params(ms_cfg, instance_seed)
        runner = run_multistart if mode == "spvar" else run_restarts
        result = runner(problem, spec, params)
    except Exception as exc:  # one bad instance must not stop the campaign
        record["error"] = f"{type(exc).__name__}: {exc}"
        record["wall_time"] = time.perf_counter() - t0
        return record
    per_start = [r.recorded_energies.tolist() for r in result.per_start]
    record.update({
        "num_vars": problem.num_vars,
        "best_energy": result.best_energy,
        "best_config": _config_string(result.best_config),
        "per_start_energies": per_start,
        "energies_digest": hashlib.sha256(_dumps(per_start).encode()).hexdigest(),
        "fixed_counts": [r.fixed_count for r in result.per_start],
        "inferred_counts": [r.inferred_count for r in result.per_start],
        "component_counts": [r.component_count for r in result.per_start],
        "seeds": [r.seeds for r in result.per_start],
        "reads_used": result.reads_used,
        "total_sample_per_start": params.sample_per_start,
        "instance_seed": instance_seed,
        "wall_time": time.perf_counter() - t0,
    })
    return record


def cmd_solve(config, seed, out, mode=None, sampler=None, jobs=1, instances=()):
    mode = mode or config.get("mode", "spvar")
    if mode not in ("raw", "spvar"):
        raise ValueError(f"mode must be raw or spvar, got {mode!r}")
    sampler_cfg = dict(config.get("sampler", {}))
    if sampler:
        sampler_cfg["kind"] = SAMPLER_ALIASES[sampler]
    elif "kind" in sampler_cfg:
        sampler_cfg["kind"] = SAMPLER_ALIASES[sampler_cfg["kind"]]
    ms_cfg = config.get("multistart", {})
    paths = _instance_paths(config, instances)
    tasks = [(k, p, sampler_cfg, ms_cfg, mode, seed) for k, p in enumerate(paths)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_solve_one, tasks))
    else:
        records = [_solve_one(t) for t in tasks]
    with open(out, "w") as fh:
        for rec in records:
            if "error" in rec:
                log.warning("instance %s failed: %s", rec["instance_id"], rec["error"])
            fh.write(_dumps(rec) + "\n")
    return records


# -- metrics ----------------------------------------------------------------

def read_records(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_best_known(path):
    """JSON object ``{instance_id: energy}`` or JSON lines with ``best_energy``."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
        if isinstance(data, dict):
            return {str(k): float(v) for k, v in data.items()}
    except json.JSONDecodeError:
        pass
    known = {}
    for line in text.splitlines():
        if line.strip():
            rec = json.loads(line)
            if rec.get("best_energy") is not None:
                e = float(rec["best_energy"])
                known[rec["instance_id"]] = min(e, known.get(rec["instance_id"], e))
    return known


def cmd_metrics(results_paths, best_known_path, out=None, seed=0, B=1000):
    known = load_best_known(best_known_path)
    groups = {}
    for path in results_paths:
        for rec in read_records(path):
            if "error" in rec:
                continue
            if rec["instance_id"] not in known:
                log.warning("no best known energy for %s; excluded", rec["instance_id"])
                continue
            name = f"{Path(path).stem}:{rec['mode']}"
            groups.setdefault(name, []).append(rec)
    reports = {}
    for name, recs in groups.items():
        results = [InstanceResult(known[r["instance_id"]], r["per_start_energies"],
                                  r["total_sample_per_start"], mode=r["mode"],
                                  instance_id=r["instance_id"]) for r in recs]
        fixed = [np.mean(r["fixed_counts"]) / r["num_vars"] for r in recs
                 if r["mode"] == "spvar" and r["num_vars"]]
        reports[name] = summarize(results, B=B, seed=seed, fixed_fractions=fixed or None)
    if out:
        with open(out, "w") as fh:
            for name, rep in reports.items():
                fh.write(_dumps({"set": name, **rep.as_record()}) + "\n")
    return reports


# -- entry point --------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="spvarkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an instance set and its metadata")
    g.add_argument("--config", required=True)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("solve", help="run a raw or multi-start SPVAR campaign")
    s.add_argument("instances", nargs="*", help="instance files or globs")
    s.add_argument("--config")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--mode", choices=("raw", "spvar"))
    s.add_argument("--sampler", choices=("sa", "pticm", "bruteforce"))
    s.add_argument("--out", required=True, help="results file (JSON lines)")

    m = sub.add_parser("metrics", help="summarize result files against best known energies")
    m.add_argument("results", nargs="+")
    m.add_argument("--best-known", required=True)
    m.add_argument("--config")
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--bootstrap", type=int, default=1000)
    m.add_argument("--out")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    config = _load_config(getattr(args, "config", None))
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    try:
        if args.command == "generate":
            paths = cmd_generate(config, seed, args.out)
            print(f"wrote {len(paths)} instances to {args.out}")
        elif args.command == "solve":
            records = cmd_solve(config, seed, args.out, args.mode, args.sampler, args.jobs,
                                args.instances)
            failed = sum("error" in r for r in records)
            print(f"solved {len(records) - failed}/{len(records)} instances -> {args.out}")
        else:
            reports = cmd_metrics(args.results, args.best_known, args.out, seed, args.bootstrap)
            print(format_table(reports))
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
