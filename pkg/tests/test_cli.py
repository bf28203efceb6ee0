import json

import pytest

from spvarkit import cli
from spvarkit.generators import degenerate_variables
from spvarkit.model import read_instance
from spvarkit.samplers import SamplerSpec, brute_force_sample


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _strip(records):
    return [{k: v for k, v in r.items() if k != "wall_time"} for r in records]


def test_generate_weak_strong_is_deterministic(tmp_path):
    cfg = _write(tmp_path / "g.json", {"family": "weak_strong", "count": 5,
                                       "params": {"grid": 1, "h_w": -0.42}})
    assert cli.main(["generate", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["generate", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "b")]) == 0
    files = sorted(p.name for p in (tmp_path / "a").glob("*.txt"))
    assert len(files) == 5
    for name in files + ["metadata.jsonl"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_generate_reduced_degeneracy_and_lattice(tmp_path):
    cli.cmd_generate({"family": "reduced_degeneracy", "count": 2, "params": {"m": 2, "n": 5}},
                     1, tmp_path / "rd")
    for f in (tmp_path / "rd").glob("*.txt"):
        assert degenerate_variables(read_instance(f)) == []
    paths = cli.cmd_generate({"family": "lattice3d", "params": {"L": 2}}, 1, tmp_path / "lat")
    p = read_instance(paths[0])
    assert p.num_vars == 8 and len(p.couplers) == 12


def test_generate_maxksat_metadata(tmp_path):
    cli.cmd_generate({"family": "maxksat", "count": 1,
                      "params": {"k": 3, "num_literals": 5, "num_clauses": 7}}, 0, tmp_path)
    meta = json.loads((tmp_path / "metadata.jsonl").read_text())
    assert meta["phi"] == 1.4 and len(meta["clauses"]) == 7


@pytest.fixture
def instances(tmp_path):
    cli.cmd_generate({"family": "u_range", "count": 10, "params": {"m": 1, "r": 3}}, 4,
                     tmp_path / "inst")
    return tmp_path / "inst"


def test_solve_brute_force_records_optima(tmp_path, instances):
    cfg = {"instances": [str(instances / "*.txt")], "sampler": {"kind": "bruteforce"},
           "multistart": {"num_starts": 2, "total_sample_size": 8}}
    records = cli.cmd_solve(cfg, 0, tmp_path / "bf.jsonl")
    assert len(records) == 10
    for rec in records:
        p = read_instance(rec["path"])
        opt = brute_force_sample(p, SamplerSpec(kind="brute_force", num_reads=1)).energies[0]
        assert rec["best_energy"] == opt


def test_raw_and_spvar_budgets_match(tmp_path, instances):
    cfg = {"instances": [str(instances / "*.txt")], "sampler": {"kind": "sa", "num_sweeps": 5},
           "multistart": {"num_starts": 3, "total_sample_size": 20}}
    raw = cli.cmd_solve(cfg, 1, tmp_path / "raw.jsonl", mode="raw")
    spv = cli.cmd_solve(cfg, 1, tmp_path / "spv.jsonl", mode="spvar")
    assert [r["reads_used"] for r in raw] == [r["reads_used"] for r in spv] == [60] * 10
    again = cli.cmd_solve(cfg, 1, tmp_path / "spv2.jsonl", mode="spvar")
    assert _strip(again) == _strip(spv)


def test_unreadable_instance_gives_error_record(tmp_path, instances):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n")
    cfg = {"instances": [str(bad), str(instances / "u_range_0000.txt")],
           "sampler": {"num_sweeps": 5}, "multistart": {"num_starts": 1, "total_sample_size": 4}}
    records = cli.cmd_solve(cfg, 0, tmp_path / "r.jsonl")
    assert "error" in records[0] and "error" not in records[1]


def test_metrics_end_to_end(tmp_path, instances, capsys):
    cfg = _write(tmp_path / "s.json", {
        "instances": [str(instances / "*.txt")], "sampler": {"kind": "brute_force"},
        "multistart": {"num_starts": 2, "total_sample_size": 8}})
    out = str(tmp_path / "res.jsonl")
    assert cli.main(["solve", "--config", cfg, "--out", out]) == 0
    rep = str(tmp_path / "rep.jsonl")
    assert cli.main(["metrics", out, "--best-known", out, "--out", rep, "--seed", "1"]) == 0
    table = capsys.readouterr().out
    assert "res:spvar" in table
    record = json.loads(open(rep).read())
    assert record["fraction_solved"] == 1.0 and record["gap"] == 0
    first = open(rep).read()
    cli.main(["metrics", out, "--best-known", out, "--out", rep, "--seed", "1"])
    assert open(rep).read() == first


def test_metrics_skips_unknown_instances(tmp_path, instances, caplog):
    cfg = {"instances": [str(instances / "u_range_000[01].txt")],
           "sampler": {"kind": "brute_force"},
           "multistart": {"num_starts": 1, "total_sample_size": 4}}
    recs = cli.cmd_solve(cfg, 0, tmp_path / "r.jsonl")
    known = _write(tmp_path / "known.json", {recs[0]["instance_id"]: recs[0]["best_energy"]})
    reports = cli.cmd_metrics([tmp_path / "r.jsonl"], known)
    assert next(iter(reports.values())).num_instances == 1
    assert "no best known" in caplog.text
