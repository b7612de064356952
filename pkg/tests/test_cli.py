"""Command-line interface tests: schemas, golden outputs, reproducibility."""

import json

import yaml

from reflectwalk import cli


def run_cli(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def write_yaml(path, obj):
    path.write_text(yaml.safe_dump(obj))
    return str(path)


def test_invariant_golden_output(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml",
                     {"measure": {"atoms": [[1, 0.5], [2, 0.5]]}})
    rc, out, _ = run_cli(capsys, "invariant", "--config", cfg)
    assert rc == 0
    assert out.splitlines() == ["x,mass", "0,0.5", "1,0.75", "2,0.25",
                                "total_mass,1.5"]


def test_criteria_output_schema(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml",
                     {"measure": {"atoms": [[5, 1.0]]}, "truncation": 4096})
    rc, out, _ = run_cli(capsys, "criteria", "--config", cfg)
    payload = json.loads(out)
    assert rc == 0
    assert payload["schema_version"] == 1
    assert payload["sqrt_moment"] == "holds"
    assert payload["truncation"] == 4096


def test_classes_golden_coset_split(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml", {
        "joint": {"dims": [2, 0, 0, 0],
                  "atoms": [[[-1, 3], 0.5], [[3, -1], 0.5]]},
        "window": 12,
    })
    rc, out, _ = run_cli(capsys, "classes", "--config", cfg, "--out",
                         str(tmp_path / "run"))
    assert rc == 0
    payload = json.loads((tmp_path / "run" / "classes.json").read_text())
    assert payload["n_cosets"] == 2
    assert payload["parity_group"] == [[0, 0], [1, 1]]
    by_coset = {c["coset_index"]: c for c in payload["classes"]}
    even = {(i, j) for i in range(13) for j in range(13)
            if (i + j) % 2 == 0} - {(0, 0)}
    assert {tuple(m) for m in by_coset[0]["members"]} == even
    assert by_coset[0]["transient_classes"] == [[[0, 0]]]


def test_witness_passes_and_writes(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml",
                     {"measure": {"atoms": [[2, 0.5], [3, 0.5]]},
                      "verified_range": 50})
    rc, out, _ = run_cli(capsys, "witness", "--config", cfg, "--out",
                         str(tmp_path / "w"))
    assert rc == 0
    assert "PASS" in out
    payload = json.loads((tmp_path / "w" / "witness.json").read_text())
    assert payload["checks_passed"] is True
    assert payload["verified_k"] == 50


def test_validate_reports_failures(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml", {
        "joint": {"dims": [1, 0, 3, 0],
                  "product": [{"atoms": [[2, 0.5], [4, 0.5]]}]
                  + [{"atoms": [[-1, 0.5], [1, 0.5]]}] * 3},
    })
    rc, out, _ = run_cli(capsys, "validate", "--config", cfg)
    assert rc == 0  # validate always reports
    payload = json.loads(out)
    assert payload["ok"] is False
    status = {c["check"]: c["status"] for c in payload["checks"]}
    assert status["dims_free"] == "failed"
    assert status["normalized_0"] == "failed"
    msg = [c["message"] for c in payload["checks"]
           if c["check"] == "normalized_0"][0]
    assert "divide the lattice by 2" in msg


def test_validate_flags_trivial_reflecting_marginal(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml", {
        "joint": {"dims": [1, 0, 0, 0],
                  "product": [{"atoms": [[-2, 0.5], [0, 0.5]]}]},
    })
    rc, out, _ = run_cli(capsys, "validate", "--config", cfg)
    payload = json.loads(out)
    assert payload["ok"] is False


def test_error_exit_is_machine_readable(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml",
                     {"measure": {"atoms": [[-1, 0.5], [1, 0.5]]}})
    rc, out, err = run_cli(capsys, "invariant", "--config", cfg)
    assert rc == 2
    payload = json.loads(err)
    assert payload["error"] == "MeasureError"
    assert "ladder" in payload["message"]


def test_ladder_exact_and_mc(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml",
                     {"measure": {"atoms": [[-1, 0.5], [1, 0.5]]},
                      "method": "exact"})
    rc, out, _ = run_cli(capsys, "ladder", "--config", cfg)
    assert rc == 0
    assert "0,0.5" in out and "1,0.5" in out
    cfg2 = write_yaml(tmp_path / "c2.yaml",
                      {"measure": {"atoms": [[-1, 0.5], [1, 0.5]]},
                       "method": "monte_carlo", "samples": 2000,
                       "step_cap": 100000, "seed": 3})
    rc2, out2, _ = run_cli(capsys, "ladder", "--config", cfg2)
    assert rc2 == 0 and "method,monte_carlo" in out2


def test_simulate_and_backward_artifacts(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml", {
        "measure": {"atoms": [[1, 0.5], [2, 0.5]]},
        "steps": 50, "seed": 9,
    })
    rc, out, _ = run_cli(capsys, "simulate", "--config", cfg, "--out",
                         str(tmp_path / "sim"))
    assert rc == 0
    rows = (tmp_path / "sim" / "trajectory.csv").read_text().splitlines()
    assert rows[0] == "step,x0"
    assert len(rows) == 52
    cfgb = write_yaml(tmp_path / "b.yaml", {
        "measure": {"atoms": [[1, 0.5], [2, 0.5]]},
        "parity": [0], "horizon": 200, "samples": 500, "seed": 4,
    })
    rcb, outb, _ = run_cli(capsys, "backward", "--config", cfgb, "--out",
                           str(tmp_path / "bw"))
    assert rcb == 0
    assert "converged fraction: 1.0" in outb


def test_experiment_batch_and_metadata_regeneration(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "exp.yaml", {
        "seed": 1234,
        "experiments": [
            {"name": "ret", "probe": "return_time",
             "measure": {"atoms": [[1, 0.5], [2, 0.5]]},
             "budget": 20000, "replicas": 8},
            {"name": "sym", "probe": "symmetrization",
             "joint": {"dims": [0, 0, 1, 0],
                       "product": [{"atoms": [[-1, 0.5], [1, 0.5]]}]},
             "horizon": 3},
        ],
    })
    out1 = tmp_path / "run1"
    rc, _, _ = run_cli(capsys, "experiment", "--config", cfg, "--out", str(out1))
    assert rc == 0
    ev = json.loads((out1 / "ret.json").read_text())
    assert ev["evidence"]["category"] == "positive_evidence"
    sym = json.loads((out1 / "sym.json").read_text())
    assert sym["max_discrepancy"] < 1e-12
    # regenerate from the metadata file alone
    out2 = tmp_path / "run2"
    rc2, _, _ = run_cli(capsys, "experiment", "--config",
                        str(out1 / "metadata.json"), "--out", str(out2))
    assert rc2 == 0
    for name in ("ret.json", "sym.json"):
        assert (out1 / name).read_text() == (out2 / name).read_text()
    assert (out1 / "ret.csv").read_text() == (out2 / "ret.csv").read_text()


def test_experiment_results_independent_of_thread_count(tmp_path, capsys):
    cfg = {
        "seed": 77,
        "experiments": [
            {"name": f"probe{i}", "probe": "return_time",
             "measure": {"atoms": [[1, 0.5], [2, 0.5]]},
             "budget": 10_000, "replicas": 4}
            for i in range(3)
        ],
    }
    p = write_yaml(tmp_path / "batch.yaml", cfg)
    rc1, _, _ = run_cli(capsys, "experiment", "--config", p, "--out",
                        str(tmp_path / "serial"), "--threads", "1")
    rc2, _, _ = run_cli(capsys, "experiment", "--config", p, "--out",
                        str(tmp_path / "pooled"), "--threads", "3")
    assert rc1 == rc2 == 0
    for i in range(3):
        a = (tmp_path / "serial" / f"probe{i}.json").read_text()
        b = (tmp_path / "pooled" / f"probe{i}.json").read_text()
        assert a == b


def test_simulate_regeneration_bitwise(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "c.yaml", {
        "measure": {"atoms": [[1, 0.25], [2, 0.75]]}, "steps": 200, "seed": 5,
    })
    rc, _, _ = run_cli(capsys, "simulate", "--config", cfg, "--out",
                       str(tmp_path / "a"))
    rc2, _, _ = run_cli(capsys, "simulate", "--config",
                        str(tmp_path / "a" / "metadata.json"), "--out",
                        str(tmp_path / "b"))
    assert rc == rc2 == 0
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == \
        (tmp_path / "b" / "trajectory.csv").read_bytes()
