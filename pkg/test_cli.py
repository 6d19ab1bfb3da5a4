import json
import math

import pandas as pd
import pytest

from cli import (
    RunConfig, config_from_args, corpus_run, example49_contraction, example49_cyclicity, example49_uniqueness,
    example50_closed_form, main, modulus_epsilons, parse_vector, phi_ball_check, run, sample_starts,
)


def test_parse_vector():
    assert parse_vector("2,2") == [2.0, 2.0]
    assert parse_vector("1.5,-0.5,3,4") == [1.5, -0.5, 3.0, 4.0]


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"norm": "linf", "grid": 4, "seed": 7}))
    config = config_from_args(["modulus", "--config", str(path), "--grid", "5"])
    assert config.command == "modulus"
    assert config.norm == "linf"
    assert config.grid == 5
    assert config.seed == 7


def test_unknown_config_key_is_usage_error(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"norm": "l2", "colour": "red"}))
    assert main(["modulus", "--config", str(path)]) == 2


def test_bad_command_is_usage_error():
    assert main(["plot"]) == 2
    assert run(RunConfig(command="plot")) == 2


def test_modulus_command(tmp_path):
    output = tmp_path / "modulus.csv"
    assert main(["modulus", "--norm", "l2", "--grid", "10", "--output", str(output)]) == 0
    frame = pd.read_csv(output)
    assert list(frame.columns) == ["epsilon", "delta", "bound"]
    assert len(frame) == 10
    for eps, delta in zip(frame["epsilon"], frame["delta"]):
        assert delta == pytest.approx(1 - math.sqrt(1 - eps ** 2 / 4), abs=1e-5)


def test_modulus_epsilons():
    assert modulus_epsilons(4).tolist() == [0.5, 1.0, 1.5, 2.0]


def test_directional_modulus_command(tmp_path):
    output = tmp_path / "directional.csv"
    assert main(["modulus", "--norm", "linf", "--grid", "4", "--direction", "0,1", "--output", str(output)]) == 0
    frame = pd.read_csv(output)
    assert (frame["delta"][frame["epsilon"] <= 1.0] <= 1e-9).all()


def test_unknown_norm_is_usage_error(tmp_path):
    assert main(["modulus", "--norm", "l0", "--output", str(tmp_path / "m.csv")]) == 2


def test_falsify_matches_expected_verdict(tmp_path):
    output = tmp_path / "verdict.json"
    assert main(["falsify", "--property", "UC", "--pair", "ex43", "--nmax", "2000", "--output", str(output)]) == 0
    record = json.loads(output.read_text())
    assert record["schema"] == 1
    assert record["outcome"] == "falsified"
    assert record["expected"] == "falsified"

    assert main(["falsify", "--property", "BUC", "--pair", "ex43", "--nmax", "2000", "--output", str(output)]) == 0
    record = json.loads(output.read_text())
    assert record["outcome"] == "no_counterexample_within_budget"
    assert ["example43", "unbounded family"] in record["rejected"]


def test_falsify_unexpected_verdict_exits_one(tmp_path):
    # the flat-edge witness needs a long tail; a short budget misses it
    output = tmp_path / "verdict.json"
    code = main(["falsify", "--property", "UC", "--pair", "ex15_bc", "--nmax", "100", "--output", str(output)])
    assert code == 1


def test_unknown_pair_is_usage_error(tmp_path):
    assert main(["falsify", "--pair", "ex99", "--output", str(tmp_path / "v.json")]) == 2


def test_solve_command(tmp_path):
    output = tmp_path / "trace.jsonl"
    assert main(["solve", "--map", "overlap_contraction", "--x0", "0,3", "--tol", "1e-8",
                 "--output", str(output)]) == 0
    lines = [json.loads(line) for line in output.read_text().splitlines()]
    assert lines[0]["kind"] == "trace"
    assert lines[-1]["certificate"]["point"] == pytest.approx([0.5, 0.0], abs=1e-7)


def test_solve_coupled_map(tmp_path):
    output = tmp_path / "coupled.jsonl"
    assert main(["solve", "--map", "reflection_quarter", "--x0", "2,1,1,-1", "--output", str(output)]) == 0
    header = json.loads(output.read_text().splitlines()[0])
    assert header["map"] == "reflection_quarter_product"
    assert header["converged"] is True


def test_solve_is_deterministic(tmp_path):
    first, second = tmp_path / "first.jsonl", tmp_path / "second.jsonl"
    for path in (first, second):
        assert main(["solve", "--map", "overlap_contraction", "--x0", "0,3", "--output", str(path)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_solve_budget_exhaustion_exits_one(tmp_path):
    output = tmp_path / "trace.jsonl"
    code = main(["solve", "--map", "overlap_contraction", "--x0", "0,3", "--nmax", "4", "--tol", "1e-12",
                 "--output", str(output)])
    assert code == 1
    assert output.exists()


def test_solve_unknown_map_and_bad_start(tmp_path):
    output = str(tmp_path / "trace.jsonl")
    assert main(["solve", "--map", "example99", "--output", output]) == 2
    assert main(["solve", "--map", "overlap_contraction", "--x0", "1,2,3", "--output", output]) == 2


def test_unwritable_output(tmp_path):
    missing = tmp_path / "missing" / "trace.jsonl"
    assert main(["solve", "--map", "overlap_contraction", "--x0", "0,3", "--output", str(missing)]) == 2


def test_distances_command(tmp_path):
    output = tmp_path / "distances.json"
    assert main(["distances", "--budget", "128", "--output", str(output)]) == 0
    data = json.loads(output.read_text())
    assert data["schema"] == 1
    assert all(row["passed"] for row in data["distances"])
    assert any(region["name"] == "ex49_B" for region in data["regions"])


def test_corpus_with_starved_solver():
    config = RunConfig(command="corpus", n_max=4, falsify_n_max=200, budget=128, grid=4)
    frame, code = corpus_run(config)
    assert code == 1
    assert list(frame.columns) == ["entry", "kind", "expected", "measured", "status"]
    solver_rows = frame[frame["kind"] == "solver"]
    assert len(solver_rows) == 4
    assert (solver_rows["status"] == "FAIL").all()
    assert solver_rows["measured"].str.contains("BudgetError").all()
    distance_rows = frame[frame["kind"].isin(["distance", "map", "closed_form", "phi"])]
    assert len(distance_rows) == 7 + 4
    assert (distance_rows["status"] == "PASS").all()


def test_point_type_mismatch_is_usage_error(tmp_path):
    assert main(["modulus", "--norm", "product", "--output", str(tmp_path / "m.csv")]) == 2


def test_nonpositive_falsify_budget_is_usage_error(tmp_path):
    output = str(tmp_path / "v.json")
    assert main(["falsify", "--pair", "ex43", "--nmax", "0", "--output", output]) == 2
    assert main(["falsify", "--pair", "ex43", "--nmax", "-3", "--output", output]) == 2


def test_directional_verdict_is_printed(tmp_path, capsys):
    assert main(["modulus", "--norm", "l2", "--grid", "4", "--direction", "1,0",
                 "--output", str(tmp_path / "m.csv")]) == 0
    assert "Uniformly convex in direction [1.0, 0.0]: yes" in capsys.readouterr().out


def test_solve_resumes_from_partial_trace(tmp_path):
    partial, finished = tmp_path / "partial.jsonl", tmp_path / "finished.jsonl"
    assert main(["solve", "--map", "example49", "--x0", "2,2", "--nmax", "4", "--tol", "1e-10",
                 "--output", str(partial)]) == 1
    assert main(["solve", "--map", "example49", "--resume", str(partial), "--tol", "1e-10",
                 "--output", str(finished)]) == 0
    lines = [json.loads(line) for line in finished.read_text().splitlines()]
    assert lines[1]["point"] == json.loads(partial.read_text().splitlines()[5])["point"]
    assert lines[-1]["certificate"]["point"] == pytest.approx([1.0, 1.0], abs=1e-8)


def test_resume_rejects_foreign_or_broken_trace(tmp_path):
    partial, output = tmp_path / "partial.jsonl", str(tmp_path / "out.jsonl")
    assert main(["solve", "--map", "example49", "--x0", "2,2", "--nmax", "4", "--tol", "1e-10",
                 "--output", str(partial)]) == 1
    assert main(["solve", "--map", "overlap_contraction", "--resume", str(partial), "--output", output]) == 2
    broken = tmp_path / "broken.jsonl"
    broken.write_text("{}\n")
    assert main(["solve", "--map", "example49", "--resume", str(broken), "--output", output]) == 2
    assert main(["solve", "--map", "example49", "--resume", str(tmp_path / "absent.jsonl"),
                 "--output", output]) == 2


def test_seed_moves_starts():
    first, second = sample_starts("example49", 4, 1), sample_starts("example49", 4, 2)
    assert len(first) == len(second) == 4
    assert first != second
    assert sample_starts("example49", 4, 1) == first


@pytest.mark.parametrize("seed", [1, 2])
@pytest.mark.parametrize("check", [example49_uniqueness, example49_cyclicity, example49_contraction,
                                   phi_ball_check])
def test_seeded_checks_keep_their_verdict(check, seed):
    measured, passed = check(RunConfig(seed=seed))
    assert passed, measured


def test_example50_closed_form_entry():
    measured, passed = example50_closed_form(RunConfig())
    assert passed, measured


def test_corpus_passes_at_tighter_tolerance():
    frame, code = corpus_run(RunConfig(command="corpus", tol_scale=0.1))
    assert (frame["status"] == "PASS").all(), frame[frame["status"] != "PASS"].to_string()
    assert code == 0
    assert {"map", "solver", "closed_form", "phi", "falsification", "modulus"} <= set(frame["kind"])
