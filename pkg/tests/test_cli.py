import argparse
import json

import pytest

from iparc.bench import BenchReport, load_suite, run_bench
from iparc.cli import main, parse_duration
from iparc.errors import TaskSchemaError
from iparc.program import parse_program
from iparc.synthesis import SynthConfig, verify
from iparc.taskio import load_solution, load_task, save_solution


@pytest.fixture
def suite(tmp_path):
    out = tmp_path / "suite"
    assert main(["generate", "B-sequence", "--count", "3", "--seed", "5", "--width", "10", "--height", "10", "--out", str(out)]) == 0
    return out


def task_files(suite):
    return [suite / e["file"] for e in json.loads((suite / "manifest.json").read_text())["tasks"]]


def test_parse_duration():
    assert parse_duration("30s") == 30
    assert parse_duration("500ms") == 0.5
    assert parse_duration("2m") == 120
    assert parse_duration("1h") == 3600
    assert parse_duration("7") == 7
    with pytest.raises(argparse.ArgumentTypeError):
        parse_duration("soon")


def test_generate_is_reproducible(tmp_path, suite):
    again = tmp_path / "again"
    main(["generate", "B-sequence", "--count", "3", "--seed", "5", "--width", "10", "--height", "10", "--out", str(again)])
    for f in sorted(suite.iterdir()):
        assert f.read_bytes() == (again / f.name).read_bytes()
    assert len(task_files(suite)) == 3


def test_solve_prints_a_parseable_program(suite, tmp_path, capsys):
    path = task_files(suite)[0]
    out = tmp_path / "sol.txt"
    assert main(["solve", str(path), "--budget", "60s", "--out", str(out)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1].startswith("solved=True")
    program = parse_program("\n".join(lines[:-1]))
    task = load_task(path)
    assert verify(program, task)
    assert load_solution(out) == program


def test_solve_without_solution_exits_2(tmp_path, capsys):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"id": "x", "category": "A-simple", "num_colors": 2, "pairs": [{"input": [[0, 0]], "output": [[1, 0]]}]}))
    assert main(["solve", str(path), "--budget", "5s"]) == 2
    assert "no solution" in capsys.readouterr().out


def test_verify_exit_codes(suite, tmp_path, capsys):
    path = task_files(suite)[0]
    task = load_task(path)
    good = tmp_path / "good.txt"
    save_solution(task.ground_truth, good)
    assert main(["verify", str(path), str(good)]) == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("Band 1 - Dilation SE1\n")
    assert main(["verify", str(path), str(bad)]) == 2
    out = capsys.readouterr().out
    assert "pair 0 fails" in out and "got" in out and "want" in out


@pytest.mark.parametrize("content", ["{not json", '{"id": "x"}'])
def test_malformed_task_exits_1(tmp_path, capsys, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert main(["solve", str(path)]) == 1
    assert capsys.readouterr().err.startswith("iparc:")


def test_missing_file_and_bad_flag_exit_1(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "missing.json")]) == 1
    assert main(["generate", "C-weird", "--out", str(tmp_path / "o")]) == 1
    bad = tmp_path / "sol.txt"
    bad.write_text("Band 1 - Frobnicate SE1")
    task = tmp_path / "t.json"
    task.write_text(json.dumps({"id": "x", "category": "A-simple", "num_colors": 2, "pairs": [{"input": [[0]], "output": [[0]]}]}))
    assert main(["verify", str(task), str(bad)]) == 1


def test_env_overrides_reach_the_search(suite, monkeypatch, capsys):
    monkeypatch.setenv("IPARC_SEED", "77")
    assert main(["solve", str(task_files(suite)[0])]) == 0
    assert "seed=77" in capsys.readouterr().out


# -- bench --------------------------------------------------------------------------------


def test_bench_writes_reloadable_report(suite, capsys):
    assert main(["bench", str(suite), "--budget", "60s"]) == 0
    out = capsys.readouterr().out
    assert "Category" in out and "B-sequence" in out
    report = BenchReport.load(suite / "report.json")
    assert BenchReport.from_dict(report.to_dict()) == report
    (row,) = report.rows
    assert row.attempted == 3 and row.solved == 3
    assert [t.id for t in report.tasks] == [load_task(f).id for f in task_files(suite)]
    assert all(t.reduction_factor >= 1 for t in report.tasks)


def test_bench_jobs_do_not_change_results(suite):
    tasks = load_suite(suite)
    cfg = SynthConfig(time_budget=60)
    one = run_bench(tasks, cfg, jobs=1, warmup=2)
    four = run_bench(tasks, cfg, jobs=4, warmup=2)
    strip = lambda r: [(t.id, t.solved, t.program, t.candidates_tested) for t in r.tasks]  # noqa: E731
    assert strip(one) == strip(four)
    assert one.warmup == 2


def test_load_suite_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_suite(tmp_path)
    (tmp_path / "manifest.json").write_text('{"nope": 1}')
    with pytest.raises(TaskSchemaError):
        load_suite(tmp_path)
