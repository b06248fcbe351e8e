import json

import numpy as np
import pytest

from iparc.errors import TaskSchemaError, TaskValidationError
from iparc.morphology import Image
from iparc.program import parse_program
from iparc.taskio import (
    Category,
    Task,
    TaskPair,
    import_task,
    load_solution,
    load_task,
    register_importer,
    save_solution,
    save_task,
    task_to_dict,
    validate_task,
)


def write(tmp_path, data, name="t.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


MINIMAL = {"id": "m", "category": "A-simple", "num_colors": 2, "pairs": [{"input": [[0, 1], [1, 0]], "output": [[1, 1], [1, 1]]}]}


def random_task(rng, index: int) -> Task:
    k = int(rng.integers(2, 5))
    h, w = (int(v) for v in rng.integers(1, 7, 2))
    snaps = int(rng.integers(0, 3))
    pairs = tuple(
        TaskPair(
            Image(rng.integers(0, k, (h, w)), k),
            Image(rng.integers(0, k, (h, w)), k),
            tuple(Image(rng.integers(0, k, (h, w)), k) for _ in range(snaps)),
        )
        for _ in range(int(rng.integers(1, 5)))
    )
    truth = parse_program("Band 1 - Iterate 2x Dilation SE3") if index % 2 else None
    return Task(f"t{index}", list(Category)[index % 6], k, pairs, truth)


def test_minimal_file(tmp_path):
    task = load_task(write(tmp_path, MINIMAL))
    assert len(task.pairs) == 1
    assert task.category is Category.A_SIMPLE


def test_dimension_mismatch_names_pair(tmp_path):
    bad = json.loads(json.dumps(MINIMAL))
    bad["pairs"][0]["output"] = [[0, 0, 0]] * 3
    with pytest.raises(TaskValidationError) as err:
        load_task(write(tmp_path, bad))
    assert "pairs[0]" in str(err.value)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("pairs"),
        lambda d: d.__setitem__("category", "C-weird"),
        lambda d: d["pairs"][0].__setitem__("input", [[0, 1], [1]]),
        lambda d: d["pairs"][0].__setitem__("input", [[0, "a"], [1, 0]]),
    ],
)
def test_schema_errors(tmp_path, mutate):
    data = json.loads(json.dumps(MINIMAL))
    mutate(data)
    with pytest.raises(TaskSchemaError):
        load_task(write(tmp_path, data))


def test_not_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{nope")
    with pytest.raises(TaskSchemaError):
        load_task(path)


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_task(tmp_path / "missing.json")


def test_round_trip_random_tasks(tmp_path):
    rng = np.random.default_rng(4)
    for i in range(100):
        task = random_task(rng, i)
        path = tmp_path / f"{i}.json"
        save_task(task, path)
        assert load_task(path) == task


def test_saves_are_byte_identical(tmp_path):
    task = random_task(np.random.default_rng(1), 1)
    save_task(task, tmp_path / "a.json")
    save_task(task, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_ground_truth_saved_as_solution_text():
    task = random_task(np.random.default_rng(2), 1)
    assert task_to_dict(task)["solution"] == "Band 1 - Iterate 2× Dilation SE3"


def test_validate_examples():
    rng = np.random.default_rng(3)
    good = random_task(rng, 0)
    assert validate_task(good) == []
    img = Image(np.array([[0, 2]]), 3)
    two = Task("k2", Category.A_SIMPLE, 2, (TaskPair(img, img),))
    codes = [(v.code, v.path) for v in validate_task(two)]
    assert ("COLOR_OUT_OF_RANGE", "pairs[0].input") in codes
    a = TaskPair(img, img, (img,))
    b = TaskPair(img, img)
    mixed = Task("s", Category.A_HARD, 3, (a, b))
    assert [v.code for v in validate_task(mixed)] == ["SNAPSHOT_COUNT_MISMATCH"]


def test_solution_files(tmp_path):
    p = parse_program("Hit-Or-Miss SE8\nBand 1 - Dilation SE1\nColour rule: [[0,0,0],[0,1,2],[1,0,1],[1,1,2]]")
    save_solution(p, tmp_path / "s.txt")
    assert load_solution(tmp_path / "s.txt") == p


def test_importer_extension_point(tmp_path):
    register_importer("minimal-rows", lambda path: load_task(path))
    path = write(tmp_path, MINIMAL)
    assert import_task(path, "minimal-rows") == load_task(path)
    with pytest.raises(ValueError):
        import_task(path, "official")
