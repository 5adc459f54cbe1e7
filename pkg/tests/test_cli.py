import json
import subprocess
import sys

import pytest

from quasinormal.cli import ConfigError, main, parse_matrix, validate_config


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_check_separating_shift(capsys):
    code, out, _ = run(["check", "--exhibit", "prz3:n=3", "--suite", "embry", "--nmax", "6", "--no-timestamp"],
                       capsys)
    assert code == 0
    rep = json.loads(out)
    holds = sorted(int(e["predicate"].split("=")[1].rstrip("]")) for e in rep["entries"]
                   if e["predicate"].startswith("power_identity") and e["status"] == "Holds")
    assert holds == [0, 1, 3]
    assert rep["timestamp"] is None and rep["schema"] == 1


def test_check_matrix_with_expectation(capsys):
    code, out, _ = run(["check", "--matrix", "[[0,1],[0,0]]", "--predicate", "quasinormal",
                        "--expect", "quasinormal=Fails", "--no-timestamp"], capsys)
    assert code == 0
    entry = json.loads(out)["entries"][0]
    assert entry["status"] == "Fails" and float(entry["discrepancy"]) == 1.0


def test_unexpected_verdict_exits_one(capsys):
    code, _, _ = run(["check", "--matrix", "[[0,1],[0,0]]", "--predicate", "quasinormal",
                      "--expect", "quasinormal=Holds"], capsys)
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["check", "--matrix", "[[1,2],[3]]"],
    ["check", "--matrix", "[[1,0],[0,1]]", "--predicate", "bogus"],
    ["exhibit", "prz9"],
    ["exhibit", "prz3:n=1"],
    ["corpus", "--dims", "0..3"],
    ["frobnicate"],
    ["check", "--matrix", "[1,", "--predicate", "quasinormal"],
])
def test_config_errors_exit_two(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2


def test_schema_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        validate_config({"operator": {"matrix": [[1]]}, "colour": "blue"})
    with pytest.raises(ConfigError):
        validate_config({"operator": {"matrix": [[1]], "exhibit": "prz2"}})
    validate_config({"operator": {"matrix": [[1, [0, 1]], [0, 1]]}, "predicates": ["quasinormal"]})


def test_parse_matrix():
    m = parse_matrix([[1, [0, 2]], [0, 1]])
    assert m[0, 1] == 2j
    with pytest.raises(ConfigError):
        parse_matrix([[1, 2]])


def test_config_file(tmp_path, capsys):
    cfg = {"operator": {"tree": {"family": "t2kappa", "kappa": 1, "alpha": [0.7071067811865476, 0.7071067811865476],
                                 "beta": [0.7071067811865476, 1.224744871391589]}},
           "predicates": ["power_identity:2", "quasinormal"],
           "expected": {"power_identity[n=2]": "Holds", "quasinormal": "Fails"}}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    out_path = tmp_path / "rep.json"
    code, _, _ = run(["check", "--config", str(path), "--out", str(out_path), "--no-timestamp"], capsys)
    assert code == 0
    rep = json.loads(out_path.read_text())
    assert [e["status"] for e in rep["entries"]] == ["Holds", "Fails"]


def test_exhibits_exit_zero(capsys):
    for argv in (["exhibit", "prz2"], ["exhibit", "achtenZ"], ["exhibit", "prz1", "--N", "16,32,64"],
                 ["exhibit", "prz4:r=poly1,n=3"]):
        code, _, _ = run(argv + ["--no-timestamp"], capsys)
        assert code == 0, argv


def test_corpus_determinism_and_empty(capsys):
    _, a, _ = run(["corpus", "--seed", "7", "--count", "40", "--no-timestamp"], capsys)
    _, b, _ = run(["corpus", "--seed", "7", "--count", "40", "--no-timestamp"], capsys)
    assert a == b
    _, c, _ = run(["corpus", "--seed", "8", "--count", "40", "--no-timestamp"], capsys)
    assert c != a
    code, out, _ = run(["corpus", "--count", "0", "--no-timestamp"], capsys)
    assert code == 0 and json.loads(out)["entries"] == []


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quasinormal", "check", "--matrix", "[[1,0],[0,2]]",
                           "--predicate", "normality", "--no-timestamp"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["entries"][0]["status"] == "Holds"


def test_tree_predicates(capsys):
    tree = '{"parent": {"1": 0, "2": 0}, "weights": {"1": 1, "2": [0, 1]}}'
    code, out, _ = run(["check", "--tree", tree, "--predicate", "basis_power_norms:2",
                        "--predicate", "quasinormal_tree", "--no-timestamp"], capsys)
    assert code == 0
    statuses = {e["predicate"]: e["status"] for e in json.loads(out)["entries"]}
    assert statuses == {"basis_power_norms[n=2]": "Fails", "quasinormal_tree": "Fails"}
    code, _, _ = run(["check", "--matrix", "[[1]]", "--predicate", "quasinormal_tree"], capsys)
    assert code == 2
