from __future__ import annotations

import json
import shutil
import subprocess
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from randcontract.cli import main
from randcontract.formats import InstanceFormatError, format_instance, parse_instance, read_instance
from randcontract.harness import gen_random

FIXTURES = Path(__file__).parent / "fixtures"
SOLVABLE = sorted(p for p in FIXTURES.glob("*.txt") if p.name != "mcc.txt")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def solve_json(capsys, path, *flags):
    code, out, _ = run(capsys, "solve", path, "--json", *flags)
    return code, json.loads(out)


# ----------------------------------------------------------- file format
@pytest.mark.parametrize(
    "text,line",
    [
        ("e 1 2\n", 1),
        ("p steiner 2 1\nparam k 1\nparam s 1\nt 1\ne 1 5\n", 5),
        ("p steiner 2 1\nparam k x\n", 2),
        ("p nulc 2 1\nparam k 0\nsigma 2\ne 1 2\n", None),
        ("p nulc 2 1\nparam k 0\nsigma 2\ne 1 2\ncst 1 2 0:3\n", 5),
        ("p steiner 2 2\nparam k 0\nparam s 1\nt 1\ne 1 2\n", None),
    ],
)
def test_parse_errors_are_reported(text, line):
    with pytest.raises(InstanceFormatError) as info:
        parse_instance(text)
    if line is not None:
        assert str(info.value).startswith(f"line {line}:")


def test_comments_and_blank_lines_are_ignored():
    inst = read_instance(FIXTURES / "path_steiner.txt")
    assert inst.k == 1 and inst.s == 2 and inst.terminals == frozenset({1, 3})


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.txt")), ids=lambda p: p.name)
def test_fixture_round_trip(path):
    inst = read_instance(path)
    text = format_instance(inst)
    assert parse_instance(text) == inst
    assert format_instance(parse_instance(text)) == text


@settings(max_examples=40)
@given(st.sampled_from(["steiner", "emwcu", "nmwcu", "eulc", "nulc"]), st.integers(1, 8), st.floats(0, 1), st.integers(0, 3), st.integers(0, 99))
def test_generated_round_trip(problem, n, density, k, seed):
    inst = gen_random(problem, n, density, k, seed, s=1, classes=1)
    assert parse_instance(format_instance(inst)) == inst


# ----------------------------------------------------------- solve
def test_path_fixture_size_one(capsys):
    code, data = solve_json(capsys, FIXTURES / "path_steiner.txt")
    assert code == 0 and data["size"] == 1


def test_golden_report(capsys):
    _, out, _ = run(capsys, "solve", FIXTURES / "path_steiner.txt", "--json")
    assert out == (FIXTURES / "path_steiner.golden.json").read_text()


@pytest.mark.parametrize("path", SOLVABLE, ids=lambda p: p.name)
def test_bruteforce_equals_exact(capsys, path):
    _, exact = solve_json(capsys, path)
    _, brute = solve_json(capsys, path, "--mode", "bruteforce")
    assert exact["answer"] == brute["answer"] and exact["size"] == brute["size"]


@pytest.mark.parametrize("path", SOLVABLE, ids=lambda p: p.name)
def test_fixed_seed_is_byte_identical(capsys, path):
    flags = ("--mode", "randomized", "--family", "randomized", "--seed", "5", "--q-override", "1")
    first = run(capsys, "solve", path, "--json", *flags)[1]
    second = run(capsys, "solve", path, "--json", *flags, "--threads", "3")[1]
    assert first == second


def test_text_output_and_stats(capsys):
    code, out, _ = run(capsys, "solve", FIXTURES / "swap_nulc.txt", "--stats")
    assert code == 0
    assert out.splitlines()[:2] == ["answer: yes", "size: 1"]
    assert any(line.startswith("labeling: ") for line in out.splitlines())
    assert "stat wall_time:" in out


def test_no_answer_exit_code(tmp_path, capsys):
    src = read_instance(FIXTURES / "c4_steiner.txt")
    path = tmp_path / "c4_k1.txt"
    path.write_text(format_instance(type(src)(src.graph, src.terminals, src.s, 1)))
    code, data = solve_json(capsys, path)
    assert code == 2 and data["answer"] == "no" and data["solution"] == []


def test_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("p steiner 2 1\nparam k 1\ne 1 3\n")
    code, _, err = run(capsys, "solve", bad)
    assert code == 1 and "line 3" in err
    assert run(capsys, "solve", tmp_path / "missing.txt")[0] == 1
    assert run(capsys, "solve", FIXTURES / "path_steiner.txt", "--problem", "nulc")[0] == 1
    assert run(capsys, "solve", FIXTURES / "path_steiner.txt", "--mode", "nope")[0] == 1


# ----------------------------------------------------------- verify
def write_report(tmp_path, data, name="report.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_verify_valid(tmp_path, capsys):
    _, data = solve_json(capsys, FIXTURES / "swap_nulc.txt")
    code, out, _ = run(capsys, "verify", FIXTURES / "swap_nulc.txt", write_report(tmp_path, data))
    assert code == 0 and out == "valid\n"


def test_verify_tampered_size(tmp_path, capsys):
    _, data = solve_json(capsys, FIXTURES / "path_steiner.txt")
    data["size"] = 2
    code, _, err = run(capsys, "verify", FIXTURES / "path_steiner.txt", write_report(tmp_path, data))
    assert code == 1 and "size field" in err


def test_verify_names_bad_list_vertex(tmp_path, capsys):
    _, data = solve_json(capsys, FIXTURES / "swap_nulc.txt")
    data["labeling"]["3"] = 0
    code, _, err = run(capsys, "verify", FIXTURES / "swap_nulc.txt", write_report(tmp_path, data))
    assert code == 1 and "vertex 3" in err


def test_verify_false_no(tmp_path, capsys):
    _, data = solve_json(capsys, FIXTURES / "path_steiner.txt")
    data.update(answer="no", size=None, solution=[])
    code, _, err = run(capsys, "verify", FIXTURES / "path_steiner.txt", write_report(tmp_path, data))
    assert code == 1 and "solution of size 1 exists" in err


def test_verify_rejects_broken_solutions(tmp_path, capsys):
    _, data = solve_json(capsys, FIXTURES / "nmwcu.txt")
    data.update(solution=[3], size=1)
    code, _, err = run(capsys, "verify", FIXTURES / "nmwcu.txt", write_report(tmp_path, data))
    assert code == 1 and "undeletable" in err
    bad = write_report(tmp_path, "not an object", "plain.json")
    assert run(capsys, "verify", FIXTURES / "nmwcu.txt", bad)[0] == 1


# ----------------------------------------------------------- gen and reduce
def test_gen_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (a, b):
        assert run(capsys, "gen", "nulc", "--n", 7, "--k", 2, "--seed", 3, "-o", out)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    read_instance(a)


def test_gen_rejects_bad_parameters(capsys):
    assert run(capsys, "gen", "steiner", "--n", 2, "--k", 1, "--s", 5)[0] == 1


def test_reduce_mcc_fixture(tmp_path, capsys):
    out = tmp_path / "eulc.txt"
    assert run(capsys, "reduce", "mcc-eulc", FIXTURES / "mcc.txt", "-o", out)[0] == 0
    inst = read_instance(out)
    assert len(inst.graph) == 8 and inst.graph.num_edges == 9 and inst.k == 4
    code, data = solve_json(capsys, out, "--mode", "bruteforce")
    assert code == 0 and data["answer"] == "yes"


@pytest.mark.parametrize(
    "kind,source",
    [("eulc-nulc", "swap_eulc.txt"), ("emwcu-nmwcu", "emwcu.txt"), ("eulc-restricted", "swap_eulc.txt")],
)
def test_reductions_keep_answers(tmp_path, capsys, kind, source):
    out = tmp_path / "reduced.txt"
    assert run(capsys, "reduce", kind, FIXTURES / source, "-o", out)[0] == 0
    _, before = solve_json(capsys, FIXTURES / source, "--mode", "bruteforce")
    _, after = solve_json(capsys, out, "--mode", "bruteforce")
    assert before["answer"] == after["answer"]


def test_reduce_wrong_source(capsys):
    assert run(capsys, "reduce", "mcc-eulc", FIXTURES / "swap_eulc.txt")[0] == 1


@pytest.mark.skipif(shutil.which("randcontract") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["randcontract", "solve", str(FIXTURES / "path_steiner.txt")], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("answer: yes")
