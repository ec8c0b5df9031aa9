import json
import subprocess
import sys

import pytest

from tanglekit.cli import COMMANDS, main


def run(*args: str, env: dict | None = None) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "tanglekit", *args], capture_output=True, text=True, env=env, check=False
    )


def call(capsys, *args: str) -> tuple[int, dict | str, str]:
    code = main(list(args))
    out, err = capsys.readouterr()
    try:
        return code, json.loads(out), err
    except json.JSONDecodeError:
        return code, out, err


def test_crit_example():
    res = run("crit", "--family", "fig4", "--depth", "40", "--k", "10")
    assert res.returncode == 0
    body = json.loads(res.stdout)
    assert sorted(w["Y"] for w in body["result"]["witnessed"]) == [["t"], ["t", "u"], ["u"]]
    assert body["provenance"]["level"] == 40


def test_pack_example():
    res = run("pack", "--family", "k2inf", "--k", "2", "--levels", "5")
    assert res.returncode == 0
    body = json.loads(res.stdout)["result"]
    assert body["aux_completion"][0]["edges"] == ["crit:x~y@{x,y}"]
    assert body["limit_assignment"]["x-u0"] != body["limit_assignment"]["y-u0"]


def test_truncate_dot_example():
    res = run("truncate", "--family", "ray", "--depth", "3", "--format", "dot")
    assert res.returncode == 0
    lines = res.stdout.splitlines()
    assert sum(" -- " in ln for ln in lines) == 3
    assert sum(ln.strip() in {f'"v{i}";' for i in range(4)} for ln in lines) == 4


@pytest.mark.parametrize("argv", [
    ["crit", "--family", "fig4", "--depth", "40", "--k", "10"],
    ["check", "--name", "bonding", "--seed", "3", "--count", "20"],
    ["vstar", "--family", "k2inf", "--x", "x", "--y", "y"],
])
def test_reruns_are_byte_identical(argv):
    first, second = run(*argv), run(*argv)
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout


def test_every_command_has_a_schema(capsys):
    code, schemas, _ = call(capsys, "--schema")
    assert code == 0
    assert set(COMMANDS) <= set(schemas)


def test_families_listing(capsys):
    code, body, _ = call(capsys, "families")
    assert code == 0
    names = [f["name"] for f in body["result"]]
    assert "k2inf" in names and names == sorted(names)


def test_errors_go_to_stderr_as_json(capsys):
    code, out, err = call(capsys, "crit", "--family", "nope")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "UnknownFamily"


def test_depth_cap(monkeypatch, capsys):
    monkeypatch.setenv("TANGLEKIT_DEPTH_CAP", "5")
    code, _, err = call(capsys, "truncate", "--family", "ray", "--depth", "6")
    assert code == 1 and "TANGLEKIT_DEPTH_CAP" in err
    code, _, err = call(capsys, "pack", "--family", "k2inf", "--k", "2", "--levels", "6")
    assert code == 1 and "levels 6 exceeds" in err


def test_unknown_dominant_result_exits_two(tmp_path, capsys):
    spec = tmp_path / "p.json"
    spec.write_text(json.dumps({"custom": {"levels": [
        {"add_vertices": ["a", "b"], "add_edges": [["e0", "a", "b"]], "frontier": ["b"]},
        {"add_vertices": ["c"], "add_edges": [["e1", "b", "c"]]},
    ]}}))
    code, body, _ = call(capsys, "predicates", "--spec", str(spec))
    assert code == 2
    assert body["result"]["checks"]["one_point_omega"]["status"] == "unknown"


def test_tangles_on_a_graph_file(tmp_path, capsys):
    g = {"vertices": ["a", "b", "c"], "edges": [["e0", "a", "b"], ["e1", "b", "c"], ["e2", "a", "c"]]}
    path = tmp_path / "g.json"
    path.write_text(json.dumps(g))
    code, body, _ = call(capsys, "tangles", "--graph", str(path), "--k", "2")
    assert code == 0
    assert len(body["result"]["tangles"]) == 1


def test_sprime_rejects_the_split(capsys):
    evens = ",".join(f"u{i}" for i in range(0, 30, 2))
    code, body, _ = call(capsys, "sprime", "--family", "k2inf", "--depth", "30", "--X", "x,y", "--side", evens)
    assert code == 0
    assert body["result"]["verdict"]["status"] == "Refuted"


def test_text_format(capsys):
    code = main(["components", "--family", "ray", "--depth", "4", "--X", "v1", "--format", "text"])
    out = capsys.readouterr().out
    assert code == 0 and out.startswith("command: components")


def test_dot_unavailable(capsys):
    code = main(["predicates", "--family", "ray", "--format", "dot"])
    assert code == 1
    assert "no DOT output" in capsys.readouterr().err
