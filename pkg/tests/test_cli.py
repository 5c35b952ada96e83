"""Command-line surface: exit codes, pipelines, determinism."""
import json

import numpy as np

from linkfold.cli import (
    EXIT_BUDGET,
    EXIT_NOT_SIMPLE,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_VERIFY,
    main,
)


def _run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_run_verify_render_pipeline(tmp_path, capsys):
    chain = tmp_path / "chain.txt"
    trace = tmp_path / "trace.json"
    code, out, _ = _run(capsys, "generate", "open-random", "--n", "10",
                        "--seed", "3", "--out", str(chain))
    assert code == EXIT_OK
    assert chain.read_text().split("\n")[0] == "4 10 open"

    code, out, _ = _run(capsys, "run", "open", str(chain), "--seed", "3",
                        "--out", str(trace))
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["moves"] <= summary["move_bound_3n"]

    code, out, _ = _run(capsys, "verify", str(trace))
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["ok"] and report["samples_per_move"] == 100

    code, out, _ = _run(capsys, "render", str(trace), "--out",
                        str(tmp_path / "frame"))
    assert code == EXIT_OK
    paths = out.strip().split("\n")
    assert len(paths) == 5
    for p in paths:
        body = open(p).read()
        assert body.startswith("<svg") and "polyline" in body


def test_closed_and_tree_pipelines(tmp_path, capsys):
    closed = tmp_path / "closed.txt"
    tree = tmp_path / "tree.txt"
    assert _run(capsys, "generate", "closed-random", "--n", "7", "--seed",
                "2", "--out", str(closed))[0] == EXIT_OK
    assert _run(capsys, "generate", "tree-random", "--n", "8", "--seed",
                "2", "--out", str(tree))[0] == EXIT_OK
    for algo, path in (("closed", closed), ("tree", tree)):
        out_trace = tmp_path / ("%s.json" % algo)
        code, out, _ = _run(capsys, "run", algo, str(path), "--seed", "2",
                            "--out", str(out_trace))
        assert code == EXIT_OK
        assert _run(capsys, "verify", str(out_trace))[0] == EXIT_OK


def test_non_simple_input_exit_code(tmp_path, capsys):
    bad = tmp_path / "bowtie.txt"
    bad.write_text(
        "4 3 open\n"
        "0 0 0 0\n"
        "1 1 0 0\n"
        "1 0 0 0\n"
        "0 1 0 0\n")
    code, _, err = _run(capsys, "run", "open", str(bad), "--out",
                        str(tmp_path / "x.json"))
    assert code == EXIT_NOT_SIMPLE
    assert "not simple" in err


def test_parse_error_exit_code(tmp_path, capsys):
    garbage = tmp_path / "garbage.txt"
    garbage.write_text("this is not a linkage\n")
    code, _, _ = _run(capsys, "run", "open", str(garbage), "--out",
                      str(tmp_path / "x.json"))
    assert code == EXIT_PARSE
    code, _, _ = _run(capsys, "generate", "fixture:no-such-thing", "--out",
                      str(tmp_path / "x.txt"))
    assert code == EXIT_PARSE
    # closed driver on an open chain is a usage error, not a crash
    open_chain = tmp_path / "open.txt"
    assert _run(capsys, "generate", "open-random", "--n", "5", "--seed",
                "1", "--out", str(open_chain))[0] == EXIT_OK
    code, _, _ = _run(capsys, "run", "closed", str(open_chain), "--out",
                      str(tmp_path / "x.json"))
    assert code == EXIT_PARSE


def test_verify_failure_exit_code(tmp_path, capsys):
    chain = tmp_path / "chain.txt"
    trace = tmp_path / "trace.json"
    assert _run(capsys, "generate", "open-random", "--n", "6", "--seed",
                "4", "--out", str(chain))[0] == EXIT_OK
    assert _run(capsys, "run", "open", str(chain), "--seed", "4", "--out",
                str(trace))[0] == EXIT_OK
    rec = json.loads(trace.read_text())
    rec["final"][0][0] += 0.5
    trace.write_text(json.dumps(rec))
    code, out, _ = _run(capsys, "verify", str(trace))
    assert code == EXIT_VERIFY
    assert not json.loads(out)["ok"]


def test_fixture_generation(tmp_path, capsys):
    for name, header in (("intersected-goal", "4 5 open"),
                         ("obstructed-goal", "4 5 open"),
                         ("flat-instant", "4 5 closed")):
        path = tmp_path / (name + ".txt")
        code, _, _ = _run(capsys, "generate", "fixture:" + name, "--out",
                          str(path))
        assert code == EXIT_OK
        assert path.read_text().split("\n")[0] == header


def test_byte_identical_reruns(tmp_path, capsys):
    chain = tmp_path / "chain.txt"
    assert _run(capsys, "generate", "open-random", "--n", "8", "--seed",
                "6", "--out", str(chain))[0] == EXIT_OK
    t1 = tmp_path / "t1.json"
    t2 = tmp_path / "t2.json"
    assert _run(capsys, "run", "open", str(chain), "--seed", "6", "--out",
                str(t1))[0] == EXIT_OK
    assert _run(capsys, "run", "open", str(chain), "--seed", "6", "--out",
                str(t2))[0] == EXIT_OK
    assert t1.read_bytes() == t2.read_bytes()
    f1 = tmp_path / "a"
    f2 = tmp_path / "b"
    assert _run(capsys, "render", str(t1), "--frames", "50", "--out",
                str(f1))[0] == EXIT_OK
    assert _run(capsys, "render", str(t2), "--frames", "50", "--out",
                str(f2))[0] == EXIT_OK
    assert (tmp_path / "a_050.svg").read_bytes() == \
        (tmp_path / "b_050.svg").read_bytes()


def test_env_override_changes_default(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LINKFOLD_N", "12")
    chain = tmp_path / "chain.txt"
    assert _run(capsys, "generate", "open-random", "--seed", "1", "--out",
                str(chain))[0] == EXIT_OK
    assert chain.read_text().split("\n")[0] == "4 12 open"
