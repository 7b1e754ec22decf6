import csv
import io
import json
import subprocess
import sys

import pytest

from banachlab.cli import int_list, main, run


def _run(args, capsys):
    code = main(args)
    return code, capsys.readouterr().out


def test_int_list_syntax():
    assert int_list("1..4") == [1, 2, 3, 4]
    assert int_list("2,5") == [2, 5]
    assert int_list("7") == [7]


def test_decay_scan_csv(capsys):
    code, out = _run(["decay-scan", "--p", "2", "--h", "1", "--q", "2", "--n", "1..6", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["n"]) for r in rows] == list(range(1, 7))
    for r in rows:
        assert float(r["norm"]) == pytest.approx(2 ** (-int(r["n"]) / 2), rel=1e-9)


def test_building_check_example(capsys):
    code, out = _run(["building-check", "--p", "2", "--m", "1", "--n", "1"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == "v1" and rep["passed"]
    assert rep["config"]["p"] == 2 and rep["seed"] == 0


def test_fft_verify_example(capsys):
    code, out = _run(["fft-verify", "--group", "4", "--chain", "2"], capsys)
    assert code == 0
    assert json.loads(out)["rows"][0]["max_error"] <= 1e-12


def test_fft_verify_all_chains(capsys):
    code, out = _run(["fft-verify", "--group", "4,9"], capsys)
    assert code == 0 and len(json.loads(out)["rows"]) == 6


@pytest.mark.parametrize(
    "args",
    [
        ["twisted", "--p", "3", "--n", "1..2"],
        ["variant-verify", "--p", "2", "--n", "2", "--q", "1.5", "--d", "2"],
        ["type-probe", "--n", "2,4"],
        ["lemma47", "--p", "2", "--n", "2", "--trials", "20", "--optimized", "1"],
        ["lemma49", "--p", "3", "--n", "2", "--k", "0,1", "--trials", "20", "--optimized", "1", "--obstruction"],
        ["bourgain-probe", "--groups", "4;2,2"],
        ["factorization-check", "--p", "3", "--m", "2", "--n", "1,2"],
        ["expander-scan", "--moduli", "2", "--restarts", "1"],
    ],
    ids=lambda a: a[0],
)
def test_subcommands_pass(args, capsys):
    code, out = _run(args, capsys)
    assert code == 0, out
    assert json.loads(out)["schema"] == "v1"


def test_usage_errors(capsys):
    assert main(["fft-verify", "--group", "x"]) == 2
    assert main(["no-such-command"]) == 2
    assert main(["twisted", "--p", "4"]) == 2
    capsys.readouterr()


def test_resource_exit(capsys):
    code, out = _run(["expander-scan", "--moduli", "4", "--budget", "1000"], capsys)
    assert code == 3
    assert json.loads(out)["failures"][0]["error"] == "resource"


def test_violation_exit(capsys, monkeypatch):
    from banachlab import harness

    real = harness.twisted_hilbert_check

    def broken(*a, **kw):
        r = real(*a, **kw)
        r["holds"] = False
        return r

    monkeypatch.setattr(harness, "twisted_hilbert_check", broken)
    code, out = _run(["twisted", "--p", "2", "--n", "2", "--format", "csv"], capsys)
    assert code == 1
    assert "False" in out


def test_out_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["lemma49", "--p", "2", "--n", "3", "--k", "0,1", "--q", "1.5", "--d", "4", "--trials", "50", "--optimized", "2", "--seed", "9"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["seed"] == 9


def test_timestamp_is_the_only_difference():
    args = ["expander-scan", "--moduli", "2", "--restarts", "1", "--seed", "4"]
    _, t1 = run(args + ["--timestamp", "--out", "/dev/null"])
    _, t2 = run(args + ["--timestamp", "--out", "/dev/null"])
    r1, r2 = json.loads(t1), json.loads(t2)
    assert "timestamp" in r1
    r1.pop("timestamp"), r2.pop("timestamp")
    assert r1 == r2


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "banachlab.cli", "fft-verify", "--group", "8", "--format", "csv"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert out.returncode == 0
    assert out.stdout.splitlines()[0].startswith("group")
