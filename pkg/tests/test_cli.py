import json

import pytest

from rankverify.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def wide_gaps(tmp_path):
    p = tmp_path / "wide.csv"
    p.write_text("label,n,mean,sd\na,10,0,1\nb,10,10,1\nc,10,20,1\nd,10,30,1\n")
    return p


@pytest.fixture
def close_pair(tmp_path):
    p = tmp_path / "close.csv"
    p.write_text("label,n,mean,sd\nfirst,4,1,1\nsecond,4,0,1\n")
    return p


def test_rank_wide_gaps(capsys, wide_gaps):
    code, out, _ = run(capsys, "rank", "--input", str(wide_gaps))
    assert code == 0
    rep = json.loads(out)
    assert rep["results"]["verified_count"] == 4
    assert rep["results"]["labels"] == ["d", "c", "b", "a"]
    assert rep["input"]["sha256"]


def test_rank_bottom(capsys, wide_gaps):
    code, out, _ = run(capsys, "rank", "--input", str(wide_gaps), "--direction", "bottom")
    assert code == 0
    assert json.loads(out)["results"]["labels"][0] == "a"


def test_verify_close_pair(capsys, close_pair):
    code, out, _ = run(capsys, "verify", "--input", str(close_pair), "--alpha", "0.05")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["p_star"] == pytest.approx(0.4795001221869535, abs=1e-4)
    assert res["verified"] is False


def test_text_and_csv(capsys, close_pair):
    code, out, _ = run(capsys, "verify", "--input", str(close_pair), "--format", "text")
    assert code == 0 and "results.p_star: 0.4795" in out
    code, out, _ = run(capsys, "verify", "--input", str(close_pair), "--format", "csv")
    assert code == 0 and out.splitlines()[0].startswith("tested_label,")


def test_top_set(capsys, wide_gaps):
    code, out, _ = run(capsys, "top-set", "--input", str(wide_gaps), "--k", "2")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["verified"] and res["worst_pair"] == [2, 3]


SIM = ("simulate", "--error", "type1-tied", "--draws", "100", "--seed", "7",
       "--sigma", "0.2", "--format", "csv")


def test_simulate_deterministic(capsys):
    outs = [run(capsys, *SIM, "--jobs", str(j))[1] for j in (1, 1, 4)]
    assert outs[0] == outs[1] == outs[2]
    assert len(outs[0].splitlines()) == 1 + 2 * 7


def test_simulate_calibrates_when_sigma_missing(capsys):
    code, out, _ = run(capsys, "simulate", "--draws", "200", "--seed", "1",
                       "--ranks", "2", "--multipliers", "1")
    assert code == 0
    params = json.loads(out)["parameters"]
    assert abs(params["calibrated_power"] - 0.9) <= 0.01


def test_seed_env(capsys, monkeypatch):
    args = ("simulate", "--draws", "100", "--sigma", "0.3", "--ranks", "2",
            "--multipliers", "1", "--error", "type2")
    monkeypatch.setenv("RANKVERIFY_SEED", "11")
    env = json.loads(run(capsys, *args)[1])
    explicit = json.loads(run(capsys, *args, "--seed", "11")[1])
    assert env["seed"] == 11
    assert env["results"] == explicit["results"]
    monkeypatch.setenv("RANKVERIFY_SEED", "nope")
    assert run(capsys, *args)[0] == 2


def test_output_file(capsys, tmp_path, close_pair):
    dest = tmp_path / "out.json"
    code, out, _ = run(capsys, "verify", "--input", str(close_pair), "--output", str(dest))
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["operation"] == "verify"


def test_calibrate(capsys):
    code, out, _ = run(capsys, "calibrate", "--draws", "500", "--seed", "1")
    assert code == 0
    assert abs(json.loads(out)["results"]["power"] - 0.9) <= 0.01


def test_naive_error(capsys):
    code, out, _ = run(capsys, "naive-error", "--mc-draws", "20000", "--seed", "2")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["bound"] > 0.3
    assert abs(res["bound"] - res["monte_carlo"]["estimate"]) < 0.02


@pytest.mark.parametrize("argv", [
    ("verify", "--input", "x.csv", "--bogus"),
    ("nonsense",),
    ("verify",),
    ("verify", "--input", "/does/not/exist.csv"),
    ("top-set", "--input", "{close}", "--k", "5"),
    ("verify", "--input", "{close}", "--alpha", "1.5"),
    ("naive-error", "--means", "1,2,3"),
    ("naive-error", "--grid", "7"),
])
def test_usage_errors_exit_2(capsys, close_pair, argv):
    argv = [a.replace("{close}", str(close_pair)) for a in argv]
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err


def test_bad_row_reports_line(capsys, tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("label,n,mean,sd\na,1,2,1\nb,1,oops,1\n")
    code, _, err = run(capsys, "verify", "--input", str(p))
    assert code == 2 and "line 3" in err
