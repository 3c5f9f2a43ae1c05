import csv

import pytest

from rfimdi.cli import main
from rfimdi.pipeline import RECORD_FIELDS

SWEEP = """
mode = wcs
sweep.variable = channel.distance
sweep.from = 0
sweep.to = 100
sweep.steps = 3
"""


def write(tmp_path, text, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "out.csv"
    assert main(["sweep", "--config", write(tmp_path, SWEEP), "--out", str(out)]) == 0
    rows = read_rows(out)
    assert list(rows[0]) == list(RECORD_FIELDS)
    assert [float(r["x"]) for r in rows] == [0, 50, 100]
    assert all(r["error"] == "" for r in rows)


def test_byte_identical_output(tmp_path):
    cfg = write(tmp_path, SWEEP)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["sweep", "--config", cfg, "--out", str(a)])
    main(["sweep", "--config", cfg, "--out", str(b), "--jobs", "2"])
    assert a.read_bytes() == b.read_bytes()


def test_stdout_and_mode_flag(tmp_path, capsys):
    assert main(["sweep", "--config", write(tmp_path, SWEEP), "--mode", "sps"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("x,y,R_raw") and len(lines) == 4


def test_heatmap(tmp_path):
    text = """mode = sps
channel.distance = 100
sweep.variable = alice.delta_z
sweep.from = 0
sweep.to = 0.126
sweep.steps = 2
sweep2.variable = bob.delta_z
sweep2.from = 0
sweep2.to = 0.126
sweep2.steps = 2
"""
    out = tmp_path / "h.csv"
    assert main(["heatmap", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 4 and rows[1]["R_raw"] == rows[2]["R_raw"]


def test_heatmap_needs_second_axis(tmp_path):
    assert main(["heatmap", "--config", write(tmp_path, SWEEP)]) == 2


def test_sweep_needs_axis(tmp_path):
    assert main(["sweep", "--config", write(tmp_path, "mode = sps\n")]) == 2


def test_optimize_single_point(tmp_path):
    out = tmp_path / "o.csv"
    cfg = write(tmp_path, "channel.distance = 400\n")
    assert main(["optimize", "--config", cfg, "--out", str(out)]) == 0
    (row,) = read_rows(out)
    assert float(row["mu_opt"]) > float(row["nu_opt"])


def test_optimize_requires_wcs(tmp_path):
    assert main(["optimize", "--config", write(tmp_path, "mode = sps\n")]) == 2


def test_degenerate_scenario_exit_2(tmp_path, capsys):
    text = "mode = sps\nsweep.variable = source.delta3\nsweep.from = 0\nsweep.to = 1.5707963267948966\nsweep.steps = 2\n"
    out = tmp_path / "d.csv"
    assert main(["sweep", "--config", write(tmp_path, text), "--out", str(out)]) == 2
    rows = read_rows(out)
    assert rows[0]["error"] == "" and rows[1]["error"].startswith("SingularPreparationError")
    assert "1 of 2 points failed" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["channel.distance = far\n", "bogus.key = 1\n"])
def test_config_errors_exit_2(tmp_path, text):
    assert main(["sweep", "--config", write(tmp_path, text)]) == 2


def test_missing_config_exit_2(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "nope.cfg")]) == 2


@pytest.mark.parametrize(
    "argv",
    [[], ["launch"], ["sweep"], ["sweep", "--config", "x", "--mode", "cw"], ["sweep", "--config", "x", "--jobs", "two"]],
)
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_jobs_zero_is_usage(tmp_path):
    assert main(["sweep", "--config", write(tmp_path, SWEEP), "--jobs", "0"]) == 1


@pytest.fixture(scope="module")
def verify_reports(tmp_path_factory):
    d = tmp_path_factory.mktemp("verify")
    good, bad = d / "good.txt", d / "bad.txt"
    codes = (main(["verify", "--out", str(good)]), main(["verify", "--out", str(bad), "--corrupt-q-order"]))
    return codes, good.read_text().splitlines(), bad.read_text().splitlines()


def test_verify_passes(verify_reports):
    (code, _), lines, _ = verify_reports
    assert code == 0
    assert len(lines) == 4 and all(line.startswith("PASS") and "max_error=" in line for line in lines)


def test_verify_negative_control(verify_reports):
    (_, code), _, lines = verify_reports
    assert code == 3
    assert lines[0].startswith("FAIL") and "round-trip" in lines[0]
    assert all(line.startswith("PASS") for line in lines[1:])
