import pytest

from pqnd.cli import main


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text("N = 16\nK = 2\nV = 8\nM = 4\nsnr_db = 10\nframes = 2\n")
    return path


def test_ber_writes_csv(scenario, tmp_path):
    out = tmp_path / "ber.csv"
    assert main(["ber", "--config", str(scenario), "--seed", "7", "--out", str(out), "--workers", "1"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("snr_db,detector,")
    assert lines[1].split(",")[-1] == "7"


def test_ber_to_stdout(scenario, capsys):
    assert main(["ber", "--config", str(scenario), "--workers", "1", "--detector", "zf"]) == 0
    assert ",zf," in capsys.readouterr().out


def test_converge(scenario, tmp_path):
    out = tmp_path / "conv.csv"
    code = main(["converge", "--config", str(scenario), "--detectors", "pqnd,obox",
                 "--workers", "1", "--out", str(out)])
    assert code == 0
    assert len(out.read_text().splitlines()) == 1 + 2 * 7


def test_converge_ml_guard(scenario, capsys):
    assert main(["converge", "--config", str(scenario), "--detectors", "ml", "--workers", "1"]) == 1
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("cmd, axis", [("sweep-k", "K"), ("sweep-n", "N")])
def test_sweeps(scenario, tmp_path, cmd, axis):
    out = tmp_path / "sweep.csv"
    assert main([cmd, "--config", str(scenario), "--values", "1,2", "--workers", "1", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0].startswith("axis,value,")
    assert len(rows) == 3 and rows[1].startswith(f"{axis},1,")


def test_bad_values(scenario):
    assert main(["sweep-k", "--config", str(scenario), "--values", "a,b"]) == 1


@pytest.mark.parametrize("argv", [["ber", "--N", "0"], ["ber", "--pdp", "nowhere"], ["ber", "--M", "8"]])
def test_validation_failures_exit_1(argv):
    assert main(argv + ["--workers", "1"]) == 1


def test_parse_error_exit_1(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("N = 16\nnonsense\n")
    assert main(["ber", "--config", str(bad)]) == 1


def test_missing_config_exit_1(tmp_path):
    assert main(["ber", "--config", str(tmp_path / "none.cfg")]) == 1


@pytest.mark.parametrize("argv", [["frobnicate"], ["ber", "--no-such-flag"], []])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_selftest_exit_0(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 8
