import csv
import io

from popmaj.cli import main


def test_run_csv(capsys):
    assert main(["run", "--n", "9", "--num-a", "4", "--init", "lb_flip", "--seed", "3"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows[0]["init_kind"] == "lb_flip" and rows[0]["correct"] == "true"


def test_overflow_exit_code(capsys):
    assert main(["run", "--n", "9", "--max-interactions", "10", "--out", "json"]) == 2


def test_usage_errors(capsys):
    assert main(["run", "--n", "1"]) == 3
    assert main(["run"]) == 3
    assert main(["run", "--n", "5", "--init", "lb_flip", "--num-a", "0"]) == 3
    try:
        main(["run", "--bogus"])
    except SystemExit as e:
        assert e.code == 3
    else:
        raise AssertionError("argparse should have exited")


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nn=7\nnum_a=5\ninit=wrong_answers\nseed=1\n")
    assert main(["run", "--config", str(cfg), "--seed", "2"]) == 0
    row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert (row["n"], row["num_A"], row["seed"], row["init_kind"]) == ("7", "5", "2", "wrong_answers")
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour=blue\n")
    assert main(["run", "--config", str(bad), "--n", "4"]) == 3


def test_snapshot_in_and_out(tmp_path, capsys):
    final = tmp_path / "final.txt"
    assert main(["run", "--n", "6", "--num-a", "2", "--save-final", str(final)]) == 0
    capsys.readouterr()
    assert main(["run", "--n", "6", "--init", f"file:{final}"]) == 0
    row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert row["interactions"] == "0" and row["num_A"] == "2"


def test_sweep_writes_table(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["sweep", "--n", "5,6", "--kinds", "all_unsettled", "--trials", "2", "--num-a", "2", "--output", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 5
    assert "fit mean_time" in capsys.readouterr().err


def test_verify(tmp_path, capsys):
    rep = tmp_path / "r.txt"
    assert main(["verify", "--n", "2", "--inputs", "AB", "--audit", "--report", str(rep)]) == 0
    assert "all_terminal_silent_correct=true" in rep.read_text()
    assert main(["verify", "--n", "5", "--inputs", "AAABB"]) == 2
    assert main(["verify", "--n", "2"]) == 3


def test_census(capsys):
    assert main(["census", "--n", "6", "--trials", "1", "--kinds", "all_unsettled"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,distinct_states,state_space,distinct_per_n" and out[1].startswith("6,")
