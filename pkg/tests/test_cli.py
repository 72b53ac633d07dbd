import csv
import io
import json

import pytest

from liarwalk.chipfield import parse_configurations
from liarwalk.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_simulate_game_window(tmp_path, capsys):
    path = tmp_path / "traj.txt"
    assert main(["simulate", "--config", "0:1,2:11", "--steps", "4", "--out", str(path)]) == 0
    blocks = parse_configurations(path.read_text())
    readout = [(f[-t], f[-t + 2]) for t, f in blocks[1:]]
    assert readout == [(0, 7), (0, 3), (0, 1), (0, 0)]


def test_simulate_from_file_and_empty(tmp_path, capsys):
    cfg = tmp_path / "f0.txt"
    cfg.write_text("# parity=even t=0\n0,3\n4,5\n")
    code, out = run(["simulate", "--config", str(cfg), "--steps", "3"], capsys)
    assert code == 0 and len(parse_configurations(out)) == 4
    code, out = run(["simulate", "--config", "", "--steps", "2"], capsys)
    assert code == 0
    assert all(f.is_empty() for _, f in parse_configurations(out))


def test_deterministic(capsys):
    argv = ["discrepancy", "--random", "3", "--seed", "7", "--times", "5,9", "--B", "2"]
    assert run(argv, capsys) == run(argv, capsys)
    argv = ["simulate", "--config", "0:5,2:9", "--steps", "12"]
    assert run(argv, capsys) == run(argv, capsys)


def test_discrepancy_sweep(capsys):
    code, out = run(["discrepancy", "--config", "0:1", "--times", "8,16,32,64"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [int(r["t"]) for r in rows] == [8, 16, 32, 64]
    assert all(float(r["ratio"]) < 1 and r["pass"] == "1" for r in rows)
    code, out = run(["discrepancy", "--config", "0:1", "--steps", "4", "--interval", "0:4"], capsys)
    last = list(csv.DictReader(io.StringIO(out)))[-1]
    assert (last["max_abs_num"], last["max_abs_den"]) == ("5", "16")


def test_bounds_row(capsys):
    code, out = run(["bounds", "--n", "100", "--f", "1/4"], capsys)
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert (row["n1"], row["n2"], row["F"], row["F1"], row["F2"]) == ("76", "24", "25", "19", "6")


def test_force_parity(tmp_path, capsys):
    grid = tmp_path / "g.txt"
    grid.write_text("4 2 even\n0.0.\n.0.0\n")
    code, out = run(["force-parity", "--grid", str(grid)], capsys)
    assert code == 0 and parse_configurations(out)[0][1].is_empty()
    grid.write_text("1 2 odd\n.\n1\n")
    code, out = run(["force-parity", "--grid", str(grid)], capsys)
    assert parse_configurations(out)[0][1].as_dict() == {1: 2}
    grid.write_text("2 1 even\n11\n")
    assert main(["force-parity", "--grid", str(grid)]) == 2
    code, out = run(["force-parity", "--adversarial", "6", "--interval=-1:3"], capsys)
    assert code == 0 and not parse_configurations(out)[0][1].is_empty()


def test_game_commands(capsys):
    code, out = run(["game", "solve", "--x0", "1,11", "--n", "4", "--e", "1"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["paul_wins"] is True and rec["first_question"] == [1, 4]
    assert "nodes_expanded" in rec
    code, out = run(["game", "solve", "--x0", "0", "--n", "2"], capsys)
    assert json.loads(out)["paul_wins"] is False
    code, out = run(["game", "odd-run", "--x0", "1,11", "--n", "4", "--e", "1"], capsys)
    recs = [json.loads(ln) for ln in out.splitlines()]
    assert len(recs) == 4 and recs[-1]["state"] == [0, 0]


def test_game_interactive(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO("yes\nno\nyes\nyes\n"))
    code, out = run(["game", "interactive", "--x0", "1,11", "--n", "4"], capsys)
    recs = [json.loads(ln) for ln in out.splitlines()]
    assert code == 0 and recs[-1] == {"paul_wins": True, "state": [0, 1]}
    monkeypatch.setattr("sys.stdin", io.StringIO("maybe\n"))
    assert main(["game", "interactive", "--x0", "1,11", "--n", "4"]) == 2


@pytest.mark.parametrize(
    "argv, code",
    [
        (["simulate", "--config", "0:x", "--steps", "3"], 2),
        (["simulate", "--config", "0:1,1:1", "--steps", "3"], 2),
        (["simulate", "--config", "0:1000000", "--steps", "300", "--max-window", "5"], 3),
        (["game", "solve", "--x0", "30,30,30", "--n", "14", "--max-nodes", "10"], 3),
        (["game", "solve", "--x0", "1,2,3", "--n", "2", "--e", "1"], 2),
        (["bounds", "--n", "2"], 2),
        (["discrepancy", "--config", "0:1"], 2),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])
    assert exc.value.code == 2
