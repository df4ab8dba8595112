import json
import subprocess
import sys

import pytest

from coalkit.cli import main
from coalkit.representations import dump_game, load_game
from games import DATA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    lines = [json.loads(line) for line in out.splitlines() if line.strip()]
    assert len(lines) == 1
    return code, lines[0], err


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return path


def test_eval(capsys):
    code, rec, err = run(capsys, "eval", DATA / "mcnet.json", "a,b")
    assert code == 0 and rec["worth"] == "7" and "7" in err
    assert run(capsys, "eval", DATA / "graph4.json", "a,b,d")[1]["worth"] == "4"
    assert run(capsys, "eval", DATA / "graph4.json", "")[1]["worth"] == "0"


def test_eval_reports_json_position(capsys, tmp_path):
    bad = write(tmp_path, "bad.json", '{"players": ["a"],\n "repr": {"type": "graph",, }}')
    code, rec, _ = run(capsys, "eval", bad, "a")
    assert code == 2 and rec["error"] == "InputError"
    assert ":2:" in rec["message"]


def test_check_bargaining_set(capsys):
    code, rec, _ = run(capsys, "check", DATA / "three42.json", "bs", DATA / "x_8_10_24.json")
    assert code == 0 and rec["member"] is False
    assert rec["objection"]["against"] == "a" and rec["objection"]["coalition"] == ["b", "c"]
    code, rec, _ = run(capsys, "check", DATA / "three42.json", "bs", DATA / "x_8_10_24.json",
                       "--objector", "c", "--against", "a")
    assert rec["member"] is False
    assert (rec["objection"]["objector"], rec["objection"]["against"]) == ("c", "a")
    assert rec["objection"]["coalition"] == ["b", "c"]
    code, rec, _ = run(capsys, "check", DATA / "three42.json", "bs", DATA / "x_4_14_24.json")
    assert rec["member"] is True


def test_check_kernel_and_core(capsys, tmp_path):
    code, rec, _ = run(capsys, "check", DATA / "three42.json", "kernel", DATA / "x_4_14_24.json")
    assert code == 0 and rec["member"] is True
    code, rec, _ = run(capsys, "check", DATA / "three42.json", "core", DATA / "x_4_14_24.json")
    assert rec["member"] is False and rec["blocking"]["deficit"] == "2"
    solo = write(tmp_path, "solo.json", {"players": ["a"],
                                         "repr": {"type": "explicit", "worths": {"a": "3"}}})
    pay = write(tmp_path, "pay.json", {"a": "3"})
    assert run(capsys, "check", solo, "core", pay)[1]["member"] is True


def test_check_not_an_imputation(capsys, tmp_path):
    pay = write(tmp_path, "p.json", {"a": "0", "b": "0", "c": "0"})
    code, rec, _ = run(capsys, "check", DATA / "three42.json", "kernel", pay)
    assert code == 2 and rec["error"] == "NotAnImputation"
    assert "inefficient" in rec["message"]


def test_check_payoff_mismatch(capsys, tmp_path):
    pay = write(tmp_path, "p.json", {"a": "42"})
    assert run(capsys, "check", DATA / "three42.json", "core", pay)[0] == 2
    pay = write(tmp_path, "q.json", {"a": "1.5", "b": "0", "c": "0"})
    assert run(capsys, "check", DATA / "three42.json", "core", pay)[0] == 2


def test_engine_unsupported_exit_code(capsys):
    code, rec, _ = run(capsys, "check", DATA / "three42.json", "core", DATA / "x_4_14_24.json",
                       "--engine", "treewidth-dp")
    assert code == 3 and rec["error"] == "EngineUnsupported"
    assert run(capsys, "treewidth", DATA / "mcnet.json")[0] == 3


def test_jobs_invariance(capsys):
    a = run(capsys, "check", DATA / "three42.json", "bs", DATA / "x_8_10_24.json", "--jobs", "1")[1]
    b = run(capsys, "check", DATA / "three42.json", "bs", DATA / "x_8_10_24.json", "--jobs", "4")[1]
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


@pytest.mark.parametrize("mode", ["constraint-generation", "full-lp"])
def test_core_nonempty(capsys, mode):
    code, rec, _ = run(capsys, "core-nonempty", DATA / "three42.json", "--mode", mode,
                       "--certificate")
    assert code == 0 and rec["nonempty"] is False and rec["certificate_size"] == 3
    pairs = sorted(tuple(c["coalition"]) for c in rec["certificate"]["coalitions"])
    assert pairs == [("a", "b"), ("a", "c"), ("b", "c")]
    code, rec, _ = run(capsys, "core-nonempty", DATA / "three45.json", "--mode", mode)
    assert rec["nonempty"] is True and set(rec["point"]) == {"a", "b", "c"}


def test_core_nonempty_additive(capsys, tmp_path):
    game = write(tmp_path, "add.json", {"players": ["a", "b"], "repr": {
        "type": "explicit", "worths": {"a": "1", "b": "1", "a,b": "2"}}})
    assert run(capsys, "core-nonempty", game)[1]["nonempty"] is True


def test_gadget_kernel(capsys, tmp_path):
    code, rec, _ = run(capsys, "gadget", "kernel", DATA / "phi_hat.cnf", "--out", tmp_path / "k")
    assert code == 0 and rec["meta"]["players"] == 13
    game = load_game(json.loads((tmp_path / "k.game.json").read_text()))
    assert game.players.n == 13
    code, rec, _ = run(capsys, "check", tmp_path / "k.game.json", "kernel",
                       tmp_path / "k.payoff.json")
    assert rec["member"] is True


def test_gadget_bs(capsys, tmp_path):
    code, rec, _ = run(capsys, "gadget", "bs", DATA / "Phi_hat.qdimacs", "--out", tmp_path / "b")
    assert code == 0 and rec["meta"]["players"] == 12
    payoff = json.loads((tmp_path / "b.payoff.json").read_text())
    assert payoff["sat"] == "3" and payoff["chall"] == "0"


def test_gadget_bs_needs_twin_form(capsys, tmp_path):
    q = write(tmp_path, "q.qdimacs", "p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n")
    assert run(capsys, "gadget", "bs", q, "--out", tmp_path / "x")[0] == 2
    code, rec, _ = run(capsys, "gadget", "bs", q, "--out", tmp_path / "x", "--normalize")
    assert code == 0


def test_gadget_malformed(capsys, tmp_path):
    bad = write(tmp_path, "bad.cnf", "p cnf 1 1\n2 0\n")
    code, rec, _ = run(capsys, "gadget", "kernel", bad, "--out", tmp_path / "x")
    assert code == 2 and rec["error"] == "MalformedCnf"


def test_treewidth(capsys, tmp_path):
    path = write(tmp_path, "p.json", {"players": ["a", "b", "c"], "repr": {
        "type": "graph", "edges": [["a", "b", "1"], ["b", "c", "1"]]}})
    tri = write(tmp_path, "t.json", {"players": ["a", "b", "c"], "repr": {
        "type": "graph", "edges": [["a", "b", "1"], ["b", "c", "1"], ["a", "c", "1"]]}})
    assert run(capsys, "treewidth", path)[1]["width"] == 1
    dump = tmp_path / "td.json"
    code, rec, _ = run(capsys, "treewidth", tri, "--method", "exact-small", "--dump", dump)
    assert rec["width"] == 2 and json.loads(dump.read_text())["width"] == 2


def test_round_trip_of_emitted_game(tmp_path, capsys):
    run(capsys, "gadget", "kernel", DATA / "phi_hat.cnf", "--out", tmp_path / "k")
    text = (tmp_path / "k.game.json").read_text()
    game = load_game(json.loads(text))
    assert load_game(dump_game(game)) == game


def test_player_cap_env(capsys, monkeypatch):
    monkeypatch.setenv("COALKIT_MAX_PLAYERS", "2")
    code, rec, _ = run(capsys, "check", DATA / "three42.json", "bs", DATA / "x_4_14_24.json")
    assert code == 2 and rec["error"] == "TooManyPlayers"
    code, rec, _ = run(capsys, "--force", "check", DATA / "three42.json", "bs",
                       DATA / "x_4_14_24.json")
    assert code == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "coalkit", "eval", str(DATA / "mcnet.json"), "a"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["worth"] == "3"
    assert proc.stderr.strip()
