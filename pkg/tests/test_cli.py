from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import pytest

from optclear.cli import EXIT_INPUT, EXIT_OK, EXIT_SOLVER, main
from optclear.formats import MatchReport, parse_orders

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"
DIS = str(DATA / "dis_positive_L.csv")
AAPL = str(DATA / "aapl_negative_L.csv")
COMBO = str(DATA / "aapl_msft_combo.csv")
BATCH = str(DATA / "abc_batch.csv")
CHAIN = str(DATA / "chain.csv")
HEADER = "id,side,kind,legs,strike,price,qty\n"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def report(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, MatchReport.from_json(out)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_match_standard_example(capsys):
    code, rep = report(capsys, "match", DIS)
    assert code == EXIT_OK
    assert rep.objective == 0.8 and rep.L == 40.0
    assert rep.mode == "standard" and rep.market_id == "dis_positive_L.csv"
    assert rep.fills == {"b1": 1.0, "b2": 1.0, "s1": 1.0, "s2": 1.0}


def test_match_negative_L(capsys):
    _, rep = report(capsys, "match", AAPL, "--market-id", "aapl")
    assert rep.L == -80.0 and rep.objective == pytest.approx(1.42)
    assert rep.market_id == "aapl"


def test_match_fix_L_zero(capsys):
    _, rep = report(capsys, "match", DIS, "--fix-L-zero")
    assert rep.objective == 0.0


def test_match_combinatorial_auto(capsys):
    code, rep = report(capsys, "match", COMBO)
    assert code == EXIT_OK and rep.mode == "combinatorial"
    assert rep.objective == pytest.approx(15.0, abs=1e-6)
    assert rep.statuses["match"] == "optimal"


def test_match_prefer_volume(capsys):
    _, rep = report(capsys, "match", BATCH, "--prefer-volume")
    assert rep.objective == pytest.approx(0.0, abs=1e-6)
    assert all(v == pytest.approx(1.0, abs=1e-6) for v in rep.fills.values())


def test_match_native_backend(capsys):
    _, rep = report(capsys, "match", DIS, "--method", "native")
    assert rep.objective == 0.8


def test_match_output_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert main(["match", DIS, "-o", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert MatchReport.from_json(out.read_text()).objective == 0.8


def test_match_unconverged_exit(capsys):
    code, rep = report(capsys, "match", COMBO, "--max-iter", "2")
    assert code == EXIT_SOLVER
    assert rep.statuses["match"] == "unconverged"


def test_match_deterministic(capsys, monkeypatch):
    monkeypatch.setenv("OPTCLEAR_SEED", "7")
    _, a = report(capsys, "match", COMBO)
    _, b = report(capsys, "match", COMBO)
    assert a.seed == b.seed == 7
    da, db = a.to_dict(), b.to_dict()
    da.pop("wall_time"), db.pop("wall_time")
    assert da == db


@pytest.mark.parametrize("text", [
    HEADER + "a,buy,call,X:1,10,0,1\n",            # zero price
    HEADER + "a,buy,call,X:1,10,1,1\na,sell,put,X:1,10,1,1\n",  # duplicate id
    HEADER + "a,buy,call,X:1,ten,1,1\n",
    "id,side\n",
])
def test_bad_input_exit(capsys, tmp_path, text):
    code = main(["match", write(tmp_path, "bad.csv", text)])
    assert code == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_missing_file_exit(capsys, tmp_path):
    assert main(["match", str(tmp_path / "nope.csv")]) == EXIT_INPUT


def test_quote_empty_book(capsys, tmp_path):
    path = write(tmp_path, "empty.csv", HEADER)
    code, out = run(capsys, "quote", path, "--kind", "put", "--legs", "X:1", "--strike", "100")
    q = json.loads(out)
    assert code == EXIT_OK
    assert q["bid"] == 0.0 and q["ask"] == 100.0 and q["covered"]
    _, out = run(capsys, "quote", path, "--kind", "call", "--legs", "X:1", "--strike", "100")
    q = json.loads(out)
    assert q["ask"] is None and not q["covered"]


def test_quote_single_ask(capsys, tmp_path):
    path = write(tmp_path, "s.csv", HEADER + "s,sell,call,X:1,100,9,1\n")
    _, out = run(capsys, "quote", path, "--kind", "call", "--legs", "X:1", "--strike", "100")
    assert json.loads(out)["ask"] == 9.0


def test_quote_arbitrage_book_rejected(capsys):
    code = main(["quote", DIS, "--kind", "call", "--legs", "DIS:1", "--strike", "120"])
    assert code == EXIT_INPUT
    capsys.readouterr()


def test_quote_combinatorial(capsys, tmp_path):
    path = write(tmp_path, "b.csv", HEADER + "a,sell,call,A:1,100,4,1\nb,sell,call,B:1,50,3,1\n")
    _, out = run(capsys, "quote", path, "--kind", "call", "--legs", "A:1;B:1", "--strike", "150")
    assert json.loads(out)["ask"] <= 7.0 + 1e-6


def test_frontier(capsys, tmp_path):
    path = write(tmp_path, "f.csv", HEADER + "a5,sell,call,X:1,10,5,1\na7,sell,call,X:1,10,7,1\n")
    _, out = run(capsys, "frontier", path)
    f = json.loads(out)
    assert f == {"frontier": ["a5"], "size": 1, "book_size": 2, "fraction": 0.5}
    _, out = run(capsys, "frontier", path, "--combinatorial")
    assert json.loads(out)["frontier"] == ["a5"]


def test_gen_from_chain(capsys):
    argv = ["gen", "--chain", CHAIN, "--n-orders", "6", "--U", "2", "--seed", "3"]
    code, out = run(capsys, *argv)
    assert code == EXIT_OK
    m = parse_orders(io.StringIO(out))
    assert len(m.orders) == 6
    assert set(m.universe.assets) <= {"AAPL", "DIS"}
    assert run(capsys, *argv)[1] == out


def test_gen_env_seed_overrides(capsys, monkeypatch):
    argv = ["gen", "--spots", "A=100,B=50", "--n-orders", "4", "--U", "2"]
    monkeypatch.setenv("OPTCLEAR_SEED", "5")
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv, "--seed", "99")[1]
    assert a == b


def test_gen_writes_chain(capsys, tmp_path):
    chain = tmp_path / "c.csv"
    code, _ = run(capsys, "gen", "--spots", "A=100,B=50", "--n-orders", "3", "--U", "2",
                  "--write-chain", str(chain))
    assert code == EXIT_OK and chain.read_text().startswith("ticker,kind,strike,bid,ask")


def test_gen_needs_chain(capsys):
    assert main(["gen", "--n-orders", "3"]) == EXIT_INPUT
    capsys.readouterr()


def test_gen_vc(capsys):
    code, out = run(capsys, "gen-vc", "--edges", "a-b,b-c,a-c", "--k", "2")
    assert code == EXIT_OK
    m = parse_orders(io.StringIO(out))
    assert (m.M, m.N) == (6, 13)


def test_gen_vc_bad_edge(capsys):
    assert main(["gen-vc", "--edges", "ab", "--k", "1"]) == EXIT_INPUT
    capsys.readouterr()


def test_experiment_vc(capsys):
    code, out = run(capsys, "experiment", "--vc", "a-b,b-c,c-d,d-a")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and rows
    assert all(r["agree"] == "1" for r in rows)
    assert {r["k"]: r["violated"] for r in rows}["2"] == "1"


def test_experiment_sweep(capsys):
    code, out = run(capsys, "experiment", "--spots", "A=100,B=50,C=80", "--etas", "2^-4,0",
                    "--n-orders", "5", "--U", "2", "--seeds", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert [float(r["eta"]) for r in rows] == [0.0625, 0.0]
    assert all(r["runs"] == "2" and r["failed"] == "0" for r in rows)


def test_quote_instantaneous(capsys, tmp_path):
    path = write(tmp_path, "two.csv", HEADER + "a5,sell,call,X:1,10,5,1\na7,sell,call,X:1,10,7,1\n")
    argv = ["quote", path, "--kind", "call", "--legs", "X:2", "--strike", "20"]
    assert json.loads(run(capsys, *argv)[1])["ask"] == 12.0
    assert json.loads(run(capsys, *argv, "--instantaneous")[1])["ask"] == 10.0
