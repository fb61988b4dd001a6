import csv
import json

import pytest

import exarray as xa
from exarray import serialization as ser
from exarray.cli import main


@pytest.fixture
def specs(tmp_path):
    rho = tmp_path / "rho.json"
    rho.write_text(json.dumps(ser.rho_to_json(xa.constant_graphon(0.3))))
    event = tmp_path / "event.json"
    event.write_text(json.dumps(ser.event_to_json(
        xa.EventHypergraph.build(
            ["a", "b"], 2, xa.Discrete(2), {("a", "b"): xa.DiscreteSubset({1})}
        )
    )))
    return {"rho": str(rho), "event": str(event), "dir": tmp_path}


def run(argv):
    return main(argv)


class TestEstimate:
    def test_documented_band(self, specs):
        out = specs["dir"] / "report.json"
        code = run([
            "estimate", "--rho", specs["rho"], "--event", specs["event"],
            "-N", "100000", "--seed", "7", "--out", str(out), "--no-timestamp",
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["schema"] == 1
        assert 0.294 <= doc["result"]["estimate"] <= 0.306
        assert doc["result"]["seed"] == 7
        assert doc["config"]["seed"] == 7  # replayable

    def test_byte_identical_reruns(self, specs):
        out1 = specs["dir"] / "r1.json"
        out2 = specs["dir"] / "r2.json"
        argv = ["estimate", "--rho", specs["rho"], "--event", specs["event"],
                "-N", "5000", "--seed", "3", "--no-timestamp"]
        run(argv + ["--out", str(out1)])
        run(argv + ["--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_workers_do_not_change_output(self, specs):
        outs = []
        for w in ("1", "4"):
            out = specs["dir"] / f"w{w}.json"
            run(["estimate", "--rho", specs["rho"], "--event", specs["event"],
                 "-N", "20000", "--seed", "5", "--workers", w,
                 "--out", str(out), "--no-timestamp"])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_timestamp_present_by_default(self, specs, capsys):
        run(["estimate", "--rho", specs["rho"], "--event", specs["event"],
             "-N", "100", "--seed", "1"])
        doc = json.loads(capsys.readouterr().out)
        assert "timestamp" in doc


class TestConverge:
    def test_csv_shape(self, specs):
        out = specs["dir"] / "conv.csv"
        code = run([
            "converge", "--rho", specs["rho"], "--event", specs["event"],
            "-N", "20000", "-M", "10,100,1000", "--seed", "11",
            "--format", "csv", "--out", str(out), "--no-timestamp",
        ])
        assert code == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 3
        assert {"index_bound", "corrected", "injectivity", "z_identity"} <= set(rows[0])
        assert [r["index_bound"] for r in rows] == ["10", "100", "1000"]


class TestExitCodes:
    def test_malformed_json_exits_2(self, specs, capsys):
        bad = specs["dir"] / "bad.json"
        bad.write_text('{"arity": 2,, }')
        code = run(["estimate", "--rho", str(bad), "--event", specs["event"],
                    "-N", "10", "--seed", "1"])
        assert code == 2
        err = capsys.readouterr().err
        assert "bad.json:1:" in err  # line-anchored diagnostics

    def test_invalid_schema_exits_2(self, specs, capsys):
        bad = specs["dir"] / "bad2.json"
        bad.write_text(json.dumps({"arity": 2, "family": {"name": "mystery"}}))
        code = run(["estimate", "--rho", str(bad), "--event", specs["event"],
                    "-N", "10", "--seed", "1"])
        assert code == 2

    def test_assert_flag_exits_3_on_inconsistent(self, tmp_path):
        # the coin mixture fails dissociation; --assert must turn that into exit 3
        rho = tmp_path / "mix.json"
        rho.write_text(json.dumps(ser.rho_to_json(
            xa.coin_mixture([0.9, 0.1], [0.5, 0.5])
        )))
        e1 = tmp_path / "e1.json"
        e1.write_text(json.dumps(ser.event_to_json(xa.EventHypergraph.build(
            ["a"], 1, xa.Discrete(2), {("a",): xa.DiscreteSubset({1})}
        ))))
        e2 = tmp_path / "e2.json"
        e2.write_text(json.dumps(ser.event_to_json(xa.EventHypergraph.build(
            ["b"], 1, xa.Discrete(2), {("b",): xa.DiscreteSubset({1})}
        ))))
        out = tmp_path / "t.json"
        code = run([
            "test-dissoc", "--rho", str(rho), "--event", str(e1),
            "--event2", str(e2), "--map1", '{"a": 1}', "--map2", '{"b": 2}',
            "-N", "50000", "--seed", "9", "--assert", "--out", str(out),
        ])
        assert code == 3
        assert json.loads(out.read_text())["result"]["verdict"] == "inconsistent"

    def test_consistent_run_exits_0_with_assert(self, specs):
        code = run([
            "test-exch", "--rho", specs["rho"], "--event", specs["event"],
            "--map1", '{"a": 1, "b": 2}', "--map2", '{"a": 3, "b": 4}',
            "-N", "20000", "--seed", "13", "--assert", "--no-timestamp",
            "--out", str(specs["dir"] / "exch.json"),
        ])
        assert code == 0


class TestSample:
    def test_edge_list(self, specs):
        out = specs["dir"] / "edges.csv"
        code = run(["sample", "--rho", specs["rho"], "-M", "5", "--seed", "2",
                    "--format", "csv", "--out", str(out), "--no-timestamp"])
        assert code == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 10  # C(5,2)
        assert set(rows[0]) == {"i1", "i2", "value"}


class TestInnerApprox:
    def test_inline_json(self, tmp_path, capsys):
        code = run([
            "inner-approx", "--set", '{"open": [0.2, 0.8]}', "--dist", '"uniform"',
            "--eps", "0.01", "--no-timestamp",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        lo, hi = doc["result"]["inner"]["closed"]
        assert lo == pytest.approx(0.205, abs=1e-6)
        assert hi == pytest.approx(0.795, abs=1e-6)
        assert doc["result"]["measure"] - doc["result"]["inner_measure"] <= 0.01


class TestDefinetti:
    def test_histogram_csv(self, tmp_path):
        out = tmp_path / "hist.csv"
        code = run([
            "definetti", "--probs", "0.9,0.1", "--weights", "0.5,0.5",
            "-L", "100", "-N", "500", "--bins", "10", "--seed", "21",
            "--format", "csv", "--out", str(out), "--no-timestamp",
        ])
        assert code == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 10
        assert abs(sum(float(r["mass"]) for r in rows) - 1.0) < 1e-9


class TestDistillCommand:
    def test_recovery_with_comparison(self, tmp_path):
        rho = tmp_path / "step.json"
        rho.write_text(json.dumps(ser.rho_to_json(
            xa.step_graphon([[0.9, 0.1], [0.1, 0.1]])
        )))
        event = tmp_path / "edge.json"
        event.write_text(json.dumps(ser.event_to_json(
            xa.EventHypergraph.build(["a", "b"], 2, xa.Discrete(2),
                                     {("a", "b"): xa.DiscreteSubset({1})})
        )))
        out = tmp_path / "distill.json"
        code = run([
            "distill", "--rho", str(rho), "--event", str(event), "-M", "400",
            "--blocks", "2", "-N", "2000", "--seed", "31",
            "--out", str(out), "--no-timestamp",
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        matrix = doc["result"]["blocks"]["matrix"]
        assert len(matrix) == 2
        assert doc["result"]["comparison"]["verdict"] == "consistent"


class TestSeedMandatory:
    def test_missing_seed_rejected(self, specs, capsys):
        with pytest.raises(SystemExit):
            run(["estimate", "--rho", specs["rho"], "--event", specs["event"],
                 "-N", "10"])
