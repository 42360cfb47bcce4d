import csv
import io
import json
from pathlib import Path

import pytest

from qdteleport import cli

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("which", ["I", "III", "IV", "V", "VI"])
def test_tables_golden(tmp_path, capsys, which):
    code, _, _ = run(capsys, "tables", "--which", which, "--output", str(tmp_path))
    assert code == 0
    produced = (tmp_path / f"table_{which}.csv").read_bytes()
    assert produced == (GOLDEN / f"table_{which}.csv").read_bytes()


def test_tables_deterministic(capsys):
    first = run(capsys, "tables")[1]
    assert first == run(capsys, "tables")[1]


def test_table_vi_last_row(capsys):
    code, out, _ = run(capsys, "tables", "--which", "VI")
    rows = list(csv.DictReader(io.StringIO(out)))
    last = rows[-1]
    assert (last["B0_mT"], last["value_paper"], last["duration_paper"], last["cp_region_ok"]) == (
        "6", "0.93", "7.3", "true",
    )
    assert len(rows) == 6


def test_columns(capsys):
    out = run(capsys, "tables", "--which", "V", "--b0", "2")[1]
    header = out.splitlines()[0].split(",")
    assert header == [
        "B0_mT", "value", "value_paper", "value_alt", "value_alt_paper",
        "duration_ns", "duration_paper", "duration_alt_ns", "duration_alt_paper", "cp_region_ok",
    ]
    assert "\r" not in out


def test_json_output(capsys):
    code, out, _ = run(capsys, "tables", "--which", "I", "--b0", "3", "--format", "json")
    doc = json.loads(out)
    assert set(doc) == {"config_echo", "rows", "diagnostics"}
    assert doc["rows"][0]["value_paper"] == "0.94"
    assert doc["rows"][0]["cp_region_ok"] is True
    assert doc["config_echo"]["B0_list"] == [3.0]


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"b0_list": [2, 3], "format": "json", "which": ["IV"]}))
    doc = json.loads(run(capsys, "tables", "--config", str(cfg))[1])
    assert [r["B0_mT"] for r in doc["rows"]] == [2.0, 3.0]
    # flags win over the file
    out = run(capsys, "tables", "--config", str(cfg), "--format", "csv", "--b0", "5")[1]
    assert out.splitlines()[1].startswith("5,")


@pytest.mark.parametrize(
    "content", ['{"b0_list": [1], "colour": "red"}', "not json", '{"N": {"nested": 1}}', "[1, 2]"]
)
def test_bad_config(tmp_path, capsys, content):
    cfg = tmp_path / "bad.json"
    cfg.write_text(content)
    code, _, err = run(capsys, "tables", "--config", str(cfg))
    assert code == 2
    assert err.count("\n") == 1


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["tables", "--no-such-flag"])
    assert exc.value.code == 2
    assert run(capsys, "tables", "--which", "I", "--b0", "0.0")[0] == 3
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(capsys, "tables", "--which", "I", "--output", str(blocker / "sub"))[0] == 4
    assert run(capsys, "tables", "--config", str(tmp_path / "missing.json"))[0] == 4


def test_consistency_exit(monkeypatch, capsys):
    from qdteleport.errors import ConsistencyError

    def boom(*a, **k):
        raise ConsistencyError("residue breach")

    monkeypatch.setattr(cli.metrics, "make_table", boom)
    code, _, err = run(capsys, "tables", "--which", "I")
    assert code == 5
    assert "residue breach" in err


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--metric", "Gx_pi", "--b0", "1")
    lines = out.splitlines()
    assert lines[0] == "t_ns,value"
    pts = [tuple(map(float, line.split(","))) for line in lines[1:]]
    t_best, v_best = max(pts, key=lambda p: p[1])
    assert t_best == pytest.approx(13, abs=0.5)
    assert v_best == pytest.approx(0.72, abs=0.01)


@pytest.mark.parametrize("metric", ["Phi", "U_01", "idle", "F_measured"])
def test_sweep_other_metrics(capsys, metric):
    code, out, _ = run(capsys, "sweep", "--metric", metric, "--b0", "3", "--points", "20", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 20
    assert all(0 <= r["value"] <= 1 + 1e-12 for r in doc["rows"])


def test_protocol_dump(capsys):
    code, out, _ = run(capsys, "protocol", "--theta", "1.0", "--phi", "2.0", "--b0", "3")
    doc = json.loads(out)["run"]
    assert code == 0
    assert len(doc["outcomes"]) == 4
    assert sum(o["p"] for o in doc["outcomes"]) == pytest.approx(1.0)
    assert set(doc["gamma3"]) == {"re", "im"}
    assert 0.5 < doc["teleport_fidelity"] <= 1


def test_protocol_ideal(capsys):
    doc = json.loads(run(capsys, "protocol", "--ideal", "--t1-ns", "0", "--t2-ns", "0")[1])["run"]
    assert all(o["fidelity"] == pytest.approx(1.0, abs=1e-12) for o in doc["outcomes"])


@pytest.mark.parametrize("axis", ["x", "y", "z"])
def test_gate(capsys, axis):
    code, out, _ = run(capsys, "gate", "--axis", axis, "--b0", "2")
    doc = json.loads(out)["gate"]
    assert code == 0 and doc["cp_check"]["is_cp"]
    assert len(doc["transfer"]["re"]) == 4


def test_gate_strict_paper_flag(capsys):
    plain = json.loads(run(capsys, "gate", "--axis", "y", "--b0", "1")[1])["gate"]
    strict = json.loads(run(capsys, "gate", "--axis", "y", "--b0", "1", "--strict-paper-ey")[1])["gate"]
    assert plain["transfer"] != strict["transfer"]


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "--n-bath", "6", "--axis", "x", "--lam", "2", "--t", "0.5")
    rep = json.loads(out)["oracle"]
    assert code == 0 and rep["z_conjugation_ok"] and rep["template_ok"]
    rep = json.loads(run(capsys, "oracle", "--n-bath", "4")[1])["oracle"]
    assert rep["pattern_ok"]
    assert run(capsys, "oracle", "--n-bath", "13")[0] == 3


def test_erf_selftest(capsys):
    code, out, _ = run(capsys, "erf-selftest")
    assert code == 0
    assert out.splitlines()[-1] == "PASS"


def test_paper_rounding():
    assert cli.sig2(13.32) == "13"
    assert cli.sig2(3.98) == "4.0"
    assert cli.sig2(0.9042) == "0.90"
    assert cli.sig2(0.98497) == "0.98"
    assert cli.sig2(123.4) == "120"
