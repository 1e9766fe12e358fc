import csv
import json

import pytest

from multicurve import cli


@pytest.fixture(scope="module")
def snap_path(tmp_path_factory, snapshot):
    path = tmp_path_factory.mktemp("snap") / "snapshot.json"
    snapshot.save(path)
    return str(path)


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_generate_writes_loadable_snapshot(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert run("generate", "--seed", 4, "--snapshot", path) == 0
    assert json.loads(path.read_text())["schemaVersion"] == 1
    assert str(path) in capsys.readouterr().out


def test_bootstrap_writes_curves_and_diagnostics(tmp_path, snap_path):
    assert run("--snapshot", snap_path, "--out", tmp_path, "bootstrap", "--curves", "Euribor 6M CSA") == 0
    assert sorted(p.name for p in (tmp_path / "curves").iterdir()) == ["eonia_ois.json", "euribor_6m_csa.json"]
    with open(tmp_path / "bootstrap_diagnostics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert max(abs(float(r["error"])) for r in rows) < 1e-12


def test_price_instruments(tmp_path, snap_path):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps([
        {"id": "s5", "type": "swap", "tenor": "5Y", "fixedRate": 0.02},
        {"id": "f", "type": "fra", "start": "6M", "end": "12M", "strike": 0.01},
        {"id": "c", "type": "cap", "maturity": "5Y", "strike": 0.03, "vol": 0.2},
        {"id": "fl", "type": "floor", "maturity": "5Y", "strike": 0.03, "vol": 0.2},
    ]))
    assert run("price", "--snapshot", snap_path, "--out", tmp_path, "--instruments", inst,
               "--methods", "multi-csa", "--format", "json") == 0
    rows = json.loads((tmp_path / "prices.json").read_text())
    assert [r["id"] for r in rows] == ["s5", "f", "c", "fl"]
    assert all(r["method"] == "multi-csa" for r in rows)
    assert rows[2]["npv"] > 0 and rows[3]["npv"] > 0


def test_unknown_instrument_exits_2(tmp_path, snap_path):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps([{"type": "swaption"}]))
    assert run("price", "--snapshot", snap_path, "--out", tmp_path, "--instruments", inst) == 2


def test_compare_reports(tmp_path, snap_path):
    assert run("compare-fsirs", "--snapshot", snap_path, "--out", tmp_path) == 0
    assert run("compare-capfloor", "--snapshot", snap_path, "--out", tmp_path) == 0
    for stem in ("fsirs", "capfloor"):
        for suffix in (".csv", "_summary.json", "_plot.csv"):
            assert (tmp_path / f"{stem}{suffix}").exists()


def test_mispairing_exit_codes(tmp_path, snap_path, capsys):
    assert run("compare-capfloor", "--snapshot", snap_path, "--out", tmp_path,
               "--pairing", "multi-csa=euribor") == 2
    assert "mispairing" in capsys.readouterr().err
    assert run("compare-capfloor", "--snapshot", snap_path, "--out", tmp_path, "--methods", "multi-csa",
               "--pairing", "multi-csa=euribor", "--allow-mispairing") == 0
    with open(tmp_path / "capfloor.csv") as fh:
        assert {r["flag"] for r in csv.DictReader(fh)} == {"mispaired"}


def test_config_file_supplies_options(tmp_path, snap_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"methodologies": ["single"], "fsirs": {"excludeMaxYears": 5}}))
    assert run("compare-fsirs", "--snapshot", snap_path, "--config", config, "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "fsirs_summary.json").read_text())
    assert {s["methodology"] for s in summary["summary"]} == {"single"}
    assert summary["metadata"]["excludedIf"] == "start or tenor <= 5Y"


def test_strip_and_calibrate(tmp_path, snap_path):
    assert run("strip", "--snapshot", snap_path, "--out", tmp_path) == 0
    surface = json.loads((tmp_path / "surface_eonia.json").read_text())
    assert surface["context"] == "eonia" and surface["grid"]
    assert run("calibrate", "--snapshot", snap_path, "--out", tmp_path, "--objective", "vegaWeighted") == 0
    summary = json.loads((tmp_path / "calibration_eonia_vegaWeighted_summary.json").read_text())
    assert summary["errors"] == []


def test_missing_snapshot_exits_2(tmp_path, capsys):
    assert run("compare-fsirs", "--snapshot", tmp_path / "nope.json", "--out", tmp_path) == 2
    assert run("bootstrap", "--out", tmp_path) == 2
    assert "configuration error" in capsys.readouterr().err


def test_bootstrap_failure_exits_3(tmp_path, snapshot):
    data = json.loads(snapshot.to_json())
    # the 1Y OIS would need a discount factor of about 100 times the 9M one
    data["curves"]["Eonia OIS"][7]["quote"] = -0.99
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert run("bootstrap", "--snapshot", path, "--out", tmp_path, "--curves", "Eonia OIS") == 3


def test_calibrate_from_surface_file(tmp_path, snap_path):
    assert run("strip", "--snapshot", snap_path, "--out", tmp_path) == 0
    assert run("calibrate", "--snapshot", snap_path, "--out", tmp_path, "--surface",
               tmp_path / "surface_euribor.json", "--objective", "std") == 0
    with open(tmp_path / "calibration_euribor_standard.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(float(r["beta"]) == 0.5 for r in rows)
    assert run("calibrate", "--snapshot", snap_path, "--out", tmp_path, "--surface",
               tmp_path / "surface_euribor.json", "--context", "eonia") == 2
