import json
from pathlib import Path

import pytest

from colosim.cli import UsageError, main, parse_roles
from colosim.compiler import TerrainBounds, serialize_geometry, static_node

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def state(tmp_path):
    return str(tmp_path / "state")


def run(state, *argv):
    return main(["--state", state, *argv])


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_parse_roles():
    assert parse_roles("probe_tx,probe_rx") == ["probe_tx", "probe_rx"]
    assert parse_roles("modem_endpoint*3, silent") == ["modem_endpoint"] * 3 + ["silent"]
    for bad in ("", "radar", "silent*x", "silent*0"):
        with pytest.raises(UsageError):
            parse_roles(bad)


def test_gen_install_list_info(state, tmp_path, capsys):
    assert run(state, "gen", "sce", "-o", str(tmp_path / "gen"), "--install") == 0
    assert (tmp_path / "gen" / "sce_qual_v1.rfscn").read_bytes() == \
        (GOLDEN / "sce_qual_v1.rfscn").read_bytes()
    capsys.readouterr()
    assert run(state, "scenario", "list") == 0
    assert capsys.readouterr().out.split("\t")[:3] == ["sce_qual_v1", "10", "600000"]
    assert run(state, "scenario", "info", "sce_qual_v1") == 0
    info = out_json(capsys)
    assert info["n_nodes"] == 10 and info["duration_ms"] == 600_000


def test_scenario_errors(state, tmp_path):
    assert run(state, "scenario", "info", "missing") == 2
    assert run(state, "scenario", "info") == 2
    bad = tmp_path / "bad.rfscn"
    bad.write_text("not a scenario\n")
    assert run(state, "scenario", "install", str(bad)) == 2
    assert run(state, "scenario", "install", str(tmp_path / "absent.rfscn")) == 2


def test_compile(state, tmp_path, capsys):
    geo = tmp_path / "two.json"
    geo.write_bytes(serialize_geometry(TerrainBounds(1000, 1000),
                                       [static_node(0, 0, 0), static_node(1, 300, 0)]))
    out = tmp_path / "two.rfscn"
    assert run(state, "compile", "--geometry", str(geo), "--fs", "100e6", "--carrier", "1e9",
               "--duration-ms", "5000", "-o", str(out)) == 0
    assert "5 updates" in capsys.readouterr().out
    assert run(state, "scenario", "install", str(out)) == 0
    # static geometry without a duration
    assert run(state, "compile", "--geometry", str(geo), "--fs", "1e6", "--carrier", "1e9",
               "-o", str(out)) == 2


def test_tokens_reserve_config(state, capsys):
    assert run(state, "tokens", "--team", "red", "--budget", "100", "--now", "0") == 0
    assert out_json(capsys)["balance"] == 100
    assert run(state, "reserve", "--team", "red", "--nodes", "2", "--hours", "3", "--now", "0") == 0
    r = out_json(capsys)
    assert r["cost"] == 60 and r["state"] == "ACTIVE"
    assert run(state, "reserve", "--team", "red", "--nodes", "2", "--hours", "3", "--now", "1") == 3
    assert run(state, "reserve", "--team", "red", "--nodes", "99", "--hours", "1", "--now", "1") == 3
    assert run(state, "reserve", "--team", "blue", "--nodes", "1", "--hours", "1") == 2
    assert run(state, "tokens", "--team", "red", "--now", str(8 * 86400)) == 0
    assert out_json(capsys)["balance"] == 100
    assert run(state, "config", "--pool-size", "4") == 0
    assert out_json(capsys)["pool_size"] == 4


def test_job_lifecycle(state, tmp_path, capsys):
    run(state, "gen", "sce", "-o", str(tmp_path / "gen"), "--install")
    run(state, "tokens", "--team", "blue", "--budget", "100", "--now", "0")
    capsys.readouterr()
    job = str(GOLDEN / "probe_pair.job.json")
    assert run(state, "job", "submit", job, "--now", "0") == 0
    jid = capsys.readouterr().out.strip()
    assert jid == "job00001"
    assert run(state, "job", "queue") == 0
    assert capsys.readouterr().out.startswith("0\tjob00001\tblue\t2")
    assert run(state, "job", "run", "--now", "0") == 0
    assert "ARCHIVED" in capsys.readouterr().out
    assert run(state, "job", "status", jid) == 0
    rec = out_json(capsys)
    assert rec["state"] == "ARCHIVED"
    probes = rec["metrics"]["probes"]["1"]
    assert len(probes) == 300 and all(abs(snr - 20) < 0.5 for _, snr in probes)
    archive = Path(rec["log_dir"])
    assert (archive / "manifest.json").exists()
    assert run(state, "job", "status", "job99999") == 2


def test_job_submit_errors(state, tmp_path):
    assert run(state, "job", "submit", str(tmp_path / "missing.json")) == 2
    assert run(state, "job", "submit", str(GOLDEN / "probe_pair.job.json")) == 2  # unknown scenario
    run(state, "gen", "sce", "-o", str(tmp_path / "gen"), "--install")
    run(state, "tokens", "--team", "blue", "--budget", "0", "--now", "0")
    assert run(state, "job", "submit", str(GOLDEN / "probe_pair.job.json"), "--now", "0") == 3


def test_run_archives(state, tmp_path, capsys):
    run(state, "gen", "sce", "-o", str(tmp_path / "gen"), "--install")
    capsys.readouterr()
    assert run(state, "run", "--rf", "sce_qual_v1", "--traffic", "sce_qual_v1",
               "--nodes", "modem_endpoint*2", "--duration", "1", "--id", "demo") == 0
    res = out_json(capsys)
    assert res["exp_id"] == "demo"
    assert (Path(state) / "archive" / "demo" / "flows.csv").exists()
    assert run(state, "run", "--rf", "sce_qual_v1", "--nodes", "silent", "--duration", "1",
               "--id", "demo") == 2
    assert run(state, "run", "--rf", "sce_qual_v1", "--nodes", "silent*11", "--duration", "1") == 2
    assert run(state, "run", "--rf", "nope", "--nodes", "silent", "--duration", "1") == 2


def test_gen_families(state, tmp_path):
    assert run(state, "gen", "cellular", "--bs", "8", "--distance", "far", "-o", str(tmp_path)) == 0
    assert (tmp_path / "cellular_8bs_far_static.groups.json").exists()
    assert run(state, "gen", "cellular", "--bs", "7", "-o", str(tmp_path)) == 2


def test_archive_failure_exit_code(state, tmp_path, monkeypatch):
    from colosim.orchestrator import archive

    def disk_full(src, dst):
        Path(dst).mkdir()
        raise OSError(28, "No space left on device")

    run(state, "gen", "sce", "-o", str(tmp_path / "gen"), "--install")
    monkeypatch.setattr(archive.shutil, "copytree", disk_full)
    assert run(state, "run", "--rf", "sce_qual_v1", "--nodes", "silent", "--duration", "0.1",
               "--id", "x") == 4
    assert (Path(state) / "work" / "x" / "flows.csv").exists()
    assert list((Path(state) / "archive").iterdir()) == []
