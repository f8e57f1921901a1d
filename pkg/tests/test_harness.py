import csv
import io
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from fraclod import cli, harness
from fraclod.geometry import build_localized_network
from fraclod.harness import ConfigError, ExperimentConfig, load_config, parse_config


@pytest.mark.parametrize("name", harness.PRESETS)
def test_presets_parse(name):
    cfg = load_config(preset=name)
    assert cfg.name == name
    assert parse_config(cfg.to_ini()).hash() == cfg.hash()


def test_preset_contents():
    t1 = load_config(preset="table1")
    assert (t1.kind, t1.K_range, t1.stopping_for, t1.sweeps) == ("localized", [2, 3, 4], [3], 9)
    t2 = load_config(preset="table2")
    assert (t2.kind, t2.seed, t2.K_range, t2.stopping_for) == ("geological", 0, [2, 3, 4, 5, 6], [5])


@pytest.mark.parametrize("text", [
    "[network]\nkind = fractal\n",
    "[network]\nk_max = 7\n",
    "[network]\nbogus = 1\n",
    "[extra]\nx = 1\n",
    "[model]\nc_frak = -1\n",
    "[model]\nf = cosine\n",
    "[solver]\nsweeps = many\n",
    "[solver]\ncell_order = random\n",
    "[study]\nK_range = 1 2\n",
    "[network]\nk_max = 3\n[study]\nK_range = 2 3\nstopping_for = 3\n",
    "[study]\nkind = lod\nK = 3\nk_list = 3\n",
    "[study]\nkind = projections\npairs = 2:2\n",
    "not an ini file",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_config_arguments(tmp_path):
    with pytest.raises(ConfigError):
        load_config()
    with pytest.raises(ConfigError):
        load_config(tmp_path / "x.ini", "table1")
    with pytest.raises(ConfigError):
        load_config(preset="table9")
    cfg = load_config(preset="table2", overrides={"seed": 5, "out": str(tmp_path), "k_max": None})
    assert cfg.seed == 5 and cfg.out == str(tmp_path) and cfg.k_max == 6


def test_hash_stability():
    a = ExperimentConfig()
    b = ExperimentConfig(out="elsewhere", cache=False)
    assert a.hash() == b.hash()
    assert ExperimentConfig(seed=3).hash() == a.hash()  # seed is irrelevant for the localized network
    assert ExperimentConfig(kind="geological", seed=3).hash() != ExperimentConfig(kind="geological").hash()
    assert ExperimentConfig(sweeps=8).hash() != a.hash()
    assert len(a.hash()) == 64


def test_dry_run_counts():
    cfg = parse_config("[network]\nk_max = 3\n[study]\nK_range = 2 3\n")
    rows = harness.dry_run(cfg)
    assert [r["scale"] for r in rows] == [1, 2, 3]
    assert [r["cells"] for r in rows] == [6, 21, 66]
    assert [r["dofs"] for r in rows] == [18, 301, 4374]


def test_csv_is_rfc4180():
    text = harness.csv_text(["a", "b"], [[1, 'x,"y"'], [2, "z"]], {"seed": 0})
    assert text.endswith("\r\n") and "\n" not in text.replace("\r\n", "")
    rows = list(csv.reader(io.StringIO(text, newline="")))
    assert rows == [["# seed", "0"], ["a", "b"], ["1", 'x,"y"'], ["2", "z"]]


def test_atomic_write_leaves_no_temp(tmp_path):
    harness.atomic_write(tmp_path / "d" / "f.txt", "hello")
    harness.atomic_write(tmp_path / "d" / "g.bin", b"\x00\x01")
    assert sorted(p.name for p in (tmp_path / "d").iterdir()) == ["f.txt", "g.bin"]
    assert (tmp_path / "d" / "g.bin").read_bytes() == b"\x00\x01"


def test_svg_render():
    net = build_localized_network(3)
    text = harness.render_network_svg(net, 2)
    root = ET.fromstring(text.split("\n", 1)[1])
    assert root.get("version") == "1.1"
    paths = root.findall("{http://www.w3.org/2000/svg}path")
    assert [p.get("class") for p in paths] == ["level-1", "level-2"]
    assert [p.get("stroke") for p in paths] == ["black", "#d62728"]
    for k in (0, 4):
        with pytest.raises(ValueError):
            harness.render_network_svg(net, k)


def _small_lod(tmp_path):
    return parse_config(
        "[network]\nk_max = 2\n[study]\nkind = lod\nK = 2\nk_list = 1\nnu_list = 0 2 ideal\n"
        f"[output]\ndir = {tmp_path}\n")


def test_lod_run_archive_deterministic(tmp_path):
    cfg = _small_lod(tmp_path / "a")
    a = harness.run(cfg, tmp_path / "a")
    b = harness.run(cfg, tmp_path / "b")
    ja = json.loads((tmp_path / "a" / "archive.json").read_text())
    jb = json.loads((tmp_path / "b" / "archive.json").read_text())
    ja.pop("timings"), jb.pop("timings")
    assert ja == jb
    assert a.config_hash == cfg.hash()
    assert set(a.files) == {"lod.txt", "lod.csv", "network_k1.svg", "network_k2.svg", "config.ini"}
    for name in a.files:
        assert (tmp_path / "b" / name).read_bytes() == (tmp_path / "a" / name).read_bytes()
    errs = [r["h_error"] for r in ja["results"]["rows"]]
    assert errs[0] > errs[1] > errs[2]
    assert parse_config((tmp_path / "a" / "config.ini").read_text()).hash() == cfg.hash()


def test_projection_run(tmp_path):
    cfg = parse_config("[network]\nk_max = 2\n[study]\nkind = projections\npairs = 2:1\ntrials = 4\n")
    arch = harness.run(cfg, tmp_path)
    (res,) = arch.results["pairs"]
    assert res["K"] == 2 and res["k"] == 1 and 0 < res["stability"] < 10


def test_twolevel_run_uses_reference_cache(tmp_path):
    cfg = parse_config("[network]\nk_max = 3\n[study]\nK_range = 2\nstopping_for = 2\n[solver]\nsweeps = 3\n")
    a = harness.run(cfg, tmp_path)
    cached = sorted(p.name for p in (tmp_path / "cache").glob("ref_*.npz"))
    assert len(cached) == 3  # scales 1, 2 and 3
    stamps = {p: p.stat().st_mtime_ns for p in (tmp_path / "cache").glob("ref_*.npz")}
    b = harness.run(cfg, tmp_path)
    assert {p: p.stat().st_mtime_ns for p in stamps} == stamps
    assert a.results["reports"] == b.results["reports"]
    text = (tmp_path / "table.txt").read_text()
    assert cfg.hash() in text and "stopping index at K=2" in text


def test_reference_cache_rejects_foreign_key(tmp_path):
    from fraclod.linsolve import SolveReport

    c = harness.ReferenceCache(tmp_path, "a" * 64)
    c.store(2, np.arange(3.0), SolveReport(5, 1e-13, True))
    u, rep = c.load(2)
    assert np.array_equal(u, np.arange(3.0)) and rep.iterations == 5 and rep.converged
    assert harness.ReferenceCache(tmp_path, "a" * 16 + "b" * 48).load(2) is None
    assert c.load(3) is None


def test_inspect_localized():
    text = harness.inspect_network(parse_config("[network]\nk_max = 3\n[study]\nK_range = 2\n"))
    lines = text.splitlines()
    assert lines[0].startswith("kind localized")
    assert [int(l.split()[2]) for l in lines[2:5]] == [6, 21, 66]
    assert lines[-1].startswith("smallcl")


def test_cli_dry_run_and_inspect(capsys):
    assert cli.main(["run", "--preset", "lod-study", "--dry-run"]) == 0
    out = capsys.readouterr().out
    assert "study lod" in out and "4374 dofs" in out
    assert cli.main(["inspect", "--preset", "lod-study"]) == 0
    assert "kind localized" in capsys.readouterr().out


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[network]\nkind = fractal\n")
    assert cli.main(["run", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        cli.main(["run", "--config", str(bad), "--preset", "table1"])


def test_cli_render_and_run(tmp_path, capsys):
    assert cli.main(["render", "--preset", "lod-study", "--out", str(tmp_path), "--level", "1", "3"]) == 0
    assert sorted(p.name for p in tmp_path.glob("*.svg")) == ["network_k1.svg", "network_k3.svg"]
    cfg = tmp_path / "c.ini"
    cfg.write_text("[network]\nk_max = 2\n[study]\nkind = projections\npairs = 2:1\ntrials = 2\n")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r" / "archive.json").exists()
    assert "stability" in capsys.readouterr().out


def test_cli_check_subset(tmp_path, capsys):
    code = cli.main(["check", "--only", "6", "--out", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "acceptance.json").read_text())
    assert data["results"]["6"]["passed"] is True


def test_readme_config_example_parses():
    import re
    from pathlib import Path

    text = (Path(__file__).resolve().parents[1] / "README.md").read_text(encoding="utf-8")
    block = re.search(r"```ini\n(.*?)```", text, re.S).group(1)
    cfg = parse_config(block)
    assert cfg.block_scale is None and cfg.nu_list[-1] == float("inf")
