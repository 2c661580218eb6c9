"""End-to-end checks of the config-driven runner (in-process)."""

import json

import pytest

from ccdd_sense.cli import (
    KINDS,
    SchemaError,
    config_hash,
    load_config,
    main,
    presets,
)


def _tiny_rabi(out: str) -> dict:
    return {
        "schema": 1,
        "kind": "rabi",
        "seed": 7,
        "out": out,
        "drive": {"theta_m": 1.5707963267948966},
        "signal": {"g_hz": [2e6, 0.0, 0.0], "omega_s_hz": 2.31e9, "phi_s": 0.0},
        "noise": {},
        "readout": {"contrast_kappa": 0.1},
        "run": {"t_max_s": 100e-9, "n_points": 21, "n_realizations": 8},
    }


def test_presets_are_schema_valid():
    table = presets()
    assert len(table) >= 6
    for name, cfg in table.items():
        eff = load_config(cfg)
        assert eff["kind"] in KINDS, name


def test_presets_command_lists_and_writes(tmp_path, capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in presets():
        assert name in out
    assert main(["presets", "--write", str(tmp_path)]) == 0
    files = sorted(p.name for p in tmp_path.glob("*.json"))
    assert files == sorted(f"{n}.json" for n in presets())
    for p in tmp_path.glob("*.json"):
        load_config(json.loads(p.read_text()))


def test_config_hash_ignores_output_location():
    a = load_config(_tiny_rabi("dir_a"))
    b = load_config(_tiny_rabi("dir_b"))
    assert a["out"] != b["out"]
    assert config_hash(a) == config_hash(b)
    c = load_config({**_tiny_rabi("dir_a"), "seed": 8})
    assert config_hash(c) != config_hash(a)


def test_rabi_run_reproducible(tmp_path, capsys):
    cfg = tmp_path / "rabi.json"
    cfg.write_text(json.dumps(_tiny_rabi("unused")))
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out in (out1, out2):
        code = main(["rabi", "--config", str(cfg), "--plots", "--out", str(out)])
        manifest = json.loads(capsys.readouterr().out)
        assert code == 0
        assert manifest["kind"] == "rabi"
        assert manifest["seed"] == 7
        assert set(manifest["outputs"]) == {"rabi_trace.csv", "rabi_fft.csv", "rabi.svg"}
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m1["config_hash"] == m2["config_hash"]
    m1.pop("wall_time_s"), m2.pop("wall_time_s")
    assert m1 == m2
    for name in ("rabi_trace.csv", "rabi_fft.csv", "rabi.svg"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
    header = (out1 / "rabi_trace.csv").read_text().splitlines()[0]
    assert header == f"# config_hash={m1['config_hash']}"


def test_seed_flag_changes_hash(tmp_path, capsys):
    cfg = tmp_path / "rabi.json"
    cfg.write_text(json.dumps(_tiny_rabi("unused")))
    base, reseeded = tmp_path / "b", tmp_path / "s"
    assert main(["rabi", "--config", str(cfg), "--out", str(base)]) == 0
    capsys.readouterr()
    assert main(["rabi", "--config", str(cfg), "--seed", "9", "--out", str(reseeded)]) == 0
    capsys.readouterr()
    h1 = json.loads((base / "manifest.json").read_text())["config_hash"]
    h2 = json.loads((reseeded / "manifest.json").read_text())["config_hash"]
    assert h1 != h2


def test_out_env_var(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "rabi.json"
    cfg.write_text(json.dumps(_tiny_rabi("unused")))
    envdir = tmp_path / "from_env"
    monkeypatch.setenv("CCDD_SENSE_OUT", str(envdir))
    assert main(["rabi", "--config", str(cfg)]) == 0
    capsys.readouterr()
    assert (envdir / "manifest.json").exists()


def test_schema_errors_exit_2(tmp_path, capsys):
    bad = {**_tiny_rabi("x"), "mystery": 1}
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(bad))
    assert main(["rabi", "--config", str(cfg)]) == 2
    assert "mystery" in capsys.readouterr().err
    # config kind and subcommand must agree
    good = tmp_path / "good.json"
    good.write_text(json.dumps(_tiny_rabi("x")))
    assert main(["amp-sweep", "--config", str(good)]) == 2
    capsys.readouterr()
    # exactly one config source
    assert main(["rabi"]) == 2
    assert main(["rabi", "--config", str(good), "--preset", "fig2a"]) == 2
    assert main(["rabi", "--preset", "nope"]) == 2
    assert main(["rabi", "--config", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()


def test_physics_validation_exits_3(tmp_path, capsys):
    het = {
        "schema": 1,
        "kind": "heterodyne",
        "seed": 1,
        "drive": {"theta_m": 1.5707963267948966},
        # 150 kHz detuning aliases at the 200 kHz repetition rate
        "signal": {"g_hz": [1e6, 0.0, 0.0], "omega_s_hz": 2.31e9 + 150e3, "phi_s": 0.0},
        "noise": {},
        "readout": {"contrast_kappa": 0.1},
        "run": {"t_m_s": 0.01},
    }
    cfg = tmp_path / "het.json"
    cfg.write_text(json.dumps(het))
    assert main(["heterodyne", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "validation" in capsys.readouterr().err
