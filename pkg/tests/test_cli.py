import io
import json
import os
import signal
import subprocess
import sys
import time

import numpy as np
import pytest
import requests
from PIL import Image

from agroplat.cli import run
from agroplat.config import Config, load_config
from agroplat.errors import FormatError
from agroplat.images import encode_png
from agroplat.neuralnet import CLASS_LABELS

from conftest import _PATCH_COLORS, solid_png


def write_config(tmp_path, **extra):
    cfg = {"data_dir": str(tmp_path / "data"), "scrypt_log_n": 4,
           "model_input_size": 16, "listen_port": 0}
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def write_patch_tree(root, size=16, per_class=2):
    """Class-named folders of solid-color photos, one color per label."""
    for ci, (r, g, b) in enumerate(_PATCH_COLORS):
        sub = root / CLASS_LABELS[ci]
        sub.mkdir(parents=True)
        for k in range(per_class):
            shade = 25 * k
            px = np.full((size, size, 3), (r - shade, g - shade, b - shade),
                         dtype=np.uint8)
            (sub / f"img{k}.png").write_bytes(encode_png(px))


# --- config loading -----------------------------------------------------------

def test_config_precedence_defaults_file_env(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"listen_port": 9999, "loess_span": 0.5}))
    cfg = load_config(str(path), env={"AGRO_LISTEN_PORT": "1234",
                                      "AGRO_FSYNC": "yes"})
    assert cfg.listen_port == 1234          # env beats file
    assert cfg.loess_span == 0.5            # file beats default
    assert cfg.data_dir == Config().data_dir
    assert cfg.fsync is True


def test_config_rejects_unknown_keys_and_bad_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"listen_prot": 1}))
    with pytest.raises(FormatError):
        load_config(str(bad))
    bad.write_text("{nope")
    with pytest.raises(FormatError):
        load_config(str(bad))
    bad.write_text("[1]")
    with pytest.raises(FormatError):
        load_config(str(bad))


def test_config_bool_coercion_variants():
    for truthy in ("1", "true", "Yes", "ON"):
        assert load_config(env={"AGRO_FSYNC": truthy}).fsync is True
    for falsy in ("0", "false", "no", ""):
        assert load_config(env={"AGRO_FSYNC": falsy}).fsync is False


# --- index verb ------------------------------------------------------------------

def test_index_reports_summary_lines(tmp_path, capsys):
    img = tmp_path / "gray.png"
    img.write_bytes(solid_png((100, 100, 100), size=4))
    assert run(["index", "--image", str(img), "--kind", "grvi"]) == 0
    rows = dict(line.split(",", 1) for line in
                capsys.readouterr().out.strip().splitlines())
    assert rows["kind"] == "grvi"
    assert float(rows["mean"]) == 0.0
    assert float(rows["min"]) == 0.0
    assert float(rows["max"]) == 0.0
    assert float(rows["valid_fraction"]) == 1.0
    assert float(rows["p50"]) == 0.0
    assert rows["scale"] == "rgb/255"


def test_index_writes_heatmap_png(tmp_path, capsys):
    img = tmp_path / "gray.png"
    img.write_bytes(solid_png((100, 100, 100), size=4))
    out = tmp_path / "heat.png"
    assert run(["index", "--image", str(img), "--out", str(out)]) == 0
    assert f"wrote heatmap to {out}" in capsys.readouterr().out
    heat = Image.open(io.BytesIO(out.read_bytes())).convert("RGB")
    # constant index map renders as the midpoint color
    assert heat.getpixel((0, 0)) == (255, 255, 255)


def test_index_missing_image_is_domain_error(tmp_path, capsys):
    assert run(["index", "--image", str(tmp_path / "nope.png")]) == 1
    assert "error:" in capsys.readouterr().err


# --- train / evaluate / predict through files --------------------------------------

def test_train_evaluate_predict_roundtrip(tmp_path, capsys):
    data = tmp_path / "dataset"
    write_patch_tree(data)
    model_path = tmp_path / "model.bin"

    rc = run(["train", "--data", str(data), "--out", str(model_path),
              "--epochs", "60", "--seed", "0", "--size", "16",
              "--batch-size", "4", "--no-augment"])
    out = capsys.readouterr().out
    assert rc == 0
    assert model_path.exists()
    epoch_lines = [l for l in out.splitlines() if l.startswith("epoch ")]
    assert len(epoch_lines) == 60
    assert "saved model" in out

    rc = run(["evaluate", "--model", str(model_path), "--data", str(data)])
    out = capsys.readouterr().out
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0] == "class,support,precision,recall,f1"
    assert len(lines) == 8  # header, six classes, accuracy
    assert lines[-1] == "accuracy,,1.000000,,"
    for line in lines[1:7]:
        label, support, precision, recall, f1 = line.split(",")
        assert support == "2"
        assert float(precision) == float(recall) == float(f1) == 1.0

    sample = data / "healthy" / "img0.png"
    rc = run(["predict", "--model", str(model_path), "--image", str(sample)])
    out = capsys.readouterr().out
    assert rc == 0
    lines = out.strip().splitlines()
    probs = dict(l.split(",") for l in lines[:-1])
    assert set(probs) == set(CLASS_LABELS)
    assert abs(sum(float(v) for v in probs.values()) - 1.0) < 1e-9
    assert "predicted healthy" in lines[-1]


def test_predict_missing_model_file(tmp_path, capsys):
    img = tmp_path / "x.png"
    img.write_bytes(solid_png((1, 2, 3)))
    assert run(["predict", "--model", str(tmp_path / "no.bin"),
                "--image", str(img)]) == 1
    assert "error:" in capsys.readouterr().err


# --- usage errors -------------------------------------------------------------------

def test_unknown_verb_exits_2_with_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 2
    assert "usage:" in capsys.readouterr().err


def test_missing_required_argument_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["predict", "--model", "m.bin"])
    assert exc.value.code == 2
    assert "--image" in capsys.readouterr().err


# --- fixtures and stats ---------------------------------------------------------------

def test_seed_and_stats_files(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert run(["seed", "--fixture", "usage", "--config", cfg]) == 0
    assert run(["seed", "--fixture", "downloads", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "seeded usage fixture" in out
    assert "downloads over 90 days" in out

    csv_path = tmp_path / "usage.csv"
    png_path = tmp_path / "trend.png"
    assert run(["stats", "--config", cfg, "--out", str(csv_path),
                "--out", str(png_path)]) == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "metric,value"
    assert "farmers,146" in lines
    assert "users_total,167" in lines
    figure = Image.open(io.BytesIO(png_path.read_bytes()))
    assert figure.size == (800, 500)


def test_stats_without_out_prints_csv(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert run(["stats", "--config", cfg]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "metric,value"
    assert all(len(line.split(",")) == 2 for line in lines)


def test_stats_rejects_unknown_extension(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert run(["stats", "--config", cfg, "--out",
                str(tmp_path / "report.txt")]) == 2
    assert "use .csv or .png" in capsys.readouterr().err


def test_seed_demo_prints_accounts(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert run(["seed", "--fixture", "demo", "--config", cfg]) == 0
    assert "login secret" in capsys.readouterr().out


def test_env_override_redirects_data_dir(tmp_path, capsys, monkeypatch):
    cfg = write_config(tmp_path)  # data_dir under tmp_path/data
    other = tmp_path / "elsewhere"
    monkeypatch.setenv("AGRO_DATA_DIR", str(other))
    assert run(["seed", "--fixture", "downloads", "--config", cfg]) == 0
    assert other.is_dir()
    assert not (tmp_path / "data").exists()


def test_harvest_retrain_with_nothing_to_harvest(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc = run(["harvest-retrain", "--model-in", "unused.bin",
              "--model-out", "unused2.bin", "--config", cfg])
    assert rc == 0
    assert "model unchanged" in capsys.readouterr().out


# --- serve ----------------------------------------------------------------------------

def test_serve_boots_answers_health_and_stops_on_interrupt(tmp_path):
    cfg = write_config(tmp_path)
    proc = subprocess.Popen(
        [sys.executable, "-u", "-m", "agroplat", "serve", "--config", cfg],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
        cwd=str(tmp_path))
    try:
        line = proc.stdout.readline()
        assert line.startswith("listening on http://")
        base = line.split()[-1]
        deadline = time.time() + 10
        status = None
        while time.time() < deadline:
            try:
                status = requests.get(f"{base}/healthz", timeout=2).status_code
                break
            except requests.ConnectionError:
                time.sleep(0.05)
        assert status == 200
        proc.send_signal(signal.SIGINT)
        assert proc.wait(timeout=10) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()
