import json

import numpy as np
import pytest

from conftest import make_random_image
from fuzzymark import cli
from fuzzymark.image import load_pgm, save_pgm
from fuzzymark.watermark import Dictionary, WatermarkKey, payload_from_hex, random_payload


@pytest.fixture
def host_image(tmp_path):
    path = tmp_path / "host.pgm"
    save_pgm(make_random_image(400), path)
    return path


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_embed_extract_round_trip(tmp_path, host_image, capsys):
    out = tmp_path / "marked.pgm"
    code, stdout, _ = run(
        capsys, "embed", "--image", str(host_image), "--out-image", str(out),
        "--key-seed", "11", "--bits", "128", "--payload-seed", "5")
    assert code == cli.EXIT_OK
    doc = json.loads(stdout)
    assert float(doc["psnr"]) > 35
    assert (tmp_path / "marked.pgm.key.json").exists()
    strengths = (tmp_path / "marked.pgm.strengths.csv").read_text().splitlines()
    assert strengths[0] == "block_idx,block_x,block_y,strength,retries"
    assert len(strengths) == 129

    code, stdout, _ = run(
        capsys, "extract", "--image", str(out),
        "--key", str(tmp_path / "marked.pgm.key.json"))
    assert code == cli.EXIT_OK
    extracted = json.loads(stdout)
    assert extracted["payload"] == doc["payload"]
    assert extracted["bits"] == 128


def test_embed_missing_key_and_payload(tmp_path, host_image, capsys):
    out = tmp_path / "m.pgm"
    code, _, err = run(capsys, "embed", "--image", str(host_image),
                       "--out-image", str(out), "--payload-seed", "1")
    assert code == cli.EXIT_USAGE
    assert json.loads(err)["error"] == "usage"

    code, _, err = run(capsys, "embed", "--image", str(host_image),
                       "--out-image", str(out), "--key-seed", "1")
    assert code == cli.EXIT_USAGE


def test_embed_deterministic(tmp_path, host_image, capsys):
    a = tmp_path / "a.pgm"
    b = tmp_path / "b.pgm"
    for out in (a, b):
        code, _, _ = run(capsys, "embed", "--image", str(host_image),
                         "--out-image", str(out), "--key-seed", "3",
                         "--payload-seed", "7")
        assert code == cli.EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_detect_watermarked_and_clean(tmp_path, host_image, capsys):
    out = tmp_path / "marked.pgm"
    code, stdout, _ = run(capsys, "embed", "--image", str(host_image),
                          "--out-image", str(out), "--key-seed", "21",
                          "--payload-seed", "9")
    assert code == cli.EXIT_OK
    payload = payload_from_hex(json.loads(stdout)["payload"], 256)
    dict_path = tmp_path / "dict.jsonl"
    Dictionary.random(50, 256, seed=1, true_payload=payload).save_jsonl(dict_path)

    scores = tmp_path / "scores.csv"
    code, stdout, _ = run(
        capsys, "detect", "--image", str(out), "--key-seed", "21",
        "--dictionary", str(dict_path), "--scores-csv", str(scores))
    assert code == cli.EXIT_OK
    doc = json.loads(stdout)
    assert doc["detected"] is True and doc["best_id"] == "true"
    assert len(scores.read_text().splitlines()) == 51

    code, stdout, _ = run(
        capsys, "detect", "--image", str(host_image), "--key-seed", "21",
        "--dictionary", str(dict_path))
    assert code == cli.EXIT_FAIL
    assert json.loads(stdout)["detected"] is False


def test_attack_fan_out(tmp_path, host_image, capsys):
    out_dir = tmp_path / "attacked"
    code, stdout, _ = run(
        capsys, "attack", "--image", str(host_image), "--out-dir", str(out_dir),
        "--attacks", "jpeg:q=35,unsharp:k=5,s=1.0,a=0.5")
    assert code == cli.EXIT_OK
    written = json.loads(stdout)["written"]
    assert len(written) == 2
    assert (out_dir / "jpeg_q=35.pgm").exists()
    assert (out_dir / "unsharp_k=5,s=1,a=0.5.pgm").exists()
    attacked = load_pgm(out_dir / "jpeg_q=35.pgm")
    assert attacked.pixels.shape == (256, 256)


def test_attack_invalid_spec(tmp_path, host_image, capsys):
    code, _, err = run(capsys, "attack", "--image", str(host_image),
                       "--out-dir", str(tmp_path / "x"), "--attacks", "wavelet:q=1")
    assert code == cli.EXIT_USAGE
    assert "wavelet" in json.loads(err)["message"]


def test_metrics_command(tmp_path, host_image, capsys):
    other = tmp_path / "other.pgm"
    save_pgm(make_random_image(401), other)
    csv = tmp_path / "m.csv"
    code, stdout, _ = run(capsys, "metrics", "--image-a", str(host_image),
                          "--image-b", str(other), "--csv", str(csv))
    assert code == cli.EXIT_OK
    doc = json.loads(stdout)
    assert doc["mse"] > 0
    assert csv.read_text().splitlines()[0] == "image_a,image_b,mse,psnr,wmse,wpsnr"

    code, stdout, _ = run(capsys, "metrics", "--image-a", str(host_image),
                          "--image-b", str(host_image))
    assert json.loads(stdout)["psnr"] == "inf"


def test_features_command(tmp_path, host_image, capsys):
    code, stdout, _ = run(capsys, "features", "--image", str(host_image))
    assert code == cli.EXIT_OK
    lines = stdout.splitlines()
    assert lines[0].startswith("block_x,block_y,asm")
    assert len(lines) == 1 + 32 * 32


def test_fis_dump_round_trips(tmp_path, host_image, capsys):
    code, stdout, _ = run(capsys, "fis-dump")
    assert code == cli.EXIT_OK
    fis_path = tmp_path / "fis.json"
    fis_path.write_text(stdout)
    out = tmp_path / "marked.pgm"
    code, _, _ = run(capsys, "embed", "--image", str(host_image),
                     "--out-image", str(out), "--key-seed", "2",
                     "--payload-seed", "2", "--fis", str(fis_path))
    assert code == cli.EXIT_OK


def test_config_file_defaults(tmp_path, host_image, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"key-seed": 13, "payload-seed": 4}))
    out = tmp_path / "marked.pgm"
    code, _, _ = run(capsys, "--config", str(cfg), "embed",
                     "--image", str(host_image), "--out-image", str(out))
    assert code == cli.EXIT_OK
    key = WatermarkKey.from_json((tmp_path / "marked.pgm.key.json").read_text())
    assert key.block_seed == 13


def test_bench_smoke(tmp_path, capsys):
    out_dir = tmp_path / "bench"
    code, stdout, _ = run(capsys, "bench", "--out-dir", str(out_dir),
                          "--bits", "64", "--dict-size", "20")
    assert code == cli.EXIT_OK
    assert json.loads(stdout)["rows"] == 4 * 18
    lines = (out_dir / "sweep.csv").read_text().splitlines()
    assert lines[0] == "image,attack,psnr,wpsnr,ber,best_score,detected"
    data = [ln.split(",") for ln in lines[1:] if not ln.startswith("MEAN")]
    assert len(data) == 72
    controls = [row for row in data if row[1] == "none"]
    assert len(controls) == 4
    for row in controls:
        assert float(row[4]) == 0.0  # zero BER without attack
        assert row[6] == "1"
    assert (out_dir / "dictionary.jsonl").exists()
    assert (out_dir / "corpus" / "texture.pgm").exists()
