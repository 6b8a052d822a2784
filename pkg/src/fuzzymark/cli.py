"""Command-line surface: embed, extract, detect, attack, metrics, features, bench.

Exit codes: 0 success (for `detect`: watermark found), 1 not detected or
operational failure, 2 usage error. Errors are emitted as one JSON object on
stderr so the tool composes in shell pipelines.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import attacks, corpus, metrics, watermark
from .fuzzy import default_fis, fis_to_json, load_fis
from .glcm import DEFAULT_LEVELS, block_features
from .image import Image, get_block, load_pgm, partition_blocks, save_pgm

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _fmt_db(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4f}"


def _load_key(args) -> watermark.WatermarkKey:
    if getattr(args, "key", None):
        return watermark.WatermarkKey.from_json(Path(args.key).read_text())
    if getattr(args, "key_seed", None) is not None:
        return watermark.WatermarkKey(block_seed=args.key_seed, payload_len=args.bits)
    raise UsageError("either --key or --key-seed is required")


def _load_fis(args):
    return load_fis(args.fis) if getattr(args, "fis", None) else default_fis()


def cmd_embed(args) -> int:
    img = load_pgm(args.image)
    key = _load_key(args)
    if args.payload_hex:
        payload = watermark.payload_from_hex(args.payload_hex, key.payload_len)
    elif args.payload_seed is not None:
        payload = watermark.random_payload(key.payload_len, args.payload_seed)
    else:
        raise UsageError("either --payload-hex or --payload-seed is required")
    fis = _load_fis(args)
    marked, report = watermark.embed(img, payload, key, fis)
    save_pgm(marked, args.out_image)
    out_key = args.out_key or str(args.out_image) + ".key.json"
    Path(out_key).write_text(key.to_json() + "\n")
    out_strengths = args.out_strengths or str(args.out_image) + ".strengths.csv"
    grid = partition_blocks(img)
    with open(out_strengths, "w") as f:
        f.write("block_idx,block_x,block_y,strength,retries\n")
        for b in report:
            x, y = grid.origin(b.block_idx)
            f.write(f"{b.block_idx},{x // 8},{y // 8},{b.strength:.4f},{b.retries}\n")
    print(json.dumps({
        "psnr": _fmt_db(metrics.psnr(img, marked)),
        "wpsnr": _fmt_db(metrics.wpsnr(img, marked)),
        "payload": watermark.payload_to_hex(payload),
        "out_image": str(args.out_image),
        "out_key": out_key,
        "out_strengths": out_strengths,
    }))
    return EXIT_OK


def cmd_extract(args) -> int:
    img = load_pgm(args.image)
    key = _load_key(args)
    bits = watermark.extract(img, key)
    print(json.dumps({"bits": int(len(bits)), "payload": watermark.payload_to_hex(bits)}))
    return EXIT_OK


def cmd_detect(args) -> int:
    img = load_pgm(args.image)
    key = _load_key(args)
    dictionary = watermark.Dictionary.load_jsonl(args.dictionary)
    report = watermark.detect(img, key, dictionary, args.threshold)
    if args.scores_csv:
        Path(args.scores_csv).write_text(report.scores_csv())
    print(report.to_json())
    return EXIT_OK if report.detected else EXIT_FAIL


def cmd_attack(args) -> int:
    img = load_pgm(args.image)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    specs = _split_attack_list(args.attacks, args.seed)
    for spec in specs:
        attacked = attacks.apply_attack(img, spec)
        path = out_dir / f"{spec.name().replace(':', '_')}.pgm"
        save_pgm(attacked, path)
        written.append(str(path))
    print(json.dumps({"written": written}))
    return EXIT_OK


def _split_attack_list(text: str, seed: int) -> list[attacks.AttackSpec]:
    """Split a comma-separated list of attack specs.

    Commas also separate parameters inside one spec, so a new spec starts at
    each segment containing a ':' (or being a bare kind tag).
    """
    specs = []
    current: list[str] = []
    for seg in text.split(","):
        if ":" in seg and current:
            specs.append(",".join(current))
            current = [seg]
        else:
            current.append(seg)
    if current:
        specs.append(",".join(current))
    return [attacks.parse_attack_spec(s, seed) for s in specs]


def cmd_metrics(args) -> int:
    a = load_pgm(args.image_a)
    b = load_pgm(args.image_b)
    q = metrics.quality_scores(a, b)
    print(json.dumps({
        "mse": q.mse, "psnr": _fmt_db(q.psnr),
        "wmse": q.wmse, "wpsnr": _fmt_db(q.wpsnr),
    }))
    if args.csv:
        new = not Path(args.csv).exists()
        with open(args.csv, "a") as f:
            if new:
                f.write("image_a,image_b,mse,psnr,wmse,wpsnr\n")
            f.write(f"{args.image_a},{args.image_b},{q.mse:.6f},{_fmt_db(q.psnr)},"
                    f"{q.wmse:.6e},{_fmt_db(q.wpsnr)}\n")
    return EXIT_OK


def cmd_features(args) -> int:
    img = load_pgm(args.image)
    grid = partition_blocks(img)
    out = sys.stdout
    out.write("block_x,block_y,asm,contrast,correlation,variance,entropy,luminance\n")
    for idx in range(grid.total):
        f = block_features(get_block(img, grid, idx), args.levels)
        x, y = grid.origin(idx)
        out.write(f"{x // 8},{y // 8},{f.asm:.6f},{f.contrast:.6f},{f.correlation:.6f},"
                  f"{f.variance:.6f},{f.entropy:.6f},{f.luminance:.4f}\n")
    return EXIT_OK


def cmd_fis_dump(args) -> int:
    print(fis_to_json(default_fis()))
    return EXIT_OK


def cmd_bench(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_paths = corpus.write_corpus(args.corpus_dir or out_dir / "corpus")
    fis = _load_fis(args)
    key = watermark.WatermarkKey(block_seed=args.seed, payload_len=args.bits)
    payload = watermark.random_payload(args.bits, args.seed + 1)
    dictionary = watermark.Dictionary.random(
        args.dict_size, args.bits, seed=args.seed + 2, true_payload=payload)
    dictionary.save_jsonl(out_dir / "dictionary.jsonl")

    specs = attacks.default_sweep(args.seed + 3)
    rows = []
    for name, path in corpus_paths.items():
        original = load_pgm(path)
        marked, _ = watermark.embed(original, payload, key, fis)
        save_pgm(marked, out_dir / f"{name}_watermarked.pgm")
        cells = [("none", marked)] + [
            (spec.name(), attacks.apply_attack(marked, spec)) for spec in specs
        ]
        for attack_name, attacked in cells:
            q = metrics.quality_scores(marked, attacked)
            report = watermark.detect(attacked, key, dictionary, args.threshold)
            ber = float((report.extracted != payload).mean())
            rows.append((name, attack_name, q.psnr, q.wpsnr, ber,
                         report.best_score, report.detected))

    csv_path = out_dir / "sweep.csv"
    with open(csv_path, "w") as f:
        f.write("image,attack,psnr,wpsnr,ber,best_score,detected\n")
        for name, attack_name, p, w, ber, score, det in rows:
            f.write(f"{name},{attack_name},{_fmt_db(p)},{_fmt_db(w)},"
                    f"{ber:.6f},{score:.6f},{int(det)}\n")
        by_attack: dict[str, list] = {}
        for name, attack_name, p, w, ber, score, det in rows:
            by_attack.setdefault(attack_name, []).append((p, w, ber, score))
        for attack_name, vals in by_attack.items():
            mp = np.mean([v[0] for v in vals])
            mw = np.mean([v[1] for v in vals])
            mb = np.mean([v[2] for v in vals])
            ms = np.mean([v[3] for v in vals])
            f.write(f"MEAN,{attack_name},{_fmt_db(mp)},{_fmt_db(mw)},{mb:.6f},{ms:.6f},\n")
    print(json.dumps({"sweep": str(csv_path), "rows": len(rows)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzymark",
                                     description="Adaptive DCT watermarking toolkit")
    parser.add_argument("--config", help="JSON file with default values for flags")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_key_flags(p):
        p.add_argument("--key", help="key JSON file")
        p.add_argument("--key-seed", type=int, help="build a key from this seed")
        p.add_argument("--bits", type=int, default=256, help="payload length in bits")

    p = sub.add_parser("embed", help="embed a payload into an image")
    p.add_argument("--image", required=True)
    p.add_argument("--out-image", required=True)
    add_key_flags(p)
    p.add_argument("--payload-hex")
    p.add_argument("--payload-seed", type=int)
    p.add_argument("--fis", help="FIS config JSON (membership functions / rules / range)")
    p.add_argument("--out-key")
    p.add_argument("--out-strengths")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="blind-extract the payload bits")
    p.add_argument("--image", required=True)
    add_key_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("detect", help="correlate the extraction against a dictionary")
    p.add_argument("--image", required=True)
    add_key_flags(p)
    p.add_argument("--dictionary", required=True, help="JSON-lines watermark dictionary")
    p.add_argument("--threshold", type=float, default=watermark.DEFAULT_THRESHOLD)
    p.add_argument("--scores-csv")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("attack", help="apply attack specs to an image")
    p.add_argument("--image", required=True)
    p.add_argument("--attacks", required=True,
                   help="comma-separated specs, e.g. 'jpeg:q=35,gauss:v=0.01'")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("metrics", help="PSNR/wPSNR between two images")
    p.add_argument("--image-a", required=True)
    p.add_argument("--image-b", required=True)
    p.add_argument("--csv", help="append a CSV row to this file")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("features", help="per-block texture features as CSV")
    p.add_argument("--image", required=True)
    p.add_argument("--levels", type=int, default=DEFAULT_LEVELS)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("fis-dump", help="print the built-in FIS config JSON")
    p.set_defaults(func=cmd_fis_dump)

    p = sub.add_parser("bench", help="embed + attack sweep + metrics over the corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--corpus-dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--dict-size", type=int, default=800)
    p.add_argument("--threshold", type=float, default=watermark.DEFAULT_THRESHOLD)
    p.add_argument("--fis")
    p.set_defaults(func=cmd_bench)

    return parser


def _merge_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config:
        defaults = json.loads(Path(args.config).read_text())
        unset = {k.replace("-", "_"): v for k, v in defaults.items()}
        for k, v in unset.items():
            if getattr(args, k, None) in (None, parser.get_default(k)):
                setattr(args, k, v)
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _merge_config(parser, sys.argv[1:] if argv is None else argv)
        return args.func(args)
    except UsageError as e:
        print(json.dumps({"error": "usage", "message": str(e)}), file=sys.stderr)
        return EXIT_USAGE
    except (attacks.AttackError, ValueError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
