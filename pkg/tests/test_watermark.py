import numpy as np
import pytest

from conftest import make_random_image
from fuzzymark.dct import forward_dct
from fuzzymark.image import BlockGrid, Image, partition_blocks
from fuzzymark.watermark import (
    Dictionary,
    VerificationFailed,
    WatermarkError,
    WatermarkKey,
    correlation,
    detect,
    embed,
    embed_bit,
    extract,
    payload_from_hex,
    payload_to_hex,
    random_payload,
    select_blocks,
)


def test_key_rejects_identical_positions():
    with pytest.raises(WatermarkError):
        WatermarkKey(pair_positions=((3, 2), (3, 2)))


def test_key_rejects_out_of_band():
    with pytest.raises(WatermarkError):
        WatermarkKey(pair_positions=((0, 0), (3, 2)))
    with pytest.raises(WatermarkError):
        WatermarkKey(pair_positions=((7, 7), (3, 2)))


def test_key_checks_equal_quantizer():
    key = WatermarkKey(pair_positions=((1, 2), (2, 3)))  # 14 vs 24 in the base table
    with pytest.raises(WatermarkError):
        key.validate_qtable()
    WatermarkKey().validate_qtable()  # default pair shares quantizer 22


def test_key_json_round_trip():
    key = WatermarkKey(block_seed=0xDEADBEEF, payload_len=128)
    assert WatermarkKey.from_json(key.to_json()) == key


def test_payload_hex_round_trip():
    bits = random_payload(256, 7)
    assert np.array_equal(payload_from_hex(payload_to_hex(bits), 256), bits)


def test_select_blocks_deterministic():
    grid = BlockGrid(32, 32)
    key = WatermarkKey(block_seed=99, payload_len=256)
    a = select_blocks(grid, key)
    b = select_blocks(grid, key)
    assert np.array_equal(a, b)
    assert len(np.unique(a)) == 256


def test_select_blocks_full_permutation():
    grid = BlockGrid(4, 4)
    key = WatermarkKey(block_seed=5, payload_len=16)
    sel = select_blocks(grid, key)
    assert sorted(sel.tolist()) == list(range(16))


def test_select_blocks_too_long():
    with pytest.raises(WatermarkError):
        select_blocks(BlockGrid(4, 4), WatermarkKey(block_seed=1, payload_len=17))


def test_select_blocks_seed_separation():
    grid = BlockGrid(32, 32)
    rng = np.random.default_rng(0)
    for _ in range(100):
        s1, s2 = rng.integers(0, 2**63, 2)
        if s1 == s2:
            continue
        a = set(select_blocks(grid, WatermarkKey(block_seed=int(s1), payload_len=256)).tolist())
        b = set(select_blocks(grid, WatermarkKey(block_seed=int(s2), payload_len=256)).tolist())
        jaccard = len(a & b) / len(a | b)
        assert jaccard < 0.5


def test_embed_bit_examples():
    pos = ((3, 2), (4, 1))
    coeffs = np.zeros((8, 8))
    coeffs[3, 2] = 10.0
    coeffs[4, 1] = 4.0
    one = embed_bit(coeffs, 1, pos, 8.0)
    assert one[3, 2] == pytest.approx(11.0)
    assert one[4, 1] == pytest.approx(3.0)
    zero = embed_bit(coeffs, 0, pos, 8.0)
    assert zero[3, 2] == pytest.approx(3.0)
    assert zero[4, 1] == pytest.approx(11.0)
    # pair mean preserved, difference exactly +/- strength
    for out, sign in ((one, 1), (zero, -1)):
        assert out[3, 2] + out[4, 1] == pytest.approx(14.0)
        assert out[3, 2] - out[4, 1] == pytest.approx(sign * 8.0)
    # everything else untouched
    mask = np.ones((8, 8), dtype=bool)
    mask[3, 2] = mask[4, 1] = False
    assert (one[mask] == 0).all()


def test_round_trip_no_attack():
    for seed in range(5):
        img = make_random_image(seed)
        key = WatermarkKey(block_seed=seed + 100, payload_len=256)
        payload = random_payload(256, seed)
        marked, report = embed(img, payload, key)
        assert np.array_equal(extract(marked, key), payload)
        assert len(report) == 256


def test_embed_locality():
    img = make_random_image(50)
    key = WatermarkKey(block_seed=1, payload_len=64)
    marked, _ = embed(img, random_payload(64, 2), key)
    grid = partition_blocks(img)
    selected = set(select_blocks(grid, key).tolist())
    diff = img.pixels != marked.pixels
    for idx in range(grid.total):
        x, y = grid.origin(idx)
        if diff[y : y + 8, x : x + 8].any():
            assert idx in selected


def test_single_bit_flip_changes_one_block():
    img = make_random_image(51)
    key = WatermarkKey(block_seed=3, payload_len=64)
    payload = random_payload(64, 4)
    flipped = payload.copy()
    flipped[10] ^= 1
    a, _ = embed(img, payload, key)
    b, _ = embed(img, flipped, key)
    diff = a.pixels != b.pixels
    grid = partition_blocks(img)
    changed = [idx for idx in range(grid.total)
               if diff[grid.origin(idx)[1] : grid.origin(idx)[1] + 8,
                       grid.origin(idx)[0] : grid.origin(idx)[0] + 8].any()]
    assert changed == [select_blocks(grid, key)[10]]


def test_wrong_key_uncorrelated():
    img = make_random_image(52)
    key = WatermarkKey(block_seed=1234, payload_len=256)
    payload = random_payload(256, 9)
    marked, _ = embed(img, payload, key)
    for s in range(50):
        wrong = WatermarkKey(block_seed=500_000 + s, payload_len=256)
        bits = extract(marked, wrong)
        assert abs(correlation(bits, payload)) < 0.25


def test_unwatermarked_extraction_uncorrelated():
    img = make_random_image(53)
    key = WatermarkKey(block_seed=7, payload_len=256)
    bits = extract(img, key)
    for s in range(20):
        assert abs(correlation(bits, random_payload(256, 10_000 + s))) < 0.3


def test_payload_length_mismatch():
    img = make_random_image(54)
    key = WatermarkKey(block_seed=1, payload_len=256)
    with pytest.raises(WatermarkError):
        embed(img, random_payload(128, 0), key)


def test_verification_failed_when_strength_rounds_away():
    # a sub-rounding strength cannot move any pixel, so a 1-bit can never be
    # read back from a flat block and the retry ladder must give up
    from fuzzymark.fuzzy import FisConfig, StrengthRange, default_rule_base

    fis = FisConfig(default_rule_base(), StrengthRange(1e-6, 2e-6))
    img = Image(np.full((64, 64), 128, dtype=np.uint8))
    key = WatermarkKey(block_seed=1, payload_len=8)
    with pytest.raises(VerificationFailed) as exc:
        embed(img, np.ones(8, dtype=np.uint8), key, fis)
    assert 0 <= exc.value.block_idx < 64


def test_detect_exact_and_complement():
    img = make_random_image(55)
    key = WatermarkKey(block_seed=77, payload_len=256)
    payload = random_payload(256, 11)
    marked, _ = embed(img, payload, key)
    entries = [("true", payload), ("anti", 1 - payload)]
    report = detect(marked, key, Dictionary(entries))
    assert report.best_id == "true"
    assert report.best_score == pytest.approx(1.0)
    assert report.scores[1] == pytest.approx(-1.0)
    assert report.detected


def test_detect_errors():
    img = make_random_image(56)
    key = WatermarkKey(block_seed=1, payload_len=256)
    with pytest.raises(WatermarkError):
        detect(img, key, Dictionary([]))
    with pytest.raises(WatermarkError):
        detect(img, key, Dictionary([("a", np.zeros(128, dtype=np.uint8))]))


def test_dictionary_jsonl_round_trip(tmp_path):
    d = Dictionary.random(20, 100, seed=3, true_payload=random_payload(100, 4))
    path = tmp_path / "dict.jsonl"
    d.save_jsonl(path)
    d2 = Dictionary.load_jsonl(path)
    assert len(d2.entries) == 20
    for (i1, b1), (i2, b2) in zip(d.entries, d2.entries):
        assert i1 == i2 and np.array_equal(b1, b2)


def test_dictionary_validation():
    with pytest.raises(WatermarkError):
        Dictionary([("a", np.zeros(8, dtype=np.uint8)), ("b", np.zeros(9, dtype=np.uint8))])
    with pytest.raises(WatermarkError):
        Dictionary([("a", np.zeros(8, dtype=np.uint8)), ("a", np.ones(8, dtype=np.uint8))])


def test_report_serialization():
    img = make_random_image(57)
    key = WatermarkKey(block_seed=8, payload_len=64)
    payload = random_payload(64, 12)
    marked, _ = embed(img, payload, key)
    report = detect(marked, key, Dictionary.random(10, 64, 5, true_payload=payload))
    csv = report.scores_csv()
    assert csv.splitlines()[0] == "id,score"
    assert len(csv.splitlines()) == 11
    import json

    doc = json.loads(report.to_json())
    assert doc["detected"] is True
    assert doc["best_id"] == "true"


def test_strength_report_uses_original_features():
    # strengths reported for the same image/key are identical across payloads
    img = make_random_image(58)
    key = WatermarkKey(block_seed=4, payload_len=64)
    _, r1 = embed(img, random_payload(64, 1), key)
    _, r2 = embed(img, random_payload(64, 2), key)
    no_retry = [(a.block_idx, a.strength) for a in r1 if a.retries == 0]
    other = {b.block_idx: b for b in r2}
    for idx, s in no_retry:
        if other[idx].retries == 0:
            assert other[idx].strength == s


def test_pair_mean_preserved_in_dct_domain():
    rng = np.random.default_rng(60)
    tile = rng.integers(0, 256, (8, 8))
    coeffs = forward_dct(tile)
    pos = ((3, 2), (4, 1))
    for bit in (0, 1):
        out = embed_bit(coeffs, bit, pos, 13.7)
        assert out[pos[0]] + out[pos[1]] == pytest.approx(coeffs[pos[0]] + coeffs[pos[1]])
