"""Blind DCT-domain watermark: embed, extract and dictionary-correlation detect.

One payload bit is carried per selected 8x8 block by an order relation between
two mid-band DCT coefficients sharing the same quantizer value. The per-block
margin (embedding strength) comes from the fuzzy inference system, driven by
texture features of the original block, so extraction never needs the original
image: only the two keys.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field

import numpy as np

from . import dct
from .fuzzy import FisConfig, default_fis, strength_for_block
from .glcm import DEFAULT_LEVELS, block_features
from .image import BlockGrid, Image, get_block, partition_blocks, set_block

DEFAULT_PAIR = ((3, 2), (4, 1))  # both carry 22 in the standard luminance table
DEFAULT_THRESHOLD = 0.4
MAX_RETRIES = 4
RETRY_GAIN = 1.25


class WatermarkError(Exception):
    pass


class VerificationFailed(WatermarkError):
    """A payload bit could not survive pixel rounding even after retries."""

    def __init__(self, block_idx: int):
        super().__init__(f"bit verification failed at block {block_idx}")
        self.block_idx = block_idx


def _in_mid_band(pos) -> bool:
    u, v = pos
    return 2 <= u + v <= 6 and (u, v) != (0, 0)


@dataclass(frozen=True)
class WatermarkKey:
    """key1 = coefficient pair positions, key2 = block-selection seed."""

    pair_positions: tuple[tuple[int, int], tuple[int, int]] = DEFAULT_PAIR
    block_seed: int = 0
    payload_len: int = 256

    def __post_init__(self):
        p1, p2 = self.pair_positions
        if p1 == p2:
            raise WatermarkError("coefficient pair positions must be distinct")
        for p in (p1, p2):
            if not _in_mid_band(p):
                raise WatermarkError(f"position {p} outside the mid-band 2 <= u+v <= 6")
        if self.payload_len <= 0:
            raise WatermarkError("payload length must be positive")

    def validate_qtable(self, qtable=None):
        qt = dct.JPEG_LUMINANCE_QTABLE if qtable is None else qtable
        (u1, v1), (u2, v2) = self.pair_positions
        if qt[u1][v1] != qt[u2][v2]:
            raise WatermarkError(
                f"pair positions {self.pair_positions} have unequal quantizers "
                f"({qt[u1][v1]} vs {qt[u2][v2]})"
            )

    def to_json(self) -> str:
        return json.dumps({
            "pair": [list(p) for p in self.pair_positions],
            "seed": f"{self.block_seed & 0xFFFFFFFFFFFFFFFF:016x}",
            "bits": self.payload_len,
        })

    @classmethod
    def from_json(cls, text: str) -> "WatermarkKey":
        d = json.loads(text)
        return cls(
            pair_positions=tuple(tuple(p) for p in d["pair"]),
            block_seed=int(d["seed"], 16),
            payload_len=int(d["bits"]),
        )


def random_payload(n_bits: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 2, n_bits).astype(np.uint8)


def payload_to_hex(bits: np.ndarray) -> str:
    return bytes(np.packbits(bits)).hex()


def payload_from_hex(text: str, n_bits: int) -> np.ndarray:
    raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
    bits = np.unpackbits(raw)
    if len(bits) < n_bits:
        raise WatermarkError(f"hex payload has only {len(bits)} bits, need {n_bits}")
    return bits[:n_bits].astype(np.uint8)


@dataclass
class Dictionary:
    """Candidate payloads for correlation detection; all the same length."""

    entries: list[tuple[str, np.ndarray]]

    def __post_init__(self):
        if self.entries:
            n = len(self.entries[0][1])
            if any(len(bits) != n for _, bits in self.entries):
                raise WatermarkError("dictionary payloads must share one length")
            if len({eid for eid, _ in self.entries}) != len(self.entries):
                raise WatermarkError("dictionary ids must be unique")

    @property
    def payload_len(self) -> int:
        return len(self.entries[0][1]) if self.entries else 0

    @classmethod
    def random(cls, n_entries: int, n_bits: int, seed: int,
               true_payload: np.ndarray | None = None,
               true_id: str = "true") -> "Dictionary":
        rng = np.random.default_rng(seed)
        entries = [(f"wm{i:04d}", rng.integers(0, 2, n_bits).astype(np.uint8))
                   for i in range(n_entries)]
        if true_payload is not None:
            # replace one decoy so the total stays n_entries
            entries[0] = (true_id, np.asarray(true_payload, dtype=np.uint8))
        return cls(entries)

    def save_jsonl(self, path):
        with open(path, "w") as f:
            for eid, bits in self.entries:
                packed = base64.b64encode(bytes(np.packbits(bits))).decode("ascii")
                f.write(json.dumps({"id": eid, "n": len(bits), "bits": packed}) + "\n")

    @classmethod
    def load_jsonl(cls, path) -> "Dictionary":
        entries = []
        with open(path) as f:
            for line in f:
                if not line.strip():
                    continue
                d = json.loads(line)
                raw = np.frombuffer(base64.b64decode(d["bits"]), dtype=np.uint8)
                entries.append((d["id"], np.unpackbits(raw)[: d["n"]].astype(np.uint8)))
        return cls(entries)


@dataclass
class BlockStrength:
    block_idx: int
    strength: float
    retries: int


@dataclass
class DetectionReport:
    extracted: np.ndarray
    ids: list[str]
    scores: np.ndarray  # normalized correlations in [-1, 1]
    best_id: str
    best_score: float
    threshold: float
    detected: bool

    def to_json(self) -> str:
        return json.dumps({
            "extracted": payload_to_hex(self.extracted),
            "bits": int(len(self.extracted)),
            "best_id": self.best_id,
            "best_score": self.best_score,
            "threshold": self.threshold,
            "detected": self.detected,
        }, indent=2)

    def scores_csv(self) -> str:
        lines = ["id,score"]
        lines += [f"{eid},{s:.6f}" for eid, s in zip(self.ids, self.scores)]
        return "\n".join(lines) + "\n"


def select_blocks(grid: BlockGrid, key: WatermarkKey) -> np.ndarray:
    """Key-seeded sample of payload_len distinct block indices, image-independent."""
    if key.payload_len > grid.total:
        raise WatermarkError(
            f"payload of {key.payload_len} bits exceeds {grid.total} blocks"
        )
    rng = np.random.default_rng(key.block_seed)
    return rng.choice(grid.total, size=key.payload_len, replace=False)


def embed_bit(coeffs: np.ndarray, bit: int, positions, strength: float) -> np.ndarray:
    """Force the coefficient-pair difference to +/-strength around their mean."""
    p1, p2 = positions
    out = coeffs.copy()
    m = 0.5 * (coeffs[p1] + coeffs[p2])
    half = 0.5 * strength
    if bit:
        out[p1], out[p2] = m + half, m - half
    else:
        out[p1], out[p2] = m - half, m + half
    return out


def _read_bit(coeffs: np.ndarray, positions) -> int:
    p1, p2 = positions
    return 1 if coeffs[p1] > coeffs[p2] else 0


def embed(img: Image, payload: np.ndarray, key: WatermarkKey,
          fis: FisConfig | None = None,
          levels: int = DEFAULT_LEVELS) -> tuple[Image, list[BlockStrength]]:
    """Watermark `payload` into `img`; returns the marked image and strength report.

    Strength is chosen from the original (pre-embedding) block, and every bit is
    verified against the rounded pixel result; bits lost to rounding are
    re-embedded with increasing strength.
    """
    fis = fis or default_fis()
    key.validate_qtable()
    payload = np.asarray(payload, dtype=np.uint8)
    if len(payload) != key.payload_len:
        raise WatermarkError(f"payload has {len(payload)} bits, key expects {key.payload_len}")
    grid = partition_blocks(img)
    indices = select_blocks(grid, key)
    pos = key.pair_positions
    out = img.copy()
    report = []
    for bit, idx in zip(payload, indices):
        tile = get_block(img, grid, int(idx))
        feats = block_features(tile, levels)
        strength = strength_for_block(feats, fis.rule_base, fis.strength_range, levels)
        coeffs = dct.forward_dct(tile)
        for attempt in range(MAX_RETRIES + 1):
            marked = embed_bit(coeffs, int(bit), pos, strength)
            new_tile = dct.inverse_dct(marked)
            if _read_bit(dct.forward_dct(new_tile), pos) == int(bit):
                break
            strength *= RETRY_GAIN
        else:
            raise VerificationFailed(int(idx))
        set_block(out, grid, int(idx), new_tile)
        report.append(BlockStrength(block_idx=int(idx), strength=strength, retries=attempt))
    return out, report


def extract(img: Image, key: WatermarkKey) -> np.ndarray:
    """Blind extraction: compare the key's coefficient pair in each selected block."""
    grid = partition_blocks(img)
    indices = select_blocks(grid, key)
    pos = key.pair_positions
    bits = np.empty(len(indices), dtype=np.uint8)
    for k, idx in enumerate(indices):
        coeffs = dct.forward_dct(get_block(img, grid, int(idx)))
        bits[k] = _read_bit(coeffs, pos)
    return bits


def correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized correlation of two bit vectors mapped onto {-1, +1}."""
    a = np.asarray(a, dtype=np.float64) * 2.0 - 1.0
    b = np.asarray(b, dtype=np.float64) * 2.0 - 1.0
    return float((a * b).mean())


def detect(img: Image, key: WatermarkKey, dictionary: Dictionary,
           threshold: float = DEFAULT_THRESHOLD) -> DetectionReport:
    """Extract and score against every dictionary entry; verdict = best >= threshold."""
    if not dictionary.entries:
        raise WatermarkError("empty dictionary")
    if dictionary.payload_len != key.payload_len:
        raise WatermarkError(
            f"dictionary bits ({dictionary.payload_len}) != key bits ({key.payload_len})"
        )
    extracted = extract(img, key)
    ids = [eid for eid, _ in dictionary.entries]
    scores = np.array([correlation(extracted, bits) for _, bits in dictionary.entries])
    best = int(np.argmax(scores))
    return DetectionReport(
        extracted=extracted,
        ids=ids,
        scores=scores,
        best_id=ids[best],
        best_score=float(scores[best]),
        threshold=threshold,
        detected=bool(scores[best] >= threshold),
    )
