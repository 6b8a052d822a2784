"""Adaptive DCT-domain grayscale watermarking with fuzzy-logic strength control."""

from .image import (
    BlockGrid,
    Image,
    get_block,
    load_pgm,
    partition_blocks,
    save_pgm,
    set_block,
)
from .glcm import Glcm, GlcmFeatures, block_features, compute_glcm, features, glcm_symmetric_avg
from .fuzzy import (
    FisConfig,
    RuleBase,
    StrengthRange,
    default_fis,
    load_fis,
    strength_for_block,
)
from .metrics import QualityScores, mse, psnr, quality_scores, wmse, wpsnr
from .watermark import (
    DetectionReport,
    Dictionary,
    WatermarkKey,
    detect,
    embed,
    extract,
)
from .attacks import AttackSpec, apply_attack, parse_attack_spec

__all__ = [
    "AttackSpec", "BlockGrid", "DetectionReport", "Dictionary", "FisConfig",
    "Glcm", "GlcmFeatures", "Image", "QualityScores", "RuleBase",
    "StrengthRange", "WatermarkKey", "apply_attack", "block_features",
    "compute_glcm", "default_fis", "detect", "embed", "extract", "features",
    "get_block", "glcm_symmetric_avg", "load_fis", "load_pgm", "mse",
    "parse_attack_spec", "partition_blocks", "psnr", "quality_scores",
    "save_pgm", "set_block", "strength_for_block", "wmse", "wpsnr",
]

__version__ = "0.1.0"
