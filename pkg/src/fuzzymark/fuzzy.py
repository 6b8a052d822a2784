"""Mamdani fuzzy inference engine mapping block features to an embedding strength.

The pipeline is fuzzifier -> rule base -> centroid defuzzifier. Inputs are the
normalized block entropy, contrast and luminance, each described by three
triangular linguistic values (low / average / high) on [0, 1]; the output
variable uses the same three labels and is affinely mapped onto a configurable
strength range in DCT-coefficient units.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .glcm import GlcmFeatures, InvalidFeature

AGGREGATE_SAMPLES = 101
_LABELS = ("low", "average", "high")


@dataclass(frozen=True)
class TriangularMf:
    label: str
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.a <= self.b <= self.c:
            raise ValueError(f"mf {self.label}: need a <= b <= c")

    def membership(self, x: float) -> float:
        if x < self.a or x > self.c:
            return 0.0
        if x == self.b:
            return 1.0
        if x < self.b:
            return (x - self.a) / (self.b - self.a)
        return (self.c - x) / (self.c - self.b)

    def sample(self, xs: np.ndarray) -> np.ndarray:
        out = np.zeros_like(xs)
        if self.b > self.a:
            m = (xs >= self.a) & (xs < self.b)
            out[m] = (xs[m] - self.a) / (self.b - self.a)
        if self.c > self.b:
            m = (xs > self.b) & (xs <= self.c)
            out[m] = (self.c - xs[m]) / (self.c - self.b)
        out[xs == self.b] = 1.0
        return out


@dataclass(frozen=True)
class FuzzyVariable:
    name: str
    universe: tuple[float, float]
    mfs: tuple[TriangularMf, ...]

    def __post_init__(self):
        lo, hi = self.universe
        if not lo < hi:
            raise ValueError(f"variable {self.name}: empty universe")
        grid = np.linspace(lo, hi, 257)
        cover = np.zeros_like(grid)
        for mf in self.mfs:
            cover = np.maximum(cover, mf.sample(grid))
        if not (cover > 0).all():
            raise ValueError(f"variable {self.name}: membership functions do not cover the universe")

    def label_index(self, label: str) -> int:
        for k, mf in enumerate(self.mfs):
            if mf.label == label:
                return k
        raise KeyError(f"variable {self.name} has no linguistic value {label!r}")

    def fuzzify(self, x: float) -> np.ndarray:
        lo, hi = self.universe
        x = min(max(x, lo), hi)
        return np.array([mf.membership(x) for mf in self.mfs])


@dataclass(frozen=True)
class StrengthRange:
    s_min: float
    s_max: float

    def __post_init__(self):
        if not self.s_min < self.s_max:
            raise ValueError("need s_min < s_max")


@dataclass
class RuleBase:
    """Mamdani rule base: one rule per antecedent combination of the input variables."""

    inputs: list[FuzzyVariable]
    output: FuzzyVariable
    rules: list[tuple[tuple[str, ...], str]]  # (antecedent labels, consequent label)
    _ant_idx: np.ndarray = field(init=False, repr=False)
    _consequents: np.ndarray = field(init=False, repr=False)
    _xs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        combos = {tuple(r[0]) for r in self.rules}
        expected = len(self.rules)
        n_combos = int(np.prod([len(v.mfs) for v in self.inputs]))
        if len(combos) != expected or expected != n_combos:
            raise ValueError(
                f"rule base must have exactly one rule per antecedent combination "
                f"({n_combos} expected, {expected} given, {len(combos)} distinct)"
            )
        self._ant_idx = np.array(
            [[var.label_index(lbl) for var, lbl in zip(self.inputs, ant)]
             for ant, _ in self.rules]
        )
        lo, hi = self.output.universe
        self._xs = np.linspace(lo, hi, AGGREGATE_SAMPLES)
        self._consequents = np.stack(
            [self.output.mfs[self.output.label_index(cons)].sample(self._xs)
             for _, cons in self.rules]
        )

    @property
    def output_samples(self) -> np.ndarray:
        return self._xs

    def activations(self, values) -> np.ndarray:
        """Min-composed rule firing strengths for one crisp input vector."""
        mems = [var.fuzzify(x) for var, x in zip(self.inputs, values)]
        per_input = np.stack([mems[i][self._ant_idx[:, i]] for i in range(len(mems))])
        return per_input.min(axis=0)


def infer(rb: RuleBase, values) -> np.ndarray:
    """Aggregated output membership function, sampled over the output universe.

    Mamdani composition: each consequent is clipped at its rule activation and
    the clipped shapes are combined by pointwise maximum.
    """
    act = rb.activations(values)
    return np.max(np.minimum(act[:, None], rb._consequents), axis=0)


def defuzzify_centroid(aggregate: np.ndarray, rng: StrengthRange,
                       xs: np.ndarray | None = None) -> float:
    """Centroid of the sampled aggregate, affinely mapped onto [s_min, s_max].

    An all-zero aggregate falls back to the midpoint of the range.
    """
    if xs is None:
        xs = np.linspace(0.0, 1.0, len(aggregate))
    total = float(aggregate.sum())
    if total <= 0.0:
        return 0.5 * (rng.s_min + rng.s_max)
    u = float((xs * aggregate).sum()) / total
    t = (u - xs[0]) / (xs[-1] - xs[0])
    return rng.s_min + t * (rng.s_max - rng.s_min)


def normalize_features(f: GlcmFeatures, levels: int) -> tuple[float, float, float]:
    """FIS input vector: entropy / (2 ln G), contrast / (G-1)^2, luminance / 255."""
    vals = (
        f.entropy / (2.0 * math.log(levels)),
        f.contrast / float((levels - 1) ** 2),
        f.luminance / 255.0,
    )
    if not all(math.isfinite(v) for v in vals):
        raise InvalidFeature(f"non-finite feature vector {vals}")
    return tuple(min(max(v, 0.0), 1.0) for v in vals)


def strength_for_block(f: GlcmFeatures, rb: RuleBase, rng: StrengthRange,
                       levels: int = 8) -> float:
    values = normalize_features(f, levels)
    aggregate = infer(rb, values)
    return defuzzify_centroid(aggregate, rng, rb.output_samples)


def _unit_triangles() -> tuple[TriangularMf, ...]:
    return (
        TriangularMf("low", 0.0, 0.0, 0.5),
        TriangularMf("average", 0.0, 0.5, 1.0),
        TriangularMf("high", 0.5, 1.0, 1.0),
    )


_OUTPUT_LABELS = ("s0", "s1", "s2", "s3", "s4", "s5", "s6")


def _output_triangles() -> tuple[TriangularMf, ...]:
    mfs = []
    for k, label in enumerate(_OUTPUT_LABELS):
        peak = k / 6.0
        mfs.append(TriangularMf(label, max(0.0, peak - 1 / 6), peak, min(1.0, peak + 1 / 6)))
    return tuple(mfs)


def default_rule_base() -> RuleBase:
    """Three inputs (entropy, contrast, luminance) x three labels, 27 rules.

    The output variable carries seven linguistic values at peaks k/6 and each
    rule's consequent index is the sum of its antecedent indices: busier and
    brighter blocks mask more distortion, so they receive a stronger mark.
    The 7-level output keeps the centroid non-decreasing along every input
    axis, which a 3-level consequent table does not.
    """
    inputs = [
        FuzzyVariable("entropy", (0.0, 1.0), _unit_triangles()),
        FuzzyVariable("contrast", (0.0, 1.0), _unit_triangles()),
        FuzzyVariable("luminance", (0.0, 1.0), _unit_triangles()),
    ]
    output = FuzzyVariable("strength", (0.0, 1.0), _output_triangles())
    rules = []
    for combo in product(range(3), repeat=3):
        cons = sum(combo)
        rules.append((tuple(_LABELS[k] for k in combo), _OUTPUT_LABELS[cons]))
    return RuleBase(inputs=inputs, output=output, rules=rules)


DEFAULT_STRENGTH_RANGE = StrengthRange(14.0, 36.0)


@dataclass
class FisConfig:
    rule_base: RuleBase
    strength_range: StrengthRange


def default_fis() -> FisConfig:
    return FisConfig(default_rule_base(), DEFAULT_STRENGTH_RANGE)


def _variable_to_dict(v: FuzzyVariable) -> dict:
    return {
        "name": v.name,
        "universe": list(v.universe),
        "mfs": [{"label": m.label, "a": m.a, "b": m.b, "c": m.c} for m in v.mfs],
    }


def _variable_from_dict(d: dict) -> FuzzyVariable:
    return FuzzyVariable(
        name=d["name"],
        universe=tuple(d["universe"]),
        mfs=tuple(TriangularMf(m["label"], m["a"], m["b"], m["c"]) for m in d["mfs"]),
    )


def fis_to_json(cfg: FisConfig) -> str:
    """Serialize a FIS config; the last variable in the list is the output."""
    doc = {
        "variables": [_variable_to_dict(v) for v in cfg.rule_base.inputs]
        + [_variable_to_dict(cfg.rule_base.output)],
        "rules": [
            {"if": {v.name: lbl for v, lbl in zip(cfg.rule_base.inputs, ant)},
             "then": cons}
            for ant, cons in cfg.rule_base.rules
        ],
        "strength_range": [cfg.strength_range.s_min, cfg.strength_range.s_max],
    }
    return json.dumps(doc, indent=2)


def fis_from_json(text: str) -> FisConfig:
    doc = json.loads(text)
    variables = [_variable_from_dict(d) for d in doc["variables"]]
    inputs, output = variables[:-1], variables[-1]
    by_name = {v.name: v for v in inputs}
    rules = []
    for r in doc["rules"]:
        ant = tuple(r["if"][v.name] for v in inputs)
        for name in r["if"]:
            if name not in by_name:
                raise KeyError(f"rule references unknown variable {name!r}")
        rules.append((ant, r["then"]))
    rb = RuleBase(inputs=inputs, output=output, rules=rules)
    s_min, s_max = doc["strength_range"]
    return FisConfig(rb, StrengthRange(float(s_min), float(s_max)))


def load_fis(path) -> FisConfig:
    with open(path) as f:
        return fis_from_json(f.read())
