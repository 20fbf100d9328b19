"""Exact exponent calculus and numerical checks for Hardy-Littlewood inequalities."""

from hlsharp.exponents import (
    THEOREMS,
    ExponentTuple,
    HLError,
    HLInstance,
    Regime,
    Verdict,
    classify_regime,
    classify_tuple,
    constant_bound,
    exponents_main,
)
from hlsharp.extended import INF, ext
from hlsharp.norms import estimate_norm, exact_norm
from hlsharp.sharpness import GrowthExperiment, perturb_scan, ratio_curve, region_grid
from hlsharp.tensors import CoefficientTensor, ksz_sample, mixed_norm

__all__ = [
    "INF",
    "THEOREMS",
    "CoefficientTensor",
    "ExponentTuple",
    "GrowthExperiment",
    "HLError",
    "HLInstance",
    "Regime",
    "Verdict",
    "classify_regime",
    "classify_tuple",
    "constant_bound",
    "estimate_norm",
    "exact_norm",
    "exponents_main",
    "ext",
    "ksz_sample",
    "mixed_norm",
    "perturb_scan",
    "ratio_curve",
    "region_grid",
]
