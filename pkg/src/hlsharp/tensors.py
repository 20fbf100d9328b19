"""Dense coefficient tensors of multilinear forms.

A tensor ``T`` of shape ``(n_1, ..., n_m)`` stores ``A(e_{j_1}, ..., e_{j_m})``
in row-major order; axis 0 is the outermost level of a mixed norm.

Random sign tensors come from numpy's PCG64 bit generator seeded through
``numpy.random.SeedSequence(seed)``.  Signs are read directly off the raw
64-bit output stream (``PCG64.random_raw``): word ``i`` supplies entries
``64 i .. 64 i + 63``, least significant bit first, bit 1 meaning ``-1``.
Only the bit generator stream is used, which numpy keeps stable across
releases, so the tensors are byte-reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from hlsharp.extended import Ext, ext, is_inf

KSZ_GENERATOR = "numpy.PCG64/SeedSequence/random_raw-lsb-bits"


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoefficientTensor:
    entries: np.ndarray
    seed: Optional[object] = None

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.float64, copy=True)
        if arr.ndim < 1 or 0 in arr.shape:
            raise DimensionError(f"need at least one nonempty axis, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def m(self) -> int:
        return self.entries.ndim

    @property
    def dims(self) -> tuple:
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def scaled(self, c: float) -> "CoefficientTensor":
        return CoefficientTensor(self.entries * c, self.seed)

    def to_json(self) -> dict:
        out = {"m": self.m, "dims": list(self.dims)}
        if self.seed is not None:
            out["seed"] = list(self.seed) if isinstance(self.seed, tuple) else self.seed
        out["entries"] = self.entries.ravel().tolist()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CoefficientTensor":
        dims = tuple(int(d) for d in obj["dims"])
        if len(dims) != obj["m"]:
            raise DimensionError(f"header m = {obj['m']} but {len(dims)} dims")
        flat = np.asarray(obj["entries"], dtype=np.float64)
        if flat.size != math.prod(dims):
            raise DimensionError(f"{flat.size} entries for dims {dims}")
        seed = obj.get("seed")
        if isinstance(seed, list):
            seed = tuple(seed)
        return cls(flat.reshape(dims), seed)


def as_array(T) -> np.ndarray:
    if isinstance(T, CoefficientTensor):
        return T.entries
    return np.asarray(T, dtype=np.float64)


def save_tensor(T: CoefficientTensor, path) -> None:
    Path(path).write_text(json.dumps(T.to_json()))


def load_tensor(path) -> CoefficientTensor:
    return CoefficientTensor.from_json(json.loads(Path(path).read_text()))


def slice_csv(T, fixed: Sequence[int] = ()) -> str:
    """CSV of the 2-way slice obtained by fixing the leading ``m - 2`` indices."""
    arr = as_array(T)
    if arr.ndim < 2 or len(fixed) != arr.ndim - 2:
        raise DimensionError(f"need {arr.ndim - 2} fixed indices for a 2-way slice")
    sub = arr[tuple(fixed)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in sub:
        writer.writerow(repr(float(v)) for v in row)
    return buf.getvalue()


def _lp_last_axis(a: np.ndarray, t: Ext) -> np.ndarray:
    """l_t norm along the last axis of a nonnegative array."""
    if is_inf(t):
        return a.max(axis=-1)
    scale = a.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    tf = float(t)
    powers = np.sort((a / safe) ** tf, axis=-1)
    return scale[..., 0] * powers.sum(axis=-1) ** (1.0 / tf)


def mixed_norm(T, t: Sequence) -> float:
    """Nested norm ``l_{t_1}(l_{t_2}(... l_{t_m}))``, innermost index first.

    Each level is rescaled by its maximum before powering, so large
    exponents do not overflow; the powered terms are summed in ascending
    order.
    """
    arr = np.abs(as_array(T))
    t = [ext(v) for v in t]
    if len(t) != arr.ndim:
        raise DimensionError(f"{len(t)} exponents for a tensor of order {arr.ndim}")
    for v in t:
        if not v > 0:
            raise ValueError(f"mixed norm exponent must be positive, got {v}")
    for level in reversed(t):
        arr = _lp_last_axis(arr, level)
    return float(arr)


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, (tuple, list)):
        return np.random.SeedSequence([int(s) for s in seed])
    return np.random.SeedSequence(int(seed))


def ksz_sample(m: int, n: int, seed=0) -> CoefficientTensor:
    """Random sign tensor of shape ``(n,) * m``; see module docstring."""
    if m < 1 or n < 1:
        raise ValueError(f"need m >= 1 and n >= 1, got m = {m}, n = {n}")
    size = n**m
    bitgen = np.random.PCG64(_seed_sequence(seed))
    words = bitgen.random_raw((size + 63) // 64)
    raw = np.asarray(words, dtype="<u8").view(np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[:size]
    signs = 1.0 - 2.0 * bits.astype(np.float64)
    key = tuple(seed) if isinstance(seed, (tuple, list)) else seed
    return CoefficientTensor(signs.reshape((n,) * m), key)


def ksz_bound(m: int, n: int, p: Sequence) -> tuple:
    """Exponent of ``n`` in the random sign norm bound, and ``n`` raised to it.

    The dimension-free factor in front is not computed.
    """
    p = [ext(v) for v in p]
    if len(p) != m:
        raise DimensionError(f"{len(p)} exponents for m = {m}")
    if any(v < 2 for v in p):
        raise ValueError("bound stated for p_k in [2, inf] only")
    half = Fraction(1, 2)
    exponent = half + sum((half - (0 if is_inf(v) else 1 / v) for v in p), Fraction(0))
    return exponent, float(n) ** float(exponent)


def lift_form(T, k: int, n: int) -> CoefficientTensor:
    """Embed an order ``m - k`` tensor as an order ``m`` one.

    The new leading ``k`` axes have length ``n``; the input sits at leading
    index ``(0, ..., 0)`` and everything else is zero.
    """
    if k < 1 or n < 1:
        raise ValueError(f"need k >= 1 and n >= 1, got k = {k}, n = {n}")
    arr = as_array(T)
    out = np.zeros((n,) * k + arr.shape)
    out[(0,) * k] = arr
    seed = T.seed if isinstance(T, CoefficientTensor) else None
    return CoefficientTensor(out, seed)
