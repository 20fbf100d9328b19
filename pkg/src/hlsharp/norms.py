"""Operator norm of multilinear forms over products of l_p balls.

``||A|| = sup |A(z1, ..., zm)|`` with ``||z_k||_{p_k} <= 1``.  Two routes:

* :func:`estimate_norm` -- multistart block-coordinate ascent.  Every block
  is solved exactly by Hoelder duality, so the objective never decreases;
  the result is a certified lower bound (witnesses are returned).
* :func:`exact_norm` -- enumeration of the extreme points of l_inf / l_1
  slots, with the last slot closed by duality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from hlsharp.exponents import conjugate
from hlsharp.extended import Ext, ext, is_inf
from hlsharp.tensors import DimensionError, as_array

DEFAULT_BUDGET = 2**24
_CHUNK = 2**15


class InfeasibleError(ValueError):
    """The enumeration oracle cannot handle the requested ball."""


@dataclass
class NormEstimate:
    value: float
    witnesses: tuple
    restarts_used: int
    iterations: int
    converged: bool
    exact: bool
    history: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "witnesses": [w.tolist() for w in self.witnesses],
            "restarts_used": self.restarts_used,
            "iterations": self.iterations,
            "converged": self.converged,
            "exact": self.exact,
        }


def _ball(p: Sequence, m: int) -> list:
    p = [ext(v) for v in p]
    if len(p) != m:
        raise DimensionError(f"ball has {len(p)} slots, tensor has order {m}")
    for v in p:
        if v < 1:
            raise ValueError(f"ball exponent {v} not in [1, inf]")
    return p


def lp_norm(x: np.ndarray, p: Ext) -> float:
    a = np.abs(np.asarray(x, dtype=np.float64))
    if is_inf(p):
        return float(a.max(initial=0.0))
    scale = a.max(initial=0.0)
    if scale == 0:
        return 0.0
    pf = float(p)
    return float(scale * np.sum((a / scale) ** pf) ** (1.0 / pf))


def _dual_norm_rows(rows: np.ndarray, p: Ext) -> np.ndarray:
    """Row-wise ``||c||_{p*}``."""
    a = np.abs(rows)
    q = conjugate(p)
    if is_inf(q):
        return a.max(axis=-1)
    if q == 1:
        return a.sum(axis=-1)
    qf = float(q)
    scale = a.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return scale[..., 0] * np.sum((a / safe) ** qf, axis=-1) ** (1.0 / qf)


def evaluate_form(T, xs: Sequence[np.ndarray]) -> float:
    arr = as_array(T)
    if len(xs) != arr.ndim:
        raise DimensionError(f"{len(xs)} vectors for order {arr.ndim}")
    out = arr
    for x in reversed(xs):
        out = out @ np.asarray(x, dtype=np.float64)
    return float(out)


def contract_all_but(T, k: int, xs: Sequence[np.ndarray]) -> np.ndarray:
    """Coefficients of the linear functional left free at slot ``k`` (0-based).

    ``xs[k]`` is ignored.
    """
    arr = as_array(T)
    m = arr.ndim
    if len(xs) != m:
        raise DimensionError(f"{len(xs)} vectors for order {m}")
    for axis in range(m):
        if axis != k and np.shape(xs[axis]) != (arr.shape[axis],):
            raise DimensionError(f"slot {axis}: vector of shape {np.shape(xs[axis])}, need ({arr.shape[axis]},)")
    out = arr
    # contracting from the back keeps the indices of earlier axes valid
    for axis in reversed(range(m)):
        if axis != k:
            out = np.tensordot(out, np.asarray(xs[axis], dtype=np.float64), axes=([axis], [0]))
    return out


def dual_maximizer(c: np.ndarray, p) -> tuple:
    """``(||c||_{p*}, z)`` with ``||z||_p = 1`` and ``<c, z> = ||c||_{p*}``."""
    c = np.asarray(c, dtype=np.float64)
    p = ext(p)
    a = np.abs(c)
    n = c.shape[0]
    if not a.any():
        z = np.zeros(n)
        z[0] = 1.0
        return 0.0, z
    sign = np.where(c < 0, -1.0, 1.0)
    if is_inf(p):
        return float(a.sum()), sign
    if p == 1:
        j = int(np.argmax(a))
        z = np.zeros(n)
        z[j] = sign[j]
        return float(a[j]), z
    qf = float(conjugate(p))
    u = a / a.max()
    norm_u = float(np.sum(u**qf) ** (1.0 / qf))
    z = sign * u ** (qf - 1.0) / norm_u ** (qf - 1.0)
    return float(a.max() * norm_u), z


def alternating_ascent(T, ball: Sequence, init: Sequence[np.ndarray], tol: float = 1e-12, max_iter: int = 500) -> NormEstimate:
    arr = as_array(T)
    p = _ball(ball, arr.ndim)
    xs = [np.asarray(x, dtype=np.float64).copy() for x in init]
    value = abs(evaluate_form(arr, xs))
    history = [value]
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        for k in range(arr.ndim):
            _, xs[k] = dual_maximizer(contract_all_but(arr, k, xs), p[k])
        new = abs(evaluate_form(arr, xs))
        history.append(new)
        gain = new - value
        value = max(value, new)
        if gain <= tol * max(new, np.finfo(float).tiny):
            converged = True
            break
    return NormEstimate(value, tuple(xs), 1, sweeps, converged, False, history)


def _unit_random(rng: np.random.Generator, n: int, p: Ext) -> np.ndarray:
    x = rng.standard_normal(n)
    norm = lp_norm(x, p)
    if norm == 0:
        x = np.ones(n)
        norm = lp_norm(x, p)
    return x / norm


def _seed_words(seed) -> list:
    if isinstance(seed, (tuple, list)):
        return [int(s) for s in seed]
    return [int(seed)]


def estimate_norm(T, ball: Sequence, restarts: int = 50, seed=0, tol: float = 1e-12, max_iter: int = 500) -> NormEstimate:
    """Best ascent over the all-ones start and ``restarts`` random starts.

    Start ``i`` (``i >= 1``) draws from ``SeedSequence([*seed, i])``; ties go
    to the lowest start index, so the result does not depend on the order
    starts are evaluated in.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    arr = as_array(T)
    p = _ball(ball, arr.ndim)
    base = _seed_words(seed)
    best = None
    total_iter = 0
    for i in range(restarts + 1):
        if i == 0:
            init = [np.ones(n) / lp_norm(np.ones(n), pk) for n, pk in zip(arr.shape, p)]
        else:
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(base + [i])))
            init = [_unit_random(rng, n, pk) for n, pk in zip(arr.shape, p)]
        est = alternating_ascent(arr, p, init, tol, max_iter)
        total_iter += est.iterations
        if best is None or est.value > best.value:
            best = est
    best.restarts_used = restarts + 1
    best.iterations = total_iter
    return best


def enumeration_size(dims: Sequence[int], ball: Sequence) -> int:
    size = 1
    for n, p in zip(dims[:-1], ball[:-1]):
        size *= 2**n if is_inf(p) else 2 * n
    return size


def _extreme_points(n: int, p: Ext, start: int = 0, stop=None) -> np.ndarray:
    """Extreme points of the unit ball up to a global sign, as rows.

    l_inf: sign vectors with first entry +1 (rows ``start:stop`` of the
    ``2**(n-1)`` of them); l_1: the basis vectors.
    """
    if is_inf(p):
        stop = 2 ** (n - 1) if stop is None else stop
        codes = np.arange(start, stop, dtype=np.uint64)
        shifts = np.arange(n - 1, dtype=np.uint64)
        bits = (codes[:, None] >> shifts[None, :]) & np.uint64(1)
        signs = 1.0 - 2.0 * bits.astype(np.float64)
        return np.hstack([np.ones((len(codes), 1)), signs])
    eye = np.eye(n)
    return eye[start:stop]


def exact_norm(T, ball: Sequence, budget: int = DEFAULT_BUDGET) -> NormEstimate:
    """Exact norm when every slot but the last has p in {1, inf}.

    Since ``|A|`` is invariant under flipping the sign of any single
    argument, each enumerated slot only visits extreme points up to sign.
    """
    arr = as_array(T)
    m = arr.ndim
    p = _ball(ball, m)
    for k, v in enumerate(p[:-1]):
        if not (is_inf(v) or v == 1):
            raise InfeasibleError(f"slot {k + 1} has p = {v}; oracle needs p in {{1, inf}} on all but the last slot")
    size = enumeration_size(arr.shape, p)
    if size > budget:
        raise InfeasibleError(f"enumeration size {size} exceeds budget {budget} (dims {arr.shape})")

    if m == 1:
        value, z = dual_maximizer(arr, p[0])
        return NormEstimate(value, (z,), 1, 1, True, True)

    best_value = -1.0
    best = None
    count = 0
    prefix_sets = [_extreme_points(n, pk) for n, pk in zip(arr.shape[: m - 2], p[: m - 2])]
    n_enum, p_enum = arr.shape[m - 2], p[m - 2]
    n_points = 2 ** (n_enum - 1) if is_inf(p_enum) else n_enum
    for prefix in itertools.product(*prefix_sets):
        M = arr
        for x in prefix:
            M = np.tensordot(x, M, axes=([0], [0]))
        for start in range(0, n_points, _CHUNK):
            X = _extreme_points(n_enum, p_enum, start, min(start + _CHUNK, n_points))
            vals = _dual_norm_rows(X @ M, p[-1])
            count += len(vals)
            j = int(np.argmax(vals))
            if vals[j] > best_value:
                best_value = float(vals[j])
                best = (prefix, X[j])
    prefix, x_last = best
    c = contract_all_but(arr, m - 1, list(prefix) + [x_last, None])
    value, z = dual_maximizer(c, p[-1])
    witnesses = tuple(np.asarray(x, dtype=np.float64) for x in prefix) + (x_last, z)
    return NormEstimate(value, witnesses, 1, count, True, True)
