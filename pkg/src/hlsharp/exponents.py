"""Exact exponent calculus for Hardy--Littlewood inequalities.

All quantities are exact: exponents are :mod:`hlsharp.extended` scalars and
every tail sum ``1/p_k + ... + 1/p_m`` is a :class:`~fractions.Fraction`.
Indices in the public API are 1-based to match the usual ``s_1, ..., s_m``
notation; tuples are stored 0-based internally.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from hlsharp.extended import INF, Ext, ext, fmt, from_json, is_inf, recip, recip_sum, to_json

HALF = Fraction(1, 2)


class HLError(ValueError):
    """Base class for violated preconditions of exponent formulas."""


class DomainError(HLError):
    """An input lies outside the domain a formula is stated for."""


class ParameterError(DomainError):
    """Inconsistent summing parameters (r, q)."""


class WindowError(DomainError):
    """An exponent lies outside the admissible window of a criterion."""


class RegimeError(HLError):
    """The instance is in the wrong regime for the requested formula."""


class PreconditionError(HLError):
    pass


class NotApplicableError(HLError):
    """A necessary condition is requested where it is not known to hold."""


class Regime(enum.Enum):
    SUBCRITICAL = "Subcritical"
    INTERMEDIATE = "Intermediate"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"


class Verdict(str, enum.Enum):
    ADMISSIBLE = "Admissible"
    NON_ADMISSIBLE = "NonAdmissible"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class HLInstance:
    """Degree ``m`` (= ``len(p)``), space exponents and optional (r, q)."""

    p: tuple
    r: Optional[Ext] = None
    q: Optional[Ext] = None

    def __post_init__(self):
        p = tuple(ext(v) for v in self.p)
        if len(p) < 2:
            raise ParameterError(f"degree m must be at least 2, got {len(p)}")
        for k, v in enumerate(p, 1):
            if v < 1:
                raise ParameterError(f"p_{k} = {fmt(v)} is not in [1, inf]")
        object.__setattr__(self, "p", p)
        r = None if self.r is None else ext(self.r)
        q = None if self.q is None else ext(self.q)
        if r is not None and r < 1:
            raise ParameterError(f"r = {fmt(r)} must be >= 1")
        if r is not None and q is not None and r > q:
            raise ParameterError(f"need 1 <= r <= q, got r = {fmt(r)}, q = {fmt(q)}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "q", q)

    @classmethod
    def isotropic(cls, m: int, p, r=None, q=None) -> "HLInstance":
        return cls((p,) * m, r, q)

    @property
    def m(self) -> int:
        return len(self.p)

    @property
    def total(self) -> Fraction:
        return recip_sum(self.p)

    def to_json(self) -> dict:
        out = {"m": self.m, "p": [to_json(v) for v in self.p]}
        if self.r is not None:
            out["r"] = to_json(self.r)
        if self.q is not None:
            out["q"] = to_json(self.q)
        return out


@dataclass(frozen=True)
class ExponentTuple:
    values: tuple
    source: str
    k0: Optional[int] = None

    def __post_init__(self):
        vals = tuple(v if isinstance(v, Fraction) or is_inf(v) else ext(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if self.k0 is not None and not 1 <= self.k0 <= len(vals):
            raise ValueError(f"k0 = {self.k0} outside 1..{len(vals)}")

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def to_json(self) -> dict:
        out = {"values": [to_json(v) for v in self.values], "source": self.source}
        if self.k0 is not None:
            out["k0"] = self.k0
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ExponentTuple":
        return cls(tuple(from_json(v) for v in obj["values"]), obj["source"], obj.get("k0"))

    def __str__(self):
        body = ", ".join(fmt(v) for v in self.values)
        tail = f", k0={self.k0}" if self.k0 is not None else ""
        return f"{self.source}({body}{tail})"


def _as_values(t) -> tuple:
    if isinstance(t, ExponentTuple):
        return t.values
    return tuple(ext(v) for v in t)


# --------------------------------------------------------------------------
# basic arithmetic


def conjugate(p) -> Ext:
    """Conjugate exponent: 1/p + 1/p* = 1."""
    p = ext(p)
    if p < 1:
        raise DomainError(f"conjugate needs p in [1, inf], got {fmt(p)}")
    return recip(1 - recip(p))


def recip_tail_sum(inst: HLInstance, k: int) -> Fraction:
    """``1/p_k + ... + 1/p_m`` for 1-based ``k``."""
    if not 1 <= k <= inst.m:
        raise IndexError(f"k = {k} outside 1..{inst.m}")
    return recip_sum(inst.p[k - 1 :])


def classify_regime(inst: HLInstance) -> frozenset:
    """Regimes containing the instance.

    Returns a set because the boundary ``sum 1/p = 1/2`` belongs to both the
    subcritical and the intermediate case.
    """
    total = inst.total
    if total < HALF:
        return frozenset({Regime.SUBCRITICAL})
    if total == HALF:
        return frozenset({Regime.SUBCRITICAL, Regime.INTERMEDIATE})
    if total < 1:
        return frozenset({Regime.INTERMEDIATE})
    if total == 1:
        return frozenset({Regime.CRITICAL})
    return frozenset({Regime.SUPERCRITICAL})


def k0(inst: HLInstance, threshold=HALF) -> int:
    """Largest ``t`` with tail sum ``1/p_t + ... + 1/p_m >= threshold``."""
    threshold = Fraction(threshold)
    for t in range(inst.m, 0, -1):
        if recip_tail_sum(inst, t) >= threshold:
            return t
    raise PreconditionError(
        f"no index has tail sum >= {fmt(threshold)} (total is {fmt(inst.total)})"
    )


def _intermediate(inst: HLInstance, who: str) -> Fraction:
    total = inst.total
    if not HALF <= total < 1:
        raise RegimeError(f"{who} needs 1/2 <= sum 1/p_k < 1, got {fmt(total)}")
    return total


# --------------------------------------------------------------------------
# subcritical case


def mu_praciano(inst: HLInstance) -> Fraction:
    total = inst.total
    if total > HALF:
        raise RegimeError(f"mu needs sum 1/p_k <= 1/2, got {fmt(total)}")
    return Fraction(2 * inst.m) / (inst.m + 1 - 2 * total)


def exponents_mu(inst: HLInstance) -> ExponentTuple:
    return ExponentTuple((mu_praciano(inst),) * inst.m, "mu")


def window_211(inst: HLInstance) -> tuple:
    """Open lower / closed upper end of the window for the (t_k) criterion."""
    total = inst.total
    if total > HALF:
        raise RegimeError(f"criterion needs sum 1/p_k <= 1/2, got {fmt(total)}")
    return recip(1 - total), Fraction(2)


def check_sufficient_211(t, inst: HLInstance) -> bool:
    """Anisotropic criterion for the subcritical case.

    Every ``t_k`` must lie in ``(lower, 2]`` with ``lower = [1 - sum 1/p]^{-1}``;
    the endpoint 2 is included.
    """
    values = _as_values(t)
    if len(values) != inst.m:
        raise DomainError(f"tuple length {len(values)} != m = {inst.m}")
    lower, upper = window_211(inst)
    for k, v in enumerate(values, 1):
        if not lower < v <= upper:
            raise WindowError(f"t_{k} = {fmt(v)} outside window ({fmt(lower)}, 2]")
    return recip_sum(values) <= Fraction(inst.m + 1, 2) - inst.total


# --------------------------------------------------------------------------
# intermediate case


def lambda_dimant(inst: HLInstance) -> Ext:
    total = _intermediate(inst, "lambda")
    return recip(1 - total)


def exponents_dimant(inst: HLInstance) -> ExponentTuple:
    return ExponentTuple((lambda_dimant(inst),) * inst.m, "dimant")


def exponents_main(inst: HLInstance) -> ExponentTuple:
    _intermediate(inst, "main theorem")
    cut = k0(inst, HALF)
    values = [recip(1 - recip_tail_sum(inst, k)) for k in range(1, cut + 1)]
    values += [Fraction(2)] * (inst.m - cut)
    return ExponentTuple(tuple(values), "main", cut)


def exponents_ar(inst: HLInstance) -> ExponentTuple:
    m = inst.m
    for k, v in enumerate(inst.p, 1):
        if not 1 < v <= 2 * m:
            raise DomainError(f"p_{k} = {fmt(v)} outside (1, 2m] = (1, {2 * m}]")
    _intermediate(inst, "AR exponents")
    values = tuple(
        recip(HALF + Fraction(m - k + 1, 2 * m) - recip_tail_sum(inst, k)) for k in range(1, m + 1)
    )
    return ExponentTuple(values, "ar")


def exponents_aron(inst: HLInstance) -> ExponentTuple:
    *head, last = inst.p
    for k, v in enumerate(head, 1):
        if not v > 1:
            raise DomainError(f"p_{k} = {fmt(v)} outside (1, inf]")
    if not 1 < last <= 2:
        raise DomainError(f"p_m = {fmt(last)} outside (1, 2]")
    _intermediate(inst, "Aron exponents")
    values = tuple(recip(1 - recip_tail_sum(inst, k)) for k in range(1, inst.m + 1))
    return ExponentTuple(values, "aron")


def exponents_ot(p1, p2) -> ExponentTuple:
    """Bilinear pair ``(lambda, p2*)``; the inequality holds with constant 1."""
    p1, p2 = ext(p1), ext(p2)
    if not p1 > 2:
        raise DomainError(f"p_1 = {fmt(p1)} outside (2, inf]")
    if not 1 < p2 <= 2:
        raise DomainError(f"p_2 = {fmt(p2)} outside (1, 2]")
    inst = HLInstance((p1, p2))
    total = _intermediate(inst, "bilinear exponents")
    return ExponentTuple((recip(1 - total), conjugate(p2)), "ot", 2)


class PowerOfTwo(NamedTuple):
    """The real number ``2**exponent`` kept symbolically."""

    exponent: Fraction

    def exact(self) -> Optional[Fraction]:
        if self.exponent.denominator == 1:
            return Fraction(2) ** int(self.exponent)
        return None

    def __float__(self):
        return math.pow(2.0, float(self.exponent))

    def __str__(self):
        e = self.exact()
        return fmt(e) if e is not None else f"2^({fmt(self.exponent)})"


def constant_bound(inst: HLInstance) -> PowerOfTwo:
    _intermediate(inst, "constant bound")
    return PowerOfTwo(Fraction(inst.m - k0(inst, HALF), 2))


# --------------------------------------------------------------------------
# vector-valued and critical cases


def exponents_vector(inst: HLInstance) -> ExponentTuple:
    if inst.r is None or inst.q is None:
        raise ParameterError("vector-valued exponents need both r and q")
    inv_r, inv_q = recip(inst.r), recip(inst.q)
    threshold = inv_r - inv_q
    total = inst.total
    if not threshold <= total <= inv_r:
        raise RegimeError(
            f"need 1/r - 1/q <= sum 1/p_k <= 1/r, i.e. {fmt(threshold)} <= {fmt(total)} <= {fmt(inv_r)}"
        )
    if total == inv_r:
        tail2 = recip_tail_sum(inst, 2)
        if not threshold <= tail2 < inv_r:
            raise RegimeError(
                f"at sum 1/p_k = 1/r need 1/r - 1/q <= 1/p_2 + ... + 1/p_m < 1/r, got {fmt(tail2)}"
            )
    cut = k0(inst, threshold)
    values = [recip(inv_r - recip_tail_sum(inst, k)) for k in range(1, cut + 1)]
    values += [inst.q] * (inst.m - cut)
    return ExponentTuple(tuple(values), "vector", cut)


def lambda_vector(inst: HLInstance) -> Ext:
    """``lambda_r = [1/r - sum 1/p_k]^-1``."""
    if inst.r is None:
        raise ParameterError("lambda_r needs r")
    gap = recip(inst.r) - inst.total
    if gap <= 0:
        raise RegimeError(f"lambda_r needs sum 1/p_k < 1/r, got {fmt(inst.total)}")
    return recip(gap)


def exponents_vector_isotropic(inst: HLInstance) -> ExponentTuple:
    """All-``lambda_r`` tuple, stated for the case ``max(lambda_r, q) = lambda_r``."""
    if inst.q is None:
        raise ParameterError("isotropic vector exponents need q")
    lam = lambda_vector(inst)
    if lam < inst.q:
        raise RegimeError(f"needs lambda_r >= q, got lambda_r = {fmt(lam)} < q = {fmt(inst.q)}")
    return ExponentTuple((lam,) * inst.m, "vector_isotropic")


def exponents_critical(inst: HLInstance) -> ExponentTuple:
    if inst.total != 1:
        raise RegimeError(f"critical exponents need sum 1/p_k = 1, got {fmt(inst.total)}")
    tail2 = recip_tail_sum(inst, 2)
    if not HALF <= tail2 < 1:
        raise RegimeError(f"need 1/2 <= 1/p_2 + ... + 1/p_m < 1, got {fmt(tail2)}")
    cut = k0(inst, HALF)
    values = [INF] + [recip(1 - recip_tail_sum(inst, k)) for k in range(2, cut + 1)]
    values += [Fraction(2)] * (inst.m - cut)
    return ExponentTuple(tuple(values), "critical", cut)


def exponents_critical_iso(m: int) -> ExponentTuple:
    if m < 2:
        raise DomainError(f"m must be at least 2, got {m}")
    cut = (m + 2) // 2
    values = [INF] + [Fraction(m, k - 1) for k in range(2, cut + 1)]
    values += [Fraction(2)] * (m - cut)
    return ExponentTuple(tuple(values), "critical_iso", cut)


def exponents_paulino(m: int) -> ExponentTuple:
    if m < 2:
        raise DomainError(f"m must be at least 2, got {m}")
    values = [INF] + [Fraction(2 * m * (m - 1), m * k - 2 * k + 2) for k in range(2, m + 1)]
    return ExponentTuple(tuple(values), "paulino")


# --------------------------------------------------------------------------
# regularity principle


class Shift(NamedTuple):
    s: ExponentTuple
    valid: bool


def regularity_shift(r, p: Sequence, q: Sequence) -> Shift:
    """Solve the anisotropic regularity shift equations exactly.

    ``1/s_k - (1/q_k + ... + 1/q_m) = 1/r - (1/p_k + ... + 1/p_m)``.  The
    result is valid when ``1/r - sum 1/p + sum 1/q > 0`` and every
    ``s_k >= 1``.  Entries with a negative solved reciprocal are returned as
    the (negative) exact solution and flag the shift invalid.
    """
    r = ext(r)
    p = tuple(ext(v) for v in p)
    q = tuple(ext(v) for v in q)
    if len(p) != len(q):
        raise DomainError("p and q must have equal length")
    if r < 1:
        raise DomainError(f"r = {fmt(r)} must be >= 1")
    for k, (pk, qk) in enumerate(zip(p, q), 1):
        if qk < pk:
            raise DomainError(f"q_{k} = {fmt(qk)} < p_{k} = {fmt(pk)}")
    inv_r = recip(r)
    positivity = inv_r - recip_sum(p) + recip_sum(q)
    recips = [inv_r - recip_sum(p[k:]) + recip_sum(q[k:]) for k in range(len(p))]
    values = tuple(INF if x == 0 else 1 / x for x in recips)
    valid = positivity > 0 and all(0 <= x <= 1 for x in recips)
    return Shift(ExponentTuple(values, "regularity_shift"), valid)


def rp_alpha(p1, p2) -> Fraction:
    p1, p2 = ext(p1), ext(p2)
    if is_inf(p2) or not 1 <= p1 <= p2 < 2 * p1:
        raise DomainError(f"need 1 <= p1 <= p2 < 2 p1, got p1 = {fmt(p1)}, p2 = {fmt(p2)}")
    return p1 * p2 / (2 * p1 - p2)


def rp_delta(p1, eps) -> Fraction:
    p1, eps = ext(p1), ext(eps)
    if is_inf(p1) or not 0 < eps < p1:
        raise DomainError(f"need 0 < eps < p1, got p1 = {fmt(p1)}, eps = {fmt(eps)}")
    return 2 * eps * p1 / (p1 - eps)


# --------------------------------------------------------------------------
# necessary conditions and classification


def ksz_slack(t: Sequence, p: Sequence) -> Fraction:
    """``(m+1)/2 - sum 1/p_k - sum 1/t_k``; negative means violation."""
    t = _as_values(t)
    p = tuple(ext(v) for v in p)
    if len(t) != len(p):
        raise DomainError(f"tuple length {len(t)} != {len(p)}")
    return Fraction(len(p) + 1, 2) - recip_sum(p) - recip_sum(t)


def check_necessary_ksz(t, inst: HLInstance) -> bool:
    for k, v in enumerate(inst.p, 1):
        if v < 2:
            raise NotApplicableError(f"p_{k} = {fmt(v)} < 2; condition only holds for p_k >= 2")
    return ksz_slack(t, inst.p) >= 0


def ksz_violating_suffix(t, inst: HLInstance) -> Optional[int]:
    """First 1-based ``k`` whose suffix ``(t_k..t_m)`` violates the KSZ bound.

    Only suffixes whose spaces ``p_k..p_m`` are all >= 2 are checked.
    """
    values = _as_values(t)
    if len(values) != inst.m:
        raise DomainError(f"tuple length {len(values)} != m = {inst.m}")
    for k in range(1, inst.m + 1):
        ps = inst.p[k - 1 :]
        if all(v >= 2 for v in ps) and ksz_slack(values[k - 1 :], ps) < 0:
            return k
    return None


_SUFFICIENT = (
    exponents_main,
    exponents_aron,
    exponents_ar,
    exponents_mu,
    exponents_dimant,
    exponents_critical,
)


@functools.lru_cache(maxsize=256)
def proven_tuples(inst: HLInstance) -> tuple:
    """Theorem tuples whose preconditions hold for ``inst``."""
    found = []
    for op in _SUFFICIENT:
        try:
            found.append(op(inst))
        except HLError:
            pass
    return tuple(found)


def dominates(t: Sequence, s: Sequence) -> bool:
    return all(a >= b for a, b in zip(t, s))


def _dominates_211(values: tuple, inst: HLInstance) -> bool:
    # some t' <= t in the window satisfying the criterion exists iff the
    # clipped tuple min(t_k, 2) does
    try:
        lower, upper = window_211(inst)
    except RegimeError:
        return False
    if not all(v > lower for v in values):
        return False
    clipped = [min(v, upper) for v in values]
    return recip_sum(clipped) <= Fraction(inst.m + 1, 2) - inst.total


class Classification(NamedTuple):
    verdict: Verdict
    reason: str


def explain_tuple(t, inst: HLInstance) -> Classification:
    values = _as_values(t)
    if len(values) != inst.m:
        raise DomainError(f"tuple length {len(values)} != m = {inst.m}")
    k = ksz_violating_suffix(values, inst)
    for s in proven_tuples(inst):
        if dominates(values, s.values):
            if k is not None:
                raise AssertionError(f"{values} dominates {s} yet violates suffix {k}")
            return Classification(Verdict.ADMISSIBLE, f"dominates {s.source}")
    if _dominates_211(values, inst):
        if k is not None:
            raise AssertionError(f"{values} satisfies the subcritical criterion yet violates suffix {k}")
        return Classification(Verdict.ADMISSIBLE, "subcritical criterion")
    if k is not None:
        return Classification(Verdict.NON_ADMISSIBLE, f"ksz suffix k={k}")
    return Classification(Verdict.UNKNOWN, "no proven tuple dominated; no ksz violation")


def classify_tuple(t, inst: HLInstance) -> Verdict:
    return explain_tuple(t, inst).verdict


THEOREMS = {
    "mu": exponents_mu,
    "ot": lambda inst: _ot_from_instance(inst),
    "dimant": exponents_dimant,
    "ar": exponents_ar,
    "aron": exponents_aron,
    "main": exponents_main,
    "vector_isotropic": exponents_vector_isotropic,
    "vector": exponents_vector,
    "paulino": lambda inst: _iso_only(inst, exponents_paulino),
    "critical_iso": lambda inst: _iso_only(inst, exponents_critical_iso),
    "critical": exponents_critical,
}


def _ot_from_instance(inst: HLInstance) -> ExponentTuple:
    if inst.m != 2:
        raise DomainError(f"bilinear exponents need m = 2, got m = {inst.m}")
    return exponents_ot(*inst.p)


def _iso_only(inst: HLInstance, op) -> ExponentTuple:
    m = inst.m
    if any(v != m for v in inst.p):
        raise DomainError(f"needs p_1 = ... = p_m = m = {m}")
    return op(m)
