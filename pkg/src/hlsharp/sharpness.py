"""Growth experiments on random sign forms and exponent perturbation scans."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from hlsharp import exponents as ex
from hlsharp.exponents import ExponentTuple, HLInstance, Verdict
from hlsharp.extended import ext, fmt, is_inf, recip, recip_sum, to_json
from hlsharp.norms import DEFAULT_BUDGET, InfeasibleError, enumeration_size, estimate_norm, exact_norm
from hlsharp.tensors import ksz_sample, mixed_norm

MULTISTART_SLACK = 0.02
GROWTH_THRESHOLD = 0.05


class Growth(str, enum.Enum):
    BOUNDED = "Bounded"
    GROWING = "Growing"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class GrowthExperiment:
    """Ratios ``mixed_norm(T, t) / ||T||_p`` over random sign tensors.

    ``norm_method`` is ``"oracle"`` (exact enumeration, error if
    infeasible), ``"multistart"`` or ``"auto"`` (oracle where it fits the
    budget, multistart otherwise).
    """

    m: int
    p: tuple
    t: tuple
    n_list: tuple
    trials: int = 20
    seed: int = 0
    norm_method: str = "auto"
    restarts: int = 50
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(ext(v) for v in self.p))
        object.__setattr__(self, "t", tuple(ext(v) for v in self.t))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if len(self.p) != self.m or len(self.t) != self.m:
            raise ValueError(f"p and t must have length m = {self.m}")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ValueError("n_list must be nonempty and positive")
        if any(a >= b for a, b in zip(self.n_list, self.n_list[1:])):
            raise ValueError(f"n_list must be strictly increasing, got {self.n_list}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.norm_method not in ("oracle", "multistart", "auto"):
            raise ValueError(f"unknown norm method {self.norm_method!r}")

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "p": [to_json(v) for v in self.p],
            "t": [to_json(v) for v in self.t],
            "n_list": list(self.n_list),
            "trials": self.trials,
            "seed": self.seed,
            "norm_method": self.norm_method,
            "restarts": self.restarts,
            "budget": self.budget,
        }


class TrialRecord(NamedTuple):
    n: int
    trial: int
    mixed_norm: float
    operator_norm: float
    ratio: float
    exact: bool


class SlopeFit(NamedTuple):
    slope: float
    stderr: float


@dataclass
class GrowthReport:
    experiment: GrowthExperiment
    records: list
    per_n: list  # (n, max_ratio, mean_ratio)
    slope: float
    stderr: float
    verdict: Growth
    predicted: Optional[Fraction] = None

    def max_ratios(self) -> list:
        return [row[1] for row in self.per_n]

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment.to_json(),
            "per_n": [{"n": n, "max_ratio": mx, "mean_ratio": mean} for n, mx, mean in self.per_n],
            "slope": self.slope,
            "stderr": self.stderr,
            "verdict": self.verdict.value,
            "predicted_slope": None if self.predicted is None else to_json(self.predicted),
            "records": [r._asdict() for r in self.records],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TrialRecord._fields)
        for r in self.records:
            writer.writerow([r.n, r.trial, repr(r.mixed_norm), repr(r.operator_norm), repr(r.ratio), int(r.exact)])
        return buf.getvalue()


def predicted_slope(t: Sequence, p: Sequence, m: int) -> Fraction:
    """Growth exponent of the ratio on random sign forms.

    ``sum 1/t_k - (m + 1)/2 + sum 1/p_k``; positive means the ratio grows
    like a power of ``n``, zero means the tuple sits on the boundary.
    """
    p = [ext(v) for v in p]
    t = [ext(v) for v in t]
    if len(p) != m or len(t) != m:
        raise ValueError(f"need {m} exponents for t and p")
    if any(v < 2 for v in p):
        raise ex.NotApplicableError("predicted slope needs all p_k >= 2")
    return recip_sum(t) - Fraction(m + 1, 2) + recip_sum(p)


def fit_slope(points: Sequence) -> SlopeFit:
    """Least-squares slope of ``log ratio`` against ``log n``."""
    ns = np.array([pt[0] for pt in points], dtype=np.float64)
    ratios = np.array([pt[1] for pt in points], dtype=np.float64)
    if len(set(ns.tolist())) < 3:
        raise ValueError("need at least 3 distinct n")
    if np.any(ratios <= 0):
        raise ValueError("ratios must be positive")
    res = stats.linregress(np.log(ns), np.log(ratios))
    return SlopeFit(float(res.slope), float(res.stderr))


def verdict(report, growth_threshold: float = GROWTH_THRESHOLD) -> Growth:
    slope, stderr = report.slope, report.stderr
    if slope - 2 * stderr > growth_threshold:
        return Growth.GROWING
    if slope + 2 * stderr < growth_threshold:
        return Growth.BOUNDED
    return Growth.INCONCLUSIVE


def _norm(T, exp: GrowthExperiment, seed) -> tuple:
    if exp.norm_method != "multistart":
        try:
            return exact_norm(T, exp.p, exp.budget).value, True
        except InfeasibleError:
            if exp.norm_method == "oracle":
                raise
    return estimate_norm(T, exp.p, exp.restarts, seed).value, False


def ratio_curve(exp: GrowthExperiment) -> GrowthReport:
    if exp.norm_method == "oracle":
        for n in exp.n_list:
            size = enumeration_size((n,) * exp.m, exp.p)
            if size > exp.budget:
                raise InfeasibleError(
                    f"oracle limit: n = {n} needs {size} enumerations, budget {exp.budget}"
                )
    records = []
    per_n = []
    for n in exp.n_list:
        ratios = []
        for trial in range(exp.trials):
            key = (exp.seed, n, trial)
            T = ksz_sample(exp.m, n, key)
            num = mixed_norm(T, exp.t)
            den, exact = _norm(T, exp, key)
            ratio = num / den
            ratios.append(ratio)
            records.append(TrialRecord(n, trial, num, den, ratio, exact))
        per_n.append((n, max(ratios), float(np.mean(ratios))))
    if len(per_n) >= 3:
        fit = fit_slope([(n, mx) for n, mx, _ in per_n])
    else:
        fit = SlopeFit(math.nan, math.inf)
    try:
        predicted = predicted_slope(exp.t, exp.p, exp.m)
    except ex.NotApplicableError:
        predicted = None
    report = GrowthReport(exp, records, per_n, fit.slope, fit.stderr, Growth.INCONCLUSIVE, predicted)
    if len(per_n) >= 3:
        report.verdict = verdict(report)
    return report


# --------------------------------------------------------------------------
# perturbation scans


def _certified_coordinates(s: ExponentTuple, inst: HLInstance) -> dict:
    """Coordinates (1-based) that cannot be lowered alone, by theorem.

    Only trusted when ``s`` is exactly what its source produces for ``inst``.
    """
    source = s.source
    try:
        expected = ex.THEOREMS[source](inst) if source in ex.THEOREMS else None
    except ex.HLError:
        expected = None
    if expected is None or expected.values != s.values:
        return {}
    m = inst.m
    if source in ("main", "critical", "ot"):
        cut = expected.k0
        if inst.p[cut - 1] >= 2:
            return {k: f"{source}: globally sharp" for k in range(1, m + 1)}
        return {k: f"{source}: optimal coordinate" for k in range(1, cut + 1)}
    if source == "critical_iso":
        return {k: "critical_iso: globally sharp" for k in range(1, m + 1)}
    if source == "paulino":
        return {1: "paulino: sharp", 2: "paulino: sharp"}
    if source == "aron":
        return {k: "aron: optimal coordinate" for k in range(1, m + 1)}
    return {}


@dataclass
class PerturbRow:
    coord: int
    eps: Fraction
    direction: str
    values: tuple
    verdict: Verdict
    reason: str
    growth: Optional[Growth] = None
    slope: Optional[float] = None


@dataclass
class PerturbScan:
    base: ExponentTuple
    inst: HLInstance
    rows: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "instance": self.inst.to_json(),
            "rows": [
                {
                    "coord": r.coord,
                    "eps": to_json(r.eps),
                    "direction": r.direction,
                    "values": [to_json(v) for v in r.values],
                    "verdict": r.verdict.value,
                    "reason": r.reason,
                    "growth": None if r.growth is None else r.growth.value,
                    "slope": r.slope,
                }
                for r in self.rows
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["coord", "eps", "direction", "tuple", "verdict", "reason", "growth", "slope"])
        for r in self.rows:
            writer.writerow([
                r.coord,
                fmt(r.eps),
                r.direction,
                " ".join(fmt(v) for v in r.values),
                r.verdict.value,
                r.reason,
                "" if r.growth is None else r.growth.value,
                "" if r.slope is None else repr(r.slope),
            ])
        return buf.getvalue()


def _shift(value, eps: Fraction, direction: str):
    # an infinite exponent "lowered by eps" becomes the finite exponent 1/eps
    if direction == "decrease":
        return recip(eps) if is_inf(value) else value - eps
    return value if is_inf(value) else value + eps


def perturb_scan(
    s: ExponentTuple,
    inst: HLInstance,
    eps_list: Sequence,
    directions: Sequence[str] = ("decrease", "increase"),
    coords: Optional[Sequence[int]] = None,
    empirical: Optional[dict] = None,
) -> PerturbScan:
    """Classify every single-coordinate perturbation of ``s``.

    ``empirical`` (keys of :class:`GrowthExperiment` other than ``m``, ``p``,
    ``t``) additionally runs :func:`ratio_curve` on each perturbed tuple.
    """
    eps_values = [ext(e) for e in eps_list]
    if any(e <= 0 or is_inf(e) for e in eps_values):
        raise ValueError("eps values must be positive and finite")
    certified = _certified_coordinates(s, inst)
    scan = PerturbScan(s, inst)
    coords = range(1, inst.m + 1) if coords is None else coords
    for j in coords:
        if not 1 <= j <= inst.m:
            raise IndexError(f"coordinate {j} outside 1..{inst.m}")
        for eps in eps_values:
            for direction in directions:
                if direction not in ("decrease", "increase"):
                    raise ValueError(f"unknown direction {direction!r}")
                values = list(s.values)
                values[j - 1] = _shift(values[j - 1], eps, direction)
                values = tuple(values)
                verdict_, reason = ex.explain_tuple(values, inst)
                if direction == "decrease" and j in certified:
                    if verdict_ is Verdict.ADMISSIBLE:
                        raise AssertionError(f"{values} classified admissible against {certified[j]}")
                    if verdict_ is Verdict.UNKNOWN:
                        verdict_, reason = Verdict.NON_ADMISSIBLE, certified[j]
                row = PerturbRow(j, eps, direction, values, verdict_, reason)
                if empirical is not None and all(v >= 1 for v in values):
                    exp = GrowthExperiment(inst.m, inst.p, values, **empirical)
                    report = ratio_curve(exp)
                    row.growth, row.slope = report.verdict, report.slope
                scan.rows.append(row)
    return scan


# --------------------------------------------------------------------------
# region lattices


@dataclass
class RegionSample:
    inst: HLInstance
    axes: tuple
    points: list  # ((t1, t2, t3), Verdict)

    def labels(self) -> dict:
        return {t: v for t, v in self.points}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t1", "t2", "t3", "t1_decimal", "t2_decimal", "t3_decimal", "label"])
        for t, v in self.points:
            writer.writerow([*(fmt(x) for x in t), *(repr(float(x)) for x in t), v.value])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "instance": self.inst.to_json(),
            "axes": [[to_json(x) for x in axis] for axis in self.axes],
            "points": [{"t": [to_json(x) for x in t], "label": v.value} for t, v in self.points],
        }


def rational_range(start, stop, step) -> tuple:
    """Inclusive exact grid ``start, start + step, ..., <= stop``."""
    start, stop, step = ext(start), ext(stop), ext(step)
    if step <= 0 or is_inf(stop) or is_inf(step):
        raise ValueError("grid needs a finite stop and positive step")
    out = []
    x = start
    while x <= stop:
        out.append(x)
        x += step
    return tuple(out)


def region_grid(inst: HLInstance, axes: Sequence[Sequence]) -> RegionSample:
    if inst.m != 3:
        raise ValueError(f"region grids are 3-dimensional; got m = {inst.m}")
    if len(axes) != 3:
        raise ValueError("need exactly three axis grids")
    axes = tuple(tuple(ext(x) for x in axis) for axis in axes)
    points = []
    for t1 in axes[0]:
        for t2 in axes[1]:
            for t3 in axes[2]:
                t = (t1, t2, t3)
                points.append((t, ex.classify_tuple(t, inst)))
    return RegionSample(inst, axes, points)
