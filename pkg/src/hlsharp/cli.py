"""Command-line front end.

Subcommands: ``exponents``, ``table``, ``verify``, ``sharpness``, ``region``.
Exit codes: 0 success, 1 usage or domain error, 2 inconclusive growth
verdict under ``--strict``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from hlsharp import exponents as ex
from hlsharp.exponents import HLInstance, HLError
from hlsharp.extended import ext, fmt, is_inf, to_json, truncate
from hlsharp.norms import DEFAULT_BUDGET, InfeasibleError, estimate_norm, exact_norm
from hlsharp.sharpness import (
    MULTISTART_SLACK,
    Growth,
    GrowthExperiment,
    perturb_scan,
    rational_range,
    ratio_curve,
    region_grid,
)
from hlsharp.tensors import ksz_sample, load_tensor, mixed_norm, save_tensor

LABELS = {
    "mu": "Praciano-Pereira (mu)",
    "ot": "Osikiewicz-Tonge",
    "dimant": "Dimant-Sevilla-Peris",
    "ar": "Albuquerque-Rezende",
    "aron": "Aron et al.",
    "main": "globally sharp (main)",
    "vector_isotropic": "isotropic lambda_r",
    "vector": "vector-valued",
    "paulino": "Paulino",
    "critical_iso": "critical, p_k = m",
    "critical": "critical",
}

SCALAR_ROWS = ("mu", "ot", "dimant", "ar", "aron", "main", "paulino", "critical_iso", "critical")
VECTOR_ROWS = ("vector_isotropic", "vector")

DEFAULTS = {
    "trials": 20,
    "seed": 0,
    "restarts": 50,
    "budget": DEFAULT_BUDGET,
    "format": "pretty",
    "method": "auto",
    "eps": "1/100,1/10",
    "grid": None,
    "n": 8,
    "strict": False,
    "empirical": False,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# parsing helpers


def parse_list(text: str) -> list:
    return [ext(part) for part in str(text).split(",") if part.strip()]


def parse_ints(text: str) -> list:
    return [int(part) for part in str(text).split(",") if part.strip()]


def parse_grid(text: str) -> tuple:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {text!r}")
    return rational_range(*parts)


def build_instance(args) -> HLInstance:
    if args.p is None and args.m is None:
        raise UsageError("need -p (and/or -m)")
    p = parse_list(args.p) if args.p is not None else [ext(args.m)]
    m = args.m
    if len(p) == 1 and m is not None:
        p = p * m
    if m is not None and len(p) != m:
        raise UsageError(f"-m {m} but {len(p)} values in -p")
    r = None if args.r is None else ext(args.r)
    q = None if args.q is None else ext(args.q)
    return HLInstance(tuple(p), r, q)


def load_config(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = lambda key: key.strip().replace("-", "_")
    parser.read_string("[run]\n" + Path(path).read_text())
    return dict(parser["run"])


def merge_config(args, known: set) -> None:
    """Fill flags left unset from the config file; flags win."""
    if args.config:
        for key, value in load_config(args.config).items():
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
            if getattr(args, key, None) in (None, False):
                setattr(args, key, _coerce(key, value))
    for key, value in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _coerce(key: str, value: str):
    if key in ("m", "trials", "seed", "restarts", "budget", "n"):
        return int(value)
    if key in ("strict", "empirical"):
        return value.strip().lower() in ("1", "true", "yes", "on")
    if key == "tensor":
        return [v.strip() for v in value.split(",") if v.strip()]
    return value


# --------------------------------------------------------------------------
# rendering


def _trunc_str(x) -> str:
    if is_inf(x):
        return "inf"
    return f"{float(truncate(x, 2)):.2f}"


def _tuple_json(t) -> dict:
    out = t.to_json()
    out["decimal"] = [None if is_inf(v) else float(v) for v in t.values]
    out["truncated"] = [_trunc_str(v) for v in t.values]
    return out


def _pretty_rows(header: list, rows: list) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = []
    sep = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    lines.append(sep)
    lines.append("| " + " | ".join(str(h).ljust(w) for h, w in zip(header, widths)) + " |")
    lines.append(sep)
    for r in rows:
        lines.append("| " + " | ".join(str(c).ljust(w) for c, w in zip(r, widths)) + " |")
    lines.append(sep)
    return "\n".join(lines)


def _csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(args, payload: dict, header: list, rows: list, pretty: str) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    elif args.format == "csv":
        text = _csv(header, rows)
    else:
        text = pretty + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _constant(name: str, inst: HLInstance):
    if name == "main":
        return str(ex.constant_bound(inst))
    if name in ("ot", "aron"):
        return "1"
    return None


# --------------------------------------------------------------------------
# subcommands


def cmd_exponents(args) -> int:
    if not args.theorem:
        raise UsageError("exponents needs --theorem")
    if args.theorem not in ex.THEOREMS:
        raise UsageError(f"unknown theorem {args.theorem!r}; choose from {', '.join(ex.THEOREMS)}")
    if args.theorem in ("paulino", "critical_iso") and args.p is None:
        if args.m is None:
            raise UsageError(f"{args.theorem} needs -m")
        args.p = str(args.m)
    inst = build_instance(args)
    try:
        t = ex.THEOREMS[args.theorem](inst)
    except ex.RegimeError as exc:
        regimes = ", ".join(sorted(r.value for r in ex.classify_regime(inst)))
        raise ex.RegimeError(f"{exc} (instance regime: {regimes})") from exc
    const = _constant(args.theorem, inst)
    payload = {
        "theorem": args.theorem,
        "label": LABELS[args.theorem],
        "instance": inst.to_json(),
        "tuple": _tuple_json(t),
        "k0": t.k0,
        "constant_bound": const,
    }
    header = ["k", "exact", "decimal"]
    rows = [[k, fmt(v), _trunc_str(v)] for k, v in enumerate(t.values, 1)]
    cols = [f"s_{k}" for k in range(1, inst.m + 1)]
    pretty = _pretty_rows(
        [LABELS[args.theorem]] + cols,
        [["exact"] + [fmt(v) for v in t.values], ["decimal"] + [_trunc_str(v) for v in t.values]],
    )
    extra = []
    if t.k0 is not None:
        extra.append(f"k0 = {t.k0}")
    if const is not None:
        extra.append(f"constant <= {const}")
    if extra:
        pretty += "\n" + ", ".join(extra)
    _emit(args, payload, header, rows, pretty)
    return 0


def table_rows(inst: HLInstance) -> tuple:
    """Applicable theorem rows and skipped theorems with the failed condition."""
    names = VECTOR_ROWS if inst.r is not None and inst.q is not None else SCALAR_ROWS
    rows, skipped = [], []
    for name in names:
        try:
            t = ex.THEOREMS[name](inst)
        except HLError as exc:
            skipped.append((name, str(exc)))
            continue
        rows.append((name, t))
    have = {name for name, _ in rows}
    if "critical_iso" in have and "critical" in have:
        rows = [(n, t) for n, t in rows if n != "critical"]
        skipped.append(("critical", "same tuple as the critical, p_k = m row"))
    return rows, skipped


def cmd_table(args) -> int:
    inst = build_instance(args)
    rows, skipped = table_rows(inst)
    payload = {
        "instance": inst.to_json(),
        "rows": [dict(_tuple_json(t), theorem=name, label=LABELS[name]) for name, t in rows],
        "skipped": [{"theorem": name, "reason": why} for name, why in skipped],
    }
    cols = [f"s_{k}" for k in range(1, inst.m + 1)]
    header = ["theorem"] + cols + ["k0"]
    csv_rows = [[name] + [fmt(v) for v in t.values] + [t.k0 or ""] for name, t in rows]
    pretty_rows = []
    for name, t in rows:
        pretty_rows.append([LABELS[name]] + [fmt(v) for v in t.values] + [t.k0 or ""])
        pretty_rows.append(["  ~"] + [_trunc_str(v) for v in t.values] + [""])
    pretty = _pretty_rows(["theorem"] + cols + ["k0"], pretty_rows)
    if skipped:
        pretty += "\nnot applicable:\n" + "\n".join(f"  {LABELS[n]}: {why}" for n, why in skipped)
    _emit(args, payload, header, csv_rows, pretty)
    return 0


def reference_constant(t, inst: HLInstance):
    """Known constant for ``t`` on ``inst``, or None."""
    values = tuple(ext(v) for v in t)
    if inst.m == 2 and all(is_inf(v) for v in inst.p) and values == (Fraction(4, 3),) * 2:
        return ex.PowerOfTwo(Fraction(1, 2))
    for name in ("ot", "aron"):
        try:
            if ex.THEOREMS[name](inst).values == values:
                return ex.PowerOfTwo(Fraction(0))
        except HLError:
            pass
    try:
        if ex.exponents_main(inst).values == values:
            return ex.constant_bound(inst)
    except HLError:
        pass
    return None


def _norm_value(T, p, args, seed):
    if args.method != "multistart":
        try:
            return exact_norm(T, p, args.budget).value, True
        except InfeasibleError:
            if args.method == "oracle":
                raise
    return estimate_norm(T, p, args.restarts, seed).value, False


def cmd_verify(args) -> int:
    inst = build_instance(args)
    if args.t is None:
        raise UsageError("verify needs -t")
    t = parse_list(args.t)
    if len(t) == 1:
        t = t * inst.m
    if len(t) != inst.m:
        raise UsageError(f"-t has {len(t)} values, m = {inst.m}")
    if args.tensor:
        tensors = [load_tensor(path) for path in args.tensor]
    else:
        tensors = [ksz_sample(inst.m, args.n, (args.seed, args.n, i)) for i in range(args.trials)]
    if args.save_tensors:
        out_dir = Path(args.save_tensors)
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, T in enumerate(tensors):
            save_tensor(T, out_dir / f"tensor_{i:03d}.json")
    verdict = ex.classify_tuple(t, inst)
    const = reference_constant(t, inst) if verdict is ex.Verdict.ADMISSIBLE else None
    records = []
    for i, T in enumerate(tensors):
        seed = T.seed if T.seed is not None else (args.seed, i)
        num = mixed_norm(T, t)
        den, exact = _norm_value(T, inst.p, args, seed)
        ratio = num / den if den > 0 else float("inf")
        rec = {"index": i, "dims": list(T.dims), "mixed_norm": num, "operator_norm": den, "exact": exact, "ratio": ratio}
        if const is not None:
            slack = 1e-9 if exact else MULTISTART_SLACK * float(const)
            rec["within_bound"] = ratio <= float(const) + slack
        records.append(rec)
    payload = {
        "instance": inst.to_json(),
        "t": [to_json(v) for v in t],
        "classification": verdict.value,
        "constant": None if const is None else str(const),
        "records": records,
    }
    header = ["index", "mixed_norm", "operator_norm", "exact", "ratio", "within_bound"]
    rows = [[r["index"], repr(r["mixed_norm"]), repr(r["operator_norm"]), int(r["exact"]), repr(r["ratio"]), r.get("within_bound", "")] for r in records]
    pretty = _pretty_rows(header, rows)
    pretty += f"\ntuple {', '.join(fmt(v) for v in t)}: {verdict.value}"
    if const is not None:
        pretty += f"; constant {const}; max ratio {max(r['ratio'] for r in records):.12g}"
    else:
        pretty += "; no known constant, ratios reported without a violation claim"
    _emit(args, payload, header, rows, pretty)
    return 0


def _write_artifacts(args, payload: dict, csv_text: str, summary: str) -> None:
    if args.out:
        base = Path(args.out)
        json_path = base if base.suffix == ".json" else base.with_suffix(".json")
        json_path.write_text(json.dumps(payload, indent=2) + "\n")
        json_path.with_suffix(".csv").write_text(csv_text)
        sys.stdout.write(summary + "\n")
    elif args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    elif args.format == "csv":
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(summary + "\n")


def _experiment_kwargs(args) -> dict:
    if args.n_list is None:
        raise UsageError("need --n-list")
    return {
        "n_list": tuple(parse_ints(args.n_list)),
        "trials": args.trials,
        "seed": args.seed,
        "norm_method": args.method,
        "restarts": args.restarts,
        "budget": args.budget,
    }


def cmd_sharpness(args) -> int:
    inst = build_instance(args)
    if args.theorem:
        if args.theorem not in ex.THEOREMS:
            raise UsageError(f"unknown theorem {args.theorem!r}")
        base = ex.THEOREMS[args.theorem](inst)
        coords = parse_ints(args.coord) if args.coord else None
        empirical = _experiment_kwargs(args) if args.empirical else None
        scan = perturb_scan(base, inst, parse_list(args.eps), coords=coords, empirical=empirical)
        lines = [str(base)]
        for r in scan.rows:
            growth = f" [{r.growth.value}, slope {r.slope:.3f}]" if r.growth is not None else ""
            lines.append(f"  s_{r.coord} {r.direction} by {fmt(r.eps)}: {r.verdict.value} ({r.reason}){growth}")
        _write_artifacts(args, scan.to_json(), scan.to_csv(), "\n".join(lines))
        inconclusive = any(r.growth is Growth.INCONCLUSIVE for r in scan.rows)
    elif args.t:
        t = parse_list(args.t)
        if len(t) == 1:
            t = t * inst.m
        exp = GrowthExperiment(inst.m, inst.p, tuple(t), **_experiment_kwargs(args))
        report = ratio_curve(exp)
        lines = [f"n={n}: max {mx:.6g}, mean {mean:.6g}" for n, mx, mean in report.per_n]
        lines.append(f"slope {report.slope:.4f} +- {report.stderr:.4f}: {report.verdict.value}")
        if report.predicted is not None:
            lines.append(f"predicted slope {fmt(report.predicted)}")
        _write_artifacts(args, report.to_json(), report.to_csv(), "\n".join(lines))
        inconclusive = report.verdict is Growth.INCONCLUSIVE
    else:
        raise UsageError("sharpness needs --theorem (perturbation scan) or -t (growth experiment)")
    return 2 if args.strict and inconclusive else 0


def cmd_region(args) -> int:
    inst = build_instance(args)
    if inst.m != 3:
        raise UsageError(f"region needs m = 3, got m = {inst.m}")
    grids = args.grid or ["1:6:1/2"]
    if len(grids) == 1:
        grids = grids * 3
    if len(grids) != 3:
        raise UsageError("give --grid once (all axes) or three times")
    sample = region_grid(inst, [parse_grid(g) for g in grids])
    counts = {}
    for _, v in sample.points:
        counts[v.value] = counts.get(v.value, 0) + 1
    summary = f"{len(sample.points)} points: " + ", ".join(f"{k} {counts[k]}" for k in sorted(counts))
    _write_artifacts(args, sample.to_json(), sample.to_csv(), summary)
    return 0


COMMANDS = {
    "exponents": cmd_exponents,
    "table": cmd_table,
    "verify": cmd_verify,
    "sharpness": cmd_sharpness,
    "region": cmd_region,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hlsharp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--theorem")
        sp.add_argument("-m", type=int)
        sp.add_argument("-p", help="comma list of exact rationals or inf")
        sp.add_argument("-r")
        sp.add_argument("-q")
        sp.add_argument("-t", help="exponent tuple, comma list")
        sp.add_argument("--n-list", dest="n_list")
        sp.add_argument("--n", type=int, help="dimension of sampled tensors (verify)")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--restarts", type=int)
        sp.add_argument("--budget", type=int)
        sp.add_argument("--method", choices=("auto", "oracle", "multistart"))
        sp.add_argument("--eps", help="comma list of perturbation sizes")
        sp.add_argument("--coord", help="comma list of 1-based coordinates to perturb")
        sp.add_argument("--empirical", action="store_true", default=None)
        sp.add_argument("--grid", action="append", help="start:stop:step; once or three times")
        sp.add_argument("--tensor", action="append", help="tensor JSON file (repeatable)")
        sp.add_argument("--save-tensors", dest="save_tensors")
        sp.add_argument("--format", choices=("json", "csv", "pretty"))
        sp.add_argument("--out")
        sp.add_argument("--strict", action="store_true", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    known = {a.dest for a in parser._subparsers._group_actions[0].choices[args.command]._actions} - {"help", "config"}
    try:
        merge_config(args, known)
        return COMMANDS[args.command](args)
    except (UsageError, HLError, InfeasibleError, ValueError) as exc:
        print(f"hlsharp {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
