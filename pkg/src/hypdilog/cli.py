"""Command-line front end.

Every command prints one record: the run configuration, a summary and a
list of rows.  ``--json`` emits it as a JSON object, ``--csv`` emits the
rows as CSV (summary and configuration on the error stream), ``--text``
(default) prints aligned tables.  Exit codes: 0 all checks passed, 1 a
verification check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import BudgetError, DomainError, InconclusiveError, QuadratureError

SCHEMA_VERSION = 1
FORMATS = ("text", "json", "csv")

# default tolerances per command, overridable with --tol NAME=VALUE
DEFAULT_TOLS: dict[str, dict[str, float]] = {
    "special": {"pentagon": 1e-11, "reflection": 1e-11, "lemma": 1e-11},
    "pants": {"variants": 1e-9},
    "torus": {"agreement_floor": 1e-6, "agreement_factor": 10.0},
    "lasso-verify": {"volume": 1e-6, "variant": 1e-5},
    "simulate": {"sigmas": 4.0, "degenerate": 1e-3},
    "identity": {"sigmas": 5.0, "degenerate": 5e-3},
}
DEFAULT_SAMPLES = {"special": 10_000, "lasso-verify": 20, "simulate": 100_000, "identity": 100_000}
DEFAULT_LMAX = {"torus": 12.0, "simulate": 12.0, "identity": 14.0}


class UsageError(Exception):
    """Invalid command-line input (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    args: dict
    seed: int = 0
    workers: int = 1
    samples: int | None = None
    lmax: float | None = None
    tol: dict[str, float] = field(default_factory=dict)
    format: str = "text"
    out: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Result:
    summary: dict
    rows: list[dict]
    passed: bool


# ------------------------------------------------------------------ commands


def cmd_special(cfg: RunConfig) -> Result:
    from .dilog import PI2_6, lemma55_defect, pentagon_defect, rogers_l

    rng = np.random.default_rng(cfg.seed)
    n = cfg.samples
    x, y = rng.random(n), rng.random(n)
    s, t = rng.random(n), rng.random(n)
    checks = [
        ("pentagon", float(np.max(np.abs(pentagon_defect(x, y))))),
        ("reflection", float(np.max(np.abs(rogers_l(x) + rogers_l(1.0 - x) - PI2_6)))),
        ("lemma", float(np.max(np.abs(lemma55_defect(s, t))))),
    ]
    rows = [{"check": name, "points": n, "max_defect": d, "tol": cfg.tol[name], "pass": d <= cfg.tol[name]}
            for name, d in checks]
    return Result({"points": n}, rows, all(r["pass"] for r in rows))


def cmd_pants(cfg: RunConfig) -> Result:
    from .hyptrig import PantsLengths, pants_invariants
    from .terms import F_VARIANTS, bar_f, f_pants, hat_f

    lengths = PantsLengths(*cfg.args["lengths"])
    inv = pants_invariants(lengths)
    rows = []
    for v in F_VARIANTS:
        rows.append({"quantity": "f", "variant": v, "value": f_pants(lengths, v).value})
    rows.append({"quantity": "hat_f", "variant": "HATF", "value": hat_f(lengths).value})
    rows.append({"quantity": "bar_f", "variant": "BARF", "value": bar_f(lengths).value})
    fvals = [r["value"] for r in rows[:3]]
    spread = max(fvals) - min(fvals)
    summary = {"lengths": list(lengths.as_tuple()), "m": list(inv.m), "p": list(inv.p),
               "variant_spread": spread, "tol": cfg.tol["variants"]}
    return Result(summary, rows, spread <= cfg.tol["variants"])


def cmd_torus(cfg: RunConfig) -> Result:
    from .spectrum import TorusMarking, enumerate_torus_curves
    from .terms import FOUR_PI2, torus_curve_term

    marking = TorusMarking(*cfg.args["traces"])
    records = enumerate_torus_curves(marking, cfg.lmax)
    g14, g15 = FOUR_PI2, 0.0
    rows = []
    for r in records:
        t14 = torus_curve_term(r.cut, "G14")
        g14 -= t14
        g15 += torus_curve_term(r.cut, "G15")
        rows.append({"slope": f"{r.slope[0]}/{r.slope[1]}", "trace": r.trace, "a": r.a, "term_G14": t14,
                     "partial_G14": g14, "partial_G15": g15})
    decreasing = all(rows[k + 1]["partial_G14"] < rows[k]["partial_G14"] for k in range(len(rows) - 1))
    last = rows[-1]["term_G14"] if rows else math.inf
    allowance = max(cfg.tol["agreement_factor"] * last, cfg.tol["agreement_floor"])
    gap = abs(g14 - g15)
    summary = {"marking": list(marking.as_tuple()), "boundary_length": marking.c, "curves": len(rows),
               "G14": g14, "G15": g15, "gap": gap, "allowance": allowance, "G14_decreasing": decreasing}
    return Result(summary, rows, bool(rows) and decreasing and gap <= allowance)


def cmd_lasso_verify(cfg: RunConfig) -> Result:
    from .dilog import lasso
    from .quadrature import OmegaParams, closed_form_candidates, omega_volume, omega_volume_detail, resolve_closed_form_variant

    a, b = cfg.args["values"]
    if cfg.args["cd"]:
        points = [OmegaParams(a, b)]
        lasso_ref = None
    else:
        points = [OmegaParams.from_lasso(a, b)]
        lasso_ref = 2.0 * float(lasso(a, b))
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.samples):
        c = math.exp(rng.uniform(math.log(1.05), math.log(10.0)))
        points.append(OmegaParams(c, c * math.exp(rng.uniform(math.log(1.05), math.log(10.0)))))
    rows = []
    winners = set()
    for k, p in enumerate(points):
        num = omega_volume_detail(p)
        cand = closed_form_candidates(p)
        try:
            win = resolve_closed_form_variant(p, cfg.tol["variant"], numeric=num.value)
        except InconclusiveError:
            win = "inconclusive"
        winners.add(win)
        closed = omega_volume(p)
        rows.append({"point": "input" if k == 0 else "grid", "c": p.c, "d": p.d, "numeric": num.value,
                     "numeric_error": num.error, "CminusD": cand["CminusD"], "DminusOne": cand["DminusOne"],
                     "winner": win, "diff": abs(num.value - closed), "pass": abs(num.value - closed) <= cfg.tol["volume"]})
    summary = {"winner": winners.pop() if len(winners) == 1 else "inconsistent", "points": len(points)}
    if lasso_ref is not None:
        summary["two_lasso"] = lasso_ref
        summary["lasso_diff"] = abs(rows[0]["numeric"] - lasso_ref)
    ok = all(r["pass"] for r in rows) and summary["winner"] not in ("inconsistent", "inconclusive")
    if lasso_ref is not None:
        ok = ok and summary["lasso_diff"] <= cfg.tol["volume"]
    return Result(summary, rows, ok)


def _z(est: float, se: float, theory: float) -> float:
    if se > 0:
        return (est - theory) / se
    return 0.0 if est == theory else math.inf


def _simulate_pants(cfg: RunConfig, lengths) -> tuple[dict, list[dict], bool]:
    from .fuchsian import build_pants
    from .geoflow import aggregate_bordered, bordered_theory, compare_pants, run_mc

    report = run_mc(build_pants(lengths), cfg.samples, cfg.seed, cfg.workers)
    rows = compare_pants(report, cfg.tol["sigmas"])
    for conv in ("HatF", "BarF"):
        est, se = aggregate_bordered(report, conv)
        th = bordered_theory(lengths, conv)
        z = _z(est, se, th)
        rows.append({"class": conv, "theory": th, "estimate": est, "se": se, "z": z, "pass": abs(z) <= cfg.tol["sigmas"]})
    return report.to_dict(), rows, True


def _simulate_torus(cfg: RunConfig, traces) -> tuple[dict, list[dict], bool]:
    from .fuchsian import build_torus
    from .geoflow import run_mc_torus, torus_bin_theory
    from .terms import g_torus

    report = run_mc_torus(build_torus(traces), cfg.samples, cfg.seed, cfg.workers, l_max=cfg.lmax)
    rows = []
    for idx, a in enumerate(report.extra["curve_lengths"]):
        th = torus_bin_theory(report, idx)
        for kind, label in (("H", f"H_A[{idx}]"), ("W", f"W_A[{idx}]")):
            est, se = report.estimate(label)
            z = _z(est, se, th[kind])
            rows.append({"class": label, "a": a, "theory": th[kind], "estimate": est, "se": se, "z": z,
                         "pass": abs(z) <= cfg.tol["sigmas"]})
    g = g_torus(tuple(report.extra["marking"]), cfg.lmax, "G14")
    est, se = report.estimate("W(T)")
    tail = g.truncation.last_term_magnitude
    ok = abs(est - g.value) <= cfg.tol["sigmas"] * se + 8.0 * tail
    rows.append({"class": "W(T)", "a": math.nan, "theory": g.value, "estimate": est, "se": se,
                 "z": _z(est, se, g.value), "pass": ok, "truncation_allowance": 8.0 * tail})
    return report.to_dict(), rows, True


def _simulate_genus2(cfg: RunConfig) -> tuple[dict, list[dict], bool]:
    from .fuchsian import build_genus2_octagon
    from .geoflow import run_mc_closed

    report = run_mc_closed(build_genus2_octagon(), cfg.samples, cfg.seed, cfg.workers)
    rows = []
    for lab in ("PantsLike", "TorusLike"):
        est, se = report.estimate(lab)
        rows.append({"class": lab, "estimate": est, "se": se, "fraction": report.count(lab) / report.total_samples})
    bins = report.extra["pants_bins"]
    if bins:
        top = bins[0]
        rows.append({"class": "modal_pants", "lengths": top["lengths"], "theory": top["f"], "estimate": top["estimate"],
                     "se": top["se"], "z": top["z"], "pass": abs(top["z"]) <= cfg.tol["sigmas"]})
    frac = sum(report.counts.values()) / report.total_samples
    rows.append({"class": "closure", "fraction": frac, "degenerate": report.degenerate_fraction,
                 "pass": abs(frac + report.degenerate_fraction - 1.0) < 1e-12})
    return report.to_dict(), rows, bool(bins)


def cmd_simulate(cfg: RunConfig) -> Result:
    model = cfg.args["model"]
    params = cfg.args["params"]
    if model == "pants":
        if len(params) != 3:
            raise UsageError("simulate pants needs three lengths")
        report, rows, ok = _simulate_pants(cfg, tuple(params))
    elif model == "torus":
        if len(params) != 3:
            raise UsageError("simulate torus needs three traces")
        report, rows, ok = _simulate_torus(cfg, tuple(params))
    elif model == "genus2":
        if params:
            raise UsageError("simulate genus2 takes no parameters")
        report, rows, ok = _simulate_genus2(cfg)
    else:
        raise UsageError(f"unknown model {model!r}")
    ok = ok and all(r.get("pass", True) for r in rows)
    ok = ok and report["degenerate_fraction"] < cfg.tol["degenerate"]
    return Result({"report": report}, rows, ok)


def cmd_identity(cfg: RunConfig) -> Result:
    surface = cfg.args["surface"]
    params = cfg.args["params"]
    if surface == "genus2":
        if params:
            raise UsageError("identity genus2 takes no parameters")
        report, rows, ok = _simulate_genus2(cfg)
        ok = ok and all(r.get("pass", True) for r in rows) and report["degenerate_fraction"] < cfg.tol["degenerate"]
        return Result({"report": report}, rows, ok)
    if surface != "fourholed":
        raise UsageError(f"unknown surface {surface!r}")
    if len(params) not in (5, 6):
        raise UsageError("identity fourholed needs b1 b2 b3 b4 interior [twist]")
    from .fuchsian import build_four_holed
    from .spectrum import enumerate_fourholed_curves
    from .terms import bar_f

    model = build_four_holed(params[:4], params[4], params[5] if len(params) == 6 else 0.0)
    bound = 8.0 * math.pi**2
    total = 0.0
    rows = []
    for r in enumerate_fourholed_curves(model, cfg.lmax):
        fa, fb = bar_f(r.pants_a).value, bar_f(r.pants_b).value
        total += fa + fb
        rows.append({"slope": f"{r.slope[0]}/{r.slope[1]}", "length": r.length,
                     "pairing": f"{r.pairing[0][0]}{r.pairing[0][1]}|{r.pairing[1][0]}{r.pairing[1][1]}",
                     "bar_f_a": fa, "bar_f_b": fb, "partial_sum": total})
    monotone = all(rows[k + 1]["partial_sum"] > rows[k]["partial_sum"] for k in range(len(rows) - 1))
    summary = {"curves": len(rows), "partial_sum": total, "bound": bound, "gap": bound - total,
               "monotone": monotone}
    return Result(summary, rows, monotone and total <= bound)


COMMANDS: dict[str, Callable[[RunConfig], Result]] = {
    "special": cmd_special,
    "pants": cmd_pants,
    "torus": cmd_torus,
    "lasso-verify": cmd_lasso_verify,
    "simulate": cmd_simulate,
    "identity": cmd_identity,
}


# ------------------------------------------------------------------ parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _tol_pair(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    name, val = text.split("=", 1)
    return name.strip(), float(val)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    fmt = common.add_mutually_exclusive_group()
    for f in FORMATS:
        fmt.add_argument(f"--{f}", dest="format", action="store_const", const=f)
    common.add_argument("--out", help="write output to PATH instead of stdout")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--lmax", type=float)
    common.add_argument("--tol", type=_tol_pair, action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--config", help="plain-text key=value file merged under the flags")

    parser = _Parser(prog="hypdilog", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("special", parents=[common], help="dilogarithm identity grids")
    p = sub.add_parser("pants", parents=[common], help="pants invariants and f variants")
    p.add_argument("lengths", type=float, nargs=3)
    p = sub.add_parser("torus", parents=[common], help="simple-curve spectrum and truncated g")
    p.add_argument("traces", type=float, nargs=3)
    p = sub.add_parser("lasso-verify", parents=[common], help="quadrature against the closed-form volume")
    p.add_argument("values", type=float, nargs=2, help="l m (default) or c d with --cd")
    p.add_argument("--cd", action="store_true", help="interpret the two values as c d")
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo spine classification")
    p.add_argument("model", choices=["pants", "torus", "genus2"])
    p.add_argument("params", type=float, nargs="*")
    p = sub.add_parser("identity", parents=[common], help="identity partial sums and decompositions")
    p.add_argument("surface", choices=["fourholed", "genus2"])
    p.add_argument("params", type=float, nargs="*")
    return parser


def read_config_file(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def make_config(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    filecfg = read_config_file(ns.config) if ns.config else {}
    known = {"seed", "workers", "samples", "lmax", "format", "out"}
    for key in filecfg:
        if key not in known and not key.startswith("tol."):
            raise UsageError(f"unknown config key {key!r}")

    def pick(name, conv, default):
        val = getattr(ns, name)
        if val is None and name in filecfg:
            val = conv(filecfg[name])
        return default if val is None else val

    tol = dict(DEFAULT_TOLS.get(cmd, {}))
    file_tols = {k[4:]: float(v) for k, v in filecfg.items() if k.startswith("tol.")}
    for name, val in list(file_tols.items()) + list(ns.tol):
        if name not in tol:
            raise UsageError(f"unknown tolerance {name!r} for {cmd}; known: {sorted(tol)}")
        tol[name] = val
    fmt = pick("format", str, "text")
    if fmt not in FORMATS:
        raise UsageError(f"unknown format {fmt!r}")
    args = {k: v for k, v in vars(ns).items()
            if k not in known | {"command", "tol", "config"}}
    cfg = RunConfig(cmd, args, seed=pick("seed", int, 0), workers=pick("workers", int, 1),
                    samples=pick("samples", int, DEFAULT_SAMPLES.get(cmd)), lmax=pick("lmax", float, DEFAULT_LMAX.get(cmd)),
                    tol=tol, format=fmt, out=pick("out", str, None))
    if cfg.workers < 1:
        raise UsageError("--workers must be >= 1")
    if cfg.samples is not None and cfg.samples < 0:
        raise UsageError("--samples must be >= 0")
    if cfg.lmax is not None and not cfg.lmax > 0:
        raise UsageError("--lmax must be positive")
    return cfg


# ------------------------------------------------------------------ output


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(type(o))


def envelope(cfg: RunConfig, res: Result) -> dict:
    return {"schema_version": SCHEMA_VERSION, "library_version": __version__, "command": cfg.command,
            "seed": cfg.seed, "config": cfg.to_dict(), "passed": res.passed, "summary": res.summary,
            "rows": res.rows}


def _columns(rows: Sequence[dict]) -> list[str]:
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def render(cfg: RunConfig, res: Result) -> tuple[str, str]:
    """(machine output, diagnostics)."""
    env = envelope(cfg, res)
    if cfg.format == "json":
        return json.dumps(env, default=_jsonable, indent=1) + "\n", ""
    cols = _columns(res.rows)
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in res.rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
        meta = {k: v for k, v in env.items() if k != "rows"}
        return buf.getvalue(), json.dumps(meta, default=_jsonable) + "\n"
    lines = [f"hypdilog {__version__}  command={cfg.command}  seed={cfg.seed}  "
             f"{'PASS' if res.passed else 'FAIL'}"]
    for k, v in res.summary.items():
        if k == "report":
            lines.append(f"  samples={v['total_samples']}  degenerate_fraction={v['degenerate_fraction']:.3g}")
        else:
            lines.append(f"  {k}: {_cell(v)}")
    if res.rows:
        table = [cols] + [[_cell(r.get(c, "")) for c in cols] for r in res.rows]
        widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
        for row in table:
            lines.append("  ".join(s.rjust(w) for s, w in zip(row, widths)))
    return "\n".join(lines) + "\n", ""


def main(argv: Sequence[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = make_config(ns)
        res = COMMANDS[cfg.command](cfg)
    except (UsageError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, InconclusiveError, BudgetError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    out, diag = render(cfg, res)
    if diag:
        sys.stderr.write(diag)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0 if res.passed else 1


if __name__ == "__main__":
    sys.exit(main())
