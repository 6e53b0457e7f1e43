"""Command-line frontend.

Exit codes: 0 success, 2 input error, 3 resource/certificate error,
4 hypothesis violation.  Every report embeds the resolved configuration under
``"config"``; ``--config REPORT.json`` re-runs it.
"""
import argparse
import csv
import datetime
import io
import json
import sys
from pathlib import Path

import numpy as np

from .algebra import Metric, bi_invariant_metric, metric_from_onb
from .errors import HypothesisError, InputError, LiespecError
from .groups import PRESET_NAMES, group_from_json, load_group, preset
from .isolation import (
    frobenius_identity_check, isolation_scan, isospectral_search, three_eigenvalue_test, trace_ratio,
)
from .reps import enumerate_irreps
from .spectra import CLUSTER_TOL, MATCH_TOL, eigenvalue_set, spectrum

TIMESTAMP_FIELD = "generated_at"


# --------------------------------------------------------------------------
# config resolution
# --------------------------------------------------------------------------

def _resolve_group(spec):
    if isinstance(spec, dict):
        return group_from_json(spec, "<config>"), spec
    group = load_group(spec)
    return group, (spec if spec in PRESET_NAMES else group.to_json())


def _parse_metric(text):
    """Return ``(matrix or None, basis)`` for a metric specification."""
    if text in (None, "bi-invariant"):
        return None, None
    kind, _, rest = text.partition(":")
    if kind == "diag":
        try:
            vals = [float(x) for x in rest.split(",") if x.strip()]
        except ValueError:
            raise InputError(f"bad diagonal metric {text!r}") from None
        return np.diag(vals), None
    if kind == "gram":
        try:
            return np.array(json.loads(rest), dtype=np.float64), None
        except (json.JSONDecodeError, ValueError, TypeError):
            raise InputError(f"bad inline Gram matrix {text!r}") from None
    if kind == "file":
        path = Path(rest)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InputError(f"metric file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if isinstance(data, dict):
            if "gram" not in data:
                raise InputError(f"{path}: missing field 'gram'")
            return np.array(data["gram"], dtype=np.float64), data.get("basis")
        return np.array(data, dtype=np.float64), None
    raise InputError(f"metric must be bi-invariant, diag:..., gram:[[...]] or file:PATH, got {text!r}")


def _resolve_metrics(group, cfg):
    alg = group.algebra
    g0 = bi_invariant_metric(alg, [cfg["scale"]] * len(alg.simple_ideals))
    M, basis = _parse_metric(cfg.get("metric"))
    if M is None:
        return g0, g0
    basis = basis or cfg.get("basis", "onb")
    if M.shape != (alg.dim, alg.dim):
        raise InputError(f"metric must be {alg.dim}x{alg.dim} for this group, got {M.shape}")
    if basis == "onb":
        return metric_from_onb(M, g0, alg), g0
    if basis == "reference":
        return Metric(M), g0
    raise InputError(f"basis must be 'onb' or 'reference', got {basis!r}")


def _canonical_config(cmd, args, group_spec, g, g0):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out", "config", "command")}
    cfg["command"] = cmd
    cfg["group"] = group_spec
    if cfg.get("metric") not in (None, "bi-invariant"):
        cfg["metric"] = "gram:" + json.dumps([[float(x) for x in row] for row in g.gram])
        cfg["basis"] = "reference"
    return cfg


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _emit(args, cfg, result, csv_text, summary):
    report = {"command": cfg["command"], "config": cfg,
              TIMESTAMP_FIELD: datetime.datetime.now(datetime.timezone.utc).isoformat(),
              "result": result}
    if args.output == "csv":
        text = csv_text
    else:
        text = json.dumps(report, indent=1, sort_keys=True, default=_json_default) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
        return
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(summary)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["%.17g" % x if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _table(values, mults, k=10):
    lines = ["  #  eigenvalue              multiplicity"]
    for i, (v, m) in enumerate(zip(values[:k], mults[:k])):
        lines.append(f"{i:3d}  {v:<22.15g}  {m}")
    if len(values) > k:
        lines.append(f"  ... {len(values) - k} more")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _setup(cmd, args):
    group, spec = _resolve_group(args.group)
    g, g0 = _resolve_metrics(group, vars(args))
    return group, g, g0, _canonical_config(cmd, args, spec, g, g0)


def cmd_spectrum(args):
    group, g, g0, cfg = _setup("spectrum", args)
    spec = spectrum(group, g, g0, args.cutoff)
    es = eigenvalue_set(spec, args.cluster_tol)
    result = {"spectrum": spec.to_json(), "eigenvalue_set": es.to_json()}
    _emit(args, cfg, result, spec.to_csv(), _table(es.values, es.multiplicities, args.show))
    return 0


def cmd_eigenset(args):
    group, g, g0, cfg = _setup("eigenset", args)
    spec = spectrum(group, g, g0, args.cutoff)
    es = eigenvalue_set(spec, args.cluster_tol)
    result = {"eigenvalue_set": es.to_json(), "certificate": spec.to_json()["certificate"]}
    text = _csv(zip([float(v) for v in es.values], [int(m) for m in es.multiplicities]),
                ["value", "multiplicity"])
    _emit(args, cfg, result, text, _table(es.values, es.multiplicities, args.show))
    return 0


def cmd_trace_check(args):
    group, g, g0, cfg = _setup("trace-check", args)
    if args.assert_constant and not group.is_simple:
        raise HypothesisError(
            "--assert-constant needs a simple group: constancy of the trace ratio over all "
            "nontrivial irreps holds only when the Lie algebra is simple")
    cutoff = 1.0
    while True:
        irreps = [ir for ir in enumerate_irreps(group, g0, cutoff) if not ir.label.is_trivial]
        if len(irreps) >= args.irreps:
            break
        cutoff *= 2
    rep = trace_ratio(g, g0, irreps[:args.irreps], group)
    result = {"trace_report": rep.to_json()}
    if group.algebra.simple_ideals:
        result["frobenius"] = frobenius_identity_check(g, g0, group).to_json()
    rows = [(l, t, t0, r) for l, t, t0, r in zip(rep.labels, rep.traces, rep.traces0, rep.ratios)]
    summary = (f"C (predicted) = {rep.predicted_C:.15g}   |A|^2/n = {rep.frobenius_C:.15g}\n"
               f"ratio spread  = {rep.spread:.3e}   volume ratio = {rep.volume_ratio:.15g}\n")
    _emit(args, cfg, result, _csv(rows, ["label", "trace", "trace0", "ratio"]), summary)
    if group.is_simple and not (rep.constant_ok and rep.strict_ok):
        sys.stderr.write("trace ratios are not constant or do not match |A|^2/n\n")
        return 4
    return 0


def cmd_scan(args):
    group, _, g0, cfg = _setup("scan", args)
    rep = isolation_scan(group, g0, args.radius, args.samples, args.level, args.cutoff, args.seed,
                         cluster_tol=args.cluster_tol)
    lines = ["  delta   count  min discrepancy"]
    for row in rep.minima:
        md = "-" if row["min_discrepancy"] is None else f"{row['min_discrepancy']:.6e}"
        lines.append(f"  {row['delta']:<6g}  {row['count']:<5d}  {md}")
    _emit(args, cfg, rep.to_json(), rep.to_csv(), "\n".join(lines) + "\n")
    return 0


def cmd_search(args):
    group, _, g0, cfg = _setup("search", args)
    res = isospectral_search(group, g0, args.level, args.cutoff, args.budget, args.seed, args.exclude,
                             n_starts=args.starts, start_radius=args.start_radius,
                             cluster_tol=args.cluster_tol, history_stride=args.history_stride)
    summary = (f"best discrepancy = {res.best_discrepancy:.6e} at distance {res.best_distance:.6g}\n"
               f"trace ratio C    = {res.trace_C:.15g}   evaluations = {res.evaluations}"
               f"   incomplete = {res.incomplete}\n")
    _emit(args, cfg, res.to_json(), res.to_csv(), summary)
    return 0


def cmd_rigidity(args):
    group, g, g0, cfg = _setup("rigidity", args)
    res = three_eigenvalue_test(group, g0, g, args.cutoff, args.start, args.match_tol, args.cluster_tol)
    d = res.to_json()
    text = _csv([(k, json.dumps(v)) for k, v in d.items()], ["field", "value"])
    summary = f"verdict = {str(res.verdict).lower()}  ({res.reason})\n"
    _emit(args, cfg, d, text, summary)
    return 0


def cmd_presets(args):
    if args.show:
        sys.stdout.write(json.dumps(preset(args.show).to_json(), indent=1) + "\n")
    else:
        for name in PRESET_NAMES:
            g = preset(name)
            alg = g.algebra
            sys.stdout.write(f"{name:9s} dim={alg.dim}  simple ideals={len(alg.simple_ideals)}  "
                             f"center={alg.center_dim}  selection={g.selection}\n")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="liespec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, metric=True):
        sp.add_argument("--group", default="su2", help="preset name or group-definition JSON file")
        sp.add_argument("--scale", type=float, default=1.0,
                        help="bi-invariant reference metric is -scale * Killing form on each simple ideal")
        if metric:
            sp.add_argument("--metric", default="bi-invariant",
                            help="bi-invariant | diag:a,b,... | gram:[[...]] | file:PATH")
            sp.add_argument("--basis", choices=("onb", "reference"), default="onb",
                            help="basis of an explicit Gram: g0-orthonormal (default) or reference")
        sp.add_argument("--cluster-tol", type=float, default=CLUSTER_TOL)
        sp.add_argument("--output", choices=("json", "csv"), default="json")
        sp.add_argument("--out", help="report path ('-' for stdout)")
        sp.add_argument("--config", help="re-run the configuration embedded in a report")

    sp = sub.add_parser("spectrum", help="Laplace spectrum up to a cutoff")
    common(sp)
    sp.add_argument("--cutoff", type=float, default=3.0)
    sp.add_argument("--show", type=int, default=10, help="distinct values to print")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("eigenset", help="distinct eigenvalues up to a cutoff")
    common(sp)
    sp.add_argument("--cutoff", type=float, default=3.0)
    sp.add_argument("--show", type=int, default=10)
    sp.set_defaults(func=cmd_eigenset)

    sp = sub.add_parser("trace-check", help="trace ratios Tr(D_g|V)/Tr(D_0|V) and the Frobenius identity")
    common(sp)
    sp.add_argument("--irreps", type=int, default=5, help="number of nontrivial irreps to test")
    sp.add_argument("--assert-constant", action="store_true")
    sp.set_defaults(func=cmd_trace_check)

    sp = sub.add_parser("scan", help="random isolation scan around g0")
    common(sp, metric=False)
    sp.add_argument("--radius", type=float, default=0.2)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--level", type=int, default=3)
    sp.add_argument("--cutoff", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("search", help="multi-start simplex search for eigenvalue-equivalent competitors")
    common(sp, metric=False)
    sp.add_argument("--level", type=int, default=3)
    sp.add_argument("--cutoff", type=float, default=None)
    sp.add_argument("--exclude", type=float, default=0.05)
    sp.add_argument("--budget", type=int, default=20000)
    sp.add_argument("--starts", type=int, default=8)
    sp.add_argument("--start-radius", type=float, default=0.3)
    sp.add_argument("--history-stride", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("rigidity", help="three-consecutive-eigenvalue test")
    common(sp)
    sp.add_argument("--cutoff", type=float, default=None)
    sp.add_argument("--start", type=int, default=0, help="index of alpha_1 in the eigenvalue set of g0")
    sp.add_argument("--match-tol", type=float, default=MATCH_TOL)
    sp.set_defaults(func=cmd_rigidity)

    sp = sub.add_parser("presets", help="list built-in groups")
    sp.add_argument("--show", choices=PRESET_NAMES, help="print a preset as a group-definition JSON")
    sp.set_defaults(func=cmd_presets)
    return p


def _apply_config(args, parser):
    path = Path(args.config)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    cfg = data.get("config", data)
    if cfg.get("command", args.command) != args.command:
        raise InputError(f"config was produced by '{cfg.get('command')}', not '{args.command}'")
    known = set(vars(args))
    for k, v in cfg.items():
        if k in known and k not in ("out", "output", "config", "func", "command"):
            setattr(args, k, v)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            _apply_config(args, parser)
        return args.func(args)
    except LiespecError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
