"""Unified command-line entry point.

Subcommands: curvature, hadamard, elem, contour-check, residues,
spectral-action, ultrastatic-fit, flow, accept.  Results are emitted as JSON
artifacts (schema "lspec/1", numbers serialized as decimal strings with 17
significant digits so artifacts are byte-identical across platforms) and
RFC-4180 CSV with a mandatory header row.  Exit status: 0 all requested
checks pass, 1 computation error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from . import acceptance
from . import elemfam as ef
from . import geomkit as gk
from . import hadamard as hd
from . import scflow as sf
from . import specpowers as sp
from . import ultrastatic as us
from . import contour as ct
from .errors import ConfigError, LspecError

KNOWN_KEYS = {
    "command", "metric", "point", "order", "n", "alpha", "z", "q", "eps",
    "mass", "profile", "lambda", "lambda_grid", "samples", "seed", "threads",
    "out", "csv", "suite", "k", "model", "tolerance",
}


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _jsonable(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, complex):
        return {"re": _fmt(obj.real), "im": _fmt(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    return obj


def emit_json(payload: dict, path: str | None):
    doc = {"schema": "lspec/1", **_jsonable(payload)}
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def emit_csv(header, rows, path: str | None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    if path:
        with open(path, "w", newline="") as f:
            f.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def parse_complex(s: str) -> complex:
    return complex(s.replace("i", "j").replace(" ", ""))


def parse_point(s: str) -> np.ndarray:
    return np.array([float(v) for v in s.split(",")])


def parse_profile(s: str) -> sp.SchwartzProfile:
    parts = s.split(":")
    if parts[0] != "bump":
        raise ConfigError(f"unknown profile family {parts[0]!r} (expected bump:center:halfwidth)")
    center = float(parts[1]) if len(parts) > 1 else 1.5
    hwid = float(parts[2]) if len(parts) > 2 else 0.5
    amp = float(parts[3]) if len(parts) > 3 else 1.0
    return sp.SchwartzProfile(center, hwid, amp)


def parse_model(s: str):
    parts = s.split(":")
    if parts[0] not in ("sphere", "torus"):
        raise ConfigError(f"unknown spectral model kind {parts[0]!r}")
    d = int(parts[1]) if len(parts) > 1 else 3
    param = float(parts[2]) if len(parts) > 2 else (1.0 if parts[0] == "sphere" else 2 * np.pi)
    return parts[0], d, param


def parse_lambda_grid(s: str):
    parts = [float(v) for v in s.split(":")]
    if len(parts) == 1:
        return [parts[0]]
    lo, hi = parts[0], parts[1]
    count = int(parts[2]) if len(parts) > 2 else 6
    return list(np.linspace(lo, hi, count))


def load_config_file(path: str) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path}")
    out = {}
    for section in cp.sections():
        for key, val in cp.items(section):
            if key not in KNOWN_KEYS:
                raise ConfigError(f"unknown config key {key!r} in [{section}]")
            out[key] = val
    return out


def default_point(metric_name: str) -> np.ndarray:
    for name, pt in gk.BUILTIN_BASEPOINTS.items():
        if metric_name.startswith(name):
            return pt.copy()
    return np.zeros(4)


# ---------------------------------------------------------------------------
# subcommand implementations


def cmd_curvature(args, cfg):
    metric = gk.load_metric(args.metric)
    point = parse_point(args.point) if args.point else default_point(args.metric)
    cp = gk.curvature(metric, point)
    emit_json(
        {
            "command": "curvature",
            "config": cfg,
            "scalar": cp.scalar,
            "ricci": cp.ricci,
            "riemann": cp.riemann,
        },
        args.out,
    )
    return 0


def cmd_hadamard(args, cfg):
    metric = gk.load_metric(args.metric)
    point = parse_point(args.point) if args.point else default_point(args.metric)
    chart = gk.normal_chart(metric, point, seed=args.seed)
    seq = hd.hadamard_sequence(chart, args.order)
    residuals = [float(hd.transport_residual(seq, k).max()) for k in range(1, args.order + 1)]
    emit_json(
        {
            "command": "hadamard",
            "config": cfg,
            "diag": list(seq.diag),
            "residuals": residuals,
            "chart_radius": chart.radius,
        },
        args.out,
    )
    if args.csv:
        tab = seq.tables[args.order]
        rows = [
            (float(r), *[float(tab.values[d, i]) for d in range(min(4, len(tab.directions)))])
            for i, r in enumerate(tab.radii)
        ]
        emit_csv(
            ["radius"] + [f"u{args.order}_ray{d}" for d in range(min(4, len(tab.directions)))],
            rows,
            args.csv,
        )
    return 0


def cmd_elem(args, cfg):
    alpha = parse_complex(args.alpha)
    z = parse_complex(args.z)
    q = float(args.q)
    val = ef.fa_value(alpha, z, q, args.n)
    payload = {
        "command": "elem",
        "config": cfg,
        "value": val.value,
        "pole_distance": val.pole_distance,
    }
    if q == 0.0:
        from scipy.special import gamma as cgamma

        try:
            # warm-up split-series oracle through the Wick factor
            series = ef.euclid_series_oracle(alpha + 1, z, args.n)
            cross = 1j * cgamma(alpha + 1) / (2 * np.pi) ** args.n * series
            payload["oracle_delta"] = abs(val.value - cross)
        except Exception:
            payload["oracle_delta"] = None
    else:
        out = ef.pde_check(alpha, z, args.n, parse_point(args.point)[None, :]) if args.point else None
        if out:
            payload["pde_residual"] = out["relative_pde_residual"]
    emit_json(payload, args.out)
    return 0


def cmd_contour_check(args, cfg):
    alphas = [float(v) for v in args.alpha.split(",")]
    ks = [int(v) for v in args.k.split(",")]
    epss = [float(v) for v in args.eps.split(",")]
    q = float(args.q)
    rows = []
    worst = 0.0
    for a in alphas:
        for k in ks:
            for e in epss:
                rel = ct.power_identity_check(a, k, e, q)
                worst = max(worst, rel)
                rows.append((a, k, e, q, rel))
    emit_csv(["alpha", "k", "eps", "q", "rel_error"], rows, args.csv or args.out)
    return 0 if worst <= float(args.tolerance) else 1


def cmd_residues(args, cfg):
    metric = gk.load_metric(args.metric)
    point = parse_point(args.point) if args.point else default_point(args.metric)
    chart = gk.normal_chart(metric, point, seed=args.seed)
    seq = hd.hadamard_sequence(chart, min(2, args.order))
    pd = sp.PowerDiagonal(
        n=args.n, mass=args.mass, eps=args.eps, u_diag=tuple(seq.diag), branch=-1
    )
    table = []
    ok = True
    for m in range(args.n // 2):
        a0 = args.n / 2 - m
        analytic = sp.cpower_residue(pd, a0)
        circle = sp.circle_residue(lambda a: sp.cpower_diag(pd, a).analytic_part, a0)
        gap = abs(analytic - circle)
        ok = ok and gap <= 1e-8 * max(1.0, abs(circle))
        table.append(
            {"alpha": a0, "analytic": analytic, "circle": circle, "gap": gap}
        )
    emit_json(
        {"command": "residues", "config": cfg, "u_diag": list(seq.diag), "poles": table},
        args.out,
    )
    return 0 if ok else 1


def cmd_spectral_action(args, cfg):
    profile = parse_profile(args.profile)
    lams = parse_lambda_grid(getattr(args, "lambda_grid"))
    u1, u2 = args.u1, args.u2
    pd = sp.PowerDiagonal(
        n=args.n, mass=args.mass, eps=args.eps, u_diag=(1.0, u1, u2), branch=1
    )
    rows = []
    for lam in lams:
        pred = sp.predicted_expansion(profile, args.n, args.mass, args.eps, u1, u2, lam)
        mel = sp.f_of_operator_diag(pd, profile, lam)
        rows.append((lam, pred.real, pred.imag, mel.real, mel.imag, abs(pred - mel) / abs(mel)))
    emit_csv(
        ["Lambda", "predicted_re", "predicted_im", "mellin_re", "mellin_im", "rel_gap"],
        rows,
        args.csv or args.out,
    )
    return 0


def cmd_ultrastatic_fit(args, cfg):
    kind, d, param = parse_model(args.model)
    profile = parse_profile(args.profile)
    lams = parse_lambda_grid(getattr(args, "lambda_grid"))
    rows = []
    samples = []
    for lam in lams:
        model = us.build_model(kind, param, us.default_lambda_max(lam), d=d)
        kv = us.kernel_diag(model, profile, lam, args.mass, args.eps)
        samples.append((lam, kv.value))
        rows.append((lam, kv.value.real, kv.value.imag, kv.tail_bound))
    emit_csv(["Lambda", "re", "im", "tail_bound"], rows, args.csv)
    coef, resid, cond = us.fit_expansion(samples, d + 1, terms=3)
    c0 = sp.ck_coefficient(profile, d + 1, 0)
    c1 = sp.ck_coefficient(profile, d + 1, 1)
    n = d + 1
    denom = 1j * 2 ** n * np.pi ** (n / 2)
    pred0 = np.exp(1j * n * np.pi / 4) * c0 / denom
    emit_json(
        {
            "command": "ultrastatic-fit",
            "config": cfg,
            "fit": {
                "coefficients": list(coef),
                "residual": resid,
                "condition": cond,
                "leading_predicted": pred0,
                "leading_rel_gap": abs(coef[0] - pred0) / abs(pred0),
            },
        },
        args.out,
    )
    return 0


def cmd_flow(args, cfg):
    metric = gk.load_metric(args.metric)
    report = sf.nontrapping_certificate(metric, args.samples, seed=args.seed)
    emit_json(
        {
            "command": "flow",
            "config": cfg,
            "passed": report.passed,
            "classified": report.classified,
            "samples": report.samples,
            "worst_closest_approach": report.worst_closest,
            "failures": report.failures,
        },
        args.out,
    )
    if args.csv:
        rows = [(i, t) for i, t in enumerate(report.transitions)]
        emit_csv(["sample", "transition"], rows, args.csv)
    return 0 if report.passed else 1


def cmd_accept(args, cfg):
    indices = None
    if args.suite == "fast":
        indices = [1, 2, 4, 5, 6, 7, 8, 12]
    results = acceptance.run_suite(indices=indices)
    emit_json(
        {
            "command": "accept",
            "config": cfg,
            "results": [
                {"index": r.index, "name": r.name, "passed": r.passed, "detail": r.detail,
                 "seconds": r.seconds}
                for r in results
            ],
            "all_passed": all(r.passed for r in results),
        },
        args.out,
    )
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="lspec", description=__doc__)
    p.add_argument("--version", action="version", version=f"lspec {__version__}")
    p.add_argument("--config", help="INI config file; command-line flags override it")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_):
        sp_.add_argument("--out", help="write the JSON artifact here instead of stdout")
        sp_.add_argument("--seed", type=int, default=0)
        sp_.add_argument("--threads", type=int,
                         default=int(os.environ.get("LSPEC_THREADS", "0")) or None)

    c = sub.add_parser("curvature")
    c.add_argument("--metric", default="minkowski")
    c.add_argument("--point")
    common(c)

    h = sub.add_parser("hadamard")
    h.add_argument("--metric", default="ultrastatic-sphere")
    h.add_argument("--point")
    h.add_argument("--order", type=int, default=1)
    h.add_argument("--csv")
    common(h)

    e = sub.add_parser("elem")
    e.add_argument("--n", type=int, default=4)
    e.add_argument("--alpha", required=True)
    e.add_argument("--z", required=True)
    e.add_argument("--q", default="0")
    e.add_argument("--point")
    common(e)

    cc = sub.add_parser("contour-check")
    cc.add_argument("--alpha", default="1.5,2.3,3.7")
    cc.add_argument("--k", default="0,1,2")
    cc.add_argument("--eps", default="0.1,1")
    cc.add_argument("--q", default="2.0")
    cc.add_argument("--tolerance", default="1e-6")
    cc.add_argument("--csv")
    common(cc)

    r = sub.add_parser("residues")
    r.add_argument("--metric", default="ultrastatic-sphere")
    r.add_argument("--point")
    r.add_argument("--n", type=int, default=4)
    r.add_argument("--eps", type=float, default=1e-2)
    r.add_argument("--mass", type=float, default=0.0)
    r.add_argument("--order", type=int, default=2)
    common(r)

    sa = sub.add_parser("spectral-action")
    sa.add_argument("--profile", default="bump:1.5:0.5")
    sa.add_argument("--Lambda-grid", dest="lambda_grid", default="10:60:6")
    sa.add_argument("--n", type=int, default=4)
    sa.add_argument("--mass", type=float, default=0.0)
    sa.add_argument("--eps", type=float, default=1e-2)
    sa.add_argument("--u1", type=float, default=0.0)
    sa.add_argument("--u2", type=float, default=0.0)
    sa.add_argument("--csv")
    common(sa)

    uf = sub.add_parser("ultrastatic-fit")
    uf.add_argument("--model", default="sphere:3:1")
    uf.add_argument("--profile", default="bump:1.5:0.5")
    uf.add_argument("--mass", type=float, default=0.0)
    uf.add_argument("--eps", type=float, default=1e-2)
    uf.add_argument("--Lambda", dest="lambda_grid", default="10:60:6")
    uf.add_argument("--csv")
    common(uf)

    fl = sub.add_parser("flow")
    fl.add_argument("--metric", default="minkowski")
    fl.add_argument("--samples", type=int, default=100)
    fl.add_argument("--csv")
    common(fl)

    ac = sub.add_parser("accept")
    ac.add_argument("--suite", choices=["full", "fast"], default="full")
    common(ac)
    return p


COMMANDS = {
    "curvature": cmd_curvature,
    "hadamard": cmd_hadamard,
    "elem": cmd_elem,
    "contour-check": cmd_contour_check,
    "residues": cmd_residues,
    "spectral-action": cmd_spectral_action,
    "ultrastatic-fit": cmd_ultrastatic_fit,
    "flow": cmd_flow,
    "accept": cmd_accept,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        # config file values become parser defaults; flags override
        pre, _ = parser.parse_known_args(argv)
        if pre.config:
            file_cfg = load_config_file(pre.config)
            args = parser.parse_args(argv)
            for key, val in file_cfg.items():
                dest = key if key != "lambda" else "lambda_grid"
                if hasattr(args, dest) and f"--{key}" not in (argv or sys.argv[1:]):
                    cur = parser.get_default(dest)
                    if getattr(args, dest) == cur:
                        setattr(args, dest, val)
        else:
            args = parser.parse_args(argv)
    except ConfigError as exc:
        print(json.dumps({"schema": "lspec/1", "error": str(exc), "kind": "config"}))
        return 2
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("config",) and v is not None}
    try:
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(json.dumps({"schema": "lspec/1", "error": str(exc), "kind": "config"}))
        return 2
    except (LspecError, ValueError) as exc:
        print(json.dumps({"schema": "lspec/1", "error": str(exc),
                          "kind": type(exc).__name__}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
