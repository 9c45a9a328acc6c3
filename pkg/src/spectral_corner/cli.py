"""Command-line interface: deterministic artifacts for every pipeline stage.

Every artifact embeds the tool version and a SHA-256 hash of the fully
resolved input configuration (including the domain document), carries an
error field next to every reported number, and is byte-identical across
runs with the same configuration and seed.  Exit codes: 0 success, 2
invalid specification, 3 numerical failure (the failing stage is named in
the machine-readable error JSON on stderr).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class RunConfig:
    """Fully resolved invocation: one command plus every knob it reads."""

    command: str
    domain: Optional[str] = None
    sigma: Optional[str] = None
    u: float = 0.0
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    t_points: int = 25
    grid_h: float = 1 / 64
    eigs: int = 400
    seed: int = 0
    tol: Optional[float] = None
    out: Optional[str] = None
    format: str = "json"
    # per-command extras (wedge / mc / zeta)
    alpha: Optional[list] = None
    eps: list = field(default_factory=lambda: [1.0])
    t: list = field(default_factory=lambda: [0.1])
    samples: int = 100000
    steps: int = 64
    s: list = field(default_factory=lambda: [2.0])

    def __post_init__(self):
        from .errors import SpecError

        if self.command not in _COMMANDS:
            raise SpecError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise SpecError(f"output format must be csv or json, got {self.format!r}")
        for name in ("tol", "t_min", "t_max", "grid_h"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise SpecError(f"--{name.replace('_', '-')} must be positive")


def _apply_thread_cap() -> None:
    cap = os.environ.get("SPECTRAL_CORNER_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _input_hash(config: dict) -> str:
    return hashlib.sha256(_canonical(config).encode()).hexdigest()


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _emit(artifact: dict, rows, headers, args) -> None:
    if args.format == "json":
        text = json.dumps(artifact, sort_keys=True, indent=2,
                          default=_json_default) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# version", artifact["version"]])
        w.writerow(["# input_hash", artifact["input_hash"]])
        w.writerow(headers)
        for row in rows:
            w.writerow([_cell(v) for v in row])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_domain_doc(args):
    from .errors import SpecError
    from .fields import as_field
    from .geometry import load_domain

    if not args.domain:
        raise SpecError("--domain is required for this command")
    with open(args.domain) as fh:
        doc = json.load(fh)
    domain, sigma = load_domain(doc)
    if args.sigma is not None:
        sigma = as_field(args.sigma)
    return doc, domain, sigma


def _spectrum_for(domain, sigma, args):
    """Analytic spectrum where a closed form exists, else FDM + Richardson."""
    from .geometry import MetricSpec
    from .spectrum import analytic_spectrum, richardson_spectrum

    metric = MetricSpec(sigma, args.u)
    flat = sigma.is_zero() or args.u == 0.0
    if flat and domain.kind in ("rectangle", "disk", "sector"):
        return analytic_spectrum(domain, args.eigs)
    return richardson_spectrum(domain, metric, args.grid_h, args.eigs,
                               seed=args.seed)


def _t_grid(args, spec):
    import numpy as np

    from .heattrace import default_window

    if args.t_min is not None and args.t_max is not None:
        return np.geomspace(args.t_min, args.t_max, args.t_points)
    return default_window(spec, points=args.t_points)


def _cmd_spectrum(args, config):
    doc, domain, sigma = _load_domain_doc(args)
    config["domain_doc"] = doc
    spec = _spectrum_for(domain, sigma, args)
    lam = spec.eigenvalues.tolist()
    artifact = {
        "result": {
            "eigenvalues": lam,
            "count": len(lam),
            "completeness": spec.completeness,
            "volume": spec.volume,
            "error": {"eigenvalues_complete_below": spec.completeness},
            "provenance": spec.provenance,
        }
    }
    rows = [(i + 1, v, spec.completeness) for i, v in enumerate(lam)]
    return artifact, rows, ["index", "eigenvalue", "complete_below"]


def _cmd_trace(args, config):
    doc, domain, sigma = _load_domain_doc(args)
    config["domain_doc"] = doc
    from .heattrace import trace_curve

    spec = _spectrum_for(domain, sigma, args)
    curve = trace_curve(spec, _t_grid(args, spec))
    artifact = {
        "result": {
            "t": curve.t.tolist(),
            "trace": curve.values.tolist(),
            "error": curve.errors.tolist(),
            "source": curve.source,
        }
    }
    rows = list(zip(curve.t.tolist(), curve.values.tolist(), curve.errors.tolist()))
    return artifact, rows, ["t", "trace", "error"]


def _cmd_fit(args, config):
    doc, domain, sigma = _load_domain_doc(args)
    config["domain_doc"] = doc
    from .heattrace import fit_expansion, trace_curve

    spec = _spectrum_for(domain, sigma, args)
    curve = trace_curve(spec, _t_grid(args, spec))
    fit = fit_expansion(curve, "fit-all", seed=args.seed)
    half = {k: 0.5 * (v[1] - v[0]) for k, v in fit.confidence.items()}
    artifact = {
        "result": {
            "a_m1": fit.a_m1,
            "a_mhalf": fit.a_mhalf,
            "a_0": fit.a_0,
            "error": {"a_m1": half.get("1/t"), "a_mhalf": half.get("1/sqrt(t)"),
                      "a_0": half.get("1")},
            "remainder": fit.remainder,
            "window": list(fit.window),
            "residual_norm": fit.residual_norm,
        }
    }
    rows = [("a_m1", fit.a_m1, half.get("1/t")),
            ("a_mhalf", fit.a_mhalf, half.get("1/sqrt(t)")),
            ("a_0", fit.a_0, half.get("1"))]
    return artifact, rows, ["coefficient", "value", "error"]


def _cmd_compare(args, config):
    doc, domain, sigma = _load_domain_doc(args)
    config["domain_doc"] = doc
    from .geometry import MetricSpec
    from .heattrace import compare_expansion, trace_curve

    spec = _spectrum_for(domain, sigma, args)
    curve = trace_curve(spec, _t_grid(args, spec))
    tolerances = {"a_m1": args.tol, "a_mhalf": args.tol, "a_0": args.tol} \
        if args.tol else None
    report = compare_expansion(domain, MetricSpec(sigma, args.u), None, curve,
                               tolerances)
    artifact = {"result": report}
    rows = [(name, r["predicted"], r["fitted"], r["abs_gap"], r["tolerance"],
             r["pass"]) for name, r in report["rows"].items()]
    return artifact, rows, ["coefficient", "predicted", "fitted", "abs_gap",
                            "tolerance", "pass"]


def _zeta_pipeline(args, config):
    doc, domain, sigma = _load_domain_doc(args)
    config["domain_doc"] = doc
    from .geometry import MetricSpec, geometric_coefficients
    from .zeta import provider_for

    spec = _spectrum_for(domain, sigma, args)
    provider = provider_for(spec)
    coeffs = geometric_coefficients(domain, MetricSpec(sigma, args.u))
    return spec, provider, coeffs


def _cmd_zeta(args, config):
    from .zeta import zeta_continued, zeta_series

    spec, provider, coeffs = _zeta_pipeline(args, config)
    rows = []
    for s in args.s:
        if provider.t_min == 0.0:
            val = zeta_continued(provider, coeffs, s)
            err = 1e-12
            route = "continued"
        else:
            val = zeta_series(spec, s, tol=args.tol or 1e-8)
            err = args.tol or 1e-8
            route = "series"
        rows.append((s, val, err, route))
    artifact = {"result": {"values": [
        {"s": s, "zeta": v, "error": e, "route": r} for s, v, e, r in rows]}}
    return artifact, rows, ["s", "zeta", "error", "route"]


def _cmd_zdet(args, config):
    from .zeta import zeta_prime_at_zero

    spec, provider, coeffs = _zeta_pipeline(args, config)
    ev = zeta_prime_at_zero(provider, coeffs, tol=args.tol or 1e-6)
    artifact = {"result": {
        "zeta0": ev.zeta0,
        "zeta_prime0": ev.zeta_prime0,
        "zdet": ev.zdet,
        "log_zdet": -ev.zeta_prime0,
        "error": ev.error_budget,
        "details": ev.details,
    }}
    rows = [("zeta0", ev.zeta0, 0.0),
            ("zeta_prime0", ev.zeta_prime0, ev.error_budget["total"]),
            ("zdet", ev.zdet, ev.zdet * ev.error_budget["total"])]
    return artifact, rows, ["quantity", "value", "error"]


def _cmd_anomaly(args, config):
    doc, domain, sigma = _load_domain_doc(args)
    config["domain_doc"] = doc
    from .anomaly import PipelineConfig, pa_verify

    cfg = PipelineConfig(h=args.grid_h, eigs=args.eigs, seed=args.seed)
    if args.tol:
        cfg.tolerance = args.tol
    report = pa_verify(domain, sigma, cfg)
    artifact = {"result": report.to_json_dict()}
    rows = [("lhs", report.lhs), ("rhs", report.rhs), ("gap", report.gap)] + \
        sorted(report.breakdown.items())
    return artifact, rows, ["term", "value"]


def _cmd_wedge(args, config):
    from .wedge import WedgeBallQuery, a_remainder, a_remainder_bound, \
        wedge_ball_trace

    rows = []
    for alpha in args.alpha:
        for eps in args.eps:
            for t in args.t:
                q = WedgeBallQuery(alpha, eps, t)
                a_val = a_remainder(q)
                bound = a_remainder_bound(q)
                rows.append((alpha, eps, t, wedge_ball_trace(q), a_val, bound,
                             abs(a_val) <= bound))
    artifact = {"result": {"rows": [
        {"alpha": r[0], "eps": r[1], "t": r[2], "trace": r[3],
         "a_remainder": r[4], "bound": r[5], "pass": r[6],
         "error": {"trace": 1e-12}} for r in rows]}}
    return artifact, rows, ["alpha", "eps", "t", "trace", "a_remainder",
                            "bound", "pass"]


def _cmd_mc(args, config):
    doc, domain, sigma = _load_domain_doc(args)
    config["domain_doc"] = doc
    from .walker import bridge_trace_estimate

    rows = []
    for t in args.t:
        est = bridge_trace_estimate(domain, t, args.samples, steps=args.steps,
                                    seed=args.seed)
        rows.append((t, est.estimate, est.stderr, est.n, est.steps, est.seed))
    artifact = {"result": {"rows": [
        {"t": r[0], "estimate": r[1], "error": r[2], "n": r[3],
         "steps": r[4], "seed": r[5]} for r in rows]}}
    return artifact, rows, ["t", "estimate", "stderr", "n", "steps", "seed"]


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "trace": _cmd_trace,
    "fit": _cmd_fit,
    "compare": _cmd_compare,
    "zeta": _cmd_zeta,
    "zdet": _cmd_zdet,
    "anomaly": _cmd_anomaly,
    "wedge": _cmd_wedge,
    "mc": _cmd_mc,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spectral-corner",
        description="Heat traces, zeta determinants, and conformal anomalies "
                    "on polygonal domains with corners and slits.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--domain", help="path to a domain JSON document")
        sp.add_argument("--sigma", help="conformal factor expression in x, y")
        sp.add_argument("--u", type=float, default=0.0)
        sp.add_argument("--t-min", type=float, dest="t_min")
        sp.add_argument("--t-max", type=float, dest="t_max")
        sp.add_argument("--t-points", type=int, default=25, dest="t_points")
        sp.add_argument("--grid-h", type=float, default=1 / 64, dest="grid_h")
        sp.add_argument("--eigs", type=int, default=400)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("csv", "json"), default="json")
        if name == "wedge":
            sp.add_argument("--alpha", type=float, nargs="+", required=True)
            sp.add_argument("--eps", type=float, nargs="+", default=[1.0])
            sp.add_argument("--t", type=float, nargs="+", default=[0.1])
        elif name == "mc":
            sp.add_argument("--t", type=float, nargs="+", default=[0.1])
            sp.add_argument("--samples", type=int, default=100000)
            sp.add_argument("--steps", type=int, default=64)
        elif name == "zeta":
            sp.add_argument("--s", type=float, nargs="+", default=[2.0])
    return p


def run(config: RunConfig) -> int:
    """Execute one command; write artifacts; return the process exit code."""
    _apply_thread_cap()
    from . import __version__
    from .errors import NumericalError, SpecError

    hashed = {k: v for k, v in sorted(dataclasses.asdict(config).items())
              if k not in ("out",) and v is not None}
    try:
        artifact, rows, headers = _COMMANDS[config.command](config, hashed)
    except SpecError as exc:
        sys.stderr.write(json.dumps(
            {"error": {"kind": "spec", "message": str(exc)}}) + "\n")
        return 2
    except NumericalError as exc:
        sys.stderr.write(json.dumps(
            {"error": {"kind": "numerical", "stage": exc.stage,
                       "message": str(exc)}}) + "\n")
        return 3
    except FileNotFoundError as exc:
        sys.stderr.write(json.dumps(
            {"error": {"kind": "spec", "message": str(exc)}}) + "\n")
        return 2
    artifact["version"] = __version__
    artifact["command"] = config.command
    artifact["input_hash"] = _input_hash(hashed)
    _emit(artifact, rows, headers, config)
    return 0


def main(argv=None) -> int:
    from .errors import SpecError

    args = build_parser().parse_args(argv)
    names = {f.name for f in dataclasses.fields(RunConfig)}
    try:
        config = RunConfig(**{k: v for k, v in vars(args).items() if k in names})
    except SpecError as exc:
        sys.stderr.write(json.dumps(
            {"error": {"kind": "spec", "message": str(exc)}}) + "\n")
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
