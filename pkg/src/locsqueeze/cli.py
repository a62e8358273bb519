"""Command line front end.

Usage: ``locsqueeze [global options] <command> [options]``.  Every command
writes one report (CSV or JSON) to ``--out`` or standard output. Exit codes:
0 success, 1 input error, 2 accuracy error, 3 inconclusive oracle check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InconclusiveError, InputError, LocSqueezeError
from .kinematics import MassShellSample, ModelParams, lp_norm, pauli_jordan, two_point
from .quadrature import QuadratureSpec

CONFIG_KEYS = {"mass", "spatial_dim", "cutoff", "abs_tol", "rel_tol", "max_subdivisions"}


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    quadrature: QuadratureSpec
    seed: int
    output_path: str | None
    format: str
    threads: int


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(f"{self.prog}: {message}")


# ----------------------------------------------------------------- loading
def load_json(path):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"file not found: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON ({exc})") from exc


def load_config(path):
    """``ModelParams`` and ``QuadratureSpec`` from a JSON file (missing keys take defaults)."""
    data = {} if path is None else load_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
    model = ModelParams(float(data.get("mass", 1.0)), int(data.get("spatial_dim", 1)))
    qkw = {k: data[k] for k in ("cutoff", "abs_tol", "rel_tol") if k in data}
    if "max_subdivisions" in data:
        qkw["max_subdivisions"] = int(data["max_subdivisions"])
    return model, QuadratureSpec(**{k: (float(v) if k != "max_subdivisions" else v) for k, v in qkw.items()})


def load_function(path, dim):
    from .testfunctions import load_test_function

    fn = load_test_function(load_json(path))
    if fn.dim != dim:
        raise InputError(f"{path}: test function has dimension {fn.dim}, expected {dim}")
    return fn


def _floats(text, name):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"--{name}: expected a comma separated list of numbers") from exc
    if not vals:
        raise InputError(f"--{name}: empty list")
    return vals


def _grid(text, dim):
    """``lo:hi:n`` for a tensor grid in ``dim`` dimensions."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise InputError("--grid: expected lo:hi:n") from exc
    if n < 2 or not hi > lo:
        raise InputError("--grid: need hi > lo and n >= 2")
    axis = np.linspace(lo, hi, n)
    return np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)


# ----------------------------------------------------------------- output
def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "{:.11e}".format(float(v))
    return str(v)


def render_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def report_schema(command):
    """JSON schema shipped for the report of ``command``."""
    text = resources.files("locsqueeze").joinpath("schemas", f"{command}.json").read_text("utf-8")
    return json.loads(text)


def render_json(payload):
    return json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n"


def emit(cfg: RunConfig, command, payload, header=None, rows=None):
    if cfg.format == "csv" and header is not None:
        text = render_csv(header, rows)
    else:
        text = render_json({"command": command, **payload})
    if cfg.output_path:
        Path(cfg.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------- commands
def cmd_norms(args, cfg: RunConfig):
    model, quad = cfg.model, cfg.quadrature
    f = MassShellSample.from_element(load_function(args.f, model.d), model)
    ps = [math.inf if p.strip() in ("inf", "Inf") else float(p) for p in args.p.split(",")]
    rows = [(p if math.isfinite(p) else "inf", lp_norm(f, p, quad, model)) for p in ps]
    payload = {"norms": [{"p": p, "value": v} for p, v in rows]}
    if args.g:
        g = MassShellSample.from_element(load_function(args.g, model.d), model)
        w = two_point(f, g, quad, model)
        d = pauli_jordan(f, g, quad, model)
        payload.update(two_point=[w.real, w.imag], pauli_jordan=d.real)
    emit(cfg, "norms", payload, ["p", "norm"], rows)


def cmd_squeeze(args, cfg: RunConfig):
    from .squeezing import SqueezeOperator

    model, quad = cfg.model, cfg.quadrature
    h = load_function(args.h, model.d)
    f = MassShellSample.from_element(load_function(args.f, model.d), model)
    op = SqueezeOperator(h, model, quad=quad)
    app = op.plan(f, eps=args.eps, order=args.order)
    Tf = op.apply_T(f, eps=args.eps, order=args.order)
    if model.spatial_dim == 1:
        pts = np.linspace(-args.extent, args.extent, args.points)[:, None]
    else:
        pts = _grid(f"{-args.extent}:{args.extent}:{args.points}", model.spatial_dim)
    plus, minus = Tf.evaluate(pts)
    res, before = (None, None)
    if args.residual:
        from .squeezing import symplectic_residual
        g = MassShellSample.from_element(h, model)
        res, before = symplectic_residual(h, f, g, args.eps, quad, model)
    header = [f"p{i + 1}" for i in range(model.spatial_dim)] + ["plus_re", "plus_im", "minus_re", "minus_im"]
    rows = [list(p) + [a.real, a.imag, b.real, b.imag] for p, a, b in zip(pts, plus, minus)]
    payload = {
        "c_h": op.c_h, "order": app.order, "tail_bound": app.tail_bound, "grid_size": op.grid.size,
        "samples": [dict(zip(header, r)) for r in rows],
        "symplectic_residual": res, "pauli_jordan": None if before is None else before.real,
    }
    emit(cfg, "squeeze", payload, header, rows)


def cmd_bounds(args, cfg: RunConfig):
    from .bounds import bound_K

    model, quad = cfg.model, cfg.quadrature
    f = MassShellSample.from_element(load_function(args.f, model.d), model)
    h = load_function(args.h, model.d)
    rep = bound_K(f, h, quad, model)
    emit(cfg, "bounds", rep.to_dict())


def cmd_canonical(args, cfg: RunConfig):
    from .canonical import CanonicalProfile, cutoff_vev, divergence_verdict, entropy_coefficients
    from .testfunctions import load_test_function

    model = cfg.model
    data = load_json(args.profile)
    if not isinstance(data, dict) or not set(data) <= {"k0", "kphi", "kpi"}:
        raise InputError(f"{args.profile}: expected an object with keys among k0, kphi, kpi")
    parts = {}
    for key, spec in data.items():
        fn = load_test_function(spec)
        if fn.dim != model.spatial_dim:
            raise InputError(f"{args.profile}: {key} must live in {model.spatial_dim} spatial dimensions")
        parts[key] = fn
    profile = CanonicalProfile(**parts)
    pts = _grid(args.grid, model.spatial_dim)
    F1, F2, F3 = entropy_coefficients(profile, pts, model)
    verdict = divergence_verdict(profile, pts, model, tol=args.tol)
    vev = {w: cutoff_vev(w, args.cutoff, model) for w in ("phi2", "pi2", "grad_pi2")}
    excess = F1 * vev["pi2"] + F2 * vev["phi2"] + F3 * vev["grad_pi2"]
    header = [f"x{i + 1}" for i in range(model.spatial_dim)] + ["F1", "F2", "F3", "excess"]
    rows = [list(x) + [a, b, c, e] for x, a, b, c, e in zip(pts, F1, F2, F3, excess)]
    payload = {"verdict": verdict.to_dict(), "cutoff": args.cutoff, "vev": vev,
               "points": [dict(zip(header, r)) for r in rows]}
    emit(cfg, "canonical", payload, header, rows)


def cmd_relent(args, cfg: RunConfig):
    from .relentropy import srel_first_order

    model, quad = cfg.model, cfg.quadrature
    h = load_function(args.h, model.d)
    cutoffs = [c * model.mass for c in _floats(args.cutoffs, "cutoffs")]
    rep = srel_first_order(h, max(cutoffs), quad, model, cutoffs=cutoffs, threads=cfg.threads)
    plus = dict(rep.plus_scan)
    header = ["lambda", "term_plus", "term_minus", "converged_plus", "exponent", "verdict"]
    rows = [(c, plus[c], v, rep.converged_plus, rep.growth_exponent, rep.verdict) for c, v in rep.scan]
    emit(cfg, "relent", rep.to_dict(), header, rows)


def cmd_oracle(args, cfg: RunConfig):
    from . import discrete_oracle as do

    rng = np.random.default_rng(cfg.seed)
    m = do.DiscreteModel.lattice(args.modes, args.spacing, args.nmax, cfg.model.mass)
    if m.spatial_dim != cfg.model.spatial_dim:
        raise InputError("the oracle lattice is one-dimensional; set spatial_dim = 1")
    suites = ["commutator", "bound", "bogoliubov"] if args.suite == "all" else [args.suite]
    out = {"modes": args.modes, "nmax": args.nmax, "seed": cfg.seed, "dimension": m.dimension}
    inconclusive = False
    if "commutator" in suites:
        r1, r2, sym = [], [], []
        for _ in range(args.cases):
            h, g, f = do.random_element(rng, 1), do.random_sample(rng, m), do.random_sample(rng, m)
            r1.append(do.verify_commutator(m, h, g, 1))
            if m.n_max >= 4:
                r2.append(do.verify_commutator(m, h, g, 2))
            sym.append(do.verify_symplectic(m, h, f, g))
        out["commutator"] = {"max_residual": max(r1), "max_residual_order2": max(r2, default=None),
                             "max_symplectic_defect": max(sym), "cases": args.cases}
    if "bound" in suites:
        reps = []
        for _ in range(args.cases):
            h, f = do.random_element(rng, 1), do.random_sample(rng, m)
            reps.append(do.verify_fock_bound(m, f, h).max_ratio)
        out["bound"] = {"max_ratio": max(reps), "ratios": reps}
    if "bogoliubov" in suites:
        s_values = _floats(args.s, "s")
        h, f = do.random_element(rng, 1), do.random_sample(rng, m)
        rep = do.verify_bogoliubov(m, h, f, s_values)
        out["bogoliubov"] = rep.to_dict()
        inconclusive = rep.inconclusive
    emit(cfg, "oracle", out)
    if inconclusive:
        raise InconclusiveError("truncation leakage above threshold; increase --nmax or reduce --s")


def cmd_selftest(args, cfg: RunConfig):
    from .selftest import run_selftest

    results = run_selftest(seed=cfg.seed)
    rows = [(name, ok, value) for name, ok, value in results]
    emit(cfg, "selftest", {"checks": [{"name": n, "passed": ok, "value": v} for n, ok, v in rows],
                           "passed": all(r[1] for r in rows)},
         ["check", "passed", "value"], rows)
    if not all(r[1] for r in rows):
        raise LocSqueezeError("selftest failed")


# ----------------------------------------------------------------- parser
def build_parser():
    def globals_parser(suppress):
        g = argparse.ArgumentParser(add_help=False)
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g.add_argument("--config", default=d(None), help="JSON file with model and quadrature settings")
        g.add_argument("--seed", type=int, default=d(0))
        g.add_argument("--threads", type=int, default=d(1))
        g.add_argument("--out", default=d(None), help="output file (default: standard output)")
        g.add_argument("--format", choices=["csv", "json"], default=d(None))
        return g

    # the copy attached to subcommands leaves values given before the command intact
    common = globals_parser(True)
    p = _Parser(prog="locsqueeze", description="Local squeezing of a free scalar field.",
                parents=[globals_parser(False)])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("norms", parents=[common], help="L^p norms of shell data")
    s.add_argument("--f", required=True)
    s.add_argument("--g")
    s.add_argument("--p", default="1,2,inf")
    s.set_defaults(func=cmd_norms, default_format="csv")

    s = sub.add_parser("squeeze", parents=[common], help="Bogoliubov-transformed shell data")
    s.add_argument("--h", required=True)
    s.add_argument("--f", required=True)
    s.add_argument("--order", type=int)
    s.add_argument("--eps", type=float, default=1e-10)
    s.add_argument("--points", type=int, default=41)
    s.add_argument("--extent", type=float, default=4.0)
    s.add_argument("--residual", action="store_true", help="also report the symplectic residual")
    s.add_argument("--report", choices=["csv", "json"], help="alias of --format")
    s.set_defaults(func=cmd_squeeze, default_format="csv")

    s = sub.add_parser("bounds", parents=[common], help="fixed-particle bound constants")
    s.add_argument("--f", required=True)
    s.add_argument("--h", required=True)
    s.set_defaults(func=cmd_bounds, default_format="json")

    s = sub.add_parser("canonical", parents=[common], help="time-zero squeezing coefficients")
    s.add_argument("--profile", required=True)
    s.add_argument("--grid", default="-4:4:81")
    s.add_argument("--cutoff", type=float, default=100.0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_canonical, default_format="csv")

    s = sub.add_parser("relent", parents=[common], help="first-order wedge relative entropy")
    s.add_argument("--h", required=True)
    s.add_argument("--cutoffs", default="10,20,40,80", help="multiples of the mass")
    s.set_defaults(func=cmd_relent, default_format="csv")

    s = sub.add_parser("oracle", parents=[common], help="finite-mode Fock checks")
    s.add_argument("--modes", type=int, default=3)
    s.add_argument("--nmax", type=int, default=8)
    s.add_argument("--spacing", type=float, default=0.7)
    s.add_argument("--suite", choices=["commutator", "bound", "bogoliubov", "all"], default="all")
    s.add_argument("--cases", type=int, default=5)
    s.add_argument("--s", default="0.1,0.3")
    s.set_defaults(func=cmd_oracle, default_format="json")

    s = sub.add_parser("selftest", parents=[common], help="quick invariant suite")
    s.set_defaults(func=cmd_selftest, default_format="csv")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        model, quad = load_config(args.config)
        fmt = getattr(args, "report", None) or args.format or args.default_format
        if args.threads < 1:
            raise InputError("--threads must be >= 1")
        cfg = RunConfig(model, quad, args.seed, args.out, fmt, args.threads)
        args.func(args, cfg)
    except LocSqueezeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
