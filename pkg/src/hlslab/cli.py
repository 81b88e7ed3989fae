"""Command-line front door: profile I/O, report emission, subcommand dispatch.

Subcommands: constants, certify-scalar, deficit, project, local-check, flow,
quotient-sweep, duality-check.  Exit codes: 0 = success/certified, 1 =
violations or assertion failures found, 2 = invalid input.  Reports embed the
full parameter pack, the seed, and the tool version; identical configurations
reproduce byte-identical output.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import constants as consts_mod
from . import duality, extremizers, flows, local_stability, scalar, sphere
from ._util import __version__, make_rng, to_json, worker_cap
from .constants import ParameterDomainError, ProblemParams

__all__ = ["main", "parse_and_dispatch", "load_profile", "emit_report", "RunConfig"]


class ProfileError(ValueError):
    """Schema violations in a profile file, itemized by field."""


@dataclass
class RunConfig:
    """Validated invocation record embedded in every report."""

    command: str
    options: dict = field(default_factory=dict)


def load_profile(path):
    """Load a JSON profile: zonal-coeffs, zonal-nodal, or radial.

    Returns (kind, payload): a ZonalFunction for the zonal kinds, a dict with
    the radial interpolant and grid for "radial".
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ProfileError(f"cannot read profile {path}: {exc}") from exc
    problems = []
    kind = doc.get("kind")
    if kind not in ("zonal-coeffs", "zonal-nodal", "radial"):
        problems.append(f"kind: expected zonal-coeffs|zonal-nodal|radial, got {kind!r}")
    for key in ("n", "s", "data"):
        if key not in doc:
            problems.append(f"{key}: missing")
    if problems:
        raise ProfileError("; ".join(problems))
    try:
        n, s = int(doc["n"]), float(doc["s"])
        data = np.asarray(doc["data"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProfileError(f"data/n/s: {exc}") from exc
    if data.ndim != 1 or data.size == 0:
        raise ProfileError("data: expected a nonempty flat array")
    if kind == "zonal-coeffs":
        L = max(int(doc.get("L", data.size - 1)), data.size - 1)
        ctx = sphere.make_context(n, s, L=L, Q=int(doc.get("Q", max(4 * L, 128))))
        return kind, sphere.ZonalFunction(ctx, coeffs=data)
    if kind == "zonal-nodal":
        Q = data.size
        L = int(doc.get("L", min(48, Q - 1)))
        ctx = sphere.make_context(n, s, L=L, Q=Q)
        return kind, sphere.ZonalFunction(ctx, values=data)
    rho = doc.get("rho")
    if rho is None:
        raise ProfileError("rho: required for radial profiles")
    rho = np.asarray(rho, dtype=float)
    if rho.shape != data.shape:
        raise ProfileError("rho: must match data length")
    if np.any(np.diff(rho) <= 0) or np.any(rho <= 0):
        raise ProfileError("rho: must be positive and strictly increasing")
    lam, vals = np.log(rho), data
    p_exp = float(doc.get("p_exp", ProblemParams(n, s).p))

    def profile(r):
        return np.interp(np.log(np.maximum(np.asarray(r, dtype=float), 1e-300)),
                         lam, vals, left=vals[0], right=0.0)

    return kind, {"n": n, "s": s, "p_exp": p_exp, "profile": profile,
                  "rho": rho, "data": data}


def emit_report(report, config: RunConfig, path=None, fmt="json", seed=None):
    """Serialize a report (JSON with meta, or CSV rows) to a file or stdout."""
    if fmt == "json":
        text = to_json(report, version=__version__, config=config,
                       seed=seed, workers=worker_cap())
    elif fmt == "csv":
        header, rows = report
        lines = [f"# hlslab {__version__} {config.command} "
                 + " ".join(f"{k}={v}" for k, v in sorted(config.options.items()))]
        lines.append(",".join(header))
        for row in rows:
            lines.append(",".join(repr(x) if isinstance(x, float) else str(x) for x in row))
        text = "\n".join(lines)
    else:
        raise ProfileError(f"unknown report format {fmt!r}")
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return text


def _cmd_constants(args):
    params = ProblemParams(args.n, args.s)
    config = RunConfig("constants", vars(args).copy())
    A = consts_mod.funk_hecke_eigenvalues(params, args.lmax)
    rows = [(l, float(A[l]), consts_mod.multiplicity(args.n, l))
            for l in range(args.lmax + 1)]
    emit_report((["l", "A", "N"], rows), config, fmt="csv",
                path=args.output and args.output + ".csv")
    ts = consts_mod.thresholds(params, args.eps1, args.eps2, K=args.K)
    block = {
        "S": consts_mod.sharp_constant(params),
        "b": consts_mod.comparability_bound(params),
        "delta1": ts.delta1,
        "delta2": ts.delta2,
        "delta0": ts.delta0,
    }
    emit_report(block, config, path=args.output and args.output + ".json")
    return 0


def _cmd_certify_scalar(args):
    config = RunConfig("certify-scalar", vars(args).copy())
    p0, gamma, M, eps = args.p0, args.gamma, args.M, args.eps
    N = scalar.select_N(p0, M, eps)
    sp = scalar.SplitParams(gamma=gamma, M=M, p0=p0, eps=eps, N=N)
    consts = scalar.build_constants(sp)
    grid = scalar.default_grid(r_max=args.rmax, r_points=args.points)
    cubic = scalar.certify_cubic_bound(dict(grid, p_lo=1.0), tolerance=args.tolerance)
    prop = scalar.certify_proposition1(sp, consts, grid, tolerance=args.tolerance)
    qest = scalar.certify_qestimate(sp, consts, grid, tolerance=args.tolerance)
    report = {"N": N, "constants": consts, "cubic": cubic,
              "three_piece": prop, "quadratic_estimate": qest}
    emit_report(report, config, path=args.output)
    return 0 if (cubic.certified and prop.certified and qest.certified) else 1


def _cmd_deficit(args):
    config = RunConfig("deficit", vars(args).copy())
    kind, payload = load_profile(args.input)
    if kind == "radial":
        ctx = sphere.make_context(payload["n"], payload["s"], L=args.L)
        zf = sphere.stereographic_lift(ctx, payload["profile"], payload["p_exp"])
    else:
        zf = payload
    rep = sphere.hls_deficit(zf) if args.side == "hls" else sphere.sobolev_deficit(zf)
    norm, check = sphere.lp_norm_selfcheck(
        zf, zf.ctx.params.p if args.side == "hls" else zf.ctx.params.q)
    emit_report({"report": rep, "norm": norm, "norm_selfcheck": check},
                config, path=args.output)
    return 0


def _cmd_project(args):
    config = RunConfig("project", vars(args).copy())
    kind, payload = load_profile(args.input)
    if kind == "radial":
        ctx = sphere.make_context(payload["n"], payload["s"], L=args.L)
        zf = sphere.stereographic_lift(ctx, payload["profile"], payload["p_exp"])
    else:
        zf = payload
    dec = extremizers.project_Hminus_s(zf, n_starts=args.starts)
    report = {
        "c": dec.phi.c, "tau": dec.phi.tau,
        "hs_distance_sq": dec.hs_distance_sq, "lp_distance": dec.lp_distance,
        "ortho_residuals": list(dec.ortho_residuals),
        "degenerate": dec.degenerate,
        "ties": [list(t) for t in dec.ties],
    }
    emit_report(report, config, path=args.output)
    return 0


def _cmd_local_check(args):
    config = RunConfig("local-check", vars(args).copy())
    params = ProblemParams(args.n, args.s)
    cert = local_stability.make_certificate(params, eps1=args.eps1, eps2=args.eps2,
                                            K=args.K, compute_n0=False)
    ctx = sphere.make_context(args.n, args.s, L=args.L)
    rng = make_rng(args.seed)
    samples = local_stability.random_admissible(ctx, cert, rng, args.count)
    min_ratio, min_i = math.inf, [math.inf] * 3
    violations = []
    worst_summary = math.inf
    for idx, r in enumerate(samples):
        bd = local_stability.deficit_breakdown(r, cert)
        ratio = local_stability.local_stability_ratio(r, cert)
        min_ratio = min(min_ratio, ratio)
        for j, val in enumerate((bd.I1, bd.I2, bd.I3)):
            min_i[j] = min(min_i[j], val)
            if val < -1.0e-10:
                violations.append({"sample": idx, "term": f"I{j+1}", "value": val})
        worst_summary = min(worst_summary, bd.summary_residual())
        if bd.summary_residual() < -1.0e-9:
            violations.append({"sample": idx, "term": "summary", "value": bd.summary_residual()})
    report = {
        "count": len(samples), "min_ratio": min_ratio, "min_I": min_i,
        "worst_summary_residual": worst_summary, "violations": violations,
        "delta0": cert.delta0, "C_qest": cert.C_qest,
    }
    emit_report(report, config, path=args.output, seed=args.seed)
    return 0 if not violations else 1


def _cmd_flow(args):
    config = RunConfig("flow", vars(args).copy())
    kind, payload = load_profile(args.input)
    if kind != "radial":
        raise ProfileError("flow expects a radial profile")
    f = flows.radial_from_callable(payload["n"], payload["p_exp"], payload["profile"])
    trace = flows.competing_iteration(f, args.iters)
    rows = [(k, trace.norms[k], trace.qforms[k], trace.dist_h[k],
             trace.r_norms[k] if trace.r_norms else float("nan"))
            for k in range(len(trace.norms))]
    emit_report((["k", "norm", "qform", "dist_h", "r_norm"], rows),
                config, fmt="csv", path=args.output)
    return 0


def _cmd_quotient_sweep(args):
    config = RunConfig("quotient-sweep", vars(args).copy())
    rows = []
    for n in range(args.nmin, args.nmax + 1, args.step):
        if n <= 2 * args.s:
            continue
        if args.family == "degree2":
            ctx = sphere.make_context(n, args.s, L=16)
            coeffs = np.zeros(ctx.L + 1)
            coeffs[2] = 1.0e-3
            r = sphere.ZonalFunction(ctx, coeffs=coeffs)
            one_plus = sphere.ZonalFunction(ctx, values=1.0 + r.values)
            quot = sphere.hls_deficit(one_plus).deficit / sphere.lp_norm(r, ctx.params.p) ** 2
        else:
            p_exp = ProblemParams(n, args.s).p
            prof = _twobump_profile()
            f = flows.radial_from_callable(n, p_exp, prof)
            ctx = sphere.make_context(n, args.s, L=32, Q=160)
            F = flows.lift_radial_iterate(f, ctx)
            dec = extremizers.project_Hminus_s(F)
            quot = sphere.hls_deficit(F).deficit / dec.lp_distance**2
        rows.append((n, quot, n * quot))
    emit_report((["n", "quotient", "n_quotient"], rows), config, fmt="csv",
                path=args.output)
    return 0


def _twobump_profile():
    def prof(rho):
        rho = np.asarray(rho, dtype=float)
        return np.exp(-8.0 * (np.log(rho / 0.2)) ** 2) + np.exp(-8.0 * (np.log(rho / 5.0)) ** 2)

    return prof


def _cmd_duality_check(args):
    config = RunConfig("duality-check", vars(args).copy())
    kind, payload = load_profile(args.input)
    if kind == "radial":
        ctx = sphere.make_context(payload["n"], payload["s"], L=args.L)
        zf = sphere.stereographic_lift(ctx, payload["profile"], payload["p_exp"])
    else:
        zf = payload
    pair = duality.dual_density(zf)
    report = {
        "legendre_residual": duality.legendre_identity_check(pair),
        "transfer_residual": duality.deficit_transfer_check(pair),
        "norm_link_residual": abs(sphere.lp_norm(pair.G, zf.ctx.params.p)
                                  - sphere.lp_norm(pair.F, zf.ctx.params.q)),
    }
    emit_report(report, config, path=args.output)
    ok = max(report["legendre_residual"], report["transfer_residual"]) <= args.tolerance
    return 0 if ok else 1


def build_parser():
    top = argparse.ArgumentParser(prog="hlslab", description=__doc__)
    top.add_argument("--version", action="version", version=f"hlslab {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="sharp constant, multipliers, thresholds")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--s", type=float, required=True)
    c.add_argument("--lmax", type=int, default=8)
    c.add_argument("--eps1", type=float, default=1.0 / 16.0)
    c.add_argument("--eps2", type=float, default=1.0 / 8.0)
    c.add_argument("--K", type=int, default=1)
    c.add_argument("--output", default=None, help="prefix for .csv/.json outputs")
    c.set_defaults(fn=_cmd_constants)

    c = sub.add_parser("certify-scalar", help="brute-force scalar inequality certification")
    c.add_argument("--p0", type=float, default=7.0 / 4.0)
    c.add_argument("--gamma", type=float, default=1.0 / 32.0)
    c.add_argument("--M", type=float, default=1.0)
    c.add_argument("--eps", type=float, default=1.0 / 8.0)
    c.add_argument("--rmax", type=float, default=1.0e3)
    c.add_argument("--points", type=int, default=100_000)
    c.add_argument("--tolerance", type=float, default=1.0e-10)
    c.add_argument("--output", default=None)
    c.set_defaults(fn=_cmd_certify_scalar)

    c = sub.add_parser("deficit", help="HLS or Sobolev deficit of a profile")
    c.add_argument("--input", required=True)
    c.add_argument("--side", choices=("hls", "sobolev"), default="hls")
    c.add_argument("--L", type=int, default=48)
    c.add_argument("--output", default=None)
    c.set_defaults(fn=_cmd_deficit)

    c = sub.add_parser("project", help="H^{-s} projection onto the extremizer slice")
    c.add_argument("--input", required=True)
    c.add_argument("--starts", type=int, default=9)
    c.add_argument("--L", type=int, default=48)
    c.add_argument("--output", default=None)
    c.set_defaults(fn=_cmd_project)

    c = sub.add_parser("local-check", help="sampled certificate nonnegativity")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--s", type=float, required=True)
    c.add_argument("--count", type=int, default=50)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--eps1", type=float, default=1.0 / 16.0)
    c.add_argument("--eps2", type=float, default=1.0 / 8.0)
    c.add_argument("--K", type=int, default=1)
    c.add_argument("--L", type=int, default=24)
    c.add_argument("--output", default=None)
    c.set_defaults(fn=_cmd_local_check)

    c = sub.add_parser("flow", help="competing-symmetries iteration trace")
    c.add_argument("--input", required=True)
    c.add_argument("--iters", type=int, default=40)
    c.add_argument("--output", default=None)
    c.set_defaults(fn=_cmd_flow)

    c = sub.add_parser("quotient-sweep", help="deficit quotient across dimensions")
    c.add_argument("--s", type=float, required=True)
    c.add_argument("--nmin", type=int, required=True)
    c.add_argument("--nmax", type=int, required=True)
    c.add_argument("--step", type=int, default=10)
    c.add_argument("--family", choices=("twobump", "degree2"), default="degree2")
    c.add_argument("--output", default=None)
    c.set_defaults(fn=_cmd_quotient_sweep)

    c = sub.add_parser("duality-check", help="Legendre/deficit-transfer residuals")
    c.add_argument("--input", required=True)
    c.add_argument("--L", type=int, default=48)
    c.add_argument("--tolerance", type=float, default=1.0e-9)
    c.add_argument("--output", default=None)
    c.set_defaults(fn=_cmd_duality_check)

    return top


def parse_and_dispatch(argv=None) -> int:
    """Parse argv and run the subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except (ParameterDomainError, ProfileError, OverflowError) as exc:
        print(f"hlslab: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
