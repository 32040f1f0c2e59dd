"""Command-line front end: moments -> fit -> assess pipelines.

Every output JSON embeds the run configuration and the library version, and
the whole pipeline is deterministic: re-running a command with the same
arguments (including --seed where applicable) reproduces output files byte
for byte.

Exit codes: 0 success, 2 malformed input, 3 solver failure, 4 golden-check
mismatch in `check` mode.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, io
from .assess import EvaluationGrid, default_grid, error_metrics, superlevel_set, symmetric_difference
from .bases import BASES, LEGENDRE
from .builtins import BUILTIN_MOMENTS, BUILTIN_TRUTHS, builtin_moments, builtin_truth
from .confit import fit_localizing, fit_putinar
from .errors import InputError, MomentFitError
from .l2fit import fit_regularized, fit_unconstrained
from .maxent import CONVERGED, maxent_fit
from .moments import MomentVector, lebesgue_moments
from .sdp import OPTIMAL

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_CHECK = 4


class SolverFailure(MomentFitError):
    pass


def _parse_box(text):
    try:
        box = json.loads(text)
        return tuple((float(a), float(b)) for a, b in box)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise InputError(f"cannot parse box {text!r}: {exc}") from exc


def _run_config(args, keys):
    cfg = {"command": args.command, "library_version": __version__}
    for k in keys:
        v = getattr(args, k.replace("-", "_"))
        cfg[k] = v
    return cfg


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_moments(args):
    if bool(args.builtin) == bool(args.domain):
        raise InputError("exactly one of --builtin or --domain is required")
    if args.builtin:
        mv = builtin_moments(args.builtin, args.degree, args.nodes)
    else:
        domain = io.load_domain_file(args.domain)
        from .moments import quadrature_moments

        if domain.inequalities:
            mv = quadrature_moments(domain, args.degree, args.nodes or 200)
        else:
            mv = lebesgue_moments(domain.box, args.degree)
    cfg = _run_config(args, ["builtin", "domain", "degree", "nodes", "out"])
    io.write_moment_file(args.out, mv, run_config=cfg)
    if mv.meta.get("empty_indicator"):
        print("warning: indicator excluded every quadrature node", file=sys.stderr)
    print(f"wrote {args.out} (dim={mv.dim}, degree={mv.degree})")
    return EXIT_OK


def cmd_fit(args):
    y = io.load_moment_file(args.moments)
    box = _parse_box(args.box) if args.box else None
    z = io.load_moment_file(args.lambda_moments) if args.lambda_moments else None
    domain = io.load_domain_file(args.domain) if args.domain else None
    cfg = _run_config(
        args,
        ["moments", "method", "degree", "basis", "box", "lambda-moments",
         "domain", "eps", "tol", "max-iter", "quad-nodes", "out",
         "certificate-out"],
    )
    certificate = None
    if args.method == "l2":
        report = fit_unconstrained(y, z, args.degree, basis=args.basis, box=box)
    elif args.method == "l2reg":
        report = fit_regularized(y, z, args.degree, eps=args.eps, box=box)
    elif args.method == "localizing":
        report = fit_localizing(y, z, args.degree, box=box,
                                tol=args.tol, max_iter=args.max_iter)
        if report.diagnostics.get("sdp_status") != OPTIMAL:
            raise SolverFailure(
                f"SDP terminated with status {report.diagnostics.get('sdp_status')}"
            )
    elif args.method == "putinar":
        if domain is None:
            from .moments import SemialgebraicDomain

            if box is None and y.box is None:
                raise InputError("putinar needs --domain or --box")
            domain = SemialgebraicDomain(box=box or y.box)
        report, certificate = fit_putinar(
            y, z, args.degree, domain=domain, tol=args.tol, max_iter=args.max_iter
        )
        if report.diagnostics.get("sdp_status") != OPTIMAL:
            raise SolverFailure(
                f"SDP terminated with status {report.diagnostics.get('sdp_status')}"
            )
    elif args.method == "maxent":
        fit_box = box or y.box
        density, diag = maxent_fit(
            y, args.degree, box=fit_box, quad_nodes=args.quad_nodes, tol=args.tol
        )
        if diag["status"] != CONVERGED:
            raise SolverFailure(f"maximum-entropy fit: {diag['status']}")
        doc = {
            "kind": "exp-polynomial",
            "basis": density.exponent.basis,
            "dim": density.exponent.dim,
            "degree": density.exponent.degree,
            "box": [[a, b] for a, b in density.exponent.box],
            "coefficients": [float(c) for c in density.exponent.coeffs],
            "diagnostics": diag,
            "library_version": __version__,
            "run_config": cfg,
        }
        io.write_json(args.out, doc)
        print(f"wrote {args.out} (maxent, status={diag['status']})")
        return EXIT_OK
    else:
        raise InputError(f"unknown method {args.method!r}")
    io.write_fit_report(args.out, report, run_config=cfg)
    if certificate is not None and args.certificate_out:
        io.write_certificate(args.certificate_out, certificate, run_config=cfg)
    print(
        f"wrote {args.out} (method={args.method}, degree={args.degree}, "
        f"objective_shifted={report.objective_shifted:.6e})"
    )
    return EXIT_OK


def cmd_assess(args):
    est = io.load_fit_file(args.fit)
    if args.truth.startswith("fit:"):
        truth = io.load_fit_file(args.truth[4:])
        truth_fn, truth_box = truth, getattr(truth, "box", est.box)
    else:
        truth_fn, truth_box = builtin_truth(args.truth)
    box = _parse_box(args.grid_box) if args.grid_box else est.box
    grid = (
        EvaluationGrid(box=box, nodes_per_axis=args.grid_nodes)
        if args.grid_nodes
        else default_grid(box)
    )
    report = error_metrics(truth_fn, est, grid, interior_margin=args.interior_margin)
    est_mask = superlevel_set(est, grid, threshold=args.threshold)
    truth_mask = superlevel_set(truth_fn, grid, threshold=args.threshold)
    symdiff = symmetric_difference(est_mask, truth_mask, grid)
    cfg = _run_config(
        args,
        ["fit", "truth", "grid-nodes", "grid-box", "interior-margin",
         "threshold", "out", "csv", "pgm", "truth-pgm"],
    )
    doc = report.to_doc()
    doc["superlevel_threshold"] = args.threshold
    doc["symmetric_difference"] = symdiff
    doc["run_config"] = cfg
    doc["library_version"] = __version__
    io.write_json(args.out, doc)
    if args.csv:
        pts = grid.points()
        from .assess import evaluate_on_grid

        io.write_grid_csv(
            args.csv, pts, evaluate_on_grid(truth_fn, pts), evaluate_on_grid(est, pts)
        )
    if args.pgm:
        io.write_pgm(args.pgm, est_mask)
    if args.truth_pgm:
        io.write_pgm(args.truth_pgm, truth_mask)
    print(
        f"wrote {args.out} (avg={report.avg_error:.6g}, max={report.max_error:.6g}, "
        f"symdiff={symdiff:.6g})"
    )
    return EXIT_OK


def cmd_perturb(args):
    if args.amplitude < 0:
        raise InputError("perturbation amplitude must be >= 0")
    mv = io.load_moment_file(args.moments)
    rng = np.random.default_rng(args.seed)
    deltas = rng.uniform(-args.amplitude, args.amplitude, size=len(mv.values))
    from fractions import Fraction

    if mv.exact is not None:
        exact = tuple(
            v * (1 + Fraction(float(d))) for v, d in zip(mv.exact, deltas)
        )
        values = np.array([float(v) for v in exact])
    else:
        exact = None
        values = mv.values * (1.0 + deltas)
    out = MomentVector(
        mv.dim, mv.degree, values, exact=exact, box=mv.box,
        meta={**mv.meta, "perturbation_amplitude": float(args.amplitude),
              "perturbation_seed": int(args.seed)},
    )
    cfg = _run_config(args, ["moments", "amplitude", "seed", "out"])
    io.write_moment_file(args.out, out, run_config=cfg)
    print(f"wrote {args.out} (amplitude={args.amplitude}, seed={args.seed})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# golden-check mode
# ---------------------------------------------------------------------------

def _check_rows(rows):
    worst = EXIT_OK
    artifact_seen = False
    for label, value, target, rel_tol, *flags in rows:
        lo, hi = target * (1 - rel_tol), target * (1 + rel_tol)
        if lo > hi:
            lo, hi = hi, lo
        ok = lo <= value <= hi
        artifact = "artifact" in flags
        mark = "PASS" if ok else ("FAIL*" if artifact else "FAIL")
        artifact_seen = artifact_seen or (artifact and not ok)
        print(
            f"{mark}  {label}: got {value:.6g}, "
            f"target {target:.6g} +/- {rel_tol:.0%}"
        )
        if not ok:
            worst = EXIT_CHECK
    if artifact_seen:
        print(
            "note: rows marked FAIL* compare against reference values that "
            "stem from a double-precision monomial-basis computation and "
            "saturate near effective degree 25; this implementation computes "
            "the oracle-verified true optima, which are more accurate "
            "(see README)."
        )
    return worst


def cmd_check(args):
    from .builtins import moments_absx, moments_ex1_sum, moments_indicator_half

    if args.table == "ex1":
        rows = []
        for d in (3, 5, 10):
            rep = fit_unconstrained(moments_ex1_sum(d), degree=d, basis="monomial")
            expected = np.zeros(len(rep.estimate.coeffs))
            expected[1] = expected[2] = 1.0
            err = float(np.abs(rep.estimate.coeffs - expected).max())
            ok = err <= 1e-8
            print(f"{'PASS' if ok else 'FAIL'}  ex1 d={d}: coefficient error {err:.2e} (<= 1e-8)")
            rows.append(ok)
        return EXIT_OK if all(rows) else EXIT_CHECK
    if args.table == "table1":
        targets = {20: (0.0031, 0.0296), 30: (0.0022, 0.0265), 50: (0.0021, 0.0251)}
        grid = default_grid(((-1, 1),))
        truth = builtin_truth("absx")[0]
        rows = []
        for d, (eb, eh) in targets.items():
            rep = fit_unconstrained(moments_absx(d), degree=d)
            m = error_metrics(truth, rep.estimate, grid)
            flags = ("artifact",) if d >= 30 else ()
            rows += [
                (f"table1 d={d} avg", m.avg_error_mean, eb, 0.15, *flags),
                (f"table1 d={d} max", m.max_error, eh, 0.15, *flags),
            ]
        return _check_rows(rows)
    if args.table == "table7":
        grid = default_grid(((0, 1),))
        truth = builtin_truth("indicator-half")[0]
        rows = []
        for d, eb in ((10, 0.08), (50, 0.05), (100, 0.05)):
            rep = fit_unconstrained(moments_indicator_half(d), degree=d)
            m = error_metrics(truth, rep.estimate, grid)
            flags = ("artifact",) if d >= 50 else ()
            rows += [
                (f"table7 d={d} avg", m.avg_error, eb, 0.20, *flags),
                (f"table7 d={d} max", m.max_error, 0.50, 0.04),
            ]
        from .moments import SemialgebraicDomain

        rep, cert = fit_putinar(
            moments_indicator_half(20), degree=10,
            domain=SemialgebraicDomain(box=((0, 1),)),
        )
        m = error_metrics(truth, rep.estimate, grid)
        rows.append(("table7 putinar d=10 avg", m.avg_error, 0.11, 0.25, "artifact"))
        return _check_rows(rows)
    raise InputError(f"unknown check table {args.table!r}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="momentfit",
        description="Density reconstruction from truncated moment vectors.",
    )
    p.add_argument("--version", action="version", version=f"momentfit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("moments", help="generate a moment file")
    m.add_argument("--builtin", choices=sorted(BUILTIN_MOMENTS), default=None)
    m.add_argument("--domain", default=None, help="semialgebraic domain JSON")
    m.add_argument("--degree", type=int, required=True)
    m.add_argument("--nodes", type=int, default=None,
                   help="quadrature nodes per axis (quadrature builtins/domains)")
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_moments)

    f = sub.add_parser("fit", help="fit a density estimate to moments")
    f.add_argument("--moments", required=True)
    f.add_argument("--method", required=True,
                   choices=["l2", "l2reg", "localizing", "putinar", "maxent"])
    f.add_argument("--degree", type=int, required=True)
    f.add_argument("--basis", choices=list(BASES), default=LEGENDRE)
    f.add_argument("--box", default=None,
                   help='reference Lebesgue box as JSON, e.g. "[[0,1],[0,1]]"')
    f.add_argument("--lambda-moments", default=None,
                   help="moment file of the reference measure")
    f.add_argument("--domain", default=None,
                   help="semialgebraic domain JSON (putinar generators)")
    f.add_argument("--eps", type=float, default=0.0, help="l2reg regularization")
    f.add_argument("--tol", type=float, default=1e-9)
    f.add_argument("--max-iter", type=int, default=100)
    f.add_argument("--quad-nodes", type=int, default=None, help="maxent quadrature")
    f.add_argument("--out", required=True)
    f.add_argument("--certificate-out", default=None)
    f.set_defaults(func=cmd_fit)

    a = sub.add_parser("assess", help="evaluate a fit against a ground truth")
    a.add_argument("--fit", required=True)
    a.add_argument("--truth", required=True,
                   help=f"builtin truth ({', '.join(sorted(BUILTIN_TRUTHS))}) or fit:PATH")
    a.add_argument("--grid-nodes", type=int, default=None)
    a.add_argument("--grid-box", default=None, help="grid box JSON (default: fit box)")
    a.add_argument("--interior-margin", type=float, default=0.05)
    a.add_argument("--threshold", type=float, default=0.5)
    a.add_argument("--out", required=True)
    a.add_argument("--csv", default=None)
    a.add_argument("--pgm", default=None)
    a.add_argument("--truth-pgm", default=None)
    a.set_defaults(func=cmd_assess)

    pe = sub.add_parser("perturb", help="apply relative componentwise noise")
    pe.add_argument("--moments", required=True)
    pe.add_argument("--amplitude", type=float, required=True)
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--out", required=True)
    pe.set_defaults(func=cmd_perturb)

    c = sub.add_parser("check", help="golden-value checks against embedded tables")
    c.add_argument("table", choices=["ex1", "table1", "table7"])
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except MomentFitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
