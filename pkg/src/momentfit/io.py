"""File formats: moment/domain JSON, fit reports, certificates, PGM, CSV.

Moment files store plain JSON numbers, but with as many significant digits as
the degree demands: converting monomial moments to an orthogonal basis at
degree d cancels roughly 0.8*d decimal digits, so float64-rounded moments are
useless beyond degree ~25.  Generators that know exact rational moments emit
long decimal literals (still valid JSON reals); the loader parses every float
token as an exact Fraction so no precision is dropped on the way in.

All writers are deterministic: fixed key order, no timestamps, shortest
round-trip float repr.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

import numpy as np

from . import __version__
from .bases import BASES, Polynomial
from .errors import InputError
from .indices import s_dim
from .moments import MomentVector, SemialgebraicDomain


def significant_digits(degree):
    """Decimal digits needed so basis conversions at this degree stay exact-ish."""
    return 24 + int(degree)


def fraction_to_decimal(value, digits):
    """Deterministic round-half-even decimal literal with given significant digits."""
    f = Fraction(value)
    if f == 0:
        return "0.0"
    sign = "-" if f < 0 else ""
    f = abs(f)
    # exponent = floor(log10(f)) found by integer digit counts
    num, den = f.numerator, f.denominator
    exp = len(str(num)) - len(str(den))
    if num * 10 ** max(0, -exp) < den * 10 ** max(0, exp):
        exp -= 1
    # round f / 10**exp to `digits` digits after the leading one
    shift = digits - 1 - exp
    scaled = f * Fraction(10) ** shift
    n, r = divmod(scaled.numerator, scaled.denominator)
    half = 2 * r - scaled.denominator
    if half > 0 or (half == 0 and n % 2 == 1):
        n += 1
    mant = str(n)
    if len(mant) > digits:  # rounding carried over, e.g. 999.. -> 1000..
        mant = mant[:digits]
        exp += 1
    mant = mant.rstrip("0") or "0"
    if len(mant) == 1:
        body = f"{mant}.0"
    else:
        body = f"{mant[0]}.{mant[1:]}"
    return f"{sign}{body}e{exp:+03d}" if exp else f"{sign}{body}"


_PLACEHOLDER = re.compile(r'"@m(\d+)@"')


def _dump_with_numbers(obj, numbers):
    text = json.dumps(obj, sort_keys=True, indent=1)
    return _PLACEHOLDER.sub(lambda m: numbers[int(m.group(1))], text)


# ---------------------------------------------------------------------------
# Moment files
# ---------------------------------------------------------------------------

def moment_file_text(mv, run_config=None, digits=None):
    if digits is None:
        digits = significant_digits(mv.degree)
    if mv.exact is not None:
        numbers = [fraction_to_decimal(v, digits) for v in mv.exact]
    else:
        numbers = [repr(float(v)) for v in mv.values]
    doc = {
        "dim": mv.dim,
        "degree": mv.degree,
        "ordering": "grlex",
        "moments": [f"@m{i}@" for i in range(len(numbers))],
        "library_version": __version__,
    }
    if mv.box is not None:
        doc["box"] = [[a, b] for a, b in mv.box]
    if mv.meta:
        doc["meta"] = {k: mv.meta[k] for k in sorted(mv.meta)}
    if run_config is not None:
        doc["run_config"] = run_config
    return _dump_with_numbers(doc, numbers) + "\n"


def write_moment_file(path, mv, run_config=None, digits=None):
    with open(path, "w") as fh:
        fh.write(moment_file_text(mv, run_config, digits))


def load_moment_file(path):
    with open(path) as fh:
        try:
            doc = json.load(fh, parse_float=Fraction)
        except (json.JSONDecodeError, ValueError) as exc:
            raise InputError(f"malformed moment file {path}: {exc}") from exc
    try:
        dim, degree = int(doc["dim"]), int(doc["degree"])
        moments = doc["moments"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed moment file {path}: {exc}") from exc
    if doc.get("ordering", "grlex") != "grlex":
        raise InputError(f"unsupported moment ordering {doc.get('ordering')!r}")
    if len(moments) != s_dim(dim, degree):
        raise InputError(
            f"moment file {path} has {len(moments)} values, "
            f"expected {s_dim(dim, degree)}"
        )
    exact = tuple(Fraction(v) for v in moments)
    box = doc.get("box")
    if box is not None:
        box = tuple((float(a), float(b)) for a, b in box)
    meta = doc.get("meta", {})
    return MomentVector(
        dim,
        degree,
        np.array([float(v) for v in exact]),
        exact=exact,
        box=box,
        meta=dict(meta),
    )


# ---------------------------------------------------------------------------
# Domain files
# ---------------------------------------------------------------------------

def domain_to_doc(domain):
    return {
        "box": [[a, b] for a, b in domain.box],
        "inequalities": [
            {
                "basis": g.basis,
                "degree": g.degree,
                "coeffs": [float(c) for c in g.coeffs],
            }
            for g in domain.inequalities
        ],
    }


def write_domain_file(path, domain):
    with open(path, "w") as fh:
        json.dump(domain_to_doc(domain), fh, sort_keys=True, indent=1)
        fh.write("\n")


def domain_from_doc(doc, path="<domain>"):
    try:
        box = tuple((float(a), float(b)) for a, b in doc["box"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed domain file {path}: {exc}") from exc
    ineqs = []
    for spec in doc.get("inequalities", []):
        basis = spec.get("basis", "monomial")
        if basis not in BASES:
            raise InputError(f"unknown basis {basis!r} in {path}")
        degree = int(spec["degree"])
        coeffs = [float(c) for c in spec["coeffs"]]
        ineqs.append(Polynomial(len(box), degree, basis, box, coeffs))
    return SemialgebraicDomain(box=box, inequalities=tuple(ineqs))


def load_domain_file(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed domain file {path}: {exc}") from exc
    return domain_from_doc(doc, path)


# ---------------------------------------------------------------------------
# Fit reports and certificates
# ---------------------------------------------------------------------------

def fit_report_doc(report, run_config=None):
    est = report.estimate
    doc = {
        "kind": "polynomial",
        "basis": est.basis,
        "dim": est.dim,
        "degree": est.degree,
        "box": [[a, b] for a, b in est.box],
        "coefficients": [float(c) for c in est.coeffs],
        "objective_shifted": float(report.objective_shifted),
        "residual_norm": float(np.max(np.abs(report.moment_residual)))
        if len(report.moment_residual)
        else 0.0,
        "residual_basis": report.residual_basis,
        "condition_estimate": float(report.condition_estimate),
        "diagnostics": report.diagnostics,
        "library_version": __version__,
    }
    if run_config is not None:
        doc["run_config"] = run_config
    return doc


def write_fit_report(path, report, run_config=None):
    with open(path, "w") as fh:
        json.dump(fit_report_doc(report, run_config), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_polynomial_doc(doc, path="<fit>"):
    kind = doc.get("kind", "polynomial")
    box = tuple((float(a), float(b)) for a, b in doc["box"])
    poly = Polynomial(
        int(doc["dim"]),
        int(doc["degree"]),
        doc["basis"],
        box,
        [float(c) for c in doc["coefficients"]],
    )
    if kind == "exp-polynomial":
        from .maxent import ExpPolyDensity

        return ExpPolyDensity(exponent=poly)
    if kind != "polynomial":
        raise InputError(f"unknown fit kind {kind!r} in {path}")
    return poly


def load_fit_file(path):
    """Load a fit JSON as an evaluable object (Polynomial or ExpPolyDensity)."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed fit file {path}: {exc}") from exc
    try:
        return load_polynomial_doc(doc, path)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed fit file {path}: {exc}") from exc


def certificate_doc(cert, run_config=None):
    blocks = []
    for gram in cert.gram_matrices:
        n = gram.shape[0]
        rows, cols = np.tril_indices(n)
        blocks.append([float(v) for v in gram[rows, cols]])
    doc = {
        "basis": cert.basis,
        "box": [[a, b] for a, b in cert.box],
        "block_orders": [int(g.shape[0]) for g in cert.gram_matrices],
        "blocks_lower_triangular": blocks,
        "generator_degrees": [int(d) for d in cert.generator_degrees],
        "generators": [
            {
                "basis": g.basis,
                "degree": g.degree,
                "coeffs": [float(c) for c in g.coeffs],
            }
            for g in cert.generators
        ],
        "library_version": __version__,
    }
    if run_config is not None:
        doc["run_config"] = run_config
    return doc


def write_certificate(path, cert, run_config=None):
    with open(path, "w") as fh:
        json.dump(certificate_doc(cert, run_config), fh, sort_keys=True, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Rasters and tabular output
# ---------------------------------------------------------------------------

def write_pgm(path, mask):
    """Binary (P5) PGM of a boolean raster; row 0 is the top of the image."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim == 1:
        mask = mask.reshape(1, -1)
    h, w = mask.shape
    data = np.where(mask, 255, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def write_grid_csv(path, points, u_true, u_est):
    pts = np.atleast_2d(points)
    header = ",".join(f"x{i+1}" for i in range(pts.shape[1])) + ",u_true,u_est"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row, t, e in zip(pts, u_true, u_est):
            coords = ",".join(repr(float(v)) for v in row)
            fh.write(f"{coords},{repr(float(t))},{repr(float(e))}\n")


def write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
