"""Command-line front end: ``rieszlab <command> [options]``.

Exit status is 0 when every requested check passes, 1 when a check fails
and 2 for usage or input errors.  Floats are written with 17 significant
digits, CSV files use LF line endings, and outputs are written atomically.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from contextlib import nullcontext

import numpy as np

from . import constants, halfline, stats
from .domains import DomainError, parse_domain
from .galerkin import BasisSpec, GalerkinError, SpectralParams, Spectrum, spectrum_for

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    """Bad arguments or unreadable input (exit status 2)."""


def _num(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_num(v) for v in row) + "\n")
    return buf.getvalue()


def write_atomic(path: str | None, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; stdout if path is None."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _thread_limit():
    value = os.environ.get("RIESZLAB_THREADS")
    if not value:
        return nullcontext()
    try:
        n = int(value)
    except ValueError as exc:
        raise UsageError("RIESZLAB_THREADS must be a positive integer") from exc
    if n < 1:
        raise UsageError("RIESZLAB_THREADS must be a positive integer")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _parse_basis(text: str, torus: float | None) -> BasisSpec:
    kind, sep, body = text.partition(":")
    names = {"sine": "tensor_sine", "tent": "tent_grid"}
    if not sep or kind not in names:
        raise UsageError(f"basis must look like sine:NxM or tent:NxM, got {text!r}")
    try:
        counts = tuple(int(c) for c in body.split("x"))
        return BasisSpec(names[kind], counts, torus)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _window(text: str | None):
    if text is None:
        return None
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError("window must be LO,HI") from exc
    if not 0 < lo < hi:
        raise UsageError("window must satisfy 0 < LO < HI")
    return lo, hi


def _load_spectrum(path: str) -> Spectrum:
    try:
        with open(path, encoding="utf-8") as fh:
            return Spectrum.from_json(fh.read())
    except (OSError, ValueError, DomainError) as exc:
        raise UsageError(f"cannot read spectrum {path!r}: {exc}") from exc


# ---------------------------------------------------------------------------


def cmd_constants(args) -> int:
    if args.d < 2:
        raise UsageError("d must be >= 2 (the second coefficient needs d in {2, 3})")
    rows = []
    for mu in args.mu:
        if mu < 0:
            raise UsageError("mu must be nonnegative")
        lam1 = constants.lambda1(args.d, mu)
        residual = abs(lam1 - constants.lambda1(args.d, mu, "quadrature")) / lam1
        if args.d in (2, 3):
            res = constants.lambda2(args.d, mu, validate=args.validate)
            lam2 = res.value
            method = "t-first+kernel" if args.validate else "t-first"
            if res.relative_gap is not None:
                residual = max(residual, res.relative_gap)
        else:
            lam2, method = math.nan, "lambda1-only"
        rows.append((args.d, mu, lam1, lam2, constants.c_d(args.d), method, residual))
    header = ["d", "mu", "lambda1", "lambda2", "c_d", "method", "residual"]
    if args.format == "json":
        text = json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    else:
        text = _csv(header, rows)
    write_atomic(args.out, text)
    return 0


def cmd_phase_shift(args) -> int:
    if args.omega < 0:
        raise UsageError("omega must be nonnegative")
    rows = []
    for lam in args.lam:
        if lam <= 0:
            raise UsageError("lam must be positive")
        rows.append((args.omega, lam, float(halfline.phase_shift(args.omega, lam)),
                     float(halfline.phase_shift_derivative(args.omega, lam))))
    write_atomic(args.out, _csv(["omega", "lam", "theta", "theta_prime"], rows))
    return 0


def cmd_eigenfunction(args) -> int:
    if args.omega < 0 or args.lam <= 0 or args.t_max <= 0 or args.samples < 2:
        raise UsageError("need omega >= 0, lam > 0, t-max > 0 and samples >= 2")
    ef = halfline.make_eigenfunction(args.omega, args.lam)
    t = np.linspace(0.0, args.t_max, args.samples)
    g = ef.correction(t)
    f = halfline.eigenfunction_F(ef, t)
    rows = [(ti, ef.theta, gi, fi) for ti, gi, fi in zip(t, g, f)]
    write_atomic(args.out, _csv(["t", "theta", "G", "F"], rows))
    return 0 if np.all(np.abs(f) <= 2.0) else 1


def cmd_spectrum(args) -> int:
    try:
        dom = parse_domain(args.domain)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    basis = _parse_basis(args.basis, args.torus)
    try:
        spec = spectrum_for(dom, SpectralParams(dom.dim, args.m), basis, args.k)
    except (GalerkinError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    write_atomic(args.out, spec.to_json())
    return 0


def _riesz_rows(spec: Spectrum, window, samples: int):
    dom = spec.domain
    pred = stats.predict_riesz(dom.dim, spec.m, dom)
    top = stats.reliable_threshold(spec)
    lo, hi = window or (float(spec.eigenvalues[0]), top)
    lam = np.linspace(lo, min(hi, top), samples)
    n = stats.counting(spec, lam)
    r = stats.riesz_mean(spec, lam)
    p = pred(lam)
    return [(a, b, c, e, c - e) for a, b, c, e in zip(lam, n, r, p)]


def _heat_rows(spec: Spectrum, t_values, tail: str):
    dom = spec.domain
    rows = []
    for t in t_values:
        z = stats.heat_trace(spec, float(t), tail=tail)
        p = stats.predict_heat_trace(dom.dim, spec.m, dom, float(t))
        rows.append((t, z.value, p, z.value - p))
    return rows


def cmd_verify(args) -> int:
    spec = _load_spectrum(args.spectrum)
    dom = spec.domain
    if dom.dim not in (2, 3):
        raise UsageError("verification needs a 2-D or 3-D domain")
    window = _window(args.window)
    ok = True
    if args.statistic == "riesz":
        rows = _riesz_rows(spec, window, args.samples)
        ok = all(math.isfinite(r[-1]) for r in rows)
        report = stats.berezin_check(spec, dom, dom.dim, spec.m, np.geomspace(0.01, 1.0, 30),
                                     raise_on_violation=False)
        ok = ok and report.passed
        text = _csv(["lambda", "N", "R", "prediction", "residual"], rows)
        summary = f"berezin_check {'PASS' if report.passed else 'FAIL'} (min margin {report.margins.min():.6g})"
    elif args.statistic == "heat":
        lo, hi = window or (0.08, 0.2)
        t_values = np.linspace(lo, hi, args.samples)
        rows = _heat_rows(spec, t_values, "weyl")
        d1 = stats.heat_constants(dom.dim)[0]
        ratios = [(z - (p - d1 * dom.volume / t**dom.dim)) / (d1 * dom.volume / t**dom.dim)
                  for t, z, p, _ in rows]
        ok = all(abs(q - 1.0) <= 0.05 for q in ratios)
        text = _csv(["t", "Z", "prediction", "residual"], rows)
        summary = f"leading ratio range [{min(ratios):.6g}, {max(ratios):.6g}] {'PASS' if ok else 'FAIL'}"
    else:
        raise UsageError(f"unknown statistic {args.statistic!r}")
    write_atomic(args.out, text)
    print(summary, file=sys.stderr)
    return 0 if ok else 1


def cmd_heat_trace(args) -> int:
    spec = _load_spectrum(args.spectrum)
    if spec.domain.dim not in (2, 3):
        raise UsageError("heat-trace predictions need a 2-D or 3-D domain")
    if not 0 < args.t_min <= args.t_max:
        raise UsageError("need 0 < t-min <= t-max")
    t_values = np.linspace(args.t_min, args.t_max, args.samples)
    try:
        rows = _heat_rows(spec, t_values, args.tail)
    except stats.StatisticsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_atomic(args.out, _csv(["t", "Z", "prediction", "residual"], rows))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rieszlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="tabulate the Weyl coefficients")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--mu", type=float, nargs="+", default=[0.0])
    p.add_argument("--validate", action="store_true", help="cross-check the second coefficient")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("phase-shift", help="half-line phase shift and its derivative")
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--lam", type=float, nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_phase_shift)

    p = sub.add_parser("eigenfunction", help="sample a half-line generalized eigenfunction")
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eigenfunction)

    p = sub.add_parser("spectrum", help="Galerkin eigenvalues on a domain")
    p.add_argument("--domain", required=True)
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--basis", default="sine:24x24")
    p.add_argument("--torus", type=float)
    p.add_argument("--k", type=int, default=60)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="compare a spectrum with the two-term laws")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--statistic", choices=["riesz", "heat"], default="riesz")
    p.add_argument("--window")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("heat-trace", help="heat trace of a spectrum with its prediction")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--t-min", type=float, default=0.08)
    p.add_argument("--t-max", type=float, default=0.2)
    p.add_argument("--samples", type=int, default=13)
    p.add_argument("--tail", choices=["strict", "weyl"], default="strict")
    p.add_argument("--out")
    p.set_defaults(func=cmd_heat_trace)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with _thread_limit():
            return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (halfline.GFitError, stats.StatisticsError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
