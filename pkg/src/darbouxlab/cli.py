"""Command-line front end.

Exit codes: 0 success, 1 numerical failure, 2 precondition or termination
refusal, 3 domain refusal, 4 input parse error.  Complex numbers are written as ``[re, im]``
in JSON and as ``re+imj`` in CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import darboux as dx
from . import painleve as pv
from .connection import SystemConnection, reduce_connection_to_darboux
from .errors import ContractError, DarbouxLabError, DomainError, ParameterError

EXIT_OK = 0
EXIT_REFUSED = 2
EXIT_DOMAIN = 3
EXIT_PARSE = 4


class InputError(Exception):
    """Malformed user input (exit code 4)."""


def parse_complex(text: str) -> complex:
    try:
        return complex(str(text).strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def enc(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def dec(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        return parse_complex(v)
    raise InputError(f"cannot read {v!r} as a complex number")


def _params(args) -> dx.DarbouxParams:
    return dx.DarbouxParams(args.xi, args.eta, args.mu, args.nu, args.k)


def _params_json(p: dx.DarbouxParams) -> dict:
    return {"xi": enc(p.xi), "eta": enc(p.eta), "mu": enc(p.mu), "nu": enc(p.nu), "k": enc(p.k)}


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(args) -> int:
    p = _params(args)
    report = dx.termination_check(p)
    if not report.terminates:
        print("no termination identity holds for these parameters", file=sys.stderr)
        return EXIT_REFUSED
    old = dx.SPECTRUM_TOL
    dx.SPECTRUM_TOL = args.spectrum_tol
    try:
        per_case = dx.case_spectra(p, report)
        hs = dx.accessory_spectrum(p, report)
    finally:
        dx.SPECTRUM_TOL = old
    residuals = [dx.spectrum_residual(p, h, report) for h in hs]
    record = {
        "params": _params_json(p),
        "case": report.case.value,
        "cases": report.cases(),
        "q": report.q,
        "h": [enc(h) for h in hs],
        "residuals": residuals,
        "per_case": [
            {"case": cs.case.value, "q": cs.q, "h": [enc(h) for h in cs.h], "source": cs.source} for cs in per_case
        ],
        "convention": "ODE",
    }
    _emit(json.dumps(record, indent=2 if args.pretty else None) + "\n", args.out)
    return EXIT_OK


def _domain_json(dom: Optional[dx.ConvergenceDomain]) -> Optional[dict]:
    if dom is None:
        return None
    return {
        "bound_minimal": dom.bound_minimal,
        "bound_dominant": dom.bound_dominant,
        "applicable": dom.applicable if np.isfinite(dom.applicable) else None,
        "minimal_selected": dom.minimal_selected,
        "terminating": dom.terminating,
    }


def _local_value_json(v: dx.LocalValue) -> dict:
    return {
        "kind": v.kind.value,
        "value": enc(v.value),
        "tail_estimate": v.tail_estimate,
        "terms": v.terms_used,
        "ratio_coordinate": enc(v.ratio_coordinate),
        "domain": _domain_json(v.domain),
    }


def cmd_eval(args) -> int:
    p = _params(args)
    kinds = ["power", "hypergeom"] if args.kind == "both" else [args.kind]
    dx.TAIL_RTOL, old = args.tail_rtol, dx.TAIL_RTOL
    try:
        vals = {}
        for kind in kinds:
            series = None
            if args.terminating:
                series = (dx.darboux_polynomial(p, args.h) if kind == "power"
                          else dx.hypergeom_terminating_series(p, args.h))
            vals[kind] = dx.eval_local_solution(p, args.h, kind, args.u, args.N, series=series)
    except DomainError as exc:
        dom = dx.convergence_domain(p, args.h)
        print(f"domain refusal: {exc}", file=sys.stderr)
        print(f"bound_dominant={dom.bound_dominant!r} bound_minimal={dom.bound_minimal!r}", file=sys.stderr)
        return EXIT_DOMAIN
    finally:
        dx.TAIL_RTOL = old
    record = {"params": _params_json(p), "h": enc(args.h), "u": enc(args.u),
              "values": {k: _local_value_json(v) for k, v in vals.items()}}
    if len(vals) == 2:
        g0 = complex(np.exp(dx.log_G(p, 0)[0]))
        a, b = vals["power"].value, vals["hypergeom"].value / g0
        record["normalized_difference"] = abs(a - b) / max(abs(a), 1e-300)
        record["hypergeom_normalization"] = enc(g0)
    _emit(json.dumps(record, indent=2 if args.pretty else None) + "\n", args.out)
    return EXIT_OK


def cmd_correspond(args) -> int:
    if args.lattice:
        if args.lattice != "half-integers":
            raise InputError(f"unknown lattice {args.lattice!r}")
        quads = pv.half_integer_lattice(args.radius)
    elif args.thetas:
        quads = [tuple(args.thetas)]
    else:
        raise InputError("give --thetas or --lattice")
    rows = pv.correspondence_batch(quads)
    _emit(pv.rows_to_csv(rows), args.out)
    counts = pv.verdict_counts(rows)
    if args.lattice:
        print("verdict counts: " + ", ".join(f"{k}={v}" for k, v in counts.items()), file=sys.stderr)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    p = _params(args)
    series = None
    h = args.h
    if args.minimal:
        f = dx.darboux_function(p, args.h, N=max(400, args.m_max + 2))
        series, h = f.series, f.h
    rows = dx.ratio_diagnostics(p, h, args.u, m_max=args.m_max, series=series)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "coeff_ratio", "perron_prediction", "term_ratio", "watson_prediction"])
    for r in rows:
        w.writerow([r.m, repr(r.coeff_ratio), repr(r.perron_prediction),
                    pv.format_complex(r.term_ratio), pv.format_complex(r.watson_prediction)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_pvi_check(args) -> int:
    data = _read_json(args.candidate)
    if not isinstance(data, list):
        raise InputError(f"{args.candidate}: expected a JSON array of [node, value] pairs")
    nodes, values = [], []
    for i, pair in enumerate(data):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise InputError(f"{args.candidate}: entry {i} is not a [node, value] pair")
        try:
            nodes.append(dec(pair[0]))
            values.append(dec(pair[1]))
        except (InputError, ValueError, TypeError) as exc:
            raise InputError(f"{args.candidate}: entry {i}: {exc}") from exc
    p = pv.PainleveParams(*args.a)
    try:
        if args.form == "elliptic":
            cand = pv.PviCandidate(np.array(nodes), np.array(values), pv.CandidateForm.ELLIPTIC)
            rep = pv.elliptic_pvi_residual(cand, p)
        else:
            cand = pv.PviCandidate(np.array(nodes).real, np.array(values), pv.CandidateForm.RATIONAL)
            rep = pv.pvi_residual(cand, p)
    except ContractError as exc:
        raise InputError(f"{args.candidate}: {exc}") from exc
    record = {
        "form": args.form,
        "a": [enc(x) for x in p.a],
        "greek": [enc(x) for x in p.greek],
        "max_residual": rep.max,
        "residuals": [None if not np.isfinite(r) else float(r) for r in rep.residuals],
        "skipped": list(rep.skipped),
    }
    _emit(json.dumps(record, indent=2 if args.pretty else None) + "\n", args.out)
    return EXIT_OK


def cmd_system_reduce(args) -> int:
    path = args.matrices
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    try:
        conn = SystemConnection.from_json(text)
    except (ContractError, ParameterError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    fit = reduce_connection_to_darboux(conn, samples=args.samples, search_similarity=not args.no_similarity)
    record = {
        "potential_coefficients": [enc(c) for c in fit.potential_coefficients],
        "thetas": [enc(t) for t in fit.thetas],
        "exponent_differences_squared": [enc(d * d) for d in fit.exponent_differences()],
        "residue_a_squared": [enc(a * a) for a in conn.residue_data().a],
        "h_weierstrass": enc(fit.h),
        "apparent_points": [enc(z) for z in fit.apparent_points],
        "apparent_coefficients": [enc(c) for c in fit.apparent_coefficients],
        "fit_residual": fit.residual,
        "similarity_residual": fit.similarity.residual if fit.similarity else None,
    }
    _emit(json.dumps(record, indent=2 if args.pretty else None) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_params(sp, *, need_h: bool = False, need_u: bool = False) -> None:
    for name in ("xi", "eta", "mu", "nu", "k"):
        sp.add_argument(f"--{name}", type=parse_complex, required=True)
    if need_h:
        sp.add_argument("--h", type=parse_complex, required=True, help="accessory parameter (ODE convention)")
    if need_u:
        sp.add_argument("--u", type=parse_complex, required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="darbouxlab", description="Darboux equation toolkit")
    ap.add_argument("--out", help="write output to this path instead of stdout")
    ap.add_argument("--pretty", action="store_true", help="indent JSON output")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="termination case and accessory spectrum")
    _add_params(s)
    s.add_argument("--json", action="store_true", help="JSON output (the only format; accepted for clarity)")
    s.add_argument("--spectrum-tol", type=float, default=dx.SPECTRUM_TOL)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("eval", help="evaluate the local series solution")
    _add_params(s, need_h=True, need_u=True)
    s.add_argument("--kind", choices=("power", "hypergeom", "both"), default="power")
    s.add_argument("--N", type=int, default=None, help="truncation index (default: adaptive)")
    s.add_argument("--terminating", action="store_true", help="use the terminating series at a spectrum point")
    s.add_argument("--tail-rtol", type=float, default=dx.TAIL_RTOL)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("correspond", help="Darboux / Painleve special-condition correspondence (CSV)")
    s.add_argument("--thetas", type=parse_complex, nargs=4, metavar=("XI", "ETA", "MU", "NU"))
    s.add_argument("--lattice", choices=("half-integers",))
    s.add_argument("--radius", type=float, default=3.0)
    s.set_defaults(func=cmd_correspond)

    s = sub.add_parser("diagnose", help="coefficient and term ratio diagnostics (CSV)")
    _add_params(s, need_h=True, need_u=True)
    s.add_argument("--m-max", type=int, default=500)
    s.add_argument("--minimal", action="store_true", help="solve for the Darboux function seeded at --h first")
    s.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("pvi-check", help="Painleve VI residual of a sampled candidate")
    s.add_argument("candidate", help="JSON array of [node, value] pairs")
    s.add_argument("--form", choices=("rational", "elliptic"), default="rational")
    s.add_argument("--a", type=parse_complex, nargs=4, required=True, metavar=("A0", "A1", "A2", "A3"))
    s.set_defaults(func=cmd_pvi_check)

    s = sub.add_parser("system-reduce", help="fit Darboux data to a 2x2 system on the torus")
    s.add_argument("matrices", help='JSON {"A": [4 matrices], "tau": [re, im]}')
    s.add_argument("--samples", type=int, default=24)
    s.add_argument("--no-similarity", action="store_true")
    s.set_defaults(func=cmd_system_reduce)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"domain refusal: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ParameterError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except DarbouxLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
