"""Command-line entry point ``repint``.

Exit status is 0 on success, 1 for invalid input and 2 for numerical failures.
"""
import argparse
import csv
import io
import json
import sys

import numpy as np

from .continuous import qsde_matrix_element
from .dilation import KrausFamily, kraus_dilate, steps_for
from .discrete import discrete_matrix_element, discretize_coherent
from .errors import InputError, NumericalError, ParseError, SchemaError
from .harness import (
    builtin_scenario,
    decode_matrix,
    emit_report,
    encode_matrix,
    parse_scenario,
    run_matrix_element_convergence,
    run_semigroup_convergence,
    serialize_scenario,
)
from .numerics import operator_norm
from .scenarios import BUILTINS


def _read(path):
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_scenario(args):
    if getattr(args, "builtin", None):
        return builtin_scenario(args.builtin)
    if args.config is None:
        raise InputError("either --config or --builtin is required", "--config")
    return parse_scenario(_read(args.config))


def _matrix_rows(label_cols, entries):
    """CSV with ``label_cols`` followed by ``row, col, re, im`` per entry."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(label_cols) + ["row", "col", "re", "im"])
    for labels, m in entries:
        for (a, b), z in np.ndenumerate(np.asarray(m)):
            writer.writerow(list(labels) + [a, b, repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()


def cmd_limit_coeffs(args):
    s = _load_scenario(args)
    c = s.coefficients()
    n = s.dims.n_env
    if args.format == "csv":
        entries = [((j, i), c.table[j, i]) for j in range(n + 1) for i in range(n + 1)]
        return _matrix_rows(("j", "i"), entries)
    doc = {
        "scenario": s.name,
        "dims": {"n0": s.dims.n0, "n_env": n},
        "table": [[encode_matrix(c.table[j, i]) for i in range(n + 1)] for j in range(n + 1)],
        "k": encode_matrix(c.k),
        "w": encode_matrix(c.w),
        "s": encode_matrix(c.s),
    }
    return json.dumps(doc, indent=2) + "\n"


def cmd_simulate(args):
    s = _load_scenario(args)
    h = args.h if args.h is not None else s.h_list[-1]
    results = []
    if args.mode == "qsde":
        c = s.coefficients()
        for t in s.t_grid:
            theta = qsde_matrix_element(c, s.phi, s.psi, t, s.effective_ode_step())
            results.append((t, None, theta))
    else:
        l = s.step_family()(h)
        end = max(s.phi.support_end, s.psi.support_end)
        for t in s.t_grid:
            n = steps_for(t, h)
            n_sites = max(n, int(np.ceil(end / h - 1e-9)))
            el = discrete_matrix_element(
                l, discretize_coherent(s.phi, h, n_sites), discretize_coherent(s.psi, h, n_sites), n
            )
            results.append((t, h, el.bracket_operator))
    if args.format == "csv":
        entries = [((repr(t), "" if hh is None else repr(hh)), m) for t, hh, m in results]
        return _matrix_rows(("t", "h"), entries)
    doc = {
        "scenario": s.name,
        "mode": args.mode,
        "results": [
            {"t": t, "h": hh, "norm": operator_norm(m), "bracket": encode_matrix(m)}
            for t, hh, m in results
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def cmd_converge(args):
    s = _load_scenario(args)
    if args.kind == "matrix-element":
        run = run_matrix_element_convergence
    else:
        run = run_semigroup_convergence
    return emit_report(run(s), args.format, include_timing=args.timing)


def cmd_dilate(args):
    text = _read(args.config)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed document: {exc}", "$") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("kraus"), list) or not doc["kraus"]:
        raise SchemaError("expected a non-empty list of matrices", "kraus")
    ops = [decode_matrix(m, f"kraus[{i}]") for i, m in enumerate(doc["kraus"])]
    u = kraus_dilate(KrausFamily.from_list(ops))
    flat = u.flat
    residual = operator_norm(flat.conj().T @ flat - np.eye(flat.shape[0]))
    if args.format == "csv":
        return _matrix_rows((), [((), flat)])
    out = {
        "dims": {"n0": u.dims.n0, "n_env": u.dims.n_env},
        "unitary": encode_matrix(flat),
        "unitarity_residual": residual,
    }
    return json.dumps(out, indent=2) + "\n"


def cmd_scenario(args):
    return serialize_scenario(builtin_scenario(args.builtin)) + "\n"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="repint", description="Repeated quantum interactions and their continuous limits."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario document (JSON); '-' reads stdin")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument(
        "--format", choices=("csv", "json"), help="default: csv for converge, json otherwise"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("limit-coeffs", parents=[common], help="limit QSDE coefficients")
    p.add_argument("--builtin", choices=BUILTINS)
    p.set_defaults(func=cmd_limit_coeffs)

    p = sub.add_parser("simulate", parents=[common], help="coherent matrix elements")
    p.add_argument("--mode", choices=("discrete", "qsde"), required=True)
    p.add_argument("--h", type=float, help="discrete timestep (default: smallest in h_list)")
    p.add_argument("--builtin", choices=BUILTINS)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("converge", parents=[common], help="convergence sweep report")
    p.add_argument("--kind", choices=("matrix-element", "semigroup"), required=True)
    p.add_argument("--builtin", choices=BUILTINS)
    p.add_argument("--timing", action="store_true", help="include wall time (JSON only)")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("dilate", parents=[common], help="unitary dilation of a Kraus family")
    p.set_defaults(func=cmd_dilate)

    p = sub.add_parser("scenario", parents=[common], help="print a builtin scenario document")
    p.add_argument("--builtin", choices=BUILTINS, required=True)
    p.set_defaults(func=cmd_scenario)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "converge" else "json"
    try:
        text = args.func(args)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
