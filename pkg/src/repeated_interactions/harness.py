"""Scenario documents, convergence sweeps and report emission.

A scenario document is a JSON object::

    {
      "name": "demo",
      "dims": {"n0": 2, "n_env": 1},
      "builtin": "two-level",            # or "params": {"h0", "hs", "v", "d"}
      "phi": {"breakpoints": [0, 1], "values": [[[0.5, 0]]]},
      "psi": {"breakpoints": [0, 1], "values": [[[0.5, 0]]]},
      "t_grid": [1.0],
      "h_list": [0.01, 0.001, 0.0001],
      "observables": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]],
      "ode_step": 2.5e-05,
      "seed": 0
    }

Complex scalars are ``[re, im]`` pairs and matrices are row-major nested
lists of them. ``v`` is a list of ``N`` matrices; ``d`` is the
``(n0*N) x (n0*N)`` scattering matrix. The ``von-neumann`` builtin also
accepts ``"projections"`` (a list of matrices).
"""
import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .continuous import qsde_matrix_element
from .dilation import discrete_semigroup_limit_check, steps_for
from .discrete import CoherentFunction, discrete_matrix_element, discretize_coherent
from .errors import InputError, ParseError, SchemaError, ValidationError
from .hamiltonian import InteractionParams, limit_coefficients, unitary_step
from .model import SpaceDims
from .numerics import fit_order, operator_norm
from .scenarios import (
    BUILTINS,
    ProjectionFamily,
    random_params,
    two_level_params,
    two_level_step,
    von_neumann_params,
)

__all__ = [
    "ConvergenceReport",
    "ReportRow",
    "Scenario",
    "builtin_scenario",
    "emit_report",
    "fit_order",
    "parse_scenario",
    "report_from_json",
    "run_matrix_element_convergence",
    "run_semigroup_convergence",
    "serialize_scenario",
]

CSV_COLUMNS = ("t", "h", "discrete_norm", "continuous_norm", "abs_error", "fitted_order")

_BUILTIN_DIMS = {
    "two-level": SpaceDims(2, 1),
    "von-neumann": SpaceDims(2, 2),
    "weak-coupling": SpaceDims(2, 2),
    "low-density": SpaceDims(2, 2),
}


# {{{ complex encoding


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(m):
    return [[encode_complex(z) for z in row] for row in np.asarray(m)]


def _decode_complex(x, path):
    if (
        not isinstance(x, list)
        or len(x) != 2
        or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in x)
    ):
        raise SchemaError("expected a complex number as [re, im]", path)
    return complex(x[0], x[1])


def decode_matrix(x, path):
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        raise SchemaError("expected a matrix (list of rows)", path)
    width = len(x[0])
    rows = []
    for i, row in enumerate(x):
        if len(row) != width:
            raise SchemaError("rows have different lengths", f"{path}[{i}]")
        rows.append([_decode_complex(z, f"{path}[{i}][{j}]") for j, z in enumerate(row)])
    return np.array(rows, dtype=complex)


# }}}


@dataclass(eq=False)
class Scenario:
    name: str
    dims: SpaceDims
    phi: CoherentFunction
    psi: CoherentFunction
    t_grid: list
    h_list: list
    builtin: str = None
    params: InteractionParams = None
    projections: ProjectionFamily = None
    observables: list = field(default_factory=list)
    ode_step: float = None
    seed: int = None

    def step_family(self):
        if self.builtin == "two-level":
            return two_level_step
        params = self.params
        return lambda h: unitary_step(params, h)

    def coefficients(self):
        return limit_coefficients(self.params)

    def effective_ode_step(self):
        if self.ode_step is not None:
            return self.ode_step
        return min(min(self.h_list), 1e-3) / 4


def _builtin_params(name, dims, seed, projections):
    if name == "two-level":
        return two_level_params()
    if name == "von-neumann":
        return von_neumann_params(projections)
    rng = np.random.default_rng(seed)
    if name == "weak-coupling":
        return random_params(dims, rng, coupling=True, scattering=False)
    return random_params(dims, rng, coupling=False, scattering=True)


def _require(doc, key, kind, path):
    if key not in doc:
        raise SchemaError("missing field", f"{path}{key}")
    value = doc[key]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind) and not isinstance(value, bool)
    if not ok:
        raise SchemaError(f"expected {kind.__name__}", f"{path}{key}")
    return value


def _number_list(doc, key):
    values = _require(doc, key, list, "")
    for i, x in enumerate(values):
        if not isinstance(x, (int, float)) or isinstance(x, bool):
            raise SchemaError("expected a number", f"{key}[{i}]")
    return [float(x) for x in values]


def _parse_function(doc, key, n_env):
    if key not in doc:
        return CoherentFunction.zero(n_env)
    f = doc[key]
    if not isinstance(f, dict):
        raise SchemaError("expected an object", key)
    bps = _require(f, "breakpoints", list, f"{key}.")
    vals = _require(f, "values", list, f"{key}.")
    values = []
    for k, row in enumerate(vals):
        p = f"{key}.values[{k}]"
        if not isinstance(row, list):
            raise SchemaError("expected a list of complex values", p)
        values.append([_decode_complex(z, f"{p}[{i}]") for i, z in enumerate(row)])
    if any(len(row) != n_env for row in values):
        raise ValidationError(f"each value needs {n_env} components", f"{key}.values")
    arr = np.array(values, dtype=complex).reshape(len(values), n_env)
    try:
        return CoherentFunction(bps, arr)
    except InputError as exc:
        raise ValidationError(str(exc), key) from exc
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc), f"{key}.breakpoints") from exc


def _parse_params(doc, dims):
    p = _require(doc, "params", dict, "")
    h0 = decode_matrix(_require(p, "h0", list, "params."), "params.h0")
    hs = decode_matrix(_require(p, "hs", list, "params."), "params.hs")
    vs = _require(p, "v", list, "params.")
    v = np.array([decode_matrix(m, f"params.v[{i}]") for i, m in enumerate(vs)])
    d = decode_matrix(_require(p, "d", list, "params."), "params.d")
    try:
        return InteractionParams(dims, h0, hs, v.reshape(-1, dims.n0, dims.n0), d)
    except InputError as exc:
        raise ValidationError(str(exc).split(": ", 1)[-1], exc.path or "params") from exc
    except ValueError as exc:
        raise ValidationError(str(exc), "params.v") from exc


def scenario_from_dict(doc):
    if not isinstance(doc, dict):
        raise SchemaError("scenario document must be an object", "$")
    name = _require(doc, "name", str, "")
    builtin = doc.get("builtin")
    if builtin is not None and builtin not in BUILTINS:
        raise ValidationError(f"unknown builtin {builtin!r}; one of {BUILTINS}", "builtin")

    if "dims" in doc:
        dd = _require(doc, "dims", dict, "")
        try:
            dims = SpaceDims(_require(dd, "n0", int, "dims."), _require(dd, "n_env", int, "dims."))
        except SchemaError:
            raise
        except InputError as exc:
            raise ValidationError(str(exc), "dims") from exc
    elif builtin is not None:
        dims = _BUILTIN_DIMS[builtin]
    else:
        raise SchemaError("missing field", "dims")

    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise SchemaError("expected int", "seed")

    projections = None
    if builtin == "two-level" and dims != SpaceDims(2, 1):
        raise ValidationError("two-level needs n0 = 2, n_env = 1", "dims")
    if builtin == "von-neumann":
        if "projections" in doc:
            ps = _require(doc, "projections", list, "")
            mats = [decode_matrix(m, f"projections[{i}]") for i, m in enumerate(ps)]
            try:
                projections = ProjectionFamily(dims.n0, tuple(mats))
            except InputError as exc:
                raise ValidationError(str(exc), "projections") from exc
        else:
            projections = ProjectionFamily.computational(dims.n0)
        if len(projections.projections) != dims.n_env:
            raise ValidationError("n_env must equal the number of projections", "dims")

    if builtin is None:
        params = _parse_params(doc, dims)
    else:
        if "params" in doc:
            raise ValidationError("builtin scenarios take no explicit params", "params")
        params = _builtin_params(builtin, dims, 0 if seed is None else seed, projections)

    t_grid = _number_list(doc, "t_grid")
    h_list = _number_list(doc, "h_list")
    if any(t < 0 or not math.isfinite(t) for t in t_grid):
        raise ValidationError("times must be finite and nonnegative", "t_grid")
    if not h_list:
        raise ValidationError("at least one timestep is required", "h_list")
    if any(h <= 0 for h in h_list) or any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValidationError("timesteps must be positive and strictly decreasing", "h_list")

    observables = []
    for i, m in enumerate(doc.get("observables", [])):
        x = decode_matrix(m, f"observables[{i}]")
        if x.shape != (dims.n0, dims.n0):
            raise ValidationError(f"must be {dims.n0}x{dims.n0}", f"observables[{i}]")
        observables.append(x)

    ode_step = doc.get("ode_step")
    if ode_step is not None:
        if not isinstance(ode_step, (int, float)) or isinstance(ode_step, bool):
            raise SchemaError("expected a number", "ode_step")
        if not ode_step > 0:
            raise ValidationError("must be positive", "ode_step")
        ode_step = float(ode_step)

    return Scenario(
        name=name,
        dims=dims,
        phi=_parse_function(doc, "phi", dims.n_env),
        psi=_parse_function(doc, "psi", dims.n_env),
        t_grid=t_grid,
        h_list=h_list,
        builtin=builtin,
        params=params,
        projections=projections,
        observables=observables,
        ode_step=ode_step,
        seed=seed,
    )


def parse_scenario(text):
    """Parse and validate a scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed document: {exc}", "$") from exc
    return scenario_from_dict(doc)


def _function_to_dict(f):
    return {
        "breakpoints": [float(b) for b in f.breakpoints],
        "values": [[encode_complex(z) for z in row] for row in f.values],
    }


def scenario_to_dict(s):
    doc = {"name": s.name, "dims": {"n0": s.dims.n0, "n_env": s.dims.n_env}}
    if s.builtin is not None:
        doc["builtin"] = s.builtin
        if s.builtin == "von-neumann":
            doc["projections"] = [encode_matrix(p) for p in s.projections.projections]
    else:
        p = s.params
        doc["params"] = {
            "h0": encode_matrix(p.h0),
            "hs": encode_matrix(p.hs),
            "v": [encode_matrix(m) for m in p.v],
            "d": encode_matrix(p.d),
        }
    doc["phi"] = _function_to_dict(s.phi)
    doc["psi"] = _function_to_dict(s.psi)
    doc["t_grid"] = list(s.t_grid)
    doc["h_list"] = list(s.h_list)
    doc["observables"] = [encode_matrix(x) for x in s.observables]
    if s.ode_step is not None:
        doc["ode_step"] = s.ode_step
    if s.seed is not None:
        doc["seed"] = s.seed
    return doc


def serialize_scenario(s):
    return json.dumps(scenario_to_dict(s), indent=2)


def builtin_scenario(name):
    """Default scenario document for a builtin, as a :class:`Scenario`."""
    if name not in BUILTINS:
        raise ValidationError(f"unknown builtin {name!r}; one of {BUILTINS}", "builtin")
    doc = {
        "name": name,
        "builtin": name,
        "t_grid": [0.0, 1.0],
        "h_list": [1e-2, 1e-3, 1e-4],
    }
    if name == "two-level":
        doc["phi"] = doc["psi"] = {"breakpoints": [0.0, 1.0], "values": [[[0.5, 0.0]]]}
        doc["observables"] = [[[[0, 0], [0, 0]], [[0, 0], [1, 0]]]]
    elif name == "von-neumann":
        doc["observables"] = [[[[1, 0], [1, 0]], [[1, 0], [1, 0]]]]
    else:
        doc["seed"] = 0
    return scenario_from_dict(doc)


# {{{ reports


@dataclass
class ReportRow:
    t: float
    h: float
    discrete_norm: float
    continuous_norm: float
    abs_error: float
    observable_errors: list = field(default_factory=list)


@dataclass
class ConvergenceReport:
    kind: str
    rows: list = field(default_factory=list)
    fitted_orders: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    wall_time: float = None

    def errors_at(self, t):
        return [(r.h, r.abs_error) for r in self.rows if r.t == t]


def _finish(report, t0):
    report.rows.sort(key=lambda r: (r.t, r.h))
    for t in sorted({r.t for r in report.rows}):
        pts = report.errors_at(t)
        order = None
        if len(pts) >= 3 and all(e > 0 for _, e in pts):
            order = fit_order(pts)
        report.fitted_orders[t] = order
    report.wall_time = time.perf_counter() - t0
    return report


def _metadata(s, kind, coeffs):
    blocks = coeffs.table.reshape(-1, s.dims.n0, s.dims.n0)
    return {
        "scenario": s.name,
        "kind": kind,
        "builtin": s.builtin,
        "dims": {"n0": s.dims.n0, "n_env": s.dims.n_env},
        "seed": s.seed,
        "coefficient_norm": float(np.sqrt(sum(operator_norm(b) ** 2 for b in blocks))),
        "ode_step": s.effective_ode_step(),
    }


def run_matrix_element_convergence(s):
    """Compare discrete and limit coherent matrix elements over the grids.

    For every ``(t, h)`` the error is the operator norm of the difference
    between the discrete bracket operator after ``floor(t/h)`` interactions
    and the limit ``Theta_t``.
    """
    t0 = time.perf_counter()
    coeffs = s.coefficients()
    family = s.step_family()
    report = ConvergenceReport("matrix-element", metadata=_metadata(s, "matrix-element", coeffs))
    step = s.effective_ode_step()
    steps = {h: family(h) for h in s.h_list}
    for t in s.t_grid:
        cont = qsde_matrix_element(coeffs, s.phi, s.psi, t, step)
        for h in s.h_list:
            n = steps_for(t, h)
            n_sites = max(n, int(np.ceil(max(s.phi.support_end, s.psi.support_end) / h - 1e-9)))
            el = discrete_matrix_element(
                steps[h],
                discretize_coherent(s.phi, h, n_sites),
                discretize_coherent(s.psi, h, n_sites),
                n,
            )
            disc = el.bracket_operator
            report.rows.append(
                ReportRow(
                    t,
                    h,
                    operator_norm(disc),
                    operator_norm(cont),
                    operator_norm(disc - cont),
                )
            )
    return _finish(report, t0)


def run_semigroup_convergence(s):
    """Compare ``ell_h^[t/h]`` with ``exp(t L)`` (superoperator spectral norm)."""
    t0 = time.perf_counter()
    coeffs = s.coefficients()
    family = s.step_family()
    steps = {h: family(h) for h in s.h_list}
    report = ConvergenceReport("semigroup", metadata=_metadata(s, "semigroup", coeffs))
    for t in s.t_grid:
        check = discrete_semigroup_limit_check(steps.get, coeffs, t, s.h_list)
        per_obs = [
            discrete_semigroup_limit_check(steps.get, coeffs, t, s.h_list, x).distances
            for x in s.observables
        ]
        for k, h in enumerate(check.h_values):
            report.rows.append(
                ReportRow(
                    t,
                    h,
                    check.discrete_norms[k],
                    check.continuous_norm,
                    check.distances[k],
                    [d[k] for d in per_obs],
                )
            )
    return _finish(report, t0)


def _fmt(x):
    return "" if x is None else repr(float(x))


def emit_report(r, format="csv", include_timing=False):
    """Render a report as CSV or JSON text.

    Wall time is left out unless ``include_timing`` is set, so identical
    scenarios give byte-identical reports.
    """
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in r.rows:
            writer.writerow(
                [
                    _fmt(row.t),
                    _fmt(row.h),
                    _fmt(row.discrete_norm),
                    _fmt(row.continuous_norm),
                    _fmt(row.abs_error),
                    _fmt(r.fitted_orders.get(row.t)),
                ]
            )
        return buf.getvalue()
    if format == "json":
        doc = {
            "kind": r.kind,
            "metadata": dict(r.metadata),
            "rows": [
                {
                    "t": row.t,
                    "h": row.h,
                    "discrete_norm": row.discrete_norm,
                    "continuous_norm": row.continuous_norm,
                    "abs_error": row.abs_error,
                    "fitted_order": r.fitted_orders.get(row.t),
                    "observable_errors": list(row.observable_errors),
                }
                for row in r.rows
            ],
            "fitted_orders": [
                {"t": t, "order": o} for t, o in sorted(r.fitted_orders.items())
            ],
        }
        if include_timing:
            doc["metadata"]["wall_time"] = r.wall_time
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def report_from_json(text):
    doc = json.loads(text)
    rows = [
        ReportRow(
            row["t"],
            row["h"],
            row["discrete_norm"],
            row["continuous_norm"],
            row["abs_error"],
            row.get("observable_errors", []),
        )
        for row in doc["rows"]
    ]
    orders = {e["t"]: e["order"] for e in doc["fitted_orders"]}
    meta = dict(doc["metadata"])
    wall = meta.pop("wall_time", None)
    return ConvergenceReport(doc["kind"], rows, orders, meta, wall)


# }}}
