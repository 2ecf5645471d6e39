"""Strict JSON configuration: parsing, defaults, validation and the resolved echo.

Schema (every key optional unless marked)::

    domain:       {dim*, lengths*, resolution*}
    exponents:    {p*, q*, tau*, mu*, eta_hat}
    coefficients: {r_hat*, theta, c0, delta, C8, r_aux, reaction}
    solver:       {eps_reg, tol_eigen, tol_inner, tol_middle, tol_outer,
                   max_iters: {eigen, inner, middle, outer},
                   damping, homotopy_grid, c1_bound}
    output:       {directory, formats}

A field is ``{"kind": "constant", "value": v}``, ``{"kind": "affine", "a":,
"b":, "c":}`` or ``{"kind": "table", "values": [...]}``; the parameters may
also be nested under ``"params"``.  ``theta`` additionally accepts
``{"kind": "auto-fraction", "value": s}`` meaning theta = s * lambda1.
"""
from __future__ import annotations

import copy
import json
import re
from pathlib import Path

import numpy as np

from .errors import InvalidField, InvalidMesh, ParseError, ValidationError
from .fields import ExponentField, GridFunction
from .mesh import build_mesh
from .problem import HOMOTOPY_GRID, OutputOptions, ProblemSpec, SolverOptions

FIELD_KEYS = {"constant": {"value"}, "affine": {"a", "b", "c"}, "table": {"values"}}
FORMATS = {"csv", "vtk"}

DEFAULTS = {
    "coefficients": {
        "theta": {"kind": "auto-fraction", "value": 0.5},
        "c0": 1.0,
        "delta": 1.0,
        "C8": None,
        "r_aux": None,
        "reaction": {"kind": "capped-concave"},
    },
    "exponents": {"eta_hat": None},
    "solver": {
        "eps_reg": SolverOptions.eps_reg,
        "tol_eigen": SolverOptions.tol_eigen,
        "tol_inner": SolverOptions.tol_inner,
        "tol_middle": SolverOptions.tol_middle,
        "tol_outer": SolverOptions.tol_outer,
        "max_iters": {
            "eigen": SolverOptions.max_eigen,
            "inner": SolverOptions.max_inner,
            "middle": SolverOptions.max_middle,
            "outer": SolverOptions.max_outer,
        },
        "damping": SolverOptions.damping,
        "homotopy_grid": list(HOMOTOPY_GRID),
        "c1_bound": SolverOptions.c1_bound,
    },
    "output": {"directory": OutputOptions.directory, "formats": list(OutputOptions.formats)},
}

SCHEMA = {
    "domain": {"dim": None, "lengths": None, "resolution": None},
    "exponents": {"p": None, "q": None, "tau": None, "mu": None, "eta_hat": None},
    "coefficients": {k: None for k in ("r_hat", "theta", "c0", "delta", "C8", "r_aux", "reaction")},
    "solver": {**{k: None for k in DEFAULTS["solver"]}, "max_iters": {k: None for k in DEFAULTS["solver"]["max_iters"]}},
    "output": {"directory": None, "formats": None},
}
REQUIRED = {"domain": ("dim", "lengths", "resolution"), "exponents": ("p", "q", "tau", "mu"), "coefficients": ("r_hat",)}


# -- parsing ------------------------------------------------------------------------

def _locate(text, key):
    if text is None:
        return None, None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if m is None:
        return None, None
    line = text.count("\n", 0, m.start()) + 1
    return line, m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1


def _no_dupes(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ValueError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _reject_constant(name):
    raise ValueError(f"non-finite literal {name} is not allowed")


def load_json(text: str) -> dict:
    try:
        data = json.loads(text, object_pairs_hook=_no_dupes, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object", 1, 1)
    return data


def _check_keys(data, schema, path, text):
    for key, value in data.items():
        if key not in schema:
            line, col = _locate(text, key)
            raise ParseError(f"unknown key {'.'.join(path + (key,))!r}", line, col)
        sub = schema[key]
        if isinstance(sub, dict) and value is not None:
            if not isinstance(value, dict):
                raise ValidationError(".".join(path + (key,)), "must be an object")
            _check_keys(value, sub, path + (key,), text)


def _merge(defaults, data):
    out = copy.deepcopy(defaults)
    for k, v in data.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _field_params(name, spec, allow=()):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError(name, "field must be an object with a 'kind'")
    kind = spec["kind"]
    params = dict(spec.get("params", {}))
    params.update({k: v for k, v in spec.items() if k not in ("kind", "params")})
    allowed = FIELD_KEYS.get(kind) or ({"value"} if kind in allow else None)
    if allowed is None:
        raise ValidationError(name, f"unknown kind {kind!r}")
    extra = set(params) - allowed
    if extra:
        raise ValidationError(name, f"unexpected parameters {sorted(extra)} for kind {kind!r}")
    missing = {"constant": {"value"}, "table": {"values"}, "auto-fraction": {"value"}}.get(kind, set()) - set(params)
    if missing:
        raise ValidationError(name, f"missing parameters {sorted(missing)}")
    return kind, params


def _canonical_field(name, spec, allow=()):
    kind, params = _field_params(name, spec, allow)
    return {"kind": kind, **params}


def _number(name, x, positive=False, allow_none=False):
    if x is None and allow_none:
        return None
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not np.isfinite(x):
        raise ValidationError(name, "must be a finite number")
    if positive and not x > 0:
        raise ValidationError(name, "must be positive")
    return float(x)


def _integer(name, x, minimum=1):
    if isinstance(x, bool) or not isinstance(x, int) or x < minimum:
        raise ValidationError(name, f"must be an integer >= {minimum}")
    return x


# -- building ------------------------------------------------------------------------

def _build_mesh(dom):
    dim = _integer("domain.dim", dom["dim"])
    lengths, res = dom["lengths"], dom["resolution"]
    if not isinstance(lengths, list) or not isinstance(res, list):
        raise ValidationError("domain", "lengths and resolution must be arrays")
    try:
        return build_mesh(dim, [_number("domain.lengths", x) for x in lengths],
                          [_integer("domain.resolution", x, 0) for x in res])
    except InvalidMesh as exc:
        raise ValidationError("domain", str(exc)) from None


def _exponent(mesh, name, spec):
    kind, params = _field_params(name, spec)
    try:
        return ExponentField.from_spec(mesh, kind, params)
    except (InvalidField, TypeError, ValueError) as exc:
        raise ValidationError(name, str(exc)) from None


def _grid(mesh, name, spec):
    kind, params = _field_params(name, spec)
    try:
        return GridFunction.from_spec(mesh, kind, params)
    except (InvalidField, TypeError, ValueError) as exc:
        raise ValidationError(name, str(exc)) from None


def _validate_structure(p, q, tau, mu, r_hat):
    """Clauses of H0/H1 decidable without the eigenvalue; the message names the clause."""
    if not q.r_plus < p.r_minus:
        raise ValidationError("exponents.q", f"H0 requires q₊<p₋ (q_+ = {q.r_plus:g}, p_- = {p.r_minus:g})")
    if not tau.r_plus < p.r_minus:
        raise ValidationError("exponents.tau", f"H0 requires τ₊<p₋ (tau_+ = {tau.r_plus:g}, p_- = {p.r_minus:g})")
    if not p.r_plus - p.r_minus <= 1.0:
        raise ValidationError("exponents.p", f"H0 requires 0≤p₊−p₋≤1 (spread {p.r_plus - p.r_minus:g})")
    if not p.r_plus < p.critical_minus():
        raise ValidationError("exponents.p", f"H0 requires p₊<p₋* (p_+ = {p.r_plus:g}, p_-^* = {p.critical_minus():g})")
    if not mu.r_plus < q.r_minus:
        raise ValidationError("exponents.mu", f"H1(iv) requires μ₊<q₋ (mu_+ = {mu.r_plus:g}, q_- = {q.r_minus:g})")
    if np.any(r_hat.values < 0):
        raise ValidationError("coefficients.r_hat", "H0 requires r̂≥0")


def _solver(s):
    mi = s["max_iters"]
    eps = _number("solver.eps_reg", s["eps_reg"])
    if not 0.0 <= eps < 1e-6:
        raise ValidationError("solver.eps_reg", "must lie in [0, 1e-6)")
    damping = _number("solver.damping", s["damping"], positive=True)
    if damping > 1.0:
        raise ValidationError("solver.damping", "must lie in (0, 1]")
    grid = s["homotopy_grid"]
    if not isinstance(grid, list) or not grid:
        raise ValidationError("solver.homotopy_grid", "must be a nonempty array")
    grid = tuple(_number("solver.homotopy_grid", t) for t in grid)
    if any(not 0.0 < t < 1.0 for t in grid):
        raise ValidationError("solver.homotopy_grid", "entries must lie in (0, 1)")
    return SolverOptions(
        eps_reg=eps,
        tol_eigen=_number("solver.tol_eigen", s["tol_eigen"], True),
        tol_inner=_number("solver.tol_inner", s["tol_inner"], True),
        tol_middle=_number("solver.tol_middle", s["tol_middle"], True),
        tol_outer=_number("solver.tol_outer", s["tol_outer"], True),
        max_eigen=_integer("solver.max_iters.eigen", mi["eigen"]),
        max_inner=_integer("solver.max_iters.inner", mi["inner"]),
        max_middle=_integer("solver.max_iters.middle", mi["middle"]),
        max_outer=_integer("solver.max_iters.outer", mi["outer"]),
        damping=damping,
        homotopy_grid=grid,
        c1_bound=_number("solver.c1_bound", s["c1_bound"], True),
    )


def parse_config_dict(data: dict, text: str = None) -> ProblemSpec:
    """Validate a decoded config and build the problem; ``text`` improves error positions."""
    _check_keys(data, SCHEMA, (), text)
    for section, keys in REQUIRED.items():
        for k in keys:
            if k not in data.get(section, {}) or data[section][k] is None:
                raise ValidationError(f"{section}.{k}", "is required")
    cfg = _merge(DEFAULTS, data)
    cfg["domain"] = dict(data["domain"])

    mesh = _build_mesh(cfg["domain"])
    ex, co = cfg["exponents"], cfg["coefficients"]
    p, q, tau, mu = (_exponent(mesh, f"exponents.{k}", ex[k]) for k in ("p", "q", "tau", "mu"))
    r_hat = _grid(mesh, "coefficients.r_hat", co["r_hat"])
    _validate_structure(p, q, tau, mu, r_hat)
    for k in ("p", "q", "tau", "mu"):
        ex[k] = _canonical_field(f"exponents.{k}", ex[k])
    co["r_hat"] = _canonical_field("coefficients.r_hat", co["r_hat"])

    eta = ex["eta_hat"]
    if eta is not None:
        if not isinstance(eta, list) or len(eta) != mesh.dim:
            raise ValidationError("exponents.eta_hat", f"must be an array of length {mesh.dim}")
        eta = tuple(_number("exponents.eta_hat", x) for x in eta)

    theta_spec = co["theta"]
    kind, params = _field_params("coefficients.theta", theta_spec, allow=("auto-fraction",))
    theta, fraction = None, None
    if kind == "auto-fraction":
        fraction = _number("coefficients.theta", params["value"])
        if not 0.0 < fraction < 1.0:
            raise ValidationError("coefficients.theta", "auto-fraction value must lie in (0, 1) (ϑ≤λ̂₁, ϑ≢λ̂₁)")
    else:
        theta = _grid(mesh, "coefficients.theta", theta_spec)
        if np.any(theta.values < 0):
            raise ValidationError("coefficients.theta", "theta must be nonnegative")
    co["theta"] = {"kind": kind, **params}

    c0 = _number("coefficients.c0", co["c0"], positive=True)
    delta = _number("coefficients.delta", co["delta"], positive=True)
    C8 = _number("coefficients.C8", co["C8"], positive=True, allow_none=True)
    r_aux = _number("coefficients.r_aux", co["r_aux"], allow_none=True)
    if r_aux is not None and not p.r_plus < r_aux < p.critical_minus():
        raise ValidationError("coefficients.r_aux", "must lie in (p_+, p_-^*)")

    reaction = co["reaction"]
    if not isinstance(reaction, dict) or reaction.get("kind") not in ("capped-concave", "custom-table"):
        raise ValidationError("coefficients.reaction", "kind must be 'capped-concave' or 'custom-table'")
    table_x = table_f = None
    if reaction["kind"] == "custom-table":
        if set(reaction) != {"kind", "x", "f"}:
            raise ValidationError("coefficients.reaction", "custom-table needs exactly 'x' and 'f'")
        table_x = tuple(_number("coefficients.reaction.x", v) for v in reaction["x"])
        table_f = tuple(_number("coefficients.reaction.f", v) for v in reaction["f"])
    elif set(reaction) != {"kind"}:
        raise ValidationError("coefficients.reaction", "capped-concave takes no parameters")

    solver = _solver(cfg["solver"])
    out = cfg["output"]
    formats = out["formats"]
    if not isinstance(formats, list) or not set(formats) <= FORMATS:
        raise ValidationError("output.formats", f"must be a subset of {sorted(FORMATS)}")
    if not isinstance(out["directory"], str):
        raise ValidationError("output.directory", "must be a string")

    spec = ProblemSpec(
        mesh=mesh, p=p, q=q, tau=tau, mu=mu, r_hat=r_hat,
        c0=c0, delta=delta, theta=theta, theta_fraction=fraction, C8=C8, r_aux=r_aux, eta_hat=eta,
        reaction_kind=reaction["kind"], table_x=table_x, table_f=table_f,
        solver=solver, output=OutputOptions(out["directory"], tuple(formats)), config=cfg,
    )
    try:
        spec.reaction_model()
    except InvalidField as exc:
        raise ValidationError("coefficients.reaction", str(exc)) from None
    return spec


def parse_config(path) -> ProblemSpec:
    """Read, validate and default a UTF-8 JSON config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc}") from None
    return parse_config_dict(load_json(text), text)


def resolved_config(spec: ProblemSpec) -> dict:
    """The fully defaulted config; parsing it again reproduces ``spec``."""
    return copy.deepcopy(spec.config)
