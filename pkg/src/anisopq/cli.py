"""Command-line driver.

Exit status: 0 success, 2 configuration error, 3 hypothesis gate failed,
4 numerical failure.  Failures also leave ``error.json`` in the output
directory.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .config import parse_config, resolved_config
from .eigen import principal_eigenpair, quotient, with_weight
from .errors import AnisoPQError, HypothesisError, InvalidWeight, ParseError, ValidationError
from .fields import GridFunction
from .fixed_point import homotopy_scan, run_fixed_point
from .frozen import minimal_solution_report, solve_auxiliary_report, solve_frozen
from .hypotheses import check_hypotheses
from .output import JsonlLog, read_csv, write_field, write_json

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERIC = 0, 2, 3, 4
STAGES = ("check", "eigen", "aux", "frozen", "solve", "homotopy")
PROBES = 20


def _common(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=d(None), help="JSON problem description")
    parser.add_argument("--out", default=d(None), help="output directory (overrides output.directory)")
    parser.add_argument("--seed", type=int, default=d(0), help="seed for randomised probes")
    parser.add_argument("--threads", type=int, default=d(1), help="worker threads for the homotopy scan")
    parser.add_argument("--strict", action="store_true", default=d(False),
                        help="treat unverifiable hypothesis clauses as failures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anisopq", description="Anisotropic (p,q)-Laplacian solver with convection.")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="stage", required=True)
    helps = {
        "check": "validate the hypotheses on the data",
        "eigen": "principal eigenpair and the weighted eigenvalue",
        "aux": "positive solution of the auxiliary problem",
        "frozen": "solve the problem with the gradient term frozen at a given field",
        "solve": "outer fixed-point loop for the full problem",
        "homotopy": "scan u = t beta(u) over the homotopy grid",
    }
    for stage in STAGES:
        sp = sub.add_parser(stage, help=helps[stage])
        _common(sp, suppress=True)
        if stage == "frozen":
            sp.add_argument("--v", required=True, metavar="FIELD", help="CSV field file or 'zero'")
    return parser


class _Run:
    def __init__(self, args, spec, out):
        self.args, self.spec, self.out = args, spec, out
        self.summary = {
            "stage": args.stage,
            "status": "ok",
            "seed": args.seed,
            "backend": kernels.BACKEND,
            "lambda1": None,
            "lambda1_weighted": None,
            "C1": None,
            "residuals": {"inner": None, "middle": None, "outer": None, "full": None},
            "positivity": {"interior_min": None, "boundary_quotient_min": None},
            "ordering_ok": None,
            "homotopy": [],
        }
        self.log = JsonlLog(out / "log.jsonl")
        self._eig = None

    def field(self, name, u):
        write_field(self.out, name, u, self.spec.output.formats)

    def eig(self):
        if self._eig is None:
            self._eig = principal_eigenpair(self.spec.mesh, self.spec.p, self.spec.eigen_options(), self.log)
            self.summary["lambda1"] = self._eig.lambda1
        return self._eig

    def weighted(self):
        eig = self.eig()
        theta = self.spec.theta_field(eig.lambda1)
        try:
            res = with_weight(eig, self.spec.mesh, self.spec.p, theta, self.spec.eigen_options())
        except InvalidWeight as exc:
            self.summary["weight_error"] = str(exc)
            return None
        self.summary["lambda1_weighted"], self.summary["C1"] = res.weighted_lambda1, res.C1
        return res

    def hypotheses(self):
        rep = check_hypotheses(self.spec, self.eig().lambda1)
        self.summary.update(h0_ok=rep.h0_ok, h1_ok=rep.h1_ok, hypotheses=rep.as_dict()["checks"])
        return rep

    def gate(self):
        failed = self.hypotheses().gate_failures(self.args.strict)
        if failed:
            raise HypothesisError("; ".join(f"{c.group} {c.clause}: {c.detail}" for c in failed),
                                  [c.clause for c in failed])

    def positivity(self, rep):
        self.summary["positivity"] = rep.as_dict()

    # -- stages --

    def check(self):
        self.weighted()
        self.rayleigh_probe()
        self.gate()

    def rayleigh_probe(self):
        """Seeded random zero-trace fields must not undercut lambda1 (reported, not gating)."""
        eig, mesh = self.eig(), self.spec.mesh
        rng = np.random.default_rng(self.args.seed)
        worst = np.inf
        for _ in range(PROBES):
            u = GridFunction(mesh, rng.standard_normal(mesh.n_nodes)).zero_trace()
            worst = min(worst, quotient(u, self.spec.p) / eig.lambda1)
        self.summary["rayleigh_probe_min_ratio"] = worst

    def eigen(self):
        eig = self.eig()
        self.weighted()
        self.field("u1", eig.u1)
        self.summary["eigen_iterations"] = eig.iterations

    def aux(self):
        self.gate()
        res = solve_auxiliary_report(self.spec, self.eig(), callback=self.log)
        self.field("ubar", res.u)
        self.summary["residuals"]["inner"] = res.residual
        self.summary["aux"] = {"C8": res.aux.C8, "r_aux": res.aux.r_aux, "max": float(res.u.values.max())}
        self.positivity(res.positivity)

    def frozen(self):
        self.gate()
        if self.args.v == "zero":
            v = GridFunction.zeros(self.spec.mesh)
        else:
            try:
                v = read_csv(self.args.v, self.spec.mesh)
            except (OSError, ValueError) as exc:
                raise ValidationError("--v", str(exc)) from None
        eig = self.eig()
        res = solve_frozen(v, self.spec, eig, callback=self.log)
        self.field("u0", res.u0)
        aux = solve_auxiliary_report(self.spec, eig, callback=self.log)
        mid = minimal_solution_report(v, self.spec, aux.u, eig.lambda1, callback=self.log)
        self.field("ubar", aux.u)
        self.field("beta_v", mid.u)
        self.summary["residuals"].update(inner=res.residual, middle=mid.residual)
        self.summary["ordering_ok"] = bool(np.all(aux.u.values <= mid.u.values + 1e-12))
        self.summary["frozen"] = {"seed_scale": res.seed_scale, "iterations": res.iterations,
                                  "middle_iterations": mid.iterations}
        self.positivity(res.positivity)

    def solve(self):
        self.gate()
        self.weighted()
        rep = run_fixed_point(self.spec, self.eig(), callback=self.log)
        self.field("ubar", rep.ubar)
        self.field("u", rep.final_u)
        self.summary["residuals"].update(rep.residuals)
        self.summary["ordering_ok"] = rep.ordering_ok
        self.summary["outer_iterations"] = rep.outer_iterations
        self.summary["outer_increments"] = rep.iterates
        self.summary["damping"] = rep.omega
        self.positivity(rep.positivity)

    def homotopy(self):
        self.gate()
        eig = self.eig()
        aux = solve_auxiliary_report(self.spec, eig, callback=self.log)
        self.summary["homotopy"] = homotopy_scan(self.spec, eig=eig, ubar=aux.u, threads=max(1, self.args.threads))
        self.summary["c1_bound"] = self.spec.solver.c1_bound


def _error_record(exc, stage):
    rec = {"status": "error", "stage": stage, "error": type(exc).__name__, "message": str(exc)}
    for attr in ("line", "column", "field", "failed"):
        if getattr(exc, attr, None) is not None:
            rec[attr] = list(exc.failed) if attr == "failed" else getattr(exc, attr)
    return rec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.config is None:
        print(json.dumps({"status": "error", "error": "ValidationError", "message": "--config is required"}),
              file=sys.stderr)
        return EXIT_CONFIG

    out = None
    try:
        spec = parse_config(args.config)
        out = Path(args.out or spec.output.directory)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "resolved-config.json", resolved_config(spec))
        run = _Run(args, spec, out)
        try:
            getattr(run, args.stage)()
        finally:
            run.log.close()
            write_json(out / "summary.json", run.summary)
    except (ParseError, ValidationError, OSError) as exc:
        code, err = EXIT_CONFIG, exc
    except HypothesisError as exc:
        code, err = EXIT_HYPOTHESIS, exc
    except AnisoPQError as exc:
        code, err = EXIT_NUMERIC, exc
    else:
        return EXIT_OK

    rec = _error_record(err, args.stage)
    print(json.dumps(rec, ensure_ascii=False), file=sys.stderr)
    if out is not None:
        write_json(out / "error.json", rec)
        summary = out / "summary.json"
        if summary.exists():
            data = json.loads(summary.read_text(encoding="utf-8"))
            data["status"] = "error"
            write_json(summary, data)
    return code
