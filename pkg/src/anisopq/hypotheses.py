"""Machine checks of the structural hypotheses on the data (H0) and reaction (H1).

Every sub-check ends in one of three states.  ``pass`` and ``fail`` are
decided on the discrete data; ``unverified`` marks a clause that cannot be
decided from finitely many samples (the monotone-direction condition for a
nodal-table exponent).  A group flag is true iff none of its sub-checks
failed; callers wanting "unverified" to count as failure use ``strict``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidWeight
from .eigen import check_weight
from .reaction import check_H1_v

PASS, FAIL, UNVERIFIED = "pass", "fail", "unverified"

# Clauses whose failure stops a run.  "r̂≢0" is reported but not gating: the
# convection-free case is the degenerate limit the solvers handle directly.
NON_GATING = frozenset({"r̂≢0"})


@dataclass(frozen=True)
class SubCheck:
    group: str
    clause: str
    status: str
    detail: str = ""

    def as_dict(self) -> dict:
        return {"group": self.group, "clause": self.clause, "status": self.status, "detail": self.detail}


@dataclass
class HypothesisReport:
    checks: list = field(default_factory=list)

    def _ok(self, group, strict=False):
        bad = (FAIL, UNVERIFIED) if strict else (FAIL,)
        return not any(c.group == group and c.status in bad for c in self.checks)

    @property
    def h0_ok(self) -> bool:
        return self._ok("H0")

    @property
    def h1_ok(self) -> bool:
        return self._ok("H1")

    def ok(self, strict: bool = False) -> bool:
        return self._ok("H0", strict) and self._ok("H1", strict)

    @property
    def messages(self) -> list:
        return [f"{c.group} {c.clause}: {c.detail}" for c in self.checks if c.status == FAIL]

    def gate_failures(self, strict: bool = False) -> list:
        """Sub-checks that should stop a run."""
        bad = (FAIL, UNVERIFIED) if strict else (FAIL,)
        return [c for c in self.checks if c.status in bad and c.clause not in NON_GATING]

    def status(self, clause: str) -> Optional[str]:
        for c in self.checks:
            if c.clause == clause:
                return c.status
        return None

    def as_dict(self) -> dict:
        return {
            "h0_ok": self.h0_ok,
            "h1_ok": self.h1_ok,
            "checks": [c.as_dict() for c in self.checks],
            "messages": self.messages,
        }


def _check(report, group, clause, ok, detail=""):
    report.checks.append(SubCheck(group, clause, PASS if ok else FAIL, "" if ok else detail))


def _h0(report, spec):
    p, q, tau, r_hat = spec.p, spec.q, spec.tau, spec.r_hat
    _check(report, "H0", "τ₊<p₋", tau.r_plus < p.r_minus,
           f"tau_+ = {tau.r_plus:.6g} is not below p_- = {p.r_minus:.6g}")
    _check(report, "H0", "q₊<p₋", q.r_plus < p.r_minus,
           f"q_+ = {q.r_plus:.6g} is not below p_- = {p.r_minus:.6g}")
    crit = p.critical_minus()
    _check(report, "H0", "p₊<p₋*", p.r_plus < crit,
           f"p_+ = {p.r_plus:.6g} is not below p_-^* = {crit:.6g}")
    spread = p.r_plus - p.r_minus
    _check(report, "H0", "0≤p₊−p₋≤1", spread <= 1.0, f"p_+ - p_- = {spread:.6g} exceeds 1")
    _check(report, "H0", "r̂≥0", bool(np.all(r_hat.values >= 0)),
           f"r_hat has negative values (min {r_hat.values.min():.6g})")
    _check(report, "H0", "r̂≢0", bool(np.any(r_hat.bary != 0)), "r_hat vanishes identically")

    if p.kind in ("constant", "affine"):
        # the directional derivative of an affine p along any eta is constant in z
        report.checks.append(SubCheck("H0", "monotone direction", PASS))
    else:
        report.checks.append(SubCheck(
            "H0", "monotone direction", UNVERIFIED,
            "cannot be decided for a nodal-table exponent" + ("" if spec.eta_hat is None else f" (eta_hat={list(spec.eta_hat)})"),
        ))


def _h1(report, spec, lambda1, n_x):
    model = spec.reaction_model(lambda1)
    p, q, mu = spec.p, spec.q, model.mu
    mu_n = mu.values[:, None]
    pv = p.values[:, None]

    f0 = model.f(np.zeros(mu.values.size), mu.values)
    _check(report, "H1", "f(z,0)=0", bool(np.all(f0 == 0)), f"max |f(z,0)| = {np.abs(f0).max():.3g}")

    # (i): 0 <= f <= a_rho on [0, rho] for rho in {1, 10}
    ok_i, detail = True, ""
    for rho_ in (1.0, 10.0):
        xs = np.linspace(0.0, rho_, n_x)[None, :]
        fx = model.f(xs, mu_n)
        if model.kind == "capped-concave":
            a_rho = model.c0 * max(model.delta, rho_) ** (mu.r_plus - 1.0) + model.c0
        else:
            a_rho = np.inf
        if np.any(fx < 0) or not np.all(np.isfinite(fx)) or np.any(fx > a_rho):
            ok_i, detail = False, f"f leaves [0, a_rho] on [0, {rho_:g}] (min {fx.min():.3g}, max {fx.max():.3g})"
            break
    _check(report, "H1", "0≤f≤a_ρ", ok_i, detail)

    # (ii): weight admissibility, then the two asymptotic slope bounds
    theta = spec.theta_field(lambda1)
    weight_ok, weight_msg = True, ""
    try:
        check_weight(theta, lambda1)
    except InvalidWeight as exc:
        weight_ok, weight_msg = False, str(exc)
    above = bool(np.any(theta.values > lambda1)) or bool(np.any(theta.values < 0))
    _check(report, "H1", "ϑ≤λ̂₁", not above, weight_msg)
    _check(report, "H1", "ϑ≢λ̂₁", weight_ok or above, weight_msg)

    x_hi = 1e6 * max(model.delta, 1.0)
    xs = np.geomspace(model.delta, x_hi, 60)[None, :]
    th = theta.values[:, None]
    good = (model.f(xs, mu_n) / xs ** (pv - 1.0) <= th + 1e-12) & (
        p.r_plus * model.F(xs, mu_n) / xs ** pv <= th + 1e-12
    )
    # x0(z): first sample from which every larger sample satisfies both bounds
    tail_ok = np.flip(np.logical_and.accumulate(np.flip(good, axis=1), axis=1), axis=1)
    has_x0 = tail_ok[:, -1]
    first = np.argmax(tail_ok, axis=1)
    x0 = float(xs[0, first[has_x0]].max()) if has_x0.any() else np.inf
    report.checks.append(SubCheck(
        "H1", "limsup f/x^(p−1)≤ϑ", PASS if has_x0.all() else FAIL,
        f"x0 = {x0:.6g}" if has_x0.all() else f"slope bound fails at the largest sample x = {x_hi:.3g}",
    ))

    # (iii) with eta0 = 0 and M = max(delta, 1)
    M = max(model.delta, 1.0)
    xs = np.geomspace(M, 100.0 * M, n_x)[None, :]
    slack = lambda1 * xs ** pv - p.r_plus * model.F(xs, mu_n)
    _check(report, "H1", "λ̂₁x^p−p₊F≥−η₀", bool(slack.min() >= 0.0),
           f"min over x >= {M:g} is {slack.min():.6g}")

    # (iv)
    _check(report, "H1", "μ₊<q₋", mu.r_plus < q.r_minus,
           f"mu_+ = {mu.r_plus:.6g} is not below q_- = {q.r_minus:.6g}")
    xs = np.linspace(0.0, model.delta, n_x)[None, :]
    lower = model.c0 * np.where(xs > 0, xs, 1.0) ** (mu_n - 1.0) * (xs > 0)
    gap = model.f(xs, mu_n) - lower
    _check(report, "H1", "C₀x^(μ−1)≤f on [0,δ]", bool(gap.min() >= -1e-12 * model.c0),
           f"worst gap {gap.min():.3g}")

    # (v)
    v = check_H1_v(model, p, n_x)
    _check(report, "H1", "f(x/t)≤t^(1−p)f(x)", v["ok"],
           f"worst relative margin {v['worst_margin']:.3g} at {v['at']}")

    # needed by the monotone minimal-solution iteration
    xs = np.linspace(0.0, 10.0 * model.delta, 4 * n_x)[None, :]
    inc = np.diff(model.f(xs, mu_n), axis=1)
    _check(report, "H1", "f nondecreasing", bool(inc.min() >= -1e-12), f"largest drop {-inc.min():.3g}")


def check_hypotheses(spec, lambda1: float, n_x: int = 50) -> HypothesisReport:
    """Evaluate every sub-check of H0 and H1 for ``spec`` given the principal eigenvalue."""
    report = HypothesisReport()
    _h0(report, spec)
    _h1(report, spec, lambda1, n_x)
    return report
