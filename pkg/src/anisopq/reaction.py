"""Reaction f(z, x), its primitive, and the frozen reaction g_v."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidField
from .fields import ExponentField, GridFunction

T_GRID = np.round(np.arange(1, 10) / 10.0, 12)


@dataclass(frozen=True, eq=False)
class ReactionModel:
    """f(z, x) = c0 min(x, delta)^(mu(z)-1) for x >= 0, zero for x < 0.

    ``kind="custom-table"`` replaces the formula by a piecewise-linear table
    in x (shared by all z, linearly extrapolated past the last knot); c0,
    delta and mu then only describe the concavity bound checked by H1(iv).
    """

    mu: ExponentField
    c0: float
    delta: float
    theta: Optional[GridFunction] = None
    kind: str = "capped-concave"
    table_x: Optional[np.ndarray] = None
    table_f: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.c0 <= 0 or self.delta <= 0:
            raise InvalidField("c0 and delta must be positive")
        if self.kind == "custom-table":
            xs = np.asarray(self.table_x, dtype=float)
            fs = np.asarray(self.table_f, dtype=float)
            if xs.ndim != 1 or xs.shape != fs.shape or xs.size < 2:
                raise InvalidField("reaction table needs matching x and f arrays of length >= 2")
            if xs[0] != 0.0 or fs[0] != 0.0 or np.any(np.diff(xs) <= 0):
                raise InvalidField("reaction table must start at (0, 0) with increasing x")
            object.__setattr__(self, "table_x", xs)
            object.__setattr__(self, "table_f", fs)
        elif self.kind != "capped-concave":
            raise InvalidField(f"unknown reaction kind {self.kind!r}")

    # -- vectorised evaluation: mu_vals is the exponent at each sample point --

    def f(self, x, mu_vals):
        x = np.asarray(x, dtype=float)
        if self.kind == "custom-table":
            return self._table_f(x)
        xp = np.clip(x, 0.0, self.delta)
        return np.where(x > 0, self.c0 * xp ** (mu_vals - 1.0), 0.0)

    def F(self, x, mu_vals):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        if self.kind == "custom-table":
            return self._table_F(x)
        c0, d = self.c0, self.delta
        low = c0 / mu_vals * np.minimum(x, d) ** mu_vals
        return low + c0 * d ** (mu_vals - 1.0) * np.maximum(x - d, 0.0)

    def df(self, x, mu_vals):
        """Derivative in x (0 where f is flat or x <= 0)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "custom-table":
            slopes = np.diff(self.table_f) / np.diff(self.table_x)
            k = np.clip(np.searchsorted(self.table_x, x, side="right") - 1, 0, slopes.size - 1)
            return np.where(x > 0, slopes[k], 0.0)
        inside = (x > 0) & (x < self.delta)
        xs = np.where(inside, x, 1.0)
        return np.where(inside, self.c0 * (mu_vals - 1.0) * xs ** (mu_vals - 2.0), 0.0)

    def _table_f(self, x):
        xs, fs = self.table_x, self.table_f
        last = (fs[-1] - fs[-2]) / (xs[-1] - xs[-2])
        out = np.interp(x, xs, fs)
        out = np.where(x > xs[-1], fs[-1] + last * (x - xs[-1]), out)
        return np.where(x > 0, out, 0.0)

    def _table_F(self, x):
        xs, fs = self.table_x, self.table_f
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (fs[1:] + fs[:-1]) * np.diff(xs))])
        k = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, xs.size - 2)
        fx = self._table_f(x)
        within = cum[k] + 0.5 * (fs[k] + fx) * (x - xs[k])
        beyond = cum[-1] + 0.5 * (fs[-1] + fx) * (x - xs[-1])
        return np.where(x > xs[-1], beyond, within)


def _mu_at(model: ReactionModel, z, at: str):
    src = model.mu.values if at == "node" else model.mu.bary
    return src if z is None else src[z]


def eval_f(model: ReactionModel, z, x, at: str = "element"):
    """f at node/element ``z`` (index, index array, or None for all)."""
    return model.f(x, _mu_at(model, z, at))


def eval_F(model: ReactionModel, z, x, at: str = "element"):
    return model.F(x, _mu_at(model, z, at))


def check_H1_v(model: ReactionModel, p: ExponentField, n_x: int = 50) -> dict:
    """Sample f(z, x/t) <= t^(1-p(z)) f(z, x) over t in {0.1..0.9}, x in [0, 10 delta], all nodes.

    ``worst_margin`` is the smallest value of t^(1-p) f(x) - f(x/t).
    """
    xs = np.linspace(0.0, 10.0 * model.delta, n_x)
    mu = model.mu.values[:, None]
    pv = p.values[:, None]
    worst = np.inf
    where = None
    for t in T_GRID:
        lhs = model.f(xs[None, :] / t, mu)
        rhs = t ** (1.0 - pv) * model.f(xs[None, :], mu)
        margin = rhs - lhs
        scale = 1.0 + np.abs(rhs)
        rel = margin / scale
        k = np.unravel_index(np.argmin(rel), rel.shape)
        if rel[k] < worst:
            worst = float(rel[k])
            where = {"t": float(t), "x": float(xs[k[1]]), "node": int(k[0])}
    return {"ok": bool(worst >= -1e-12), "worst_margin": worst, "at": where}


@dataclass(frozen=True, eq=False)
class FrozenReaction:
    """g_v(z, x) = r_hat(z) |Dv(z)|^(tau(z)-1) + f(z, x), per element."""

    r_hat: GridFunction
    tau: ExponentField
    model: ReactionModel
    drive: np.ndarray

    @classmethod
    def freeze(cls, v: GridFunction, r_hat: GridFunction, tau: ExponentField, model: ReactionModel):
        drive = v.grad_norms ** (tau.bary - 1.0)
        return cls(r_hat, tau, model, drive)

    @property
    def forcing(self) -> np.ndarray:
        """The x-independent part r_hat |Dv|^(tau-1) at each element."""
        return self.r_hat.bary * self.drive

    def g(self, x_e):
        return self.forcing + self.model.f(x_e, self.model.mu.bary)

    def G(self, x_e):
        """Primitive of g_v evaluated at x^+."""
        xp = np.maximum(x_e, 0.0)
        return self.forcing * xp + self.model.F(xp, self.model.mu.bary)


def eval_g_v(fr: FrozenReaction, element, x):
    mu = fr.model.mu.bary[element]
    return fr.forcing[element] + fr.model.f(x, mu)
