"""Finite-rank operators and the operator-approximation functionals.

All sup-type quantities here are estimated by search and returned as
certified lower bounds: the witness is re-evaluated with the exact scalar
oracles before it is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .norms import ConvexBody, NormOracle, _split_top, dist_to_body, into_body
from .search import SearchBudget, ascend
from .seqspace import FinFunctional, SeqVec, functional_from_json, make_vec, sup_norm, vec_from_json

__all__ = [
    "FinOperator",
    "Identity",
    "Proj",
    "TailProj",
    "LimitProj",
    "RankOne",
    "LinComb",
    "Compose",
    "SearchBudget",
    "apply_op",
    "parse_op",
    "op_gauge_norm",
    "ukap_defect",
    "cond29_objective",
    "cond29_sup",
    "cond29_grid",
    "thm_fn_estimate",
    "remark_f_curve",
]


class FinOperator:
    """Linear map on head+tail vectors; subclasses define ``apply`` and ``matrix``."""

    horizon: int = 0

    def apply(self, x: SeqVec) -> SeqVec:
        raise NotImplementedError

    def matrix(self, n: int) -> np.ndarray:
        """Action on tail-0 vectors supported in ``1..n`` (requires ``n >= horizon``)."""
        raise NotImplementedError

    def __call__(self, x: SeqVec) -> SeqVec:
        return self.apply(x)

    def __add__(self, other: "FinOperator") -> "LinComb":
        return LinComb(1.0, self, 1.0, other)

    def __sub__(self, other: "FinOperator") -> "LinComb":
        return LinComb(1.0, self, -1.0, other)

    def __rmul__(self, a: float) -> "LinComb":
        return LinComb(float(a), self, 0.0, Identity())

    def __matmul__(self, other: "FinOperator") -> "Compose":
        return Compose(self, other)

    def batch(self, X: np.ndarray) -> np.ndarray:
        return X @ self.matrix(X.shape[1]).T


@dataclass(frozen=True, eq=True)
class Identity(FinOperator):
    def apply(self, x):
        return x

    def matrix(self, n):
        return np.eye(n)

    def __str__(self):
        return "I"


@dataclass(frozen=True)
class Proj(FinOperator):
    """``P_n``: keep the first ``n`` coordinates."""

    n: int

    @property
    def horizon(self):
        return self.n

    def apply(self, x):
        return make_vec(x.coords(self.n), 0.0)

    def matrix(self, n):
        return np.diag((np.arange(n) < self.n).astype(float))

    def __str__(self):
        return f"P:{self.n}"


@dataclass(frozen=True)
class TailProj(FinOperator):
    """``R_n = I - P_n``."""

    n: int

    @property
    def horizon(self):
        return self.n

    def apply(self, x):
        head = [0.0] * self.n + list(x.head[self.n :])
        return make_vec(head, x.tail)

    def matrix(self, n):
        return np.diag((np.arange(n) >= self.n).astype(float))

    def __str__(self):
        return f"R:{self.n}"


@dataclass(frozen=True)
class LimitProj(FinOperator):
    """``Px = (lim_k x(k)) e`` on ``c``; zero on ``c0``."""

    def apply(self, x):
        return make_vec((), x.tail)

    def matrix(self, n):
        return np.zeros((n, n))

    def __str__(self):
        return "limP"


@dataclass(frozen=True)
class RankOne(FinOperator):
    """``x -> estar(x) e``."""

    e: SeqVec
    estar: FinFunctional

    def __post_init__(self):
        if self.e.tail != 0.0:
            raise ValueError("rank-one range vector must be tail 0 here")

    @property
    def horizon(self):
        return max(self.e.horizon, self.estar.horizon)

    def apply(self, x):
        return self.e * self.estar(x)

    def matrix(self, n):
        if n < self.horizon:
            raise ValueError("matrix size below operator horizon")
        return np.outer(self.e.coords(n), self.estar.vector(n))

    def __str__(self):
        return f"rank1:{self.e.to_json()},{self.estar.to_json()}"


@dataclass(frozen=True)
class LinComb(FinOperator):
    a: float
    A: FinOperator
    b: float
    B: FinOperator

    @property
    def horizon(self):
        return max(self.A.horizon, self.B.horizon)

    def apply(self, x):
        return self.A.apply(x) * self.a + self.B.apply(x) * self.b

    def matrix(self, n):
        return self.a * self.A.matrix(n) + self.b * self.B.matrix(n)

    def __str__(self):
        return f"lin:{self.a!r},({self.A}),{self.b!r},({self.B})"


@dataclass(frozen=True)
class Compose(FinOperator):
    """``A @ B`` applies ``B`` first."""

    A: FinOperator
    B: FinOperator

    @property
    def horizon(self):
        return max(self.A.horizon, self.B.horizon)

    def apply(self, x):
        return self.A.apply(self.B.apply(x))

    def matrix(self, n):
        return self.A.matrix(n) @ self.B.matrix(n)

    def __str__(self):
        return f"comp:({self.A}),({self.B})"


def apply_op(T: FinOperator, x: SeqVec) -> SeqVec:
    return T.apply(x)


def parse_op(spec: str) -> FinOperator:
    """Parse ``P:n``, ``R:n``, ``I``, ``limP``, ``rank1:e,estar``, ``lin:a,A,b,B``, ``comp:A,B``.

    Operands of ``lin``/``comp`` may be parenthesised; ``e``/``estar`` are JSON
    vector literals.
    """
    spec = spec.strip()
    if spec.startswith("(") and spec.endswith(")"):
        return parse_op(spec[1:-1])
    kind, _, rest = spec.partition(":")
    if kind == "I":
        return Identity()
    if kind == "limP":
        return LimitProj()
    if kind == "P":
        return Proj(int(rest))
    if kind == "R":
        return TailProj(int(rest))
    args = _split_top(rest)
    if kind == "rank1" and len(args) == 2:
        return RankOne(vec_from_json(args[0]), functional_from_json(args[1]))
    if kind == "lin" and len(args) == 4:
        return LinComb(float(args[0]), parse_op(args[1]), float(args[2]), parse_op(args[3]))
    if kind == "comp" and len(args) == 2:
        return Compose(parse_op(args[0]), parse_op(args[1]))
    raise ValueError(f"bad operator spec {spec!r}")


# ---------------------------------------------------------------- helpers


def _fresh_spikes(base: np.ndarray, lo: int, hi: int, scales: Sequence[float]) -> list[np.ndarray]:
    out = []
    for r in range(lo, hi):
        for s in scales:
            v = base.copy()
            v[r] += s
            out.append(v)
    return out


def _dim_cap(gauge: NormOracle, active: int) -> int:
    return active if gauge.dim is None else min(active, gauge.dim)


@dataclass
class Estimate:
    """Search estimate with its certified side and witness."""

    value: float
    side: str
    witness: SeqVec
    extra: dict

    def to_dict(self) -> dict:
        return {"value": self.value, "side": self.side, "witness": self.witness.to_dict(), **self.extra}


def op_gauge_norm(
    T: FinOperator,
    gauge: NormOracle,
    budget: SearchBudget = SearchBudget(),
    seeds: Sequence[SeqVec] = (),
) -> tuple[float, SeqVec]:
    """Certified lower bound on ``sup{gauge(Ty) : gauge(y) <= 1}`` and its witness ``y``.

    The ball may be non-symmetric, so each seed is tried with both signs.
    """
    active = max([T.horizon, 1] + [s.horizon for s in seeds])
    _, n1 = budget.dims(active)
    M = T.matrix(n1)
    hi = _dim_cap(gauge, n1)

    def clip(Z: np.ndarray) -> np.ndarray:
        if hi < n1:
            Z = Z.copy()
            Z[:, hi:] = 0.0
        return Z

    def objective(Z: np.ndarray) -> np.ndarray:
        g = gauge.batch(Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = gauge.batch(Z @ M.T) / g
        return np.where((g > 0) & np.isfinite(r), r, -np.inf)

    starts = []
    for s in seeds:
        starts += [s.coords(n1), -s.coords(n1)]
    for k in range(hi):
        for sgn in (1.0, -1.0):
            v = np.zeros(n1)
            v[k] = sgn
            starts.append(v)
    res = ascend(objective, np.stack(starts), budget, active=active, transform=clip, tag=21)
    val, y = -math.inf, None
    for z in [make_vec(res.best)] + list(seeds) + [-s for s in seeds]:
        gz = gauge(z)
        if gz > 0 and math.isfinite(gz):
            v = gauge(T.apply(z)) / gz
            if v > val:
                val, y = v, z / gz
    return val, y


def ukap_defect(T: FinOperator, norm: NormOracle, budget: SearchBudget = SearchBudget()) -> tuple[float, SeqVec]:
    """Certified lower bound on ``||I - 2T||`` in ``norm``."""
    return op_gauge_norm(LinComb(1.0, Identity(), -2.0, T), norm, budget)


def cond29_objective(T: FinOperator, y: SeqVec, lam: float, gauge: NormOracle) -> float:
    """``gauge((1 + lam) T y - lam y)``."""
    return gauge(T.apply(y) * (1.0 + lam) - y * lam)


def cond29_grid(
    T: FinOperator,
    x: SeqVec,
    lam: float,
    eps_grid: Sequence[float],
    gauge: NormOracle,
    constraint_norm: NormOracle,
    budget: SearchBudget = SearchBudget(),
) -> list[Estimate]:
    """Lower bounds for the constrained sup over an increasing ``eps`` grid.

    Witnesses from smaller ``eps`` seed larger ones, so the reported values are
    nondecreasing in ``eps``.
    """
    if not 0.0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    if gauge(x) > 1.0 + 1e-12:
        raise ValueError("x must lie in the gauge ball")
    body = ConvexBody(gauge)
    active = max(x.horizon, T.horizon, 1)
    _, n1 = budget.dims(active)
    M = T.matrix(n1)
    xv = x.coords(n1)
    Tx = M @ xv
    eps_sorted = sorted(eps_grid)
    out: list[Estimate] = []
    carry: list[np.ndarray] = [xv]
    for i, eps in enumerate(eps_sorted):
        if eps <= 0:
            raise ValueError("eps must be positive")

        def objective(Y: np.ndarray, eps=eps) -> np.ndarray:
            TY = Y @ M.T
            ok = constraint_norm.batch(Tx[None, :] - TY) <= eps
            val = gauge.batch((1.0 + lam) * TY - lam * Y)
            return np.where(ok, val, -np.inf)

        starts = list(carry)
        # Fresh-coordinate spikes beyond the operator horizon.
        for r in range(active, n1):
            for s in (0.5, -0.5, 1.0, -1.0):
                v = xv.copy()
                v[r] += s
                starts.append(body.retract(v[None, :])[0])
        res = ascend(objective, np.stack(starts), budget, active=active, transform=body.retract, tag=31 + i)
        cand = [res.best] + carry
        best_val, best_y = -math.inf, x
        for c in cand:
            y = into_body(body, make_vec(c))
            if constraint_norm(make_vec(M @ (xv - y.coords(n1)))) > eps:
                continue
            v = cond29_objective(T, y, lam, gauge)
            if v > best_val:
                best_val, best_y = v, y
        if out and out[-1].value > best_val:
            best_val, best_y = out[-1].value, out[-1].witness
        carry = [best_y.coords(n1)] + [res.population[j] for j in np.argsort(-res.values)[:4]]
        out.append(Estimate(best_val, "lower", best_y, {"eps": eps}))
    return out


def cond29_sup(
    T: FinOperator,
    x: SeqVec,
    lam: float,
    eps: float,
    gauge: NormOracle,
    constraint_norm: NormOracle,
    budget: SearchBudget = SearchBudget(),
) -> float:
    """Certified lower bound on ``sup{gauge((1+lam)Ty - lam y) : gauge(y) <= 1, N(T(x - y)) <= eps}``."""
    return cond29_grid(T, x, lam, [eps], gauge, constraint_norm, budget)[0].value


def thm_fn_estimate(
    Phi: FinOperator,
    body: ConvexBody,
    x: SeqVec,
    lam: float,
    eps: float,
    budget: SearchBudget = SearchBudget(),
    refine: int = 3,
) -> dict:
    """Bracket for ``sup{dist((1+lam)Phi y - lam y, C) : y in C, ||Phi x - Phi y|| <= eps}``.

    Distances are in the sup norm.  ``lower`` is certified: for the best
    witness ``y`` with ``u = (1+lam)Phi y - lam y``, subadditivity of the gauge
    gives ``dist(u, C) >= (gauge(u) - 1) / upper``.  ``upper`` is the largest
    certified distance upper bound (``dist_to_body``) among the top witnesses.
    """
    if not body.contains(x, 1e-12):
        raise ValueError("x must lie in the body")
    g = body.gauge
    active = max(x.horizon, Phi.horizon, 1)
    # A fresh spike t e_r survives the eps-constraint only when 2^-r t^2 is of
    # order eps, so the fresh-coordinate reach has to grow like log2(1/eps).
    if eps > 0:
        budget = budget.scaled(horizon=max(budget.horizon, math.ceil(math.log2(max(1.0, 1.0 / eps))) + 2))
    _, n1 = budget.dims(active)
    M = Phi.matrix(n1)
    xv = x.coords(n1)
    Px = M @ xv
    c2 = g.upper

    def objective(Y: np.ndarray) -> np.ndarray:
        PY = Y @ M.T
        ok = np.abs(PY - Px[None, :]).max(axis=1) <= eps
        gu = g.batch((1.0 + lam) * PY - lam * Y)
        return np.where(ok, np.maximum(gu - 1.0, 0.0) / c2, -np.inf)

    starts = [xv]
    nx = sup_norm(x)
    starts += [body.retract(v[None, :])[0] for v in _fresh_spikes(xv, _dim_cap(g, active), _dim_cap(g, n1), (nx, -nx, 0.5, -0.5))]
    res = ascend(objective, np.stack(starts), budget, active=active, transform=body.retract, tag=41)
    order = np.argsort(-res.values)
    pool = [res.best] + [res.population[j] for j in order[:refine]]
    lower, upper, wit = 0.0, 0.0, x
    for c in pool:
        y = into_body(body, make_vec(c))
        if sup_norm(Phi.apply(y) - Phi.apply(x)) > eps:
            continue
        u = Phi.apply(y) * (1.0 + lam) - y * lam
        lo = max(g(u) - 1.0, 0.0) / c2
        up, _ = dist_to_body(body, u, budget.scaled(restarts=min(budget.restarts, 16), iters=min(budget.iters, 200)))
        if lo > lower:
            lower, wit = lo, y
        upper = max(upper, up)
    return {"eps": eps, "lower": lower, "upper": max(upper, lower), "witness": wit}


def remark_f_curve(
    P: RankOne,
    norm: NormOracle,
    eps_grid: Sequence[float],
    budget: SearchBudget = SearchBudget(),
    eq_tol: float = 1e-12,
) -> list[Estimate]:
    """Lower bounds for ``f(eps) = sup{||Py - Ry|| : ||y|| <= 1, ||P(e - y)|| <= eps}``.

    ``eps = 0`` is treated as the equality ``estar(y) = 1`` up to ``eq_tol``.
    """
    e, estar = P.e, P.estar
    if abs(estar(e) - 1.0) > 1e-12:
        raise ValueError("rank-one projection needs estar(e) = 1")
    body = ConvexBody(norm)
    active = max(P.horizon, 1)
    _, n1 = budget.dims(active)
    ev, fv = e.coords(n1), estar.vector(n1)
    ne_pos, ne_neg = norm(e), norm(-e)
    Rm = np.eye(n1) - np.outer(ev, fv)

    def constraint_gap(Y: np.ndarray) -> np.ndarray:
        s = 1.0 - Y @ fv
        return np.where(s >= 0, s * ne_pos, -s * ne_neg)

    out: list[Estimate] = []
    carry = [body.retract(ev[None, :])[0]]
    for i, eps in enumerate(sorted(eps_grid)):
        tol = eq_tol if eps == 0 else eps

        def objective(Y: np.ndarray, tol=tol) -> np.ndarray:
            PY = np.outer(Y @ fv, ev)
            val = norm.batch(PY - Y @ Rm.T)
            return np.where(constraint_gap(Y) <= tol, val, -np.inf)

        starts = list(carry)
        base = ev * (1.0 - min(tol, 0.5) / max(ne_pos, 1e-300))
        for v in _fresh_spikes(base, _dim_cap(norm, active), _dim_cap(norm, n1), (0.5, -0.5, 1.0, -1.0)):
            starts.append(body.retract(v[None, :])[0])
        res = ascend(objective, np.stack(starts), budget, active=active, transform=body.retract, tag=51 + i)
        best_val, best_y = -math.inf, e
        for c in [res.best] + carry:
            y = into_body(body, make_vec(c))
            gap = 1.0 - estar(y)
            gap = gap * ne_pos if gap >= 0 else -gap * ne_neg
            if gap > tol:
                continue
            v = norm(P.apply(y) - (y - P.apply(y)))
            if v > best_val:
                best_val, best_y = v, y
        if out and out[-1].value > best_val:
            best_val, best_y = out[-1].value, out[-1].witness
        carry = [best_y.coords(n1)]
        out.append(Estimate(best_val, "lower", best_y, {"eps": eps}))
    return out
