"""Search-based estimators for extreme, MLUR, LUR and denting behaviour at a point.

Every reported ``certified`` value comes from re-evaluating a stored witness
with the exact scalar oracles; the search only proposes witnesses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .norms import MLUR3, ConvexBody, mlur_gauge
from .search import SearchBudget, ascend, bisect_scale
from .seqspace import FinFunctional, SeqVec, active_horizon, make_vec, sup_norm, vec_from_json
from .witnesses import functional_sup, slice_lb_certificate

DELTA_GRID = (1e-1, 1e-2, 1e-3, 1e-4)
BOUNDARY_TOL = 1e-9
CSV_COLUMNS = ("quantity", "grid_param", "estimate", "certified_bound", "side", "seed")


@dataclass
class ProbeReport:
    quantity: str
    estimate: float
    certified: float
    side: str
    witness: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)
    grid: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.budget.get("seed", 0)

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "estimate": self.estimate,
            "certified": self.certified,
            "side": self.side,
            "witness": {k: v.to_dict() for k, v in self.witness.items()},
            "budget": self.budget,
            "seed": self.seed,
            "grid": self.grid,
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_rows(self) -> list[tuple]:
        rows = self.grid or [{"param": "", "estimate": self.estimate, "certified": self.certified}]
        return [(self.quantity, r["param"], r["estimate"], r["certified"], self.side, self.seed) for r in rows]


def _on_boundary(body: ConvexBody, x: SeqVec) -> SeqVec:
    g = body.gauge(x)
    if abs(g - 1.0) > BOUNDARY_TOL:
        raise ValueError(f"x is not on the boundary of {body.name} (gauge {g})")
    return x


def _label(grid: list[dict]) -> str:
    """``trend-0`` when the smallest-delta estimate halves or drops below 1e-3."""
    rows = sorted(grid, key=lambda r: r["param"])
    lo, hi = rows[0]["estimate"], rows[-1]["estimate"]
    return "trend-0" if lo <= 0.5 * hi or lo < 1e-3 else "floor"


# ---------------------------------------------------------------- slices


@dataclass
class SliceSpec:
    """Open slice ``{u in body : f(u) > level}``; ``level = M - depth`` or a threshold ``a``."""

    f: FinFunctional
    mode: str
    param: float
    sup_estimate: float
    witness: SeqVec

    @property
    def level(self) -> float:
        return self.sup_estimate - self.param if self.mode == "depth" else self.param

    @classmethod
    def depth(cls, body: ConvexBody, f: FinFunctional, eps: float, budget: SearchBudget = SearchBudget()) -> "SliceSpec":
        if eps <= 0:
            raise ValueError("depth must be positive")
        M, u = functional_sup(body, f, budget)
        return cls(f, "depth", eps, M, u)

    @classmethod
    def threshold(cls, body: ConvexBody, f: FinFunctional, a: float, budget: SearchBudget = SearchBudget()) -> "SliceSpec":
        M, u = functional_sup(body, f, budget)
        if not f(u) > a:
            raise ValueError(f"empty slice: estimated sup {M} <= a = {a}")
        return cls(f, "threshold", a, M, u)

    def to_dict(self) -> dict:
        return {
            "f": self.f.to_dict(),
            "mode": self.mode,
            "param": self.param,
            "sup_estimate": self.sup_estimate,
            "level": self.level,
        }


def _metric(name: str):
    if name == "sup":
        return sup_norm, lambda X: np.abs(X).max(axis=1)
    if name == "mlur3":
        return mlur_gauge, MLUR3.batch
    raise ValueError(f"unknown metric {name!r} (use sup or mlur3)")


def slice_diameter(
    body: ConvexBody, slice: SliceSpec, budget: SearchBudget = SearchBudget(), metric: str = "sup"
) -> ProbeReport:
    """Lower estimate of the slice diameter from a pair search; on the MLUR3 ball the
    Claim 2 certificate is added as a second witness."""
    scalar, batch = _metric(metric)
    g = body.gauge
    f, level = slice.f, slice.level
    if not f(slice.witness) > level:
        raise ValueError("empty slice")
    active = max(active_horizon(slice.witness, [f]), 1)
    _, nb = budget.dims(active)
    fv = f.vector(nb)
    w = slice.witness.coords(nb)

    def split(Z):
        return Z[:, :nb], Z[:, nb:]

    def transform(Z):
        U, V = split(Z)
        return np.hstack([body.retract(U), body.retract(V)])

    def objective(Z):
        U, V = split(Z)
        ok = (U @ fv > level) & (V @ fv > level)
        return np.where(ok, batch(U - V), -np.inf)

    starts = [np.hstack([w, w])]
    for r in range(nb):
        for s in (1.0, 0.5, 0.1):
            e = np.zeros(nb)
            e[r] = s
            starts.append(np.hstack([w + e, w - e]))
            starts.append(np.hstack([w, w - e]))
    starts = transform(np.stack(starts))
    res = ascend(objective, starts, budget, active=active, transform=transform, tag=81, blocks=2)
    U, V = split(res.best[None, :])
    u, v = make_vec(U[0]), make_vec(V[0])
    certified, side = 0.0, "lower"
    if g(u) <= 1.0 and g(v) <= 1.0 and f(u) > level and f(v) > level:
        certified = scalar(u - v)
    else:
        u = v = slice.witness
    witness = {"u": u, "v": v}
    extra = {"slice": slice.to_dict(), "metric": metric, "upper_from_constants": 2.0 / g.lower}
    if g is MLUR3:
        cert = slice_lb_certificate(f, level, 0.995, budget, point=slice.witness)
        bound = cert.bound_sup if metric == "sup" else cert.bound_mlur
        extra["claim2"] = {"ok": cert.ok, "bound": bound}
        if cert.ok and bound > certified:
            certified, witness = bound, {"u": cert.x, "v": cert.y}
    return ProbeReport(
        "slice_diameter", max(res.value, certified), certified, side, witness, budget.to_dict(), [], extra
    )


# ---------------------------------------------------------------- midpoint modulus


def _modulus_search(body, x, delta, budget, warm, tag):
    g = body.gauge
    active = max(x.horizon, 1)
    _, n1 = budget.dims(active)
    xv = x.coords(n1)
    cap = 1.0 + delta
    t_hi = 2.0 * cap / g.lower

    def feasible(D):
        return np.maximum(g.batch(xv + D), g.batch(xv - D)) <= cap

    def transform(D):
        D = body.clip(D)
        size = np.abs(D).max(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            unit = np.where(size[:, None] > 0, D / size[:, None], 0.0)
        return bisect_scale(feasible, unit, t_hi, steps=30)[:, None] * unit

    def objective(D):
        return np.abs(D).max(axis=1)

    starts = [w.coords(n1) for w in warm]
    for r in range(n1):
        e = np.zeros(n1)
        e[r] = 1.0
        starts += [e, -e]
    starts.append(xv)
    res = ascend(objective, transform(np.stack(starts)), budget, active=active, transform=transform, tag=tag)
    return make_vec(res.best), res.value


def _certify_modulus(body, x, d, delta):
    g = body.gauge
    for _ in range(60):
        if max(g(x + d), g(x - d)) <= 1.0 + delta:
            return d, sup_norm(d)
        d = d * (1 - 1e-9)
    return make_vec(()), 0.0


def midpoint_modulus_grid(
    body: ConvexBody, x: SeqVec, deltas: Sequence[float] = DELTA_GRID, budget: SearchBudget = SearchBudget()
) -> ProbeReport:
    """``sup{||d||_inf : max(g(x+d), g(x-d)) <= 1 + delta}`` on a grid, warm-started in increasing delta."""
    _on_boundary(body, x)
    grid, warm, best_d = [], [], make_vec(())
    best_c = 0.0
    for i, delta in enumerate(sorted(deltas)):
        d, _ = _modulus_search(body, x, delta, budget, warm, 91 + i)
        d, c = _certify_modulus(body, x, d, delta)
        if c >= best_c:
            best_c, best_d = c, d
        warm = [best_d] if best_c > 0 else []
        grid.append({"param": delta, "estimate": best_c, "certified": best_c, "witness": best_d.to_dict()})
    grid.sort(key=lambda r: -r["param"])
    return ProbeReport(
        "midpoint_modulus",
        grid[-1]["estimate"],
        grid[-1]["certified"],
        "lower",
        {"d": vec_from_json(grid[-1]["witness"])},
        budget.to_dict(),
        grid,
        {"body": body.name},
    )


def midpoint_modulus(body: ConvexBody, x: SeqVec, delta: float, budget: SearchBudget = SearchBudget()) -> ProbeReport:
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return midpoint_modulus_grid(body, x, (delta,), budget)


# ---------------------------------------------------------------- LUR gap


def lur_gap_grid(
    body: ConvexBody, x: SeqVec, deltas: Sequence[float] = DELTA_GRID, budget: SearchBudget = SearchBudget()
) -> ProbeReport:
    """``sup{||x - y||_inf : g(y) <= 1, g(x + y) >= 2 - delta}`` on a grid (warm-started)."""
    _on_boundary(body, x)
    g = body.gauge
    active = max(x.horizon, 1)
    _, n1 = budget.dims(active)
    xv = x.coords(n1)
    grid, best_y, best_c = [], x, 0.0
    for i, delta in enumerate(sorted(deltas)):
        floor = 2.0 - delta

        def objective(Y, floor=floor):
            ok = g.batch(xv + Y) >= floor
            return np.where(ok, np.abs(xv - Y).max(axis=1), -np.inf)

        starts = [xv, best_y.coords(n1)]
        for r in range(n1):
            for s in (1.0, -1.0, 0.5, -0.5):
                e = np.zeros(n1)
                e[r] = s
                starts.append(xv + e)
        starts = body.retract(np.stack(starts))
        res = ascend(objective, starts, budget, active=active, transform=body.retract, tag=101 + i)
        y = make_vec(res.best)
        if g(y) <= 1.0 and g(x + y) >= floor and sup_norm(x - y) > best_c:
            best_y, best_c = y, sup_norm(x - y)
        grid.append({"param": delta, "estimate": best_c, "certified": best_c, "witness": best_y.to_dict()})
    grid.sort(key=lambda r: -r["param"])
    return ProbeReport(
        "lur_gap",
        grid[-1]["estimate"],
        grid[-1]["certified"],
        "lower",
        {"y": vec_from_json(grid[-1]["witness"])},
        budget.to_dict(),
        grid,
        {"body": body.name},
    )


def lur_gap(body: ConvexBody, x: SeqVec, delta: float, budget: SearchBudget = SearchBudget()) -> ProbeReport:
    return lur_gap_grid(body, x, (delta,), budget)


# ---------------------------------------------------------------- denting


def _candidate_functionals(body: ConvexBody, x: SeqVec, budget: SearchBudget, count: int) -> list[FinFunctional]:
    g = body.gauge
    if g.subgradient is None:
        raise ValueError(f"{g.name} has no subgradient oracle")
    f0 = g.subgradient(x)
    fns = [f0]
    rng = budget.rng(111)
    n = max(f0.horizon, x.horizon) + 2
    if g.dim is not None:
        n = min(n, g.dim)
    scale = max(f0.l1_norm(), 1.0)
    for _ in range(count - 1):
        noise = rng.standard_normal(n) * 0.05 * scale / n
        fns.append(f0 + FinFunctional(tuple(noise)))
    return fns


def denting_probe(
    body: ConvexBody,
    x: SeqVec,
    budget: SearchBudget = SearchBudget(),
    deltas: Sequence[float] = DELTA_GRID,
    functionals: int = 3,
    metric: str = "sup",
) -> ProbeReport:
    """Smallest slice diameter found over slices ``S(f, delta)`` containing ``x``.

    ``estimate`` at each delta is the minimum over candidate functionals of a
    lower diameter estimate, so it is an indicator, not a bound.  On the MLUR3
    ball ``certified`` is the least Claim 2 bound over all slices tried.
    """
    _on_boundary(body, x)
    sub_budget = budget.scaled(restarts=max(8, budget.restarts // 2), iters=max(50, budget.iters // 2))
    fns = _candidate_functionals(body, x, budget, functionals)
    sups = [functional_sup(body, f, sub_budget) for f in fns]
    grid, floor, smallest = [], math.inf, None
    for delta in sorted(deltas, reverse=True):
        est = math.inf
        for f, (M, u) in zip(fns, sups):
            M = max(M, f(x))
            if not f(x) > M - delta:
                continue
            point = x if f(x) >= f(u) else u
            spec = SliceSpec(f, "depth", delta, M, point)
            rep = slice_diameter(body, spec, sub_budget, metric)
            if rep.estimate < est:
                est = rep.estimate
                smallest = rep
            if "claim2" in rep.extra and rep.extra["claim2"]["ok"]:
                floor = min(floor, rep.extra["claim2"]["bound"])
        cert = floor if math.isfinite(floor) else 0.0
        grid.append({"param": delta, "estimate": est, "certified": cert})
    has_floor = math.isfinite(floor)
    return ProbeReport(
        "denting",
        grid[-1]["estimate"],
        floor if has_floor else 0.0,
        "lower" if has_floor else "none",
        {} if smallest is None else smallest.witness,
        budget.to_dict(),
        grid,
        {"body": body.name, "metric": metric, "functionals": [f.to_dict() for f in fns]},
    )


# ---------------------------------------------------------------- classification


def classify(body: ConvexBody, x: SeqVec, budget: SearchBudget = SearchBudget(), deltas=DELTA_GRID) -> dict:
    """Bundle of probes with evidence labels; see README for the label semantics."""
    _on_boundary(body, x)
    ext = midpoint_modulus(body, x, 0.0, budget)
    mod = midpoint_modulus_grid(body, x, deltas, budget)
    gap = lur_gap_grid(body, x, deltas, budget)
    dent = denting_probe(body, x, budget, deltas)
    labels = {
        "extreme": "refuted" if ext.certified > 1e-3 else "no-counterexample",
        "mlur": _label(mod.grid),
        "lur": _label(gap.grid),
        "denting": _label(dent.grid),
    }
    if dent.side == "lower" and dent.certified > 0:
        labels["denting"] = "certified-floor"
    return {
        "body": body.name,
        "x": x.to_dict(),
        "labels": labels,
        "reports": {
            "extreme": ext.to_dict(),
            "mlur": mod.to_dict(),
            "lur": gap.to_dict(),
            "denting": dent.to_dict(),
        },
    }
