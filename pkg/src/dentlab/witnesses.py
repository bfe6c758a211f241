"""Constructive certificates for the non-symmetric ``c0`` norm and friends.

Each certificate is built by exact evaluation and carries a list of checked
inequalities (``Check``) so it can be re-verified without any search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .norms import (
    MLUR3,
    ConvexBody,
    LurRenormConfig,
    NormOracle,
    dist_to_body,
    into_body,
    eval_q,
    lur_renorm,
    mlur_gauge,
    nonsym_sup_norm,
)
from ._kernels import nonsym_batch
from .operators import LimitProj, Proj, TailProj
from .search import SearchBudget, ascend
from .seqspace import FinFunctional, SeqVec, active_horizon, basis, constant, make_vec, sup_norm


@dataclass
class Check:
    name: str
    lhs: float
    relation: str
    rhs: float

    @property
    def ok(self) -> bool:
        return {
            "<": self.lhs < self.rhs,
            "<=": self.lhs <= self.rhs,
            ">": self.lhs > self.rhs,
            ">=": self.lhs >= self.rhs,
            "==": self.lhs == self.rhs,
        }[self.relation]

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "relation": self.relation, "rhs": self.rhs, "ok": self.ok}


def _nsn(x: SeqVec) -> float:
    return nonsym_sup_norm(x)[0]


# ---------------------------------------------------------------- Claim 1


def claim1_params(x: SeqVec, eps: float) -> tuple[int, float]:
    """Smallest ``m >= 1`` with ``||R_m x||_inf < eps/8`` and ``delta = eps / 2^(m+3)``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if x.tail != 0.0:
        raise ValueError("x must be tail 0")
    m = 1
    while sup_norm(TailProj(m).apply(x)) >= eps / 8:
        m += 1
    return m, eps / 2 ** (m + 3)


@dataclass
class Claim1Result:
    m: int
    delta: float
    vacuous: bool
    margin: float
    checks: list[Check] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.vacuous or self.margin >= 0.0

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "delta": self.delta,
            "vacuous": self.vacuous,
            "margin": self.margin,
            "holds": self.holds,
            "checks": [c.to_dict() for c in self.checks],
        }


def claim1_check(x: SeqVec, eps: float, y: SeqVec) -> Claim1Result:
    """Margin ``max(||x+y||, ||x-y||) - (||x|| + delta)``; vacuous when ``||R_m y||_inf <= eps``."""
    m, delta = claim1_params(x, eps)
    tail = sup_norm(TailProj(m).apply(y))
    hyp = Check("tail of y exceeds eps", tail, ">", eps)
    if not hyp.ok:
        return Claim1Result(m, delta, True, math.inf, [hyp])
    lhs = max(_nsn(x + y), _nsn(x - y))
    rhs = _nsn(x) + delta
    return Claim1Result(m, delta, False, lhs - rhs, [hyp, Check("max(|x+y|,|x-y|) >= |x| + delta", lhs, ">=", rhs)])


def claim1_adversary(
    x: SeqVec, eps: float, budget: SearchBudget = SearchBudget(restarts=1000, iters=60)
) -> tuple[float, SeqVec]:
    """Smallest margin found by a search over ``y`` with ``||R_m y||_inf > eps``."""
    m, delta = claim1_params(x, eps)
    active = max(x.horizon, m)
    _, n1 = budget.dims(active)
    xv = x.coords(n1)
    rhs = _nsn(x) + delta
    push = eps * (1.0 + 1e-9)

    def transform(Y: np.ndarray) -> np.ndarray:
        Y = Y.copy()
        t = np.abs(Y[:, m:]).max(axis=1)
        small = t <= push
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(t > 0, push / t, 0.0)
        Y[small, m:] *= scale[small, None]
        zero = small & (t == 0)
        Y[zero, m] = push
        return Y

    def objective(Y: np.ndarray) -> np.ndarray:
        a = nonsym_batch(np.ascontiguousarray(xv + Y))
        b = nonsym_batch(np.ascontiguousarray(xv - Y))
        return rhs - np.maximum(a, b)

    rng = budget.rng(61)
    starts = []
    for r in range(m, n1):
        for s in (push, -push, 2 * eps, -2 * eps):
            v = np.zeros(n1)
            v[r] = s
            starts.append(v)
            starts.append(v - xv)
    starts += list(rng.uniform(-2 * eps - sup_norm(x), 2 * eps + sup_norm(x), (budget.restarts // 4, n1)))
    res = ascend(objective, transform(np.stack(starts)), budget, active=active, transform=transform, tag=62)
    y = make_vec(res.best)
    r = claim1_check(x, eps, y)
    return r.margin, y


# ---------------------------------------------------------------- Claim 2


@dataclass
class Claim2Certificate:
    x: SeqVec
    y: SeqVec
    m: int
    delta: float
    checks: list[Check]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "x": self.x.to_dict(),
            "y": self.y.to_dict(),
            "m": self.m,
            "delta": self.delta,
            "ok": self.ok,
            "checks": [c.to_dict() for c in self.checks],
        }


def claim2_witness(x: SeqVec, f: FinFunctional, a: float) -> Claim2Certificate:
    """Build ``y = x - ||x|| e_m`` in the slice ``{gauge <= 1, f > a}`` with ``||x - y||_inf = ||x||``.

    ``delta`` is the largest dyadic number meeting both strict conditions;
    ``m`` is the first fresh coordinate with ``2^m delta > ||x||^2``.
    """
    if x.tail != 0.0:
        raise ValueError("x must be tail 0")
    nx = _nsn(x)
    if nx == 0.0:
        raise ValueError("x = 0 admits no certificate")
    g = mlur_gauge(x)
    if g >= 1.0:
        raise ValueError(f"x must be strictly inside the ball (gauge {g})")
    fx = f(x)
    if fx <= a:
        raise ValueError(f"x is not in the half-space: f(x) = {fx} <= a = {a}")
    q2 = eval_q(x) ** 2
    delta = 1.0
    while not ((nx + 2 * delta) ** 2 + q2 + delta < 1.0 and fx - delta > a):
        delta /= 2
        if delta < 1e-300:
            raise ValueError("no admissible delta (x too close to the boundary)")
    m = active_horizon(x, [f]) + 1
    while 2.0**m * delta <= nx * nx:
        m += 1
    y = x - basis(m, nx)
    gy = mlur_gauge(y)
    checks = [
        Check("(|x| + 2 delta)^2 + q(x)^2 + delta", (nx + 2 * delta) ** 2 + q2 + delta, "<", 1.0),
        Check("f(x) - delta", fx - delta, ">", a),
        Check("|R_m x|_inf", sup_norm(TailProj(m).apply(x)), "<", delta),
        Check("|x| - x(m)", nx - x(m), ">", 0.0),
        Check("|x| - x(m) vs sqrt(2^m delta)", nx - x(m), "<", math.sqrt(2.0**m * delta)),
        Check("f(e_m)", f(basis(m)), "<", delta),
        Check("|y| <= |x| + 2 delta", _nsn(y), "<=", nx + 2 * delta),
        Check("gauge(y)", gy, "<", 1.0),
        Check("f(y)", f(y), ">", a),
        Check("|x - y|_inf == |x|", sup_norm(x - y), "==", nx),
    ]
    return Claim2Certificate(x, y, m, delta, checks)


@dataclass
class SliceCertificate:
    f: FinFunctional
    a: float
    target: float
    x: SeqVec
    y: Optional[SeqVec]
    bound_sup: float
    bound_mlur: float
    claim2: Optional[Claim2Certificate]

    @property
    def ok(self) -> bool:
        return self.claim2 is None or self.claim2.ok

    def recheck(self) -> tuple[float, float]:
        """Recompute both diameter bounds from the stored witnesses."""
        if self.y is None:
            return 0.0, 0.0
        return sup_norm(self.x - self.y), mlur_gauge(self.x - self.y)

    def to_dict(self) -> dict:
        return {
            "f": self.f.to_dict(),
            "a": self.a,
            "target": self.target,
            "bound_sup": self.bound_sup,
            "bound_mlur": self.bound_mlur,
            "ok": self.ok,
            "claim2": None if self.claim2 is None else self.claim2.to_dict(),
        }


def functional_sup(
    body: ConvexBody, f: FinFunctional, budget: SearchBudget = SearchBudget()
) -> tuple[float, SeqVec]:
    """Certified lower bound on ``sup_{u in body} f(u)`` with a witness ``u`` in the body."""
    g = body.gauge
    active = max(f.horizon, 1)
    _, n1 = budget.dims(active)
    fv = f.vector(n1)

    def objective(Z: np.ndarray) -> np.ndarray:
        gz = g.batch(Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = (Z @ fv) / gz
        return np.where((gz > 0) & np.isfinite(r), r, -np.inf)

    starts = [fv, np.sign(fv)]
    for k in np.flatnonzero(fv):
        v = np.zeros(n1)
        v[k] = np.sign(fv[k])
        starts.append(v)
    starts = body.clip(np.stack(starts))
    starts = starts[np.abs(starts).max(axis=1) > 0]
    if not len(starts):
        return 0.0, make_vec(())
    res = ascend(objective, starts, budget, active=active, transform=body.clip, tag=71)
    u = into_body(body, make_vec(res.best) / g(make_vec(res.best)))
    return f(u), u


def slice_lb_certificate(
    f: FinFunctional,
    a: float,
    target: float,
    budget: SearchBudget = SearchBudget(),
    point: Optional[SeqVec] = None,
) -> SliceCertificate:
    """Certified diameter lower bound for the slice ``{mlur3 <= 1, f > a}``.

    A slice point ``u`` (``point`` or the maximiser of ``f``) is pulled back
    along its ray to ``x`` with ``target <= gauge(x) < 1`` and ``f(x) > a``;
    Claim 2 then gives ``y`` in the slice with ``||x - y||_inf = ||x|| >= gauge(x)/sqrt 2``.
    """
    if target <= 0:
        return SliceCertificate(f, a, target, make_vec(()), None, 0.0, 0.0, None)
    if not target < 1:
        raise ValueError("target must be below 1")
    body = ConvexBody(MLUR3)
    if point is None:
        _, point = functional_sup(body, f, budget)
    gu, fu = mlur_gauge(point), f(point)
    if gu > 1.0 or fu <= a:
        raise ValueError("slice witness not in the slice (empty slice?)")
    u = point / gu
    fu1 = f(u)
    if fu1 > 0:
        s_lo = max(target, a / fu1)
        if s_lo >= 1.0:
            raise ValueError("slice too shallow for the requested target")
        s = target if target * fu1 > a else 0.5 * (s_lo + 1.0)
    elif target * fu1 > a:
        s = target
    else:
        raise ValueError("cannot scale the witness into the slice at this target")
    x = u * s
    while mlur_gauge(x) >= 1.0:
        s *= 1 - 1e-12
        x = u * s
    cert = claim2_witness(x, f, a)
    lo_sup, lo_mlur = sup_norm(x - cert.y), mlur_gauge(x - cert.y)
    return SliceCertificate(f, a, target, x, cert.y, lo_sup, lo_mlur, cert)


# ---------------------------------------------------------------- examples from the operator section


def example_c_witness(lam: float) -> dict:
    """Exact ``||(1 + lam) P z - lam z||_inf`` for ``z = (0, 1, 1, ...)`` and the limit projection."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    e = constant(1.0)
    z = make_vec([0.0], 1.0)
    Pz = LimitProj().apply(z)
    value = sup_norm(Pz * (1.0 + lam) - z * lam)
    return {
        "lam": lam,
        "Pz_equals_e": Pz == e,
        "value": value,
        "expected": 1.0 + lam,
        "ok": abs(value - (1.0 + lam)) <= 1e-12 and Pz == e,
    }


def pk_witness(k: int, lam: float, cfg: LurRenormConfig = LurRenormConfig()) -> dict:
    """Ratio ``|||(P_k - lam R_k) u||| / |||u|||`` at ``u = e_1 + ... + e_(k+1)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    u = make_vec([1.0] * (k + 1))
    Tu = Proj(k).apply(u) - TailProj(k).apply(u) * lam
    num, den = lur_renorm(cfg, Tu), lur_renorm(cfg, u)
    ratio = num / den
    return {"k": k, "lam": lam, "image": num, "norm_u": den, "ratio": ratio, "exceeds_one": ratio > 1.0}


# ---------------------------------------------------------------- PC proof trace


@dataclass
class PCTrace:
    checks: list[Check]
    broken: Optional[str]
    vectors: dict

    @property
    def ok(self) -> bool:
        return self.broken is None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "broken": self.broken,
            "checks": [c.to_dict() for c in self.checks],
            "vectors": {k: v.to_dict() for k, v in self.vectors.items()},
        }


def pc_trace_check(
    body: ConvexBody,
    x: SeqVec,
    w: SeqVec,
    phi_w: SeqVec,
    lam: float,
    eta: float,
    delta: float,
    eps: float,
    budget: SearchBudget = SearchBudget(restarts=16, iters=200),
) -> PCTrace:
    """Replay the PC argument at one sample ``w`` (sup-norm ambient metric).

    ``delta`` is the strong-extremality modulus supplied for ``eps``; the
    trace stops at the first hypothesis that fails and names it.
    """
    d = sup_norm
    checks: list[Check] = []
    vectors = {"x": x, "w": w, "phi_w": phi_w}

    def add(c: Check) -> bool:
        checks.append(c)
        return c.ok

    if not add(Check("eta <= min(delta, lam eps)/2", eta, "<=", min(delta, lam * eps) / 2)):
        return PCTrace(checks, checks[-1].name, vectors)
    if not add(Check("gauge(w) (w in C)", body.gauge(w), "<=", 1.0)):
        return PCTrace(checks, checks[-1].name, vectors)
    if not add(Check("|phi w - x| (hyp. 3)", d(phi_w - x), "<=", eta)):
        return PCTrace(checks, checks[-1].name, vectors)
    target = phi_w * (1.0 + lam) - w * lam
    dist, y_minus = dist_to_body(body, target, budget)
    vectors["y_minus"] = y_minus
    if not add(Check("dist((1+lam) phi w - lam w, C) (hyp. 4)", dist, "<", eta)):
        return PCTrace(checks, checks[-1].name, vectors)
    psi_w = w - phi_w
    y_plus = x * (1.0 - lam) + w * lam
    vectors["y_plus"] = y_plus
    add(Check("gauge(y+) (convexity)", body.gauge(y_plus), "<=", 1.0 + 1e-12))
    add(Check("|phi w + lam psi w - y+|", d(phi_w + psi_w * lam - y_plus), "<=", (1.0 - lam) * eta + 1e-15))
    add(Check("|(phi w - lam psi w) - y-|", d(phi_w - psi_w * lam - y_minus), "<", eta))
    mid = (y_plus + y_minus) * 0.5
    add(Check("|x - (y+ + y-)/2|", d(x - mid), "<", 2 * eta))
    gap = d(y_plus - y_minus)
    if d(x - mid) < delta:
        add(Check("|y+ - y-| (strong extremality)", gap, "<", lam * eps))
    add(Check("|y+ - y-| > 2 lam |psi w| - 2 eta", gap, ">", 2 * lam * d(psi_w) - 2 * eta))
    add(Check("|w - x| (conclusion)", d(w - x), "<", 2 * eps))
    broken = next((c.name for c in checks if not c.ok), None)
    return PCTrace(checks, broken, vectors)
