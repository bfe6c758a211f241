"""Verification suite: one function per checked claim, each returning a ``CaseResult``.

Case sizes and tolerances are fixed here; the budget only controls search effort.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._kernels import nonsym_batch
from .norms import (
    MLUR3,
    SUP,
    ConvexBody,
    combine_norm,
    lur_oracle,
    mlur_gauge,
    nonsym_bruteforce,
    nonsym_sup_norm,
    weighted_l2,
)
from .operators import Proj, cond29_grid, thm_fn_estimate, ukap_defect
from .probes import classify, midpoint_modulus_grid
from .search import SearchBudget
from .seqspace import FinFunctional, basis, make_vec, sup_norm
from .witnesses import claim1_adversary, example_c_witness, functional_sup, pk_witness, slice_lb_certificate

SQRT2 = math.sqrt(2.0)


@dataclass
class CaseResult:
    case: str
    passed: bool
    summary: str
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.case:<12} {self.summary}"

    def to_dict(self) -> dict:
        return {"case": self.case, "passed": self.passed, "summary": self.summary, "detail": self.detail}


def _rng(budget: SearchBudget, tag: int) -> np.random.Generator:
    return np.random.default_rng([budget.seed, 1000 + tag])


def check_dp_oracle(budget: SearchBudget, count: int = 1000, max_support: int = 12) -> CaseResult:
    rng = _rng(budget, 1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(count):
        x = make_vec(rng.uniform(-2, 2, rng.integers(1, max_support + 1)))
        worst = max(worst, abs(nonsym_sup_norm(x)[0] - nonsym_bruteforce(x)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 60
    return CaseResult("dp-oracle", ok, f"max |DP - brute| = {worst:.3g} over {count} vectors", {"max_error": worst})


def check_eq41(budget: SearchBudget, count: int = 100_000, max_support: int = 64, tol: float = 1e-9) -> CaseResult:
    """``|x|_inf <= N(x) <= gauge(x) <= sqrt(N^2 + |x|_inf^2) <= sqrt2 N(x) <= 3 |x|_inf``, batched."""
    rng = _rng(budget, 2)
    X = rng.uniform(-1, 1, (count, max_support)) * rng.exponential(1.0, (count, 1))
    lengths = rng.integers(1, max_support + 1, count)
    X[np.arange(max_support)[None, :] >= lengths[:, None]] = 0.0
    s = np.abs(X).max(axis=1)
    N = nonsym_batch(np.ascontiguousarray(X))
    G = MLUR3.batch(X)
    chain = [s, N, G, np.sqrt(N**2 + s**2), SQRT2 * N, 3 * s]
    worst = max(float(np.max(a - b)) for a, b in zip(chain, chain[1:]))
    # Spot-check the batch path against the scalar oracles.
    for i in range(0, count, max(1, count // 200)):
        x = make_vec(X[i])
        worst = max(worst, abs(nonsym_sup_norm(x)[0] - N[i]) - tol, abs(mlur_gauge(x) - G[i]) - tol)
    return CaseResult("eq41", worst <= tol, f"worst chain violation {worst:.3g} over {count} vectors", {"worst": worst})


def _random_functional(rng: np.random.Generator, max_support: int = 6) -> FinFunctional:
    n = int(rng.integers(1, max_support + 1))
    c = rng.standard_normal(n) * (rng.random(n) < 0.8)
    if not c.any():
        c[0] = 1.0
    return FinFunctional(tuple(c))


def check_slice_floor(budget: SearchBudget, count: int = 100, target: float = 0.995) -> CaseResult:
    rng = _rng(budget, 3)
    body = ConvexBody(MLUR3)
    sub = budget.scaled(restarts=min(budget.restarts, 16), iters=min(budget.iters, 150))
    floor = target / SQRT2
    worst_sup = worst_mlur = math.inf
    worst_recheck = 0.0
    failures = []
    for i in range(count):
        f = _random_functional(rng)
        M, u = functional_sup(body, f, sub)
        a = M - rng.uniform(1e-3, 1.0) * M
        cert = slice_lb_certificate(f, a, target, sub, point=u)
        rs, rm = cert.recheck()
        worst_recheck = max(worst_recheck, abs(rs - cert.bound_sup), abs(rm - cert.bound_mlur))
        worst_sup, worst_mlur = min(worst_sup, cert.bound_sup), min(worst_mlur, cert.bound_mlur)
        if not (cert.ok and cert.bound_sup >= floor and cert.bound_mlur >= floor):
            failures.append(i)
    ok = not failures and worst_recheck <= 1e-12
    return CaseResult(
        "slice-floor",
        ok,
        f"min certified diameter sup {worst_sup:.4f} / mlur3 {worst_mlur:.4f} (floor {floor:.4f}) over {count} slices",
        {"min_sup": worst_sup, "min_mlur3": worst_mlur, "floor": floor, "failures": failures, "recheck": worst_recheck},
    )


def check_claim1(budget: SearchBudget, count: int = 50, restarts: int = 1000) -> CaseResult:
    rng = _rng(budget, 4)
    adv = budget.scaled(restarts=max(restarts, budget.restarts), iters=min(budget.iters, 200))
    worst = math.inf
    for _ in range(count):
        n = int(rng.integers(1, 9))
        x = make_vec(rng.uniform(-1, 1, n))
        eps = float(rng.uniform(0.05, 1.0))
        margin, _ = claim1_adversary(x, eps, adv)
        worst = min(worst, margin)
    return CaseResult("claim1", worst >= 0.0, f"min adversarial margin {worst:.4g} over {count} cases", {"min_margin": worst})


def _boundary_points(rng: np.random.Generator, count: int, support: int, gauge) -> list:
    pts = []
    for _ in range(count):
        x = make_vec(rng.uniform(-1, 1, support))
        pts.append(x / gauge(x))
    return pts


def check_mlur_trend(budget: SearchBudget, count: int = 20, support: int = 5) -> CaseResult:
    rng = _rng(budget, 5)
    body = ConvexBody(MLUR3)
    sub = budget.scaled(restarts=min(budget.restarts, 32), iters=min(budget.iters, 200))
    rows, bad = [], []
    for i, x in enumerate(_boundary_points(rng, count, support, mlur_gauge)):
        rep = midpoint_modulus_grid(body, x, budget=sub)
        est = {r["param"]: r["estimate"] for r in rep.grid}
        vals = [est[d] for d in sorted(est)]
        monotone = all(a <= b for a, b in zip(vals, vals[1:]))
        if not (monotone and est[1e-4] <= 0.5 * est[1e-1]):
            bad.append(i)
        rows.append(vals)
    worst = max(r[0] / r[-1] if r[-1] > 0 else 0.0 for r in rows)
    return CaseResult(
        "mlur-trend",
        not bad,
        f"max est(1e-4)/est(1e-1) = {worst:.3f} over {count} points",
        {"grids": rows, "failures": bad},
    )


def check_c_example(budget: SearchBudget) -> CaseResult:
    lams = [0.05 * k for k in range(1, 21)]
    errs = [abs(r["value"] - r["expected"]) for r in map(example_c_witness, lams)]
    worst = max(errs)
    return CaseResult("c-example", worst <= 1e-12, f"max error {worst:.3g} over {len(lams)} lambdas", {"max_error": worst})


def check_pk_witness(budget: SearchBudget) -> CaseResult:
    lams = [round(0.1 * i, 1) for i in range(1, 11)]
    fails = []
    worst = math.inf
    for k in range(1, 21):
        for lam in lams:
            r = pk_witness(k, lam)
            worst = min(worst, r["ratio"])
            if not r["ratio"] > 1.0:
                fails.append((k, lam, r["ratio"]))
    return CaseResult(
        "pk-witness",
        not fails,
        f"{len(fails)} of {20 * len(lams)} (k, lam) pairs with ratio <= 1 (min ratio {worst:.6f})",
        {"failures": fails},
    )


def check_ukap(budget: SearchBudget, max_n: int = 32, probes: int = 10_000) -> CaseResult:
    rng = _rng(budget, 8)
    sub = budget.scaled(restarts=min(budget.restarts, 16), iters=min(budget.iters, 100))
    lo_all, hi_all = math.inf, -math.inf
    for n in range(1, max_n + 1):
        # Sign flip: (I - 2P_n) negates the first n coordinates, so it is a sup-norm isometry.
        w = basis(1)
        flip = sup_norm(w - Proj(n).apply(w) * 2.0) / sup_norm(w)
        X = rng.uniform(-1, 1, (probes, n + 8))
        Y = X.copy()
        Y[:, :n] *= -1.0
        ratios = np.abs(Y).max(axis=1) / np.abs(X).max(axis=1)
        est, _ = ukap_defect(Proj(n), SUP, sub)
        val = max(flip, float(ratios.max()), est)
        lo_all, hi_all = min(lo_all, val), max(hi_all, val)
    ok = lo_all >= 1 - 1e-9 and hi_all <= 1 + 1e-6
    return CaseResult("ukap", ok, f"|I - 2P_n| estimates in [{lo_all:.12f}, {hi_all:.12f}] for n <= {max_n}", {})


def check_cond29(budget: SearchBudget, ns=(1, 2, 5, 10, 20), eps_grid=(1e-3, 1e-2, 1e-1), lam: float = 1.0) -> CaseResult:
    g = lur_oracle()
    x = basis(1) / g(basis(1))
    sub = budget.scaled(restarts=min(budget.restarts, 32), iters=min(budget.iters, 200))
    table = {}
    for n in ns:
        table[n] = [e.value for e in cond29_grid(Proj(n), x, lam, eps_grid, g, g, sub)]
    at = table[20][0] if 20 in table else table[max(ns)][0]
    mono = all(all(a <= b for a, b in zip(r, r[1:])) for r in table.values())
    above = all(v >= 1.0 - 1e-12 for r in table.values() for v in r)
    ok = abs(at - 1.0) <= 0.05 and mono and above
    return CaseResult(
        "cond29",
        ok,
        f"estimate at (n=20, eps=1e-3) = {at:.6f}; monotone in eps: {mono}",
        {"table": {str(n): r for n, r in table.items()}, "eps": list(eps_grid)},
    )


def check_fn_negative(
    budget: SearchBudget, ms=(4, 8, 16), eps_grid=(1e-4, 1e-6, 1e-8, 1e-10), floor: float = 0.05
) -> CaseResult:
    body = ConvexBody(MLUR3)
    x = basis(1) / mlur_gauge(basis(1))
    budgets = [
        budget.scaled(restarts=min(budget.restarts, 16), iters=min(budget.iters, 200)),
        budget.scaled(restarts=min(budget.restarts, 32), iters=min(budget.iters, 400)),
    ]
    rows = []
    for m in ms:
        for eps in eps_grid:
            for b in budgets:
                r = thm_fn_estimate(Proj(m), body, x, 1.0, eps, b)
                rows.append({"m": m, "eps": eps, "restarts": b.restarts, "lower": r["lower"], "upper": r["upper"]})
    worst = min(r["lower"] for r in rows)
    return CaseResult(
        "fn-negative",
        worst >= floor,
        f"min bracket lower end {worst:.4f} over eps down to {min(eps_grid):g} (floor {floor})",
        {"rows": rows},
    )


def check_combine(budget: SearchBudget, count: int = 10, dim: int = 4) -> CaseResult:
    rng = _rng(budget, 11)
    base = weighted_l2(dim)
    comb = combine_norm("l2", base, [FinFunctional.coordinate(1)])
    bb, cb = ConvexBody(base), ConvexBody(comb)
    sub = budget.scaled(restarts=min(budget.restarts, 16), iters=min(budget.iters, 150))
    rows, bad = [], []
    for i in range(count):
        v = make_vec(rng.uniform(-1, 1, dim))
        la = classify(bb, v / base(v), sub)["labels"]
        lb = classify(cb, v / comb(v), sub)["labels"]
        rows.append({"base": la, "combined": lb})
        if la != lb:
            bad.append(i)
    return CaseResult("combine", not bad, f"{count - len(bad)} of {count} matched points agree", {"rows": rows})


CASES: dict[str, Callable[[SearchBudget], CaseResult]] = {
    "dp-oracle": check_dp_oracle,
    "eq41": check_eq41,
    "slice-floor": check_slice_floor,
    "claim1": check_claim1,
    "mlur-trend": check_mlur_trend,
    "c-example": check_c_example,
    "pk-witness": check_pk_witness,
    "ukap": check_ukap,
    "cond29": check_cond29,
    "fn-negative": check_fn_negative,
    "combine": check_combine,
}


def run_suite(suite_id: str, budget: SearchBudget) -> list[CaseResult]:
    if suite_id == "all":
        return [fn(budget) for fn in CASES.values()]
    if suite_id == "determinism":
        return [check_determinism(budget)]
    if suite_id not in CASES:
        raise KeyError(suite_id)
    return [CASES[suite_id](budget)]


def report_json(results: list[CaseResult], budget: SearchBudget) -> str:
    return json.dumps({"budget": budget.to_dict(), "results": [r.to_dict() for r in results]}, sort_keys=True)


def check_determinism(budget: SearchBudget, cases=tuple(CASES)) -> CaseResult:
    """Run the listed cases twice and compare the serialized reports byte for byte."""
    a = report_json([CASES[c](budget) for c in cases], budget)
    b = report_json([CASES[c](budget) for c in cases], budget)
    return CaseResult("determinism", a == b, f"two runs {'identical' if a == b else 'differ'} ({len(a)} bytes)", {})
