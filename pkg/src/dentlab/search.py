"""Derivative-free multistart ascent over finite heads of c0 vectors.

Gauges here are non-smooth (suprema of piecewise-linear terms), so the
engine only uses function values: per-restart random coordinate and
dense perturbations with a success-adapted step.  Callers enforce
constraints through ``transform`` (retraction) and by returning ``-inf``
for infeasible candidates.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

BatchFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SearchBudget:
    restarts: int = 64
    iters: int = 500
    step: float = 0.5
    decay: float = 0.9
    seed: int = 0
    horizon: int = 8

    def __post_init__(self) -> None:
        for name in ("restarts", "iters", "horizon"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not (self.step > 0 and 0 < self.decay < 1):
            raise ValueError("step must be positive and decay in (0, 1)")

    def dims(self, active: int) -> tuple[int, int]:
        """Search dimensions for the first and second restart batch."""
        return active + self.horizon, active + 2 * self.horizon

    def rng(self, *tags: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, *tags])

    def scaled(self, **changes) -> "SearchBudget":
        data = asdict(self)
        data.update(changes)
        return SearchBudget(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SearchResult:
    best: np.ndarray
    value: float
    population: np.ndarray
    values: np.ndarray


def ascend(
    objective: BatchFn,
    starts: np.ndarray,
    budget: SearchBudget,
    *,
    active: int,
    transform: Optional[BatchFn] = None,
    tag: int = 0,
    iters: Optional[int] = None,
    blocks: int = 1,
) -> SearchResult:
    """Maximise ``objective`` starting from the rows of ``starts``.

    A search point is ``blocks`` concatenated heads of ``budget.dims(active)[1]``
    coordinates each.  The first half of the restarts only moves coordinates
    below ``budget.dims(active)[0]`` in every block; the second half may touch
    the doubled fresh horizon.
    """
    n0, nb = budget.dims(active)
    n1 = nb * blocks
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.shape[1] != n1:
        raise ValueError(f"starts have {starts.shape[1]} columns, expected {n1}")
    tf = transform if transform is not None else (lambda y: y)
    rng = budget.rng(tag)
    R = budget.restarts

    start_vals = objective(tf(starts))
    order = np.argsort(-start_vals, kind="stable")
    base = tf(starts)[order]
    base_vals = start_vals[order]
    if not np.isfinite(base_vals[0]):
        raise ValueError("no feasible starting point")
    base = base[np.isfinite(base_vals)]
    base_vals = base_vals[np.isfinite(base_vals)]

    # Population: every structured start (up to R), then jittered copies.
    pop = np.empty((R, n1))
    vals = np.empty(R)
    k = min(R, len(base))
    pop[:k] = base[:k]
    vals[:k] = base_vals[:k]
    if k < R:
        src = np.arange(R - k) % len(base)
        jitter = base[src] + budget.step * rng.standard_normal((R - k, n1))
        jitter = tf(jitter)
        jv = objective(jitter)
        ok = np.isfinite(jv)
        pop[k:] = np.where(ok[:, None], jitter, base[src])
        vals[k:] = np.where(ok, jv, base_vals[src])

    allowed = np.ones((R, n1), dtype=bool)
    allowed[: R // 2] = np.tile(np.arange(nb) < n0, blocks)
    mask = allowed.astype(float)
    free = [np.flatnonzero(row) for row in allowed[[0, -1]]]
    sigma = np.full(R, budget.step)
    best_i = int(np.argmax(vals))
    best, best_val = pop[best_i].copy(), float(vals[best_i])

    rows = np.arange(R)
    for _ in range(budget.iters if iters is None else iters):
        mode = rng.random(R)
        noise = rng.standard_normal((R, n1)) * mask
        pick = rng.random(R)
        coord = np.where(
            rows < R // 2,
            free[0][(pick * len(free[0])).astype(int)],
            free[1][(pick * len(free[1])).astype(int)],
        )
        single = np.zeros((R, n1))
        single[rows, coord] = noise[rows, coord] * np.sqrt(n1)
        dense = noise
        step = np.where((mode < 0.5)[:, None], single, dense) * (sigma / np.sqrt(n1))[:, None]
        cand = tf(pop + step)
        cv = objective(cand)
        better = cv > vals
        pop[better] = cand[better]
        vals[better] = cv[better]
        sigma = np.where(better, sigma * 1.5, sigma * budget.decay)
        sigma = np.where(sigma < 1e-10, budget.step * 0.1, np.minimum(sigma, 10 * budget.step))
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best, best_val = pop[i].copy(), float(vals[i])
    return SearchResult(best=best, value=best_val, population=pop, values=vals)


def bisect_scale(feasible: BatchFn, D: np.ndarray, t_hi: np.ndarray | float, steps: int = 40) -> np.ndarray:
    """Largest ``t`` in ``[0, t_hi]`` with ``feasible(t * D)``, per row.

    Assumes the feasible ``t`` form an interval containing 0 (convexity).
    """
    D = np.atleast_2d(D)
    lo = np.zeros(len(D))
    hi = np.broadcast_to(np.asarray(t_hi, dtype=float), lo.shape).copy()
    ok_hi = feasible(hi[:, None] * D)
    lo[ok_hi] = hi[ok_hi]
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        ok = feasible(mid[:, None] * D)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return lo
