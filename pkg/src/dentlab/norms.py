"""Norms and gauges on head+tail vectors, plus convex-body utilities.

Every gauge comes in two forms: an exact scalar evaluator on :class:`SeqVec`
(used for certificates) and a vectorised batch evaluator on arrays whose
rows are heads of tail-0 vectors (used inside searches).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._kernels import nonsym_batch
from .search import SearchBudget, ascend
from .seqspace import FinFunctional, IndexSeq, SeqVec, make_vec, sup_norm

SQRT2 = math.sqrt(2.0)


def _weights(n: int) -> np.ndarray:
    return 0.5 ** np.arange(1, n + 1)


def _require_c0(x: SeqVec, what: str) -> None:
    if x.tail != 0.0:
        raise ValueError(f"{what} is only defined here for tail-0 vectors (got tail {x.tail})")


# ---------------------------------------------------------------- raw formulas


def eval_Q(x: SeqVec, j: IndexSeq | Sequence[int]) -> float:
    j = j if isinstance(j, IndexSeq) else IndexSeq(tuple(j))
    idx = j.indices
    terms = [abs(x(idx[0]))]
    terms += [0.5**k * max(x(i), 0.0) for k, i in enumerate(idx[1:], start=1)]
    return math.fsum(terms)


def eval_q(x: SeqVec) -> float:
    terms = [0.5**k * v * v for k, v in enumerate(x.head, start=1)]
    terms.append(x.tail * x.tail * 0.5 ** x.horizon)
    return math.sqrt(math.fsum(terms))


def nonsym_sup_norm(x: SeqVec) -> tuple[float, IndexSeq]:
    """Exact ``sup_j Q(x, j)`` with an attaining index sequence.

    Going backwards, ``run`` holds ``max_{t > i} (x+(t) + rest(t))`` where
    ``rest(t) = run_after_t / 2`` is the best weighted completion after ``t``.
    Appending an index halves every later weight, so skipping must stay an
    option; the recursion does that through the max.
    """
    _require_c0(x, "the non-symmetric norm")
    h = x.head
    n = len(h)
    if n == 0:
        return 0.0, IndexSeq((1,))
    nxt = [0] * (n + 1)  # 0 = stop
    rest = [0.0] * (n + 1)
    run, arg = 0.0, 0
    best, best_i = -1.0, 1
    for i in range(n, 0, -1):
        v = 0.5 * run
        rest[i], nxt[i] = v, arg
        xi = h[i - 1]
        a = abs(xi) + v
        if a >= best:
            best, best_i = a, i
        w = v + (xi if xi > 0.0 else 0.0)
        if w > 0.0 and w >= run:
            run, arg = w, i
    seq = [best_i]
    while nxt[seq[-1]]:
        seq.append(nxt[seq[-1]])
    j = IndexSeq(tuple(seq))
    return eval_Q(x, j), j


@lru_cache(maxsize=None)
def _subset_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Weight tables over all non-empty subsets of ``{1..n}``.

    Row ``s`` gives the coefficient of ``|x|`` (lowest member) and of ``x+``
    (every other member, weight ``2^-rank``) in ``Q(x, subset s)``.
    """
    masks = np.arange(1, 2**n)
    bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
    rank = np.cumsum(bits, axis=1) - 1
    lowest = (rank == 0) & (bits == 1)
    later = np.where((bits == 1) & (rank > 0), 0.5 ** np.maximum(rank, 0), 0.0)
    return lowest.astype(float), later


def nonsym_bruteforce(x: SeqVec) -> float:
    """Max of ``Q(x, j)`` over every ``j`` drawn from ``{1, ..., H + 1}``.

    Independent oracle for :func:`nonsym_sup_norm`; exponential in ``H``.
    """
    _require_c0(x, "the non-symmetric norm")
    n = x.horizon + 1
    if n > 18:
        raise ValueError("brute force limited to horizon <= 17")
    lo, later = _subset_tables(n)
    v = x.coords(n)
    return float(np.max(lo @ np.abs(v) + later @ np.maximum(v, 0.0)))


def mlur_gauge(x: SeqVec) -> float:
    nrm, _ = nonsym_sup_norm(x)
    q = eval_q(x)
    return math.sqrt(nrm * nrm + q * q)


def spread_norm(x: SeqVec) -> float:
    vals = list(x.head) + [x.tail]
    return max(vals) - min(vals)


# ---------------------------------------------------------------- batch forms


def _sup_batch(X: np.ndarray) -> np.ndarray:
    return np.abs(X).max(axis=1) if X.shape[1] else np.zeros(len(X))


def _spread_batch(X: np.ndarray) -> np.ndarray:
    if not X.shape[1]:
        return np.zeros(len(X))
    return np.maximum(X.max(axis=1), 0.0) - np.minimum(X.min(axis=1), 0.0)


def _q_batch(X: np.ndarray) -> np.ndarray:
    return np.sqrt((X * X) @ _weights(X.shape[1]))


def _nonsym_batch(X: np.ndarray) -> np.ndarray:
    return nonsym_batch(np.ascontiguousarray(X, dtype=float))


def _mlur_batch(X: np.ndarray) -> np.ndarray:
    a = _nonsym_batch(X)
    b = _q_batch(X)
    return np.sqrt(a * a + b * b)


# ---------------------------------------------------------------- subgradients


def _sup_subgrad(x: SeqVec) -> FinFunctional:
    _require_c0(x, "sup subgradient")
    if not x.head:
        return FinFunctional(())
    k = int(np.argmax(np.abs(x.head)))
    return FinFunctional.coordinate(k + 1, math.copysign(1.0, x.head[k]))


def _spread_subgrad(x: SeqVec) -> FinFunctional:
    _require_c0(x, "spread subgradient")
    v = x.coords(x.horizon)
    f = np.zeros(x.horizon)
    if len(v) and v.max() > 0:
        f[int(np.argmax(v))] += 1.0
    if len(v) and v.min() < 0:
        f[int(np.argmin(v))] -= 1.0
    return FinFunctional(tuple(f))


def _nonsym_subgrad(x: SeqVec) -> FinFunctional:
    # Q(., j) dominates this linear functional and agrees with it at x.
    _, j = nonsym_sup_norm(x)
    idx = j.indices
    f = np.zeros(max(idx))
    f[idx[0] - 1] = 1.0 if x(idx[0]) >= 0 else -1.0
    for k, i in enumerate(idx[1:], start=1):
        f[i - 1] = 0.5**k
    return FinFunctional(tuple(f))


def _q_subgrad(x: SeqVec) -> FinFunctional:
    _require_c0(x, "q subgradient")
    q = eval_q(x)
    if q == 0.0:
        return FinFunctional(())
    return FinFunctional(tuple(_weights(x.horizon) * x.coords(x.horizon) / q))


def _mlur_subgrad(x: SeqVec) -> FinFunctional:
    g = mlur_gauge(x)
    if g == 0.0:
        return FinFunctional(())
    nrm, _ = nonsym_sup_norm(x)
    w = FinFunctional(tuple(_weights(x.horizon) * x.coords(x.horizon)))
    return (_nonsym_subgrad(x) * nrm + w) * (1.0 / g)


# ---------------------------------------------------------------- oracles


@dataclass(frozen=True)
class NormOracle:
    """A positively homogeneous convex functional with sup-norm constants.

    ``lower * ||x||_inf <= N(x) <= upper * ||x||_inf`` on the model space.
    ``dim`` set means the model space is ``R^dim`` (the gauge is ``inf`` on
    vectors with support beyond ``dim``).
    """

    name: str
    evaluate: Callable[[SeqVec], float] = field(repr=False)
    batch: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    symmetric: bool
    lower: float
    upper: float
    dim: Optional[int] = None
    subgradient: Optional[Callable[[SeqVec], FinFunctional]] = field(default=None, repr=False)
    degenerate: bool = False

    def __call__(self, x: SeqVec) -> float:
        return self.evaluate(x)


def _finite_dim(fn, dim):
    def scalar(x: SeqVec) -> float:
        if x.tail != 0.0 or x.horizon > dim:
            return math.inf
        return fn(x)

    return scalar


def _finite_dim_batch(fn, dim):
    def batch(X: np.ndarray) -> np.ndarray:
        out = fn(X[:, :dim])
        if X.shape[1] > dim:
            out = np.where(np.any(X[:, dim:] != 0.0, axis=1), np.inf, out)
        return out

    return batch


SUP = NormOracle("sup", sup_norm, _sup_batch, True, 1.0, 1.0, subgradient=_sup_subgrad)
SPREAD = NormOracle("spread", spread_norm, _spread_batch, True, 1.0, 2.0, subgradient=_spread_subgrad)
# q is not equivalent to the sup norm on c0 (q(e_k) = 2^(-k/2)).
Q = NormOracle("q", eval_q, _q_batch, True, 0.0, 1.0, subgradient=_q_subgrad)
NONSYM = NormOracle(
    "nonsym", lambda x: nonsym_sup_norm(x)[0], _nonsym_batch, False, 1.0, 2.0, subgradient=_nonsym_subgrad
)
# ||x|| <= 2 ||x||_inf, so the gauge is below 2*sqrt(2) ||x||_inf (the chain's 3 also holds).
MLUR3 = NormOracle("mlur3", mlur_gauge, _mlur_batch, False, 1.0, 2.0 * SQRT2, subgradient=_mlur_subgrad)


def weighted_l2(dim: int) -> NormOracle:
    """``q`` restricted to ``R^dim``: a strictly convex finite-dimensional model."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return NormOracle(
        f"wl2:{dim}",
        _finite_dim(eval_q, dim),
        _finite_dim_batch(_q_batch, dim),
        True,
        0.5 ** (dim / 2),
        1.0,
        dim=dim,
        subgradient=_q_subgrad,
    )


# ---------------------------------------------------------------- LUR renorm


FunctionalRule = Union[str, Callable[[int], FinFunctional]]


@dataclass(frozen=True)
class LurRenormConfig:
    """``(sum_n 2^-n (base(R_n u)^2 + f_n(u)^2))^(1/2)``.

    ``functionals`` is ``"coordinate"`` (``f_n = e_n*``), ``"zero"``
    (degenerate seminorm) or a callable ``n -> FinFunctional`` that must
    vanish on vectors of horizon below ``n``.
    """

    base: NormOracle = SPREAD
    functionals: FunctionalRule = "coordinate"

    @property
    def degenerate(self) -> bool:
        return self.functionals == "zero"

    def functional(self, n: int) -> FinFunctional:
        if self.functionals == "coordinate":
            return FinFunctional.coordinate(n)
        if self.functionals == "zero":
            return FinFunctional(())
        return self.functionals(n)


def _tail_part(x: SeqVec, n: int) -> SeqVec:
    head = [0.0] * n + list(x.head[n:])
    return make_vec(head, x.tail)


def lur_renorm(cfg: LurRenormConfig, u: SeqVec) -> float:
    _require_c0(u, "the LUR renorm")
    terms = []
    for n in range(1, u.horizon + 1):
        b = cfg.base(_tail_part(u, n))
        f = cfg.functional(n)(u)
        terms.append(0.5**n * (b * b + f * f))
    return math.sqrt(math.fsum(terms))


def _lur_batch(cfg: LurRenormConfig):
    def batch(X: np.ndarray) -> np.ndarray:
        B, N = X.shape
        tot = np.zeros(B)
        for n in range(1, N + 1):
            R = X.copy()
            R[:, :n] = 0.0
            b = cfg.base.batch(R)
            if cfg.functionals == "coordinate":
                f = X[:, n - 1]
            elif cfg.functionals == "zero":
                f = 0.0
            else:
                f = X @ cfg.functional(n).vector(N)
            tot += 0.5**n * (b * b + f * f)
        return np.sqrt(tot)

    return batch


def _lur_subgrad(cfg: LurRenormConfig):
    def sub(u: SeqVec) -> FinFunctional:
        g = lur_renorm(cfg, u)
        n_tot = u.horizon
        acc = np.zeros(n_tot)
        if g == 0.0 or cfg.base.subgradient is None:
            return FinFunctional(tuple(acc))
        for n in range(1, n_tot + 1):
            r = _tail_part(u, n)
            b = cfg.base(r)
            gb = cfg.base.subgradient(r).vector(n_tot)
            gb[:n] = 0.0
            fn = cfg.functional(n)
            acc += 0.5**n * (b * gb + fn(u) * fn.vector(n_tot))
        return FinFunctional(tuple(acc / g))

    return sub


def lur_oracle(cfg: LurRenormConfig = LurRenormConfig()) -> NormOracle:
    fname = cfg.functionals if isinstance(cfg.functionals, str) else "custom"
    # Lower constant: the coordinate of largest modulus appears in R_n u for
    # every n below it and in f_n at n = k, giving at least ||u||^2 / 2.
    lower = 0.0 if cfg.degenerate else math.sqrt(0.5) * min(1.0, cfg.base.lower)
    upper = math.sqrt(cfg.base.upper**2 + 1.0)
    return NormOracle(
        f"lur({cfg.base.name},{fname})",
        lambda u: lur_renorm(cfg, u),
        _lur_batch(cfg),
        cfg.base.symmetric,
        lower,
        upper,
        dim=cfg.base.dim,
        subgradient=_lur_subgrad(cfg),
        degenerate=cfg.degenerate,
    )


# ---------------------------------------------------------------- lattice combination

LATTICES = {
    "l1": (lambda a, b: a + b),
    "l2": (lambda a, b: np.sqrt(a * a + b * b)),
    "linf": (lambda a, b: np.maximum(a, b)),
}


def combine_norm(lattice: str, base: NormOracle, functionals: Sequence[FinFunctional]) -> NormOracle:
    """``x -> |(base(x), max_i |f_i(x)|)|`` for a lattice norm ``|.|`` on R^2."""
    if lattice not in LATTICES:
        raise ValueError(f"unknown lattice norm {lattice!r}; choose from {sorted(LATTICES)}")
    fs = tuple(functionals)
    if not fs:
        raise ValueError("the weak seminorm needs at least one functional (use a zero functional for W = 0)")
    lat = LATTICES[lattice]
    k = max(f.l1_norm() for f in fs)

    def semi(x: SeqVec) -> tuple[float, int]:
        vals = [abs(f(x)) for f in fs]
        i = int(np.argmax(vals))
        return vals[i], i

    def scalar(x: SeqVec) -> float:
        return float(lat(base(x), semi(x)[0]))

    def batch(X: np.ndarray) -> np.ndarray:
        F = np.stack([f.vector(X.shape[1]) for f in fs], axis=1)
        return lat(base.batch(X), np.abs(X @ F).max(axis=1))

    def sub(x: SeqVec) -> FinFunctional:
        b = base(x)
        w, i = semi(x)
        gb = base.subgradient(x) if base.subgradient else FinFunctional(())
        gw = fs[i] * (1.0 if fs[i](x) >= 0 else -1.0)
        if lattice == "l1":
            return gb + gw
        if lattice == "linf":
            return gb if b >= w else gw
        c = math.hypot(b, w)
        return FinFunctional(()) if c == 0 else (gb * b + gw * w) * (1.0 / c)

    upper = float(lat(np.float64(base.upper), np.float64(k)))
    return NormOracle(
        f"combine({lattice},{base.name},W{len(fs)})",
        scalar,
        batch,
        base.symmetric,
        base.lower,
        upper,
        dim=base.dim,
        subgradient=sub,
    )


# ---------------------------------------------------------------- bodies


@dataclass(frozen=True)
class ConvexBody:
    """The unit ball ``{u : gauge(u) <= 1}``."""

    gauge: NormOracle

    def __post_init__(self) -> None:
        g = self.gauge
        if not (g.lower > 0 and math.isfinite(g.upper)):
            raise ValueError(f"{g.name}: 0 must be interior (need positive, finite equivalence constants)")

    @property
    def name(self) -> str:
        return self.gauge.name

    def clip(self, X: np.ndarray) -> np.ndarray:
        """Project search arrays onto the model space ``R^dim``."""
        if self.gauge.dim is None or X.shape[-1] <= self.gauge.dim:
            return X
        X = np.array(X, copy=True)
        X[..., self.gauge.dim :] = 0.0
        return X

    def retract(self, X: np.ndarray) -> np.ndarray:
        """Radial retraction of each row into the body."""
        X = self.clip(X)
        g = self.gauge.batch(X)
        return X / np.maximum(g, 1.0)[:, None]

    def contains(self, x: SeqVec, tol: float = 0.0) -> bool:
        return self.gauge(x) <= 1.0 + tol


def gauge_membership(body: ConvexBody, x: SeqVec, tol: float) -> str:
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = body.gauge(x)
    if g < 1.0 - tol:
        return "inside"
    if g <= 1.0 + tol:
        return "boundary"
    return "outside"


def into_body(body: ConvexBody, v: SeqVec) -> SeqVec:
    """Scale ``v`` radially until the exact gauge is at most 1."""
    g = body.gauge(v)
    while g > 1.0:
        v = v / g
        g = body.gauge(v)
    return v


def dist_to_body(body: ConvexBody, u: SeqVec, budget: SearchBudget = SearchBudget()) -> tuple[float, SeqVec]:
    """Certified upper bound on ``inf_{v in body} ||u - v||_inf`` with its witness."""
    g = body.gauge(u)
    if g <= 1.0:
        return 0.0, u
    radial = into_body(body, u / g)
    best, witness = sup_norm(u - radial), radial
    if u.tail != 0.0:
        return best, witness
    active = u.horizon
    n1 = budget.dims(active)[1]
    target = u.coords(n1)

    def objective(V: np.ndarray) -> np.ndarray:
        return -np.abs(V - target).max(axis=1)

    starts = np.stack([radial.coords(n1), body.clip(np.clip(target, -1.0, 1.0)[None, :])[0]])
    res = ascend(objective, starts, budget, active=active, transform=body.retract, tag=11)
    cand = into_body(body, make_vec(res.best))
    d = sup_norm(u - cand)
    if d < best:
        best, witness = d, cand
    return best, witness


# ---------------------------------------------------------------- registry


def _split_top(s: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur).strip())
    return parts


def parse_weak_functionals(spec: str) -> list[FinFunctional]:
    """``"e1;e3"`` (coordinate functionals), ``"0"`` (zero functional)."""
    out = []
    for tok in spec.split(";"):
        tok = tok.strip()
        if tok == "0":
            out.append(FinFunctional(()))
        elif tok.startswith("e") and tok[1:].isdigit():
            out.append(FinFunctional.coordinate(int(tok[1:])))
        else:
            raise ValueError(f"bad weak-seminorm token {tok!r}")
    return out


def get_norm(spec: str) -> NormOracle:
    """Resolve a norm id such as ``"mlur3"``, ``"wl2:4"``, ``"lur(spread,coordinate)"``."""
    spec = spec.strip()
    simple = {"sup": SUP, "spread": SPREAD, "q": Q, "nonsym": NONSYM, "mlur3": MLUR3}
    if spec in simple:
        return simple[spec]
    if spec == "lur":
        return lur_oracle()
    if spec.startswith("wl2:"):
        return weighted_l2(int(spec[4:]))
    if spec.startswith("lur(") and spec.endswith(")"):
        args = _split_top(spec[4:-1])
        if len(args) != 2:
            raise ValueError("lur(base,fns) takes two arguments")
        fns = {"coord": "coordinate", "coordinate": "coordinate", "zero": "zero"}.get(args[1])
        if fns is None:
            raise ValueError(f"unknown functional rule {args[1]!r}")
        return lur_oracle(LurRenormConfig(get_norm(args[0]), fns))
    if spec.startswith("combine(") and spec.endswith(")"):
        args = _split_top(spec[8:-1])
        if len(args) != 3:
            raise ValueError("combine(lattice,base,W) takes three arguments")
        return combine_norm(args[0], get_norm(args[1]), parse_weak_functionals(args[2]))
    raise ValueError(f"unknown norm id {spec!r}")


def all_index_seqs(horizon: int):
    """Every IndexSeq with entries in ``1..horizon`` (test helper; exponential)."""
    for r in range(1, horizon + 1):
        for c in itertools.combinations(range(1, horizon + 1), r):
            yield IndexSeq(c)
