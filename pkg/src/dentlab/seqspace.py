"""Head+tail sequence vectors and finitely supported functionals.

A :class:`SeqVec` is a real sequence ``x(1), x(2), ...`` stored as a finite
head plus a constant tail.  Tail 0 models ``c0`` (finite support); a nonzero
tail models a convergent sequence in ``c`` whose limit is the tail.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "SeqVec",
    "IndexSeq",
    "FinFunctional",
    "make_vec",
    "basis",
    "constant",
    "sup_norm",
    "apply_functional",
    "active_horizon",
    "vec_from_json",
    "functional_from_json",
]


def _check_finite(values: Iterable[float]) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite entry {v!r}")


@dataclass(frozen=True)
class SeqVec:
    """Immutable head+tail sequence; construct via :func:`make_vec`."""

    head: tuple[float, ...]
    tail: float = 0.0

    def __post_init__(self) -> None:
        head = tuple(float(v) for v in self.head)
        tail = float(self.tail)
        _check_finite(head)
        _check_finite((tail,))
        while head and head[-1] == tail:
            head = head[:-1]
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "tail", tail)

    @property
    def horizon(self) -> int:
        return len(self.head)

    def __call__(self, k: int) -> float:
        if k < 1:
            raise IndexError("coordinates start at 1")
        return self.head[k - 1] if k <= len(self.head) else self.tail

    def coords(self, n: int) -> np.ndarray:
        """First ``n`` coordinates as an array."""
        out = np.full(n, self.tail)
        m = min(n, len(self.head))
        out[:m] = self.head[:m]
        return out

    def _binary(self, other: "SeqVec", op) -> "SeqVec":
        n = max(self.horizon, other.horizon)
        return SeqVec(tuple(op(self.coords(n), other.coords(n))), op(self.tail, other.tail))

    def __add__(self, other: "SeqVec") -> "SeqVec":
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other: "SeqVec") -> "SeqVec":
        return self._binary(other, lambda a, b: a - b)

    def __neg__(self) -> "SeqVec":
        return SeqVec(tuple(-v for v in self.head), -self.tail)

    def __mul__(self, t: float) -> "SeqVec":
        t = float(t)
        return SeqVec(tuple(t * v for v in self.head), t * self.tail)

    __rmul__ = __mul__

    def __truediv__(self, t: float) -> "SeqVec":
        return self * (1.0 / t)

    @property
    def is_c0(self) -> bool:
        return self.tail == 0.0

    def support(self) -> list[int]:
        return [k + 1 for k, v in enumerate(self.head) if v != 0.0]

    def to_dict(self) -> dict:
        return {"head": list(self.head), "tail": self.tail}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __repr__(self) -> str:
        return f"SeqVec(head={list(self.head)}, tail={self.tail})"


def make_vec(head: Sequence[float] = (), tail: float = 0.0) -> SeqVec:
    return SeqVec(tuple(head), tail)


def basis(k: int, scale: float = 1.0) -> SeqVec:
    """The unit vector ``scale * e_k``."""
    if k < 1:
        raise ValueError("basis index must be >= 1")
    head = [0.0] * k
    head[-1] = scale
    return SeqVec(tuple(head), 0.0)


def constant(value: float = 1.0) -> SeqVec:
    return SeqVec((), value)


def sup_norm(x: SeqVec) -> float:
    m = abs(x.tail)
    for v in x.head:
        if abs(v) > m:
            m = abs(v)
    return m


@dataclass(frozen=True)
class IndexSeq:
    """Strictly increasing, non-empty tuple of positive indices ``(j0, ..., jp)``."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ValueError("IndexSeq must be non-empty")
        if idx[0] < 1:
            raise ValueError("indices must be positive")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices not strictly increasing: {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def head(self) -> int:
        return self.indices[0]

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class FinFunctional:
    """``f(x) = sum_k coeffs[k-1] * x(k) + cinf * tail(x)``."""

    coeffs: tuple[float, ...]
    cinf: float = 0.0

    def __post_init__(self) -> None:
        c = SeqVec(tuple(self.coeffs), 0.0)
        _check_finite((float(self.cinf),))
        object.__setattr__(self, "coeffs", c.head)
        object.__setattr__(self, "cinf", float(self.cinf))

    @classmethod
    def coordinate(cls, k: int, scale: float = 1.0) -> "FinFunctional":
        return cls(basis(k, scale).head)

    @property
    def horizon(self) -> int:
        return len(self.coeffs)

    def l1_norm(self) -> float:
        return math.fsum(abs(c) for c in self.coeffs) + abs(self.cinf)

    def vector(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        m = min(n, len(self.coeffs))
        out[:m] = self.coeffs[:m]
        return out

    def __call__(self, x: SeqVec) -> float:
        return apply_functional(self, x)

    def __add__(self, other: "FinFunctional") -> "FinFunctional":
        n = max(self.horizon, other.horizon)
        return FinFunctional(tuple(self.vector(n) + other.vector(n)), self.cinf + other.cinf)

    def __mul__(self, t: float) -> "FinFunctional":
        return FinFunctional(tuple(t * c for c in self.coeffs), t * self.cinf)

    __rmul__ = __mul__

    def __neg__(self) -> "FinFunctional":
        return self * -1.0

    def to_dict(self) -> dict:
        return {"head": list(self.coeffs), "tail": 0.0, "cinf": self.cinf}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def apply_functional(f: FinFunctional, x: SeqVec) -> float:
    """Exact pairing; coefficients beyond the head of ``x`` meet its tail."""
    terms = [c * x(k) for k, c in enumerate(f.coeffs, start=1)]
    terms.append(f.cinf * x.tail)
    return math.fsum(terms)


def active_horizon(x: SeqVec | FinFunctional, extras: Iterable[SeqVec | FinFunctional] = ()) -> int:
    return max([x.horizon] + [e.horizon for e in extras])


def vec_from_json(text: str | dict) -> SeqVec:
    data = json.loads(text) if isinstance(text, str) else text
    return make_vec(data.get("head", []), data.get("tail", 0.0))


def functional_from_json(text: str | dict) -> FinFunctional:
    data = json.loads(text) if isinstance(text, str) else text
    if data.get("tail", 0.0) != 0.0:
        raise ValueError("functional coefficients must be finitely supported (tail 0)")
    return FinFunctional(tuple(data.get("head", [])), data.get("cinf", 0.0))
