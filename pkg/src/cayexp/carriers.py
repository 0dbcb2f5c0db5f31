"""Concrete finite groups the spectral verifier can enumerate.

A carrier provides deterministic element enumeration, group arithmetic, and
action tables (index-level right-multiplication maps) for building Cayley
operators. Three kinds cover the whole pipeline: permutation groups,
quotients H/N by canonical coset representatives, and products of cyclic
groups given by per-coordinate moduli.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bsgs import BSGS, CapacityError
from .multiset import Multiset
from .perm import GenSet, Perm
from .series import QuotientContext


@dataclass(frozen=True)
class AbelianShape:
    """Product of cyclic prime-power groups: prod_i Z_{p_i^e_i}^{n_i}."""

    factors: tuple[tuple[int, int, int], ...]   # (prime, exponent, copies)

    def __post_init__(self):
        primes = [p for p, _, _ in self.factors]
        if primes != sorted(primes) or len(set(primes)) != len(primes):
            raise ValueError("primes must be strictly increasing")
        for p, e, n in self.factors:
            if e < 1 or n < 1:
                raise ValueError("exponents and copies must be >= 1")
            if p < 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
                raise ValueError(f"{p} is not prime")

    @cached_property
    def moduli(self) -> tuple[int, ...]:
        out = []
        for p, e, n in self.factors:
            out.extend([p**e] * n)
        return tuple(out)

    @property
    def width(self) -> int:
        return len(self.moduli)

    @property
    def order(self) -> int:
        n = 1
        for m in self.moduli:
            n *= m
        return n

    def identity(self) -> tuple[int, ...]:
        return (0,) * self.width

    def reduce(self, v) -> tuple[int, ...]:
        return tuple(int(c) % m for c, m in zip(v, self.moduli))

    def add(self, a, b) -> tuple[int, ...]:
        return tuple((x + y) % m for x, y, m in zip(a, b, self.moduli))

    def neg(self, a) -> tuple[int, ...]:
        return tuple((-x) % m for x, m in zip(a, self.moduli))


def shape_for_moduli(moduli) -> "VectorCarrier":
    return VectorCarrier(tuple(int(m) for m in moduli))


class VectorCarrier:
    """Additive group prod_t Z_{m_t}; elements are coordinate tuples."""

    def __init__(self, moduli: tuple[int, ...]):
        if any(m < 1 for m in moduli):
            raise ValueError("moduli must be >= 1")
        self.moduli = tuple(int(m) for m in moduli)

    @staticmethod
    def of(shape: AbelianShape) -> "VectorCarrier":
        return VectorCarrier(shape.moduli)

    @cached_property
    def order(self) -> int:
        n = 1
        for m in self.moduli:
            n *= m
        return n

    def identity(self):
        return (0,) * len(self.moduli)

    def mul(self, a, b):
        return tuple((x + y) % m for x, y, m in zip(a, b, self.moduli))

    def inv(self, a):
        return tuple((-x) % m for x, m in zip(a, self.moduli))

    def elements(self, cap: int = 10**6) -> list:
        if self.order > cap:
            raise CapacityError(f"group order {self.order} exceeds cap {cap}")
        grids = np.indices(self.moduli).reshape(len(self.moduli), -1).T
        return [tuple(int(c) for c in row) for row in grids]

    def index_of(self, v) -> int:
        idx = 0
        for c, m in zip(v, self.moduli):
            idx = idx * m + (c % m)
        return idx

    def action_tables(self, ms: Multiset) -> tuple[np.ndarray, np.ndarray]:
        n = self.order
        shape = self.moduli
        base = np.indices(shape).reshape(len(shape), -1)
        tables = np.empty((ms.support, n), dtype=np.int64)
        for j, (v, _) in enumerate(ms.pairs()):
            shifted = [(base[t] + v[t]) % shape[t] for t in range(len(shape))]
            tables[j] = np.ravel_multi_index(shifted, shape)
        weights = np.array(ms.mults, dtype=np.float64)
        return tables, weights / weights.sum()


class PermCarrier:
    """A permutation group enumerated in lexicographic image order."""

    def __init__(self, bsgs: BSGS, cap: int = 10**6):
        self.bsgs = bsgs
        self.cap = cap

    @staticmethod
    def of(g: GenSet, cap: int = 10**6) -> "PermCarrier":
        return PermCarrier(BSGS.build(g), cap)

    @property
    def order(self) -> int:
        return self.bsgs.order()

    def identity(self) -> Perm:
        return Perm.identity(self.bsgs.degree)

    def mul(self, a: Perm, b: Perm) -> Perm:
        return a * b

    def inv(self, a: Perm) -> Perm:
        return a.inv()

    @cached_property
    def _elements(self) -> list[Perm]:
        return sorted(self.bsgs.elements(cap=self.cap))

    def elements(self, cap: int | None = None) -> list[Perm]:
        if cap is not None and self.order > cap:
            raise CapacityError(f"group order {self.order} exceeds cap {cap}")
        return self._elements

    @cached_property
    def _index(self) -> dict[Perm, int]:
        return {p: i for i, p in enumerate(self._elements)}

    def index_of(self, p: Perm) -> int:
        return self._index[p]

    def action_tables(self, ms: Multiset) -> tuple[np.ndarray, np.ndarray]:
        els = self._elements
        idx = self._index
        tables = np.empty((ms.support, len(els)), dtype=np.int64)
        for j, (s, _) in enumerate(ms.pairs()):
            tables[j] = [idx[e * s] for e in els]
        weights = np.array(ms.mults, dtype=np.float64)
        return tables, weights / weights.sum()


class QuotientCarrier:
    """The quotient H/N represented by canonical coset representatives."""

    def __init__(self, ctx: QuotientContext, cap: int = 10**6):
        self.ctx = ctx
        self.cap = cap

    @property
    def order(self) -> int:
        return self.ctx.order

    def identity(self) -> Perm:
        return self.ctx.identity()

    def mul(self, a: Perm, b: Perm) -> Perm:
        return self.ctx.mul(a, b)

    def inv(self, a: Perm) -> Perm:
        return self.ctx.inv(a)

    def project(self, a: Perm) -> Perm:
        return self.ctx.canonicalize(a)

    @cached_property
    def _elements(self) -> list[Perm]:
        if self.ctx.parent.order() > self.cap:
            raise CapacityError(
                f"parent order {self.ctx.parent.order()} exceeds cap "
                f"{self.cap}")
        reps = {self.ctx.canonicalize(p)
                for p in self.ctx.parent.elements(cap=self.cap)}
        return sorted(reps)

    def elements(self, cap: int | None = None) -> list[Perm]:
        if cap is not None and self.order > cap:
            raise CapacityError(f"group order {self.order} exceeds cap {cap}")
        return self._elements

    @cached_property
    def _index(self) -> dict[Perm, int]:
        return {p: i for i, p in enumerate(self._elements)}

    def index_of(self, p: Perm) -> int:
        return self._index[self.ctx.canonicalize(p)]

    def action_tables(self, ms: Multiset) -> tuple[np.ndarray, np.ndarray]:
        els = self._elements
        idx = self._index
        can = self.ctx.canonicalize
        tables = np.empty((ms.support, len(els)), dtype=np.int64)
        for j, (s, _) in enumerate(ms.pairs()):
            tables[j] = [idx[can(e * s)] for e in els]
        weights = np.array(ms.mults, dtype=np.float64)
        return tables, weights / weights.sum()

    def image_multiset(self, ms: Multiset,
                       cert: float | None = None) -> Multiset:
        """Push a multiset on H down to canonical representatives on H/N."""
        return ms.map_elems(self.ctx.canonicalize, cert=cert)


Carrier = PermCarrier | QuotientCarrier | VectorCarrier


def multiset_order_check(carrier, ms: Multiset) -> bool:
    """True when the multiset's elements all lie in the carrier's group."""
    if isinstance(carrier, VectorCarrier):
        return all(len(v) == len(carrier.moduli) for v in ms.elems)
    if isinstance(carrier, PermCarrier):
        return all(carrier.bsgs.contains(p) for p in ms.elems)
    return all(carrier.ctx.parent.contains(p) for p in ms.elems)
