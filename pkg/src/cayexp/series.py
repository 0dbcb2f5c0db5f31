"""Derived series, normal closure, and quotient-group arithmetic.

Quotient elements are represented by canonical coset representatives: the
canonical representative of N*h is the element of the coset with
lexicographically smallest image array, found by descending the kernel's
stabilizer chain (the chain stores generators at their smallest moved point,
so the greedy position-by-position choice is exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bsgs import BSGS, schreier_sims
from .perm import GenSet, Perm, commutator, format_perm


class NormalityError(ValueError):
    pass


def normal_closure(ambient: GenSet, seed: list[Perm]) -> GenSet:
    """Smallest subgroup of <ambient> containing seed and normal in it."""
    gens: list[Perm] = [p for p in dict.fromkeys(seed) if not p.is_identity()]
    closure = BSGS.build(GenSet(ambient.degree, tuple(gens)))
    queue = list(gens)
    while queue:
        c = queue.pop(0)
        for g in ambient.nontrivial_gens():
            t = c.conjugate(g)
            if not closure.contains(t):
                gens.append(t)
                closure._add(t)
                closure._complete()
                queue.append(t)
    return GenSet(ambient.degree, tuple(gens))


def commutator_subgroup(g: GenSet) -> GenSet:
    seed = []
    for x in g.nontrivial_gens():
        for y in g.nontrivial_gens():
            c = commutator(x, y)
            if not c.is_identity():
                seed.append(c)
    return normal_closure(g, seed)


@dataclass(frozen=True)
class SubgroupChain:
    """A chain of subgroups, outermost first."""

    groups: tuple[GenSet, ...]
    kind: str                      # "derived-series" or "normal-series"
    solvable: bool
    orders: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.groups) - 1


def derived_series(g: GenSet) -> SubgroupChain:
    """Chain of commutator subgroups down to the stabilized group.

    Terminates at the trivial group iff <g> is solvable; a non-solvable
    input is not an error, the series simply stabilizes above trivial and
    the solvable flag is cleared.
    """
    groups = [g]
    orders = [schreier_sims(g).order()]
    solvable = True
    while orders[-1] > 1:
        nxt = commutator_subgroup(groups[-1])
        order = schreier_sims(nxt).order()
        if order == orders[-1]:
            solvable = False
            break
        groups.append(nxt)
        orders.append(order)
    return SubgroupChain(tuple(groups), "derived-series", solvable,
                         tuple(orders))


def dixon_bound(degree: int) -> int:
    """Derived-length bound 5*log3(n) for solvable subgroups of S_n."""
    return math.ceil(5 * math.log(max(degree, 2), 3))


@dataclass
class QuotientContext:
    """Coset arithmetic for H/N with minimum-image canonical representatives."""

    parent: BSGS
    kernel: BSGS
    parent_gens: GenSet
    kernel_gens: GenSet
    _cache: dict[Perm, Perm] = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return self.parent.order() // self.kernel.order()

    def canonicalize(self, h: Perm) -> Perm:
        hit = self._cache.get(h)
        if hit is not None:
            return hit
        p = h
        for lv in self.kernel.levels:
            # group at this level fixes every point below lv.point, so the
            # image at position lv.point is h[beta] for orbit points beta
            beta = min(lv.transversal, key=lambda b: p.img[b])
            u = lv.transversal[beta]
            p = u * p
        self._cache[h] = p
        return p

    def mul(self, a: Perm, b: Perm) -> Perm:
        return self.canonicalize(a * b)

    def inv(self, a: Perm) -> Perm:
        return self.canonicalize(a.inv())

    def identity(self) -> Perm:
        return self.canonicalize(Perm.identity(self.parent.degree))


def quotient_context(h: GenSet, n: GenSet) -> QuotientContext:
    """Canonical coset arithmetic for H/N; verifies N is normal in H."""
    if h.degree != n.degree:
        raise ValueError("degree mismatch between parent and kernel")
    hb = schreier_sims(h)
    nb = schreier_sims(n)
    for x in n.nontrivial_gens():
        if not hb.contains(x):
            raise NormalityError(
                f"kernel generator {format_perm(x)} is not in the parent group")
    for x in n.nontrivial_gens():
        for g in h.nontrivial_gens():
            conj = x.conjugate(g)
            if not nb.contains(conj):
                raise NormalityError(
                    f"not normal: conjugate {format_perm(conj)} of "
                    f"{format_perm(x)} by {format_perm(g)} lies outside N")
    return QuotientContext(hb, nb, h, n)
