"""Expanding generating sets for arbitrary permutation groups.

Strong generators give a Cayley graph of diameter at most n, so the
vertex-transitivity bound 1 - 1/(16.5 * d * diam^2) certifies an initial
spectral gap; derandomized squaring then amplifies it to any target. Phase 1
(constant target 1/4) needs at most ceil(8 log2 n) rounds analytically;
phase 2 reaches eps < 1/4 in 3 + ceil(log2 log2 (1/eps)) more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bsgs import schreier_sims
from .carriers import PermCarrier
from .combine import measure_exact, reduce_to_quarter, reverify
from .multiset import Multiset, multiset
from .perm import GenSet, Perm
from .spectra import ITER_CAP, graph_info


def babai_bound(deg: int, diam: int) -> float:
    """Second-eigenvalue bound for a vertex-transitive graph."""
    if deg < 1 or diam < 1:
        raise ValueError("degree and diameter must be >= 1")
    return 1.0 - 1.0 / (16.5 * deg * diam * diam)


def rv_composition(lam: float, mu: float) -> float:
    """Spectral expansion of a derandomized square: 1 - (1-lam^2)(1-mu)."""
    return 1.0 - (1.0 - lam * lam) * (1.0 - mu)


@dataclass(frozen=True)
class AmplificationSchedule:
    phase1_rounds: int
    phase2_rounds: int
    per_round_mu: tuple[float, ...]
    mode: str

    @staticmethod
    def analytic(n: int, eps: float) -> "AmplificationSchedule":
        p1 = math.ceil(8 * math.log2(max(n, 2)))
        p2 = 0 if eps >= 0.25 else 3 + math.ceil(
            math.log2(max(1.0, math.log2(1.0 / eps))))
        # phase-2 auxiliary targets follow the degree-doubling rule
        # mu_i = lam_i^2, starting from lam = 1/4
        mus = []
        lam = 0.25
        for _ in range(p2):
            mus.append(lam * lam)
            lam = 2 * lam * lam
        return AmplificationSchedule(p1, p2, tuple(mus), "analytic")


def strong_generator_multiset(g: GenSet) -> Multiset:
    """Symmetrized, deduplicated strong generators of <g>."""
    bs = schreier_sims(g)
    gens = bs.strong_gens()
    if not gens:
        return multiset([(Perm.identity(g.degree), 1)])
    sym = set()
    for p in gens:
        sym.add(p)
        sym.add(p.inv())
    return multiset([(p, 1) for p in sorted(sym)])


def general_expander(g: GenSet, lam: float = 0.25,
                     mode: str = "adaptive",
                     trace: list | None = None) -> Multiset:
    """Certified lam-spectral expanding multiset for any <g>.

    Pipeline: strong generators -> Babai-bound certificate -> adaptive
    derandomized squaring. Bipartite starting graphs (e.g. a single
    transposition) are lazified with identity self-loops first.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must be in (0, 1)")
    bs = schreier_sims(g)
    carrier = PermCarrier(bs)
    ms = strong_generator_multiset(g)
    if carrier.order == 1:
        return ms.with_cert(0.0)
    if carrier.order > ITER_CAP:
        raise ValueError(
            f"group order {carrier.order} exceeds the verification cap "
            f"{ITER_CAP}; analytic-only certificates are not emitted")
    info = graph_info(carrier, ms)
    measured = measure_exact(carrier, ms)
    if measured is not None and measured >= 1.0 - 1e-12:
        # bipartite Cayley graph: shift the spectrum with a lazy step
        ms = ms.add_identity(carrier.identity(), ms.total)
        measured = measure_exact(carrier, ms)
        if trace is not None:
            trace.append({"op": "lazify", "total": ms.total,
                          "cert": measured})
    analytic = babai_bound(ms.total, max(info["diameter"], 1))
    cert = measured if measured is not None else analytic
    ms = ms.with_cert(cert)
    if trace is not None:
        trace.append({"op": "strong-gens", "total": ms.total,
                      "cert": ms.cert, "diameter": info["diameter"],
                      "babai_bound": analytic})
    if ms.cert <= lam:
        return ms
    out = reduce_to_quarter(carrier, ms, target=min(lam, 0.25),
                            mode=mode, trace=trace)
    if lam < 0.25 and (out.cert is None or out.cert > lam):
        out = reduce_to_quarter(carrier, out, target=lam, mode=mode,
                                trace=trace)
    return reverify(carrier, out)
