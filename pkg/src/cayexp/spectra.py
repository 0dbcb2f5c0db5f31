"""Spectral certification: second eigenvalues and character-sum bias.

Every pipeline output is certified here. Three measurement routes:

* dense      -- build the |G| x |G| normalized adjacency of Cay(G,S) from the
                right-regular action and run a symmetric eigensolver.
* power      -- deflated power iteration on the shifted operators I+M and
                I-M, for groups too large to store densely.
* character  -- for abelian carriers the characters diagonalize every Cayley
                operator, so the bias (maximal nontrivial character sum) *is*
                lambda2; computed exhaustively as a multidimensional DFT of
                the weight tensor, or on a deterministic pseudorandom sample
                of characters above the exhaustive cap (sampled results are
                lower-bound monitoring, never certificates).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict

import numpy as np

from . import _kernels
from .carriers import (AbelianShape, Carrier, VectorCarrier,
                       multiset_order_check)
from .multiset import Multiset

DENSE_CAP = 10_000
ITER_CAP = 1_000_000
EXHAUSTIVE_CHAR_CAP = 2_000_000
SAMPLED_CHAR_COUNT = 100_000
POWER_ITER_MAX = 1_000_000

FORMAT_VERSION = 1


class MethodCapacityError(ValueError):
    """Group too large for the requested measurement method."""


class IterationCapError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectrumReport:
    group_order: int
    degree_total: int
    lambda2: float
    method: str
    tolerance: float
    certified_target: float | None = None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["format_version"] = FORMAT_VERSION
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)

    @property
    def certifying(self) -> bool:
        return not self.method.endswith("sampled")


def certify(report: SpectrumReport, target: float) -> bool:
    """True iff the measured bound meets the target within tolerance."""
    return report.certifying and report.lambda2 <= target + report.tolerance


# ---------------------------------------------------------------------------
# root-of-unity tables for direct character sums

def root_tables(moduli) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(moduli), dtype=np.int64)
    total = 0
    for t, m in enumerate(moduli):
        offsets[t] = total
        total += m
    roots = np.empty(total, dtype=np.complex128)
    for t, m in enumerate(moduli):
        k = np.arange(m)
        roots[offsets[t]:offsets[t] + m] = np.exp(2j * np.pi * k / m)
    return roots, offsets


def _vector_points(ms: Multiset) -> tuple[np.ndarray, np.ndarray]:
    pts = np.array([list(v) for v in ms.elems], dtype=np.int64)
    w = np.array([float(m) for m in ms.mults], dtype=np.float64)
    return pts, w


def instance_seed(moduli, ms: Multiset) -> int:
    h = hashlib.sha256()
    h.update(repr(tuple(moduli)).encode())
    for e, m in ms.pairs():
        h.update(repr((tuple(e), m)).encode())
    return int.from_bytes(h.digest()[:8], "big")


# ---------------------------------------------------------------------------
# abelian bias

def bias_exhaustive(carrier: VectorCarrier, ms: Multiset) -> float:
    """Exact maximal nontrivial character sum via a multidimensional DFT."""
    order = carrier.order
    if order > EXHAUSTIVE_CHAR_CAP:
        raise MethodCapacityError(
            f"{order} characters exceed the exhaustive cap "
            f"{EXHAUSTIVE_CHAR_CAP}")
    if order == 1:
        return 0.0
    pts, w = _vector_points(ms)
    flat = np.zeros(order, dtype=np.float64)
    idx = np.ravel_multi_index(pts.T, carrier.moduli)
    np.add.at(flat, idx, w)
    spec = np.fft.fftn(flat.reshape(carrier.moduli))
    mags = np.abs(spec).ravel()
    total = mags[0]
    mags[0] = 0.0
    return float(mags.max() / w.sum())


def bias_direct(carrier: VectorCarrier, ms: Multiset,
                betas: np.ndarray) -> np.ndarray:
    """Character sums |E_s chi(s)| for the given character rows."""
    pts, w = _vector_points(ms)
    roots, offsets = root_tables(carrier.moduli)
    moduli = np.array(carrier.moduli, dtype=np.int64)
    sums = _kernels.char_sums(pts, w, betas, moduli, roots, offsets)
    return np.abs(sums) / w.sum()


def bias_sampled(carrier: VectorCarrier, ms: Multiset,
                 count: int = SAMPLED_CHAR_COUNT) -> float:
    """Deterministic pseudorandom character sample; a lower-bound estimate."""
    rng = np.random.default_rng(instance_seed(carrier.moduli, ms))
    moduli = np.array(carrier.moduli, dtype=np.int64)
    # keep the kernel work bounded for very large point sets
    count = max(1000, min(count, 10**8 // max(ms.support, 1)))
    best = 0.0
    block = 20_000
    drawn = 0
    while drawn < count:
        b = min(block, count - drawn)
        betas = rng.integers(0, moduli, size=(b, len(moduli)), dtype=np.int64)
        betas = betas[np.any(betas != 0, axis=1)]
        if betas.size:
            best = max(best, float(bias_direct(carrier, ms, betas).max()))
        drawn += b
    return best


def abelian_bias(shape: AbelianShape | VectorCarrier, ms: Multiset,
                 exhaustive: bool | None = None) -> float:
    """Max over nontrivial characters of |E_s chi(s)| (= lambda2 of the graph)."""
    carrier = shape if isinstance(shape, VectorCarrier) else VectorCarrier.of(shape)
    for v in ms.elems:
        if len(v) != len(carrier.moduli):
            raise ValueError("element shape mismatch")
    ms.require_symmetric(carrier.inv)
    if exhaustive is None:
        exhaustive = carrier.order <= EXHAUSTIVE_CHAR_CAP
    if exhaustive:
        return bias_exhaustive(carrier, ms)
    return bias_sampled(carrier, ms)


# ---------------------------------------------------------------------------
# dense and iterative second eigenvalue

def dense_spectrum(carrier: Carrier, ms: Multiset) -> np.ndarray:
    """All eigenvalues of the normalized adjacency operator, ascending."""
    n = carrier.order
    if n > DENSE_CAP:
        raise MethodCapacityError(f"group order {n} exceeds dense cap "
                                  f"{DENSE_CAP}")
    ms.require_symmetric(carrier.inv)   # the eigensolver assumes symmetry
    tables, weights = carrier.action_tables(ms)
    m = _kernels.dense_adjacency(tables, weights, n)
    return np.linalg.eigvalsh(m)


def dense_lambda2(carrier: Carrier, ms: Multiset) -> float:
    evs = dense_spectrum(carrier, ms)
    if len(evs) < 2:
        return 0.0
    return float(max(-evs[0], evs[-2], 0.0))


def dense_lambda2_signed(carrier: Carrier, ms: Multiset) -> float:
    """Second largest eigenvalue without absolute value.

    This is the quantity the vertex-transitivity diameter bound controls; a
    bipartite Cayley graph has smallest eigenvalue -1 but its signed second
    eigenvalue still respects the bound.
    """
    evs = dense_spectrum(carrier, ms)
    if len(evs) < 2:
        return 0.0
    return float(evs[-2])


def power_lambda2(carrier: Carrier, ms: Multiset, tol: float = 1e-9,
                  itmax: int = POWER_ITER_MAX) -> float:
    n = carrier.order
    if n > ITER_CAP:
        raise MethodCapacityError(f"group order {n} exceeds iterative cap "
                                  f"{ITER_CAP}")
    if n == 1:
        return 0.0
    ms.require_symmetric(carrier.inv)
    tables, weights = carrier.action_tables(ms)
    rng = np.random.default_rng(0x5EED_CAFE)

    def extreme(sign: float) -> float:
        # power iteration on I + sign*M restricted to the ones-complement;
        # both shifted operators are PSD there, so the Rayleigh quotient
        # converges to the top eigenvalue 1 + sign*mu_extreme
        x = rng.standard_normal(n)
        x -= x.mean()
        x /= np.linalg.norm(x)
        prev = np.inf
        for _ in range(itmax):
            y = x + sign * _kernels.cayley_matvec(tables, weights, x)
            y -= y.mean()
            rq = float(x @ y)
            ny = np.linalg.norm(y)
            if ny == 0.0:
                return rq
            x = y / ny
            if abs(rq - prev) < tol:
                return rq
            prev = rq
        raise IterationCapError(
            f"power iteration did not converge in {itmax} iterations")

    mu_max = extreme(1.0) - 1.0
    mu_min = 1.0 - extreme(-1.0)
    return float(max(mu_max, -mu_min, 0.0))


# ---------------------------------------------------------------------------
# unified entry point

def second_eigenvalue(carrier: Carrier, ms: Multiset, tol: float = 1e-9,
                      method: str = "auto") -> SpectrumReport:
    """Certified lambda2 of Cay(G, S) for a symmetric multiset S."""
    ms.require_symmetric(carrier.inv)
    if not multiset_order_check(carrier, ms):
        raise ValueError("multiset contains elements outside the group")
    n = carrier.order
    if method == "auto":
        if isinstance(carrier, VectorCarrier):
            method = ("character-sum" if n <= EXHAUSTIVE_CHAR_CAP
                      else "character-sum-sampled")
        elif n <= DENSE_CAP:
            method = "dense"
        elif n <= ITER_CAP:
            method = "power-iteration"
        else:
            raise MethodCapacityError(f"group order {n} exceeds all caps")
    if method == "dense":
        lam = dense_lambda2(carrier, ms)
        tolerance = 1e-9
    elif method == "power-iteration":
        lam = power_lambda2(carrier, ms, tol=tol)
        tolerance = 10 * tol
    elif method == "character-sum":
        if not isinstance(carrier, VectorCarrier):
            raise ValueError("character-sum method needs an abelian carrier")
        lam = bias_exhaustive(carrier, ms)
        tolerance = 1e-9
    elif method == "character-sum-sampled":
        if not isinstance(carrier, VectorCarrier):
            raise ValueError("character-sum method needs an abelian carrier")
        lam = bias_sampled(carrier, ms)
        tolerance = 1e-9
    else:
        raise ValueError(f"unknown method {method!r}")
    return SpectrumReport(group_order=n, degree_total=ms.total,
                          lambda2=lam, method=method, tolerance=tolerance)


# ---------------------------------------------------------------------------
# structural graph checks

def graph_info(carrier: Carrier, ms: Multiset) -> dict:
    """Connectivity, bipartiteness and diameter of Cay(G, S) by BFS."""
    tables, _ = carrier.action_tables(ms)
    dist = _kernels.bfs_distances(tables)
    connected = bool((dist >= 0).all())
    bipartite = True
    reached = np.nonzero(dist >= 0)[0]
    for j in range(tables.shape[0]):
        tj = tables[j][reached]
        if np.any((dist[reached] + dist[tj]) % 2 == 0):
            bipartite = False
            break
    return {
        "connected": connected,
        "bipartite": bipartite,
        "diameter": int(dist.max()) if connected else -1,
    }
