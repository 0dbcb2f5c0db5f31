"""Expanding generating sets for abelian groups and abelian quotients.

The construction chain, bottom up:

* greedy_expander / cyclic_expander: deterministic greedy selection over a
  small abelian group, tracking all character sums exactly; the certificate
  is the exhaustively evaluated bias.
* product_base_expander: folds the coordinate-window normal series of
  prod_j Z_{p_j}^{m_j} down to cyclic quotients fed by the greedy provider.
* final_R: the inner-product construction lifting a base expander on
  prod_j Z_{p_j}^{m_j} to one on prod_j Z_{p_j}^n of size c*n*|base| with
  bias at most 1/c + eps.
* build_abelianization / abelian_quotient_expander: the onto homomorphism
  from a product of prime-power cyclic groups onto an abelian quotient H/N
  of permutation groups, and the per-level images folded inside H/N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .bsgs import schreier_sims
from .carriers import AbelianShape, QuotientCarrier, VectorCarrier
from .combine import (AuxInfeasibleError, CertificationError, combine_union,
                      balance, compact, fold_series, reduce_to_quarter,
                      reverify, _next_pow2)
from .fields import FieldSpec, construct_field
from .multiset import Multiset, multiset
from .perm import GenSet, Perm, commutator, format_perm
from .series import QuotientContext, SubgroupChain, quotient_context
from .spectra import EXHAUSTIVE_CHAR_CAP, bias_exhaustive, root_tables

GREEDY_ORDER_CAP = 2**18
GREEDY_FULL_CAP = 1024
GREEDY_POOL = 128
GREEDY_MAX_ADDS = 4096


def primes_up_to(n: int) -> list[int]:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def primes_and_exponent(n: int) -> tuple[list[int], int]:
    """All primes <= n and e = ceil(log2 n)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return primes_up_to(n), math.ceil(math.log2(n))


# ---------------------------------------------------------------------------
# greedy small-bias provider

def _pair_rep(carrier: VectorCarrier, v):
    return min(v, carrier.inv(v))


def _pack_candidates(carrier: VectorCarrier, cand):
    ident = carrier.identity()
    reps = sorted({_pair_rep(carrier, v) for v in cand},
                  key=lambda v: (v == ident, v))
    rows = np.array([list(v) for v in reps], dtype=np.int64)
    mults = np.array([1.0 if carrier.inv(v) == v else 2.0 for v in reps])
    return reps, rows, mults


def _candidate_supply(carrier: VectorCarrier, seed: int):
    """Yields deterministic candidate batches, identity ordered last.

    Small groups enumerate every inverse-pair representative once; larger
    ones redraw a seeded pseudorandom pool each step (units always included
    so generation stays reachable).
    """
    if carrier.order <= GREEDY_FULL_CAP:
        packed = _pack_candidates(carrier, carrier.elements())
        while True:
            yield packed
    rng = np.random.default_rng(seed)
    moduli = np.array(carrier.moduli, dtype=np.int64)
    units = []
    for t in range(len(moduli)):
        u = [0] * len(moduli)
        u[t] = 1
        units.append(tuple(u))
    while True:
        raw = rng.integers(0, moduli, size=(GREEDY_POOL, len(moduli)),
                           dtype=np.int64)
        cand = {tuple(int(c) for c in row) for row in raw}
        cand.update(units)
        cand.add(carrier.identity())
        yield _pack_candidates(carrier, cand)


def greedy_expander(carrier: VectorCarrier, target: float,
                    max_adds: int = GREEDY_MAX_ADDS) -> Multiset:
    """Greedy conditional-expectation selection with exact bias tracking.

    Elements are added in inverse-closed pairs, each step picking the
    candidate minimizing the 8th-moment potential of the partial character
    sums over all nontrivial characters (a smooth pessimistic estimator for
    the maximum, which by itself ties constantly on small groups). Stops at
    a power-of-2 total multiplicity with exact bias <= target (both needed
    downstream); raises AuxInfeasibleError with the best achieved bias if
    the budget runs out.
    """
    order = carrier.order
    if order == 1:
        return multiset([(carrier.identity(), 1)], cert=0.0)
    if order > GREEDY_ORDER_CAP:
        raise AuxInfeasibleError(
            f"greedy provider capped at order {GREEDY_ORDER_CAP}, "
            f"got {order}", achievable_mu=1.0)
    moduli = carrier.moduli
    digits = np.indices(moduli).reshape(len(moduli), -1).T[1:]  # nontrivial
    digits = np.ascontiguousarray(digits, dtype=np.int64)
    roots, offsets = root_tables(moduli)
    mod_arr = np.array(moduli, dtype=np.int64)
    supply = _candidate_supply(carrier, seed=order * 1000003 + 7)

    c = np.zeros(digits.shape[0], dtype=np.float64)
    counts: dict = {}
    total = 0
    best_seen = 1.0

    def char_column(v) -> np.ndarray:
        val = np.ones(digits.shape[0], dtype=np.complex128)
        for t in range(len(moduli)):
            idx = (digits[:, t] * v[t]) % moduli[t]
            val *= roots[offsets[t] + idx]
        return val.real

    for _ in range(max_adds):
        reps, rows, mults = next(supply)
        deficit = (_next_pow2(total) - total) if total else 0
        if deficit % 2 == 1:
            live = mults == 1.0
        else:
            live = np.ones(len(reps), dtype=bool)
        scores = _kernels.greedy_scores(c, digits, rows[live], mults[live],
                                        mod_arr, roots, offsets)
        pick = int(np.flatnonzero(live)[int(np.argmin(scores))])
        v = reps[pick]
        w = carrier.inv(v)
        counts[v] = counts.get(v, 0) + 1
        added = 1
        if w != v:
            counts[w] = counts.get(w, 0) + 1
            added = 2
        c = c + mults[pick] * char_column(v)
        total += added
        bias = float(np.abs(c).max()) / total
        best_seen = min(best_seen, bias)
        if bias <= target and total & (total - 1) == 0:
            return multiset(counts.items(), cert=bias)
    raise AuxInfeasibleError(
        f"greedy budget {max_adds} exhausted at bias {best_seen:.4f} "
        f"(target {target})", achievable_mu=best_seen)


def cyclic_expander(t: int, lam: float) -> Multiset:
    """Certified expanding multiset for Z_t (elements are 1-tuples)."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return greedy_expander(VectorCarrier((t,)), lam)


def crt_split(x: int, primes) -> tuple[int, ...]:
    return tuple(x % p for p in primes)


# ---------------------------------------------------------------------------
# coordinate-window fold for prod_j Z_{p_j}^{m_j}
#
# M_s = vectors supported on block coordinates s..m_j-1; the s-th quotient
# is one coordinate per surviving prime, i.e. Z_{p_1 x ... x p_k} by CRT.

def _window_carrier(primes, ms_list, lo: int, hi: int) -> VectorCarrier:
    moduli = []
    for p, m in zip(primes, ms_list):
        moduli.extend([p] * max(0, min(hi, m) - lo))
    return VectorCarrier(tuple(moduli)) if moduli else VectorCarrier((1,))


def _window_widths(primes, ms_list, lo, hi):
    return [max(0, min(hi, m) - lo) for m in ms_list]


def _embed_window(vec, widths_src, widths_dst, offset):
    """Place per-block source coordinates at `offset` inside wider blocks."""
    out = []
    pos = 0
    for ws, wd in zip(widths_src, widths_dst):
        block = [0] * wd
        for i in range(ws):
            block[offset + i] = vec[pos + i]
        pos += ws
        out.extend(block)
    return tuple(out)


def product_base_expander(primes, m, lam: float = 0.25,
                          trace: list | None = None) -> Multiset:
    """Certified expanding multiset for prod_j Z_{p_j}^{m_j}.

    m may be a single exponent (the uniform product group) or a per-prime
    list. Each level quotient is the cyclic group Z_{p_1...p_k} handled by
    the greedy provider through CRT coordinates; levels are folded pairwise
    with combine + amplification, certified by exhaustive character sums at
    every intermediate window.
    """
    primes = list(primes)
    ms_list = [m] * len(primes) if isinstance(m, int) else list(m)
    if len(ms_list) != len(primes) or any(v < 1 for v in ms_list):
        raise ValueError("need one positive exponent per prime")
    depth = max(ms_list)

    @lru_cache(maxsize=None)
    def level_set(s: int) -> Multiset:
        live = [p for p, mm in zip(primes, ms_list) if mm > s]
        prod = math.prod(live)
        cyc = greedy_expander(VectorCarrier((prod,)), lam)
        out = cyc.map_elems(lambda v: crt_split(v[0], live), cert=cyc.cert)
        return reverify(VectorCarrier(tuple(live)), out)

    def merge(lo: int, mid: int, hi: int, upper: Multiset,
              lower: Multiset) -> Multiset:
        w_q = _window_widths(primes, ms_list, lo, hi)
        w_up = _window_widths(primes, ms_list, lo, mid)
        w_low = _window_widths(primes, ms_list, mid, hi)
        if sum(w_low) == 0:
            return upper
        if sum(w_up) == 0:
            return lower
        q = _window_carrier(primes, ms_list, lo, hi)
        a = lower.map_elems(
            lambda v: _embed_window(v, w_low, w_q, mid - lo), cert=lower.cert)
        b = upper.map_elems(
            lambda v: _embed_window(v, w_up, w_q, 0), cert=upper.cert)
        a, b = balance(q, a, q, b)
        out = combine_union(q, a, b)
        out = reduce_to_quarter(q, out, target=lam)
        if trace is not None:
            trace.append({"op": "base-fold", "window": (lo, mid, hi),
                          "total": out.total, "cert": out.cert})
        return out

    # the level-s quotient window is exactly the live primes' coordinates,
    # so level sets need no re-embedding
    sets = [level_set(s) for s in range(depth)]
    spans = [(s, s + 1) for s in range(depth)]
    while len(sets) < _next_pow2(len(sets)):
        sets.append(multiset([((0,), 1)], cert=0.0))
        spans.append((depth, depth))

    while len(sets) > 1:
        nxt_sets, nxt_spans = [], []
        for j in range(0, len(sets), 2):
            lo, mid = spans[j]
            hi = spans[j + 1][1]
            merged = merge(lo, mid, hi, sets[j], sets[j + 1])
            nxt_sets.append(merged)
            nxt_spans.append((lo, hi))
        sets, spans = nxt_sets, nxt_spans
    out = sets[0]
    carrier = _window_carrier(primes, ms_list, 0, depth)
    return reverify(carrier, out)


# ---------------------------------------------------------------------------
# the final construction R over prod_j Z_{p_j}^n

@dataclass(frozen=True)
class FinalR:
    n: int
    primes: tuple[int, ...]
    c: int
    fields: tuple[FieldSpec, ...]
    base: Multiset            # over prod_j Z_{p_j}^{m_j}
    points: Multiset          # over prod_j Z_{p_j}^n
    tuples: tuple             # T: c*n field-element tuples

    @property
    def cert(self) -> float:
        return self.points.cert


def _field_exponents(n: int, primes, c: int) -> list[int]:
    out = []
    for p in primes:
        m = 1
        while p**m <= c * n:
            m += 1
        out.append(m)
    return out


def psi_to_fields(vec, fields, widths) -> tuple:
    """Coordinate truncation onto the additive groups of the fields."""
    out = []
    pos = 0
    for f, w in zip(fields, widths):
        block = vec[pos:pos + w]
        out.append(f.element(tuple(block[:f.m]) + (0,) * (f.m - len(block))))
        pos += w
    return tuple(out)


def final_R(n: int, primes, c: int = 8, base: Multiset | None = None,
            eps: float = 0.125, verify: bool = True) -> FinalR:
    """Expanding generating multiset for prod_j Z_{p_j}^n.

    T is the first c*n tuples over the fields GF(p_j^{m_j}) in lexicographic
    coefficient order (distinct j give tuples distinct in every coordinate,
    since p_j^{m_j} > c*n); each point of R is, per prime block, the vector
    of inner products <x_j^l, y_j> for l = 0..n-1. |R| = c*n*|psi(S)|
    exactly and bias(R) <= 1/c + eps by the polynomial root-counting
    argument; the bound is re-measured exhaustively when the group is small
    enough.
    """
    primes = tuple(primes)
    exps = _field_exponents(n, primes, c)
    fields = tuple(construct_field(p, m) for p, m in zip(primes, exps))
    if base is None:
        base = product_base_expander(primes, exps, lam=eps)
        packed = compact(_window_carrier(primes, exps, 0, max(exps)), base,
                         256, target_cert=eps)
        if packed.cert is not None and packed.cert <= eps + 1e-9:
            base = packed
    if base.cert is None or base.cert > eps + 1e-9:
        raise CertificationError(
            f"base multiset not certified <= {eps}")
    if 1 / c + base.cert > 0.25 + 1e-9:
        raise CertificationError(
            f"1/c + eps = {1 / c + base.cert:.4f} exceeds 1/4")
    first = next(iter(base.elems))
    per_block = len(first) // len(primes)
    # base over the ragged product has exactly m_j coords per block; a
    # uniform-m base is truncated per block by psi
    if len(first) == sum(exps):
        widths = list(exps)
    elif len(first) % len(primes) == 0 and per_block >= max(exps):
        widths = [per_block] * len(primes)
    else:
        raise ValueError("base vector width incompatible with field sizes")

    cn = c * n
    if any(f.size <= cn for f in fields):
        raise ValueError("field too small for c*n distinct tuple coordinates")
    tuples = tuple(tuple(f.from_index(j) for f in fields) for j in range(cn))

    # per prime: power tables pw[j][t, l] = coeff vector of x_j(t)^l
    ys = [psi_to_fields(v, fields, widths) for v in base.elems]
    mults = np.array(base.mults, dtype=np.int64)
    pws = []
    for jp, f in enumerate(fields):
        pw = np.empty((cn, n, f.m), dtype=np.int64)
        for t in range(cn):
            x = tuples[t][jp]
            acc = f.one()
            for ell in range(n):
                pw[t, ell] = acc.coeffs
                acc = acc * x
        pws.append(pw)
    ymats = [np.array([y[jp].coeffs for y in ys], dtype=np.int64)
             for jp in range(len(fields))]
    # aggregate tuple chunks so memory stays bounded for large bases
    acc_counts: dict = {}
    chunk = max(1, 4_000_000 // max(1, len(ys) * len(primes) * n))
    for t0 in range(0, cn, chunk):
        t1 = min(cn, t0 + chunk)
        blocks = [np.einsum("tlm,sm->tsl", pws[jp][t0:t1], ymats[jp]) % p
                  for jp, p in enumerate(primes)]
        flat = np.concatenate(blocks, axis=2).reshape((t1 - t0) * len(ys), -1)
        weights = np.tile(mults, t1 - t0)
        uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
        counts = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(counts, inverse, weights)
        for row, k in zip(uniq, counts):
            key = tuple(int(x) for x in row)
            acc_counts[key] = acc_counts.get(key, 0) + int(k)
    pairs = list(acc_counts.items())
    cert = 1 / c + base.cert
    points = multiset(pairs, cert=cert)
    assert points.total == cn * base.total
    carrier = VectorCarrier(tuple(p for p in primes for _ in range(n)))
    if verify and carrier.order <= EXHAUSTIVE_CHAR_CAP:
        measured = bias_exhaustive(carrier, points)
        if measured > cert + 1e-9:
            raise CertificationError(
                f"measured bias {measured} above analytic bound {cert}")
        points = points.with_cert(measured)
    return FinalR(n, primes, c, fields, base, points, tuples)


def r_carrier(n: int, primes) -> VectorCarrier:
    return VectorCarrier(tuple(p for p in primes for _ in range(n)))


# ---------------------------------------------------------------------------
# abelianization of an abelian quotient H/N of permutation groups

@dataclass
class AbelianizationHom:
    """Onto homomorphism prod_j Z_{p_j^{e_j}}^n -> H/N.

    Basis images y[i][j] = x_i^(r_i / p_j^(e_ij)) for the reduced generators
    x_i of H; phi(a) = N * prod_j prod_i y_ij^(a_ij).
    """

    ctx: QuotientContext
    xs: tuple[Perm, ...]
    orders: tuple[int, ...]
    primes: tuple[int, ...]
    exps: tuple[int, ...]              # e_j = max_i e_ij
    e_table: tuple[tuple[int, ...], ...]   # e_ij per (i, j)
    ys: tuple[tuple[Perm, ...], ...]       # y_ij per (i, j)

    @property
    def domain_shape(self) -> AbelianShape:
        n = len(self.xs)
        return AbelianShape(tuple(
            (p, e, n) for p, e in zip(self.primes, self.exps)))

    def apply(self, vec) -> Perm:
        """phi(a): canonical representative of N * prod y_ij^{a_ij}."""
        n = len(self.xs)
        acc = Perm.identity(self.ctx.parent.degree)
        pos = 0
        for j in range(len(self.primes)):
            for i in range(n):
                a = vec[pos]
                pos += 1
                if a:
                    acc = acc * (self.ys[i][j] ** a)
        return self.ctx.canonicalize(acc)


def factorize(d: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division."""
    if d < 2:
        raise ValueError("d must be >= 2")
    out = []
    p = 2
    while p * p <= d:
        if d % p == 0:
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            out.append((p, e))
        p += 1
    if d > 1:
        out.append((d, 1))
    return out


def build_abelianization(h: GenSet, n: GenSet) -> AbelianizationHom:
    """The Appendix-style homomorphism onto an abelian quotient H/N."""
    from .bsgs import jerrum_reduce
    ctx = quotient_context(h, n)
    nb = ctx.kernel
    for x in h.nontrivial_gens():
        for y in h.nontrivial_gens():
            if not nb.contains(commutator(x, y)):
                raise ValueError(
                    f"quotient is not abelian: generators {format_perm(x)} "
                    f"and {format_perm(y)} do not commute mod N")
    xs = jerrum_reduce(h).gens
    if not xs:
        xs = (h.identity(),)
    orders = tuple(x.order() for x in xs)
    prime_set = sorted({p for r in orders for p, _ in factorize(r) if r > 1})
    if not prime_set:
        prime_set = [2]
    e_table = []
    ys = []
    for x, r in zip(xs, orders):
        fac = dict(factorize(r)) if r > 1 else {}
        row_e = tuple(fac.get(p, 0) for p in prime_set)
        row_y = tuple(x ** (r // p**e) if e else h.identity()
                      for p, e in zip(prime_set, row_e))
        e_table.append(row_e)
        ys.append(row_y)
    exps = tuple(max(row[j] for row in e_table)
                 for j in range(len(prime_set)))
    hom = AbelianizationHom(ctx, tuple(xs), orders, tuple(prime_set),
                            exps, tuple(e_table), tuple(ys))
    for i, (x, r) in enumerate(zip(xs, orders)):   # order sanity
        for j, p in enumerate(prime_set):
            assert ys[i][j].order() == p ** e_table[i][j]
    return hom


def hom_image(fn, s: Multiset, codomain=None) -> Multiset:
    """Image multiset under an onto homomorphism; certification transports."""
    out = s.map_elems(fn, cert=s.cert)
    if codomain is not None:
        out = reverify(codomain, out)
        if s.cert is not None and out.cert is not None \
                and out.cert > s.cert + 1e-9:
            raise CertificationError(
                f"image bias {out.cert} above source bound {s.cert}")
    return out


# ---------------------------------------------------------------------------
# abelian quotient pipeline

def _level_groups(hom: AbelianizationHom) -> list[GenSet]:
    """L_s = <N, y_ij^(p_j^s)>; L_0 = H and L_emax = N."""
    h = hom.ctx.parent_gens
    depth = max(hom.exps) if hom.exps else 1
    out = []
    for s in range(depth + 1):
        gens = list(hom.ctx.kernel_gens.gens)
        for i in range(len(hom.xs)):
            for j, p in enumerate(hom.primes):
                if hom.e_table[i][j] > s:
                    gens.append(hom.ys[i][j] ** (p**s))
        out.append(GenSet(h.degree, tuple(gens)))
    return out


def abelian_quotient_expander(h: GenSet, n: GenSet, target: float = 0.25,
                              c: int = 8, eps: float = 0.125,
                              trace: list | None = None) -> Multiset:
    """Certified expanding multiset on the abelian quotient H/N.

    Builds the final-construction sets R per level of the prime-power
    series, pushes each through the level homomorphism (so nothing larger
    than H/N is ever materialized), and folds the resulting normal series
    of subgroups of H/N.
    """
    hom = build_abelianization(h, n)
    ctx = hom.ctx
    if ctx.order == 1:
        return multiset([(ctx.identity(), 1)], cert=0.0)
    degree_n = h.degree
    groups = _level_groups(hom)
    depth = len(groups) - 1
    sets = []
    for s in range(depth):
        live = [j for j in range(len(hom.primes)) if hom.exps[j] > s]
        live_primes = tuple(hom.primes[j] for j in live)
        r_points = _compact_r_points(degree_n, live_primes, c, eps)
        qctx = quotient_context(groups[s], groups[s + 1])
        qcar = QuotientCarrier(qctx)

        def level_map(vec, s=s, live=live):
            acc = Perm.identity(degree_n)
            pos = 0
            for jj in live:
                p = hom.primes[jj]
                for i in range(len(hom.xs)):
                    a = vec[pos + i]
                    if a and hom.e_table[i][jj] > s:
                        acc = acc * (hom.ys[i][jj] ** (a * p**s))
                pos += degree_n
            return qctx.canonicalize(acc)

        img = r_points.map_elems(level_map, cert=r_points.cert)
        img = reverify(qcar, img)
        img = compact(qcar, img, 2048, target_cert=target)
        if img.cert is None or img.cert > target + 1e-9:
            img = reduce_to_quarter(qcar, img, target=target, trace=trace)
        sets.append(img)
        if trace is not None:
            trace.append({"op": "quotient-level", "level": s,
                          "total": img.total, "cert": img.cert})
    chain = SubgroupChain(tuple(groups), "normal-series", True,
                          tuple(schreier_sims(g).order() for g in groups))
    out = fold_series(chain, sets, target=target, trace=trace)
    return out


@lru_cache(maxsize=None)
def _final_r_cached(n: int, primes: tuple[int, ...], c: int,
                    eps: float) -> FinalR:
    # level maps only use coordinates i < len(xs) <= n, so the R points over
    # prod Z_p^n cover every level's needs
    return final_R(n, primes, c=c, eps=eps)


@lru_cache(maxsize=None)
def _compact_r_points(n: int, primes: tuple[int, ...], c: int,
                      eps: float) -> Multiset:
    """R points compacted (certified) for cheap per-element pushforwards."""
    r = _final_r_cached(n, primes, c, eps)
    return compact(r_carrier(n, primes), r.points, 2048, target_cert=0.25)
