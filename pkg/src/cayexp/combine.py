"""Combining and amplifying expanding generating multisets.

The three moves, with their certified-bound algebra:

* combine:  union of a set expanding a normal subgroup N and a set whose
            image expands G/N; bound (1+lam)*max(|A|,|B|)/(|A|+|B|).
* derandomized squaring: products u_i*u_j along the edges of an auxiliary
            consistently-labeled expander H; bound lam^2 + mu, degree 2d|U|.
* balance/compact: multiplicity bookkeeping (power-of-2 totals, whole-set
            replication, gcd reduction, bounded re-weighting) so the two
            moves stay affordable; every re-weighting is re-certified.

Certified bounds propagate analytically and are re-measured exactly whenever
the carrier is small enough for the verifier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bsgs import BSGS
from .carriers import Carrier, PermCarrier, QuotientCarrier, VectorCarrier
from .multiset import Multiset, NonSymmetricError, multiset, union
from .perm import GenSet, Perm
from .series import QuotientContext, SubgroupChain, quotient_context
from .spectra import (DENSE_CAP, EXHAUSTIVE_CHAR_CAP, ITER_CAP,
                      bias_exhaustive, dense_lambda2, power_lambda2)


class CertificationError(ValueError):
    pass


class AmplificationError(ValueError):
    pass


class AuxInfeasibleError(ValueError):
    def __init__(self, message: str, achievable_mu: float):
        super().__init__(message)
        self.achievable_mu = achievable_mu


# ---------------------------------------------------------------------------
# exact measurement when the carrier is small enough

def measure_exact(carrier: Carrier, ms: Multiset) -> float | None:
    """Exact lambda2 when affordable, else None (analytic bookkeeping only)."""
    n = carrier.order
    if isinstance(carrier, VectorCarrier):
        if n <= EXHAUSTIVE_CHAR_CAP:
            return bias_exhaustive(carrier, ms)
        return None
    if n <= DENSE_CAP:
        return dense_lambda2(carrier, ms)
    if n <= ITER_CAP:
        return power_lambda2(carrier, ms)
    return None


def reverify(carrier: Carrier, ms: Multiset) -> Multiset:
    """Replace the certificate by an exact measurement when possible."""
    lam = measure_exact(carrier, ms)
    if lam is None:
        return ms
    return ms.with_cert(lam)


def symmetrize(carrier: Carrier, ms: Multiset) -> Multiset:
    """Close a multiset under carrier inverses (already-symmetric: no-op).

    Needed when coset representatives are reinterpreted in a coarser
    quotient: the representative of an inverse coset need not be the inverse
    representative. The doubled multiset has the same image modulo any
    normal subgroup containing the mismatch, so quotient-side certificates
    transport unchanged.
    """
    if ms.is_symmetric(carrier.inv):
        return ms
    doubled = union(ms, ms.map_elems(carrier.inv), cert=ms.cert)
    return doubled.gcd_reduced()


# ---------------------------------------------------------------------------
# multiplicity bookkeeping

def _pair_units(carrier: Carrier, ms: Multiset):
    inv = carrier.inv
    units = []
    seen = set()
    for e, m in ms.pairs():
        if e in seen:
            continue
        f = inv(e)
        seen.add(e)
        seen.add(f)
        units.append((-m, e, (e,) if f == e else (e, f)))
    return units


def _take_units(units, k: int) -> Multiset:
    kept = []
    total = 0
    for _, _, elems in units:
        if total >= k:
            break
        kept.extend(elems)
        total += len(elems)
    return multiset([(e, 1) for e in kept])


def _trim_support(carrier: Carrier, ms: Multiset, k: int,
                  seeded: bool = False) -> Multiset:
    """Symmetric support trim to ~k elements, all kept weights set to 1.

    Heaviest-first by default. When the top weights align with a structured
    subset (convolution squares concentrate on subgroups, which do not
    expand), the seeded variant picks a deterministic pseudorandom subset
    instead; both are re-measured by the caller before acceptance.
    """
    units = sorted(_pair_units(carrier, ms), key=lambda u: (u[0], u[1]))
    if seeded:
        from .spectra import instance_seed
        rng = np.random.default_rng(instance_seed((k,), ms))
        units = [units[i] for i in rng.permutation(len(units))]
    return _take_units(units, k)


def compact(carrier: Carrier, ms: Multiset, target_total: int,
            target_cert: float | None = None) -> Multiset:
    """Shrink a multiset, re-certifying every lossy step exactly.

    gcd reduction is spectrum-invariant. When the support itself exceeds the
    budget, a heaviest-first symmetric trim is tried and kept only if its
    measured bound stays within target_cert (or the input's certificate).
    Remaining oversize totals are proportionally re-weighted under the same
    acceptance rule. Carriers too large to re-measure are returned unchanged.
    """
    ms = ms.gcd_reduced()
    if ms.total <= target_total:
        return ms
    if not is_measurable(carrier):
        return ms
    accept = target_cert if target_cert is not None else ms.cert
    if ms.support > target_total:
        budget = target_total
        done = False
        while not done and budget < 2 * ms.support:
            for seeded in (False, True):
                trimmed = _trim_support(carrier, ms, budget, seeded=seeded)
                lam = measure_exact(carrier, trimmed)
                if accept is None or lam <= accept:
                    ms = trimmed.with_cert(lam)
                    done = True
                    break
            budget *= 2
    if ms.total <= target_total:
        return ms
    scale = target_total / ms.total
    mults = tuple(max(1, round(m * scale)) for m in ms.mults)
    out = Multiset(ms.elems, mults).gcd_reduced()
    lam = measure_exact(carrier, out)
    if accept is not None and lam > accept:
        return ms
    return out.with_cert(lam)


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def pad_to_total(carrier: Carrier, ms: Multiset, target: int) -> Multiset:
    """Reach exactly `target` total multiplicity by replication + padding.

    The whole multiset is replicated floor(target/total) times; the remainder
    is spread one copy at a time over inverse pairs in canonical order, so no
    element exceeds twice its replicated share. The certified bound becomes
    (q*total*cert + r)/target; the carrier argument is only used for inverse
    pairing, so the certificate keeps referring to whatever graph it was
    measured on (callers re-verify where they know the right carrier).
    """
    total = ms.total
    if target < total:
        raise ValueError("target below current total")
    q, r = divmod(target, total)
    out_counts = {e: m * q for e, m in ms.pairs()}
    if r:
        inv = carrier.inv
        pairs = []
        selfinv = []
        seen = set()
        for e, m in ms.pairs():
            if e in seen:
                continue
            f = inv(e)
            if f not in out_counts:
                raise NonSymmetricError(
                    "cannot pad a multiset that is not inverse-closed")
            seen.add(e)
            seen.add(f)
            if f == e:
                selfinv.append(e)
            else:
                pairs.append((e, f))
        if r % 2:
            if not selfinv:
                raise AssertionError(
                    "odd remainder with no self-inverse element")
            out_counts[selfinv[0]] += 1
            r -= 1
        idx = 0
        cyc = pairs + [(e, e) for e in selfinv]
        while r > 0:
            e, f = cyc[idx % len(cyc)]
            if e == f:
                if r >= 2:
                    out_counts[e] += 2
                    r -= 2
                else:
                    out_counts[e] += 1
                    r -= 1
            else:
                out_counts[e] += 1
                out_counts[f] += 1
                r -= 2
            idx += 1
    cert = None
    if ms.cert is not None:
        pad = target - q * total
        cert = (q * total * ms.cert + pad) / target
    return multiset(out_counts.items(), cert=cert)


def balance(carrier_a: Carrier, a: Multiset, carrier_b: Carrier,
            b: Multiset) -> tuple[Multiset, Multiset]:
    """Bring both multisets to the same power-of-2 total multiplicity."""
    target = _next_pow2(max(a.total, b.total))
    return (pad_to_total(carrier_a, a, target),
            pad_to_total(carrier_b, b, target))


# ---------------------------------------------------------------------------
# auxiliary expanders: consistently labeled regular graphs

@dataclass(frozen=True)
class AuxExpander:
    vertex_count: int
    degree: int
    neighbors: np.ndarray          # (V, d): neighbors[v, l]
    certified_mu: float
    label_inv: tuple[int, ...]     # pi_{label_inv[l]} == pi_l^{-1}

    def __post_init__(self):
        v, d = self.neighbors.shape
        if v != self.vertex_count or d != self.degree:
            raise ValueError("neighbor table shape mismatch")
        ident = np.arange(v)
        for ell in range(d):
            col = self.neighbors[:, ell]
            if np.sort(col).tolist() != ident.tolist():
                raise ValueError(
                    f"inconsistent labeling: label {ell} is not a permutation")
        for ell, ell2 in enumerate(self.label_inv):
            if not np.array_equal(self.neighbors[self.neighbors[:, ell], ell2],
                                  ident):
                raise ValueError(
                    f"label {ell2} is not the inverse of label {ell}")

    def rot(self, v: int, label: int) -> tuple[int, int]:
        return int(self.neighbors[v, label]), self.label_inv[label]


def aux_from_rotation(neighbors: np.ndarray, label_inv,
                      certified_mu: float | None = None) -> AuxExpander:
    """Auxiliary expander from an explicit neighbor table.

    When certified_mu is omitted it is measured by a dense eigensolve of the
    (normalized) adjacency matrix.
    """
    neighbors = np.asarray(neighbors, dtype=np.int64)
    v, d = neighbors.shape
    if certified_mu is None:
        m = np.zeros((v, v))
        for ell in range(d):
            np.add.at(m, (np.arange(v), neighbors[:, ell]), 1.0 / d)
        evs = np.linalg.eigvalsh(m)
        certified_mu = float(max(-evs[0], evs[-2], 0.0)) if v > 1 else 0.0
    return AuxExpander(v, d, neighbors, certified_mu, tuple(label_inv))


def aux_from_z2_multiset(ms: Multiset, t: int) -> AuxExpander:
    """Cayley graph over Z_2^t; labeling is consistent and self-inverse."""
    vecs = ms.expand()
    v = 1 << t
    d = len(vecs)
    idx = np.arange(v)
    neighbors = np.empty((v, d), dtype=np.int64)
    for ell, vec in enumerate(vecs):
        mask = 0
        for bit_pos, c in enumerate(vec):
            if c:
                mask |= 1 << (len(vec) - 1 - bit_pos)
        neighbors[:, ell] = idx ^ mask
    carrier = VectorCarrier((2,) * t) if t else VectorCarrier((1,))
    mu = bias_exhaustive(carrier, ms) if t else 0.0
    return AuxExpander(v, d, neighbors, mu, tuple(range(d)))


_AUX_CACHE: dict[tuple[int, float], AuxExpander] = {}
_FULL_SQUARE_CAP = 1024


def aux_family(vertex_count: int, target_mu: float) -> AuxExpander:
    """Consistently labeled regular graph on 2^t vertices with mu <= target.

    Small vertex counts use the full group of Z_2^t (mu = 0, the degenerate
    plain-squaring auxiliary); larger ones use the greedy provider's
    certified small-bias multiset.
    """
    if vertex_count < 1 or vertex_count & (vertex_count - 1):
        raise ValueError("vertex count must be a power of 2")
    key = (vertex_count, round(target_mu, 12))
    hit = _AUX_CACHE.get(key)
    if hit is not None:
        return hit
    t = vertex_count.bit_length() - 1
    if vertex_count == 1:
        aux = AuxExpander(1, 1, np.zeros((1, 1), dtype=np.int64), 0.0, (0,))
    elif vertex_count <= _FULL_SQUARE_CAP:
        carrier = VectorCarrier((2,) * t)
        full = multiset([(v, 1) for v in carrier.elements()])
        aux = aux_from_z2_multiset(full, t)
    else:
        from .abexp import greedy_expander
        ms = greedy_expander(VectorCarrier((2,) * t), target_mu)
        aux = aux_from_z2_multiset(ms, t)
    if aux.certified_mu > target_mu:
        raise AuxInfeasibleError(
            f"could not reach mu <= {target_mu} on {vertex_count} vertices",
            achievable_mu=aux.certified_mu)
    _AUX_CACHE[key] = aux
    return aux


# ---------------------------------------------------------------------------
# derandomized squaring

def derandomized_square(carrier: Carrier, u: Multiset,
                        h: AuxExpander) -> Multiset:
    """Products u_i * u_j over the arcs of h, plus the inverse-indexed half.

    Output degree is exactly 2 * d * |U| and the certified bound is
    lam'^2 + mu. The expanded indexing u_1..u_|U| is multiplicity-expanded
    and sorted, with the inverse pairing stored explicitly.
    """
    total = u.total
    if h.vertex_count != total:
        raise ValueError(
            f"aux vertex count {h.vertex_count} != multiset total {total}")
    sigma = u.inverse_pairing(carrier.inv)
    if isinstance(carrier, VectorCarrier):
        rows = np.array([list(v) for v in u.expand()], dtype=np.int64)
        moduli = np.array(carrier.moduli, dtype=np.int64)
        chunks = []
        for ell in range(h.degree):
            j = h.neighbors[:, ell]
            prod = (rows + rows[j]) % moduli
            chunks.append(prod)
            chunks.append((-prod) % moduli)   # u_i^-1 u_j^-1 = -(u_i + u_j)
        allrows = np.concatenate(chunks, axis=0)
        uniq, counts = np.unique(allrows, axis=0, return_counts=True)
        pairs = [(tuple(int(c) for c in row), int(k))
                 for row, k in zip(uniq, counts)]
    else:
        expanded = u.expand()
        mul = carrier.mul
        acc: dict = {}
        for ell in range(h.degree):
            col = h.neighbors[:, ell]
            for i in range(total):
                j = int(col[i])
                p1 = mul(expanded[i], expanded[j])
                acc[p1] = acc.get(p1, 0) + 1
                p2 = mul(expanded[sigma[i]], expanded[sigma[j]])
                acc[p2] = acc.get(p2, 0) + 1
        pairs = acc.items()
    cert = None
    if u.cert is not None:
        cert = u.cert * u.cert + h.certified_mu
    return multiset(pairs, cert=cert)


def is_measurable(carrier: Carrier) -> bool:
    n = carrier.order
    if isinstance(carrier, VectorCarrier):
        return n <= EXHAUSTIVE_CHAR_CAP
    return n <= ITER_CAP


def square_multiset(carrier: Carrier, ms: Multiset) -> Multiset:
    """The convolution square S*S (total |S|^2), certified lam^2.

    This is derandomized squaring with the degenerate full-group auxiliary
    (mu = 0): every index pair contributes, and since S is symmetric the
    inverse-indexed half coincides with the direct half. Vector carriers use
    an FFT convolution; others multiply support pairs directly.
    """
    if isinstance(carrier, VectorCarrier) \
            and carrier.order <= EXHAUSTIVE_CHAR_CAP \
            and ms.total <= 1 << 26:
        pts = np.array([list(v) for v in ms.elems], dtype=np.int64)
        w = np.zeros(carrier.order, dtype=np.float64)
        idx = np.ravel_multi_index(pts.T, carrier.moduli)
        np.add.at(w, idx, np.array(ms.mults, dtype=np.float64))
        spec = np.fft.fftn(w.reshape(carrier.moduli))
        conv = np.fft.ifftn(spec * spec).real.ravel()
        counts = np.rint(conv).astype(np.int64)
        nz = np.flatnonzero(counts)
        coords = np.unravel_index(nz, carrier.moduli)
        pairs = [(tuple(int(c[i]) for c in coords), int(counts[j]))
                 for i, j in enumerate(nz)]
    else:
        mul = carrier.mul
        acc: dict = {}
        for x, wx in ms.pairs():
            for y, wy in ms.pairs():
                z = mul(x, y)
                acc[z] = acc.get(z, 0) + wx * wy
        pairs = acc.items()
    cert = ms.cert * ms.cert if ms.cert is not None else None
    return multiset(pairs, cert=cert)


def analytic_rounds(lam: float, mu: float, target: float = 0.25,
                    max_rounds: int = 10**4) -> int:
    """Number of x -> x^2 + mu steps to reach the target from lam."""
    x = lam
    rounds = 0
    while x > target:
        nxt = x * x + mu
        if nxt >= x:
            raise AmplificationError(
                f"recurrence stalls at {x:.6f} with mu={mu}")
        x = nxt
        rounds += 1
        if rounds > max_rounds:
            raise AmplificationError("round limit exceeded")
    return rounds


def _mu_request(lam: float, target: float) -> float:
    finishing = target - lam * lam
    if finishing > 0:
        return min(0.125, max(finishing / 2, target / 8))
    return min(0.125, target / 2)


def reduce_to_quarter(carrier: Carrier, u: Multiset, target: float = 0.25,
                      mode: str = "adaptive", compact_total: int = 512,
                      max_rounds: int = 64, trace: list | None = None
                      ) -> Multiset:
    """Squaring rounds until the certified bound is <= target.

    Adaptive mode (requires a verifiable carrier) compacts, squares with the
    degenerate full-group auxiliary (exact convolution, mu = 0) and
    re-measures lambda2 exactly after every round. Analytic mode keeps
    multisets materializable with small-degree auxiliaries from aux_family
    and propagates the lam^2 + mu bound only.
    """
    if u.cert is None:
        u = reverify(carrier, u)
        if u.cert is None:
            raise CertificationError("input multiset carries no certificate")
    if u.cert >= 1.0:
        raise AmplificationError(
            "cannot amplify: certified bound is 1 (disconnected or bipartite)")
    if mode == "adaptive" and not is_measurable(carrier):
        mode = "analytic"
    rounds = 0
    while True:
        if mode == "adaptive":
            u = compact(carrier, u, compact_total, target_cert=target)
        if u.cert is not None and u.cert <= target:
            return u
        if rounds >= max_rounds:
            raise AmplificationError(f"exceeded {max_rounds} squaring rounds")
        if mode == "adaptive":
            u = square_multiset(carrier, u)
            u = reverify(carrier, u)
            rounds += 1
            if trace is not None:
                trace.append({"op": "square", "round": rounds,
                              "total": u.total, "cert": u.cert,
                              "aux_degree": u.total, "aux_mu": 0.0})
            continue
        u = pad_to_total(carrier, u, _next_pow2(u.total))
        aux = aux_family(u.total, _mu_request(u.cert, target))
        u = derandomized_square(carrier, u, aux)
        rounds += 1
        if trace is not None:
            trace.append({"op": "derandomized-square", "round": rounds,
                          "total": u.total, "cert": u.cert,
                          "aux_degree": aux.degree, "aux_mu": aux.certified_mu})


# ---------------------------------------------------------------------------
# combining a normal subgroup expander with a quotient expander

def combine_union(group: Carrier, a: Multiset, b: Multiset,
                  verify: bool = True) -> Multiset:
    """Union multiset with the main-lemma bound, optionally re-measured."""
    if a.cert is None or b.cert is None:
        raise CertificationError("combine requires certified inputs")
    lam = max(a.cert, b.cert)
    bound = (1 + lam) * max(a.total, b.total) / (a.total + b.total)
    out = union(a, b, cert=bound)
    if verify:
        measured = measure_exact(group, out)
        if measured is not None:
            if measured > bound + 1e-9:
                raise CertificationError(
                    f"measured {measured} exceeds combine bound {bound}")
            out = out.with_cert(measured)
    return out


def combine(ctx: QuotientContext, a: Multiset, b: Multiset,
            verify: bool = True) -> Multiset:
    """The normal-subgroup/quotient combination on a permutation group.

    a expands N = <ctx.kernel>; b is a subset of G whose coset image expands
    G/N. Output is the union, certified on G.
    """
    if ctx.order == 1:
        return a
    if a.cert is None or b.cert is None:
        raise CertificationError("combine requires certified inputs")
    for e in a.elems:
        if not ctx.kernel.contains(e):
            raise ValueError("A-side element lies outside the normal subgroup")
    gens = list(ctx.kernel_gens.gens) + list(b.elems)
    if BSGS.build(GenSet(ctx.parent_gens.degree, tuple(gens))).order() \
            != ctx.parent.order():
        raise ValueError("B-side image fails to generate the quotient")
    group = PermCarrier(ctx.parent)
    return combine_union(group, a, b, verify=verify)


# ---------------------------------------------------------------------------
# folding a normal series

def fold_series(chain: SubgroupChain, quotient_sets: list[Multiset],
                target: float = 0.25, compact_total: int = 1024,
                trace: list | None = None) -> Multiset:
    """Fold per-quotient expanders into one for the whole group.

    chain is a normal series G_0 |> ... |> G_r = 1 (padded here to
    power-of-2 length by repeating the trivial tail) and quotient_sets[i]
    is certified <= target for G_i/G_{i+1} with representatives in G_i.
    Pairs are merged bottom-up per binary level: combine on G_k/G_m with
    N = G_l/G_m, then amplify back to the target.
    """
    groups = list(chain.groups)
    sets = list(quotient_sets)
    if len(sets) != len(groups) - 1:
        raise ValueError("need one quotient set per series step")
    for i, s in enumerate(sets):
        if s.cert is None or s.cert > target + 1e-9:
            raise CertificationError(
                f"quotient set {i} is not certified <= {target}")
    # every term must be normal in the top group
    top_gens = groups[0].nontrivial_gens()
    for i, sub in enumerate(groups[1:], start=1):
        nb = BSGS.build(sub)
        for x in sub.nontrivial_gens():
            for g in top_gens:
                if not nb.contains(x.conjugate(g)):
                    raise ValueError(
                        f"chain term {i} is not normal in the top group")
    r = max(1, len(sets))
    rr = _next_pow2(r)
    trivial = groups[-1]
    while len(sets) < rr:
        groups.append(trivial)
        sets.append(multiset([(Perm.identity(trivial.degree), 1)], cert=0.0))

    orders = [PermCarrier.of(g).order for g in groups]

    def merge(k: int, l: int, m: int, upper: Multiset,
              lower: Multiset) -> Multiset:
        if orders[l] == orders[m]:      # trivial N-part
            return upper
        if orders[k] == orders[l]:      # trivial quotient part
            return lower
        ctx = quotient_context(groups[k], groups[m])
        q = QuotientCarrier(ctx)
        # A expands G_l/G_m; B's image expands (G_k/G_m)/(G_l/G_m) = G_k/G_l
        a = symmetrize(q, q.image_multiset(lower, cert=lower.cert))
        b = symmetrize(q, q.image_multiset(upper, cert=upper.cert))
        a, b = balance(q, a, q, b)
        out = combine_union(q, a, b)
        out = reduce_to_quarter(q, out, target=target,
                                compact_total=compact_total, trace=trace)
        if trace is not None:
            trace.append({"op": "fold-merge", "span": (k, l, m),
                          "total": out.total, "cert": out.cert})
        return out

    level = 0
    while len(sets) > 1:
        step = 1 << level
        nxt = []
        for j in range(0, len(sets), 2):
            k = j * step
            l = (j + 1) * step
            m = min((j + 2) * step, len(groups) - 1)
            nxt.append(merge(k, l, m, sets[j], sets[j + 1]))
        sets = nxt
        level += 1
    return sets[0]


# ---------------------------------------------------------------------------
# the solvable pipeline

class SolvabilityError(ValueError):
    pass


def solvable_expander(g: GenSet, target: float = 0.25,
                      trace: list | None = None) -> Multiset:
    """Certified expanding multiset for a solvable permutation group.

    derived series -> per-quotient abelian expanders -> series fold. The
    result is re-verified by a dense eigensolve whenever the group order is
    within the dense cap.
    """
    from .abexp import abelian_quotient_expander
    from .series import derived_series
    chain = derived_series(g)
    if not chain.solvable:
        raise SolvabilityError(
            "group is not solvable (derived series stabilizes above the "
            "trivial group); use general_expander instead")
    if chain.orders[0] == 1:
        return multiset([(Perm.identity(g.degree), 1)], cert=0.0)
    sets = []
    for i in range(len(chain.groups) - 1):
        s = abelian_quotient_expander(chain.groups[i], chain.groups[i + 1],
                                      target=target, trace=trace)
        sets.append(s)
        if trace is not None:
            trace.append({"op": "derived-quotient", "index": i,
                          "total": s.total, "cert": s.cert})
    return fold_series(chain, sets, target=target, trace=trace)
