"""Epsilon-bias spaces for Z_d^n.

Z_d^n is split by the prime factorization of d into prod_j Z_{p_j^{e_j}}^n;
each level of the prime-power series gets a final-construction set, the
levels are folded, and the per-prime coordinates are recombined to digits in
[0, d) by CRT. For eps < 1/4 the space is amplified by derandomized
squaring on the abelian Cayley graph, certified by character sums.
"""

from __future__ import annotations

from dataclasses import dataclass

from .abexp import _compact_r_points, _final_r_cached, factorize
from .carriers import VectorCarrier
from .combine import (balance, combine_union, reduce_to_quarter, reverify,
                      symmetrize, _next_pow2)
from .multiset import Multiset, multiset
from .spectra import EXHAUSTIVE_CHAR_CAP, MethodCapacityError, bias_exhaustive

D_CAP = 10**6


@dataclass(frozen=True)
class BiasSpace:
    d: int
    n: int
    points: Multiset            # over (d,)*n
    certified_eps: float
    method: str

    @property
    def size(self) -> int:
        return self.points.total

    def sidecar(self) -> dict:
        return {"d": self.d, "n": self.n, "eps": self.certified_eps,
                "size": self.size, "certified_eps": self.certified_eps,
                "method": self.method}


def _kfold_carrier(fac, n: int, lo: int, hi: int) -> VectorCarrier:
    moduli = []
    for p, e in fac:
        w = max(0, min(hi, e) - lo)
        if w:
            moduli.extend([p**w] * n)
    return VectorCarrier(tuple(moduli)) if moduli else VectorCarrier((1,))


def _kfold_embed(vec, fac, n, lo, hi, src_lo, src_hi):
    """Embed a [src_lo, src_hi) window vector into the [lo, hi) window.

    Exponent digits [src_lo, src_hi) sit at p-adic offset src_lo - lo inside
    the wider window's residues, so each coordinate is scaled by
    p^(src_lo - lo).
    """
    out = []
    pos = 0
    for p, e in fac:
        wd = max(0, min(hi, e) - lo)
        ws = max(0, min(src_hi, e) - src_lo)
        shift = p ** (src_lo - lo)
        if wd:
            for i in range(n):
                v = vec[pos + i] if ws else 0
                out.append((v * shift) % (p**wd))
        if ws:
            pos += n
    return tuple(out)


def zdn_bias_space(d: int, n: int, eps: float, c: int = 8,
                   base_eps: float = 0.125,
                   trace: list | None = None) -> BiasSpace:
    """Certified eps-bias space for Z_d^n."""
    if d < 2 or n < 1 or not (0 < eps < 1):
        raise ValueError("need d >= 2, n >= 1, 0 < eps < 1")
    if d > D_CAP:
        raise ValueError(f"d is limited to {D_CAP} (unary-input regime)")
    fac = factorize(d)
    primes = tuple(p for p, _ in fac)
    depth = max(e for _, e in fac)

    def level_set(s: int) -> Multiset:
        live = tuple(p for p, e in fac if e > s)
        if depth == 1:
            # nothing to fold or push forward: keep the construction's exact
            # c*n*|psi(S)| output so sizes stay comparable across n
            return _final_r_cached(n, live, c, base_eps).points
        return _compact_r_points(n, live, c, base_eps)

    def merge(lo: int, mid: int, hi: int, upper: Multiset,
              lower: Multiset) -> Multiset:
        w_low = sum(max(0, min(hi, e) - mid) for _, e in fac)
        w_up = sum(max(0, min(mid, e) - lo) for _, e in fac)
        if w_low == 0:
            return upper
        if w_up == 0:
            return lower
        q = _kfold_carrier(fac, n, lo, hi)
        # the digit lift of the B side is not inverse-closed in the wider
        # window (only its image mod the A part is), so symmetrize both
        a = symmetrize(q, lower.map_elems(
            lambda v: _kfold_embed(v, fac, n, lo, hi, mid, hi),
            cert=lower.cert))
        b = symmetrize(q, upper.map_elems(
            lambda v: _kfold_embed(v, fac, n, lo, hi, lo, mid),
            cert=upper.cert))
        a, b = balance(q, a, q, b)
        out = combine_union(q, a, b)
        out = reduce_to_quarter(q, out, target=0.25, trace=trace)
        if trace is not None:
            trace.append({"op": "kfold-merge", "window": (lo, mid, hi),
                          "total": out.total, "cert": out.cert})
        return out

    sets = [level_set(s) for s in range(depth)]
    spans = [(s, s + 1) for s in range(depth)]
    while len(sets) < _next_pow2(len(sets)):
        sets.append(multiset([((0,), 1)], cert=0.0))
        spans.append((depth, depth))
    while len(sets) > 1:
        nxt_sets, nxt_spans = [], []
        for j in range(0, len(sets), 2):
            lo, mid = spans[j]
            _, hi = spans[j + 1]
            nxt_sets.append(merge(lo, mid, hi, sets[j], sets[j + 1]))
            nxt_spans.append((lo, hi))
        sets, spans = nxt_sets, nxt_spans
    out = sets[0]

    # recombine per-prime residue blocks into digits of Z_d by CRT
    carrier = VectorCarrier((d,) * n)

    def crt_vec(v) -> tuple[int, ...]:
        digits = []
        for i in range(n):
            x = 0
            for jb, (p, e) in enumerate(fac):
                q = p**e
                r = v[jb * n + i] % q
                m = d // q
                x = (x + r * m * pow(m, -1, q)) % d
            digits.append(x)
        return tuple(digits)

    pts = out.map_elems(crt_vec, cert=out.cert)
    pts = reverify(carrier, pts)
    method = "character-sum" if carrier.order <= EXHAUSTIVE_CHAR_CAP \
        else "analytic"
    if pts.cert is None:
        raise MethodCapacityError(
            "pipeline produced no certificate (group beyond analytic path)")

    if pts.cert > eps:
        if carrier.order > EXHAUSTIVE_CHAR_CAP:
            raise MethodCapacityError(
                f"amplification to eps={eps} needs exhaustive verification; "
                f"d^n = {carrier.order} exceeds {EXHAUSTIVE_CHAR_CAP}")
        pts = reduce_to_quarter(carrier, pts, target=eps, trace=trace)
    if pts.cert is None or pts.cert > eps + 1e-9:
        raise MethodCapacityError(
            f"could not certify eps={eps}: reached {pts.cert}")
    return BiasSpace(d, n, pts, float(pts.cert), method)


def verify_bias(space: BiasSpace, sampled: bool = False) -> float:
    """Exact maximal nontrivial character sum of the space."""
    carrier = VectorCarrier((space.d,) * space.n)
    if carrier.order > EXHAUSTIVE_CHAR_CAP:
        if not sampled:
            raise MethodCapacityError(
                f"d^n = {carrier.order} exceeds exhaustive cap; pass "
                f"sampled=True for a non-certifying estimate")
        from .spectra import bias_sampled
        return bias_sampled(carrier, space.points)
    return bias_exhaustive(carrier, space.points)


# ---------------------------------------------------------------------------
# file format

def format_bias_space(space: BiasSpace) -> str:
    lines = []
    for v, m in space.points.pairs():
        line = ",".join(str(c) for c in v)
        lines.extend([line] * m)
    return "\n".join(lines) + "\n"


def parse_bias_space(text: str, d: int, n: int) -> Multiset:
    pairs = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        vec = tuple(int(c) for c in ln.split(","))
        if len(vec) != n or any(not 0 <= c < d for c in vec):
            raise ValueError(f"bad point {ln!r}")
        pairs.append((vec, 1))
    return multiset(pairs)
