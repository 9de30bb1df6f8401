"""Topological-conjugacy machinery over Z: 0-1 set polynomials, the
truncated tail-sumset search, witness construction and verification.

The infinite sumset S = C_1 + C_2 + ... is compared degree by degree with
R + (C_r + C_{r+1} + ...) for candidate shifts r.  Both sides are final
below the smallest height not yet materialized (every later stage only
adds elements at or above it), so a mismatch below that safe degree is
final and a No verdict at finite depth is sound for the checked shifts.

R itself is never enumerated: the 0-1 power-series division determines it
degree by degree (or yields a contradiction), which replaces the
meet-in-the-middle enumeration with an exact deterministic computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .decide import _cyclic_alignment, Verdict, _no, _unknown, _yes
from .errors import (
    CardinalityBudgetExceeded,
    NotCommensurate,
    NotIndependent,
    NotPositive,
    OutOfRange,
    StandardnessUnverified,
)
from .params import DEFAULT_BUDGET, ParamSpec, heights, realize_stage


@dataclass(frozen=True)
class SetPolynomial:
    """P_C = sum of t^c over c in C, kept as the sorted exponent set."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        if any(e < 0 for e in self.exponents):
            raise ValueError("exponents must be non-negative")
        if any(b <= a for a, b in zip(self.exponents, self.exponents[1:])):
            raise ValueError("exponents must be strictly increasing")

    @classmethod
    def of(cls, items) -> "SetPolynomial":
        return cls(tuple(sorted(set(int(x) for x in items))))

    @property
    def degree(self) -> int:
        return self.exponents[-1] if self.exponents else -1


def poly_mul_checked(p: SetPolynomial, q: SetPolynomial) -> SetPolynomial:
    """Product of 0-1 polynomials, required to stay 0-1.

    The product is again 0-1 exactly when the exponent sets have
    independent differences, and then it represents the sumset.
    """
    counts: dict[int, int] = {}
    for a in p.exponents:
        for b in q.exponents:
            d = a + b
            counts[d] = counts.get(d, 0) + 1
            if counts[d] > 1:
                raise NotIndependent(d)
    return SetPolynomial(tuple(sorted(counts)))


@dataclass(frozen=True)
class IntervalF:
    """Two-sided interval support F = [lo, hi] with 0 inside."""

    lo: int
    hi: int

    def __post_init__(self):
        if not self.lo <= 0 <= self.hi:
            raise ValueError("interval support must contain 0")

    @property
    def width(self) -> int:
        return self.hi - self.lo

    def contains_set(self, xs) -> bool:
        return all(self.lo <= x <= self.hi for x in xs)


def plain_supports(spec: ParamSpec, depth: int) -> list[IntervalF]:
    """The one-sided supports [0, h_n - 1] of the measure-theoretic model."""
    hs = heights(spec, depth)
    return [IntervalF(0, h - 1) for h in hs]


def pad_interval_supports(spec: ParamSpec, depth: int) -> list[IntervalF]:
    """Auto-padded two-sided supports [-a_n, b_n] for stages 0..depth.

    b_n grows by max C_n per stage (the condition (II) floor); the
    disjointness cap (III) limits a_n + b_n to one less than the minimal
    gap of C_{n+1}.  The initial b_0 keeps only a third of that budget so
    the rest drips out as growth, one unit per stage, alternating between
    the negative side and forward b-room.  Specs whose towers pack
    tightly (h0 = 1 and no top spacers) have no budget at all; their
    supports stay one-sided and the standardness panel reports it.
    """
    spec.require_depth(depth)

    def gap(n):  # minimal consecutive difference of C_n
        C = realize_stage(spec, n).C
        return min(b - a for a, b in zip(C, C[1:]))

    budget0 = gap(1) - 1
    a, b = 0, min(spec.h0 - 1, budget0 // 3)
    out = [IntervalF(-a, b)]
    for n in range(1, depth + 1):
        b += realize_stage(spec, n).C[-1]
        if n < depth or spec.is_cyclic:
            slack = (gap(n + 1) - 1) - (a + b)
            if slack > 0:
                if n % 2 == 1:
                    a += 1
                else:
                    b += 1
        out.append(IntervalF(-a, b))
    return out


@dataclass(frozen=True)
class StandardnessPanel:
    """(1-3) inclusion status at depth for a panel of shifts."""

    depth: int
    holds: dict  # (g, n) -> least m or None
    failed: tuple  # (g, n) pairs with no m <= depth

    @property
    def ok(self) -> bool:
        return not self.failed


def interval_standardness(
    spec: ParamSpec,
    supports: Sequence[IntervalF],
    g_range: int,
    depth: int,
    n_max: Optional[int] = None,
) -> StandardnessPanel:
    """Check g + F_n + C_{n+1..m} inside F_m for some m <= depth.

    For interval supports the inclusion is pure interval arithmetic:
    the block spans [g + lo_n, g + hi_n + sum of max C_i].  The same
    spans govern the reflected sets C*, whose stage maxima coincide.
    """
    if len(supports) < depth + 1:
        raise OutOfRange("need supports for stages 0..depth")
    n_max = n_max if n_max is not None else max(1, depth - 2)
    maxes = [realize_stage(spec, n).C[-1] for n in range(1, depth + 1)]
    holds: dict = {}
    failed = []
    for g in range(-g_range, g_range + 1):
        for n in range(0, n_max + 1):
            found = None
            hi = supports[n].hi
            for m in range(n + 1, depth + 1):
                hi += maxes[m - 1]
                if g + supports[n].lo >= supports[m].lo and g + hi <= supports[m].hi:
                    found = m
                    break
            holds[(g, n)] = found
            if found is None:
                failed.append((g, n))
    return StandardnessPanel(depth=depth, holds=holds, failed=tuple(failed))


# ---------------------------------------------------------------------------
# Truncated tail sumsets and 0-1 series division


def _block_sumset(spec: ParamSpec, lo: int, hi: int, budget: int) -> list[int]:
    """C_lo + ... + C_hi as a sorted list ({0} when lo > hi)."""
    cur = [0]
    size = 1
    for n in range(lo, hi + 1):
        C = realize_stage(spec, n).C
        size *= len(C)
        if size > budget:
            raise CardinalityBudgetExceeded(size, budget)
        cur = [x + c for c in C for x in cur]
    cur.sort()
    return cur


def _tail_sumset(spec: ParamSpec, start: int, depth: int, budget: int) -> list[int]:
    """Sigma_{i >= start} C_i truncated at stage ``depth``; exact below h_depth."""
    return _block_sumset(spec, start, depth, budget)


def _divide_series(
    S: set[int], T: list[int], cap: int, safe: int
) -> tuple[Optional[list[int]], Optional[int]]:
    """Find R within [0, cap] with P_S = P_R * P_T below ``safe`` as 0-1 series.

    Returns (R, None) on success or (None, degree) at the first
    contradiction: a coefficient that is not 0-1, or a mismatch with S.
    The division is forced degree by degree, so no enumeration happens.
    """
    cov = bytearray(safe)  # coefficients of P_R * P_T so far
    R: list[int] = []
    for d in range(safe):
        have = cov[d]
        want = 1 if d in S else 0
        if have == want:
            continue
        if have > want or d > cap:
            return None, d
        R.append(d)
        for t in T:
            if d + t >= safe:
                break
            cov[d + t] += 1
            if cov[d + t] > 1:
                # a 0-1 series admits no coefficient 2: forced contradiction
                return None, d + t
    # final sweep: every covered degree must agree with S
    for d in range(safe):
        if cov[d] != (1 if d in S else 0):
            return None, d
    return R, None


@dataclass(frozen=True)
class TopoWitness:
    """Index ladder and block sets of the Theorem-2.3 style conjugacy data."""

    l: tuple[int, ...]  # l_0 = 0 < l_1 < l_2 < ...
    lp: tuple[int, ...]  # l'_1 < l'_2 < ... interleaved: l_0 < l'_1 < l_1 < ...
    A: tuple[tuple[int, ...], ...]
    B: tuple[tuple[int, ...], ...]

    def to_json(self) -> dict:
        return {
            "l": list(self.l),
            "lp": list(self.lp),
            "A": [list(a) for a in self.A],
            "B": [list(b) for b in self.B],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TopoWitness":
        return cls(
            tuple(data["l"]),
            tuple(data["lp"]),
            tuple(tuple(a) for a in data["A"]),
            tuple(tuple(b) for b in data["B"]),
        )


def _min_gap(xs: Sequence[int]) -> Optional[int]:
    return min((b - a for a, b in zip(xs, xs[1:])), default=None)


def verify_witness(
    spec_a: ParamSpec,
    spec_b: ParamSpec,
    w: TopoWitness,
    supports_a: Optional[Sequence[IntervalF]] = None,
    supports_b: Optional[Sequence[IntervalF]] = None,
    budget: int = DEFAULT_BUDGET,
) -> bool:
    """Check the five condition families of the conjugacy display.

    Additively: A_n + B_n equals the C-block of spec_a between l_{n-1}
    and l_n; B_n + A_{n+1} equals the C'-block between l'_n and l'_{n+1};
    the interval supports shift into each other; and neither B_n nor
    A_{n+1} has two elements closer than the width of the opposite
    support (the freeness condition).
    """
    n_b = len(w.B)
    if len(w.A) not in (n_b, n_b + 1) or len(w.lp) != len(w.A) or len(w.l) != n_b + 1:
        return False
    ladder = [w.l[0]]
    for i in range(n_b):
        ladder.extend([w.lp[i], w.l[i + 1]])
    if len(w.A) > n_b:
        ladder.append(w.lp[-1])
    if w.l[0] != 0 or any(b <= a for a, b in zip(ladder, ladder[1:])):
        return False
    depth = max(w.l[-1], w.lp[-1])
    sup_a = list(supports_a) if supports_a is not None else plain_supports(spec_a, depth)
    sup_b = list(supports_b) if supports_b is not None else plain_supports(spec_b, depth)
    for n in range(1, n_b + 1):
        A_n, B_n = w.A[n - 1], w.B[n - 1]
        ln_prev, ln, lpn = w.l[n - 1], w.l[n], w.lp[n - 1]
        block = _block_sumset(spec_a, ln_prev + 1, ln, budget)
        if sorted(a + b for a in A_n for b in B_n) != block:
            return False
        if not sup_a[ln].contains_set(B_n) or any(x < 0 for x in B_n):
            return False
        if sup_b[lpn].lo + min(B_n) < sup_a[ln].lo:
            return False
        if sup_b[lpn].hi + max(B_n) > sup_a[ln].hi:
            return False
        gap = _min_gap(sorted(B_n))
        if gap is not None and gap <= sup_b[lpn].width:
            return False
        if n < len(w.A):
            A_next, lp_next = w.A[n], w.lp[n]
            block_b = _block_sumset(spec_b, lpn + 1, lp_next, budget)
            if sorted(b + a for b in B_n for a in A_next) != block_b:
                return False
            if not sup_b[lp_next].contains_set(A_next) or any(x < 0 for x in A_next):
                return False
            if sup_a[ln].lo + min(A_next) < sup_b[lp_next].lo:
                return False
            if sup_a[ln].hi + max(A_next) > sup_b[lp_next].hi:
                return False
            gap = _min_gap(sorted(A_next))
            if gap is not None and gap <= sup_a[ln].width:
                return False
    return True


def identity_witness(
    spec: ParamSpec, pairs: Sequence[tuple[int, int]], budget: int = DEFAULT_BUDGET
) -> TopoWitness:
    """Witness of the identity conjugacy: A_n and B_n are plain C-blocks."""
    l = [0]
    lp = []
    A = []
    B = []
    for l_prime, l_full in pairs:
        A.append(tuple(_block_sumset(spec, l[-1] + 1, l_prime, budget)))
        B.append(tuple(_block_sumset(spec, l_prime + 1, l_full, budget)))
        lp.append(l_prime)
        l.append(l_full)
    return TopoWitness(tuple(l), tuple(lp), tuple(A), tuple(B))


def _balanced_depths(
    spec_a: ParamSpec, spec_b: ParamSpec, depth: int, budget: int
) -> tuple[int, int]:
    """Per-spec depths with comparable heights.

    Starting from the requested stage count, the side whose tower is
    shorter keeps materializing stages (within its prefix and the sumset
    budget) until the heights balance; mismatched growth rates otherwise
    leave one tail truncated far below the other and block the witness
    ladder.
    """

    def clamp(spec, d):
        return d if spec.is_cyclic else min(d, spec.prefix_len)

    da, db = clamp(spec_a, depth), clamp(spec_b, depth)
    prod_a = 1
    for n in range(1, da + 1):
        prod_a *= spec_a.stage_map(n).r
    prod_b = 1
    for n in range(1, db + 1):
        prod_b *= spec_b.stage_map(n).r
    ha = heights(spec_a, da)[da]
    hb = heights(spec_b, db)[db]
    while ha != hb:
        if ha < hb:
            if (not spec_a.is_cyclic and da >= spec_a.prefix_len) or prod_a * spec_a.stage_map(da + 1).r > budget:
                break
            da += 1
            st = spec_a.stage_map(da)
            prod_a *= st.r
            ha = st.r * ha + st.total
        else:
            if (not spec_b.is_cyclic and db >= spec_b.prefix_len) or prod_b * spec_b.stage_map(db + 1).r > budget:
                break
            db += 1
            st = spec_b.stage_map(db)
            prod_b *= st.r
            hb = st.r * hb + st.total
    return da, db


def _build_witness(
    spec_a, spec_b, r: int, R: list[int], depths: tuple[int, int], budget: int, sup_a, sup_b
) -> Optional[TopoWitness]:
    """Unroll the (r, R) identity into alternating block data.

    B_n and A_{n+1} are forced: each is the strictly-below-the-next-gap
    slice of the corresponding tail sumset.  Every candidate cut is
    checked against the interval conditions before being accepted.
    """
    depth_a, depth_b = depths
    h_a = heights(spec_a, depth_a)
    h_b = heights(spec_b, depth_b)
    safe = min(h_a[depth_a], h_b[depth_b])

    def tail_a(j):
        return _tail_sumset(spec_a, j + 1, depth_a, budget)

    def tail_b(j):
        return _tail_sumset(spec_b, j + 1, depth_b, budget)

    # Tail convention: the search identity is S_A = R + Sigma_{i>=r} C'_i,
    # i.e. the paper's shift is r - 1.
    if r - 1 >= 1:
        lp1, A1 = r - 1, sorted(R)
    else:
        C1 = realize_stage(spec_b, 1).C
        lp1, A1 = 1, sorted(x + c for x in R for c in C1)
    while lp1 < depth_b - 1 and not (
        sup_b[lp1].contains_set(A1) and all(x >= 0 for x in A1)
    ):
        lp1 += 1
        C_next = realize_stage(spec_b, lp1).C
        A1 = sorted(x + c for x in A1 for c in C_next)
    if not sup_b[lp1].contains_set(A1):
        return None
    l = [0]
    lp = [lp1]
    A = [tuple(A1)]
    B = []
    for _round in range(2):
        # B_n from the b-tail at lp[-1], cut along spec_a stages
        tb = tail_b(lp[-1])
        got = None
        for ln in range(lp[-1] + 1, depth_a):
            ta = tail_a(ln)
            if len(ta) < 2:
                break
            minpos = ta[1]
            part = [x for x in tb if x < minpos]
            recombined = sorted(x + y for x in part for y in ta if x + y < safe)
            if recombined != [x for x in tb if x < safe]:
                continue
            if not sup_a[ln].contains_set(part):
                continue
            if sup_b[lp[-1]].lo + part[0] < sup_a[ln].lo:
                continue
            if sup_b[lp[-1]].hi + part[-1] > sup_a[ln].hi:
                continue
            gap = _min_gap(part)
            if gap is not None and gap <= sup_b[lp[-1]].width:
                continue
            got = (ln, part)
            break
        if got is None:
            return None
        l.append(got[0])
        B.append(tuple(got[1]))
        # A_{n+1} from the a-tail at l[-1], cut along spec_b stages
        ta = tail_a(l[-1])
        got = None
        for lpn in range(l[-1] + 1, depth_b):
            tbn = tail_b(lpn)
            if len(tbn) < 2:
                break
            minpos = tbn[1]
            part = [x for x in ta if x < minpos]
            recombined = sorted(x + y for x in part for y in tbn if x + y < safe)
            if recombined != [x for x in ta if x < safe]:
                continue
            if not sup_b[lpn].contains_set(part):
                continue
            if sup_a[l[-1]].lo + part[0] < sup_b[lpn].lo:
                continue
            if sup_a[l[-1]].hi + part[-1] > sup_b[lpn].hi:
                continue
            gap = _min_gap(part)
            if gap is not None and gap <= sup_a[l[-1]].width:
                continue
            got = (lpn, part)
            break
        if got is None:
            break
        lp.append(got[0])
        A.append(tuple(got[1]))
    if not B:
        return None
    return TopoWitness(tuple(l), tuple(lp), tuple(A), tuple(B))


def topo_iso_search(
    spec_a: ParamSpec,
    spec_b: ParamSpec,
    horizon: int = 8,
    depth: int = 10,
    budget: int = DEFAULT_BUDGET,
    supports_a: Optional[Sequence[IntervalF]] = None,
    supports_b: Optional[Sequence[IntervalF]] = None,
) -> Verdict:
    """Search for (r, R) with Sigma_{i>0} C_i = R + Sigma_{i>=r} C'_i.

    For each shift r up to the horizon, R is forced by 0-1 series
    division with exponents capped by the positive part of F'_{r-1}; the
    sides are compared below the safe degree min(h_depth, h'_depth).  Yes
    verdicts carry the witness ladder; a No records, per shift, the final
    mismatch degree.
    """
    for sp in (spec_a, spec_b):
        if realize_stage(sp, 1).C[0] < 0:
            raise NotPositive("C-sets must lie in the non-negative integers")
    depth_a, depth_b = _balanced_depths(spec_a, spec_b, depth, budget)
    h_a = heights(spec_a, depth_a)
    h_b = heights(spec_b, depth_b)
    sup_a = list(supports_a) if supports_a is not None else plain_supports(spec_a, depth_a)
    sup_b = list(supports_b) if supports_b is not None else plain_supports(spec_b, depth_b)
    safe = min(h_a[depth_a], h_b[depth_b])
    S_list = _tail_sumset(spec_a, 1, depth_a, budget)
    S = set(x for x in S_list if x < safe)
    mismatches: dict[int, int] = {}
    for r in range(1, horizon + 1):
        if r > depth_b:
            break
        T = [x for x in _tail_sumset(spec_b, r, depth_b, budget) if x < safe]
        cap = min(sup_b[r - 1].hi, safe - 1)
        R, bad_degree = _divide_series(S, T, cap, safe)
        if R is None:
            mismatches[r] = bad_degree
            continue
        witness = _build_witness(
            spec_a, spec_b, r, R, (depth_a, depth_b), budget, sup_a, sup_b
        )
        if witness is not None and verify_witness(
            spec_a, spec_b, witness, sup_a, sup_b, budget
        ):
            return _yes(
                r=r,
                R=sorted(R),
                safe_degree=safe,
                witness=witness.to_json(),
            )
        return _unknown(
            reason="candidate (r, R) verified below safe degree but witness "
            "construction did not complete",
            r=r,
            R=sorted(R),
            safe_degree=safe,
        )
    return _no(mismatch_degrees=mismatches, safe_degree=safe, horizon=horizon)


def commensurate_topo_iso(spec_a: ParamSpec, spec_b: ParamSpec) -> Verdict:
    """Topological isomorphism for commensurate specs: C_n = C'_n eventually.

    With heights aligned under a shift, the C-sets agree from some stage M
    onward iff the full spacer maps agree cyclically from there.
    """
    for sp in (spec_a, spec_b):
        if realize_stage(sp, 1).C[0] < 0:
            raise NotPositive("C-sets must lie in the non-negative integers")
    if not (spec_a.is_cyclic and spec_b.is_cyclic):
        return _unknown(reason="aperiodic input")
    aligned = _cyclic_alignment(spec_a, spec_b)
    if aligned is None:
        raise NotCommensurate("no shift makes the height sequences eventually equal")
    k, start = aligned
    L = math.lcm(spec_a.cycle_len, spec_b.cycle_len)
    for n in range(start, start + L):
        if spec_a.stage_map(n).sigma != spec_b.stage_map(n + k).sigma:
            return _no(shift=k, first_mismatch=n)
    return _yes(shift=k, M=start - 1)


def topo_inverse_iso(
    spec: ParamSpec,
    depth: int = 8,
    supports: Optional[Sequence[IntervalF]] = None,
    g_range: int = 1,
) -> Verdict:
    """Inverse conjugacy test over interval supports.

    Requires the (1-3) panel to pass at depth for the given supports (the
    reflected sequence C* has the same stage maxima, so one panel covers
    both).  The verdict itself is the eventual reflection-fixedness of
    the C-sets, i.e. the palindrome test on every cycle stage.
    """
    if not spec.is_cyclic:
        return _unknown(reason="aperiodic spec", horizon=spec.prefix_len)
    sup = list(supports) if supports is not None else pad_interval_supports(spec, depth)
    panel = interval_standardness(spec, sup, g_range, depth)
    if not panel.ok:
        raise StandardnessUnverified(
            f"(1-3) fails at depth {depth} for shifts/stages {list(panel.failed)[:4]}"
        )
    q = spec.prefix_len
    for i, st in enumerate(spec.cycle):
        if any(st.value(j) != st.value(st.r - j) for j in range(1, st.r)):
            cf = realize_stage(spec, q + i + 1)
            return _no(
                stage=q + i + 1,
                C=list(cf.C),
                C_star=sorted(cf.C[-1] - c for c in cf.C),
            )
    return _yes(symmetric_cycle_stages=spec.cycle_len)
