"""Certified decision procedures for eventually-periodic bounded parameters.

Every verdict is three-valued.  Yes/No answers carry machine-checkable
certificates; Unknown carries the horizon that was exhausted.  Certified
answers need a cycle: a finite prefix can never witness an "eventually"
statement, so aperiodic specs get Unknown from the cycle-level procedures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    CardinalityBudgetExceeded,
    NotCommensurate,
    OutOfRange,
    PreconditionRigid,
)
from .params import (
    DEFAULT_BUDGET,
    ParamSpec,
    SpacerMap,
    heights,
    integral_values,
    realize_stage,
)
from .spacers import diamond_all

YES = "yes"
NO = "no"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    value: str
    certificate: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value not in (YES, NO, UNKNOWN):
            raise ValueError(f"bad verdict value {self.value!r}")

    def __bool__(self):
        raise TypeError("Verdict is three-valued; test .value explicitly")

    def to_json(self) -> dict:
        return {"value": self.value, "certificate": self.certificate}


def _yes(**cert) -> Verdict:
    return Verdict(YES, cert)


def _no(**cert) -> Verdict:
    return Verdict(NO, cert)


def _unknown(**cert) -> Verdict:
    return Verdict(UNKNOWN, cert)


# ---------------------------------------------------------------------------
# Telescoping


def telescope(spec: ParamSpec, k) -> ParamSpec:
    """Collapse consecutive stages: output stage j is the diamond of input
    stages k_{j-1}+1 .. k_j (k_0 = 0).

    ``k`` is either a strictly increasing list of stage indices or a fixed
    integer stride.  A stride on a cyclic spec yields a cyclic spec again
    (group contents repeat with period lcm(cycle length, stride)); a list
    always yields a finite-prefix spec.
    """
    if isinstance(k, int):
        p = k
        if p < 1:
            raise OutOfRange("stride must be >= 1")
        if spec.is_cyclic:
            q, c = spec.prefix_len, spec.cycle_len
            g0 = -(-q // p) + 1  # first group lying entirely in the cycle region
            L = math.lcm(c, p) // p
            prefix = [
                diamond_all(spec.stage_maps((g - 1) * p + p)[(g - 1) * p :])
                for g in range(1, g0)
            ]
            cycle = []
            for g in range(g0, g0 + L):
                stages = [spec.stage_map(n) for n in range((g - 1) * p + 1, g * p + 1)]
                cycle.append(diamond_all(stages))
            return ParamSpec(tuple(prefix), tuple(cycle), spec.h0)
        q = spec.prefix_len
        if q < p:
            raise OutOfRange(f"stride {p} exceeds prefix length {q}")
        k = [j * p for j in range(1, q // p + 1)]
    ks = list(k)
    if not ks or any(b <= a for a, b in zip([0] + ks, ks)):
        raise OutOfRange("k must be strictly increasing and positive")
    spec.require_depth(ks[-1])
    stages = []
    lo = 1
    for hi in ks:
        stages.append(diamond_all([spec.stage_map(n) for n in range(lo, hi + 1)]))
        lo = hi + 1
    return ParamSpec(tuple(stages), None, spec.h0)


def growing_telescope(spec: ParamSpec, stages: int) -> ParamSpec:
    """Telescoping with stride n at output stage n (k_n = n(n+1)/2).

    This is the canonical unrolling used before the expansive transform:
    cut counts grow like r^n, so sum(1/r_n) converges.
    """
    return telescope(spec, [n * (n + 1) // 2 for n in range(1, stages + 1)])


# ---------------------------------------------------------------------------
# Boundedness


def is_bounded(spec: ParamSpec) -> Verdict:
    """Bound R on cut counts and K on spacer values.

    For interval towers the containment form of boundedness is equivalent
    to a uniform bound on the spacer values, so a cyclic spec is always
    bounded, with R and K read off the finitely many distinct stages.  A
    cycle-less spec only gets an observation over its prefix.
    """
    all_stages = list(spec.prefix) + (list(spec.cycle) if spec.cycle else [])
    R = max(st.r for st in all_stages) if all_stages else 1
    K = max((max(st.sigma) for st in all_stages), default=0)
    if spec.is_cyclic:
        return _yes(R=R, K=K)
    q = spec.prefix_len
    per_stage = [max(st.sigma, default=0) for st in spec.prefix]
    per_r = [st.r for st in spec.prefix]
    growing = False
    for seq in (per_stage, per_r):
        if q >= 2 and seq[-1] > max(seq[:-1]) and seq[-2] > max(seq[:-2], default=-1):
            growing = True  # two consecutive records at the horizon
    cert = {"R": R, "K": K, "horizon": q, "note": "prefix-only observation"}
    return _no(**cert) if growing else _yes(**cert)


def spacer_bound(spec: ParamSpec) -> int:
    """K = sup over stages of the largest spacer value."""
    all_stages = list(spec.prefix) + (list(spec.cycle) if spec.cycle else [])
    return max((max(st.sigma) for st in all_stages), default=0)


# ---------------------------------------------------------------------------
# Rigidity: arithmetic windows
#
# Derivation of the window predicate.  Elements of C_n + ... + C_m have the
# unique digit expansion sum_j (i_j * h_{j-1} + s_j(i_j)); sorting is
# lexicographic in the digits because each stage's gap h_{j-1} exceeds the
# total span of all lower stages (conditions (II)+(III)).  Consecutive
# differences are h_{n-1} + sigma_n(i) for a lowest-digit step, and
# h_{n-1} + sigma_n(r_n) + ... + sigma_{k-1}(r_{k-1}) + sigma_k(i) when the
# step carries up to stage k.  The sumset is an arithmetic progression iff
# all these agree, i.e. iff every stage j in the window has constant
# interior c_j and the carry recurrence c_{j+1} = c_j - sigma_j(r_j) holds
# (c_{j+1} >= 0 is then automatic).  Summing the recurrence around a cycle
# shows a cyclic spec admits arbitrarily long windows iff every cycle stage
# is interior-constant with one common constant and zero top spacer.


def _interior_constant(st: SpacerMap) -> Optional[int]:
    ints = st.interior
    return ints[0] if all(v == ints[0] for v in ints) else None


def arithmetic_window(spec: ParamSpec, n: int, m: int) -> bool:
    """True iff C_n + ... + C_m is an arithmetic progression (recurrence form)."""
    if not 1 <= n <= m:
        raise OutOfRange("need 1 <= n <= m")
    spec.require_depth(m)
    expected: Optional[int] = None
    for j in range(n, m + 1):
        st = spec.stage_map(j)
        c = _interior_constant(st)
        if c is None:
            return False
        if expected is not None and c != expected:
            return False
        expected = c - st.top
        if j < m and expected < 0:
            return False
    return True


def arithmetic_window_oracle(
    spec: ParamSpec, n: int, m: int, budget: int = DEFAULT_BUDGET
) -> bool:
    """Set-level check of the same predicate, independent of the recurrence.

    Builds the sumset stage by stage.  A proper prefix of the window is a
    prefix slice of the full sumset (everything below the next stage's
    first positive element), and a prefix slice of an AP is an AP, so the
    scan may stop at the first non-AP partial sumset.  While the partial
    sumset stays an AP it is kept compressed as (difference, count); an
    explicit list is only used below the budget.
    """
    if not 1 <= n <= m:
        raise OutOfRange("need 1 <= n <= m")
    spec.require_depth(m)
    explicit: Optional[list[int]] = [0]
    ap: Optional[tuple[int, int]] = None  # (difference, count), start 0
    for j in range(n, m + 1):
        C = realize_stage(spec, j).C
        if explicit is not None and len(explicit) * len(C) <= budget:
            explicit = sorted(x + c for c in C for x in explicit)
            diffs = {b - a for a, b in zip(explicit, explicit[1:])}
            if len(diffs) > 1:
                return False
            if j < m:
                ap = (diffs.pop(), len(explicit)) if diffs else (0, 1)
        else:
            if explicit is not None:  # compress before growing past the budget
                if ap is None:
                    raise CardinalityBudgetExceeded(len(explicit) * len(C), budget)
                explicit = None
            d, count = ap
            span = (count - 1) * d
            # blocks c + {0, d, ..., span} chain into one AP iff each gap is d
            if any(b - (a + span) != d for a, b in zip(C, C[1:])):
                return False
            ap = (d, count * len(C))
    return True


def _rigid_cycle_profile(spec: ParamSpec):
    """(common interior constant, first violating cycle stage) for cyclic specs."""
    q = spec.prefix_len
    common: Optional[int] = None
    for idx, st in enumerate(spec.cycle):
        c = _interior_constant(st)
        if c is None or st.top != 0 or (common is not None and c != common):
            return None, q + idx + 1
        common = c
    return common, None


def longest_arithmetic_window(spec: ParamSpec, cap: int) -> int:
    """Length of the longest arithmetic window among stages 1..cap."""
    best = 0
    for start in range(1, cap + 1):
        expected = None
        length = 0
        for j in range(start, cap + 1):
            st = spec.stage_map(j)
            c = _interior_constant(st)
            if c is None or (expected is not None and c != expected):
                break
            length += 1
            best = max(best, length)
            expected = c - st.top
            if expected < 0:
                break  # the window up to j is valid but cannot extend
    return best


def is_rigid(spec: ParamSpec) -> Verdict:
    """Rigidity criterion: arbitrarily long arithmetic windows exist.

    For a cyclic spec this holds iff every cycle stage has constant
    interior, the constants agree, and every cycle top spacer vanishes
    (see the derivation above arithmetic_window).  A No certificate
    carries a proved bound on window lengths: a window longer than
    prefix + (K+2)*cycle contains K+1 full cycle periods, across which
    the carry recurrence would push the interior constant below zero
    unless the cycle satisfies the Yes condition.
    """
    if not spec.is_cyclic:
        q = spec.prefix_len
        return _unknown(
            reason="aperiodic spec: no finite horizon certifies rigidity",
            horizon=q,
            longest_window=longest_arithmetic_window(spec, q) if q else 0,
        )
    common, bad_stage = _rigid_cycle_profile(spec)
    if bad_stage is None:
        return _yes(interior_constant=common)
    K = spacer_bound(spec)
    bound = spec.prefix_len + (K + 2) * spec.cycle_len
    return _no(
        violating_stage=bad_stage,
        window_bound=bound,
        longest_window=longest_arithmetic_window(spec, bound + 2 * spec.cycle_len),
    )


# ---------------------------------------------------------------------------
# Total ergodicity and ergodicity of powers
#
# The divisibility criterion asks whether some d > 1 divides every element
# of C_n for all large n.  Write u_n = h_n + s_{n+1}(1), the second-lowest
# element of C_{n+1}.  Element i of C_{n+1} is i*u_n + (s_{n+1}(i) -
# i*s_{n+1}(1)), so d divides all of C_{n+1} iff d | u_n and d divides the
# per-stage constraint integers s(i) - i*s(1), 2 <= i < r.  The u's obey
# u_{n+1} = r_{n+1} * u_n + w_{n+1} with the carry constraint
# w_{n+1} = sum(sigma_{n+1}) - r_{n+1}*s_{n+1}(1) + s_{n+2}(1), so d also
# has to divide every w along the cycle.  Hence a divisor d > 1 exists iff
# some prime p divides every cycle constraint and, following u mod p around
# the cycle, u eventually vanishes: p | u_q at the cycle entry, or p kills
# u via p | r_j at some cycle stage.


def _cycle_constraints(spec: ParamSpec) -> tuple[list[int], int]:
    """Constraint integers over one full cycle, and u_q at the cycle entry."""
    q, c = spec.prefix_len, spec.cycle_len
    constraints: list[int] = []
    for j in range(q + 1, q + c + 1):
        st = spec.stage_map(j)
        s = integral_values(st)
        constraints.extend(s[i] - i * s[1] for i in range(2, st.r))
        s_next = integral_values(spec.stage_map(j + 1))
        constraints.append(st.total - st.r * s[1] + s_next[1])
    h_q = heights(spec, q)[q]
    u_q = h_q + integral_values(spec.stage_map(q + 1))[1]
    return constraints, u_q


def _prime_factors(n: int) -> list[int]:
    out = []
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _prime_is_blocking(spec: ParamSpec, p: int) -> bool:
    """True iff p divides every element of C_n for all large n."""
    constraints, u_q = _cycle_constraints(spec)
    if any(v % p != 0 for v in constraints):
        return False
    if u_q % p == 0:
        return True
    return any(st.r % p == 0 for st in spec.cycle)


def divisibility_scan(spec: ParamSpec, d: int, depth: int = 30):
    """Brute-force oracle: divisibility of realized C_n by d for n <= depth.

    Returns (last, certified): ``last`` is the largest n <= depth whose C_n
    has an element not divisible by d (None if all stages are fully
    divisible... or 0 when none observed).  ``certified`` is True when the
    trailing all-divisible stretch closes a loop in the state (stage phase,
    h mod d), which proves divisibility persists forever.
    """
    spec.require_depth(depth)
    last_nondiv = 0
    h = spec.h0
    states = {}
    certified = False
    q, c = spec.prefix_len, spec.cycle_len
    for n in range(1, depth + 1):
        st = spec.stage_map(n)
        s = integral_values(st)
        if any((i * h + s[i]) % d != 0 for i in range(st.r)):
            last_nondiv = n
            states.clear()
        elif spec.is_cyclic and n > q:
            key = ((n - q - 1) % c, h % d)
            if key in states:
                certified = True
            states[key] = n
        h = st.r * h + st.total
    return last_nondiv, certified


def is_totally_ergodic(spec: ParamSpec) -> Verdict:
    """Certified total-ergodicity verdict for cyclic specs.

    No iff some prime blocks per the divisibility reduction documented
    above; the candidate primes are those of gcd(non-zero constraints),
    plus the primes of u_q and of the cycle cut counts when every
    constraint vanishes.  Certified verdicts are cross-checked against the
    brute-force divisibility scan before being returned.
    """
    if not spec.is_cyclic:
        return _unknown(reason="aperiodic spec", horizon=spec.prefix_len)
    constraints, u_q = _cycle_constraints(spec)
    nonzero = [abs(v) for v in constraints if v != 0]
    candidates: set[int] = set()
    if not nonzero:
        candidates.update(_prime_factors(u_q))
        for st in spec.cycle:
            candidates.update(_prime_factors(st.r))
        gstar = 0
    else:
        gstar = math.gcd(*nonzero)
        candidates.update(_prime_factors(gstar))
    blocking = sorted(p for p in candidates if _prime_is_blocking(spec, p))
    if blocking:
        d = blocking[0]
        verdict = _no(
            divisor=d,
            constraints=constraints,
            gcd=gstar,
            reason="all cycle constraints divisible" if nonzero else "all cycle constraints zero",
        )
    else:
        verdict = _yes(gcd=gstar, constraints=constraints, primes_checked=sorted(candidates))
    _cross_check_total_ergodicity(spec, verdict)
    return verdict


def _cross_check_total_ergodicity(spec: ParamSpec, verdict: Verdict) -> None:
    depth = max(30, spec.prefix_len + 4 * spec.cycle_len)
    if verdict.value == NO:
        last, certified = divisibility_scan(spec, verdict.certificate["divisor"], depth)
        if not certified:
            raise AssertionError(
                f"certified No({verdict.certificate['divisor']}) not confirmed by scan"
            )
    else:
        for d in range(2, 51):
            last, certified = divisibility_scan(spec, d, depth)
            if certified:
                raise AssertionError(f"certified Yes contradicted by scan divisor {d}")


def power_ergodic(spec: ParamSpec, d: int) -> Verdict:
    """Ergodicity of T_d: every prime of d must fail the blocking test.

    d = 1 is always ergodic (the action itself is).  Checking primes
    suffices: a blocking composite divisor forces its prime factors to
    block as well.
    """
    if d < 1:
        raise OutOfRange("power must be >= 1")
    if d == 1:
        return _yes(reason="the (C,F)-action itself is ergodic")
    if not spec.is_cyclic:
        return _unknown(reason="aperiodic spec", horizon=spec.prefix_len)
    for p in _prime_factors(d):
        if _prime_is_blocking(spec, p):
            return _no(witness_prime=p, power=d)
    return _yes(power=d, primes_checked=_prime_factors(d))


# ---------------------------------------------------------------------------
# Inverse parameters and the inverse problem


@dataclass(frozen=True)
class InverseStage:
    """Reflected stage data for the inverse action.

    ``F_star`` is the interval the reflected tower occupies; the
    normalized pair (C_star, [0, h_{n-1})) is what the measure-theoretic
    comparison uses.
    """

    n: int
    C: tuple[int, ...]
    C_star: tuple[int, ...]
    F_star: tuple[int, int]  # inclusive interval bounds
    h_prev: int


def inverse_params(spec: ParamSpec, depth: int) -> list[InverseStage]:
    """C*_n = max C_n - C_n and F*_n = sum of maxes - F_n, per stage."""
    if depth < 1:
        raise OutOfRange("depth must be >= 1")
    spec.require_depth(depth)
    out = []
    hs = heights(spec, depth)
    max_sum = 0
    for n in range(1, depth + 1):
        cf = realize_stage(spec, n)
        mx = cf.C[-1]
        max_sum += mx
        c_star = tuple(sorted(mx - c for c in cf.C))
        out.append(
            InverseStage(
                n=n,
                C=cf.C,
                C_star=c_star,
                F_star=(max_sum - (hs[n] - 1), max_sum),
                h_prev=hs[n - 1],
            )
        )
    return out


def _stage_symmetric(st: SpacerMap) -> bool:
    # C = max C - C  iff  sigma(i) = sigma(r - i) for 1 <= i <= r-1
    return all(st.value(i) == st.value(st.r - i) for i in range(1, st.r))


def inverse_isomorphic(spec: ParamSpec) -> Verdict:
    """Isomorphism with the inverse, for bounded non-rigid cyclic specs.

    Yes iff every cycle stage's C-set is fixed by reflection, which at the
    spacer level is the palindrome test sigma(i) = sigma(r - i) on
    1 <= i <= r-1.  When No and the spec is totally ergodic, the verdict
    carries the disjointness rider.
    """
    if not spec.is_cyclic:
        return _unknown(reason="aperiodic spec", horizon=spec.prefix_len)
    rigid = is_rigid(spec)
    if rigid.value == YES:
        raise PreconditionRigid("criterion applies only to non-rigid specs")
    q = spec.prefix_len
    asymmetric = [q + i + 1 for i, st in enumerate(spec.cycle) if not _stage_symmetric(st)]
    if not asymmetric:
        cert = {"symmetric_cycle_stages": spec.cycle_len}
        if all(st.r == 2 for st in spec.cycle):
            # Two-element C-sets are reflection-fixed for free; see the
            # documented discrepancy note in the README for 2-cut Chacon.
            cert["note"] = "all cycle stages have r = 2; criterion holds degenerately"
        return _yes(**cert)
    st = spec.stage_map(asymmetric[0])
    cf = realize_stage(spec, asymmetric[0])
    cert = {
        "stage": asymmetric[0],
        "C": list(cf.C),
        "C_star": sorted(cf.C[-1] - c for c in cf.C),
    }
    te = is_totally_ergodic(spec)
    cert["rider"] = "disjoint" if te.value == YES else "unknown"
    return _no(**cert)


# ---------------------------------------------------------------------------
# Isomorphism of commensurate specs


def _cyclic_alignment(a: ParamSpec, b: ParamSpec):
    """Shift k with h_n(a) = h_{n+k}(b) for all large n, or None.

    Beyond both prefixes the height recurrences are periodic, so equality
    for all large n holds iff the heights agree at one aligned stage and
    the (r, total spacers) patterns agree over one lcm period.
    """
    L = math.lcm(a.cycle_len, b.cycle_len)
    span = a.prefix_len + b.prefix_len + 2 * L + 4
    for k in sorted(range(-span, span + 1), key=lambda x: (abs(x), x)):
        start = max(a.prefix_len, b.prefix_len - k) + 1
        depth_a = start + L + 1
        ha = heights(a, depth_a)
        hb = heights(b, depth_a + k)
        ok = all(ha[n] == hb[n + k] for n in range(start, depth_a + 1))
        if not ok:
            continue
        pattern = all(
            a.stage_map(n).r == b.stage_map(n + k).r
            and a.stage_map(n).total == b.stage_map(n + k).total
            for n in range(start, start + L)
        )
        if pattern:
            return k, start
    return None


def commensurate_isomorphic(spec_a: ParamSpec, spec_b: ParamSpec) -> Verdict:
    """Isomorphism test for commensurate bounded specs, one non-rigid.

    With heights aligned, isomorphism holds iff the spacer integrals agree
    eventually, i.e. the interiors match at every cycle-aligned stage.  A
    No verdict carries the first persistent mismatch and, when one side is
    certifiably totally ergodic, the disjointness rider.
    """
    if not (spec_a.is_cyclic and spec_b.is_cyclic):
        return _unknown(reason="aperiodic input")
    ra, rb = is_rigid(spec_a), is_rigid(spec_b)
    if ra.value == YES and rb.value == YES:
        raise PreconditionRigid("criterion needs at least one non-rigid side")
    aligned = _cyclic_alignment(spec_a, spec_b)
    if aligned is None:
        raise NotCommensurate("no shift makes the height sequences eventually equal")
    k, start = aligned
    L = math.lcm(spec_a.cycle_len, spec_b.cycle_len)
    mismatch = None
    for n in range(start, start + L):
        if spec_a.stage_map(n).sigma[:-1] != spec_b.stage_map(n + k).sigma[:-1]:
            mismatch = n
            break
    if mismatch is None:
        return _yes(shift=k, from_stage=start)
    cert = {"shift": k, "first_mismatch": mismatch}
    te = UNKNOWN
    if is_totally_ergodic(spec_a).value == YES or is_totally_ergodic(spec_b).value == YES:
        te = "disjoint"
    cert["rider"] = te
    return _no(**cert)


# ---------------------------------------------------------------------------
# Quadchotomy classification

MSJ = "MSJ"
FINITE_EIGENVALUES_NON_RIGID = "FiniteEigenvaluesNonRigid"
RIGID_FINITE_EIGENVALUES = "RigidFiniteEigenvalues"
ODOMETER_BOUNDED_TYPE = "OdometerBoundedType"
UNKNOWN_CLASS = "Unknown"


@dataclass(frozen=True)
class AnalysisReport:
    bounded: Verdict
    rigid: Verdict
    totally_ergodic: Verdict
    classification: str
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "bounded": self.bounded.to_json(),
            "rigid": self.rigid.to_json(),
            "totally_ergodic": self.totally_ergodic.to_json(),
            "classification": self.classification,
            "details": self.details,
        }


def classify(spec: ParamSpec) -> AnalysisReport:
    """Quadchotomy for bounded cyclic specs.

    Non-rigid and totally ergodic gives MSJ; non-rigid without total
    ergodicity gives the finite-eigenvalue class with orders bounded by the
    spacer bound K.  A rigid cyclic spec always realizes an infinite
    arithmetic tail (interior constants equal, tops zero), hence is an
    odometer of bounded type; the remaining rigid class can only occur for
    aperiodic bounded parameters and is never assigned here.
    """
    bounded = is_bounded(spec)
    rigid = is_rigid(spec)
    te = is_totally_ergodic(spec)
    details: dict = {}
    if UNKNOWN in (bounded.value, rigid.value, te.value):
        return AnalysisReport(bounded, rigid, te, UNKNOWN_CLASS, details)
    K = spacer_bound(spec)
    if rigid.value == NO and te.value == YES:
        cls = MSJ
    elif rigid.value == NO:
        cls = FINITE_EIGENVALUES_NON_RIGID
        details["eigenvalue_order_bound"] = K
        details["eigenvalue_witness_divisor"] = te.certificate.get("divisor")
    else:
        cls = ODOMETER_BOUNDED_TYPE
        q = spec.prefix_len
        c = rigid.certificate["interior_constant"]
        leading = heights(spec, q)[q] + c
        details["odometer_base"] = {
            "leading": leading,
            "cycle": [st.r for st in spec.cycle],
        }
    return AnalysisReport(bounded, rigid, te, cls, details)
