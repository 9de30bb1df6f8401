"""Exact finite-tower realization: cylinder level sets, correlations with
certified error bounds, the weak-limit identity, symbolic codes, and the
expansiveness transform.

Within depth m the action is a level shift away from the tower top, so a
correlation computed on level sets is exact up to the boundary mass |t|/h_m
plus the spacer mass not yet visible at depth m.  Everything is integer and
fraction arithmetic; nothing floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Iterable, Optional, Sequence

from .errors import (
    CardinalityBudgetExceeded,
    DegenerateDrop,
    NotAdapted,
    NotTelescoped,
    OutOfRange,
)
from .params import (
    DEFAULT_BUDGET,
    MeasureReport,
    ParamSpec,
    SpacerMap,
    heights,
    measure,
    realize_stage,
)

BITSET_LIMIT = 2 ** 27  # beyond this height, sorted sets replace bitmasks


def _as_levels(A: Iterable[int]) -> tuple[int, ...]:
    out = tuple(sorted(set(int(x) for x in A)))
    if not out:
        raise OutOfRange("level set must be non-empty")
    return out


class Tower:
    """Depth-m realization of a spec with cached cylinder level sets.

    Level sets are stored as sorted tuples; when h_m fits the bitset limit
    an integer bitmask is kept alongside for fast shift-intersections.
    Instances are immutable in use and safe to share.
    """

    def __init__(self, spec: ParamSpec, m: int, budget: int = DEFAULT_BUDGET):
        spec.require_depth(m)
        self.spec = spec
        self.m = m
        self.budget = budget
        self.heights = heights(spec, m)
        self.h = self.heights[m]
        prod = 1
        for n in range(1, m + 1):
            prod *= spec.stage_map(n).r
        self.prod = prod
        self.use_bitset = self.h <= BITSET_LIMIT
        self._levels: dict = {}
        self._masks: dict = {}
        self._sets: dict = {}

    def levels(self, k: int, A: Iterable[int]) -> tuple[int, ...]:
        """Level set of the cylinder [A]_k at depth m: A + C_{k+1} + ... + C_m."""
        A = _as_levels(A)
        key = (k, A)
        if key in self._levels:
            return self._levels[key]
        if not 0 <= k <= self.m:
            raise OutOfRange(f"level {k} outside 0..{self.m}")
        if A[0] < 0 or A[-1] >= self.heights[k]:
            raise OutOfRange(f"A not contained in [0, h_{k})")
        size = len(A)
        cur = list(A)
        for n in range(k + 1, self.m + 1):
            C = realize_stage(self.spec, n).C
            size *= len(C)
            if size > self.budget:
                raise CardinalityBudgetExceeded(size, self.budget)
            cur = [x + c for c in C for x in cur]
        cur.sort()
        out = tuple(cur)
        self._levels[key] = out
        return out

    def _mask(self, k, A) -> int:
        key = (k, _as_levels(A))
        if key not in self._masks:
            m = 0
            for x in self.levels(*key):
                m |= 1 << x
            self._masks[key] = m
        return self._masks[key]

    def _set(self, k, A) -> set:
        key = (k, _as_levels(A))
        if key not in self._sets:
            self._sets[key] = set(self.levels(*key))
        return self._sets[key]

    def shifted_intersection_count(self, k: int, A, B, t: int) -> int:
        """#((t + levels(A)) intersect levels(B))."""
        if self.use_bitset:
            ma, mb = self._mask(k, A), self._mask(k, B)
            shifted = ma << t if t >= 0 else ma >> (-t)
            return (shifted & mb).bit_count()
        sb = self._set(k, B)
        return sum(1 for x in self.levels(k, _as_levels(A)) if x + t in sb)


def cylinder_levels(
    spec: ParamSpec, k: int, A: Iterable[int], m: int, budget: int = DEFAULT_BUDGET
) -> tuple[int, ...]:
    """Sorted level set of [A]_k at depth m (the sumset A + C_{k+1..m})."""
    return Tower(spec, m, budget).levels(k, A)


@dataclass(frozen=True)
class CorrelationPoint:
    """One exact correlation sample at depth m.

    ``value`` is the matched-level count divided by h_m; it approximates
    mu(T_t [A]_k intersect [B]_k) / mu(X) within ``error_bound`` =
    |t|/h_m + (total - phi_m)/total (boundary mass plus unseen spacer
    mass).  ``certified`` is False when the spec has no cycle and the
    spacer term uses the deepest available ratio instead of the limit.
    """

    t: int
    value: Fraction
    error_bound: Fraction
    count: int
    h: int
    certified: bool

    def mu_normalized(self, phi_m: Fraction) -> Fraction:
        """The same sample in the mu([0]_0) = 1 normalization: count / prod #C."""
        return self.value * phi_m


def _spacer_term(spec: ParamSpec, m: int) -> tuple[Fraction, Fraction, bool]:
    """(phi_m, (total - phi_m)/total, certified)."""
    if spec.is_cyclic:
        rep = measure(spec, m)
        phi_m = rep.ratios[m - 1]
        return phi_m, (rep.total - phi_m) / rep.total, True
    deepest = spec.prefix_len
    rep = measure(spec, deepest)
    phi_m = rep.ratios[m - 1]
    total = rep.ratios[-1]
    return phi_m, (total - phi_m) / total, False


def correlation(
    spec: ParamSpec,
    t: int,
    k: int,
    A: Iterable[int],
    B: Iterable[int],
    m: int,
    budget: int = DEFAULT_BUDGET,
    tower: Optional[Tower] = None,
) -> CorrelationPoint:
    """Exact depth-m correlation of the cylinders [A]_k and [B]_k at shift t."""
    tw = tower if tower is not None and tower.m == m else Tower(spec, m, budget)
    if 4 * abs(t) >= tw.h:
        raise OutOfRange(f"|t| = {abs(t)} too large for depth {m} (need < h_m/4)")
    count = tw.shifted_intersection_count(k, A, B, t)
    phi_m, spacer, certified = _spacer_term(spec, m)
    bound = Fraction(abs(t), tw.h) + spacer
    return CorrelationPoint(
        t=t,
        value=Fraction(count, tw.h),
        error_bound=bound,
        count=count,
        h=tw.h,
        certified=certified,
    )


@dataclass(frozen=True)
class RigidityScanEntry:
    t: int
    value: Fraction
    flagged: bool


def rigidity_scan(
    spec: ParamSpec,
    k: int,
    A: Iterable[int],
    t_list: Sequence[int],
    m: int,
    tolerance: Optional[Fraction] = None,
    budget: int = DEFAULT_BUDGET,
) -> list[RigidityScanEntry]:
    """Self-correlations of [A]_k; flags shifts that nearly return the set.

    The default tolerance is a tenth of the depth-m mass of [A]_k.
    """
    tw = Tower(spec, m, budget)
    base = Fraction(len(tw.levels(k, A)), tw.h)
    tol = tolerance if tolerance is not None else base / 10
    out = []
    for t in t_list:
        pt = correlation(spec, t, k, A, A, m, budget, tower=tw)
        out.append(RigidityScanEntry(t=t, value=pt.value, flagged=pt.value >= base - tol))
    return out


def spacer_distribution(spec: ParamSpec, stage: int) -> dict[int, Fraction]:
    """Distribution of the stage's spacer values under the uniform slot choice."""
    st = spec.stage_map(stage)
    out: dict[int, Fraction] = {}
    for v in st.sigma:
        out[v] = out.get(v, Fraction(0)) + Fraction(1, st.r)
    return out


@dataclass(frozen=True)
class WeakLimitReport:
    """Residual of the weak-limit identity at one stage.

    The identity equates the correlation at -h_n with the theta-mixture of
    the small-shift correlations, up to 2/r (r the cut count of stage
    n+1); the residual bound adds the correlation error bounds on top.
    """

    n: int
    t: int
    r: int
    theta: dict[int, Fraction]
    lhs: CorrelationPoint
    rhs: Fraction
    residual: Fraction
    bound: Fraction

    @property
    def ok(self) -> bool:
        return self.residual <= self.bound


def weak_limit_check(
    spec: ParamSpec,
    n: int,
    k: int,
    A: Iterable[int],
    B: Iterable[int],
    m: int,
    budget: int = DEFAULT_BUDGET,
    tower: Optional[Tower] = None,
) -> WeakLimitReport:
    """Check mu(T_{-h_n} A cap B) against the spacer-distribution mixture.

    Requires an adapted spec (no top spacers anywhere); the mixing weights
    are the value frequencies of stage n+1's spacer map.
    """
    check_stages = spec.prefix_len + spec.cycle_len if spec.is_cyclic else spec.prefix_len
    for j in range(1, max(check_stages, n + 1) + 1):
        if spec.stage_map(j).top != 0:
            raise NotAdapted(f"stage {j} has {spec.stage_map(j).top} top spacers")
    if m <= n:
        raise OutOfRange("need m > n")
    tw = tower if tower is not None and tower.m == m else Tower(spec, m, budget)
    h_n = tw.heights[n]
    st = spec.stage_map(n + 1)
    theta = spacer_distribution(spec, n + 1)
    lhs = correlation(spec, -h_n, k, A, B, m, budget, tower=tw)
    rhs = Fraction(0)
    bound = Fraction(2, st.r) + lhs.error_bound
    for value, weight in sorted(theta.items()):
        pt = correlation(spec, value, k, A, B, m, budget, tower=tw)
        rhs += weight * pt.value
        bound += weight * pt.error_bound
    residual = abs(lhs.value - rhs)
    return WeakLimitReport(
        n=n,
        t=-h_n,
        r=st.r,
        theta=theta,
        lhs=lhs,
        rhs=rhs,
        residual=residual,
        bound=bound,
    )


# ---------------------------------------------------------------------------
# Symbolic coding

GAP = "_"


@dataclass(frozen=True)
class PointCoords:
    """A point of the depth-m tower: base level f in [0, h_k) plus the
    chosen C-digits c_{k+1}, ..., c_m."""

    k: int
    f: int
    digits: tuple[int, ...]

    @property
    def m(self) -> int:
        return self.k + len(self.digits)


def point_level(spec: ParamSpec, pt: PointCoords) -> int:
    """Absolute level index of the point at depth m."""
    hs = heights(spec, pt.m)
    if not 0 <= pt.f < hs[pt.k]:
        raise OutOfRange(f"f = {pt.f} outside [0, h_{pt.k})")
    lvl = pt.f
    for off, c in enumerate(pt.digits, start=pt.k + 1):
        if c not in realize_stage(spec, off).C:
            raise OutOfRange(f"digit {c} not in C_{off}")
        lvl += c
    return lvl


def sample_points(
    spec: ParamSpec, k: int, m: int, count: int, seed: int = 0,
    level_cap: Optional[int] = None,
) -> list[PointCoords]:
    """Seeded sampler of distinct points; levels stay below ``level_cap``
    when given (useful to keep a coding window inside the tower)."""
    rng = Random(seed)
    hs = heights(spec, m)
    seen = set()
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 10000 * count:
            raise OutOfRange("sampler failed to find enough distinct points")
        f = rng.randrange(hs[k])
        digits = tuple(rng.choice(realize_stage(spec, n).C) for n in range(k + 1, m + 1))
        pt = PointCoords(k, f, digits)
        lvl = pt.f + sum(digits)
        if level_cap is not None and lvl >= level_cap:
            continue
        if lvl in seen:
            continue
        seen.add(lvl)
        out.append(pt)
    return out


def symbolic_code(
    spec: ParamSpec,
    k: int,
    pt: PointCoords,
    window: tuple[int, int],
    budget: int = DEFAULT_BUDGET,
) -> str:
    """0/1 word of the point against the base cylinder [0]_k.

    Position i reads '0' when the shifted point sits in a level of [0]_k
    at depth m, '1' otherwise, and '_' when the shift leaves the depth-m
    tower.
    """
    m = pt.m
    tw = Tower(spec, m, budget)
    zeros = tw._set(k, (0,))
    lvl = point_level(spec, pt)
    lo, hi = window
    if lo > hi:
        raise OutOfRange("empty window")
    out = []
    for i in range(lo, hi + 1):
        pos = lvl + i
        if not 0 <= pos < tw.h:
            out.append(GAP)
        else:
            out.append("0" if pos in zeros else "1")
    return "".join(out)


# ---------------------------------------------------------------------------
# Expansive transform


@dataclass(frozen=True)
class ExpansiveStage:
    """Per-stage drop data: i columns dropped, r* kept, new spacer map."""

    n: int
    i: int
    r_star: int
    sigma_star: tuple[int, ...]
    bracket_holds: bool
    bracket: tuple[int, int, int]  # lhs(i), interior max, rhs(i)

    @property
    def expansive(self) -> bool:
        interior = self.sigma_star[:-1]
        return not interior or self.sigma_star[-1] > max(interior)


@dataclass(frozen=True)
class ExpansiveResult:
    stages: tuple[ExpansiveStage, ...]
    spec: ParamSpec
    summability: Fraction  # sum of i_n / r_n over materialized stages
    expansive_ok: bool
    measure_in: MeasureReport
    measure_out: MeasureReport


def expansive_transform(spec: ParamSpec, depth: Optional[int] = None) -> ExpansiveResult:
    """Replace the top i_n columns of each stage with spacers.

    i_n is the unique drop count whose bracket encloses the largest
    interior spacer:

        (i-1)*h_n + sigma(r-i) + ... + sigma(r)  <=  max interior
                                                  <  i*h_n + sigma(r-i+1) + ... + sigma(r),

    and the kept map gains the top spacer i_n*h_n + sigma(r-i_n+1) + ...
    + sigma(r).  The index pairing (stage n with the realized height h_n)
    and the summation bounds follow the worked dyadic-odometer example,
    which the unit tests pin to guard off-by-one readings.  Stages left
    with a single column (the drop count hit r-1) are folded into the
    following stage, which inherits their spacer as a uniform offset.
    """
    if spec.is_cyclic:
        raise NotTelescoped(
            "cyclic specs have bounded cut counts; unroll with growing_telescope first"
        )
    depth = depth if depth is not None else spec.prefix_len
    spec.require_depth(depth)
    if depth < 1:
        raise OutOfRange("depth must be >= 1")
    hs = heights(spec, depth)
    stages: list[ExpansiveStage] = []
    summability = Fraction(0)
    for n in range(1, depth + 1):
        st = spec.stage_map(n)
        h_n = hs[n]
        k_int = max(st.interior)

        def lhs(i):
            return (i - 1) * h_n + sum(st.value(j) for j in range(st.r - i, st.r + 1))

        def rhs(i):
            return i * h_n + sum(st.value(j) for j in range(st.r - i + 1, st.r + 1))

        chosen = None
        for i in range(1, st.r):
            if lhs(i) <= k_int < rhs(i):
                chosen = (i, True)
                break
        if chosen is None:
            # already-expansive stages fall below every bracket; drop one
            chosen = (1, False)
        i_n, holds = chosen
        r_star = st.r - i_n
        top = i_n * h_n + sum(st.value(j) for j in range(st.r - i_n + 1, st.r + 1))
        sigma_star = st.sigma[: max(r_star - 1, 0)] + (top,)
        stages.append(
            ExpansiveStage(
                n=n,
                i=i_n,
                r_star=r_star,
                sigma_star=sigma_star,
                bracket_holds=holds,
                bracket=(lhs(i_n), k_int, rhs(i_n)),
            )
        )
        summability += Fraction(i_n, st.r)
    out_maps: list[SpacerMap] = []
    carry = 0
    for es in stages:
        sigma = tuple(v + carry for v in es.sigma_star)
        if es.r_star < 2:
            carry = sigma[0]  # single-column stage: pure spacer offset
            continue
        out_maps.append(SpacerMap.of(es.r_star, sigma))
        carry = 0
    if carry or not out_maps:
        raise DegenerateDrop("trailing stage left a single column with nothing to fold into")
    out_spec = ParamSpec(tuple(out_maps), None, spec.h0)
    return ExpansiveResult(
        stages=tuple(stages),
        spec=out_spec,
        summability=summability,
        expansive_ok=all(es.expansive for es in stages),
        measure_in=measure(spec, depth),
        measure_out=measure(out_spec, len(out_maps)),
    )
