"""Core (C,F) data model for rank-one Z-actions.

A transformation is specified by an initial height ``h0`` and a sequence of
cutting stages ``(r, sigma)``: cut the current tower into ``r`` columns and
put ``sigma(i)`` spacers above column ``i``.  Stage ``k`` (1-based) acts on
the tower of height ``h_{k-1}`` and yields

    C_k = { i*h_{k-1} + s(i) : 0 <= i < r },    s = integral of sigma,
    h_k = r*h_{k-1} + sum(sigma),

with F_k the interval [0, h_k).  The sequence is either a finite prefix
(depth-bounded answers only) or a prefix followed by a cycle repeated
forever (certified answers).

All integers are arbitrary precision; all measures are exact fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import CardinalityBudgetExceeded, DepthExceeded, OutOfRange

#: Default cap on the number of elements of any materialized sumset.
DEFAULT_BUDGET = 2 ** 23


@dataclass(frozen=True)
class FiniteIntSet:
    """A finite, non-empty set of integers kept in strictly increasing order."""

    elements: tuple[int, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValueError("FiniteIntSet must be non-empty")
        for a, b in zip(self.elements, self.elements[1:]):
            if a >= b:
                raise ValueError("elements must be strictly increasing")

    @classmethod
    def of(cls, items: Iterable[int]) -> "FiniteIntSet":
        return cls(tuple(sorted(set(int(x) for x in items))))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return x in self.elements


@dataclass(frozen=True)
class SpacerMap:
    """One cutting stage: ``r`` cuts and spacer counts ``sigma(1..r)``.

    ``sigma[i]`` (0-based storage) is the number of spacers above column
    ``i+1``; the last entry sits above the whole stack.
    """

    r: int
    sigma: tuple[int, ...]

    def __post_init__(self):
        if self.r < 2:
            raise ValueError(f"need r >= 2 cuts, got {self.r}")
        if len(self.sigma) != self.r:
            raise ValueError(f"sigma has {len(self.sigma)} entries, expected {self.r}")
        if any(v < 0 for v in self.sigma):
            raise ValueError("spacer counts must be non-negative")

    @classmethod
    def of(cls, r: int, sigma: Sequence[int]) -> "SpacerMap":
        return cls(int(r), tuple(int(v) for v in sigma))

    def value(self, i: int) -> int:
        """sigma(i) for 1 <= i <= r."""
        if not 1 <= i <= self.r:
            raise OutOfRange(f"sigma index {i} outside 1..{self.r}")
        return self.sigma[i - 1]

    @property
    def top(self) -> int:
        """Spacers above the last column; zero iff the stage is adapted."""
        return self.sigma[-1]

    @property
    def interior(self) -> tuple[int, ...]:
        """sigma(1..r-1), the spacers that separate consecutive columns."""
        return self.sigma[:-1]

    @property
    def total(self) -> int:
        return sum(self.sigma)


@dataclass(frozen=True)
class ParamSpec:
    """Stage sequence of a rank-one transformation.

    ``prefix`` holds stages 1..q; ``cycle``, when present, repeats forever
    after the prefix.  Stage k realizes (C_k, h_k) from h_{k-1}.
    """

    prefix: tuple[SpacerMap, ...] = ()
    cycle: Optional[tuple[SpacerMap, ...]] = None
    h0: int = 1

    def __post_init__(self):
        if self.h0 < 1:
            raise ValueError("initial height must be >= 1")
        if self.cycle is not None and len(self.cycle) == 0:
            raise ValueError("cycle, when given, must be non-empty")

    @classmethod
    def of(cls, prefix=(), cycle=None, h0=1) -> "ParamSpec":
        pf = tuple(s if isinstance(s, SpacerMap) else SpacerMap.of(*s) for s in prefix)
        cy = None
        if cycle is not None:
            cy = tuple(s if isinstance(s, SpacerMap) else SpacerMap.of(*s) for s in cycle)
        return cls(pf, cy, int(h0))

    @property
    def is_cyclic(self) -> bool:
        return self.cycle is not None

    @property
    def prefix_len(self) -> int:
        return len(self.prefix)

    @property
    def cycle_len(self) -> int:
        return len(self.cycle) if self.cycle else 0

    def max_depth(self) -> Optional[int]:
        """Deepest materializable stage; None when unbounded."""
        return None if self.is_cyclic else len(self.prefix)

    def stage_map(self, n: int) -> SpacerMap:
        """The (r, sigma) of stage n >= 1."""
        if n < 1:
            raise OutOfRange(f"stage index {n} must be >= 1")
        q = len(self.prefix)
        if n <= q:
            return self.prefix[n - 1]
        if self.cycle is None:
            raise DepthExceeded(f"stage {n} beyond prefix of length {q} (no cycle)")
        return self.cycle[(n - 1 - q) % len(self.cycle)]

    def stage_maps(self, depth: int):
        return [self.stage_map(n) for n in range(1, depth + 1)]

    def require_depth(self, depth: int) -> None:
        if not self.is_cyclic and depth > len(self.prefix):
            raise DepthExceeded(
                f"depth {depth} beyond prefix of length {len(self.prefix)} (no cycle)"
            )


@dataclass(frozen=True)
class CFStage:
    """Realized stage: C_n with height h_n over the previous height h_prev."""

    n: int
    C: tuple[int, ...]
    h: int
    h_prev: int

    def __post_init__(self):
        # Conditions (I)-(III) specialized to C inside [0, h) over interval F.
        if self.C[0] != 0 or len(self.C) < 2:
            raise ValueError(f"stage {self.n}: need 0 in C and #C > 1")
        for a, b in zip(self.C, self.C[1:]):
            if b - a < self.h_prev:
                raise ValueError(f"stage {self.n}: translates of [0,{self.h_prev}) overlap")
        if self.C[-1] + self.h_prev > self.h:
            raise ValueError(f"stage {self.n}: C + [0,{self.h_prev}) escapes [0,{self.h})")

    @property
    def r(self) -> int:
        return len(self.C)


def integral_values(stage: SpacerMap) -> tuple[int, ...]:
    """s(0..r-1): s(0)=0 and s(i)=sigma(1)+...+sigma(i)."""
    out = [0]
    acc = 0
    for v in stage.sigma[:-1]:
        acc += v
        out.append(acc)
    return tuple(out)


def heights(spec: ParamSpec, depth: int) -> list[int]:
    """[h_0, h_1, ..., h_depth]."""
    spec.require_depth(depth)
    hs = [spec.h0]
    for n in range(1, depth + 1):
        st = spec.stage_map(n)
        hs.append(st.r * hs[-1] + st.total)
    return hs


def realize_stage(spec: ParamSpec, n: int) -> CFStage:
    """C_n and h_n per the height recurrence and C_n = {i*h_{n-1} + s(i)}."""
    if n < 1:
        raise OutOfRange("stage index must be >= 1")
    hs = heights(spec, n)
    st = spec.stage_map(n)
    s = integral_values(st)
    h_prev = hs[n - 1]
    C = tuple(i * h_prev + s[i] for i in range(st.r))
    return CFStage(n=n, C=C, h=hs[n], h_prev=h_prev)


def stage_of(cf: CFStage) -> SpacerMap:
    """Recover (r, sigma) from a realized stage; inverse of realize_stage."""
    r = len(cf.C)
    s = [c - i * cf.h_prev for i, c in enumerate(cf.C)]
    if s[0] != 0 or any(v < 0 for v in s) or any(b < a for a, b in zip(s, s[1:])):
        raise ValueError("C is not of the form {i*h_prev + s(i)} with s non-decreasing")
    sigma = [s[i] - s[i - 1] for i in range(1, r)]
    sigma.append(cf.h - r * cf.h_prev - s[r - 1])
    if sigma[-1] < 0:
        raise ValueError("heights inconsistent with C (negative top spacer)")
    return SpacerMap.of(r, sigma)


@dataclass(frozen=True)
class Violation:
    stage: int
    condition: str
    detail: str


def validate(spec: ParamSpec, depth: int) -> list[Violation]:
    """Check conditions (I)-(III) on realized stages 1..depth.

    Specs built from SpacerMap stages satisfy the conditions by
    construction, so this mostly guards hand-built or deserialized data;
    violations are returned as data, not raised.
    """
    if depth < 1:
        raise OutOfRange("depth must be >= 1")
    spec.require_depth(depth)
    out: list[Violation] = []
    h = spec.h0
    for n in range(1, depth + 1):
        st = spec.stage_map(n)
        s = integral_values(st)
        C = [i * h + s[i] for i in range(st.r)]
        h_next = st.r * h + st.total
        if st.r < 2:
            out.append(Violation(n, "I", f"#C_{n} = {st.r} <= 1"))
        if C[0] != 0:
            out.append(Violation(n, "I", f"0 not in C_{n}"))
        for a, b in zip(C, C[1:]):
            if b - a < h:
                out.append(Violation(n, "III", f"C_{n} translates of [0,{h}) overlap at {a},{b}"))
                break
        if C and C[-1] + h > h_next:
            out.append(Violation(n, "II", f"max(F_{n-1}+C_{n}) >= h_{n}"))
        h = h_next
    return out


@dataclass(frozen=True)
class MeasureReport:
    """Exact per-stage measure ratios phi_m = h_m / prod(#C_i) and their limit."""

    ratios: tuple[Fraction, ...]
    total: Fraction
    finite: bool
    certified: bool  # True when a cycle makes the limit exact


def measure(spec: ParamSpec, depth: int) -> MeasureReport:
    """Measure ratios up to ``depth``; exact total for cyclic specs.

    Per cycle pass the height map is affine, h -> P*h + W with P the
    product of the cycle's cut counts, so the ratio limit is
    phi_q + W / (Pi_q * (P - 1)) -- a geometric series summed exactly.
    For a cycle-less spec the reported total is the lower bound phi_depth.
    """
    if depth < 1:
        raise OutOfRange("depth must be >= 1")
    spec.require_depth(depth)
    hs = heights(spec, depth)
    ratios = []
    prod = 1
    for n in range(1, depth + 1):
        prod *= spec.stage_map(n).r
        ratios.append(Fraction(hs[n], prod))
    if not spec.is_cyclic:
        return MeasureReport(tuple(ratios), ratios[-1], True, False)
    q = spec.prefix_len
    hq = heights(spec, q)[q]
    piq = 1
    for st in spec.prefix:
        piq *= st.r
    P = 1
    W = 0
    for st in spec.cycle:
        P *= st.r
        W = W * st.r + st.total
    # W accumulated left-to-right equals sum over stages j of total_j * prod(r_l, l>j)
    total = Fraction(hq, piq) + Fraction(W, piq * (P - 1)) if P > 1 else Fraction(hq, piq)
    return MeasureReport(tuple(ratios), total, True, True)


def cylinder_measure(spec: ParamSpec, level: int, A: FiniteIntSet) -> Fraction:
    """mu([A]_level) = #A / prod_{i<=level} #C_i, normalized by mu([0]_0) = 1."""
    if level < 0:
        raise OutOfRange("level must be >= 0")
    spec.require_depth(level)
    h = heights(spec, level)[level]
    if A.elements[0] < 0 or A.elements[-1] >= h:
        raise OutOfRange(f"A not contained in [0, h_{level}) = [0, {h})")
    prod = 1
    for n in range(1, level + 1):
        prod *= spec.stage_map(n).r
    return Fraction(len(A), prod)


@dataclass(frozen=True)
class StandardnessReport:
    """Result of the (1-3)/(1-4) scan for one group element g."""

    g: int
    n: int
    depth: int
    holds_at: Optional[int]  # least m <= depth with g + F_n + C_{n+1..m} inside F_m
    ratio: Fraction  # (1-4) density ratio at m = depth


def standardness_check(
    spec: ParamSpec, g: int, n: int, depth: int, budget: int = DEFAULT_BUDGET
) -> StandardnessReport:
    """Check the inclusion (1-3) for m <= depth and the density ratio (1-4) at depth.

    For interval towers the inclusion has a closed form: the shifted block
    g + F_n + C_{n+1} + ... + C_m starts at g and ends at
    g + h_m - 1 - (sum of top spacers over stages n+1..m), so it sits in
    [0, h_m) iff 0 <= g <= sum of those top spacers.  The density ratio is
    computed from the materialized C-sumset, counting interval overlap.
    """
    if depth <= n:
        raise OutOfRange("need depth > n")
    spec.require_depth(depth)
    hs = heights(spec, depth)
    holds_at = None
    if g >= 0:
        top_sum = 0
        for m in range(n + 1, depth + 1):
            top_sum += spec.stage_map(m).top
            if g <= top_sum:
                holds_at = m
                break
    # (1-4) ratio at m = depth: materialize the C-block sumset.
    count_cells = 1
    for m in range(n + 1, depth + 1):
        count_cells *= spec.stage_map(m).r
    if count_cells > budget:
        raise CardinalityBudgetExceeded(count_cells, budget)
    block = [0]
    for m in range(n + 1, depth + 1):
        C = realize_stage(spec, m).C
        block = [x + c for c in C for x in block]
    h_n, h_m = hs[n], hs[depth]
    inside = 0
    for c in block:
        lo, hi = c + g, c + g + h_n  # translated copy of [0, h_n)
        inside += max(0, min(hi, h_m) - max(lo, 0))
    return StandardnessReport(
        g=g,
        n=n,
        depth=depth,
        holds_at=holds_at,
        ratio=Fraction(inside, h_n * count_cells),
    )


# ---------------------------------------------------------------------------
# JSON schema and builtin corpus


def spec_to_json(spec: ParamSpec) -> dict:
    return {
        "h0": spec.h0,
        "prefix": [{"r": st.r, "sigma": list(st.sigma)} for st in spec.prefix],
        "cycle": None
        if spec.cycle is None
        else [{"r": st.r, "sigma": list(st.sigma)} for st in spec.cycle],
    }


def spec_from_json(data: dict) -> ParamSpec:
    def parse_stage(d):
        return SpacerMap.of(d["r"], d["sigma"])

    return ParamSpec(
        prefix=tuple(parse_stage(d) for d in data.get("prefix", [])),
        cycle=None
        if data.get("cycle") is None
        else tuple(parse_stage(d) for d in data["cycle"]),
        h0=int(data.get("h0", 1)),
    )


def builtin_spec(name: str) -> ParamSpec:
    """Builtins: chacon2, chacon3, odometer:b (dyadic when b omitted)."""
    if name == "chacon2":
        return ParamSpec.of(cycle=[(2, (0, 1))])
    if name == "chacon3":
        return ParamSpec.of(cycle=[(3, (0, 1, 0))])
    if name == "odometer" or name.startswith("odometer:"):
        b = 2
        if ":" in name:
            b = int(name.split(":", 1)[1])
        if b < 2:
            raise ValueError("odometer base must be >= 2")
        return ParamSpec.of(cycle=[(b, (0,) * b)])
    raise ValueError(f"unknown builtin spec {name!r}")
