"""Algebra of spacer maps: integrals, the diamond composition, periodicity,
and the adapted-form transform.

The diamond operation mirrors stage merging: if stage A realizes C over
height h and stage B realizes C' over the resulting height, then the single
stage (r_A * r_B, a <> b) realizes the sumset C + C' over h.  All section-4
and section-5 decision procedures work at this (r, sigma) level.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DepthExceeded, OutOfRange
from .params import ParamSpec, SpacerMap, integral_values, stage_of

__all__ = [
    "Integral",
    "integral",
    "diamond",
    "is_periodic",
    "adapted_transform",
    "AdaptedResult",
    "stage_of",
]


@dataclass(frozen=True)
class Integral:
    """Partial sums s(0..r-1) of a spacer map, s(0) = 0."""

    r: int
    s: tuple[int, ...]

    def __post_init__(self):
        if self.s[0] != 0 or len(self.s) != self.r:
            raise ValueError("integral must have s(0) = 0 and r entries")
        if any(b < a for a, b in zip(self.s, self.s[1:])):
            raise ValueError("integral must be non-decreasing")


def integral(stage: SpacerMap) -> Integral:
    """s(i) = sigma(1) + ... + sigma(i) for i < r, with s(0) = 0."""
    return Integral(stage.r, integral_values(stage))


def diamond(a: SpacerMap, b: SpacerMap) -> SpacerMap:
    """Combined spacer map with r_a * r_b entries.

    (a <> b)(i) = a(j) when i = j mod r_a with 1 <= j < r_a, and
    (a <> b)(r_a * k) = a(r_a) + b(k).
    """
    r, t = a.r, b.r
    out = []
    for i in range(1, r * t + 1):
        j = i % r
        if j != 0:
            out.append(a.value(j))
        else:
            out.append(a.value(r) + b.value(i // r))
    return SpacerMap.of(r * t, out)


def diamond_all(stages) -> SpacerMap:
    """Left fold of diamond over a non-empty stage sequence."""
    stages = list(stages)
    if not stages:
        raise ValueError("need at least one stage")
    acc = stages[0]
    for st in stages[1:]:
        acc = diamond(acc, st)
    return acc


def is_periodic(a: SpacerMap, i: int) -> bool:
    """True iff a(i+j) = a(j) for all j in {1, ..., r-1-i}."""
    if not 1 <= i <= a.r - 2:
        raise OutOfRange(f"period {i} outside 1..{a.r - 2}")
    return all(a.value(i + j) == a.value(j) for j in range(1, a.r - i))


@dataclass(frozen=True)
class AdaptedResult:
    """Adapted re-presentation of a spec.

    ``spec`` realizes the same C-sequence stage by stage; ``stabilized``
    marks the case where the carry pattern settles into a new cycle (all
    cycle top spacers were already zero), in which case ``carry`` is the
    eventual constant carry.
    """

    spec: ParamSpec
    stabilized: bool
    carry: int | None


def adapted_transform(spec: ParamSpec, depth: int | None = None) -> AdaptedResult:
    """Move all top spacers into later interior spacers.

    Stage by stage, sigma~(i) = sigma(i) + d for i < r and sigma~(r) = 0,
    where the carry d is the sum of the top spacers of all earlier stages.
    The realized C-sequence is unchanged (the i-th translate gains i*d from
    the lowered height and loses it again through the fattened integral).

    Carries grow without bound unless the top spacers eventually vanish, so
    a cyclic spec with non-zero cycle tops is emitted as a finite prefix of
    ``depth`` stages; when every cycle top is zero the carry stabilizes and
    the output is cyclic again.
    """
    q = spec.prefix_len
    if spec.is_cyclic and all(st.top == 0 for st in spec.cycle):
        carry = sum(spec.stage_map(n).top for n in range(1, q + 1))
        new_prefix = []
        d = 0
        for n in range(1, q + 1):
            st = spec.stage_map(n)
            new_prefix.append(_shift_interior(st, d))
            d += st.top
        new_cycle = tuple(_shift_interior(st, d) for st in spec.cycle)
        return AdaptedResult(
            ParamSpec(tuple(new_prefix), new_cycle, spec.h0), True, carry
        )
    if depth is None:
        if spec.is_cyclic:
            raise DepthExceeded(
                "cyclic spec with non-zero cycle tops: pass a depth for the "
                "finite-prefix adapted form"
            )
        depth = q
    spec.require_depth(depth)
    new_prefix = []
    d = 0
    for n in range(1, depth + 1):
        st = spec.stage_map(n)
        new_prefix.append(_shift_interior(st, d))
        d += st.top
    return AdaptedResult(ParamSpec(tuple(new_prefix), None, spec.h0), False, None)


def _shift_interior(st: SpacerMap, d: int) -> SpacerMap:
    return SpacerMap.of(st.r, tuple(v + d for v in st.interior) + (0,))
