from fractions import Fraction

import pytest

import oracles
from rankone.errors import DepthExceeded, OutOfRange
from rankone.params import (
    FiniteIntSet,
    ParamSpec,
    SpacerMap,
    builtin_spec,
    cylinder_measure,
    heights,
    measure,
    realize_stage,
    spec_from_json,
    spec_to_json,
    standardness_check,
    validate,
)
from rankone.spacers import stage_of
from conftest import spec_corpus


def test_realize_chacon3_stage2(chacon3):
    cf = realize_stage(chacon3, 2)
    assert cf.C == (0, 4, 9)
    assert cf.h == 13


def test_realize_odometer_stage3(odometer):
    cf = realize_stage(odometer, 3)
    assert cf.C == (0, 4)
    assert cf.h == 8


def test_realize_chacon2_stage1(chacon2):
    # cross-checked against the plain sumset realization
    cf = realize_stage(chacon2, 1)
    assert cf.C == (0, 1)
    assert cf.h == 3
    assert oracles.brute_stage_sets(chacon2, 1)[0] == (0, 1)


def test_realized_sets_match_oracle():
    for spec in spec_corpus(25, seed=7):
        oracle = oracles.brute_stage_sets(spec, 8)
        for n in range(1, 9):
            assert realize_stage(spec, n).C == oracle[n - 1]


def test_height_recurrence_invariant():
    for spec in spec_corpus(25, seed=8):
        hs = heights(spec, 10)
        for n in range(1, 11):
            st = spec.stage_map(n)
            assert hs[n] == st.r * hs[n - 1] + st.total


def test_translates_disjoint_and_contained():
    # conditions (II) + (III) by interval sweep
    for spec in spec_corpus(25, seed=9):
        hs = heights(spec, 8)
        for n in range(1, 9):
            cf = realize_stage(spec, n)
            spans = [(c, c + hs[n - 1]) for c in cf.C]
            for (a1, b1), (a2, b2) in zip(spans, spans[1:]):
                assert b1 <= a2
            assert spans[-1][1] <= hs[n]


def test_depth_exceeded_for_prefix_spec():
    spec = ParamSpec.of(prefix=[(2, (0, 1))])
    realize_stage(spec, 1)
    with pytest.raises(DepthExceeded):
        realize_stage(spec, 2)


def test_spacer_map_rejects_negative():
    with pytest.raises(ValueError):
        SpacerMap.of(2, (0, -1))


def test_spacer_map_rejects_single_cut():
    with pytest.raises(ValueError):
        SpacerMap.of(1, (0,))


def test_validate_clean_on_constructed_specs(chacon3):
    assert validate(chacon3, 10) == []


def test_measure_totals(chacon2, chacon3, odometer):
    assert measure(chacon2, 5).total == 2
    assert measure(chacon3, 5).total == Fraction(3, 2)
    assert measure(odometer, 5).total == 1


def test_measure_ratio_oracle(chacon2, chacon3):
    # phi_40 pins the closed-form limit
    for spec, total in ((chacon2, Fraction(2)), (chacon3, Fraction(3, 2))):
        phi40 = oracles.phi_ratio(spec, 40)
        assert abs(measure(spec, 5).total - phi40) <= total * Fraction(1, 2) ** 38


def test_measure_ratios_monotone_and_converging():
    for spec in spec_corpus(20, seed=10):
        rep = measure(spec, 12)
        assert all(a <= b for a, b in zip(rep.ratios, rep.ratios[1:]))
        # |phi_m - total| <= total * (1/prod_cycle_r)^periods
        P = 1
        for st in spec.cycle:
            P *= st.r
        q, c = spec.prefix_len, spec.cycle_len
        for m in range(q + c, 13):
            periods = (m - q) // c
            assert abs(rep.ratios[m - 1] - rep.total) <= rep.total * Fraction(1, P) ** periods


def test_cylinder_measure_examples(chacon3, odometer):
    assert cylinder_measure(odometer, 1, FiniteIntSet.of([0])) == Fraction(1, 2)
    assert cylinder_measure(chacon3, 2, FiniteIntSet.of([0, 4])) == Fraction(2, 9)
    assert cylinder_measure(chacon3, 0, FiniteIntSet.of([0])) == 1


def test_cylinder_measure_out_of_range(chacon3):
    with pytest.raises(OutOfRange):
        cylinder_measure(chacon3, 1, FiniteIntSet.of([0, 99]))


def test_standardness_examples(chacon2, odometer):
    # 0 in every C_n forces negative shifts out of the one-sided towers
    assert standardness_check(odometer, -1, 1, 8).holds_at is None
    r = standardness_check(chacon2, 1, 1, 8)
    assert r.holds_at == 2
    block = oracles.sumset(range(0, 3), realize_stage(chacon2, 2).C)
    assert all(0 <= 1 + x < heights(chacon2, 2)[2] for x in block)
    deep = standardness_check(chacon2, -3, 1, 12)
    h12 = heights(chacon2, 12)[12]
    assert deep.ratio >= 1 - Fraction(4, h12)


def test_standardness_ratio_matches_counting(chacon3):
    rep = standardness_check(chacon3, -2, 1, 5)
    levels = oracles.sumset(
        range(0, heights(chacon3, 1)[1]),
        *(realize_stage(chacon3, n).C for n in range(2, 6)),
    )
    h5 = heights(chacon3, 5)[5]
    inside = sum(1 for x in levels if 0 <= x - 2 < h5)
    assert rep.ratio == Fraction(inside, len(levels))


def test_stage_roundtrip():
    for spec in spec_corpus(40, seed=11):
        for n in range(1, 7):
            cf = realize_stage(spec, n)
            assert stage_of(cf) == spec.stage_map(n)


def test_spec_json_roundtrip(chacon3):
    specs = [chacon3, ParamSpec.of(prefix=[(2, (1, 0))], cycle=[(3, (0, 2, 1))], h0=2)]
    for spec in specs:
        assert spec_from_json(spec_to_json(spec)) == spec


def test_builtins():
    assert builtin_spec("chacon2").cycle == (SpacerMap.of(2, (0, 1)),)
    assert builtin_spec("odometer:3").cycle == (SpacerMap.of(3, (0, 0, 0)),)
    with pytest.raises(ValueError):
        builtin_spec("nope")
