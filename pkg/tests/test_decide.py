from fractions import Fraction
from random import Random

import pytest

import oracles
from conftest import random_bounded_spec, spec_corpus
from rankone.errors import NotCommensurate, OutOfRange, PreconditionRigid
from rankone.decide import (
    arithmetic_window,
    arithmetic_window_oracle,
    classify,
    commensurate_isomorphic,
    divisibility_scan,
    growing_telescope,
    inverse_isomorphic,
    inverse_params,
    is_bounded,
    is_rigid,
    is_totally_ergodic,
    longest_arithmetic_window,
    power_ergodic,
    telescope,
)
from rankone.params import ParamSpec, SpacerMap, heights, realize_stage


# --- telescoping ---------------------------------------------------------


def test_telescope_odometer_stride2(odometer):
    t = telescope(odometer, 2)
    assert t.cycle == (SpacerMap.of(4, (0, 0, 0, 0)),)
    assert heights(t, 3) == [1, 4, 16, 64]


def test_telescope_identity_is_noop(chacon3):
    assert telescope(chacon3, 1) == chacon3


def test_telescope_heights_sampled():
    rng = Random(5)
    for _ in range(15):
        spec = random_bounded_spec(rng)
        for stride in (2, 3):
            t = telescope(spec, stride)
            hs, hst = heights(spec, 4 * stride), heights(t, 4)
            for j in range(1, 5):
                assert hst[j] == hs[j * stride]
            for j in range(1, 5):
                assert realize_stage(t, j).C == oracles.block_sumset(
                    spec, (j - 1) * stride + 1, j * stride
                )


def test_telescope_list_form(chacon2):
    t = telescope(chacon2, [2, 3])
    assert realize_stage(t, 1).C == oracles.block_sumset(chacon2, 1, 2)
    assert realize_stage(t, 2).C == realize_stage(chacon2, 3).C


def test_telescope_preserves_boundedness():
    rng = Random(6)
    for _ in range(10):
        spec = random_bounded_spec(rng)
        t = telescope(spec, 3)
        assert is_bounded(t).value == "yes"


def test_growing_telescope_cut_counts(odometer):
    t = growing_telescope(odometer, 5)
    assert [st.r for st in t.prefix] == [2, 4, 8, 16, 32]


# --- boundedness ---------------------------------------------------------


def test_bounded_chacon2(chacon2):
    v = is_bounded(chacon2)
    assert (v.value, v.certificate["R"], v.certificate["K"]) == ("yes", 2, 1)


def test_bounded_odometer(odometer):
    v = is_bounded(odometer)
    assert (v.value, v.certificate["R"], v.certificate["K"]) == ("yes", 2, 0)


def test_bounded_growing_spacer_prefix():
    stages = [(2, (0, n)) for n in range(1, 9)]
    spec = ParamSpec.of(prefix=stages)
    v = is_bounded(spec)
    assert v.value == "no"
    assert v.certificate["horizon"] == 8


# --- rigidity ------------------------------------------------------------


def test_rigid_examples(chacon2, odometer):
    assert is_rigid(odometer).value == "yes"
    assert is_rigid(odometer).certificate["interior_constant"] == 0
    assert is_rigid(chacon2).value == "no"
    spec = ParamSpec.of(cycle=[(2, (1, 0))])
    v = is_rigid(spec)
    assert v.value == "yes" and v.certificate["interior_constant"] == 1
    assert oracles.is_arithmetic(oracles.block_sumset(spec, 1, 2))


def test_arithmetic_window_examples(chacon2, odometer):
    assert arithmetic_window(odometer, 1, 5)
    assert not arithmetic_window(chacon2, 1, 2)
    # {0, h_0, 2h_0 + 1, 3h_0 + 1} with h_0 = 1
    assert oracles.block_sumset(chacon2, 1, 2) == (0, 1, 3, 4)
    assert not oracles.is_arithmetic((0, 1, 3, 4))


def test_window_recurrence_agrees_with_oracles():
    for spec in spec_corpus(60, seed=1):
        for n in range(1, spec.prefix_len + spec.cycle_len + 1):
            for m in range(n, n + 7):
                fast = arithmetic_window(spec, n, m)
                assert fast == arithmetic_window_oracle(spec, n, m)
                explicit = oracles.window_is_ap(spec, n, m)
                if explicit is not None:
                    assert fast == explicit


def test_subwindow_closure():
    for spec in spec_corpus(40, seed=2):
        for n in range(1, 4):
            for m in range(n, n + 6):
                if arithmetic_window(spec, n, m):
                    for j in range(n, m + 1):
                        assert arithmetic_window(spec, n, j)


def test_rigid_no_certificate_bounds_windows():
    for spec in spec_corpus(60, seed=3):
        v = is_rigid(spec)
        if v.value == "no":
            bound = v.certificate["window_bound"]
            assert v.certificate["longest_window"] < bound
            assert longest_arithmetic_window(spec, 3 * bound) < bound
        else:
            assert arithmetic_window(spec, spec.prefix_len + 1, spec.prefix_len + 12)


# --- total ergodicity and powers ----------------------------------------


def test_totally_ergodic_examples(chacon2, chacon3, odometer):
    assert is_totally_ergodic(chacon2).value == "yes"
    assert is_totally_ergodic(chacon3).value == "yes"
    v = is_totally_ergodic(odometer)
    assert v.value == "no" and v.certificate["divisor"] == 2


def test_totally_ergodic_agrees_with_scan():
    for spec in spec_corpus(60, seed=4):
        v = is_totally_ergodic(spec)
        if v.value == "no":
            d = v.certificate["divisor"]
            assert oracles.eventually_all_divisible(spec, d)
        else:
            for d in range(2, 51):
                assert not oracles.eventually_all_divisible(spec, d)


def test_power_ergodic_examples(chacon2, odometer):
    assert power_ergodic(odometer, 1).value == "yes"
    assert power_ergodic(odometer, 2).value == "no"
    assert power_ergodic(odometer, 3).value == "yes"
    assert not oracles.eventually_all_divisible(odometer, 3)
    assert power_ergodic(chacon2, 6).value == "yes"


def test_divisibility_scan_certifies(odometer):
    last, certified = divisibility_scan(odometer, 2, 30)
    assert last == 1 and certified  # C_1 = {0, 1}; all later stages even


# --- inverse -------------------------------------------------------------


def test_inverse_params_examples(chacon2, chacon3):
    inv = inverse_params(chacon3, 3)
    assert inv[1].C == (0, 4, 9) and inv[1].C_star == (0, 5, 9)
    assert oracles.reflect((0, 4, 9)) == (0, 5, 9)
    inv2 = inverse_params(chacon2, 2)
    assert inv2[1].C == inv2[1].C_star == (0, 3)
    # F* is the reflected interval shifted by the running max-sum
    hs = heights(chacon3, 2)
    assert inv[1].F_star == (3 + 9 - (hs[2] - 1), 3 + 9)


def test_inverse_isomorphic_chacon3(chacon3):
    v = inverse_isomorphic(chacon3)
    assert v.value == "no" and v.certificate["rider"] == "disjoint"


def test_inverse_isomorphic_asymmetric_spacers():
    spec = ParamSpec.of(cycle=[(3, (0, 1, 1))])
    C = realize_stage(spec, 2).C
    assert oracles.reflect(C) != C
    assert inverse_isomorphic(spec).value == "no"


def test_inverse_isomorphic_rigid_precondition():
    spec = ParamSpec.of(cycle=[(3, (1, 1, 0))])
    C = realize_stage(spec, 2).C
    assert oracles.reflect(C) == C
    assert is_rigid(spec).value == "yes"
    with pytest.raises(PreconditionRigid):
        inverse_isomorphic(spec)


def test_inverse_isomorphic_symmetric_nonrigid():
    spec = ParamSpec.of(cycle=[(3, (1, 1, 2))])
    assert is_rigid(spec).value == "no"
    for n in range(1, 6):
        C = realize_stage(spec, n).C
        assert oracles.reflect(C) == C
    assert inverse_isomorphic(spec).value == "yes"


# --- commensurate isomorphism -------------------------------------------


def test_commensurate_self(chacon3):
    v = commensurate_isomorphic(chacon3, chacon3)
    assert v.value == "yes" and v.certificate["shift"] == 0


def test_commensurate_prefix_perturbation(chacon3):
    # same cycle, perturbed prefix with re-matching heights: C agrees beyond it
    pert = ParamSpec.of(prefix=[(3, (1, 0, 0)), (3, (0, 1, 0))], cycle=[(3, (0, 1, 0))])
    assert heights(pert, 3)[1:] == heights(chacon3, 3)[1:]
    v = commensurate_isomorphic(chacon3, pert)
    assert v.value == "yes"
    n = v.certificate["from_stage"]
    assert realize_stage(chacon3, n).C == realize_stage(pert, n).C
    # and a genuinely diverging cycle is a persistent mismatch
    other = ParamSpec.of(cycle=[(3, (1, 0, 0))])
    v2 = commensurate_isomorphic(chacon3, other)
    assert v2.value == "no"
    assert v2.certificate["rider"] == "disjoint"
    m = v2.certificate["first_mismatch"]
    assert realize_stage(chacon3, m).C != realize_stage(other, m).C


def test_commensurate_requires_matching_heights(chacon2, chacon3):
    with pytest.raises(NotCommensurate):
        commensurate_isomorphic(chacon2, chacon3)


def test_commensurate_alignment_shift(chacon3):
    # dropping a leading stage is absorbed by the alignment shift
    shifted = ParamSpec.of(
        prefix=[], cycle=[(3, (0, 1, 0))], h0=heights(chacon3, 1)[1]
    )
    v = commensurate_isomorphic(chacon3, shifted)
    assert v.value == "yes" and v.certificate["shift"] == -1


def test_commensurate_both_rigid_rejected(odometer):
    with pytest.raises(PreconditionRigid):
        commensurate_isomorphic(odometer, odometer)


# --- classification ------------------------------------------------------


def test_classify_builtins(chacon2, chacon3, odometer):
    assert classify(chacon2).classification == "MSJ"
    assert classify(chacon3).classification == "MSJ"
    rep = classify(odometer)
    assert rep.classification == "OdometerBoundedType"
    assert rep.details["odometer_base"] == {"leading": 1, "cycle": [2]}


def test_classify_finite_eigenvalues():
    # interiors constant would be rigid; break rigidity but keep divisibility
    spec = ParamSpec.of(cycle=[(3, (0, 2, 4)), (2, (0, 2))])
    rigid = is_rigid(spec)
    te = is_totally_ergodic(spec)
    rep = classify(spec)
    if rigid.value == "no" and te.value == "no":
        assert rep.classification == "FiniteEigenvaluesNonRigid"
        assert rep.details["eigenvalue_order_bound"] >= 1


def test_classify_case_split_total():
    for spec in spec_corpus(80, seed=5):
        rep = classify(spec)
        rigid, te = rep.rigid.value, rep.totally_ergodic.value
        assert rigid != "unknown" and te != "unknown"
        if rigid == "no" and te == "yes":
            assert rep.classification == "MSJ"
        elif rigid == "no":
            assert rep.classification == "FiniteEigenvaluesNonRigid"
        else:
            assert rep.classification == "OdometerBoundedType"


def test_telescoping_invariance_smoke(chacon3, odometer):
    for spec in (chacon3, odometer):
        base = classify(spec)
        for stride in (2, 3):
            t = telescope(spec, stride)
            rep = classify(t)
            assert rep.classification == base.classification
            assert rep.rigid.value == base.rigid.value
            assert rep.totally_ergodic.value == base.totally_ergodic.value
