from random import Random

import pytest

import oracles
from conftest import random_bounded_spec
from rankone.decide import telescope
from rankone.errors import NotCommensurate, NotIndependent, StandardnessUnverified
from rankone.params import ParamSpec, heights, realize_stage
from rankone.polyiso import (
    IntervalF,
    SetPolynomial,
    TopoWitness,
    commensurate_topo_iso,
    identity_witness,
    interval_standardness,
    pad_interval_supports,
    poly_mul_checked,
    topo_inverse_iso,
    topo_iso_search,
    verify_witness,
)


# --- 0-1 polynomials ------------------------------------------------------


def test_poly_mul_examples():
    p = poly_mul_checked(SetPolynomial.of([0, 1]), SetPolynomial.of([0, 5]))
    assert p.exponents == (0, 1, 5, 6)
    assert poly_mul_checked(SetPolynomial.of([0, 2, 7]), SetPolynomial.of([0])).exponents == (0, 2, 7)
    with pytest.raises(NotIndependent) as exc:
        poly_mul_checked(SetPolynomial.of([0, 1]), SetPolynomial.of([0, 1]))
    assert exc.value.degree == 1


def test_poly_mul_matches_convolution():
    rng = Random(12)
    for _ in range(60):
        a = sorted(rng.sample(range(30), rng.randint(1, 5)))
        b = sorted(rng.sample(range(30), rng.randint(1, 5)))
        conv = oracles.convolve_01(a, b)
        if all(v == 1 for v in conv.values()):
            got = poly_mul_checked(SetPolynomial.of(a), SetPolynomial.of(b))
            assert got.exponents == tuple(sorted(conv))
        else:
            with pytest.raises(NotIndependent):
                poly_mul_checked(SetPolynomial.of(a), SetPolynomial.of(b))


def test_poly_mul_on_spec_windows():
    # unique representation: C_n against the rest of the window never overlaps
    rng = Random(13)
    for _ in range(30):
        spec = random_bounded_spec(rng)
        n = rng.randint(1, 3)
        m = rng.randint(n + 1, n + 4)
        head = SetPolynomial.of(realize_stage(spec, n).C)
        tail = SetPolynomial.of(oracles.block_sumset(spec, n + 1, m))
        assert poly_mul_checked(head, tail).exponents == oracles.block_sumset(spec, n, m)


# --- supports and standardness -------------------------------------------


def test_plain_supports_fail_negative_shifts(chacon3):
    sup = pad_interval_supports(chacon3, 6)
    panel = interval_standardness(chacon3, sup, g_range=1, depth=6)
    assert not panel.ok  # adapted specs leave no padding slack from h0 = 1


def test_padded_supports_grow_for_chacon2(chacon2):
    sup = pad_interval_supports(chacon2, 12)
    assert sup[12].lo < sup[4].lo <= 0  # negative side keeps growing
    panel = interval_standardness(chacon2, sup, g_range=1, depth=12, n_max=4)
    assert panel.ok


def test_interval_f_invariant():
    with pytest.raises(ValueError):
        IntervalF(1, 5)


# --- the tail-sumset search ----------------------------------------------


def test_search_odometer_vs_telescoping(odometer):
    tel = telescope(odometer, 2)
    v = topo_iso_search(odometer, tel, horizon=8, depth=10)
    assert v.value == "yes"
    assert v.certificate["r"] == 1 and v.certificate["R"] == [0]
    w = TopoWitness.from_json(v.certificate["witness"])
    assert verify_witness(odometer, tel, w)


def test_search_symmetry_on_yes_instance(odometer):
    tel = telescope(odometer, 2)
    v = topo_iso_search(tel, odometer, horizon=8, depth=10)
    assert v.value == "yes"
    w = TopoWitness.from_json(v.certificate["witness"])
    assert verify_witness(tel, odometer, w)


def test_search_reflexive():
    rng = Random(14)
    specs = [random_bounded_spec(rng) for _ in range(6)]
    for spec in specs:
        v = topo_iso_search(spec, spec, horizon=4, depth=8)
        assert v.value == "yes"
        assert v.certificate["r"] == 1 and v.certificate["R"] == [0]


def test_search_absorbed_prefix(chacon3):
    tail1 = ParamSpec(prefix=(), cycle=chacon3.cycle, h0=heights(chacon3, 1)[1])
    v = topo_iso_search(chacon3, tail1, horizon=4, depth=8)
    assert v.value == "yes"
    assert tuple(v.certificate["R"]) == realize_stage(chacon3, 1).C


def test_search_chacon2_vs_chacon3_no(chacon2, chacon3):
    v = topo_iso_search(chacon2, chacon3, horizon=6, depth=8)
    assert v.value == "no"
    degrees = v.certificate["mismatch_degrees"]
    assert set(degrees) == set(range(1, 7))
    h3 = min(heights(chacon2, 3)[3], heights(chacon3, 3)[3])
    assert min(degrees.values()) < h3
    assert max(degrees.values()) < v.certificate["safe_degree"]


def test_no_mismatch_is_final(chacon2, chacon3):
    # a deeper truncation reports the same mismatch degrees
    shallow = topo_iso_search(chacon2, chacon3, horizon=4, depth=7)
    deep = topo_iso_search(chacon2, chacon3, horizon=4, depth=9)
    assert shallow.certificate["mismatch_degrees"] == deep.certificate["mismatch_degrees"]


# --- witness verification --------------------------------------------------


def test_identity_witness_verifies(chacon3, odometer):
    for spec in (chacon3, odometer):
        w = identity_witness(spec, [(1, 2), (3, 4)])
        assert verify_witness(spec, spec, w)


def test_perturbed_witness_fails(odometer):
    w = identity_witness(odometer, [(1, 2), (3, 4)])
    bumped = tuple(tuple(x + 1 for x in a) if i == 0 else a for i, a in enumerate(w.A))
    assert not verify_witness(odometer, odometer, TopoWitness(w.l, w.lp, bumped, w.B))


def test_witness_json_roundtrip(odometer):
    w = identity_witness(odometer, [(1, 2), (3, 4)])
    assert TopoWitness.from_json(w.to_json()) == w


# --- commensurate topological isomorphism ----------------------------------


def test_topo_commensurate_self(chacon3):
    v = commensurate_topo_iso(chacon3, chacon3)
    assert v.value == "yes" and v.certificate["M"] >= 0


def test_topo_commensurate_reconverging_prefix(chacon3):
    pert = ParamSpec.of(prefix=[(3, (1, 0, 0)), (3, (0, 1, 0))], cycle=[(3, (0, 1, 0))])
    v = commensurate_topo_iso(chacon3, pert)
    assert v.value == "yes"


def test_topo_commensurate_differing_cycles(chacon3):
    other = ParamSpec.of(cycle=[(3, (1, 0, 0))])
    assert heights(other, 4) == heights(chacon3, 4)
    v = commensurate_topo_iso(chacon3, other)
    assert v.value == "no"


def test_topo_commensurate_not_commensurate(chacon2, chacon3):
    with pytest.raises(NotCommensurate):
        commensurate_topo_iso(chacon2, chacon3)


# --- inverse over interval supports ----------------------------------------


def tail_spec(spec: ParamSpec, n0: int) -> ParamSpec:
    """Start the presentation at stage n0+1 (same action, taller base)."""
    return ParamSpec(prefix=(), cycle=spec.cycle, h0=heights(spec, n0)[n0])


def test_topo_inverse_chacon3_variant(chacon3):
    variant = tail_spec(chacon3, 2)  # h0 = 13 leaves padding slack
    sup = pad_interval_supports(variant, 8)
    assert interval_standardness(variant, sup, 1, 8).ok
    v = topo_inverse_iso(variant, depth=8, supports=sup, g_range=1)
    assert v.value == "no"
    C = tuple(v.certificate["C"])
    assert tuple(v.certificate["C_star"]) == oracles.reflect(C) != C


def test_topo_inverse_requires_standardness(chacon3):
    with pytest.raises(StandardnessUnverified):
        topo_inverse_iso(chacon3, depth=6, g_range=1)


def test_topo_inverse_symmetric_yes():
    spec = tail_spec(ParamSpec.of(cycle=[(2, (1, 1))]), 3)
    v = topo_inverse_iso(spec, depth=8, g_range=1)
    assert v.value == "yes"
    for n in range(1, 5):
        C = realize_stage(spec, n).C
        assert oracles.reflect(C) == C
