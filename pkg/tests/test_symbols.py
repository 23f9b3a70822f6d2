"""Symbol composition, traces, derivations, cocycles."""

from __future__ import annotations

import random

import pytest

from leafhom.errors import InsufficientTruncationError, ValidationError
from leafhom.models import KroneckerTorus
from leafhom.scalars import NumberField
from leafhom.symbols import (
    Derivation,
    TruncatedSymbol,
    apply_derivation,
    coboundary_evaluate,
    cocycle_evaluate,
    commutator,
    compose,
    derivation_set,
    random_symbol,
    residue_trace,
    verify_traces_and_collapse,
)


@pytest.fixture(scope="module")
def field():
    return NumberField((2,))


@pytest.fixture(scope="module")
def torus(field):
    return KroneckerTorus(field, ["1", "sqrt2"])


def lam(field, mode):
    return field.scalar(mode[0]) + field.parse("sqrt2") * mode[1]


# -- composition ----------------------------------------------------------------


def test_unit_law(torus):
    one = TruncatedSymbol.radial_power(torus, 0)
    b = TruncatedSymbol.mode(torus, (1, -1), order=2)
    ab = compose(one, b, 4)
    ba = compose(b, one, 4)
    assert ab.agrees_with(b, ab.floor)
    assert ba.agrees_with(b, ba.floor)


def test_coordinate_against_mode(torus, field):
    xi = TruncatedSymbol.coordinate_power(torus, 1)
    m = (1, 0)
    em = TruncatedSymbol.mode(torus, m)
    comm = commutator(xi, em, 4)
    expected = TruncatedSymbol.mode(torus, m).scale(lam(field, m))
    assert comm.agrees_with(expected, comm.floor)


def test_x_independent_symbols_compose_trivially(torus):
    a = TruncatedSymbol.radial_power(torus, -1)
    ab = compose(a, a, 2)
    expected = TruncatedSymbol.radial_power(torus, -2)
    assert ab.agrees_with(expected, ab.floor)


def test_order_additivity_and_commutator_drop(torus):
    # each side is a graded integral domain: top orders add side by side
    def side_order(x, s):
        return max(x.sides[s]) if x.sides[s] else None

    rng = random.Random(3)
    for _ in range(15):
        a = random_symbol(torus, rng)
        b = random_symbol(torus, rng)
        ab = compose(a, b, 8)
        comm = commutator(a, b, 8)
        for s in (1, -1):
            oa, ob = side_order(a, s), side_order(b, s)
            if oa is None or ob is None:
                assert side_order(ab, s) is None
                continue
            assert side_order(ab, s) == oa + ob
            oc = side_order(comm, s)
            if oc is not None:
                assert oc <= oa + ob - 1


def test_associativity_above_watermark(torus):
    rng = random.Random(9)
    for _ in range(10):
        a, b, c = (random_symbol(torus, rng, orders=(-2, 1)) for _ in range(3))
        if a.is_zero() or b.is_zero() or c.is_zero():
            continue
        left = compose(compose(a, b, 7), c, 7)
        right = compose(a, compose(b, c, 7), 7)
        level = max(
            x for x in (left.floor, right.floor) if x is not None
        )
        assert left.agrees_with(right, level)


def test_filtration_property(torus):
    # order(a o b) = order(a) + order(b) realizes F_m o F_m' into F_{m+m'}
    a = TruncatedSymbol.mode(torus, (1, 0), order=2)
    b = TruncatedSymbol.mode(torus, (0, 1), order=-1)
    assert compose(a, b, 5).order() == 1


def test_sides_never_mix(torus):
    plus = TruncatedSymbol.mode(torus, (1, 0), order=1, side=1)
    minus = TruncatedSymbol.mode(torus, (0, 1), order=1, side=-1)
    prod = compose(plus, minus, 4)
    assert prod.is_zero()
    both = compose(plus + minus, plus + minus, 4)
    assert all(j >= -4 for j in both.sides[1])
    der = apply_derivation(Derivation("radial"), plus, depth=3)
    assert not der.sides[-1]


def test_depth_validation(torus):
    a = TruncatedSymbol.radial_power(torus, 0)
    with pytest.raises(ValidationError):
        compose(a, a, -1)


# -- residue traces -----------------------------------------------------------------


def test_trace_of_radial_inverse(torus, field):
    a = TruncatedSymbol.radial_power(torus, -1)
    assert residue_trace(a, 1) == field.one
    assert residue_trace(a, -1) == field.one


def test_trace_ignores_other_orders_and_modes(torus, field):
    assert residue_trace(TruncatedSymbol.mode(torus, (1, 0), order=0), 1) == field.zero
    assert residue_trace(TruncatedSymbol.mode(torus, (1, 0), order=-1), 1) == field.zero


def test_trace_below_watermark_rejected(torus):
    a = TruncatedSymbol.radial_power(torus, 2)
    b = TruncatedSymbol.radial_power(torus, 2)
    shallow = compose(a, b, 1)  # exact only above order 3
    with pytest.raises(InsufficientTruncationError):
        residue_trace(shallow, 1)


def test_trace_kills_specific_commutator(torus, field):
    # [xi, e_m |xi|^-1] has no zero-mode order -1 part
    xi = TruncatedSymbol.coordinate_power(torus, 1)
    b = TruncatedSymbol.mode(torus, (1, 0), order=-1)
    comm = commutator(xi, b, 5)
    assert residue_trace(comm, 1) == field.zero
    assert residue_trace(comm, -1) == field.zero


def test_trace_kills_commutators(torus, field):
    rng = random.Random(41)
    checked = 0
    while checked < 30:
        a = random_symbol(torus, rng)
        b = random_symbol(torus, rng)
        if a.is_zero() or b.is_zero():
            continue
        depth = a.order() + b.order() + 2
        comm = commutator(a, b, max(depth, 5))
        checked += 1
        assert residue_trace(comm, 1) == field.zero
        assert residue_trace(comm, -1) == field.zero


# -- derivations ---------------------------------------------------------------------


def test_leafwise_derivation(torus, field):
    m = (2, -1)
    out = apply_derivation(Derivation("leafwise"), TruncatedSymbol.mode(torus, m))
    assert out.coefficient(1, 0, m) == lam(field, m)


def test_transverse_derivation(torus, field):
    m = (2, 3)
    out = apply_derivation(Derivation("transverse", 1), TruncatedSymbol.mode(torus, m))
    assert out.coefficient(1, 0, m) == field.scalar(3)
    assert out.coefficient(-1, 0, m) == field.scalar(3)


def test_radial_derivation_expansion(torus, field):
    m = (1, 0)
    out = apply_derivation(Derivation("radial"), TruncatedSymbol.mode(torus, m), depth=2)
    c = lam(field, m)
    # + side carries xi^-1 = |xi|^-1: coefficients c and -c^2/2
    assert out.coefficient(1, -1, m) == c
    assert out.coefficient(1, -2, m) == -(c * c) * field.scalar(1) / 2
    # - side: xi^-1 = -|xi|^-1 but xi^-2 = |xi|^-2
    assert out.coefficient(-1, -1, m) == -c
    assert out.coefficient(-1, -2, m) == -(c * c) / 2


def test_derivations_satisfy_leibniz(torus):
    rng = random.Random(11)
    for d in derivation_set(torus):
        for _ in range(6):
            a = random_symbol(torus, rng, orders=(-1, 1))
            b = random_symbol(torus, rng, orders=(-1, 1))
            if a.is_zero() or b.is_zero():
                continue
            lhs = apply_derivation(d, compose(a, b, 9), depth=9)
            rhs = compose(apply_derivation(d, a, 9), b, 9) + compose(
                a, apply_derivation(d, b, 9), 9
            )
            level = max(x for x in (lhs.floor, rhs.floor, -6) if x is not None)
            assert lhs.agrees_with(rhs, level), d


def test_derivations_commute_pairwise(torus):
    rng = random.Random(13)
    ds = derivation_set(torus)
    for i, d1 in enumerate(ds):
        for d2 in ds[i + 1 :]:
            for _ in range(4):
                a = random_symbol(torus, rng, orders=(-1, 1))
                if a.is_zero():
                    continue
                lhs = apply_derivation(d1, apply_derivation(d2, a, 8), 8)
                rhs = apply_derivation(d2, apply_derivation(d1, a, 8), 8)
                level = max(x for x in (lhs.floor, rhs.floor, -5) if x is not None)
                assert lhs.agrees_with(rhs, level), (d1, d2)


# -- cocycles -----------------------------------------------------------------------


def test_empty_cocycle_is_the_trace(torus, field):
    value = cocycle_evaluate([], 1, [TruncatedSymbol.radial_power(torus, -1)])
    assert value == field.one


def test_one_step_cocycle(torus, field):
    m = (1, 0)
    a0 = TruncatedSymbol.mode(torus, tuple(-x for x in m), order=-1)
    a1 = TruncatedSymbol.mode(torus, m)
    value = cocycle_evaluate([Derivation("leafwise")], 1, [a0, a1], depth=6)
    assert value == lam(field, m)


def test_cocycle_antisymmetry_under_slot_swap(torus, field):
    d1, d2 = Derivation("transverse", 1), Derivation("leafwise")
    rng = random.Random(29)
    for _ in range(5):
        args = [random_symbol(torus, rng, orders=(-1, 1)) for _ in range(3)]
        if any(a.is_zero() for a in args):
            continue
        v12 = cocycle_evaluate([d1, d2], 1, args, depth=10)
        v21 = cocycle_evaluate([d2, d1], 1, args, depth=10)
        assert v12 == -v21


def test_repeated_derivations_rejected(torus):
    d = Derivation("leafwise")
    args = [TruncatedSymbol.radial_power(torus, -1)] * 3
    with pytest.raises(ValidationError):
        cocycle_evaluate([d, d], 1, args)


def test_coboundary_of_trace_is_trace_of_commutator(torus, field):
    rng = random.Random(37)
    for _ in range(5):
        a = random_symbol(torus, rng, orders=(-2, 1))
        b = random_symbol(torus, rng, orders=(-2, 1))
        if a.is_zero() or b.is_zero():
            continue
        assert coboundary_evaluate([], 1, [a, b], depth=10) == field.zero


# -- the full suite -------------------------------------------------------------------


def test_trace_suite_certifies_collapse(torus):
    report = verify_traces_and_collapse(torus, trials=25, depth=6, seed=7)
    assert report.passed
    assert report.trace_property_holds
    assert report.coboundary_levels == {0: True, 1: True, 2: True}
    assert report.independence == {0: (2, 2), 1: (6, 6), 2: (6, 6)}
    assert report.collapse_certified
    assert report.predicted_dims == [2, 6, 6, 2]


def test_trace_suite_rejects_resonant(field):
    resonant = KroneckerTorus(field, ["1", "2"])
    with pytest.raises(ValidationError):
        verify_traces_and_collapse(resonant, trials=1)


def test_two_sided_trace_independence(torus, field):
    plus = TruncatedSymbol.radial_power(torus, -1, side=1)
    minus = TruncatedSymbol.radial_power(torus, -1, side=-1)
    assert residue_trace(plus, 1) == field.one and residue_trace(plus, -1) == field.zero
    assert residue_trace(minus, -1) == field.one and residue_trace(minus, 1) == field.zero
