"""Field arithmetic in Q(i, sqrt(d1), sqrt(d2))."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from leafhom.errors import ValidationError
from leafhom.scalars import NumberField, ceil_sqrt, is_square_free


@pytest.fixture(scope="module")
def field() -> NumberField:
    return NumberField((2, 3))


def random_scalar(field: NumberField, rng: random.Random):
    comps = {}
    for mask in range(field.dim):
        if rng.random() < 0.6:
            comps[mask] = Fraction(rng.randint(-4, 4), rng.randint(1, 4))
    return field.from_components(comps)


def test_square_free_validation():
    assert is_square_free(2) and is_square_free(6) and is_square_free(30)
    assert not is_square_free(4) and not is_square_free(12) and not is_square_free(1)
    with pytest.raises(ValidationError):
        NumberField((4,))
    with pytest.raises(ValidationError):
        NumberField((2, 3, 5))


def test_generator_squares(field):
    i = field.imag_unit()
    s2 = field.sqrt(2)
    s3 = field.sqrt(3)
    assert i * i == field.scalar(-1)
    assert s2 * s2 == field.scalar(2)
    assert s3 * s3 == field.scalar(3)
    assert (s2 * s3) * (s2 * s3) == field.scalar(6)


def test_field_axioms_on_random_triples(field):
    rng = random.Random(20240811)
    for _ in range(60):
        a = random_scalar(field, rng)
        b = random_scalar(field, rng)
        c = random_scalar(field, rng)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a + b == b + a
        assert a * b == b * a
        if a:
            assert a * a.inverse() == field.one


def test_inverse_of_nonzero(field):
    x = field.parse("1+sqrt2") * field.parse("2-1/3*i*sqrt3")
    assert x * x.inverse() == field.one
    with pytest.raises(ZeroDivisionError):
        field.zero.inverse()


def test_parse_and_render_round_trip(field):
    samples = [
        "0",
        "3/2",
        "-5",
        "1+2/3*sqrt2",
        "-1/2*i",
        "i*sqrt2",
        "1+sqrt2-sqrt3",
        "2/7*i*sqrt2*sqrt3",
    ]
    for text in samples:
        x = field.parse(text)
        assert field.parse(str(x)) == x


def test_parse_rejects_foreign_radical(field):
    with pytest.raises(ValidationError):
        field.parse("sqrt5")
    with pytest.raises(ValidationError):
        field.parse("1+bogus")


def test_mixed_field_operations_rejected():
    f1 = NumberField((2,))
    f2 = NumberField((3,))
    with pytest.raises(ValidationError):
        f1.sqrt(2) + f2.sqrt(3)


def test_exact_zero_detection(field):
    s2 = field.sqrt(2)
    x = (field.one + s2) * (field.one - s2) + field.one  # (1-2)+1 = 0
    assert x.is_zero()
    assert not (x + field.one).is_zero()


def test_galois_image_and_real_parts(field):
    x = field.parse("1+sqrt2+sqrt3")
    y = x.galois_image((-1, 1))
    assert y == field.parse("1-sqrt2+sqrt3")
    assert x.is_real()
    assert not (x + field.imag_unit()).is_real()


def test_abs_upper_bound_dominates(field):
    # |1 + sqrt2| <= 1 + ceil(sqrt2) = 3 and the bound is rational/exact
    x = field.parse("1+sqrt2")
    assert x.abs_upper_bound() == Fraction(3)
    assert ceil_sqrt(2) == 2 and ceil_sqrt(4) == 2 and ceil_sqrt(5) == 3


def test_denominator_lcm(field):
    x = field.parse("1/6+1/4*sqrt2")
    assert x.denominator_lcm() == 12


def test_power_and_division(field):
    s2 = field.sqrt(2)
    assert s2**4 == field.scalar(4)
    assert s2**-2 == field.scalar(Fraction(1, 2))
    assert (field.scalar(3) / s2) * s2 == field.scalar(3)
