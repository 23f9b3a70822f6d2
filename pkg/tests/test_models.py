"""Model construction, validation, wedge algebra, gradings."""

from __future__ import annotations

import random

import pytest

from leafhom.errors import SpecParseError, UnsupportedModelError, ValidationError
from leafhom.models import (
    ConicDualModel,
    CosphereCircleModel,
    FormMonomial,
    KroneckerTorus,
    LieFrameModel,
    ModeWindow,
    make_model,
    merge_ext,
)
from leafhom.scalars import NumberField


@pytest.fixture(scope="module")
def field():
    return NumberField((2,))


@pytest.fixture(scope="module")
def torus(field):
    return KroneckerTorus(field, ["1", "sqrt2"])


def so3_model(field):
    one = field.one
    return LieFrameModel.create(
        field,
        3,
        {(0, 1): {2: one}, (1, 2): {0: one}, (0, 2): {1: -one}},
        {2},
    )


def heisenberg_model(field):
    return LieFrameModel.create(field, 3, {(0, 1): {2: field.one}}, {2})


# -- construction and validation -------------------------------------------


def test_kronecker_nonresonant_lattice(torus):
    # 1 and sqrt2 are Q-linearly independent: m1 + m2*sqrt2 = 0 forces m = 0
    assert torus.resonance_basis == []
    assert not torus.resonant


def test_kronecker_resonant_lattice(field):
    # (m1 - m3) + (m2 + m3) sqrt2 = 0 exactly on the (1, -1, 1) line
    model = KroneckerTorus(field, ["1", "sqrt2", "sqrt2-1"])
    assert model.resonance_basis == [(1, -1, 1)]
    assert model.resonant


def test_rational_slope_resonance(field):
    model = KroneckerTorus(field, ["1", "2"])
    assert len(model.resonance_basis) == 1
    (m,) = model.resonance_basis
    assert m[0] * 1 + m[1] * 2 == 0 and m != (0, 0)


def test_alpha_validation(field):
    with pytest.raises(ValidationError):
        KroneckerTorus(field, ["0", "0"])
    with pytest.raises(ValidationError):
        KroneckerTorus(field, ["0", "1"])
    with pytest.raises(ValidationError):
        KroneckerTorus(field, ["i", "1"])


def test_alpha_normalization(field):
    model = KroneckerTorus(field, ["2", "sqrt2"])
    assert model.alpha[0] == field.one
    assert model.alpha[1] == field.parse("1/2*sqrt2")


def test_jacobi_validation_error(field):
    one = field.one
    # [e1,e2]=e3 together with [e1,e3]=e1 violates Jacobi on (e1,e2,e3)
    with pytest.raises(ValidationError):
        LieFrameModel.create(
            field,
            3,
            {(0, 1): {2: one}, (0, 2): {0: one}},
            {2},
        )


def test_subalgebra_validation_error(field):
    one = field.one
    # leaf = {0, 1} but [e1, e2] = e3 leaves the would-be leaf
    with pytest.raises(ValidationError):
        LieFrameModel.create(field, 3, {(0, 1): {2: one}}, {0, 1})


def test_structure_tensor_nonzero_for_heisenberg(field):
    model = heisenberg_model(field)
    tensor = model.structure_tensor()
    assert (0, 1) in tensor and tensor[(0, 1)][2] == field.one


def test_make_model_families(field):
    spec = {"family": "kronecker_torus", "alpha": ["1", "sqrt2"]}
    model = make_model(spec)
    assert isinstance(model, KroneckerTorus)
    assert model.field.radicals == (2,)

    conic = make_model({"family": "conic_dual", "base": spec})
    assert isinstance(conic, ConicDualModel)

    cos = make_model({"family": "cosphere_circle", "base": spec})
    assert isinstance(cos, CosphereCircleModel)
    assert cos.components == ("+", "-")

    lie = make_model(
        {
            "family": "lie_frame",
            "n": 3,
            "brackets": [[1, 2, [[3, "1"]]]],
            "leaf": [3],
        }
    )
    assert isinstance(lie, LieFrameModel)

    with pytest.raises(SpecParseError):
        make_model({"family": "nonsense"})
    with pytest.raises(SpecParseError):
        make_model({"alpha": ["1"]})
    with pytest.raises(ValidationError):
        make_model({"family": "kronecker_torus", "alpha": ["1", "sqrt12"]})


# -- exterior algebra --------------------------------------------------------


def test_merge_ext_signs():
    assert merge_ext((0,), (1,)) == (1, (0, 1))
    assert merge_ext((1,), (0,)) == (-1, (0, 1))
    assert merge_ext((0,), (0,)) is None
    assert merge_ext((0, 2), (1,)) == (-1, (0, 1, 2))


def test_wedge_square_and_anticommutativity(torus):
    theta = torus.gen_form("theta")
    eta = torus.gen_form("eta1")
    assert theta.wedge(theta).is_zero()
    assert theta.wedge(eta) == -(eta.wedge(theta))


def test_wedge_of_modes(torus):
    a = torus.monomial_form(1, mode=(1, 0), ext=("theta",))
    b = torus.monomial_form(1, mode=(0, 2), ext=("eta1",))
    prod = a.wedge(b)
    assert prod == torus.monomial_form(1, mode=(1, 2), ext=("theta", "eta1"))


def test_wedge_anticommutes_on_generator_pairs(torus):
    gens = [torus.gen_form(nm) for nm in torus.gen_names]
    for a in gens:
        for b in gens:
            assert a.wedge(b) == -(b.wedge(a))


def test_odd_degree_squares_vanish(field):
    model = KroneckerTorus(field, ["1", "sqrt2", "1/3"])
    rng = random.Random(5)
    gens = [model.gen_form(nm) for nm in model.gen_names]
    # random odd-degree forms square to zero
    for _ in range(10):
        form = model.zero_form()
        for g in gens:
            form = form + g.scale(rng.randint(-3, 3))
        assert form.wedge(form).is_zero()


def test_bidegree_projection_partition(torus):
    theta = torus.gen_form("theta")
    eta = torus.gen_form("eta1")
    te = theta.wedge(eta)
    assert te.bidegree_project(1, 1) == te
    assert te.bidegree_project(2, 0).is_zero()
    mixed = theta + eta
    assert mixed.bidegree_project(1, 0) == theta
    assert mixed.bidegree_project(0, 1) == eta
    recon = torus.zero_form()
    for r in range(0, 2):
        for s in range(0, 2):
            recon = recon + mixed.bidegree_project(r, s)
    assert recon == mixed


def test_homogeneity_decompose(field):
    conic = ConicDualModel(KroneckerTorus(field, ["1", "sqrt2"]))
    xi2_theta = conic.monomial_form(1, xi=2, ext=("theta",))
    assert list(xi2_theta.homogeneity_decompose()) == [2]
    xi_dxi = conic.monomial_form(1, xi=1, ext=("dxi",))
    assert list(xi_dxi.homogeneity_decompose()) == [2]
    mixed = conic.monomial_form(1, xi=1, ext=("theta",)) + conic.monomial_form(
        1, xi=0, ext=("dxi",)
    )
    parts = mixed.homogeneity_decompose()
    assert list(parts) == [1] and parts[1] == mixed


def test_homogeneity_requires_conic(torus):
    with pytest.raises(UnsupportedModelError):
        torus.gen_form("theta").homogeneity_decompose()


def test_homogeneity_additive_under_wedge(field):
    conic = ConicDualModel(KroneckerTorus(field, ["1", "sqrt2"]))
    a = conic.monomial_form(1, xi=2, ext=("theta",))
    b = conic.monomial_form(1, xi=-1, ext=("dxi",))
    prod = a.wedge(b)
    assert list(prod.homogeneity_decompose()) == [2 + 0]


def test_component_separation(field):
    conic = ConicDualModel(KroneckerTorus(field, ["1", "sqrt2"]))
    plus = conic.monomial_form(1, comp=0)
    minus = conic.monomial_form(1, comp=1)
    assert plus.wedge(minus).is_zero()
    both = conic.monomial_form(1)
    assert len(both.terms) == 2
    assert both.wedge(both) == both


def test_window_basis_counts(torus):
    window = ModeWindow(bound=1)
    monos = list(torus.basis_monomials(window))
    # 9 modes x 4 exterior subsets
    assert len(monos) == 36
    assert len(set(monos)) == 36


def test_mode_window_validation():
    with pytest.raises(ValidationError):
        ModeWindow(bound=-1)
    with pytest.raises(ValidationError):
        ModeWindow(bound=1, l_min=2, l_max=-2)


def test_lie_blocks(field):
    model = so3_model(field)
    window = ModeWindow(bound=3)
    keys = model.block_keys(window)
    assert keys == [(0,)]
    assert len(model.block_monomials(keys[0], window)) == 8


def test_frame_specs(field, torus):
    spec = torus.frame_spec()
    assert spec.longitudinal == ("theta",)
    assert spec.transverse == ("eta1",)
    conic = ConicDualModel(torus)
    assert conic.frame_spec().longitudinal == ("theta", "dxi")
    cos = CosphereCircleModel(torus)
    assert cos.frame_spec().longitudinal == ("theta", "dphi")
    heis = heisenberg_model(field)
    assert heis.frame_spec().longitudinal == ("e3",)
    assert heis.frame_spec().transverse == ("e1", "e2")
