"""Leafwise Poisson calculus on the punctured dual cone.

The leafwise bivector pairs the leaf direction with the radial direction;
its dual leafwise symplectic form is theta ^ dxi, homogeneous of degree one
under the radial scaling.  The boundary operator delta = [i_G, d] splits
into a leafwise piece of shift (-1, 0) and a transverse piece of shift
(-2, 1); both are implemented as honest commutators, and the star-conjugated
leafwise differential gives an independent second route that the identity
suite compares against.

Sign conventions: the contraction i_G is fixed so that the induced bracket
on scalars is {f, g} = f_xi g_x - f_x g_xi in leaf coordinates (x, xi), which
also pins i_G(theta ^ dxi) = -1; every other sign is then forced by the
operator identities.
"""

from __future__ import annotations

from dataclasses import dataclass

from .derham import (
    CheckResult,
    cohomology_dims,
    differential,
    operator_matrix,
)
from .errors import UnsupportedModelError, ValidationError
from .linalg import quotient_dim
from .models import (
    ConicDualModel,
    CosphereCircleModel,
    FoliatedModel,
    Form,
    FormMonomial,
    KroneckerTorus,
    ModeWindow,
)
from .scalars import Scalar

DELTA_VARIANTS = ("delta", "delta_F", "delta_perp")

# leaf-factor star table: exterior subset of (theta, dxi) -> (image subset, sign)
_STAR_TABLE = {
    (): ((0, 1), 1),
    (0,): ((0,), -1),
    (1,): ((1,), -1),
    (0, 1): ((), 1),
}


def _require_conic(model: FoliatedModel) -> ConicDualModel:
    if not isinstance(model, ConicDualModel):
        raise UnsupportedModelError("this operation needs the conic dual model")
    return model


@dataclass(frozen=True)
class PoissonTensor:
    """The leafwise bivector (leaf direction ^ radial direction) and its dual."""

    model: ConicDualModel
    omega: Form  # theta ^ dxi on every component, 1-homogeneous

    def to_json(self) -> dict:
        return {
            "bivector": "T ^ d/dxi (leaf direction wedge radial direction)",
            "omega": repr(self.omega),
            "omega_homogeneity": sorted(self.omega.homogeneity_decompose()),
        }


def poisson_tensor(model: FoliatedModel) -> PoissonTensor:
    conic = _require_conic(model)
    omega = conic.monomial_form(1, ext=(0, 1))  # leaf covector ^ dxi
    parts = omega.homogeneity_decompose()
    assert list(parts) == [1], "leafwise symplectic form must be 1-homogeneous"
    return PoissonTensor(conic, omega)


def contract_bivector(model: FoliatedModel, form: Form) -> Form:
    """Interior product with the leafwise bivector: bidegree shift (-2, 0)."""
    conic = _require_conic(model)
    out: dict[FormMonomial, Scalar] = {}
    for mono, coeff in form.terms.items():
        ext = mono.ext
        if 0 not in ext or 1 not in ext:
            continue
        # contract the radial vector first (remove dxi), then the leaf vector
        pos_dxi = ext.index(1)
        sign = -1 if pos_dxi & 1 else 1
        rest = ext[:pos_dxi] + ext[pos_dxi + 1 :]
        pos_theta = rest.index(0)
        if pos_theta & 1:
            sign = -sign
        new_ext = rest[:pos_theta] + rest[pos_theta + 1 :]
        mono2 = FormMonomial(mono.mode, mono.xi, mono.comp, new_ext)
        val = coeff if sign > 0 else -coeff
        cur = out.get(mono2)
        new = val if cur is None else cur + val
        if new:
            out[mono2] = new
        else:
            out.pop(mono2, None)
    return Form(model, out)


def bracket(f: Form, g: Form) -> Form:
    """Poisson bracket of two scalar forms: i_G(df ^ dg)."""
    model = f.model
    _require_conic(model)
    for form in (f, g):
        if any(m.ext for m in form.terms):
            raise ValidationError("poisson bracket takes scalar (bidegree (0,0)) forms")
    df = differential(model, "d", f)
    dg = differential(model, "d", g)
    return contract_bivector(model, df.wedge(dg))


def delta(form: Form, variant: str = "delta") -> Form:
    """The boundary operator [i_G, d] or one of its bigraded pieces."""
    model = form.model
    _require_conic(model)
    if variant not in DELTA_VARIANTS:
        raise ValidationError(f"unknown delta variant {variant!r}")
    component = {"delta": "d", "delta_F": "d_F", "delta_perp": "d_perp"}[variant]
    dd = lambda a: differential(model, component, a)
    iG = lambda a: contract_bivector(model, a)
    return iG(dd(form)) - dd(iG(form))


def hodge_star(form: Form) -> Form:
    """Leafwise symplectic star; involutive, extended over transverse factors."""
    model = form.model
    _require_conic(model)
    if form and form.bidegree() is None:
        raise ValidationError("symplectic star takes a pure-bidegree form")
    out: dict[FormMonomial, Scalar] = {}
    for mono, coeff in form.terms.items():
        leaf_part = tuple(g for g in mono.ext if g in (0, 1))
        trans_part = tuple(g for g in mono.ext if g not in (0, 1))
        image, sign = _STAR_TABLE[leaf_part]
        mono2 = FormMonomial(mono.mode, mono.xi, mono.comp, image + trans_part)
        out[mono2] = coeff if sign > 0 else -coeff
    return Form(model, out)


def star_conjugated_leafwise_delta(form: Form) -> Form:
    """(-1)^(r+1) * d_F * applied bidegree-by-bidegree (the dual route)."""
    model = form.model
    _require_conic(model)
    out = Form.zero(model)
    by_bidegree: dict[tuple[int, int], dict[FormMonomial, Scalar]] = {}
    for mono, coeff in form.terms.items():
        by_bidegree.setdefault(model.bidegree(mono.ext), {})[mono] = coeff
    for (r, _s), terms in by_bidegree.items():
        piece = hodge_star(differential(model, "d_F", hodge_star(Form(model, terms))))
        if (r + 1) % 2:
            piece = -piece
        out = out + piece
    return out


# -- identity suite -------------------------------------------------------------


@dataclass(frozen=True)
class StarDeltaReport:
    model: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }


def verify_star_delta_identity(
    model: FoliatedModel, window: ModeWindow | None = None
) -> StarDeltaReport:
    """Exact operator identities on every windowed basis monomial.

    Checks the star-conjugation identity for the leafwise boundary, the
    squares and anticommutator of the two boundary pieces, the splitting of
    the full boundary, star involutivity and the homogeneity bookkeeping.
    """
    conic = _require_conic(model)
    window = window or ModeWindow()
    p = conic.leaf_dim // 2

    def monoform(m: FormMonomial) -> Form:
        return Form(conic, {m: conic.field.one})

    failures: dict[str, str] = {}

    def check(name: str, bad_label: str | None):
        if name not in failures and bad_label is not None:
            failures[name] = bad_label

    names = [
        "star_conjugated d_F equals leafwise delta",
        "delta_F^2 = 0",
        "delta_perp^2 = 0",
        "delta_F delta_perp + delta_perp delta_F = 0",
        "delta = delta_F + delta_perp",
        "star involution",
        "delta lowers homogeneity by one",
        "star maps degree l to l + p - r",
    ]
    for mono in conic.basis_monomials(window):
        label = conic.monomial_label(mono)
        a = monoform(mono)
        dF = delta(a, "delta_F")
        dP = delta(a, "delta_perp")
        if star_conjugated_leafwise_delta(a) != dF:
            check(names[0], label)
        if delta(dF, "delta_F"):
            check(names[1], label)
        if delta(dP, "delta_perp"):
            check(names[2], label)
        if delta(dP, "delta_F") + delta(dF, "delta_perp"):
            check(names[3], label)
        if delta(a) != dF + dP:
            check(names[4], label)
        if hodge_star(hodge_star(a)) != a:
            check(names[5], label)
        l = conic.homogeneity(mono)
        full = delta(a)
        if full and set(full.homogeneity_decompose()) != {l - 1}:
            check(names[6], label)
        r, _s = conic.bidegree(mono.ext)
        starred = hodge_star(a)
        if starred and set(starred.homogeneity_decompose()) != {l + p - r}:
            check(names[7], label)
    checks = tuple(
        CheckResult(n, n not in failures, failures.get(n, "")) for n in names
    )
    return StarDeltaReport(repr(conic), checks)


# -- homogeneous Poisson homology --------------------------------------------------


def _block_slice(
    model: ConicDualModel, comp: int, mode: tuple, l: int, window: ModeWindow
) -> list[FormMonomial]:
    return model.block_monomials((comp, mode, l), window)


def homogeneous_poisson_dims(
    model: FoliatedModel,
    k: int,
    l: int,
    window: ModeWindow | None = None,
    operator: str = "delta",
    per_component: bool = False,
):
    """dim of degree-k homology of the boundary operator on l-homogeneous forms.

    Exact per-mode computation: kernel of delta into degree (k-1, l-1) modulo
    the image from (k+1, l+1); out-of-range (k, l) just produce zero.
    """
    conic = _require_conic(model)
    window = window or ModeWindow()
    if operator not in ("delta", "delta_F"):
        raise ValidationError(f"unsupported homology operator {operator!r}")
    op = lambda a: delta(a, operator)
    per_comp: dict[str, int] = {name: 0 for name in conic.components}
    top = conic.leaf_dim + conic.codim
    if 0 <= k <= top:
        for comp in range(conic.components_count):
            for mode in window.modes(conic.mode_len):
                here = [
                    m
                    for m in _block_slice(conic, comp, mode, l, window)
                    if len(m.ext) == k
                ]
                below = [
                    m
                    for m in _block_slice(conic, comp, mode, l - 1, window)
                    if len(m.ext) == k - 1
                ]
                above = [
                    m
                    for m in _block_slice(conic, comp, mode, l + 1, window)
                    if len(m.ext) == k + 1
                ]
                outgoing = operator_matrix(conic, op, here, below)
                incoming = operator_matrix(conic, op, above, here)
                per_comp[conic.components[comp]] += quotient_dim(outgoing, incoming)
    if per_component:
        return per_comp
    return sum(per_comp.values())


def homogeneous_poisson_bigraded_dims(
    model: FoliatedModel,
    r: int,
    s: int,
    l: int,
    window: ModeWindow | None = None,
) -> int:
    """Bigraded leafwise-delta homology at (r, s), homogeneity l."""
    conic = _require_conic(model)
    window = window or ModeWindow()
    op = lambda a: delta(a, "delta_F")
    total = 0
    for comp in range(conic.components_count):
        for mode in window.modes(conic.mode_len):
            pick = lambda mlist, rr, ss: [
                m for m in mlist if conic.bidegree(m.ext) == (rr, ss)
            ]
            here = pick(_block_slice(conic, comp, mode, l, window), r, s)
            below = pick(_block_slice(conic, comp, mode, l - 1, window), r - 1, s)
            above = pick(_block_slice(conic, comp, mode, l + 1, window), r + 1, s)
            outgoing = operator_matrix(conic, op, here, below)
            incoming = operator_matrix(conic, op, above, here)
            total += quotient_dim(outgoing, incoming)
    return total


# -- the three-pipeline correspondence ----------------------------------------------


@dataclass(frozen=True)
class HomologyCorrespondenceRow:
    k: int
    l: int
    delta_dim: int
    delta_leafwise_dim: int
    circle_bundle_dim: int

    @property
    def consistent(self) -> bool:
        return self.delta_dim == self.delta_leafwise_dim == self.circle_bundle_dim

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "delta": self.delta_dim,
            "delta_F": self.delta_leafwise_dim,
            "circle_bundle": self.circle_bundle_dim,
            "consistent": self.consistent,
        }


@dataclass(frozen=True)
class HomologyCorrespondenceReport:
    model: str
    rows: tuple[HomologyCorrespondenceRow, ...]
    formal: bool

    @property
    def passed(self) -> bool:
        return all(r.consistent for r in self.rows)

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "passed": self.passed,
            "formal": self.formal,
            "rows": [r.to_json() for r in self.rows],
        }


def verify_homology_correspondence(
    model: FoliatedModel, window: ModeWindow | None = None
) -> HomologyCorrespondenceReport:
    """Three independent pipelines for the same numbers, tabulated.

    (a) full-boundary homology of the cone, (b) leafwise-boundary homology,
    (c) leafwise cohomology of the cosphere-circle bundle at the shifted
    indices (p - l, k - l - p); rows outside |l| <= p must vanish.
    """
    conic = _require_conic(model)
    base = conic.base
    if not isinstance(base, KroneckerTorus):
        raise UnsupportedModelError("the correspondence table needs a torus base")
    window = window or ModeWindow()
    p = conic.leaf_dim // 2
    top = conic.leaf_dim + conic.codim
    circle = CosphereCircleModel(base)
    circle_dims = cohomology_dims(circle, window)
    rows = []
    for k in range(0, top + 1):
        for l in range(-p - 1, p + 2):
            a = homogeneous_poisson_dims(conic, k, l, window, operator="delta")
            b = homogeneous_poisson_dims(conic, k, l, window, operator="delta_F")
            r_idx, s_idx = p - l, k - l - p
            c = circle_dims.get(r_idx, s_idx) if s_idx >= 0 and r_idx >= 0 else 0
            rows.append(HomologyCorrespondenceRow(k, l, a, b, c))
    formal = circle_dims.formal
    return HomologyCorrespondenceReport(repr(conic), tuple(rows), formal)
