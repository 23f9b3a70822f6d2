"""Foliated model families and their exterior form algebras.

Four families are supported:

* ``KroneckerTorus`` -- the n-torus foliated by the line field sum(a_j d_j),
  leaf dimension 1, with leafwise coframe theta and transverse coframe
  eta_1..eta_{n-1};
* ``ConicDualModel`` -- the punctured dual line bundle of the leaf direction,
  with radial Laurent coordinate xi, two components (+/-), leafwise coframe
  (theta, dxi) and a scaling action grading forms by homogeneity degree;
* circle bundle models (``CosphereCircleModel`` with a two-point factor,
  ``CircleProductModel`` without) whose leaves pick up the circle direction
  dphi;
* ``LieFrameModel`` -- translation-invariant forms on a frame with constant
  structure coefficients, foliated by a subalgebra.

Forms are finite sums of monomials (Fourier mode x radial power x component
label x ordered exterior monomial) with exact Scalar coefficients.  All model
and form objects are immutable and freely shareable across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import SpecParseError, UnsupportedModelError, ValidationError
from .linalg import integer_kernel
from .scalars import NumberField, Scalar

Mode = tuple[int, ...]


@dataclass(frozen=True)
class ModeWindow:
    """Finite truncation: per-axis Fourier bound and radial degree range."""

    bound: int = 2
    l_min: int = -2
    l_max: int = 2

    def __post_init__(self):
        if self.bound < 0 or self.l_min > self.l_max:
            raise ValidationError("inconsistent mode window")

    def modes(self, length: int) -> Iterator[Mode]:
        if length == 0:
            yield ()
            return
        axis = range(-self.bound, self.bound + 1)
        yield from itertools.product(axis, repeat=length)

    def homogeneities(self) -> range:
        return range(self.l_min, self.l_max + 1)

    def enlarged(self, extra: int) -> ModeWindow:
        return ModeWindow(self.bound + extra, self.l_min - extra, self.l_max + extra)


@dataclass(frozen=True)
class FormMonomial:
    """One basis monomial: mode, radial power, component label, exterior part."""

    mode: Mode
    xi: int
    comp: int
    ext: tuple[int, ...]

    def sort_key(self):
        return (self.comp, self.mode, self.xi, len(self.ext), self.ext)


@dataclass(frozen=True)
class FrameSpec:
    """The chosen coframe: leafwise and transverse generator names.

    The complement is always the constant (frame-parallel) span; leafwise
    results do not depend on that choice, and it makes the splitting
    computable in closed form.
    """

    longitudinal: tuple[str, ...]
    transverse: tuple[str, ...]
    convention: str = "constant-span complement"

    def __post_init__(self):
        names = self.longitudinal + self.transverse
        if len(set(names)) != len(names):
            raise ValidationError("coframe generator names must be distinct")

    def to_json(self) -> dict:
        return {
            "longitudinal": list(self.longitudinal),
            "transverse": list(self.transverse),
            "convention": self.convention,
        }


def merge_ext(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """Merge two strictly increasing index tuples with the exterior sign.

    Returns (sign, merged) or None when a generator repeats.
    """
    if not a:
        return 1, b
    if not b:
        return 1, a
    sign = 1
    out: list[int] = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        if a[i] == b[j]:
            return None
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
            if (la - i) & 1:
                sign = -sign
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


def insert_gen(gen: int, ext: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """Wedge a single generator from the left: gen ^ ext."""
    return merge_ext((gen,), ext)


def remove_gen(gen: int, ext: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """Contract the dual vector of gen: sign (-1)^position, or None if absent."""
    if gen not in ext:
        return None
    pos = ext.index(gen)
    sign = -1 if pos & 1 else 1
    return sign, ext[:pos] + ext[pos + 1 :]


class Form:
    """A finite exact-coefficient form over one model."""

    __slots__ = ("model", "terms")

    def __init__(self, model: FoliatedModel, terms: dict[FormMonomial, Scalar]):
        self.model = model
        self.terms = {m: c for m, c in terms.items() if c}

    @classmethod
    def zero(cls, model: FoliatedModel) -> Form:
        return cls(model, {})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Form)
            and self.model is other.model
            and self.terms == other.terms
        )

    def __hash__(self):
        raise TypeError("forms are not hashable")

    def _check_model(self, other: Form) -> None:
        if self.model is not other.model:
            raise ValidationError("forms live on different models")

    def __add__(self, other: Form) -> Form:
        self._check_model(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            cur = out.get(m)
            new = c if cur is None else cur + c
            if new:
                out[m] = new
            else:
                out.pop(m, None)
        return Form(self.model, out)

    def __sub__(self, other: Form) -> Form:
        return self + (-other)

    def __neg__(self) -> Form:
        return Form(self.model, {m: -c for m, c in self.terms.items()})

    def scale(self, c: Scalar | int | Fraction) -> Form:
        s = self.model.field.scalar(c)
        if not s:
            return Form.zero(self.model)
        return Form(self.model, {m: v * s for m, v in self.terms.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def wedge(self, other: Form) -> Form:
        self._check_model(other)
        model = self.model
        out: dict[FormMonomial, Scalar] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                if model.components_count > 1 and ma.comp != mb.comp:
                    continue  # supported on disjoint components
                merged = merge_ext(ma.ext, mb.ext)
                if merged is None:
                    continue
                sign, ext = merged
                mode = tuple(x + y for x, y in zip(ma.mode, mb.mode))
                mono = FormMonomial(mode, ma.xi + mb.xi, ma.comp, ext)
                coeff = ca * cb
                if sign < 0:
                    coeff = -coeff
                cur = out.get(mono)
                new = coeff if cur is None else cur + coeff
                if new:
                    out[mono] = new
                else:
                    out.pop(mono, None)
        return Form(self.model, out)

    def __xor__(self, other: Form) -> Form:
        return self.wedge(other)

    # -- grading ---------------------------------------------------------

    def bidegree_project(self, r: int, s: int) -> Form:
        model = self.model
        return Form(
            model,
            {m: c for m, c in self.terms.items() if model.bidegree(m.ext) == (r, s)},
        )

    def bidegree(self) -> tuple[int, int] | None:
        """The common bidegree of all monomials, or None for a mixed form."""
        degrees = {self.model.bidegree(m.ext) for m in self.terms}
        if len(degrees) == 1:
            return degrees.pop()
        return None

    def total_degrees(self) -> set[int]:
        return {len(m.ext) for m in self.terms}

    def homogeneity_decompose(self) -> dict[int, Form]:
        model = self.model
        if not model.has_xi:
            raise UnsupportedModelError("homogeneity degree requires the conic model")
        parts: dict[int, dict[FormMonomial, Scalar]] = {}
        for m, c in self.terms.items():
            parts.setdefault(model.homogeneity(m), {})[m] = c
        return {l: Form(model, t) for l, t in sorted(parts.items())}

    def sorted_terms(self) -> list[tuple[FormMonomial, Scalar]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for m, c in self.sorted_terms():
            bits.append(f"({c})*{self.model.monomial_label(m)}")
        return " + ".join(bits)


class FoliatedModel:
    """Shared machinery for the model families; subclasses fill in the data."""

    field: NumberField
    gen_names: tuple[str, ...]
    long_flags: tuple[bool, ...]
    components: tuple[str, ...]
    mode_len: int
    has_xi: bool
    leaf_dim: int
    codim: int

    @property
    def p(self) -> int:
        return self.leaf_dim

    @property
    def q(self) -> int:
        return self.codim

    @property
    def components_count(self) -> int:
        return len(self.components)

    def frame_spec(self) -> FrameSpec:
        longitudinal = tuple(
            name for name, flag in zip(self.gen_names, self.long_flags) if flag
        )
        transverse = tuple(
            name for name, flag in zip(self.gen_names, self.long_flags) if not flag
        )
        return FrameSpec(longitudinal, transverse)

    # -- grading helpers ---------------------------------------------------

    def bidegree(self, ext: tuple[int, ...]) -> tuple[int, int]:
        r = sum(1 for g in ext if self.long_flags[g])
        return r, len(ext) - r

    def homogeneity(self, mono: FormMonomial) -> int:
        if not self.has_xi:
            raise UnsupportedModelError("model has no radial grading")
        return mono.xi + (1 if self.XI_GEN in mono.ext else 0)

    # -- form builders -------------------------------------------------------

    def form(self, terms: dict[FormMonomial, Scalar]) -> Form:
        return Form(self, terms)

    def zero_form(self) -> Form:
        return Form.zero(self)

    def monomial_form(
        self,
        coeff: Scalar | int | Fraction | str,
        mode: Mode = (),
        xi: int = 0,
        comp: int | None = None,
        ext: tuple[int, ...] | Sequence[str] = (),
    ) -> Form:
        """Build coeff * e_mode * xi^power * (exterior monomial).

        ``ext`` may use generator names; when ``comp`` is None the monomial is
        placed on every component (the global form).
        """
        if isinstance(coeff, str):
            c = self.field.parse(coeff)
        elif isinstance(coeff, Scalar):
            c = coeff
        else:
            c = self.field.scalar(coeff)
        mode = tuple(mode) if mode else (0,) * self.mode_len
        if len(mode) != self.mode_len:
            raise ValidationError(
                f"mode length {len(mode)} != {self.mode_len} for this model"
            )
        if xi and not self.has_xi:
            raise ValidationError("radial powers require the conic model")
        indices = []
        for g in ext:
            if isinstance(g, str):
                if g not in self.gen_names:
                    raise ValidationError(f"unknown generator {g!r}")
                indices.append(self.gen_names.index(g))
            else:
                indices.append(int(g))
        sorted_idx = tuple(sorted(indices))
        if len(set(sorted_idx)) != len(sorted_idx):
            return self.zero_form()
        sign = _sort_sign(indices)
        if sign < 0:
            c = -c
        comps = range(self.components_count) if comp is None else [comp]
        terms = {FormMonomial(mode, xi, k, sorted_idx): c for k in comps}
        return Form(self, terms)

    def gen_form(self, name: str, comp: int | None = None) -> Form:
        return self.monomial_form(1, ext=(name,), comp=comp)

    def monomial_label(self, m: FormMonomial) -> str:
        bits = []
        if self.components_count > 1:
            bits.append(self.components[m.comp])
        if self.mode_len:
            bits.append(f"e{list(m.mode)}")
        if m.xi:
            bits.append(f"xi^{m.xi}")
        if m.ext:
            bits.append("^".join(self.gen_names[g] for g in m.ext))
        return "*".join(bits) if bits else "1"

    # -- differential (full) -------------------------------------------------

    def d_full(self, mono: FormMonomial) -> list[tuple[FormMonomial, Scalar]]:
        raise NotImplementedError

    # -- windowed bases --------------------------------------------------------

    def block_keys(self, window: ModeWindow) -> list[tuple]:
        """Independent blocks of every differential-style operator."""
        raise NotImplementedError

    def block_monomials(self, key: tuple, window: ModeWindow) -> list[FormMonomial]:
        """All exterior monomials of one block, every degree."""
        raise NotImplementedError

    def basis_monomials(self, window: ModeWindow) -> Iterator[FormMonomial]:
        for key in self.block_keys(window):
            yield from self.block_monomials(key, window)

    def _ext_subsets(self) -> list[tuple[int, ...]]:
        gens = range(len(self.gen_names))
        out: list[tuple[int, ...]] = []
        for k in range(len(self.gen_names) + 1):
            out.extend(itertools.combinations(gens, k))
        return out


def _sort_sign(indices: list[int]) -> int:
    sign = 1
    n = len(indices)
    for i in range(n):
        for j in range(i + 1, n):
            if indices[i] > indices[j]:
                sign = -sign
    return sign


class KroneckerTorus(FoliatedModel):
    """T^n foliated by the constant line field with slope vector alpha.

    Convention: alpha is normalized so its first entry is 1 (validated
    nonzero), the complement is the span of the remaining coordinate frame,
    theta = dx_1 and eta_i = dx_{i+1} - alpha_{i+1} dx_1.  The reduced mode
    pairing is m . alpha (the 2*pi*i factor of the true derivative is dropped;
    every per-mode differential is rescaled by the same nonzero constant, so
    no rank or dimension changes).
    """

    has_xi = False
    XI_GEN = -1

    def __init__(self, field: NumberField, alpha: Sequence[Scalar | str]):
        self.field = field
        entries = [field.parse(a) if isinstance(a, str) else field.scalar(a) for a in alpha]
        n = len(entries)
        if n < 2:
            raise ValidationError("torus dimension must be at least 2")
        if all(not a for a in entries):
            raise ValidationError("alpha must be nonzero")
        for a in entries:
            if not a.is_real():
                raise ValidationError("alpha entries must be real scalars")
        if not entries[0]:
            raise ValidationError("alpha[0] must be nonzero for the frame convention")
        inv = entries[0].inverse()
        self.alpha = tuple(a * inv for a in entries)
        self.alpha_raw = tuple(entries)
        self.n = n
        self.leaf_dim = 1
        self.codim = n - 1
        self.gen_names = ("theta",) + tuple(f"eta{i}" for i in range(1, n))
        self.long_flags = (True,) + (False,) * (n - 1)
        self.components = ("",)
        self.mode_len = n
        self._pairing_cache: dict[Mode, Scalar] = {}
        self.resonance_basis = self._resonance_basis()

    def _resonance_basis(self) -> list[tuple[int, ...]]:
        # m . alpha = 0 iff every rational component of sum m_j alpha_j vanishes
        rows: list[list[int]] = []
        for mask in range(self.field.dim):
            row = [a.coeffs[mask] for a in self.alpha]
            if any(row):
                denom = 1
                for x in row:
                    denom = denom * x.denominator // _igcd(denom, x.denominator)
                rows.append([int(x * denom) for x in row])
        return integer_kernel(rows, self.n)

    @property
    def resonant(self) -> bool:
        return bool(self.resonance_basis)

    def pairing(self, mode: Mode) -> Scalar:
        """The reduced leafwise derivative multiplier m . alpha."""
        m = tuple(mode[: self.n])
        cached = self._pairing_cache.get(m)
        if cached is None:
            cached = self.field.zero
            for mj, aj in zip(m, self.alpha):
                if mj:
                    cached = cached + aj * mj
            self._pairing_cache[m] = cached
        return cached

    def d_full(self, mono: FormMonomial) -> list[tuple[FormMonomial, Scalar]]:
        out = []
        lam = self.pairing(mono.mode)
        if lam:
            ins = insert_gen(0, mono.ext)
            if ins is not None:
                sign, ext = ins
                out.append(
                    (FormMonomial(mono.mode, 0, mono.comp, ext), lam if sign > 0 else -lam)
                )
        for i in range(1, self.n):
            mi = mono.mode[i]
            if mi:
                ins = insert_gen(i, mono.ext)
                if ins is not None:
                    sign, ext = ins
                    out.append(
                        (
                            FormMonomial(mono.mode, 0, mono.comp, ext),
                            self.field.scalar(mi * sign),
                        )
                    )
        return out

    def block_keys(self, window: ModeWindow) -> list[tuple]:
        return [(0, m) for m in window.modes(self.n)]

    def block_monomials(self, key: tuple, window: ModeWindow) -> list[FormMonomial]:
        comp, mode = key
        return [FormMonomial(mode, 0, comp, ext) for ext in self._ext_subsets()]

    def __repr__(self) -> str:
        return f"KroneckerTorus(n={self.n}, alpha=({', '.join(str(a) for a in self.alpha)}))"


class _CircleBundleModel(FoliatedModel):
    """Torus x S^1 with leaves (leaf x S^1); components parametrized."""

    has_xi = False
    XI_GEN = -1

    def __init__(self, base: KroneckerTorus, components: tuple[str, ...]):
        if not isinstance(base, KroneckerTorus):
            raise ValidationError("circle bundle models require a Kronecker torus base")
        self.base = base
        self.field = base.field
        n = base.n
        self.n = n
        self.leaf_dim = 2
        self.codim = n - 1
        self.gen_names = ("theta", "dphi") + tuple(f"eta{i}" for i in range(1, n))
        self.long_flags = (True, True) + (False,) * (n - 1)
        self.components = components
        self.mode_len = n + 1  # trailing entry = circle mode
        self.alpha = base.alpha

    def pairing(self, mode: Mode) -> Scalar:
        return self.base.pairing(mode[: self.n])

    def d_full(self, mono: FormMonomial) -> list[tuple[FormMonomial, Scalar]]:
        out = []
        lam = self.pairing(mono.mode)
        if lam:
            ins = insert_gen(0, mono.ext)
            if ins is not None:
                sign, ext = ins
                out.append(
                    (FormMonomial(mono.mode, 0, mono.comp, ext), lam if sign > 0 else -lam)
                )
        k = mono.mode[self.n]
        if k:
            ins = insert_gen(1, mono.ext)
            if ins is not None:
                sign, ext = ins
                out.append(
                    (FormMonomial(mono.mode, 0, mono.comp, ext), self.field.scalar(k * sign))
                )
        for i in range(1, self.n):
            mi = mono.mode[i]
            if mi:
                ins = insert_gen(i + 1, mono.ext)
                if ins is not None:
                    sign, ext = ins
                    out.append(
                        (
                            FormMonomial(mono.mode, 0, mono.comp, ext),
                            self.field.scalar(mi * sign),
                        )
                    )
        return out

    def block_keys(self, window: ModeWindow) -> list[tuple]:
        return [
            (comp, m)
            for comp in range(self.components_count)
            for m in window.modes(self.mode_len)
        ]

    def block_monomials(self, key: tuple, window: ModeWindow) -> list[FormMonomial]:
        comp, mode = key
        return [FormMonomial(mode, 0, comp, ext) for ext in self._ext_subsets()]


class CosphereCircleModel(_CircleBundleModel):
    """The cosphere-of-the-leaf-line bundle times S^1: two disjoint copies."""

    def __init__(self, base: KroneckerTorus):
        super().__init__(base, ("+", "-"))

    def __repr__(self) -> str:
        return f"CosphereCircleModel({self.base!r})"


class CircleProductModel(_CircleBundleModel):
    """The plain product M x S^1 (single component); the realized sphere bundle."""

    def __init__(self, base: KroneckerTorus):
        super().__init__(base, ("",))

    def __repr__(self) -> str:
        return f"CircleProductModel({self.base!r})"


class LieFrameModel(FoliatedModel):
    """Invariant forms on a constant-structure frame, foliated by a subalgebra.

    ``structure`` maps (i, j) with i < j (0-based) to {k: Scalar} describing
    [e_i, e_j] = sum_k c_k e_k.  The dual differential follows the convention
    d e^k = -(1/2) sum c^k_{ij} e^i ^ e^j, pinned by requiring d^2 = 0.
    Validation (Jacobi, subalgebra) lives in :meth:`create`; the raw
    constructor trusts its input so tests can build corrupted structures.
    """

    has_xi = False
    XI_GEN = -1

    def __init__(
        self,
        field: NumberField,
        n: int,
        structure: dict[tuple[int, int], dict[int, Scalar]],
        leaf_indices: frozenset[int] | set[int],
    ):
        self.field = field
        self.n = n
        self.structure = {k: dict(v) for k, v in structure.items()}
        self.leaf_indices = frozenset(leaf_indices)
        if not self.leaf_indices or not self.leaf_indices < set(range(n)):
            raise ValidationError("leaf index set must be a proper nonempty subset")
        self.leaf_dim = len(self.leaf_indices)
        self.codim = n - self.leaf_dim
        self.gen_names = tuple(f"e{i+1}" for i in range(n))
        self.long_flags = tuple(i in self.leaf_indices for i in range(n))
        self.components = ("",)
        self.mode_len = 0
        # d e^k as a list of (sign-corrected coefficient, (a, b)) with a < b
        self._dual_d: list[list[tuple[Scalar, tuple[int, int]]]] = [[] for _ in range(n)]
        for (i, j), targets in self.structure.items():
            for k, c in targets.items():
                if c:
                    self._dual_d[k].append((-c, (i, j)))

    @classmethod
    def create(
        cls,
        field: NumberField,
        n: int,
        structure: dict[tuple[int, int], dict[int, Scalar]],
        leaf_indices: set[int],
    ) -> LieFrameModel:
        model = cls(field, n, structure, leaf_indices)
        model.validate()
        return model

    def bracket_vector(self, i: int, j: int) -> dict[int, Scalar]:
        if i == j:
            return {}
        if i < j:
            return dict(self.structure.get((i, j), {}))
        return {k: -c for k, c in self.structure.get((j, i), {}).items()}

    def validate(self) -> None:
        zero = self.field.zero
        for i in range(self.n):
            for j in range(self.n):
                for k in range(self.n):
                    acc: dict[int, Scalar] = {}
                    for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
                        # [[e_a, e_b], e_c]
                        for l, coeff in self.bracket_vector(a, b).items():
                            for m2, coeff2 in self.bracket_vector(l, c).items():
                                cur = acc.get(m2, zero)
                                acc[m2] = cur + coeff * coeff2
                    if any(v for v in acc.values()):
                        raise ValidationError(
                            f"Jacobi identity fails on frame indices ({i+1}, {j+1}, {k+1})"
                        )
        for i in self.leaf_indices:
            for j in self.leaf_indices:
                for k, c in self.bracket_vector(i, j).items():
                    if c and k not in self.leaf_indices:
                        raise ValidationError(
                            "leaf index set is not a subalgebra (integrability fails)"
                        )

    def structure_tensor(self) -> dict[tuple[int, int], dict[int, Scalar]]:
        """Leafwise projection of brackets of complement frame vectors."""
        out: dict[tuple[int, int], dict[int, Scalar]] = {}
        complement = sorted(set(range(self.n)) - self.leaf_indices)
        for idx, i in enumerate(complement):
            for j in complement[idx + 1 :]:
                parts = {
                    k: c
                    for k, c in self.bracket_vector(i, j).items()
                    if k in self.leaf_indices and c
                }
                if parts:
                    out[(i, j)] = parts
        return out

    def d_full(self, mono: FormMonomial) -> list[tuple[FormMonomial, Scalar]]:
        out: dict[FormMonomial, Scalar] = {}
        ext = mono.ext
        for pos, g in enumerate(ext):
            rest = ext[:pos] + ext[pos + 1 :]
            outer_sign = -1 if pos & 1 else 1
            for coeff, (a, b) in self._dual_d[g]:
                merged = merge_ext((a, b), rest)
                if merged is None:
                    continue
                sign, new_ext = merged
                total = coeff * (outer_sign * sign)
                mono2 = FormMonomial(mono.mode, mono.xi, mono.comp, new_ext)
                cur = out.get(mono2)
                new = total if cur is None else cur + total
                if new:
                    out[mono2] = new
                else:
                    out.pop(mono2, None)
        return list(out.items())

    def block_keys(self, window: ModeWindow) -> list[tuple]:
        return [(0,)]

    def block_monomials(self, key: tuple, window: ModeWindow) -> list[FormMonomial]:
        return [FormMonomial((), 0, 0, ext) for ext in self._ext_subsets()]

    def __repr__(self) -> str:
        leaves = sorted(i + 1 for i in self.leaf_indices)
        return f"LieFrameModel(n={self.n}, leaf={leaves})"


class ConicDualModel(FoliatedModel):
    """Punctured dual of the leaf line bundle, graded by radial homogeneity.

    The radial Laurent coordinate xi lives on two components (+/-); dxi is
    leafwise, and the homogeneity degree of a monomial is its xi power plus
    one when dxi is present.  Bases may be a Kronecker torus or a leaf-line
    frame model (leaf dimension 1 in both cases).
    """

    has_xi = True
    XI_GEN = 1

    def __init__(self, base: KroneckerTorus | LieFrameModel):
        if isinstance(base, KroneckerTorus):
            self._lie = None
            n = base.n
            self.gen_names = ("theta", "dxi") + tuple(f"eta{i}" for i in range(1, n))
            self.mode_len = n
            self.n = n
        elif isinstance(base, LieFrameModel):
            if base.leaf_dim != 1:
                raise ValidationError("conic extension needs a one-dimensional leaf")
            self._lie = base
            leaf = next(iter(base.leaf_indices))
            complement = sorted(set(range(base.n)) - {leaf})
            self._lie_order = [leaf] + complement  # model index -> base frame index
            self.gen_names = (base.gen_names[leaf], "dxi") + tuple(
                base.gen_names[i] for i in complement
            )
            self.mode_len = 0
            self.n = base.n
        else:
            raise ValidationError("unsupported base for the conic dual")
        self.base = base
        self.field = base.field
        self.leaf_dim = 2
        self.codim = base.codim
        self.long_flags = (True, True) + (False,) * self.codim
        self.components = ("+", "-")

    def pairing(self, mode: Mode) -> Scalar:
        if self._lie is not None:
            return self.field.zero
        return self.base.pairing(mode)

    def _lie_dual_d(self, model_gen: int) -> list[tuple[Scalar, tuple[int, int]]]:
        """d of a frame covector, re-indexed into the conic generator order."""
        assert self._lie is not None
        base_gen = self._lie_order[model_gen if model_gen == 0 else model_gen - 1]
        out = []
        to_model = {b: (0 if k == 0 else k + 1) for k, b in enumerate(self._lie_order)}
        for coeff, (a, b) in self._lie._dual_d[base_gen]:
            ma, mb = to_model[a], to_model[b]
            if ma > mb:
                ma, mb = mb, ma
                coeff = -coeff
            out.append((coeff, (ma, mb)))
        return out

    def d_full(self, mono: FormMonomial) -> list[tuple[FormMonomial, Scalar]]:
        out: dict[FormMonomial, Scalar] = {}

        def accumulate(mono2: FormMonomial, coeff: Scalar) -> None:
            cur = out.get(mono2)
            new = coeff if cur is None else cur + coeff
            if new:
                out[mono2] = new
            else:
                out.pop(mono2, None)

        # radial part: d(xi^a) = a xi^(a-1) dxi
        if mono.xi:
            ins = insert_gen(1, mono.ext)
            if ins is not None:
                sign, ext = ins
                accumulate(
                    FormMonomial(mono.mode, mono.xi - 1, mono.comp, ext),
                    self.field.scalar(mono.xi * sign),
                )
        if self._lie is None:
            lam = self.pairing(mono.mode)
            if lam:
                ins = insert_gen(0, mono.ext)
                if ins is not None:
                    sign, ext = ins
                    accumulate(
                        FormMonomial(mono.mode, mono.xi, mono.comp, ext),
                        lam if sign > 0 else -lam,
                    )
            for i in range(1, self.n):
                mi = mono.mode[i]
                if mi:
                    ins = insert_gen(i + 1, mono.ext)
                    if ins is not None:
                        sign, ext = ins
                        accumulate(
                            FormMonomial(mono.mode, mono.xi, mono.comp, ext),
                            self.field.scalar(mi * sign),
                        )
        else:
            for pos, g in enumerate(mono.ext):
                rest = mono.ext[:pos] + mono.ext[pos + 1 :]
                outer_sign = -1 if pos & 1 else 1
                if g == 1:
                    continue  # d(dxi) = 0
                for coeff, (a, b) in self._lie_dual_d(g):
                    merged = merge_ext((a, b), rest)
                    if merged is None:
                        continue
                    sign, new_ext = merged
                    accumulate(
                        FormMonomial(mono.mode, mono.xi, mono.comp, new_ext),
                        coeff * (outer_sign * sign),
                    )
        return list(out.items())

    def block_keys(self, window: ModeWindow) -> list[tuple]:
        return [
            (comp, m, l)
            for comp in range(self.components_count)
            for m in window.modes(self.mode_len)
            for l in window.homogeneities()
        ]

    def block_monomials(self, key: tuple, window: ModeWindow) -> list[FormMonomial]:
        comp, mode, l = key
        out = []
        for ext in self._ext_subsets():
            xi = l - (1 if 1 in ext else 0)
            out.append(FormMonomial(mode, xi, comp, ext))
        return out

    def __repr__(self) -> str:
        return f"ConicDualModel({self.base!r})"


def _igcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


# -- model specification documents -------------------------------------------


def field_from_spec(spec: dict) -> NumberField:
    rads = spec.get("sqrts", ())
    return NumberField(tuple(rads))


def make_model(spec: dict):
    """Build and validate a model from a JSON-style specification document.

    Families: ``kronecker_torus`` (n, alpha: [scalar strings]),
    ``conic_dual`` / ``cosphere_circle`` / ``circle_product`` (base: {...}),
    ``lie_frame`` (n, brackets: [[i, j, [[k, coeff], ...]], ...], leaf: [...]),
    with an optional top-level ``field`` of the shape {"sqrts": [2, 3]}.
    """
    if not isinstance(spec, dict):
        raise SpecParseError("model spec must be a JSON object")
    family = spec.get("family")
    if family is None:
        raise SpecParseError("model spec is missing the 'family' tag")
    field = field_from_spec(spec.get("field", _infer_field_spec(spec)))
    return _build_family(spec, family, field)


def _infer_field_spec(spec: dict) -> dict:
    """Collect sqrt radicands appearing anywhere in the document."""
    rads: set[int] = set()

    def scan(obj):
        if isinstance(obj, str):
            pos = 0
            while True:
                pos = obj.find("sqrt", pos)
                if pos < 0:
                    break
                end = pos + 4
                digits = ""
                while end < len(obj) and obj[end].isdigit():
                    digits += obj[end]
                    end += 1
                if digits:
                    rads.add(int(digits))
                pos = end
        elif isinstance(obj, dict):
            for v in obj.values():
                scan(v)
        elif isinstance(obj, (list, tuple)):
            for v in obj:
                scan(v)

    scan(spec)
    return {"sqrts": sorted(rads)[:2]}


def _build_family(spec: dict, family: str, field: NumberField):
    if family == "kronecker_torus":
        alpha = spec.get("alpha")
        if not isinstance(alpha, (list, tuple)) or not alpha:
            raise SpecParseError("kronecker_torus spec needs a nonempty 'alpha' list")
        return KroneckerTorus(field, [str(a) for a in alpha])
    if family in ("conic_dual", "cosphere_circle", "circle_product"):
        base_spec = spec.get("base")
        if not isinstance(base_spec, dict):
            raise SpecParseError(f"{family} spec needs a 'base' model object")
        base = _build_family(base_spec, base_spec.get("family", "kronecker_torus"), field)
        if family == "conic_dual":
            return ConicDualModel(base)
        if not isinstance(base, KroneckerTorus):
            raise SpecParseError(f"{family} requires a kronecker_torus base")
        return CosphereCircleModel(base) if family == "cosphere_circle" else CircleProductModel(base)
    if family == "lie_frame":
        n = spec.get("n")
        brackets = spec.get("brackets", [])
        leaf = spec.get("leaf")
        if not isinstance(n, int) or n < 2:
            raise SpecParseError("lie_frame spec needs an integer dimension n >= 2")
        if not isinstance(leaf, (list, tuple)) or not leaf:
            raise SpecParseError("lie_frame spec needs a nonempty 'leaf' index list")
        structure: dict[tuple[int, int], dict[int, Scalar]] = {}
        for item in brackets:
            try:
                i, j, targets = item
                i, j = int(i) - 1, int(j) - 1
            except (TypeError, ValueError) as exc:
                raise SpecParseError(f"malformed bracket entry {item!r}") from exc
            if not (0 <= i < n and 0 <= j < n and i != j):
                raise SpecParseError(f"bracket indices out of range in {item!r}")
            vec: dict[int, Scalar] = {}
            for k, coeff in targets:
                vec[int(k) - 1] = field.parse(str(coeff))
            if i < j:
                structure[(i, j)] = vec
            else:
                structure[(j, i)] = {k: -c for k, c in vec.items()}
        leaf_idx = {int(i) - 1 for i in leaf}
        return LieFrameModel.create(field, n, structure, leaf_idx)
    raise SpecParseError(f"unknown model family {family!r}")


def pullback_from_base(model: _CircleBundleModel | ConicDualModel, form: Form) -> Form:
    """Pull a base-torus form up a bundle model (mode extended, all components)."""
    base = model.base
    if form.model is not base:
        raise ValidationError("form does not live on the bundle base")
    if isinstance(model, ConicDualModel):
        extend = lambda m: m
    else:
        extend = lambda m: m + (0,)
    gen_shift = lambda g: g if g == 0 else g + 1
    terms: dict[FormMonomial, Scalar] = {}
    for mono, c in form.terms.items():
        ext = tuple(gen_shift(g) for g in mono.ext)
        for comp in range(model.components_count):
            terms[FormMonomial(extend(mono.mode), 0, comp, ext)] = c
    return Form(model, terms)
