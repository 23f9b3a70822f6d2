"""Truncated algebra of leafwise complete symbols on a Kronecker torus.

A symbol is a pair of one-sided expansions sum_j a_j(x) |xi|^j, one per sign
of the radial coordinate, with trigonometric-polynomial coefficients over
the exact field.  Composition is the standard one-dimensional expansion
  a o b = sum_k (1/k!) (d/dxi)^k a . D^k b,
with D the reduced leafwise derivative (e_m -> (m.alpha) e_m); on the
negative side d/dxi acts on |xi| powers with a sign.  Every operation
carries a validity watermark ("floor"): the lowest order at which its output
is exact.  Assertions in the verification suite are evaluated strictly at or
above watermarks, so truncation can never fabricate a pass or a failure.

The two sides never interact: composition, derivations and traces all
preserve the canonical splitting of the algebra.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .errors import InsufficientTruncationError, ValidationError
from .models import KroneckerTorus, Mode, ModeWindow
from .scalars import Scalar

TrigPoly = dict[Mode, Scalar]
SIDES = (1, -1)


def _tp_add(a: TrigPoly, b: TrigPoly) -> TrigPoly:
    out = dict(a)
    for m, c in b.items():
        cur = out.get(m)
        new = c if cur is None else cur + c
        if new:
            out[m] = new
        else:
            out.pop(m, None)
    return out


def _tp_scale(a: TrigPoly, c: Scalar | int | Fraction) -> TrigPoly:
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


def _tp_mul(a: TrigPoly, b: TrigPoly) -> TrigPoly:
    out: TrigPoly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            prod = c1 * c2
            cur = out.get(m)
            new = prod if cur is None else cur + prod
            if new:
                out[m] = new
            else:
                out.pop(m, None)
    return out


def _tp_leaf_derivative(torus: KroneckerTorus, a: TrigPoly) -> TrigPoly:
    out = {}
    for m, c in a.items():
        lam = torus.pairing(m)
        if lam:
            out[m] = c * lam
    return out


class TruncatedSymbol:
    """One-sided homogeneous expansions with a validity watermark.

    ``sides[s][j]`` is the trig-poly coefficient of |xi|^j on the side where
    s*xi > 0.  ``floor`` is the lowest exactly-known order (None: the symbol
    is exact at every order, i.e. a finite sum with no hidden tail).
    """

    __slots__ = ("torus", "sides", "floor")

    def __init__(
        self,
        torus: KroneckerTorus,
        sides: dict[int, dict[int, TrigPoly]],
        floor: int | None = None,
    ):
        self.torus = torus
        clean: dict[int, dict[int, TrigPoly]] = {1: {}, -1: {}}
        for s in SIDES:
            for j, poly in sides.get(s, {}).items():
                kept = {m: c for m, c in poly.items() if c}
                if kept and (floor is None or j >= floor):
                    clean[s][j] = kept
        self.sides = clean
        self.floor = floor

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, torus: KroneckerTorus) -> TruncatedSymbol:
        return cls(torus, {})

    @classmethod
    def radial_power(cls, torus: KroneckerTorus, j: int, side: int | None = None) -> TruncatedSymbol:
        """|xi|^j, on both sides or one."""
        poly = {(0,) * torus.n: torus.field.one}
        sides = {s: {j: dict(poly)} for s in (SIDES if side is None else (side,))}
        return cls(torus, sides)

    @classmethod
    def coordinate_power(cls, torus: KroneckerTorus, j: int) -> TruncatedSymbol:
        """xi^j = (sign xi)^j |xi|^j on both sides."""
        one = torus.field.one
        zero_mode = (0,) * torus.n
        return cls(
            torus,
            {
                1: {j: {zero_mode: one}},
                -1: {j: {zero_mode: one if j % 2 == 0 else -one}},
            },
        )

    @classmethod
    def mode(cls, torus: KroneckerTorus, m: Mode, order: int = 0, side: int | None = None) -> TruncatedSymbol:
        """e_m |xi|^order on both sides (or one side)."""
        poly = {tuple(m): torus.field.one}
        sides = {s: {order: dict(poly)} for s in (SIDES if side is None else (side,))}
        return cls(torus, sides)

    # -- structure ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.sides[1] and not self.sides[-1]

    def order(self) -> int | None:
        orders = [j for s in SIDES for j in self.sides[s]]
        return max(orders) if orders else None

    def lowest(self) -> int | None:
        orders = [j for s in SIDES for j in self.sides[s]]
        return min(orders) if orders else None

    def coefficient(self, side: int, j: int, m: Mode) -> Scalar:
        return self.sides[side].get(j, {}).get(tuple(m), self.torus.field.zero)

    def one_sided(self, side: int) -> TruncatedSymbol:
        return TruncatedSymbol(self.torus, {side: self.sides[side]}, self.floor)

    def __add__(self, other: TruncatedSymbol) -> TruncatedSymbol:
        self._check(other)
        sides = {
            s: _merge_orders(self.sides[s], other.sides[s]) for s in SIDES
        }
        return TruncatedSymbol(self.torus, sides, _floor_max(self.floor, other.floor))

    def __sub__(self, other: TruncatedSymbol) -> TruncatedSymbol:
        return self + other.scale(-1)

    def scale(self, c: Scalar | int | Fraction) -> TruncatedSymbol:
        cc = c if isinstance(c, Scalar) else self.torus.field.scalar(c)
        sides = {
            s: {j: _tp_scale(p, cc) for j, p in self.sides[s].items()} for s in SIDES
        }
        return TruncatedSymbol(self.torus, sides, self.floor)

    def _check(self, other: TruncatedSymbol) -> None:
        if self.torus is not other.torus:
            raise ValidationError("symbols live on different tori")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TruncatedSymbol)
            and self.torus is other.torus
            and self.sides == other.sides
            and self.floor == other.floor
        )

    def agrees_with(self, other: TruncatedSymbol, at_or_above: int) -> bool:
        for s in SIDES:
            orders = set(self.sides[s]) | set(other.sides[s])
            for j in orders:
                if j < at_or_above:
                    continue
                if self.sides[s].get(j, {}) != other.sides[s].get(j, {}):
                    return False
        return True

    def __repr__(self) -> str:
        bits = []
        for s in SIDES:
            for j in sorted(self.sides[s], reverse=True):
                poly = self.sides[s][j]
                terms = ", ".join(
                    f"{c}*e{list(m)}" for m, c in sorted(poly.items())
                )
                bits.append(f"[{'+' if s > 0 else '-'}|xi|^{j}: {terms}]")
        floor = "" if self.floor is None else f" (exact above {self.floor})"
        return "Symbol(" + " ".join(bits or ["0"]) + ")" + floor


def _merge_orders(a: dict[int, TrigPoly], b: dict[int, TrigPoly]) -> dict[int, TrigPoly]:
    out = {j: dict(p) for j, p in a.items()}
    for j, p in b.items():
        out[j] = _tp_add(out.get(j, {}), p)
    return out


def _floor_max(fa: int | None, fb: int | None) -> int | None:
    if fa is None:
        return fb
    if fb is None:
        return fa
    return max(fa, fb)


def _falling(u: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= u - i
    return out


def compose(a: TruncatedSymbol, b: TruncatedSymbol, depth: int) -> TruncatedSymbol:
    """Symbol product to the given expansion depth, watermark tracked.

    The output is exact at every order >= max(order(a)+order(b)-depth,
    floor(a)+order(b), floor(b)+order(a)); lower-order terms are dropped and
    recorded through the watermark, never silently kept half-computed.
    """
    a._check(b)
    if depth < 0:
        raise ValidationError("expansion depth must be nonnegative")
    torus = a.torus
    if a.is_zero() or b.is_zero():
        return TruncatedSymbol.zero(torus)
    hi_a, hi_b = a.order(), b.order()
    assert hi_a is not None and hi_b is not None
    candidates = [hi_a + hi_b - depth]
    if a.floor is not None:
        candidates.append(a.floor + hi_b)
    if b.floor is not None:
        candidates.append(b.floor + hi_a)
    floor = max(candidates)
    sides: dict[int, dict[int, TrigPoly]] = {1: {}, -1: {}}
    for s in SIDES:
        a_side = a.sides[s]
        b_side = b.sides[s]
        if not a_side or not b_side:
            continue
        acc = sides[s]
        # D^k of each b order, reused across k
        b_der: dict[int, TrigPoly] = {v: dict(p) for v, p in b_side.items()}
        for k in range(0, depth + 1):
            coeff_k = Fraction(1)
            for i in range(1, k + 1):
                coeff_k /= i
            for u, pa in a_side.items():
                fall = _falling(u, k)
                if fall == 0:
                    continue
                radial_sign = 1 if (s > 0 or k % 2 == 0) else -1
                factor = torus.field.scalar(Fraction(fall * radial_sign) * coeff_k)
                for v, pb in b_der.items():
                    j = u - k + v
                    if j < floor:
                        continue
                    term = _tp_scale(_tp_mul(pa, pb), factor)
                    if term:
                        acc[j] = _tp_add(acc.get(j, {}), term)
            if k < depth:
                b_der = {
                    v: _tp_leaf_derivative(torus, p) for v, p in b_der.items()
                }
                b_der = {v: p for v, p in b_der.items() if p}
                if not b_der:
                    break
    return TruncatedSymbol(torus, sides, floor)


def commutator(a: TruncatedSymbol, b: TruncatedSymbol, depth: int) -> TruncatedSymbol:
    return compose(a, b, depth) - compose(b, a, depth)


def residue_trace(a: TruncatedSymbol, side: int) -> Scalar:
    """Zero-mode coefficient of the order -1 term on one side (unit volume)."""
    if side not in SIDES:
        raise ValidationError("side must be +1 or -1")
    if a.floor is not None and a.floor > -1:
        raise InsufficientTruncationError(
            f"order -1 lies below the validity watermark {a.floor}"
        )
    zero_mode = (0,) * a.torus.n
    return a.sides[side].get(-1, {}).get(zero_mode, a.torus.field.zero)


# -- derivations -----------------------------------------------------------------


@dataclass(frozen=True)
class Derivation:
    """transverse_i (frame direction), leafwise, or radial (log-commutator)."""

    tag: str  # "transverse" | "leafwise" | "radial"
    index: int = 0

    def key(self) -> tuple[str, int]:
        return (self.tag, self.index)

    def label(self) -> str:
        if self.tag == "transverse":
            return f"transverse_{self.index}"
        return self.tag


def derivation_set(torus: KroneckerTorus) -> list[Derivation]:
    """The n+1 commuting derivations: n-1 transverse, leafwise, radial."""
    out = [Derivation("transverse", i) for i in range(1, torus.n)]
    out.append(Derivation("leafwise"))
    out.append(Derivation("radial"))
    return out


def apply_derivation(
    d: Derivation, a: TruncatedSymbol, depth: int = 6
) -> TruncatedSymbol:
    """Apply a derivation; radial uses the log-derivative expansion.

    radial(a) = sum_{k>=1} ((-1)^(k-1)/k) xi^(-k) D^k a, with xi^(-k) split
    into |xi| powers per side; the output watermark is order(a) - depth.
    """
    torus = a.torus
    if d.tag == "transverse":
        if not 1 <= d.index <= torus.n - 1:
            raise ValidationError(f"transverse index {d.index} out of range")
        sides = {
            s: {
                j: {
                    m: c * m[d.index]
                    for m, c in poly.items()
                    if m[d.index]
                }
                for j, poly in a.sides[s].items()
            }
            for s in SIDES
        }
        return TruncatedSymbol(torus, sides, a.floor)
    if d.tag == "leafwise":
        sides = {
            s: {j: _tp_leaf_derivative(torus, poly) for j, poly in a.sides[s].items()}
            for s in SIDES
        }
        return TruncatedSymbol(torus, sides, a.floor)
    if d.tag == "radial":
        if a.is_zero():
            return a
        if depth < 1:
            raise InsufficientTruncationError("radial derivation needs depth >= 1")
        hi = a.order()
        assert hi is not None
        candidates = [hi - depth]
        if a.floor is not None:
            candidates.append(a.floor - 1)
        floor = max(candidates)
        sides: dict[int, dict[int, TrigPoly]] = {1: {}, -1: {}}
        for s in SIDES:
            derived: dict[int, TrigPoly] = dict(a.sides[s])
            acc = sides[s]
            for k in range(1, depth + 1):
                derived = {
                    u: _tp_leaf_derivative(torus, p) for u, p in derived.items()
                }
                derived = {u: p for u, p in derived.items() if p}
                if not derived:
                    break
                # (-1)^(k-1)/k xi^(-k) = ((-1)^(k-1)/k) s^k |xi|^(-k)
                sign = 1 if k % 2 == 1 else -1
                if s < 0 and k % 2 == 1:
                    sign = -sign
                factor = torus.field.scalar(Fraction(sign, k))
                for u, p in derived.items():
                    j = u - k
                    if j < floor:
                        continue
                    acc[j] = _tp_add(acc.get(j, {}), _tp_scale(p, factor))
        return TruncatedSymbol(torus, sides, floor)
    raise ValidationError(f"unknown derivation tag {d.tag!r}")


# -- cocycles ----------------------------------------------------------------------


def cocycle_evaluate(
    dirs: list[Derivation],
    side: int,
    args: tuple[TruncatedSymbol, ...] | list[TruncatedSymbol],
    depth: int = 6,
) -> Scalar:
    """Evaluate (i_{D_1} ... i_{D_l} trace_side)(a_0, ..., a_l).

    Unfolds to trace(((a_0 o D_1 a_1) o D_2 a_2) o ... o D_l a_l); repeated
    derivation slots are rejected (the basis uses distinct derivations).
    """
    keys = [d.key() for d in dirs]
    if len(set(keys)) != len(keys):
        raise ValidationError("cocycle derivations must be pairwise distinct")
    if len(args) != len(dirs) + 1:
        raise ValidationError(
            f"an l={len(dirs)} cocycle takes {len(dirs) + 1} arguments"
        )
    acc = args[0]
    for d, arg in zip(dirs, args[1:]):
        acc = compose(acc, apply_derivation(d, arg, depth), depth)
    return residue_trace(acc, side)


def coboundary_evaluate(
    dirs: list[Derivation],
    side: int,
    args: list[TruncatedSymbol],
    depth: int = 6,
) -> Scalar:
    """Hochschild coboundary of the iterated-contraction cocycle on a tuple."""
    l = len(dirs)
    if len(args) != l + 2:
        raise ValidationError(f"the coboundary of an l={l} cocycle takes {l + 2} arguments")
    field = args[0].torus.field
    total = field.zero
    for i in range(0, l + 1):
        merged = args[:i] + [compose(args[i], args[i + 1], depth)] + args[i + 2 :]
        value = cocycle_evaluate(dirs, side, merged, depth)
        total = total + (value if i % 2 == 0 else -value)
    wrap = [compose(args[-1], args[0], depth)] + args[1:-1]
    value = cocycle_evaluate(dirs, side, wrap, depth)
    total = total + (value if (l + 1) % 2 == 0 else -value)
    return total


# -- the verification suite ----------------------------------------------------------


def random_symbol(
    torus: KroneckerTorus,
    rng: random.Random,
    mode_bound: int = 1,
    orders: tuple[int, int] = (-3, 2),
) -> TruncatedSymbol:
    """Seeded random symbol: small modes, orders in a fixed range, int coeffs."""
    sides: dict[int, dict[int, TrigPoly]] = {1: {}, -1: {}}
    for s in SIDES:
        for j in range(orders[0], orders[1] + 1):
            if rng.random() < 0.4:
                poly: TrigPoly = {}
                for _ in range(rng.randint(1, 2)):
                    m = tuple(
                        rng.randint(-mode_bound, mode_bound) for _ in range(torus.n)
                    )
                    c = rng.randint(-2, 2)
                    if c:
                        poly[m] = torus.field.scalar(c)
                if poly:
                    sides[s][j] = poly
    return TruncatedSymbol(torus, sides)


@dataclass(frozen=True)
class TraceSuiteReport:
    model: str
    seed: int
    depth: int
    trials: int
    trace_pairs_checked: int
    trace_property_holds: bool
    coboundary_levels: dict[int, bool]
    independence: dict[int, tuple[int, int]]  # l -> (expected, achieved rank)
    collapse_certified: bool
    predicted_dims: list[int]

    @property
    def passed(self) -> bool:
        return (
            self.trace_property_holds
            and all(self.coboundary_levels.values())
            and all(exp == got for exp, got in self.independence.values())
        )

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "seed": self.seed,
            "depth": self.depth,
            "watermark_policy": (
                "every product records the lowest exactly-known order;"
                " all assertions are evaluated at or above that watermark"
            ),
            "trials": self.trials,
            "trace_pairs_checked": self.trace_pairs_checked,
            "trace_property_holds": self.trace_property_holds,
            "coboundary_vanishes": {str(k): v for k, v in sorted(self.coboundary_levels.items())},
            "independence": {
                str(l): {"expected": e, "rank": r}
                for l, (e, r) in sorted(self.independence.items())
            },
            "collapse_certified": self.collapse_certified,
            "predicted_dims": self.predicted_dims,
            "passed": self.passed,
        }


def _crafted_tuples(
    torus: KroneckerTorus, l: int, side: int
) -> list[list[TruncatedSymbol]]:
    """Argument tuples aimed at separating the degree-l cocycles on one side."""
    n = torus.n
    palette: list[Mode] = [
        tuple(1 if j == i else 0 for j in range(n)) for i in range(n)
    ]
    palette.append(tuple(1 for _ in range(n)))
    palette.append(tuple(1 if j <= 1 else 0 for j in range(n)))
    tuples: list[list[TruncatedSymbol]] = []
    combos: list[list[Mode]] = [[]]
    for _slot in range(l):
        combos = [prev + [m] for prev in combos for m in palette]
    for a0_order in (-1, 0):
        for modes in combos:
            m0 = tuple(-sum(m[j] for m in modes) for j in range(n))
            args = [TruncatedSymbol.mode(torus, m0, order=a0_order, side=side)]
            args.extend(TruncatedSymbol.mode(torus, m) for m in modes)
            tuples.append(args)
    return tuples


def verify_traces_and_collapse(
    torus: KroneckerTorus,
    trials: int = 100,
    depth: int = 6,
    seed: int = 0,
    max_level: int = 2,
    window: ModeWindow | None = None,
) -> TraceSuiteReport:
    """Trace property, cocycle coboundaries, and the independence count.

    (a) the residue trace kills `trials` seeded random commutators on both
    sides, evaluated above the watermark; (b) the iterated-contraction
    cocycles have vanishing Hochschild coboundary on random tuples for
    l <= max_level; (c) their evaluation matrix has full rank 2*C(n+1, l);
    the collapse certificate is set when those counts match the closed-form
    dimension predictions.
    """
    from .hochschild import hh_dims_assuming_collapse

    if torus.resonant:
        raise ValidationError("the trace suite needs a nonresonant frequency vector")
    rng = random.Random(seed)
    field = torus.field
    derivations = derivation_set(torus)
    # (a) trace property
    trace_ok = True
    pairs = 0
    while pairs < trials:
        a = random_symbol(torus, rng)
        b = random_symbol(torus, rng)
        if a.is_zero() or b.is_zero():
            continue
        need = (a.order() or 0) + (b.order() or 0) + 1
        comm = commutator(a, b, max(depth, need))
        pairs += 1
        for s in SIDES:
            if residue_trace(comm, s):
                trace_ok = False
    # (b) coboundaries
    coboundary_levels: dict[int, bool] = {}
    for l in range(0, max_level + 1):
        ok = True
        subsets = _derivation_subsets(derivations, l)
        for _ in range(4):
            dirs = subsets[rng.randrange(len(subsets))]
            args = []
            while len(args) < l + 2:
                cand = random_symbol(torus, rng, orders=(-2, 1))
                if not cand.is_zero():
                    args.append(cand)
            for s in SIDES:
                value = coboundary_evaluate(list(dirs), s, args, depth=max(depth, 12))
                if value:
                    ok = False
        coboundary_levels[l] = ok
    # (c) independence
    from .linalg import Echelon

    independence: dict[int, tuple[int, int]] = {}
    for l in range(0, max_level + 1):
        subsets = _derivation_subsets(derivations, l)
        expected = 2 * comb(torus.n + 1, l)
        assert len(subsets) * 2 == expected
        tuples: list[tuple[int, list[TruncatedSymbol]]] = []
        for s in SIDES:
            for args in _crafted_tuples(torus, l, s):
                tuples.append((s, args))
        for _ in range(4):
            s = rng.choice(SIDES)
            args = [random_symbol(torus, rng, orders=(-2, 1))]
            while len(args) < l + 1:
                cand = random_symbol(torus, rng, orders=(-1, 1))
                if not cand.is_zero():
                    args.append(cand)
            tuples.append((s, args))
        ech = Echelon(field)
        for s in SIDES:
            for dirs in subsets:
                vec = {}
                for col, (_ts, args) in enumerate(tuples):
                    if not args[0].sides[s]:
                        continue  # the chain stays supported where a_0 lives
                    value = cocycle_evaluate(list(dirs), s, args, depth=max(depth, 10))
                    if value:
                        vec[col] = value
                if vec:
                    ech.add(vec)
        independence[l] = (expected, ech.dim)
    predicted = hh_dims_assuming_collapse(torus, window or ModeWindow(bound=1))
    certified = (
        all(v for v in coboundary_levels.values())
        and all(e == r for e, r in independence.values())
        and all(
            independence[l][0] == predicted[l]
            for l in independence
            if l < len(predicted)
        )
    )
    return TraceSuiteReport(
        model=repr(torus),
        seed=seed,
        depth=depth,
        trials=trials,
        trace_pairs_checked=pairs,
        trace_property_holds=trace_ok,
        coboundary_levels=coboundary_levels,
        independence=independence,
        collapse_certified=certified and trace_ok,
        predicted_dims=predicted,
    )


def _derivation_subsets(derivations: list[Derivation], l: int) -> list[tuple[Derivation, ...]]:
    from itertools import combinations

    return list(combinations(derivations, l))
