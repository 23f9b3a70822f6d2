"""Sparse exact linear algebra over a NumberField.

Rank, kernel and quotient dimensions via pivoted Gauss-Jordan elimination
with exact field arithmetic (pivot rows are normalized to 1 to keep
coefficient growth under control).  No floating point anywhere.
"""

from __future__ import annotations

from .errors import ComplexViolationError, ShapeError
from .scalars import NumberField, Scalar

SparseVector = dict[int, Scalar]


class SparseMatrix:
    """Immutable sparse matrix: entries keyed by (row, col), no stored zeros."""

    __slots__ = ("rows", "cols", "entries", "field", "_cols_cache")

    def __init__(
        self,
        rows: int,
        cols: int,
        entries: dict[tuple[int, int], Scalar],
        field: NumberField,
    ):
        if rows < 0 or cols < 0:
            raise ShapeError("negative matrix dimensions")
        clean: dict[tuple[int, int], Scalar] = {}
        for (r, c), v in entries.items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise ShapeError(f"entry at ({r}, {c}) outside a {rows}x{cols} matrix")
            if v.field != field:
                raise ShapeError("matrix entry from a different field")
            if v:
                clean[(r, c)] = v
        self.rows = rows
        self.cols = cols
        self.entries = clean
        self.field = field
        self._cols_cache: dict[int, dict[int, Scalar]] | None = None

    @classmethod
    def from_triples(
        cls,
        rows: int,
        cols: int,
        triples: list[tuple[int, int, Scalar]],
        field: NumberField,
    ) -> SparseMatrix:
        entries: dict[tuple[int, int], Scalar] = {}
        for r, c, v in triples:
            if (r, c) in entries:
                raise ShapeError(f"duplicate entry position ({r}, {c})")
            entries[(r, c)] = v
        return cls(rows, cols, entries, field)

    @classmethod
    def from_rows(cls, dense_rows: list[list[Scalar]], field: NumberField) -> SparseMatrix:
        rows = len(dense_rows)
        cols = len(dense_rows[0]) if dense_rows else 0
        entries = {}
        for r, row in enumerate(dense_rows):
            if len(row) != cols:
                raise ShapeError("ragged rows")
            for c, v in enumerate(row):
                if v:
                    entries[(r, c)] = v
        return cls(rows, cols, entries, field)

    def row_vectors(self) -> list[SparseVector]:
        out: list[SparseVector] = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def transpose(self) -> SparseMatrix:
        return SparseMatrix(
            self.cols,
            self.rows,
            {(c, r): v for (r, c), v in self.entries.items()},
            self.field,
        )

    def matmul(self, other: SparseMatrix) -> SparseMatrix:
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        by_row_other: list[SparseVector] = other.row_vectors()
        acc: dict[tuple[int, int], Scalar] = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row_other[k].items():
                key = (r, c)
                prod = v * w
                if key in acc:
                    acc[key] = acc[key] + prod
                else:
                    acc[key] = prod
        return SparseMatrix(self.rows, other.cols, acc, self.field)

    def apply(self, vec: SparseVector) -> SparseVector:
        out: SparseVector = {}
        cols = self._columns()
        for c, x in vec.items():
            for r, v in cols.get(c, {}).items():
                prod = v * x
                if r in out:
                    out[r] = out[r] + prod
                else:
                    out[r] = prod
        return {r: v for r, v in out.items() if v}

    def _columns(self) -> dict[int, dict[int, Scalar]]:
        if self._cols_cache is None:
            cols: dict[int, dict[int, Scalar]] = {}
            for (r, c), v in self.entries.items():
                cols.setdefault(c, {})[r] = v
            self._cols_cache = cols
        return self._cols_cache

    def is_zero(self) -> bool:
        return not self.entries

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


def _subtract_scaled(work: SparseVector, row: SparseVector, coeff: Scalar) -> None:
    """work -= coeff * row, in place, dropping exact zeros."""
    for c, v in row.items():
        delta = coeff * v
        cur = work.get(c)
        new = -delta if cur is None else cur - delta
        if new:
            work[c] = new
        else:
            work.pop(c, None)


class Echelon:
    """Incrementally maintained reduced row echelon span over a field.

    Invariant: pivot rows are normalized to pivot entry 1 and carry no
    entries at other pivot columns, so reduction is a single sweep.
    """

    __slots__ = ("field", "pivot_rows")

    def __init__(self, field: NumberField):
        self.field = field
        self.pivot_rows: dict[int, SparseVector] = {}

    @property
    def dim(self) -> int:
        return len(self.pivot_rows)

    def reduce(self, vec: SparseVector) -> SparseVector:
        """Return vec reduced modulo the current span (a fresh dict)."""
        work = {c: v for c, v in vec.items() if v}
        for c in sorted(set(work) & self.pivot_rows.keys()):
            coeff = work.get(c)
            if coeff:
                _subtract_scaled(work, self.pivot_rows[c], coeff)
        return work

    def add(self, vec: SparseVector) -> bool:
        """Insert vec into the span; True if the dimension grew."""
        residual = self.reduce(vec)
        if not residual:
            return False
        lead = min(residual)
        inv = residual[lead].inverse()
        normalized = {c: v * inv for c, v in residual.items()}
        for prow in self.pivot_rows.values():
            coeff = prow.get(lead)
            if coeff:
                _subtract_scaled(prow, normalized, coeff)
        self.pivot_rows[lead] = normalized
        return True

    def contains(self, vec: SparseVector) -> bool:
        return not self.reduce(vec)

    def extend(self, vectors: list[SparseVector]) -> int:
        added = 0
        for v in vectors:
            if self.add(v):
                added += 1
        return added


def _rref(matrix: SparseMatrix) -> tuple[dict[int, SparseVector], list[int]]:
    """Reduced row echelon form; returns (pivot_col -> row, free columns)."""
    ech = Echelon(matrix.field)
    for row in matrix.row_vectors():
        if row:
            ech.add(row)
    pivots = ech.pivot_rows
    free = [c for c in range(matrix.cols) if c not in pivots]
    return pivots, free


def rank(matrix: SparseMatrix) -> int:
    pivots, _ = _rref(matrix)
    return len(pivots)


def rank_kernel(matrix: SparseMatrix) -> tuple[int, list[SparseVector]]:
    """Exact rank and a basis of the right kernel (vectors as {col: Scalar}).

    Each kernel vector v satisfies  matrix @ v = 0; the basis vectors are
    linearly independent and rank + len(basis) = cols.
    """
    pivots, free = _rref(matrix)
    one = matrix.field.one
    kernel: list[SparseVector] = []
    for f in free:
        vec: SparseVector = {f: one}
        for pcol, prow in pivots.items():
            c = prow.get(f)
            if c is not None and c:
                vec[pcol] = -c
        kernel.append(vec)
    return len(pivots), kernel


def kernel_dim(matrix: SparseMatrix) -> int:
    return matrix.cols - rank(matrix)


def quotient_dim(kernel_of: SparseMatrix, image_of: SparseMatrix) -> int:
    """dim ker(kernel_of) - dim im(image_of), with the containment checked.

    The image space im(image_of) must lie inside ker(kernel_of); violation
    signals a broken differential and raises ComplexViolationError.
    """
    if kernel_of.cols != image_of.rows:
        raise ShapeError(
            f"spaces disagree: kernel side has dim {kernel_of.cols}, image side {image_of.rows}"
        )
    if not kernel_of.matmul(image_of).is_zero():
        raise ComplexViolationError("image is not contained in the kernel (d^2 != 0)")
    out = kernel_dim(kernel_of) - rank(image_of)
    if out < 0:  # unreachable once containment holds; guards an engine bug
        raise ComplexViolationError("negative quotient dimension")
    return out


def span_dim(field: NumberField, vectors: list[SparseVector]) -> int:
    ech = Echelon(field)
    ech.extend(vectors)
    return ech.dim


def integer_kernel(rows: list[list[int]], n: int) -> list[tuple[int, ...]]:
    """Basis of the lattice {m in Z^n : A m = 0} for an integer matrix A.

    Unimodular column reduction;  the returned basis generates the full
    integer kernel (saturated), each vector normalized so its first nonzero
    entry is positive.
    """
    work = [list(r) for r in rows]
    cols = [[1 if i == j else 0 for i in range(n)] for j in range(n)]  # tracker
    active = list(range(n))
    for r in range(len(work)):
        live = [j for j in active if work[r][j] != 0]
        while len(live) > 1:
            live.sort(key=lambda j: abs(work[r][j]))
            j0 = live[0]
            a0 = work[r][j0]
            for j in live[1:]:
                q = work[r][j] // a0
                if q:
                    for rr in range(len(work)):
                        work[rr][j] -= q * work[rr][j0]
                    for t in range(n):
                        cols[j][t] -= q * cols[j0][t]
            live = [j for j in live if work[r][j] != 0]
        if live:
            active.remove(live[0])
    basis = []
    for j in sorted(active):
        vec = tuple(cols[j])
        lead = next((x for x in vec if x != 0), 0)
        if lead < 0:
            vec = tuple(-x for x in vec)
        if any(vec):
            basis.append(vec)
    return basis
