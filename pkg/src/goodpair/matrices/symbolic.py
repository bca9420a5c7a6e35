"""Symmetric matrices whose entries are linear forms in ``z_1..z_l``."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import ContractError, DimensionError
from ..poly import LinearForm, Poly


@dataclass(frozen=True)
class SymbolicMatrix:
    l: int
    entries: tuple  # tuple[tuple[LinearForm, ...], ...]

    def __post_init__(self):
        if self.l < 1:
            raise DimensionError("a symbolic matrix needs at least one variable")
        k = len(self.entries)
        for i, row in enumerate(self.entries):
            if len(row) != k:
                raise DimensionError(f"row {i} has length {len(row)}, expected {k}")
            for f in row:
                if not isinstance(f, LinearForm):
                    raise ContractError("entries must be LinearForm instances")
                if f.nvars != self.l:
                    raise DimensionError(f"entry {f} has {f.nvars} coefficients, expected {self.l}")
        for i in range(k):
            for j in range(i + 1, k):
                if self.entries[i][j] != self.entries[j][i]:
                    raise ContractError(f"matrix is not symmetric at ({i + 1}, {j + 1})")

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij) -> LinearForm:
        i, j = ij
        return self.entries[i][j]

    # construction -------------------------------------------------------------

    @classmethod
    def from_rows(cls, l: int, rows: Sequence[Sequence]) -> "SymbolicMatrix":
        """Build from rows of LinearForms, coefficient lists or strings like ``"-z3"``."""
        def conv(x):
            if isinstance(x, LinearForm):
                return x
            if isinstance(x, str):
                return LinearForm.parse(x, l)
            if isinstance(x, int) and x == 0:
                return LinearForm.zero(l)
            return LinearForm(x)

        return cls(l, tuple(tuple(conv(x) for x in row) for row in rows))

    @classmethod
    def from_upper(cls, l: int, size: int, upper: Sequence) -> "SymbolicMatrix":
        """Build from the row-major upper triangle (diagonal included)."""
        expected = size * (size + 1) // 2
        if len(upper) != expected:
            raise DimensionError(f"upper triangle needs {expected} entries, got {len(upper)}")
        grid = [[None] * size for _ in range(size)]
        it = iter(upper)
        for i in range(size):
            for j in range(i, size):
                grid[i][j] = grid[j][i] = next(it)
        return cls.from_rows(l, grid)

    @classmethod
    def empty(cls, l: int) -> "SymbolicMatrix":
        return cls(l, ())

    def upper(self) -> list[LinearForm]:
        k = self.size
        return [self.entries[i][j] for i in range(k) for j in range(i, k)]

    def is_alphabet(self) -> bool:
        try:
            for f in self.upper():
                f.alphabet_code()
        except ContractError:
            return False
        return True

    def variables_present(self) -> set[int]:
        used = set()
        for f in self.upper():
            used.update(i for i, c in enumerate(f.coeffs) if c)
        return used

    def evaluate(self, point: Sequence) -> list[list[Fraction]]:
        if len(point) != self.l:
            raise DimensionError("point length does not match variable count")
        return [[Fraction(f.evaluate(point)) for f in row] for row in self.entries]

    def map_entries(self, fn, l: int | None = None) -> "SymbolicMatrix":
        return SymbolicMatrix(self.l if l is None else l,
                              tuple(tuple(fn(f) for f in row) for row in self.entries))

    # serialization -----------------------------------------------------------

    def to_json(self, n: int | None = None, var: str = "z") -> dict:
        out = {"l": self.l}
        out["n"] = self.l + self.size if n is None else n
        out["entries"] = [[f.format(var) for f in row] for row in self.entries]
        return out

    @classmethod
    def from_json(cls, data) -> "SymbolicMatrix":
        if isinstance(data, str):
            data = json.loads(data)
        l = int(data["l"])
        rows = data["entries"]
        k = len(rows)
        if "n" in data and int(data["n"]) - l != k:
            raise DimensionError(f"n - l = {int(data['n']) - l} but matrix has size {k}")
        if all(len(r) == k for r in rows):
            return cls.from_rows(l, rows)
        # upper-triangle form: row i lists entries (i, i..k-1)
        if all(len(r) == k - i for i, r in enumerate(rows)):
            flat = [x for r in rows for x in r]
            return cls.from_upper(l, k, flat)
        raise DimensionError("entries are neither a full square nor an upper triangle")

    def format(self, var: str = "z") -> str:
        cells = [[f.format(var) for f in row] for row in self.entries]
        width = max((len(c) for row in cells for c in row), default=1)
        return "\n".join("[" + "  ".join(c.rjust(width) for c in row) + "]" for row in cells)


def alphabet_matrix(l: int, rows: Sequence[Sequence[str]]) -> SymbolicMatrix:
    return SymbolicMatrix.from_rows(l, rows)


# --- determinant -----------------------------------------------------------------


def _laplace(polys: list[list[Poly]], nvars: int) -> Poly:
    k = len(polys)
    memo: dict[int, Poly] = {}

    def minor(row: int, cols: int) -> Poly:
        # determinant of rows row..k-1 restricted to the column bitmask ``cols``
        if row == k:
            return Poly.constant(nvars, 1)
        hit = memo.get(cols)
        if hit is not None:
            return hit
        total = Poly.zero(nvars)
        pos = 0
        for j in range(k):
            if not cols >> j & 1:
                continue
            e = polys[row][j]
            if not e.is_zero:
                sub = minor(row + 1, cols & ~(1 << j))
                if not sub.is_zero:
                    term = e * sub
                    total = total + term if pos % 2 == 0 else total - term
            pos += 1
        memo[cols] = total
        return total

    return minor(0, (1 << k) - 1)


def _bareiss(polys: list[list[Poly]], nvars: int) -> Poly:
    a = [list(row) for row in polys]
    k = len(a)
    sign = 1
    prev = Poly.constant(nvars, 1)
    for c in range(k - 1):
        if a[c][c].is_zero:
            swap = next((r for r in range(c + 1, k) if not a[r][c].is_zero), None)
            if swap is None:
                return Poly.zero(nvars)
            a[c], a[swap] = a[swap], a[c]
            sign = -sign
        p = a[c][c]
        for i in range(c + 1, k):
            for j in range(c + 1, k):
                a[i][j] = (a[i][j] * p - a[i][c] * a[c][j]).exact_div(prev)
        prev = p
    det = a[k - 1][k - 1]
    return det if sign > 0 else -det


def det_symbolic(M: SymbolicMatrix) -> Poly:
    """Exact determinant as a form of degree ``M.size`` in ``z_1..z_l``.

    Cofactor expansion with memoized minors up to size 8, fraction-free
    (Bareiss) elimination beyond.
    """
    k = M.size
    if k == 0:
        return Poly.constant(M.l, 1)
    polys = [[f.to_poly() for f in row] for row in M.entries]
    if k <= 8:
        return _laplace(polys, M.l)
    return _bareiss(polys, M.l)


# --- composition ---------------------------------------------------------------------


def block_compose(A: SymbolicMatrix, B: SymbolicMatrix) -> SymbolicMatrix:
    if A.l != B.l:
        raise DimensionError(f"cannot compose matrices over {A.l} and {B.l} variables")
    ka, kb = A.size, B.size
    zero = LinearForm.zero(A.l)
    rows = []
    for i in range(ka):
        rows.append(tuple(A.entries[i]) + (zero,) * kb)
    for i in range(kb):
        rows.append((zero,) * ka + tuple(B.entries[i]))
    return SymbolicMatrix(A.l, tuple(rows))


def repeat_blocks(M: SymbolicMatrix, copies: int) -> SymbolicMatrix:
    if copies < 0:
        raise ContractError("number of copies must be nonnegative")
    out = SymbolicMatrix.empty(M.l)
    for _ in range(copies):
        out = block_compose(out, M)
    return out


def _check_partition(merge: Sequence[Sequence[int]], l: int) -> list[list[int]]:
    classes = [list(c) for c in merge]
    seen: list[int] = []
    for c in classes:
        if not c:
            raise ContractError("partition classes must be nonempty")
        seen.extend(c)
    if sorted(seen) != list(range(1, l + 1)):
        raise ContractError(f"{merge} is not a partition of {{1..{l}}}")
    return classes


def specialize_vars(M: SymbolicMatrix, merge: Sequence[Sequence[int]]) -> SymbolicMatrix:
    """Identify the variables in each class of ``merge`` (1-based indices).

    Class ``c`` becomes variable ``c+1`` of the result, so the result lives over
    ``len(merge)`` variables.  The matrix size is unchanged.
    """
    classes = _check_partition(merge, M.l)
    target = {v - 1: ci for ci, c in enumerate(classes) for v in c}
    new_l = len(classes)

    def fn(f: LinearForm) -> LinearForm:
        out = [Fraction(0)] * new_l
        for v, c in enumerate(f.coeffs):
            out[target[v]] += c
        return LinearForm(out)

    return M.map_entries(fn, new_l)


def specialize_poly(P: Poly, merge: Sequence[Sequence[int]]) -> Poly:
    """The same identification applied to a polynomial in ``z_1..z_l``."""
    classes = _check_partition(merge, P.nvars)
    new_l = len(classes)
    images = [None] * P.nvars
    for ci, c in enumerate(classes):
        for v in c:
            images[v - 1] = Poly.variable(new_l, ci)
    return P.substitute(images)


def _rank(vectors: Sequence[Sequence]) -> int:
    rows = [[Fraction(x) for x in v] for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / rows[rank][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def check_independent(L: Sequence[LinearForm], l: int) -> list[LinearForm]:
    forms = [f if isinstance(f, LinearForm) else LinearForm(f) for f in L]
    if len(forms) != l:
        raise DimensionError(f"need {l} linear forms, got {len(forms)}")
    for f in forms:
        if f.nvars != l:
            raise DimensionError(f"linear form {f} has {f.nvars} coefficients, expected {l}")
    if _rank([f.coeffs for f in forms]) != l:
        raise ContractError("the linear forms L_v are linearly dependent")
    return forms


def build_m_prime(M: SymbolicMatrix, L: Sequence) -> SymbolicMatrix:
    """Replace ``z_v`` by ``L_v . s`` in every entry (signs and scalars kept)."""
    forms = check_independent(L, M.l)

    def fn(f: LinearForm) -> LinearForm:
        out = LinearForm.zero(M.l)
        for v, c in enumerate(f.coeffs):
            if c:
                out = out + forms[v] * c
        return out

    return M.map_entries(fn)


def canonical_basis(l: int) -> list[LinearForm]:
    return [LinearForm.unit(l, v) for v in range(l)]


# --- obstructions ------------------------------------------------------------------

PASSES = "Passes"
FAILS_PARITY = "FailsParity"
FAILS_DIMENSION = "FailsDimension"


@dataclass(frozen=True)
class ObstructionReport:
    l: int
    n: int
    status: str
    parity_fails: bool
    dimension_fails: bool

    @property
    def passes(self) -> bool:
        return self.status == PASSES

    def describe(self) -> str:
        if self.passes:
            return f"({self.l},{self.n}) passes both obstructions"
        parts = []
        if self.parity_fails:
            parts.append(f"Obstruction 1 (parity): n-l = {self.n - self.l} is odd and l >= 2")
        if self.dimension_fails:
            parts.append(f"Obstruction 2 (dimension): n = {self.n} < 2l = {2 * self.l}")
        return "; ".join(parts)


def obstruction_check(l: int, n: int) -> ObstructionReport:
    if not n > l >= 1:
        raise ContractError(f"need n > l >= 1, got l={l}, n={n}")
    parity = l >= 2 and (n - l) % 2 == 1
    dim = n < 2 * l
    status = FAILS_PARITY if parity else FAILS_DIMENSION if dim else PASSES
    return ObstructionReport(l, n, status, parity, dim)
