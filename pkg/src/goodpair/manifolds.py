"""Quadratic systems ``g = (g_1, ..., g_l)`` and the manifolds they parametrize.

A system over ``R^dim`` stores one symmetric Hessian per coordinate function,
``g_u(x) = x . H_u . x / 2``, so ``H_u[i][j]`` is the second derivative of
``g_u`` in ``x_i, x_j``.  The manifold is the graph ``(x, g_1(x), ..., g_l(x))``
in ``R^n`` with ``n = dim + l``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .definiteness import DEFAULT_BUDGET, Budget, Verdict, decide
from .errors import ContractError, DimensionError
from .matrices.symbolic import (
    SymbolicMatrix,
    canonical_basis,
    check_independent,
    det_symbolic,
    repeat_blocks,
)
from .poly import LinearForm, Poly


def _frac(x) -> Fraction:
    return Fraction(x) if not isinstance(x, str) else Fraction(x.strip())


@dataclass(frozen=True)
class QuadraticSystem:
    l: int
    dim: int
    hessians: tuple  # l matrices, each a tuple of dim tuples of Fractions

    def __post_init__(self):
        if self.l < 1 or self.dim < 1:
            raise DimensionError("a quadratic system needs l >= 1 and dim >= 1")
        if len(self.hessians) != self.l:
            raise DimensionError(f"expected {self.l} Hessians, got {len(self.hessians)}")
        for u, H in enumerate(self.hessians):
            if len(H) != self.dim or any(len(r) != self.dim for r in H):
                raise DimensionError(f"Hessian {u + 1} is not {self.dim}x{self.dim}")
            for i in range(self.dim):
                for j in range(i + 1, self.dim):
                    if H[i][j] != H[j][i]:
                        raise ContractError(f"Hessian {u + 1} is not symmetric at ({i + 1}, {j + 1})")

    @classmethod
    def from_lists(cls, hessians: Sequence) -> "QuadraticSystem":
        hs = tuple(tuple(tuple(_frac(x) for x in row) for row in H) for H in hessians)
        if not hs:
            raise DimensionError("need at least one Hessian")
        return cls(len(hs), len(hs[0]), hs)

    def coordinate(self, u: int) -> Poly:
        """``g_u`` as a polynomial in ``x_1..x_dim`` (``u`` is 0-based)."""
        H = self.hessians[u]
        terms = {}
        for i in range(self.dim):
            for j in range(i, self.dim):
                c = H[i][j] / 2 if i == j else H[i][j]
                if c:
                    mono = [0] * self.dim
                    mono[i] += 1
                    mono[j] += 1
                    terms[tuple(mono)] = c
        return Poly(self.dim, terms)

    def coordinates(self) -> list[Poly]:
        return [self.coordinate(u) for u in range(self.l)]

    def evaluate(self, x: Sequence) -> tuple:
        """The manifold point ``(x, g(x))``."""
        x = tuple(Fraction(v) for v in x)
        return x + tuple(g.evaluate(x) for g in self.coordinates())

    def perturbed(self, eps, seed: int = 0) -> "QuadraticSystem":
        """Add symmetric rational perturbations of magnitude at most ``eps``."""
        eps = Fraction(eps)
        rng = random.Random(seed)
        out = []
        for H in self.hessians:
            G = [list(r) for r in H]
            for i in range(self.dim):
                for j in range(i, self.dim):
                    d = eps * Fraction(rng.randint(-64, 64), 64)
                    G[i][j] += d
                    if i != j:
                        G[j][i] += d
            out.append(tuple(tuple(r) for r in G))
        return QuadraticSystem(self.l, self.dim, tuple(out))

    def to_json(self) -> list:
        return [[[str(x) for x in row] for row in H] for H in self.hessians]


@dataclass(frozen=True)
class ManifoldSpec:
    n: int
    l: int
    system: QuadraticSystem
    label: str = ""

    def __post_init__(self):
        if self.system.l != self.l or self.system.dim != self.n - self.l:
            raise DimensionError(
                f"system has l={self.system.l}, dim={self.system.dim}; expected l={self.l}, dim={self.n - self.l}"
            )

    def to_json(self) -> dict:
        return {"n": self.n, "l": self.l, "hessians": self.system.to_json(), "label": self.label}

    @classmethod
    def from_json(cls, data) -> "ManifoldSpec":
        if isinstance(data, str):
            data = json.loads(data)
        system = QuadraticSystem.from_lists(data["hessians"])
        return cls(int(data["n"]), int(data["l"]), system, data.get("label", ""))


# --- matrices <-> systems ------------------------------------------------------------


def build_quadratic_system(M: SymbolicMatrix, L: Sequence | None = None) -> QuadraticSystem:
    """Quadratic system whose Lambda matrix is ``M`` with ``z_v -> L_v . s``.

    With ``L_v = (a_{1,v}, ..., a_{l,v})`` an entry ``c z_v`` of ``M`` sets
    ``H_u[i][j] = c a_{u,v}`` for every ``u``.  Signs are kept, so
    ``lambda_matrix`` of the result equals ``build_m_prime(M, L)``.
    """
    l, k = M.l, M.size
    forms = check_independent(canonical_basis(l) if L is None else L, l)
    H = [[[Fraction(0)] * k for _ in range(k)] for _ in range(l)]
    for i in range(k):
        for j in range(k):
            for v, c in enumerate(M.entries[i][j].coeffs):
                if c:
                    for u in range(l):
                        H[u][i][j] += Fraction(c) * Fraction(forms[v].coeffs[u])
    return QuadraticSystem(l, k, tuple(tuple(tuple(r) for r in Hu) for Hu in H))


def lambda_matrix(sys: QuadraticSystem) -> SymbolicMatrix:
    """The s-weighted Hessian combination as a matrix of linear forms in ``s``."""
    rows = []
    for i in range(sys.dim):
        rows.append(tuple(LinearForm(sys.hessians[u][i][j] for u in range(sys.l)) for j in range(sys.dim)))
    return SymbolicMatrix(sys.l, tuple(rows))


def lambda_det(sys: QuadraticSystem) -> Poly:
    return det_symbolic(lambda_matrix(sys))


def check_condition_II(sys: QuadraticSystem, budget: Budget = DEFAULT_BUDGET, workers: int = 1) -> Verdict:
    """Definite ``det Lambda`` means the Hessian combination is regular for every ``s != 0``."""
    return decide(lambda_det(sys), budget, workers)


def ex1_coefficients(sys: QuadraticSystem) -> tuple[Fraction, Fraction, Fraction]:
    """``(A1, A2, A3)`` with ``det Lambda(s) = A1 s1^2 + A2 s2^2 + A3 s1 s2``."""
    if sys.l != 2 or sys.dim != 2:
        raise ContractError(f"needs l = 2 and dim = 2, got l = {sys.l}, dim = {sys.dim}")
    return ex1_formulas(*sys.hessians)


def ex1_formulas(H1, H2):
    """The three coefficient formulas over any commutative ring (Fractions or Polys)."""
    a1 = H1[0][0] * H1[1][1] - H1[0][1] * H1[0][1]
    a2 = H2[0][0] * H2[1][1] - H2[0][1] * H2[0][1]
    a3 = H1[0][0] * H2[1][1] - 2 * H1[0][1] * H2[0][1] + H2[0][0] * H1[1][1]
    return a1, a2, a3


def m_delta_coefficients_symbolic() -> tuple[Poly, Poly, Poly]:
    """``(A1, A2, A3)`` for ``M_delta`` as polynomials in ``delta`` (one variable)."""
    d = Poly.variable(1, 0)
    c = lambda x: Poly.constant(1, x)
    H1 = [[c(2), d], [d, c(-2)]]
    H2 = [[c(2), c(0)], [c(0), c(-2)]]
    return ex1_formulas(H1, H2)


def ex1_criterion(sys: QuadraticSystem) -> bool:
    """``A3^2 < 4 A1 A2``: the binary quadratic ``det Lambda`` is definite."""
    a1, a2, a3 = ex1_coefficients(sys)
    return a3 * a3 < 4 * a1 * a2


# --- condition (I) ---------------------------------------------------------------------


def all_power_range(n: int, l: int) -> tuple[int, int] | None:
    """Exponents ``s`` in ``[n-l, 2(n-l-1))`` for which power functions qualify; ``None`` if empty."""
    if n <= l:
        raise ContractError("need n > l")
    lo, hi = n - l, 2 * (n - l - 1)
    return (lo, hi) if lo < hi else None


def condition_I_gate(n: int, l: int, s) -> bool:
    if n <= l:
        raise ContractError("need n > l")
    return Fraction(s) < 2 * (n - l - 1)


# --- catalog ------------------------------------------------------------------------------


def _nonzero(delta, what: str = "delta") -> Fraction:
    d = Fraction(delta)
    if d == 0:
        raise ContractError(
            f"{what} must be nonzero: at {what} = 0 the Hessian combination is singular "
            "for some s != 0 (pass allow_zero to build it anyway)"
        )
    return d


def _m_delta_blocks(deltas: Sequence[Fraction]) -> QuadraticSystem:
    t = len(deltas)
    k = 2 * t
    H1 = [[Fraction(0)] * k for _ in range(k)]
    H2 = [[Fraction(0)] * k for _ in range(k)]
    for b, d in enumerate(deltas):
        i, j = 2 * b, 2 * b + 1
        H1[i][i], H1[j][j], H1[i][j], H1[j][i] = Fraction(2), Fraction(-2), d, d
        H2[i][i], H2[j][j] = Fraction(2), Fraction(-2)
    return QuadraticSystem(2, k, (tuple(map(tuple, H1)), tuple(map(tuple, H2))))


def m_delta(delta=1, allow_zero: bool = False) -> ManifoldSpec:
    """``(x, y, x^2 - y^2 + delta x y, x^2 - y^2)`` in ``R^4``."""
    d = Fraction(delta) if allow_zero else _nonzero(delta)
    return ManifoldSpec(4, 2, _m_delta_blocks([d]), f"M_delta(delta={d})")


def e2(deltas: Sequence = (1, 1)) -> ManifoldSpec:
    """Sums of ``t >= 2`` independent ``M_delta`` blocks, ``l = 2``, ``n = 2t + 2``."""
    if len(deltas) < 2:
        raise ContractError("the product family needs t >= 2 blocks")
    ds = [_nonzero(d, f"delta_{i + 1}") for i, d in enumerate(deltas)]
    t = len(ds)
    return ManifoldSpec(2 * t + 2, 2, _m_delta_blocks(ds), f"e2(deltas={','.join(map(str, ds))})")


M37_ROWS = [
    ["z1", "z2", "z3", "-z3"],
    ["z2", "-z1", "z3", "z3"],
    ["z3", "z3", "z1", "z2"],
    ["-z3", "z3", "z2", "-z1"],
]

M24_ROWS = [["z1", "z2"], ["z2", "-z1"]]


def m37_matrix() -> SymbolicMatrix:
    return SymbolicMatrix.from_rows(3, M37_ROWS)


def m24_matrix() -> SymbolicMatrix:
    return SymbolicMatrix.from_rows(2, M24_ROWS)


def m37() -> ManifoldSpec:
    return ManifoldSpec(7, 3, build_quadratic_system(m37_matrix()), "M37")


def m37_blocks(t: int = 1) -> ManifoldSpec:
    """``t + 1`` diagonal copies of the 4x4 block: ``l = 3``, ``n = 7 + 4t``."""
    if t < 0:
        raise ContractError("t must be nonnegative")
    M = repeat_blocks(m37_matrix(), t + 1)
    return ManifoldSpec(7 + 4 * t, 3, build_quadratic_system(M), f"M37x{t + 1}")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    build: Callable[..., ManifoldSpec]
    defaults: dict


CATALOG = {
    "m_delta": CatalogEntry("m_delta", "l=2, n=4; parameter delta != 0", m_delta, {"delta": 1}),
    "e2": CatalogEntry("e2", "l=2, n=2t+2; parameters delta_1..delta_t != 0, t >= 2", e2, {"deltas": (1, 1)}),
    "m37": CatalogEntry("m37", "l=3, n=7; from the 4x4 definite-determinant matrix", m37, {}),
    "m37_blocks": CatalogEntry("m37_blocks", "l=3, n=7+4t; block-diagonal repetition", m37_blocks, {"t": 1}),
}


def example_catalog() -> list[ManifoldSpec]:
    """Every catalog family instantiated at its default parameters."""
    return [e.build(**e.defaults) for e in CATALOG.values()]
