"""Definiteness of homogeneous forms.

Decides whether a form ``P`` in ``l`` variables keeps a strict sign on
``R^l \\ {0}``.  Every verdict is backed by something that can be re-checked
without trusting the search that produced it:

* ``Indefinite`` carries an exact rational witness (a zero of ``P``, or a point
  whose value has the opposite sign to a reference point).  For binary forms
  whose only zeros are irrational double roots, the witness is an isolating
  interval for a real root of ``P(1, t)`` instead, possibly after restricting
  ``P`` to a rational plane.
* ``PositiveDefinite`` / ``NegativeDefinite`` carry a Sturm certificate (two
  variables) or a box tree with strictly positive interval lower bounds on each
  cube face ``{z_v = 1}`` (three or more variables).

See :mod:`goodpair.certificates` for the independent checker.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Optional, Sequence

from . import sturm
from .errors import ContractError
from .poly import Poly

POSITIVE = "PositiveDefinite"
NEGATIVE = "NegativeDefinite"
INDEFINITE = "Indefinite"
ZERO = "IdenticallyZero"
UNKNOWN = "Unknown"

DEFINITE_KINDS = (POSITIVE, NEGATIVE)


@dataclass(frozen=True)
class Budget:
    max_boxes: int = 1_000_000
    max_depth: int = 24
    sample_count: int = 512
    seed: int = 0

    def __post_init__(self):
        for name in ("max_boxes", "max_depth", "sample_count"):
            if getattr(self, name) <= 0:
                raise ContractError(f"budget field {name} must be positive")


DEFAULT_BUDGET = Budget()


@dataclass
class Verdict:
    kind: str
    witness: Optional[tuple] = None
    witness_value: Optional[Fraction] = None
    reference: Optional[tuple] = None
    certificate: Optional[dict] = None
    effort: dict = field(default_factory=dict)

    @property
    def is_definite(self) -> bool:
        return self.kind in DEFINITE_KINDS

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind, "effort": dict(self.effort)}
        if self.witness is not None:
            out["witness"] = [str(Fraction(x)) for x in self.witness]
            out["witness_value"] = str(Fraction(self.witness_value))
        if self.reference is not None:
            out["reference"] = [str(Fraction(x)) for x in self.reference]
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Verdict":
        def pt(key):
            v = data.get(key)
            return None if v is None else tuple(Fraction(x) for x in v)

        wv = data.get("witness_value")
        return cls(
            kind=data["kind"],
            witness=pt("witness"),
            witness_value=None if wv is None else Fraction(wv),
            reference=pt("reference"),
            certificate=data.get("certificate"),
            effort=dict(data.get("effort", {})),
        )


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _unit(l: int, v: int, sign: int = 1) -> tuple:
    return tuple(sign if i == v else 0 for i in range(l))


def _require_homogeneous(P: Poly) -> int:
    d = P.homogeneity_degree()
    if d is None:
        raise ContractError("definiteness is only decided for homogeneous forms")
    return d


def indefinite(P: Poly, witness, reference=None, **extra) -> Verdict:
    witness = tuple(Fraction(x) for x in witness)
    value = Fraction(P.evaluate(witness))
    if reference is not None:
        reference = tuple(Fraction(x) for x in reference)
    return Verdict(INDEFINITE, witness=witness, witness_value=value, reference=reference, **extra)


# --- parity and cheap refutation ---------------------------------------------


def parity_shortcut(P: Poly) -> Optional[Verdict]:
    """Settle odd-degree and zero forms without search.

    An odd form satisfies ``P(-z) = -P(z)``, so either ``P(e1) = 0`` or the
    antipodal pair ``e1, -e1`` straddles zero.
    """
    d = _require_homogeneous(P)
    if P.is_zero:
        return Verdict(ZERO, effort={"method": "parity"})
    if d % 2 == 0:
        return None
    e1 = _unit(P.nvars, 0)
    if P.evaluate(e1) == 0:
        return indefinite(P, e1, effort={"method": "parity"})
    sgn = _sign(P.evaluate(e1))
    # the point with nonpositive value relative to the sign at e1
    return indefinite(P, _unit(P.nvars, 0, -1), reference=e1, effort={"method": "parity", "ref_sign": sgn})


def sample_points(l: int, count: int, seed: int = 0) -> list[tuple]:
    """Deterministic probe points: axes, pairwise diagonals, then random rationals."""
    pts = [_unit(l, v) for v in range(l)]
    for i in range(l):
        for j in range(i + 1, l):
            for sj in (1, -1):
                pts.append(tuple(1 if k == i else sj if k == j else 0 for k in range(l)))
    rng = random.Random(seed)
    while len(pts) < count:
        den = rng.choice((1, 2, 3, 4, 5, 7, 8, 16, 64))
        pts.append(tuple(Fraction(rng.randint(-den, den), den) for _ in range(l)))
    return pts[: max(count, l)]


@dataclass(frozen=True)
class Refutation:
    point: tuple
    value: Fraction
    reference: Optional[tuple]


def quick_refute(P: Poly, budget: Budget = DEFAULT_BUDGET) -> Optional[Refutation]:
    """Look for a zero or a sign change of ``P`` on a fixed probe set.

    Exact zeros are preferred over sign changes.  ``None`` is not a claim of
    definiteness.
    """
    _require_homogeneous(P)
    l = P.nvars
    if l == 0:
        return None
    ref = None
    ref_sign = 0
    flip = None
    for pt in sample_points(l, budget.sample_count, budget.seed):
        if not any(pt):
            continue
        v = P.evaluate(pt)
        if v == 0:
            return Refutation(tuple(Fraction(x) for x in pt), Fraction(0), None)
        if ref is None:
            ref, ref_sign = pt, _sign(v)
        elif flip is None and _sign(v) != ref_sign:
            flip = (pt, v)
    if flip is not None:
        return Refutation(
            tuple(Fraction(x) for x in flip[0]), Fraction(flip[1]), tuple(Fraction(x) for x in ref)
        )
    return None


# --- binary forms --------------------------------------------------------------


def dehomogenize_binary(P: Poly) -> list[Fraction]:
    """Coefficients of ``P(1, t)`` in ascending powers of ``t``."""
    d = P.degree
    coeffs = [Fraction(0)] * (d + 1)
    for (a, b), c in P.terms():
        coeffs[b] = Fraction(c)
    return sturm.trim(coeffs)


def decide_two_vars(P: Poly) -> Verdict:
    """Exact decision for binary forms via Sturm sequences; never Unknown."""
    d = _require_homogeneous(P)
    if P.nvars != 2:
        raise ContractError(f"decide_two_vars needs a binary form, got {P.nvars} variables")
    if P.is_zero:
        return Verdict(ZERO, effort={"method": "sturm"})
    if d % 2 == 1:
        return parity_shortcut(P)
    a = P.evaluate((1, 0))
    b = P.evaluate((0, 1))
    effort = {"method": "sturm"}
    if a == 0:
        return indefinite(P, (1, 0), effort=effort)
    if b == 0:
        return indefinite(P, (0, 1), effort=effort)
    if _sign(a) != _sign(b):
        return indefinite(P, (0, 1), reference=(1, 0), effort=effort)
    f = dehomogenize_binary(P)
    chain = sturm.sturm_chain(f)
    roots = sturm.count_roots(chain)
    effort["chain_length"] = len(chain)
    if roots == 0:
        kind = POSITIVE if a > 0 else NEGATIVE
        cert = {"method": "sturm", "real_roots": 0, "chain_length": len(chain)}
        return Verdict(kind, certificate=cert, effort=effort)
    return _binary_witness(P, f, effort)


def _binary_witness(P: Poly, f: list, effort: dict) -> Verdict:
    ref_sign = _sign(f[0])  # f(0) = P(1, 0), nonzero here
    lo, hi = sturm.isolate_roots(f)[0]
    for x in (hi, lo):
        if sturm.horner(f, x) == 0:
            return indefinite(P, (1, x), effort=effort)
    if _sign(sturm.horner(f, lo)) != _sign(sturm.horner(f, hi)):
        x = lo if _sign(sturm.horner(f, lo)) != ref_sign else hi
        return indefinite(P, (1, x), reference=(1, 0), effort=effort)
    # even multiplicity: no sign change, the zero itself is the only witness
    rr = sturm.rational_roots(sturm.gcd_poly(f, sturm.derivative(f)))
    if rr:
        return indefinite(P, (1, rr[0]), effort=effort)
    cert = {"method": "root-interval", "interval": [str(lo), str(hi)]}
    return Verdict(INDEFINITE, certificate=cert, effort=effort)


# --- restriction to rational planes ------------------------------------------------


def plane_directions(l: int) -> list[tuple]:
    """Vectors in ``{-1, 0, 1}^l`` with positive leading entry, sparsest first."""
    out = [v for v in product((0, 1, -1), repeat=l) if any(v) and v[next(i for i, x in enumerate(v) if x)] > 0]
    out.sort(key=lambda v: (sum(1 for x in v if x), [abs(x) for x in v][::-1], v))
    return out


def restrict_to_plane(P: Poly, a: Sequence, b: Sequence) -> Poly:
    """The binary form ``(t1, t2) -> P(t1 a + t2 b)``."""
    images = [Poly.linear([x, y]) for x, y in zip(a, b)]
    return P.substitute(images)


def plane_refute(P: Poly, budget: Budget = DEFAULT_BUDGET) -> Optional[Verdict]:
    """Find a rational plane on which ``P`` restricts to a non-definite binary form.

    Catches forms whose real zeros are irrational, where no rational sample
    point can witness indefiniteness and branch and bound cannot terminate.
    """
    l = P.nvars
    dirs = plane_directions(l)
    tried = 0
    for i, a in enumerate(dirs):
        for b in dirs[i + 1:]:
            if all(a[p] * b[q] == a[q] * b[p] for p in range(l) for q in range(p + 1, l)):
                continue
            tried += 1
            if tried > budget.sample_count:
                return None
            Q = restrict_to_plane(P, a, b)
            v = decide_two_vars(Q)
            if v.kind in DEFINITE_KINDS:
                continue
            effort = {"method": "plane-restriction", "planes": tried}
            if v.kind == ZERO:
                return indefinite(P, a, effort=effort)
            if v.witness is not None:
                lift = lambda t: tuple(t[0] * x + t[1] * y for x, y in zip(a, b))
                ref = lift(v.reference) if v.reference is not None else None
                return indefinite(P, lift(v.witness), reference=ref, effort=effort)
            cert = {"method": "plane-restriction", "basis": [list(a), list(b)], "binary": v.certificate}
            return Verdict(INDEFINITE, certificate=cert, effort=effort)
    return None


# --- branch and bound ------------------------------------------------------------


def _power_interval(lo: Fraction, hi: Fraction, e: int) -> tuple[Fraction, Fraction]:
    if e == 0:
        return Fraction(1), Fraction(1)
    a, b = lo**e, hi**e
    if e % 2 == 0:
        if lo <= 0 <= hi:
            return Fraction(0), max(a, b)
        return (a, b) if a <= b else (b, a)
    return a, b


def interval_bounds(terms, box) -> tuple[Fraction, Fraction]:
    """Enclosure of ``sum c * prod y_i^e_i`` over ``box`` by monomial intervals."""
    total_lo = Fraction(0)
    total_hi = Fraction(0)
    for mono, c in terms:
        lo = hi = Fraction(c)
        for (blo, bhi), e in zip(box, mono):
            if not e:
                continue
            plo, phi = _power_interval(blo, bhi, e)
            cands = (lo * plo, lo * phi, hi * plo, hi * phi)
            lo, hi = min(cands), max(cands)
        total_lo += lo
        total_hi += hi
    return total_lo, total_hi


def face_restriction(P: Poly, v: int) -> Poly:
    """``P`` with ``z_v = 1``, as a polynomial in the remaining variables."""
    l = P.nvars
    images = []
    k = 0
    for i in range(l):
        if i == v:
            images.append(Poly.constant(l - 1, 1))
        else:
            images.append(Poly.variable(l - 1, k))
            k += 1
    return P.substitute(images)


def lift_face_point(y: tuple, v: int) -> tuple:
    y = list(y)
    return tuple(y[:v] + [Fraction(1)] + y[v:])


def _bisect(box, axis):
    lo, hi = box[axis]
    mid = (lo + hi) / 2
    left = list(box)
    right = list(box)
    left[axis] = (lo, mid)
    right[axis] = (mid, hi)
    return tuple(left), tuple(right)


def _face_search(args):
    """Prove ``Q > 0`` on ``[-1, 1]^m`` by bisection.

    Returns ``(status, tree, payload, boxes, depth)`` where status is
    ``"proved"``, ``"witness"`` (payload = point) or ``"exhausted"``.
    """
    Q, max_depth, max_boxes = args
    m = Q.nvars
    terms = Q.terms()
    root = tuple((Fraction(-1), Fraction(1)) for _ in range(m))
    boxes = 0
    deepest = 0

    # iterative DFS building the tree bottom-up
    def visit(box, depth):
        nonlocal boxes, deepest
        boxes += 1
        deepest = max(deepest, depth)
        lower, _ = interval_bounds(terms, box)
        if lower > 0:
            return ("proved", {"lower": str(lower)}, None)
        mid = tuple((a + b) / 2 for a, b in box)
        if Q.evaluate(mid) <= 0:
            return ("witness", None, mid)
        if depth >= max_depth or boxes >= max_boxes:
            return ("exhausted", None, lower)
        axis = depth % m
        children = []
        for child in _bisect(box, axis):
            status, node, payload = visit(child, depth + 1)
            if status != "proved":
                return status, None, payload
            children.append(node)
        return ("proved", {"split": axis, "children": children}, None)

    status, tree, payload = visit(root, 0)
    return status, tree, payload, boxes, deepest


def certify_branch_bound(P: Poly, budget: Budget = DEFAULT_BUDGET, workers: int = 1) -> Verdict:
    """Certify definiteness of an even form in ``l >= 2`` variables.

    By homogeneity and evenness, ``P > 0`` on ``R^l \\ {0}`` iff ``P > 0`` on
    every face ``{z_v = 1}`` of the cube ``[-1, 1]^l``.
    """
    d = _require_homogeneous(P)
    if d % 2 == 1:
        raise ContractError("odd-degree forms are never definite; use parity_shortcut")
    if P.nvars < 2:
        raise ContractError("branch and bound needs at least two variables")
    if P.is_zero:
        return Verdict(ZERO, effort={"method": "branch-and-bound"})
    l = P.nvars
    e1 = _unit(l, 0)
    s = _sign(P.evaluate(e1))
    if s == 0:
        return indefinite(P, e1, effort={"method": "branch-and-bound"})
    target = P if s > 0 else -P
    faces = [face_restriction(target, v) for v in range(l)]
    per_face_boxes = max(1, budget.max_boxes // l)
    jobs = [(Q, budget.max_depth, per_face_boxes) for Q in faces]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_face_search, jobs))
    else:
        results = [_face_search(j) for j in jobs]
    effort = {
        "method": "branch-and-bound",
        "boxes": sum(r[3] for r in results),
        "depth": max(r[4] for r in results),
    }
    # faces in canonical order: first witness wins, then first exhaustion
    for v, (status, _, payload, _, _) in enumerate(results):
        if status == "witness":
            return indefinite(P, lift_face_point(payload, v), reference=e1, effort=effort)
    for v, (status, _, payload, _, _) in enumerate(results):
        if status == "exhausted":
            effort["face"] = v
            effort["min_lower_bound"] = str(payload)
            return Verdict(UNKNOWN, effort=effort)
    cert = {
        "method": "branch-and-bound",
        "sign": s,
        "faces": [tree for (_, tree, _, _, _) in results],
    }
    return Verdict(POSITIVE if s > 0 else NEGATIVE, certificate=cert, effort=effort)


# --- dispatch ---------------------------------------------------------------------


def decide(P: Poly, budget: Budget = DEFAULT_BUDGET, workers: int = 1) -> Verdict:
    d = _require_homogeneous(P)
    v = parity_shortcut(P)
    if v is not None:
        return v
    l = P.nvars
    if d == 0 or l == 0:
        c = P.coefficient((0,) * l)
        return Verdict(POSITIVE if c > 0 else NEGATIVE, certificate={"method": "constant"},
                       effort={"method": "constant"})
    if l == 1:
        c = P.coefficient((d,))
        # c * z^d with d even
        return Verdict(POSITIVE if c > 0 else NEGATIVE, certificate={"method": "monomial"},
                       effort={"method": "monomial"})
    ref = quick_refute(P, budget)
    if ref is not None:
        return indefinite(P, ref.point, reference=ref.reference,
                          effort={"method": "sampling", "samples": budget.sample_count})
    if l == 2:
        return decide_two_vars(P)
    v = plane_refute(P, budget)
    if v is not None:
        return v
    return certify_branch_bound(P, budget, workers)
