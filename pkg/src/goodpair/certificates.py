"""Independent re-verification of definiteness verdicts.

Nothing here reuses search state.  Box trees are replayed from the root cube
face, leaf enclosures are recomputed with a separate interval evaluator, and
Sturm counts are redone from the polynomial itself.
"""

from __future__ import annotations

from fractions import Fraction

from . import sturm
from .definiteness import INDEFINITE, NEGATIVE, POSITIVE, UNKNOWN, ZERO, Verdict
from .poly import Poly


class CertificateError(Exception):
    pass


def _pow_range(lo: Fraction, hi: Fraction, e: int) -> tuple[Fraction, Fraction]:
    vals = [lo**e, hi**e]
    if e % 2 == 0 and lo < 0 < hi:
        vals.append(Fraction(0))
    return min(vals), max(vals)


def enclosure(P: Poly, box: list[tuple[Fraction, Fraction]]) -> Fraction:
    """Lower bound of ``P`` over ``box`` (product of per-variable ranges)."""
    total = Fraction(0)
    for mono, c in P.terms():
        lo = hi = Fraction(1)
        for (a, b), e in zip(box, mono):
            if e:
                pa, pb = _pow_range(a, b, e)
                prods = [lo * pa, lo * pb, hi * pa, hi * pb]
                lo, hi = min(prods), max(prods)
        total += c * lo if c > 0 else c * hi
    return total


def _restrict_to_face(P: Poly, v: int) -> Poly:
    l = P.nvars
    imgs = []
    for i in range(l):
        if i == v:
            imgs.append(Poly.constant(l - 1, 1))
        else:
            imgs.append(Poly.variable(l - 1, i if i < v else i - 1))
    return P.substitute(imgs)


def _check_tree(Q: Poly, node: dict, box: list) -> int:
    """Replay one face tree; returns the number of leaves checked."""
    if "children" in node:
        axis = int(node["split"])
        if not 0 <= axis < len(box) or len(node["children"]) != 2:
            raise CertificateError("malformed split node")
        lo, hi = box[axis]
        mid = (lo + hi) / 2
        left = list(box)
        right = list(box)
        left[axis] = (lo, mid)
        right[axis] = (mid, hi)
        return _check_tree(Q, node["children"][0], left) + _check_tree(Q, node["children"][1], right)
    bound = enclosure(Q, box)
    if bound <= 0:
        raise CertificateError(f"leaf box {box} has nonpositive lower bound {bound}")
    return 1


def check_box_tree(P: Poly, cert: dict) -> int:
    faces = cert.get("faces")
    l = P.nvars
    if not isinstance(faces, list) or len(faces) != l:
        raise CertificateError("certificate must contain one tree per cube face")
    leaves = 0
    for v, tree in enumerate(faces):
        Q = _restrict_to_face(P, v)
        root = [(Fraction(-1), Fraction(1))] * (l - 1)
        leaves += _check_tree(Q, tree, root)
    return leaves


def check_sturm(P: Poly) -> None:
    if P.nvars != 2:
        raise CertificateError("Sturm certificate needs a binary form")
    a, b = P.evaluate((1, 0)), P.evaluate((0, 1))
    if a <= 0 or b <= 0:
        raise CertificateError("axis values are not both positive")
    d = P.degree
    f = [Fraction(0)] * (d + 1)
    for (i, j), c in P.terms():
        f[j] = Fraction(c)
    chain = sturm.sturm_chain(f)
    if sturm.count_roots(chain) != 0:
        raise CertificateError("P(1, t) has a real root")


def check_indefinite(P: Poly, verdict: Verdict) -> None:
    if verdict.witness is not None:
        w = verdict.witness
        if not any(w):
            raise CertificateError("witness is the origin")
        val = P.evaluate(w)
        if val == 0:
            return
        if verdict.reference is None:
            raise CertificateError("nonzero witness value without a reference point")
        rv = P.evaluate(verdict.reference)
        if not any(verdict.reference) or rv * val >= 0:
            raise CertificateError("witness and reference do not straddle zero")
        return
    cert = verdict.certificate or {}
    if cert.get("method") == "plane-restriction":
        a, b = (tuple(Fraction(x) for x in v) for v in cert["basis"])
        if all(a[p] * b[q] == a[q] * b[p] for p in range(len(a)) for q in range(p + 1, len(a))):
            raise CertificateError("plane basis is linearly dependent")
        images = [Poly.linear([x, y]) for x, y in zip(a, b)]
        inner = Verdict(INDEFINITE, certificate=cert.get("binary"))
        check_indefinite(P.substitute(images), inner)
        return
    if cert.get("method") == "root-interval" and P.nvars == 2:
        lo, hi = (Fraction(x) for x in cert["interval"])
        d = P.degree
        f = [Fraction(0)] * (d + 1)
        for (i, j), c in P.terms():
            f[j] = Fraction(c)
        if sturm.count_roots(sturm.sturm_chain(f), lo, hi) < 1:
            raise CertificateError("interval contains no real root of P(1, t)")
        return
    raise CertificateError("indefinite verdict carries no checkable witness")


def verify_verdict(P: Poly, verdict: Verdict) -> bool:
    """Re-check ``verdict`` for ``P``; raises :class:`CertificateError` on failure."""
    kind = verdict.kind
    if kind == ZERO:
        if not P.is_zero:
            raise CertificateError("polynomial is not identically zero")
        return True
    if kind == INDEFINITE:
        check_indefinite(P, verdict)
        return True
    if kind == UNKNOWN:
        if not verdict.effort:
            raise CertificateError("Unknown verdict without effort report")
        return True
    if kind not in (POSITIVE, NEGATIVE):
        raise CertificateError(f"unrecognized verdict kind {kind!r}")
    target = P if kind == POSITIVE else -P
    if target.homogeneity_degree() is None or target.is_zero:
        raise CertificateError("definite verdict for a non-form")
    d = target.homogeneity_degree()
    if d % 2 == 1:
        raise CertificateError("odd-degree forms cannot be definite")
    cert = verdict.certificate or {}
    method = cert.get("method")
    if method == "sturm":
        check_sturm(target)
    elif method == "branch-and-bound":
        check_box_tree(target, cert)
    elif method in ("constant", "monomial"):
        if len(target) != 1:
            raise CertificateError("not a single term")
        (mono, c), = target.terms()
        if c <= 0 or any(e % 2 for e in mono) or (target.nvars > 1 and d > 0):
            raise CertificateError("single term is not a definite form")
    else:
        raise CertificateError(f"unknown certificate method {method!r}")
    return True
