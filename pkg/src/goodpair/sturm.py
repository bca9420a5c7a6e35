"""Exact univariate polynomial helpers: Sturm chains and real root isolation.

Univariate polynomials are plain lists of ``Fraction`` coefficients in
ascending order (``p[k]`` is the coefficient of ``t**k``), trimmed so the last
entry is nonzero.  The empty list is the zero polynomial.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence

UPoly = list  # list[Fraction]

INF = float("inf")


def trim(p: Sequence) -> UPoly:
    q = [Fraction(c) for c in p]
    while q and q[-1] == 0:
        q.pop()
    return q


def horner(p: UPoly, x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def derivative(p: UPoly) -> UPoly:
    return trim([k * p[k] for k in range(1, len(p))])


def divmod_poly(a: UPoly, b: UPoly) -> tuple[UPoly, UPoly]:
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lead = b[-1]
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        f = a[-1] / lead
        q[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a = trim(a)
    return trim(q), a


def gcd_poly(a: UPoly, b: UPoly) -> UPoly:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_poly(a, b)[1]
    if not a:
        return a
    return [c / a[-1] for c in a]


def squarefree_part(p: UPoly) -> UPoly:
    p = trim(p)
    if len(p) <= 2:
        return p
    g = gcd_poly(p, derivative(p))
    if len(g) <= 1:
        return p
    return divmod_poly(p, g)[0]


def sturm_chain(p: UPoly) -> list[UPoly]:
    """Sturm chain of the squarefree part of ``p`` (same distinct real roots)."""
    p = squarefree_part(p)
    chain = [p]
    if len(p) <= 1:
        return chain
    chain.append(derivative(p))
    while True:
        r = divmod_poly(chain[-2], chain[-1])[1]
        if not r:
            break
        chain.append([-c for c in r])
    return chain


def _sign_at(p: UPoly, x) -> int:
    if x == INF:
        return (p[-1] > 0) - (p[-1] < 0)
    if x == -INF:
        s = (p[-1] > 0) - (p[-1] < 0)
        return s if (len(p) - 1) % 2 == 0 else -s
    v = horner(p, x)
    return (v > 0) - (v < 0)


def sign_variations(chain: list[UPoly], x) -> int:
    signs = [s for s in (_sign_at(q, x) for q in chain if q) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(chain: list[UPoly], a=-INF, b=INF) -> int:
    """Number of distinct real roots in ``(a, b]``."""
    return sign_variations(chain, a) - sign_variations(chain, b)


def cauchy_bound(p: UPoly) -> Fraction:
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def isolate_roots(p: UPoly, max_steps: int = 400) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals ``(a, b]`` each holding exactly one distinct real root."""
    p = trim(p)
    if len(p) <= 1:
        return []
    chain = sturm_chain(p)
    bound = cauchy_bound(p)
    out = []
    stack = [(-bound, bound, 0)]
    while stack:
        a, b, depth = stack.pop()
        n = count_roots(chain, a, b)
        if n == 0:
            continue
        if n == 1 or depth >= max_steps:
            out.append((a, b))
            continue
        m = (a + b) / 2
        stack.append((m, b, depth + 1))
        stack.append((a, m, depth + 1))
    out.sort()
    return out


def _divisors(n: int, limit: int = 10**12) -> list[int] | None:
    n = abs(n)
    if n == 0 or n > limit:
        return None
    small = [d for d in range(1, isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def rational_roots(p: UPoly) -> list[Fraction] | None:
    """All rational roots of ``p`` via the rational root theorem.

    Returns ``None`` when the coefficients are too large to enumerate divisors.
    """
    p = trim(p)
    if len(p) <= 1:
        return []
    roots = []
    # strip factors of t
    k = 0
    while p[k] == 0:
        k += 1
    if k:
        roots.append(Fraction(0))
        p = p[k:]
    if len(p) <= 1:
        return roots
    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    num_divs = _divisors(ints[0])
    den_divs = _divisors(ints[-1])
    if num_divs is None or den_divs is None:
        return None
    seen = set()
    for a in num_divs:
        for b in den_divs:
            for cand in (Fraction(a, b), Fraction(-a, b)):
                if cand not in seen:
                    seen.add(cand)
                    if horner(p, cand) == 0:
                        roots.append(cand)
    return sorted(roots)
