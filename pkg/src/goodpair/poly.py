"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Poly` lives in a fixed ring ``Q[z1, ..., zk]`` (``k = nvars``) and is
immutable.  Terms are kept in a plain dict keyed by exponent tuples; the
canonical ordering used for printing, hashing and serialization is graded
lexicographic, largest term first.

Coefficients are stored as ``int`` whenever they are integral and as
:class:`fractions.Fraction` otherwise, which keeps the common integer case fast
without ever leaving exact arithmetic.
"""

from __future__ import annotations

import numbers
import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import ContractError, DimensionError

Rational = Union[int, Fraction]
Monomial = tuple  # tuple[int, ...]


def _norm(c) -> Rational:
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int):
        return c
    if isinstance(c, numbers.Integral):
        return int(c)
    if isinstance(c, str):
        return _norm(Fraction(c))
    raise TypeError(f"coefficient must be int, Fraction or str, not {type(c).__name__}")


def grlex_key(mono: Monomial) -> tuple:
    return (sum(mono), mono)


class Poly:
    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Monomial, Rational] | None = None):
        if nvars < 0:
            raise DimensionError("variable count must be nonnegative")
        self.nvars = nvars
        clean = {}
        if terms:
            for mono, c in terms.items():
                mono = tuple(int(e) for e in mono)
                if len(mono) != nvars:
                    raise DimensionError(
                        f"monomial {mono} has {len(mono)} exponents, ring has {nvars} variables"
                    )
                if any(e < 0 for e in mono):
                    raise ContractError(f"negative exponent in {mono}")
                c = _norm(c)
                if c:
                    clean[mono] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Poly":
        # trusted constructor: terms already normalized and zero-free
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    # constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c) -> "Poly":
        c = _norm(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Poly":
        """The coordinate polynomial ``z_{index+1}`` (0-based index)."""
        if not 0 <= index < nvars:
            raise DimensionError(f"variable index {index} out of range for {nvars} variables")
        mono = tuple(1 if i == index else 0 for i in range(nvars))
        return cls._raw(nvars, {mono: 1})

    @classmethod
    def linear(cls, coeffs: Sequence) -> "Poly":
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            c = _norm(c)
            if c:
                terms[tuple(1 if j == i else 0 for j in range(n))] = c
        return cls._raw(n, terms)

    # basic queries ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def terms(self) -> list[tuple[Monomial, Rational]]:
        """Terms in canonical (descending graded-lex) order."""
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def coefficient(self, mono: Sequence[int]) -> Rational:
        return self._terms.get(tuple(mono), 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[Monomial, Rational]]:
        return iter(self.terms())

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(m) for m in self._terms), default=-1)

    def homogeneity_degree(self) -> int | None:
        """Common total degree of all terms, or ``None`` if degrees are mixed.

        The zero polynomial is homogeneous of every degree; by convention this
        returns 0 for it (check :attr:`is_zero` to tell the cases apart).
        """
        degs = {sum(m) for m in self._terms}
        if not degs:
            return 0
        if len(degs) == 1:
            return degs.pop()
        return None

    def variables_used(self) -> set[int]:
        used = set()
        for mono in self._terms:
            used.update(i for i, e in enumerate(mono) if e)
        return used

    # arithmetic -------------------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if self.nvars != other.nvars:
            raise DimensionError(
                f"ring mismatch: {self.nvars} vs {other.nvars} variables"
            )

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for mono, c in other._terms.items():
            s = out.get(mono, 0) + c
            if s:
                out[mono] = _norm(s)
            else:
                out.pop(mono, None)
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.nvars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _norm(other)
            if not c:
                return Poly.zero(self.nvars)
            return Poly._raw(self.nvars, {m: _norm(v * c) for m, v in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        n = self.nvars
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = tuple(ma[i] + mb[i] for i in range(n))
                out[m] = out.get(m, 0) + ca * cb
        return Poly._raw(n, {m: _norm(c) for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ContractError("negative powers are not polynomials")
        result = Poly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> "Poly":
        return self * _norm(c)

    # equality ---------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, tuple(self.terms())))
        return self._hash

    # evaluation / substitution ----------------------------------------------

    def evaluate(self, point: Sequence) -> Rational:
        if len(point) != self.nvars:
            raise DimensionError(
                f"point has {len(point)} coordinates, ring has {self.nvars} variables"
            )
        pt = [x if isinstance(x, (int, Fraction)) else _norm(x) for x in point]
        total = 0
        for mono, c in self._terms.items():
            v = c
            for x, e in zip(pt, mono):
                if e:
                    v *= x**e
            total += v
        return _norm(total) if isinstance(total, Fraction) else total

    __call__ = evaluate

    def substitute(self, images: Sequence) -> "Poly":
        """Ring homomorphism sending ``z_i`` to ``images[i]``.

        Images may be :class:`Poly` or :class:`LinearForm`; they must all live
        in the same target ring.
        """
        if len(images) != self.nvars:
            raise DimensionError(
                f"{len(images)} images given for {self.nvars} variables"
            )
        imgs = [im.to_poly() if isinstance(im, LinearForm) else im for im in images]
        if not imgs:
            # 0-variable ring: only constants
            c = self._terms.get((), 0)
            return Poly.constant(0, c)
        target = imgs[0].nvars
        for im in imgs:
            if not isinstance(im, Poly):
                raise ContractError("substitution images must be Poly or LinearForm")
            if im.nvars != target:
                raise DimensionError("substitution images live in different rings")
        power_cache: dict = {}

        def power(i, e):
            key = (i, e)
            if key not in power_cache:
                power_cache[key] = imgs[i] ** e
            return power_cache[key]

        result = Poly.zero(target)
        for mono, c in self._terms.items():
            term = Poly.constant(target, c)
            for i, e in enumerate(mono):
                if e:
                    term = term * power(i, e)
            result = result + term
        return result

    def derivative(self, index: int) -> "Poly":
        out = {}
        for mono, c in self._terms.items():
            e = mono[index]
            if e:
                m = list(mono)
                m[index] -= 1
                out[tuple(m)] = _norm(c * e)
        return Poly._raw(self.nvars, out)

    def exact_div(self, divisor: "Poly") -> "Poly":
        """Quotient of an exact division; raises if the remainder is nonzero."""
        self._check(divisor)
        if divisor.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        lead_m, lead_c = divisor.terms()[0]
        rem = dict(self._terms)
        quo: dict = {}
        n = self.nvars
        dterms = list(divisor._terms.items())
        while rem:
            m, c = max(rem.items(), key=lambda t: grlex_key(t[0]))
            shift = tuple(m[i] - lead_m[i] for i in range(n))
            if any(e < 0 for e in shift):
                raise ContractError("division is not exact")
            q = _norm(Fraction(c) / lead_c)
            quo[shift] = q
            for dm, dc in dterms:
                mm = tuple(dm[i] + shift[i] for i in range(n))
                v = rem.get(mm, 0) - q * dc
                if v:
                    rem[mm] = _norm(v)
                else:
                    rem.pop(mm, None)
        return Poly._raw(n, quo)

    # conversions ------------------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for mono, c in self.terms():
            f = Fraction(c)
            terms.append({"exp": list(mono), "num": str(f.numerator), "den": str(f.denominator)})
        return {"vars": self.nvars, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "Poly":
        n = int(data["vars"])
        terms = {}
        for t in data["terms"]:
            mono = tuple(int(e) for e in t["exp"])
            c = Fraction(int(t["num"]), int(t.get("den", "1")))
            if mono in terms:
                raise ContractError(f"duplicate monomial {mono} in serialized polynomial")
            terms[mono] = c
        return cls(n, terms)

    def format(self, var: str = "z") -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.terms():
            factors = []
            for i, e in enumerate(mono):
                if e == 1:
                    factors.append(f"{var}{i + 1}")
                elif e:
                    factors.append(f"{var}{i + 1}^{e}")
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = f"{mag}*" + "*".join(factors)
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += sign + body
        return out

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Poly({self.nvars}, {self.format()!r})"


def add(a: Poly, b: Poly) -> Poly:
    a._check(b)
    return a + b


def mul(a: Poly, b: Poly) -> Poly:
    a._check(b)
    return a * b


def substitute(p: Poly, images: Sequence) -> Poly:
    return p.substitute(images)


def evaluate(p: Poly, point: Sequence) -> Rational:
    return p.evaluate(point)


def homogeneity_degree(p: Poly) -> int | None:
    return p.homogeneity_degree()


_POLY_TOKEN = re.compile(r"\s*([+-]?)\s*([^+-]+)")


def parse_poly(text: str, nvars: int | None = None, var: str = "z") -> Poly:
    """Parse an expanded polynomial such as ``"z1^4+2*z1^2*z2^2-1/3*z3"``.

    Only sums of monomials are accepted (no parentheses).  ``nvars`` defaults to
    the largest variable index that occurs.
    """
    text = text.replace(" ", "")
    if not text:
        raise ContractError("empty polynomial text")
    pieces = []
    pos = 0
    for m in _POLY_TOKEN.finditer(text):
        if m.start() != pos:
            raise ContractError(f"cannot parse polynomial near {text[pos:]!r}")
        pos = m.end()
        pieces.append((m.group(1), m.group(2)))
    if pos != len(text):
        raise ContractError(f"cannot parse polynomial near {text[pos:]!r}")
    var_re = re.compile(rf"^{re.escape(var)}(\d+)(?:\^(\d+))?$")
    parsed = []
    top = 0
    for sign, body in pieces:
        coeff = Fraction(-1 if sign == "-" else 1)
        powers: dict[int, int] = {}
        for factor in body.split("*"):
            vm = var_re.match(factor)
            if vm:
                idx = int(vm.group(1))
                if idx < 1:
                    raise ContractError(f"variable index must start at 1: {factor!r}")
                powers[idx] = powers.get(idx, 0) + int(vm.group(2) or 1)
                top = max(top, idx)
            else:
                try:
                    coeff *= Fraction(factor)
                except (ValueError, ZeroDivisionError) as exc:
                    raise ContractError(f"bad factor {factor!r}") from exc
        parsed.append((coeff, powers))
    n = top if nvars is None else nvars
    if top > n:
        raise DimensionError(f"variable {var}{top} exceeds ring size {n}")
    result = Poly.zero(n)
    for coeff, powers in parsed:
        mono = tuple(powers.get(i + 1, 0) for i in range(n))
        result = result + Poly(n, {mono: coeff})
    return result


class LinearForm:
    """A linear form ``c1*z1 + ... + cl*zl`` with exact rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        self.coeffs = tuple(_norm(c) for c in coeffs)

    @classmethod
    def zero(cls, nvars: int) -> "LinearForm":
        return cls((0,) * nvars)

    @classmethod
    def unit(cls, nvars: int, index: int, sign: int = 1) -> "LinearForm":
        if not 0 <= index < nvars:
            raise DimensionError(f"variable index {index} out of range for {nvars} variables")
        return cls(sign if i == index else 0 for i in range(nvars))

    @property
    def nvars(self) -> int:
        return len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def alphabet_code(self) -> tuple[int, int] | None:
        """``(index, sign)`` if the form is ``±z_{index+1}``, ``None`` if zero.

        Raises :class:`ContractError` for anything else.
        """
        nz = [(i, c) for i, c in enumerate(self.coeffs) if c]
        if not nz:
            return None
        if len(nz) == 1 and nz[0][1] in (1, -1):
            return nz[0][0], int(nz[0][1])
        raise ContractError(f"entry {self} is not in the alphabet {{0, ±z_v}}")

    def to_poly(self) -> Poly:
        return Poly.linear(self.coeffs)

    def evaluate(self, point: Sequence) -> Rational:
        if len(point) != len(self.coeffs):
            raise DimensionError("point length does not match linear form")
        return _norm(sum(Fraction(c) * Fraction(x) for c, x in zip(self.coeffs, point)))

    def __neg__(self) -> "LinearForm":
        return LinearForm(-c for c in self.coeffs)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        if len(other.coeffs) != len(self.coeffs):
            raise DimensionError("linear forms of different length")
        return LinearForm(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __mul__(self, c) -> "LinearForm":
        c = _norm(c)
        return LinearForm(a * c for a in self.coeffs)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, LinearForm) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def format(self, var: str = "z") -> str:
        return self.to_poly().format(var) if self.coeffs else "0"

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"LinearForm({self.format()!r})"

    @classmethod
    def parse(cls, text: str, nvars: int, var: str = "z") -> "LinearForm":
        p = parse_poly(str(text), nvars, var)
        if p.is_zero:
            return cls.zero(nvars)
        if p.homogeneity_degree() != 1:
            raise ContractError(f"{text!r} is not a linear form")
        coeffs = [0] * nvars
        for mono, c in p.terms():
            coeffs[mono.index(1)] = c
        return cls(coeffs)
