"""Power-law arithmetic for the convergence criterion and the covering-count probe.

With ``Psi(q) = |q|^-tau`` and ``f(r) = r^s`` the series over integer vectors
``q`` in ``Z^n`` groups into sup-norm shells ``|q| = Q`` containing
``(2Q+1)^n - (2Q-1)^n`` vectors.  Each shell contributes about ``Q^e`` with
``e = n - (tau + 1)(s + l + 1 - n)``, so the series converges iff ``e < -1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ContractError, DimensionError, PreconditionError
from .manifolds import ManifoldSpec, QuadraticSystem
from .poly import Poly

CONVERGENT = "Convergent"
DIVERGENT = "Divergent"
CRITICAL = "Critical"

MAX_SHELLS = 10_000


@dataclass(frozen=True)
class PowerLawData:
    n: int
    l: int
    tau: Fraction
    s: Fraction

    def __post_init__(self):
        object.__setattr__(self, "tau", Fraction(self.tau))
        object.__setattr__(self, "s", Fraction(self.s))
        if not self.n > self.l >= 1:
            raise ContractError(f"need n > l >= 1, got n={self.n}, l={self.l}")
        if self.tau < self.n:
            raise ContractError(f"tau must be at least n = {self.n}, got {self.tau}")
        if self.s <= 0:
            raise ContractError("s must be positive")

    @property
    def shell_exponent(self) -> Fraction:
        return self.n - (self.tau + 1) * (self.s + self.l + 1 - self.n)

    @property
    def term_exponent(self) -> Fraction:
        """Exponent of ``Q`` in one summand ``Q^(n-l) Psi^(l+1-n) (Psi/Q)^s``."""
        return (self.n - self.l) - self.tau * (self.l + 1 - self.n) - (self.tau + 1) * self.s


def critical_exponent(n: int, l: int, tau=None) -> Fraction:
    """``s* = (n - l - 1) + (n + 1)/(tau + 1)``; ``tau=None`` gives the limit ``n - l - 1``."""
    if not n > l:
        raise ContractError("need n > l")
    if tau is None:
        return Fraction(n - l - 1)
    tau = Fraction(tau)
    if tau <= 0:
        raise ContractError("tau must be positive")
    return (n - l - 1) + Fraction(n + 1) / (tau + 1)


def classify_series(d: PowerLawData) -> str:
    e = d.shell_exponent
    if e < -1:
        return CONVERGENT
    if e > -1:
        return DIVERGENT
    return CRITICAL


def shell_count(n: int, Q: int) -> int:
    """Integer vectors in ``Z^n`` of sup norm exactly ``Q >= 1``."""
    return (2 * Q + 1) ** n - (2 * Q - 1) ** n


def _power(Q: int, e: Fraction, prec: int):
    if e.denominator == 1:
        return Fraction(Q) ** int(e)
    import mpmath

    with mpmath.workprec(prec):
        return mpmath.mpf(Q) ** (mpmath.mpf(e.numerator) / e.denominator)


@dataclass
class SeriesReport:
    data: PowerLawData
    shells: list  # per-shell contributions
    partial_sums: list
    exact: bool

    def ratio(self, a: int, b: int) -> float:
        return float(self.partial_sums[a - 1] / self.partial_sums[b - 1])


def series_oracle(d: PowerLawData, Q_max: int, max_shells: int = MAX_SHELLS, prec: int = 256) -> SeriesReport:
    """Partial sums of the series over shells ``Q = 1..Q_max``.

    Exact Fractions when the term exponent is an integer; otherwise
    ``mpmath`` at ``prec`` bits.
    """
    if Q_max < 1:
        raise ContractError("Q_max must be at least 1")
    if Q_max > max_shells:
        raise ContractError(f"Q_max = {Q_max} exceeds the shell budget {max_shells}")
    e = d.term_exponent
    exact = e.denominator == 1
    shells, sums = [], []
    total = Fraction(0) if exact else 0
    for Q in range(1, Q_max + 1):
        c = shell_count(d.n, Q) * _power(Q, e, prec)
        total = total + c
        shells.append(c)
        sums.append(total)
    return SeriesReport(d, shells, sums, exact)


# --- S(q, p) membership -----------------------------------------------------------------


def sup_norm(q: Sequence[int]) -> int:
    return max(abs(int(x)) for x in q)


def sq_p_membership(x: Sequence, spec: ManifoldSpec, q: Sequence[int], p: int, theta, tau) -> bool:
    """Whether ``|q . (x, g(x)) - p - theta| < |q|^-tau`` (sup norm), exactly."""
    if len(q) != spec.n:
        raise DimensionError(f"q must have {spec.n} entries")
    if not any(q):
        raise ContractError("q must be nonzero")
    point = spec.system.evaluate(x)
    v = abs(sum(Fraction(int(a)) * b for a, b in zip(q, point)) - p - Fraction(theta))
    tau = Fraction(tau)
    a, b = tau.numerator, tau.denominator
    norm = sup_norm(q)
    # |v| < norm^(-a/b)  <=>  |v|^b * norm^a < 1
    if a >= 0:
        return v**b * Fraction(norm) ** a < 1
    return v**b < Fraction(norm) ** (-a)


# --- covering probe -------------------------------------------------------------------


def affine_quadratic(system: QuadraticSystem, r: Sequence, s: Sequence, a=0) -> Poly:
    """``h(x) = r . x + s . g(x) - a``."""
    if len(r) != system.dim or len(s) != system.l:
        raise DimensionError("r must have dim entries and s must have l entries")
    h = Poly.linear(r) - Poly.constant(system.dim, a)
    for su, g in zip(s, system.coordinates()):
        h = h + g.scale(su)
    return h


@dataclass(frozen=True)
class CoverProbe:
    phi: Poly
    center: tuple
    alpha: Fraction
    delta: Fraction
    C: Fraction = Fraction(4)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(Fraction(c) for c in self.center))
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "C", Fraction(self.C))
        if len(self.center) != self.phi.nvars:
            raise DimensionError("center must match the number of variables of phi")
        if self.phi.nvars < 2:
            raise DimensionError("the covering probe needs dim >= 2")
        if self.alpha <= 0 or self.delta <= 0:
            raise ContractError("alpha and delta must be positive")
        if self.delta > self.alpha:
            raise ContractError("delta must not exceed alpha")

    def gradient_sq(self) -> Fraction:
        return sum(Fraction(self.phi.derivative(i).evaluate(self.center)) ** 2 for i in range(self.phi.nvars))


@dataclass
class PreconditionReport:
    holds: bool
    gradient_sq: Fraction
    hessian_bound: str  # "exact-spectral" or "frobenius-enclosure"
    detail: str

    def to_json(self) -> dict:
        return {"holds": self.holds, "gradient_norm_sq": str(self.gradient_sq),
                "hessian_bound": self.hessian_bound, "detail": self.detail}


def _psd(A: list[list[Fraction]]) -> bool:
    """Exact positive semidefiniteness via all principal minors."""
    from itertools import combinations

    from .matrices.intdet import exact_det

    k = len(A)
    for size in range(1, k + 1):
        for idx in combinations(range(k), size):
            if exact_det([[A[i][j] for j in idx] for i in idx]) < 0:
                return False
    return True


def check_precondition(probe: CoverProbe) -> PreconditionReport:
    """``|grad phi(x)| >= C alpha sup |Hess phi|`` over the ball.

    Quadratic ``phi`` has a constant Hessian and the operator norm is tested
    exactly (``t I - H^2`` positive semidefinite).  Otherwise the Hessian
    entries are enclosed on the box around the ball and the Frobenius norm is
    used, which is sufficient but not necessary.
    """
    phi, dim = probe.phi, probe.phi.nvars
    g2 = probe.gradient_sq()
    scale = (probe.C * probe.alpha) ** 2
    hess = [[phi.derivative(i).derivative(j) for j in range(dim)] for i in range(dim)]
    if phi.degree <= 2:
        H = [[Fraction(hess[i][j].coefficient((0,) * dim)) for j in range(dim)] for i in range(dim)]
        H2 = [[sum(H[i][m] * H[m][j] for m in range(dim)) for j in range(dim)] for i in range(dim)]
        if scale == 0:
            return PreconditionReport(True, g2, "exact-spectral", "C alpha = 0")
        t = g2 / scale
        A = [[(t if i == j else 0) - H2[i][j] for j in range(dim)] for i in range(dim)]
        ok = _psd(A)
        return PreconditionReport(ok, g2, "exact-spectral",
                                  "|grad phi(x)|^2 >= (C alpha)^2 * lambda_max(H^2)" + ("" if ok else " fails"))
    from .certificates import _pow_range

    box = [(c - probe.alpha, c + probe.alpha) for c in probe.center]
    frob = Fraction(0)
    for i in range(dim):
        for j in range(dim):
            lo = hi = Fraction(0)
            for mono, c in hess[i][j].terms():
                mlo = mhi = Fraction(1)
                for (a, b), e in zip(box, mono):
                    if e:
                        pa, pb = _pow_range(a, b, e)
                        prods = [mlo * pa, mlo * pb, mhi * pa, mhi * pb]
                        mlo, mhi = min(prods), max(prods)
                lo += c * mlo if c > 0 else c * mhi
                hi += c * mhi if c > 0 else c * mlo
            frob += max(abs(lo), abs(hi)) ** 2
    ok = g2 >= scale * frob
    return PreconditionReport(ok, g2, "frobenius-enclosure",
                              "|grad phi(x)|^2 >= (C alpha)^2 * sum of squared Hessian entry bounds"
                              + ("" if ok else " fails"))


class _CellPoly:
    """``phi`` in doubled cell coordinates with integer coefficients.

    A point ``y = x + delta * w / 2`` has ``phi(y) = P(w) / D`` where ``P`` has
    integer coefficients.  Boxes have odd-or-even integer centers ``c`` and
    integer half-width ``m`` in ``w`` units, so every Taylor coefficient of
    ``P`` at ``c`` is an integer.
    """

    def __init__(self, probe: CoverProbe):
        phi, dim = probe.phi, probe.phi.nvars
        half = probe.delta / 2
        images = [Poly.linear([half if j == i else 0 for j in range(dim)]) + Poly.constant(dim, probe.center[i])
                  for i in range(dim)]
        shifted = phi.substitute(images)
        den = 1
        for _, c in shifted.terms():
            den = math.lcm(den, Fraction(c).denominator)
        self.D = den
        self.terms = [(mono, int(Fraction(c) * den)) for mono, c in shifted.terms()]
        self.dim = dim
        self.degree = max((sum(m) for m, _ in self.terms), default=0)
        # Taylor coefficient alpha at c: sum_beta coef_beta * prod C(beta_i, alpha_i) c_i^(beta_i - alpha_i)
        from itertools import product as iproduct

        self.taylor = {}
        for mono, c in self.terms:
            for alpha in iproduct(*[range(b + 1) for b in mono]):
                mult = c
                for b, a in zip(mono, alpha):
                    mult *= math.comb(b, a)
                shift = tuple(b - a for b, a in zip(mono, alpha))
                self.taylor.setdefault(alpha, []).append((shift, mult))

    def magnitude_bound(self, W: int) -> int:
        total = 0
        for alpha, parts in self.taylor.items():
            s = sum(abs(m) * W ** sum(sh) for sh, m in parts)
            total += s * W ** sum(alpha)
        return total

    def lower_abs(self, centers: np.ndarray, m: int) -> np.ndarray:
        """Lower bound of ``|P|`` on each box (may be negative, meaning 'could vanish')."""
        dt = centers.dtype
        N = centers.shape[0]
        pows = [[np.ones(N, dtype=dt)] for _ in range(self.dim)]
        for i in range(self.dim):
            for _ in range(self.degree):
                pows[i].append(pows[i][-1] * centers[:, i])
        lb = None
        rest = np.zeros(N, dtype=dt)
        for alpha, parts in self.taylor.items():
            val = np.zeros(N, dtype=dt)
            for shift, mult in parts:
                t = np.full(N, mult, dtype=dt)
                for i, e in enumerate(shift):
                    if e:
                        t = t * pows[i][e]
                val = val + t
            order = sum(alpha)
            if order == 0:
                lb = np.abs(val)
            else:
                rest = rest + np.abs(val) * (m ** order)
        if lb is None:
            lb = np.zeros(N, dtype=dt)
        return lb - rest


def _ball_mask(lo: np.ndarray, size: int, r2_num: int, r2_den: int) -> np.ndarray:
    """Boxes ``[lo, lo + size]`` (doubled units) meeting the open ball of radius^2 ``r2_num/r2_den``."""
    hi = lo + size
    nearest = np.clip(np.zeros_like(lo), lo, hi)
    d2 = (nearest * nearest).sum(axis=1)
    return d2 * r2_den < r2_num


CHUNK = 1 << 18


def covering_count(probe: CoverProbe, enforce: bool = False) -> tuple[int, PreconditionReport]:
    """Count ``delta``-grid cells of ``B(x, alpha)`` that may meet ``S(phi, delta)``.

    The grid is aligned at the center ``x``.  A cell is counted when its exact
    interval enclosure of ``phi`` meets ``(-rho, rho)`` with
    ``rho = |grad phi(x)| delta`` and it meets the ball.  Boxes are refined
    from a coarse root grid, so empty regions are discarded early.
    """
    pre = check_precondition(probe)
    if enforce and not pre.holds:
        raise PreconditionError(f"covering precondition violated: {pre.detail}")
    cp = _CellPoly(probe)
    dim = cp.dim
    # radius in doubled cell units: 2 alpha / delta
    rad = 2 * probe.alpha / probe.delta
    r2_num, r2_den = (rad * rad).numerator, (rad * rad).denominator
    # band: |P/D| < sqrt(g2) * delta  <=>  lb <= 0 or lb^2 < g2 * delta^2 * D^2
    band = pre.gradient_sq * (probe.delta * cp.D) ** 2
    b_num, b_den = band.numerator, band.denominator
    top = 1
    while top < rad:
        top *= 2
    W = 4 * top
    big = cp.magnitude_bound(W) ** 2 * b_den >= 2**62 or b_num >= 2**62 or W * W * dim * r2_den >= 2**62
    dt = object if big else np.int64
    from itertools import product as iproduct

    roots = np.array(list(iproduct((-top, 0), repeat=dim)), dtype=np.int64).astype(dt)
    stack = [(top, roots)]
    count = 0
    children = np.array(list(iproduct((0, 1), repeat=dim)), dtype=np.int64).astype(dt)
    while stack:
        size, lo = stack.pop()
        if lo.shape[0] > CHUNK:
            for k in range(0, lo.shape[0], CHUNK):
                stack.append((size, lo[k:k + CHUNK]))
            continue
        keep = _ball_mask(lo, size, r2_num, r2_den)
        lo = lo[keep]
        if lo.shape[0] == 0:
            continue
        half = size // 2
        lb = cp.lower_abs(lo + half, half)
        ok = (lb <= 0) | (lb * lb * b_den < b_num)
        lo = lo[ok]
        if size == 2:
            count += int(lo.shape[0])
            continue
        nxt = (lo[:, None, :] + children[None, :, :] * half).reshape(-1, dim)
        stack.append((half, nxt))
    return count, pre


@dataclass
class CoverReport:
    alpha: Fraction
    deltas: list
    counts: list
    slope: float
    precondition: PreconditionReport
    expected: int

    def to_json(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "deltas": [str(d) for d in self.deltas],
            "counts": self.counts,
            "slope": self.slope,
            "expected_slope": self.expected,
            "precondition": self.precondition.to_json(),
        }


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``ys`` against ``xs``."""
    return float(np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), 1)[0])


def delta_ladder(lo_exp: int, hi_exp: int) -> list[Fraction]:
    """``2^-lo_exp, ..., 2^-hi_exp``."""
    if lo_exp > hi_exp:
        raise ContractError("ladder must run from coarse to fine")
    return [Fraction(1, 2**k) for k in range(lo_exp, hi_exp + 1)]


def covering_slope(phi: Poly, center: Sequence, alpha, deltas: Sequence, C=4,
                   enforce: bool = False) -> CoverReport:
    alpha = Fraction(alpha)
    counts = []
    pre = None
    for d in deltas:
        c, pre = covering_count(CoverProbe(phi, tuple(center), alpha, d, C), enforce=enforce)
        counts.append(c)
    if any(c == 0 for c in counts):
        raise ContractError("a covering count is zero; the band misses the ball")
    xs = [math.log(float(alpha / d)) for d in deltas]
    ys = [math.log(c) for c in counts]
    return CoverReport(alpha, list(deltas), counts, fit_slope(xs, ys), pre, phi.nvars - 1)
