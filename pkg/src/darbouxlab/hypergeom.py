"""Gamma function, Gauss hypergeometric 2F1, and contiguous reduction.

The central object for the gauge reduction is :class:`RationalOperator1`:
a pair ``(p, q)`` of rational functions representing
``f -> p(x) f(x) + q(x) f'(x)``.  :func:`contiguous_reduce` builds the
operator that maps ``F(a, b; c; x)`` to ``F(a+m, b+m; c+2m; x)`` by
repeating two classical contiguous steps,

    F(A+1, B+1; C+1; x) = C/(A B) * F'(A, B; C; x)
    F(A, B; C+1; x)     = C [(1-x) F' + (C-A-B) F] / ((C-A)(C-B)),

and eliminating second derivatives with the hypergeometric equation.  All
denominators produced this way are of the form ``x**i (1-x)**j``, which is
what :class:`RationalFunction` stores.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError, ParameterError, PoleError

# ---------------------------------------------------------------------------
# Gamma

# Lanczos coefficients for g = 671/128 with 14 terms (the set tabulated
# in Numerical Recipes, 3rd ed.); relative error ~1e-15 on Re z > 0.
_LANCZOS_G = 671 / 128
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS_COEF = (
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
)
_SQRT_2PI = math.sqrt(2 * math.pi)


def _nonpositive_integer(z: complex, tol: float = 1e-14) -> bool:
    return abs(z.imag) < tol and z.real < 0.5 and abs(z.real - round(z.real)) < tol


def _loggamma_right(z: complex) -> complex:
    t = z + _LANCZOS_G
    s = _LANCZOS_C0
    for i, c in enumerate(_LANCZOS_COEF, start=1):
        s += c / (z + i)
    return (z + 0.5) * cmath.log(t) - t + cmath.log(_SQRT_2PI * s / z)


def loggamma(z: complex) -> complex:
    """A logarithm of Gamma(z) (not necessarily the principal branch).

    Good enough for ``exp(loggamma(z1) - loggamma(z2))``-style ratios of
    large arguments, which is how the package uses it.
    """
    z = complex(z)
    if _nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z!r}")
    if z.real < 0.5:
        return cmath.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - _loggamma_right(1 - z)
    return _loggamma_right(z)


def gamma(z: complex) -> complex:
    """Gamma function of a complex argument (Lanczos approximation).

    Uses the reflection formula for ``Re z < 1/2``.  Raises
    :class:`PoleError` at non-positive integers and ``OverflowError`` when
    the value exceeds the double range.
    """
    z = complex(z)
    if _nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z!r}")
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * cmath.exp(_loggamma_right(1 - z)))
    return cmath.exp(_loggamma_right(z))


def rgamma(z: complex) -> complex:
    """``1/Gamma(z)``, entire: returns 0 at the poles of Gamma."""
    z = complex(z)
    if _nonpositive_integer(z):
        return 0j
    return 1 / gamma(z)


# ---------------------------------------------------------------------------
# 2F1


def _terminating_index(a: complex) -> int | None:
    """``n`` if ``a == -n`` for a non-negative integer ``n``, else None."""
    if _nonpositive_integer(complex(a), 1e-12):
        return int(round(-complex(a).real))
    return None


@dataclass(frozen=True)
class Gauss2F1Params:
    """Parameters ``(a, b; c)`` of ``2F1``.

    ``c`` may be a non-positive integer only when ``a`` or ``b`` makes the
    series terminate before the vanishing denominator.
    """

    a: complex
    b: complex
    c: complex

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        nc = _terminating_index(self.c)
        if nc is not None:
            stops = [n for n in (_terminating_index(self.a), _terminating_index(self.b)) if n is not None]
            if not stops or min(stops) >= nc:
                raise ParameterError(
                    f"c={self.c!r} is a non-positive integer and the series "
                    "does not terminate before the zero denominator"
                )

    def shifted(self, da: complex = 0, db: complex = 0, dc: complex = 0) -> "Gauss2F1Params":
        return Gauss2F1Params(self.a + da, self.b + db, self.c + dc)

    @property
    def degree(self) -> int | None:
        """Degree of the polynomial when the series terminates, else None."""
        stops = [n for n in (_terminating_index(self.a), _terminating_index(self.b)) if n is not None]
        return min(stops) if stops else None


def _as_params(params) -> Gauss2F1Params:
    if isinstance(params, Gauss2F1Params):
        return params
    return Gauss2F1Params(*params)


SERIES_RTOL = 1e-18
_CHUNK = 256
_MAX_TERMS = 2_000_000


def _series_sum(a, b, c, z) -> complex:
    """Sum ``sum_n (a)_n (b)_n / ((c)_n n!) z^n``.

    Terms are generated chunkwise from their ratios; summation stops at a
    zero ratio (terminating series) or when the geometric tail bound drops
    below ``SERIES_RTOL`` relative to the running sum.
    """
    total = 0j
    last = 1.0 + 0j
    for n0 in range(0, _MAX_TERMS, _CHUNK):
        n = np.arange(n0, n0 + _CHUNK, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            # a blocked c only matters past the terminating zero ratio
            ratios = (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        terms = last * np.concatenate(([1.0], np.cumprod(ratios[:-1])))
        zero = np.nonzero(ratios == 0)[0]
        if zero.size:
            return total + np.sum(terms[: zero[0] + 1])
        total += np.sum(terms)
        last = terms[-1] * ratios[-1]
        qmax = max(abs(ratios[-1]), abs(z))
        if qmax < 1 and abs(last) / (1 - qmax) <= SERIES_RTOL * abs(total):
            return complex(total)
    raise DomainError(f"2F1 series did not converge within {_MAX_TERMS} terms at z={z!r}")


def _use_pfaff(z: complex) -> bool:
    if abs(z) <= 0.5:
        return False
    if z == 1:
        return False
    return abs(z / (z - 1)) < abs(z)


def _gauss_sum_at_one(p: Gauss2F1Params) -> complex:
    s = p.c - p.a - p.b
    if s.real <= 0:
        raise DomainError("2F1 at z=1 needs Re(c-a-b) > 0")
    return gamma(p.c) * gamma(s) * rgamma(p.c - p.a) * rgamma(p.c - p.b)


def hyp2f1(params, z: complex) -> complex:
    """Gauss hypergeometric function ``2F1(a, b; c; z)``.

    Direct power series for ``|z| <= 1/2``; for larger ``|z|`` the Pfaff
    transformation ``z -> z/(z-1)`` is used whenever it shrinks the
    argument.  ``z = 1`` is evaluated by Gauss's summation formula.

    Parameters
    ----------
    params : Gauss2F1Params or (a, b, c)
    z : complex

    Raises
    ------
    DomainError
        If neither ``z`` nor its Pfaff image lies in the unit disc (and the
        series does not terminate).
    """
    p = _as_params(params)
    z = complex(z)
    if z == 0:
        return 1 + 0j
    if p.degree is not None:
        return _series_sum(p.a, p.b, p.c, z)
    if z == 1:
        return _gauss_sum_at_one(p)
    if _use_pfaff(z):
        w = z / (z - 1)
        return (1 - z) ** (-p.a) * hyp2f1(Gauss2F1Params(p.a, p.c - p.b, p.c), w)
    if abs(z) >= 1:
        raise DomainError(f"2F1 series diverges at z={z!r} and Pfaff does not help")
    return _series_sum(p.a, p.b, p.c, z)


def hyp2f1_derivative(params, z: complex) -> complex:
    """``d/dz 2F1(a, b; c; z) = (a b / c) 2F1(a+1, b+1; c+1; z)``."""
    p = _as_params(params)
    if p.a * p.b == 0:
        return 0j
    return p.a * p.b / p.c * hyp2f1(p.shifted(1, 1, 1), z)


# ---------------------------------------------------------------------------
# Rational functions with denominators x^i (1-x)^j


def _trim(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    n = coeffs.size
    while n > 1 and abs(coeffs[n - 1]) <= 1e-15 * scale:
        n -= 1
    return coeffs[:n].copy()


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """``N(x) / (x**i (1-x)**j)`` with ``N`` a dense polynomial.

    ``num`` holds ascending coefficients.  The representation is reduced:
    whenever ``N`` vanishes at 0 (resp. 1) while ``i > 0`` (resp. ``j > 0``)
    the common factor is divided out, so the fraction has no removable
    singularities.  Zero tests use a relative tolerance of ``1e-12``.
    """

    num: np.ndarray
    i: int = 0
    j: int = 0

    def __post_init__(self):
        num, i, j = _trim(self.num), int(self.i), int(self.j)
        num, i, j = _reduce(num, i, j)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)

    @classmethod
    def const(cls, c: complex) -> "RationalFunction":
        return cls(np.array([c], dtype=complex))

    @property
    def numerator(self) -> list[complex]:
        return [complex(c) for c in self.num]

    @property
    def denominator(self) -> list[complex]:
        """Ascending coefficients of ``x**i (1-x)**j`` (monic up to sign of ``(1-x)**j``)."""
        d = np.polynomial.polynomial.polypow([0, 1], self.i) if self.i else np.array([1.0])
        d = np.polynomial.polynomial.polymul(d, np.polynomial.polynomial.polypow([1, -1], self.j))
        return [complex(c) for c in np.atleast_1d(d)]

    @property
    def degree(self) -> int:
        return self.num.size - 1

    def is_zero(self) -> bool:
        return bool(np.all(self.num == 0))

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        val = np.polynomial.polynomial.polyval(x, self.num)
        return val / (x**self.i * (1 - x) ** self.j)

    def _lift(self, i: int, j: int) -> np.ndarray:
        """Numerator over the larger denominator ``x**i (1-x)**j``."""
        num = self.num
        if i > self.i:
            num = np.concatenate((np.zeros(i - self.i, dtype=complex), num))
        if j > self.j:
            num = np.polynomial.polynomial.polymul(num, np.polynomial.polynomial.polypow([1, -1], j - self.j))
        return np.asarray(num, dtype=complex)

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        other = _as_rf(other)
        i, j = max(self.i, other.i), max(self.j, other.j)
        return RationalFunction(np.polynomial.polynomial.polyadd(self._lift(i, j), other._lift(i, j)), i, j)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.i, self.j)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-_as_rf(other))

    def __mul__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        return RationalFunction(
            np.polynomial.polynomial.polymul(self.num, other.num), self.i + other.i, self.j + other.j
        )

    __rmul__ = __mul__

    def times_monomial(self, power: int) -> "RationalFunction":
        """Multiply by ``x**power`` (``power`` may be negative)."""
        if power >= 0:
            take = min(power, self.i)
            num = np.concatenate((np.zeros(power - take, dtype=complex), self.num))
            return RationalFunction(num, self.i - take, self.j)
        return RationalFunction(self.num, self.i - power, self.j)

    def derivative(self) -> "RationalFunction":
        # (N / (x^i (1-x)^j))' = [N' x (1-x) - N (i (1-x) - j x)] / (x^{i+1} (1-x)^{j+1})
        P = np.polynomial.polynomial
        dn = P.polyder(self.num) if self.num.size > 1 else np.zeros(1, dtype=complex)
        term1 = P.polymul(dn, [0, 1, -1])
        term2 = P.polymul(self.num, [self.i, -(self.i + self.j)])
        return RationalFunction(P.polysub(term1, term2), self.i + 1, self.j + 1)


def _reduce(num: np.ndarray, i: int, j: int):
    P = np.polynomial.polynomial
    scale = float(np.max(np.abs(num))) if num.size else 0.0
    if scale == 0:
        return np.zeros(1, dtype=complex), 0, 0
    while i > 0 and abs(num[0]) <= 1e-12 * scale:
        num = num[1:] if num.size > 1 else np.zeros(1, dtype=complex)
        i -= 1
    while j > 0 and abs(np.sum(num)) <= 1e-12 * scale * num.size:
        quo, _ = P.polydiv(num, [1, -1])
        num = _trim(quo)
        j -= 1
    return num, i, j


def _as_rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    return RationalFunction.const(complex(x))


@dataclass(frozen=True)
class RationalOperator1:
    """First-order operator ``f -> p f + q f'`` with rational coefficients."""

    p: RationalFunction
    q: RationalFunction

    @classmethod
    def identity(cls) -> "RationalOperator1":
        return cls(RationalFunction.const(1), RationalFunction.const(0))

    def __add__(self, other: "RationalOperator1") -> "RationalOperator1":
        return RationalOperator1(self.p + other.p, self.q + other.q)

    def scaled(self, c: complex, power: int = 0) -> "RationalOperator1":
        """``c x**power`` times the operator."""
        return RationalOperator1(
            (self.p * c).times_monomial(power), (self.q * c).times_monomial(power)
        )

    def _terms(self, base, x: complex) -> tuple[complex, complex]:
        b = _as_params(base)
        t1 = complex(self.p(x)) * hyp2f1(b, x)
        t2 = 0j if self.q.is_zero() else complex(self.q(x)) * hyp2f1_derivative(b, x)
        return t1, t2

    def apply(self, base, x: complex) -> complex:
        """Evaluate ``p(x) F(x) + q(x) F'(x)`` with ``F = 2F1(base; x)``.

        The two terms can cancel strongly near ``x = 0``, where the
        coefficients of high-level operators have poles of order ``2m - 1``;
        see :meth:`condition`.
        """
        t1, t2 = self._terms(base, x)
        return t1 + t2

    def condition(self, base, x: complex) -> float:
        """``(|p F| + |q F'|) / |p F + q F'|``: relative error amplification of :meth:`apply`."""
        t1, t2 = self._terms(base, x)
        total = abs(t1 + t2)
        return math.inf if total == 0 else (abs(t1) + abs(t2)) / total


def _differentiate(op: RationalOperator1, base: Gauss2F1Params) -> RationalOperator1:
    """``d/dx`` of ``p F + q F'`` re-expressed through ``F, F'`` only."""
    a, b, c = base.a, base.b, base.c
    # F'' = [a b F - (c - (a+b+1) x) F'] / (x (1-x))
    ab = RationalFunction(np.array([a * b]), 1, 1)
    lin = RationalFunction(np.array([c, -(a + b + 1)]), 1, 1)
    p = op.p.derivative() + op.q * ab
    q = op.p + op.q.derivative() - op.q * lin
    return RationalOperator1(p, q)


def contiguous_step(op: RationalOperator1, base, j: int) -> RationalOperator1:
    """Advance the level ``j-1`` operator to level ``j``.

    The level ``j`` target is ``F(a+j, b+j; c+2j; x)``.

    Raises
    ------
    DegenerateError
        If one of ``(a+j-1), (b+j-1), (c-a+j-1), (c-b+j-1)`` vanishes.
    """
    base = _as_params(base)
    a, b, c = base.a, base.b, base.c
    A0, B0, C0 = a + j - 1, b + j - 1, c + 2 * j - 2
    factors = {"a+j-1": A0, "b+j-1": B0, "c-a+j-1": c - a + j - 1, "c-b+j-1": c - b + j - 1}
    for name, val in factors.items():
        if abs(val) < 1e-14:
            raise DegenerateError(f"contiguous chain degenerates: {name} = 0 at j={j}", index=j, factor=name)
    # step A: F(A0+1, B0+1; C0+1) = C0/(A0 B0) d/dx F(A0, B0; C0)
    d = _differentiate(op, base)
    stepA = RationalOperator1(d.p * (C0 / (A0 * B0)), d.q * (C0 / (A0 * B0)))
    # step B: with (A, B, C) = (A0+1, B0+1, C0+1),
    # F(A, B; C+1) = C [(1-x) F' + (C-A-B) F] / ((C-A)(C-B))
    A, B, C = A0 + 1, B0 + 1, C0 + 1
    d2 = _differentiate(stepA, base)
    one_minus_x = RationalFunction(np.array([1, -1], dtype=complex))
    pref = C / ((C - A) * (C - B))
    p = (d2.p * one_minus_x + stepA.p * (C - A - B)) * pref
    q = (d2.q * one_minus_x + stepA.q * (C - A - B)) * pref
    return RationalOperator1(p, q)


def contiguous_reduce(m: int, base) -> RationalOperator1:
    """Operator ``R_m`` with ``F(a+m, b+m; c+2m; x) = p_m F + q_m F'``.

    Here ``F = F(a, b; c; x)`` is the base function.  The numerator degrees
    are checked against the cap ``4m + 8``.
    """
    if m < 0 or int(m) != m:
        raise ParameterError("m must be a non-negative integer")
    base = _as_params(base)
    op = RationalOperator1.identity()
    cap = 4 * m + 8
    for j in range(1, int(m) + 1):
        op = contiguous_step(op, base, j)
        if op.p.degree > cap or op.q.degree > cap:
            raise DegenerateError(f"numerator degree exceeded cap {cap} at j={j}", index=j, factor="degree")
    return op


# ---------------------------------------------------------------------------
# The diagonal ladder F_m = F(a+m, b+m; c+2m; x)


def _ladder_coeffs(A: complex, B: complex, C: complex, x: complex):
    """``(alpha, beta)`` with ``F_{m+1} + beta F_m + alpha F_{m-1} = 0``.

    ``(A, B, C)`` are the parameters of ``F_{m-1}``.  Obtained by composing
    two contiguous steps and eliminating the derivative.
    """
    den = x * x * (A + 1) * (B + 1) * (A - C - 1) * (B - C - 1)
    alpha = (C + 1) * (C + 2) ** 2 * (C + 3) / den
    beta = -(C + 1) * (C + 2) * (C + 3) * (
        2 * A * B * x - A * C * x - B * C * x + C * C - C * x + 2 * C
    ) / (C * den)
    return alpha, beta


def diagonal_ladder_logs(params, x: complex, M: int) -> np.ndarray:
    """Logarithms of ``F(a+m, b+m; c+2m; x)`` for ``m = 0..M``.

    The sequence obeys a three-term recurrence in ``m`` whose characteristic
    roots are ``4/(1 +- sqrt(1-x))**2``; ``F_m`` is the minimal solution
    (principal square root), so the ratios ``F_m/F_{m-1}`` are generated by
    a backward (Miller) sweep started beyond ``M`` at the asymptotic ratio,
    and anchored by ``F_0`` from the power series.  Values themselves would
    overflow for large ``m``, hence logarithms (imaginary parts mod 2 pi).

    Raises
    ------
    DomainError
        If ``x`` is on or too close to the cut ``[1, inf)`` for the two
        characteristic roots to separate.
    """
    p = _as_params(params)
    x = complex(x)
    out = np.empty(M + 1, dtype=complex)
    out[0] = cmath.log(hyp2f1(p, x))
    if M == 0:
        return out
    s = cmath.sqrt(1 - x)
    sep = abs((1 - s) / (1 + s)) ** 2
    if sep > 0.999:
        raise DomainError(f"x={x!r} too close to [1, inf): ladder recurrence does not separate")
    extra = 20 if sep == 0 else min(20000, int(math.ceil(math.log(1e-17) / math.log(sep))) + 20)
    top = M + extra
    ratio = 4 / (1 + s) ** 2  # asymptotic F_{m+1}/F_m
    ratios = np.empty(top + 1, dtype=complex)
    for m in range(top, 0, -1):
        # F_{m+1} + beta F_m + alpha F_{m-1} = 0, parameters of F_{m-1}
        alpha, beta = _ladder_coeffs(p.a + m - 1, p.b + m - 1, p.c + 2 * m - 2, x)
        denom = beta + ratio
        if denom == 0:
            raise DegenerateError("ladder recurrence hit a zero denominator", index=m, factor="beta+ratio")
        ratio = -alpha / denom  # F_m / F_{m-1}
        ratios[m] = ratio
    out[1:] = out[0] + np.cumsum(np.log(ratios[1 : M + 1]))
    return out
