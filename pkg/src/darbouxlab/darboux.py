"""The Darboux equation and its two local series solutions.

The equation (Jacobi form) is

    y'' + (h - xi(xi+1)/sn^2 - eta(eta+1) dn^2/cn^2
             - mu(mu+1) k^2 cn^2/dn^2 - nu(nu+1) k^2 sn^2) y = 0,

with regular singular points at ``0, K, K+iK', iK'`` carrying the
parameters ``xi, eta, mu, nu``.  Its local solution with exponent ``xi+1``
at ``u = 0`` is written ``sn^{xi+1} cn^{eta+1} dn^{mu+1} f`` where ``f`` is
expanded either

* as a power series ``sum C_m x^m`` in ``x = sn^2 u`` (``C_0 = 1``), or
* in the hypergeometric basis ``sum X_m G_m x^m F(a+m, b+m; c+2m; x)``
  (``X_0 = 1``) with ``a = (w_{++++}+4)/2``, ``b = (w_{+++-}+3)/2``,
  ``c = xi+mu+3`` and
  ``G_m = Gamma(c-b+m) Gamma(c-a+m) / Gamma(c+2m)``.

Here ``w_{s1 s2 s3 s4} = s1 xi + s2 eta + s3 mu + s4 nu`` (a ``0`` sign drops
the term).  Both coefficient sequences obey three-term recurrences.  The
second basis parameter is built from ``w_{+++-}``; a variant with ``mu`` and
``nu`` exchanged (``w_{++-+}``) circulates as well, and only the former is
checked against the ODE (see :mod:`darbouxlab.derivation`).

Accessory-parameter convention: ``h`` is always the ``h`` of the ODE above.
The power-series recurrence in its customary form uses a shifted
parameter ``h_rec = h - (1+k^2)(xi+1)^2`` (see :func:`power_series_h_offset`);
the hypergeometric recurrence uses the ODE ``h`` unchanged.  Both facts are
re-derived independently in :mod:`darbouxlab.derivation`.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import recurrence as rr
from .elliptic import CoordinateMap, jacobi_sn_cn_dn, jacobi_to_weierstrass, wp
from .errors import (
    ConsistencyError,
    DegenerateError,
    DomainError,
    NonConvergenceError,
    ParameterError,
    PoleError,
)
from .hypergeom import (
    Gauss2F1Params,
    RationalFunction,
    RationalOperator1,
    contiguous_reduce,
    diagonal_ladder_logs,
    hyp2f1,
    loggamma,
)

LATTICE_TOL = 1e-10
SPECTRUM_TOL = 1e-8
TAIL_RTOL = 1e-14
EXCLUDED_XI_TOL = 1e-12


def _near_int(z: complex, tol: float = LATTICE_TOL) -> Optional[int]:
    z = complex(z)
    n = round(z.real)
    if abs(z.imag) <= tol and abs(z.real - n) <= tol:
        return int(n)
    return None


def _excluded_xi(xi: complex) -> bool:
    """True for the logarithmic cases ``xi in {-3/2, -5/2, ...}``."""
    n = _near_int(complex(xi) + 0.5, EXCLUDED_XI_TOL)
    return n is not None and n <= -1


# ---------------------------------------------------------------------------
# Parameters


@dataclass(frozen=True)
class DarbouxParams:
    """Exponent parameters ``(xi, eta, mu, nu)`` and modulus ``k``."""

    xi: complex
    eta: complex
    mu: complex
    nu: complex
    k: complex

    def __post_init__(self):
        for name in ("xi", "eta", "mu", "nu", "k"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if _excluded_xi(self.xi):
            raise ParameterError(
                f"xi={self.xi!r} is one of -3/2, -5/2, ...: the exponent-(xi+1) "
                "solution is logarithmic there and is not supported"
            )
        if abs(self.k * self.k - 1) < 1e-15:
            raise ParameterError("k**2 = 1 is a degenerate modulus")

    @property
    def thetas(self) -> tuple[complex, complex, complex, complex]:
        return (self.xi, self.eta, self.mu, self.nu)

    @property
    def potential_coefficients(self) -> tuple[complex, ...]:
        """``(xi(xi+1), eta(eta+1), mu(mu+1), nu(nu+1))``."""
        return tuple(t * (t + 1) for t in self.thetas)

    @property
    def sums(self) -> "SigmaSums":
        return SigmaSums(self)

    def varpi(self, signs: str) -> complex:
        return self.sums(signs)

    def replace(self, **kw) -> "DarbouxParams":
        d = dict(xi=self.xi, eta=self.eta, mu=self.mu, nu=self.nu, k=self.k)
        d.update(kw)
        return DarbouxParams(**d)

    @property
    def local_exponents(self) -> dict[str, tuple[complex, complex]]:
        """Exponent pairs ``(theta+1, -theta)`` at ``0, K, K+iK', iK'``."""
        return {
            "0": (self.xi + 1, -self.xi),
            "K": (self.eta + 1, -self.eta),
            "K+iK'": (self.mu + 1, -self.mu),
            "iK'": (self.nu + 1, -self.nu),
        }


@dataclass(frozen=True)
class SigmaSums:
    """Signed sums ``w_{s1 s2 s3 s4} = s1 xi + s2 eta + s3 mu + s4 nu``.

    Signs are given as a 4-character string over ``+``, ``-`` and ``0``;
    e.g. ``"+0+0"`` is ``xi + mu``.
    """

    p: DarbouxParams

    def __call__(self, signs: str) -> complex:
        if len(signs) != 4 or any(s not in "+-0" for s in signs):
            raise ParameterError(f"bad sign pattern {signs!r}")
        w = {"+": 1, "-": -1, "0": 0}
        return sum(w[s] * t for s, t in zip(signs, self.p.thetas))

    pppp = property(lambda self: self("++++"))
    pppm = property(lambda self: self("+++-"))
    pmpp = property(lambda self: self("+-++"))
    pmpm = property(lambda self: self("+-+-"))
    p0p0 = property(lambda self: self("+0+0"))


# ---------------------------------------------------------------------------
# Potentials in both coordinates


def potential_jacobi(p: DarbouxParams, u):
    """``xi(xi+1)/sn^2 + eta(eta+1) dn^2/cn^2 + mu(mu+1) k^2 cn^2/dn^2 + nu(nu+1) k^2 sn^2``."""
    s, c, d = jacobi_sn_cn_dn(u, p.k)
    a0, a1, a2, a3 = p.potential_coefficients
    k2 = p.k * p.k
    with np.errstate(divide="ignore", invalid="ignore"):
        return a0 / s**2 + a1 * d**2 / c**2 + a2 * k2 * c**2 / d**2 + a3 * k2 * s**2


def potential_weierstrass(p: DarbouxParams, z, tau):
    """``sum_j theta_j(theta_j+1) wp(z + omega_j)`` over the order-two points."""
    from .elliptic import as_lattice

    lat = as_lattice(tau)
    z = np.asarray(z, dtype=complex)
    return sum(c * wp(z + w, lat) for c, w in zip(p.potential_coefficients, lat.half_periods))


def h_jacobi_to_weierstrass(p: DarbouxParams, h: complex, cmap: Optional[CoordinateMap] = None) -> complex:
    """Accessory parameter of the Weierstrass form for ``z = u / (2K)``.

    With :func:`darbouxlab.elliptic.jacobi_to_weierstrass` the Jacobi
    potential equals ``(V_W(z) - e_nu sum theta(theta+1)) / (2K)^2``, hence
    ``h_W = (2K)^2 h + e_nu sum theta(theta+1)``.
    """
    cmap = cmap or jacobi_to_weierstrass(p.k)
    return cmap.scale**2 * h + cmap.e_nu * sum(p.potential_coefficients)


# ---------------------------------------------------------------------------
# Recurrences


def power_series_h_offset(p: DarbouxParams) -> complex:
    """``h_ODE - h_rec`` for the customary power-series recurrence: ``(1+k^2)(xi+1)^2``."""
    return (1 + p.k * p.k) * (p.xi + 1) ** 2


HYPERGEOM_H_OFFSET = 0.0


def power_series_coefficients(p: DarbouxParams, h_rec: complex, m: int):
    """``(R_m, S_m, P_m)`` of the power-series recurrence in customary form.

    ``(2m+2)(2m+2xi+3) C_{m+1}
      + {h_rec - (2m+eta+xi+2)^2 - k^2 (2m+mu+xi+2)^2 + (k^2+1)(xi+1)^2} C_m
      + k^2 (2m+w_{++++}+2)(2m+w_{+++-}+1) C_{m-1} = 0``.
    """
    xi, eta, mu = p.xi, p.eta, p.mu
    k2 = p.k * p.k
    R = (2 * m + 2) * (2 * m + 2 * xi + 3)
    S = h_rec - (2 * m + eta + xi + 2) ** 2 - k2 * (2 * m + mu + xi + 2) ** 2 + (k2 + 1) * (xi + 1) ** 2
    P = k2 * (2 * m + p.sums.pppp + 2) * (2 * m + p.sums.pppm + 1) if m > 0 else 0j
    return R, S, P


def power_series_recurrence(p: DarbouxParams, h: complex) -> rr.ThreeTermRecurrence:
    """Recurrence for ``C_m`` at ODE accessory parameter ``h``.

    Limits after dividing by ``4 m^2``: ``(1, -(1+k^2), k^2)``; the
    characteristic roots are ``1`` and ``k^2``.
    """
    h_rec = complex(h) - power_series_h_offset(p)
    k2 = p.k * p.k
    return rr.ThreeTermRecurrence(
        lambda m: power_series_coefficients(p, h_rec, m),
        limits=(1.0, -(1 + k2), k2),
        name="power-series",
    )


def _require_nonzero(val: complex, m: int, label: str) -> None:
    if abs(val) < 1e-14:
        raise DegenerateError(f"{label} vanishes at m={m}", index=m, factor=label)


def hypergeom_K(p: DarbouxParams, m: int) -> complex:
    """Coefficient of ``X_{m-1}`` in equation ``m`` (zero for ``m = 0``)."""
    if m == 0:
        return 0j
    s = p.sums
    w0 = s.p0p0
    num = (s.pppp + 2 * m + 2) * (s.pppm + 2 * m + 1) * (w0 + m + 1) * (2 * p.mu + 2 * m + 1)
    _require_nonzero(w0 + 2 * m + 1, m, "xi+mu+2m+1")
    _require_nonzero(w0 + 2 * m, m, "xi+mu+2m")
    return num / (2 * (w0 + 2 * m + 1) * (w0 + 2 * m))


def hypergeom_M(p: DarbouxParams, m: int) -> complex:
    """Coefficient of ``X_{m+1}`` in equation ``m``."""
    s = p.sums
    w0 = s.p0p0
    _require_nonzero(w0 + 2 * m + 4, m, "xi+mu+2m+4")
    _require_nonzero(w0 + 2 * m + 3, m, "xi+mu+2m+3")
    num = (m + 1) * (2 * p.xi + 2 * m + 3) * (s.pmpp + 2 * m + 3) * (s.pmpm + 2 * m + 2)
    return num / (2 * (w0 + 2 * m + 4) * (w0 + 2 * m + 3))


def hypergeom_L(p: DarbouxParams, h: complex, m: int) -> complex:
    """Coefficient of ``X_m`` in equation ``m``; equals ``h`` plus an h-free part."""
    s = p.sums
    xi, eta, mu, nu = p.thetas
    k2 = p.k * p.k
    w0 = s.p0p0
    val = 0j
    if m != 0:
        _require_nonzero(w0 + 2 * m + 3, m, "xi+mu+2m+3")
        _require_nonzero(w0 + 2 * m + 1, m, "xi+mu+2m+1")
        den = 2 * (w0 + 2 * m + 3) * (w0 + 2 * m + 1)
        bracket = (
            (s.pppp + 2 * m + 4) * (s.pmpp + 2 * m + 3) / den
            + (s.pppm + 2 * m + 3) * (s.pmpm + 2 * m + 2) / den
            - 2 / (w0 + 2 * m + 1)
        )
        val += bracket * (2 * xi + 2 * m + 1) * m
    _require_nonzero(w0 + 2 * m + 3, m, "xi+mu+2m+3")
    val -= (2 * mu + 3) * (s.pppp + 2 * m + 4) * (s.pppm + 2 * m + 3) / (2 * (w0 + 2 * m + 3))
    val += (
        2 * (2 * mu + 3) * m
        + h
        - xi * (xi + 1) * k2
        + (xi + 1) * (1 - k2)
        + 2 * (mu + 1) * (xi + 1) * (1 - k2)
        - 4 * k2 * m * (w0 + m + 2)
        - nu * (nu + 1)
        + (mu + 1) ** 2 * (1 - k2)
        + 2 * (mu + 1) * (eta + 1)
        + mu
        + eta
        + 2
    )
    return val


def hypergeom_series_recurrence(p: DarbouxParams, h: complex) -> rr.ThreeTermRecurrence:
    """Recurrence ``K_m X_{m-1} + L_m X_m + M_m X_{m+1} = 0`` at ODE ``h``.

    In the generic naming ``(R, S, P) = (M, L, K)``.  Limits of the ratios:
    ``K/M -> 1`` and ``L/M -> 2(1 - 2k^2)``, so the characteristic equation
    is ``t^2 - 2(2k^2 - 1) t + 1 = 0`` with roots ``(k +- i k')^2``.
    """
    h = complex(h)
    k2 = p.k * p.k

    def coeff(m: int):
        return hypergeom_M(p, m), hypergeom_L(p, h, m), hypergeom_K(p, m)

    return rr.ThreeTermRecurrence(coeff, limits=(1.0, 2 * (1 - 2 * k2), 1.0), name="hypergeometric")


def hypergeom_basis(p: DarbouxParams) -> Gauss2F1Params:
    """``(a, b; c)`` of the ``m = 0`` basis function."""
    s = p.sums
    return Gauss2F1Params((s.pppp + 4) / 2, (s.pppm + 3) / 2, s.p0p0 + 3)


def log_G(p: DarbouxParams, M: int) -> np.ndarray:
    """``log G_m`` for ``m = 0..M`` (branch of the imaginary part arbitrary)."""
    base = hypergeom_basis(p)
    a, b, c = base.a, base.b, base.c
    try:
        g0 = loggamma(c - b) + loggamma(c - a) - loggamma(c)
    except PoleError as exc:
        raise DegenerateError(f"Gamma prefactor G_0 is singular: {exc}", index=0, factor="G_0") from exc
    m = np.arange(M, dtype=float)
    with np.errstate(divide="ignore"):
        steps = np.log((c - b + m) * (c - a + m) / ((c + 2 * m) * (c + 2 * m + 1)))
    out = np.empty(M + 1, dtype=complex)
    out[0] = g0
    out[1:] = g0 + np.cumsum(steps)
    return out


# ---------------------------------------------------------------------------
# Series objects and evaluation


class SeriesKind(str, Enum):
    POWER = "PowerSeries"
    HYPERGEOM = "HypergeomSeries"

    @classmethod
    def parse(cls, kind) -> "SeriesKind":
        if isinstance(kind, cls):
            return kind
        key = str(kind).lower()
        if key in ("power", "powerseries"):
            return cls.POWER
        if key in ("hypergeom", "hypergeometric", "hypergeomseries"):
            return cls.HYPERGEOM
        raise ParameterError(f"unknown series kind {kind!r}")


@dataclass(frozen=True, eq=False)
class DarbouxSeries:
    """A local solution with exponent ``xi+1`` at ``u = 0``.

    ``log_coeffs`` holds logarithms of ``C_m`` (power series) or ``X_m``
    (hypergeometric basis); logs keep dominant/minimal sequences far past
    the double range.  ``terminated = q`` means coefficients beyond ``q``
    are exactly zero.
    """

    kind: SeriesKind
    params: DarbouxParams
    h: complex
    log_coeffs: np.ndarray
    terminated: Optional[int] = None
    exponents: tuple[complex, complex, complex] = field(init=False)

    def __post_init__(self):
        p = self.params
        object.__setattr__(self, "exponents", (p.xi + 1, p.eta + 1, p.mu + 1))
        lc = np.asarray(self.log_coeffs, dtype=complex).copy()
        if self.terminated is not None:
            lc[self.terminated + 1 :] = complex(-np.inf, 0)
        object.__setattr__(self, "log_coeffs", lc)

    @property
    def coeffs(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_coeffs)

    @property
    def N(self) -> int:
        return self.log_coeffs.size - 1

    def term_logs(self, x: complex, M: Optional[int] = None) -> np.ndarray:
        """Logs of the series terms at ``x = sn^2 u`` (prefactor excluded)."""
        M = self.N if M is None else min(M, self.N)
        x = complex(x)
        lc = self.log_coeffs[: M + 1]
        if x == 0:
            out = np.full(M + 1, complex(-np.inf, 0))
            out[0] = lc[0]
            if self.kind is SeriesKind.HYPERGEOM:
                out[0] += log_G(self.params, 0)[0]
            return out
        m = np.arange(M + 1)
        logx = cmath.log(x)
        if self.kind is SeriesKind.POWER:
            return lc + m * logx
        lastm = M if self.terminated is None else min(M, self.terminated)
        lf = np.full(M + 1, complex(-np.inf, 0))
        lf[: lastm + 1] = _ladder_or_direct(hypergeom_basis(self.params), x, lastm)
        lg = log_G(self.params, M)
        return lc + lg + m * logx + lf

    def partial_sum(self, u: complex, M: Optional[int] = None) -> complex:
        """Prefactor times the sum of terms ``0..M`` at ``u``."""
        s, c, d = jacobi_sn_cn_dn(u, self.params.k)
        logs = self.term_logs(s * s, M)
        return prefactor(self.params, s, c, d) * _sum_logs(logs)

    def __call__(self, u: complex) -> complex:
        return self.partial_sum(u)


def _ladder_or_direct(base: Gauss2F1Params, x: complex, M: int) -> np.ndarray:
    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = diagonal_ladder_logs(base, x, M)
        if np.all(np.isfinite(out)):
            return out
    except (DegenerateError, ZeroDivisionError, DomainError):
        pass
    vals = [hyp2f1(base.shifted(m, m, 2 * m), x) for m in range(M + 1)]
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(vals, dtype=complex))


def _sum_logs(logs: np.ndarray) -> complex:
    finite = logs[np.isfinite(logs.real)]
    if finite.size == 0:
        return 0j
    top = float(np.max(finite.real))
    return complex(np.exp(top) * np.sum(np.exp(finite - top)))


def prefactor(p: DarbouxParams, s: complex, c: complex, d: complex) -> complex:
    """``sn^{xi+1} cn^{eta+1} dn^{mu+1}`` with principal powers taken separately."""

    def pw(base: complex, e: complex) -> complex:
        if base == 0:
            if e.real > 0:
                return 0j
            if e == 0:
                return 1 + 0j
            raise PoleError("prefactor singular at a zero of sn/cn/dn")
        return complex(base) ** e

    return pw(s, p.xi + 1) * pw(c, p.eta + 1) * pw(d, p.mu + 1)


def ratio_coordinate(u: complex, k: complex) -> complex:
    """``(1 - s)/(1 + s)`` with ``s`` the principal root of ``1 - sn^2 u``.

    Equals ``(1 - cn u)/(1 + cn u)`` when ``Re cn u >= 0`` (``s = cn u``); in
    general it is the asymptotic term ratio of the hypergeometric basis,
    which always has modulus at most 1.
    """
    sn, _, _ = jacobi_sn_cn_dn(u, k)
    s = cmath.sqrt(1 - sn * sn)
    return (1 - s) / (1 + s)


@dataclass(frozen=True)
class ConvergenceDomain:
    """Bounds on ``|ratio_coordinate(u)|`` for the hypergeometric series.

    ``bound_minimal = 1/|t1|`` (valid when ``h`` solves the infinite
    continued fraction) and ``bound_dominant = 1/|t2|`` (generic ``h``).
    """

    bound_minimal: float
    bound_dominant: float
    minimal_selected: bool
    fraction_residual: Optional[float]
    terminating: bool = False

    @property
    def applicable(self) -> float:
        if self.terminating:
            return math.inf
        return self.bound_minimal if self.minimal_selected else self.bound_dominant


FRACTION_SELECT_TOL = 1e-10


def convergence_domain(p: DarbouxParams, h: complex, *, terminated: bool = False) -> ConvergenceDomain:
    """Domain of convergence in the ratio coordinate for accessory parameter ``h``."""
    k = p.k
    kp = cmath.sqrt(1 - k * k)
    b_plus = abs(k + 1j * kp) ** -2
    b_minus = abs(k - 1j * kp) ** -2
    bmin, bdom = max(b_plus, b_minus), min(b_plus, b_minus)
    if terminated:
        return ConvergenceDomain(bmin, bdom, False, None, terminating=True)
    residual = None
    selected = False
    if bmin > bdom * (1 + 1e-12):
        try:
            residual = abs(rr.continued_fraction_infinite(hypergeom_series_recurrence(p, h)))
            selected = residual < FRACTION_SELECT_TOL
        except (NonConvergenceError, DegenerateError, ZeroDivisionError):
            residual = None
    return ConvergenceDomain(bmin, bdom, selected, residual)


def power_series_radius(p: DarbouxParams) -> float:
    """Radius in ``x = sn^2`` of the generic power series: ``min(1, 1/|k|^2)``."""
    return min(1.0, 1.0 / abs(p.k) ** 2)


@dataclass(frozen=True)
class LocalValue:
    value: complex
    tail_estimate: float
    terms_used: int
    ratio_coordinate: complex
    domain: Optional[ConvergenceDomain]
    kind: SeriesKind


def build_series(p: DarbouxParams, h: complex, kind, N: int, *, terminated: Optional[int] = None) -> DarbouxSeries:
    """Forward-recursion coefficients ``0..N`` (``C_0 = 1`` or ``X_0 = 1``)."""
    kind = SeriesKind.parse(kind)
    rec = power_series_recurrence(p, h) if kind is SeriesKind.POWER else hypergeom_series_recurrence(p, h)
    n = N if terminated is None else min(N, terminated)
    lc = rr.forward_run_log(rec, n)
    if n < N:
        lc = np.concatenate((lc, np.full(N - n, complex(-np.inf, 0))))
    return DarbouxSeries(kind, p, complex(h), lc, terminated)


def _tail(logs: np.ndarray) -> tuple[float, float]:
    """(geometric tail estimate from the last two finite terms, |partial sum| scale)."""
    fin = np.isfinite(logs.real)
    total = abs(_sum_logs(logs))
    idx = np.nonzero(fin)[0]
    if idx.size < 2 or idx[-1] != logs.size - 1:
        return 0.0, total  # terminated: trailing terms vanish exactly
    last, prev = logs[idx[-1]], logs[idx[-2]]
    q = math.exp(min(700.0, (last - prev).real))
    if q >= 1:
        return math.inf, total
    return math.exp(min(700.0, last.real)) * q / (1 - q), total


def eval_local_solution(
    p: DarbouxParams,
    h: complex,
    kind,
    u: complex,
    N: Optional[int] = None,
    *,
    series: Optional[DarbouxSeries] = None,
    check_domain: bool = True,
) -> LocalValue:
    """Evaluate the exponent-``(xi+1)`` local solution at ``u``.

    Parameters
    ----------
    kind : "power" or "hypergeom"
    N : int, optional
        Truncation index; by default terms are added (up to 20000) until the
        tail estimate drops below ``1e-14`` of the partial sum.
    series : DarbouxSeries, optional
        Use these coefficients (e.g. a Darboux function) instead of a
        forward run at ``h``.

    Raises
    ------
    DomainError
        If the series does not terminate and ``u`` lies outside the
        applicable convergence domain.
    """
    kind = SeriesKind.parse(kind)
    s, c, d, near = jacobi_sn_cn_dn(u, p.k, pole_flag=True)
    if near:
        raise PoleError(f"u={u!r} is numerically at a pole of sn")
    x = s * s
    rho = ratio_coordinate(u, p.k)
    terminated = series.terminated if series is not None else None
    dom = None
    if kind is SeriesKind.HYPERGEOM:
        dom = convergence_domain(p, h, terminated=terminated is not None)
        if check_domain and not abs(rho) < dom.applicable:
            raise DomainError(
                f"|ratio coordinate|={abs(rho):.6g} outside the convergence domain "
                f"(bound_dominant={dom.bound_dominant:.6g}, bound_minimal={dom.bound_minimal:.6g}, "
                f"applicable={dom.applicable:.6g})"
            )
    elif check_domain and terminated is None and not abs(x) < power_series_radius(p):
        raise DomainError(f"|sn^2 u|={abs(x):.6g} outside power-series radius {power_series_radius(p):.6g}")
    pre = prefactor(p, s, c, d)
    sizes = [N] if N is not None else [64, 256, 1024, 4096, 20000]
    for n in sizes:
        ser = series if series is not None else build_series(p, h, kind, n)
        logs = ser.term_logs(x, n)
        tail, total = _tail(logs)
        if N is not None or tail <= TAIL_RTOL * max(total, 1e-300) or (series is not None and n >= ser.N):
            break
    return LocalValue(pre * _sum_logs(logs), abs(pre) * tail, logs.size - 1, rho, dom, kind)


# ---------------------------------------------------------------------------
# Termination


class TerminationCase(str, Enum):
    SUM_EVEN = "SumEven"
    SUM_ODD = "SumOdd"
    HALF_INTEGER = "HalfInteger"
    NONE = "None"


@dataclass(frozen=True)
class TerminationHit:
    case: TerminationCase
    q: int


@dataclass(frozen=True)
class TerminationReport:
    hits: tuple[TerminationHit, ...]

    @property
    def case(self) -> TerminationCase:
        return self.hits[0].case if self.hits else TerminationCase.NONE

    @property
    def q(self) -> Optional[int]:
        return self.hits[0].q if self.hits else None

    @property
    def terminates(self) -> bool:
        return bool(self.hits)

    def cases(self) -> list[str]:
        return [h.case.value for h in self.hits]


def termination_check(p: DarbouxParams) -> TerminationReport:
    """Which of the three termination identities hold (tolerance 1e-10).

    * SumEven: ``w_{++++} = -2q-4``
    * SumOdd: ``w_{+++-} = -2q-3``
    * HalfInteger: ``mu = -(2q+3)/2``
    """
    hits = []
    n = _near_int(p.sums.pppp)
    if n is not None and n <= -4 and n % 2 == 0:
        hits.append(TerminationHit(TerminationCase.SUM_EVEN, (-n - 4) // 2))
    n = _near_int(p.sums.pppm)
    if n is not None and n <= -3 and n % 2 == 1:
        hits.append(TerminationHit(TerminationCase.SUM_ODD, (-n - 3) // 2))
    n = _near_int(2 * p.mu)
    if n is not None and n <= -3 and n % 2 == 1:
        hits.append(TerminationHit(TerminationCase.HALF_INTEGER, (-n - 3) // 2))
    return TerminationReport(tuple(hits))


def _match(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Largest relative distance when pairing each element of ``a`` with ``b``."""
    remaining = list(b)
    worst = 0.0
    for v in a:
        j = int(np.argmin([abs(v - w) for w in remaining]))
        worst = max(worst, abs(v - remaining[j]) / max(1.0, abs(v)))
        remaining.pop(j)
    return worst


@dataclass(frozen=True)
class CaseSpectrum:
    case: TerminationCase
    q: int
    h: tuple[complex, ...]
    source: str  # which recurrence(s) produced it


def case_spectra(p: DarbouxParams, report: Optional[TerminationReport] = None) -> list[CaseSpectrum]:
    """Spectra for each termination case that fires (ODE convention)."""
    report = report or termination_check(p)
    if not report.terminates:
        raise ParameterError("parameters satisfy no termination identity")
    out = []
    for hit in report.hits:
        hyp = None
        try:
            hyp = rr.tridiagonal_spectrum(lambda h: hypergeom_series_recurrence(p, h), hit.q)
        except DegenerateError:
            if hit.case is TerminationCase.HALF_INTEGER:
                raise
        if hit.case is TerminationCase.HALF_INTEGER:
            out.append(CaseSpectrum(hit.case, hit.q, tuple(hyp), "hypergeom"))
            continue
        pw = rr.tridiagonal_spectrum(lambda h: power_series_recurrence(p, h), hit.q)
        if hyp is None:
            out.append(CaseSpectrum(hit.case, hit.q, tuple(pw), "power"))
            continue
        gap = _match(hyp, pw)
        if gap > SPECTRUM_TOL:
            raise ConsistencyError(
                f"power-series and hypergeometric spectra disagree (relative gap {gap:.3g}) "
                f"for case {hit.case.value}, q={hit.q}"
            )
        out.append(CaseSpectrum(hit.case, hit.q, tuple(hyp), "hypergeom+power"))
    return out


def accessory_spectrum(p: DarbouxParams, report: Optional[TerminationReport] = None) -> list[complex]:
    """Accessory parameters (ODE convention) giving a terminating series.

    Union over all termination cases that fire; see :func:`case_spectra`
    for the per-case breakdown.
    """
    vals: list[complex] = []
    for cs in case_spectra(p, report):
        for h in cs.h:
            if all(abs(h - v) > SPECTRUM_TOL * max(1.0, abs(h)) for v in vals):
                vals.append(h)
    return sorted(vals, key=lambda v: (round(v.real, 12), v.imag))


def _spectrum_residual(rec: rr.ThreeTermRecurrence, q: int) -> float:
    """Scale-free singularity measure of the truncated (q+1) system."""
    T = rr.tridiagonal_matrix(rec, q)
    sv = np.linalg.svd(T, compute_uv=False)
    return float(sv[-1] / max(1.0, sv[0]))


def spectrum_residual(p: DarbouxParams, h: complex, report: Optional[TerminationReport] = None) -> float:
    """Smallest truncated-system residual of ``h`` over the cases that fire.

    Both recurrences are tried for each case; a value near zero means ``h``
    is a spectrum point.
    """
    report = report or termination_check(p)
    best = np.inf
    for hit in report.hits:
        for make in (hypergeom_series_recurrence, power_series_recurrence):
            if make is power_series_recurrence and hit.case is TerminationCase.HALF_INTEGER:
                continue
            try:
                best = min(best, _spectrum_residual(make(p, h), hit.q))
            except DegenerateError:
                continue
    return float(best)


def darboux_polynomial(p: DarbouxParams, h_j: complex) -> DarbouxSeries:
    """Terminating power series at a spectrum point (SumEven/SumOdd cases).

    Raises
    ------
    ParameterError
        If no polynomial-type termination identity holds, or ``h_j`` is not
        a spectrum point (truncated-system residual above 1e-8).
    """
    report = termination_check(p)
    hits = [hh for hh in report.hits if hh.case in (TerminationCase.SUM_EVEN, TerminationCase.SUM_ODD)]
    if not hits:
        raise ParameterError("power series terminates only in the SumEven/SumOdd cases")
    rec = power_series_recurrence(p, h_j)
    for hit in hits:
        if _spectrum_residual(rec, hit.q) <= SPECTRUM_TOL:
            lc = rr.forward_run_log(rec, hit.q)
            return DarbouxSeries(SeriesKind.POWER, p, complex(h_j), lc, terminated=hit.q)
    raise ParameterError(f"h={h_j!r} is not in the accessory spectrum")


def hypergeom_terminating_series(p: DarbouxParams, h_j: complex) -> DarbouxSeries:
    """Terminating hypergeometric-basis sum at a spectrum point (any case)."""
    report = termination_check(p)
    rec = hypergeom_series_recurrence(p, h_j)
    for hit in report.hits:
        try:
            res = _spectrum_residual(rec, hit.q)
        except DegenerateError:
            continue
        if res <= SPECTRUM_TOL:
            lc = rr.forward_run_log(rec, hit.q)
            return DarbouxSeries(SeriesKind.HYPERGEOM, p, complex(h_j), lc, terminated=hit.q)
    raise ParameterError(f"h={h_j!r} is not in the accessory spectrum")


@dataclass(frozen=True)
class GaugeReduction:
    """Solution ``= sn^{xi+1} cn^{eta+1} dn^{mu+1} (p F + q F')(sn^2 u)``."""

    operator: RationalOperator1
    base: Gauss2F1Params
    params: DarbouxParams
    h: complex
    coeffs: tuple[complex, ...]

    def __call__(self, u: complex) -> complex:
        s, c, d = jacobi_sn_cn_dn(u, self.params.k)
        return prefactor(self.params, s, c, d) * self.operator.apply(self.base, s * s)


def gauge_reduce_solution(p: DarbouxParams, h_j: complex) -> GaugeReduction:
    """Fold the terminating hypergeometric-basis sum into one operator.

    Requires the HalfInteger case ``mu = -(2q+3)/2`` and ``h_j`` in its
    spectrum.  Each ``F(a+m, b+m; c+2m; x)`` is rewritten with
    :func:`darbouxlab.hypergeom.contiguous_reduce`, weighted by
    ``X_m G_m x^m`` and summed.
    """
    report = termination_check(p)
    hits = [hh for hh in report.hits if hh.case is TerminationCase.HALF_INTEGER]
    if not hits:
        raise ParameterError("gauge reduction needs mu = -(2q+3)/2")
    q = hits[0].q
    rec = hypergeom_series_recurrence(p, h_j)
    if _spectrum_residual(rec, q) > SPECTRUM_TOL:
        raise ParameterError(f"h={h_j!r} is not in the HalfInteger spectrum")
    X = rr.forward_run(rec, q)
    G = np.exp(log_G(p, q))
    base = hypergeom_basis(p)
    total = RationalOperator1(RationalFunction.const(0), RationalFunction.const(0))
    for m in range(q + 1):
        total = total + contiguous_reduce(m, base).scaled(complex(X[m] * G[m]), m)
    return GaugeReduction(total, base, p, complex(h_j), tuple(complex(v) for v in X))


# ---------------------------------------------------------------------------
# Darboux functions (minimal solutions)


def truncated_seeds(p: DarbouxParams, N: int = 80) -> list[complex]:
    """Eigenvalue seeds: spectrum of the ``N x N`` truncated hypergeometric system."""
    hs = rr.tridiagonal_spectrum(lambda h: hypergeom_series_recurrence(p, h), N - 1)
    return sorted(hs, key=abs)


def _fraction(p: DarbouxParams, h: complex) -> complex:
    return rr.continued_fraction_infinite(hypergeom_series_recurrence(p, h))


@dataclass(frozen=True)
class DarbouxFunction:
    h: complex
    residual: float
    iterations: int
    series: DarbouxSeries
    perron: rr.PerronReport
    trace: tuple[complex, ...]


def darboux_function(
    p: DarbouxParams,
    h_seed: complex,
    *,
    N: int = 400,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> DarbouxFunction:
    """Accessory parameter where the infinite continued fraction vanishes.

    Secant iteration from ``h_seed``; the coefficients are then the minimal
    solution of the hypergeometric recurrence, generated by a backward
    sweep, and checked to be classified Minimal.

    Raises
    ------
    ParameterError
        For real ``k``: the characteristic roots then have equal modulus and
        the minimal solution is not selected by the continued fraction.
    NonConvergenceError
        If the secant iteration fails within ``max_iter`` steps (``trace``
        holds the residual history).
    """
    rec0 = hypergeom_series_recurrence(p, h_seed)
    roots = rr.characteristic_roots(rec0)
    if not roots.separated:
        raise ParameterError(
            "characteristic roots (k +- ik')^2 have equal modulus (e.g. real k): "
            "no minimal solution to select; use a genuinely complex modulus"
        )
    h0 = complex(h_seed)
    h1 = h0 + 1e-4 * max(1.0, abs(h0))
    g0, g1 = _fraction(p, h0), _fraction(p, h1)
    trace = [abs(g0), abs(g1)]
    it = 0
    while abs(g1) > tol and it < max_iter:
        if g1 == g0:
            break
        h0, h1 = h1, h1 - g1 * (h1 - h0) / (g1 - g0)
        g0, g1 = g1, _fraction(p, h1)
        trace.append(abs(g1))
        it += 1
    if abs(g1) > max(tol, 1e-10):
        raise NonConvergenceError(f"secant iteration stalled at |fraction|={abs(g1):.3g}", trace=trace)
    rec = hypergeom_series_recurrence(p, h1)
    sep = abs(roots.t1 / roots.t2)
    extra = int(math.ceil(math.log(1e-17) / math.log(sep))) + 50
    ratios = rr.backward_ratios(rec, N, extra=extra)
    lc = np.zeros(N + 1, dtype=complex)
    with np.errstate(divide="ignore"):  # an exactly terminating recurrence gives a zero ratio
        lc[1:] = np.cumsum(np.log(ratios))
    perron = rr.perron_classify(rec, ratios, ratios=True)
    if perron.label is not rr.PerronClass.MINIMAL:
        raise ConsistencyError(f"backward coefficients not classified Minimal: {perron}")
    series = DarbouxSeries(SeriesKind.HYPERGEOM, p, h1, lc)
    return DarbouxFunction(h1, abs(g1), it, series, perron, tuple(trace))


# ---------------------------------------------------------------------------
# Ratio diagnostics


@dataclass(frozen=True)
class RatioRow:
    m: int
    coeff_ratio: float  # |X_{m+1}/X_m|
    perron_prediction: float  # |t2| (forward run) or |t1| (minimal)
    term_ratio: complex  # phi_{m+1}/phi_m
    watson_prediction: complex  # (1 - s)/(1 + s)


def ratio_diagnostics(
    p: DarbouxParams,
    h: complex,
    u: complex,
    *,
    m_max: int = 500,
    series: Optional[DarbouxSeries] = None,
) -> list[RatioRow]:
    """Empirical coefficient and basis-term ratios against their predictions.

    ``phi_m = G_m x^m F(a+m, b+m; c+2m; x)`` is one basis term; its ratio
    tends to ``(1 - cn u)/(1 + cn u)`` (principal-root form, see
    :func:`ratio_coordinate`).  Coefficients come from a forward run at
    ``h`` unless ``series`` (e.g. a Darboux function) is supplied, in which
    case the Perron prediction is ``|t1|``.
    """
    roots = rr.characteristic_roots(hypergeom_series_recurrence(p, h))
    if series is None:
        lc = rr.forward_run_log(hypergeom_series_recurrence(p, h), m_max + 1)
        pred = abs(roots.t2)
    else:
        if series.N < m_max + 1:
            raise ParameterError("series has too few coefficients for m_max")
        lc = series.log_coeffs[: m_max + 2]
        pred = abs(roots.t1)
    s, _, _ = jacobi_sn_cn_dn(u, p.k)
    x = s * s
    base = hypergeom_basis(p)
    lf = diagonal_ladder_logs(base, x, m_max + 1)
    lg = log_G(p, m_max + 1)
    lphi = lg + np.arange(m_max + 2) * cmath.log(x) + lf
    watson = ratio_coordinate(u, p.k)
    rows = []
    for m in range(m_max + 1):
        rows.append(
            RatioRow(
                m,
                float(np.exp((lc[m + 1] - lc[m]).real)),
                pred,
                complex(np.exp(lphi[m + 1] - lphi[m])),
                watson,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Sign flips and the symmetry scan


@dataclass(frozen=True)
class SignFlipVariant:
    signs: tuple[str, str, str]
    params: Optional[DarbouxParams]
    usable: bool
    reason: str = ""


def _flip(t: complex, s: str) -> complex:
    return t if s == "+" else -t - 1


def sign_flip_variants(p: DarbouxParams) -> list[SignFlipVariant]:
    """The 8 choices ``theta -> theta`` or ``-theta-1`` for ``xi, eta, mu``.

    Each leaves ``theta(theta+1)`` (hence the equation) unchanged but
    selects a different local exponent.  A variant whose ``xi`` lands on an
    excluded value is returned with ``usable=False``.
    """
    out = []
    for signs in itertools.product("+-", repeat=3):
        xi, eta, mu = (_flip(t, s) for t, s in zip((p.xi, p.eta, p.mu), signs))
        try:
            q = DarbouxParams(xi, eta, mu, p.nu, p.k)
            out.append(SignFlipVariant(signs, q, True))
        except ParameterError as exc:
            out.append(SignFlipVariant(signs, None, False, str(exc)))
    return out


def _in_2z(z: complex, exclude: Sequence[int] = ()) -> bool:
    n = _near_int(z)
    return n is not None and n % 2 == 0 and n not in exclude


def _in_2z1(z: complex, exclude: Sequence[int] = ()) -> bool:
    n = _near_int(z)
    return n is not None and n % 2 == 1 and n not in exclude


def _half_odd(z: complex, exclude_half: bool = True) -> bool:
    n = _near_int(2 * complex(z))
    return n is not None and n % 2 == 1 and not (exclude_half and n == -1)


@dataclass(frozen=True)
class SymmetryCondition:
    label: str  # "i".."iv"
    holds: bool
    witnesses: tuple[str, ...]


@dataclass(frozen=True)
class Terminate1Report:
    conditions: tuple[SymmetryCondition, ...]
    realized: tuple[tuple[tuple[str, str, str], TerminationReport], ...]
    needs_external_symmetry: bool
    note: str

    @property
    def any_condition(self) -> bool:
        return any(c.holds for c in self.conditions)


def signed_sum(thetas: Sequence[complex], signs: str) -> complex:
    """``w_{signs}`` for a bare 4-tuple ``(xi, eta, mu, nu)``."""
    w = {"+": 1, "-": -1, "0": 0}
    return sum(w[s] * complex(t) for s, t in zip(signs, thetas))


def symmetry_conditions(p) -> tuple[SymmetryCondition, ...]:
    """The four lattice conditions under which some symmetric image terminates.

    (i)   ``w_{++++}`` in ``2Z \\ {-2}``
    (ii)  one of ``w_{+++-}, w_{++-+}, w_{+-++}, w_{-+++}`` in ``(2Z+1) \\ {-1}``
    (iii) one of ``w_{++--}, w_{+--+}, w_{+-+-}`` in ``2Z \\ {0}``
    (iv)  one of ``xi, eta, mu, nu`` in ``(2Z+1)/2 \\ {-1/2}``

    ``p`` may be a :class:`DarbouxParams` or a bare ``(xi, eta, mu, nu)``
    tuple (useful for excluded ``xi`` values, which cannot form params).
    """
    thetas = p.thetas if isinstance(p, DarbouxParams) else tuple(complex(t) for t in p)

    def s(pat):
        return signed_sum(thetas, pat)

    c1 = [pat for pat in ("++++",) if _in_2z(s(pat), (-2,))]
    c2 = [pat for pat in ("+++-", "++-+", "+-++", "-+++") if _in_2z1(s(pat), (-1,))]
    c3 = [pat for pat in ("++--", "+--+", "+-+-") if _in_2z(s(pat), (0,))]
    names = ("xi", "eta", "mu", "nu")
    c4 = [n for n, t in zip(names, thetas) if _half_odd(t)]
    return (
        SymmetryCondition("i", bool(c1), tuple(c1)),
        SymmetryCondition("ii", bool(c2), tuple(c2)),
        SymmetryCondition("iii", bool(c3), tuple(c3)),
        SymmetryCondition("iv", bool(c4), tuple(c4)),
    )


def terminate1_scan(p: DarbouxParams) -> Terminate1Report:
    """Check the four symmetry conditions and realise them by sign flips.

    Only the 8 sign flips of ``xi, eta, mu`` are implemented.  When a
    condition holds but no flip makes :func:`termination_check` fire, the
    report says that one of the (not implemented) modular or half-period
    translation symmetries would be required.
    """
    conds = symmetry_conditions(p)
    realized = []
    for var in sign_flip_variants(p):
        if not var.usable:
            continue
        rep = termination_check(var.params)
        if rep.terminates:
            realized.append((var.signs, rep))
    holds = any(c.holds for c in conds)
    needs = holds and not realized
    if needs:
        note = "condition holds but no sign flip terminates: requires out-of-scope symmetry"
    elif realized:
        note = "realized by sign flip"
    else:
        note = "no condition holds"
    return Terminate1Report(conds, tuple(realized), needs, note)
