"""Independent re-derivation of both coefficient recurrences.

Power series
    Each term ``y_m = sn^{xi+1+2m} cn^{eta+1} dn^{mu+1}`` satisfies
    ``y_m'' + (h - V) y_m = y_m E_m(x) / x`` with ``x = sn^2`` and ``E_m`` a
    quadratic polynomial ``e0(m) + e1(m) x + e2(m) x^2``.
    Collecting powers of ``x`` in ``sum C_m y_m`` gives
    ``e0(n+1) C_{n+1} + e1(n) C_n + e2(n-1) C_{n-1} = 0``.  The derivation is
    done symbolically with sympy, with ``sn, cn, dn`` treated as independent
    symbols differentiated by ``sn' = cn dn``, ``cn' = -sn dn``,
    ``dn' = -k^2 sn cn``.

Hypergeometric basis
    The power-series coefficients at the ODE's ``h`` are re-expanded, in
    multiple precision, into the basis ``G_m x^m F(a+m, b+m; c+2m; x)`` by
    triangular solve.  Substituting the resulting ``X_m`` into the implemented
    relation and solving each equation for ``h`` exposes the offset between
    the implemented and the ODE accessory parameter, separately for every ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .darboux import (
    DarbouxParams,
    SigmaSums,
    hypergeom_K,
    hypergeom_L,
    hypergeom_M,
    power_series_coefficients,
)


@lru_cache(maxsize=1)
def symbolic_power_series_recurrence():
    """``(R(n), S(n), P(n))`` derived from the ODE, as sympy expressions.

    Returns the tuple ``(symbols, R, S, P)`` where ``symbols`` is a dict with
    keys ``n, xi, eta, mu, nu, k, h`` and ``h`` is the ODE parameter.
    """
    import sympy as sp

    s, c, d, x = sp.symbols("s c d x")
    n, xi, eta, mu, nu, k, h = sp.symbols("n xi eta mu nu k h")
    m = sp.Symbol("m")

    def der(e):
        return sp.diff(e, s) * c * d - sp.diff(e, c) * s * d - sp.diff(e, d) * k**2 * s * c

    A = xi + 1 + 2 * m
    logder = A * c * d / s - (eta + 1) * s * d / c - (mu + 1) * k**2 * s * c / d
    ratio = logder**2 + der(logder)  # y_m'' / y_m
    V = xi * (xi + 1) / s**2 + eta * (eta + 1) * d**2 / c**2 + mu * (mu + 1) * k**2 * c**2 / d**2 + nu * (nu + 1) * k**2 * s**2
    E = sp.expand((ratio + h - V) * s**2 * c**2 * d**2)
    # only even powers of c and d survive; eliminate them
    E = sp.expand(E.subs({c: sp.sqrt(1 - s**2), d: sp.sqrt(1 - k**2 * s**2)}))
    E = sp.expand(E.subs(s, sp.sqrt(x)))
    # the cn/dn exponents are exact, so (1-x)(1-k^2 x) divides out
    quo, rem = sp.div(sp.Poly(E, x), sp.Poly((1 - x) * (1 - k**2 * x), x))
    if not rem.is_zero:
        raise AssertionError("prefactor exponents at cn = 0 or dn = 0 are not exact")
    coeffs = quo.all_coeffs()[::-1]
    if len(coeffs) > 3:
        raise AssertionError("E_m is not quadratic in x")
    e0, e1, e2 = (sp.expand(coeffs[i]) if i < len(coeffs) else sp.Integer(0) for i in range(3))
    R = sp.expand(e0.subs(m, n + 1))
    S = sp.expand(e1.subs(m, n))
    P = sp.expand(e2.subs(m, n - 1))
    syms = dict(n=n, xi=xi, eta=eta, mu=mu, nu=nu, k=k, h=h)
    return syms, R, S, P


@dataclass(frozen=True)
class PowerSeriesDerivation:
    """Derived-vs-implemented comparison for ``m = 0..m_max``."""

    scale: complex  # derived = scale * implemented
    offsets: np.ndarray  # h_ODE - h_rec, one per m
    max_rel_mismatch_R: float
    max_rel_mismatch_P: float

    @property
    def offset(self) -> complex:
        return complex(self.offsets[0])

    @property
    def offset_spread(self) -> float:
        return float(np.max(np.abs(self.offsets - self.offsets[0])))


def derive_power_series(p: DarbouxParams, h: complex, m_max: int = 50) -> PowerSeriesDerivation:
    """Compare the derived power-series recurrence with the implemented one.

    For each ``m`` the implemented ``S_m`` (with ``h_rec = 0``) is matched with
    the derived ``S_m`` after removing the common scale; the difference is
    the h-offset.
    """
    import mpmath as mp
    import sympy as sp

    syms, R, S, P = symbolic_power_series_recurrence()

    with mp.workdps(40):
        pm = _MpParams.of(p)
        subs = {syms[name]: getattr(pm, name) for name in ("xi", "eta", "mu", "nu", "k")}
        subs[syms["h"]] = _mp(h)
        fR, fS, fP = (sp.lambdify(syms["n"], e.subs(subs), "mpmath") for e in (R, S, P))
        Rd = [fR(j) for j in range(m_max + 1)]
        Sd = [fS(j) for j in range(m_max + 1)]
        Pd = [fP(j) for j in range(m_max + 1)]
        implemented = [power_series_coefficients(pm, 0, j) for j in range(m_max + 1)]
        scale = Rd[0] / implemented[0][0]
        relR = max(abs(Rd[j] - scale * implemented[j][0]) / abs(Rd[j]) for j in range(m_max + 1))
        # P_0 multiplies C_{-1} = 0, so only m >= 1 is compared
        relP = max(
            abs(Pd[j] - scale * implemented[j][2]) / max(1, abs(Pd[j])) for j in range(1, m_max + 1)
        )
        # derived S = scale * (h_rec + implemented S at h_rec = 0)
        offsets = [complex(_mp(h) - (Sd[j] / scale - implemented[j][1])) for j in range(m_max + 1)]
    return PowerSeriesDerivation(complex(scale), np.asarray(offsets), float(relR), float(relP))


@dataclass(frozen=True)
class HypergeomDerivation:
    offsets: np.ndarray  # h_ODE - h_impl, per m
    X: np.ndarray

    @property
    def offset(self) -> complex:
        return complex(self.offsets[0])

    @property
    def offset_spread(self) -> float:
        return float(np.max(np.abs(self.offsets - self.offsets[0])))


def derive_hypergeom(p: DarbouxParams, h: complex, m_max: int = 50, dps: int = 80) -> HypergeomDerivation:
    """Re-expand the ODE power series into the hypergeometric basis.

    Works in ``dps`` decimal digits; the triangular solve loses digits
    geometrically, so ``dps`` must grow with ``m_max``.
    """
    import mpmath as mp
    import sympy as sp

    with mp.workdps(dps):
        pm = _MpParams.of(p)
        xi, eta, mu, nu = pm.thetas
        hh = mp.mpc(complex(h).real, complex(h).imag)
        N = m_max + 2
        # power series at the ODE parameter, from the symbolically derived relation
        syms, Rs, Ss, Ps = symbolic_power_series_recurrence()
        subs = {syms[name]: getattr(pm, name) for name in ("xi", "eta", "mu", "nu", "k")}
        subs[syms["h"]] = hh
        fR, fS, fP = (sp.lambdify(syms["n"], e.subs(subs), "mpmath") for e in (Rs, Ss, Ps))
        C = [mp.mpc(1)]
        for n in range(N):
            prev = C[n - 1] if n else 0
            C.append(-(fS(n) * C[n] + fP(n) * prev) / fR(n))
        a = (xi + eta + mu + nu + 4) / 2
        b = (xi + eta + mu - nu + 3) / 2
        c = xi + mu + 3

        def G(m):
            return mp.gamma(c - b + m) * mp.gamma(c - a + m) / mp.gamma(c + 2 * m)

        def Fc(m, j):
            return mp.rf(a + m, j) * mp.rf(b + m, j) / (mp.rf(c + 2 * m, j) * mp.factorial(j))

        Gs = [G(m) for m in range(N + 1)]
        X = []
        for n in range(N + 1):
            rest = C[n] - sum(X[m] * Gs[m] * Fc(m, n - m) for m in range(n))
            X.append(rest / Gs[n])
        Xc = [complex(v) for v in X]
        offsets = []
        for m in range(m_max + 1):
            # K X_{m-1} + (L(0) + h_impl) X_m + M X_{m+1} = 0, all in mp
            Km = hypergeom_K(pm, m)
            Mm = hypergeom_M(pm, m)
            L0 = hypergeom_L(pm, 0, m)
            prev = X[m - 1] if m else 0
            h_impl = -(Km * prev + Mm * X[m + 1]) / X[m] - L0
            offsets.append(complex(hh - h_impl))
    return HypergeomDerivation(np.asarray(offsets), np.asarray(Xc))


def _mp(z: complex):
    import mpmath as mp

    return mp.mpc(complex(z).real, complex(z).imag)


@dataclass(frozen=True)
class _MpParams:
    """Duck-typed stand-in for :class:`DarbouxParams` holding mpmath numbers.

    Lets the implemented coefficient formulas be evaluated in multiple precision
    by the very same code that evaluates them in double precision.
    """

    xi: object
    eta: object
    mu: object
    nu: object
    k: object

    @classmethod
    def of(cls, p: DarbouxParams) -> "_MpParams":
        return cls(*(_mp(v) for v in (p.xi, p.eta, p.mu, p.nu, p.k)))

    @property
    def thetas(self):
        return (self.xi, self.eta, self.mu, self.nu)

    @property
    def sums(self) -> SigmaSums:
        return SigmaSums(self)
