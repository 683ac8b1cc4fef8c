"""Jacobi and Weierstrass elliptic functions for complex arguments.

Jacobi functions use the modulus ``k`` (not the parameter ``m = k**2``);
``k'`` is always the principal square root of ``1 - k**2``.  Weierstrass
functions live on the lattice generated by ``1`` and ``tau``; theta
functions are normalised so that ``theta_1(z + 1) = -theta_1(z)``, i.e. they
are the classical ``vartheta_j(pi z | tau)``.

The two coordinate systems are linked by :func:`jacobi_to_weierstrass`:
``u = 2K z`` with ``tau = 1 + i K'/K``.  With that choice the four
order-two points ``0, 1/2, tau/2, (1+tau)/2`` land on ``0, K, K + iK', iK'``
respectively, matching the slots of the xi, eta, mu and nu terms in both
forms of the Darboux equation.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConditioningWarning, DomainError, ParameterError

LANDEN_CUTOFF = 1e-16
POLE_THRESHOLD = 1e10
_MAX_AGM_STEPS = 100


def _check_modulus(k: complex) -> None:
    kp = cmath.sqrt(1 - k * k)
    if min(abs(k), abs(1 - abs(k)), abs(kp), abs(1 - abs(kp))) < 1e-3:
        warnings.warn(
            f"modulus k={k!r} (k'={kp!r}) is within 1e-3 of 0 or 1; "
            "results may be ill-conditioned",
            ConditioningWarning,
            stacklevel=3,
        )


def complete_elliptic_K(k: complex) -> complex:
    """Complete elliptic integral of the first kind, ``K(k)``.

    Computed as ``pi / (2 AGM(1, k'))`` with the "right" choice of square
    root at every AGM step, which reproduces the principal branch.

    Raises
    ------
    DomainError
        If ``k**2 == 1`` (logarithmic singularity).
    """
    k = complex(k)
    if abs(k * k - 1) < 1e-15:
        raise DomainError("K(k) diverges at k**2 = 1")
    a = 1 + 0j
    b = cmath.sqrt(1 - k * k)
    for _ in range(_MAX_AGM_STEPS):
        done = abs(a - b) <= 1e-14 * abs(a)
        a, b = (a + b) / 2, cmath.sqrt(a * b)
        if abs(a - b) > abs(a + b):
            b = -b
        if done:
            # convergence is quadratic: one extra step after 1e-14 hits eps
            break
    else:  # pragma: no cover - AGM converges quadratically
        raise DomainError(f"AGM failed to converge for k={k!r}")
    return math.pi / (2 * a)


@dataclass(frozen=True)
class Modulus:
    """Elliptic modulus with its complement and quarter periods."""

    k: complex
    k_prime: complex
    K: complex
    K_prime: complex

    @classmethod
    def from_k(cls, k: complex) -> "Modulus":
        k = complex(k)
        _check_modulus(k)
        kp = cmath.sqrt(1 - k * k)
        return cls(k, kp, complete_elliptic_K(k), complete_elliptic_K(kp))


def _descending_moduli(k: complex) -> list[complex]:
    ks = [complex(k)]
    while abs(ks[-1]) > LANDEN_CUTOFF and len(ks) < 64:
        kk = ks[-1]
        kp = cmath.sqrt(1 - kk * kk)
        if abs(1 + kp) == 0:
            raise DomainError(f"Landen step undefined for k={kk!r}")
        ks.append(kk * kk / (1 + kp) ** 2)
    return ks


def jacobi_sn_cn_dn(u, k: complex, *, pole_flag: bool = False):
    """Jacobi ``sn``, ``cn``, ``dn`` of complex argument and modulus.

    Uses the descending Landen (Gauss) transformation down to a modulus
    below ``LANDEN_CUTOFF`` and the small-modulus expansions there, then the
    ascending rational recursion back up.  Works elementwise on arrays.

    Parameters
    ----------
    u : complex or array_like
        Argument.
    k : complex
        Modulus; ``k'`` is the principal root of ``1 - k**2``.
    pole_flag : bool
        If true, also return a boolean array marking points where ``|sn|``
        exceeds ``POLE_THRESHOLD`` (i.e. ``u`` is numerically at a pole).

    Returns
    -------
    (sn, cn, dn) or (sn, cn, dn, near_pole)
    """
    k = complex(k)
    if abs(k * k - 1) < 1e-15:
        raise DomainError("Landen descent does not converge at k**2 = 1")
    _check_modulus(k)
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=complex)
    ks = _descending_moduli(k)
    scale = 1.0 + 0j
    for kn in ks[1:]:
        scale *= 1 + kn
    v = u / scale
    m = ks[-1] ** 2
    with np.errstate(over="ignore", invalid="ignore"):
        sv, cv = np.sin(v), np.cos(v)
        corr = 0.25 * m * (v - sv * cv)
        s = sv - corr * cv
        c = cv + corr * sv
        d = 1 - 0.5 * m * sv * sv
        for kn in reversed(ks[1:]):
            s2 = s * s
            denom = 1 + kn * s2
            s, c, d = (1 + kn) * s / denom, c * d / denom, (1 - kn * s2) / denom
    if scalar:
        s, c, d = complex(s), complex(c), complex(d)
    if pole_flag:
        flag = ~np.isfinite(s) | (np.abs(s) > POLE_THRESHOLD)
        return s, c, d, (bool(flag) if scalar else flag)
    return s, c, d


# ---------------------------------------------------------------------------
# Theta and Weierstrass functions on the lattice Z + tau Z


def _theta1_derivs(v: np.ndarray, q: complex, nmax: int) -> list[np.ndarray]:
    """theta_1 and its first three v-derivatives at ``v`` (period 2 pi)."""
    out = [np.zeros_like(v) for _ in range(4)]
    for n in range(nmax):
        w = 2 * n + 1
        coef = 2 * (-1) ** n * q ** ((n + 0.5) ** 2)
        sw, cw = np.sin(w * v), np.cos(w * v)
        out[0] += coef * sw
        out[1] += coef * w * cw
        out[2] -= coef * w * w * sw
        out[3] -= coef * w**3 * cw
    return out


def _nterms(q: complex, im_v: float) -> int:
    """Number of q-series terms for 1e-18 relative truncation at |Im v|<=im_v."""
    aq = abs(q)
    if aq >= 1:
        raise DomainError("theta series needs Im(tau) > 0")
    logq = math.log(aq)
    n = 1
    while n < 2000:
        # size of term n relative to the leading term
        rel = (n * n + n) * logq + 2 * n * im_v
        if rel < math.log(1e-18) and n > 2:
            return n + 1
        n += 1
    raise DomainError("theta series does not converge to working precision")


@dataclass(frozen=True)
class LatticeTau:
    """Period ratio ``tau`` (Im tau > 0) of the lattice ``Z + tau Z``.

    Lattice constants (``eta1 = zeta(1/2)``, ``eta3 = zeta(tau/2)``,
    ``theta_1'(0)``) are computed once at construction and never mutated.
    """

    tau: complex
    q: complex = field(init=False, repr=False)
    eta1: complex = field(init=False, repr=False)
    eta3: complex = field(init=False, repr=False)
    dtheta1_0: complex = field(init=False, repr=False)

    def __post_init__(self):
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise ParameterError(f"tau must lie in the upper half plane, got {tau!r}")
        if tau.imag < 0.05:
            warnings.warn(
                f"Im(tau)={tau.imag:.3g} < 0.05: theta series converge slowly",
                ConditioningWarning,
                stacklevel=3,
            )
        object.__setattr__(self, "tau", tau)
        q = cmath.exp(1j * math.pi * tau)
        object.__setattr__(self, "q", q)
        n = _nterms(q, 0.0)
        d = _theta1_derivs(np.zeros(1, dtype=complex), q, n)
        t1, t3 = complex(d[1][0]), complex(d[3][0])
        eta1 = -(math.pi**2 / 6) * t3 / t1
        object.__setattr__(self, "dtheta1_0", t1)
        object.__setattr__(self, "eta1", eta1)
        object.__setattr__(self, "eta3", eta1 * tau - 1j * math.pi)

    @property
    def half_periods(self) -> tuple[complex, complex, complex, complex]:
        """The four points of order two: ``0, 1/2, tau/2, (1+tau)/2``."""
        t = self.tau
        return (0j, 0.5 + 0j, t / 2, (1 + t) / 2)

    def reduce(self, z):
        """Split ``z = z0 + m + n tau`` with ``z0`` in the centred cell."""
        z = np.asarray(z, dtype=complex)
        n = np.round(z.imag / self.tau.imag)
        w = z - n * self.tau
        m = np.round(w.real)
        return w - m, m, n


def as_lattice(tau) -> LatticeTau:
    return tau if isinstance(tau, LatticeTau) else LatticeTau(complex(tau))


def theta_functions(z, tau):
    """``(theta_1, theta_2, theta_3, theta_4)`` at ``pi z`` with nome ``e^{i pi tau}``.

    Plain q-series, truncated once terms drop below ``1e-18`` of the
    leading term; no lattice reduction is applied to ``z``.
    """
    lat = as_lattice(tau)
    scalar = np.ndim(z) == 0
    v = np.pi * np.asarray(z, dtype=complex)
    q = lat.q
    nmax = _nterms(q, float(np.max(np.abs(v.imag))) if v.size else 0.0)
    th1 = np.zeros_like(v)
    th2 = np.zeros_like(v)
    th3 = np.ones_like(v)
    th4 = np.ones_like(v)
    for n in range(nmax):
        qh = q ** ((n + 0.5) ** 2)
        th1 += 2 * (-1) ** n * qh * np.sin((2 * n + 1) * v)
        th2 += 2 * qh * np.cos((2 * n + 1) * v)
        if n >= 1:
            qn = q ** (n * n)
            th3 += 2 * qn * np.cos(2 * n * v)
            th4 += 2 * (-1) ** n * qn * np.cos(2 * n * v)
    out = (th1, th2, th3, th4)
    if scalar:
        return tuple(complex(t) for t in out)
    return out


def theta_log_derivatives(z, tau):
    """``d/dz log theta_j(pi z)`` for ``j = 1, 2, 3, 4`` (same series as :func:`theta_functions`)."""
    lat = as_lattice(tau)
    scalar = np.ndim(z) == 0
    v = np.pi * np.asarray(z, dtype=complex)
    q = lat.q
    nmax = _nterms(q, float(np.max(np.abs(v.imag))) if v.size else 0.0)
    th = [np.zeros_like(v), np.zeros_like(v), np.ones_like(v), np.ones_like(v)]
    dth = [np.zeros_like(v) for _ in range(4)]
    for n in range(nmax):
        qh = q ** ((n + 0.5) ** 2)
        w = 2 * n + 1
        sgn = (-1) ** n
        th[0] += 2 * sgn * qh * np.sin(w * v)
        dth[0] += 2 * sgn * qh * w * np.cos(w * v)
        th[1] += 2 * qh * np.cos(w * v)
        dth[1] -= 2 * qh * w * np.sin(w * v)
        if n >= 1:
            qn = q ** (n * n)
            th[2] += 2 * qn * np.cos(2 * n * v)
            dth[2] -= 4 * n * qn * np.sin(2 * n * v)
            th[3] += 2 * sgn * qn * np.cos(2 * n * v)
            dth[3] -= 4 * n * sgn * qn * np.sin(2 * n * v)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = tuple(np.pi * d / t for d, t in zip(dth, th))
    if scalar:
        return tuple(complex(t) for t in out)
    return out


class WeierstrassValues(NamedTuple):
    wp: complex
    wp_prime: complex
    zeta: complex
    sigma: complex
    at_lattice_point: bool


def weierstrass_family(z, tau) -> WeierstrassValues:
    """``(wp, wp', zeta, sigma)`` for the lattice ``Z + tau Z``.

    Evaluated from theta-function log-derivatives after reducing ``z`` to
    the centred fundamental cell; ``zeta`` and ``sigma`` are then carried
    back with their quasi-periodicity laws.  At lattice points ``wp``,
    ``wp'`` and ``zeta`` are returned as ``inf`` and the flag is set.
    """
    lat = as_lattice(tau)
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    z0, m, n = lat.reduce(z)
    v = np.pi * z0
    nmax = _nterms(lat.q, float(np.max(np.abs(v.imag))) if v.size else 0.0)
    t0, t1, t2, t3 = _theta1_derivs(v, lat.q, nmax)
    at_pt = np.abs(z0) < 1e-13
    eta1, eta3 = lat.eta1, lat.eta3
    pi = math.pi
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        l1, l2, l3 = t1 / t0, t2 / t0, t3 / t0
        zeta0 = 2 * eta1 * z0 + pi * l1
        wp = -2 * eta1 - pi**2 * (l2 - l1 * l1)
        dwp = -(pi**3) * (l3 - 3 * l2 * l1 + 2 * l1**3)
        sigma0 = np.exp(eta1 * z0 * z0) * t0 / (pi * lat.dtheta1_0)
        eta_lam = 2 * m * eta1 + 2 * n * eta3
        lam = m + n * lat.tau
        zeta = zeta0 + eta_lam
        sign = np.where(((m + n + m * n) % 2) == 0, 1.0, -1.0)
        sigma = sign * np.exp(eta_lam * (z0 + lam / 2)) * sigma0
    inf = complex(np.inf, 0)
    wp = np.where(at_pt, inf, wp)
    dwp = np.where(at_pt, inf, dwp)
    zeta = np.where(at_pt, inf, zeta)
    sigma = np.where(at_pt & (m == 0) & (n == 0), 0j, sigma)
    if scalar:
        return WeierstrassValues(complex(wp), complex(dwp), complex(zeta), complex(sigma), bool(at_pt))
    return WeierstrassValues(wp, dwp, zeta, sigma, at_pt)


def wp(z, tau):
    return weierstrass_family(z, tau).wp


def wp_prime(z, tau):
    return weierstrass_family(z, tau).wp_prime


def wzeta(z, tau):
    return weierstrass_family(z, tau).zeta


def half_period_values(tau) -> tuple[complex, complex, complex]:
    """``(e1, e2, e3) = (wp(1/2), wp((1+tau)/2), wp(tau/2))``."""
    lat = as_lattice(tau)
    e1 = wp(0.5, lat)
    e2 = wp((1 + lat.tau) / 2, lat)
    e3 = wp(lat.tau / 2, lat)
    return e1, e2, e3


def lambda_invariant(tau) -> complex:
    """Legendre's lambda: ``k**2 = (e2 - e3)/(e1 - e3)``.

    Here ``e1 = wp(1/2)``, ``e2 = wp((1+tau)/2)``, ``e3 = wp(tau/2)``; this is
    the ordering that equals ``theta_2(0)**4 / theta_3(0)**4`` and gives
    ``1/2`` on the square lattice.  The alternative cross-ratio
    ``(e2 - e1)/(e2 - e3)`` is the anharmonic image ``1 - 1/lambda``; see
    :func:`cross_ratio_e2_first`.
    """
    e1, e2, e3 = half_period_values(tau)
    return (e2 - e3) / (e1 - e3)


def cross_ratio_e2_first(tau) -> complex:
    """``(wp((1+tau)/2) - wp(1/2)) / (wp((1+tau)/2) - wp(tau/2))``."""
    e1, e2, e3 = half_period_values(tau)
    return (e2 - e1) / (e2 - e3)


def theta_lambda(tau) -> complex:
    """``theta_2(0)**4 / theta_3(0)**4`` (independent route to lambda)."""
    _, t2, t3, _ = theta_functions(0.0, tau)
    return t2**4 / t3**4


@dataclass(frozen=True)
class CoordinateMap:
    """Link between Jacobi (``u``) and Weierstrass (``z``) coordinates.

    ``u = scale * z`` with ``scale = 2K``; the Weierstrass lattice is
    ``Z + tau Z`` with ``tau = 1 + i K'/K``.  The shift by 1 puts ``tau/2``
    on ``K + iK'``; as a consequence :func:`lambda_invariant` of this
    lattice is ``k**2 / (k**2 - 1)``, the image of ``k**2`` under
    ``tau -> tau + 1``.  ``e_nu`` is ``wp`` at the
    half period that corresponds to ``u = iK'``.
    """

    modulus: Modulus
    lattice: LatticeTau
    scale: complex
    e_nu: complex

    def to_z(self, u):
        return np.asarray(u, dtype=complex) / self.scale

    def to_u(self, z):
        return np.asarray(z, dtype=complex) * self.scale


def jacobi_to_weierstrass(k: complex) -> CoordinateMap:
    """Coordinate map for modulus ``k`` (see module docstring).

    Under it ``1/sn(u)**2 = (wp(z) - e_nu)/(2K)**2`` and likewise for the
    other three Jacobi potential terms, so the Jacobi potential equals the
    Weierstrass one divided by ``(2K)**2`` minus a constant.
    """
    mod = Modulus.from_k(k)
    tau = 1 + 1j * mod.K_prime / mod.K
    lat = LatticeTau(tau)
    e_nu = wp((1 + lat.tau) / 2, lat)
    return CoordinateMap(mod, lat, 2 * mod.K, e_nu)
