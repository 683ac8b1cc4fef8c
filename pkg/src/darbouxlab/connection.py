"""The Darboux equation as a 2x2 Fuchsian system on the torus.

A connection is given by four traceless matrices ``A_0..A_3`` summing to
zero, placed at the points of order two ``0, 1/2, tau/2, (1+tau)/2`` of the
lattice ``Z + tau Z``:

    Omega(z) = A_0 zeta(z) + A_1 zeta(z + 1/2) + A_2 zeta(z + tau/2)
               + A_3 zeta(z + (1+tau)/2).

The first component ``y_1`` of a solution of ``Y' = Omega Y`` satisfies

    y_1'' + p y_1' + q y_1 = 0,
    p = -a11 - a22 - a12'/a12,
    q = a11 a22 - a12 a21 - a12 (a11/a12)',

whose normal form ``w'' + Q w = 0``, ``Q = q - p^2/4 - p'/2``, is a Darboux
equation in Weierstrass form plus apparent singularities at the zeros of
``a12``.
"""

from __future__ import annotations

import cmath
import itertools
import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .darboux import DarbouxParams
from .elliptic import LatticeTau, as_lattice, theta_log_derivatives, weierstrass_family
from .errors import (
    ConditioningWarning,
    ContractError,
    DegenerateError,
    ParameterError,
)

TRACE_TOL = 1e-14
SUM_TOL = 1e-13
CAUCHY_RADIUS = 1e-2
CAUCHY_NODES = 64
CONDITION_TOL = 1e-10
FIT_WARN = 1e-6

Matrix = np.ndarray


def _as_matrix(m) -> Matrix:
    a = np.asarray(m, dtype=complex)
    if a.shape != (2, 2):
        raise ContractError(f"expected a 2x2 matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class TracelessMatrix2:
    """A 2x2 complex matrix with zero trace."""

    m: Matrix

    def __post_init__(self):
        a = _as_matrix(self.m).copy()
        if abs(a[0, 0] + a[1, 1]) > TRACE_TOL * max(1.0, float(np.max(np.abs(a)))):
            raise ParameterError(f"matrix is not traceless (trace {a[0, 0] + a[1, 1]!r})")
        a.setflags(write=False)
        object.__setattr__(self, "m", a)

    @classmethod
    def with_eigenvalue(cls, half_a: complex, rng: np.random.Generator) -> "TracelessMatrix2":
        """Random traceless matrix with eigenvalues ``+-half_a``."""
        S = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        return cls(S @ np.diag([half_a, -half_a]) @ np.linalg.inv(S))

    @property
    def eigen_half(self) -> complex:
        """``a/2`` with eigenvalues ``+-a/2`` (principal root of ``-det``)."""
        return cmath.sqrt(-np.linalg.det(self.m))


@dataclass(frozen=True, eq=False)
class SystemConnection:
    """Residue matrices ``A_0..A_3`` at ``0, 1/2, tau/2, (1+tau)/2`` and the lattice."""

    A: tuple[TracelessMatrix2, TracelessMatrix2, TracelessMatrix2, TracelessMatrix2]
    tau: LatticeTau
    check_sum: bool = True

    def __post_init__(self):
        mats = tuple(a if isinstance(a, TracelessMatrix2) else TracelessMatrix2(a) for a in self.A)
        if len(mats) != 4:
            raise ContractError("a connection needs exactly four residue matrices")
        object.__setattr__(self, "A", mats)
        object.__setattr__(self, "tau", as_lattice(self.tau))
        if self.check_sum and self.sum_defect > SUM_TOL * max(1.0, max(np.max(np.abs(a.m)) for a in mats)):
            raise ParameterError(f"residues do not sum to zero (defect {self.sum_defect:.3g})")

    @property
    def matrices(self) -> list[Matrix]:
        return [a.m for a in self.A]

    @property
    def total(self) -> Matrix:
        return sum(self.matrices)

    @property
    def sum_defect(self) -> float:
        return float(np.max(np.abs(self.total)))

    @property
    def singular_points(self) -> tuple[complex, ...]:
        return self.tau.half_periods

    @classmethod
    def random(cls, tau, rng: np.random.Generator, half_a: Optional[Sequence[complex]] = None) -> "SystemConnection":
        """Random residues summing to zero.

        Without ``half_a`` the first three are random and ``A_3`` closes the
        sum.  With ``half_a`` the four eigenvalue magnitudes are prescribed;
        the closing condition is then solved numerically (see
        :func:`connection_with_eigenvalues`).
        """
        if half_a is not None:
            return connection_with_eigenvalues(half_a, tau, rng)
        mats = []
        for _ in range(3):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            a -= np.trace(a) / 2 * np.eye(2)
            mats.append(a)
        mats.append(-sum(mats))
        return cls(tuple(mats), as_lattice(tau))

    def conjugated(self, S: Matrix) -> "SystemConnection":
        """``S A_j S^{-1}`` for all ``j`` (a constant gauge transformation)."""
        S = _as_matrix(S)
        Si = np.linalg.inv(S)
        return SystemConnection(tuple(S @ a @ Si for a in self.matrices), self.tau, self.check_sum)

    def residue_data(self) -> "ResidueData":
        return ResidueData(tuple(2 * a.eigen_half for a in self.A))

    def to_json(self) -> str:
        def enc(z):
            return [float(complex(z).real), float(complex(z).imag)]

        return json.dumps(
            {
                "A": [[[enc(v) for v in row] for row in a] for a in self.matrices],
                "tau": enc(self.tau.tau),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SystemConnection":
        data = json.loads(text)
        try:
            mats = [np.array([[complex(*v) for v in row] for row in a]) for a in data["A"]]
            tau = complex(*data["tau"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractError(f"malformed connection JSON: {exc}") from exc
        return cls(tuple(mats), LatticeTau(tau))


@dataclass(frozen=True)
class ResidueData:
    """``a_j`` with eigenvalues ``+-a_j/2`` of ``A_j``."""

    a: tuple[complex, complex, complex, complex]

    def eigenvalue_pairs(self) -> list[tuple[complex, complex]]:
        return [(x / 2, -x / 2) for x in self.a]


# ---------------------------------------------------------------------------
# Omega


@dataclass(frozen=True)
class OmegaValue:
    value: Matrix
    near_singular: bool
    theta_value: Optional[Matrix] = None

    @property
    def route_mismatch(self) -> Optional[float]:
        if self.theta_value is None:
            return None
        return float(np.max(np.abs(self.value - self.theta_value)))


def omega_at(conn: SystemConnection, z: complex, *, check_theta: bool = False,
             singular_radius: float = 1e-6) -> OmegaValue:
    """Coefficient matrix of ``dz`` in ``Omega`` at ``z``.

    The primary route sums Weierstrass ``zeta`` values.  With
    ``check_theta=True`` the same matrix is rebuilt from theta-function
    log-derivatives,

        zeta(z) = 2 eta1 z + (log theta_1)',   zeta(z + 1/2) = 2 eta1 z + eta1 + (log theta_2)',
        zeta(z + tau/2) = 2 eta1 z + eta3 + (log theta_4)',
        zeta(z + (1+tau)/2) = 2 eta1 z + eta1 + eta3 + (log theta_3)',

    and returned alongside; the two agree to rounding.
    """
    z = complex(z)
    lat = conn.tau
    near = False
    val = np.zeros((2, 2), dtype=complex)
    for a, w in zip(conn.matrices, lat.half_periods):
        zz = z + w
        red, _, _ = lat.reduce(zz)
        if abs(complex(red)) < singular_radius:
            near = True
        val += a * weierstrass_family(zz, lat).zeta
    theta_val = None
    if check_theta:
        L1, L2, L3, L4 = theta_log_derivatives(z, lat)
        e1, e3 = lat.eta1, lat.eta3
        A0, A1, A2, A3 = conn.matrices
        theta_val = (
            conn.total * 2 * e1 * z
            + A0 * L1
            + A1 * (L2 + e1)
            + A2 * (L4 + e3)
            + A3 * (L3 + e1 + e3)
        )
    return OmegaValue(val, near, theta_val)


def omega_values(conn: SystemConnection, z) -> np.ndarray:
    """Vectorized ``Omega`` (zeta route): array of shape ``z.shape + (2, 2)``."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape + (2, 2), dtype=complex)
    for a, w in zip(conn.matrices, conn.tau.half_periods):
        out += np.asarray(weierstrass_family(z + w, conn.tau).zeta)[..., None, None] * a
    return out


def omega_function(conn: SystemConnection) -> Callable:
    """``z -> Omega(z)``; accepts scalars or arrays."""
    return lambda z: omega_values(conn, z)


def period_defect(conn: SystemConnection, z: complex, period: complex = 1.0) -> Matrix:
    """``Omega(z + period) - Omega(z)``; equals ``2 (sum A_j) zeta(period/2)``."""
    return omega_at(conn, z + period).value - omega_at(conn, z).value


def contour_residue(f: Callable[[complex], Matrix], center: complex, *, radius: float = 1e-2,
                    nodes: int = CAUCHY_NODES) -> Matrix:
    """``(1/2 pi i) \\oint f dz`` on a circle, trapezoid rule (spectral for analytic ``f``)."""
    acc = 0
    for j in range(nodes):
        w = cmath.exp(2j * math.pi * j / nodes)
        acc = acc + np.asarray(f(center + radius * w)) * (radius * w)
    return np.asarray(acc) / nodes


def cauchy_derivative(f: Callable[[complex], complex], z: complex, *, order: int = 1,
                      radius: float = CAUCHY_RADIUS, nodes: int = CAUCHY_NODES):
    """``f^{(order)}(z)`` from the Cauchy integral on a small circle."""
    acc = 0
    for j in range(nodes):
        w = cmath.exp(2j * math.pi * j / nodes)
        acc = acc + np.asarray(f(z + radius * w)) * w ** (-order)
    return np.asarray(acc) * math.factorial(order) / (nodes * radius**order)


# ---------------------------------------------------------------------------
# Scalar reduction


def _eval_on(A_fn: Callable, zs: np.ndarray) -> np.ndarray:
    """``A_fn`` on an array of points, falling back to a loop for scalar-only callables."""
    try:
        out = np.asarray(A_fn(zs), dtype=complex)
        if out.shape == zs.shape + (2, 2):
            return out
    except (TypeError, ValueError):
        pass
    return np.stack([np.asarray(A_fn(complex(z)), dtype=complex) for z in zs])


@dataclass(frozen=True)
class ScalarReduction:
    """Coefficients of ``y_1'' + p y_1' + q y_1 = 0`` and its normal form.

    All derivatives of the entries of ``A`` come from one Cauchy circle
    (radius ``radius``, ``nodes`` points) around the evaluation point.
    """

    A_fn: Callable
    radius: float = CAUCHY_RADIUS
    nodes: int = CAUCHY_NODES

    def jet(self, z: complex) -> tuple[Matrix, Matrix, Matrix]:
        """``(A, A', A'')`` at ``z``."""
        z = complex(z)
        w = np.exp(2j * np.pi * np.arange(self.nodes) / self.nodes)
        vals = _eval_on(self.A_fn, z + self.radius * w)
        A0 = np.asarray(self.A_fn(z), dtype=complex).reshape(2, 2)
        d1 = np.tensordot(w**-1, vals, axes=1) / (self.nodes * self.radius)
        d2 = 2 * np.tensordot(w**-2, vals, axes=1) / (self.nodes * self.radius**2)
        return A0, d1, d2

    def coefficients(self, z: complex) -> tuple[complex, complex, complex]:
        """``(p, q, p')`` at ``z``."""
        A, dA, d2A = self.jet(z)
        a11, a12, a21, a22 = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
        p = -a11 - a22 - dA[0, 1] / a12
        ratio_d = (dA[0, 0] * a12 - a11 * dA[0, 1]) / a12**2
        q = a11 * a22 - a12 * a21 - a12 * ratio_d
        dp = -dA[0, 0] - dA[1, 1] - (d2A[0, 1] * a12 - dA[0, 1] ** 2) / a12**2
        return complex(p), complex(q), complex(dp)

    def a12(self, z: complex) -> complex:
        return complex(np.asarray(self.A_fn(complex(z))).reshape(2, 2)[0, 1])

    def p(self, z: complex) -> complex:
        return self.coefficients(z)[0]

    def q(self, z: complex) -> complex:
        return self.coefficients(z)[1]

    def Q(self, z: complex) -> complex:
        """Normal-form potential ``q - p^2/4 - p'/2``."""
        p, q, dp = self.coefficients(z)
        return q - p * p / 4 - dp / 2


def scalar_reduce(A_fn: Callable[[complex], Matrix], z0: complex, *, radius: float = CAUCHY_RADIUS,
                  nodes: int = CAUCHY_NODES, zero_tol: float = 1e-12) -> ScalarReduction:
    """Reduce ``Y' = A Y`` to a scalar equation for ``y_1``.

    Raises
    ------
    DegenerateError
        If ``a12(z0) = 0``: the reduced equation has an (apparent) singular
        point there, or ``a12`` vanishes identically.
    """
    A0 = np.asarray(A_fn(complex(z0)), dtype=complex).reshape(2, 2)
    if abs(A0[0, 1]) <= zero_tol * max(1.0, float(np.max(np.abs(A0)))):
        raise DegenerateError(
            f"a12 vanishes at z0={z0!r}: apparent singularity of the reduced equation "
            "(or a12 identically zero)",
            factor="a12",
        )
    return ScalarReduction(A_fn, radius, nodes)


# ---------------------------------------------------------------------------
# Connection -> Darboux parameters


def _cell_point(lat: LatticeTau, s: float, t: float) -> complex:
    return s + t * lat.tau


def omega12_zeros(conn: SystemConnection, *, grid: int = 10, tol: float = 1e-13) -> list[complex]:
    """Zeros of ``Omega_12`` in the period cell, by Newton from a grid of seeds.

    ``Omega_12`` is elliptic with at most four simple poles, so it has as
    many zeros (with multiplicity) as nonzero (1,2) residues.
    """
    lat = conn.tau
    c = [a[0, 1] for a in conn.matrices]
    hp = lat.half_periods
    scale = max(abs(x) for x in c)
    order = sum(1 for cj in c if abs(cj) > 1e-14 * max(1.0, scale))

    def f_df(z):
        f = np.zeros_like(z)
        df = np.zeros_like(z)
        for cj, w in zip(c, hp):
            fam = weierstrass_family(z + w, lat)
            f = f + cj * fam.zeta
            df = df - cj * fam.wp
        return f, df

    found: list[complex] = []
    for g in (grid, 2 * grid, 4 * grid):
        s_, t_ = np.meshgrid((np.arange(g) + 0.5) / g, (np.arange(g) + 0.5) / g)
        z = (s_ + t_ * lat.tau).ravel().astype(complex)
        with np.errstate(all="ignore"):
            for _ in range(60):
                f, df = f_df(z)
                step = np.where(np.isfinite(f) & (df != 0), f / df, 0)
                step = np.where(np.abs(step) > 0.25, 0.25 * step / np.abs(step), step)  # damped
                z = z - step
                if np.all(np.abs(step) < tol):
                    break
            f, _ = f_df(z)
        ok = np.isfinite(z) & np.isfinite(f) & (np.abs(f) < 1e-9 * max(1.0, scale))
        for zz in z[ok]:
            red = complex(lat.reduce(zz)[0])
            if min(abs(complex(lat.reduce(red - w)[0])) for w in hp) < 1e-6:
                continue
            if all(abs(complex(lat.reduce(red - x)[0])) > 1e-7 for x in found):
                found.append(red)
        if len(found) >= order:
            break
    if len(found) != order:
        warnings.warn(
            f"found {len(found)} zeros of Omega_12, expected {order} (double zeros are counted once)",
            ConditioningWarning,
            stacklevel=2,
        )
    return found


@dataclass(frozen=True)
class SimilaritySearch:
    """Best constant gauge found for the (1,2)-residue normalization."""

    S: Matrix
    residual: float
    attained: bool


def similarity_search(conn: SystemConnection, *, seed: int = 0, tries: int = 8) -> SimilaritySearch:
    """Search ``S = [[1, b], [0, 1]] [[1, 0], [c, 1]]`` minimising the (1,2) residues.

    The residues of ``Omega_12`` at the four order-two points are the
    ``(S A_j S^{-1})_{12}``; making them vanish removes the four poles of
    that entry.  Writing the entry as ``u A_j v`` with ``u = e_1^T S`` and
    ``v = S^{-1} e_2``, each residue is divided by ``|u| |v| |a_j/2|``, which
    makes the objective a function on the projective line of ``u``
    (compact) and independent of the scale of ``A_j``.  Without the
    ``|u| |v|`` factor the objective decays spuriously as ``S`` runs off
    to infinity.  Diagonal gauges only rescale the entry and are left out.  Three complex conditions on two complex
    unknowns are generically unsolvable, so the best residual is reported
    and ``attained`` says whether it is below ``1e-8``.
    """
    from scipy.optimize import least_squares

    mats = conn.matrices
    sizes = [abs(a.eigen_half) or float(np.linalg.norm(a.m)) or 1.0 for a in conn.A]

    def S_of(x):
        b, c = x[0] + 1j * x[1], x[2] + 1j * x[3]
        return np.array([[1, b], [0, 1]]) @ np.array([[1, 0], [c, 1]])

    def resid(x):
        S = S_of(x)
        Si = np.linalg.inv(S)
        out = []
        uv = float(np.linalg.norm(S[0, :]) * np.linalg.norm(Si[:, 1]))
        for a, size in zip(mats, sizes):
            m = S @ a @ Si
            v = m[0, 1] / (size * uv)
            out += [v.real, v.imag]
        return out

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(tries):
        sol = least_squares(resid, rng.normal(size=4), xtol=1e-14, ftol=1e-14, gtol=1e-14)
        r = float(np.linalg.norm(sol.fun))
        if best is None or r < best[1]:
            best = (S_of(sol.x), r)
    return SimilaritySearch(best[0], best[1], best[1] < 1e-8)


@dataclass(frozen=True)
class ConnectionFit:
    """Fitted Weierstrass-form Darboux data of a connection."""

    potential_coefficients: tuple[complex, complex, complex, complex]  # theta(theta+1)
    thetas: tuple[complex, complex, complex, complex]  # root with Re(2 theta + 1) >= 0
    h: complex  # constant term of -Q (Weierstrass normalization)
    apparent_points: tuple[complex, ...]
    apparent_coefficients: tuple[complex, ...]
    residual: float
    similarity: Optional[SimilaritySearch]
    samples: int

    def exponent_differences(self) -> tuple[complex, ...]:
        """``2 theta_j + 1`` (squared, these equal ``a_j^2``)."""
        return tuple(2 * t + 1 for t in self.thetas)

    def darboux_params(self, k: complex) -> DarbouxParams:
        xi, eta, mu, nu = _slot_order(self.thetas)
        return DarbouxParams(xi, eta, mu, nu, k)


def _slot_order(thetas):
    """Lattice order ``(0, 1/2, tau/2, (1+tau)/2)`` to Jacobi slots ``(xi, eta, mu, nu)``.

    Under ``u = 2K z`` with ``tau = 1 + i K'/K`` the order-two points go to
    ``0, K, K+iK', 2K+iK'``; the last is ``iK'`` modulo the period ``2K`` of
    the potential, so the order is already ``(xi, eta, mu, nu)``.
    """
    return tuple(thetas)


def _theta_from_coefficient(c: complex) -> complex:
    """Root of ``theta(theta+1) = c`` with ``Re(2 theta + 1) >= 0``."""
    r = cmath.sqrt(1 + 4 * c)
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    return (r - 1) / 2


def reduce_connection_to_darboux(
    conn: SystemConnection,
    *,
    samples: int = 24,
    seed: int = 0,
    search_similarity: bool = True,
    margin: float = 0.08,
) -> ConnectionFit:
    """Fit the normal-form potential of ``y_1`` to a Darboux potential.

    ``-Q`` is sampled at ``samples`` points of the cell (away from all
    singular points) and fitted by linear least squares on the basis

    * ``wp(z + omega_j)`` for the four order-two points (coefficients
      ``theta_j(theta_j+1)``),
    * ``wp(z - z_i)`` for the zeros ``z_i`` of ``Omega_12`` (apparent
      singular points; coefficient ``3/4`` expected),
    * differences ``zeta(z - s) - zeta(z - s_0)`` over all singular points
      (the simple-pole parts, whose residues sum to zero),
    * a constant (``h`` in the Weierstrass normalization).

    A relative fit residual above ``1e-6`` triggers a
    :class:`ConditioningWarning`.
    """
    lat = conn.tau
    sim = similarity_search(conn, seed=seed) if search_similarity else None
    zeros = omega12_zeros(conn)
    red = scalar_reduce(omega_function(conn), _cell_point(lat, 0.37, 0.29))
    hp = lat.half_periods
    sing = [complex(w) for w in hp] + list(zeros)
    rng = np.random.default_rng(seed)
    pts: list[complex] = []
    while len(pts) < samples:
        z = _cell_point(lat, rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
        if all(abs(complex(lat.reduce(z - s)[0])) > margin for s in sing + [-w for w in hp]):
            pts.append(z)
    rows, rhs = [], []
    for z in pts:
        row = [weierstrass_family(z + w, lat).wp for w in hp]
        row += [weierstrass_family(z - zi, lat).wp for zi in zeros]
        zs = [weierstrass_family(z - s, lat).zeta for s in sing]
        row += [zs[i] - zs[0] for i in range(1, len(sing))]
        row.append(1.0)
        rows.append(row)
        rhs.append(-red.Q(z))
    M = np.asarray(rows, dtype=complex)
    b = np.asarray(rhs, dtype=complex)
    coef, *_ = np.linalg.lstsq(M, b, rcond=None)
    res = float(np.linalg.norm(M @ coef - b) / max(1.0, np.linalg.norm(b)))
    if res > FIT_WARN:
        warnings.warn(f"connection fit residual {res:.3g} exceeds {FIT_WARN}", ConditioningWarning, stacklevel=2)
    pc = tuple(complex(c) for c in coef[:4])
    nz = len(zeros)
    return ConnectionFit(
        potential_coefficients=pc,
        thetas=tuple(_theta_from_coefficient(c) for c in pc),
        h=complex(-coef[-1]),
        apparent_points=tuple(zeros),
        apparent_coefficients=tuple(complex(c) for c in coef[4 : 4 + nz]),
        residual=res,
        similarity=sim,
        samples=samples,
    )


def connection_with_eigenvalues(half_a: Sequence[complex], tau, rng: np.random.Generator,
                                *, tries: int = 20) -> SystemConnection:
    """Random traceless ``A_j`` with eigenvalues ``+-half_a[j]`` and ``sum A_j = 0``.

    ``A_0, A_1, A_2`` are drawn at random with the prescribed spectra and
    ``A_3 = -(A_0 + A_1 + A_2)``; the conjugator of ``A_2`` is then adjusted
    (Newton on one complex parameter) until ``det A_3 = -half_a[3]^2``.
    """
    from scipy.optimize import least_squares

    h = [complex(x) for x in half_a]
    for _ in range(tries):
        A0 = TracelessMatrix2.with_eigenvalue(h[0], rng).m
        A1 = TracelessMatrix2.with_eigenvalue(h[1], rng).m
        P = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))

        def A2_of(x):
            S = P @ np.array([[1, x[0] + 1j * x[1]], [0, 1]])
            return S @ np.diag([h[2], -h[2]]) @ np.linalg.inv(S)

        def f(x):
            A3 = -(A0 + A1 + A2_of(x))
            v = np.linalg.det(A3) + h[3] ** 2
            return [v.real, v.imag]

        sol = least_squares(f, rng.normal(size=2), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.linalg.norm(sol.fun) < 1e-12:
            A2 = A2_of(sol.x)
            return SystemConnection((A0, A1, A2, -(A0 + A1 + A2)), as_lattice(tau))
    raise DegenerateError("could not close the residue sum with the prescribed spectra")


# ---------------------------------------------------------------------------
# Special-solution conditions on the system side


@dataclass(frozen=True)
class SystemConditionReport:
    integer_indices: tuple[int, ...]  # (i): a_j in Z
    even_sum_signs: tuple[tuple[int, int, int], ...]  # (ii): signs of a1, a2, a3 with a0 + ... in 2Z

    @property
    def condition_i(self) -> bool:
        return bool(self.integer_indices)

    @property
    def condition_ii(self) -> bool:
        return bool(self.even_sum_signs)


def _is_int(z: complex, tol: float) -> bool:
    z = complex(z)
    return abs(z.imag) <= tol and abs(z.real - round(z.real)) <= tol


def special_condition_system(res: ResidueData, *, tol: float = CONDITION_TOL) -> SystemConditionReport:
    """(i) some ``a_j`` is an integer; (ii) some ``a_0 +- a_1 +- a_2 +- a_3`` is an even integer."""
    ints = tuple(j for j, a in enumerate(res.a) if _is_int(a, tol))
    evens = []
    a0, a1, a2, a3 = res.a
    for s in itertools.product((1, -1), repeat=3):
        v = a0 + s[0] * a1 + s[1] * a2 + s[2] * a3
        if _is_int(v, tol) and round(complex(v).real) % 2 == 0:
            evens.append(s)
    return SystemConditionReport(ints, tuple(evens))
