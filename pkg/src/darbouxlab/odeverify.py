"""Complex-path integration, ODE residuals and numerical monodromy.

Scalar equations are ``y'' + p(z) y' + q(z) y = 0`` given by coefficient
closures; systems are ``Y' = A(z) Y`` with ``A`` a 2x2 closure.  Paths are
polylines; along each segment ``z = a + t (b - a)``, ``t in [0, 1]``, the
ODE is integrated with an embedded 8(5,3) Runge-Kutta pair
(``scipy.integrate.solve_ivp`` with ``method="DOP853"``), which handles
complex state vectors directly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .elliptic import complete_elliptic_K
from .errors import DomainError, NonConvergenceError

if TYPE_CHECKING:
    from .darboux import DarbouxParams

ScalarFn = Callable[[complex], complex]

INTEGRATION_RTOL = 1e-11
INTEGRATION_ATOL = 1e-13
SINGULARITY_MARGIN = 1e-3
LOOP_STEPS = 256
RICHARDSON_STEP = 1e-2
RICHARDSON_LEVELS = 3


@dataclass(frozen=True)
class ComplexPath:
    """Polyline through ``waypoints``.

    ``singularities`` are points the path must avoid by at least ``margin``;
    ``max_step`` bounds the integrator step (in path length).
    """

    waypoints: tuple[complex, ...]
    max_step: float = math.inf
    singularities: tuple[complex, ...] = ()
    margin: float = SINGULARITY_MARGIN

    def __post_init__(self):
        pts = tuple(complex(w) for w in self.waypoints)
        object.__setattr__(self, "waypoints", pts)
        object.__setattr__(self, "singularities", tuple(complex(s) for s in self.singularities))
        if len(pts) < 2:
            raise DomainError("a path needs at least two waypoints")
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise DomainError(f"consecutive waypoints coincide at {a!r}")
        for s in self.singularities:
            d = self.distance_to(s)
            if d < self.margin:
                raise DomainError(f"path passes within {d:.3g} of singularity {s!r}")

    @property
    def start(self) -> complex:
        return self.waypoints[0]

    @property
    def end(self) -> complex:
        return self.waypoints[-1]

    def segments(self):
        return zip(self.waypoints, self.waypoints[1:])

    def distance_to(self, s: complex) -> float:
        best = math.inf
        for a, b in self.segments():
            d = b - a
            t = ((s - a) * d.conjugate()).real / abs(d) ** 2
            t = min(1.0, max(0.0, t))
            best = min(best, abs(a + t * d - s))
        return best

    def reversed(self) -> "ComplexPath":
        return ComplexPath(self.waypoints[::-1], self.max_step, self.singularities, self.margin)

    def __add__(self, other: "ComplexPath") -> "ComplexPath":
        if abs(self.end - other.start) > 1e-14:
            raise DomainError("paths do not join")
        return ComplexPath(
            self.waypoints + other.waypoints[1:],
            min(self.max_step, other.max_step),
            tuple(dict.fromkeys(self.singularities + other.singularities)),
            min(self.margin, other.margin),
        )


def _integrate_linear(rhs: Callable[[complex, np.ndarray], np.ndarray], path: ComplexPath, y0: np.ndarray,
                      rtol: float, atol: float) -> np.ndarray:
    y = np.asarray(y0, dtype=complex)
    for a, b in path.segments():
        d = b - a
        L = abs(d)
        max_t = path.max_step / L if math.isfinite(path.max_step) else np.inf

        def f(t, Y, a=a, d=d):
            return d * rhs(a + t * d, Y)

        sol = solve_ivp(f, (0.0, 1.0), y, method="DOP853", rtol=rtol, atol=atol, max_step=max_t)
        if sol.status != 0 or not np.all(np.isfinite(sol.y[:, -1])):
            where = a + (sol.t[-1] if sol.t.size else 0.0) * d
            raise NonConvergenceError(
                f"integration failed near z={where!r}: {sol.message}", trace=[where]
            )
        y = sol.y[:, -1]
    return y


def integrate_scalar(
    p: Optional[ScalarFn],
    q: ScalarFn,
    path: ComplexPath,
    y0: complex,
    dy0: complex,
    *,
    rtol: float = INTEGRATION_RTOL,
    atol: float = INTEGRATION_ATOL,
) -> tuple[complex, complex]:
    """Continue ``(y, y')`` of ``y'' + p y' + q y = 0`` along ``path``.

    ``p=None`` means no first-derivative term.

    Raises
    ------
    NonConvergenceError
        If the step size collapses (typically next to a singularity); the
        message carries the location.
    """

    def rhs(z, Y):
        acc = -q(z) * Y[0]
        if p is not None:
            acc -= p(z) * Y[1]
        return np.array([Y[1], acc])

    y = _integrate_linear(rhs, path, np.array([y0, dy0], dtype=complex), rtol, atol)
    return complex(y[0]), complex(y[1])


def transfer_matrix(p: Optional[ScalarFn], q: ScalarFn, path: ComplexPath, **kw) -> np.ndarray:
    """2x2 matrix mapping ``(y, y')`` at the path start to its value at the end."""

    def rhs(z, Y):
        Y = Y.reshape(2, 2)
        row = -q(z) * Y[0]
        if p is not None:
            row = row - p(z) * Y[1]
        return np.vstack([Y[1], row]).ravel()

    Y = _integrate_linear(rhs, path, np.eye(2, dtype=complex).ravel(), kw.get("rtol", INTEGRATION_RTOL),
                          kw.get("atol", INTEGRATION_ATOL))
    return Y.reshape(2, 2)


def integrate_system(A: Callable[[complex], np.ndarray], path: ComplexPath, Y0, *,
                     rtol: float = INTEGRATION_RTOL, atol: float = INTEGRATION_ATOL) -> np.ndarray:
    """Continue a solution (vector or 2x2 matrix) of ``Y' = A(z) Y`` along ``path``."""
    Y0 = np.asarray(Y0, dtype=complex)
    shape = Y0.shape

    def rhs(z, Y):
        return (np.asarray(A(z), dtype=complex) @ Y.reshape(shape[0], -1)).ravel()

    return _integrate_linear(rhs, path, Y0.ravel(), rtol, atol).reshape(shape)


def second_derivative(f: Callable[[complex], complex], z: complex, *, step: float = RICHARDSON_STEP,
                      levels: int = RICHARDSON_LEVELS) -> complex:
    """Central second difference with Richardson extrapolation (error ``O(step^(2 levels))``)."""
    table = []
    f0 = f(z)
    for j in range(levels):
        s = step / 2**j
        table.append((f(z + s) - 2 * f0 + f(z - s)) / (s * s))
    for lev in range(1, levels):
        fac = 4.0**lev
        table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
    return complex(table[0])


def first_derivative(f: Callable[[complex], complex], z: complex, *, step: float = RICHARDSON_STEP,
                     levels: int = RICHARDSON_LEVELS) -> complex:
    table = []
    for j in range(levels):
        s = step / 2**j
        table.append((f(z + s) - f(z - s)) / (2 * s))
    for lev in range(1, levels):
        fac = 4.0**lev
        table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
    return complex(table[0])


def residual_scalar(
    sampler: Callable[[complex], complex],
    q: ScalarFn,
    points: Sequence[complex],
    *,
    p: Optional[ScalarFn] = None,
    step: float = RICHARDSON_STEP,
    levels: int = RICHARDSON_LEVELS,
    relative: bool = False,
) -> np.ndarray:
    """``|y'' + p y' + q y|`` at ``points`` with ``y''`` from finite differences.

    For the Darboux equation ``q = h - potential`` and ``p`` is absent.
    With ``relative=True`` each residual is divided by ``max(1, |y|)``.
    """
    out = []
    for z in points:
        z = complex(z)
        y = sampler(z)
        r = second_derivative(sampler, z, step=step, levels=levels) + q(z) * y
        if p is not None:
            r += p(z) * first_derivative(sampler, z, step=step, levels=levels)
        out.append(abs(r) / (max(1.0, abs(y)) if relative else 1.0))
    return np.asarray(out)


# ---------------------------------------------------------------------------
# The Darboux equation as an integrable object


@dataclass(frozen=True)
class DarbouxEquation:
    """``y'' + (h - V(u)) y = 0`` in the Jacobi coordinate ``u``."""

    params: "DarbouxParams"  # noqa: F821
    h: complex
    K: complex = field(init=False)
    iKp: complex = field(init=False)

    def __post_init__(self):
        k = self.params.k
        object.__setattr__(self, "K", complete_elliptic_K(k))
        object.__setattr__(self, "iKp", 1j * complete_elliptic_K(cmath.sqrt(1 - k * k)))

    @property
    def singular_points(self) -> dict[str, complex]:
        return {"0": 0j, "K": self.K, "iK'": self.iKp, "K+iK'": self.K + self.iKp}

    def q(self, u: complex) -> complex:
        from .darboux import potential_jacobi

        return self.h - complex(potential_jacobi(self.params, u))

    def multipliers(self, label: str) -> tuple[complex, complex]:
        """``exp(2 pi i rho)`` for the two local exponents at ``label``."""
        theta = {"0": self.params.xi, "K": self.params.eta, "K+iK'": self.params.mu, "iK'": self.params.nu}[label]
        return cmath.exp(2j * math.pi * (theta + 1)), cmath.exp(-2j * math.pi * theta)

    def base_point(self) -> complex:
        return (self.K + self.iKp) / 2

    def all_singularities(self) -> tuple[complex, ...]:
        """Singular points in the period parallelogram around the base cell."""
        K2, iK2 = 2 * self.K, 2 * self.iKp
        pts = []
        for s in self.singular_points.values():
            for a in (-1, 0, 1):
                for b in (-1, 0, 1):
                    pts.append(s + a * K2 + b * iK2)
        return tuple(pts)

    def loop_radius(self) -> float:
        pts = list(self.singular_points.values())
        gap = min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1 :])
        return min(0.1, gap / 4)


@dataclass(frozen=True)
class MonodromyResult:
    """Loop matrix acting on ``(y, y')`` data at ``base``."""

    matrix: np.ndarray
    loop: str
    base: complex
    expected: Optional[tuple[complex, complex]] = None

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)

    @property
    def determinant(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    @property
    def eigenvector_condition(self) -> float:
        _, V = np.linalg.eig(self.matrix)
        return float(np.linalg.cond(V))

    @property
    def near_defective(self) -> bool:
        return self.eigenvector_condition > 1e8

    def eigenvalue_mismatch(self) -> float:
        """Best-pairing distance between computed and expected multipliers."""
        if self.expected is None:
            raise ValueError("no expected multipliers recorded")
        ev = self.eigenvalues
        e1, e2 = self.expected
        return float(min(max(abs(ev[0] - e1), abs(ev[1] - e2)), max(abs(ev[0] - e2), abs(ev[1] - e1))))

    def eigen_defect(self, v) -> float:
        """``|M v - lambda v| / |v|`` for the best ``lambda`` (0 iff ``v`` is an eigenvector)."""
        v = np.asarray(v, dtype=complex)
        w = self.matrix @ v
        lam = np.vdot(v, w) / np.vdot(v, v)
        return float(np.linalg.norm(w - lam * v) / np.linalg.norm(v))


def loop_path(center: complex, base: complex, radius: float, *, steps: int = LOOP_STEPS,
              singularities: Sequence[complex] = ()) -> ComplexPath:
    """Base point -> circle of ``radius`` around ``center`` (counter-clockwise) -> base point."""
    phi0 = cmath.phase(base - center)
    ring = [center + radius * cmath.exp(1j * (phi0 + 2 * math.pi * j / steps)) for j in range(steps + 1)]
    others = tuple(s for s in singularities if abs(s - center) > 1e-12)
    return ComplexPath((complex(base),) + tuple(ring) + (complex(base),), singularities=others,
                       margin=min(SINGULARITY_MARGIN, radius / 2))


def monodromy_loop(eq: DarbouxEquation, label: str, *, base: Optional[complex] = None,
                   radius: Optional[float] = None, steps: int = LOOP_STEPS) -> MonodromyResult:
    """Loop matrix around the singular point ``label`` in ``{0, K, iK', K+iK'}``.

    The loop runs from the centre of the cell with corners
    ``0, K, K+iK', iK'`` to a small circle around the corner and back.
    """
    base = eq.base_point() if base is None else complex(base)
    r = eq.loop_radius() if radius is None else radius
    center = eq.singular_points[label]
    path = loop_path(center, base, r, steps=steps, singularities=eq.all_singularities())
    M = transfer_matrix(None, eq.q, path)
    return MonodromyResult(M, label, base, eq.multipliers(label))


def composite_loop(results: Sequence[MonodromyResult]) -> np.ndarray:
    """Matrix of the loop traversing ``results[0]`` first, then ``results[1]``, ..."""
    M = np.eye(2, dtype=complex)
    for r in results:
        M = r.matrix @ M
    return M


def solution_data(sampler: Callable[[complex], complex], z: complex) -> np.ndarray:
    """``(y, y')`` of a sampled solution at ``z`` (derivative by Richardson differences)."""
    return np.array([sampler(z), first_derivative(sampler, z)], dtype=complex)


def common_eigenvector_defect(results: Sequence[MonodromyResult], v) -> float:
    """Largest eigen-defect of ``v`` across the loop matrices."""
    return max(r.eigen_defect(v) for r in results)


def projective_triviality(result: MonodromyResult) -> float:
    """Distance of the loop matrix from a scalar multiple of the identity."""
    M = result.matrix
    lam = np.trace(M) / 2
    return float(np.linalg.norm(M - lam * np.eye(2)) / max(1.0, abs(lam)))

