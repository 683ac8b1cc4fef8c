"""Three-term recurrences, their continued fractions and eigenproblems.

Conventions: a recurrence is ``R_r C_{r+1} + S_r C_r + P_r C_{r-1} = 0``
for ``r >= 0`` with ``C_{-1} = 0``.  Its continued fraction is

    S_0/R_0 - (P_1/R_1) / (S_1/R_1 - (P_2/R_2) / (S_2/R_2 - ...)),

which vanishes exactly when the minimal solution also satisfies the
``r = 0`` boundary equation.  Truncating after ``S_q/R_q`` gives the
finite fraction, equal to ``D_0 / (R_0 D_1)`` where ``D_j`` is the
determinant of rows/columns ``j..q`` of the tridiagonal matrix with
diagonal ``S``, superdiagonal ``R`` and subdiagonal ``P``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ContractError,
    ConvergenceWarning,
    DegenerateError,
    NonConvergenceError,
)

Triple = tuple[complex, complex, complex]

LENTZ_TINY = 1e-30
LENTZ_RTOL = 1e-14
LENTZ_MAX_DEPTH = 100_000
AITKEN_WINDOW = 64
PERRON_BAND = 0.05


@dataclass(frozen=True)
class ThreeTermRecurrence:
    """Coefficient generator ``coeff(r) -> (R_r, S_r, P_r)``.

    ``limits`` is the limit of ``(R_r, S_r, P_r)`` after some common
    normalisation (only ratios matter).
    """

    coeff: Callable[[int], Triple]
    limits: Optional[Triple] = None
    name: str = ""

    def __call__(self, r: int) -> Triple:
        return self.coeff(r)

    def check_leading(self, N: int) -> None:
        """Raise :class:`DegenerateError` if some ``R_r`` (r < N) vanishes."""
        for r in range(N):
            if self.coeff(r)[0] == 0:
                raise DegenerateError(f"R_{r} = 0", index=r, factor="R")


@dataclass(frozen=True)
class CharacteristicRoots:
    """Roots of ``R t^2 + S t + P = 0`` ordered so that ``|t1| <= |t2|``."""

    t1: complex
    t2: complex

    @property
    def separated(self) -> bool:
        return abs(self.t1) < abs(self.t2) * (1 - 1e-12)


def characteristic_roots(rec: ThreeTermRecurrence) -> CharacteristicRoots:
    """Poincaré characteristic roots from the declared coefficient limits.

    Ties in modulus are broken by argument.
    """
    if rec.limits is None:
        raise ContractError("recurrence declares no coefficient limits")
    R, S, P = (complex(v) for v in rec.limits)
    if R == 0:
        raise DegenerateError("limit of R_r is zero", factor="R")
    disc = np.sqrt(complex(S * S - 4 * R * P))
    roots = [(-S - disc) / (2 * R), (-S + disc) / (2 * R)]
    roots.sort(key=lambda t: (abs(t), np.angle(t)))
    return CharacteristicRoots(complex(roots[0]), complex(roots[1]))


def forward_run(rec: ThreeTermRecurrence, N: int, C0: complex = 1.0) -> np.ndarray:
    """``C_0 .. C_N`` by forward recursion from ``C_{-1} = 0``."""
    C = np.zeros(N + 1, dtype=complex)
    C[0] = C0
    prev = 0j
    for r in range(N):
        R, S, P = rec(r)
        if R == 0:
            raise DegenerateError(f"forward run: R_{r} = 0", index=r, factor="R")
        C[r + 1] = -(S * C[r] + P * prev) / R
        prev = C[r]
    return C


def forward_ratios(rec: ThreeTermRecurrence, N: int) -> np.ndarray:
    """Ratios ``C_{r+1}/C_r`` (r = 0..N-1) of the forward run from ``C_0 = 1``.

    Same sequence as :func:`forward_run` but immune to overflow.  An exact
    zero ``C_r`` makes the following ratios undefined (``nan``).
    """
    out = np.empty(N, dtype=complex)
    prev_ratio = None  # C_r / C_{r-1}
    for r in range(N):
        R, S, P = rec(r)
        if R == 0:
            raise DegenerateError(f"forward run: R_{r} = 0", index=r, factor="R")
        if prev_ratio is None:
            t = -S / R
        elif prev_ratio == 0 or not np.isfinite(prev_ratio):
            t = complex("nan")
        else:
            t = -(S + P / prev_ratio) / R
        out[r] = t
        prev_ratio = t
    return out


def forward_run_log(rec: ThreeTermRecurrence, N: int, C0: complex = 1.0) -> np.ndarray:
    """Logarithms of ``C_0 .. C_N`` from the forward run.

    The pair ``(C_{r-1}, C_r)`` is rescaled whenever it leaves
    ``[1e-100, 1e100]``, so dominant solutions can be followed far beyond
    the double range.  Exact zeros (e.g. a terminating solution) give
    ``-inf`` real parts.
    """
    out = np.empty(N + 1, dtype=complex)
    scale = 0.0
    prev, cur = 0j, complex(C0)
    with np.errstate(divide="ignore"):
        out[0] = np.log(cur)
        for r in range(N):
            R, S, P = rec(r)
            if R == 0:
                raise DegenerateError(f"forward run: R_{r} = 0", index=r, factor="R")
            nxt = -(S * cur + P * prev) / R
            prev, cur = cur, nxt
            mag = max(abs(prev), abs(cur))
            if mag > 1e100 or (0 < mag < 1e-100):
                prev, cur = prev / mag, cur / mag
                scale += np.log(mag)
            out[r + 1] = np.log(cur) + scale
    return out


def backward_ratios(rec: ThreeTermRecurrence, N: int, *, start: complex = 0j, extra: int = 0) -> np.ndarray:
    """Minimal-solution ratios ``r_m = C_m / C_{m-1}`` for ``m = 1..N``.

    Miller's backward sweep ``r_m = -P_m / (S_m + R_m r_{m+1})`` started at
    ``m = N + extra`` from ``r = start``.  Entry ``m-1`` of the returned
    array holds ``r_m``.
    """
    top = N + extra
    ratio = complex(start)
    out = np.empty(top, dtype=complex)
    for m in range(top, 0, -1):
        R, S, P = rec(m)
        denom = S + R * ratio
        if denom == 0:
            raise DegenerateError(f"backward sweep: zero denominator at m={m}", index=m, factor="S+R*r")
        ratio = -P / denom
        out[m - 1] = ratio
    return out[:N]


def miller_run(rec: ThreeTermRecurrence, N: int, *, extra: int = 200, start: complex = 0j) -> np.ndarray:
    """Minimal solution ``C_0 .. C_N`` normalised to ``C_0 = 1``."""
    r = backward_ratios(rec, N, start=start, extra=extra)
    C = np.empty(N + 1, dtype=complex)
    C[0] = 1
    C[1:] = np.cumprod(r)
    return C


def miller_run_log(rec: ThreeTermRecurrence, N: int, *, extra: int = 200, start: complex = 0j) -> np.ndarray:
    """Logarithms of the minimal solution ``C_0 .. C_N`` with ``C_0 = 1``."""
    r = backward_ratios(rec, N, start=start, extra=extra)
    out = np.zeros(N + 1, dtype=complex)
    with np.errstate(divide="ignore"):
        out[1:] = np.cumsum(np.log(r))
    return out


def continued_fraction_finite(rec: ThreeTermRecurrence, q: int) -> complex:
    """``S_0/R_0 - (P_1/R_1)/(S_1/R_1 - ... (P_q/R_q)/(S_q/R_q))``.

    Folded right to left.  A zero partial denominator raises
    :class:`DegenerateError` carrying the depth index.
    """
    coeffs = [rec(j) for j in range(q + 1)]
    for j, (R, _, _) in enumerate(coeffs):
        if R == 0:
            raise DegenerateError(f"finite fraction: R_{j} = 0", index=j, factor="R")
    R, S, _ = coeffs[q]
    val = S / R
    for j in range(q - 1, -1, -1):
        if val == 0:
            raise DegenerateError(f"finite fraction: zero denominator at depth {j + 1}", index=j + 1)
        R, S, _ = coeffs[j]
        R1, _, P1 = coeffs[j + 1]
        val = S / R - (P1 / R1) / val
    return complex(val)


def _lentz(rec: ThreeTermRecurrence, tiny: float, rtol: float, max_depth: int):
    R0, S0, _ = rec(0)
    f = S0 / R0
    if f == 0:
        f = tiny
    C, D = f, 0j
    history = [f]
    for j in range(1, max_depth + 1):
        R, S, P = rec(j)
        a, b = -P / R, S / R
        D = b + a * D
        if D == 0:
            D = tiny
        C = b + a / C
        if C == 0:
            C = tiny
        D = 1 / D
        delta = C * D
        f *= delta
        history.append(f)
        if abs(delta - 1) < rtol:
            return complex(f), j
    raise NonConvergenceError(
        f"continued fraction did not converge within depth {max_depth}", trace=history[-2:]
    )


def continued_fraction_infinite(
    rec: ThreeTermRecurrence,
    *,
    tiny: float = LENTZ_TINY,
    rtol: float = LENTZ_RTOL,
    max_depth: int = LENTZ_MAX_DEPTH,
    return_depth: bool = False,
):
    """Infinite continued fraction by the modified Lentz algorithm.

    If the characteristic roots have equal modulus the fraction need not
    converge; a :class:`ConvergenceWarning` is emitted and evaluation is
    attempted anyway.  Hitting ``max_depth`` raises
    :class:`NonConvergenceError` whose ``trace`` holds the last two
    convergents.
    """
    if rec.limits is not None:
        roots = characteristic_roots(rec)
        if not roots.separated:
            warnings.warn(
                "characteristic roots have equal modulus: the continued fraction "
                "may converge slowly or not at all",
                ConvergenceWarning,
                stacklevel=2,
            )
    value, depth = _lentz(rec, tiny, rtol, max_depth)
    return (value, depth) if return_depth else value


class PerronClass(str, Enum):
    MINIMAL = "Minimal"
    DOMINANT = "Dominant"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class PerronReport:
    label: PerronClass
    limit: float
    rel_dist_minimal: float
    rel_dist_dominant: float


def aitken_limit(seq: Sequence[float]) -> float:
    """Aitken delta-squared extrapolation of a real sequence (last value)."""
    x = np.asarray(seq, dtype=float)
    if x.size < 3:
        return float(x[-1])
    d1 = x[1:-1] - x[:-2]
    d2 = x[2:] - 2 * x[1:-1] + x[:-2]
    with np.errstate(divide="ignore", invalid="ignore"):
        acc = np.where(np.abs(d2) > 1e-300, x[:-2] - d1 * d1 / d2, x[2:])
    acc = acc[np.isfinite(acc)]
    if acc.size == 0:
        return float(x[-1])
    return float(np.median(acc[-min(8, acc.size):]))


def perron_classify(
    rec: ThreeTermRecurrence,
    trajectory: Sequence[complex],
    *,
    ratios: bool = False,
    window: int = AITKEN_WINDOW,
    band: float = PERRON_BAND,
) -> PerronReport:
    """Classify a solution as minimal or dominant by its ratio limit.

    Parameters
    ----------
    trajectory : sequence of complex
        Coefficients ``C_r`` or, with ``ratios=True``, the ratios
        ``C_{r+1}/C_r`` themselves.
    window : int
        Number of trailing ratios fed to the Aitken extrapolation.
    band : float
        Relative distance to ``|t1|`` or ``|t2|`` accepted as a match.
    """
    roots = characteristic_roots(rec)
    traj = np.asarray(trajectory, dtype=complex)
    if ratios:
        rat = traj
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            rat = traj[1:] / traj[:-1]
    rat = rat[np.isfinite(rat)]
    if rat.size == 0:
        raise ContractError("trajectory has no finite ratios")
    limit = aitken_limit(np.abs(rat[-window:]))
    m1, m2 = abs(roots.t1), abs(roots.t2)
    d1 = abs(limit - m1) / m1 if m1 else abs(limit)
    d2 = abs(limit - m2) / m2 if m2 else abs(limit)
    if d1 <= band and (d1 <= d2 or not roots.separated):
        label = PerronClass.MINIMAL
    elif d2 <= band:
        label = PerronClass.DOMINANT
    else:
        label = PerronClass.UNCLASSIFIED
    return PerronReport(label, limit, d1, d2)


def tridiagonal_matrix(rec: ThreeTermRecurrence, q: int) -> np.ndarray:
    """Matrix with rows ``r = 0..q``: ``[P_r, S_r, R_r]`` around the diagonal."""
    T = np.zeros((q + 1, q + 1), dtype=complex)
    for r in range(q + 1):
        R, S, P = rec(r)
        T[r, r] = S
        if r + 1 <= q:
            T[r, r + 1] = R
        if r >= 1:
            T[r, r - 1] = P
    return T


def _check_affine(family: Callable[[complex], ThreeTermRecurrence], q: int, tol: float = 1e-9) -> None:
    recs = [family(h) for h in (0.0, 1.0, 2.0)]
    for r in range(q + 1):
        c0, c1, c2 = (np.array(rc(r), dtype=complex) for rc in recs)
        scale = max(1.0, float(np.max(np.abs(c0))))
        d1, d2 = c1 - c0, c2 - c1
        if abs(d1[0]) > tol * scale or abs(d1[2]) > tol * scale:
            raise ContractError(f"off-diagonal coefficients depend on h at r={r}")
        if abs(d1[1] - 1) > tol * scale or abs(d2[1] - 1) > tol * scale:
            raise ContractError(f"diagonal coefficient is not h + const at r={r}")


def tridiagonal_spectrum(family: Callable[[complex], ThreeTermRecurrence], q: int) -> list[complex]:
    """Values of ``h`` at which the truncated recurrence (size ``q+1``) is singular.

    ``family(h)`` must return recurrences whose diagonal is ``h + const``
    and whose off-diagonals do not depend on ``h``; this is checked by
    finite differences.  The roots are ``-eig(T)`` with ``T`` the
    tridiagonal matrix at ``h = 0`` (LAPACK's balanced nonsymmetric
    eigensolver).  Sorted by real then imaginary part.
    """
    _check_affine(family, q)
    T = tridiagonal_matrix(family(0.0), q)
    h = -np.linalg.eigvals(T)
    return sorted((complex(v) for v in h), key=lambda v: (round(v.real, 12), v.imag))
