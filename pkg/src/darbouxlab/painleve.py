"""Painlevé VI in rational and elliptic form.

Rational form, for ``X(t)``::

    X'' = (1/2)(1/X + 1/(X-1) + 1/(X-t)) X'^2 - (1/t + 1/(t-1) + 1/(X-t)) X'
          + X(X-1)(X-t)/(t^2 (t-1)^2) (alpha + beta t/X^2 + gamma (t-1)/(X-1)^2
                                       + delta t(t-1)/(X-t)^2)

Elliptic form, for ``u(tau)``::

    u'' = -(1/(8 pi^2)) [a0^2 wp'(u) + a1^2 wp'(u + 1/2) + a2^2 wp'(u + tau/2)
                         + (a3 - 1)^2 wp'(u + (1+tau)/2)]

with ``(a0^2, a1^2, a2^2, (a3-1)^2) = (-2 beta, 2 gamma, 1 - 2 delta, 2 alpha)``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .darboux import symmetry_conditions
from .elliptic import as_lattice, weierstrass_family
from .errors import ContractError, DomainError, PoleError

CONDITION_TOL = 1e-10
INTEGER_WINDOW = 50
SINGULAR_NODE_TOL = 1e-12


def _c(z) -> complex:
    return complex(z)


@dataclass(frozen=True)
class PainleveParams:
    """Parameters ``a0..a3``; ``alpha..delta`` derived by the dictionary."""

    a0: complex
    a1: complex
    a2: complex
    a3: complex

    def __post_init__(self):
        for name in ("a0", "a1", "a2", "a3"):
            object.__setattr__(self, name, _c(getattr(self, name)))

    @property
    def a(self) -> tuple[complex, complex, complex, complex]:
        return (self.a0, self.a1, self.a2, self.a3)

    @property
    def b(self) -> tuple[complex, complex, complex, complex]:
        """``(a0, a1, a2, a3 - 1)``: the coordinates the symmetries act on linearly."""
        return (self.a0, self.a1, self.a2, self.a3 - 1)

    @classmethod
    def from_b(cls, b: Sequence[complex]) -> "PainleveParams":
        return cls(b[0], b[1], b[2], b[3] + 1)

    @property
    def alpha(self) -> complex:
        return (self.a3 - 1) ** 2 / 2

    @property
    def beta(self) -> complex:
        return -(self.a0**2) / 2

    @property
    def gamma(self) -> complex:
        return self.a1**2 / 2

    @property
    def delta(self) -> complex:
        return (1 - self.a2**2) / 2

    @property
    def greek(self) -> tuple[complex, complex, complex, complex]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    @classmethod
    def from_greek(cls, alpha, beta, gamma, delta) -> "PainleveParams":
        """Principal square roots; ``a3 = 1 + sqrt(2 alpha)``."""
        sq = np.emath.sqrt
        return cls(complex(sq(-2 * complex(beta))), complex(sq(2 * complex(gamma))),
                   complex(sq(1 - 2 * complex(delta))), 1 + complex(sq(2 * complex(alpha))))

    def squares(self) -> tuple[complex, complex, complex, complex]:
        """``(a0^2, a1^2, a2^2, (a3-1)^2)``."""
        return tuple(x * x for x in self.b)


# ---------------------------------------------------------------------------
# Candidates and residuals


def _stencil_derivatives(values: np.ndarray, step: complex) -> tuple[np.ndarray, np.ndarray]:
    """Five-point first and second derivatives at interior nodes ``2..n-3``."""
    f = values
    d1 = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * step)
    d2 = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * step * step)
    return d1, d2


class CandidateForm(str, Enum):
    RATIONAL = "rational"
    ELLIPTIC = "elliptic"


@dataclass(frozen=True, eq=False)
class PviCandidate:
    """A sampled trajectory on equally spaced nodes.

    ``nodes`` are ``t`` values (rational form) or ``tau`` values on a
    straight segment (elliptic form).  ``first``/``second`` optionally carry
    analytic derivatives; when given they are checked against five-point
    differences to ``derivative_tol`` (relative).  ``tau`` is used by the
    rational form only as a label and ignored.
    """

    nodes: np.ndarray
    values: np.ndarray
    form: CandidateForm = CandidateForm.RATIONAL
    first: Optional[np.ndarray] = None
    second: Optional[np.ndarray] = None
    derivative_tol: float = 1e-6

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex)
        vals = np.asarray(self.values, dtype=complex)
        if nodes.ndim != 1 or nodes.shape != vals.shape:
            raise ContractError("nodes and values must be 1-D arrays of equal length")
        if nodes.size < 5:
            raise ContractError("need at least five nodes for the difference stencils")
        steps = np.diff(nodes)
        if np.any(steps == 0):
            raise ContractError("nodes must be distinct")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
            raise ContractError("nodes must be equally spaced along a straight segment")
        if self.form is CandidateForm.RATIONAL and (np.any(np.abs(nodes.imag) > 0) or steps[0].real <= 0):
            raise ContractError("rational-form nodes must be real and strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "form", CandidateForm(self.form))
        for name in ("first", "second"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v, dtype=complex))
        if self.first is not None or self.second is not None:
            d1, d2 = _stencil_derivatives(vals, steps[0])
            for given, fd in ((self.first, d1), (self.second, d2)):
                if given is None:
                    continue
                g = given[2:-2]
                err = np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(g)))
                if err > self.derivative_tol:
                    raise ContractError(f"supplied derivatives disagree with differences (rel. {err:.3g})")

    @property
    def step(self) -> complex:
        return self.nodes[1] - self.nodes[0]

    @classmethod
    def sample(cls, f: Callable, nodes, form=CandidateForm.RATIONAL, df: Optional[Callable] = None,
               d2f: Optional[Callable] = None, **kw) -> "PviCandidate":
        nodes = np.asarray(nodes, dtype=complex if form == CandidateForm.ELLIPTIC else float)
        vals = np.array([f(t) for t in nodes], dtype=complex)
        first = np.array([df(t) for t in nodes], dtype=complex) if df else None
        second = np.array([d2f(t) for t in nodes], dtype=complex) if d2f else None
        return cls(nodes, vals, CandidateForm(form), first, second, **kw)

    def derivatives(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Interior ``(value, first, second)`` (analytic data preferred)."""
        d1, d2 = _stencil_derivatives(self.values, self.step)
        if self.first is not None:
            d1 = self.first[2:-2]
        if self.second is not None:
            d2 = self.second[2:-2]
        return self.values[2:-2], d1, d2

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[2:-2]


@dataclass(frozen=True)
class ResidualReport:
    nodes: np.ndarray
    residuals: np.ndarray  # nan at skipped nodes
    skipped: tuple[int, ...] = field(default=())

    @property
    def max(self) -> float:
        r = self.residuals[np.isfinite(self.residuals)]
        if r.size == 0:
            raise DomainError("every node was skipped")
        return float(np.max(r))


def pvi_rhs(X: complex, dX: complex, t: complex, p: PainleveParams) -> complex:
    """Right-hand side of the rational equation."""
    al, be, ga, de = p.greek
    return (
        0.5 * (1 / X + 1 / (X - 1) + 1 / (X - t)) * dX * dX
        - (1 / t + 1 / (t - 1) + 1 / (X - t)) * dX
        + X * (X - 1) * (X - t) / (t * t * (t - 1) ** 2)
        * (al + be * t / X**2 + ga * (t - 1) / (X - 1) ** 2 + de * t * (t - 1) / (X - t) ** 2)
    )


def pvi_residual(cand: PviCandidate, p: PainleveParams) -> ResidualReport:
    """``|X'' - RHS|`` at interior nodes; nodes with ``X in {0, 1, t}`` are skipped."""
    if cand.form is not CandidateForm.RATIONAL:
        raise ContractError("pvi_residual needs a rational-form candidate")
    X, d1, d2 = cand.derivatives()
    t = cand.interior_nodes
    out = np.full(t.size, np.nan)
    skipped = []
    for i in range(t.size):
        if min(abs(X[i]), abs(X[i] - 1), abs(X[i] - t[i])) < SINGULAR_NODE_TOL or t[i] in (0, 1):
            skipped.append(i)
            continue
        out[i] = abs(d2[i] - pvi_rhs(X[i], d1[i], t[i], p))
    return ResidualReport(t, out, tuple(skipped))


def elliptic_pvi_rhs(u: complex, tau: complex, p: PainleveParams) -> complex:
    """``-(1/8 pi^2) sum c_j wp'(u + omega_j; tau)``; vanishing ``c_j`` terms are dropped.

    Raises
    ------
    PoleError
        If ``u + omega_j`` is a lattice point while ``c_j != 0``.
    """
    lat = as_lattice(tau)
    acc = 0j
    for c, w in zip(p.squares(), lat.half_periods):
        if c == 0:
            continue
        fam = weierstrass_family(u + w, lat)
        if fam.at_lattice_point:
            raise PoleError(f"u + {w!r} is a lattice point with nonzero coefficient {c!r}")
        acc += c * fam.wp_prime
    return -acc / (8 * math.pi**2)


def elliptic_pvi_residual(cand: PviCandidate, p: PainleveParams) -> ResidualReport:
    """``|u'' - RHS|`` at interior ``tau`` nodes (five-point stencils in ``tau``)."""
    if cand.form is not CandidateForm.ELLIPTIC:
        raise ContractError("elliptic_pvi_residual needs an elliptic-form candidate")
    u, _, d2 = cand.derivatives()
    taus = cand.interior_nodes
    out = np.array([abs(d2[i] - elliptic_pvi_rhs(u[i], taus[i], p)) for i in range(taus.size)])
    return ResidualReport(taus, out)


# ---------------------------------------------------------------------------
# Special-solution conditions and symmetries


def _near_int(z: complex, tol: float = CONDITION_TOL) -> Optional[int]:
    z = complex(z)
    n = round(z.real)
    if abs(z.imag) <= tol and abs(z.real - n) <= tol:
        return int(n)
    return None


@dataclass(frozen=True)
class PviConditionReport:
    even_sum_signs: tuple[tuple[int, int, int], ...]  # condition on a0 + e1 a1 + e2 a2 + e3 a3
    integer_hits: tuple[tuple[int, int], ...]  # (index j, n) with a_j = n

    @property
    def condition(self) -> bool:
        return bool(self.even_sum_signs)

    @property
    def condition1(self) -> bool:
        return bool(self.integer_hits)

    @property
    def any(self) -> bool:
        return self.condition or self.condition1

    def label(self) -> str:
        parts = []
        if self.condition:
            parts.append("even-sum")
        if self.condition1:
            parts.append("integer")
        return "+".join(parts) if parts else "none"


def special_condition_pvi(p: PainleveParams, *, window: int = INTEGER_WINDOW,
                          tol: float = CONDITION_TOL) -> PviConditionReport:
    """Check ``a0 +- a1 +- a2 +- a3 in 2Z`` and ``prod (a_j - n) = 0`` for ``|n| <= window``."""
    a0, a1, a2, a3 = p.a
    evens = []
    for e in itertools.product((1, -1), repeat=3):
        n = _near_int(a0 + e[0] * a1 + e[1] * a2 + e[2] * a3, tol)
        if n is not None and n % 2 == 0:
            evens.append(e)
    hits = []
    for j, a in enumerate(p.a):
        n = _near_int(a, tol)
        if n is not None and abs(n) <= window:
            hits.append((j, n))
    return PviConditionReport(tuple(evens), tuple(hits))


def _flip(b, i):
    b = list(b)
    b[i] = -b[i]
    return tuple(b)


def _swap(b, i, j):
    b = list(b)
    b[i], b[j] = b[j], b[i]
    return tuple(b)


def _shift(b, n):
    return tuple(x + k for x, k in zip(b, n))


def manin_generators() -> list[tuple[str, Callable]]:
    """Named generators acting on ``b = (a0, a1, a2, a3 - 1)``.

    Sign flips of each coordinate, transpositions, and the shifts
    ``+-(e_i + e_j)``, ``+-(e_i - e_j)`` and ``+-2 e_i`` (these generate the
    even-total integer shifts).
    """
    gens: list[tuple[str, Callable]] = []
    for i in range(4):
        gens.append((f"flip{i}", lambda b, i=i: _flip(b, i)))
    for i, j in itertools.combinations(range(4), 2):
        gens.append((f"swap{i}{j}", lambda b, i=i, j=j: _swap(b, i, j)))
    for i, j in itertools.combinations_with_replacement(range(4), 2):
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            n = [0, 0, 0, 0]
            n[i] += si
            n[j] += sj
            if any(n):
                gens.append((f"shift{tuple(n)}", lambda b, n=tuple(n): _shift(b, n)))
    return gens


def apply_word(p: PainleveParams, word: Sequence[str]) -> PainleveParams:
    gens = dict(manin_generators())
    b = p.b
    for w in word:
        b = gens[w](b)
    return PainleveParams.from_b(b)


def canonical_representative(p: PainleveParams) -> tuple:
    """Orbit label: sorted ``(|frac Re b_i|, |Im b_i|)`` over ``b = (a0, a1, a2, a3-1)``.

    Invariant under all generators (flips, permutations, integer shifts).
    """
    key = []
    for x in p.b:
        fr = x.real - round(x.real)
        key.append((round(abs(fr), 12), round(abs(x.imag), 12)))
    return tuple(sorted(key))


@dataclass(frozen=True)
class OrbitSample:
    word: tuple[str, ...]
    params: PainleveParams


def manin_orbit(p: PainleveParams, depth: int = 3, *, samples: int = 200, seed: int = 0) -> tuple[list[OrbitSample], tuple]:
    """Random words of length ``<= depth`` applied to ``p``, and the canonical label."""
    gens = manin_generators()
    names = [g[0] for g in gens]
    rng = np.random.default_rng(seed)
    out = [OrbitSample((), p)]
    while len(out) < samples:
        L = int(rng.integers(1, depth + 1))
        word = tuple(names[int(i)] for i in rng.integers(0, len(names), size=L))
        out.append(OrbitSample(word, apply_word(p, word)))
    return out, canonical_representative(p)


# ---------------------------------------------------------------------------
# Darboux <-> Painlevé correspondence


class Verdict(str, Enum):
    BOTH = "both"
    ONLY_A = "only-A"
    ONLY_B = "only-B"
    NEITHER = "neither"


@dataclass(frozen=True)
class CorrespondenceRow:
    thetas: tuple[complex, complex, complex, complex]
    a: tuple[complex, complex, complex, complex]
    darboux_case: str
    pvi_case: str
    pvi_signs: tuple[int, int, int, int]  # dictionary signs a_j = s_j (2 theta_j + 1) that satisfy B
    verdict: Verdict


def _darboux_label(thetas) -> str:
    conds = symmetry_conditions(thetas)
    held = [c.label for c in conds if c.holds]
    return "+".join(held) if held else "none"


def correspondence_scan(thetas: Sequence[complex], *, window: int = INTEGER_WINDOW) -> CorrespondenceRow:
    """Compare Darboux termination conditions (A) with PVI special conditions (B).

    The dictionary is ``a_j = +-(2 theta_j + 1)``; all 16 sign choices are
    tried for (B) and the first satisfying one is recorded (``(1,1,1,1)``
    is tried first).  ``a`` in the row is the all-plus image.
    """
    th = tuple(complex(t) for t in thetas)
    a_plus = tuple(2 * t + 1 for t in th)
    darb = _darboux_label(th)
    pvi_case, signs = "none", (0, 0, 0, 0)
    for s in itertools.product((1, -1), repeat=4):
        rep = special_condition_pvi(PainleveParams(*(si * x for si, x in zip(s, a_plus))), window=window)
        if rep.any:
            pvi_case, signs = rep.label(), s
            break
    A, B = darb != "none", pvi_case != "none"
    verdict = Verdict.BOTH if A and B else Verdict.ONLY_A if A else Verdict.ONLY_B if B else Verdict.NEITHER
    return CorrespondenceRow(th, a_plus, darb, pvi_case, signs, verdict)


def half_integer_lattice(radius: float = 3.0) -> Iterable[tuple[float, float, float, float]]:
    """All quadruples of multiples of 1/2 in ``[-radius, radius]``, in lexicographic order."""
    n = int(round(2 * radius))
    vals = [j / 2 for j in range(-n, n + 1)]
    return itertools.product(vals, repeat=4)


def correspondence_batch(quads: Iterable[Sequence[complex]]) -> list[CorrespondenceRow]:
    return [correspondence_scan(q) for q in quads]


def verdict_counts(rows: Sequence[CorrespondenceRow]) -> dict[str, int]:
    counts = {v.value: 0 for v in Verdict}
    for r in rows:
        counts[r.verdict.value] += 1
    return counts


def mismatches(rows: Sequence[CorrespondenceRow]) -> list[CorrespondenceRow]:
    return [r for r in rows if r.verdict in (Verdict.ONLY_A, Verdict.ONLY_B)]


CSV_COLUMNS = ("xi", "eta", "mu", "nu", "a0", "a1", "a2", "a3", "darboux_case", "pvi_case", "verdict")


def format_complex(z: complex) -> str:
    """``re+imj`` with shortest round-trip floats."""
    z = complex(z)
    sign = "+" if z.imag >= 0 or math.isnan(z.imag) else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}j"


def rows_to_csv(rows: Sequence[CorrespondenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([format_complex(x) for x in r.thetas] + [format_complex(x) for x in r.a]
                   + [r.darboux_case, r.pvi_case, r.verdict.value])
    return buf.getvalue()
