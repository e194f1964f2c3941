"""Yamada-Watanabe test-function machinery.

Given a modulus of continuity rho, the classical uniqueness argument for
non-Lipschitz coefficients runs through a sequence of levels

    1 = a_0 > a_1 > a_2 > ... > 0,
    integral over (a_k, a_{k-1}) of rho(z)^-2 dz = k,

and smooth even test functions phi_k that approximate |z| from below:
phi_k'' is a probability density on (a_k, a_{k-1}) capped by
2 k^-1 rho(z)^-2.  This module builds the levels and the test functions
numerically, evaluates the compensated-jump functional

    D_z phi(w) = phi(w + z) - phi(w) - phi'(w) z

integrated against a jump measure, and provides the divergence checks and
exponent arithmetic used by the hypothesis checker.

The concrete phi_k shape: phi_k''(x) = c_k * m_k(Q(x)) * rho(x)^-2 where
Q is the running rho^-2 mass from a_k and m_k is a C^2 smoothstep plateau
equal to 1 on the middle half of the *mass* range (k/4 <= Q <= 3k/4).
Placing the plateau in mass coordinates makes the normalization constant
exactly c_k = 4/(3k), uniformly below the 2/k cap, for every admissible
modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .errors import (
    DomainError,
    LevelExhaustionError,
    NormalizationCapError,
    QuadratureError,
)
from .measures import LevyMeasure

__all__ = [
    "Modulus",
    "PowerModulus",
    "LinearModulus",
    "LogOsgoodModulus",
    "TabulatedModulus",
    "OsgoodVerdict",
    "osgood_diverges",
    "level_sequence",
    "TestFunction",
    "build_test_function",
    "YwSequence",
    "compensated_action_integral",
    "lemma32_bound",
    "beta_window",
    "stable_vk",
    "Prop31Report",
    "verify_prop31",
]


# ---------------------------------------------------------------------------
# moduli of continuity
# ---------------------------------------------------------------------------


class Modulus:
    """Non-decreasing function on [0, inf) with value 0 at 0."""

    declared_concave: bool = False

    def __call__(self, z):
        raise NotImplementedError

    def inv_sq_integral(self, a: float, b: float) -> float:
        """Integral of rho(z)^-2 over [a, b], 0 < a <= b."""
        if not (0 < a <= b):
            raise DomainError("need 0 < a <= b")
        val, err = integrate.quad(lambda z: float(self(z)) ** -2, a, b, limit=200)
        return val

    def solve_level(self, b: float, target: float) -> float:
        """a in (0, b) with inv_sq_integral(a, b) = target, or raise if exhausted."""
        lo = b
        for _ in range(2000):
            lo *= 0.5
            if self.inv_sq_integral(lo, b) >= target:
                break
        else:
            raise LevelExhaustionError("rho^-2 integral converges near 0", k=-1)
        return optimize.brentq(
            lambda a: self.inv_sq_integral(a, b) - target, lo, b, xtol=1e-300, rtol=1e-13
        )

    def spot_check(self, grid=None) -> dict:
        """Monotonicity, vanishing at 0, and (if declared) concavity checks."""
        zs = np.geomspace(1e-9, 2.0, 200) if grid is None else np.asarray(grid)
        vals = np.asarray(self(zs), dtype=float)
        report = {
            "non_decreasing": bool(np.all(np.diff(vals) >= -1e-12 * np.abs(vals[1:]))),
            "vanishes_at_zero": bool(vals[0] <= 1e-6 * max(1.0, vals[-1])),
            "non_negative": bool(np.all(vals >= 0)),
        }
        if self.declared_concave:
            d2 = np.diff(vals, 2)
            scale = np.abs(vals).max()
            report["concave"] = bool(np.all(d2 <= 1e-9 * max(scale, 1.0)))
        return report


@dataclass(frozen=True)
class PowerModulus(Modulus):
    """rho(z) = scale * z^exponent."""

    exponent: float
    scale: float = 1.0
    declared_concave: bool = False

    def __post_init__(self):
        if self.exponent <= 0 or self.scale <= 0:
            raise DomainError("exponent and scale must be positive")

    def __call__(self, z):
        return self.scale * np.asarray(z, dtype=float) ** self.exponent

    def inv_sq_integral(self, a, b):
        if not (0 < a <= b):
            raise DomainError("need 0 < a <= b")
        g2 = 2.0 * self.exponent
        s2 = self.scale**-2
        if abs(g2 - 1.0) < 1e-14:
            return s2 * math.log(b / a)
        e = 1.0 - g2
        return s2 * (b**e - a**e) / e

    def mass_to(self, lo, z):
        """Vectorized inv_sq_integral(lo, z)."""
        z = np.asarray(z, dtype=float)
        g2 = 2.0 * self.exponent
        s2 = self.scale**-2
        if abs(g2 - 1.0) < 1e-14:
            return s2 * np.log(z / lo)
        e = 1.0 - g2
        return s2 * (z**e - lo**e) / e

    def mass_inverse(self, lo, q):
        """z with mass_to(lo, z) = q."""
        q = np.asarray(q, dtype=float)
        g2 = 2.0 * self.exponent
        s2 = self.scale**-2
        if abs(g2 - 1.0) < 1e-14:
            return lo * np.exp(q / s2)
        e = 1.0 - g2
        return (lo**e + q * e / s2) ** (1.0 / e)

    def solve_level(self, b, target):
        g2 = 2.0 * self.exponent
        if abs(g2 - 1.0) < 1e-14:
            return b * math.exp(-target * self.scale**2)
        e = 1.0 - g2
        base = b**e - target * e * self.scale**2
        if base <= 0.0:
            raise LevelExhaustionError("rho^-2 integral converges near 0", k=-1)
        return base ** (1.0 / e)


@dataclass(frozen=True)
class LinearModulus(Modulus):
    """rho(z) = slope * z (the Lipschitz modulus)."""

    slope: float = 1.0
    declared_concave: bool = True

    def __post_init__(self):
        if self.slope <= 0:
            raise DomainError("slope must be positive")
        object.__setattr__(self, "_power", PowerModulus(1.0, self.slope))

    def __call__(self, z):
        return self.slope * np.asarray(z, dtype=float)

    def inv_sq_integral(self, a, b):
        return self._power.inv_sq_integral(a, b)

    def mass_to(self, lo, z):
        return self._power.mass_to(lo, z)

    def mass_inverse(self, lo, q):
        return self._power.mass_inverse(lo, q)

    def solve_level(self, b, target):
        return self._power.solve_level(b, target)


@dataclass(frozen=True)
class LogOsgoodModulus(Modulus):
    """rho(z) = scale * z * (1 - ln z) for z <= 1, constant scale beyond.

    Non-decreasing, concave, vanishes at 0, and the Osgood integral of
    1/rho diverges while z alone would make it converge: the standard
    non-Lipschitz drift modulus.
    """

    scale: float = 1.0
    declared_concave: bool = True

    def __post_init__(self):
        if self.scale <= 0:
            raise DomainError("scale must be positive")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = np.where(z > 0, z * (1.0 - np.log(np.where(z > 0, z, 1.0))), 0.0)
        return self.scale * np.where(z >= 1.0, 1.0, inner)


@dataclass(frozen=True, eq=False)
class TabulatedModulus(Modulus):
    """Modulus given by linear interpolation between knots.

    Below the first knot the modulus continues as the matched power of the
    first segment (log-log slope), so Osgood behavior near zero is defined.
    """

    knots: np.ndarray
    values: np.ndarray
    declared_concave: bool = False

    def __post_init__(self):
        kn = np.asarray(self.knots, dtype=float)
        va = np.asarray(self.values, dtype=float)
        if kn.ndim != 1 or kn.shape != va.shape or kn.size < 2:
            raise DomainError("knots and values must be 1-d arrays of equal length >= 2")
        if kn[0] <= 0 or np.any(np.diff(kn) <= 0):
            raise DomainError("knots must be strictly increasing and positive")
        if np.any(va <= 0):
            raise DomainError("modulus values must be positive at the knots")
        object.__setattr__(self, "knots", kn)
        object.__setattr__(self, "values", va)

    def head_exponent(self) -> float:
        k, v = self.knots, self.values
        return math.log(v[1] / v[0]) / math.log(k[1] / k[0])

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = np.interp(z, self.knots, self.values)
        below = (z < self.knots[0]) & (z > 0)
        if np.any(below):
            m = self.head_exponent()
            out = np.where(below, self.values[0] * (z / self.knots[0]) ** m, out)
        return np.where(z <= 0, 0.0, out)


# ---------------------------------------------------------------------------
# Osgood divergence checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OsgoodVerdict:
    verdict: str  # diverges | converges | inconclusive
    exponent: float  # the e of integral rho^-e near 0
    analysis: dict

    @property
    def diverges(self) -> bool:
        return self.verdict == "diverges"


_KINDS = {"r-integral": 1.0, "rho-squared-integral": 2.0}


def osgood_diverges(modulus: Modulus, kind="rho-squared-integral") -> OsgoodVerdict:
    """Does the integral of rho(z)^-e diverge at 0+?

    ``kind`` is 'r-integral' (e=1), 'rho-squared-integral' (e=2), or a
    numeric exponent e > 0 (e.g. alpha/(alpha-1) for the stable-noise
    criterion).  Parametric families are decided by exponent arithmetic;
    tabulated moduli by the trend of partial integrals on shrinking dyadic
    intervals, with an inconclusive fallback.
    """
    e = _KINDS[kind] if isinstance(kind, str) else float(kind)
    if e <= 0:
        raise DomainError("exponent must be positive")
    if isinstance(modulus, (PowerModulus, LinearModulus)):
        gamma = modulus.exponent if isinstance(modulus, PowerModulus) else 1.0
        product = gamma * e
        return OsgoodVerdict(
            "diverges" if product >= 1.0 else "converges",
            e,
            {"gamma": gamma, "gamma_times_e": product, "threshold": 1.0},
        )
    if isinstance(modulus, LogOsgoodModulus):
        # rho ~ z log(1/z): the -e integral diverges iff e >= 1
        return OsgoodVerdict("diverges" if e >= 1.0 else "converges", e, {"family": "log-osgood"})
    if isinstance(modulus, TabulatedModulus):
        m = modulus.head_exponent()
        product = m * e
        if abs(product - 1.0) > 0.05:
            return OsgoodVerdict(
                "diverges" if product >= 1.0 else "converges",
                e,
                {"head_exponent": m, "gamma_times_e": product},
            )
        return OsgoodVerdict("inconclusive", e, {"head_exponent": m, "gamma_times_e": product})
    # generic fallback: partial integrals on shrinking dyadic intervals
    b = 1e-2
    parts = []
    for j in range(12):
        hi, lo = b * 2.0**-j, b * 2.0 ** -(j + 1)
        val, _ = integrate.quad(lambda z: float(modulus(z)) ** -e, lo, hi, limit=100)
        parts.append(val)
    ratios = np.array(parts[1:]) / np.array(parts[:-1])
    analysis = {"partial_integrals": parts, "ratios": ratios.tolist()}
    if np.all(ratios >= 0.98):
        return OsgoodVerdict("diverges", e, analysis)
    if np.all(ratios <= 0.9):
        return OsgoodVerdict("converges", e, analysis)
    return OsgoodVerdict("inconclusive", e, analysis)


# ---------------------------------------------------------------------------
# levels
# ---------------------------------------------------------------------------


def level_sequence(modulus: Modulus, count: int) -> np.ndarray:
    """Levels a_0 = 1 > a_1 > ... > a_count with rho^-2 mass k on step k.

    Closed-form recursion for power-type moduli, monotone bracketing plus
    Brent's method otherwise (relative tolerance 1e-12 or better).  Raises
    LevelExhaustionError naming the failing k when the rho^-2 integral
    converges at 0 and the recursion cannot continue.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    levels = [1.0]
    for k in range(1, count + 1):
        try:
            a = modulus.solve_level(levels[-1], float(k))
        except LevelExhaustionError as exc:
            raise LevelExhaustionError(
                f"level recursion exhausted at k={k}: rho^-2 integral converges", k=k
            ) from exc
        if not (0.0 < a < levels[-1]):
            raise LevelExhaustionError(f"level recursion exhausted at k={k}", k=k)
        levels.append(a)
    return np.array(levels)


# ---------------------------------------------------------------------------
# smoothstep plateau in mass coordinates
# ---------------------------------------------------------------------------


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u**2)


def _smoothstep_integral(u):
    u = np.clip(u, 0.0, 1.0)
    return u**4 * (2.5 - 3.0 * u + u**2)  # integral of _smoothstep from 0


def _plateau(q, k):
    """Bump m_k as a function of the mass coordinate q in [0, k]."""
    q = np.asarray(q, dtype=float)
    rising = _smoothstep(4.0 * q / k)
    falling = _smoothstep(4.0 * (k - q) / k)
    return np.where(q <= 0.25 * k, rising, np.where(q >= 0.75 * k, falling, 1.0))


def _plateau_mass(q, k):
    """Integral of the bump from 0 to q; total is 3k/4."""
    q = np.asarray(q, dtype=float)
    lo = 0.25 * k * _smoothstep_integral(4.0 * q / k)
    mid = 0.125 * k + (q - 0.25 * k)
    hi = 0.625 * k + 0.25 * k * (0.5 - _smoothstep_integral(4.0 * (k - q) / k))
    return np.where(q <= 0.25 * k, lo, np.where(q >= 0.75 * k, hi, mid))


# ---------------------------------------------------------------------------
# cumulative Gauss-Legendre helper
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _leggauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


class _Cumulative:
    """Cumulative integral of a vectorized smooth function via panel GL."""

    def __init__(self, fn, edges, order=16):
        self.fn = fn
        self.edges = np.asarray(edges, dtype=float)
        self.order = order
        x, w = _leggauss(order)
        a, b = self.edges[:-1], self.edges[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes = mid[None, :] + half[None, :] * x[:, None]
        panel = (w[:, None] * np.asarray(fn(nodes))).sum(axis=0) * half
        self.cum = np.concatenate(([0.0], np.cumsum(panel)))

    @property
    def total(self):
        return float(self.cum[-1])

    def integral_to(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.edges.size - 2)
        a = self.edges[idx]
        gx, gw = _leggauss(self.order)
        mid, half = 0.5 * (a + x), 0.5 * (x - a)
        nodes = mid[None, ...] + half[None, ...] * gx.reshape((-1,) + (1,) * x.ndim)
        part = (gw.reshape((-1,) + (1,) * x.ndim) * np.asarray(self.fn(nodes))).sum(axis=0) * half
        return self.cum[idx] + part


def _piece_edges(lo, hi, inner, per_piece=24):
    pieces = np.concatenate(([lo], np.asarray(inner, dtype=float), [hi]))
    out = [np.array([lo])]
    for a, b in zip(pieces[:-1], pieces[1:]):
        out.append(np.linspace(a, b, per_piece + 1)[1:])
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------


class TestFunction:
    """One member phi_k of the uniqueness test-function sequence.

    Even, twice continuously differentiable, 0 <= phi' <= 1 on the positive
    axis, phi'' supported on (lower, upper) = (a_k, a_{k-1}), and
    phi(z) = |z| - offset for |z| >= upper.
    """

    def __init__(self, modulus: Modulus, k: int, lower: float, upper: float):
        self.modulus = modulus
        self.k = int(k)
        self.lower = float(lower)
        self.upper = float(upper)
        self.weight = 4.0 / (3.0 * k)  # normalization c_k, always <= 2/k
        if self.weight > 2.0 / k + 1e-15:
            raise NormalizationCapError("normalization exceeded the 2/k cap")

        if hasattr(modulus, "mass_to"):
            self._mass = lambda z: modulus.mass_to(self.lower, z)
            self._mass_inv = lambda q: modulus.mass_inverse(self.lower, q)
        else:
            edges = _piece_edges(self.lower, self.upper, [], per_piece=160)
            cum = _Cumulative(lambda z: np.asarray(modulus(z), dtype=float) ** -2.0, edges)
            scale = cum.total / k  # absorb quadrature drift so the mass spans [0, k]
            self._mass = lambda z, c=cum, s=scale: c.integral_to(z) / s
            self._mass_inv = self._numeric_mass_inverse

        q_quarter = float(self._mass_inv(0.25 * k))
        q_three = float(self._mass_inv(0.75 * k))
        self.kinks = (self.lower, q_quarter, q_three, self.upper)  # phi'' kink abscissae
        edges = _piece_edges(self.lower, self.upper, [q_quarter, q_three], per_piece=24)
        self._cum_dphi = _Cumulative(lambda z: self._dphi_pos(z), edges)
        self.offset = self.upper - (self._cum_dphi.total)  # |z| - phi(z) beyond support

    def _numeric_mass_inverse(self, q):
        q = np.atleast_1d(np.asarray(q, dtype=float))
        out = np.empty_like(q)
        for i, qi in enumerate(q):
            out[i] = optimize.brentq(
                lambda z: float(self._mass(z)) - qi, self.lower, self.upper, rtol=1e-14
            )
        return out if out.size > 1 else float(out[0])

    # second derivative: the density psi_k evaluated at |x|
    def second_derivative(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        inside = (x > self.lower) & (x < self.upper)
        out = np.zeros_like(x)
        if np.any(inside):
            xi = x[inside]
            q = np.asarray(self._mass(xi), dtype=float)
            rho = np.asarray(self.modulus(xi), dtype=float)
            out[inside] = self.weight * _plateau(q, self.k) * rho**-2
        return out

    def psi(self, x):
        """The density phi''(|x|) restricted to the support; alias used in checks."""
        return self.second_derivative(x)

    def _dphi_pos(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= self.upper, 1.0, 0.0)
        inside = (x > self.lower) & (x < self.upper)
        if np.any(inside):
            q = np.asarray(self._mass(x[inside]), dtype=float)
            out = out.copy()
            out[inside] = self.weight * _plateau_mass(q, self.k)
        return out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * self._dphi_pos(np.abs(x))

    def value(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        inside = (x > self.lower) & (x < self.upper)
        if np.any(inside):
            out[inside] = self._cum_dphi.integral_to(x[inside])
        beyond = x >= self.upper
        out[beyond] = x[beyond] - self.offset
        return out

    def compensated_difference(self, w, z):
        """D_z phi(w) = phi(w+z) - phi(w) - phi'(w) z."""
        return self.value(w + z) - self.value(w) - self.derivative(w) * z


def build_test_function(modulus: Modulus, k: int, levels=None) -> TestFunction:
    """Construct phi_k (levels are computed on demand if not supplied)."""
    if levels is None:
        levels = level_sequence(modulus, k)
    if len(levels) <= k:
        raise DomainError("levels must extend through index k")
    return TestFunction(modulus, k, levels[k], levels[k - 1])


@dataclass
class YwSequence:
    """Levels plus the first K test functions for one modulus."""

    modulus: Modulus
    levels: np.ndarray
    entries: list = field(default_factory=list)

    @classmethod
    def build(cls, modulus: Modulus, count: int) -> "YwSequence":
        levels = level_sequence(modulus, count)
        entries = [TestFunction(modulus, k, levels[k], levels[k - 1]) for k in range(1, count + 1)]
        return cls(modulus, levels, entries)

    def __getitem__(self, k: int) -> TestFunction:
        if not (1 <= k <= len(self.entries)):
            raise DomainError(f"k={k} outside built range 1..{len(self.entries)}")
        return self.entries[k - 1]


# ---------------------------------------------------------------------------
# compensated jump integrals
# ---------------------------------------------------------------------------


def compensated_action_integral(
    entry: TestFunction,
    w: float,
    slope: float,
    measure: LevyMeasure,
    atol: float = 1e-9,
) -> float:
    """Integral over (0, inf) of D_{slope * z} phi(w) nu(dz).

    This is the property-(iv) functional for a multiplicative jump action
    l0(x, y, z) = (h0(x) - h0(y)) z with slope = h0(x) - h0(y) and w = x - y.
    Monotonicity of the action means slope and w share a sign; the integrand
    is mapped to the positive axis by the evenness of phi.

    The small-z piece is evaluated through the Taylor-remainder form
    D_v phi(w) = v^2 * integral of phi''(w + t v)(1 - t) dt, which is free
    of the catastrophic cancellation of the direct difference, combined
    with an algebraic-weight quadrature when the density is singular at 0.
    Beyond the support crossing the test function is exactly linear, so the
    far tail reduces to closed tail functionals of the measure.
    """
    if slope == 0.0:
        return 0.0
    if w * slope < 0:
        raise DomainError("slope and w must share a sign (monotone jump action)")
    w, slope = abs(float(w)), abs(float(slope))
    if w >= entry.upper:
        return 0.0  # phi is exactly linear on [upper, inf); D vanishes

    if measure.density(np.array([1.0])) is None:
        # purely atomic: point mass only
        return measure.mass * float(entry.compensated_difference(w, slope * measure.location))

    z_top = (entry.upper - w) / slope
    # stay inside one smooth piece of phi'' for the remainder quadrature
    gap = min(kk - w for kk in entry.kinks if kk - w > 0)
    z1 = min(0.5 * gap / slope, 0.25 * z_top)
    crossings = [c for c in ((kk - w) / slope for kk in entry.kinks) if z1 < c < z_top]

    gx, gw_ = _leggauss(32)
    t_nodes = 0.5 * (gx + 1.0)
    t_weights = 0.5 * gw_ * (1.0 - t_nodes)

    def remainder_ratio(z):
        # D_{slope z} phi(w) / (slope z)^2, cancellation-free
        v = slope * z
        vals = entry.second_derivative(w + t_nodes * v)
        return float((t_weights * vals).sum())

    head = measure.head_power()
    if head is not None and head <= -1.0:
        # integrand ~ z^(head+2) near 0: peel the weight off a smooth factor
        def g(z):
            if z <= 0.0:
                z = z1 * 1e-10
            return remainder_ratio(z) * slope**2 * float(measure.density(z)) * z ** (-head)

        piece1, _ = integrate.quad(
            g, 0.0, z1, weight="alg", wvar=(head + 2.0, 0.0),
            epsabs=0.25 * atol, epsrel=1e-10, limit=300,
        )
    else:
        piece1, _ = integrate.quad(
            lambda z: remainder_ratio(z) * (slope * z) ** 2 * float(measure.density(z)),
            0.0, z1, epsabs=0.25 * atol, epsrel=1e-10, limit=300,
        )

    piece2, _ = integrate.quad(
        lambda z: float(entry.compensated_difference(w, slope * z)) * float(measure.density(z)),
        z1, z_top, points=crossings or None, epsabs=0.25 * atol, epsrel=1e-10, limit=300,
    )
    body = piece1 + piece2
    if not math.isfinite(body):
        raise QuadratureError("compensated action integral did not converge")

    # beyond z_top the test function is linear: D = A + B z exactly
    a_coef = w - entry.offset - float(entry.value(w))
    b_coef = slope * (1.0 - float(entry.derivative(w)))
    tail = a_coef * measure.tail_mass(z_top) + b_coef * measure.first_tail_moment(z_top)
    return body + tail


def lemma32_bound(
    entry: TestFunction,
    jump_slope: float,
    x: float,
    y: float,
    h: float,
    nu0: LevyMeasure,
    p: float,
    envelope_scale: float = 1.0,
) -> tuple[float, float]:
    """(lhs, rhs) of the small/large jump splitting bound.

    lhs is the compensated action integral for the multiplicative action
    (h0(x) - h0(y)) z with jump_slope = h0(x) - h0(y); rhs is

        k^-1 rho(|x-y|)^(4p-2) 1{|x-y| <= a_{k-1}} * integral of f^2 on {f <= h}
        + rho(|x-y|)^(2p)  1{|x-y| <= a_{k-1}} * integral of f on {f > h}

    with the linear envelope f(z) = envelope_scale * z, whose split moments
    reduce to H(h/envelope_scale) and G(h/envelope_scale).
    """
    if h <= 0:
        raise DomainError("h must be positive")
    w = x - y
    lhs = compensated_action_integral(entry, w, jump_slope, nu0)
    if abs(w) > entry.upper or w == 0.0:
        return lhs, 0.0
    rho_w = float(entry.modulus(abs(w)))
    cut = h / envelope_scale
    small = envelope_scale**2 * nu0.truncated_second_moment(cut)
    large = envelope_scale * nu0.first_tail_moment(cut)
    rhs = (1.0 / entry.k) * rho_w ** (4.0 * p - 2.0) * small + rho_w ** (2.0 * p) * large
    return lhs, rhs


# ---------------------------------------------------------------------------
# exponent arithmetic
# ---------------------------------------------------------------------------


def beta_window(p, alpha):
    """The open interval ((1-2p)/(2-alpha), p/(alpha-1)), or None when empty.

    Nonempty exactly when p > 1 - 1/alpha.  Works with floats or Fractions;
    no tolerance is applied.
    """
    lo = (1 - 2 * p) / (2 - alpha)
    hi = p / (alpha - 1)
    if lo < hi:
        return (lo, hi)
    return None


def stable_vk(alpha: float, k: int) -> float:
    """The threshold sequence k^(1/(2(2-alpha))).

    Grows to infinity while v_k^(2-alpha)/k = k^(-1/2) tends to zero, the
    two requirements of the boundary-exponent argument for stable noise.
    """
    if not (1.0 < alpha < 2.0):
        raise DomainError("alpha must lie strictly between 1 and 2")
    if k < 1:
        raise DomainError("k must be >= 1")
    return float(k) ** (1.0 / (2.0 * (2.0 - alpha)))


# ---------------------------------------------------------------------------
# property verification
# ---------------------------------------------------------------------------


@dataclass
class Prop31Report:
    """Numerical verdicts for the four test-function properties."""

    monotone_limit: dict
    derivative_bounds: dict
    diffusion_collapse: dict
    jump_collapse: dict

    @property
    def all_passed(self) -> bool:
        return all(
            d.get("passed", False)
            for d in (
                self.monotone_limit,
                self.derivative_bounds,
                self.diffusion_collapse,
                self.jump_collapse,
            )
        )


def verify_prop31(
    seq: YwSequence,
    sigma,
    jump_level,
    nu0: LevyMeasure | None,
    box: float,
    sample_count: int = 200,
    seed: int = 20250810,
    iv_witnesses: int = 12,
) -> Prop31Report:
    """Check the four uniqueness-criterion properties on random witnesses.

    sigma is the diffusion coefficient; jump_level is h0 for the
    multiplicative action h0(x) z (pass None to skip the jump property).
    Witnesses (x, y) are drawn uniformly on [-box, box]^2.  Property (iii)
    checks sup phi_k''(x-y) (sigma(x)-sigma(y))^2 against its 2/k cap;
    property (iv) checks that the compensated action integral decreases in
    k on the worst witnesses.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    xs = rng.uniform(-box, box, sample_count)
    ys = rng.uniform(-box, box, sample_count)
    ks = [e.k for e in seq.entries]

    # (i) monotone convergence to |z|
    zgrid = np.linspace(-2.0, 2.0, 1001)
    prev = None
    mono_ok, gap_ok = True, True
    for e in seq.entries:
        vals = e.value(zgrid)
        if np.any(vals > np.abs(zgrid) + 1e-12):
            mono_ok = False
        if prev is not None and np.any(vals < prev - 1e-12):
            mono_ok = False
        if np.any(np.abs(zgrid) - vals > e.upper + 1e-12):
            gap_ok = False
        prev = vals
    monotone = {"passed": bool(mono_ok and gap_ok), "grid_points": zgrid.size}

    # (ii) derivative bounds and convexity
    d_ok = True
    for e in seq.entries:
        d = e.derivative(zgrid)
        if np.any((zgrid >= 0) & ((d < -1e-12) | (d > 1.0 + 1e-12))):
            d_ok = False
        if np.any((zgrid <= 0) & ((d > 1e-12) | (d < -1.0 - 1e-12))):
            d_ok = False
        if np.any(e.second_derivative(zgrid) < -1e-12):
            d_ok = False
    deriv = {"passed": bool(d_ok)}

    # (iii) phi_k''(x-y) (sigma(x)-sigma(y))^2 <= 2/k
    sig_gap = (np.asarray(sigma(xs)) - np.asarray(sigma(ys))) ** 2
    worst_iii = {}
    iii_ok = True
    for e in seq.entries:
        vals = e.second_derivative(xs - ys) * sig_gap
        cap = 2.0 / e.k
        worst = float(vals.max(initial=0.0))
        worst_iii[e.k] = worst
        if worst > cap * (1.0 + 1e-9) + 1e-12:
            iii_ok = False
    diffusion = {"passed": bool(iii_ok), "sup_by_k": worst_iii, "cap": "2/k"}

    # (iv) integral of D phi against nu0 decreasing in k toward 0
    jump = {"passed": True, "skipped": True}
    if jump_level is not None and nu0 is not None:
        idx = rng.choice(sample_count, size=min(iv_witnesses, sample_count), replace=False)
        sups = []
        for e in seq.entries:
            vals = []
            for i in idx:
                x, y = float(xs[i]), float(ys[i])
                slope = float(jump_level(x)) - float(jump_level(y))
                if (x - y) * slope < 0:
                    raise DomainError("jump level must be non-decreasing")
                vals.append(compensated_action_integral(e, x - y, slope, nu0))
            sups.append(max(vals) if vals else 0.0)
        sups = np.array(sups)
        k_arr = np.array(ks, dtype=float)
        # trend check: the last value well below the first, no large rebound
        decreasing = sups[-1] <= 0.5 * max(sups[0], 1e-300) or sups[-1] < 1e-9
        jump = {
            "passed": bool(decreasing),
            "skipped": False,
            "sup_by_k": dict(zip(ks, sups.tolist())),
            "ratio_last_first": float(sups[-1] / sups[0]) if sups[0] > 0 else 0.0,
            "witnesses": int(idx.size),
        }

    return Prop31Report(monotone, deriv, diffusion, jump)
