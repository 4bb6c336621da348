"""Structured entire functions: exp-quadratics, polynomial multiples of them,
and truncated Taylor series with a declared coefficient envelope.

Every function type exposes the same small surface:

``f(z)``
    value at ``z`` (scalar or ndarray).
``f.log(z)``
    complex logarithm ``log|f(z)| + i arg f(z)``. For the exp-quadratic
    families this is computed without ever forming ``exp``, so it is the
    overflow-safe way to work with large arguments.
``f.linear_hint``
    a size scale for the linear growth, used to seed truncation radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammaln, logsumexp

from .errors import InsufficientCoefficients, RadiusExceeded

__all__ = [
    "ExpQuadratic",
    "PolyTimesExpQuad",
    "TaylorSeries",
    "GrowthProfile",
    "Exactness",
    "EntireFunction",
    "evaluate",
    "log_eval",
    "order_type",
    "max_modulus",
    "kernel_function",
    "expm1_quadratic_over_z",
    "compose_affine",
    "times_exp",
    "as_exp_quadratic",
    "taylor_type_at_order",
]


def _scalar_or_array(out, z):
    if np.ndim(z) == 0:
        return complex(out)
    return out


class Exactness(str, Enum):
    EXACT = "Exact"
    ESTIMATED = "Estimated"


@dataclass(frozen=True)
class GrowthProfile:
    """Order and type of an entire function.

    ``order`` is ``math.inf`` for infinite order; ``type`` is ``None`` when it
    is undefined (infinite order, or order zero where every polynomial has
    infinite type).
    """

    order: float
    type: float | None
    exactness: Exactness

    def to_json(self) -> dict:
        return {
            "order": "inf" if math.isinf(self.order) else self.order,
            "type": self.type,
            "exactness": self.exactness.value,
        }


@dataclass(frozen=True)
class ExpQuadratic:
    """``exp(a0 + a1 z + a2 z^2)``."""

    a0: complex = 0j
    a1: complex = 0j
    a2: complex = 0j

    def __post_init__(self):
        for name in ("a0", "a1", "a2"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    def exponent(self, z):
        z = np.asarray(z, dtype=complex)
        return self.a0 + z * (self.a1 + self.a2 * z)

    def log(self, z):
        return _scalar_or_array(self.exponent(z), z)

    def __call__(self, z):
        return _scalar_or_array(np.exp(self.exponent(z)), z)

    @property
    def linear_hint(self) -> float:
        return abs(self.a1)

    def scaled(self, c: complex) -> "ExpQuadratic":
        """``c * f``, realised as a shift of the constant coefficient."""
        return ExpQuadratic(self.a0 + np.log(complex(c)), self.a1, self.a2)


@dataclass(frozen=True)
class PolyTimesExpQuad:
    """``Q(z) * exp(a0 + a1 z + a2 z^2)`` with ``Q`` given in ascending order."""

    poly: tuple
    core: ExpQuadratic = field(default_factory=ExpQuadratic)

    def __post_init__(self):
        coeffs = [complex(c) for c in self.poly]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs or all(c == 0 for c in coeffs):
            raise ValueError("polynomial factor must not be identically zero")
        object.__setattr__(self, "poly", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    def poly_value(self, z):
        return P.polyval(np.asarray(z, dtype=complex), np.array(self.poly))

    def log(self, z):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(self.poly_value(z)) + self.core.exponent(z)
        return _scalar_or_array(out, z)

    def __call__(self, z):
        out = self.poly_value(z) * np.exp(self.core.exponent(z))
        return _scalar_or_array(out, z)

    @property
    def linear_hint(self) -> float:
        return abs(self.core.a1) + self.degree


@dataclass(frozen=True)
class TaylorSeries:
    """Truncated Taylor series ``sum_n c_n z^n`` with a coefficient envelope.

    The caller declares ``|c_n| <= C * gamma**n / sqrt(n!)`` for every ``n``
    beyond the stored coefficients. Evaluation is refused outside the
    certified radius, the largest ``r`` at which the envelope tail is below
    ``rtol`` times ``max(1, sum |c_n| r^n)``.
    """

    coeffs: tuple
    envelope_c: float
    envelope_gamma: float
    rtol: float = 1e-13
    certified_radius: float = field(init=False)

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("need at least one coefficient")
        if self.envelope_c < 0 or self.envelope_gamma <= 0:
            raise ValueError("envelope constants must be positive")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "certified_radius", self._find_certified_radius())

    @property
    def n_terms(self) -> int:
        return len(self.coeffs)

    @property
    def linear_hint(self) -> float:
        return abs(self.coeffs[1]) if len(self.coeffs) > 1 else 0.0

    def log_tail_bound(self, r: float) -> float:
        """Log of ``sum_{n >= N} C (gamma r)^n / sqrt(n!)``."""
        if r == 0 or self.envelope_c == 0:
            return -math.inf
        N = self.n_terms
        x = self.envelope_gamma * r
        n_end = int(max(N + 64, 4 * x * x + 64))
        n = np.arange(N, n_end + 1, dtype=float)
        terms = math.log(self.envelope_c) + n * math.log(x) - 0.5 * gammaln(n + 1)
        return float(logsumexp(terms))

    def tail_bound(self, r: float) -> float:
        return math.exp(self.log_tail_bound(r))

    def log_majorant(self, r: float) -> float:
        """Log of ``sum |c_n| r^n`` over the stored coefficients."""
        mags = np.abs(np.array(self.coeffs))
        nz = mags > 0
        if not nz.any():
            return -math.inf
        n = np.arange(self.n_terms)[nz]
        if r == 0:
            return math.log(mags[0]) if mags[0] > 0 else -math.inf
        return float(logsumexp(np.log(mags[nz]) + n * math.log(r)))

    def _certified(self, r: float) -> bool:
        return self.log_tail_bound(r) <= math.log(self.rtol) + max(0.0, self.log_majorant(r))

    def _find_certified_radius(self) -> float:
        lo, hi = 0.0, 1.0
        if not self._certified(1e-300):
            return 0.0
        while self._certified(hi):
            lo, hi = hi, 2 * hi
            if hi > 1e6:
                return lo
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self._certified(mid):
                lo = mid
            else:
                hi = mid
        return lo

    def _check_radius(self, z):
        rmax = float(np.max(np.abs(z))) if np.size(z) else 0.0
        if rmax > self.certified_radius * (1 + 1e-12):
            raise RadiusExceeded(
                f"|z| = {rmax:.6g} exceeds certified radius {self.certified_radius:.6g}"
            )

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_radius(z)
        out = P.polyval(z, np.array(self.coeffs))
        return _scalar_or_array(out, z)

    def log(self, z):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(np.asarray(self(z), dtype=complex))
        return _scalar_or_array(out, z)


EntireFunction = Union[ExpQuadratic, PolyTimesExpQuad, TaylorSeries]


def evaluate(f: EntireFunction, z):
    return f(z)


def log_eval(f: EntireFunction, z):
    return f.log(z)


def kernel_function(w: complex, alpha: float) -> ExpQuadratic:
    """Reproducing kernel ``k_w(z) = exp(alpha * conj(w) * z)``."""
    return ExpQuadratic(0, alpha * np.conj(complex(w)), 0)


def as_exp_quadratic(f: EntireFunction) -> ExpQuadratic | None:
    """Return ``f`` as an ExpQuadratic when it is one in disguise, else None."""
    if isinstance(f, ExpQuadratic):
        return f
    if isinstance(f, PolyTimesExpQuad) and f.degree == 0:
        return f.core.scaled(f.poly[0])
    return None


def compose_affine(f: EntireFunction, b: complex, lam: complex) -> EntireFunction:
    """``z -> f(b + lam z)`` for the closed exp-quadratic families."""
    b, lam = complex(b), complex(lam)
    if isinstance(f, ExpQuadratic):
        return ExpQuadratic(
            f.a0 + f.a1 * b + f.a2 * b * b,
            (f.a1 + 2 * f.a2 * b) * lam,
            f.a2 * lam * lam,
        )
    if isinstance(f, PolyTimesExpQuad):
        inner = np.array([b, lam])
        # Horner in polynomial arithmetic: Q(b + lam z)
        acc = np.array([f.poly[-1]])
        for c in reversed(f.poly[:-1]):
            acc = P.polyadd(P.polymul(acc, inner), [c])
        return PolyTimesExpQuad(tuple(acc), compose_affine(f.core, b, lam))
    raise TypeError(f"affine composition not supported for {type(f).__name__}")


def times_exp(f: EntireFunction, e: ExpQuadratic) -> EntireFunction:
    """Product of ``f`` with an exp-quadratic factor."""
    if isinstance(f, ExpQuadratic):
        return ExpQuadratic(f.a0 + e.a0, f.a1 + e.a1, f.a2 + e.a2)
    if isinstance(f, PolyTimesExpQuad):
        return PolyTimesExpQuad(f.poly, times_exp(f.core, e))
    raise TypeError(f"exp-quadratic product not supported for {type(f).__name__}")


def expm1_quadratic_over_z(c: complex, terms: int = 200) -> TaylorSeries:
    """``(exp(c z^2) - 1) / z`` as a TaylorSeries with exact coefficients.

    The coefficient of ``z^(2k-1)`` is ``c^k / k!``. With ``gamma = sqrt(2|c|)``
    the ratio ``|c_n| sqrt(n!) / gamma^n`` is decreasing in ``k``, so its value
    at ``k = 1``, ``sqrt(|c|/2)``, is a valid envelope constant for every n.
    """
    c = complex(c)
    if c == 0:
        raise ValueError("c must be nonzero")
    coeffs = np.zeros(2 * terms, dtype=complex)
    k = np.arange(1, terms + 1)
    # c^k / k! in log space, then restore the phase
    mag = np.exp(k * math.log(abs(c)) - gammaln(k + 1))
    coeffs[2 * k - 1] = mag * np.exp(1j * k * np.angle(c))
    return TaylorSeries(
        tuple(coeffs),
        envelope_c=math.sqrt(abs(c) / 2),
        envelope_gamma=math.sqrt(2 * abs(c)),
    )


def _order_from_exponent(a1: complex, a2: complex) -> GrowthProfile:
    if a2 != 0:
        return GrowthProfile(2.0, abs(a2), Exactness.EXACT)
    if a1 != 0:
        return GrowthProfile(1.0, abs(a1), Exactness.EXACT)
    return GrowthProfile(0.0, None, Exactness.EXACT)


def _taylor_fit_points(coeffs: Sequence[complex]) -> tuple[np.ndarray, np.ndarray]:
    mags = np.abs(np.asarray(coeffs, dtype=complex))
    # subnormal magnitudes carry too few significant bits to fit
    idx = np.nonzero(mags > np.finfo(float).tiny)[0]
    idx = idx[idx >= 2]
    if idx.size < 16:
        raise InsufficientCoefficients(
            f"need at least 16 nonzero Taylor coefficients, got {idx.size}"
        )
    top = idx[-max(4, idx.size // 4):]
    n = top.astype(float)
    return n, -np.log(mags[top])


def _fit_type(n: np.ndarray, y: np.ndarray, rho: float) -> float:
    # log(1/|c_n|) = (n/rho) log n - (n/rho) log(e sigma rho) + C log n + D
    resid = y - n * np.log(n) / rho
    X = np.column_stack([n, np.log(n), np.ones_like(n)])
    B = np.linalg.lstsq(X, resid, rcond=None)[0][0]
    return float(math.exp(-B * rho - 1.0) / rho)


def taylor_type_at_order(coeffs: Sequence[complex], rho: float) -> float:
    """Type estimate for a series assumed to have order ``rho``."""
    n, y = _taylor_fit_points(coeffs)
    return _fit_type(n, y, rho)


def order_type(f: EntireFunction) -> GrowthProfile:
    """Order and type of ``f``.

    Exact for the exp-quadratic families. For a TaylorSeries both are
    estimated from the top quartile of nonzero coefficients by least squares
    on the Stirling-form model ``log(1/|c_n|) ~ (n/rho) log n - (n/rho)
    log(e sigma rho) + C log n + D``, whose leading term is the classical
    ``rho = limsup n log n / log(1/|c_n|)``.
    """
    if isinstance(f, ExpQuadratic):
        return _order_from_exponent(f.a1, f.a2)
    if isinstance(f, PolyTimesExpQuad):
        return _order_from_exponent(f.core.a1, f.core.a2)
    n, y = _taylor_fit_points(f.coeffs)
    X = np.column_stack([n * np.log(n), n, np.log(n), np.ones_like(n)])
    A = np.linalg.lstsq(X, y, rcond=None)[0][0]
    if A <= 0:
        return GrowthProfile(math.inf, None, Exactness.ESTIMATED)
    rho = float(1.0 / A)
    return GrowthProfile(rho, _fit_type(n, y, rho), Exactness.ESTIMATED)


def max_modulus(f: EntireFunction, r: float, n_theta: int = 64) -> float:
    """Lower bound for ``max |f(z)|`` on ``|z| = r`` from equispaced angles
    starting at ``theta = 0``."""
    if n_theta < 8:
        raise ValueError("n_theta must be at least 8")
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    z = r * np.exp(1j * theta)
    return float(np.exp(np.max(np.real(f.log(z)))))
