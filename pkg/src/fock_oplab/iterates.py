"""Powers ``W^n`` of a weighted composition operator and their limits.

With ``z0`` the fixed point of ``phi`` and ``w = z - z0`` one has
``phi_k(z) - z0 = lam^k w``. For ``psi = exp(g)`` with quadratic ``g`` this
collapses the product over ``k`` to

    (W^n f)(z) = psi(z0)^n exp(g'(z0) S1 w + a2 S2 w^2) f(phi_n(z)),

where ``S1 = (1 - lam^n)/(1 - lam)`` and ``S2 = (1 - lam^{2n})/(1 - lam^2)``.
Everything here is carried in log space.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .complexfn import EntireFunction, ExpQuadratic, TaylorSeries, as_exp_quadratic
from .errors import (
    DegenerateLambda,
    HypothesisViolated,
    NoFixedPoint,
    WrongMultiplierKind,
)
from .wcomp import AffineSymbol, Verdict, WeightedCompOp, classify

__all__ = [
    "LogComplex",
    "IterateCoeffs",
    "LimitData",
    "IterateImage",
    "phi_n",
    "iterate_coeffs",
    "iterate_apply",
    "iterate_apply_product",
    "scaled_iterate_apply",
    "iterate_expquad",
    "quadratic_gap",
    "limit_coefficients",
    "limit_function",
    "limit_operator_apply",
]

SLACK = 1e-12


@dataclass(frozen=True)
class LogComplex:
    """A complex number stored as its logarithm (imaginary part unwrapped
    where the computation provides it)."""

    log: complex

    @property
    def log_abs(self) -> float:
        return self.log.real

    @property
    def phase(self) -> float:
        return math.remainder(self.log.imag, 2 * math.pi)

    @property
    def value(self) -> complex:
        if self.log.real > 709:
            return complex(math.inf, 0.0)
        if self.log.real == -math.inf:
            return 0j
        return cmath.exp(self.log)

    def agrees(self, other: "LogComplex", rtol: float = 1e-10) -> bool:
        if self.log_abs == other.log_abs == -math.inf:
            return True
        scale = max(1.0, abs(self.log_abs), abs(other.log_abs))
        if abs(self.log_abs - other.log_abs) > rtol * scale:
            return False
        dphi = abs(math.remainder(self.log.imag - other.log.imag, 2 * math.pi))
        return dphi <= rtol * max(1.0, abs(self.log.imag), abs(other.log.imag))


def _exponent(psi, z):
    """Unwrapped log of an exp-quadratic, wrapped log otherwise."""
    if isinstance(psi, ExpQuadratic):
        return psi.exponent(z)
    return psi.log(z)


def _check_lambda(W: WeightedCompOp) -> ExpQuadratic:
    lam = W.lam
    if lam == 0 or lam == 1:
        raise DegenerateLambda(f"lambda = {lam} has no usable iterate expansion")
    if not abs(lam) < 1:
        raise HypothesisViolated("iterate expansion needs 0 < |lambda| < 1")
    eq = None if isinstance(W.psi, TaylorSeries) else as_exp_quadratic(W.psi)
    if eq is None:
        raise WrongMultiplierKind("closed-form iterates need an exp-quadratic multiplier")
    return eq


def phi_n(phi: AffineSymbol, n: int) -> AffineSymbol:
    """``phi`` composed with itself ``n`` times; ``n = 0`` is the identity."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return AffineSymbol(0, 1)
    if phi.lam == 1:
        if phi.a == 0:
            return AffineSymbol(0, 1)
        raise NoFixedPoint("a translation has no fixed point")
    z0 = phi.fixed_point
    ln = phi.lam**n
    return AffineSymbol(z0 * (1 - ln), ln)


@dataclass(frozen=True)
class IterateCoeffs:
    """``W^n f(z) = exp(log_psi_z0_factor + c0n + c1n z + c2n z^2) f(phi_n(z))``."""

    n: int
    log_psi_z0_factor: complex
    c0n: complex
    c1n: complex
    c2n: complex
    z0: complex
    s1: complex
    s2: complex
    dg_z0: complex

    def to_json(self) -> dict:
        pair = lambda c: [c.real, c.imag]  # noqa: E731
        return {
            "n": self.n,
            "log_psi_z0_factor": pair(self.log_psi_z0_factor),
            "c0n": pair(self.c0n),
            "c1n": pair(self.c1n),
            "c2n": pair(self.c2n),
        }


def _geometric(lam: complex, n: int) -> complex:
    if n == 1:  # complex division is not exact, and n = 1 must reproduce psi
        return 1 + 0j
    return (1 - lam**n) / (1 - lam)


def iterate_coeffs(W: WeightedCompOp, n: int) -> IterateCoeffs:
    eq = _check_lambda(W)
    if n < 1:
        raise ValueError("n must be positive")
    lam = W.lam
    z0 = W.phi.fixed_point
    a1, a2 = eq.a1, eq.a2
    s1 = _geometric(lam, n)
    s2 = _geometric(lam * lam, n)
    dg = a1 + 2 * a2 * z0
    c2 = a2 * s2
    c1 = a1 * s1 + 2 * a2 * z0 * (s1 - s2)
    c0 = -a1 * s1 * z0 + a2 * z0 * z0 * (s2 - 2 * s1)
    return IterateCoeffs(n, n * complex(eq.exponent(z0)), c0, c1, c2, z0, s1, s2, dg)


def _centered_log(ic: IterateCoeffs, a2: complex, z):
    w = np.asarray(z, dtype=complex) - ic.z0
    return ic.dg_z0 * ic.s1 * w + a2 * ic.s2 * w * w


def iterate_apply(W: WeightedCompOp, f: EntireFunction, n: int, z) -> LogComplex:
    """``(W^n f)(z)`` from the closed form."""
    eq = _check_lambda(W)
    ic = iterate_coeffs(W, n)
    z = complex(z)
    total = ic.log_psi_z0_factor + complex(_centered_log(ic, eq.a2, z))
    total += complex(_exponent(f, phi_n(W.phi, n)(z)))
    return LogComplex(total)


def scaled_iterate_apply(W: WeightedCompOp, f: EntireFunction, n: int, z):
    """``psi(z0)^{-n} (W^n f)(z)``, vectorised over ``z``."""
    eq = _check_lambda(W)
    ic = iterate_coeffs(W, n)
    z = np.asarray(z, dtype=complex)
    return np.exp(_centered_log(ic, eq.a2, z)) * f(phi_n(W.phi, n)(z))


def iterate_apply_product(W: WeightedCompOp, f: EntireFunction, n: int, z) -> LogComplex:
    """``(W^n f)(z)`` straight from the product of multipliers along the orbit
    of ``z``; the reference the closed form is tested against."""
    if n < 1:
        raise ValueError("n must be positive")
    w = complex(z)
    total = 0j
    for _ in range(n):
        total += complex(_exponent(W.psi, w))
        w = W.a + W.lam * w
    total += complex(_exponent(f, w))
    return LogComplex(total)


@dataclass(frozen=True)
class IterateImage:
    """The function ``W^n f`` as an evaluable object (product formula)."""

    W: WeightedCompOp
    f: EntireFunction
    n: int

    def log(self, z):
        z = np.asarray(z, dtype=complex)
        total = np.zeros_like(z)
        w = z
        for _ in range(self.n):
            total = total + _exponent(self.W.psi, w)
            w = self.W.a + self.W.lam * w
        total = total + _exponent(self.f, w)
        return complex(total) if total.ndim == 0 else total

    def __call__(self, z):
        return np.exp(self.log(z))

    @property
    def linear_hint(self) -> float:
        psi_hint = getattr(self.W.psi, "linear_hint", 0.0)
        return self.n * psi_hint + abs(self.W.a) * self.n + getattr(self.f, "linear_hint", 0.0)


def quadratic_gap(W: WeightedCompOp, n: int, f2: complex = 0j) -> float:
    """``alpha - 2|c2n + f2 lam^{2n}|`` without catastrophic cancellation.

    Near the boundary ``2|a2| = alpha*beta`` the gap is of order
    ``|lam|^{2n}``, far below what the plain subtraction resolves.
    """
    eq = _check_lambda(W)
    alpha, beta = W.alpha, W.beta
    q = 2 * abs(eq.a2) / (alpha * beta)
    if abs(q - 1) <= SLACK:
        q = 1.0
    m = W.lam**2
    rm, am = abs(m), cmath.phase(m)
    numer = 4 * rm * math.sin(am / 2) ** 2 + (1 - rm) ** 2 * (2 * (m**n).real - rm ** (2 * n))
    bs2 = beta * abs(_geometric(m, n))
    one_minus_bs2 = numer / abs(1 - m) ** 2 / (1 + bs2)
    gap = alpha * ((1 - q) + q * one_minus_bs2)
    if f2 != 0:
        c = eq.a2 * _geometric(m, n)
        d = f2 * m**n
        grow = (2 * (c.conjugate() * d).real + abs(d) ** 2) / (abs(c + d) + abs(c))
        gap -= 2 * grow
    return gap


def iterate_expquad(W: WeightedCompOp, f: ExpQuadratic, n: int) -> tuple[ExpQuadratic, float]:
    """``W^n f`` for exp-quadratic ``f`` as an exp-quadratic, together with
    the accurately computed gap ``alpha - 2|quadratic coefficient|``."""
    _check_lambda(W)
    ic = iterate_coeffs(W, n)
    ph = phi_n(W.phi, n)
    b, l = ph.a, ph.lam
    g0 = ic.log_psi_z0_factor + ic.c0n + f.a0 + f.a1 * b + f.a2 * b * b
    g1 = ic.c1n + f.a1 * l + 2 * f.a2 * b * l
    g2 = ic.c2n + f.a2 * l * l
    return ExpQuadratic(g0, g1, g2), quadratic_gap(W, n, f.a2)


@dataclass(frozen=True)
class LimitData:
    """Limit of ``psi(z0)^{-n} W^n``: ``f -> c F f(z0)`` with
    ``F = exp(c1 z + c2 z^2)`` and ``c = exp(c0)``."""

    c0: complex
    c1: complex
    c2: complex
    F: ExpQuadratic

    @property
    def c(self) -> complex:
        return cmath.exp(self.c0)

    def to_json(self) -> dict:
        pair = lambda c: [c.real, c.imag]  # noqa: E731
        return {
            "c0": pair(self.c0),
            "c1": pair(self.c1),
            "c2": pair(self.c2),
            "c": pair(self.c),
            "c0_source": "closed-form limit of c0n",
        }


def limit_coefficients(W: WeightedCompOp) -> tuple[complex, complex, complex]:
    """``(c0, c1, c2)``, the limits of ``(c0n, c1n, c2n)``."""
    eq = _check_lambda(W)
    lam = W.lam
    z0 = W.phi.fixed_point
    a1, a2 = eq.a1, eq.a2
    c2 = a2 / (1 - lam * lam)
    c1 = (a1 + 2 * a2 * W.a * lam / (1 - lam * lam)) / (1 - lam)
    c0 = -a1 * z0 / (1 - lam) + a2 * z0 * z0 * (1 / (1 - lam * lam) - 2 / (1 - lam))
    return c0, c1, c2


def limit_function(W: WeightedCompOp) -> LimitData:
    eq = _check_lambda(W)
    lam = W.lam
    if abs(lam.imag) > SLACK * abs(lam):
        raise HypothesisViolated("the limit operator is defined for real lambda")
    ab2 = W.alpha * W.beta / 2
    if abs(abs(eq.a2) - ab2) > SLACK * ab2:
        raise HypothesisViolated("the limit function needs |a2| = alpha*beta/2")
    if classify(W).verdict is not Verdict.BOUNDED_NOT_COMPACT:
        raise HypothesisViolated("the limit function needs a bounded, non-compact operator")
    c0, c1, _ = limit_coefficients(W)
    c2 = eq.a2 / W.beta
    return LimitData(c0, c1, c2, ExpQuadratic(0, c1, c2))


def limit_operator_apply(L: LimitData, f: EntireFunction, z0: complex, z):
    return L.c * L.F(z) * f(z0)
