"""Numerical evidence that weighted composition operators on Fock spaces are
never supercyclic: scaled iterate norms, Angle-Criterion ratios, isometry
identities and the limit operator in the vanishing sup-norm space."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .complexfn import (
    EntireFunction,
    ExpQuadratic,
    PolyTimesExpQuad,
    TaylorSeries,
    as_exp_quadratic,
    compose_affine,
    kernel_function,
    times_exp,
)
from .errors import HypothesisViolated, InternalInconsistency
from .fockspace import (
    Flavor,
    FockContext,
    decay_profile,
    fock_norm,
    gaussian_log_norm,
    kernel_norm,
    membership,
)
from .iterates import (
    IterateImage,
    LimitData,
    iterate_coeffs,
    iterate_expquad,
    limit_function,
)
from .wcomp import (
    Classification,
    Verdict,
    WeightedCompOp,
    adjoint_on_kernel,
    classify,
    square,
)

__all__ = [
    "Trend",
    "SequenceReport",
    "IsometryReport",
    "DynamicsConfig",
    "SupercyclicityVerdict",
    "trend_of",
    "scaled_iterate_norms",
    "angle_criterion_ratio",
    "isometry_report",
    "limit_residuals",
    "standard_test_functions",
    "supercyclicity_report",
]

TREND_THRESHOLD = 1e-3
SLACK = 1e-12


class Trend(str, Enum):
    DIVERGES = "DivergesToInfinity"
    CONVERGES_TO_ZERO = "ConvergesToZero"
    BOUNDED = "Bounded"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class SequenceReport:
    """A sequence indexed by ``n`` and stored by its logarithm.

    ``trend`` comes from the least-squares slope of ``log_values`` over the
    last quartile: above ``1e-3`` per step it diverges, below ``-1e-3`` it
    goes to zero, otherwise it is bounded. ``fit`` is ``exp(slope)``, a
    geometric rate per step.
    """

    name: str
    n: list
    log_values: list
    trend: Trend
    fit: float | None = None

    @property
    def values(self) -> list:
        return [math.exp(v) if v < 709 else math.inf for v in self.log_values]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n": list(self.n),
            "values": self.values,
            "log_values": list(self.log_values),
            "trend": self.trend.value,
            "fit": self.fit,
        }

    def csv_rows(self):
        for n, lv in zip(self.n, self.log_values):
            yield (self.name, n, math.exp(lv) if lv < 709 else math.inf, lv)


def trend_of(n, log_values) -> tuple[Trend, float | None]:
    n = np.asarray(n, dtype=float)
    y = np.asarray(log_values, dtype=float)
    if len(n) < 4 or not np.all(np.isfinite(y)):
        return Trend.INCONCLUSIVE, None
    k = max(2, len(n) // 4)
    slope = float(np.polyfit(n[-k:], y[-k:], 1)[0])
    if slope > TREND_THRESHOLD:
        t = Trend.DIVERGES
    elif slope < -TREND_THRESHOLD:
        t = Trend.CONVERGES_TO_ZERO
    else:
        t = Trend.BOUNDED
    return t, math.exp(slope)


def _report(name, n, log_values) -> SequenceReport:
    t, fit = trend_of(n, log_values)
    return SequenceReport(name, list(n), [float(v) for v in log_values], t, fit)


def _log_iterate_norm(W: WeightedCompOp, f: EntireFunction, n: int, tol: float) -> float:
    """``log ||W^n f||``; exact for exp-quadratic data, quadrature otherwise."""
    eq_f = None if isinstance(f, TaylorSeries) else as_exp_quadratic(f)
    eq_psi = None if isinstance(W.psi, TaylorSeries) else as_exp_quadratic(W.psi)
    if eq_f is not None and eq_psi is not None:
        F, gap = iterate_expquad(W, eq_f, n)
        return gaussian_log_norm(F, W.alpha, W.ctx.p, gap)
    return fock_norm(IterateImage(W, f, n), W.ctx, tol=tol, method="quadrature").log_value


def _regime_checks(W: WeightedCompOp, f: EntireFunction):
    if not W.ctx.finite:
        raise HypothesisViolated("this sequence is defined for p < inf")
    if not 0 < abs(W.lam) < 1:
        raise HypothesisViolated("this sequence needs 0 < |lambda| < 1")
    z0 = W.phi.fixed_point
    if abs(f(z0)) == 0:
        raise HypothesisViolated("the test function vanishes at the fixed point")
    return z0


def _log_psi_z0(W: WeightedCompOp, z0: complex) -> float:
    return float(np.real(W.psi.log(z0)))


def scaled_iterate_norms(
    W: WeightedCompOp, f: EntireFunction, N: int = 64, tol: float = 1e-10
) -> SequenceReport:
    """``|psi(z0)|^{-n} ||W^n f||`` for ``n = 1..N``."""
    z0 = _regime_checks(W, f)
    if abs(W.lam.imag) > SLACK * abs(W.lam):
        raise HypothesisViolated("scaled norm divergence is a real-lambda statement")
    if classify(W).verdict is not Verdict.BOUNDED_NOT_COMPACT:
        raise HypothesisViolated("scaled norm divergence needs a bounded, non-compact operator")
    lp = _log_psi_z0(W, z0)
    ns = list(range(1, N + 1))
    logs = [_log_iterate_norm(W, f, n, tol) - n * lp for n in ns]
    return _report("scaled_iterate_norm", ns, logs)


def angle_criterion_ratio(
    W: WeightedCompOp, f: EntireFunction, N: int = 64, tol: float = 1e-10
) -> SequenceReport:
    """``r_n = |psi(z0)|^n e^{alpha|z0|^2/2} / ||W^n f||``, i.e. the norm of
    ``(W*)^n k_{z0}`` over the norm of ``W^n f``."""
    z0 = _regime_checks(W, f)
    lp = _log_psi_z0(W, z0)
    lk = W.alpha * abs(z0) ** 2 / 2
    ns = list(range(1, N + 1))
    logs = [n * lp + lk - _log_iterate_norm(W, f, n, tol) for n in ns]
    return _report("angle_criterion_ratio", ns, logs)


def standard_test_functions(alpha: float) -> dict:
    return {
        "one": ExpQuadratic(),
        "z": PolyTimesExpQuad((0, 1)),
        "kernel_0.3": kernel_function(0.3, alpha),
        "exp_0.2z2": ExpQuadratic(0, 0, 0.2 * alpha),
    }


def _image(W: WeightedCompOp, f: EntireFunction) -> EntireFunction:
    """``W f`` in closed form for exp-quadratic multipliers."""
    eq = as_exp_quadratic(W.psi) if not isinstance(W.psi, TaylorSeries) else None
    if eq is None:
        raise HypothesisViolated("closed-form images need an exp-quadratic multiplier")
    return times_exp(compose_affine(f, W.a, W.lam), eq)


@dataclass
class IsometryReport:
    kappa: float
    entries: list = field(default_factory=list)

    @property
    def max_ratio_deviation(self) -> float:
        return max((e["ratio_deviation"] for e in self.entries), default=0.0)

    @property
    def max_paranormal_residual(self) -> float:
        return max((e["paranormal_relative_residual"] for e in self.entries), default=0.0)

    def to_json(self) -> dict:
        return {
            "kappa": self.kappa,
            "entries": self.entries,
            "max_ratio_deviation": self.max_ratio_deviation,
            "max_paranormal_residual": self.max_paranormal_residual,
        }


def isometry_report(W: WeightedCompOp, fs: dict | list | None = None, tol: float = 1e-11) -> IsometryReport:
    """Check ``||W f|| = kappa ||f||`` and ``||W f||^2 = ||W^2 f|| ||f||``."""
    if classify(W).verdict is not Verdict.ISOMETRY_MULTIPLE:
        raise HypothesisViolated("isometry report needs an isometry multiple")
    if fs is None:
        fs = standard_test_functions(W.alpha)
    if not isinstance(fs, dict):
        fs = {f"f{i}": f for i, f in enumerate(fs)}
    kappa = abs(W.psi(0)) * math.exp(W.alpha * abs(W.a) ** 2 / 2)
    W2 = square(W)
    rep = IsometryReport(kappa)
    for name, f in fs.items():
        nf = fock_norm(f, W.ctx, tol=tol).value
        nwf = fock_norm(_image(W, f), W.ctx, tol=tol).value
        nw2f = fock_norm(_image(W2, f), W.ctx, tol=tol).value
        ratio = nwf / nf
        resid = nwf**2 - nw2f * nf
        rep.entries.append(
            {
                "function": name,
                "norm_f": nf,
                "norm_Wf": nwf,
                "norm_W2f": nw2f,
                "ratio": ratio,
                "ratio_deviation": abs(ratio - kappa) / kappa,
                "paranormal_residual": resid,
                "paranormal_relative_residual": abs(resid) / nwf**2,
            }
        )
    return rep


def _disc_grid(radius: float, size: int) -> np.ndarray:
    x = np.linspace(-radius, radius, size)
    z = (x[:, None] + 1j * x[None, :]).ravel()
    return z[np.abs(z) <= radius * (1 + 1e-12)]


def limit_residuals(
    W: WeightedCompOp,
    L: LimitData,
    f: ExpQuadratic,
    ns,
    radius: float = 2.0,
    size: int = 33,
) -> SequenceReport:
    """``sup |psi(z0)^{-n} (W^n f)(z) - c F(z) f(z0)|`` over a disc grid.

    The difference is formed as ``limit * expm1(D_n)`` with ``D_n`` the
    exactly known difference of exponents, so it keeps decaying like
    ``|lam|^n`` instead of stalling at rounding level.
    """
    z = _disc_grid(radius, size)
    z0 = W.phi.fixed_point
    eq = as_exp_quadratic(W.psi)
    lam = W.lam
    w = z - z0
    limit = L.c * L.F(z) * f(z0)
    logs = []
    for n in ns:
        ic = iterate_coeffs(W, n)
        ln = lam**n
        d = -ic.dg_z0 * ln / (1 - lam) * w - eq.a2 * lam ** (2 * n) / (1 - lam * lam) * w * w
        delta = ln * w
        d = d + f.a1 * delta + f.a2 * delta * (2 * z0 + delta)
        res = float(np.max(np.abs(limit * np.expm1(d))))
        logs.append(math.log(res) if res > 0 else -745.0)
    return _report("limit_residual", list(ns), logs)


@dataclass(frozen=True)
class DynamicsConfig:
    N: int = 64
    limit_n: int = 60
    grid_radius: float = 2.0
    grid_size: int = 33
    tol: float = 1e-10

    def __post_init__(self):
        if self.N < 4:
            raise ValueError("N must be at least 4")
        if self.limit_n < 10:
            raise ValueError("limit_n must be at least 10")


@dataclass
class SupercyclicityVerdict:
    verdict: str
    case_tag: str
    classification: Classification
    evidence: dict
    sequences: list

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "case_tag": self.case_tag,
            "classification": self.classification.to_json(),
            "evidence": self.evidence,
            "sequences": [s.to_json() for s in self.sequences],
        }


def _is_real(lam: complex) -> bool:
    return abs(lam.imag) <= SLACK * abs(lam)


def supercyclicity_report(W: WeightedCompOp, config: DynamicsConfig | None = None) -> SupercyclicityVerdict:
    """Pick the argument that rules out supercyclicity for ``W`` and collect
    numerical evidence for each of its ingredients."""
    config = config or DynamicsConfig()
    if W.ctx.flavor is Flavor.FINFTY:
        raise HypothesisViolated("dynamics are studied on F^p (p < inf) and on the vanishing sup-norm space")
    cls = classify(W)
    v = cls.verdict
    if not v.bounded:
        raise HypothesisViolated(f"operator is {v.value}; supercyclicity is only asked of bounded operators")

    def done(tag, evidence, seqs=()):
        return SupercyclicityVerdict("NotSupercyclic", tag, cls, evidence, list(seqs))

    if v is Verdict.ISOMETRY_MULTIPLE:
        return done("IsometryMultiple", {"isometry": isometry_report(W).to_json()})

    if v in (Verdict.COMPACT, Verdict.FINITE_RANK_COMPACT):
        z0 = W.phi.fixed_point
        img = adjoint_on_kernel(W, z0)
        eig = complex(W.psi(z0))
        resid = abs(img.scalar - eig) * kernel_norm(z0, W.ctx) + abs(img.point - z0)
        return done(
            "CompactAdjointEigenvalue",
            {
                "eigenvalue": [eig.real, eig.imag],
                "eigenvector_kernel_point": [z0.real, z0.imag],
                "eigen_residual": resid,
            },
        )

    if v is Verdict.BOUNDED_NOT_COMPACT:
        one = ExpQuadratic()
        if not _is_real(W.lam):
            sq = classify(square(W))
            if sq.verdict is not Verdict.COMPACT or not sq.certificate.mu < 0:
                raise InternalInconsistency("square of a non-real-lambda operator is not compact")
            return done("NonRealLambdaSquareCompact", {"square_classification": sq.to_json()})
        if W.ctx.finite:
            seq = angle_criterion_ratio(W, one, config.N, config.tol)
            return done("RealLambdaAngleCriterion", {"trend": seq.trend.value}, [seq])
        L = limit_function(W)
        alpha = W.alpha
        sup = fock_norm(L.F, FockContext(math.inf, alpha, Flavor.FINFTY))
        theta_null = float(-np.angle(L.c2) / 2)
        rays = decay_profile(
            L.F, alpha, r_max=10.0,
            thetas=np.concatenate([[theta_null, theta_null + np.pi], 2 * np.pi * np.arange(8) / 8]),
        )
        ns = list(range(10, config.limit_n + 1))
        seq = limit_residuals(W, L, one, ns, config.grid_radius, config.grid_size)
        return done(
            "FinftyZeroLimitOperator",
            {
                "limit": L.to_json(),
                "F_sup_norm": sup.to_json(),
                "F_membership_vanishing_space": membership(L.F, W.ctx).value,
                "rays": [r.to_json() for r in rays],
                "final_residual": seq.values[-1],
            },
            [seq],
        )
    raise InternalInconsistency(f"no non-supercyclicity argument matches verdict {v.value}")

