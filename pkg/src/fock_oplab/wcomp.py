"""Weighted composition operators ``W f = psi * (f o phi)`` with affine ``phi``."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Union

import numpy as np

from .complexfn import (
    EntireFunction,
    ExpQuadratic,
    PolyTimesExpQuad,
    TaylorSeries,
    as_exp_quadratic,
    order_type,
    taylor_type_at_order,
)
from .errors import (
    HypothesisViolated,
    IndeterminateLiminal,
    InsufficientCoefficients,
    NoFixedPoint,
    RadiusExceeded,
    WrongMultiplierKind,
)
from .fockspace import Flavor, FockContext, Membership, membership

__all__ = [
    "AffineSymbol",
    "WeightedCompOp",
    "Verdict",
    "Exactness",
    "QuadraticFormCert",
    "OrderTypeCert",
    "NumericCert",
    "UnitModulusCert",
    "MembershipCert",
    "Classification",
    "QuadraticForm",
    "AdjointKernelImage",
    "apply",
    "m_z",
    "log_m_z",
    "logM_quadratic_form",
    "classify",
    "numeric_classify",
    "adjoint_on_kernel",
    "square",
]

SLACK = 1e-12


def _close(x: complex, y: complex, scale: float | None = None) -> bool:
    if scale is None:
        scale = max(abs(x), abs(y))
    return abs(x - y) <= SLACK * scale


@dataclass(frozen=True)
class AffineSymbol:
    a: complex
    lam: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "lam", complex(self.lam))

    def __call__(self, z):
        return self.a + self.lam * np.asarray(z) if np.ndim(z) else self.a + self.lam * complex(z)

    @property
    def beta(self) -> float:
        return 1.0 - abs(self.lam) ** 2

    @property
    def fixed_point(self) -> complex:
        if self.lam == 1:
            raise NoFixedPoint("the translation z -> z + a has no fixed point")
        return self.a / (1 - self.lam)

    def then(self, other: "AffineSymbol") -> "AffineSymbol":
        """``other o self``."""
        return AffineSymbol(other.a + other.lam * self.a, other.lam * self.lam)


@dataclass(frozen=True)
class WeightedCompOp:
    psi: EntireFunction
    phi: AffineSymbol
    ctx: FockContext

    def __post_init__(self):
        if not isinstance(self.psi, (ExpQuadratic, PolyTimesExpQuad, TaylorSeries)):
            raise WrongMultiplierKind(f"unsupported multiplier {type(self.psi).__name__}")
        if isinstance(self.psi, TaylorSeries) and not np.any(np.asarray(self.psi.coeffs)):
            raise ValueError("multiplier must not be identically zero")

    @property
    def alpha(self) -> float:
        return self.ctx.alpha

    @property
    def lam(self) -> complex:
        return self.phi.lam

    @property
    def a(self) -> complex:
        return self.phi.a

    @property
    def beta(self) -> float:
        return self.phi.beta

    def with_ctx(self, ctx: FockContext) -> "WeightedCompOp":
        return WeightedCompOp(self.psi, self.phi, ctx)


class Verdict(str, Enum):
    UNBOUNDED_SYMBOL = "UnboundedSymbol"
    UNBOUNDED = "Unbounded"
    BOUNDED_NOT_COMPACT = "BoundedNotCompact"
    COMPACT = "Compact"
    FINITE_RANK_COMPACT = "FiniteRankCompact"
    ISOMETRY_MULTIPLE = "IsometryMultiple"

    @property
    def bounded(self) -> bool:
        return self not in (Verdict.UNBOUNDED, Verdict.UNBOUNDED_SYMBOL)


class Exactness(str, Enum):
    EXACT = "Exact"
    NUMERIC = "Numeric"


def _jsonable(obj) -> dict:
    out = {}
    for k, v in asdict(obj).items():
        if isinstance(v, complex):
            v = [v.real, v.imag]
        elif isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, Enum):
            v = v.value
        elif isinstance(v, float) and math.isinf(v):
            v = "inf" if v > 0 else "-inf"
        out[k] = v
    return out


@dataclass(frozen=True)
class QuadraticFormCert:
    mu: float
    t: complex
    theta2: float
    case_tag: str
    eigenvalues: tuple = ()

    kind = "QuadraticFormCert"

    def to_json(self):
        d = _jsonable(self)
        d["eigenvalues"] = list(self.eigenvalues)
        return {"kind": self.kind, **d}


@dataclass(frozen=True)
class OrderTypeCert:
    rho: float
    sigma: float
    threshold: float

    kind = "OrderTypeCert"

    def to_json(self):
        return {"kind": self.kind, **_jsonable(self)}


@dataclass(frozen=True)
class NumericCert:
    sup_estimate: float
    log_sup: float
    decay_flag: bool
    detail: str = ""

    kind = "NumericCert"

    def to_json(self):
        return {"kind": self.kind, **_jsonable(self)}


@dataclass(frozen=True)
class UnitModulusCert:
    psi_matches_kernel_form: bool

    kind = "UnitModulusCert"

    def to_json(self):
        return {"kind": self.kind, **_jsonable(self)}


@dataclass(frozen=True)
class MembershipCert:
    membership: Membership

    kind = "MembershipCert"

    def to_json(self):
        return {"kind": self.kind, **_jsonable(self)}


Certificate = Union[QuadraticFormCert, OrderTypeCert, NumericCert, UnitModulusCert, MembershipCert]


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    certificate: Certificate | None
    exactness: Exactness

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "exactness": self.exactness.value,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


@dataclass(frozen=True)
class QuadraticForm:
    """``log M_z = logC + 2 Re(t z) + x^T A x + 2 log|Q(z)|`` with ``z = x + iy``."""

    A: np.ndarray
    t: complex
    logC: float
    poly: tuple | None

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        A = self.A
        out = self.logC + 2 * np.real(self.t * z) + A[0, 0] * x * x + 2 * A[0, 1] * x * y + A[1, 1] * y * y
        if self.poly is not None:
            with np.errstate(divide="ignore"):
                out = out + 2 * np.log(np.abs(np.polyval(self.poly[::-1], z)))
        return out


@dataclass(frozen=True)
class AdjointKernelImage:
    """``W* k_z = scalar * k_point`` for the Banach-space adjoint under the
    bilinear pairing ``<f, k_z> = f(z)``."""

    scalar: complex
    point: complex


def apply(W: WeightedCompOp, f: EntireFunction, z):
    return W.psi(z) * f(W.phi(z))


def log_m_z(W: WeightedCompOp, z):
    """``log M_z``, evaluated in log space so that it never overflows."""
    z = np.asarray(z, dtype=complex)
    w = W.phi(z)
    out = 2 * np.real(W.psi.log(z)) + W.alpha * (np.abs(w) ** 2 - np.abs(z) ** 2)
    return float(out) if out.ndim == 0 else out


def m_z(W: WeightedCompOp, z):
    return np.exp(log_m_z(W, z))


def _core_and_poly(psi) -> tuple[ExpQuadratic, tuple | None]:
    if isinstance(psi, ExpQuadratic):
        return psi, None
    if isinstance(psi, PolyTimesExpQuad):
        eq = as_exp_quadratic(psi)
        if eq is not None:
            return eq, None
        return psi.core, tuple(psi.poly)
    raise WrongMultiplierKind("the quadratic form needs an exp-quadratic multiplier")


def logM_quadratic_form(W: WeightedCompOp) -> QuadraticForm:
    if not abs(W.lam) < 1:
        raise HypothesisViolated("the quadratic form is defined for |lambda| < 1")
    core, poly = _core_and_poly(W.psi)
    ab = W.alpha * W.beta
    u, v = core.a2.real, core.a2.imag
    A = np.array([[2 * u - ab, -2 * v], [-2 * v, -2 * u - ab]])
    t = core.a1 + W.alpha * W.a.conjugate() * W.lam
    logC = 2 * core.a0.real + W.alpha * abs(W.a) ** 2
    return QuadraticForm(A, t, logC, poly)


def _theta2(a2: complex) -> float:
    return float((-np.angle(a2) / 2) % np.pi) if a2 != 0 else 0.0


# ----------------------------------------------------------------------------
# numerical oracle


def _ring_maxima(W: WeightedCompOp, radii: np.ndarray, n_theta: int) -> np.ndarray:
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    z = radii[:, None] * np.exp(1j * theta)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        L = log_m_z(W, z)
    L = np.where(np.isnan(L), -np.inf, L)
    return L.max(axis=1)


def numeric_classify(
    W: WeightedCompOp,
    r_start: float = 8.0,
    max_doublings: int = 6,
    n_theta: int = 720,
    n_radii: int = 64,
) -> Classification:
    """Classify from pointwise evaluations of ``log M_z`` alone.

    Ring maxima of ``log M_z`` are collected on annuli ``[R/2, R]`` with ``R``
    doubling. A clearly quadratic trend of either sign on two successive
    annuli settles Compact/Unbounded. Sub-quadratic behaviour is judged from
    the slope of the ring maxima against ``log r`` on the last annulus.
    This is deliberately independent of the closed-form classifier.
    """
    if not abs(W.lam) < 1:
        raise HypothesisViolated("numeric classification needs |lambda| < 1")
    cap = W.psi.certified_radius if isinstance(W.psi, TaylorSeries) else math.inf
    R = min(r_start, cap)
    log_sup = -math.inf
    prev_sign = 0
    slope = None
    ring = None
    for _ in range(max_doublings + 1):
        radii = np.linspace(R / 2, R, n_radii)
        ring = _ring_maxima(W, radii, n_theta)
        inner = _ring_maxima(W, np.linspace(0.0, R / 2, n_radii), n_theta)
        log_sup = max(log_sup, float(ring.max()), float(inner.max()))
        finite = np.isfinite(ring)
        c2 = np.polyfit(radii[finite], ring[finite], 2)[0]
        sign = int(np.sign(c2)) if abs(c2) * R * R > 4 else 0
        if sign != 0 and sign == prev_sign:
            if sign < 0:
                return Classification(
                    Verdict.COMPACT,
                    NumericCert(math.exp(min(log_sup, 700.0)), log_sup, True, "quadratic decay"),
                    Exactness.NUMERIC,
                )
            return Classification(
                Verdict.UNBOUNDED,
                NumericCert(math.inf, math.inf, False, "quadratic growth"),
                Exactness.NUMERIC,
            )
        prev_sign = sign
        if R >= cap:
            break
        R = min(2 * R, cap)
    finite = np.isfinite(ring)
    slope = float(np.polyfit(np.log(radii[finite]), ring[finite], 1)[0])
    detail = f"log-log slope {slope:.4g}"
    if slope < -0.5:
        return Classification(
            Verdict.COMPACT,
            NumericCert(math.exp(min(log_sup, 700.0)), log_sup, True, detail),
            Exactness.NUMERIC,
        )
    if slope > 0.5:
        return Classification(
            Verdict.UNBOUNDED, NumericCert(math.inf, math.inf, False, detail), Exactness.NUMERIC
        )
    if abs(slope) < 0.1:
        return Classification(
            Verdict.BOUNDED_NOT_COMPACT,
            NumericCert(math.exp(min(log_sup, 700.0)), log_sup, False, detail),
            Exactness.NUMERIC,
        )
    raise IndeterminateLiminal(f"numeric scan of M_z is inconclusive ({detail})")


def _null_line_verdict(W: WeightedCompOp, qf: QuadraticForm, theta2: float) -> Classification:
    """Boundary case with a polynomial factor: sample ``log M_z`` on the null
    line of the quadratic part in both directions and look at the trend."""
    u = np.linspace(40 / 64, 40.0, 64)
    growth = []
    log_sup = -math.inf
    for sgn in (1, -1):
        vals = qf(sgn * u * np.exp(1j * theta2))
        log_sup = max(log_sup, float(vals.max()))
        q = slice(48, None)
        growth.append(float(np.polyfit(np.log(u[q]), vals[q], 1)[0]))
    detail = "null-line log-log slopes " + ", ".join(f"{g:.4g}" for g in growth)
    if max(growth) > 0.1:
        return Classification(
            Verdict.UNBOUNDED, NumericCert(math.inf, math.inf, False, detail), Exactness.NUMERIC
        )
    return Classification(
        Verdict.BOUNDED_NOT_COMPACT,
        NumericCert(math.exp(min(log_sup, 700.0)), log_sup, False, detail),
        Exactness.NUMERIC,
    )


def _classify_taylor(W: WeightedCompOp) -> Classification:
    ab2 = W.alpha * W.beta / 2
    try:
        prof = order_type(W.psi)
    except InsufficientCoefficients:
        return numeric_classify(W)
    rho = prof.order
    if abs(rho - 2) <= 0.05:
        sigma = taylor_type_at_order(W.psi.coeffs, 2.0)
        cert = OrderTypeCert(rho, sigma, ab2)
        if sigma < 0.98 * ab2:
            return Classification(Verdict.COMPACT, cert, Exactness.NUMERIC)
        if sigma > 1.02 * ab2:
            return Classification(Verdict.UNBOUNDED, cert, Exactness.NUMERIC)
        return numeric_classify(W)
    sigma = prof.type if prof.type is not None else math.nan
    cert = OrderTypeCert(rho, sigma, ab2)
    if rho < 2:
        return Classification(Verdict.COMPACT, cert, Exactness.NUMERIC)
    return Classification(Verdict.UNBOUNDED, cert, Exactness.NUMERIC)


def classify(W: WeightedCompOp) -> Classification:
    """Unbounded / bounded / compact classification of ``W``.

    The cases are tried in order: expanding symbol, constant symbol (rank
    one), unimodular dilation (isometry multiples), then the contractive
    regime, where exp-quadratic multipliers are decided exactly by the sign
    of the top eigenvalue ``mu = 2|a2| - alpha*beta`` of the quadratic form
    of ``log M_z`` and, on the boundary ``mu = 0``, by the linear term.
    """
    lam, alpha = W.lam, W.alpha
    ab = alpha * W.beta
    if abs(lam) > 1 and not _close(abs(lam), 1.0, 1.0):
        return Classification(Verdict.UNBOUNDED_SYMBOL, None, Exactness.EXACT)

    if lam == 0:
        m = membership(W.psi, W.ctx)
        exact = Exactness.NUMERIC if isinstance(W.psi, TaylorSeries) else Exactness.EXACT
        if m is Membership.INDETERMINATE:
            raise IndeterminateLiminal("membership of the multiplier could not be decided")
        v = Verdict.FINITE_RANK_COMPACT if m in (Membership.IN, Membership.BOUNDARY_IN) else Verdict.UNBOUNDED
        return Classification(v, MembershipCert(m), exact)

    if _close(abs(lam), 1.0, 1.0):
        eq = None if isinstance(W.psi, TaylorSeries) else as_exp_quadratic(W.psi)
        target = -alpha * W.a.conjugate() * lam
        ok = (
            eq is not None
            and _close(eq.a2, 0.0, max(abs(eq.a2), 1.0))
            and _close(eq.a1, target, max(abs(eq.a1), abs(target), 1.0))
        )
        v = Verdict.ISOMETRY_MULTIPLE if ok else Verdict.UNBOUNDED
        exact = Exactness.NUMERIC if isinstance(W.psi, TaylorSeries) else Exactness.EXACT
        return Classification(v, UnitModulusCert(ok), exact)

    if isinstance(W.psi, TaylorSeries):
        return _classify_taylor(W)

    qf = logM_quadratic_form(W)
    core = W.psi if isinstance(W.psi, ExpQuadratic) else W.psi.core
    a2, t = core.a2, qf.t
    mu = 2 * abs(a2) - ab
    theta2 = _theta2(a2)
    eig = (-ab - 2 * abs(a2), mu)

    def cert(tag):
        return QuadraticFormCert(mu, t, theta2, tag, eig)

    on_boundary = _close(2 * abs(a2), ab)
    if not on_boundary:
        if mu < 0:
            return Classification(Verdict.COMPACT, cert("negative_definite"), Exactness.EXACT)
        return Classification(Verdict.UNBOUNDED, cert("type_exceeds_bound"), Exactness.EXACT)

    if qf.poly is not None:
        return _null_line_verdict(W, qf, theta2)

    t_scale = max(abs(core.a1), alpha * abs(W.a) * abs(lam))
    if t == 0 or abs(t) <= SLACK * t_scale:
        return Classification(Verdict.BOUNDED_NOT_COMPACT, cert("boundary_t_zero"), Exactness.EXACT)
    aligned = -(ab / 2) * t * t / abs(t) ** 2
    if _close(a2, aligned, max(abs(a2), ab / 2)):
        return Classification(Verdict.BOUNDED_NOT_COMPACT, cert("boundary_aligned"), Exactness.EXACT)
    return Classification(Verdict.UNBOUNDED, cert("boundary_misaligned"), Exactness.EXACT)


def adjoint_on_kernel(W: WeightedCompOp, z: complex) -> AdjointKernelImage:
    if not W.ctx.finite and W.ctx.flavor is not Flavor.FINFTY_ZERO:
        raise HypothesisViolated("the adjoint is taken with respect to a duality pairing that F^inf lacks")
    z = complex(z)
    return AdjointKernelImage(complex(W.psi(z)), complex(W.phi(z)))


def square(W: WeightedCompOp) -> WeightedCompOp:
    """``W^2`` as a weighted composition operator."""
    eq = None if isinstance(W.psi, TaylorSeries) else as_exp_quadratic(W.psi)
    if eq is None:
        raise WrongMultiplierKind("squaring is implemented for exp-quadratic multipliers")
    a, lam = W.a, W.lam
    a0, a1, a2 = eq.a0, eq.a1, eq.a2
    psi2 = ExpQuadratic(
        2 * a0 + a1 * a + a2 * a * a,
        a1 * (1 + lam) + 2 * a2 * a * lam,
        a2 * (1 + lam * lam),
    )
    return WeightedCompOp(psi2, AffineSymbol(a * (1 + lam), lam * lam), W.ctx)
