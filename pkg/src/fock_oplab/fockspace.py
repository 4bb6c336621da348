"""Fock-space contexts, norms, kernel functions and membership tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate, optimize

from .complexfn import (
    EntireFunction,
    ExpQuadratic,
    PolyTimesExpQuad,
    TaylorSeries,
    as_exp_quadratic,
    order_type,
    taylor_type_at_order,
)
from .errors import NonConvergent

__all__ = [
    "Flavor",
    "FockContext",
    "NormMethod",
    "NormResult",
    "Membership",
    "DecayVerdict",
    "RayProfile",
    "kernel_norm",
    "gaussian_log_norm",
    "gaussian_norm_expquad",
    "fock_norm",
    "membership",
    "decay_profile",
]

EQ_SLACK = 1e-12
EPS = float(np.finfo(float).eps)


class Flavor(str, Enum):
    FP = "fp"
    FINFTY = "finfty"
    FINFTY_ZERO = "finfty0"


@dataclass(frozen=True)
class FockContext:
    """The space ``F^p_alpha``; ``p = math.inf`` selects one of the sup-norm
    flavors (``FINFTY`` for the full space, ``FINFTY_ZERO`` for the
    vanishing-at-infinity subspace)."""

    p: float
    alpha: float
    flavor: Flavor = None

    def __post_init__(self):
        p = float(self.p)
        if not (p >= 1):
            raise ValueError(f"p must be in [1, inf], got {self.p}")
        if not (self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        flavor = self.flavor
        if flavor is None:
            flavor = Flavor.FINFTY if math.isinf(p) else Flavor.FP
        flavor = Flavor(flavor)
        if math.isinf(p) == (flavor is Flavor.FP):
            raise ValueError(f"flavor {flavor.value} is incompatible with p={p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "flavor", flavor)

    @property
    def finite(self) -> bool:
        return not math.isinf(self.p)

    def to_json(self) -> dict:
        return {
            "p": "inf" if math.isinf(self.p) else self.p,
            "alpha": self.alpha,
            "flavor": self.flavor.value,
        }


class NormMethod(str, Enum):
    EXACT_GAUSSIAN = "ExactGaussian"
    QUADRATURE = "Quadrature"
    RAY_SUP = "RaySup"


@dataclass(frozen=True)
class NormResult:
    value: float
    method: NormMethod
    error_estimate: float = 0.0
    log_value: float = field(default=None)

    def __post_init__(self):
        if self.log_value is None:
            lv = math.log(self.value) if self.value > 0 else -math.inf
            object.__setattr__(self, "log_value", lv)

    @classmethod
    def from_log(cls, log_value, method, error_estimate=0.0):
        value = math.exp(log_value) if log_value < 709.0 else math.inf
        return cls(value, method, error_estimate, log_value)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.log_value) and self.log_value > 0

    def to_json(self) -> dict:
        return {
            "value": "inf" if math.isinf(self.value) else self.value,
            "log_value": "inf" if math.isinf(self.log_value) else self.log_value,
            "method": self.method.value,
            "error_estimate": self.error_estimate,
        }


class Membership(str, Enum):
    IN = "In"
    NOT_IN = "NotIn"
    BOUNDARY_IN = "BoundaryIn"
    INDETERMINATE = "Indeterminate"


def kernel_norm(z: complex, ctx: FockContext | float) -> float:
    """``||k_z|| = exp(alpha |z|^2 / 2)``, the same for every p."""
    alpha = ctx.alpha if isinstance(ctx, FockContext) else float(ctx)
    return math.exp(alpha * abs(complex(z)) ** 2 / 2)


def _rotated_linear(a1: complex, a2: complex) -> complex:
    # substituting z = exp(-i arg(a2)/2) w turns a2 z^2 into |a2| w^2
    return complex(a1 * np.exp(-0.5j * np.angle(a2)))


def gaussian_log_norm(f: ExpQuadratic, alpha: float, p: float, gap: float | None = None) -> float:
    """Log of the exact ``F^p_alpha`` norm of ``exp(a0 + a1 z + a2 z^2)``.

    In the frame where the quadratic coefficient is real and positive the
    weight ``|f|^p exp(-alpha p |z|^2 / 2)`` is an axis-aligned Gaussian with
    precisions ``p * gap`` and ``p * (alpha + 2|a2|)``, where
    ``gap = alpha - 2|a2|``. Callers who know ``gap`` more accurately than
    the subtraction can deliver (iterates near the boundary) pass it in.

    Returns ``+inf`` when the integral (or supremum, ``p = inf``) diverges.
    """
    b = abs(f.a2)
    if gap is None:
        gap = alpha - 2 * b
    wide = alpha + 2 * b
    c = _rotated_linear(f.a1, f.a2)
    cx, cy = c.real, c.imag
    base = f.a0.real + cy * cy / (2 * wide)
    if math.isinf(p):
        if gap > 0:
            return float(base + cx * cx / (2 * gap))
        if gap == 0 and abs(cx) <= EQ_SLACK * max(1.0, abs(f.a1)):
            return float(base)
        return math.inf
    if gap <= 0:
        return math.inf
    return float(base + cx * cx / (2 * gap) + (math.log(alpha) - 0.5 * math.log(gap * wide)) / p)


def gaussian_norm_expquad(f: ExpQuadratic, ctx: FockContext, gap: float | None = None) -> NormResult:
    return NormResult.from_log(
        gaussian_log_norm(f, ctx.alpha, ctx.p, gap), NormMethod.EXACT_GAUSSIAN, 0.0
    )


def _start_radius(f, alpha: float) -> float:
    return math.sqrt(2 * (f.linear_hint + 1) / alpha) + 4


def _radius_cap(f) -> float:
    return f.certified_radius if isinstance(f, TaylorSeries) else math.inf


def _theta_integral(f, r: float, p: float, alpha: float, shift: float, tol: float) -> float:
    """Trapezoid rule in theta (spectrally accurate for periodic integrands),
    doubled until two successive estimates agree. The sum is taken relative
    to the ring maximum and the panel shift is applied at the end, so narrow
    peaks far below the panel scale do not underflow.

    ``|f|^p`` has kinks at zeros of ``f`` when ``p`` is odd; if doubling has
    not settled by 4096 nodes, and is not visibly converging geometrically
    (very narrow smooth peaks may use up to 65536 nodes), we switch to Gauss-Legendre panels graded
    toward the local minima of the ring profile.
    """
    m = 64
    prev = None
    diff = math.inf
    spectral = False
    log_w = -0.5 * alpha * p * r * r + math.log(r)
    while m <= 1 << 12 or (m <= 1 << 16 and spectral):
        theta = 2 * np.pi * np.arange(m) / m
        L = p * np.real(f.log(r * np.exp(1j * theta)))
        top = float(np.max(L))
        if top == -math.inf:
            return 0.0
        est = top + math.log(2 * np.pi * float(np.mean(np.exp(L - top))))
        # log values of size |top| carry rounding noise of order eps * |top|
        if prev is not None and abs(est - prev) <= max(1e-3 * tol, 64 * EPS * abs(top)):
            return math.exp(min(est + log_w - shift, 700.0))
        if prev is not None:
            # a smooth but very narrow peak is still converging geometrically;
            # kinks only converge algebraically
            spectral = abs(est - prev) < 1e-3 * diff
            diff = abs(est - prev)
        else:
            spectral = False
        prev = est
        m *= 2
    interior = (L < np.roll(L, 1)) & (L < np.roll(L, -1))
    h = 2 * np.pi / theta.size

    def ring(th):
        return float(np.real(f.log(r * np.exp(1j * th))))

    kinks = np.sort([
        optimize.minimize_scalar(ring, bounds=(t - h, t + h), method="bounded", options={"xatol": 1e-14}).x
        for t in theta[interior][:50]
    ])
    if kinks.size == 0:
        raise NonConvergent(f"theta quadrature did not settle at r={r:.4g}")
    edges = np.append(kinks, kinks[0] + 2 * np.pi)
    est = [_graded_log_integral(f, r, p, edges, top, k) for k in (16, 24)]
    if abs(est[1] - est[0]) > max(tol, 1e-6):
        raise NonConvergent(f"theta quadrature did not settle at r={r:.4g}")
    return math.exp(min(est[1] + log_w - shift, 700.0))


def _graded_log_integral(f, r, p, edges, top, k, ratio=0.15, levels=20):
    """Log of the theta integral of ``|f|^p`` split at ``edges`` (local
    minima of ``|f|``, where odd powers have kinks). Each half-interval gets
    Gauss-Legendre panels graded geometrically toward its kink, which keeps
    exponential convergence for point-type singularities. Only rings passing
    within about 1e-4 of a zero come here; that band has area O(1e-4), so a
    per-ring tolerance of 1e-6 does not show in the 2D integral."""
    x, w = np.polynomial.legendre.leggauss(k)
    grades = ratio ** np.arange(levels + 1)
    lo_, hi_ = np.append(grades[1:], 0.0), grades
    nodes, weights = [], []
    for u, v in zip(edges[:-1], edges[1:]):
        half = (v - u) / 2
        for base, sgn in ((u, 1.0), (v, -1.0)):
            a = base + sgn * half * lo_
            b = base + sgn * half * hi_
            mid, rad = (a + b) / 2, (b - a) / 2
            nodes.append((mid[:, None] + rad[:, None] * x[None, :]).ravel())
            weights.append((np.abs(rad)[:, None] * w[None, :]).ravel())
    th = np.concatenate(nodes)
    wt = np.concatenate(weights)
    L = p * np.real(f.log(r * np.exp(1j * th))) - top
    return top + math.log(float(np.sum(wt * np.exp(L))))


def _ring_log_max(f, r: float, weight: float, n: int = 256) -> float:
    theta = 2 * np.pi * np.arange(n) / n
    return float(np.max(weight * np.real(f.log(r * np.exp(1j * theta)))))


def _quadrature_log_norm(f, alpha: float, p: float, tol: float) -> tuple[float, float]:
    R0 = _start_radius(f, alpha)
    cap = _radius_cap(f)
    log_total = -math.inf
    rel_err = 0.0
    edges = [0.0, R0]
    ring_hist = []
    for _ in range(11):
        ra, rb = edges[-2], edges[-1]
        if rb > cap:
            raise NonConvergent(f"truncation radius {rb:.4g} exceeds certified radius {cap:.4g}")
        rr = np.linspace(max(ra, 1e-3), rb, 33)
        coarse = [
            _ring_log_max(f, r, p, 64) - 0.5 * alpha * p * r * r + math.log(r) for r in rr
        ]
        shift = max(coarse)
        val, err = integrate.quad(
            lambda r: _theta_integral(f, r, p, alpha, shift, tol) if r > 0 else 0.0,
            ra,
            rb,
            epsabs=0.0,
            epsrel=tol / 10,
            limit=400,
        )
        if val > 0:
            panel = shift + math.log(val)
            rel_err = max(rel_err, err / val)
            log_total = np.logaddexp(log_total, panel)
        ring = _ring_log_max(f, rb, p) - 0.5 * alpha * p * rb * rb
        ring_hist.append(ring)
        tail = ring + math.log(2 * np.pi * rb * rb)
        decaying = len(ring_hist) < 2 or ring_hist[-1] < ring_hist[-2]
        if decaying and tail < log_total + math.log(tol) - math.log(10):
            return float(log_total), rel_err + math.exp(tail - log_total)
        if len(ring_hist) >= 3 and ring_hist[-1] - ring_hist[-2] > math.log(10) \
                and ring_hist[-2] - ring_hist[-3] > math.log(10):
            return math.inf, 0.0
        edges.append(2 * rb)
    raise NonConvergent("radial truncation did not certify the tail within 10 doublings")


def _polish(weighted, z0: complex, start: float, R: float, h: float) -> float:
    """Nelder-Mead restarted from its own optimum until it stops improving."""
    x = np.array([z0.real, z0.imag])
    best = start
    for _ in range(8):
        simplex = np.array([x, x + [h, 0.0], x + [0.0, h]])
        res = optimize.minimize(
            lambda xy: -weighted(xy) if math.hypot(*xy) <= R else math.inf,
            x0=x,
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000, "initial_simplex": simplex},
        )
        gain = -float(res.fun) - best
        if gain > 0:
            best, x = -float(res.fun), res.x
        if gain <= 1e-15 * max(1.0, abs(best)):
            break
        h = max(h / 10, 1e-8)
    return best


def _grid_log_sup(f, alpha: float, tol: float) -> tuple[float, float]:
    """Supremum of ``log|f(z)| - alpha |z|^2 / 2`` over expanding polar grids,
    each grid maximum polished by a local Nelder-Mead search."""

    def weighted(xy):
        z = complex(xy[0], xy[1])
        return float(np.real(f.log(z))) - 0.5 * alpha * abs(z) ** 2

    R = _start_radius(f, alpha)
    cap = _radius_cap(f)
    hist = []
    rings = []
    running = -math.inf
    for _ in range(11):
        R = min(R, cap)
        r = np.linspace(0.0, R, 161)
        theta = 2 * np.pi * np.arange(256) / 256
        z = r[:, None] * np.exp(1j * theta)[None, :]
        with np.errstate(invalid="ignore"):
            L = np.real(f.log(z)) - 0.5 * alpha * r[:, None] ** 2
        L = np.where(np.isnan(L), -np.inf, L)
        i, j = np.unravel_index(np.argmax(L), L.shape)
        z_best = z[i, j]
        stage_max = _polish(weighted, z_best, float(L[i, j]), R, R / 160)
        running = max(running, stage_max)
        hist.append(running)
        ring = float(np.max(L[-1]))
        rings.append(ring)
        err = abs(hist[-1] - hist[-2]) if len(hist) > 1 else abs(stage_max - float(L[i, j]))
        decaying = len(rings) < 2 or rings[-1] < rings[-2]
        if decaying and ring < running + math.log(tol) - math.log(10):
            return running, err
        if len(hist) >= 3:
            if hist[-1] - hist[-2] > math.log(10) and hist[-2] - hist[-3] > math.log(10):
                return math.inf, 0.0
            if hist[-1] - hist[-3] < tol and ring <= running + tol:
                # bounded along some direction but not decaying: the value has stalled
                return running, hist[-1] - hist[-3]
        if R >= cap:
            break
        R *= 2
    raise NonConvergent("sup-norm grid could not certify the supremum")


def fock_norm(
    f: EntireFunction,
    ctx: FockContext,
    tol: float = 1e-10,
    method: str = "auto",
) -> NormResult:
    """Norm of ``f`` in ``ctx``.

    ``method="auto"`` uses the closed form for exp-quadratics and numerics
    otherwise; ``"quadrature"`` (p < inf) and ``"grid"`` (p = inf) force the
    numerical paths, which is how the closed forms are cross-checked.
    """
    if tol < 1e-12:
        raise ValueError("tol must be at least 1e-12")
    eq = as_exp_quadratic(f)
    if method == "auto" and eq is not None:
        return gaussian_norm_expquad(eq, ctx)
    if method == "exact":
        if eq is None:
            raise ValueError("exact norm needs an exp-quadratic function")
        return gaussian_norm_expquad(eq, ctx)
    alpha, p = ctx.alpha, ctx.p
    if ctx.finite:
        if method not in ("auto", "quadrature"):
            raise ValueError(f"method {method!r} is not available for p < inf")
        log_int, rel = _quadrature_log_norm(f, alpha, p, tol)
        if math.isinf(log_int):
            return NormResult(math.inf, NormMethod.QUADRATURE, 0.0, math.inf)
        log_norm = (math.log(alpha * p / (2 * math.pi)) + log_int) / p
        res = NormResult.from_log(log_norm, NormMethod.QUADRATURE)
        return NormResult(res.value, res.method, res.value * rel / p, log_norm)
    if method not in ("auto", "grid"):
        raise ValueError(f"method {method!r} is not available for p = inf")
    log_sup, err = _grid_log_sup(f, alpha, tol)
    if math.isinf(log_sup):
        return NormResult(math.inf, NormMethod.RAY_SUP, 0.0, math.inf)
    res = NormResult.from_log(log_sup, NormMethod.RAY_SUP)
    return NormResult(res.value, res.method, res.value * err, log_sup)


def _compare(x: float, y: float) -> int:
    """Three-way comparison with relative slack for exact-input arithmetic."""
    if abs(x - y) <= EQ_SLACK * max(abs(x), abs(y), 1e-300):
        return 0
    return -1 if x < y else 1


def membership(f: EntireFunction, ctx: FockContext) -> Membership:
    """Decide whether ``f`` lies in the space described by ``ctx``.

    Exp-quadratic forms (with or without a polynomial factor) are decided
    algebraically from ``|a2|`` against ``alpha / 2``. On the boundary only
    the full sup-norm space can contain the function, and only when the
    polynomial factor is constant and the linear term is orthogonal to the
    null direction of the weight (``e^{bz^2}`` itself being the basic case).
    """
    alpha = ctx.alpha
    if isinstance(f, (ExpQuadratic, PolyTimesExpQuad)):
        core = f if isinstance(f, ExpQuadratic) else f.core
        cmp = _compare(abs(core.a2) ** 2, (alpha / 2) ** 2)
        if cmp < 0:
            return Membership.IN
        if cmp > 0:
            return Membership.NOT_IN
        if ctx.flavor is not Flavor.FINFTY:
            return Membership.NOT_IN
        if as_exp_quadratic(f) is None:
            return Membership.NOT_IN
        c = _rotated_linear(core.a1, core.a2)
        if abs(c.real) <= EQ_SLACK * max(1.0, abs(core.a1)):
            return Membership.BOUNDARY_IN
        return Membership.NOT_IN
    prof = order_type(f)
    if prof.order < 1.9:
        return Membership.IN
    if prof.order > 2.1:
        return Membership.NOT_IN
    sigma = taylor_type_at_order(f.coeffs, 2.0)
    if sigma < 0.98 * alpha / 2:
        return Membership.IN
    if sigma > 1.02 * alpha / 2:
        return Membership.NOT_IN
    try:
        res = fock_norm(f, ctx, tol=1e-8)
    except NonConvergent:
        return Membership.INDETERMINATE
    return Membership.NOT_IN if res.is_infinite else Membership.IN


class DecayVerdict(str, Enum):
    DECAYS_TO_ZERO = "DecaysToZero"
    BOUNDED_NON_VANISHING = "BoundedNonVanishing"
    GROWS = "Grows"


@dataclass(frozen=True)
class RayProfile:
    theta: float
    r: np.ndarray
    log_profile: np.ndarray
    sup: float
    slope: float
    verdict: DecayVerdict

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "sup": self.sup,
            "tail_log_slope": self.slope,
            "verdict": self.verdict.value,
        }


def decay_profile(
    f: EntireFunction,
    alpha: float,
    n_rays: int = 8,
    r_max: float = 10.0,
    thetas=None,
    n_samples: int = 200,
    slope_threshold: float = 1e-6,
) -> list[RayProfile]:
    """Sample ``log(|f(r e^{i theta})| e^{-alpha r^2 / 2})`` along rays.

    Each ray is judged by the least-squares slope of the log profile over the
    last quartile of radii. ``thetas`` overrides the equispaced directions.
    """
    if thetas is None:
        if n_rays < 4:
            raise ValueError("n_rays must be at least 4")
        thetas = 2 * np.pi * np.arange(n_rays) / n_rays
    r = np.linspace(0.0, r_max, n_samples)
    q = r >= 0.75 * r_max
    out = []
    for th in np.atleast_1d(thetas):
        prof = np.real(f.log(r * np.exp(1j * th))) - 0.5 * alpha * r * r
        slope = float(np.polyfit(r[q], prof[q], 1)[0])
        if slope < -slope_threshold:
            v = DecayVerdict.DECAYS_TO_ZERO
        elif slope > slope_threshold:
            v = DecayVerdict.GROWS
        else:
            v = DecayVerdict.BOUNDED_NON_VANISHING
        out.append(RayProfile(float(th), r, prof, float(np.exp(np.max(prof))), slope, v))
    return out
