"""The acceptance criteria as runnable checks.

Each ``criterion_k(seed)`` returns a :class:`CriterionResult`; ``run_all``
drives them for the ``verify`` command and the test-suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .complexfn import (
    ExpQuadratic,
    PolyTimesExpQuad,
    expm1_quadratic_over_z,
    kernel_function,
)
from .dynamics import (
    Trend,
    angle_criterion_ratio,
    isometry_report,
    limit_residuals,
    scaled_iterate_norms,
)
from .fockspace import (
    DecayVerdict,
    Flavor,
    FockContext,
    decay_profile,
    fock_norm,
    kernel_norm,
)
from .iterates import (
    IterateImage,
    iterate_apply,
    iterate_apply_product,
    iterate_coeffs,
    limit_coefficients,
    limit_function,
)
from .wcomp import (
    AffineSymbol,
    Verdict,
    WeightedCompOp,
    classify,
    numeric_classify,
    square,
)

__all__ = ["CriterionResult", "CRITERIA", "run_all", "boundary_example"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    elapsed: float
    time_limit: float

    @property
    def in_time(self) -> bool:
        return self.elapsed < self.time_limit

    @property
    def ok(self) -> bool:
        return self.passed and self.in_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (
            f"[{status}] criterion {self.number:2d}: {self.title} "
            f"({self.elapsed:.2f}s / {self.time_limit:.0f}s) {self.detail}"
        )

    def to_json(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.ok,
            "detail": self.detail,
            "elapsed": self.elapsed,
            "time_limit": self.time_limit,
        }


def boundary_example(ctx: FockContext | None = None) -> WeightedCompOp:
    """``psi = exp(3/8 z^2)``, ``phi(z) = z/2`` with ``alpha = 1``."""
    return WeightedCompOp(ExpQuadratic(0, 0, 3 / 8), AffineSymbol(0, 0.5), ctx or FockContext(2, 1.0))


def _cplx(rng, scale=1.0) -> complex:
    return complex(*rng.normal(size=2)) * scale


def _unit(rng) -> complex:
    return complex(np.exp(2j * np.pi * rng.uniform()))


def _random_margin_op(rng, margin=0.05, ctx=None) -> WeightedCompOp:
    alpha = rng.uniform(0.5, 2.0)
    lam = rng.uniform(0.05, 0.95) * _unit(rng)
    ab = alpha * (1 - abs(lam) ** 2)
    while True:
        mu = rng.uniform(-0.95 * ab, 1.0)
        if abs(mu) >= margin:
            break
    a2 = (mu + ab) / 2 * _unit(rng)
    psi = ExpQuadratic(_cplx(rng), _cplx(rng), a2)
    return WeightedCompOp(psi, AffineSymbol(_cplx(rng), lam), ctx or FockContext(2, alpha))


def _random_boundary_op(rng, kind: str, lam=None, ctx=None) -> WeightedCompOp:
    """Operators on the boundary ``2|a2| = alpha*beta``: ``t = 0``, aligned
    (bounded) or misaligned (unbounded) linear term."""
    alpha = rng.uniform(0.5, 2.0)
    if lam is None:
        lam = rng.uniform(0.1, 0.9) * _unit(rng)
    ab = alpha * (1 - abs(lam) ** 2)
    a = _cplx(rng)
    if kind == "t_zero":
        a1 = -alpha * a.conjugate() * lam
        a2 = ab / 2 * _unit(rng)
    else:
        a1 = _cplx(rng)
        t = a1 + alpha * a.conjugate() * lam
        a2 = -(ab / 2) * t * t / abs(t) ** 2
        if kind == "misaligned":
            a2 = a2 * complex(np.exp(1j * rng.uniform(0.3, 2 * np.pi - 0.3)))
    return WeightedCompOp(ExpQuadratic(_cplx(rng), a1, a2), AffineSymbol(a, lam), ctx or FockContext(2, alpha))


def _timed(number, title, limit, body):
    t0 = time.perf_counter()
    try:
        passed, detail = body()
    except Exception as e:  # a crash is a failure with its reason recorded
        passed, detail = False, f"raised {type(e).__name__}: {e}"
    return CriterionResult(number, title, bool(passed), detail, time.perf_counter() - t0, limit)


def criterion_1(seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for i in range(20):
            alpha = rng.uniform(0.5, 2.0)
            p = (1.0, 2.0, math.inf)[i % 3]
            w = _cplx(rng, 0.8)
            ctx = FockContext(p, alpha)
            method = "grid" if math.isinf(p) else "quadrature"
            for f, target in ((ExpQuadratic(), 1.0), (kernel_function(w, alpha), kernel_norm(w, ctx))):
                for m in ("auto", method):
                    v = fock_norm(f, ctx, tol=1e-10, method=m).value
                    worst = max(worst, abs(v - target) / target)
        return worst <= 1e-8, f"max rel err {worst:.2e} (closed form and numerical paths)"

    return _timed(1, "norm oracles for 1 and kernels", 10.0, body)


def criterion_2(seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed + 2)
        worst = 0.0
        for _ in range(20):
            alpha = rng.uniform(0.5, 2.0)
            c = rng.uniform(-0.45, 0.45) * alpha
            target = math.sqrt(alpha) / (alpha**2 - 4 * c * c) ** 0.25
            f = ExpQuadratic(0, 0, c)
            ctx = FockContext(2, alpha)
            for m in ("exact", "quadrature"):
                v = fock_norm(f, ctx, tol=1e-10, method=m).value
                worst = max(worst, abs(v - target) / target)
        return worst <= 1e-8, f"max rel err {worst:.2e} (closed form and quadrature)"

    return _timed(2, "Gaussian closed form vs quadrature", 10.0, body)


def criterion_3(seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed + 3)
        agree = 0
        counts = {}
        for _ in range(200):
            W = _random_margin_op(rng)
            exact = classify(W).verdict
            if numeric_classify(W).verdict is exact:
                agree += 1
            counts[exact.value] = counts.get(exact.value, 0) + 1
        return agree == 200, f"{agree}/200 agree; verdicts {counts}"

    return _timed(3, "classifier vs numeric M_z oracle", 60.0, body)


def criterion_4(seed: int = 0) -> CriterionResult:
    def body():
        ctx = FockContext(2, 1.0)
        ab2 = 1.0 * 0.75 / 2
        phi = AffineSymbol(0, 0.5)
        cases = [
            ("example", WeightedCompOp(ExpQuadratic(0, 0, ab2), phi, ctx), Verdict.BOUNDED_NOT_COMPACT),
            (
                "z*exp",
                WeightedCompOp(PolyTimesExpQuad((0, 1), ExpQuadratic(0, 0, ab2)), phi, ctx),
                Verdict.UNBOUNDED,
            ),
            ("expm1/z", WeightedCompOp(expm1_quadratic_over_z(ab2), phi, ctx), Verdict.COMPACT),
            ("translate", WeightedCompOp(ExpQuadratic(), AffineSymbol(1, 1), ctx), Verdict.UNBOUNDED),
            ("rotate", WeightedCompOp(ExpQuadratic(), AffineSymbol(0, 1j), ctx), Verdict.ISOMETRY_MULTIPLE),
            ("identity", WeightedCompOp(ExpQuadratic(), AffineSymbol(0, 1), ctx), Verdict.ISOMETRY_MULTIPLE),
        ]
        got = {name: classify(W).verdict for name, W, _ in cases}
        bad = [n for n, _, want in cases if got[n] is not want]
        return not bad, "all match" if not bad else f"mismatch: {bad}"

    return _timed(4, "worked examples reproduced", 5.0, body)


def criterion_5(seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed + 5)
        checks = fails = 0
        for _ in range(200):
            alpha = rng.uniform(0.5, 2.0)
            lam = rng.uniform(0.1, 0.9) * _unit(rng)
            psi = ExpQuadratic(_cplx(rng), _cplx(rng), _cplx(rng, 0.3))
            W = WeightedCompOp(psi, AffineSymbol(_cplx(rng), lam), FockContext(2, alpha))
            f = ExpQuadratic(_cplx(rng, 0.2), _cplx(rng), _cplx(rng, 0.1))
            for n in (2, 5, 17, 64):
                z = _cplx(rng)
                for g in (ExpQuadratic(), f):
                    checks += 1
                    if not iterate_apply(W, g, n, z).agrees(iterate_apply_product(W, g, n, z), 1e-10):
                        fails += 1
        return fails == 0, f"{checks - fails}/{checks} evaluations agree to 1e-10"

    return _timed(5, "closed-form iterates vs product oracle", 30.0, body)


def criterion_6(seed: int = 0) -> CriterionResult:
    """``c1n - c1`` is a combination of the geometric modes ``lam^n`` and
    ``lam^{2n}``; for complex ``lam`` they beat against each other, so the
    fit is done on ``(c1n - c1) / |lam|^n`` against both modes, and the
    envelope ``|c1n - c1| <= K |lam|^n`` is checked with the fitted ``K``."""

    def body():
        rng = np.random.default_rng(seed + 6)
        worst_r2 = 1.0
        envelope_ok = True
        ns = np.arange(1, 41)
        for _ in range(50):
            # |lam|^40 stays far above double rounding of c1n
            lam = rng.uniform(0.6, 0.95) * _unit(rng)
            psi = ExpQuadratic(_cplx(rng), _cplx(rng), _cplx(rng, 0.3))
            W = WeightedCompOp(psi, AffineSymbol(_cplx(rng), lam), FockContext(2, rng.uniform(0.5, 2)))
            _, c1, _ = limit_coefficients(W)
            d = np.array([iterate_coeffs(W, int(n)).c1n - c1 for n in ns])
            scale = abs(lam) ** ns
            u = d / scale
            X = np.column_stack([lam**ns / scale, lam ** (2 * ns) / scale])
            coef, *_ = np.linalg.lstsq(X, u, rcond=None)
            resid = u - X @ coef
            r2 = 1 - float(np.sum(np.abs(resid) ** 2) / np.sum(np.abs(u - u.mean()) ** 2))
            worst_r2 = min(worst_r2, r2)
            K = float(np.sum(np.abs(coef)))
            envelope_ok &= bool(np.all(np.abs(d) <= K * scale * (1 + 1e-9)))
        ok = worst_r2 >= 0.999 and envelope_ok
        return ok, f"min R^2 {worst_r2:.9f} on the lambda^n / lambda^2n modes, envelope holds {envelope_ok}"

    return _timed(6, "geometric convergence of c1n", 20.0, body)


def criterion_7(seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed + 7)
        ok = 0
        worst = -math.inf
        for i in range(50):
            lam = rng.uniform(0.1, 0.9) * complex(np.exp(1j * rng.uniform(0.1, np.pi - 0.1)))
            if rng.uniform() < 0.5:
                lam = lam.conjugate()
            W = _random_boundary_op(rng, "t_zero" if i % 2 == 0 else "aligned", lam=lam)
            if classify(W).verdict is not Verdict.BOUNDED_NOT_COMPACT:
                continue
            sq = classify(square(W))
            worst = max(worst, sq.certificate.mu)
            if sq.verdict is Verdict.COMPACT and sq.certificate.mu < 0:
                ok += 1
        return ok == 50, f"{ok}/50 squares compact; largest margin mu = {worst:.3e}"

    return _timed(7, "square of non-real-lambda boundary operators is compact", 10.0, body)


def criterion_8(seed: int = 0) -> CriterionResult:
    def body():
        W = boundary_example()
        lam = 0.5
        rep = scaled_iterate_norms(W, ExpQuadratic(), N=40)
        closed = [lam ** (-n / 2) * (2 - lam ** (2 * n)) ** -0.25 for n in rep.n]
        err = max(abs(v - c) / c for v, c in zip(rep.values, closed))
        quad = max(
            abs(fock_norm(IterateImage(W, ExpQuadratic(), n), W.ctx, method="quadrature").value - closed[n - 1])
            / closed[n - 1]
            for n in (1, 2, 3, 4)
        )
        ok = err <= 1e-8 and quad <= 1e-8 and rep.trend is Trend.DIVERGES
        return ok, (
            f"max rel err {err:.2e} (n<=40), quadrature n<=4 {quad:.2e}, "
            f"trend {rep.trend.value}, rate {rep.fit:.6f}"
        )

    return _timed(8, "scaled iterate norms diverge", 10.0, body)


def criterion_9(seed: int = 0) -> CriterionResult:
    def body():
        W = boundary_example()
        lam = 0.5
        rep = angle_criterion_ratio(W, ExpQuadratic(), N=40)
        closed = [lam ** (n / 2) * (2 - lam ** (2 * n)) ** 0.25 for n in rep.n]
        err = max(abs(v - c) / c for v, c in zip(rep.values, closed))
        ok = err <= 1e-8 and rep.trend is Trend.CONVERGES_TO_ZERO
        return ok, f"max rel err {err:.2e}, trend {rep.trend.value}, rate {rep.fit:.6f}"

    return _timed(9, "Angle-Criterion ratios vanish", 10.0, body)


def criterion_10(seed: int = 0) -> CriterionResult:
    def body():
        ctx0 = FockContext(math.inf, 1.0, Flavor.FINFTY_ZERO)
        W = boundary_example(ctx0)
        L = limit_function(W)
        full = FockContext(math.inf, 1.0, Flavor.FINFTY)
        exact = fock_norm(L.F, full).value
        grid = fock_norm(L.F, full, method="grid").value
        rays = decay_profile(L.F, 1.0, n_rays=8, r_max=10.0)
        nonvanishing = any(r.verdict is DecayVerdict.BOUNDED_NON_VANISHING for r in rays)
        seq = limit_residuals(W, L, ExpQuadratic(), list(range(10, 61)))
        res = seq.values
        mono = all(b <= a for a, b in zip(res, res[1:]))
        ok = abs(exact - 1) <= 1e-8 and abs(grid - 1) <= 1e-8 and nonvanishing and res[-1] <= 1e-6 and mono
        return ok, (
            f"||F|| exact {exact:.12f} grid {grid:.12f}, non-vanishing ray {nonvanishing}, "
            f"residual(60) {res[-1]:.2e}, nonincreasing {mono}"
        )

    return _timed(10, "limit operator on the vanishing sup-norm space", 20.0, body)


def criterion_11(seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed + 11)
        dev = res = 0.0
        for i in range(20):
            alpha = rng.uniform(0.5, 2.0)
            lam = _unit(rng)
            a = _cplx(rng, 0.7)
            psi = ExpQuadratic(_cplx(rng, 0.5), -alpha * a.conjugate() * lam, 0)
            ctx = (FockContext(1, alpha), FockContext(2, alpha), FockContext(math.inf, alpha, Flavor.FINFTY_ZERO))[i % 3]
            rep = isometry_report(WeightedCompOp(psi, AffineSymbol(a, lam), ctx))
            dev = max(dev, rep.max_ratio_deviation)
            res = max(res, rep.max_paranormal_residual)
        return dev <= 1e-6 and res <= 1e-8, f"max ratio deviation {dev:.2e}, max paranormal residual {res:.2e}"

    return _timed(11, "isometry multiples and paranormality", 30.0, body)


def criterion_12(seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed + 12)
        same = 0
        ctxs = lambda al: (  # noqa: E731
            FockContext(1, al),
            FockContext(2, al),
            FockContext(math.inf, al, Flavor.FINFTY_ZERO),
        )
        kinds = ("t_zero", "aligned", "misaligned")
        for i in range(100):
            W = _random_margin_op(rng) if i % 4 else _random_boundary_op(rng, kinds[(i // 4) % 3])
            verdicts = {classify(W.with_ctx(c)).verdict for c in ctxs(W.alpha)}
            same += len(verdicts) == 1
        return same == 100, f"{same}/100 operators classified identically for p in {{1, 2, inf-zero}}"

    return _timed(12, "classification independent of p", 30.0, body)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
}


def run_all(seed: int = 0, only=None) -> list[CriterionResult]:
    keys = sorted(CRITERIA) if not only else sorted(only)
    return [CRITERIA[k](seed) for k in keys]
