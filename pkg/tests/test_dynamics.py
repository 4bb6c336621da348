import math

import numpy as np
import pytest

from fock_oplab.acceptance import boundary_example
from fock_oplab.complexfn import ExpQuadratic, PolyTimesExpQuad
from fock_oplab.dynamics import (
    DynamicsConfig,
    Trend,
    angle_criterion_ratio,
    isometry_report,
    limit_residuals,
    scaled_iterate_norms,
    standard_test_functions,
    supercyclicity_report,
    trend_of,
)
from fock_oplab.errors import HypothesisViolated
from fock_oplab.fockspace import Flavor, FockContext, fock_norm, kernel_norm
from fock_oplab.iterates import IterateImage, limit_function, scaled_iterate_apply
from fock_oplab.wcomp import AffineSymbol, Verdict, WeightedCompOp, adjoint_on_kernel, classify


def test_trend_detection():
    n = np.arange(1, 41)
    assert trend_of(n, 0.01 * n)[0] is Trend.DIVERGES
    assert trend_of(n, -0.01 * n)[0] is Trend.CONVERGES_TO_ZERO
    assert trend_of(n, 1 + np.exp(-n))[0] is Trend.BOUNDED
    assert trend_of(n[:3], n[:3])[0] is Trend.INCONCLUSIVE
    t, fit = trend_of(n, n * math.log(0.5))
    assert fit == pytest.approx(0.5)


def test_example_ratios_closed_form():
    W = boundary_example()
    rep = angle_criterion_ratio(W, ExpQuadratic(), N=40)
    closed = [0.5 ** (n / 2) * (2 - 0.5 ** (2 * n)) ** 0.25 for n in rep.n]
    assert np.allclose(rep.values, closed, rtol=1e-8, atol=0)
    assert rep.trend is Trend.CONVERGES_TO_ZERO


def test_scaled_norms_quadrature_crosscheck():
    W = boundary_example()
    rep = scaled_iterate_norms(W, ExpQuadratic(), N=12)
    assert rep.trend is Trend.DIVERGES
    for n in (1, 3):
        q = fock_norm(IterateImage(W, ExpQuadratic(), n), W.ctx, method="quadrature").value
        assert q == pytest.approx(rep.values[n - 1], rel=1e-8)


def test_compact_ratio_is_bounded():
    W = WeightedCompOp(ExpQuadratic(0, 0, 0.1), AffineSymbol(0, 0.5), FockContext(2, 1.0))
    rep = angle_criterion_ratio(W, ExpQuadratic(), N=64)
    assert rep.trend in (Trend.BOUNDED, Trend.CONVERGES_TO_ZERO)
    assert all(np.isfinite(rep.log_values))


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_isometry_report(p):
    a, lam, alpha = 0.4 - 0.3j, np.exp(1.3j), 1.2
    psi = ExpQuadratic(0.2 + 0.1j, -alpha * np.conj(a) * lam, 0)
    W = WeightedCompOp(psi, AffineSymbol(a, lam), FockContext(p, alpha))
    rep = isometry_report(W)
    assert rep.max_ratio_deviation <= 1e-6
    assert rep.max_paranormal_residual <= 1e-8
    assert set(e["function"] for e in rep.entries) == set(standard_test_functions(alpha))


def test_isometry_requires_isometry():
    with pytest.raises(HypothesisViolated):
        isometry_report(boundary_example())


def test_limit_residuals_example():
    W = boundary_example(FockContext(math.inf, 1.0, Flavor.FINFTY_ZERO))
    L = limit_function(W)
    for f in (ExpQuadratic(), ExpQuadratic(0, 0.3, 0.1), ExpQuadratic(0.2, -0.5j, 0)):
        seq = limit_residuals(W, L, f, list(range(10, 61)))
        v = seq.values
        assert all(b <= a for a, b in zip(v, v[1:]))
        assert v[-1] <= 1e-6


def test_limit_residuals_against_direct_difference():
    # at moderate n the direct subtraction is accurate enough to compare
    W = boundary_example(FockContext(math.inf, 1.0, Flavor.FINFTY_ZERO))
    L = limit_function(W)
    f = ExpQuadratic(0, 0.3, 0.1)
    n = 6
    seq = limit_residuals(W, L, f, [n], radius=2.0, size=33)
    x = np.linspace(-2, 2, 33)
    z = (x[:, None] + 1j * x[None, :]).ravel()
    z = z[np.abs(z) <= 2 * (1 + 1e-12)]
    direct = np.max(np.abs(scaled_iterate_apply(W, f, n, z) - L.c * L.F(z) * f(0)))
    assert seq.values[0] == pytest.approx(direct, rel=1e-8)


def _report(W, N=24):
    return supercyclicity_report(W, DynamicsConfig(N=N))


def test_supercyclicity_cases():
    ctx = FockContext(2, 1.0)
    rep = _report(WeightedCompOp(ExpQuadratic(0, 0, 0.1), AffineSymbol(0.2, 0.5), ctx))
    assert rep.case_tag == "CompactAdjointEigenvalue"
    assert rep.evidence["eigen_residual"] == 0

    rep = _report(boundary_example())
    assert rep.case_tag == "RealLambdaAngleCriterion"
    assert rep.sequences[0].trend is Trend.CONVERGES_TO_ZERO

    lam = 0.5 * np.exp(0.8j)
    W = WeightedCompOp(ExpQuadratic(0, 0, (1 - abs(lam) ** 2) / 2), AffineSymbol(0, lam), ctx)
    rep = _report(W)
    assert rep.case_tag == "NonRealLambdaSquareCompact"

    rep = _report(boundary_example(FockContext(math.inf, 1.0, Flavor.FINFTY_ZERO)))
    assert rep.case_tag == "FinftyZeroLimitOperator"
    assert rep.evidence["final_residual"] <= 1e-6
    assert any(r["verdict"] == "BoundedNonVanishing" for r in rep.evidence["rays"])

    rep = _report(WeightedCompOp(ExpQuadratic(), AffineSymbol(0, 1j), ctx))
    assert rep.case_tag == "IsometryMultiple"
    assert rep.verdict == "NotSupercyclic"


def test_supercyclicity_hypotheses():
    with pytest.raises(HypothesisViolated):
        _report(boundary_example(FockContext(math.inf, 1.0)))
    with pytest.raises(HypothesisViolated):
        _report(WeightedCompOp(ExpQuadratic(0, 0, 0.6), AffineSymbol(0, 0.5), FockContext(2, 1.0)))


def test_adjoint_eigenvector_norm_path():
    # ||(W*)^n k_{z0}|| = |psi(z0)|^n ||k_{z0}||
    W = WeightedCompOp(ExpQuadratic(0.1, 0.2, 0.1), AffineSymbol(0.3, 0.4), FockContext(2, 1.0))
    z0 = W.phi.fixed_point
    img = adjoint_on_kernel(W, z0)
    assert abs(img.scalar) * kernel_norm(img.point, W.ctx) == pytest.approx(
        abs(W.psi(z0)) * kernel_norm(z0, W.ctx), rel=1e-14
    )


def test_regime_checks():
    W = boundary_example()
    with pytest.raises(HypothesisViolated):
        angle_criterion_ratio(W, PolyTimesExpQuad((0, 1)), N=8)  # vanishes at z0 = 0
    with pytest.raises(HypothesisViolated):
        scaled_iterate_norms(WeightedCompOp(ExpQuadratic(0, 0, 0.1), AffineSymbol(0, 0.5), W.ctx), ExpQuadratic(), 8)
    assert classify(W).verdict is Verdict.BOUNDED_NOT_COMPACT
