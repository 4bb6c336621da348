import math

import mpmath as mp
import numpy as np
import pytest

from fock_oplab.complexfn import ExpQuadratic, PolyTimesExpQuad, expm1_quadratic_over_z, kernel_function
from fock_oplab.fockspace import (
    DecayVerdict,
    Flavor,
    FockContext,
    Membership,
    NormMethod,
    decay_profile,
    fock_norm,
    gaussian_norm_expquad,
    kernel_norm,
    membership,
)
from fock_oplab.jsonio import dumps


def _cplx(rng, s=1.0):
    return complex(*rng.normal(size=2)) * s


def test_quadrature_matches_closed_form():
    rng = np.random.default_rng(10)
    worst = 0.0
    for i in range(50):
        alpha = rng.uniform(0.5, 2.0)
        p = (1.0, 2.0, 4.0)[i % 3]
        a2 = rng.uniform(0, 0.4 * alpha / 2) * np.exp(2j * np.pi * rng.uniform())
        f = ExpQuadratic(_cplx(rng, 0.3), _cplx(rng, 0.7), a2)
        ctx = FockContext(p, alpha)
        exact = gaussian_norm_expquad(f, ctx).value
        quad = fock_norm(f, ctx, tol=1e-10, method="quadrature").value
        worst = max(worst, abs(quad - exact) / exact)
    assert worst <= 1e-8


def test_sup_grid_matches_closed_form():
    rng = np.random.default_rng(11)
    for _ in range(10):
        alpha = rng.uniform(0.5, 2.0)
        f = ExpQuadratic(_cplx(rng, 0.3), _cplx(rng, 0.7), rng.uniform(0, 0.4) * alpha / 2)
        ctx = FockContext(math.inf, alpha)
        exact = fock_norm(f, ctx).value
        grid = fock_norm(f, ctx, method="grid").value
        assert grid == pytest.approx(exact, rel=1e-8)


def _series_norm2(poly, a1, alpha, terms=120):
    """F^2 norm of Q(z) exp(a1 z) from its Taylor coefficients."""
    mp.mp.dps = 40
    e = [mp.mpc(a1.real, a1.imag) ** k / mp.factorial(k) for k in range(terms)]
    c = [sum(mp.mpc(q.real, q.imag) * e[n - j] for j, q in enumerate(poly) if n - j >= 0) for n in range(terms)]
    s = mp.fsum(abs(cn) ** 2 * mp.factorial(n) / mp.mpf(alpha) ** n for n, cn in enumerate(c))
    return float(mp.sqrt(s))


@pytest.mark.parametrize("poly,a1,alpha", [
    ((1, 1), -1.0, 1.0),
    ((0.5j, -1, 0.25), 0.3 + 0.2j, 1.5),
    ((2, 0, 0, 1), 0.1j, 0.8),
])
def test_poly_times_norm_against_series(poly, a1, alpha):
    f = PolyTimesExpQuad(tuple(complex(q) for q in poly), ExpQuadratic(0, a1, 0))
    got = fock_norm(f, FockContext(2, alpha), tol=1e-11).value
    assert got == pytest.approx(_series_norm2([complex(q) for q in poly], complex(a1), alpha), rel=1e-8)


def test_pointwise_bound():
    rng = np.random.default_rng(12)
    fs = [
        (ExpQuadratic(0.1, 0.5 - 0.2j, 0.2j), FockContext(2, 1.0)),
        (PolyTimesExpQuad((1, 1), ExpQuadratic(0, -1, 0)), FockContext(1, 1.0)),
        (ExpQuadratic(0, 0.3, 0.1), FockContext(math.inf, 0.7)),
    ]
    for f, ctx in fs:
        norm = fock_norm(f, ctx, tol=1e-10).value
        z = rng.normal(size=100) * 2 + 1j * rng.normal(size=100) * 2
        bound = norm * np.exp(ctx.alpha * np.abs(z) ** 2 / 2) * (1 + 1e-8)
        assert np.all(np.abs(f(z)) <= bound)


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_kernel_norm(p):
    rng = np.random.default_rng(13)
    for _ in range(5):
        alpha = rng.uniform(0.5, 2)
        w = _cplx(rng, 0.8)
        ctx = FockContext(p, alpha)
        k = kernel_function(w, alpha)
        assert fock_norm(k, ctx).value == pytest.approx(kernel_norm(w, ctx), rel=1e-8)
        method = "grid" if math.isinf(p) else "quadrature"
        assert fock_norm(k, ctx, method=method).value == pytest.approx(kernel_norm(w, ctx), rel=1e-8)


def test_homogeneity():
    f = ExpQuadratic(0.2, 0.4 - 0.1j, 0.15j)
    for p in (1.0, 2.0, math.inf):
        ctx = FockContext(p, 1.0)
        for c in (2.5, -0.3j, 1e-3 + 1e-3j):
            assert fock_norm(f.scaled(c), ctx).value == pytest.approx(abs(c) * fock_norm(f, ctx).value, rel=1e-10)
    g = PolyTimesExpQuad((1, 0.5), ExpQuadratic(0, 0.2, 0))
    ctx = FockContext(2, 1.0)
    g3 = PolyTimesExpQuad((1, 0.5), ExpQuadratic(math.log(3), 0.2, 0))
    assert fock_norm(g3, ctx).value == pytest.approx(3 * fock_norm(g, ctx).value, rel=1e-9)


def test_divergent_norms():
    assert fock_norm(ExpQuadratic(0, 0, 0.5), FockContext(2, 1.0)).is_infinite
    assert fock_norm(ExpQuadratic(0, 0, 0.6), FockContext(2, 1.0), method="quadrature").is_infinite
    assert fock_norm(ExpQuadratic(0, 0, 0.6), FockContext(math.inf, 1.0), method="grid").is_infinite
    on_boundary = fock_norm(ExpQuadratic(0, 0, 0.5), FockContext(math.inf, 1.0))
    assert on_boundary.value == pytest.approx(1.0)
    assert fock_norm(ExpQuadratic(0, 1, 0.5), FockContext(math.inf, 1.0)).is_infinite


def test_membership():
    f = ExpQuadratic(0, 0, 0.5)
    assert membership(f, FockContext(2, 1.0)) is Membership.NOT_IN
    assert membership(f, FockContext(math.inf, 1.0)) is Membership.BOUNDARY_IN
    assert membership(f, FockContext(math.inf, 1.0, Flavor.FINFTY_ZERO)) is Membership.NOT_IN
    assert membership(ExpQuadratic(0, 1j, 0.5), FockContext(math.inf, 1.0)) is Membership.BOUNDARY_IN
    assert membership(ExpQuadratic(0, 1, 0.5), FockContext(math.inf, 1.0)) is Membership.NOT_IN
    assert membership(ExpQuadratic(0, 3, 0.49), FockContext(1, 1.0)) is Membership.IN
    assert membership(expm1_quadratic_over_z(0.3), FockContext(2, 1.0)) is Membership.IN
    assert membership(expm1_quadratic_over_z(0.8), FockContext(2, 1.0)) is Membership.NOT_IN


def test_tolerance_floor():
    with pytest.raises(ValueError):
        fock_norm(ExpQuadratic(), FockContext(2, 1.0), tol=1e-13)


def test_context_validation():
    with pytest.raises(ValueError):
        FockContext(0.5, 1.0)
    with pytest.raises(ValueError):
        FockContext(2, -1.0)
    with pytest.raises(ValueError):
        FockContext(2, 1.0, Flavor.FINFTY_ZERO)


def test_norm_result_json():
    r = fock_norm(ExpQuadratic(0, 0, 0.5), FockContext(2, 1.0))
    assert '"inf"' in dumps(r)
    r = fock_norm(ExpQuadratic(), FockContext(2, 1.0))
    assert r.method is NormMethod.EXACT_GAUSSIAN


def test_decay_profile():
    F = ExpQuadratic(0, 0, 0.5)
    rays = decay_profile(F, 1.0, n_rays=8, r_max=10.0)
    verdicts = {round(r.theta, 6): r.verdict for r in rays}
    assert verdicts[0.0] is DecayVerdict.BOUNDED_NON_VANISHING
    assert verdicts[round(math.pi / 2, 6)] is DecayVerdict.DECAYS_TO_ZERO
    grow = decay_profile(ExpQuadratic(0, 0, 0.6), 1.0)
    assert any(r.verdict is DecayVerdict.GROWS for r in grow)
