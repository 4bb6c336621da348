import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fock_oplab.complexfn import (
    Exactness,
    ExpQuadratic,
    PolyTimesExpQuad,
    TaylorSeries,
    compose_affine,
    expm1_quadratic_over_z,
    kernel_function,
    max_modulus,
    order_type,
    times_exp,
)
from fock_oplab.errors import InsufficientCoefficients, RadiusExceeded

mp.mp.dps = 40

coef = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)
point = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def mp_c(z):
    return mp.mpc(z.real, z.imag)


def rel(a, b):
    return abs(complex(a) - complex(b)) / max(abs(complex(b)), 1e-300)


@settings(max_examples=100, deadline=None)
@given(coef, coef, coef, point)
def test_exp_quadratic_matches_high_precision(a0, a1, a2, z):
    f = ExpQuadratic(a0, a1, a2)
    ref = mp.exp(mp_c(a0) + mp_c(a1) * mp_c(z) + mp_c(a2) * mp_c(z) ** 2)
    assert rel(f(z), ref) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.lists(coef, min_size=1, max_size=5).filter(lambda c: abs(c[-1]) > 1e-3), coef, coef, point)
def test_poly_times_matches_high_precision(poly, a1, a2, z):
    f = PolyTimesExpQuad(tuple(poly), ExpQuadratic(0, a1, a2))
    q = sum(mp_c(c) * mp_c(z) ** k for k, c in enumerate(poly))
    ref = q * mp.exp(mp_c(a1) * mp_c(z) + mp_c(a2) * mp_c(z) ** 2)
    if abs(complex(ref)) < 1e-8:  # relative error is meaningless at a zero of Q
        return
    assert rel(f(z), ref) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(coef.filter(lambda c: abs(c) > 0.05), point.filter(lambda z: abs(z) > 1e-3))
def test_expm1_series_matches_high_precision(c, z):
    f = expm1_quadratic_over_z(c)
    ref = mp.expm1(mp_c(c) * mp_c(z) ** 2) / mp_c(z)
    assert rel(f(z), ref) <= 1e-10


def test_poly_one_equals_core():
    rng = np.random.default_rng(1)
    core = ExpQuadratic(0.3 - 0.1j, 0.5j, 0.2 + 0.1j)
    f = PolyTimesExpQuad((1,), core)
    z = rng.normal(size=100) * 2 + 1j * rng.normal(size=100) * 2
    assert np.array_equal(f(z), core(z))


@settings(max_examples=50, deadline=None)
@given(coef, coef.filter(lambda c: c != 0))
def test_type_of_exp_quadratic_is_abs_a2(a1, a2):
    prof = order_type(ExpQuadratic(0, a1, a2))
    assert prof.order == 2.0
    assert prof.type == abs(complex(a2))
    assert prof.exactness is Exactness.EXACT


def test_order_type_lower_orders():
    assert order_type(ExpQuadratic(0, 0.5, 0)).order == 1.0
    assert order_type(ExpQuadratic(1, 0, 0)).type is None
    assert order_type(PolyTimesExpQuad((1, 2), ExpQuadratic(0, 0, 0.3j))).type == pytest.approx(0.3)


def test_taylor_order_type_estimate():
    prof = order_type(expm1_quadratic_over_z(0.4))
    assert prof.exactness is Exactness.ESTIMATED
    assert abs(prof.order - 2) < 0.05
    assert abs(prof.type - 0.4) < 0.02 * 0.4


def test_taylor_needs_coefficients():
    f = TaylorSeries((1, 2, 3), 1.0, 1.0)
    with pytest.raises(InsufficientCoefficients):
        order_type(f)


@pytest.mark.parametrize("f", [
    ExpQuadratic(0, 1 + 1j, 0.3 - 0.2j),
    PolyTimesExpQuad((1, -2, 0.5), ExpQuadratic(0, 0.4, 0.1j)),
    expm1_quadratic_over_z(0.3 + 0.1j),
])
def test_max_modulus_monotone_on_nested_grids(f):
    for r in (0.5, 1.7, 3.0):
        vals = [max_modulus(f, r, 8 * 2**k) for k in range(7)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_taylor_refuses_outside_certified_radius():
    f = expm1_quadratic_over_z(0.5, terms=40)
    r = f.certified_radius
    assert r > 1
    f(0.9 * r)
    with pytest.raises(RadiusExceeded):
        f(1.1 * r + 1)


def test_taylor_envelope_is_valid():
    c = 0.7 - 0.2j
    f = expm1_quadratic_over_z(c, terms=60)
    n = np.arange(f.n_terms)
    log_bound = math.log(f.envelope_c) + n * math.log(f.envelope_gamma) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    mags = np.abs(np.array(f.coeffs))
    nz = mags > 0
    assert np.all(np.log(mags[nz]) <= log_bound[nz] + 1e-12)


@settings(max_examples=50, deadline=None)
@given(coef, coef, coef, coef, coef.filter(lambda c: abs(c) > 1e-3), point)
def test_compose_affine(a0, a1, a2, b, lam, z):
    f = ExpQuadratic(a0, a1, a2)
    g = compose_affine(f, b, lam)
    assert np.isclose(g.log(z), f.log(b + lam * z), rtol=1e-12, atol=1e-12)


def test_times_exp_and_kernel():
    e = ExpQuadratic(0.1, 0.2, 0.3)
    f = PolyTimesExpQuad((1, 1), ExpQuadratic(0, -1, 0))
    g = times_exp(f, e)
    z = 0.7 - 0.4j
    assert abs(g(z) - f(z) * e(z)) <= 1e-13 * abs(g(z))
    k = kernel_function(1 - 2j, 0.5)
    assert abs(k(z) - np.exp(0.5 * np.conj(1 - 2j) * z)) <= 1e-14 * abs(k(z))
