import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from hypspec import kernels, selberg
from hypspec.errors import ConfigError, PreconditionError
from hypspec.kernels import EigenvalueParams, OperatorBoundInputs

T_GRID = [0.0, 0.7, 1.3, 2.0, 5.0]
R_GRID = [0.0, 0.5, 1.0, 3.0, 8.0, 0.1j, 0.3j, 0.5j]


def test_eval_h_at_zero():
    for t in (0.0, 0.3, 2.0, 7.5):
        assert kernels.eval_h(t, 0.0) == 1.0


def test_eval_j_at_t_zero():
    for r in (0.0, 0.5, 3.0):
        assert kernels.eval_j(0.0, r).real == pytest.approx(1 / math.sqrt(math.cosh(math.pi * r / 2)), rel=1e-15)


def test_eval_h_half_i_high_precision():
    mp.mp.dps = 40
    exact = mp.cos(mp.mpc(0, 0.5) * 2) / mp.cosh(mp.pi * mp.mpc(0, 0.5) / 2)
    val = kernels.eval_h(2.0, 0.5j)
    assert val.real == pytest.approx(float(exact.real), rel=1e-15)
    assert val.real == pytest.approx(math.sqrt(2) * math.cosh(1), rel=1e-15)


def test_band_error():
    with pytest.raises(ConfigError):
        kernels.eval_h(1.0, 1.2j)
    with pytest.raises(ConfigError):
        kernels.eval_j(-1.0, 0.0)


def test_linearisation_examples():
    assert kernels.linearisation_residual(1.0, 1.0, 0.0) == 0.0
    assert kernels.linearisation_residual(1.3, 0.4, 2.7) <= 1e-12
    assert kernels.linearisation_residual(2.0, 1.0, 0.3j) <= 1e-12


def test_linearisation_grid():
    worst = max(kernels.linearisation_residual(t, s, r)
                for t in T_GRID for s in T_GRID for r in R_GRID)
    assert worst <= 1e-12


@given(st.floats(0, 6), st.floats(0, 6), st.floats(0, 10), st.booleans())
def test_linearisation_property(t, s, x, imag):
    r = complex(0, x / 20) if imag else x
    scale = max(1.0, abs(kernels.eval_h(t + s, r)))
    assert kernels.linearisation_residual(t, s, r) <= 1e-12 * scale


@given(st.floats(0, 10), st.floats(-20, 20))
def test_h_even_and_bounded(t, r):
    a, b = kernels.eval_h(t, r), kernels.eval_h(t, -r)
    assert a == b
    assert abs(a) <= 1.0


def test_bl_kernel_zero_integral():
    k0 = kernels.build_bl_kernel(0.0)
    h = selberg.forward_transform(k0)
    assert h(0.5j).real == pytest.approx(math.sqrt(2), rel=1e-8)


def test_bl_kernel_linearity():
    t, s = 1.5, 0.5
    comb = selberg.inverse_transform(kernels.combination_multiplier([(0.5, t + s), (0.5, t - s)]))
    ka = kernels.build_bl_kernel(t + s)
    kb = kernels.build_bl_kernel(t - s)
    rho = np.linspace(0, 25, 51)
    assert np.max(np.abs(comb(rho) - 0.5 * (ka(rho) + kb(rho)))) <= 1e-9


@pytest.fixture(scope="module")
def bl_rows():
    return kernels.bl_check([1.0, 2.0, 4.0])


def test_bl_ratios_bounded(bl_rows):
    for col in ("ratio_sup", "ratio_tail"):
        vals = [getattr(r, col) for r in bl_rows]
        assert all(math.isfinite(v) and v > 0 for v in vals)
        assert max(vals) / min(vals) <= 100


def test_bl_tail_decreases_when_t_doubles(bl_rows):
    tails = [r.tail for r in bl_rows]
    assert tails[0] > tails[1] > tails[2]


def test_bl_empty_grid():
    assert kernels.bl_check([]) == []
    assert kernels.bl_supnorm_check([]) == []
    assert kernels.calibrate_constants([]) == {"bl_sup_const": 1.0, "bl_tail_const": 1.0}


def test_bl_grid_range():
    with pytest.raises(ConfigError):
        kernels.bl_check([11.0])


def test_calibration_takes_max(bl_rows):
    c = kernels.calibrate_constants(bl_rows)
    assert c["bl_sup_const"] == max(r.ratio_sup for r in bl_rows)


def test_eigenvalue_params():
    for lam in (0.0, 0.1, 0.25, 0.3, 7.0):
        p = EigenvalueParams.from_lambda(lam)
        assert p.residual() <= 1e-12
        assert p.tempered == (lam >= 0.25)
    with pytest.raises(ConfigError):
        EigenvalueParams.from_lambda(-1.0)
    with pytest.raises(ConfigError):
        EigenvalueParams.from_lambda(1.0, beta=0.5)


def test_operator_inputs():
    inp = OperatorBoundInputs(2.0, 16.0, 2.0, 4.0, 0.1)
    assert 1 / inp.p + 1 / inp.q == pytest.approx(1.0)
    assert inp.alpha_p == pytest.approx(0.4 * 0.5)
    inf = OperatorBoundInputs(2.0, 16.0, 2.0, math.inf, 0.1)
    assert inf.q == 1.0 and inf.alpha_p == pytest.approx(0.4)
    with pytest.raises(ConfigError):
        OperatorBoundInputs(2.0, 16.0, 2.0, 2.0, 0.1)


def test_qt_exponent_cases():
    inf = OperatorBoundInputs(1.0, 40.0, 5.0, math.inf, 0.05)
    assert kernels.qt_norm_exponent(inf, 0.0) == pytest.approx(0.45)
    beta = 0.1
    for d in (1e-2, 1e-4, 1e-6):
        thr = OperatorBoundInputs(1.0, 40.0, 5.0, 2 + 4 * beta, d)
        assert abs(kernels.qt_norm_exponent(thr, beta)) <= d


def test_qt_norm_value():
    inp = OperatorBoundInputs(2.0, 8.0, 1.0, 6.0, 0.05)
    expo = 0.5 - 0.05 - 1 / 6 + 2 * 0.05 / 6 - 2 * 0.1 / 6
    assert kernels.qt_norm_bound(1.0, inp, 0.1) == pytest.approx(2 * math.exp(-expo), rel=1e-14)
    with pytest.raises(PreconditionError):
        kernels.qt_norm_bound(2.5, inp, 0.1)


def test_w_norm_bound():
    inp = OperatorBoundInputs(3.0, 16.0, 2.0, 8.0, 0.1, bl_sup_const=1.5)
    alpha = 0.4 * 0.75
    assert kernels.w_norm_bound(inp) == pytest.approx(math.sqrt(3.0 * 2.0 * 2 * 1.5 / alpha * 2), rel=1e-14)
    with pytest.raises(PreconditionError):
        kernels.w_norm_bound(OperatorBoundInputs(3.0, 16.0, 2.5, 8.0, 0.1))


def test_spectral_action():
    assert kernels.w_spectral_action(3.0, EigenvalueParams.from_lambda(0.25)) == 3.0
    p = EigenvalueParams.from_lambda(1.25)
    assert p.s_lambda.real == pytest.approx(1.0)
    want = (2 + math.sin(8) / 4) / math.sqrt(math.cosh(math.pi / 2))
    assert kernels.w_spectral_action(4.0, p) == pytest.approx(want, rel=1e-14)
    with pytest.raises(PreconditionError):
        kernels.w_spectral_action(4.0, EigenvalueParams.from_lambda(0.1))


def test_cos2_integral_matches_quadrature():
    for T, s in ((4.0, 1.0), (2.5, 0.3), (10.0, 3.7)):
        val, _ = quad(lambda t: math.cos(s * t) ** 2, 0, T, limit=200)
        assert kernels.cos2_integral(T, s) == pytest.approx(val, rel=1e-12)


@given(st.floats(0.1, 50), st.floats(0.01, 10))
def test_spectral_action_lower_bound(T, s):
    p = EigenvalueParams.from_lambda(s * s + 0.25)
    lo = (T / 2 - 1 / (4 * p.s_lambda.real)) / math.sqrt(math.cosh(math.pi * p.s_lambda.real / 2))
    assert kernels.w_spectral_action(T, p) >= lo - 1e-12 * abs(lo)


def test_spectral_action_long_time_limit():
    for s in (0.5, 1.0, 2.0):
        p = EigenvalueParams.from_lambda(s * s + 0.25)
        lim = 0.5 / math.sqrt(math.cosh(math.pi * s / 2))
        assert abs(kernels.w_spectral_action(1e3, p) / 1e3 - lim) <= 1e-2


def test_ball_transform_area():
    for t in (1.0, 2.0, 4.0):
        assert kernels.ball_transform(t, 0.5j).real == pytest.approx(kernels.ball_area_transform(t), rel=1e-10)
    assert kernels.ball_transform(0.0, 1.0) == 0


def test_ball_lower_bound_example():
    s = math.sqrt(0.2)
    val = kernels.ball_lower_bound(3.0, 0.2)
    integral, _ = quad(lambda u: math.cosh(s * u) * (1 - math.cosh(u) / math.cosh(3.0)), 0, 3.0,
                       epsabs=0, epsrel=1e-13)
    assert val == pytest.approx(integral, rel=1e-12)
    assert val >= math.sinh(3 * s)
    with pytest.raises(PreconditionError):
        kernels.ball_lower_bound(2.9, 0.2)


@given(st.floats(3.0, 30.0), st.floats(0.001, 0.25))
def test_ball_lower_bound_property(t, eps):
    assert kernels.ball_lower_bound(t, eps) >= math.sinh(math.sqrt(eps) * t)


@given(st.floats(0.05, 8.0), st.floats(0.0, 0.5))
def test_ball_transform_nonnegative_on_imaginary_axis(t, b):
    assert kernels.ball_transform(t, complex(0, b)).real >= 0
