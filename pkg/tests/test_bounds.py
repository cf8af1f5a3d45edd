import math

import pytest
from hypothesis import given, strategies as st

from hypspec import bounds, kernels
from hypspec.errors import ConfigError, PreconditionError, RegimeError
from hypspec.kernels import EigenvalueParams, OperatorBoundInputs


def _tempered(R, p=math.inf, lam=0.25, beta=0.0, C=2.0, delta=0.01):
    inp = OperatorBoundInputs(C, R, R / 8, p, delta)
    return bounds.tempered_bound(inp, EigenvalueParams.from_lambda(lam, beta))


def test_tempered_is_w_norm_over_action():
    for lam in (0.25, 1.0, 7.0):
        for p in (5.0, math.inf):
            inp = OperatorBoundInputs(3.0, 40.0, 5.0, p, 0.02)
            par = EigenvalueParams.from_lambda(lam)
            rep = bounds.tempered_bound(inp, par)
            want = kernels.w_norm_bound(inp) / kernels.w_spectral_action(5.0, par)
            assert rep.bound_value == pytest.approx(want, rel=1e-12)
            assert rep.check_product()
            assert rep.regime == "tempered"


def test_tempered_s_zero_action_is_T():
    rep = _tempered(64.0)
    row = {f.name: f.value for f in rep.factors}
    assert row["inv_cos2_action"] == pytest.approx(1 / 8.0)
    assert row["sqrt_cosh_pi_s_over_2"] == 1.0


def test_tempered_quarter_scaling():
    ratio = _tempered(256.0).bound_value / _tempered(64.0).bound_value
    assert ratio == pytest.approx(0.5, rel=1e-12)
    for lam in (2.0, 4.0, 10.0, 25.0, 100.0):
        ratio = _tempered(256.0, lam=lam).bound_value / _tempered(64.0, lam=lam).bound_value
        assert abs(ratio - 0.5) <= 0.05 * 0.5


def test_tempered_gate():
    beta = 0.1
    thr = bounds.tempered_threshold(beta)
    with pytest.raises(RegimeError) as exc:
        _tempered(64.0, p=thr, beta=beta)
    assert exc.value.threshold == thr
    with pytest.raises(RegimeError):
        _tempered(64.0, p=thr - 1e-9, beta=beta)
    rep = _tempered(64.0, p=thr + 1e-9, beta=beta)
    # just above the threshold the time integral diverges; reported, not clipped
    assert rep.bound_value == math.inf and "diverged" in rep.notes
    assert rep.check_product()
    with pytest.raises(RegimeError):
        _tempered(64.0, lam=0.25 - 1e-9)


def test_tempered_needs_T_R_over_8():
    inp = OperatorBoundInputs(2.0, 64.0, 4.0, math.inf, 0.01)
    with pytest.raises(PreconditionError):
        bounds.tempered_bound(inp, EigenvalueParams.from_lambda(1.0))


def test_tempered_decay_factor_grows_as_p_drops():
    vals = [_tempered(64.0, p=p, beta=0.1).bound_value for p in (20.0, 6.0, 3.0)]
    assert vals[0] < vals[1] < vals[2]


def _untempered(R, p=math.inf, lam=0.0, eps=0.25, C=2.0, delta=0.01):
    inp = OperatorBoundInputs(C, R, R / 8, p, delta)
    return bounds.untempered_bound(inp, EigenvalueParams.from_lambda(lam, epsilon=eps))


def test_untempered_example():
    rep = _untempered(20.0, C=1.7)
    assert rep.bound_value == pytest.approx(1.7 / (math.exp(0.49 * 20) - 1), rel=1e-12)
    assert rep.check_product()


def test_untempered_interpolated_form():
    rep = _untempered(12.0, p=6.0, C=5.0)
    theta = 1 - 2 / 6
    assert rep.bound_value == pytest.approx((5.0 / math.expm1(0.49 * 12)) ** theta, rel=1e-12)
    assert rep.notes["C_outside_form"] == pytest.approx(5.0 / math.expm1(0.49 * 12) ** theta, rel=1e-12)


def test_untempered_p_two_degenerate():
    inp = OperatorBoundInputs(2.0, 20.0, 2.5, 4.0, 0.01)
    rep = bounds.untempered_bound(inp, EigenvalueParams.from_lambda(0.0), p=2.0)
    assert rep.bound_value == 1.0 and rep.notes["degenerate"]


def test_untempered_gate():
    eps = 0.1
    with pytest.raises(RegimeError):
        _untempered(20.0, lam=0.15 + 1e-9, eps=eps)
    assert _untempered(20.0, lam=0.15 - 1e-9, eps=eps).check_product()
    with pytest.raises(PreconditionError):
        _untempered(2.9)
    with pytest.raises(PreconditionError):
        _untempered(20.0, delta=0.6)
    with pytest.raises(ConfigError):
        _untempered(20.0, eps=0.3)


@given(st.floats(3.0, 60.0), st.floats(0.1, 10.0))
def test_untempered_decreasing_in_R(R, dR):
    assert _untempered(R + dR, p=8.0).bound_value < _untempered(R, p=8.0).bound_value


@given(st.floats(0.25, 50.0), st.floats(2.5, 100.0), st.floats(8.0, 500.0), st.floats(0.01, 0.4))
def test_product_identity_tempered(lam, p, R, delta):
    inp = OperatorBoundInputs(1.3, R, R / 8, p, delta)
    rep = bounds.tempered_bound(inp, EigenvalueParams.from_lambda(lam))
    assert rep.check_product()


@given(st.floats(0.0, 0.2), st.floats(2.1, 100.0), st.floats(3.0, 80.0))
def test_product_identity_untempered(lam, p, R):
    inp = OperatorBoundInputs(1.3, R, R / 8, p, 0.01)
    rep = bounds.untempered_bound(inp, EigenvalueParams.from_lambda(lam))
    assert rep.check_product()


def test_random_surface_sqrt2_scaling():
    par = EigenvalueParams.from_lambda(1.0)
    a = bounds.random_surface_report(10 ** 6, 1e-9, 8.0, par, math.inf)
    b = bounds.random_surface_report(10 ** 12, 1e-9, 8.0, par, math.inf)
    assert abs(b.bound_value / a.bound_value - 1 / math.sqrt(2)) <= 0.05 / math.sqrt(2)
    assert a.notes["R"] == pytest.approx(8.0 * math.log(10 ** 6))


def test_random_surface_alpha_mode():
    par = EigenvalueParams.from_lambda(0.25)
    g1, g2 = 10 ** 6, 10 ** 12
    a = bounds.random_surface_report(g1, 0.1, 1.0, par, math.inf, alpha=0.3)
    b = bounds.random_surface_report(g2, 0.1, 1.0, par, math.inf, alpha=0.3)
    want = (math.log(g2) / math.log(g1)) ** (-(1 - 0.3) / 2)
    assert b.bound_value / a.bound_value == pytest.approx(want, rel=1e-12)


def test_random_surface_untempered_denominator():
    par = EigenvalueParams.from_lambda(0.0, epsilon=0.25)
    rep = bounds.random_surface_report(10 ** 10, 0.1, 0.2, par, math.inf)
    assert rep.notes["denominator"] == pytest.approx(9.0, rel=1e-12)
    assert rep.bound_value == pytest.approx(10 ** 1.0 / 9.0, rel=1e-12)
    assert rep.check_product()


def test_random_surface_probability_attached():
    par = EigenvalueParams.from_lambda(1.0)
    rep = bounds.random_surface_report(10 ** 4, 0.2, 0.05, par, 6.0, delta_univ=1.0)
    assert rep.probability.value == pytest.approx(10 ** -1 + 10 ** -1.6, rel=1e-12)


def test_random_surface_genus_gate():
    with pytest.raises(ConfigError):
        bounds.random_surface_report(2, 0.1, 1.0, EigenvalueParams.from_lambda(1.0), math.inf)


def test_multiplicity_is_square():
    par = EigenvalueParams.from_lambda(3.0)
    sup = bounds.random_surface_report(10 ** 7, 0.05, 2.0, par, math.inf)
    mult = bounds.multiplicity_bound(10 ** 7, 0.05, 2.0, par)
    assert mult.bound_value == pytest.approx(sup.bound_value ** 2, rel=1e-12)
    assert mult.notes["sup_norm_bound"] == sup.bound_value
    assert mult.check_product()


def test_multiplicity_alpha_example():
    # lambda = 1/4: the action is exactly T = c log g / 8, so the squared
    # bound is 4 C / (alpha_eff T) with C = (log g)^alpha
    g, c, delta = 10 ** 8, 1.0, 0.01
    par = EigenvalueParams.from_lambda(0.25)
    rep = bounds.multiplicity_bound(g, 0.1, c, par, alpha=0.1, delta=delta)
    want = 32.0 / ((0.5 - delta) * c) * math.log(g) ** -0.9
    assert rep.bound_value == pytest.approx(want, rel=1e-12)


def test_multiplicity_untempered_injrad_squared():
    par = EigenvalueParams.from_lambda(0.0, epsilon=0.25)
    rep = bounds.multiplicity_bound(10 ** 10, 0.1, 0.2, par)
    inj = (10 ** 10) ** -0.1
    assert rep.bound_value == pytest.approx((1 / inj) ** 2 / 81.0, rel=1e-12)
