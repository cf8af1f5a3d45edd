"""Assembled L^p and multiplicity bounds, with every constant itemised.

A BoundReport's value is, by construction, the product of its factor rows;
check_product() re-verifies that to 1e-12.  Implied constants the theory
leaves unspecified are exposed as configurable factors (default 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import kernels
from .errors import ConfigError, PreconditionError, RegimeError
from .kernels import EigenvalueParams, OperatorBoundInputs
from .multicurves import ProbabilityBound, ProbabilityParams, final_probability_bound

PRODUCT_RTOL = 1e-12
# absorbs the rounding in lambda vs 1/4 - epsilon when epsilon defaults to 1/4 - lambda
GATE_TOL = 1e-12


@dataclass(frozen=True)
class Factor:
    name: str
    value: float
    source: str


@dataclass
class BoundReport:
    regime: str
    p: float
    lam: EigenvalueParams
    inputs: OperatorBoundInputs | None
    bound_value: float
    factors: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    probability: ProbabilityBound | None = None

    def product(self) -> float:
        out = 1.0
        for f in self.factors:
            out *= f.value
        return out

    def check_product(self, rtol: float = PRODUCT_RTOL) -> bool:
        prod = self.product()
        if math.isinf(self.bound_value) or math.isinf(prod):
            return self.bound_value == prod
        return abs(prod - self.bound_value) <= rtol * abs(self.bound_value)

    def rows(self):
        return [(f.name, f.value, f.source) for f in self.factors]


def _finish(regime, p, lam, inputs, factors, notes=None):
    val = 1.0
    for f in factors:
        val *= f.value
    return BoundReport(regime, p, lam, inputs, val, factors, notes or {})


def _exponent(p: float) -> float:
    return 1.0 if math.isinf(p) else 1.0 - 2.0 / p


# ----------------------------------------------------------- tempered

def tempered_threshold(beta: float) -> float:
    return 2.0 + 4.0 * beta


def tempered_bound(inputs: OperatorBoundInputs, params: EigenvalueParams,
                   p: float | None = None) -> BoundReport:
    """sqrt(C(X)) / sqrt(R) type bound via W_{T,lambda} with T = R/8."""
    if p is not None and p != inputs.p:
        inputs = replace(inputs, p=p)
    p = inputs.p
    if not params.tempered:
        raise RegimeError(f"lambda = {params.lam} is not tempered", 0.25)
    thr = tempered_threshold(params.beta)
    if not p > thr:
        raise RegimeError(f"p = {p} must exceed 2 + 4 beta = {thr}", thr)
    if abs(inputs.T - inputs.R / 8.0) > 1e-12 * max(1.0, inputs.R):
        raise PreconditionError(f"T must equal R/8, got T = {inputs.T}, R = {inputs.R}")
    T = inputs.T
    alpha = inputs.alpha_eff(params.beta)
    s = params.s_lambda.real
    notes = {"alpha_eff": alpha, "T": T}
    if alpha > 0:
        decay = math.sqrt(2.0 * T / alpha)
    else:
        # p lies between 2 + 4 beta and the delta-shifted threshold: the
        # time integral of e^{-alpha |t - s|} is no longer bounded in T
        decay = math.inf
        notes["diverged"] = "alpha_eff <= 0"
    action = kernels.cos2_integral(T, s)
    factors = [
        Factor("sqrt_C_of_X", math.sqrt(inputs.C_of_X), "growth constant of the lattice count"),
        Factor("sqrt_bl_const", math.sqrt(inputs.bl_sup_const), "sup-norm constant of k_t (configurable)"),
        Factor("sqrt_2", math.sqrt(2.0), "two orderings of (t, s) in the TT* double integral"),
        Factor("sqrt_2T_over_alpha", decay, "time integral of the operator decay e^{-alpha_p |t-s|}"),
        Factor("sqrt_cosh_pi_s_over_2", math.sqrt(math.cosh(0.5 * math.pi * s)), "size of the spectral multiplier of h_t"),
        Factor("inv_cos2_action", 1.0 / action, "eigenvalue of W_{T,lambda}: int_0^T cos^2(s t) dt"),
    ]
    return _finish("tempered", p, params, inputs, factors, notes)


# --------------------------------------------------------- untempered

def untempered_bound(inputs: OperatorBoundInputs, params: EigenvalueParams,
                     p: float | None = None, delta: float | None = None) -> BoundReport:
    """(C / (e^{(sqrt(eps) - delta) R} - 1))^{1 - 2/p}."""
    p = inputs.p if p is None else p
    delta = inputs.delta if delta is None else delta
    eps = params.epsilon
    if not 0 < eps <= 0.25:
        raise ConfigError("epsilon must lie in (0, 1/4]")
    if params.lam > 0.25 - eps + GATE_TOL:
        raise RegimeError(f"lambda = {params.lam} exceeds 1/4 - epsilon = {0.25 - eps}", 0.25 - eps)
    if inputs.R < 3:
        raise PreconditionError("the ball minorant needs R >= 3")
    if not p >= 2:
        raise PreconditionError("p must be at least 2")
    gap = math.sqrt(eps) - delta
    if not gap > 0:
        raise PreconditionError(f"delta = {delta} must be below sqrt(eps) = {math.sqrt(eps)}")
    theta = _exponent(p)
    if theta == 0.0:
        f = [Factor("degenerate_p_2", 1.0, "exponent 1 - 2/p vanishes at p = 2")]
        return _finish("untempered", p, params, inputs, f, {"degenerate": True})
    denom = math.expm1(gap * inputs.R)
    C = inputs.C_of_X
    factors = [
        Factor("C_of_X^theta", C ** theta, "lattice count factor C(X) e^{delta t} from Cauchy-Schwarz"),
        Factor("sinh_minorant^-theta", denom ** (-theta), "ball transform lower bound e^{(sqrt(eps) - delta) R} - 1"),
    ]
    notes = {"theta": theta, "C_outside_form": C / denom ** theta}
    return _finish("untempered", p, params, inputs, factors, notes)


# ------------------------------------------------------ random surfaces

def injrad_model(g: int, b: float | None = None, alpha: float | None = None) -> float:
    if alpha is not None:
        return math.log(g) ** (-alpha)
    if b is None:
        raise ConfigError("need b or alpha")
    return g ** (-b)


def random_surface_report(g: int, b: float, c: float, params: EigenvalueParams, p: float,
                          delta: float = 0.01, alpha: float | None = None,
                          delta_univ: float | None = None, bl_sup_const: float = 1.0) -> BoundReport:
    """R = c log g, C(X) = 1/InjRad with InjRad = g^{-b} (or (log g)^{-alpha})."""
    if g < 3:
        raise ConfigError("genus must be at least 3 so that log g > 1")
    R = c * math.log(g)
    inj = injrad_model(g, b, alpha)
    C = 1.0 / inj
    if params.tempered:
        inputs = OperatorBoundInputs(C, R, R / 8.0, p, delta, bl_sup_const)
        rep = tempered_bound(inputs, params)
    else:
        inputs = OperatorBoundInputs(C, R, R / 8.0, p, delta, bl_sup_const) if p > 2 else None
        eps = params.epsilon
        if params.lam > 0.25 - eps + GATE_TOL:
            raise RegimeError(f"lambda = {params.lam} exceeds 1/4 - epsilon", 0.25 - eps)
        theta = _exponent(p)
        if theta == 0.0:
            rep = _finish("untempered", p, params, inputs,
                          [Factor("degenerate_p_2", 1.0, "exponent 1 - 2/p vanishes at p = 2")],
                          {"degenerate": True})
        else:
            denom = g ** (c * math.sqrt(eps)) - 1.0
            if not denom > 0:
                raise PreconditionError("g^{c sqrt(eps)} - 1 must be positive")
            factors = [
                Factor("C_of_X^theta", C ** theta, "C(X) = 1/InjRad(X)"),
                Factor("denominator^-theta", denom ** (-theta), "(g^{c sqrt(eps)} - 1) with R = c log g"),
            ]
            rep = _finish("untempered", p, params, inputs, factors,
                          {"theta": theta, "denominator": denom, "C_outside_form": C / denom ** theta})
    rep.notes.update({"g": g, "R": R, "injrad": inj})
    if delta_univ is not None and alpha is None:
        rep.probability = final_probability_bound(ProbabilityParams(g, b, c, delta_univ=delta_univ))
    return rep


def multiplicity_bound(g: int, b: float, c: float, params: EigenvalueParams,
                       alpha: float | None = None, delta: float = 0.01, **kw) -> BoundReport:
    """m(lambda)/g is controlled by the squared sup-norm bound."""
    rep = random_surface_report(g, b, c, params, math.inf, delta=delta, alpha=alpha, **kw)
    factors = [Factor(f.name + "^2", f.value ** 2, f.source) for f in rep.factors]
    out = _finish(rep.regime, math.inf, params, rep.inputs, factors, dict(rep.notes))
    out.notes["sup_norm_bound"] = rep.bound_value
    out.probability = rep.probability
    return out
