"""Kernel families j_t, h_t, the ball kernel, and scalar operator bounds."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import quadrature as quad
from . import selberg
from .errors import CertificateViolation, ConfigError, PreconditionError

DEFAULT_BAND = 0.49


# ------------------------------------------------------------- parameters

@dataclass(frozen=True)
class EigenvalueParams:
    lam: float
    s_lambda: complex
    beta: float = 0.0
    epsilon: float = 0.0

    @classmethod
    def from_lambda(cls, lam: float, beta: float = 0.0, epsilon: float | None = None):
        if lam < 0:
            raise ConfigError("eigenvalue must be non-negative")
        if not 0 <= beta < 0.5:
            raise ConfigError("beta must lie in [0, 1/2)")
        if lam >= 0.25:
            s = complex(math.sqrt(lam - 0.25), 0.0)
        else:
            s = complex(0.0, math.sqrt(0.25 - lam))
        if epsilon is None:
            epsilon = max(0.25 - lam, 0.0)
        return cls(float(lam), s, float(beta), float(epsilon))

    @property
    def tempered(self) -> bool:
        return self.lam >= 0.25

    def residual(self) -> float:
        return abs(self.s_lambda ** 2 + 0.25 - self.lam)


@dataclass(frozen=True)
class OperatorBoundInputs:
    C_of_X: float
    R: float
    T: float
    p: float
    delta: float
    bl_sup_const: float = 1.0
    bl_tail_const: float = 1.0

    def __post_init__(self):
        if not self.p > 2:
            raise ConfigError("p must exceed 2")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if not self.C_of_X > 0:
            raise ConfigError("C(X) must be positive")

    @property
    def q(self) -> float:
        return 1.0 if math.isinf(self.p) else self.p / (self.p - 1.0)

    @property
    def inv_p(self) -> float:
        return 0.0 if math.isinf(self.p) else 1.0 / self.p

    @property
    def alpha_p(self) -> float:
        return (0.5 - self.delta) * (1.0 - 2.0 * self.inv_p)

    def alpha_eff(self, beta: float = 0.0) -> float:
        return self.alpha_p - 2.0 * beta * self.inv_p


# ---------------------------------------------------------------- j and h

def _check_band(r, band):
    if np.any(np.abs(np.imag(r)) > 0.5 + band):
        raise ConfigError(f"|Im r| exceeds 1/2 + {band}")


def eval_h(t: float, r, band: float = DEFAULT_BAND):
    """cos(rt)/cosh(pi r/2); purely imaginary r = bi uses cosh(bt)/cos(pi b/2)."""
    if t < 0:
        raise ConfigError("t must be non-negative")
    r = np.asarray(r, dtype=complex)
    _check_band(r, band)
    imag_axis = (r.real == 0.0)
    b = r.imag
    on_axis = np.cosh(b * t) / np.cos(0.5 * np.pi * b)
    general = np.cos(r * t) / np.cosh(0.5 * np.pi * r)
    out = np.where(imag_axis, on_axis + 0j, general)
    return out[()] if out.ndim == 0 else out


def eval_j(t: float, r, band: float = DEFAULT_BAND):
    """cos(rt)/sqrt(cosh(pi r/2)) with the same imaginary-axis branch."""
    if t < 0:
        raise ConfigError("t must be non-negative")
    r = np.asarray(r, dtype=complex)
    _check_band(r, band)
    imag_axis = (r.real == 0.0)
    b = r.imag
    on_axis = np.cosh(b * t) / np.sqrt(np.cos(0.5 * np.pi * b))
    general = np.cos(r * t) / np.sqrt(np.cosh(0.5 * np.pi * r))
    out = np.where(imag_axis, on_axis + 0j, general)
    return out[()] if out.ndim == 0 else out


def linearisation_residual(t: float, s: float, r) -> float:
    lhs = eval_j(t, r) * eval_j(s, r)
    rhs = 0.5 * (eval_h(t + s, r) + eval_h(abs(t - s), r))
    return float(np.max(np.abs(lhs - rhs)))


def h_multiplier(t: float, band: float = DEFAULT_BAND) -> selberg.SpectralMultiplier:
    # the general complex formula; the imaginary-axis branch is the same function
    def ev(r):
        r = np.asarray(r, dtype=complex)
        return np.cos(r * t) / np.cosh(0.5 * np.pi * r)
    return selberg.SpectralMultiplier(ev, band, True, meta={"t": t})


def combination_multiplier(terms, band: float = DEFAULT_BAND) -> selberg.SpectralMultiplier:
    """sum of c_i h_{t_i} for terms [(c_i, t_i)]."""
    terms = list(terms)

    def ev(r):
        r = np.asarray(r, dtype=complex)
        return sum(c * np.cos(r * t) for c, t in terms) / np.cosh(0.5 * np.pi * r)
    return selberg.SpectralMultiplier(ev, band, True, meta={"terms": terms})


def build_bl_kernel(t: float, band: float = DEFAULT_BAND) -> selberg.RadialKernel:
    if t < 0:
        raise ConfigError("t must be non-negative")
    return selberg.inverse_transform(h_multiplier(t, band))


# ------------------------------------------------------- kernel size checks

@dataclass
class BLRow:
    t: float
    sup: float
    tail: float

    @property
    def ratio_sup(self) -> float:
        return self.sup * math.exp(0.5 * self.t)

    @property
    def ratio_tail(self) -> float:
        return self.tail * math.exp(self.t)


def kernel_sup(k: selberg.RadialKernel, rho_max: float | None = None) -> float:
    rho_max = k.support_hint if rho_max is None else rho_max
    grid = np.linspace(0.0, rho_max, int(40 * rho_max) + 1)
    vals = np.abs(k(grid))
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -abs(float(k(np.array([x]))[0])), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-10})
        return max(float(vals[i]), -float(res.fun))
    return float(vals[i])


def kernel_tail(k: selberg.RadialKernel, start: float, end: float | None = None) -> float:
    """int_start^end |k| sinh, split at the sign changes of k."""
    end = k.support_hint if end is None else end
    if end <= start:
        return 0.0
    grid = np.linspace(start, end, int(20 * (end - start)) + 2)
    vals = k(grid)
    f = lambda x: float(k(np.array([x]))[0])  # noqa: E731
    cuts = [start]
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        cuts.append(brentq(f, grid[i], grid[i + 1], xtol=1e-13))
    cuts.append(end)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        edges = np.linspace(a, b, max(2, int(math.ceil(b - a))) + 1)
        total += float(quad.integrate(lambda x: np.abs(k(x)) * np.sinh(x), edges))
    return total


def _bl_row(t, band):
    k = build_bl_kernel(t, band)
    return BLRow(float(t), kernel_sup(k), kernel_tail(k, 4.0 * t))


def bl_check(t_grid, band: float = DEFAULT_BAND, workers: int = 1) -> list:
    """Per-t sup |k_t| and int_{4t}^inf |k_t| sinh, with their normalised ratios."""
    t_grid = [float(t) for t in t_grid]
    for t in t_grid:
        if not 0 <= t <= 10:
            raise ConfigError("t_grid must lie in [0, 10]")
    if workers > 1 and len(t_grid) > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(lambda t: _bl_row(t, band), t_grid))
    return [_bl_row(t, band) for t in t_grid]


def bl_supnorm_check(t_grid, **kw) -> list:
    return [(r.t, r.ratio_sup) for r in bl_check(t_grid, **kw)]


def bl_tail_check(t_grid, **kw) -> list:
    return [(r.t, r.ratio_tail) for r in bl_check(t_grid, **kw)]


def calibrate_constants(rows) -> dict:
    """Fit the implicit size constants as the largest observed ratios."""
    if not rows:
        return {"bl_sup_const": 1.0, "bl_tail_const": 1.0}
    return {"bl_sup_const": max(r.ratio_sup for r in rows),
            "bl_tail_const": max(r.ratio_tail for r in rows)}


# --------------------------------------------------------- operator bounds

def qt_norm_exponent(inputs: OperatorBoundInputs, beta: float = 0.0) -> float:
    d, ip = inputs.delta, inputs.inv_p
    return 0.5 - d - ip + 2.0 * d * ip - 2.0 * beta * ip


def qt_norm_bound(t: float, inputs: OperatorBoundInputs, beta: float = 0.0) -> float:
    if t > inputs.R / 4.0:
        raise PreconditionError(f"t = {t} exceeds R/4 = {inputs.R / 4.0}")
    return inputs.bl_sup_const * inputs.C_of_X * math.exp(-t * qt_norm_exponent(inputs, beta))


def w_norm_bound(inputs: OperatorBoundInputs, beta: float = 0.0) -> float:
    """sqrt of C(X) * bl const * 2 * (2T/alpha): the double integral of
    e^{-alpha|t-s|} over [0,T]^2 is at most 2T/alpha."""
    if inputs.T > inputs.R / 8.0 * (1 + 1e-12):
        raise PreconditionError(f"T = {inputs.T} exceeds R/8 = {inputs.R / 8.0}")
    alpha = inputs.alpha_eff(beta)
    if not alpha > 0:
        raise PreconditionError(f"effective decay exponent {alpha} is not positive")
    return math.sqrt(inputs.C_of_X * inputs.bl_sup_const * 2.0 * (2.0 * inputs.T / alpha))


def cos2_integral(T: float, s: float) -> float:
    """int_0^T cos^2(s t) dt."""
    if s == 0:
        return T
    return 0.5 * T + math.sin(2.0 * s * T) / (4.0 * s)


def w_spectral_action(T: float, params: EigenvalueParams) -> float:
    if not params.tempered:
        raise PreconditionError("spectral action needs a tempered eigenvalue")
    s = params.s_lambda.real
    return cos2_integral(T, s) / math.sqrt(math.cosh(0.5 * math.pi * s))


# ------------------------------------------------------------ ball kernel

def ball_transform(t: float, r) -> complex:
    """4 sqrt2 int_0^t cos(ru) sqrt(1 - cosh u / cosh t) du, via u = t - s^2."""
    if t < 0:
        raise ConfigError("t must be non-negative")
    r = np.atleast_1d(np.asarray(r, dtype=complex))
    if t == 0:
        out = np.zeros(r.shape, dtype=complex)
    else:
        top = math.sqrt(t)
        ch = math.cosh(t)

        def f(s):
            u = t - s * s
            w = np.sqrt(np.maximum(selberg._cosh_diff(t, u), 0.0) / ch) * 2.0 * s
            return np.cos(np.outer(u, r)) * w[:, None]

        fmax = float(np.max(np.abs(r.real)))
        edges = quad.oscillatory_edges(0.0, top, 2.0 * top * fmax)
        out = 4.0 * math.sqrt(2.0) * quad.integrate(f, edges, tol=1e-13)
    return out[0] if out.shape == (1,) else out


def ball_area_transform(t: float) -> float:
    """Value at r = i/2: the integral of the normalised indicator over H."""
    return 2.0 * math.pi * (math.cosh(t) - 1.0) / math.sqrt(math.cosh(t))


def ball_lower_bound(t: float, epsilon: float) -> float:
    """Explicit minorant of int_0^t cosh(sqrt(eps) u)(1 - cosh u/cosh t) du."""
    if t < 3:
        raise PreconditionError("the minorant needs t >= 3")
    if not 0 < epsilon <= 0.25:
        raise ConfigError("epsilon must lie in (0, 1/4]")
    s = math.sqrt(epsilon)
    ch = math.cosh(t)
    val = (math.sinh(s * t) / s
           - 0.5 * (math.sinh((s + 1) * t) / ((s + 1) * ch)
                    + math.sinh((s - 1) * t) / ((s - 1) * ch)))
    if val < math.sinh(s * t):
        raise CertificateViolation(
            f"minorant {val} below sinh(sqrt(eps) t) = {math.sinh(s * t)}", (t, epsilon))
    return val

