"""Loops, separating multicurves and the probability that a random surface
carries a short separating multicurve.

Everything probabilistic is computed in log domain; volumes come from a
VolumeTable (with the fitted MZ form as a flagged fallback).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConfigError, PreconditionError
from .volumes import VolumeTable

KAPPA = 16.0
D_SLACK = 1e-3
DELTA_FLOOR = 1e-6
# sup_k e ((2k)!/(k! k^k))^{1/k}, attained at k = 1
COSH_CONST = 2.0 * math.e


@dataclass(frozen=True)
class MulticurveClass:
    k: int
    split: tuple
    sym_order: int = 0
    M_gamma: int = 0

    def __post_init__(self):
        g1, g2 = self.split
        if self.k < 1:
            raise ConfigError("a multicurve needs at least one component")
        if 2 * g1 - 3 + self.k < 0 or 2 * g2 - 3 + self.k < 0:
            raise ConfigError(f"split {self.split} leaves an unstable piece for k={self.k}")
        if self.sym_order == 0:
            object.__setattr__(self, "sym_order", math.factorial(self.k))
        elif self.sym_order != math.factorial(self.k):
            raise ConfigError("sym_order must be k!")

    @property
    def genus(self) -> int:
        return self.split[0] + self.split[1] + self.k - 1


def default_m_gamma(k: int, split) -> int:
    # one boundary curve cutting off a one-holed torus is handle-separating
    return 1 if k == 1 and min(split) == 1 else 0


@dataclass(frozen=True)
class ProbabilityParams:
    g: int
    b: float
    c: float
    d: float | None = None
    delta_univ: float | None = None
    D: float | None = None
    kappa: float = KAPPA

    def __post_init__(self):
        if self.g < 2:
            raise ConfigError("genus must be at least 2")
        if not 0 < self.b < 0.5:
            raise ConfigError("b must lie in (0, 1/2)")
        if not self.c > 0:
            raise ConfigError("c must be positive")
        if self.d is None:
            object.__setattr__(self, "d", 2 * self.b + D_SLACK)
        if not self.d > 2 * self.b:
            raise ConfigError(f"d = {self.d} must exceed 2b = {2 * self.b}")
        if self.delta_univ is not None and not self.delta_univ > 0:
            raise ConfigError("delta_univ must be positive")
        if self.kappa < 0:
            raise ConfigError("kappa must be non-negative")

    @property
    def log_g(self) -> float:
        return math.log(self.g)

    @property
    def K_of_g(self) -> int:
        return math.ceil(self.kappa * self.c ** 2 * self.g ** (2 * self.b) * self.log_g ** 2)

    @property
    def L(self) -> float:
        return 4.0 * self.c * self.log_g


# ---------------------------------------------------------- combinatorics

def intersection_bound(len_a: float, len_b: float, injrad: float) -> int:
    if not injrad > 0:
        raise PreconditionError("injectivity radius must be positive")
    if len_a < 0 or len_b < 0:
        raise PreconditionError("lengths must be non-negative")
    return math.ceil(2 * len_a / injrad) * math.ceil(2 * len_b / injrad)


def filling_lower_bound(g: int, n: int) -> int:
    if 2 * g - 2 + n < 0:
        raise PreconditionError(f"({g},{n}) has positive Euler characteristic")
    return 2 * g + n - 2


@dataclass(frozen=True)
class SeparatingProfile:
    K_max: int
    L_max: float
    intersections: int
    forced_separating: bool
    genus_threshold: int       # smallest genus for which 2g - 2 > I


def separating_multicurve_profile(c: float, b: float, g: int, injrad: float) -> SeparatingProfile:
    if not injrad >= g ** (-b) * (1 - 1e-12):
        raise PreconditionError(f"injrad {injrad} below g^-b = {g ** (-b)}")
    ell = c * math.log(g)
    I = intersection_bound(ell, ell, injrad)
    return SeparatingProfile(I + 2, 4 * ell, I, 2 * g - 2 > I, I // 2 + 2)


def genus_splittings(g: int, k: int):
    """Ordered (g1, g2) with g1 + g2 = g + 1 - k and both pieces stable."""
    if k < 1:
        raise PreconditionError("k must be at least 1")
    lo = max(0, math.ceil((3 - k) / 2))
    top = g + 1 - k
    return [(g1, top - g1) for g1 in range(lo, top - lo + 1)]


def multicurve_classes(g: int, k: int, m_gamma=default_m_gamma):
    return [MulticurveClass(k, s, M_gamma=m_gamma(k, s)) for s in genus_splittings(g, k)]


# --------------------------------------------------- expected count bound

@dataclass(frozen=True)
class MulticurveBound:
    g: int
    K: int
    log_explicit: float        # -inf when no k contributes
    log_envelope: float        # (delta (c + d) - 1/2) log g; nan without delta
    log_cosh_envelope: float   # closed form with the fitted D; nan without D
    empty: bool
    used_asymptotic: bool
    terms: list = field(default_factory=list)    # (k, log term)


def _log_measure(k, L, mode):
    # log of L^{2k} / (k! k^k), or with the simplex volume L^k / k! in place of L^k
    v = 2 * k * math.log(L) - float(gammaln(k + 1)) - k * math.log(k)
    if mode == "simplex":
        v -= float(gammaln(k + 1))
    elif mode != "verbatim":
        raise ConfigError(f"unknown measure mode {mode!r}")
    return v


def expected_multicurve_bound(params: ProbabilityParams, table: VolumeTable,
                              mode: str = "verbatim", use_m_gamma: bool = False) -> MulticurveBound:
    g, L = params.g, params.L
    lvg, hit = table.lookup(g, 0)
    asym = not hit
    terms = []
    for k in range(1, params.K_of_g + 1):
        logs = []
        for s in genus_splittings(g, k):
            v1, h1 = table.lookup(s[0], k)
            v2, h2 = table.lookup(s[1], k)
            asym |= not (h1 and h2)
            m = default_m_gamma(k, s) if use_m_gamma else 0
            logs.append(v1 + v2 - m * math.log(2.0))
        if logs:
            terms.append((k, L + _log_measure(k, L, mode) + float(logsumexp(logs)) - lvg))
    log_explicit = float(logsumexp([t for _, t in terms])) if terms else -math.inf
    lg = params.log_g
    if params.delta_univ is None:
        log_env = math.nan
    else:
        log_env = (params.delta_univ * (params.c + params.d) - 0.5) * lg
    if params.D is None:
        log_cosh = math.nan
    else:
        x = 4 * params.c * math.exp(-0.5) * math.sqrt(params.D) * lg
        log_cosh = (-0.5 + 4 * params.c + 0.5 * params.d) * lg + x + math.log1p(math.exp(-2 * x)) - math.log(2)
    return MulticurveBound(g, params.K_of_g, log_explicit, log_env, log_cosh,
                           not terms, asym, terms)


def fit_delta(table: VolumeTable, c: float, d: float, b: float, genera=None,
              kappa: float = KAPPA, mode: str = "verbatim"):
    """Smallest delta (floored at DELTA_FLOOR) with explicit sum <= g^{delta(c+d) - 1/2}
    for every genus in the sweep.  Returns (delta, rows of (g, log_explicit))."""
    if genera is None:
        genera = [g for g in table.genera if g >= 2 and (g, 0) in table.entries]
    rows, need = [], []
    for g in genera:
        res = expected_multicurve_bound(ProbabilityParams(g, b, c, d, kappa=kappa), table, mode)
        rows.append((g, res.log_explicit))
        if not res.empty:
            need.append((res.log_explicit + 0.5 * math.log(g)) / ((c + d) * math.log(g)))
    delta = max([DELTA_FLOOR] + need)
    # one ulp-scale margin so the fitted envelope is not undercut by rounding
    return delta * (1 + 1e-12) + 1e-15, rows


def series_log_sum(L: float, k_max: int | None = None) -> float:
    """log sum_{k>=1} L^{2k}/(k! k^k); the full series unless k_max is given."""
    if L <= 0:
        return -math.inf
    if k_max is None:
        k_max = int(max(10, 4 * L)) + 50
    k = np.arange(1, k_max + 1)
    return float(logsumexp(2 * k * math.log(L) - gammaln(k + 1) - k * np.log(k)))


def cosh_envelope_check(L_grid=None, rtol: float = 1e-9):
    """Rows (L, log series, log cosh(e^{-1/2} sqrt(COSH_CONST) L), holds)."""
    if L_grid is None:
        L_grid = np.linspace(0.0, 50.0, 201)
    out = []
    a = math.exp(-0.5) * math.sqrt(COSH_CONST)
    for L in L_grid:
        ls = series_log_sum(float(L))
        x = a * float(L)
        le = x + math.log1p(math.exp(-2 * x)) - math.log(2)
        out.append((float(L), ls, le, ls <= le + math.log1p(rtol)))
    return out


# ------------------------------------------------------- final estimate

@dataclass(frozen=True)
class ProbabilityBound:
    value: float
    exponent_main: float     # -1/2 + delta (c + b)
    exponent_injrad: float   # -2b
    decays: bool


def final_probability_bound(params: ProbabilityParams, const_main: float = 1.0,
                            const_injrad: float = 1.0) -> ProbabilityBound:
    if params.delta_univ is None:
        raise ConfigError("final_probability_bound needs delta_univ")
    e1 = -0.5 + params.delta_univ * (params.c + params.b)
    e2 = -2.0 * params.b
    val = const_main * params.g ** e1 + const_injrad * params.g ** e2
    return ProbabilityBound(val, e1, e2, e1 < 0)


def crossover_b(delta: float) -> float:
    """b = c where the two exponents agree: 1/2 - 2 delta b = 2 b."""
    return 1.0 / (4.0 * (1.0 + delta))
