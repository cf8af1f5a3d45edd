"""Numerical Selberg transform pair.

Conventions: for a radial kernel k(rho),

    g(u) = sqrt(2) * int_{|u|}^inf k(rho) sinh(rho) / sqrt(cosh(rho) - cosh(u)) drho
    h(r) = int e^{iru} g(u) du

and back,

    g(u) = 1/(2 pi) int e^{-isu} h(s) ds
    k(rho) = -1/(sqrt(2) pi) int_rho^inf g'(u) / sqrt(cosh(u) - cosh(rho)) du.

Both Abel-type integrals are desingularised with cosh(.) = cosh(anchor) + v^2.
For the inverse direction g' is computed on a contour shifted into the strip
of analyticity of h, which keeps relative accuracy for large u where g' is
exponentially small.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import quadrature as quad
from .errors import BandViolationError, ConfigError, QuadratureError

SQRT2 = math.sqrt(2.0)
RHO_MAX = 72.0          # range on which inverse kernels are tabulated
ABEL_WINDOW = 30.0      # extent of the Abel tail integral beyond rho + 1
S_SCAN = 400.0


@dataclass(frozen=True)
class RadialKernel:
    eval: Callable
    support_hint: float
    decay_delta: float
    compact: bool = False   # True: k vanishes beyond support_hint
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, rho):
        return self.eval(np.asarray(rho, dtype=float))

    def decay_constant(self, n: int = 400) -> float:
        """max |k(rho)| e^{(1+delta) rho} on a grid over [0, support_hint + 10]."""
        rho = np.linspace(0.0, self.support_hint + 10.0, n)
        vals = np.abs(self(rho)) * np.exp((1.0 + self.decay_delta) * rho)
        if not np.all(np.isfinite(vals)):
            raise ConfigError("kernel is not finite on its test grid")
        return float(vals.max())


@dataclass(frozen=True)
class SpectralMultiplier:
    eval: Callable
    band_epsilon: float
    is_even: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, r):
        r = np.asarray(r, dtype=complex)
        if np.any(np.abs(r.imag) > 0.5 + self.band_epsilon + 1e-12):
            raise BandViolationError(
                f"|Im r| exceeds 1/2 + {self.band_epsilon} for this multiplier")
        return self.eval(r)

    def evenness_defect(self, grid=None) -> float:
        if grid is None:
            grid = np.concatenate([np.linspace(0.0, 10.0, 41),
                                   1j * np.linspace(0.0, 0.5 + 0.9 * self.band_epsilon, 6)])
        grid = np.asarray(grid, dtype=complex)
        return float(np.max(np.abs(self(grid) - self(-grid))))

    def decay_constant(self, rmax: float = 50.0, n: int = 201) -> float:
        r = np.linspace(0.0, rmax, n)
        vals = np.abs(self(r)) * (1.0 + r ** 2) ** (1.0 + self.band_epsilon)
        return float(np.max(vals))


def zero_kernel(support: float = 1.0) -> RadialKernel:
    return RadialKernel(lambda rho: np.zeros_like(np.asarray(rho, dtype=float)),
                        support, 1.0, compact=True)


def ball_kernel(t: float) -> RadialKernel:
    """Indicator of [0, t] normalised by 1/sqrt(cosh t)."""
    c = 1.0 / math.sqrt(math.cosh(t))
    return RadialKernel(lambda rho: np.where(np.asarray(rho) <= t, c, 0.0),
                        float(t), 1.0, compact=True, meta={"t": t})


# ---------------------------------------------------------------- helpers

def _acosh_shift(rho, v2):
    """arccosh(cosh(rho) + v2) without cancellation."""
    return quad_acosh1p(2.0 * np.sinh(0.5 * rho) ** 2 + v2)


def quad_acosh1p(x):
    return np.log1p(x + np.sqrt(x * (x + 2.0)))


def _cosh_diff(a, b):
    """cosh(a) - cosh(b)."""
    return 2.0 * np.sinh(0.5 * (a + b)) * np.sinh(0.5 * (a - b))


def _batched_rule(f, n0: int, tol: float, max_nodes: int = quad.MAX_NODES):
    """Find a panel count on [0, 1] for which a batch of integrands has converged.

    f(x) takes nodes on [0, 1] and returns (len(x), batch).
    """
    edges = np.linspace(0.0, 1.0, n0 + 1)
    prev = None
    while True:
        x, w = quad.panel_rule(edges)
        fx = f(x)
        est = w @ fx
        size = np.abs(w) @ np.abs(fx)
        if prev is not None and np.all(np.abs(est - prev) <= tol * size):
            return est
        if 2 * len(x) > max_nodes:
            raise QuadratureError("batched rule did not converge", (prev, est))
        prev = est
        edges = quad.refine(edges)


# ---------------------------------------------------------------- forward

class _Forward:
    def __init__(self, k: RadialKernel, tol: float):
        self.k = k
        self.tol = tol
        self.S = float(k.support_hint)
        self.delta = float(k.decay_delta)
        # Abel window long enough for |k| sinh / sqrt to drop by ~1e-16
        self.window = min(self.S, 38.0 / (0.5 + self.delta))
        if k.compact:
            # smooth variable s with u = S - s^2 near the support edge
            self.G = quad.ChebPanels.build(self._G_of_s, 0.0, math.sqrt(self.S),
                                           tol=1e-12, init_width=0.25)
        else:
            gmax = float(np.max(np.abs(self.g(np.linspace(0.0, 3.0, 7)))))
            rate = 0.5 + 0.5 * self.delta
            floor = lambda u: 1e-15 * gmax * np.exp(-rate * u)  # noqa: E731
            self.G = quad.ChebPanels.build(self.g, 0.0, self.S, tol=1e-12,
                                           init_width=1.0, floor=floor)

    def g(self, u):
        """g(u) for u >= 0 (vector)."""
        u = np.asarray(u, dtype=float)
        S = self.S
        top = np.minimum(u + 1.0, S)
        vmax = np.sqrt(np.maximum(_cosh_diff(top, u), 0.0))
        kk = self.k

        def fv(x):
            v = x[:, None] * vmax[None, :]
            rho = _acosh_shift(u[None, :], v * v)
            return kk(rho) * vmax[None, :]

        out = 2.0 * SQRT2 * _batched_rule(fv, 2, self.tol)
        lo = u + 1.0
        hi = np.minimum(u + self.window, S)
        has_tail = hi > lo
        if np.any(has_tail):
            ut, lt, ht = u[has_tail], lo[has_tail], hi[has_tail]

            def ft(x):
                rho = lt[None, :] + x[:, None] * (ht - lt)[None, :]
                den = np.sqrt(_cosh_diff(rho, ut[None, :]))
                return kk(rho) * np.sinh(rho) / den * (ht - lt)[None, :]

            n0 = int(max(2, math.ceil(self.window)))
            out[has_tail] += SQRT2 * _batched_rule(ft, n0, self.tol)
        return out

    def _G_of_s(self, s):
        s = np.asarray(s, dtype=float)
        return s * self.g(np.maximum(self.S - s * s, 0.0))

    def h(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=complex))
        out = np.empty(r.shape, dtype=complex)
        order = np.argsort(np.abs(r.real), kind="stable")
        for chunk in np.array_split(order, max(1, len(order) // 16)):
            rc = r[chunk]
            fmax = float(np.max(np.abs(rc.real)))
            if self.k.compact:
                top = math.sqrt(self.S)
                edges = quad.oscillatory_edges(0.0, top, fmax * 2.0 * top)
                S = self.S
                G = self.G

                def f(s, rc=rc, S=S, G=G):
                    return 4.0 * np.cos(np.outer(S - s * s, rc)) * G(s)[:, None]
            else:
                edges = quad.oscillatory_edges(0.0, self.S, fmax)
                G = self.G

                def f(u, rc=rc, G=G):
                    return 2.0 * np.cos(np.outer(u, rc)) * G(u)[:, None]

            out[chunk] = quad.integrate(f, edges, tol=self.tol)
        return out


def forward_transform(k: RadialKernel, tol: float = quad.TOL) -> SpectralMultiplier:
    """h = Fourier transform of the Abel transform g of k."""
    fw = _Forward(k, tol)
    band = 0.5 * k.decay_delta

    def ev(r):
        r = np.asarray(r, dtype=complex)
        return fw.h(r.ravel()).reshape(r.shape)

    return SpectralMultiplier(ev, band, True, meta={"g": fw.g, "source": k})


# ---------------------------------------------------------------- inverse

def _probe(h, z):
    try:
        val = np.asarray(h.eval(np.asarray(z, dtype=complex)), dtype=complex)
    except (ValueError, ArithmeticError, BandViolationError) as exc:
        raise BandViolationError(f"multiplier not evaluable on Im r = {z.imag.min()}: {exc}") from None
    if not np.all(np.isfinite(val)):
        raise BandViolationError(f"multiplier not finite on Im r = {np.min(z.imag)}")
    return val


def _truncation(env, grid, thresh=1e-17):
    m = float(env.max())
    if m == 0.0:
        return 1.0
    above = np.nonzero(env > thresh * m)[0]
    last = above[-1]
    if last >= len(grid) - 2:
        raise QuadratureError(
            f"multiplier decays too slowly: still {env[last] / m:.1e} of its peak at s = {grid[last]}")
    return float(grid[last + 1])


class _Inverse:
    def __init__(self, h: SpectralMultiplier, rho_max: float, tol: float):
        self.h = h
        self.tol = tol
        self.eps = float(h.band_epsilon)
        self.a = 0.5 + 0.5 * self.eps
        self.rho_max = rho_max
        self.umax = rho_max + ABEL_WINDOW + 1.0
        grid = np.arange(0.0, S_SCAN, 0.25)
        real_vals = _probe(h, grid + 0j)
        shifted = _probe(h, grid - 1j * self.a)
        env_r = np.abs(grid * real_vals)
        env_s = np.abs((grid - 1j * self.a) * shifted)
        self.S = max(_truncation(env_r, grid), _truncation(env_s, grid))
        self.zero = float(env_r.max()) == 0.0 and float(env_s.max()) == 0.0
        if self.zero:
            return
        self._build_q()

    # g'(u) = e^{-a u} J(u) on the shifted line, J real for real-symmetric h
    def _shift_rule(self):
        S, a = self.S, self.a
        lo = 0.0 if self.h.is_even else -S
        probe = np.array([1.0, 2.0, 5.0, 0.5 * self.umax, self.umax])
        edges = quad.oscillatory_edges(lo, S, self.umax)
        prev = None
        while True:
            x, w = quad.panel_rule(edges)
            F = (-1j * (x - 1j * a)) * _probe(self.h, x - 1j * a)
            wF = w * F
            est = self._J_from(wF, x, probe)
            size = np.abs(np.exp(-1j * np.outer(probe, x))) @ np.abs(wF)
            if prev is not None and np.all(np.abs(est - prev) <= self.tol * size):
                return x, wF
            if 2 * len(x) > 4 * quad.MAX_NODES:
                raise QuadratureError("shifted Fourier integral did not converge", (prev, est))
            prev = est
            edges = quad.refine(edges)

    def _J_from(self, wF, x, u):
        u = np.atleast_1d(u)
        out = np.empty(len(u))
        for i in range(0, len(u), 64):
            ph = np.exp(-1j * np.outer(u[i:i + 64], x))
            val = ph @ wF
            out[i:i + 64] = (val.real / np.pi) if self.h.is_even else (val.real / (2 * np.pi))
        return out

    def _real_rule(self):
        S = self.S
        probe = np.array([0.0, 0.5, 1.0])
        edges = quad.oscillatory_edges(0.0, S, 1.0)
        prev = None
        while True:
            x, w = quad.panel_rule(edges)
            wH = w * x * _probe(self.h, x + 0j).real
            est = self._q0_from(wH, x, probe)
            size = np.abs(wH).sum() * np.ones_like(est)
            if prev is not None and np.all(np.abs(est - prev) <= self.tol * size):
                return x, wH
            if 2 * len(x) > quad.MAX_NODES:
                raise QuadratureError("real-line integral did not converge", (prev, est))
            prev = est
            edges = quad.refine(edges)

    @staticmethod
    def _q0_from(wH, x, u):
        u = np.atleast_1d(u)
        # sin(su)/sinh(u) = s sinc(su/pi) (u/sinh u)
        ratio = np.where(u > 0, u / np.sinh(np.where(u > 0, u, 1.0)), 1.0)
        kern = x[None, :] * np.sinc(np.outer(u, x) / np.pi) * ratio[:, None]
        return -(kern @ wH) / np.pi

    def _build_q(self):
        x1, wF = self._shift_rule()
        x0, wH = self._real_rule()
        nJ = np.abs(wF).sum() / np.pi
        n0 = np.abs(wH).sum() * max(1.0, self.S) / np.pi
        self.noise = max(nJ, n0)
        self.J = quad.ChebPanels.build(lambda u: self._J_from(wF, x1, u), 1.0, self.umax,
                                       tol=1e-12, init_width=2.0,
                                       floor=lambda u: np.full(np.shape(u), 1e-14 * nJ))
        self.Q0 = quad.ChebPanels.build(lambda u: self._q0_from(wH, x0, u), 0.0, 1.0,
                                        tol=1e-12, init_width=0.5,
                                        floor=lambda u: np.full(np.shape(u), 1e-14 * n0))

    def q(self, u):
        """g'(u) / sinh(u)."""
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        lo = u <= 1.0
        out[lo] = self.Q0(u[lo])
        ul = np.minimum(u[~lo], self.umax)
        out[~lo] = np.exp(-self.a * ul) * self.J(ul) / np.sinh(ul)
        out[u > self.umax] = 0.0
        return out

    def dg(self, u):
        u = np.abs(np.asarray(u, dtype=float))
        return self.q(u) * np.sinh(u)

    def k_direct(self, rho):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        if self.zero:
            return np.zeros_like(rho)
        vmax = np.sqrt(2.0 * np.sinh(rho + 0.5) * math.sinh(0.5))

        def fv(x):
            v = x[:, None] * vmax[None, :]
            u = _acosh_shift(rho[None, :], v * v)
            return self.q(u) * vmax[None, :]

        out = -(SQRT2 / np.pi) * _batched_rule(fv, 2, self.tol)
        lo = rho + 1.0
        hi = np.minimum(rho + 1.0 + ABEL_WINDOW, self.umax)

        def ft(x):
            u = lo[None, :] + x[:, None] * (hi - lo)[None, :]
            den = np.sqrt(_cosh_diff(u, rho[None, :]))
            return self.q(u) * np.sinh(u) / den * (hi - lo)[None, :]

        out -= _batched_rule(ft, int(ABEL_WINDOW), self.tol) / (SQRT2 * np.pi)
        return out

    def build_kernel(self) -> RadialKernel:
        if self.zero:
            return RadialKernel(lambda rho: np.zeros_like(np.asarray(rho, dtype=float)),
                                self.rho_max, self.eps, meta={"zero": True})
        rate = self.a + 0.5
        nz = self.noise
        K = quad.ChebPanels.build(self.k_direct, 0.0, self.rho_max, tol=1e-11, init_width=1.0,
                                  floor=lambda r: 1e-13 * nz * np.exp(-rate * r))
        rmax = self.rho_max
        kend = float(K(np.array([rmax]))[0])
        decay = 1.0 + self.eps

        def ev(rho):
            rho = np.asarray(rho, dtype=float)
            inside = rho <= rmax
            out = np.empty(rho.shape)
            out[inside] = K(rho[inside])
            # beyond the tabulated range: continue with the guaranteed decay rate
            out[~inside] = kend * np.exp(-decay * (rho[~inside] - rmax))
            return out

        return RadialKernel(ev, rmax, self.eps,
                            meta={"dg": self.dg, "q": self.q, "interp": K,
                                  "unresolved": K.unresolved, "S": self.S,
                                  "k_direct": self.k_direct})


def inverse_transform(h: SpectralMultiplier, rho_max: float = RHO_MAX,
                      tol: float = quad.TOL) -> RadialKernel:
    """Radial kernel k with Selberg transform h; decay_delta = h.band_epsilon."""
    if not h.band_epsilon > 0:
        raise ConfigError("band_epsilon must be positive")
    return _Inverse(h, rho_max, tol).build_kernel()
