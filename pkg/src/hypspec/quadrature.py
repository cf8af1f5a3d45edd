"""Composite Gauss-Legendre rules and piecewise Chebyshev interpolants.

Convergence tests are relative (to the L1 size of the integrand, or to the
local size of the interpolated function) so that scaling an input by a
constant changes no refinement decision.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureError

TOL = 1e-10
MAX_NODES = 2 ** 16


@lru_cache(maxsize=None)
def gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_rule(edges, n: int = 16):
    """Nodes and weights of an n-point rule on every panel [edges[i], edges[i+1]]."""
    edges = np.asarray(edges, dtype=float)
    x, w = gl(n)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def refine(edges):
    edges = np.asarray(edges, dtype=float)
    mid = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * len(edges) - 1)
    out[0::2] = edges
    out[1::2] = mid
    return out


def integrate(f, edges, n: int = 16, tol: float = TOL, max_nodes: int = MAX_NODES):
    """Integrate a vectorized f over the panels, bisecting all panels until two
    successive estimates agree.

    f maps a 1-d node array to an array whose first axis runs over nodes;
    several integrals can be done at once by returning extra axes.
    """
    edges = np.asarray(edges, dtype=float)
    prev = None
    while True:
        x, w = panel_rule(edges, n)
        fx = f(x)
        est = np.tensordot(w, fx, axes=(0, 0))
        size = np.tensordot(np.abs(w), np.abs(fx), axes=(0, 0))
        if prev is not None:
            err = np.abs(est - prev)
            if np.all(err <= tol * size):
                return est
        if 2 * len(x) > max_nodes:
            raise QuadratureError(
                f"no convergence with {len(x)} nodes", (prev, est))
        prev = est
        edges = refine(edges)


def oscillatory_edges(a: float, b: float, freq: float, extra=()):
    """Panels of width at most pi/max(1,freq) covering [a, b]."""
    width = np.pi / max(1.0, abs(freq))
    m = max(1, int(np.ceil((b - a) / width)))
    edges = np.linspace(a, b, m + 1)
    if extra:
        edges = np.unique(np.concatenate([edges, [e for e in extra if a < e < b]]))
    return edges


# ------------------------------------------------------------------ Chebyshev

@lru_cache(maxsize=None)
def _cheb_setup(m: int):
    # Chebyshev points of the second kind on [-1, 1] (ascending) and the map
    # from values to coefficients
    k = np.arange(m)
    x = -np.cos(np.pi * k / (m - 1))
    T = np.cos(np.outer(np.arccos(np.clip(x, -1, 1)), k))
    return x, np.linalg.inv(T)


def _clenshaw(c, t):
    """Evaluate Chebyshev series with per-point coefficient rows c (N, m) at t (N,)."""
    b1 = np.zeros_like(t, dtype=c.dtype)
    b2 = np.zeros_like(b1)
    for j in range(c.shape[1] - 1, 0, -1):
        b1, b2 = c[:, j] + 2.0 * t * b1 - b2, b1
    return c[:, 0] + t * b1 - b2


class ChebPanels:
    """Piecewise Chebyshev interpolant on [a, b] built by adaptive bisection."""

    def __init__(self, edges, coeffs, unresolved=0):
        self.edges = np.asarray(edges, dtype=float)
        self.coeffs = np.asarray(coeffs)
        self.unresolved = unresolved

    @property
    def a(self):
        return self.edges[0]

    @property
    def b(self):
        return self.edges[-1]

    @classmethod
    def build(cls, f, a: float, b: float, tol: float = 1e-12, m: int = 17,
              init_width: float = 1.0, min_width: float = 1e-3, floor=None,
              max_panels: int = 20000):
        """f is vectorized; floor(x) (optional) gives the absolute noise level
        below which coefficients are not asked to converge."""
        xs, Vinv = _cheb_setup(m)
        npan = max(1, int(np.ceil((b - a) / init_width)))
        pending = list(zip(np.linspace(a, b, npan + 1)[:-1], np.linspace(a, b, npan + 1)[1:]))
        done = []
        unresolved = 0
        while pending:
            lo = np.array([p[0] for p in pending])
            hi = np.array([p[1] for p in pending])
            nodes = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * xs[None, :]
            vals = np.asarray(f(nodes.ravel())).reshape(nodes.shape)
            coef = vals @ Vinv.T
            scale = np.abs(vals).max(axis=1)
            tail = np.abs(coef[:, -3:]).max(axis=1)
            lim = tol * scale
            if floor is not None:
                lim = np.maximum(lim, np.asarray(floor(nodes)).max(axis=1))
            nxt = []
            for i in range(len(pending)):
                if tail[i] <= lim[i]:
                    done.append((lo[i], hi[i], coef[i]))
                elif hi[i] - lo[i] < min_width:
                    done.append((lo[i], hi[i], coef[i]))
                    unresolved += 1
                else:
                    mid = 0.5 * (lo[i] + hi[i])
                    nxt += [(lo[i], mid), (mid, hi[i])]
            if len(done) + len(nxt) > max_panels:
                raise QuadratureError(f"interpolant exceeded {max_panels} panels")
            pending = nxt
        done.sort(key=lambda p: p[0])
        edges = np.array([p[0] for p in done] + [done[-1][1]])
        coeffs = np.array([p[2] for p in done])
        return cls(edges, coeffs, unresolved)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.ravel()
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.coeffs) - 1)
        lo, hi = self.edges[idx], self.edges[idx + 1]
        t = (2.0 * x - lo - hi) / (hi - lo)
        out = _clenshaw(self.coeffs[idx], t)
        return out.reshape(shape)
