"""Cocompact Fuchsian groups: ball enumeration, injectivity radius, loop census
and the growth certificate."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.spatial import cKDTree

from . import hyperbolic as hb
from .errors import (BudgetExceededError, CertificateViolation, ConfigError,
                     NonHyperbolicGeneratorError, ParseError, RelationError)
from .hyperbolic import MoebiusTransform, Point

DEFAULT_BUDGET = 10 ** 7
RELATION_TOL = 1e-8


@dataclass
class SurfaceGroup:
    generators: list
    genus: int
    base_point: Point
    domain_diameter: float
    label: str = ""
    relations: list = field(default_factory=list)
    _injrad_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.gen_array = np.array([m.as_array() for m in self.generators])
        inv = []
        for m in self.generators:
            mi = hb.inverse(m)
            j = next((k for k, h in enumerate(self.generators) if h.isclose(mi)), None)
            inv.append(j)
        self.inverse_index = inv

    @property
    def min_translation_length(self) -> float:
        return min(hb.translation_length(m) for m in self.generators)

    def word_matrix(self, word) -> MoebiusTransform:
        out = np.eye(2)
        for k in word:
            out = out @ self.gen_array[k]
        return MoebiusTransform.from_array(out)


# ---------------------------------------------------------------- file format

def bundled_surface_path(name: str = "bolza.surface") -> str:
    return str(resources.files("hypspec") / "data" / name)


def load_surface_spec(path) -> SurfaceGroup:
    if not os.path.exists(path):
        raise ConfigError(f"surface file not found: {path}")
    genus = None
    diam = None
    base = Point(0.0, 1.0)
    label = os.path.basename(str(path))
    gens = []
    rels = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            key = parts[0].lower()
            try:
                if key == "genus":
                    genus = int(parts[1])
                elif key == "domain_diameter":
                    diam = float(parts[1])
                elif key == "base_point":
                    base = Point(float(parts[1]), float(parts[2]))
                elif key == "label":
                    label = " ".join(parts[1:])
                elif key == "relation":
                    rels.append([int(p) for p in parts[1:]])
                elif len(parts) == 4:
                    gens.append(MoebiusTransform.from_entries(*map(float, parts)))
                else:
                    raise ValueError(f"unrecognised line {line!r}")
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not gens:
        raise ParseError(f"{path}: no generators")
    if genus is None or genus < 2:
        raise ParseError(f"{path}: genus must be given and >= 2")
    for i, m in enumerate(gens):
        if hb.classify(m).kind != "hyperbolic":
            raise NonHyperbolicGeneratorError(f"generator {i} is {hb.classify(m).kind}")
    # close the list under inverses; appended entries keep relation indices valid
    for m in list(gens):
        mi = hb.inverse(m)
        if not any(h.isclose(mi) for h in gens):
            gens.append(mi)
    worst = 0.0
    for rel in rels:
        if any(k < 0 or k >= len(gens) for k in rel):
            raise ParseError(f"{path}: relation index out of range: {rel}")
        out = np.eye(2)
        for k in rel:
            out = out @ gens[k].as_array()
        res = min(np.abs(out - np.eye(2)).max(), np.abs(out + np.eye(2)).max())
        worst = max(worst, res)
    if worst > RELATION_TOL:
        raise RelationError(f"relation residual {worst:.3e} exceeds {RELATION_TOL}", worst)
    G = SurfaceGroup(gens, genus, base, diam if diam is not None else 1.0, label, rels)
    if diam is None:
        G.domain_diameter = dirichlet_diameter(G)
    if not G.domain_diameter > 0:
        raise ParseError("domain_diameter must be positive")
    return G


def write_surface_spec(G: SurfaceGroup, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"label {G.label}\n")
        fh.write(f"genus {G.genus}\n")
        fh.write(f"domain_diameter {G.domain_diameter!r}\n")
        fh.write(f"base_point {G.base_point.x!r} {G.base_point.y!r}\n")
        for m in G.generators:
            fh.write(f"{m.a!r} {m.b!r} {m.c!r} {m.d!r}\n")
        for rel in G.relations:
            fh.write("relation " + " ".join(str(k) for k in rel) + "\n")


def bolza_group() -> SurfaceGroup:
    """Side pairings of the regular octagon with angles pi/4 centred at i."""
    ell = 2.0 * math.acosh(1.0 + math.sqrt(2.0))
    A = np.diag([math.exp(ell / 2), math.exp(-ell / 2)])

    def rot(t):
        return np.array([[math.cos(t / 2), math.sin(t / 2)],
                         [-math.sin(t / 2), math.cos(t / 2)]])

    gens = [rot(k * math.pi / 4) @ A @ rot(-k * math.pi / 4) for k in range(4)]
    gens += [np.linalg.inv(m) for m in gens]
    gens = [MoebiusTransform.from_array(m) for m in gens]
    # circumradius of the octagon: cosh R = cot(pi/8)^2
    diam = 2.0 * math.acosh(1.0 / math.tan(math.pi / 8) ** 2)
    return SurfaceGroup(gens, 2, Point(0.0, 1.0), diam, "bolza",
                        [[0, 5, 2, 7, 4, 1, 6, 3]])


# ------------------------------------------------------- Dirichlet domain scan

def _hyperboloid(z):
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    r2 = x * x + y * y
    return np.stack([(1 + r2) / (2 * y), x / y, (r2 - 1) / (2 * y)], axis=-1)


def dirichlet_diameter(G: SurfaceGroup, radius: float | None = None) -> float:
    """Diameter of the Dirichlet domain at the base point.

    Bisectors are linear in the Klein model, so the domain is a half-space
    intersection there; the diameter is the largest vertex-pair distance.
    """
    from scipy.spatial import HalfspaceIntersection

    p = G.base_point.z
    if radius is None:
        radius = 2.0 * max(hb.translation_length(m) for m in G.generators) + 1.0
    # move the base point to i so the Klein model is centred on it
    y0 = p.imag
    norm = np.array([[1 / math.sqrt(y0), -p.real / math.sqrt(y0)], [0.0, math.sqrt(y0)]])
    mats = _words_up_to(G, 3)
    mats = np.einsum("ij,njk,kl->nil", norm, mats, np.linalg.inv(norm))
    img = hb.mats_apply(mats, 1j)
    X = _hyperboloid(img)
    d = np.arccosh(np.maximum(X[:, 0], 1.0))
    keep = (d > 1e-6) & (d < radius)
    X = X[keep]
    # Minkowski bisector between e0 and X: x0 (X0 - 1) - x1 X1 - x2 X2 >= 0 on the domain side
    # Klein coordinates k = (x1, x2)/x0: (X0 - 1) - X1 k1 - X2 k2 >= 0
    hs = np.column_stack([X[:, 1], X[:, 2], -(X[:, 0] - 1.0)])
    inter = HalfspaceIntersection(hs, np.zeros(2))
    V = inter.intersections
    w = 1.0 / np.sqrt(np.maximum(1.0 - (V ** 2).sum(axis=1), 1e-300))
    H = np.column_stack([w, V[:, 0] * w, V[:, 1] * w])
    gram = H[:, None, 0] * H[None, :, 0] - H[:, None, 1] * H[None, :, 1] - H[:, None, 2] * H[None, :, 2]
    return float(np.arccosh(np.maximum(gram.max(), 1.0)))


def _words_up_to(G: SurfaceGroup, n: int) -> np.ndarray:
    level = [np.eye(2)]
    out = []
    for _ in range(n):
        level = [m @ g for m in level for g in G.gen_array]
        out.extend(level)
    return np.array(out)


def in_domain(G: SurfaceGroup, z: complex, slack: float = 1e-12) -> bool:
    base = G.base_point
    d0 = hb.cosh_distance_m1(z.real, z.imag, base.x, base.y)
    img = hb.mats_apply(G.gen_array, base.z)
    d = hb.cosh_distance_m1(z.real, z.imag, img.real, img.imag)
    return bool(np.all(d0 <= d + slack))


def reduce_to_domain(G: SurfaceGroup, z: complex, max_steps: int = 10000):
    """Return (h, z') with z' = h(z) in the Dirichlet domain, h as a word."""
    base = G.base_point
    word = []
    cur = complex(z)
    for _ in range(max_steps):
        img = hb.mats_apply(G.gen_array, cur)
        d = hb.cosh_distance_m1(img.real, img.imag, base.x, base.y)
        d0 = hb.cosh_distance_m1(cur.real, cur.imag, base.x, base.y)
        k = int(np.argmin(d))
        if d[k] >= d0 - 1e-13 * (1 + d0):
            return word, cur
        cur = complex(img[k])
        word.insert(0, k)
    raise BudgetExceededError("domain reduction did not terminate", max_steps)


# ----------------------------------------------------------- ball enumeration

@dataclass
class LatticeBallResult:
    elements: list
    center_z: Point
    center_w: Point
    radius: float
    visited: int = 0

    @property
    def count(self) -> int:
        return len(self.elements)

    @property
    def distances(self) -> np.ndarray:
        return np.array([e[2] for e in self.elements])

    def matrices(self) -> np.ndarray:
        return np.array([e[1].as_array() for e in self.elements]).reshape(-1, 2, 2)


class _OrbitIndex:
    """Dedup of group elements by the orbit image of a fixed point.

    The group acts freely, so distinct elements send a point to points at
    least the systole apart; in hyperboloid coordinates that is a Euclidean
    gap of several units, far above float drift.  Cells of side 1 are used and
    neighbour cells are probed only for points close to a cell wall.
    """

    def __init__(self, eta: float = 1e-3):
        self.cells = {}
        self.eta = eta

    def _keys(self, X):
        base = np.floor(X).astype(np.int64)
        frac = X - base
        near = (frac < self.eta) | (frac > 1 - self.eta)
        return base, near

    def insert_new(self, X: np.ndarray) -> np.ndarray:
        """Insert rows of X, returning the mask of rows that were new."""
        base, near = self._keys(X)
        new = np.zeros(len(X), dtype=bool)
        cells = self.cells
        any_near = near.any(axis=1)
        for i in range(len(X)):
            key = (int(base[i, 0]), int(base[i, 1]), int(base[i, 2]))
            if not any_near[i]:
                if key in cells:
                    continue
            elif self._probe(X[i]):
                continue
            cells[key] = X[i]
            new[i] = True
        return new

    def _probe(self, x):
        e = self.eta
        lo = np.floor(x - e).astype(np.int64)
        hi = np.floor(x + e).astype(np.int64)
        for a in range(lo[0], hi[0] + 1):
            for b in range(lo[1], hi[1] + 1):
                for c in range(lo[2], hi[2] + 1):
                    if (a, b, c) in self.cells:
                        return True
        return False


def _bfs(G: SurfaceGroup, z: complex, w: complex, cutoff: float, budget: int):
    """All elements with d(z, gamma w) <= cutoff, z and w in the domain.

    Returns (mats, parent, gen, dist); words are recovered from parent links.
    """
    gens = G.gen_array
    ref = G.base_point.z
    index = _OrbitIndex()
    index.insert_new(_hyperboloid(np.array([ref])))
    mats = [np.eye(2)[None]]
    parents = [np.array([-1])]
    gen_of = [np.array([-1])]
    d0 = float(hb.acosh1p(hb.cosh_distance_m1(z.real, z.imag, w.real, w.imag)))
    dists = [np.array([d0])]
    frontier = np.arange(1)
    frontier_m = mats[0]
    total = 1
    cut_c = math.cosh(cutoff) - 1.0
    while len(frontier):
        cand = np.einsum("nij,kjl->nkil", frontier_m, gens).reshape(-1, 2, 2)
        par = np.repeat(frontier, len(gens))
        gk = np.tile(np.arange(len(gens)), len(frontier))
        img = hb.mats_apply(cand, w)
        c = hb.cosh_distance_m1(z.real, z.imag, img.real, img.imag)
        ok = c <= cut_c * (1 + 1e-12) + 1e-12
        cand, par, gk, c = cand[ok], par[ok], gk[ok], c[ok]
        new = index.insert_new(_hyperboloid(hb.mats_apply(cand, ref)))
        cand, par, gk, c = cand[new], par[new], gk[new], c[new]
        n = len(cand)
        if total + n > budget:
            raise BudgetExceededError(
                f"visited {total + n} elements, budget {budget}", total + n, total)
        frontier = np.arange(total, total + n)
        frontier_m = cand
        mats.append(cand)
        parents.append(par)
        gen_of.append(gk)
        dists.append(hb.acosh1p(c))
        total += n
    return (np.concatenate(mats), np.concatenate(parents),
            np.concatenate(gen_of), np.concatenate(dists))


def _word(parent, gen, i):
    out = []
    while parent[i] >= 0:
        out.append(int(gen[i]))
        i = parent[i]
    return tuple(reversed(out))


def enumerate_ball(G: SurfaceGroup, z: Point, w: Point, r: float,
                   budget: int = DEFAULT_BUDGET) -> LatticeBallResult:
    """{gamma : d(z, gamma w) <= r} via breadth-first search over tiles."""
    if r < 0:
        raise ConfigError("radius must be non-negative")
    wz, zr = reduce_to_domain(G, z.z)
    ww, wr = reduce_to_domain(G, w.z)
    # gamma = hz^-1 gamma' hw with gamma' found for the reduced pair
    hz = _word_array(G, wz)
    hw = _word_array(G, ww)
    mats, parent, gen, dist = _bfs(G, zr, wr, r + 2.0 * G.domain_diameter, budget)
    keep = np.nonzero(dist <= r)[0]
    pre = [G.inverse_index[k] for k in wz[::-1]] if wz else []
    elements = []
    hz_i = np.linalg.inv(hz)
    for i in keep[np.argsort(dist[keep], kind="stable")]:
        word = tuple(pre) + _word(parent, gen, i) + tuple(ww)
        m = MoebiusTransform.from_array(hz_i @ mats[i] @ hw)
        elements.append((word, m, float(dist[i])))
    return LatticeBallResult(elements, z, w, r, visited=len(mats))


def _word_array(G, word):
    out = np.eye(2)
    for k in word:
        out = out @ G.gen_array[k]
    return out


# ------------------------------------------------------ injectivity radius

def injectivity_radius_at(G: SurfaceGroup, z: Point, r0: float = 1.0,
                          budget: int = DEFAULT_BUDGET) -> float:
    key = (z.x, z.y)
    if key in G._injrad_cache:
        return G._injrad_cache[key]
    r = r0
    while True:
        res = enumerate_ball(G, z, z, r, budget)
        d = [e[2] for e in res.elements if hb.classify(e[1]).kind != "identity"]
        if d:
            val = 0.5 * min(d)
            G._injrad_cache[key] = val
            return val
        r *= 2.0


@dataclass
class InjRadEstimate:
    value: float
    argmin: Point
    n_points: int
    sample_based: bool = True


def injectivity_radius(G: SurfaceGroup, sample) -> InjRadEstimate:
    """Minimum of the pointwise radius over a sample; an upper bound on InjRad(X)."""
    pts = list(dict.fromkeys(sample))
    if not pts:
        raise ConfigError("empty sample")
    vals = [injectivity_radius_at(G, p) for p in pts]
    i = int(np.argmin(vals))
    return InjRadEstimate(vals[i], pts[i], len(pts))


def domain_sample(G: SurfaceGroup, n_radial: int = 4, n_angular: int = 8) -> list:
    """Deterministic polar grid around the base point, clipped to the domain."""
    base = G.base_point
    rmax = 0.5 * G.domain_diameter
    pts = [base]
    y0 = base.y
    for i in range(1, n_radial + 1):
        rho = rmax * i / n_radial
        for j in range(n_angular):
            th = 2 * math.pi * (j + 0.5 * (i % 2)) / n_angular
            # point at distance rho from i in direction th (disk model), then scale
            t = math.tanh(rho / 2) * complex(math.cos(th), math.sin(th))
            zz = 1j * (1 + t) / (1 - t)
            zz = base.x + y0 * zz
            if in_domain(G, zz, slack=1e-9):
                pts.append(Point(zz.real, zz.imag))
    return pts


# ------------------------------------------------------------- loop census

@dataclass
class LoopCensus:
    point: Point
    length_cap: float
    primitive_loops: list
    count: int


class _MatrixLookup:
    def __init__(self, mats: np.ndarray):
        flat = mats.reshape(len(mats), 4)
        self.tree = cKDTree(np.vstack([flat, -flat])) if len(flat) else None

    def contains(self, m: np.ndarray, tol: float = 1e-8) -> bool:
        if self.tree is None:
            return False
        scale = max(1.0, float(np.abs(m).max()))
        d, _ = self.tree.query(m.reshape(4), k=1)
        return bool(d <= tol * scale)


def loop_census(G: SurfaceGroup, z: Point, L: float,
                budget: int = DEFAULT_BUDGET) -> LoopCensus:
    if L < 0:
        raise ConfigError("L must be non-negative")
    res = enumerate_ball(G, z, z, L, budget)
    elems = [e for e in res.elements if hb.classify(e[1]).kind != "identity"]
    if not elems:
        return LoopCensus(z, L, [], 0)
    inj = 0.5 * min(e[2] for e in elems)
    mmax = int(math.floor(L / (2.0 * inj) + 1e-12))
    look = _MatrixLookup(np.array([e[1].as_array() for e in elems]))
    loops = []
    taken = []
    for word, m, d in elems:
        if any(m.isclose(t) for t in taken):
            continue
        primitive = True
        for k in range(2, mmax + 1):
            root = hb.hyperbolic_root(m, k)
            if look.contains(root.as_array()):
                primitive = False
                break
        taken.append(hb.inverse(m))
        taken.append(m)
        if primitive:
            loops.append(((word, m), d))
    return LoopCensus(z, L, loops, len(loops))


# ------------------------------------------------------ growth certificate

@dataclass
class GrowthCertificate:
    R: float
    delta_grid: list
    C_of_X: float
    C0_of_delta: dict
    witness_points: list
    r_grid: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    inequality_rows: list = field(default_factory=list)
    injrad: float = float("nan")
    holds: bool = True


def certify_growth(G: SurfaceGroup, R: float, delta_grid, point_sample,
                   r_step: float = 0.5, budget: int = DEFAULT_BUDGET,
                   n_scale: float = 1.0) -> GrowthCertificate:
    """Record ball counts on an r-grid and check the loop-count inequality.

    C0(delta) is the smallest constant making count <= C(X) C0 e^{delta r}
    on the sampled data.  n_scale multiplies the loop count n in the checked
    inequality (used to probe monotonicity in n).
    """
    if R < 0:
        raise ConfigError("R must be non-negative")
    pts = list(dict.fromkeys(point_sample))
    deltas = [float(d) for d in delta_grid]
    if R == 0 or not pts:
        return GrowthCertificate(R, deltas, float("nan"), {d: 0.0 for d in deltas}, [])
    nstep = int(math.floor(R / r_step + 1e-12))
    r_grid = [r_step * (i + 1) for i in range(nstep)]
    inj = injectivity_radius(G, pts).value
    C = 1.0 / inj
    # n(r): sup over the sample of the primitive loop count at length r
    n_of_r = {}
    for r in r_grid:
        n_of_r[r] = max(loop_census(G, p, r, budget).count for p in pts)
    C0 = {d: 0.0 for d in deltas}
    counts = {}
    rows = []
    pairs = [(p, q) for p in pts for q in pts]
    holds = True
    witness = None
    for p, q in pairs:
        ball = enumerate_ball(G, p, q, R, budget)
        dist = np.sort(ball.distances)
        for r in r_grid:
            cnt = int(np.searchsorted(dist, r * (1 + 1e-12), side="right"))
            counts[(p, q, r)] = cnt
            for d in deltas:
                C0[d] = max(C0[d], cnt / (C * math.exp(d * r)))
            half = int(np.searchsorted(dist, 0.5 * r * (1 + 1e-12), side="right"))
            rhs = 2.0 * n_scale * n_of_r[r] * r / inj + 2.0
            ok = half <= rhs
            rows.append((p, q, r, half, rhs, ok))
            if not ok and holds:
                holds = False
                witness = (p, q, r, half, rhs)
    cert = GrowthCertificate(R, deltas, C, C0, pairs, r_grid, counts, rows, inj, holds)
    if not holds:
        raise CertificateViolation(
            f"loop-count inequality fails at r={witness[2]}: {witness[3]} > {witness[4]:.6g}",
            witness)
    return cert


def fit_growth_constant(G: SurfaceGroup, z: Point, r_grid, budget=DEFAULT_BUDGET):
    """Smallest A with count(r) <= A e^r on the grid; returns (A, counts)."""
    r_grid = list(r_grid)
    ball = enumerate_ball(G, z, z, max(r_grid), budget)
    dist = np.sort(ball.distances)
    counts = [int(np.searchsorted(dist, r * (1 + 1e-12), side="right")) for r in r_grid]
    A = max(c * math.exp(-r) for c, r in zip(counts, r_grid))
    return A, counts
