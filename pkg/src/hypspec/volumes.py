"""Weil-Petersson volume table, Mirzakhani-Zograf asymptotics and the
volume inequalities used by the probability estimates.

Volumes are stored as natural logs; anything beyond double range is only
ever handled in log form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConfigError, MissingVolumeError, ParseError, PreconditionError

LOG_4PI2 = math.log(4.0 * math.pi ** 2)
SLACK = 1e-12


def bundled_table_path() -> Path:
    return Path(str(resources.files("hypspec") / "data" / "wp_volumes.csv"))


@dataclass(frozen=True)
class VolumeTable:
    entries: dict                 # (g, n) -> log V_{g,n}
    polynomials: dict = field(default_factory=dict)   # (g, n) -> {exponents: coef}
    meta: dict = field(default_factory=dict)
    fitted_C: float | None = None
    fitted_D: float | None = None
    fit_info: dict = field(default_factory=dict)

    def __contains__(self, key):
        return tuple(key) in self.entries

    def log_value(self, g: int, n: int) -> float:
        try:
            return self.entries[(g, n)]
        except KeyError:
            raise MissingVolumeError(f"V_{{{g},{n}}} not in table") from None

    def value(self, g: int, n: int) -> float:
        return math.exp(self.log_value(g, n))

    def lookup(self, g: int, n: int, fallback: bool = True):
        """(log V, from_table).  Outside the table, uses the fitted MZ form."""
        if (g, n) in self.entries:
            return self.entries[(g, n)], True
        if not fallback or self.fitted_C is None:
            raise MissingVolumeError(f"V_{{{g},{n}}} not in table and no asymptotic fallback")
        return mz_log_asymptotic(g, n, self.fitted_C), False

    @property
    def genera(self):
        return sorted({g for g, _ in self.entries})

    @property
    def max_chi(self) -> int:
        return max(2 * g - 2 + n for g, n in self.entries)

    def polynomial_value(self, g: int, n: int, L) -> float:
        """V_{g,n}(L) from the stored polynomial."""
        poly = self.polynomials.get((g, n))
        if poly is None:
            raise MissingVolumeError(f"no polynomial for (g,n) = ({g},{n})")
        L2 = np.asarray(L, dtype=float).ravel() ** 2
        if L2.size != n:
            raise ConfigError(f"need {n} boundary lengths, got {L2.size}")
        return _eval_symmetric(poly, L2)


def _eval_symmetric(poly, x):
    """sum over ordered exponent vectors e of coef(sorted e) prod x_i^{e_i}.

    Variables are absorbed one at a time; the state is the multiset of
    non-zero exponents used so far, so no permutation is ever listed.
    """
    top = max((sum(e) for e in poly), default=0)
    states = {(): 1.0}
    for xi in x:
        nxt = {}
        for st, acc in states.items():
            room = top - sum(st)
            p = 1.0
            for e in range(room + 1):
                key = st if e == 0 else tuple(sorted(st + (e,), reverse=True))
                nxt[key] = nxt.get(key, 0.0) + acc * p
                p *= xi
        states = nxt
    n = len(x)
    total = 0.0
    for st, acc in states.items():
        coef = poly.get(st + (0,) * (n - len(st)))
        if coef:
            total += coef * acc
    return total


# ------------------------------------------------------------------- I/O

def _parse_poly(cells, lineno):
    poly = {}
    for cell in cells:
        try:
            lhs, rhs = cell.split("=")
            exps = tuple(sorted((int(e) for e in lhs.split(":")), reverse=True))
            poly[exps] = float(rhs)
        except ValueError:
            raise ParseError(f"row {lineno}: bad polynomial cell {cell!r}") from None
    return poly


def load_volume_table(path=None, fit: bool = True) -> VolumeTable:
    path = Path(path) if path is not None else bundled_table_path()
    if not path.exists():
        raise ConfigError(f"volume table not found: {path}")
    entries, polys, meta = {}, {}, {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#meta"):
            key, _, val = line[5:].strip().partition("=")
            meta[key.strip()] = val.strip()
            continue
        if line.startswith("#") or line.startswith("g,n"):
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            if cells[0] == "poly":
                key = (int(cells[1]), int(cells[2]))
                polys[key] = (_parse_poly(cells[3:], lineno), lineno)
                continue
            g, n, lv = int(cells[0]), int(cells[1]), float(cells[2])
        except (ValueError, IndexError):
            raise ParseError(f"row {lineno}: cannot parse {raw!r}") from None
        if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
            raise ParseError(f"row {lineno}: unstable signature ({g},{n})")
        if not math.isfinite(lv):
            raise ParseError(f"row {lineno}: volume must be positive and finite")
        if (g, n) in entries:
            raise ParseError(f"row {lineno}: duplicate entry ({g},{n})")
        entries[(g, n)] = lv
    if not entries:
        raise ParseError(f"{path}: no volume rows")
    poly_out = {}
    for key, (poly, lineno) in polys.items():
        if key not in entries:
            raise ParseError(f"row {lineno}: polynomial for ({key[0]},{key[1]}) without a value row")
        v0 = poly.get((0,) * key[1], 0.0)
        ref = math.exp(entries[key])
        if abs(v0 - ref) > 1e-9 * ref:
            raise ParseError(f"row {lineno}: polynomial at L=0 gives {v0}, table has {ref}")
        poly_out[key] = poly
    table = VolumeTable(entries, poly_out, meta)
    if fit:
        table = fit_table(table)
    return table


def fit_table(table: VolumeTable) -> VolumeTable:
    C, dev = fit_universal_constant(table)
    table = replace(table, fitted_C=C)
    D, rows = fit_sum_product_constant(table)
    info = {"C_max_rel_dev": dev, "D_rows": len(rows)}
    return replace(table, fitted_D=D, fit_info=info)


# ------------------------------------------------- boundary-length estimate

@dataclass(frozen=True)
class BoundaryCheck:
    g: int
    n: int
    L: tuple
    lhs: float
    rhs: float
    holds: bool


def boundary_length_estimate(table: VolumeTable, g: int, n: int, L) -> BoundaryCheck:
    """Compare V_{g,n}(2L) with e^{|L|} V_{g,n}, |L| = L_1 + ... + L_n."""
    L = np.abs(np.atleast_1d(np.asarray(L, dtype=float)))
    lhs = table.polynomial_value(g, n, 2.0 * L)
    rhs = math.exp(float(L.sum())) * table.value(g, n)
    return BoundaryCheck(g, n, tuple(L.tolist()), lhs, rhs, lhs <= rhs * (1 + SLACK))


def boundary_length_sweep(table: VolumeTable, grid=(0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0)):
    """Equal lengths and a single non-zero length, for every stored polynomial."""
    rows = []
    for (g, n) in sorted(table.polynomials):
        for x in grid:
            rows.append(boundary_length_estimate(table, g, n, [x] * n))
            if n > 1 and x > 0:
                rows.append(boundary_length_estimate(table, g, n, [x] + [0.0] * (n - 1)))
    return rows


# ------------------------------------------------ genus/boundary exchange

def volume_relation_check(table: VolumeTable, g: int, n: int, i: int) -> float:
    """V_{g,n} / V_{g+i, n-2i}."""
    if not 0 <= 2 * i <= n:
        raise PreconditionError(f"need 0 <= i <= n/2, got i={i}, n={n}")
    if i == 0:
        table.log_value(g, n)
        return 1.0
    return math.exp(table.log_value(g, n) - table.log_value(g + i, n - 2 * i))


def volume_relation_sweep(table: VolumeTable):
    """All admissible (g, n, i >= 1) with both entries present; returns
    (max ratio, argmax, rows)."""
    rows = []
    for (g, n) in sorted(table.entries):
        for i in range(1, n // 2 + 1):
            if (g + i, n - 2 * i) in table.entries:
                rows.append((g, n, i, volume_relation_check(table, g, n, i)))
    best = max(rows, key=lambda r: r[3])
    return best[3], best[:3], rows


# ------------------------------------------------------ MZ asymptotics

def mz_log_asymptotic(g: int, n: int, C: float) -> float:
    """log of C/sqrt(g) (2g-3+n)! (4 pi^2)^{2g-3+n}."""
    m = 2 * g - 3 + n
    if m < 0 or g < 1:
        raise PreconditionError(f"need g >= 1 and 2g-3+n >= 0, got ({g},{n})")
    if C == 0:
        return -math.inf
    if C < 0:
        raise ConfigError("C must be non-negative")
    return math.log(C) - 0.5 * math.log(g) + float(gammaln(m + 1)) + m * LOG_4PI2


def mz_asymptotic(g: int, n: int, C: float) -> float:
    lv = mz_log_asymptotic(g, n, C)
    if lv == -math.inf:
        return 0.0
    return math.exp(lv) if lv < 709.0 else math.inf


def mz_ratio_profile(table: VolumeTable, n: int = 0):
    """(g, V_{g,n} / MZ form with C = 1) for the table genera with n fixed."""
    out = []
    for g in table.genera:
        if g >= 1 and 2 * g - 3 + n >= 0 and (g, n) in table.entries:
            out.append((g, math.exp(table.entries[(g, n)] - mz_log_asymptotic(g, n, 1.0))))
    return out


def fit_universal_constant(table: VolumeTable, n: int = 0):
    """Least-squares C over the largest-g half of the table (closed surfaces
    by default).  Minimises sum (ratio/C - 1)^2, i.e. relative error.
    Returns (C, max relative deviation)."""
    prof = mz_ratio_profile(table, n)
    if not prof:
        raise MissingVolumeError("no entries to fit the MZ constant")
    gs = [g for g, _ in prof]
    cut = max(gs) - (max(gs) - min(gs)) // 2
    r = np.array([v for g, v in prof if g >= cut])
    C = float(np.sum(r ** 2) / np.sum(r))
    return C, float(np.max(np.abs(r / C - 1.0)))


# ------------------------------------------------- sums of volume products

def admissible_tuples(g: int, k: int, q: int, n_partition):
    """Ordered genus tuples (g_1..g_q) with sum g + q - k - 1 and
    2 g_i - 3 + n_i >= 0."""
    target = g + q - k - 1
    lows = [max(0, math.ceil((3 - ni) / 2)) for ni in n_partition]
    out = []

    def rec(i, left, acc):
        if i == q - 1:
            if left >= lows[i]:
                out.append(tuple(acc + [left]))
            return
        for gi in range(lows[i], left - sum(lows[i + 1:]) + 1):
            rec(i + 1, left - gi, acc + [gi])

    if target >= sum(lows):
        rec(0, target, [])
    return out


@dataclass(frozen=True)
class VolumeProductResult:
    log_sum: float            # -inf when the constraint set is empty
    log_envelope: float       # log(V_g D^k sqrt(k) / g^{(q-1)/2}); nan without D
    n_terms: int
    empty: bool
    used_asymptotic: bool


def sum_volume_product(table: VolumeTable, g: int, k: int, q: int, n_partition,
                       D: float | None = None) -> VolumeProductResult:
    n_partition = tuple(int(x) for x in n_partition)
    if not 2 <= q <= k + 1:
        raise PreconditionError(f"need 2 <= q <= k+1, got q={q}, k={k}")
    if len(n_partition) != q or sum(n_partition) != 2 * k or min(n_partition) < 1:
        raise PreconditionError("n_partition must have q positive parts summing to 2k")
    tuples = admissible_tuples(g, k, q, n_partition)
    asym = False
    logs = []
    for tup in tuples:
        s = 0.0
        for gi, ni in zip(tup, n_partition):
            lv, hit = table.lookup(gi, ni)
            asym |= not hit
            s += lv
        logs.append(s)
    log_sum = float(logsumexp(logs)) if logs else -math.inf
    D = table.fitted_D if D is None else D
    if D is None:
        log_env = math.nan
    else:
        lvg, hit = table.lookup(g, 0)
        asym |= not hit
        log_env = lvg + k * math.log(D) + 0.5 * math.log(k) - 0.5 * (q - 1) * math.log(g)
    return VolumeProductResult(log_sum, log_env, len(tuples), not tuples, asym)


def fit_sum_product_constant(table: VolumeTable):
    """Smallest D with sum <= V_g D^k sqrt(k) / sqrt(g) over every
    two-piece case (q = 2, n = (k, k)) the table answers exactly."""
    rows = []
    for g in table.genera:
        if g < 2 or (g, 0) not in table.entries:
            continue
        for k in range(1, g + 2):
            tups = admissible_tuples(g, k, 2, (k, k))
            if not tups or any((gi, k) not in table.entries for t in tups for gi in t):
                continue
            res = sum_volume_product(table, g, k, 2, (k, k), D=1.0)
            # res.log_envelope with D = 1 is log(V_g sqrt(k)/sqrt(g))
            rows.append((g, k, (res.log_sum - res.log_envelope) / k))
    if not rows:
        raise MissingVolumeError("table too small to fit D")
    return float(math.exp(max(r[2] for r in rows))), rows
