"""Independent Weil-Petersson volume oracle (Mirzakhani's recursion).

Kept outside the package on purpose: it is run once to generate the bundled
table and again by the test-suite to spot-check it.

Normalisation: V_{g,n}(2L) = sum_d c_d(g,n) pi^{2m} prod L_i^{2 d_i} / (2 d_i + 1)!
with m = 3g - 3 + n - |d|.  The c_d are symmetric in d and are stored under
the sorted exponent tuple.  With this normalisation V_{1,1} = pi^2/12
(the elliptic involution is divided out) and V_{0,4}(L) = (4 pi^2 + sum L_i^2)/2.

    python tools/mirzakhani_recursion.py --max-chi 20 --poly-chi 10 -o src/hypspec/data/wp_volumes.csv
"""
from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb

@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    # Akiyama-Tanigawa; gives B_1 = +1/2 but only even indices are used here
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    return a[0]


@lru_cache(maxsize=None)
def alpha(L: int):
    """a_L / pi^{2L} with a_L = zeta(2L)(1 - 2^{1-2L})."""
    if L == 0:
        return Fraction(1, 2)
    B = abs(bernoulli(2 * L))
    zeta = B * 2 ** (2 * L) / (2 * math.factorial(2 * L))    # zeta(2L) / pi^{2L}
    return zeta * (1 - Fraction(1, 2 ** (2 * L - 1)))


class Oracle:
    def __init__(self, exact: bool = False):
        self.exact = exact
        self.one = Fraction(1) if exact else 1.0
        self.zero = Fraction(0) if exact else 0.0
        self._cache = {}

    def a(self, L):
        v = alpha(L)
        return v if self.exact else float(v)

    def coeff(self, g: int, d) -> object:
        """c_d(g, n) for the exponent multiset d (any order)."""
        n = len(d)
        if g < 0 or 2 * g - 2 + n <= 0 or any(x < 0 for x in d):
            return self.zero
        if sum(d) > 3 * g - 3 + n:
            return self.zero
        key = (g, tuple(sorted(d, reverse=True)))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        val = self._compute(g, key[1])
        self._cache[key] = val
        return val

    def _compute(self, g, d):
        n = len(d)
        if (g, n) == (0, 3):
            return self.one if d == (0, 0, 0) else self.zero
        if (g, n) == (1, 1):
            if d == (0,):
                return Fraction(1, 12) if self.exact else 1.0 / 12.0
            return Fraction(1, 2) if self.exact else 0.5
        if n == 0:
            # dilaton relation V_{g,0} = V'_{g,1}(2 pi i) / (2 pi i (2g - 2))
            acc = self.zero
            for k in range(1, 3 * g - 1):
                c = self.coeff(g, [k])
                sign = 1 if k % 2 else -1
                acc += sign * k * c / (2 * math.factorial(2 * k + 1) * (2 * g - 2))
            return acc
        # peel the boundary with the smallest exponent
        d1 = d[-1]
        rest = list(d[:-1])
        m = 3 * g - 3 + n - sum(d)
        total = self.zero
        # A: glue boundary 1 to boundary j
        seen = {}
        for j, dj in enumerate(rest):
            if dj in seen:
                total += seen[dj]
                continue
            others = rest[:j] + rest[j + 1:]
            acc = self.zero
            for L in range(0, m + 1):
                top = d1 + dj + L - 1
                if top < 0:
                    continue
                c = self.coeff(g, [top] + others)
                if c:
                    acc += (2 * dj + 1) * self.a(L) * c
            seen[dj] = 8 * acc
            total += seen[dj]
        # B: cut along a non-separating curve
        acc = self.zero
        for L in range(0, m + 1):
            s = L + d1 - 2
            if s < 0:
                continue
            aL = self.a(L)
            for k1 in range(0, s + 1):
                c = self.coeff(g - 1, [k1, s - k1] + rest)
                if c:
                    acc += aL * c
        total += 16 * acc
        # C: cut along a separating curve; sub-multisets of rest
        values = sorted(set(rest))
        mult = [rest.count(v) for v in values]
        acc = self.zero
        for pick in product(*[range(c + 1) for c in mult]):
            weight = 1
            I, J = [], []
            for v, c, p in zip(values, mult, pick):
                weight *= comb(c, p)
                I += [v] * p
                J += [v] * (c - p)
            for q in range(0, g + 1):
                if 2 * q - 1 + len(I) <= 0 or 2 * (g - q) - 1 + len(J) <= 0:
                    continue
                for L in range(0, m + 1):
                    s = L + d1 - 2
                    if s < 0:
                        continue
                    aL = self.a(L)
                    for k1 in range(0, s + 1):
                        c1 = self.coeff(q, [k1] + I)
                        if not c1:
                            continue
                        c2 = self.coeff(g - q, [s - k1] + J)
                        if c2:
                            acc += weight * aL * c1 * c2
        total += 16 * acc
        return total

    # ------------------------------------------------------------ volumes
    def volume(self, g: int, n: int) -> float:
        """V_{g,n} at zero boundary lengths."""
        m = 3 * g - 3 + n
        c = self.coeff(g, [0] * n)
        return float(c) * math.pi ** (2 * m)

    def log_volume(self, g: int, n: int) -> float:
        m = 3 * g - 3 + n
        return math.log(float(self.coeff(g, [0] * n))) + 2 * m * math.log(math.pi)

    def polynomial(self, g: int, n: int):
        """Coefficients of V_{g,n}(L) in the monomials prod L_i^{2 e_i}.

        Returns {sorted exponent tuple: coefficient}; each entry stands for
        the monomial symmetric function of that exponent pattern.
        """
        m0 = 3 * g - 3 + n
        out = {}
        for d in _partitions_bounded(m0, n):
            c = float(self.coeff(g, list(d)))
            if c == 0.0:
                continue
            m = m0 - sum(d)
            # V(L) = V(2 (L/2)): divide by 4^{d_i} (2 d_i + 1)!
            den = 1.0
            for x in d:
                den *= 4.0 ** x * math.factorial(2 * x + 1)
            out[d] = c * math.pi ** (2 * m) / den
        return out


def _partitions_bounded(total_max: int, n: int):
    """Non-increasing n-tuples of non-negative ints with sum <= total_max."""
    def rec(k, cap, left):
        if k == 0:
            yield ()
            return
        for x in range(min(cap, left), -1, -1):
            for tail in rec(k - 1, x, left - x):
                yield (x,) + tail
    yield from rec(n, total_max, total_max)


def table_keys(max_chi: int):
    for chi in range(1, max_chi + 1):
        for g in range(0, chi // 2 + 2):
            n = chi + 2 - 2 * g
            if n >= 0 and 2 * g - 2 + n == chi:
                yield g, n


def write_table(path, max_chi: int, poly_chi: int):
    orc = Oracle()
    lines = [
        "# Weil-Petersson volumes V_{g,n} at zero boundary length, natural log",
        "# generated by tools/mirzakhani_recursion.py (Mirzakhani recursion, float64)",
        "#meta v11_convention=pi^2/12",
        f"#meta max_chi={max_chi}",
        f"#meta poly_chi={poly_chi}",
        "# poly rows: poly,g,n,e1:e2:...:en=coefficient,...  (monomial symmetric basis in L_i^2)",
        "g,n,value_log",
    ]
    polys = []
    for g, n in table_keys(max_chi):
        lines.append(f"{g},{n},{orc.log_volume(g, n)!r}")
        sys.stderr.write(f"  ({g},{n}) done, cache {len(orc._cache)}\n")
    for g, n in table_keys(poly_chi):
        if n == 0:
            continue
        poly = orc.polynomial(g, n)
        cells = [":".join(str(x) for x in d) + "=" + repr(c) for d, c in sorted(poly.items())]
        polys.append(f"poly,{g},{n}," + ",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines + polys) + "\n")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-chi", type=int, default=20)
    ap.add_argument("--poly-chi", type=int, default=10)
    ap.add_argument("-o", "--output", required=True)
    args = ap.parse_args(argv)
    write_table(args.output, args.max_chi, args.poly_chi)


if __name__ == "__main__":
    main()
