"""Upper half-plane geometry and PSL(2,R)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTransformError, ConfigError

TOL_DET = 1e-12
TOL_TRACE = 1e-9


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigError(f"non-finite point ({self.x}, {self.y})")
        if self.y <= 0:
            raise ConfigError(f"point not in upper half-plane: y = {self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "Point":
        return cls(float(z.real), float(z.imag))


def _canonical(a, b, c, d):
    for v in (a, b, c, d):
        if v != 0.0:
            if v < 0:
                return -a, -b, -c, -d
            break
    return a, b, c, d


@dataclass(frozen=True)
class MoebiusTransform:
    """z -> (az+b)/(cz+d), stored normalized to det 1 with canonical sign."""
    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_entries(cls, a, b, c, d, tol_det: float = TOL_DET) -> "MoebiusTransform":
        a, b, c, d = (float(v) for v in (a, b, c, d))
        if not all(math.isfinite(v) for v in (a, b, c, d)):
            raise DegenerateTransformError("non-finite matrix entry")
        det = a * d - b * c
        if not det > 0:
            raise DegenerateTransformError(f"determinant {det} is not positive")
        s = 1.0 / math.sqrt(det)
        a, b, c, d = _canonical(a * s, b * s, c * s, d * s)
        if abs(a * d - b * c - 1.0) > tol_det:
            raise DegenerateTransformError("normalization failed to reach det 1")
        return cls(a, b, c, d)

    @classmethod
    def from_array(cls, m) -> "MoebiusTransform":
        m = np.asarray(m, dtype=float)
        return cls.from_entries(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(1.0, 0.0, 0.0, 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def isclose(self, other: "MoebiusTransform", tol: float = 1e-8) -> bool:
        u = np.array([self.a, self.b, self.c, self.d])
        v = np.array([other.a, other.b, other.c, other.d])
        return bool(min(np.max(np.abs(u - v)), np.max(np.abs(u + v))) <= tol)

    def __matmul__(self, other):
        return compose(self, other)


def apply(m: MoebiusTransform, z: Point) -> Point:
    w = z.z
    num = m.a * w + m.b
    den = m.c * w + m.d
    try:
        out = num / den
    except ZeroDivisionError:
        raise DegenerateTransformError("pole hit") from None
    if not (math.isfinite(out.real) and math.isfinite(out.imag)) or out.imag <= 0:
        raise DegenerateTransformError(f"degenerate image {out}")
    return Point(out.real, out.imag)


def compose(m1: MoebiusTransform, m2: MoebiusTransform) -> MoebiusTransform:
    a = m1.a * m2.a + m1.b * m2.c
    b = m1.a * m2.b + m1.b * m2.d
    c = m1.c * m2.a + m1.d * m2.c
    d = m1.c * m2.b + m1.d * m2.d
    return MoebiusTransform.from_entries(a, b, c, d, tol_det=1e-8)


def inverse(m: MoebiusTransform) -> MoebiusTransform:
    return MoebiusTransform.from_entries(m.d, -m.b, -m.c, m.a)


def power(m: MoebiusTransform, n: int) -> MoebiusTransform:
    if n < 0:
        return power(inverse(m), -n)
    out = MoebiusTransform.identity()
    base = m
    while n:
        if n & 1:
            out = compose(out, base)
        base = compose(base, base)
        n >>= 1
    return out


def acosh1p(delta):
    """arccosh(1 + delta), accurate for small delta."""
    delta = np.asarray(delta, dtype=float)
    return np.log1p(delta + np.sqrt(delta * (delta + 2.0)))


def cosh_distance_m1(x1, y1, x2, y2):
    """cosh d - 1 for points in H, vectorized."""
    return ((x1 - x2) ** 2 + (y1 - y2) ** 2) / (2.0 * y1 * y2)


def distance(z: Point, w: Point) -> float:
    return float(acosh1p(cosh_distance_m1(z.x, z.y, w.x, w.y)))


@dataclass(frozen=True)
class Classification:
    kind: str
    translation_length: float | None = None


def classify(m: MoebiusTransform, tol_trace: float = TOL_TRACE) -> Classification:
    if (abs(m.a - 1) <= tol_trace and abs(m.d - 1) <= tol_trace
            and abs(m.b) <= tol_trace and abs(m.c) <= tol_trace):
        return Classification("identity")
    tr = abs(m.trace)
    if tr < 2.0 - tol_trace:
        return Classification("elliptic")
    if tr <= 2.0 + tol_trace:
        return Classification("parabolic")
    return Classification("hyperbolic", translation_length(m))


def translation_length(m: MoebiusTransform) -> float:
    tr = abs(m.trace)
    if tr <= 2.0:
        return 0.0
    return float(2.0 * acosh1p(tr / 2.0 - 1.0))


def _cheb_u(n: int, x: float) -> float:
    # Chebyshev polynomial of the second kind, U_{-1} = 0
    if n < 0:
        return 0.0
    u0, u1 = 1.0, 2.0 * x
    if n == 0:
        return u0
    for _ in range(n - 1):
        u0, u1 = u1, 2.0 * x * u1 - u0
    return u1


def hyperbolic_root(m: MoebiusTransform, k: int) -> MoebiusTransform:
    """The unique hyperbolic R with R^k = m (m hyperbolic, k >= 1)."""
    if k == 1:
        return m
    arr = m.as_array()
    if m.trace < 0:
        arr = -arr
    ell = translation_length(m)
    if ell <= 0:
        raise DegenerateTransformError("root of a non-hyperbolic element")
    tau = math.cosh(ell / (2.0 * k))
    # M = U_{k-1}(tau) R - U_{k-2}(tau) I  (Cayley-Hamilton for det 1)
    r = (arr + _cheb_u(k - 2, tau) * np.eye(2)) / _cheb_u(k - 1, tau)
    return MoebiusTransform.from_array(r)


def mats_apply(mats: np.ndarray, z: complex) -> np.ndarray:
    """Act by a stack of matrices (N,2,2) on a single point; returns complex array."""
    num = mats[:, 0, 0] * z + mats[:, 0, 1]
    den = mats[:, 1, 0] * z + mats[:, 1, 1]
    return num / den


def canonical_sign(mats: np.ndarray) -> np.ndarray:
    """Flip each (N,2,2) matrix so its first nonzero entry is positive."""
    flat = mats.reshape(len(mats), 4)
    nz = flat != 0.0
    first = np.argmax(nz, axis=1)
    lead = flat[np.arange(len(flat)), first]
    sgn = np.where(lead < 0, -1.0, 1.0)
    return mats * sgn[:, None, None]
