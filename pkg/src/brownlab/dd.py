"""Double-double ("pair") arithmetic, vectorized over numpy arrays.

A double-double value is an unevaluated sum hi + lo of two IEEE doubles
with |lo| <= ulp(hi)/2, giving roughly 32 significant decimal digits.
The building blocks are the classical error-free transformations
(Knuth two-sum, Dekker split/product); products use Dekker splitting
since numpy exposes no fma.

Real values are (hi, lo) pairs of float64 arrays; complex values are
pairs of real pairs.  ``DDArray`` carries just enough operations for the
extended-precision linear algebra in :mod:`brownlab.numerics`: matmul,
column updates, Householder QR and Jacobi rotations.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1

__all__ = ["DD", "DDArray"]


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    c = _SPLITTER * a
    big = c - a
    hi = c - big
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _add(xh, xl, yh, yl):
    s1, s2 = _two_sum(xh, yh)
    t1, t2 = _two_sum(xl, yl)
    s2 = s2 + t1
    s1, s2 = _quick_two_sum(s1, s2)
    s2 = s2 + t2
    return _quick_two_sum(s1, s2)


def _mul(xh, xl, yh, yl):
    p, e = _two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return _quick_two_sum(p, e)


def _div(xh, xl, yh, yl):
    q1 = xh / yh
    rh, rl = _add(xh, xl, *_mul(q1, np.zeros_like(q1), -yh, -yl))
    q2 = rh / yh
    rh, rl = _add(rh, rl, *_mul(q2, np.zeros_like(q2), -yh, -yl))
    q3 = rh / yh
    s1, s2 = _quick_two_sum(q1, q2)
    return _add(s1, s2, q3, np.zeros_like(q3))


def _sqrt(xh, xl):
    # Karp's trick: one Newton step on 1/sqrt at double precision
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(xh > 0, 1.0 / np.sqrt(np.where(xh > 0, xh, 1.0)), 0.0)
    axh, axl = _mul(xh, xl, r, np.zeros_like(r))
    # ax + (x - ax^2) * r / 2
    sqh, sql = _mul(axh, axl, axh, axl)
    dh, dl = _add(xh, xl, -sqh, -sql)
    ch, cl = _mul(dh, dl, r * 0.5, np.zeros_like(r))
    return _add(axh, axl, ch, cl)


class DD:
    """Real double-double array (or scalar): an unevaluated hi + lo sum."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        self.hi = np.asarray(hi, dtype=float)
        self.lo = np.zeros_like(self.hi) if lo is None else np.asarray(lo, dtype=float)

    def __add__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        return DD(*_add(self.hi, self.lo, o.hi, o.lo))

    def __sub__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        return DD(*_add(self.hi, self.lo, -o.hi, -o.lo))

    def __mul__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        return DD(*_mul(self.hi, self.lo, o.hi, o.lo))

    def __truediv__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        return DD(*_div(self.hi, self.lo, o.hi, o.lo))

    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def sqrt(self):
        return DD(*_sqrt(self.hi, self.lo))

    def sum(self):
        """Accurate sum of all elements (pairwise dd accumulation)."""
        h = self.hi.reshape(-1)
        l = self.lo.reshape(-1)
        ah, al = np.float64(0.0), np.float64(0.0)
        for i in range(h.size):
            ah, al = _add(ah, al, h[i], l[i])
        return DD(ah, al)

    def to_float(self):
        return self.hi + self.lo

    def __repr__(self):
        return f"DD({self.hi!r}, {self.lo!r})"


class DDArray:
    """Complex double-double array built from four float64 arrays."""

    __slots__ = ("re", "im")

    def __init__(self, re: DD, im: DD):
        self.re = re
        self.im = im

    @staticmethod
    def from_complex(a) -> "DDArray":
        a = np.asarray(a, dtype=complex)
        return DDArray(DD(a.real.copy()), DD(a.imag.copy()))

    def to_complex(self) -> np.ndarray:
        return self.re.to_float() + 1j * self.im.to_float()

    @property
    def shape(self):
        return self.re.hi.shape

    def copy(self) -> "DDArray":
        return DDArray(DD(self.re.hi.copy(), self.re.lo.copy()),
                       DD(self.im.hi.copy(), self.im.lo.copy()))

    def conj(self) -> "DDArray":
        return DDArray(DD(self.re.hi, self.re.lo), -self.im)

    def __add__(self, other):
        return DDArray(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return DDArray(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return DDArray(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, DD):
            return DDArray(self.re * other, self.im * other)
        return DDArray(self.re * other.re - self.im * other.im,
                       self.re * other.im + self.im * other.re)

    def __getitem__(self, idx):
        return DDArray(DD(self.re.hi[idx], self.re.lo[idx]),
                       DD(self.im.hi[idx], self.im.lo[idx]))

    def __setitem__(self, idx, value: "DDArray"):
        self.re.hi[idx] = value.re.hi
        self.re.lo[idx] = value.re.lo
        self.im.hi[idx] = value.im.hi
        self.im.lo[idx] = value.im.lo

    def abs2(self) -> DD:
        return self.re * self.re + self.im * self.im

    def matmul(self, other: "DDArray") -> "DDArray":
        """Matrix product with dd accumulation, O(k) python loop."""
        m, k = self.shape
        k2, n = other.shape
        assert k == k2
        out = DDArray(DD(np.zeros((m, n))), DD(np.zeros((m, n))))
        for j in range(k):
            a = self[:, j]
            col = DDArray(DD(a.re.hi[:, None], a.re.lo[:, None]),
                          DD(a.im.hi[:, None], a.im.lo[:, None]))
            b = other[j, :]
            row = DDArray(DD(b.re.hi[None, :], b.re.lo[None, :]),
                          DD(b.im.hi[None, :], b.im.lo[None, :]))
            out = out + col * row
        return out

    def dot_cols(self, p: int, q: int) -> "DDArray":
        """Inner product <col_p, col_q> = col_p^* . col_q (scalar DDArray)."""
        prod = self[:, p].conj() * self[:, q]
        return DDArray(prod.re.sum(), prod.im.sum())

    def sum_axis(self, axis: int) -> "DDArray":
        """Accurate reduction along one axis of a 2-d array."""
        n = self.shape[axis]
        idx0 = (0, slice(None)) if axis == 0 else (slice(None), 0)
        acc = self[idx0].copy()
        for i in range(1, n):
            idx = (i, slice(None)) if axis == 0 else (slice(None), i)
            acc = acc + self[idx]
        return acc

    def conj_T(self) -> "DDArray":
        return DDArray(DD(self.re.hi.T.copy(), self.re.lo.T.copy()),
                       DD(-self.im.hi.T.copy(), -self.im.lo.T.copy()))

    @staticmethod
    def eye(n: int) -> "DDArray":
        return DDArray.from_complex(np.eye(n, dtype=complex))

    @staticmethod
    def zeros(shape) -> "DDArray":
        return DDArray(DD(np.zeros(shape)), DD(np.zeros(shape)))
