"""Truncated Taylor series over real coefficients.

This module provides the arithmetic that every other part of the package is
built on: a :class:`TruncatedSeries` stores the coefficients c_0..c_n of a
d-component Taylor polynomial

    A(z) = c_0 + c_1 z + ... + c_n z^n,        c_k in R^d,

together with its truncation order n.  Operations never pretend to know
coefficients beyond what the operands carry: combining series of different
orders truncates to the shorter one, so every stored coefficient of a result
is exact given exact inputs.

Scalar series (d = 1) additionally support multiplication, reciprocals and
the coupled sine/cosine recursion

    (k+1) S_{k+1} =  sum_{j=0..k} C_{k-j} (j+1) a_{j+1},
    (k+1) C_{k+1} = -sum_{j=0..k} S_{k-j} (j+1) a_{j+1},

seeded with S_0 = sin(a_0), C_0 = cos(a_0).  The results are kept in a
:class:`TrigCache` so a series built one coefficient at a time can extend its
sine and cosine in O(n) per step (:func:`trig_extend`) instead of O(n^2)
from scratch; the recursion only reads a_{n+1} when producing S_{n+1}, C_{n+1},
so earlier entries of the cache never change.

Everything here is immutable and pure: operations return fresh values and the
coefficient arrays are frozen, so values can be shared freely across threads.

The O(n^2) inner loops live in :mod:`parman._kernels`, which picks a compiled
backend when available and falls back to numpy.
"""

import numpy as np

from . import _kernels
from .errors import SingularSeriesError

__all__ = [
    "TruncatedSeries",
    "TrigCache",
    "add",
    "mul",
    "scale_arg",
    "evaluate",
    "reciprocal",
    "sin_cos",
    "trig_extend",
]


def _freeze(arr):
    arr.flags.writeable = False
    return arr


class TruncatedSeries:
    """Immutable truncated Taylor polynomial with d components.

    Args:
        coeffs: array-like of shape (n+1,) for a scalar series or (n+1, d)
            for a d-component one.  Copied to a frozen float64 array.

    Attributes:
        order: truncation order n (>= 0).
        dim: number of components d (>= 1).
        coeffs: read-only float64 array of shape (n+1, dim).
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        arr = np.array(coeffs, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"coefficients must be (n+1,) or (n+1, d), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("series coefficients must be finite")
        self._coeffs = _freeze(np.ascontiguousarray(arr))

    @classmethod
    def zero(cls, order, dim=1):
        return cls(np.zeros((order + 1, dim)))

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def order(self):
        return self._coeffs.shape[0] - 1

    @property
    def dim(self):
        return self._coeffs.shape[1]

    def column(self):
        """The coefficients of a scalar series as a flat read-only array."""
        self._require_scalar("column")
        return self._coeffs[:, 0]

    def component(self, i):
        """Component i as a scalar series."""
        return TruncatedSeries(self._coeffs[:, i])

    def truncated(self, order):
        """This series cut down to the given (not larger) order."""
        if order > self.order:
            raise ValueError(f"cannot extend order {self.order} to {order} by truncation")
        return TruncatedSeries(self._coeffs[: order + 1])

    def _require_scalar(self, what):
        if self.dim != 1:
            raise ValueError(f"{what} requires a scalar series, got dim {self.dim}")

    def __repr__(self):
        head = np.array2string(self._coeffs[: min(4, self.order + 1), :], precision=6)
        tail = ", ..." if self.order >= 4 else ""
        return f"TruncatedSeries(order={self.order}, dim={self.dim}, coeffs={head}{tail})"

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self._coeffs.shape == other._coeffs.shape and bool(
            np.array_equal(self._coeffs, other._coeffs)
        )

    # -- operator sugar; the named functions below hold the semantics -----

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, -other)

    def __neg__(self):
        return TruncatedSeries(-self._coeffs)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul(self, other)
        return TruncatedSeries(self._coeffs * float(other))

    __rmul__ = __mul__


class TrigCache:
    """Sine and cosine series of one scalar base series, kept together.

    The triple (base, sin_series, cos_series) shares one truncation order.
    Extending the base by one coefficient extends both trig series in O(n)
    via :func:`trig_extend`; coefficients below the new order are reused
    unchanged, which is exact, not an approximation.
    """

    __slots__ = ("base", "sin_series", "cos_series")

    def __init__(self, base, sin_series, cos_series):
        if not (base.order == sin_series.order == cos_series.order):
            raise ValueError("cache series must share one truncation order")
        if not (base.dim == sin_series.dim == cos_series.dim == 1):
            raise ValueError("trig caches hold scalar series only")
        self.base = base
        self.sin_series = sin_series
        self.cos_series = cos_series

    @property
    def order(self):
        return self.base.order


def add(a, b):
    """Componentwise sum, truncated to the shorter operand's order."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    n = min(a.order, b.order)
    return TruncatedSeries(a.coeffs[: n + 1] + b.coeffs[: n + 1])


def mul(a, b):
    """Cauchy product of two scalar series, truncated to the shorter order.

    c_k = sum_{j=0..k} a_j b_{k-j} for k up to min(a.order, b.order).
    """
    a._require_scalar("mul")
    b._require_scalar("mul")
    n = min(a.order, b.order)
    c = _kernels.cauchy_product(a.coeffs[: n + 1, 0], b.coeffs[: n + 1, 0])
    return TruncatedSeries(c)


def scale_arg(a, lam):
    """The series of z -> A(lam * z): coefficient k becomes lam^k c_k."""
    lam = float(lam)
    powers = np.power(lam, np.arange(a.order + 1, dtype=np.float64))
    return TruncatedSeries(a.coeffs * powers[:, None])


def evaluate(a, z):
    """Horner evaluation at a real point.

    Returns a float for scalar series, else an array of shape (dim,).
    No radius checking is done; the caller owns convergence concerns.
    """
    z = float(z)
    acc = a.coeffs[a.order].copy()
    for k in range(a.order - 1, -1, -1):
        acc *= z
        acc += a.coeffs[k]
    if a.dim == 1:
        return float(acc[0])
    return acc


def reciprocal(a):
    """Series b with mul(a, b) = (1, 0, ..., 0) through a.order.

    b_0 = 1/a_0 and b_k = -(1/a_0) sum_{j=1..k} a_j b_{k-j}; requires a
    nonzero constant term.
    """
    a._require_scalar("reciprocal")
    if a.coeffs[0, 0] == 0.0:
        raise SingularSeriesError("reciprocal of a series with zero constant term")
    return TruncatedSeries(_kernels.reciprocal_coeffs(a.column()))


def sin_cos(a):
    """Sine and cosine series of a scalar series, as a TrigCache.

    Seeds with sin(a_0), cos(a_0), so a nonzero constant term is fine.
    """
    a._require_scalar("sin_cos")
    col = a.column()
    S, C = _kernels.sin_cos_coeffs(col, np.sin(col[0]), np.cos(col[0]))
    return TrigCache(a, TruncatedSeries(S), TruncatedSeries(C))


def trig_extend(cache, new_coeff):
    """Extend a TrigCache by one base coefficient a_{n+1} in O(n).

    Produces the cache of the extended base; identical to recomputing
    sin_cos on the longer base, because S_{n+1}, C_{n+1} depend only on
    coefficients up to n+1 and lower entries do not involve a_{n+1}.
    """
    base_ext = np.empty(cache.order + 2)
    base_ext[:-1] = cache.base.column()
    base_ext[-1] = float(new_coeff)
    s_top, c_top = _kernels.sin_cos_step(
        base_ext, cache.sin_series.column(), cache.cos_series.column()
    )
    S = np.append(cache.sin_series.column(), s_top)
    C = np.append(cache.cos_series.column(), c_top)
    return TrigCache(TruncatedSeries(base_ext), TruncatedSeries(S), TruncatedSeries(C))
