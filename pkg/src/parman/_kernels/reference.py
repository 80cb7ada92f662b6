"""Pure numpy implementations of the O(n^2) coefficient recursions.

These are the hot loops of the series module: truncated Cauchy products,
the coupled sine/cosine coefficient recursion, its single-coefficient
extension step, and series reciprocals.  A compiled twin lives in _fast.pyx;
the backends may differ by summation order (BLAS dot versus a plain loop),
so cross-backend agreement is to rounding, not bit-for-bit.

All routines take and return contiguous float64 arrays and do no validation;
the series module owns the checking.
"""

import numpy as np


def cauchy_product(a, b):
    """Truncated product: c_k = sum_{j<=k} a_j b_{k-j} for k < len(a).

    a and b must have equal length; the result keeps that length, dropping
    the upper half of the full convolution.
    """
    n = a.shape[0]
    return np.convolve(a, b)[:n]


def sin_cos_coeffs(a, s0, c0):
    """Coefficients of sin(A(z)) and cos(A(z)) for A with coefficients a.

    Seeded with s0 = sin(a_0), c0 = cos(a_0); the remaining coefficients
    follow from S' = C A', C' = -S A':

        (k+1) S_{k+1} =  sum_{j=0..k} C_{k-j} (j+1) a_{j+1}
        (k+1) C_{k+1} = -sum_{j=0..k} S_{k-j} (j+1) a_{j+1}
    """
    n = a.shape[0] - 1
    S = np.empty(n + 1)
    C = np.empty(n + 1)
    S[0] = s0
    C[0] = c0
    q = a[1:] * np.arange(1, n + 1, dtype=np.float64)
    for k in range(n):
        S[k + 1] = (C[k::-1] @ q[: k + 1]) / (k + 1)
        C[k + 1] = -(S[k::-1] @ q[: k + 1]) / (k + 1)
    return S, C


def sin_cos_step(a_ext, S, C):
    """One extension step of the sine/cosine recursion.

    Given base coefficients a_ext of length n+2 (the last entry being the
    new a_{n+1}) and the consistent S, C arrays of length n+1, return the
    pair (S_{n+1}, C_{n+1}).  Cost O(n); changing only a_{n+1} later shifts
    the result by (C_0 * da, -S_0 * da), which the caller may exploit.
    """
    n = S.shape[0] - 1
    q = a_ext[1:] * np.arange(1, n + 2, dtype=np.float64)
    s_top = (C[n::-1] @ q[: n + 1]) / (n + 1)
    c_top = -(S[n::-1] @ q[: n + 1]) / (n + 1)
    return s_top, c_top


def reciprocal_coeffs(a):
    """Coefficients of 1/A(z); requires a_0 != 0 (checked by the caller).

    b_0 = 1/a_0 and b_k = -(1/a_0) sum_{j=1..k} a_j b_{k-j}.
    """
    n = a.shape[0] - 1
    b = np.empty(n + 1)
    b[0] = 1.0 / a[0]
    for k in range(1, n + 1):
        b[k] = -b[0] * (a[1 : k + 1] @ b[k - 1 :: -1])
    return b
