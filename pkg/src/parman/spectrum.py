"""Linear analysis of a fixed point of an implicit difference equation.

The linearization of Z(theta_k, ..., theta_{k+N}) = 0 at a fixed point is
carried by the matrices B_i = d_i Z evaluated at the fixed point.  Built on
them:

- the characteristic polynomial F(lambda) = det(sum_i lambda^i B_i),
  computed by evaluating the numeric determinant at sample points and
  interpolating (degree <= N*d, at most 8 for the builtin models);
- root finding via companion-matrix eigenvalues, with explicit handling of
  vanishing leading and trailing coefficients;
- per-root classification against the unit circle and the zero cluster,
  giving hyperbolicity, the singularity exponent e (multiplicity of 0 as a
  root of F), and non-singularity;
- finite non-resonance certification: F(lambda^n) = 0 can only happen while
  |lambda|^n stays above the smallest nonzero root modulus, so checking
  n = 2..nMax settles all n >= 2;
- the Chebyshev change of variable omega = (lambda + 1/lambda)/2 that folds
  the palindromic characteristic function of chain models with symmetric
  couplings into a low-degree polynomial r(omega), from which eigenvalues
  come in (omega -/+ sqrt(omega^2-1)) pairs;
- null vectors of T(lambda) = sum_i lambda^i B_i for d in {1, 2}.

Tolerances are pinned package-wide here (TOL_UNIT, TOL_ZERO, TOL_RES,
FD_STEP) and echoed into CLI output headers.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    NoHyperbolicDirectionError,
    NotAFixedPointError,
    NotAnEigenvalueError,
)

__all__ = [
    "TOL_UNIT",
    "TOL_ZERO",
    "TOL_RES",
    "FD_STEP",
    "LinearData",
    "SpectrumReport",
    "Eigensolution",
    "NonresonanceResult",
    "numeric_partials",
    "char_poly",
    "poly_roots",
    "classify",
    "analyze",
    "nonresonance_check",
    "chebyshev_reduce",
    "ChebyshevReduction",
    "eigenvector",
    "t_matrix",
]

TOL_UNIT = 1e-9  # half-width of the unit-circle band in |lambda|
TOL_ZERO = 1e-9  # radius of the zero cluster
TOL_RES = 1e-8  # non-resonance margin
FD_STEP = 1e-6  # central-difference step for numeric_partials

# classification labels
STABLE = "stable"
UNSTABLE = "unstable"
UNIT = "unit-circle"
ZERO = "zero"


@dataclass(frozen=True)
class LinearData:
    """Partial-derivative matrices B_0..B_N of Z at a fixed point.

    B[i] has shape (d, d); scalar problems use 1x1 matrices.
    """

    N: int
    d: int
    B: tuple

    def __post_init__(self):
        if len(self.B) != self.N + 1:
            raise ValueError(f"need N+1 = {self.N + 1} matrices, got {len(self.B)}")
        mats = []
        for M in self.B:
            M = np.asarray(M, dtype=np.float64).reshape(self.d, self.d)
            if not np.all(np.isfinite(M)):
                raise ValueError("B matrices must be finite")
            M = M.copy()
            M.flags.writeable = False
            mats.append(M)
        object.__setattr__(self, "B", tuple(mats))


@dataclass(frozen=True)
class SpectrumReport:
    """Characteristic polynomial, its roots, and per-root classification.

    char_poly is in ascending powers.  roots repeats multiple roots;
    labels[i] is one of "stable", "unstable", "unit-circle", "zero", the
    zero label covering |lambda| <= tol_zero.  hyperbolic means no root on
    the unit band; the zero cluster is excluded from that test (for a
    singular equation the unit-circle criterion is applied to nonzero roots
    only).  exponent is the multiplicity of 0 as a root of F, and
    non_singular means F(0) != 0 within tolerance, i.e. exponent == 0.
    """

    char_poly: np.ndarray
    roots: np.ndarray
    labels: tuple
    hyperbolic: bool
    exponent: int
    non_singular: bool
    tol_unit: float = TOL_UNIT
    tol_zero: float = TOL_ZERO

    def stable_real_roots(self):
        """Real roots strictly inside the unit disk, excluding the zero
        cluster, sorted by decreasing modulus (index 0 = slow branch)."""
        out = [
            r.real
            for r, lab in zip(self.roots, self.labels)
            if lab == STABLE and abs(r.imag) <= 1e-12 * max(1.0, abs(r))
        ]
        return sorted(out, key=abs, reverse=True)


@dataclass(frozen=True)
class NonresonanceResult:
    non_resonant: bool
    n_max: int
    failures: tuple = ()


@dataclass(frozen=True)
class Eigensolution:
    """A certified (lambda, v) pair ready for the order-by-order solver."""

    lam: float
    eigvec: np.ndarray
    non_resonant: bool
    n_max: int
    lin: LinearData = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.eigvec, dtype=np.float64).reshape(self.lin.d)
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "eigvec", v)


def t_matrix(lam, lin):
    """T(lambda) = sum_i lambda^i B_i as a (d, d) array."""
    out = np.zeros((lin.d, lin.d))
    p = 1.0
    for M in lin.B:
        out += p * M
        p *= lam
    return out


def numeric_partials(model, fixed_point=None):
    """LinearData from central finite differences of the pointwise residual.

    The step is FD_STEP entrywise.  The fixed point (default: the model's
    own) must satisfy the equation to 1e-10.
    """
    theta = (
        np.asarray(fixed_point, dtype=np.float64).reshape(model.d)
        if fixed_point is not None
        else np.asarray(model.fixed_point, dtype=np.float64)
    )
    base = tuple(theta.copy() for _ in range(model.N + 1))
    r0 = np.asarray(model.residual_pointwise(base), dtype=np.float64)
    if np.max(np.abs(r0)) > 1e-10:
        raise NotAFixedPointError(
            f"residual at the proposed fixed point is {np.max(np.abs(r0)):.3e}"
        )
    mats = []
    for i in range(model.N + 1):
        M = np.empty((model.d, model.d))
        for c in range(model.d):
            plus = [t.copy() for t in base]
            minus = [t.copy() for t in base]
            plus[i][c] += FD_STEP
            minus[i][c] -= FD_STEP
            rp = np.asarray(model.residual_pointwise(tuple(plus)), dtype=np.float64)
            rm = np.asarray(model.residual_pointwise(tuple(minus)), dtype=np.float64)
            M[:, c] = (rp - rm) / (2.0 * FD_STEP)
        mats.append(M)
    return LinearData(N=model.N, d=model.d, B=tuple(mats))


def char_poly(lin):
    """Ascending coefficients of F(lambda) = det(sum_i lambda^i B_i).

    Evaluation-interpolation: the determinant is sampled at deg+1 Chebyshev
    points on [-2, 2] and the Vandermonde system solved directly.  Degree
    deg = N*d stays at most 8 for the builtin models, so conditioning is
    benign; exact high-order zero coefficients come out at rounding level.
    """
    deg = lin.N * lin.d
    if deg == 0:
        return np.array([float(np.linalg.det(lin.B[0]))])
    k = np.arange(deg + 1)
    pts = 2.0 * np.cos(np.pi * k / deg)
    vals = np.array([float(np.linalg.det(t_matrix(x, lin))) for x in pts])
    V = np.vander(pts, deg + 1, increasing=True)
    return np.linalg.solve(V, vals)


def poly_roots(coeffs):
    """All complex roots of a real polynomial given in ascending powers.

    High-order coefficients at rounding level (relative to the largest
    coefficient) are stripped, lowering the degree; vanishing low-order
    coefficients contribute explicit roots at 0.  The remaining cofactor
    goes through companion-matrix eigenvalues.
    """
    c = np.asarray(coeffs, dtype=np.float64)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coefficient list must be a nonempty 1-D sequence")
    scale = np.max(np.abs(c))
    if scale == 0.0:
        raise DegenerateInputError("zero polynomial has no well-defined roots")
    tol = 1e-9 * scale
    hi = c.size - 1
    while hi > 0 and abs(c[hi]) <= tol:
        hi -= 1
    lo = 0
    while lo < hi and abs(c[lo]) <= tol:
        lo += 1
    zeros = np.zeros(lo, dtype=np.complex128)
    body = c[lo : hi + 1]
    if body.size <= 1:
        return zeros
    inner = np.polynomial.polynomial.polyroots(body)
    return np.concatenate([zeros, np.sort_complex(inner)])


def _unit_circle_clearance(coeffs, samples=1 << 17):
    """min |F(e^{i theta})| over a dense uniform sample of the circle.

    A root of multiplicity m on the circle is split by roughly eps^(1/m) by
    any eigenvalue-based root finder, far past the labeling tolerance, so
    the labels alone cannot be trusted near such a point.  |F| itself stays
    m-th-power flat there: with a sample within 2.4e-5 of the true angle
    the sampled minimum falls below 1e-9 * scale for any m >= 2, which is
    what the hyperbolic flag checks against.
    """
    c = np.asarray(coeffs, dtype=np.float64)
    z = np.exp(2j * np.pi * np.arange(samples) / samples)
    return float(np.min(np.abs(np.polynomial.polynomial.polyval(z, c))))


def classify(coeffs, roots, tol_unit=TOL_UNIT, tol_zero=TOL_ZERO):
    """Label each root and assemble the SpectrumReport.

    The hyperbolic flag demands more than the absence of a unit-circle
    label: the polynomial itself must stay bounded away from zero on the
    circle.  Multiple roots sitting on the circle break into label-fooling
    clusters, but they cannot lift |F| there.
    """
    roots = np.asarray(roots, dtype=np.complex128)
    labels = []
    for r in roots:
        m = abs(r)
        if m <= tol_zero:
            labels.append(ZERO)
        elif m < 1.0 - tol_unit:
            labels.append(STABLE)
        elif m > 1.0 + tol_unit:
            labels.append(UNSTABLE)
        else:
            labels.append(UNIT)
    exponent = labels.count(ZERO)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    clearance = _unit_circle_clearance(coeffs)
    cleared = clearance > 1e-9 * coeffs.size * np.max(np.abs(coeffs))
    return SpectrumReport(
        char_poly=coeffs,
        roots=roots,
        labels=tuple(labels),
        hyperbolic=UNIT not in labels and cleared,
        exponent=exponent,
        non_singular=(exponent == 0),
        tol_unit=tol_unit,
        tol_zero=tol_zero,
    )


def _strip_high(c):
    """Drop high-order coefficients at rounding level so the reported
    polynomial degree matches the root count."""
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return c
    hi = c.size - 1
    while hi > 0 and abs(c[hi]) <= 1e-9 * scale:
        hi -= 1
    return c[: hi + 1]


def analyze(lin):
    """char_poly -> poly_roots -> classify in one step.

    The reported polynomial is trimmed of rounding-level high coefficients
    (an interpolated exact zero never comes back as exactly zero), keeping
    the degree equal to the number of reported roots.
    """
    coeffs = _strip_high(char_poly(lin))
    return classify(coeffs, poly_roots(coeffs))


def nonresonance_check(lam, report):
    """Certify F(lambda^n) != 0 for all n >= 2 by a finite check.

    Once |lambda|^n drops below the smallest nonzero root modulus, lambda^n
    can no longer hit a root, so only n = 2..n_max need testing, with
    n_max = the smallest n at which that happens.  Each test demands
    |lambda^n - mu| > TOL_RES * (1 + |mu|) over all nonzero roots mu.
    """
    if abs(lam) >= 1.0:
        raise ValueError(f"non-resonance check requires |lambda| < 1, got {lam}")
    nonzero = [r for r, lab in zip(report.roots, report.labels) if lab != ZERO]
    if not nonzero:
        raise DegenerateInputError("spectrum has no nonzero roots to check against")
    mu_min = min(abs(r) for r in nonzero)
    n_max = 1
    p = abs(lam)
    while p >= mu_min:
        n_max += 1
        p *= abs(lam)
    failures = []
    x = lam * lam
    for n in range(2, n_max + 1):
        for mu in nonzero:
            if abs(x - mu) <= TOL_RES * (1.0 + abs(mu)):
                failures.append((n, complex(mu)))
        x *= lam
    return NonresonanceResult(
        non_resonant=not failures, n_max=n_max, failures=tuple(failures)
    )


def _chebyshev_monomials(L):
    """Ascending monomial coefficients of the Chebyshev polynomial T_L."""
    prev = np.array([1.0])
    cur = np.array([0.0, 1.0])
    if L == 0:
        return prev
    for _ in range(L - 1):
        nxt = np.zeros(cur.size + 1)
        nxt[1:] = 2.0 * cur
        nxt[: prev.size] -= prev
        prev, cur = cur, nxt
    return cur


@dataclass(frozen=True)
class ChebyshevReduction:
    """r(omega), its roots, and the eigenvalue pairs they unfold to."""

    r_poly: np.ndarray
    omega_roots: np.ndarray
    lambda_pairs: tuple  # ((lam_minus, lam_plus), ...) for real |omega| > 1
    slow: float  # stable eigenvalue of largest modulus


def chebyshev_reduce(fk):
    """Reduce a chain model's characteristic function via omega = (lam + 1/lam)/2.

    Takes the Frenkel-Kontorova-type model (anything exposing couplings
    `gammas` and on-site curvature `w_second_deriv()`); with w2 = W''(0)
    the reduced polynomial is

        r(omega) = sum_L gamma_L (T_L(omega) - 1) - w2 / 2,

    whose real roots with |omega| > 1 unfold into reciprocal eigenvalue
    pairs (omega - sqrt(omega^2-1), omega + sqrt(omega^2-1)).  The stable
    member of largest modulus is tagged slow.  No real root beyond the
    [-1, 1] band means no hyperbolic direction.
    """
    gammas = [float(g) for g in fk.gammas]
    w2 = fk.w_second_deriv()
    if not gammas:
        raise ValueError("need at least one coupling coefficient")
    r = np.zeros(len(gammas) + 1)
    for L, g in enumerate(gammas, start=1):
        t = _chebyshev_monomials(L)
        r[: t.size] += g * t
        r[0] -= g
    r[0] -= 0.5 * float(w2)
    omega_roots = poly_roots(r)
    pairs = []
    stable = []
    for w in omega_roots:
        if abs(w.imag) > 1e-10 * max(1.0, abs(w)):
            continue
        x = w.real
        if abs(x) <= 1.0:
            continue
        s = np.sqrt(x * x - 1.0)
        lam_minus, lam_plus = x - s, x + s
        pairs.append((lam_minus, lam_plus))
        stable.append(lam_minus if abs(lam_minus) < 1.0 else lam_plus)
    if not stable:
        raise NoHyperbolicDirectionError(
            "no real omega root outside [-1, 1]; every eigenvalue pair sits "
            "on the unit circle"
        )
    slow = max(stable, key=abs)
    return ChebyshevReduction(
        r_poly=r,
        omega_roots=omega_roots,
        lambda_pairs=tuple(pairs),
        slow=float(slow),
    )


def eigenvector(lam, lin):
    """Unit max-norm null vector of T(lambda), for d in {1, 2}.

    d = 1 returns [1].  For d = 2 the null vector comes from the row of
    larger norm via the cross formula (t01, -t00) / (t11, -t10); the result
    is normalized to unit max-norm with its largest component positive.
    Raises if T(lambda) is numerically full-rank.
    """
    T = t_matrix(lam, lin)
    scale = max(np.max(np.abs(M)) for M in lin.B)
    if lin.d == 1:
        if abs(T[0, 0]) > 1e-6 * max(1.0, scale):
            raise NotAnEigenvalueError(
                f"T({lam}) = {T[0, 0]:.3e} is not numerically zero"
            )
        return np.array([1.0])
    if lin.d != 2:
        raise ValueError("eigenvector extraction implemented for d <= 2 only")
    rows = np.linalg.norm(T, axis=1)
    i = int(np.argmax(rows))
    v = np.array([T[i, 1], -T[i, 0]])
    if np.max(np.abs(v)) == 0.0:
        v = np.array([1.0, 0.0])
    v = v / np.max(np.abs(v))
    resid = np.max(np.abs(T @ v))
    if resid > 1e-6 * max(1.0, scale):
        raise NotAnEigenvalueError(
            f"‖T({lam}) v‖ = {resid:.3e}; lambda is not an eigenvalue"
        )
    j = int(np.argmax(np.abs(v)))
    if v[j] < 0:
        v = -v
    return v
