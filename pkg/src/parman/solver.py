"""Order-by-order construction of analytic invariant-manifold series.

Given a model, a certified stable eigenvalue lambda with eigenvector v, and
a truncation order, the solver builds the series P with P_0 = 0, P_1 = tau v
and, for each n >= 1, the unique next coefficient annihilating the residual:

    probe:  b = [residual of P extended by a zero coefficient]_{n+1}
    update: P_{n+1} = -T_eff(lambda^{n+1})^{-1} b

where T_eff is the linear pencil sum_i lambda^{(i-c)k} B_i in the model's
own argument convention (center offset c; see models).  The probe/update
form needs no per-family recursion formulas and is immune to sign
conventions: by construction the new residual coefficient is zero.  The
singular limit needs no special treatment either: the update divides by
the pencil at lambda^{n+1}, never by the characteristic value at 0, so a
zero root of the characteristic polynomial affects reporting only.

The scale tau is the reparameterization freedom P(z) -> P(tau z).  It is
either given or chosen from a low-order trial run so the coefficients stay
O(1); re-solving with c*tau multiplies P_k by c^k exactly (to rounding).

Residuals are reported in the one-sided normalization, i.e. as the
coefficients of z -> Z(P(z), P(lambda z), ..., P(lambda^N z)).  For a
centered family this is the centered residual with coefficient k rescaled
by lambda^(c k); the rescale is what makes the report meaningful at high
order, where the raw centered coefficients carry rounding noise amplified
by lambda^(-c k).  Every solve re-derives its full residual series after
the recursion and fails loudly if it is not at rounding level.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    BranchLossError,
    InternalConsistencyError,
    NoHyperbolicDirectionError,
    ResonanceError,
    RootMultiplicityError,
    SpectralError,
)
from .series import TruncatedSeries, evaluate, scale_arg
from .spectrum import (
    Eigensolution,
    analyze,
    eigenvector,
    nonresonance_check,
    t_matrix,
)

__all__ = [
    "SolveConfig",
    "SolveReport",
    "ContinuationStep",
    "t_scalar",
    "t_effective",
    "select_eigensolution",
    "order_update",
    "solve",
    "choose_scale",
    "residual_series",
    "residual_sample",
    "continuation",
]

TOL_SOLVE_REL = 1e-9  # residual ceiling, relative to max(1, coefficient scale)
RESONANCE_GUARD = 1e-12  # |det T_eff| floor, relative to the term-size scale
ROOT_CLUSTER = 1e-7  # roots closer than this are treated as multiple
SLOW_TIE = 1e-12  # modulus tie that makes "slow" ambiguous
SCALE_CLIP = (1e-8, 1e8)
DEFAULT_SAMPLE_GRID = (0.0, 0.05, -0.05, 0.1, -0.1, 0.2, -0.2)


@dataclass(frozen=True)
class SolveConfig:
    """Solve parameters: truncation order, scale tau (or "auto"), branch
    selector ("slow" or an index into the stable real roots, largest
    modulus first), and the trial order behind automatic scaling."""

    order: int = 100
    scale: float | str = "auto"
    branch: int | str = "slow"
    trial_order: int = 15

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"order must be >= 2, got {self.order}")
        if self.scale != "auto":
            if not float(self.scale) > 0.0:
                raise ValueError(f"scale must be positive, got {self.scale}")
        if self.branch != "slow" and not isinstance(self.branch, int):
            raise ValueError(f'branch must be "slow" or an integer, got {self.branch!r}')
        if not 5 <= self.trial_order <= self.order:
            raise ValueError(
                f"trial_order must lie in [5, order], got {self.trial_order}"
            )


@dataclass(frozen=True)
class SolveReport:
    """Solver output: the series, the eigenvalue and scale used, the
    largest one-sided residual coefficient, pointwise residual samples on
    the default grid, and the size and position of the largest coefficient."""

    series: TruncatedSeries
    lam: float
    scale: float
    residual_series_max: float
    residual_samples: tuple
    coeff_growth: tuple


@dataclass(frozen=True)
class ContinuationStep:
    """One continuation point: parameter value, tracked eigenvalue, the
    singularity exponent of the spectrum there, and the full solve report."""

    param: float
    lam: float
    exponent: int
    report: SolveReport


def t_scalar(lam, lin):
    """The pencil T(lambda) = sum_i lambda^i B_i as a (d, d) array."""
    return t_matrix(lam, lin)


def t_effective(lam, k, lin, center):
    """sum_i lambda^((i-center) k) B_i: the multiplier of P_k in the
    centered residual.  Equals lambda^(-center*k) T(lambda^k)."""
    T = np.zeros((lin.d, lin.d))
    for i, M in enumerate(lin.B):
        T = T + lam ** ((i - center) * k) * M
    return T


def _pencil_with_scale(lam, k, lin, center):
    T = np.zeros((lin.d, lin.d))
    scale = 0.0
    for i, M in enumerate(lin.B):
        w = lam ** ((i - center) * k)
        T = T + w * M
        scale += abs(w) * float(np.max(np.abs(M)))
    return T, scale


def _next_coefficient(lam, k, lin, center, b):
    """Solve T_eff(lambda^k) x = -b, guarding against resonances the
    certification missed (the guard compares det against the size of the
    summed terms, so cancellation to rounding level is what trips it)."""
    T, scale = _pencil_with_scale(lam, k, lin, center)
    if abs(np.linalg.det(T)) < RESONANCE_GUARD * max(scale, 1e-300) ** lin.d:
        raise ResonanceError(k, "order-update pencil is numerically singular")
    return np.linalg.solve(T, -np.atleast_1d(np.asarray(b, dtype=np.float64)))


def select_eigensolution(model, branch="slow"):
    """Pick a stable real eigenvalue, certify it, and package the result.

    branch "slow" takes the stable real root of largest modulus and
    refuses ties within 1e-12; an integer indexes the stable real roots in
    decreasing modulus.  The root must be simple (no other root within
    1e-7) and non-resonant.
    """
    lin = model.closed_linear_data()
    rep = analyze(lin)
    if not rep.hyperbolic:
        # a multiple root sitting on the unit circle splits into spurious
        # stable/unstable labels, so without the clearance certificate no
        # stable label can be trusted
        raise NoHyperbolicDirectionError(
            f"{model.family}: the nonzero spectrum is not certifiably "
            "hyperbolic (roots on or too close to the unit circle)"
        )
    stable = rep.stable_real_roots()
    if not stable:
        raise NoHyperbolicDirectionError(
            f"{model.family}: no real eigenvalue strictly inside the unit disk"
        )
    if branch == "slow":
        if len(stable) > 1 and abs(abs(stable[0]) - abs(stable[1])) <= SLOW_TIE:
            raise SpectralError(
                "slow branch is ambiguous: two stable real roots share the "
                f"modulus {abs(stable[0])!r}; select a branch index instead"
            )
        lam = stable[0]
    else:
        if not 0 <= branch < len(stable):
            raise SpectralError(
                f"branch index {branch} out of range: {len(stable)} stable "
                "real roots"
            )
        lam = stable[branch]
    cluster = [mu for mu in rep.roots if abs(mu - lam) < ROOT_CLUSTER]
    if len(cluster) > 1:
        raise RootMultiplicityError(
            f"eigenvalue {lam} is not simple: {len(cluster)} roots within "
            f"{ROOT_CLUSTER}"
        )
    res = nonresonance_check(lam, rep)
    if not res.non_resonant:
        n_bad = res.failures[0][0]
        raise ResonanceError(n_bad, f"lambda^{n_bad} collides with the spectrum")
    return Eigensolution(
        lam=lam,
        eigvec=eigenvector(lam, lin),
        non_resonant=True,
        n_max=res.n_max,
        lin=lin,
    )


def order_update(model, eig, lin, P):
    """The next series coefficient P_{n+1} from P of order n.

    Probes the residual of P extended by a zero coefficient; the probed
    coefficient b is affine in the true P_{n+1} with slope T_eff, so the
    update -T_eff^{-1} b zeroes the order-(n+1) residual exactly,
    whatever sign conventions the model's equations carry.
    """
    n = P.order
    ext = np.zeros((n + 2, model.d))
    ext[: n + 1] = P.coeffs
    b = model.residual_of_series(TruncatedSeries(ext), eig.lam).coeffs[n + 1]
    return _next_coefficient(eig.lam, n + 1, lin, model.center, b)


def _run(model, eig, order, tau):
    engine = model.series_engine(eig.lam, order, tau * eig.eigvec)
    lin = eig.lin
    for n in range(1, order):
        b = engine.probe()
        engine.commit(_next_coefficient(eig.lam, n + 1, lin, model.center, b))
    return engine.series()


def solve(model, eig, cfg=SolveConfig()):
    """Run the recursion to cfg.order and self-validate the result.

    P_0 = 0 and P_1 = tau * eig.eigvec; each later coefficient comes from
    the probe/update step, executed through the model's incremental
    engine.  Afterwards the full residual series is re-derived from the
    finished P and must stay below 1e-9 * max(1, coefficient scale), else
    an internal-consistency error is raised (that failing indicates a bug
    in a model's residual assembly, not a property of the problem).
    """
    if not eig.non_resonant:
        raise ResonanceError(0, "eigensolution was not certified non-resonant")
    if not abs(eig.lam) < 1.0:
        raise ValueError(f"solve needs a stable eigenvalue, got {eig.lam}")
    tau = (
        choose_scale(model, eig, cfg.trial_order)
        if cfg.scale == "auto"
        else float(cfg.scale)
    )
    P = _run(model, eig, cfg.order, tau)
    r = residual_series(model, P, eig.lam)
    res_max = float(np.max(np.abs(r.coeffs)))
    coeff_scale = float(np.max(np.abs(P.coeffs)))
    if res_max > TOL_SOLVE_REL * max(1.0, coeff_scale):
        raise InternalConsistencyError(
            f"solved series leaves residual {res_max:.3e} against coefficient "
            f"scale {coeff_scale:.3e}"
        )
    growth = np.max(np.abs(P.coeffs), axis=1)
    samples = residual_sample(model, P, eig.lam, DEFAULT_SAMPLE_GRID)
    return SolveReport(
        series=P,
        lam=eig.lam,
        scale=tau,
        residual_series_max=res_max,
        residual_samples=tuple(samples),
        coeff_growth=(float(np.max(growth)), int(np.argmax(growth))),
    )


def choose_scale(model, eig, trial_order=15):
    """Scale heuristic: a trial solve at tau = 1 to trial_order estimates
    the geometric coefficient growth g = ||P_t||^(1/(t-1)); returning 1/g
    (clipped to [1e-8, 1e8]) renormalizes that growth away.

    An odd solution series has exactly zero even coefficients, so when the
    top trial coefficient vanishes the estimate falls back to the highest
    nonzero one.  A trial series that is zero past the linear term (a
    linear model) keeps tau = 1 with a warning."""
    if trial_order < 5:
        raise ValueError(f"trial_order must be >= 5, got {trial_order}")
    trial = _run(model, eig, trial_order, 1.0)
    norms = np.max(np.abs(trial.coeffs), axis=1)
    top_k = trial_order
    while top_k > 1 and norms[top_k] == 0.0:
        top_k -= 1
    if top_k == 1:
        warnings.warn(
            "trial series is flat; keeping scale 1", stacklevel=2
        )
        return 1.0
    g = float(norms[top_k]) ** (1.0 / (top_k - 1))
    return float(np.clip(1.0 / g, *SCALE_CLIP))


def residual_series(model, P, lam):
    """Coefficients of z -> Z(P(z), P(lambda z), ..., P(lambda^N z)).

    Assembled through the model's own (possibly centered) series form and
    rescaled to the one-sided normalization, which is an exact change of
    variable, coefficient k times lambda^(center * k)."""
    r = model.residual_of_series(P, lam)
    if model.center == 0:
        return r
    return scale_arg(r, lam**model.center)


def residual_sample(model, P, lam, grid):
    """Pointwise residual magnitudes ||Z(P(z), ..., P(lambda^N z))||_inf.

    Evaluates the series at the shrinking argument chain and applies the
    model's plain floating-point residual, no series arithmetic involved,
    so it cross-checks the entire series pipeline end to end."""
    out = []
    for z in grid:
        z = float(z)
        args = tuple(evaluate(P, lam**i * z) for i in range(model.N + 1))
        val = float(np.max(np.abs(model.residual_pointwise(args))))
        out.append((z, val))
    return out


def continuation(model, param, values, cfg=SolveConfig()):
    """Solve along a parameter path, tracking one eigenvalue branch.

    The first point selects its branch per cfg.branch; each later point
    recomputes the spectrum and takes the stable real root nearest the
    previous step's eigenvalue, refusing jumps larger than 0.5.  Steps
    report the singularity exponent so a dimension collapse along the path
    (a characteristic-polynomial root entering 0) is visible in the output.
    """
    steps = []
    prev = None
    for j, val in enumerate(values):
        m = model.with_param(param, float(val))
        lin = m.closed_linear_data()
        rep = analyze(lin)
        if j == 0:
            eig = select_eigensolution(m, cfg.branch)
        else:
            stable = rep.stable_real_roots()
            if not stable:
                raise BranchLossError(j, "no stable real roots at this parameter")
            lam = min(stable, key=lambda r: abs(r - prev))
            if abs(lam - prev) > 0.5:
                raise BranchLossError(
                    j, f"nearest root {lam:.6g} is {abs(lam - prev):.3g} away "
                    f"from the tracked branch {prev:.6g}"
                )
            res = nonresonance_check(lam, rep)
            if not res.non_resonant:
                n_bad = res.failures[0][0]
                raise ResonanceError(
                    n_bad, f"at parameter {val!r}: lambda^{n_bad} hits the spectrum"
                )
            eig = Eigensolution(
                lam=lam,
                eigvec=eigenvector(lam, lin),
                non_resonant=True,
                n_max=res.n_max,
                lin=lin,
            )
        report = solve(m, eig, cfg)
        steps.append(
            ContinuationStep(
                param=float(val),
                lam=eig.lam,
                exponent=rep.exponent,
                report=report,
            )
        )
        prev = eig.lam
    return steps
