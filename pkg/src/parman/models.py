"""Builtin implicit difference-equation families.

Every family provides the same surface:

- ``residual_pointwise(theta)``: Z on a tuple of N+1 states, plain floats;
- ``residual_of_args(args)``: the same Z lifted to truncated series, one
  series per slot, built only from series-module primitives;
- ``residual_of_series(P, lam)``: Z along the candidate manifold, feeding
  slot i the series of P(lambda^(i - center) z);
- ``closed_linear_data()``: analytic B_i matrices, no finite differences;
- ``series_engine(lam, order, p1)``: incremental residual-coefficient
  machinery for the order-by-order solver;
- ``reverse()``: the argument-reversed equation (stable <-> unstable);
- ``oracle()``: closed-form solution where the family has one.

Argument convention.  Each family fixes a center offset and assembles its
residual with arguments P(lambda^(i-center) z).  The chain families
(standard map, Frenkel-Kontorova, XY, Froeschle) use the symmetric centered
form: their division factors at order k grow like lambda^(-center*k)
instead of collapsing toward F(0), which is exactly what keeps the
recursion solvable in singular limits.  McMillan and the rational example
keep the plain one-sided form (center 0), matching their closed-form
oracle identities.  The two forms of one family differ only by the
substitution z -> lambda^center z, i.e. coefficientwise by lambda^(center*k).

Sign convention.  The on-site potential term enters the chain residuals
with a minus sign (Z = coupling part - potential derivative); this is the
convention whose linearization reproduces the 15-digit reference
eigenvalues of the slow-manifold table, and all linear data here is
consistent with it.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelDomainError
from .series import (
    TruncatedSeries,
    add,
    mul,
    reciprocal,
    scale_arg,
    sin_cos,
    trig_extend,
)
from .spectrum import LinearData

__all__ = [
    "ModelSpec",
    "StandardMapK",
    "FrenkelKontorova",
    "HeisenbergXY",
    "Froeschle",
    "McMillan",
    "RationalExample",
    "ReversedModel",
    "Oracle",
    "FAMILIES",
    "from_config",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Oracle:
    """Closed-form manifold data: an evaluator for P and its eigenvalue."""

    evaluate: callable
    lam: float


def _one(order):
    c = np.zeros(order + 1)
    c[0] = 1.0
    return TruncatedSeries(c)


def _stack(columns):
    """Combine scalar series into one vector-valued series."""
    n = min(c.order for c in columns)
    data = np.column_stack([c.coeffs[: n + 1, 0] for c in columns])
    return TruncatedSeries(data)


class ModelSpec:
    """Common behavior of all families; subclasses fill in the equations."""

    family = "?"
    N = 2
    d = 1
    center = 0

    @property
    def fixed_point(self):
        return np.zeros(self.d)

    # -- residual forms ---------------------------------------------------

    def residual_pointwise(self, theta):
        """Z on a tuple of N+1 state vectors; returns an array of shape (d,)."""
        if len(theta) != self.N + 1:
            raise ValueError(f"need {self.N + 1} states, got {len(theta)}")
        t = [np.atleast_1d(np.asarray(x, dtype=np.float64)) for x in theta]
        return self._z_pointwise(t)

    def residual_of_args(self, args):
        """Z lifted to series, one TruncatedSeries per slot."""
        if len(args) != self.N + 1:
            raise ValueError(f"need {self.N + 1} argument series, got {len(args)}")
        if any(a.dim != self.d for a in args):
            raise ValueError("argument series dimension does not match the model")
        return self._z_series(args)

    def residual_of_series(self, P, lam):
        """The residual series of the candidate manifold P with multiplier lam."""
        if P.dim != self.d:
            raise ValueError(f"series dim {P.dim} does not match model dim {self.d}")
        args = [scale_arg(P, lam ** (i - self.center)) for i in range(self.N + 1)]
        return self.residual_of_args(args)

    # -- linearization and transforms -------------------------------------

    def closed_linear_data(self):
        raise NotImplementedError

    def reverse(self):
        return ReversedModel(self)

    def oracle(self):
        return None

    def series_engine(self, lam, order, p1):
        return _RecomputeEngine(self, lam, order, p1)

    # -- parameters --------------------------------------------------------

    def params_items(self):
        """Ordered (name, value) pairs of the family's scalar parameters."""
        return ()

    def with_param(self, name, value):
        """A copy of the model with one named scalar parameter replaced."""
        raise ValueError(f"{self.family} has no parameter {name!r}")

    def __repr__(self):
        ps = ", ".join(f"{k}={v:g}" for k, v in self.params_items())
        return f"{type(self).__name__}({ps})"


# ---------------------------------------------------------------------------
# incremental residual engines


class _RecomputeEngine:
    """Fallback engine: re-assembles the full residual series per probe.

    O(n^2) per order against the trig engines' O(n), but works for every
    model that implements residual_of_series, including reversed ones.
    """

    def __init__(self, model, lam, order, p1):
        self.model = model
        self.lam = lam
        self.order = order
        self._c = np.zeros((order + 1, model.d))
        self._c[1] = np.atleast_1d(p1)
        self.n = 1

    def probe(self):
        trial = TruncatedSeries(self._c[: self.n + 2])
        r = self.model.residual_of_series(trial, self.lam)
        return np.array(r.coeffs[self.n + 1])

    def commit(self, x):
        self._c[self.n + 1] = np.atleast_1d(x)
        self.n += 1

    def series(self):
        return TruncatedSeries(self._c[: self.n + 1])


class _ChannelEngine:
    """Shared machinery for the chain families: a set of sine channels.

    Each channel is a TrigCache of one angle series derived from P; the
    probe asks each channel for its next sine coefficient assuming
    P_{n+1} = 0 (the linear coupling terms contribute nothing then), and
    commit extends every channel with its slice of the accepted
    coefficient.  Channel extension is O(n) per order via trig_extend.
    """

    def __init__(self, model, lam, order, p1):
        self.model = model
        self.lam = lam
        self.order = order
        self._c = np.zeros((order + 1, model.d))
        self._c[1] = np.atleast_1d(p1)
        self.n = 1
        self._caches = [
            sin_cos(TruncatedSeries(self._angle_head(i)))
            for i in range(self._num_channels())
        ]

    def _angle_head(self, i):
        """Coefficients 0..1 of channel i's angle series."""
        return np.array([0.0, self._angle_coeff(i, 1, self._c[1])])

    def probe(self):
        tops = []
        for cache in self._caches:
            ext = trig_extend(cache, 0.0)
            tops.append(
                (ext.sin_series.coeffs[-1, 0], ext.cos_series.coeffs[-1, 0])
            )
        return self._assemble(tops)

    def commit(self, x):
        x = np.atleast_1d(x)
        self._c[self.n + 1] = x
        k = self.n + 1
        self._caches = [
            trig_extend(cache, self._angle_coeff(i, k, x))
            for i, cache in enumerate(self._caches)
        ]
        self.n += 1

    def series(self):
        return TruncatedSeries(self._c[: self.n + 1])

    # subclass hooks
    def _num_channels(self):
        raise NotImplementedError

    def _angle_coeff(self, i, k, x):
        """Coefficient k of channel i's angle series given P_k = x."""
        raise NotImplementedError

    def _assemble(self, tops):
        """Residual coefficient n+1 from the channels' (sin, cos) tops."""
        raise NotImplementedError


class _HarmonicEngine(_ChannelEngine):
    """Channels sin(j P) for the standard map and Frenkel-Kontorova: the
    probed residual coefficient is -(weight) * sum_j C_j [sin(j P)]_{n+1}."""

    def __init__(self, model, lam, order, p1, harmonics, weight):
        self._harmonics = harmonics
        self._weight = weight
        super().__init__(model, lam, order, p1)

    def _num_channels(self):
        return len(self._harmonics)

    def _angle_coeff(self, i, k, x):
        j = i + 1
        return j * float(x[0] if np.ndim(x) else x)

    def _assemble(self, tops):
        b = 0.0
        for Cj, (s_top, _) in zip(self._harmonics, tops):
            b -= self._weight * Cj * s_top
        return np.array([b])


class _XYEngine(_ChannelEngine):
    """Channels for the XY chain: u = P - P(lam .), w = P - P(lam^-1 .),
    and P itself; residual = -sin(u) - sin(w) - eps sin(P)."""

    def _num_channels(self):
        return 3

    def _angle_coeff(self, i, k, x):
        x = float(x[0] if np.ndim(x) else x)
        if i == 0:
            return (1.0 - self.lam**k) * x
        if i == 1:
            return (1.0 - self.lam ** (-k)) * x
        return x

    def _assemble(self, tops):
        s_u, s_w, s_p = (t[0] for t in tops)
        return np.array([-s_u - s_w - self.model.epsilon * s_p])


class _FroeschleEngine(_ChannelEngine):
    """Channels 2*pi*P1, 2*pi*P2, 2*pi*(P1 - P2); residual adds grad W(P)."""

    def _num_channels(self):
        return 3

    def _angle_coeff(self, i, k, x):
        x = np.atleast_1d(x)
        if i == 0:
            return TWO_PI * x[0]
        if i == 1:
            return TWO_PI * x[1]
        return TWO_PI * (x[0] - x[1])

    def _assemble(self, tops):
        s1, s2, s3 = (t[0] for t in tops)
        m = self.model
        return np.array(
            [
                -TWO_PI * m.a * s1 - TWO_PI * m.c * s3,
                -TWO_PI * m.b * s2 + TWO_PI * m.c * s3,
            ]
        )


# ---------------------------------------------------------------------------
# the families


@dataclass(frozen=True, repr=False)
class StandardMapK(ModelSpec):
    """Area-preserving twist map written as a second-order equation:

        theta_2 - 2 theta_1 + theta_0 - sum_j C_j sin(j theta_1) = 0.
    """

    C: tuple

    family = "standard_map_k"
    N = 2
    d = 1
    center = 1

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(float(c) for c in self.C))
        if not self.C:
            raise ValueError("standard_map_k needs at least one harmonic")

    def _potential_slope(self, t):
        return sum(Cj * np.sin(j * t) for j, Cj in enumerate(self.C, start=1))

    def _z_pointwise(self, t):
        return t[2] - 2.0 * t[1] + t[0] - self._potential_slope(t[1])

    def _z_series(self, args):
        out = add(add(args[2], -2.0 * args[1]), args[0])
        mid = args[1]
        for j, Cj in enumerate(self.C, start=1):
            out = add(out, -Cj * sin_cos(j * mid).sin_series)
        return out

    def closed_linear_data(self):
        slope2 = sum(j * Cj for j, Cj in enumerate(self.C, start=1))
        return LinearData(N=2, d=1, B=([[1.0]], [[-2.0 - slope2]], [[1.0]]))

    def series_engine(self, lam, order, p1):
        return _HarmonicEngine(self, lam, order, p1, self.C, 1.0)

    def params_items(self):
        return tuple((f"C_{j}", Cj) for j, Cj in enumerate(self.C, start=1))

    def with_param(self, name, value):
        C = list(self.C)
        for j in range(len(C)):
            if name == f"C_{j + 1}":
                C[j] = float(value)
                return StandardMapK(tuple(C))
        raise ValueError(f"standard_map_k has no parameter {name!r}")


@dataclass(frozen=True, repr=False)
class FrenkelKontorova(ModelSpec):
    """Chain with couplings up to range NR and a K-harmonic on-site term:

        sum_L gamma_L (theta_{c+L} - 2 theta_c + theta_{c-L})
            - delta sum_j C_j sin(j theta_c) = 0,     c = NR (the center).

    The equation order is N = 2 NR.  gamma_NR = 0 is allowed (and is the
    singular limit of interest); gamma_1 must be nonzero.
    """

    gammas: tuple
    delta: float
    C: tuple

    family = "frenkel_kontorova"
    d = 1

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "C", tuple(float(c) for c in self.C))
        if not self.gammas or self.gammas[0] == 0.0:
            raise ValueError("frenkel_kontorova requires gamma_1 != 0")
        if not self.C:
            raise ValueError("frenkel_kontorova needs at least one harmonic")

    @property
    def n_range(self):
        return len(self.gammas)

    @property
    def N(self):
        return 2 * len(self.gammas)

    @property
    def center(self):
        return len(self.gammas)

    def w_second_deriv(self):
        """W''(0) of the on-site potential: delta * sum_j j C_j."""
        return self.delta * sum(j * Cj for j, Cj in enumerate(self.C, start=1))

    def _potential_slope(self, t):
        return self.delta * sum(
            Cj * np.sin(j * t) for j, Cj in enumerate(self.C, start=1)
        )

    def _z_pointwise(self, t):
        c = self.center
        out = -self._potential_slope(t[c])
        for L, g in enumerate(self.gammas, start=1):
            out = out + g * (t[c + L] - 2.0 * t[c] + t[c - L])
        return out

    def _z_series(self, args):
        c = self.center
        mid = args[c]
        out = None
        for L, g in enumerate(self.gammas, start=1):
            term = add(add(args[c + L], -2.0 * mid), args[c - L])
            term = g * term
            out = term if out is None else add(out, term)
        for j, Cj in enumerate(self.C, start=1):
            out = add(out, (-self.delta * Cj) * sin_cos(j * mid).sin_series)
        return out

    def closed_linear_data(self):
        c = self.center
        mats = [np.zeros((1, 1)) for _ in range(self.N + 1)]
        for L, g in enumerate(self.gammas, start=1):
            mats[c + L][0, 0] += g
            mats[c - L][0, 0] += g
        mats[c][0, 0] = -2.0 * sum(self.gammas) - self.w_second_deriv()
        return LinearData(N=self.N, d=1, B=tuple(mats))

    def series_engine(self, lam, order, p1):
        return _HarmonicEngine(self, lam, order, p1, self.C, self.delta)

    def params_items(self):
        out = [(f"gamma_{L}", g) for L, g in enumerate(self.gammas, start=1)]
        out.append(("delta", self.delta))
        out.extend((f"C_{j}", Cj) for j, Cj in enumerate(self.C, start=1))
        return tuple(out)

    def with_param(self, name, value):
        gammas, delta, C = list(self.gammas), self.delta, list(self.C)
        if name == "delta":
            delta = float(value)
        else:
            for L in range(len(gammas)):
                if name == f"gamma_{L + 1}":
                    gammas[L] = float(value)
                    break
            else:
                for j in range(len(C)):
                    if name == f"C_{j + 1}":
                        C[j] = float(value)
                        break
                else:
                    raise ValueError(f"frenkel_kontorova has no parameter {name!r}")
        return FrenkelKontorova(tuple(gammas), delta, tuple(C))


@dataclass(frozen=True, repr=False)
class HeisenbergXY(ModelSpec):
    """Nearest-neighbor spin chain in an external field:

        sin(theta_2 - theta_1) + sin(theta_0 - theta_1) - eps sin(theta_1) = 0.

    Kept strictly as a difference equation; it is never inverted to a map.
    """

    epsilon: float

    family = "heisenberg_xy"
    N = 2
    d = 1
    center = 1

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def _z_pointwise(self, t):
        return (
            np.sin(t[2] - t[1])
            + np.sin(t[0] - t[1])
            - self.epsilon * np.sin(t[1])
        )

    def _z_series(self, args):
        fwd = sin_cos(add(args[2], -1.0 * args[1])).sin_series
        bwd = sin_cos(add(args[0], -1.0 * args[1])).sin_series
        site = sin_cos(args[1]).sin_series
        return add(add(fwd, bwd), -self.epsilon * site)

    def closed_linear_data(self):
        return LinearData(N=2, d=1, B=([[1.0]], [[-(2.0 + self.epsilon)]], [[1.0]]))

    def series_engine(self, lam, order, p1):
        return _XYEngine(self, lam, order, p1)

    def params_items(self):
        return (("epsilon", self.epsilon),)

    def with_param(self, name, value):
        if name == "epsilon":
            return HeisenbergXY(float(value))
        raise ValueError(f"heisenberg_xy has no parameter {name!r}")


@dataclass(frozen=True, repr=False)
class Froeschle(ModelSpec):
    """Coupled twist maps on the two-torus cover:

        theta_2 - 2 theta_1 + theta_0 + grad W(theta_1) = 0,
        W(x) = a cos(2 pi x_1) + b cos(2 pi x_2) + c cos(2 pi (x_1 - x_2)).
    """

    a: float
    b: float
    c: float

    family = "froeschle"
    N = 2
    d = 2
    center = 1

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "c", float(self.c))

    def grad_w(self, x):
        s1 = np.sin(TWO_PI * x[0])
        s2 = np.sin(TWO_PI * x[1])
        s3 = np.sin(TWO_PI * (x[0] - x[1]))
        return np.array(
            [
                -TWO_PI * (self.a * s1 + self.c * s3),
                -TWO_PI * (self.b * s2 - self.c * s3),
            ]
        )

    def hessian_w0(self):
        """D^2 W at the origin: -4 pi^2 [[a+c, -c], [-c, b+c]]."""
        return (
            -4.0
            * math.pi**2
            * np.array([[self.a + self.c, -self.c], [-self.c, self.b + self.c]])
        )

    def _z_pointwise(self, t):
        return t[2] - 2.0 * t[1] + t[0] + self.grad_w(t[1])

    def _z_series(self, args):
        mid = args[1]
        x1 = mid.component(0)
        x2 = mid.component(1)
        s1 = sin_cos(TWO_PI * x1).sin_series
        s2 = sin_cos(TWO_PI * x2).sin_series
        s3 = sin_cos(TWO_PI * (x1 - x2)).sin_series
        g1 = (-TWO_PI * self.a) * s1 + (-TWO_PI * self.c) * s3
        g2 = (-TWO_PI * self.b) * s2 + (TWO_PI * self.c) * s3
        grad = _stack([g1, g2])
        return add(add(add(args[2], -2.0 * args[1]), args[0]), grad)

    def closed_linear_data(self):
        eye = np.eye(2)
        return LinearData(N=2, d=2, B=(eye, -2.0 * eye + self.hessian_w0(), eye))

    def series_engine(self, lam, order, p1):
        return _FroeschleEngine(self, lam, order, p1)

    def params_items(self):
        return (("a", self.a), ("b", self.b), ("c", self.c))

    def with_param(self, name, value):
        if name in ("a", "b", "c"):
            kw = {"a": self.a, "b": self.b, "c": self.c}
            kw[name] = float(value)
            return Froeschle(**kw)
        raise ValueError(f"froeschle has no parameter {name!r}")


@dataclass(frozen=True, repr=False)
class McMillan(ModelSpec):
    """Integrable rational map written as a second-order equation:

        theta_2 + theta_0 - 2 cosh(eta) theta_1 / (theta_1^2 + 1) = 0,

    with closed-form stable manifold P(z) = 2 sinh(eta) z / (z^2 + 1) for
    lambda = exp(-eta).
    """

    eta: float

    family = "mcmillan"
    N = 2
    d = 1
    center = 0

    def __post_init__(self):
        object.__setattr__(self, "eta", float(self.eta))
        if not self.eta > 0.0:
            raise ValueError("mcmillan requires eta > 0")

    def _z_pointwise(self, t):
        return t[2] + t[0] - 2.0 * math.cosh(self.eta) * t[1] / (t[1] ** 2 + 1.0)

    def _z_series(self, args):
        t1 = args[1]
        denom = add(_one(t1.order), mul(t1, t1))
        ratio = mul(t1, reciprocal(denom))
        return add(add(args[2], args[0]), (-2.0 * math.cosh(self.eta)) * ratio)

    def closed_linear_data(self):
        return LinearData(
            N=2, d=1, B=([[1.0]], [[-2.0 * math.cosh(self.eta)]], [[1.0]])
        )

    def oracle(self):
        s = 2.0 * math.sinh(self.eta)
        return Oracle(
            evaluate=lambda z: s * z / (z * z + 1.0), lam=math.exp(-self.eta)
        )

    def params_items(self):
        return (("eta", self.eta),)

    def with_param(self, name, value):
        if name == "eta":
            return McMillan(float(value))
        raise ValueError(f"mcmillan has no parameter {name!r}")


@dataclass(frozen=True, repr=False)
class RationalExample(ModelSpec):
    """Worked example with a non-invertible slot: with f(t) = 2t/(1-t),

        (f(theta_1) - theta_0) f'(theta_1) + (theta_1 - f(theta_2)) = 0,

    solved in closed form by P(z) = z/(1-z) with lambda = 1/2.  Arguments
    must stay left of the pole of f at 1.
    """

    family = "rational_example"
    N = 2
    d = 1
    center = 0

    def _z_pointwise(self, t):
        vals = np.concatenate(t)
        if np.any(vals >= 1.0):
            raise ModelDomainError(
                "rational_example requires all arguments < 1 (pole of f)"
            )
        f1 = 2.0 * t[1] / (1.0 - t[1])
        fp1 = 2.0 / (1.0 - t[1]) ** 2
        f2 = 2.0 * t[2] / (1.0 - t[2])
        return (f1 - t[0]) * fp1 + (t[1] - f2)

    def _z_series(self, args):
        t0, t1, t2 = args
        inv1 = reciprocal(add(_one(t1.order), -1.0 * t1))
        f1 = 2.0 * mul(t1, inv1)
        fp1 = 2.0 * mul(inv1, inv1)
        inv2 = reciprocal(add(_one(t2.order), -1.0 * t2))
        f2 = 2.0 * mul(t2, inv2)
        left = mul(add(f1, -1.0 * t0), fp1)
        return add(left, add(t1, -1.0 * f2))

    def closed_linear_data(self):
        return LinearData(N=2, d=1, B=([[-2.0]], [[5.0]], [[-2.0]]))

    def oracle(self):
        return Oracle(evaluate=lambda z: z / (1.0 - z), lam=0.5)


class ReversedModel(ModelSpec):
    """The argument-reversed equation Z~(t_0..t_N) = Z(t_N..t_0).

    Stable manifolds of the reversal are unstable manifolds of the base
    model: linear data reverses (B~_i = B_{N-i}) and the spectrum maps
    lambda -> 1/lambda.  Uses the fallback engine; the base family's
    incremental channels do not apply to the mirrored argument order.
    """

    def __init__(self, base):
        self.base = base

    @property
    def family(self):
        return f"reversed_{self.base.family}"

    @property
    def N(self):
        return self.base.N

    @property
    def d(self):
        return self.base.d

    @property
    def center(self):
        return self.base.N - self.base.center

    def _z_pointwise(self, t):
        return self.base._z_pointwise(t[::-1])

    def _z_series(self, args):
        return self.base._z_series(args[::-1])

    def closed_linear_data(self):
        lin = self.base.closed_linear_data()
        return LinearData(N=lin.N, d=lin.d, B=tuple(lin.B[::-1]))

    def reverse(self):
        return self.base

    def params_items(self):
        return self.base.params_items()

    def with_param(self, name, value):
        return ReversedModel(self.base.with_param(name, value))

    def __repr__(self):
        return f"ReversedModel({self.base!r})"


FAMILIES = {
    "standard_map_k": StandardMapK,
    "frenkel_kontorova": FrenkelKontorova,
    "heisenberg_xy": HeisenbergXY,
    "froeschle": Froeschle,
    "mcmillan": McMillan,
    "rational_example": RationalExample,
}


def from_config(family, params):
    """Build a model from a family name and a flat parameter mapping.

    Lists arrive under 'gamma' and 'C'; scalars under their own names.
    Raises ValueError on unknown families, missing or surplus parameters.
    """
    if family not in FAMILIES:
        raise ValueError(
            f"unknown family {family!r}; choose from {sorted(FAMILIES)}"
        )
    params = dict(params)

    def take(key):
        if key not in params:
            raise ValueError(f"family {family!r} requires parameter {key!r}")
        return params.pop(key)

    if family == "standard_map_k":
        model = StandardMapK(tuple(take("C")))
    elif family == "frenkel_kontorova":
        model = FrenkelKontorova(tuple(take("gamma")), take("delta"), tuple(take("C")))
    elif family == "heisenberg_xy":
        model = HeisenbergXY(take("epsilon"))
    elif family == "froeschle":
        model = Froeschle(take("a"), take("b"), take("c"))
    elif family == "mcmillan":
        model = McMillan(take("eta"))
    else:
        model = RationalExample()
    if params:
        raise ValueError(
            f"family {family!r} does not accept parameters {sorted(params)}"
        )
    return model
