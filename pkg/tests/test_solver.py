"""Solver tests: branch selection, the order update, full solves against
closed forms, scale selection and covariance, residual reporting, and
parameter continuation."""

import math
import warnings

import numpy as np
import pytest

from parman.errors import (
    BranchLossError,
    InternalConsistencyError,
    NoHyperbolicDirectionError,
    ResonanceError,
    RootMultiplicityError,
    SpectralError,
)
from parman.models import (
    Froeschle,
    FrenkelKontorova,
    HeisenbergXY,
    McMillan,
    ModelSpec,
    RationalExample,
    StandardMapK,
)
from parman.series import TruncatedSeries, add, evaluate
from parman.solver import (
    SolveConfig,
    choose_scale,
    continuation,
    order_update,
    residual_sample,
    residual_series,
    select_eigensolution,
    solve,
    t_effective,
    t_scalar,
)
from parman.spectrum import Eigensolution, LinearData

FK_A = FrenkelKontorova(gammas=(1.0, 0.1, 0.0), delta=0.4, C=(1.0,))

DEFAULTS = [
    StandardMapK(C=(0.9,)),
    FK_A,
    HeisenbergXY(epsilon=1.0),
    Froeschle(a=0.01, b=0.01, c=0.01),
    McMillan(eta=1.0),
    RationalExample(),
]


class LinearChain(ModelSpec):
    """Test stub: theta_2 - 2.5 theta_1 + theta_0 = 0, eigenvalues 1/2, 2."""

    family = "linear_chain"
    N = 2
    d = 1
    center = 1

    def _z_pointwise(self, t):
        return t[2] - 2.5 * t[1] + t[0]

    def _z_series(self, args):
        return add(add(args[2], -2.5 * args[1]), args[0])

    def closed_linear_data(self):
        return LinearData(N=2, d=1, B=([[1.0]], [[-2.5]], [[1.0]]))


class SpectrumStub(ModelSpec):
    """Test stub whose linearization is handed in directly."""

    family = "spectrum_stub"
    d = 1
    center = 0

    def __init__(self, coeffs):
        self._lin = LinearData(
            N=len(coeffs) - 1, d=1, B=tuple([[c]] for c in coeffs)
        )
        self.N = len(coeffs) - 1

    def closed_linear_data(self):
        return self._lin


class TestTScalar:
    def test_examples(self):
        lin = LinearData(N=2, d=1, B=([[1.0]], [[-3.0]], [[1.0]]))
        assert t_scalar(1.0, lin)[0, 0] == -1.0
        assert t_scalar(0.0, lin)[0, 0] == 1.0

    def test_matches_horner(self):
        rng = np.random.default_rng(3)
        B = tuple(rng.normal(size=(2, 2)) for _ in range(4))
        lin = LinearData(N=3, d=2, B=B)
        lam = 0.5
        horner = B[3]
        for M in (B[2], B[1], B[0]):
            horner = horner * lam + M
        assert np.max(np.abs(t_scalar(lam, lin) - horner)) < 1e-14

    def test_effective_is_rescaled_pencil(self):
        lin = FK_A.closed_linear_data()
        lam, k, c = 0.6, 4, FK_A.center
        want = lam ** (-c * k) * t_scalar(lam**k, lin)
        assert np.allclose(t_effective(lam, k, lin, c), want, rtol=1e-12)


class TestSelectEigensolution:
    def test_rational_slow_branch(self):
        eig = select_eigensolution(RationalExample())
        assert abs(eig.lam - 0.5) < 1e-12
        assert np.array_equal(eig.eigvec, [1.0])
        assert eig.non_resonant and eig.n_max >= 2

    def test_certified_nullvector(self):
        # the packaged pair must satisfy the eigensolution bound
        for model in DEFAULTS:
            eig = select_eigensolution(model)
            r = np.max(np.abs(t_scalar(eig.lam, eig.lin) @ eig.eigvec))
            bound = 1e-10 * max(np.max(np.abs(M)) for M in eig.lin.B)
            assert r <= bound, model.family

    def test_branch_index(self):
        slow = select_eigensolution(FK_A, branch=0)
        fast = select_eigensolution(FK_A, branch=1)
        assert slow.lam == select_eigensolution(FK_A, branch="slow").lam
        assert abs(fast.lam) < abs(slow.lam)
        assert abs(fast.lam + 0.0819797781206739) < 1e-10

    def test_branch_index_out_of_range(self):
        with pytest.raises(SpectralError):
            select_eigensolution(FK_A, branch=7)

    def test_no_stable_direction(self):
        # roots 2 and 4: nothing inside the unit disk
        stub = SpectrumStub([8.0, -6.0, 1.0])
        with pytest.raises(NoHyperbolicDirectionError):
            select_eigensolution(stub)

    def test_free_chain_is_refused(self):
        # the uncoupled chain has a double root at 1, split by the root
        # finder into label-fooling pseudo-stable roots; the circle
        # clearance certificate refuses before any branch is picked
        with pytest.raises(NoHyperbolicDirectionError):
            select_eigensolution(
                FrenkelKontorova(gammas=(1.0,), delta=0.0, C=(1.0,))
            )

    def test_degenerate_froeschle_is_refused(self):
        with pytest.raises(NoHyperbolicDirectionError):
            select_eigensolution(Froeschle(a=0.0, b=0.0, c=0.0))

    def test_slow_tie_is_refused(self):
        # roots +/- 1/2 and +/- 2: two stable roots of equal modulus
        stub = SpectrumStub([1.0, 0.0, -4.25, 0.0, 1.0])
        with pytest.raises(SpectralError):
            select_eigensolution(stub)

    def test_multiple_root_is_refused(self):
        # (1 - 2.5 x + x^2)^2: stable double root at 1/2
        stub = SpectrumStub([1.0, -5.0, 8.25, -5.0, 1.0])
        with pytest.raises(RootMultiplicityError):
            select_eigensolution(stub)


class TestOrderUpdate:
    def test_rational_next_coefficient_is_one(self):
        model = RationalExample()
        eig = select_eigensolution(model)
        P = TruncatedSeries([0.0, 1.0])
        x = order_update(model, eig, eig.lin, P)
        assert abs(x[0] - 1.0) < 1e-12

    def test_standard_map_zeroes_next_residual(self):
        model = StandardMapK(C=(0.9,))
        eig = select_eigensolution(model)
        P = TruncatedSeries([0.0, 0.5])
        x = order_update(model, eig, eig.lin, P)
        extended = TruncatedSeries([0.0, 0.5, float(x[0])])
        r = model.residual_of_series(extended, eig.lam)
        assert abs(r.coeffs[2, 0]) < 1e-15

    def test_mcmillan_reproduces_oracle_coefficients(self):
        model = McMillan(eta=1.0)
        eig = select_eigensolution(model)
        s = 2.0 * math.sinh(1.0)
        k = np.arange(12)
        oracle = np.where(k % 2 == 1, (-1.0) ** ((k - 1) // 2), 0.0) * s
        x10 = order_update(model, eig, eig.lin, TruncatedSeries(oracle[:10]))
        assert abs(x10[0] - oracle[10]) < 1e-12
        x11 = order_update(model, eig, eig.lin, TruncatedSeries(oracle[:11]))
        assert abs(x11[0] - oracle[11]) < 1e-12 * abs(oracle[11])

    def test_resonant_pencil_is_detected(self):
        # lambda^2 is itself an eigenvalue: the order-2 pencil is singular
        model = LinearChain()
        lam = math.sqrt(0.5)
        lin = model.closed_linear_data()
        eig = Eigensolution(
            lam=lam, eigvec=[1.0], non_resonant=True, n_max=2, lin=lin
        )
        with pytest.raises(ResonanceError) as err:
            order_update(model, eig, lin, TruncatedSeries([0.0, 1.0]))
        assert err.value.order == 2


class TestSolve:
    def test_rational_all_ones(self):
        model = RationalExample()
        eig = select_eigensolution(model)
        rep = solve(model, eig, SolveConfig(order=100, scale=1.0))
        assert rep.series.coeffs[0, 0] == 0.0
        assert np.max(np.abs(rep.series.coeffs[1:, 0] - 1.0)) < 1e-10
        assert rep.residual_series_max <= 1e-9

    def test_mcmillan_matches_closed_form(self):
        model = McMillan(eta=1.0)
        eig = select_eigensolution(model)
        s = 2.0 * math.sinh(1.0)
        rep = solve(model, eig, SolveConfig(order=60, scale=s))
        k = np.arange(61)
        oracle = np.where(k % 2 == 1, (-1.0) ** ((k - 1) // 2), 0.0) * s
        got = rep.series.coeffs[:, 0]
        odd = k % 2 == 1
        assert np.max(np.abs(got[odd] - oracle[odd])) < 1e-11 * s
        assert np.max(np.abs(got[~odd])) < 1e-11

    def test_fk_table_row_a(self):
        eig = select_eigensolution(FK_A)
        rep = solve(FK_A, eig, SolveConfig(order=100, scale=10.0))
        assert abs(rep.lam - 0.592583231399561) < 1e-12
        assert rep.scale == 10.0
        assert np.array_equal(rep.series.coeffs[0], [0.0])
        assert abs(rep.series.coeffs[1, 0] - 10.0) < 1e-14
        (z, val), = [s for s in residual_sample(FK_A, rep.series, rep.lam, [0.1])]
        assert val < 1e-10
        growth, argmax = rep.coeff_growth
        assert growth == np.max(np.abs(rep.series.coeffs))
        assert np.max(np.abs(rep.series.coeffs[argmax])) == growth

    def test_residual_ceiling_holds_for_all_defaults(self):
        for model in DEFAULTS:
            eig = select_eigensolution(model)
            order = 60 if model.d == 2 else 100
            rep = solve(model, eig, SolveConfig(order=order))
            scale = np.max(np.abs(rep.series.coeffs))
            assert rep.residual_series_max <= 1e-9 * max(1.0, scale), model.family

    def test_uncertified_eigensolution_is_rejected(self):
        model = RationalExample()
        eig = select_eigensolution(model)
        bad = Eigensolution(
            lam=eig.lam, eigvec=eig.eigvec, non_resonant=False,
            n_max=eig.n_max, lin=eig.lin,
        )
        with pytest.raises(ResonanceError):
            solve(model, bad, SolveConfig(order=10, scale=1.0, trial_order=5))

    def test_broken_model_trips_the_self_check(self):
        # the engine recursion and the final residual assembly disagree for
        # a model whose series residual is inconsistent; solve must notice
        class Broken(StandardMapK):
            def _z_series(self, args):
                bad = np.zeros(args[0].order + 1)
                bad[0] = 1e-5
                return add(super()._z_series(args), TruncatedSeries(bad))

        model = Broken(C=(0.9,))
        eig = select_eigensolution(model)
        with pytest.raises(InternalConsistencyError):
            solve(model, eig, SolveConfig(order=20, scale=1.0))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SolveConfig(order=1)
        with pytest.raises(ValueError):
            SolveConfig(scale=0.0)
        with pytest.raises(ValueError):
            SolveConfig(scale=-2.0)
        with pytest.raises(ValueError):
            SolveConfig(branch=1.5)
        with pytest.raises(ValueError):
            SolveConfig(order=10, trial_order=11)
        with pytest.raises(ValueError):
            SolveConfig(trial_order=4)


class TestChooseScale:
    def test_rational_keeps_unit_scale(self):
        model = RationalExample()
        eig = select_eigensolution(model)
        assert abs(choose_scale(model, eig) - 1.0) < 1e-9

    def test_fk_row_a_matches_published_slope(self):
        eig = select_eigensolution(FK_A)
        tau = choose_scale(FK_A, eig)
        assert 10.0 / 3.0 < tau < 30.0

    def test_flat_trial_warns_and_keeps_one(self):
        model = LinearChain()
        eig = select_eigensolution(model)
        with pytest.warns(UserWarning):
            tau = choose_scale(model, eig)
        assert tau == 1.0

    def test_even_trial_order_on_odd_series(self):
        # odd solutions have exactly zero even coefficients; the estimate
        # must fall back to the last nonzero row, not declare a flat trial
        model = McMillan(eta=1.0)
        eig = select_eigensolution(model)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            tau = choose_scale(model, eig, trial_order=10)
        assert 0.1 < tau < 10.0

    def test_doubling_the_scale_is_exact(self):
        for model in DEFAULTS:
            eig = select_eigensolution(model)
            r1 = solve(model, eig, SolveConfig(order=40, scale=0.37))
            r2 = solve(model, eig, SolveConfig(order=40, scale=0.74))
            k = np.arange(41)[:, None]
            assert np.array_equal(r2.series.coeffs, 2.0**k * r1.series.coeffs), (
                model.family
            )

    def test_general_scale_covariance(self):
        model = RationalExample()
        eig = select_eigensolution(model)
        r1 = solve(model, eig, SolveConfig(order=40, scale=0.5))
        r2 = solve(model, eig, SolveConfig(order=40, scale=0.85))
        k = np.arange(41)
        ref = 1.7**k * r1.series.coeffs[:, 0]
        diff = np.abs(r2.series.coeffs[:, 0] - ref)
        mask = ref != 0.0
        assert np.all(diff[mask] <= 1e-12 * np.abs(ref[mask]))


class TestResidualSeries:
    def test_exact_rational_series(self):
        P = TruncatedSeries(np.r_[0.0, np.ones(10)])
        r = residual_series(RationalExample(), P, 0.5)
        assert np.max(np.abs(r.coeffs)) < 1e-12

    def test_zero_series(self):
        for model in DEFAULTS:
            r = residual_series(model, TruncatedSeries.zero(8, model.d), 0.5)
            assert np.max(np.abs(r.coeffs)) == 0.0, model.family

    def test_perturbation_shows_up_at_its_own_order_first(self):
        model = StandardMapK(C=(0.9,))
        eig = select_eigensolution(model)
        rep = solve(model, eig, SolveConfig(order=30))
        bumped = rep.series.coeffs.copy()
        bumped[5, 0] += 1e-3
        r = residual_series(model, TruncatedSeries(bumped), eig.lam)
        flat = np.abs(r.coeffs[:, 0])
        assert np.max(flat[:5]) < 1e-13
        assert flat[5] > 1e-4

    def test_matches_pointwise_sampling(self):
        for model in DEFAULTS:
            eig = select_eigensolution(model)
            rep = solve(model, eig, SolveConfig(order=60))
            r = residual_series(model, rep.series, eig.lam)
            for z in (0.02, -0.05, 0.1):
                series_val = np.max(np.abs(np.atleast_1d(evaluate(r, z))))
                (_, point_val), = residual_sample(
                    model, rep.series, eig.lam, [z]
                )
                assert abs(series_val - point_val) < 1e-10, model.family


class TestResidualSample:
    def test_zero_point_is_exact(self):
        for model in DEFAULTS:
            eig = select_eigensolution(model)
            rep = solve(model, eig, SolveConfig(order=30))
            (_, val), = residual_sample(model, rep.series, eig.lam, [0.0])
            assert val <= 1e-14, model.family

    def test_mcmillan_small_z(self):
        model = McMillan(eta=1.0)
        eig = select_eigensolution(model)
        rep = solve(model, eig, SolveConfig(order=60, scale=2.0 * math.sinh(1.0)))
        (_, val), = residual_sample(model, rep.series, eig.lam, [0.3])
        assert val < 1e-13

    def test_fk_truncation_error_grows_outward(self):
        # the qualitative shape behind the published error curves: round-off
        # at the origin, truncation tail outward
        eig = select_eigensolution(FK_A)
        rep = solve(FK_A, eig, SolveConfig(order=25, scale=10.0))
        vals = dict(residual_sample(FK_A, rep.series, eig.lam, [0.1, 1.4]))
        assert vals[0.1] < 1e-6 * vals[1.4]


class TestContinuation:
    def test_table_rows_along_gamma3(self):
        steps = continuation(
            FK_A, "gamma_3", [0.0, 0.01, 0.03], SolveConfig(order=20)
        )
        want = [0.592583231399561, 0.603202338024902, 0.621569001269222]
        for st, lam in zip(steps, want):
            assert abs(st.lam - lam) < 1e-12
        assert [st.exponent for st in steps] == [1, 0, 0]

    def test_table_rows_along_gamma2(self):
        steps = continuation(
            FK_A, "gamma_2", [0.1, 0.14], SolveConfig(order=20)
        )
        assert abs(steps[0].lam - 0.592583231399561) < 1e-12
        assert abs(steps[1].lam - 0.609158827181520) < 1e-12

    def test_singular_limit_sweep(self):
        steps = continuation(
            FK_A, "gamma_3", [1e-2, 1e-3, 1e-4, 0.0], SolveConfig(order=40)
        )
        assert [st.exponent for st in steps] == [0, 0, 0, 1]

        def normalized(st):
            k = np.arange(21)[:, None]
            return st.report.series.coeffs[:21] / st.report.scale**k

        base = normalized(steps[-1])
        diffs = [np.max(np.abs(normalized(st) - base)) for st in steps[:-1]]
        assert diffs[0] > diffs[1] > diffs[2]

    def test_repeated_point_gives_identical_steps(self):
        steps = continuation(FK_A, "delta", [0.4, 0.4], SolveConfig(order=15))
        assert steps[0].lam == steps[1].lam
        assert np.array_equal(
            steps[0].report.series.coeffs, steps[1].report.series.coeffs
        )

    def test_branch_loss_raises_with_step(self):
        model = StandardMapK(C=(1.0,))
        with pytest.raises(BranchLossError) as err:
            continuation(
                model, "C_1", [1.0, -5.0], SolveConfig(order=10, trial_order=5)
            )
        assert err.value.step == 1


class TestUnstableSymmetry:
    def test_reversed_fk_reproduces_the_stable_series(self):
        eig = select_eigensolution(FK_A)
        fwd = solve(FK_A, eig, SolveConfig(order=40, scale=10.0))
        rev_model = FK_A.reverse()
        rev_eig = select_eigensolution(rev_model)
        assert abs(rev_eig.lam - eig.lam) < 1e-12
        rev = solve(rev_model, rev_eig, SolveConfig(order=40, scale=10.0))
        scale = np.max(np.abs(fwd.series.coeffs))
        assert (
            np.max(np.abs(fwd.series.coeffs - rev.series.coeffs))
            <= 1e-10 * scale
        )

    def test_reversed_mcmillan_solves_through_generic_engine(self):
        model = McMillan(eta=1.0).reverse()
        eig = select_eigensolution(model)
        assert abs(eig.lam - math.exp(-1.0)) < 1e-12
        rep = solve(model, eig, SolveConfig(order=30, scale=2.0 * math.sinh(1.0)))
        k = np.arange(31)
        oracle = np.where(k % 2 == 1, (-1.0) ** ((k - 1) // 2), 0.0)
        oracle = 2.0 * math.sinh(1.0) * oracle
        assert np.max(np.abs(rep.series.coeffs[:, 0] - oracle)) < 1e-11
