"""Linear-analysis tests: characteristic polynomials, roots, classification,
non-resonance, the Chebyshev reduction, and eigenvectors."""

import math

import numpy as np
import pytest

from parman.errors import (
    DegenerateInputError,
    NoHyperbolicDirectionError,
    NotAFixedPointError,
    NotAnEigenvalueError,
)
from parman.models import (
    Froeschle,
    FrenkelKontorova,
    HeisenbergXY,
    McMillan,
    RationalExample,
    StandardMapK,
)
from parman.spectrum import (
    LinearData,
    analyze,
    char_poly,
    chebyshev_reduce,
    classify,
    eigenvector,
    nonresonance_check,
    numeric_partials,
    poly_roots,
    t_matrix,
)

GOLDEN = (3.0 - math.sqrt(5.0)) / 2.0  # stable root of 1 - 3 lam + lam^2


def report_from_roots(roots):
    coeffs = np.polynomial.polynomial.polyfromroots(roots).real
    return classify(coeffs, np.asarray(roots, dtype=np.complex128))


class TestNumericPartials:
    def test_standard_map_closed_form(self):
        model = StandardMapK(C=(0.7,))
        lin = numeric_partials(model)
        assert lin.N == 2 and lin.d == 1
        assert abs(lin.B[0][0, 0] - 1.0) < 1e-8
        assert abs(lin.B[1][0, 0] - (-2.7)) < 1e-8
        assert abs(lin.B[2][0, 0] - 1.0) < 1e-8
        got = sorted(r.real for r in poly_roots(char_poly(lin)))
        want = sorted(r.real for r in poly_roots(char_poly(model.closed_linear_data())))
        assert np.allclose(got, want, atol=1e-6)

    def test_xy_root_product_is_one(self):
        lin = numeric_partials(HeisenbergXY(epsilon=0.5))
        roots = poly_roots(char_poly(lin))
        assert abs(np.prod(roots) - 1.0) < 1e-6

    def test_rational_example_contains_one_half(self):
        roots = poly_roots(char_poly(numeric_partials(RationalExample())))
        assert min(abs(r - 0.5) for r in roots) < 1e-6

    def test_every_family_matches_closed_linearization(self):
        for model in (
            StandardMapK(C=(1.0, 0.3)),
            FrenkelKontorova(gammas=(1.0, 0.1, 0.01), delta=0.4, C=(1.0,)),
            HeisenbergXY(epsilon=0.25),
            Froeschle(a=0.02, b=0.05, c=0.01),
            McMillan(eta=0.8),
            RationalExample(),
        ):
            fd = numeric_partials(model)
            closed = model.closed_linear_data()
            for got, want in zip(fd.B, closed.B):
                assert np.allclose(got, want, atol=1e-7), model.family

    def test_rejects_non_fixed_point(self):
        with pytest.raises(NotAFixedPointError):
            numeric_partials(StandardMapK(C=(1.0,)), fixed_point=[0.3])


class TestCharPoly:
    def test_scalar_quadratic(self):
        lin = LinearData(N=2, d=1, B=([[1.0]], [[-3.0]], [[1.0]]))
        assert np.allclose(char_poly(lin), [1.0, -3.0, 1.0], atol=1e-12)

    def test_decoupled_froeschle_is_quartic_power(self):
        coeffs = char_poly(Froeschle(a=0.0, b=0.0, c=0.0).closed_linear_data())
        assert np.allclose(coeffs, [1.0, -4.0, 6.0, -4.0, 1.0], atol=1e-10)

    def test_coupled_froeschle_root_product(self):
        coeffs = char_poly(Froeschle(a=0.05, b=0.05, c=0.0).closed_linear_data())
        roots = poly_roots(coeffs)
        assert abs(np.prod(roots) - 1.0) < 1e-10

    def test_matches_determinant_at_fresh_points(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            B = tuple(rng.normal(size=(2, 2)) for _ in range(3))
            lin = LinearData(N=2, d=2, B=B)
            coeffs = char_poly(lin)
            for x in rng.uniform(-2.0, 2.0, size=10):
                direct = np.linalg.det(t_matrix(x, lin))
                interp = np.polynomial.polynomial.polyval(x, coeffs)
                assert abs(interp - direct) <= 1e-9 * max(1.0, abs(direct))


class TestPolyRoots:
    def test_quadratic_formula(self):
        roots = sorted(r.real for r in poly_roots([1.0, -3.0, 1.0]))
        assert np.allclose(roots, [GOLDEN, (3.0 + math.sqrt(5.0)) / 2.0], atol=1e-12)

    def test_vanishing_constant_term_reports_zero_root(self):
        # lam * (lam^2 - 2.4 lam + 1): the zero root is explicit, the
        # cofactor's roots come from the quadratic formula.
        roots = poly_roots([0.0, 1.0, -2.4, 1.0])
        assert abs(roots[0]) == 0.0
        s = math.sqrt(2.4**2 - 4.0)
        want = sorted([(2.4 - s) / 2.0, (2.4 + s) / 2.0])
        assert np.allclose(sorted(r.real for r in roots[1:]), want, atol=1e-12)

    def test_unit_circle_quartet(self):
        roots = poly_roots([1.0, 0.0, 0.0, 0.0, 1.0])
        assert len(roots) == 4
        assert np.allclose(np.abs(roots), 1.0, atol=1e-12)
        angles = sorted(np.angle(roots))
        want = [-3 * np.pi / 4, -np.pi / 4, np.pi / 4, 3 * np.pi / 4]
        assert np.allclose(angles, want, atol=1e-12)

    def test_zero_polynomial_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            poly_roots([0.0, 0.0, 0.0])

    def test_residual_postcondition(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            deg = int(rng.integers(1, 9))
            c = rng.normal(size=deg + 1)
            if rng.random() < 0.3:
                c[0] = 0.0
            if rng.random() < 0.3:
                c[-1] = 0.0
                if not np.any(c):
                    continue
            roots = poly_roots(c)
            scale = np.max(np.abs(c))
            for r in roots:
                val = np.polynomial.polynomial.polyval(r, c)
                assert abs(val) <= 1e-8 * scale * max(1.0, abs(r)) ** deg


class TestClassify:
    def test_plain_hyperbolic_pair(self):
        rep = report_from_roots([0.38, 2.62])
        assert rep.hyperbolic and rep.non_singular and rep.exponent == 0
        assert rep.labels == ("stable", "unstable")

    def test_zero_root_sets_exponent_not_hyperbolicity(self):
        # the unit-circle test applies to the nonzero roots only; the zero
        # cluster is counted by the singularity exponent instead
        rep = report_from_roots([0.0, 0.5, 2.0])
        assert rep.exponent == 1
        assert not rep.non_singular
        assert rep.hyperbolic
        assert rep.labels == ("zero", "stable", "unstable")

    def test_unit_circle_pair_breaks_hyperbolicity(self):
        rep = report_from_roots(
            [np.exp(1j * np.pi / 3), np.exp(-1j * np.pi / 3)]
        )
        assert not rep.hyperbolic
        assert rep.labels == ("unit-circle", "unit-circle")

    def test_multiple_unit_root_breaks_hyperbolicity(self):
        # uncoupled two-component chain: quadruple root at 1.  The root
        # finder splits it by ~2e-4, so no individual label reads
        # unit-circle, but the circle-clearance certificate still refuses.
        rep = analyze(Froeschle(a=0.0, b=0.0, c=0.0).closed_linear_data())
        assert all(lab != "unit-circle" for lab in rep.labels)
        assert not rep.hyperbolic
        assert rep.non_singular

    def test_root_count_matches_degree(self):
        for model in (
            StandardMapK(C=(1.0,)),
            FrenkelKontorova(gammas=(1.0, 0.1, 0.0), delta=0.4, C=(1.0,)),
        ):
            rep = analyze(model.closed_linear_data())
            assert len(rep.roots) == rep.char_poly.size - 1

    def test_fk_with_zero_top_coupling_is_singular(self):
        rep = analyze(
            FrenkelKontorova(gammas=(1.0, 0.1, 0.0), delta=0.4, C=(1.0,))
            .closed_linear_data()
        )
        assert rep.exponent == 1
        assert not rep.non_singular
        assert rep.hyperbolic


class TestNonresonance:
    def test_golden_standard_map(self):
        rep = analyze(StandardMapK(C=(1.0,)).closed_linear_data())
        res = nonresonance_check(GOLDEN, rep)
        assert res.non_resonant
        assert res.n_max >= 2

    def test_planted_resonance(self):
        res = nonresonance_check(0.5, report_from_roots([0.5, 0.25, 4.0, 2.0]))
        assert not res.non_resonant
        assert any(n == 2 for n, _ in res.failures)

    def test_slow_table_row(self):
        lam = 0.592583231399561
        rep = analyze(
            FrenkelKontorova(gammas=(1.0, 0.1, 0.0), delta=0.4, C=(1.0,))
            .closed_linear_data()
        )
        nonzero = [r for r, lab in zip(rep.roots, rep.labels) if lab != "zero"]
        assert len(nonzero) == 4
        res = nonresonance_check(lam, rep)
        assert res.non_resonant

    def test_rejects_expanding_multiplier(self):
        rep = report_from_roots([0.38, 2.62])
        with pytest.raises(ValueError):
            nonresonance_check(1.1, rep)

    def test_nmax_bound(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            lam = float(rng.uniform(0.05, 0.9)) * (1 if rng.random() < 0.5 else -1)
            mu = float(rng.uniform(0.01, 0.8))
            rep = report_from_roots([mu, 1.0 / mu])
            res = nonresonance_check(lam, rep)
            # defining property of the bound
            assert abs(lam) ** res.n_max < mu
            assert abs(lam) ** (res.n_max - 1) >= mu * (1.0 - 1e-12)
            # and the stated ceiling, with one step of slack at exact
            # integer log ratios where >= vs > matters
            assert res.n_max <= math.ceil(math.log(mu) / math.log(abs(lam))) + 1


class TestChebyshevReduction:
    def test_slow_table_row_a(self):
        fk = FrenkelKontorova(gammas=(1.0, 0.1, 0.0), delta=0.4, C=(1.0,))
        red = chebyshev_reduce(fk)
        assert abs(red.slow - 0.592583231399561) < 1e-13

    def test_slow_table_row_c(self):
        fk = FrenkelKontorova(gammas=(1.0, 0.1, 0.01), delta=0.4, C=(1.0,))
        red = chebyshev_reduce(fk)
        assert abs(red.slow - 0.603202338024902) < 1e-13

    def test_free_chain_has_no_hyperbolic_direction(self):
        fk = FrenkelKontorova(gammas=(1.0, 0.0, 0.0), delta=0.0, C=(1.0,))
        with pytest.raises(NoHyperbolicDirectionError):
            chebyshev_reduce(fk)

    def test_pairs_are_reciprocal(self):
        fk = FrenkelKontorova(gammas=(1.0, 0.1, 0.01), delta=0.4, C=(1.0,))
        for lam_minus, lam_plus in chebyshev_reduce(fk).lambda_pairs:
            assert abs(lam_minus * lam_plus - 1.0) < 1e-10

    def test_agrees_with_characteristic_polynomial(self):
        # two independent routes to the same spectrum: the reduced
        # polynomial in omega vs. finite differences + interpolation
        for gammas in ((1.0, 0.1, 0.0), (1.0, 0.1, 0.01), (1.0, 0.14, 0.0)):
            fk = FrenkelKontorova(gammas=gammas, delta=0.4, C=(1.0,))
            coeffs = char_poly(numeric_partials(fk))
            scale = np.max(np.abs(coeffs))
            deg = coeffs.size - 1
            for pair in chebyshev_reduce(fk).lambda_pairs:
                for lam in pair:
                    val = np.polynomial.polynomial.polyval(lam, coeffs)
                    assert abs(val) <= 1e-8 * scale * max(1.0, abs(lam)) ** deg


class TestEigenvector:
    def test_scalar_case_returns_one(self):
        lin = LinearData(N=2, d=1, B=([[1.0]], [[-3.0]], [[1.0]]))
        assert np.array_equal(eigenvector(GOLDEN, lin), [1.0])

    def test_froeschle_slow_branch_aligns_diagonally(self):
        model = Froeschle(a=0.01, b=0.01, c=0.01)
        # omega values are the eigenvalues of I - D^2W(0)/2; the slow branch
        # belongs to the smaller omega, whose eigenvector is (1, 1)
        omega = 1.0 + 0.02 * math.pi**2
        lam = omega - math.sqrt(omega**2 - 1.0)
        v = eigenvector(lam, model.closed_linear_data())
        u = np.array([1.0, 1.0]) / math.sqrt(2.0)
        cosang = abs(v @ u) / np.linalg.norm(v)
        assert math.acos(min(1.0, cosang)) < 1e-10

    def test_non_root_is_rejected(self):
        lin = StandardMapK(C=(1.0,)).closed_linear_data()
        with pytest.raises(NotAnEigenvalueError):
            eigenvector(0.9, lin)

    def test_nullvector_residual_is_small(self):
        model = Froeschle(a=0.03, b=0.05, c=0.01)
        lin = model.closed_linear_data()
        rep = analyze(lin)
        for lam in rep.stable_real_roots():
            v = eigenvector(lam, lin)
            assert np.max(np.abs(t_matrix(lam, lin) @ v)) <= 1e-10 * max(
                np.max(np.abs(M)) for M in lin.B
            )
            assert np.max(np.abs(v)) == 1.0


class TestSpectralSymmetry:
    def test_lagrangian_families_have_reciprocal_spectra(self):
        for model in (
            StandardMapK(C=(0.7, 0.2)),
            FrenkelKontorova(gammas=(1.0, 0.1, 0.01), delta=0.4, C=(1.0,)),
            HeisenbergXY(epsilon=0.5),
            Froeschle(a=0.02, b=0.05, c=0.01),
        ):
            rep = analyze(model.closed_linear_data())
            nonzero = [r for r, lab in zip(rep.roots, rep.labels) if lab != "zero"]
            assert nonzero, model.family
            for lam in nonzero:
                target = 1.0 / lam
                best = min(abs(mu - target) for mu in nonzero)
                assert best <= 1e-8 * (1.0 + abs(target)), model.family
