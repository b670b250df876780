"""Heat-trace machinery: spectral operators, plateaus, suspension traces."""

import numpy as np
import pytest

from opindex.errors import (
    DomainError,
    InsufficientDecayError,
    NonConvergenceError,
)
from opindex.witten import (
    GridSpec,
    LatticeOperator,
    PerturbationProfile,
    ThetaProfile,
    build_suspension,
    check_composition,
    default_t_schedule,
    discretize_dirac,
    heat_trace_rhs,
    multiplication_operator,
    path_splitting_check,
    ptf_lhs,
    relative_trace_class_diagnostic,
    spectral_time_derivative,
    suspension_spectrum,
    witten_index_closed_form,
    witten_index_estimate,
)

from oracles import heat_trace_erf_identity

SMALL_GRID = GridSpec(20.0, 256)


@pytest.fixture(scope="module")
def small_dirac():
    return discretize_dirac(SMALL_GRID)


class TestGridSpec:
    def test_spacing(self):
        assert GridSpec(20.0, 256).spacing == pytest.approx(40.0 / 256)

    def test_odd_points_rejected(self):
        with pytest.raises(DomainError):
            GridSpec(20.0, 257)

    def test_coarse_grid_rejected(self):
        with pytest.raises(DomainError):
            GridSpec(20.0, 16)


class TestDiscretizeDirac:
    def test_constant_in_kernel(self, small_dirac):
        out = small_dirac.matrix @ np.ones(SMALL_GRID.points)
        assert np.max(np.abs(out)) <= 1e-10

    def test_plane_wave_eigenvector(self, small_dirac):
        x = SMALL_GRID.points_array()
        wave = np.exp(1j * np.pi * x / SMALL_GRID.half_width)
        out = small_dirac.matrix @ wave
        expected = (np.pi / SMALL_GRID.half_width) * wave
        assert np.max(np.abs(out - expected)) <= 1e-10

    def test_spectrum_is_scaled_integers(self, small_dirac):
        n, length = SMALL_GRID.points, SMALL_GRID.half_width
        values = np.linalg.eigvalsh(small_dirac.matrix)
        expected = np.sort(np.arange(-n // 2, n // 2) * (np.pi / length))
        assert np.max(np.abs(values - expected)) <= 1e-10

    def test_time_derivative_skew(self):
        d_t = spectral_time_derivative(SMALL_GRID)
        assert np.max(np.abs(d_t + d_t.conj().T)) <= 1e-14


class TestPerturbationProfile:
    def test_lorentzian_certificate(self):
        bump = PerturbationProfile.lorentzian(2.0)
        assert bump.decay_certificate == pytest.approx(2.0, rel=1e-6)
        assert bump.has_decay

    def test_constant_profile_has_no_decay(self):
        flat = PerturbationProfile(evaluator=lambda x: 1.0)
        assert not flat.has_decay

    def test_non_hermitian_matrix_profile_rejected(self):
        with pytest.raises(DomainError):
            PerturbationProfile(
                evaluator=lambda x: np.array([[0.0, 1.0], [0.0, 0.0]]), dim=2
            )

    def test_addition_tracks_scale(self):
        total = PerturbationProfile.lorentzian(0.7) + PerturbationProfile.lorentzian(0.9)
        assert total.mu == pytest.approx(1.6)
        assert total.value(0.3)[0, 0].real == pytest.approx(1.6 / 1.09)


class TestHeatTraceRhs:
    def test_zero_perturbation(self, small_dirac):
        assert heat_trace_rhs(small_dirac, PerturbationProfile.zero(), 1.0) == 0.0

    def test_matches_erf_identity_oracle(self, small_dirac):
        bump = PerturbationProfile.lorentzian(1.0)
        b_mat = multiplication_operator(bump, SMALL_GRID)
        for t in (0.5, 2.0, 8.0):
            ours = heat_trace_rhs(small_dirac, bump, t)
            oracle = heat_trace_erf_identity(small_dirac.matrix, b_mat, t)
            assert abs(ours - oracle) <= 1e-9

    def test_positive_orientation(self, small_dirac):
        # the calibrated sign: a positive bump gives a positive value
        assert heat_trace_rhs(small_dirac, PerturbationProfile.lorentzian(1.0), 4.0) > 0.4

    def test_quadrature_refinement(self, small_dirac):
        bump = PerturbationProfile.lorentzian(1.0)
        eight = heat_trace_rhs(small_dirac, bump, 4.0, 8)
        sixteen = heat_trace_rhs(small_dirac, bump, 4.0, 16)
        assert abs(eight - sixteen) <= 1e-6

    def test_rejects_bad_time(self, small_dirac):
        with pytest.raises(DomainError):
            heat_trace_rhs(small_dirac, PerturbationProfile.lorentzian(1.0), -1.0)

    def test_matrix_valued_profile(self):
        grid = GridSpec(16.0, 64)
        a1 = discretize_dirac(grid, dim=2)
        bump = PerturbationProfile(
            evaluator=lambda x: np.diag([1.0, 0.5]) / (1.0 + x * x), dim=2
        )
        b_mat = multiplication_operator(bump, grid)
        ours = heat_trace_rhs(a1, bump, 2.0)
        oracle = heat_trace_erf_identity(a1.matrix, b_mat, 2.0)
        assert abs(ours - oracle) <= 1e-9


class TestWittenEstimate:
    def test_zero_perturbation_plateau(self, small_dirac):
        est = witten_index_estimate(small_dirac, PerturbationProfile.zero())
        assert abs(est.plateau_value) <= 1e-10
        assert est.uncertainty <= 1e-10

    def test_unit_bump_small_grid(self, small_dirac):
        est = witten_index_estimate(small_dirac, PerturbationProfile.lorentzian(1.0))
        # finite width biases the limit to 2 arctan(L) / (2 pi)
        assert est.plateau_value == pytest.approx(
            2.0 * np.arctan(SMALL_GRID.half_width) / (2.0 * np.pi), abs=1e-3
        )

    def test_schedule_respects_ceiling(self, small_dirac):
        est = witten_index_estimate(small_dirac, PerturbationProfile.lorentzian(1.0))
        assert np.all(est.t_samples <= SMALL_GRID.t_ceiling() + 1e-12)
        assert len(est.t_samples) >= 5

    def test_default_schedule_shape(self):
        sched = default_t_schedule(GridSpec(40.0, 1024))
        assert len(sched) >= 8
        assert sched[0] == pytest.approx(1.0)
        assert np.all(np.diff(sched) > 0)

    def test_short_schedule_rejected(self, small_dirac):
        with pytest.raises(DomainError):
            witten_index_estimate(
                small_dirac, PerturbationProfile.lorentzian(1.0),
                np.array([1.0, 2.0, 4.0]),
            )

    def test_schedule_beyond_ceiling_inconclusive(self, small_dirac):
        sched = np.geomspace(50.0, 5000.0, 9)  # all beyond the ceiling
        with pytest.raises(NonConvergenceError):
            witten_index_estimate(
                small_dirac, PerturbationProfile.lorentzian(1.0), sched
            )


class TestClosedForm:
    def test_unit_lorentzian_is_half(self):
        assert witten_index_closed_form(
            PerturbationProfile.lorentzian(1.0)
        ) == pytest.approx(0.5, abs=1e-10)

    def test_zero(self):
        assert witten_index_closed_form(PerturbationProfile.zero()) == 0.0

    @pytest.mark.parametrize("mu", [0.3, 2.7])
    def test_scaling(self, mu):
        assert witten_index_closed_form(
            PerturbationProfile.lorentzian(mu)
        ) == pytest.approx(mu / 2.0, abs=1e-9)

    def test_no_decay_rejected(self):
        with pytest.raises(InsufficientDecayError):
            witten_index_closed_form(PerturbationProfile(evaluator=lambda x: 1.0))

    def test_matrix_trace(self):
        bump = PerturbationProfile(
            evaluator=lambda x: np.diag([1.0, 2.0]) / (1.0 + x * x), dim=2
        )
        assert witten_index_closed_form(bump) == pytest.approx(1.5, abs=1e-9)


class TestThetaProfiles:
    def test_logistic_passes_checks(self):
        ThetaProfile.logistic().check_on(GridSpec(16.0, 48))

    def test_erf_passes_checks(self):
        ThetaProfile.erf_profile().check_on(GridSpec(16.0, 48))

    def test_arctan_needs_honest_tolerance(self):
        grid = GridSpec(16.0, 48)
        with pytest.raises(DomainError):
            ThetaProfile.arctan_profile(tail_tol=1e-6).check_on(grid)
        ThetaProfile.arctan_profile(tail_tol=0.05).check_on(grid)

    def test_non_monotone_profile_rejected(self):
        bad = ThetaProfile(
            evaluator=lambda t: 0.5 * (1.0 + np.tanh(t)) + 0.05 * np.sin(5 * t),
            tag="wiggly",
        )
        with pytest.raises(DomainError):
            bad.check_on(GridSpec(16.0, 48))


SUSPENSION_X_GRID = GridSpec(8.0, 24)
SUSPENSION_T_GRID = GridSpec(10.0, 24)


@pytest.fixture(scope="module")
def small_suspension():
    a1 = discretize_dirac(SUSPENSION_X_GRID)
    bump = PerturbationProfile.lorentzian(1.0)
    sus = build_suspension(
        a1, bump, ThetaProfile.logistic(), SUSPENSION_T_GRID, SUSPENSION_X_GRID
    )
    return a1, bump, sus, suspension_spectrum(sus)


class TestSuspension:
    X_GRID = SUSPENSION_X_GRID
    T_GRID = SUSPENSION_T_GRID

    def test_zero_perturbation_commutes(self):
        a1 = discretize_dirac(self.X_GRID)
        sus = build_suspension(
            a1, PerturbationProfile.zero(), ThetaProfile.logistic(),
            self.T_GRID, self.X_GRID,
        )
        m = sus.matrix
        assert np.max(np.abs(m @ m.conj().T - m.conj().T @ m)) <= 1e-8

    def test_zero_perturbation_trace_vanishes(self):
        a1 = discretize_dirac(self.X_GRID)
        sus = build_suspension(
            a1, PerturbationProfile.zero(), ThetaProfile.logistic(),
            self.T_GRID, self.X_GRID,
        )
        assert abs(ptf_lhs(sus, 1.0)) <= 1e-9

    def test_nonzero_perturbation_not_normal(self, small_suspension):
        _, _, sus, _ = small_suspension
        m = sus.matrix
        assert np.max(np.abs(m @ m.conj().T - m.conj().T @ m)) > 0.01

    def test_adjoint_consistency(self, small_suspension):
        a1, bump, sus, _ = small_suspension
        d_t = spectral_time_derivative(self.T_GRID)
        b_mat = multiplication_operator(bump, self.X_GRID)
        independent = (
            np.kron(-d_t, np.eye(self.X_GRID.points))
            + np.kron(np.eye(self.T_GRID.points), a1.matrix)
            + np.kron(np.diag(sus.theta_samples.astype(complex)), b_mat)
        )
        assert np.max(np.abs(sus.matrix.conj().T - independent)) <= 1e-10

    def test_full_trace_difference_vanishes(self, small_suspension):
        # guard: DD* and D*D are isospectral for square matrices, which is
        # why the reported trace runs over the rise window only
        _, _, _, spectrum = small_suspension
        full = np.sum(np.exp(-1.0 * spectrum.right_values)) - np.sum(
            np.exp(-1.0 * spectrum.left_values)
        )
        assert abs(full) <= 1e-8

    def test_window_trace_matches_rhs(self, small_suspension):
        a1, bump, sus, spectrum = small_suspension
        for t in (0.5, 1.0, 2.0):
            lhs = ptf_lhs(sus, t, spectrum)
            rhs = heat_trace_rhs(a1, bump, t)
            assert abs(lhs - rhs) <= 0.05 * max(abs(rhs), 0.1)

    def test_narrow_time_grid_rejected(self):
        a1 = discretize_dirac(self.X_GRID)
        with pytest.raises(DomainError):
            build_suspension(
                a1, PerturbationProfile.lorentzian(1.0),
                ThetaProfile.logistic(), GridSpec(5.0, 24), self.X_GRID,
            )

    def test_grid_mismatch_rejected(self):
        a1 = discretize_dirac(self.X_GRID)
        with pytest.raises(DomainError):
            build_suspension(
                a1, PerturbationProfile.lorentzian(1.0),
                ThetaProfile.logistic(), self.T_GRID, GridSpec(8.0, 32),
            )


class TestComposition:
    def test_closed_form_linearity_various_shapes(self, small_dirac):
        gauss = PerturbationProfile(evaluator=lambda x: 0.8 * np.exp(-x * x))
        lorentz = PerturbationProfile.lorentzian(0.6)
        cf_sum = witten_index_closed_form(gauss) + witten_index_closed_form(lorentz)
        cf_total = witten_index_closed_form(gauss + lorentz)
        assert abs(cf_sum - cf_total) <= 1e-12

    def test_small_grid_composition(self, small_dirac):
        report = check_composition(
            small_dirac,
            PerturbationProfile.lorentzian(0.7),
            PerturbationProfile.lorentzian(0.9),
        )
        assert report.closed_form_residual <= 1e-12
        assert report.heat_residual <= 0.02

    def test_path_split_trivial_leg(self, small_dirac):
        report = path_splitting_check(
            small_dirac,
            PerturbationProfile.lorentzian(0.7),
            PerturbationProfile.zero(),
            2.0,
        )
        assert report.residual <= 1e-9

    def test_path_split_default_profiles(self, small_dirac):
        report = path_splitting_check(
            small_dirac,
            PerturbationProfile.lorentzian(0.7),
            PerturbationProfile.lorentzian(0.9),
            2.0,
        )
        scale = max(abs(report.direct), abs(report.first_leg), abs(report.second_leg))
        assert report.residual <= 1e-3 * scale

    def test_path_split_refines(self, small_dirac):
        b1 = PerturbationProfile.lorentzian(0.7)
        b2 = PerturbationProfile.lorentzian(0.9)
        coarse = path_splitting_check(small_dirac, b1, b2, 2.0, 4)
        fine = path_splitting_check(small_dirac, b1, b2, 2.0, 8)
        assert fine.residual <= coarse.residual + 1e-15


class TestTraceClassDiagnostic:
    def test_zero_profile(self, small_dirac):
        report = relative_trace_class_diagnostic(
            small_dirac, PerturbationProfile.zero(), 1
        )
        assert np.all(report.singular_values == 0)
        assert report.plausibly_trace_class

    def test_lorentzian_p1_stable(self):
        grid = GridSpec(20.0, 1024)
        a1 = discretize_dirac(grid)
        report = relative_trace_class_diagnostic(
            a1, PerturbationProfile.lorentzian(1.0), 1
        )
        assert abs(report.refinement_ratio - 1.0) <= 0.02
        assert report.plausibly_trace_class

    def test_constant_p0_grows_with_width(self):
        # same spacing, doubled box: a trace-class perturbation would keep
        # its sum; the flat profile doubles it
        flat = PerturbationProfile(evaluator=lambda x: 1.0)
        sums = []
        for width, points in ((20.0, 512), (40.0, 1024)):
            report = relative_trace_class_diagnostic(
                discretize_dirac(GridSpec(width, points)), flat, 0
            )
            assert not report.plausibly_trace_class
            sums.append(report.partial_sums[-1])
        assert sums[1] >= 1.9 * sums[0]

    def test_negative_p_rejected(self, small_dirac):
        with pytest.raises(DomainError):
            relative_trace_class_diagnostic(
                small_dirac, PerturbationProfile.lorentzian(1.0), -1
            )


class TestLatticeOperator:
    def test_hermitian_flag_checked(self):
        bad = np.zeros((SMALL_GRID.points, SMALL_GRID.points), dtype=complex)
        bad[0, 1] = 1.0
        with pytest.raises(Exception):
            LatticeOperator(matrix=bad, grid=SMALL_GRID, hermitian=True)
