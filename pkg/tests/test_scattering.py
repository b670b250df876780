"""Scattering checks: transfer matrices, bound states, phase balance, sigma."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opindex.errors import (
    DomainError,
    InconclusiveError,
    RangeError,
)
from opindex.scattering import (
    Potential,
    bound_states,
    build_sigma,
    corrected_index,
    default_k_grid,
    exp_resample,
    find_resonant_depth,
    levinson_check,
    phase_winding,
    resonance_detect,
    scattering_matrix,
    transfer_matrices,
    transfer_matrix,
    witten_index_sigma,
)
from opindex.witten import GridSpec

from oracles import (
    rk4_transfer,
    square_well_bound_count,
    square_well_transfer,
    square_well_transmission_sq,
)

WELL = Potential.square_well(2.0, 1.0)


class TestTransferMatrix:
    def test_free_potential_identity(self):
        t = transfer_matrix(Potential.free(), 1.0)
        assert np.max(np.abs(t - np.eye(2))) <= 1e-12

    def test_determinant_one(self):
        t = transfer_matrix(WELL, 1.0)
        det = t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]
        assert abs(det - 1.0) <= 1e-8

    def test_matches_interface_matching_oracle(self):
        ours = transfer_matrix(WELL, 1.0)
        oracle = square_well_transfer(2.0, 1.0, 1.0)
        assert np.max(np.abs(ours - oracle)) <= 1e-6

    def test_matches_rk4_oracle_on_smooth_potential(self):
        # RK4 needs a smooth integrand for its order; the slab method needs
        # a fine step for a varying potential, so both are refined here
        def bump(x):
            x = np.asarray(x, dtype=float)
            inside = np.abs(x) < 1.0
            return np.where(inside, -1.5 * np.cos(np.pi * x / 2.0) ** 2, 0.0)

        smooth = Potential(evaluator=bump, support_radius=1.0)
        ours = transfer_matrices(smooth, np.array([1.3]), step=5e-4)[0]
        oracle = rk4_transfer(smooth, 1.3, step=2e-3)
        assert np.max(np.abs(ours - oracle)) <= 1e-6

    def test_rejects_nonpositive_k(self):
        with pytest.raises(DomainError):
            transfer_matrix(WELL, 0.0)

    @settings(max_examples=20, deadline=None)
    @given(
        st.floats(min_value=0.1, max_value=30.0),
        st.floats(min_value=0.5, max_value=2.0),
        st.floats(min_value=1e-3, max_value=50.0),
    )
    def test_flux_conservation_everywhere(self, depth, width, k):
        well = Potential.square_well(depth, width)
        t = transfer_matrices(well, np.array([k]))[0]
        s = np.array([
            [1.0 / t[1, 1], t[0, 1] / t[1, 1]],
            [-t[1, 0] / t[1, 1], 1.0 / t[1, 1]],
        ])
        assert np.max(np.abs(s.conj().T @ s - np.eye(2))) <= 1e-8
        assert abs(s[0, 0] - s[1, 1]) <= 1e-8  # transmission reciprocity


class TestScatteringCurve:
    def test_free_curve_is_identity(self):
        curve = scattering_matrix(Potential.free(), default_k_grid(1e-3, 40.0, 64))
        assert np.max(np.abs(curve.s_matrices - np.eye(2))) <= 1e-10

    def test_transmission_matches_textbook(self):
        curve = scattering_matrix(WELL, default_k_grid(1e-2, 20.0, 96))
        ours = np.abs(curve.transmission()) ** 2
        oracle = square_well_transmission_sq(2.0, 1.0, curve.k_samples)
        assert np.max(np.abs(ours - oracle)) <= 1e-6

    def test_unitarity_across_grid(self):
        curve = scattering_matrix(WELL)
        assert np.max(curve.unitarity_residuals) <= 1e-8

    def test_bad_grid_rejected(self):
        with pytest.raises(DomainError):
            scattering_matrix(WELL, np.array([0.5, 0.4, 0.3]))

    def test_coarse_grid_auto_refined(self):
        # a deep well winds fast at low k; the curve must densify itself
        deep = Potential.square_well(25.0, 1.0)
        coarse = default_k_grid(1e-3, 40.0, 24)
        curve = scattering_matrix(deep, coarse)
        assert len(curve.k_samples) > 24
        args = np.angle(curve.det())
        incr = np.abs((np.diff(args) + np.pi) % (2 * np.pi) - np.pi)
        assert np.max(incr) <= np.pi / 4


class TestBoundStates:
    def test_free_potential(self):
        assert bound_states(Potential.free()) == 0

    @pytest.mark.parametrize("depth", [0.5, 1.0, 2.0, 5.0, 10.0, 25.0])
    def test_matches_transcendental_oracle(self, depth):
        well = Potential.square_well(depth, 1.0)
        assert bound_states(well) == square_well_bound_count(depth, 1.0)

    def test_monotone_in_depth(self):
        counts = [bound_states(Potential.square_well(d, 1.0))
                  for d in (0.5, 2.0, 5.0, 10.0, 25.0)]
        assert counts == sorted(counts)

    def test_narrow_grid_rejected(self):
        with pytest.raises(DomainError):
            bound_states(WELL, GridSpec(4.0, 64))


class TestPhaseWinding:
    def test_free_curve(self):
        curve = scattering_matrix(Potential.free(), default_k_grid(1e-3, 40.0, 64))
        assert abs(phase_winding(curve)) <= 1e-10

    def test_single_bound_state_winding(self, scan_curves):
        # one bound state, no resonance: the determinant unwinds by -pi
        winding = phase_winding(scan_curves[2.0])
        assert abs(winding - (-np.pi)) <= 0.05 * np.pi

    def test_refinement_stability(self):
        coarse = scattering_matrix(WELL, default_k_grid(1e-3, 40.0, 160))
        fine = scattering_matrix(WELL, default_k_grid(1e-3, 40.0, 320))
        assert abs(phase_winding(coarse) - phase_winding(fine)) <= 1e-3


class TestResonanceDetection:
    def test_free_line_is_resonant(self):
        # t == 1 identically: the flat threshold is a half-bound state
        flag, evidence = resonance_detect(Potential.free())
        assert flag == 1
        assert evidence == pytest.approx(1.0, abs=1e-6)

    def test_generic_well_not_resonant(self):
        flag, evidence = resonance_detect(WELL)
        assert flag == 0
        assert evidence <= 1e-3

    def test_tuned_well_resonant(self, resonant_well):
        flag, evidence = resonance_detect(resonant_well)
        assert flag == 1
        assert evidence >= 0.99

    def test_guard_band_is_inconclusive(self):
        # detune until the extrapolated threshold transmission lands inside
        # the guard band; the detector must refuse rather than guess
        base = find_resonant_depth()
        lo, hi = 0.0, 0.05
        flagged = False
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            well = Potential.square_well(base - mid, 1.0)
            try:
                flag, _ = resonance_detect(well)
            except InconclusiveError:
                flagged = True
                break
            if flag == 1:
                lo = mid
            else:
                hi = mid
        assert flagged

    def test_head_outside_range_rejected(self):
        with pytest.raises(DomainError):
            resonance_detect(WELL, k_head=np.array([0.5, 0.2]))

    def test_resonant_depth_location(self, resonant_depth):
        assert resonant_depth == pytest.approx((np.pi / 2.0) ** 2, abs=1e-6)


class TestLevinson:
    def test_free_potential(self):
        report = levinson_check(Potential.free())
        assert report.n_bound == 0
        assert abs(report.phase_winding) <= 1e-6
        assert report.residual <= 1e-6
        assert report.accepted

    def test_scan_wells_accepted(self, levinson_reports, bound_counts):
        reports, _, _ = levinson_reports
        for depth, report in reports.items():
            assert report.accepted, f"depth {depth}: residual {report.residual}"
            assert report.n_bound == bound_counts[depth]
            assert report.resonance_flag == 0

    def test_resonant_well_accepted(self, levinson_reports):
        _, resonant, _ = levinson_reports
        assert resonant.resonance_flag == 1
        assert resonant.accepted
        assert resonant.n_bound == 1

    def test_report_carries_convention(self, levinson_reports):
        reports, _, _ = levinson_reports
        assert "arg det S" in reports[2.0].convention


class TestExpResample:
    def test_free_curve_constant_identity(self):
        curve = scattering_matrix(
            Potential.free(), default_k_grid(1e-3, 2000.0, 96)
        )
        lcurve = exp_resample(curve)
        assert np.max(np.abs(lcurve.s_matrices - np.eye(2))) <= 1e-10
        assert np.max(np.abs(lcurve.s_minus_inf - np.eye(2))) <= 1e-10

    def test_uniform_lambda_spacing(self, scan_curves):
        lcurve = exp_resample(scan_curves[2.0])
        assert np.allclose(np.diff(lcurve.lam), np.diff(lcurve.lam)[0])

    def test_generic_threshold_limit_is_parity_diagonal(self, scan_curves):
        for depth in (0.5, 2.0, 25.0):
            lcurve = exp_resample(scan_curves[depth])
            limit = lcurve.s_minus_inf
            target = np.diag([1.0, -1.0])
            dist = min(
                np.max(np.abs(limit - target)), np.max(np.abs(limit + target))
            )
            assert dist <= 0.05, f"depth {depth}"

    def test_det_continuous_along_line(self, scan_curves):
        lcurve = exp_resample(scan_curves[25.0])
        dets = (lcurve.s_matrices[:, 0, 0] * lcurve.s_matrices[:, 1, 1]
                - lcurve.s_matrices[:, 0, 1] * lcurve.s_matrices[:, 1, 0])
        jumps = np.abs(np.diff(np.angle(dets)))
        jumps = np.minimum(jumps, 2.0 * np.pi - jumps)
        assert np.max(jumps) <= np.pi / 2

    def test_short_curve_rejected(self):
        curve = scattering_matrix(WELL, default_k_grid(0.1, 10.0, 48))
        with pytest.raises(RangeError):
            exp_resample(curve)


class TestSigmaFactor:
    def test_trivial_branch(self):
        sigma = build_sigma(np.eye(2, dtype=complex))
        assert sigma.branch == "trivial"
        assert witten_index_sigma(sigma) == 0.0

    def test_antidiagonal_branch_both_signs(self):
        for target in (np.diag([1.0, -1.0]), np.diag([-1.0, 1.0])):
            sigma = build_sigma(target.astype(complex))
            assert sigma.branch == "antidiagonal-limit"
            low = sigma.evaluator(-1e9)
            high = sigma.evaluator(1e9)
            assert np.max(np.abs(low - target)) <= 1e-8
            assert np.max(np.abs(high - np.eye(2))) <= 1e-8
            assert witten_index_sigma(sigma) == pytest.approx(0.5, abs=1e-6)

    def test_general_branch_theta(self):
        limit = np.diag([np.exp(-1j * np.pi / 3), np.exp(1j * np.pi / 3)])
        sigma = build_sigma(limit)
        assert sigma.branch == "general-unitary"
        assert sigma.theta_angle == pytest.approx(np.pi / 3)
        assert np.max(np.abs(sigma.evaluator(-1e9) - limit)) <= 1e-6
        assert witten_index_sigma(sigma) == pytest.approx(0.0, abs=1e-6)

    def test_general_branch_rotated_conjugator(self):
        # a non-diagonal det = +1 limit exercises the eigenframe path
        c, s = np.cos(0.4), np.sin(0.4)
        u = np.array([[c, -s], [s, c]], dtype=complex)
        limit = u @ np.diag([np.exp(-1j * 0.8), np.exp(1j * 0.8)]) @ u.conj().T
        sigma = build_sigma(limit)
        assert sigma.branch == "general-unitary"
        assert np.max(np.abs(sigma.evaluator(-1e9) - limit)) <= 1e-6
        assert witten_index_sigma(sigma) == pytest.approx(0.0, abs=1e-6)

    def test_minus_identity_limit(self):
        sigma = build_sigma(-np.eye(2, dtype=complex))
        assert sigma.branch == "general-unitary"
        assert sigma.theta_angle == pytest.approx(np.pi)
        assert witten_index_sigma(sigma) == pytest.approx(0.0, abs=1e-6)

    def test_derivative_consistency(self):
        # sigma* dsigma/dlambda = i Phi_sigma links evaluator and profile
        sigma = build_sigma(np.diag([1.0, -1.0]).astype(complex))
        lam, eps = 0.7, 1e-6
        numeric = sigma.evaluator(lam).conj().T @ (
            (sigma.evaluator(lam + eps) - sigma.evaluator(lam - eps)) / (2 * eps)
        )
        assert np.max(np.abs(numeric - 1j * sigma.profile(lam))) <= 1e-6

    def test_non_unitary_input_rejected(self):
        with pytest.raises(DomainError):
            build_sigma(np.diag([1.0, 0.5]).astype(complex))

    def test_unsupported_determinant_rejected(self):
        with pytest.raises(DomainError):
            build_sigma(np.diag([1.0, 1j]))


class TestCorrectedIndex:
    def test_free_with_trivial_sigma(self):
        curve = scattering_matrix(
            Potential.free(), default_k_grid(1e-3, 2000.0, 96)
        )
        lcurve = exp_resample(curve)
        sigma = build_sigma(lcurve.s_minus_inf)
        report = corrected_index(lcurve, sigma)
        assert sigma.branch == "trivial"
        assert report.fredholm_index == 0
        assert abs(report.w_scattering) <= 0.01
        assert report.w_sigma == 0.0

    def test_index_equals_bound_states(self, corrected_reports, bound_counts):
        reports, _ = corrected_reports
        for key, (report, _) in reports.items():
            assert report.fredholm_index == bound_counts[key], f"well {key}"

    def test_decomposition_sums_to_index(self, corrected_reports):
        reports, _ = corrected_reports
        for key, (report, _) in reports.items():
            assert report.residual <= 0.05, f"well {key}"

    def test_generic_wells_split_half_integer(self, corrected_reports):
        reports, _ = corrected_reports
        for key, (report, sigma) in reports.items():
            if key == "resonant":
                continue
            assert sigma.branch == "antidiagonal-limit"
            assert report.w_sigma == pytest.approx(0.5, abs=1e-6)
            doubled = 2.0 * report.w_scattering
            assert abs(doubled - round(doubled)) <= 0.1
            assert round(doubled) % 2 == 1  # genuinely half-integer

    def test_resonant_well_split_integer(self, corrected_reports):
        reports, _ = corrected_reports
        report, sigma = reports["resonant"]
        assert sigma.branch == "general-unitary"
        assert report.w_sigma == pytest.approx(0.0, abs=1e-6)
        assert abs(report.w_scattering - round(report.w_scattering)) <= 0.05

    def test_mismatched_sigma_rejected(self, scan_curves):
        lcurve = exp_resample(scan_curves[2.0])
        wrong = build_sigma(np.eye(2, dtype=complex))
        with pytest.raises(DomainError):
            corrected_index(lcurve, wrong)


class TestTraceClassEvidence:
    def test_corrected_symbol_commutator_is_summable(self, scan_curves):
        # evidence (not proof) that the corrected symbol generates a
        # trace-summable commutator with the line momentum: the singular
        # values of S sigma* [D, S sigma*] decay fast enough that their sum
        # stabilises under lambda-grid refinement
        lcurve = exp_resample(scan_curves[2.0])
        sigma = build_sigma(lcurve.s_minus_inf)
        sums = []
        for points in (200, 400):
            lam = np.linspace(lcurve.lam[0], lcurve.lam[-1], points)
            spacing = lam[1] - lam[0]
            values = np.array([
                np.interp(lam, lcurve.lam, lcurve.s_matrices[:, i, j].real)
                + 1j * np.interp(lam, lcurve.lam, lcurve.s_matrices[:, i, j].imag)
                for i in range(2) for j in range(2)
            ]).T.reshape(points, 2, 2)
            sig = np.array([sigma.evaluator(l) for l in lam])
            m = np.einsum("kij,klj->kil", values, sig.conj())
            derivative = np.gradient(m, spacing, axis=0)
            commutator_blocks = np.einsum("kji,kjl->kil", m.conj(), derivative)
            flat = np.zeros((2 * points, 2 * points), dtype=complex)
            for idx in range(points):
                flat[2 * idx:2 * idx + 2, 2 * idx:2 * idx + 2] = (
                    commutator_blocks[idx] * spacing
                )
            sums.append(np.sum(np.linalg.svd(flat, compute_uv=False)))
        assert abs(sums[1] - sums[0]) <= 0.05 * max(sums)
