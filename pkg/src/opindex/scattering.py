"""1D Schrodinger scattering: S-matrices, bound states, phase winding.

Units are hbar = 2m = 1, so the free Hamiltonian is -d^2/dx^2 and energy is
k^2.  Scattering matrices are assembled from transfer matrices computed by
composing exact constant-coefficient slab propagators at a fixed step; each
slab factor conserves flux exactly, so unitarity of the emitted S(k) holds
to rounding for every k and every step size, and the method is exact for
piecewise-constant wells.  A classical fixed-step RK4 integration of the
same ODE serves as an independent cross-check in the test suite.

S-matrix layout: S(k) = [[t, r_minus], [r_plus, t]] mapping the incoming
amplitude pair (from the left, from the right) to the outgoing pair (to the
right, to the left).  Both diagonal entries are the same transmission t,
which is the 1D reciprocity statement.

Phase conventions: delta(k) is the continuously unwrapped argument of
det S(k).  For an attractive well it decreases from threshold to high
energy and the bound-state count reads

    N = -(delta(inf) - delta(0)) / (2 pi) + (1 - M_R(0)) / 2,

where M_R(0) = 1 exactly when a zero-energy half-bound state exists (the
threshold behaviour |t(0)| > 0).  The generic threshold carries the 1/2;
the resonant one does not.  This calibration, fixed once against the
square-well oracle and recorded in the constants table, also makes the
free line (t == 1, M_R = 1, delta == 0, N = 0) come out with no special
casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .constants import (
    FREE_SELF_TEST_TOL,
    LEVINSON_CONVENTION,
    LEVINSON_MAX_RESIDUAL,
    LEVINSON_SIGN,
    RESONANCE_GUARD_LO,
    RESONANCE_THRESHOLD,
    S_UNITARITY_TOL,
    TRANSFER_DET_TOL,
    UNWRAP_MAX_STEP,
    WINDING_SIGN,
)
from .errors import (
    ConstructionError,
    DomainError,
    InconclusiveError,
    IntegrationError,
    RangeError,
    UndersamplingError,
)
from .witten import GridSpec

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class Potential:
    """Real potential with certified compact (or fast-decaying) support."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    family: str = "generic"
    depth: float | None = None

    def __post_init__(self):
        if self.support_radius <= 0:
            raise DomainError("support radius must be positive")
        probe = np.linspace(self.support_radius, 3.0 * self.support_radius, 7)[1:]
        tail = np.max(np.abs(np.asarray(self.evaluator(probe), dtype=float)))
        if tail > 1e-12:
            raise DomainError(
                f"potential does not vanish beyond its support radius: {tail:.2e}"
            )

    @classmethod
    def square_well(cls, depth: float, half_width: float = 1.0) -> "Potential":
        """Attractive square well V(x) = -depth on |x| < half_width."""
        if depth < 0:
            raise DomainError("well depth must be non-negative")

        def v(x):
            x = np.asarray(x, dtype=float)
            return np.where(np.abs(x) < half_width, -depth, 0.0)

        return cls(evaluator=v, support_radius=half_width,
                   family="square_well", depth=depth)

    @classmethod
    def free(cls) -> "Potential":
        return cls(evaluator=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                   support_radius=1.0, family="free", depth=0.0)


# ---------------------------------------------------------------------------
# transfer matrices


def _slab_propagators(q: np.ndarray, h: float) -> np.ndarray:
    """Exact (psi, psi') propagators over one slab of constant q^2, batched.

    q has shape (nk,); returns (nk, 2, 2).  Entries are cos(q h),
    sin(q h)/q etc., which stay real for real q^2 and conserve the
    Wronskian exactly.
    """
    qh = q * h
    c = np.cos(qh)
    s = np.where(np.abs(q) > 1e-30, np.sin(qh) / np.where(q == 0, 1.0, q), h)
    out = np.empty(q.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = -q * q * s
    out[..., 1, 1] = c
    return out


def _amplitude_frames(x: float, k: np.ndarray):
    """Matrices mapping plane-wave amplitudes (A, B) to (psi, psi') at x."""
    ep = np.exp(1j * k * x)
    em = np.exp(-1j * k * x)
    frame = np.empty(k.shape + (2, 2), dtype=complex)
    frame[..., 0, 0] = ep
    frame[..., 0, 1] = em
    frame[..., 1, 0] = 1j * k * ep
    frame[..., 1, 1] = -1j * k * em
    inv = np.empty_like(frame)
    inv[..., 0, 0] = 0.5 * em
    inv[..., 0, 1] = 0.5 * em / (1j * k)
    inv[..., 1, 0] = 0.5 * ep
    inv[..., 1, 1] = -0.5 * ep / (1j * k)
    return frame, inv


def transfer_matrices(v: Potential, k: np.ndarray, step: float = 0.01) -> np.ndarray:
    """Batched transfer matrices over [-a-1, a+1] for an array of k > 0.

    Relates the plane-wave amplitude pairs on the left to those on the
    right: (A_right, B_right) = T (A_left, B_left).  det T = 1 up to
    rounding for every k.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise DomainError("wavenumbers must be strictly positive")
    a = v.support_radius
    n_in = max(2, int(round(2.0 * a / step)))
    h_in = 2.0 * a / n_in
    mids = -a + h_in * (np.arange(n_in) + 0.5)
    v_mid = np.asarray(v.evaluator(mids), dtype=float)

    k2 = k * k
    # outer stretches are free, one exact slab each
    chain = _slab_propagators(np.sqrt(k2 + 0j), 1.0)
    for vm in v_mid:
        q = np.sqrt(k2 - vm + 0j)
        chain = np.einsum("kij,kjl->kil", _slab_propagators(q, h_in), chain)
    chain = np.einsum("kij,kjl->kil", _slab_propagators(np.sqrt(k2 + 0j), 1.0), chain)

    frame_left, _ = _amplitude_frames(-a - 1.0, k)
    _, inv_right = _amplitude_frames(a + 1.0, k)
    t_mats = np.einsum("kij,kjl,klm->kim", inv_right, chain, frame_left)

    dets = t_mats[:, 0, 0] * t_mats[:, 1, 1] - t_mats[:, 0, 1] * t_mats[:, 1, 0]
    worst = float(np.max(np.abs(dets - 1.0)))
    if worst > TRANSFER_DET_TOL:
        raise IntegrationError(f"det T drifted by {worst:.2e}; reduce the step")
    return t_mats


def transfer_matrix(v: Potential, k: float, step: float = 0.01) -> np.ndarray:
    """Single transfer matrix; see :func:`transfer_matrices`."""
    return transfer_matrices(v, np.array([float(k)]), step)[0]


def _free_self_test(k_probe: np.ndarray, step: float):
    """The stepping scheme must reproduce the identity exactly for V == 0."""
    t = transfer_matrices(Potential.free(), k_probe, step)
    drift = float(np.max(np.abs(t - np.eye(2))))
    if drift > FREE_SELF_TEST_TOL:
        raise IntegrationError(
            f"free-potential self-test drift {drift:.2e} exceeds "
            f"{FREE_SELF_TEST_TOL:.1e}"
        )


def _s_from_transfer(t_mats: np.ndarray) -> np.ndarray:
    """Convert batched transfer matrices to S = [[t, r-], [r+, t]]."""
    t22 = t_mats[:, 1, 1]
    t = 1.0 / t22
    r_plus = -t_mats[:, 1, 0] / t22
    r_minus = t_mats[:, 0, 1] / t22
    s = np.empty_like(t_mats)
    s[:, 0, 0] = t
    s[:, 0, 1] = r_minus
    s[:, 1, 0] = r_plus
    s[:, 1, 1] = t
    return s


# ---------------------------------------------------------------------------
# scattering curves


@dataclass(frozen=True)
class ScatteringCurve:
    """S(k) sampled along an ascending positive wavenumber grid."""

    k_samples: np.ndarray
    s_matrices: np.ndarray = field(repr=False)
    unitarity_residuals: np.ndarray = field(repr=False)
    potential: Potential
    step: float

    def det(self) -> np.ndarray:
        s = self.s_matrices
        return s[:, 0, 0] * s[:, 1, 1] - s[:, 0, 1] * s[:, 1, 0]

    def transmission(self) -> np.ndarray:
        return self.s_matrices[:, 0, 0]


def _unitarity_residuals(s: np.ndarray) -> np.ndarray:
    gram = np.einsum("kij,kil->kjl", s.conj(), s)
    return np.max(np.abs(gram - np.eye(2)), axis=(1, 2))


def default_k_grid(k_min: float = 1e-3, k_max: float = 40.0, count: int = 240):
    return np.geomspace(k_min, k_max, count)


def scattering_matrix(
    v: Potential,
    k_grid: np.ndarray | None = None,
    step: float = 0.01,
    node_budget: int = 4000,
) -> ScatteringCurve:
    """Scattering matrices along a k grid, densified until arg det is tame.

    The grid is refined by inserting geometric midpoints wherever the
    argument of det S jumps by more than pi/4 between neighbours; running
    past the node budget raises UndersamplingError.
    """
    k = np.asarray(default_k_grid() if k_grid is None else k_grid, dtype=float)
    if np.any(np.diff(k) <= 0) or np.any(k <= 0):
        raise DomainError("k grid must be positive and ascending")
    _free_self_test(k[:: max(1, len(k) // 8)], step)

    for _ in range(12):
        s = _s_from_transfer(transfer_matrices(v, k, step))
        args = np.angle(s[:, 0, 0] * s[:, 1, 1] - s[:, 0, 1] * s[:, 1, 0])
        incr = np.abs((np.diff(args) + np.pi) % (2 * np.pi) - np.pi)
        bad = np.nonzero(incr > np.pi / 4)[0]
        if len(bad) == 0:
            break
        if len(k) + len(bad) > node_budget:
            raise UndersamplingError(
                f"k-grid refinement exceeded the {node_budget}-node budget"
            )
        k = np.sort(np.concatenate([k, np.sqrt(k[bad] * k[bad + 1])]))
    else:
        raise UndersamplingError("arg det S still jumps after 12 refinement rounds")

    resid = _unitarity_residuals(s)
    worst = float(np.max(resid))
    if worst > S_UNITARITY_TOL:
        raise IntegrationError(
            f"unitarity residual {worst:.2e} above {S_UNITARITY_TOL:.1e}"
        )
    return ScatteringCurve(
        k_samples=k, s_matrices=s, unitarity_residuals=resid,
        potential=v, step=step,
    )


# ---------------------------------------------------------------------------
# bound states


def _dirichlet_negative_count(v: Potential, half_width: float, n: int) -> int:
    """Eigenvalues below zero of the Dirichlet finite-difference Hamiltonian.

    Sturm-sequence inertia count of the tridiagonal matrix; O(n), no
    eigenvectors.
    """
    h = 2.0 * half_width / n
    x = -half_width + h * np.arange(1, n)
    diag = 2.0 / (h * h) + np.asarray(v.evaluator(x), dtype=float)
    off2 = (1.0 / (h * h)) ** 2
    count = 0
    q = diag[0]
    if q < 0:
        count += 1
    tiny = 1e-300
    for i in range(1, len(diag)):
        if q == 0.0:
            q = tiny
        q = diag[i] - off2 / q
        if q < 0:
            count += 1
    return count


def bound_states(v: Potential, grid: GridSpec | None = None) -> int:
    """Number of strictly negative eigenvalues of -d^2/dx^2 + V.

    The count is recomputed with doubled resolution and with a doubled
    box; any disagreement raises InconclusiveError rather than guessing.
    """
    if grid is None:
        half = max(60.0, 6.0 * v.support_radius)
        grid = GridSpec(half_width=half, points=int(2 * half / 0.005))
    if grid.half_width < 5.0 * v.support_radius:
        raise DomainError(
            "grid half-width must be at least five times the support radius"
        )
    base = _dirichlet_negative_count(v, grid.half_width, grid.points)
    finer = _dirichlet_negative_count(v, grid.half_width, 2 * grid.points)
    wider = _dirichlet_negative_count(v, 2.0 * grid.half_width, 2 * grid.points)
    if not (base == finer == wider):
        raise InconclusiveError(
            f"bound-state count unstable under refinement: "
            f"{base}/{finer}/{wider}",
            detail=(base, finer, wider),
        )
    return base


# ---------------------------------------------------------------------------
# phase winding and resonance


def _unwrapped_args(values: np.ndarray) -> np.ndarray:
    args = np.angle(values)
    incr = (np.diff(args) + np.pi) % (2 * np.pi) - np.pi
    if len(incr) and float(np.max(np.abs(incr))) > UNWRAP_MAX_STEP:
        raise UndersamplingError("arg increment above the unwrap safety bound")
    return np.concatenate(([args[0]], args[0] + np.cumsum(incr)))


def phase_winding(curve: ScatteringCurve) -> float:
    """delta(inf) - delta(0) for delta = unwrapped arg det S(k).

    The zero-energy endpoint is never evaluated at k = 0: the head of the
    curve is extrapolated linearly in k, and the high-energy tail is fitted
    by delta_inf + c / k.
    """
    k = curve.k_samples
    phi = _unwrapped_args(curve.det())
    head = min(8, max(3, len(k) // 20))
    coeff = np.polyfit(k[:head], phi[:head], 1)
    delta0 = float(np.polyval(coeff, 0.0))
    tail_mask = k >= 0.5 * k[-1]
    if np.count_nonzero(tail_mask) < 3:
        tail_mask = np.zeros_like(k, dtype=bool)
        tail_mask[-3:] = True
    inv = 1.0 / k[tail_mask]
    c1, c0 = np.polyfit(inv, phi[tail_mask], 1)
    delta_inf = float(c0)
    return delta_inf - delta0


def _transmission_extrapolation(v: Potential, k_head: np.ndarray, step: float):
    """Quadratic-in-k extrapolation of |t(k)| to k = 0."""
    t_mats = transfer_matrices(v, k_head, step)
    mod_t = np.abs(1.0 / t_mats[:, 1, 1])
    design = np.vander(k_head, 3)  # columns k^2, k, 1
    coeffs, *_ = np.linalg.lstsq(design, mod_t, rcond=None)
    return max(float(coeffs[-1]), 0.0)


def resonance_detect(
    v: Potential,
    k_head: np.ndarray | None = None,
    step: float = 0.01,
):
    """Zero-energy resonance flag from the transmission threshold behaviour.

    Returns (M_R0, evidence) with evidence the extrapolated |t(0)|.
    Generic potentials have t(k) -> 0 linearly, a half-bound state keeps
    |t(0)| > 0.  Evidence inside the guard band [0.02, 0.1) is refused as
    inconclusive rather than classified.
    """
    if k_head is None:
        k_head = np.geomspace(0.01, 0.001, 8)
    k_head = np.asarray(k_head, dtype=float)
    if np.any(k_head <= 0) or np.any(k_head > 0.1):
        raise DomainError("k_head samples must lie in (0, 0.1]")
    evidence = _transmission_extrapolation(v, k_head, step)
    if evidence >= RESONANCE_THRESHOLD:
        return 1, evidence
    if evidence < RESONANCE_GUARD_LO:
        return 0, evidence
    raise InconclusiveError(
        f"threshold transmission {evidence:.3f} falls in the guard band "
        f"[{RESONANCE_GUARD_LO}, {RESONANCE_THRESHOLD}); refine k_head or "
        "perturb the well depth",
        detail=evidence,
    )


def find_resonant_depth(
    half_width: float = 1.0,
    lo: float = 2.0,
    hi: float = 3.0,
    tol: float = 1e-9,
) -> float:
    """Well depth with a zero-energy resonance, located by transmission scan.

    Maximises |t(k)| over the depth bracket by golden section at a fixed
    small k, then again at successively smaller k with a tightened bracket:
    the peak of |t(k)| in depth sits k^2 below the zero-energy resonance,
    so the last stage is corrected by that offset.  The returned depth has
    extrapolated |t(0)| within rounding of 1.
    """
    golden = (math.sqrt(5.0) - 1.0) / 2.0

    def argmax_at(k: float, a: float, b: float) -> float:
        karr = np.array([k])

        def mod_t(depth: float) -> float:
            well = Potential.square_well(depth, half_width)
            t_mat = transfer_matrices(well, karr, 0.01)
            return float(np.abs(1.0 / t_mat[0, 1, 1]))

        c = b - golden * (b - a)
        d = a + golden * (b - a)
        fc, fd = mod_t(c), mod_t(d)
        while abs(b - a) > tol:
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - golden * (b - a)
                fc = mod_t(c)
            else:
                a, c, fc = c, d, fd
                d = a + golden * (b - a)
                fd = mod_t(d)
        return 0.5 * (a + b)

    # |t(k)| peaks in depth exactly k^2 below the zero-energy resonance, so
    # each stage re-centres the bracket on its running estimate of the
    # resonant depth and shrinks with the peak width (about 4 k in depth).
    k_stage = 0.05
    estimate = argmax_at(k_stage, lo, hi) + k_stage * k_stage
    for k_stage in (0.01, 0.002, 0.0005):
        half = max(4.0 * k_stage, 1e3 * tol)
        peak = argmax_at(
            k_stage, estimate - k_stage * k_stage - half,
            estimate - k_stage * k_stage + half,
        )
        estimate = peak + k_stage * k_stage
    return estimate


# ---------------------------------------------------------------------------
# Levinson verification


@dataclass(frozen=True)
class LevinsonReport:
    """Bound-state count against the phase winding with threshold correction.

    ``residual`` is |N - predicted| with
    predicted = LEVINSON_SIGN * winding / (2 pi) + (1 - M_R0) / 2,
    the calibrated reading of the phase/bound-state relation (see the
    module docstring and the constants table).
    """

    n_bound: int
    phase_winding: float
    resonance_flag: int
    resonance_evidence: float
    residual: float
    convention: str
    accepted: bool
    curve: ScatteringCurve = field(repr=False)


def levinson_check(
    v: Potential,
    curve: ScatteringCurve | None = None,
    grid: GridSpec | None = None,
) -> LevinsonReport:
    """Assemble the three independent quantities and their residual.

    N comes from the Dirichlet eigenvalue count, the winding from the
    scattering curve, and the resonance flag from threshold transmission;
    the report is accepted when the residual stays below 0.05.
    """
    if curve is None:
        curve = scattering_matrix(v)
    n = bound_states(v, grid)
    winding = phase_winding(curve)
    flag, evidence = resonance_detect(v, step=curve.step)
    predicted = LEVINSON_SIGN * winding / (2.0 * np.pi) + 0.5 * (1 - flag)
    residual = abs(n - predicted)
    return LevinsonReport(
        n_bound=n,
        phase_winding=winding,
        resonance_flag=flag,
        resonance_evidence=evidence,
        residual=residual,
        convention=LEVINSON_CONVENTION,
        accepted=residual <= LEVINSON_MAX_RESIDUAL,
        curve=curve,
    )


# ---------------------------------------------------------------------------
# the log-energy line picture


@dataclass(frozen=True)
class LambdaCurve:
    """S reparametrised by lambda = ln(energy) on a uniform grid.

    Matrices are stored in the parity frame (Hadamard rotation of the
    transmission/reflection frame), where the threshold limit of a
    symmetric well is literally +-diag(1, -1) in the generic case.
    ``s_minus_inf`` is the polar-unitarised extrapolated threshold limit.
    """

    lam: np.ndarray
    s_matrices: np.ndarray = field(repr=False)
    s_minus_inf: np.ndarray
    s_plus_inf: np.ndarray
    unitarisation_distance: float
    frame: str = "parity"


def _polar_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def exp_resample(curve: ScatteringCurve, points: int = 600) -> LambdaCurve:
    """Reparametrise a scattering curve by lambda = ln(k^2).

    The curve must cover energies [1e-3, 1e3]; the negative-lambda end is
    the zero-energy limit and the positive end must be close to the
    identity (within 0.05) or the curve is rejected as too short.
    """
    k = curve.k_samples
    if k[0] > math.sqrt(1e-3) or k[-1] < math.sqrt(1e3):
        raise RangeError(
            f"curve covers k in [{k[0]:.3g}, {k[-1]:.3g}]; need energy "
            "coverage [1e-3, 1e3]"
        )
    s_par = np.einsum("ij,kjl,lm->kim", _HADAMARD, curve.s_matrices, _HADAMARD)
    lam_samples = 2.0 * np.log(k)
    lam = np.linspace(lam_samples[0], lam_samples[-1], points)
    resampled = np.empty((points, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            resampled[:, i, j] = np.interp(lam, lam_samples, s_par[:, i, j].real) \
                + 1j * np.interp(lam, lam_samples, s_par[:, i, j].imag)

    # threshold limit: linear-in-k extrapolation from the curve head
    head = min(8, max(3, len(k) // 20))
    limit = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            limit[i, j] = np.polyval(np.polyfit(k[:head], s_par[:head, i, j], 1), 0.0)
    unitary_limit = _polar_unitary(limit)
    distance = float(np.max(np.abs(unitary_limit - limit)))

    s_plus = resampled[-1]
    if float(np.max(np.abs(s_plus - np.eye(2)))) > 0.05:
        raise RangeError(
            "high-energy end of the curve is not close to the identity; "
            "extend the k grid"
        )
    return LambdaCurve(
        lam=lam,
        s_matrices=resampled,
        s_minus_inf=unitary_limit,
        s_plus_inf=s_plus,
        unitarisation_distance=distance,
    )


# ---------------------------------------------------------------------------
# the correction factor


@dataclass(frozen=True)
class SigmaFactor:
    """Unitary interpolation matching the threshold limit of S.

    ``branch`` is one of "trivial", "antidiagonal-limit" (det = -1 limits,
    which are +-diag(1, -1) in the parity frame) and "general-unitary"
    (det = +1, built from the eigenphase +-theta of the limit).  The
    ``profile`` is the Hermitian derivative bump Phi_sigma with
    sigma(lambda) = exp(-i Integral_lambda^inf Phi_sigma), whose scaled
    line integral is the closed-form index of the pair (D, sigma D sigma*).
    """

    branch: str
    theta_angle: float | None
    conjugator: np.ndarray | None
    evaluator: Callable[[float], np.ndarray]
    profile: Callable[[float], np.ndarray]
    target_limit: np.ndarray


def build_sigma(s_minus_infinity: np.ndarray) -> SigmaFactor:
    """Construct the correction factor for a given threshold limit.

    The input must be unitary to 1e-8 (use the polar-unitarised limit from
    :func:`exp_resample`).  Branch selection is by the determinant of the
    limit; det = -1 limits must have the +-diag(1, -1) form.
    """
    u = np.asarray(s_minus_infinity, dtype=complex)
    if u.shape != (2, 2):
        raise DomainError("threshold limit must be a 2x2 matrix")
    if float(np.max(np.abs(u.conj().T @ u - np.eye(2)))) > 1e-8:
        raise DomainError("threshold limit is not unitary to 1e-8")
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]

    if float(np.max(np.abs(u - np.eye(2)))) <= 1e-6:
        return SigmaFactor(
            branch="trivial",
            theta_angle=None,
            conjugator=None,
            evaluator=lambda lam: np.eye(2, dtype=complex),
            profile=lambda lam: np.zeros((2, 2)),
            target_limit=np.eye(2, dtype=complex),
        )

    if abs(det + 1.0) <= 0.1:
        # the limit is diag(1, -1) or diag(-1, 1); the interpolating phase
        # exp(i (arctan - pi/2)) goes in whichever slot holds the -1, so
        # that sigma ends at the identity on the high-energy side
        hot = 1 if abs(u[0, 0] - 1.0) < abs(u[0, 0] + 1.0) else 0
        target = np.diag([1.0, -1.0] if hot == 1 else [-1.0, 1.0]).astype(complex)
        if float(np.max(np.abs(u - target))) > 0.05:
            raise DomainError(
                "det = -1 threshold limit is not of the +-diag(1, -1) form"
            )

        def evaluator(lam, slot=hot):
            out = np.eye(2, dtype=complex)
            out[slot, slot] = np.exp(1j * (np.arctan(lam) - np.pi / 2))
            return out

        def profile(lam, slot=hot):
            out = np.zeros((2, 2))
            out[slot, slot] = 1.0 / (1.0 + lam * lam)
            return out

        return SigmaFactor(
            branch="antidiagonal-limit",
            theta_angle=None,
            conjugator=None,
            evaluator=evaluator,
            profile=profile,
            target_limit=target,
        )

    if abs(det - 1.0) <= 0.1:
        # unitary with unit determinant: eigenphases come in a +-theta pair
        phases, vectors = np.linalg.eig(u)
        vectors = _polar_unitary(vectors)
        angles = np.angle(phases)
        order = np.argsort(angles)  # first column carries exp(-i theta)
        vectors = vectors[:, order]
        theta = float(abs(angles[order][1]))

        def evaluator(lam, p=vectors, th=theta):
            g = np.arctan(lam) - np.pi / 2.0
            core = np.diag([np.exp(1j * th / np.pi * g), np.exp(-1j * th / np.pi * g)])
            return p @ core @ p.conj().T

        def profile(lam, p=vectors, th=theta):
            core = np.diag([th / np.pi, -th / np.pi]) / (1.0 + lam * lam)
            return (p @ core @ p.conj().T).real

        sigma = SigmaFactor(
            branch="general-unitary",
            theta_angle=theta,
            conjugator=vectors,
            evaluator=evaluator,
            profile=profile,
            target_limit=u.copy(),
        )
        check = sigma.evaluator(-1e9)
        if float(np.max(np.abs(check - u))) > 1e-6:
            raise ConstructionError(
                "general-branch interpolation does not reach the threshold limit"
            )
        return sigma

    raise DomainError(
        f"threshold limit determinant {det:.4f} is neither +1 nor -1; "
        "no correction branch applies"
    )


def witten_index_sigma(sigma: SigmaFactor) -> float:
    """Closed-form index of the pair (D, sigma D sigma*).

    Quadrature of tr Phi_sigma / (2 pi) over the line; the result must land
    within 1e-3 of {0, 1/2} or the construction is inconsistent.
    """
    if sigma.branch == "trivial":
        return 0.0
    value, _ = quad(
        lambda lam: float(np.trace(sigma.profile(lam)).real),
        -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200,
    )
    value /= 2.0 * np.pi
    nearest = 0.0 if abs(value) < abs(value - 0.5) else 0.5
    if abs(value - nearest) > 1e-3:
        raise ConstructionError(
            f"sigma index {value:.6f} is not within 1e-3 of 0 or 1/2"
        )
    return value


@dataclass(frozen=True)
class CorrectedIndexReport:
    """Fredholm index of the corrected compression and its two-part split."""

    fredholm_index: int
    w_scattering: float
    w_sigma: float
    residual: float
    endpoint_residual: float


def corrected_index(lcurve: LambdaCurve, sigma: SigmaFactor) -> CorrectedIndexReport:
    """Index of the compressed corrected symbol S sigma^* and its split.

    The corrected symbol has identity limits at both ends of the
    log-energy line (checked to 0.05), so its determinant winds an integer
    number of times; the index is minus that winding.  The split reports
    the raw det-S phase change as the pair index of (D, S^* D S) and the
    closed-form sigma term; their sum must agree with the index.
    """
    # Limits must match: sigma was built to hit the threshold limit exactly,
    # and the high-energy end of the curve is close to the identity, so the
    # corrected symbol approaches the identity at both ends of the line.
    ends = max(
        float(np.max(np.abs(sigma.target_limit - lcurve.s_minus_inf))),
        float(np.max(np.abs(lcurve.s_plus_inf - np.eye(2)))),
    )
    if ends > 0.05:
        raise DomainError(
            f"corrected-symbol limits are {ends:.3f} away from matching; "
            "sigma does not fit the threshold limit of the curve"
        )
    sig = np.array([sigma.evaluator(l) for l in lcurve.lam])
    m = np.einsum("kij,klj->kil", lcurve.s_matrices, sig.conj())
    dets = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    # The sigma factor converges only like 1/lambda, so the determinant path
    # is continued analytically beyond the sampled window: out there S sits
    # at its (unitary) limit up to exponentially small terms and
    # det(S sigma^*) = det(limit) * conj(det sigma), a closed form.
    det_lo = np.linalg.det(lcurve.s_minus_inf)
    det_hi = np.linalg.det(lcurve.s_plus_inf)
    tail_lo = -np.geomspace(1e9, abs(lcurve.lam[0]), 200)
    tail_hi = np.geomspace(lcurve.lam[-1], 1e9, 200)

    def det_sigma(lam):
        return np.array([np.linalg.det(sigma.evaluator(l)) for l in lam])

    closed = np.concatenate([
        det_lo * det_sigma(tail_lo).conj(),
        dets,
        det_hi * det_sigma(tail_hi).conj(),
    ])
    phi = _unwrapped_args(closed)
    winding = (phi[-1] - phi[0]) / (2.0 * np.pi)
    index = int(round(winding)) * WINDING_SIGN
    if abs(winding - round(winding)) > 0.05:
        raise UndersamplingError(
            f"corrected-symbol winding {winding:.6f} is not close to an integer"
        )

    dets_s = (
        lcurve.s_matrices[:, 0, 0] * lcurve.s_matrices[:, 1, 1]
        - lcurve.s_matrices[:, 0, 1] * lcurve.s_matrices[:, 1, 0]
    )
    phi_s = _unwrapped_args(dets_s)
    w_scattering = WINDING_SIGN * (phi_s[-1] - phi_s[0]) / (2.0 * np.pi)
    w_sigma = witten_index_sigma(sigma)
    return CorrectedIndexReport(
        fredholm_index=index,
        w_scattering=float(w_scattering),
        w_sigma=float(w_sigma),
        residual=abs(index - w_scattering - w_sigma),
        endpoint_residual=ends,
    )
