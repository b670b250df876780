"""Heat-trace index estimates for discretized 1D Dirac-type pairs.

The base operator is the self-adjoint momentum d/(i dx) realised by Fourier
spectral differentiation on a periodic grid, perturbed by a decaying
multiplication bump.  The regularised index of the pair is recovered two
independent ways:

* a closed-form integral of the bump profile, and
* the large-t plateau of the heat-trace expression
  sqrt(t/pi) * integral_1^2 tr(exp(-t A_s^2) B) ds,  A_s = A_1 + (s-1) B,

plus a third route through the suspension operator on a product grid.  On a
finite periodic grid the t -> infinity limit eventually degenerates into
zero-mode counting, so plateau detection enforces the validity ceiling
t <= (L/pi)^2 / 4 before trusting any sample.

For the suspension route note that tr f(D D^H) = tr f(D^H D) identically for
every *square* matrix D, so a full trace of the heat difference on a finite
product grid is exactly zero and carries no information.  The suspension is
therefore assembled on a time circle with a smooth rise/fall pair of
transitions (the profile goes 0 -> 1 across the first half and back across
the second), and the reported trace runs over the rise half only, where it
reproduces the line-model value; the fall half carries the compensating
contribution.  This is the same finite-truncation obstruction that forces
the defect-trace form of the shift-lattice index formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import erf as _erf

from .constants import (
    CLOSED_FORM_ABS_TOL,
    DECAY_CERT_MAX,
    PLATEAU_DIFF_TOL,
    PLATEAU_MIN_SAMPLES,
    T_CEILING_FACTOR,
    THETA_TAIL_TOL,
    WITTEN_SIGN,
)
from .errors import (
    AssemblyError,
    DomainError,
    InsufficientDecayError,
    NonConvergenceError,
)
from .linalg import EigenSystem, herm_eig, require_hermitian


# ---------------------------------------------------------------------------
# grids and operators


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-half_width, half_width)."""

    half_width: float
    points: int

    def __post_init__(self):
        if self.points < 16 or self.points % 2 != 0:
            raise DomainError(f"points must be even and >= 16, got {self.points}")
        if self.spacing >= 1.0:
            raise DomainError(
                f"grid spacing {self.spacing:.3f} too coarse for the default profiles"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    def points_array(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points)

    def t_ceiling(self) -> float:
        """Largest heat time before discrete spectral gaps fake convergence."""
        return T_CEILING_FACTOR * (self.half_width / np.pi) ** 2


DEFAULT_GRID = GridSpec(half_width=40.0, points=1024)


@dataclass(frozen=True)
class LatticeOperator:
    """Dense operator over a grid (n*dim square), usually Hermitian."""

    matrix: np.ndarray = field(repr=False)
    grid: GridSpec
    dim: int = 1
    hermitian: bool = True

    def __post_init__(self):
        n = self.grid.points * self.dim
        if self.matrix.shape != (n, n):
            raise DomainError(
                f"matrix shape {self.matrix.shape} does not match grid size {n}"
            )
        if self.hermitian:
            require_hermitian(self.matrix, 1e-10)


def discretize_dirac(grid: GridSpec, dim: int = 1) -> LatticeOperator:
    """Momentum operator d/(i dx) by Fourier spectral differentiation.

    Eigenvectors are the discrete plane waves exp(i pi m x / L) and the
    eigenvalues the frequencies m pi / L for m = -n/2 .. n/2 - 1; the matrix
    is Hermitian by construction.
    """
    n, length = grid.points, grid.half_width
    x = grid.points_array()
    freqs = np.arange(n) - n // 2
    waves = np.exp(1j * np.pi * np.outer(x, freqs) / length) / np.sqrt(n)
    lam = freqs * (np.pi / length)
    mat = (waves * lam) @ waves.conj().T
    mat = 0.5 * (mat + mat.conj().T)
    if dim > 1:
        mat = np.kron(mat, np.eye(dim))
    return LatticeOperator(matrix=mat, grid=grid, dim=dim, hermitian=True)


def spectral_time_derivative(grid: GridSpec) -> np.ndarray:
    """Skew-adjoint d/dt on the periodic grid, via the same plane waves."""
    n, length = grid.points, grid.half_width
    x = grid.points_array()
    freqs = np.arange(n) - n // 2
    waves = np.exp(1j * np.pi * np.outer(x, freqs) / length) / np.sqrt(n)
    lam = 1j * freqs * (np.pi / length)
    mat = (waves * lam) @ waves.conj().T
    return 0.5 * (mat - mat.conj().T)


# ---------------------------------------------------------------------------
# perturbation profiles


@dataclass(frozen=True)
class PerturbationProfile:
    """Hermitian multiplication bump x -> Phi(x), dim x dim valued.

    ``decay_certificate`` is sup |Phi(x)| (1 + x^2) over a wide probe grid;
    profiles whose certificate stays below the library bound are eligible
    for the closed-form index integral.  ``mu`` records the nominal scale
    of scaled families (the evaluator already includes it).
    """

    evaluator: Callable[[float], np.ndarray | float]
    dim: int = 1
    mu: float = 1.0
    decay_certificate: float = field(init=False)

    def __post_init__(self):
        probe = np.linspace(-200.0, 200.0, 2001)
        worst = 0.0
        for x in probe[:: len(probe) // 200]:
            v = self.value(float(x))
            herm = float(np.max(np.abs(v - v.conj().T)))
            if herm > 1e-10 * max(1.0, float(np.max(np.abs(v)))):
                raise DomainError(f"profile value at x={x} is not Hermitian")
        for x in probe:
            v = self.value(float(x))
            worst = max(worst, float(np.max(np.abs(v))) * (1.0 + x * x))
        object.__setattr__(self, "decay_certificate", worst)

    def value(self, x: float) -> np.ndarray:
        v = np.asarray(self.evaluator(x), dtype=complex)
        if v.ndim == 0:
            v = v.reshape(1, 1)
        if v.shape != (self.dim, self.dim):
            raise DomainError(
                f"profile value shape {v.shape} does not match dim {self.dim}"
            )
        return v

    def trace_at(self, x: float) -> float:
        return float(np.trace(self.value(x)).real)

    @property
    def has_decay(self) -> bool:
        return self.decay_certificate <= DECAY_CERT_MAX

    @classmethod
    def lorentzian(cls, mu: float = 1.0) -> "PerturbationProfile":
        """The scaled bump mu / (1 + x^2), the default example family."""
        return cls(evaluator=lambda x: mu / (1.0 + x * x), dim=1, mu=mu)

    @classmethod
    def zero(cls, dim: int = 1) -> "PerturbationProfile":
        return cls(evaluator=lambda x: np.zeros((dim, dim)), dim=dim, mu=0.0)

    def __add__(self, other: "PerturbationProfile") -> "PerturbationProfile":
        if self.dim != other.dim:
            raise DomainError("cannot add profiles of different dim")
        mine, theirs = self.value, other.value
        return PerturbationProfile(
            evaluator=lambda x: mine(x) + theirs(x),
            dim=self.dim,
            mu=self.mu + other.mu,
        )


def multiplication_operator(profile: PerturbationProfile, grid: GridSpec) -> np.ndarray:
    """Block-diagonal matrix of the bump sampled on the grid."""
    n, d = grid.points, profile.dim
    out = np.zeros((n * d, n * d), dtype=complex)
    for i, x in enumerate(grid.points_array()):
        out[i * d:(i + 1) * d, i * d:(i + 1) * d] = profile.value(float(x))
    return out


# ---------------------------------------------------------------------------
# heat-trace side


def _gauss_nodes(s_nodes: int):
    nodes, weights = leggauss(s_nodes)
    return 1.5 + 0.5 * nodes, 0.5 * weights  # mapped to s in [1, 2]


def _snode_spectra(a1: LatticeOperator, b_mat: np.ndarray, s_nodes: int):
    """Per-quadrature-node eigendata of A_s and the diagonal weights of B.

    Returns (s_weights, [(eigenvalues, <v_j|B|v_j>)]) so that the heat trace
    at any t is a cheap weighted sum afterwards.
    """
    s_vals, s_weights = _gauss_nodes(s_nodes)
    spectra = []
    for s in s_vals:
        es = herm_eig(a1.matrix + (s - 1.0) * b_mat, check=False)
        bw = np.einsum("xj,xj->j", es.vectors.conj(), b_mat @ es.vectors).real
        spectra.append((es.values, bw))
    return s_weights, spectra


def _heat_integral(spectra_pack, t: float) -> float:
    """integral_1^2 tr(exp(-t A_s^2) B) ds from precomputed eigendata."""
    s_weights, spectra = spectra_pack
    total = 0.0
    for w, (lam, bw) in zip(s_weights, spectra):
        total += w * float(np.sum(np.exp(-t * lam * lam) * bw))
    return total


def heat_trace_rhs(
    a1: LatticeOperator,
    b: PerturbationProfile,
    t: float,
    s_nodes: int = 8,
) -> float:
    """The s-integral side of the trace identity at a single heat time.

    Gauss-Legendre quadrature of tr(exp(-t A_s^2) B) over s in [1, 2] with
    A_s = A_1 + (s - 1) B, scaled by sqrt(t/pi) in the calibrated positive
    orientation (unit Lorentzian bump -> +1/2 at large t).
    """
    if t <= 0:
        raise DomainError(f"heat time must be positive, got {t}")
    if s_nodes < 2:
        raise DomainError("need at least two quadrature nodes")
    b_mat = multiplication_operator(b, a1.grid)
    if not np.any(b_mat):
        return 0.0
    pack = _snode_spectra(a1, b_mat, s_nodes)
    return WITTEN_SIGN * math.sqrt(t / math.pi) * _heat_integral(pack, t)


@dataclass(frozen=True)
class WittenEstimate:
    """Plateau of the heat-trace curve over a geometric t-schedule."""

    t_samples: np.ndarray
    rhs_values: np.ndarray
    plateau_value: float
    plateau_window: tuple[float, float]
    uncertainty: float


def default_t_schedule(grid: GridSpec) -> np.ndarray:
    """Geometric schedule (ratio sqrt 2) from t = 1 up to the grid ceiling."""
    top = min(32.0, grid.t_ceiling())
    count = max(8, int(np.floor(2.0 * np.log2(top))) + 1)
    return np.geomspace(1.0, top, count)


def _find_plateau(t_valid: np.ndarray, values: np.ndarray):
    """Longest run of consecutive samples differing by < PLATEAU_DIFF_TOL."""
    diffs = np.abs(np.diff(values))
    best = None  # (length, start, end) with end inclusive
    start = 0
    for i, d in enumerate(diffs):
        if d >= PLATEAU_DIFF_TOL:
            start = i + 1
            continue
        length = i + 1 - start + 1
        if best is None or length >= best[0]:
            best = (length, start, i + 1)
    if best is None or best[0] < PLATEAU_MIN_SAMPLES:
        raise NonConvergenceError(
            "no plateau of sufficient length in the heat-trace curve",
            t_samples=t_valid,
            values=values,
        )
    _, lo, hi = best
    window = values[lo:hi + 1]
    value = float(np.mean(window))
    return value, (float(t_valid[lo]), float(t_valid[hi])), float(
        np.max(np.abs(window - value))
    )


def witten_index_estimate(
    a1: LatticeOperator,
    b: PerturbationProfile,
    t_schedule: np.ndarray | None = None,
    s_nodes: int = 8,
) -> WittenEstimate:
    """Plateau estimate of the pair index from the heat-trace curve.

    Samples beyond the finite-grid validity ceiling are discarded before
    plateau detection; failure to find a plateau of at least five samples
    raises NonConvergenceError carrying the curve.
    """
    sched = np.asarray(
        default_t_schedule(a1.grid) if t_schedule is None else t_schedule, dtype=float
    )
    if len(sched) < 8:
        raise DomainError("t schedule must contain at least 8 points")
    if np.any(np.diff(sched) <= 0) or sched[0] <= 0:
        raise DomainError("t schedule must be positive and ascending")
    valid = sched[sched <= a1.grid.t_ceiling()]
    if len(valid) < PLATEAU_MIN_SAMPLES:
        raise NonConvergenceError(
            "t schedule has too few samples below the grid ceiling "
            f"{a1.grid.t_ceiling():.2f}",
            t_samples=sched,
            values=None,
        )
    b_mat = multiplication_operator(b, a1.grid)
    if not np.any(b_mat):
        values = np.zeros(len(valid))
    else:
        pack = _snode_spectra(a1, b_mat, s_nodes)
        values = np.array(
            [
                WITTEN_SIGN * math.sqrt(t / math.pi) * _heat_integral(pack, t)
                for t in valid
            ]
        )
    value, window, uncertainty = _find_plateau(valid, values)
    return WittenEstimate(
        t_samples=valid,
        rhs_values=values,
        plateau_value=value,
        plateau_window=window,
        uncertainty=uncertainty,
    )


def witten_index_closed_form(b: PerturbationProfile) -> float:
    """The closed-form pair index (1 / 2 pi) integral of tr Phi.

    Adaptive quadrature over the whole line; requires the decay certificate
    so the tail is controlled, and insists on an absolute error below the
    library budget.
    """
    if not b.has_decay:
        raise InsufficientDecayError(
            f"decay certificate {b.decay_certificate:.3e} exceeds "
            f"{DECAY_CERT_MAX:.1e}; closed form unavailable"
        )
    value, err = quad(
        b.trace_at, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=400
    )
    if err > CLOSED_FORM_ABS_TOL:
        raise InsufficientDecayError(
            f"quadrature error {err:.2e} above {CLOSED_FORM_ABS_TOL:.1e}"
        )
    return value / (2.0 * np.pi)


# ---------------------------------------------------------------------------
# connection profiles and the suspension operator


@dataclass(frozen=True)
class ThetaProfile:
    """Monotone connection profile rising from 0 to 1 across the line.

    ``tail_tol`` declares how close the profile provably is to its limits a
    distance half_width from the transition; grids narrower than that are
    rejected when the suspension is assembled.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    tag: str
    tail_tol: float = THETA_TAIL_TOL

    @classmethod
    def logistic(cls) -> "ThetaProfile":
        return cls(evaluator=lambda t: 0.5 * (1.0 + np.tanh(t)), tag="logistic")

    @classmethod
    def erf_profile(cls) -> "ThetaProfile":
        return cls(evaluator=lambda t: 0.5 * (1.0 + _erf(t)), tag="erf")

    @classmethod
    def arctan_profile(cls, tail_tol: float) -> "ThetaProfile":
        """Rational-tail profile 1/2 + arctan(t)/pi.

        Its tails decay only like 1/(pi t), so a finite grid can never meet
        the default end tolerance; the caller must declare an honest
        ``tail_tol`` for the grid in use.
        """
        return cls(
            evaluator=lambda t: 0.5 + np.arctan(t) / np.pi,
            tag="arctan",
            tail_tol=tail_tol,
        )

    def check_on(self, grid: GridSpec):
        """Monotonicity, end limits, and summable-derivative checks."""
        t = grid.points_array()
        vals = np.asarray(self.evaluator(t), dtype=float)
        if np.any(np.diff(vals) < -1e-12):
            raise DomainError(f"profile '{self.tag}' is not monotone on the grid")
        if abs(vals[0]) > self.tail_tol or abs(1.0 - vals[-1]) > self.tail_tol:
            raise DomainError(
                f"profile '{self.tag}' is {vals[0]:.2e}/{1 - vals[-1]:.2e} away "
                f"from its limits at the grid ends (tolerance {self.tail_tol:.1e})"
            )
        variation = float(np.sum(np.abs(np.diff(vals))))
        if variation > 1.0 + 1e-6:
            raise DomainError(
                f"profile '{self.tag}' derivative is not summable: TV={variation:.3f}"
            )


@dataclass(frozen=True)
class SuspensionOperator:
    """Dense realisation of d/dt + A_1 + theta(t) B on a (t, x) product grid.

    ``theta_samples`` are the values actually placed on the time circle
    (rise centred at -L_t/2, mirrored fall at +L_t/2) and ``window_mask``
    marks the rows of the rise half over which traces are reported.
    """

    matrix: np.ndarray = field(repr=False)
    t_grid: GridSpec
    x_grid: GridSpec
    theta: ThetaProfile
    theta_samples: np.ndarray = field(repr=False)
    window_mask: np.ndarray = field(repr=False)


def build_suspension(
    a1: LatticeOperator,
    b: PerturbationProfile,
    theta: ThetaProfile,
    t_grid: GridSpec,
    x_grid: GridSpec,
) -> SuspensionOperator:
    """Assemble the suspension of the pair (A_1, A_1 + B) on a product grid.

    The connection profile must be within its declared tail tolerance of
    0 and 1 a half-width away from the transition centre; the rise and its
    mirrored fall are placed half a period apart so the operator is smooth
    across the periodic seam.
    """
    if a1.grid != x_grid:
        raise DomainError("base operator grid does not match the x grid")
    half = t_grid.half_width
    ends = np.asarray(theta.evaluator(np.array([-half, half])), dtype=float)
    tol = max(theta.tail_tol, THETA_TAIL_TOL)
    if abs(ends[0]) > tol or abs(1.0 - ends[1]) > tol:
        raise DomainError(
            f"t grid too narrow: profile '{theta.tag}' reaches "
            f"{ends[0]:.2e}/{1 - ends[1]:.2e} at +-{half}"
        )
    t = t_grid.points_array()
    theta_samples = np.asarray(
        theta.evaluator(t + half / 2.0) - theta.evaluator(t - half / 2.0), dtype=float
    )
    d_t = spectral_time_derivative(t_grid)
    n_x = x_grid.points * b.dim
    b_mat = multiplication_operator(b, x_grid)
    mat = (
        np.kron(d_t, np.eye(n_x))
        + np.kron(np.eye(t_grid.points), a1.matrix)
        + np.kron(np.diag(theta_samples.astype(complex)), b_mat)
    )
    window_mask = np.repeat(t < 0.0, n_x)
    return SuspensionOperator(
        matrix=mat,
        t_grid=t_grid,
        x_grid=x_grid,
        theta=theta,
        theta_samples=theta_samples,
        window_mask=window_mask,
    )


@dataclass(frozen=True)
class SuspensionSpectrum:
    """Eigenvalues of D D^H and D^H D with their window row masses."""

    left_values: np.ndarray
    left_window_mass: np.ndarray
    right_values: np.ndarray
    right_window_mass: np.ndarray


def suspension_spectrum(d: SuspensionOperator) -> SuspensionSpectrum:
    """Diagonalise both heat generators once; everything per-t is cheap after."""
    m = d.matrix
    left = m @ m.conj().T
    right = m.conj().T @ m
    for name, h in (("D D*", left), ("D* D", right)):
        scale = max(float(np.max(np.abs(h))), 1e-300)
        defect = float(np.max(np.abs(h - h.conj().T))) / scale
        if defect > 1e-6:
            raise AssemblyError(f"{name} lost Hermiticity: defect {defect:.2e}")
    mask = d.window_mask
    out = {}
    for key, h in (("left", left), ("right", right)):
        es: EigenSystem = herm_eig(0.5 * (h + h.conj().T), check=False)
        mass = np.sum(np.abs(es.vectors[mask, :]) ** 2, axis=0)
        out[key] = (np.maximum(es.values, 0.0), mass)
    return SuspensionSpectrum(
        left_values=out["left"][0],
        left_window_mass=out["left"][1],
        right_values=out["right"][0],
        right_window_mass=out["right"][1],
    )


def ptf_lhs(
    d: SuspensionOperator,
    t: float,
    spectrum: SuspensionSpectrum | None = None,
) -> float:
    """Heat-trace difference of the suspension over the rise window.

    Computes tr_W(exp(-t D^H D) - exp(-t D D^H)) where W restricts rows to
    the half of the time circle holding the 0 -> 1 transition.  With B = 0
    the generators coincide and the value vanishes identically; otherwise
    it matches the s-integral side of the trace identity.
    """
    if t <= 0:
        raise DomainError(f"heat time must be positive, got {t}")
    sp = spectrum if spectrum is not None else suspension_spectrum(d)
    right = float(np.sum(np.exp(-t * sp.right_values) * sp.right_window_mass))
    left = float(np.sum(np.exp(-t * sp.left_values) * sp.left_window_mass))
    return WITTEN_SIGN * (right - left)


# ---------------------------------------------------------------------------
# composition and path independence


@dataclass(frozen=True)
class CompositionReport:
    """Residuals of the pair-index addition rule along a two-step path."""

    closed_form_residual: float
    heat_residual: float
    closed_forms: tuple[float, float, float]
    estimates: tuple[WittenEstimate, WittenEstimate, WittenEstimate]


def check_composition(
    a1: LatticeOperator,
    b1: PerturbationProfile,
    b2: PerturbationProfile,
    t_schedule: np.ndarray | None = None,
    s_nodes: int = 8,
) -> CompositionReport:
    """Verify index(A1,A2) + index(A2,A3) = index(A1,A3), two ways.

    A2 = A1 + B1 and A3 = A2 + B2.  The closed forms satisfy the rule by
    linearity of the profile integral; the heat estimates satisfy it up to
    plateau uncertainty.
    """
    if not (b1.has_decay and b2.has_decay):
        raise InsufficientDecayError("both profiles need decay certificates")
    b3 = b1 + b2
    cf = (
        witten_index_closed_form(b1),
        witten_index_closed_form(b2),
        witten_index_closed_form(b3),
    )
    a2 = LatticeOperator(
        matrix=a1.matrix + multiplication_operator(b1, a1.grid),
        grid=a1.grid,
        dim=a1.dim,
        hermitian=True,
    )
    est = (
        witten_index_estimate(a1, b1, t_schedule, s_nodes),
        witten_index_estimate(a2, b2, t_schedule, s_nodes),
        witten_index_estimate(a1, b3, t_schedule, s_nodes),
    )
    return CompositionReport(
        closed_form_residual=abs(cf[0] + cf[1] - cf[2]),
        heat_residual=abs(
            est[0].plateau_value + est[1].plateau_value - est[2].plateau_value
        ),
        closed_forms=cf,
        estimates=est,
    )


@dataclass(frozen=True)
class PathSplitReport:
    """Both evaluations of the path-split s-integral and their difference."""

    residual: float
    direct: float
    first_leg: float
    second_leg: float


def path_splitting_check(
    a1: LatticeOperator,
    b1: PerturbationProfile,
    b2: PerturbationProfile,
    t: float,
    s_nodes: int = 8,
) -> PathSplitReport:
    """Path independence of the s-integral at a fixed heat time.

    Compares the straight path A1 -> A1 + B1 + B2 against the two-leg path
    through A1 + B1; the raw integrals (no sqrt(t/pi) scaling) are returned
    together with their absolute difference.
    """
    if t <= 0:
        raise DomainError(f"heat time must be positive, got {t}")
    b3 = b1 + b2
    grid = a1.grid
    b1m = multiplication_operator(b1, grid)
    b2m = multiplication_operator(b2, grid)
    b3m = b1m + b2m

    def leg(base: np.ndarray, step: np.ndarray) -> float:
        if not np.any(step):
            return 0.0
        op = LatticeOperator(matrix=base, grid=grid, dim=a1.dim, hermitian=True)
        pack = _snode_spectra(op, step, s_nodes)
        return _heat_integral(pack, t)

    direct = leg(a1.matrix, b3m)
    first = leg(a1.matrix, b1m)
    second = leg(a1.matrix + b1m, b2m)
    return PathSplitReport(
        residual=abs(direct - (first + second)),
        direct=direct,
        first_leg=first,
        second_leg=second,
    )


# ---------------------------------------------------------------------------
# relative trace-class diagnostic


@dataclass(frozen=True)
class DecayReport:
    """Evidence about B (A + i)^(-p-1) being trace class on the grid."""

    singular_values: np.ndarray
    partial_sums: np.ndarray
    decay_exponent: float
    refinement_ratio: float
    plausibly_trace_class: bool


def relative_trace_class_diagnostic(
    a1: LatticeOperator,
    b: PerturbationProfile,
    p: int,
) -> DecayReport:
    """Singular-value decay of B (A_1 + i)^(-p-1), compared across two grids.

    The sum of singular values is recomputed on a grid with half the points
    (same width); stability within a few percent flags the perturbation as
    plausibly trace class.  Diagnostic only, never raises on bad decay.
    """
    if p < 0:
        raise DomainError("p must be a non-negative integer")

    def sv_on(grid: GridSpec) -> np.ndarray:
        a = discretize_dirac(grid, dim=b.dim).matrix
        b_mat = multiplication_operator(b, grid)
        if not np.any(b_mat):
            return np.zeros(grid.points * b.dim)
        resolvent = np.linalg.inv(a + 1j * np.eye(a.shape[0]))
        power = np.linalg.matrix_power(resolvent, p + 1)
        return np.linalg.svd(b_mat @ power, compute_uv=False)

    fine = sv_on(a1.grid)
    coarse_grid = GridSpec(a1.grid.half_width, max(16, a1.grid.points // 2))
    coarse = sv_on(coarse_grid)
    partial = np.cumsum(fine)
    total_fine = float(partial[-1]) if len(partial) else 0.0
    total_coarse = float(np.sum(coarse))
    if total_fine <= 0.0:
        return DecayReport(fine, partial, float("inf"), 1.0, True)
    ratio = total_fine / max(total_coarse, 1e-300)
    # fit sigma_k ~ k^(-alpha) over the mid range
    k0, k1 = max(1, len(fine) // 20), len(fine) // 2
    ks = np.arange(k0, k1)
    positive = fine[k0:k1] > 1e-300
    if np.count_nonzero(positive) > 8:
        slope = np.polyfit(np.log(ks[positive]), np.log(fine[k0:k1][positive]), 1)[0]
        exponent = -float(slope)
    else:
        exponent = float("inf")
    stable = abs(ratio - 1.0) <= 0.05
    return DecayReport(
        singular_values=fine,
        partial_sums=partial,
        decay_exponent=exponent,
        refinement_ratio=ratio,
        plausibly_trace_class=bool(stable),
    )
