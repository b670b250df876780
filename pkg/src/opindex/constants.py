"""Central table of numerical tolerances and sign conventions.

Every tolerance used by the library lives here, expressed relative to the
maximum absolute entry of the operator it is applied to unless the name says
otherwise.  The sign conventions below were calibrated once against the
known reference values (half-shift compression index -1, Lorentzian bump
index +1/2, attractive square well with one bound state) and are asserted
by dedicated tests; they are reported in every CLI record.
"""

import numpy as np

# --- linear algebra -------------------------------------------------------
HERMITIAN_REL_TOL = 1e-12       # max|M - M^H| <= tol * max|M| on construction
EIG_RECONSTRUCT_REL_TOL = 1e-10  # max|M - V L V^H| <= tol * max|M|
ORTHONORMAL_TOL = 1e-10          # column orthonormality of eigenvector bases
SEMIGROUP_REL_TOL = 1e-8         # heat flow composition residual, relative

# --- shift-lattice / Toeplitz ---------------------------------------------
SVD_RANK_TOL = 1e-7              # singular values below this count as zero
SUPPORT_TOL = 1e-12              # entries below tol*max count as structural zeros
SYMBOL_MIN_MODULUS = 1e-8        # winding numbers need |a| above this everywhere
UNWRAP_MAX_STEP = 0.95 * np.pi   # larger arg increments mean undersampling
WINDING_SIGN = -1                # index(compression of a) = WINDING_SIGN * winding(a)

# --- heat-trace / suspension ----------------------------------------------
# Orientation of the regularised index: positive perturbation bumps give a
# positive index.  Equivalently the heat-trace difference is taken in the
# order tr(exp(-t D^H D) - exp(-t D D^H)) and the s-integral side carries a
# plus sign; a dedicated test pins this orientation to the value +1/2 for
# the unit Lorentzian bump.
WITTEN_SIGN = +1
PLATEAU_DIFF_TOL = 5e-3          # consecutive plateau samples may differ by this
PLATEAU_MIN_SAMPLES = 5          # a plateau window must contain at least this many
THETA_TAIL_TOL = 1e-6            # connection profile must be this close to 0/1 at ends
T_CEILING_FACTOR = 0.25          # max usable t = factor * (L/pi)^2 on an L-grid
DECAY_CERT_MAX = 1e3             # sup |phi(x)| (1+x^2) beyond this means no decay
CLOSED_FORM_ABS_TOL = 1e-8       # absolute error budget for the closed-form integral

# --- scattering -------------------------------------------------------------
S_UNITARITY_TOL = 1e-8           # max|S^H S - 1| per emitted scattering matrix
TRANSFER_DET_TOL = 1e-8          # |det T - 1| for every transfer matrix
FREE_SELF_TEST_TOL = 1e-6        # V == 0 batch self-test drift bound
RESONANCE_THRESHOLD = 0.1        # extrapolated |t(0)| above this: resonance
RESONANCE_GUARD_LO = 0.02        # evidence inside [lo, threshold): inconclusive
LEVINSON_MAX_RESIDUAL = 0.05     # accepted verification reports stay below this

# Phase conventions for the bound-state count.  delta is the continuously
# unwrapped argument of det S(k); for an attractive well it *decreases* from
# threshold to high energy, so the count reads
#     N = LEVINSON_SIGN * (delta(inf) - delta(0)) / (2 pi) + (1 - M_R(0)) / 2
# where M_R(0) = 1 iff a zero-energy half-bound state exists.  The resonance
# term enters through its complement: the generic threshold carries the 1/2
# and the resonant one does not, which also makes the free line (t == 1,
# M_R = 1, delta == 0, N = 0) come out consistently with no special casing.
LEVINSON_SIGN = -1
LEVINSON_CONVENTION = (
    "delta=arg det S; N = -(delta(inf)-delta(0))/(2 pi) + (1 - M_R(0))/2"
)

# Fredholm index of the compressed scattering symbol, same orientation as
# the Toeplitz module: index = WINDING_SIGN * winding(det(S sigma^*)).
SCATTERING_INDEX_CONVENTION = "index(P S sigma^* P) = -winding(det(S sigma^*))"


def conventions() -> dict:
    """Convention tags attached to every emitted result record."""
    return {
        "witten_sign": WITTEN_SIGN,
        "winding_sign": WINDING_SIGN,
        "levinson_sign": LEVINSON_SIGN,
        "levinson_convention": LEVINSON_CONVENTION,
        "scattering_index_convention": SCATTERING_INDEX_CONVENTION,
    }
