"""Stability toolkit: sector angles, sharp thresholds, operator constants.

Three views of the same stability question live here:

* the sector angle alpha of a scheme, read off the boundary locus
  delta(e^{i theta}) on the unit circle,
* the threshold 1/cos(alpha) against which an operator's
  non-self-adjointness constant is compared,
* the constant itself, lambda = sup |<Av,v>| / Re <Av,v>, computed from
  the boundary of the numerical range, plus a von Neumann root test for
  the scalar rotated problem u' + rho e^{i phi} u = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .bdf_coeffs import BdfScheme
from .errors import CoercivityError, ComputationError, DomainError

# Root-modulus tolerance for the von Neumann test, and the minimal
# pairwise distance for boundary roots to count as simple.
ROOT_TOL = 1e-9
ROOT_SEPARATION = 1e-6

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _refine_max(scheme: BdfScheme, lo: float, hi: float) -> float:
    """Golden-section maximization of |arg delta(e^{i theta})| on [lo, hi]."""

    def f(theta: float) -> float:
        return abs(np.angle(npoly.polyval(np.exp(1j * theta), scheme.delta_f)))

    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > 1e-13:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
    mid = 0.5 * (a + b)
    return max(f(mid), fc, fd)


def a_alpha_angle(scheme: BdfScheme, n_samples: int = 100_000) -> float:
    """Sector angle alpha of the scheme, in degrees.

    alpha = pi - sup_theta |arg delta(e^{i theta})| over theta in
    (0, 2 pi), theta = 0 excluded because delta(1) = 0.  The sup is
    located by dense sampling and sharpened by golden-section
    refinement; the limit value pi/2 at the excluded endpoint (where
    the locus leaves the origin along the imaginary axis) is always a
    candidate, which is what returns exactly 90 degrees for k = 1, 2.

    A scheme whose sampled maximum stays within 1e-6 radians of pi/2
    is classified as A-stable and reports exactly 90 degrees: near the
    origin of the locus the real part cancels to round-off, so raw
    samples carry arg noise of that size, while a genuine sector
    defect of any supported scheme exceeds pi/2 by more than 0.07
    radians.

    Parameters
    ----------
    scheme : BdfScheme
    n_samples : int
        Number of unit-circle samples, at least 10**4.
    """
    if n_samples < 10_000:
        raise DomainError(f"n_samples must be at least 10^4, got {n_samples}")
    theta = 2.0 * math.pi * np.arange(1, n_samples + 1) / (n_samples + 1)
    values = npoly.polyval(np.exp(1j * theta), scheme.delta_f)
    if not np.any(np.abs(values) > 0.0):
        raise ComputationError("degenerate scheme: delta vanishes on all samples")
    f = np.abs(np.angle(values))
    best = int(np.argmax(f))
    if f[best] <= 0.5 * math.pi + 1e-6:
        return 90.0
    lo = theta[best - 1] if best > 0 else theta[0] * 0.5
    hi = theta[best + 1] if best + 1 < n_samples else 0.5 * (theta[-1] + 2.0 * math.pi)
    sup = max(_refine_max(scheme, lo, hi), 0.5 * math.pi)
    return math.degrees(math.pi - sup)


def lambda_threshold(scheme: BdfScheme, n_samples: int = 100_000) -> float:
    """Sharp threshold 1/cos(alpha) for the scheme.

    Returns +inf for k = 1, 2, where the angle is 90 degrees and the
    condition is void.
    """
    alpha = a_alpha_angle(scheme, n_samples)
    if scheme.k <= 2:
        return math.inf
    return 1.0 / math.cos(math.radians(alpha))


@dataclass(frozen=True)
class StabilityReport:
    """Angle, threshold and boundary locus of one scheme."""

    k: int
    alpha_deg: float
    lambda_threshold: float
    locus_theta: np.ndarray = field(repr=False, compare=False)
    locus_values: np.ndarray = field(repr=False, compare=False)


def stability_report(
    scheme: BdfScheme, n_samples: int = 100_000, locus_count: int = 256
) -> StabilityReport:
    """Bundle angle, threshold and a downsampled locus for reporting."""
    alpha = a_alpha_angle(scheme, n_samples)
    lam = math.inf if scheme.k <= 2 else 1.0 / math.cos(math.radians(alpha))
    theta = 2.0 * math.pi * np.arange(1, locus_count + 1) / (locus_count + 1)
    values = npoly.polyval(np.exp(1j * theta), scheme.delta_f)
    return StabilityReport(
        k=scheme.k,
        alpha_deg=alpha,
        lambda_threshold=lam,
        locus_theta=theta,
        locus_values=values,
    )


def _as_square_matrix(A) -> np.ndarray:
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    return M


def numerical_range_boundary(A, n_angles: int = 720) -> np.ndarray:
    """Boundary samples of the numerical range {<Av,v>/<v,v>}.

    For each direction theta, the extreme eigenvector of the Hermitian
    part of e^{-i theta} A is a support point of the (convex) numerical
    range; its Rayleigh quotient under A is a boundary point.  Returns
    the n_angles sampled boundary values.
    """
    M = _as_square_matrix(A)
    if n_angles < 360:
        raise DomainError(f"n_angles must be at least 360, got {n_angles}")
    herm = 0.5 * (M + M.conj().T)
    if np.linalg.eigvalsh(herm).min() <= 0.0:
        raise CoercivityError("Hermitian part is not positive definite")
    theta = 2.0 * math.pi * np.arange(n_angles) / n_angles
    phase = np.exp(-1j * theta)
    # stacked Hermitian parts of the rotated matrix, one per direction
    stack = 0.5 * (phase[:, None, None] * M + np.conj(phase)[:, None, None] * M.conj().T)
    _, vecs = np.linalg.eigh(stack)
    top = vecs[:, :, -1]
    return np.einsum("tj,jk,tk->t", top.conj(), M, top)


def stability_constant(A, n_angles: int = 720) -> float:
    """Non-self-adjointness constant lambda of a coercive matrix.

    lambda = sup |z| / Re z over the numerical range, attained on its
    boundary by convexity.  Equals 1 exactly when A is Hermitian
    positive definite.
    """
    boundary = numerical_range_boundary(A, n_angles)
    ratios = np.abs(boundary) / boundary.real
    return float(ratios.max())


@dataclass(frozen=True)
class CoefficientLambda:
    """Constant for a scalar diffusion coefficient a + ib.

    value is max |a+ib|/a over the grid; max_skew is max |b|/a.  The two
    are tied by value = sqrt(1 + max_skew^2).
    """

    value: float
    max_skew: float


def coefficient_lambda(a, b) -> CoefficientLambda:
    """Pointwise constant of the coefficient pair (a, b) on a grid."""
    av, bv = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if av.size == 0:
        raise DomainError("empty coefficient field")
    if av.min() <= 0.0:
        raise CoercivityError("coefficient a must be positive everywhere")
    value = float((np.hypot(av, bv) / av).max())
    max_skew = float((np.abs(bv) / av).max())
    identity = math.sqrt(1.0 + max_skew * max_skew)
    if abs(value - identity) > 1e-12 * max(1.0, value):
        raise ComputationError("ratio identity violated; coefficient fields inconsistent")
    return CoefficientLambda(value=value, max_skew=max_skew)


@dataclass(frozen=True)
class RootSweepResult:
    """Per-rho von Neumann verdicts for the rotated scalar problem."""

    k: int
    phi: float
    tau: float
    rho_grid: np.ndarray = field(repr=False, compare=False)
    max_root_moduli: np.ndarray = field(repr=False, compare=False)
    stable_flags: np.ndarray = field(repr=False, compare=False)

    @property
    def all_stable(self) -> bool:
        return bool(self.stable_flags.all())


def von_neumann_sweep(
    scheme: BdfScheme, phi: float, rho_grid, tau: float = 1.0
) -> RootSweepResult:
    """Root test of the scheme on u' + rho e^{i phi} u = 0 for each rho.

    The characteristic polynomial is
    sum_i delta_i zeta^{k-i} + tau rho e^{i phi} zeta^k  (fully implicit
    treatment); a rho is stable iff all roots lie in the closed unit
    disc (modulus <= 1 + ROOT_TOL) and any root of modulus >= 1 -
    ROOT_TOL is simple (pairwise distance > ROOT_SEPARATION).

    Parameters
    ----------
    phi : float
        Rotation angle in radians.
    rho_grid : array_like
        Positive moduli to test.
    tau : float
        Step size multiplying the spectral point.
    """
    rho = np.asarray(rho_grid, dtype=float)
    if rho.ndim != 1 or rho.size == 0:
        raise DomainError("rho_grid must be a nonempty 1-d array")
    if rho.min() <= 0.0:
        raise DomainError("all rho values must be positive")
    if tau <= 0.0:
        raise DomainError("tau must be positive")
    # delta_i multiplies zeta^{k-i}, so delta_f is already ordered
    # highest power of zeta first for the root finder
    base = scheme.delta_f.astype(complex)
    direction = np.exp(1j * phi)
    moduli = np.empty(rho.size)
    flags = np.empty(rho.size, dtype=bool)
    for j, r in enumerate(rho):
        coeffs = base.copy()
        coeffs[0] += tau * r * direction
        try:
            roots = np.roots(coeffs)
        except np.linalg.LinAlgError as exc:
            raise ComputationError(f"root finding failed at rho={r}") from exc
        mods = np.abs(roots)
        moduli[j] = mods.max() if mods.size else 0.0
        ok = moduli[j] <= 1.0 + ROOT_TOL
        if ok:
            on_circle = roots[mods >= 1.0 - ROOT_TOL]
            for p in range(len(on_circle)):
                for q in range(p + 1, len(on_circle)):
                    if abs(on_circle[p] - on_circle[q]) <= ROOT_SEPARATION:
                        ok = False
        flags[j] = ok
    return RootSweepResult(
        k=scheme.k,
        phi=float(phi),
        tau=float(tau),
        rho_grid=rho,
        max_root_moduli=moduli,
        stable_flags=flags,
    )


def angle_of_analyticity_check(
    A, lam: float, n_angles: int = 720
) -> tuple[bool, float]:
    """Sector-angle lower bound check for a coercive matrix.

    Measures theta_A = inf over numerical-range boundary points z of
    (pi/2 - |arg z|) and verifies theta_A >= arcsin(1/lam) - 1e-6
    (radians).  Returns (holds, measured angle in degrees).
    """
    if lam < 1.0:
        raise DomainError(f"lambda must be >= 1, got {lam}")
    boundary = numerical_range_boundary(A, n_angles)
    measured = float((0.5 * math.pi - np.abs(np.angle(boundary))).min())
    bound = math.asin(min(1.0, 1.0 / lam))
    return measured >= bound - 1e-6, math.degrees(measured)
