"""Scalar-projected free-space dipole Green function and lattice sums.

Lengths are in wavelengths (λ = 1, k = 2π); rates are in units of the single
atom decay rate γ. The coupled-dipole equations read

    p = α · (E₀ + C · Σ_{j≠i} G(r_i, r_j) p_j),

where α is the dimensionless single-atom polarizability (α = i on resonance)
and ``COUPLING`` is the constant C.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceFailure, InvalidArgument

K0 = 2.0 * np.pi

#: Coupling constant C = 6π/k (= 3λ). It is the unique value for which an
#: infinite sub-wavelength array reflects perfectly at its cooperative
#: resonance; ``calibrate_coupling`` recovers it from a lattice sum.
COUPLING = 6.0 * np.pi / K0


def green_scalar(r_a, r_b, dipole_axis=(1.0, 0.0, 0.0), k=K0):
    """Dipole-projected Green function between two points.

    G = e^{ikr}/(4πr)·[(1 + (ikr − 1)/(kr)²) + (3 − 3ikr − (kr)²)/(kr)²·(r_d/r)²]
    """
    d = np.asarray(r_a, dtype=float) - np.asarray(r_b, dtype=float)
    r = np.linalg.norm(d)
    if r == 0.0:
        raise InvalidArgument("Green function is singular for coincident points")
    axis = np.asarray(dipole_axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    kr = k * r
    cos2 = (d @ axis / r) ** 2
    return (np.exp(1j * kr) / (4.0 * np.pi * r)
            * ((1.0 + (1j * kr - 1.0) / kr**2) + (3.0 - 3j * kr - kr**2) / kr**2 * cos2))


def green_block(obs, src, dipole_axis, k=K0):
    """Matrix G(obs_i, src_j); coincident pairs give 0."""
    return kernels.green_block(np.ascontiguousarray(obs, dtype=float),
                               np.ascontiguousarray(src, dtype=float),
                               np.ascontiguousarray(dipole_axis, dtype=float), float(k))


@dataclass(frozen=True)
class GreenMatrix:
    entries: np.ndarray
    k: float = K0

    @property
    def n(self):
        return self.entries.shape[0]


def green_matrix(geom, k=K0):
    """Interaction matrix over the active atoms of ``geom`` (zero diagonal)."""
    if geom.n_active == 0:
        raise InvalidArgument("geometry has no active atoms")
    pos = np.ascontiguousarray(geom.active_positions)
    entries = kernels.green_matrix(pos, np.ascontiguousarray(geom.dipole_axis), float(k))
    return GreenMatrix(entries=entries, k=k)


@dataclass(frozen=True)
class CollectiveMode:
    """Cooperative shift and decay correction of the lattice mode with momentum ``k_perp``."""

    k_perp: tuple
    delta_k: float
    gamma_k: float
    lattice_sum: complex
    convergence: float
    truncation_radius: float


def lattice_green_sum(k_perp, spacing, truncation_radius, dipole_axis=(1.0, 0.0, 0.0), k=K0):
    """Σ_{j≠0} e^{i k_perp·r_j} G(0, r_j) over an infinite square lattice.

    The sum is cut at ``truncation_radius`` with a Gaussian window of width
    R/4; the windowed oscillatory tail converges like 1/R².
    ``k_perp`` is in units of k₀.
    """
    kx, ky = (float(c) * k for c in k_perp)
    axis = np.ascontiguousarray(dipole_axis, dtype=float)
    R = float(truncation_radius)
    return complex(kernels.lattice_sum(float(spacing), kx, ky, axis, float(k), R / 4.0, R))


def _shift_and_decay(s):
    # Δ − iΓ/2 = −(C/2)·S with C = COUPLING; matches the coupled-dipole solver.
    return -0.5 * COUPLING * s.real, COUPLING * s.imag


def collective_shift(k_perp, spacing, truncation_radius=200.0, dipole_axis=(1.0, 0.0, 0.0),
                     tol=1e-3):
    """Cooperative shift Δ_k and decay correction Γ_k (units of γ).

    The convergence estimate is the larger of |ΔΔ| and |ΔΓ| between the sums
    truncated at R and R/2. Raises ``ConvergenceFailure`` above ``tol``.
    """
    if not 0.0 < spacing < 1.0:
        raise InvalidArgument(f"spacing must lie in (0, 1), got {spacing}")
    if truncation_radius < 20.0:
        raise InvalidArgument("truncation_radius must be at least 20 wavelengths")
    s_full = lattice_green_sum(k_perp, spacing, truncation_radius, dipole_axis)
    s_half = lattice_green_sum(k_perp, spacing, truncation_radius / 2.0, dipole_axis)
    d1, g1 = _shift_and_decay(s_full)
    d2, g2 = _shift_and_decay(s_half)
    estimate = max(abs(d1 - d2), abs(g1 - g2))
    if estimate > tol:
        raise ConvergenceFailure(
            f"lattice sum not converged at R={truncation_radius}: estimate {estimate:.3g}",
            estimate=estimate)
    return CollectiveMode(k_perp=tuple(float(c) for c in k_perp), delta_k=d1, gamma_k=g1,
                          lattice_sum=s_full, convergence=estimate,
                          truncation_radius=float(truncation_radius))


def calibrate_coupling(spacing=0.2, truncation_radius=200.0):
    """Coupling constant that makes the infinite array a unit-reflectivity mirror.

    At normal incidence and δ = Δ the sheet reflects
    r = −(C/2ka²) / (1 + C·Im S), so |r| = 1 fixes C = 1 / (1/(2ka²) − Im S).
    """
    s = lattice_green_sum((0.0, 0.0), spacing, truncation_radius)
    return 1.0 / (1.0 / (2.0 * K0 * spacing**2) - s.imag)
