"""Transverse-momentum reflectivity of arrays with a periodic polarizability profile.

Two solvers: a direct real-space coupled-dipole solve per drive wavevector,
and the eigenmode expansion of the interaction matrix with the profile kept
only on the diagonal of that basis.
"""
from dataclasses import dataclass
import logging

import numpy as np
import scipy.linalg as sla

from . import coupled_dipole as cd
from .errors import InvalidArgument, NumericalFailure
from .green import COUPLING, K0, green_matrix
from .io import write_csv

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PermittivityProfile:
    alpha_i: np.ndarray
    label: str = "uniform"
    K_a: tuple = (0.0, 0.0)
    alpha0: complex = 1j


def periodic_profile(geom, K_a, alpha0):
    """α_i = α₀·(1 + cos(2 K_a·r_i))/2 on the active sites; ``K_a`` in k₀ units."""
    K_a = tuple(float(c) for c in K_a)
    if len(K_a) != 2:
        raise InvalidArgument("K_a must be a 2-vector")
    if np.hypot(*K_a) >= 1.0:
        raise InvalidArgument("|K_a| must be below k0")
    pos = geom.active_positions
    phase = 2.0 * K0 * (K_a[0] * pos[:, 0] + K_a[1] * pos[:, 1])
    alpha = complex(alpha0) * (1.0 + np.cos(phase)) / 2.0
    label = "uniform" if K_a == (0.0, 0.0) else "periodic"
    return PermittivityProfile(alpha_i=alpha, label=label, K_a=K_a, alpha0=complex(alpha0))


@dataclass(frozen=True)
class ReflectivitySpectrum:
    k_perp_grid: np.ndarray
    r2: np.ndarray
    method: str

    def __post_init__(self):
        if np.any(np.abs(self.k_perp_grid) >= 1.0):
            raise InvalidArgument("k_perp grid must lie strictly inside the light cone")

    def dip_index(self):
        return int(np.argmin(self.r2))

    def to_csv(self, path):
        rows = [(float(k), float(r), self.method) for k, r in zip(self.k_perp_grid, self.r2)]
        return write_csv(path, ["k_perp/k0", "|r|^2", "method"], rows,
                         units={"k_perp": "k0", "r2": "1"})


def _check_resolution(geom, profile):
    ka = np.hypot(*profile.K_a)
    if ka == 0.0:
        return
    period = 1.0 / (2.0 * ka)  # in λ
    side = min(geom.nx, geom.ny) * geom.spacing
    if side < 4.0 * period:
        raise InvalidArgument(
            f"array side {side:.3g} is shorter than four modulation periods ({4 * period:.3g})")


def _grid(k_grid):
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or k.size == 0:
        raise InvalidArgument("k_grid must be a non-empty 1D sequence")
    if np.any(np.abs(k) >= 1.0):
        raise InvalidArgument("k_grid must lie strictly inside the light cone")
    return k


def _drive(k):
    return cd.DriveField(kind="plane", k_perp=(float(k), 0.0))


def _r2(projector, geom, p):
    return abs(projector.subset(geom.active).refl @ p) ** 2


def reflectivity_spectrum_realspace(geom, profile, k_grid, green=None):
    """|r(k_⊥)|² from a full coupled-dipole solve with a plane wave at each k_⊥ = (k, 0)."""
    _check_resolution(geom, profile)
    k = _grid(k_grid)
    G = green_matrix(geom).entries if green is None else green
    out = np.empty(k.size)
    for j, kk in enumerate(k):
        drive = _drive(kk)
        P = cd.solve_polarizability(geom, profile.alpha_i, drive, green=G)
        out[j] = _r2(cd.plane_wave_projector(geom, drive), geom, P.p)
    return ReflectivitySpectrum(k_perp_grid=k, r2=out, method="real-space")


def interaction_eigenmodes(G):
    """Eigenpairs of the symmetric interaction matrix, normalised so uᵀu = 1."""
    try:
        lam, U = sla.eig(G)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"eigen-decomposition failed: {exc}") from exc
    norms = np.sqrt(np.einsum("im,im->m", U, U))
    if np.any(np.abs(norms) < 1e-10):
        raise NumericalFailure("interaction matrix has a self-orthogonal eigenvector")
    return lam, U / norms


def reflectivity_spectrum_eigenmode(geom, profile, k_grid, green=None, modes=None):
    """|r(k_⊥)|² in the diagonal approximation of the profile in the eigenbasis of G.

    Each eigenmode u_m responds independently with the effective polarizability
    ā_m = Σ_i α_i u_m(r_i)², so p ≈ Σ_m u_m·ā_m/(1 − C·ā_m·λ_m)·(u_mᵀE₀).
    """
    _check_resolution(geom, profile)
    k = _grid(k_grid)
    if modes is None:
        G = green_matrix(geom).entries if green is None else green
        modes = interaction_eigenmodes(G)
    lam, U = modes
    abar = np.einsum("i,im,im->m", profile.alpha_i, U, U)
    gain = abar / (1.0 - COUPLING * abar * lam)
    out = np.empty(k.size)
    pos = geom.active_positions
    for j, kk in enumerate(k):
        drive = _drive(kk)
        E0 = cd.incident_field(drive, pos)
        p = U @ (gain * (U.T @ E0))
        out[j] = _r2(cd.plane_wave_projector(geom, drive), geom, p)
    return ReflectivitySpectrum(k_perp_grid=k, r2=out, method="eigenmode")


def discrepancy(a, b):
    """Largest absolute |r|² difference between two spectra on the same grid."""
    if not np.array_equal(a.k_perp_grid, b.k_perp_grid):
        raise InvalidArgument("spectra must share the same grid")
    return float(np.max(np.abs(a.r2 - b.r2)))


def resonant_detuning(geom, K_a=(0.0, 0.0), bounds=(-1.5, 1.5), green=None):
    """Detuning maximising |r(k_⊥ = 0)| for the given modulation."""
    G = green_matrix(geom).entries if green is None else green
    unit = periodic_profile(geom, K_a, 1.0).alpha_i.real
    return cd.locate_resonance(geom, _drive(0.0), bounds=bounds, profile=unit, green=G,
                               projector=cd.plane_wave_projector(geom, _drive(0.0)))
