"""Conditional reflectivity of the collective EIT cascade.

All rates and detunings are in units of γ. The array reflection follows from
the probe coherence ρ_eg through r = i·((γ+Γ)/2)·ρ_eg/Ω.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument, SingularityError


@dataclass(frozen=True)
class EitParameters:
    delta: float = 0.0      # probe detuning δ
    Delta: float = 0.0      # cooperative shift Δ
    Gamma: float = 0.0      # cooperative decay correction Γ
    delta_r: float = 0.0    # two-photon detuning δ_r
    gamma_r: float = 0.0    # Rydberg dephasing γ_r
    omega_p: complex = 1.0  # control Rabi frequency Ω_p
    V: float = 0.0          # ancilla-induced Rydberg shift

    def __post_init__(self):
        if self.gamma_r < 0:
            raise InvalidArgument("gamma_r must be non-negative")
        if self.Gamma <= -1.0:
            raise InvalidArgument("total linewidth 1 + Gamma must be positive")

    @classmethod
    def on_collective_resonance(cls, mode, **kw):
        """Parameters tuned to δ = Δ_k of a ``green.CollectiveMode``."""
        return cls(delta=mode.delta_k, Delta=mode.delta_k, Gamma=mode.gamma_k, **kw)


def _two_photon(p):
    return p.gamma_r / 2.0 - 1j * (p.delta_r + p.V)


def _probe(p):
    return (1.0 + p.Gamma) / 2.0 - 1j * (p.delta - p.Delta)


def eit_coherence(p, omega_k=1.0):
    """Steady-state probe coherence ρ_eg,k for weak drive Ω_k."""
    x = _two_photon(p)
    den = x * _probe(p) + abs(p.omega_p) ** 2
    if den == 0:
        raise SingularityError("EIT coherence has a pole at these parameters")
    return 1j * omega_k * x / den


def reflection_from_coherence(p, rho, omega_k=1.0):
    """Scattering-theory map from the collective coherence to the reflection amplitude."""
    return 1j * (1.0 + p.Gamma) / 2.0 * rho / omega_k


def reflection_coefficient(p):
    """Collective reflection amplitude r of the array.

    With γ_r = 0 this is i(γ+Γ)W / (−iW(γ+Γ−2i(δ−Δ)) + 2|Ω_p|²), W = δ_r + V;
    a finite γ_r enters through W → W + iγ_r/2.
    """
    w = p.delta_r + p.V + 0.5j * p.gamma_r
    g = 1.0 + p.Gamma
    den = -1j * w * (g - 2j * (p.delta - p.Delta)) + 2.0 * abs(p.omega_p) ** 2
    if den == 0:
        raise SingularityError("reflection coefficient has a pole at these parameters")
    return 1j * g * w / den


def conditional_pair(p_base, V_on):
    """Reflection amplitudes (r_U, r_C) for the ancilla in |g'⟩ (V = 0) and |r'⟩ (V = V_on)."""
    if not V_on > 0:
        raise InvalidArgument("V_on must be positive")
    return reflection_coefficient(replace(p_base, V=0.0)), reflection_coefficient(replace(p_base, V=V_on))


def mirror_correction(p):
    """Leading correction ε in r ≈ −1 + ε for large V at δ = Δ, δ_r = 0."""
    return 1j * abs(p.omega_p) ** 2 / ((1.0 + p.Gamma) / 2.0 * p.V)


def per_atom_polarizability(p, V=None):
    """Single-atom EIT polarizability α_i, normalised like the two-level α.

    Uses the bare (non-collective) response: Δ = Γ = 0. ``V`` may be an array
    of per-atom shifts for the inhomogeneous-shift mode.
    """
    V = p.V if V is None else np.asarray(V, dtype=float)
    x = p.gamma_r / 2.0 - 1j * (p.delta_r + V)
    probe = 0.5 - 1j * p.delta
    return 0.5j * x / (x * probe + abs(p.omega_p) ** 2)


def steady_state_oracle(p, omega_k=1.0):
    """Coherence from a direct linear solve of the weak-probe amplitude equations.

    Unknowns (c_e, c_r) with c_g = 1:
        0 = −((γ+Γ)/2 − i(δ−Δ))·c_e + iΩ_k + iΩ_p·c_r
        0 = −(γ_r/2 − i(δ_r+V))·c_r + iΩ_p*·c_e
    """
    a = np.array([[-_probe(p), 1j * p.omega_p],
                  [1j * np.conj(p.omega_p), -_two_photon(p)]], dtype=complex)
    b = np.array([-1j * omega_k, 0.0], dtype=complex)
    c_e, _ = np.linalg.solve(a, b)
    return c_e
