"""Two-mode coherent states, conditional scattering and cat-state fidelity.

Modes are (right, left) propagating. Light scattered out of the Gaussian
mode is tracked as a third, multimode coherent state whose only relevant
property is its mean photon number ``sc·|α|²``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

_UNITARITY_SLACK = 1e-9


@dataclass(frozen=True)
class TwoModeCoherent:
    alpha_R: complex
    alpha_L: complex

    def __post_init__(self):
        if not (np.isfinite(self.alpha_R) and np.isfinite(self.alpha_L)):
            raise InvalidArgument("coherent amplitudes must be finite")

    @property
    def photon_number(self):
        return abs(self.alpha_R) ** 2 + abs(self.alpha_L) ** 2


def beam_splitter(r, t, in_state):
    """Apply [[t, r], [r, t]] to (α_R, α_L)."""
    if abs(r) ** 2 + abs(t) ** 2 > 1.0 + _UNITARITY_SLACK:
        raise InvalidArgument(f"|r|^2 + |t|^2 = {abs(r)**2 + abs(t)**2:.12g} exceeds 1")
    a, b = in_state.alpha_R, in_state.alpha_L
    return TwoModeCoherent(t * a + r * b, r * a + t * b)


@dataclass(frozen=True)
class Branch:
    state: TwoModeCoherent
    sc_amp: float = 0.0  # √(power fraction scattered out of the two modes)


@dataclass(frozen=True)
class ConditionalState:
    branch_U: Branch
    branch_C: Branch
    weights: tuple = (2**-0.5, 2**-0.5)

    def __post_init__(self):
        wu, wc = self.weights
        if abs(abs(wu) ** 2 + abs(wc) ** 2 - 1.0) > 1e-12:
            raise InvalidArgument("branch weights must be normalised")


def conditional_scatter(r_U, t_U, r_C, t_C, in_state):
    """Scatter ``in_state`` off the metasurface in (|U⟩ + |C⟩)/√2."""
    branches = []
    for r, t in ((r_U, t_U), (r_C, t_C)):
        out = beam_splitter(r, t, in_state)
        deficit = max(0.0, 1.0 - abs(r) ** 2 - abs(t) ** 2)
        branches.append(Branch(out, float(np.sqrt(deficit))))
    return ConditionalState(*branches)


def coherent_overlap(a, b):
    """⟨a|b⟩ for single-mode coherent states (full complex value)."""
    return np.exp(-0.5 * (abs(a) ** 2 + abs(b) ** 2) + np.conj(a) * b)


@dataclass(frozen=True)
class CatFidelityReport:
    fidelity: float
    approx_fidelity: float
    alpha_sq: float


def cat_fidelity(cond, alpha, odd=False):
    """Fidelity of the projected light state with the ideal cat (|α,0⟩ ± |0,−α⟩)/N.

    Both the ideal cat and the projected state are normalised exactly. The
    ``approx_fidelity`` is the small-error law 1 − ½|r_C + 1|²|α|² using the
    C-branch reflection read off the left-propagating amplitude.
    """
    alpha = complex(alpha)
    sign = -1.0 if odd else 1.0
    target = [((TwoModeCoherent(alpha, 0.0)), 1.0), ((TwoModeCoherent(0.0, -alpha)), sign)]
    wu, wc = cond.weights
    actual = [(cond.branch_U, wu), (cond.branch_C, sign * wc)]

    def ov(x_state, x_sc, y_state, y_sc, same):
        val = (coherent_overlap(x_state.alpha_R, y_state.alpha_R)
               * coherent_overlap(x_state.alpha_L, y_state.alpha_L))
        if not same:
            val *= np.exp(-0.5 * (x_sc**2 + y_sc**2) * abs(alpha) ** 2)
        return val

    t_norm = sum(np.conj(ci) * cj * ov(si, 0.0, sj, 0.0, True)
                 for si, ci in target for sj, cj in target).real
    a_norm = sum(np.conj(ci) * cj * ov(bi.state, bi.sc_amp, bj.state, bj.sc_amp, bi is bj)
                 for bi, ci in actual for bj, cj in actual).real
    cross = sum(np.conj(ci) * cj * ov(si, 0.0, bj.state, bj.sc_amp, False)
                for si, ci in target for bj, cj in actual)
    fid = float(abs(cross) ** 2 / (t_norm * a_norm))
    fid = min(max(fid, 0.0), 1.0)
    r_C = cond.branch_C.state.alpha_L / alpha if alpha != 0 else -1.0
    approx = 1.0 - 0.5 * abs(r_C + 1.0) ** 2 * abs(alpha) ** 2
    return CatFidelityReport(fidelity=fid, approx_fidelity=float(approx), alpha_sq=abs(alpha) ** 2)


def cat_fidelity_from_response(r_C, t_C, alpha, r_U=0.0, t_U=1.0, odd=False):
    """Convenience wrapper: cat fidelity for given U/C branch coefficients with input (α, 0)."""
    cond = conditional_scatter(r_U, t_U, r_C, t_C, TwoModeCoherent(alpha, 0.0))
    return cat_fidelity(cond, alpha, odd=odd)


def _branch_vectors(cond):
    out = []
    for b, w in ((cond.branch_U, cond.weights[0]), (cond.branch_C, cond.weights[1])):
        out.append(((b.state.alpha_R, b.state.alpha_L, b.sc_amp), w))
    return out


def state_overlap(cond_a, cond_b, alpha):
    """|⟨ψ_a|ψ_b⟩|² between two normalised post-measurement light states.

    The light lost from the Gaussian modes is modelled as one coherent mode
    shared by both states, with amplitude sc·α; this is the comparison used
    for defect-induced degradation relative to a reference array.
    """
    alpha = complex(alpha)

    def inner(x, y):
        return sum(np.conj(cx) * cy
                   * coherent_overlap(u[0], v[0]) * coherent_overlap(u[1], v[1])
                   * coherent_overlap(u[2] * alpha, v[2] * alpha)
                   for u, cx in x for v, cy in y)

    a, b = _branch_vectors(cond_a), _branch_vectors(cond_b)
    val = abs(inner(a, b)) ** 2 / (inner(a, a).real * inner(b, b).real)
    return float(min(max(val, 0.0), 1.0))
