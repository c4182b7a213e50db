import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qms import photonic as ph
from qms.errors import InvalidArgument

NMAX = 28


def fock(a, nmax=NMAX):
    n = np.arange(nmax)
    logf = np.array([math.lgamma(k + 1) for k in n])
    c = np.exp(-0.5 * abs(a) ** 2 - 0.5 * logf) * np.power(complex(a), n)
    return c


def kron(*vs):
    out = np.array([1.0 + 0j])
    for v in vs:
        out = np.kron(out, v)
    return out


def oracle_cat_fidelity(r_C, t_C, alpha, odd=False, nmax=NMAX):
    """Truncated Fock-space reference with an explicit loss mode for each branch."""
    sign = -1 if odd else 1
    sc = math.sqrt(max(0.0, 1 - abs(r_C) ** 2 - abs(t_C) ** 2))
    vac = fock(0, nmax)
    # modes: R, L, loss_U, loss_C
    u = kron(fock(alpha, nmax), vac, vac, vac)
    c = kron(fock(t_C * alpha, nmax), fock(r_C * alpha, nmax), vac, fock(sc * alpha, nmax))
    psi = u + sign * c
    tgt = kron(fock(alpha, nmax), vac, vac, vac) + sign * kron(vac, fock(-alpha, nmax), vac, vac)
    return abs(np.vdot(tgt, psi)) ** 2 / (np.vdot(tgt, tgt).real * np.vdot(psi, psi).real)


def test_coherent_overlap_against_fock():
    a, b = 0.7 + 0.4j, -0.3 + 1.1j
    assert ph.coherent_overlap(a, b) == pytest.approx(np.vdot(fock(a), fock(b)), abs=1e-12)


def test_beam_splitter_matrix_and_unitarity():
    s = ph.beam_splitter(0.6j, 0.8, ph.TwoModeCoherent(1.0, 2.0))
    assert s.alpha_R == pytest.approx(0.8 + 1.2j)
    assert s.alpha_L == pytest.approx(0.6j + 1.6)
    assert s.photon_number == pytest.approx(5.0)
    with pytest.raises(InvalidArgument):
        ph.beam_splitter(0.9, 0.9, ph.TwoModeCoherent(1.0, 0.0))


def test_non_finite_amplitude_rejected():
    with pytest.raises(InvalidArgument):
        ph.TwoModeCoherent(float("nan"), 0.0)


def test_branch_weights_must_be_normalised():
    b = ph.Branch(ph.TwoModeCoherent(1.0, 0.0))
    with pytest.raises(InvalidArgument):
        ph.ConditionalState(b, b, weights=(1.0, 1.0))


@pytest.mark.parametrize("r_C,t_C,alpha", [
    (-1.0, 0.0, 2.0),
    (-0.98 + 0.05j, 0.05 - 0.1j, 2.0),
    (-0.9, 0.1j, 1.5),
    (-0.95 + 0.1j, 0.0, 1.0 + 1.0j),
    (-0.7, 0.3, 2.0),
])
@pytest.mark.parametrize("odd", [False, True])
def test_cat_fidelity_matches_fock_oracle(r_C, t_C, alpha, odd):
    got = ph.cat_fidelity_from_response(r_C, t_C, alpha, odd=odd).fidelity
    assert got == pytest.approx(oracle_cat_fidelity(r_C, t_C, alpha, odd), abs=1e-9)


@pytest.mark.parametrize("odd", [False, True])
def test_perfect_mirror_gives_unit_fidelity(odd):
    assert ph.cat_fidelity_from_response(-1.0, 0.0, 3.0, odd=odd).fidelity == pytest.approx(1.0)


@pytest.mark.parametrize("alpha_sq", [9, 16, 25])
@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3, -1e-1, -1e-2, -1e-3])
def test_small_error_law_third_order(alpha_sq, eps):
    # lossless C branch with pure reflection error: (0, (−1+ε)α)
    alpha = math.sqrt(alpha_sq)
    cond = ph.ConditionalState(ph.Branch(ph.TwoModeCoherent(alpha, 0.0)),
                               ph.Branch(ph.TwoModeCoherent(0.0, (-1 + eps) * alpha)))
    rep = ph.cat_fidelity(cond, alpha)
    assert abs(rep.fidelity - rep.approx_fidelity) <= abs(eps) ** 3 * alpha_sq
    assert rep.approx_fidelity == pytest.approx(1 - 0.5 * eps**2 * alpha_sq)


@given(r=st.floats(0.5, 1.0), phase=st.floats(-math.pi, math.pi),
       amp=st.floats(0.2, 3.0), theta=st.floats(-math.pi, math.pi))
def test_fidelity_is_bounded_and_phase_covariant(r, phase, amp, theta):
    r_C = r * cmath.exp(1j * phase)
    t_C = math.sqrt(max(0.0, 1 - r * r)) * 0.5
    f1 = ph.cat_fidelity_from_response(r_C, t_C, amp).fidelity
    f2 = ph.cat_fidelity_from_response(r_C, t_C, amp * cmath.exp(1j * theta)).fidelity
    assert 0.0 <= f1 <= 1.0
    assert f2 == pytest.approx(f1, abs=1e-9)


@given(sc1=st.floats(0.0, 0.4), sc2=st.floats(0.0, 0.4))
def test_more_loss_never_helps(sc1, sc2):
    lo, hi = sorted((sc1, sc2))
    r = -math.sqrt(1 - 0.3**2)

    def fid(sc):
        t = math.sqrt(max(0.0, 0.3**2 - sc**2))
        return ph.cat_fidelity_from_response(r, t, 2.0).fidelity

    # fixed |r|: shifting transmitted power into loss lowers fidelity
    assert fid(hi) <= fid(lo) + 1e-12


def test_state_overlap_properties():
    a = ph.conditional_scatter(0, 1, -0.99, 0.05, ph.TwoModeCoherent(2.0, 0.0))
    b = ph.conditional_scatter(0, 1, -0.9 + 0.1j, 0.2, ph.TwoModeCoherent(2.0, 0.0))
    assert ph.state_overlap(a, a, 2.0) == pytest.approx(1.0)
    assert ph.state_overlap(a, b, 2.0) == pytest.approx(ph.state_overlap(b, a, 2.0))
    assert 0 < ph.state_overlap(a, b, 2.0) < 1


def test_state_overlap_against_fock():
    alpha = 1.5
    resp = [(-0.97, 0.1), (-0.85 + 0.2j, 0.15j)]
    conds = [ph.conditional_scatter(0, 1, r, t, ph.TwoModeCoherent(alpha, 0.0)) for r, t in resp]
    vecs = []
    vac = fock(0)
    for r, t in resp:
        sc = math.sqrt(1 - abs(r) ** 2 - abs(t) ** 2)
        u = kron(fock(alpha), vac, vac)
        c = kron(fock(t * alpha), fock(r * alpha), fock(sc * alpha))
        v = u + c
        vecs.append(v / np.linalg.norm(v))
    want = abs(np.vdot(vecs[0], vecs[1])) ** 2
    assert ph.state_overlap(*conds, alpha) == pytest.approx(want, abs=1e-9)
