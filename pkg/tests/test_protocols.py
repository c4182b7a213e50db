import numpy as np
import pytest
from hypothesis import given, strategies as st

from qms.errors import InvalidArgument, ProtocolError
from qms.protocols import (DenseState, ProtocolScript, StabilizerTableau, Step,
                           ancilla_conditioned_flip, apply_byproduct, apply_frame,
                           cluster1d_script, ghz_script, ghz_stabilizers, parallel_cnot,
                           preset, run_protocol, run_protocol_dense, tableau_matches_dense,
                           tree_script, verify_graph_state, verify_stabilizers)

N = 4
gate = st.one_of(
    st.tuples(st.sampled_from(["h", "s", "x_gate", "z_gate"]), st.integers(0, N - 1)),
    st.tuples(st.just("cnot"), st.permutations(range(N)).map(lambda p: tuple(p[:2]))),
)


def _apply(state, g):
    name, arg = g
    if name == "cnot":
        state.cnot(*arg)
    else:
        getattr(state, name)(arg)


@given(st.lists(gate, max_size=30))
def test_tableau_tracks_dense_oracle(circuit):
    t = StabilizerTableau.zero_state(N)
    psi = DenseState(N)
    for g in circuit:
        _apply(t, g)
        _apply(psi, g)
    assert t.is_valid()
    assert tableau_matches_dense(t, psi)


@given(st.lists(gate, max_size=20), st.integers(0, N - 1), st.integers(0, 1))
def test_x_measurement_matches_dense(circuit, q, outcome):
    t = StabilizerTableau.zero_state(N)
    psi = DenseState(N)
    for g in circuit:
        _apply(t, g)
        _apply(psi, g)
    try:
        t.measure_x(q, outcome)
    except ProtocolError:
        with pytest.raises(ProtocolError):
            psi.measure_x(q, outcome)
        return
    psi.measure_x(q, outcome)
    assert tableau_matches_dense(t, psi)


def test_sign_of():
    t = StabilizerTableau.from_labels(["+XX", "+ZZ"])
    assert t.sign_of("+YY") == -1
    assert t.sign_of("-YY") == 1
    assert t.sign_of("+XI") == 0
    assert t.sign_of("+II") == 1


def test_deterministic_measurement_contradiction():
    t = StabilizerTableau.zero_state(2)
    assert t.measure_z(0, 0) is False
    with pytest.raises(ProtocolError):
        t.measure_z(0, 1)


def test_drop_qubit_requires_product_state():
    t = StabilizerTableau.zero_state(2).h(0).cnot(0, 1)
    with pytest.raises(ProtocolError):
        t.drop_qubit(0)


@pytest.mark.parametrize("m", [1, 2, 5, 8])
@pytest.mark.parametrize("outcome", ["+", "-"])
def test_ghz_joint_state_and_branches(m, outcome):
    photons, rec = run_protocol(ghz_script(m), outcome)
    joint = StabilizerTableau.from_labels(rec.joint_before_measurement)
    assert verify_stabilizers(joint, ghz_stabilizers(m + 1))[0]
    assert rec.random and rec.reflections == m
    if m + 1 <= 14:
        assert tableau_matches_dense(photons, run_protocol_dense(ghz_script(m), outcome))


def test_ghz_branches_differ_by_z():
    plus, _ = run_protocol(ghz_script(4), "+")
    minus, rec = run_protocol(ghz_script(4), "-")
    assert rec.byproduct.startswith("Z")
    assert apply_byproduct(minus, rec.byproduct) == plus
    assert plus.sign_of("+XXXX") == 1 and minus.sign_of("+XXXX") == -1


@pytest.mark.parametrize("M", range(1, 11))
@pytest.mark.parametrize("outcome", ["+", "-"])
def test_cluster_chain(M, outcome):
    script = cluster1d_script(M)
    photons, rec = run_protocol(script, outcome)
    fixed = apply_frame(apply_byproduct(photons, rec.byproduct), script.frame)
    assert verify_graph_state(fixed, script.graph)[0]
    if M + 1 <= 12:
        assert tableau_matches_dense(photons, run_protocol_dense(script, outcome))


@pytest.mark.parametrize("outcome", ["+", "-"])
@pytest.mark.parametrize("shape", [(2, 1), (3, 2), (6, 5)])
def test_tree(shape, outcome):
    script = tree_script(*shape)
    photons, rec = run_protocol(script, outcome)
    fixed = apply_frame(apply_byproduct(photons, rec.byproduct), script.frame)
    ok, bad = verify_graph_state(fixed, script.graph)
    assert ok, bad
    if script.n_qubits <= 12:
        assert tableau_matches_dense(photons, run_protocol_dense(script, outcome))


def test_ghz3_is_not_the_triangle():
    photons, _ = run_protocol(ghz_script(3))
    assert verify_graph_state(photons, [(1, 2), (2, 3), (1, 3)])[0] is False
    with pytest.raises(InvalidArgument):
        verify_graph_state(photons, [(1, 4)])


def test_protocol_composition_extends_ghz():
    # appending scatters to a GHZ prefix yields the larger GHZ state
    a, _ = run_protocol(ghz_script(5))
    steps = list(ghz_script(2).steps[:-1]) + [Step("scatter", (3, 4, 5)), Step("measure_qms")]
    b, _ = run_protocol(ProtocolScript(5, tuple(steps)))
    assert a == b


def test_ancilla_conditioned_flip_dense():
    t = StabilizerTableau.zero_state(5).h(0)
    psi = DenseState(5).h(0)
    ancilla_conditioned_flip(t, [1, 2, 3, 4])
    psi.x_gate(0)
    for q in (1, 2, 3, 4):
        psi.cnot(0, q)
    psi.x_gate(0)
    assert tableau_matches_dense(t, psi)
    want = np.zeros(32, dtype=complex)
    want[0b01111] = want[0b10000] = 2**-0.5
    assert np.allclose(psi.vector, want)
    with pytest.raises(InvalidArgument):
        parallel_cnot(t, [0, 1])


@pytest.mark.parametrize("name", ["ghz", "cluster1d", "tree-fig2b"])
def test_script_json_round_trip(name):
    s = preset(name)
    assert ProtocolScript.from_json(s.to_json()) == s


@pytest.mark.parametrize("steps,index", [
    ([Step("scatter", (1,)), Step("scatter", (1,)), Step("measure_qms")], 1),
    ([Step("rescatter", (1,)), Step("measure_qms")], 0),
    ([Step("scatter", (0,)), Step("measure_qms")], 0),
    ([Step("scatter", (5,)), Step("measure_qms")], 0),
    ([Step("measure_qms"), Step("scatter", (1,))], 0),
    ([Step("scatter", (1,)), Step("measure_qms", basis="0")], 1),
    ([Step("jump"), Step("measure_qms")], 0),
    ([Step("rotate", qubit=1, gate="T"), Step("measure_qms")], 0),
])
def test_validation_reports_step(steps, index):
    with pytest.raises(ProtocolError) as exc:
        ProtocolScript(2, tuple(steps)).validate()
    assert exc.value.step == index


def test_bad_json_and_presets():
    with pytest.raises(InvalidArgument):
        ProtocolScript.from_json("{nope")
    with pytest.raises(InvalidArgument):
        preset("star")
    with pytest.raises(InvalidArgument):
        ghz_script(0)
    with pytest.raises(InvalidArgument):
        run_protocol(ghz_script(2), outcome="0")


def test_dense_limit():
    with pytest.raises(InvalidArgument):
        DenseState(15)
