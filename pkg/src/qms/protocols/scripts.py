"""Protocol scripts, presets and the runner.

Qubit 0 is the metasurface (|U⟩ = |0⟩, |C⟩ = |1⟩); qubit j ≥ 1 is photon j
(|0⟩ right-, |1⟩ left-propagating). Scattering a photon off the metasurface
is a CNOT from qubit 0: |C⟩ reflects the photon, |U⟩ lets it through.
"""
from dataclasses import dataclass, field
import json

from ..errors import InvalidArgument, ProtocolError
from .dense import DenseState
from .tableau import StabilizerTableau

OPS = ("scatter", "rescatter", "hadamard_qms", "measure_qms", "rotate")
GATES = ("H", "X", "Z")


@dataclass(frozen=True)
class Step:
    op: str
    targets: tuple = ()
    basis: str = "+"
    qubit: int = 0
    gate: str = "H"

    def to_record(self):
        rec = {"op": self.op}
        if self.op in ("scatter", "rescatter"):
            rec["targets"] = list(self.targets)
        elif self.op == "measure_qms":
            rec["basis"] = self.basis
        elif self.op == "rotate":
            rec["qubit"] = self.qubit
            rec["gate"] = self.gate
        return rec

    @classmethod
    def from_record(cls, rec):
        if not isinstance(rec, dict) or "op" not in rec:
            raise InvalidArgument("step records need an 'op' field")
        return cls(op=rec["op"], targets=tuple(int(t) for t in rec.get("targets", ())),
                   basis=rec.get("basis", "+"), qubit=int(rec.get("qubit", 0)),
                   gate=rec.get("gate", "H"))


@dataclass(frozen=True)
class ProtocolScript:
    """Ordered steps on one metasurface qubit and ``n_photons`` photonic qubits.

    ``frame`` lists photons that receive a local Hadamard before the output is
    compared with ``graph`` (edges between photon labels 1..n_photons).
    """

    n_photons: int
    steps: tuple
    name: str = "custom"
    graph: tuple = ()
    frame: tuple = ()

    @property
    def n_qubits(self):
        return self.n_photons + 1

    def validate(self):
        if self.n_photons < 1:
            raise ProtocolError("script needs at least one photon")
        if not self.steps:
            raise ProtocolError("script is empty")
        scattered = set()
        for i, st in enumerate(self.steps):
            if st.op not in OPS:
                raise ProtocolError(f"unknown op {st.op!r}", step=i)
            if st.op in ("scatter", "rescatter"):
                for t in st.targets:
                    if t == 0:
                        raise ProtocolError("the metasurface cannot scatter off itself", step=i)
                    if not 1 <= t <= self.n_photons:
                        raise ProtocolError(f"target {t} out of range", step=i)
                if len(set(st.targets)) != len(st.targets):
                    raise ProtocolError("duplicate targets", step=i)
                if st.op == "scatter" and scattered & set(st.targets):
                    raise ProtocolError("scatter on a photon already used; use rescatter", step=i)
                if st.op == "rescatter" and not set(st.targets) <= scattered:
                    raise ProtocolError("rescatter on a photon never scattered", step=i)
                scattered |= set(st.targets)
            elif st.op == "measure_qms":
                if st.basis not in "+-" or len(st.basis) != 1:
                    raise ProtocolError(f"basis must be '+' or '-', got {st.basis!r}", step=i)
                if i != len(self.steps) - 1:
                    raise ProtocolError("the metasurface is measured only as the final step",
                                        step=i)
            elif st.op == "rotate":
                if st.gate not in GATES:
                    raise ProtocolError(f"gate must be one of {GATES}", step=i)
                if not 0 <= st.qubit <= self.n_photons:
                    raise ProtocolError(f"qubit {st.qubit} out of range", step=i)
        if self.steps[-1].op != "measure_qms":
            raise ProtocolError("script must end by measuring the metasurface",
                                step=len(self.steps) - 1)
        for a, b in self.graph:
            if not (1 <= a <= self.n_photons and 1 <= b <= self.n_photons) or a == b:
                raise ProtocolError(f"bad graph edge ({a}, {b})")
        return self

    def to_json(self):
        return json.dumps({"name": self.name, "n_photons": self.n_photons,
                           "steps": [s.to_record() for s in self.steps],
                           "graph": [list(e) for e in self.graph],
                           "frame": list(self.frame)}, indent=2)

    @classmethod
    def from_json(cls, text):
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"script is not valid JSON: {exc}") from exc
        if isinstance(rec, list):
            rec = {"steps": rec}
        steps = tuple(Step.from_record(s) for s in rec.get("steps", []))
        n = rec.get("n_photons")
        if n is None:
            n = max((t for s in steps for t in s.targets), default=0)
        return cls(n_photons=int(n), steps=steps, name=rec.get("name", "custom"),
                   graph=tuple(tuple(e) for e in rec.get("graph", ())),
                   frame=tuple(rec.get("frame", ()))).validate()


# presets --------------------------------------------------------------------

def ghz_script(m):
    """Metasurface in |+⟩, m photons scattered together, then measured."""
    if m < 1:
        raise InvalidArgument("GHZ needs m >= 1")
    steps = (Step("hadamard_qms"), Step("scatter", tuple(range(1, m + 1))), Step("measure_qms"))
    return ProtocolScript(m, steps, name=f"ghz({m})").validate()


def cluster1d_script(M):
    """Photons scattered one at a time with a metasurface Hadamard after each."""
    if M < 1:
        raise InvalidArgument("cluster needs M >= 1")
    steps = [Step("hadamard_qms")]
    for k in range(1, M + 1):
        steps.append(Step("scatter", (k,)))
        if k < M:
            steps.append(Step("hadamard_qms"))
    steps.append(Step("measure_qms"))
    graph = tuple((k, k + 1) for k in range(1, M))
    return ProtocolScript(M, tuple(steps), name=f"cluster1d({M})", graph=graph).validate()


def tree_script(root_children=6, grandchildren=5):
    """Depth-2 tree: photon 1 is the root, photons 2.. its children, and photon 2
    is re-scattered to attach ``grandchildren`` further photons.

    Photon 2 is rotated to the diagonal basis before each pass, so its first
    pass leaves it untouched and the re-scatter is what links it to the root.
    """
    if root_children < 1 or grandchildren < 0:
        raise InvalidArgument("tree needs root_children >= 1 and grandchildren >= 0")
    kids = tuple(range(2, 2 + root_children))
    grand = tuple(range(2 + root_children, 2 + root_children + grandchildren))
    steps = [Step("hadamard_qms"), Step("scatter", (1,)), Step("hadamard_qms"),
             Step("rotate", qubit=2, gate="H"), Step("scatter", kids), Step("hadamard_qms"),
             Step("rotate", qubit=2, gate="H"), Step("rescatter", (2,))]
    if grandchildren:
        steps.append(Step("scatter", grand))
    steps.append(Step("measure_qms"))
    graph = [(1, k) for k in kids] + [(2, g) for g in grand]
    n = 1 + root_children + grandchildren
    frame = (1,) + kids[1:] + grand
    return ProtocolScript(n, tuple(steps), name=f"tree({root_children},{grandchildren})",
                          graph=tuple(graph), frame=frame).validate()


def preset(name, m=None):
    """Named presets: 'ghz' / 'cluster1d' (size ``m``) and 'tree-fig2b'."""
    if name == "ghz":
        return ghz_script(6 if m is None else m)
    if name == "cluster1d":
        return cluster1d_script(8 if m is None else m)
    if name == "tree-fig2b":
        return tree_script(6, 5)
    raise InvalidArgument(f"unknown preset {name!r}")


# runner ---------------------------------------------------------------------

def parallel_cnot(t, targets, control=0):
    """CNOT from ``control`` onto every qubit in ``targets`` (in place)."""
    targets = list(targets)
    if control in targets:
        raise InvalidArgument("control qubit cannot be a target")
    for q in targets:
        t.cnot(control, q)
    return t


def ancilla_conditioned_flip(t, register, ancilla=0):
    """Flip every register qubit when the ancilla is in |0⟩ (= |g′⟩); identity for |1⟩."""
    register = list(register)
    if ancilla in register:
        raise InvalidArgument("ancilla cannot be part of the register")
    t.x_gate(ancilla)
    parallel_cnot(t, register, control=ancilla)
    t.x_gate(ancilla)
    return t


@dataclass
class MeasurementRecord:
    outcome: str
    random: bool
    frame: tuple
    reflections: int
    joint_before_measurement: list = field(default_factory=list)
    byproduct: str = ""  # single-photon Pauli mapping the '+' branch onto this one

    @property
    def ancilla_z_frame(self):
        # each reflection off |C⟩ carries r = −1, i.e. a Z on the metasurface
        return self.reflections % 2

    def to_record(self):
        return {"outcome": self.outcome, "random": self.random, "frame": list(self.frame),
                "reflections": self.reflections, "ancilla_z_frame": self.ancilla_z_frame,
                "joint_before_measurement": self.joint_before_measurement,
                "byproduct": self.byproduct}


def _execute(script, state, outcome):
    reflections = 0
    joint = None
    random = None
    for st in script.steps:
        if st.op in ("scatter", "rescatter"):
            for q in st.targets:
                state.cnot(0, q)
            reflections += len(st.targets)
        elif st.op == "hadamard_qms":
            state.h(0)
        elif st.op == "rotate":
            {"H": state.h, "X": state.x_gate, "Z": state.z_gate}[st.gate](st.qubit)
        elif st.op == "measure_qms":
            joint = state.copy() if hasattr(state, "copy") else None
            random = state.measure_x(0, outcome)
    return reflections, joint, random


def _outcome(script, outcome):
    basis = script.steps[-1].basis if outcome is None else outcome
    if basis not in ("+", "-"):
        raise InvalidArgument("outcome must be '+' or '-'")
    return basis


def _run_branch(script, basis):
    t = StabilizerTableau.zero_state(script.n_qubits)
    reflections, joint, random = _execute(script, t, 0 if basis == "+" else 1)
    t.h(0)
    return t.drop_qubit(0), reflections, joint, random


def find_byproduct(reference, other):
    """Single-qubit Pauli P (as e.g. 'Z3', photon label) with P·reference·P = other."""
    for q in range(reference.n):
        for gate, name in ((reference.z_gate, "Z"), (reference.x_gate, "X")):
            cand = reference.copy()
            getattr(cand, gate.__name__)(q)
            if cand == other:
                return f"{name}{q + 1}"
        cand = reference.copy().x_gate(q).z_gate(q)
        if cand == other:
            return f"Y{q + 1}"
    return ""


def apply_byproduct(t, label):
    """Undo a byproduct such as 'Z3' recorded by ``run_protocol``."""
    out = t.copy()
    if not label:
        return out
    q = int(label[1:]) - 1
    if label[0] in "XY":
        out.x_gate(q)
    if label[0] in "ZY":
        out.z_gate(q)
    return out


def run_protocol(script, outcome=None):
    """Run ``script`` on the tableau; return (photonic tableau, MeasurementRecord).

    ``outcome`` overrides the basis state selected by the final measurement.
    For the '-' branch the record names the Pauli byproduct relative to '+'.
    """
    script.validate()
    basis = _outcome(script, outcome)
    photonic, reflections, joint, random = _run_branch(script, basis)
    byproduct = ""
    if basis == "-" and random:
        byproduct = find_byproduct(_run_branch(script, "+")[0], photonic)
    rec = MeasurementRecord(outcome=basis, random=random, frame=script.frame,
                            reflections=reflections,
                            joint_before_measurement=joint.generators(), byproduct=byproduct)
    return photonic, rec


def run_protocol_dense(script, outcome=None):
    """Same as ``run_protocol`` on the dense oracle; returns the photonic DenseState."""
    script.validate()
    if script.n_qubits > 14:
        raise InvalidArgument("dense oracle limited to 14 qubits")
    basis = _outcome(script, outcome)
    psi = DenseState(script.n_qubits)
    _execute(script, psi, 0 if basis == "+" else 1)
    return psi.drop_qubit(0, basis="x")


def apply_frame(t, frame):
    """Local Hadamards on photons in ``frame`` (photon j is tableau qubit j − 1)."""
    out = t.copy()
    for j in frame:
        out.h(j - 1)
    return out


def graph_stabilizers(n, edges):
    """Labels K_v = X_v ∏_{w∈N(v)} Z_w for vertices 1..n."""
    nbrs = {v: set() for v in range(1, n + 1)}
    for a, b in edges:
        if a == b or a not in nbrs or b not in nbrs:
            raise InvalidArgument(f"bad graph edge ({a}, {b})")
        nbrs[a].add(b)
        nbrs[b].add(a)
    out = []
    for v in range(1, n + 1):
        s = ["I"] * n
        s[v - 1] = "X"
        for w in nbrs[v]:
            s[w - 1] = "Z"
        out.append("+" + "".join(s))
    return out


def verify_graph_state(t, edges):
    """(ok, violating generators) for the graph state on photons 1..t.n."""
    bad = [k for k in graph_stabilizers(t.n, edges) if t.sign_of(k) != 1]
    return not bad, bad


def ghz_stabilizers(n):
    out = ["+" + "X" * n]
    for q in range(n - 1):
        s = ["I"] * n
        s[q] = s[q + 1] = "Z"
        out.append("+" + "".join(s))
    return out


def verify_stabilizers(t, labels):
    bad = [k for k in labels if t.sign_of(k) != 1]
    return not bad, bad


def tableau_matches_dense(t, psi, atol=1e-10):
    """True when every generator of ``t`` has expectation exactly its sign in ``psi``."""
    if t.n != psi.n:
        return False
    return all(abs(psi.expectation(g) - 1.0) < atol for g in t.generators())
