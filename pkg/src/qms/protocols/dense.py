"""Dense state-vector simulator used as an oracle for the tableau (small n only)."""
import numpy as np

from ..errors import InvalidArgument, ProtocolError

MAX_QUBITS = 14

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_S = np.diag([1, 1j])
PAULI = {"I": np.eye(2, dtype=complex), "X": _X, "Y": _Y, "Z": _Z}


class DenseState:
    """n-qubit pure state; axis q of the reshaped vector is qubit q."""

    def __init__(self, n, psi=None):
        if not 1 <= n <= MAX_QUBITS:
            raise InvalidArgument(f"dense oracle supports 1..{MAX_QUBITS} qubits")
        self.n = n
        if psi is None:
            psi = np.zeros(2**n, dtype=complex)
            psi[0] = 1.0
        self.psi = np.asarray(psi, dtype=complex).reshape((2,) * n)

    def apply1(self, u, q):
        self.psi = np.moveaxis(np.tensordot(u, self.psi, axes=([1], [q])), 0, q)
        return self

    def h(self, q):
        return self.apply1(_H, q)

    def s(self, q):
        return self.apply1(_S, q)

    def x_gate(self, q):
        return self.apply1(_X, q)

    def z_gate(self, q):
        return self.apply1(_Z, q)

    def cnot(self, a, b):
        if a == b:
            raise InvalidArgument("CNOT control and target must differ")
        idx = [slice(None)] * self.n
        idx[a] = 1
        sub = self.psi[tuple(idx)]
        tb = b if b < a else b - 1
        self.psi[tuple(idx)] = np.flip(sub, axis=tb)
        return self

    def measure_x(self, q, outcome=0):
        """Project qubit q on |±⟩ (outcome 0 ↔ +) and renormalise."""
        self.h(q)
        idx = [slice(None)] * self.n
        idx[q] = 1 - outcome
        self.psi[tuple(idx)] = 0.0
        norm = np.linalg.norm(self.psi)
        if norm < 1e-12:
            raise ProtocolError(f"outcome {outcome} on qubit {q} has zero probability")
        self.psi /= norm
        self.h(q)
        return self

    def drop_qubit(self, q, basis="x"):
        """Remove a qubit that sits in a product X or Z eigenstate."""
        if basis == "x":
            self.h(q)
        moved = np.moveaxis(self.psi, q, 0).reshape(2, -1)
        k = int(np.argmax(np.linalg.norm(moved, axis=1)))
        if np.linalg.norm(moved[1 - k]) > 1e-9:
            raise ProtocolError(f"qubit {q} is entangled; cannot drop it")
        rest = moved[k] / np.linalg.norm(moved[k])
        return DenseState(self.n - 1, rest)

    def expectation(self, label):
        """⟨ψ|P|ψ⟩ for a Pauli string like '+XZI'."""
        sign = -1.0 if label[0] == "-" else 1.0
        body = label[1:] if label[0] in "+-" else label
        if len(body) != self.n:
            raise InvalidArgument("Pauli length does not match the state")
        phi = DenseState(self.n, self.psi.copy())
        for q, c in enumerate(body):
            if c != "I":
                phi.apply1(PAULI[c], q)
        return sign * np.vdot(self.psi.ravel(), phi.psi.ravel())

    @property
    def vector(self):
        return self.psi.ravel()
