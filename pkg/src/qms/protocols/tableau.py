"""Sign-exact stabilizer tableau (generators only) over GF(2).

Row g encodes the Pauli (−1)^r[g] ∏_q X_q^x[g,q] Z_q^z[g,q], with Y = iXZ
folded into the usual phase bookkeeping.
"""
import numpy as np

from ..errors import InvalidArgument, ProtocolError


def _g(x1, z1, x2, z2):
    """Exponent of i picked up when multiplying single-qubit Paulis (vectorised)."""
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    out = np.zeros_like(x1)
    y = (x1 == 1) & (z1 == 1)
    xo = (x1 == 1) & (z1 == 0)
    zo = (x1 == 0) & (z1 == 1)
    out[y] = (z2 - x2)[y]
    out[xo] = (z2 * (2 * x2 - 1))[xo]
    out[zo] = (x2 * (1 - 2 * z2))[zo]
    return out


def pauli_product(a, b):
    """Product of two signed Paulis given as (x, z, r); returns (x, z, r)."""
    xa, za, ra = a
    xb, zb, rb = b
    phase = 2 * int(ra) + 2 * int(rb) + int(_g(xa, za, xb, zb).sum())
    if phase % 2:
        raise InvalidArgument("product of anticommuting Paulis is not Hermitian")
    return (xa ^ xb, za ^ zb, (phase % 4) // 2)


def parse_pauli(label):
    """'+XZI' style string to (x, z, r)."""
    sign = 0
    if label[0] in "+-":
        sign = int(label[0] == "-")
        label = label[1:]
    n = len(label)
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    for q, c in enumerate(label.upper()):
        if c not in "IXYZ":
            raise InvalidArgument(f"bad Pauli letter {c!r}")
        x[q] = c in "XY"
        z[q] = c in "ZY"
    return x, z, sign


def format_pauli(x, z, r):
    letters = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
    return ("-" if r else "+") + "".join(letters[(int(a), int(b))] for a, b in zip(x, z))


def _rank(mat):
    m = mat.copy() % 2
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        piv = np.flatnonzero(m[rank:, c])
        if piv.size == 0:
            continue
        p = rank + piv[0]
        m[[rank, p]] = m[[p, rank]]
        others = np.flatnonzero(m[:, c])
        others = others[others != rank]
        m[others] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


class StabilizerTableau:
    """Stabilizer group of an n-qubit pure state."""

    def __init__(self, x, z, r):
        self.x = np.array(x, dtype=np.uint8)
        self.z = np.array(z, dtype=np.uint8)
        self.r = np.array(r, dtype=np.uint8)
        if self.x.shape != self.z.shape or self.x.shape[0] != self.x.shape[1]:
            raise InvalidArgument("tableau must hold n generators on n qubits")

    @classmethod
    def zero_state(cls, n):
        if n < 1:
            raise InvalidArgument("need at least one qubit")
        return cls(np.zeros((n, n)), np.eye(n), np.zeros(n))

    @classmethod
    def from_labels(cls, labels):
        parts = [parse_pauli(s) for s in labels]
        return cls([p[0] for p in parts], [p[1] for p in parts], [p[2] for p in parts])

    @property
    def n(self):
        return self.x.shape[1]

    def copy(self):
        return StabilizerTableau(self.x.copy(), self.z.copy(), self.r.copy())

    def generators(self):
        return [format_pauli(self.x[g], self.z[g], self.r[g]) for g in range(len(self.r))]

    def _check_qubit(self, q):
        if not 0 <= q < self.n:
            raise InvalidArgument(f"qubit {q} out of range for {self.n} qubits")

    # Clifford gates, in place, returning self for chaining
    def h(self, a):
        self._check_qubit(a)
        self.r ^= self.x[:, a] & self.z[:, a]
        self.x[:, a], self.z[:, a] = self.z[:, a].copy(), self.x[:, a].copy()
        return self

    def s(self, a):
        self._check_qubit(a)
        self.r ^= self.x[:, a] & self.z[:, a]
        self.z[:, a] ^= self.x[:, a]
        return self

    def x_gate(self, a):
        self._check_qubit(a)
        self.r ^= self.z[:, a]
        return self

    def z_gate(self, a):
        self._check_qubit(a)
        self.r ^= self.x[:, a]
        return self

    def cnot(self, a, b):
        self._check_qubit(a)
        self._check_qubit(b)
        if a == b:
            raise InvalidArgument("CNOT control and target must differ")
        self.r ^= self.x[:, a] & self.z[:, b] & (self.x[:, b] ^ self.z[:, a] ^ 1)
        self.x[:, b] ^= self.x[:, a]
        self.z[:, a] ^= self.z[:, b]
        return self

    def cz(self, a, b):
        return self.h(b).cnot(a, b).h(b)

    def _mul_row(self, h, i):
        """Row h ← row i · row h."""
        self.x[h], self.z[h], self.r[h] = pauli_product(
            (self.x[i], self.z[i], self.r[i]), (self.x[h], self.z[h], self.r[h]))

    def is_valid(self):
        """Generators commute pairwise and are independent."""
        sym = (self.x.astype(np.int64) @ self.z.T.astype(np.int64)
               + self.z.astype(np.int64) @ self.x.T.astype(np.int64)) % 2
        if np.any(sym):
            return False
        return _rank(np.hstack([self.x, self.z])) == len(self.r)

    def sign_of(self, pauli):
        """+1 / −1 if the signed Pauli (x, z, r) or its negative is in the group, else 0."""
        x, z, r = pauli if not isinstance(pauli, str) else parse_pauli(pauli)
        if len(x) != self.n:
            raise InvalidArgument("Pauli length does not match the tableau")
        comm = (self.x.astype(np.int64) @ z + self.z.astype(np.int64) @ x) % 2
        if np.any(comm):
            return 0
        # solve c · [X|Z] = [x|z] over GF(2)
        A = np.hstack([self.x, self.z]).T.astype(np.uint8)
        b = np.concatenate([x, z]).astype(np.uint8)
        aug = np.hstack([A, b[:, None]])
        rows, cols = aug.shape
        pivots = []
        rank = 0
        for c in range(cols - 1):
            piv = np.flatnonzero(aug[rank:, c])
            if piv.size == 0:
                continue
            p = rank + piv[0]
            aug[[rank, p]] = aug[[p, rank]]
            others = np.flatnonzero(aug[:, c])
            others = others[others != rank]
            aug[others] ^= aug[rank]
            pivots.append(c)
            rank += 1
            if rank == rows:
                break
        if np.any(aug[rank:, -1]):
            return 0
        coeff = np.zeros(cols - 1, dtype=np.uint8)
        for i, c in enumerate(pivots):
            coeff[c] = aug[i, -1]
        acc = (np.zeros(self.n, dtype=np.uint8), np.zeros(self.n, dtype=np.uint8), 0)
        for g in np.flatnonzero(coeff):
            acc = pauli_product(acc, (self.x[g], self.z[g], self.r[g]))
        return 1 if acc[2] == r else -1

    def measure_z(self, a, outcome=0):
        """Projective Z measurement on qubit ``a`` with a forced outcome (0 ↔ +1).

        Returns True if the outcome was random, False if it was determined.
        A determined outcome that contradicts ``outcome`` raises ProtocolError.
        """
        self._check_qubit(a)
        anti = np.flatnonzero(self.x[:, a])
        if anti.size == 0:
            x = np.zeros(self.n, dtype=np.uint8)
            z = np.zeros(self.n, dtype=np.uint8)
            z[a] = 1
            sign = self.sign_of((x, z, 0))
            if (sign == 1) != (outcome == 0):
                raise ProtocolError(f"qubit {a} has deterministic outcome {int(sign != 1)}")
            return False
        p = anti[0]
        for h in anti[1:]:
            self._mul_row(h, p)
        self.x[p] = 0
        self.z[p] = 0
        self.z[p, a] = 1
        self.r[p] = outcome
        return True

    def measure_x(self, a, outcome=0):
        self.h(a)
        random = self.measure_z(a, outcome)
        self.h(a)
        return random

    def drop_qubit(self, a):
        """Remove qubit ``a``, which must be in a Z eigenstate; returns a new tableau."""
        self._check_qubit(a)
        if np.any(self.x[:, a]):
            raise ProtocolError(f"qubit {a} is not in a Z eigenstate; cannot drop it")
        t = self.copy()
        rows = np.flatnonzero(t.z[:, a])
        p = rows[0]
        for h in rows[1:]:
            t._mul_row(h, p)
        keep = [g for g in range(len(t.r)) if g != p]
        cols = [q for q in range(t.n) if q != a]
        return StabilizerTableau(t.x[np.ix_(keep, cols)], t.z[np.ix_(keep, cols)], t.r[keep])

    def __eq__(self, other):
        if not isinstance(other, StabilizerTableau) or other.n != self.n:
            return NotImplemented
        return all(self.sign_of((other.x[g], other.z[g], other.r[g])) == 1
                   for g in range(len(other.r)))

    def __repr__(self):
        return f"StabilizerTableau({self.generators()})"
