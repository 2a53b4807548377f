"""Dense statevector simulation of the state-preparation circuits.

Basis index convention: qubit j is bit j of the index (qubit 0 least
significant).  Ancillae always occupy the highest qubit indices so the
register keeps the Jordan-Wigner mode indexing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import PauliSum, PauliTerm, jw_majorana_pair


class QubitIndexError(IndexError):
    """Gate touches a qubit outside the circuit width."""


@dataclass
class StateVector:
    n_qubits: int
    amps: np.ndarray

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis_state(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        n = int(np.log2(amps.size))
        if 2 ** n != amps.size:
            raise ValueError("amplitude count must be a power of two")
        return cls(n, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def extended(self, n_qubits: int) -> "StateVector":
        """Append |0> qubits at the top of the index range."""
        if n_qubits < self.n_qubits:
            raise ValueError("cannot drop qubits")
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[: self.amps.size] = self.amps
        return StateVector(n_qubits, amps)


# Gate records -------------------------------------------------------------

@dataclass(frozen=True)
class XGate:
    qubit: int


@dataclass(frozen=True)
class HGate:
    qubit: int


@dataclass(frozen=True)
class RxGate:
    qubit: int
    theta: float


@dataclass(frozen=True)
class RzGate:
    qubit: int
    theta: float


@dataclass(frozen=True)
class PhaseGate:
    """diag(1, exp(i*phi)) on one qubit."""
    qubit: int
    phi: float


@dataclass(frozen=True)
class CnotGate:
    control: int
    target: int


@dataclass(frozen=True)
class ControlledPauli:
    """Apply a Pauli string when every control qubit holds its stated value."""
    controls: tuple[tuple[int, int], ...]  # (qubit, required value 0|1)
    term: PauliTerm


@dataclass(frozen=True)
class PauliRotation:
    """exp(-i theta/2 * P) for a Pauli string P with coefficient +1."""
    term: PauliTerm
    theta: float


Gate = (XGate | HGate | RxGate | RzGate | PhaseGate | CnotGate
        | ControlledPauli | PauliRotation)


@dataclass
class Circuit:
    n_qubits: int
    gates: list = field(default_factory=list)

    def add(self, gate) -> "Circuit":
        self.gates.append(gate)
        return self


@dataclass
class MeasurementRecord:
    outcome: tuple[int, ...]
    probability: float
    state: StateVector


# Gate application ---------------------------------------------------------

_H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _single_qubit(amps: np.ndarray, n: int, q: int, mat: np.ndarray):
    view = amps.reshape(-1, 2, 2 ** q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
    view[:, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1


def apply_pauli_term(amps: np.ndarray, term: PauliTerm,
                     out: np.ndarray | None = None) -> np.ndarray:
    """Dense action of a phased Pauli string on an amplitude array."""
    n = term.n_qubits
    flip, sign_mask, n_y = term.masks()
    src = np.arange(amps.size, dtype=np.uint64) ^ np.uint64(flip)
    parity = np.bitwise_count(src & np.uint64(sign_mask)) & np.uint8(1)
    phase = term.coeff * (1j ** n_y)
    result = amps[src] * np.where(parity, -phase, phase)
    if out is None:
        return result
    out[:] = result
    return out


def apply_pauli_sum(amps: np.ndarray, op: PauliSum) -> np.ndarray:
    out = np.zeros_like(amps)
    for term in op:
        out += apply_pauli_term(amps, term)
    return out


def _check_qubit(q: int, n: int):
    if not 0 <= q < n:
        raise QubitIndexError(f"qubit {q} out of range for {n}-qubit state")


def apply(state: StateVector, gate) -> StateVector:
    """Apply one gate in place and return the state."""
    amps, n = state.amps, state.n_qubits
    if isinstance(gate, XGate):
        _check_qubit(gate.qubit, n)
        view = amps.reshape(-1, 2, 2 ** gate.qubit)
        view[:, [0, 1], :] = view[:, [1, 0], :]
    elif isinstance(gate, HGate):
        _check_qubit(gate.qubit, n)
        _single_qubit(amps, n, gate.qubit, _H2)
    elif isinstance(gate, RxGate):
        _check_qubit(gate.qubit, n)
        c, s = np.cos(gate.theta / 2), np.sin(gate.theta / 2)
        _single_qubit(amps, n, gate.qubit,
                      np.array([[c, -1j * s], [-1j * s, c]]))
    elif isinstance(gate, RzGate):
        _check_qubit(gate.qubit, n)
        _single_qubit(amps, n, gate.qubit,
                      np.diag([np.exp(-1j * gate.theta / 2),
                               np.exp(1j * gate.theta / 2)]))
    elif isinstance(gate, PhaseGate):
        _check_qubit(gate.qubit, n)
        amps.reshape(-1, 2, 2 ** gate.qubit)[:, 1, :] *= np.exp(1j * gate.phi)
    elif isinstance(gate, CnotGate):
        _check_qubit(gate.control, n)
        _check_qubit(gate.target, n)
        idx = np.arange(amps.size)
        sel = (idx >> gate.control) & 1 == 1
        src = idx[sel] ^ (1 << gate.target)
        new = amps.copy()
        new[idx[sel]] = amps[src]
        amps[:] = new
    elif isinstance(gate, ControlledPauli):
        term = gate.term
        if term.n_qubits != n:
            raise QubitIndexError("Pauli string width differs from circuit")
        for q, _ in gate.controls:
            _check_qubit(q, n)
        full = apply_pauli_term(amps, term)
        idx = np.arange(amps.size)
        sel = np.ones(amps.size, dtype=bool)
        for q, val in gate.controls:
            sel &= ((idx >> q) & 1) == val
        amps[sel] = full[sel]
    elif isinstance(gate, PauliRotation):
        term = gate.term
        if term.n_qubits != n:
            raise QubitIndexError("Pauli string width differs from circuit")
        if abs(term.coeff - 1.0) > 1e-12:
            raise ValueError("rotation generator must have coefficient +1")
        c, s = np.cos(gate.theta / 2), np.sin(gate.theta / 2)
        amps[:] = c * amps - 1j * s * apply_pauli_term(amps, term)
    else:
        raise TypeError(f"unknown gate {gate!r}")
    return state


def run(circuit: Circuit, state: StateVector | None = None) -> StateVector:
    if state is None:
        state = StateVector.zero(circuit.n_qubits)
    elif state.n_qubits != circuit.n_qubits:
        raise QubitIndexError("state width differs from circuit width")
    else:
        state = state.copy()
    for gate in circuit.gates:
        apply(state, gate)
    return state


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense matrix of the whole circuit; intended for small qubit counts."""
    dim = 2 ** circuit.n_qubits
    cols = []
    for k in range(dim):
        cols.append(run(circuit, StateVector.basis_state(
            circuit.n_qubits, k)).amps)
    return np.array(cols).T


# Preparation circuits -----------------------------------------------------

def build_diag_circuit(m: int, n_qubits: int) -> Circuit:
    """One-ancilla circuit branching an input into a_m|psi> / a_m†|psi>.

    The ancilla is qubit n_qubits; outcome 0 carries the electron-removed
    branch and outcome 1 the electron-added branch.
    """
    u0, u1 = jw_majorana_pair(m, n_qubits)
    anc = n_qubits
    circ = Circuit(n_qubits + 1)
    circ.add(HGate(anc))
    circ.add(ControlledPauli(((anc, 0),), u0.padded(n_qubits + 1)))
    circ.add(ControlledPauli(((anc, 1),), u1.padded(n_qubits + 1)))
    circ.add(HGate(anc))
    return circ


def build_offdiag_circuit(m: int, m_prime: int, n_qubits: int) -> Circuit:
    """Two-ancilla circuit preparing the four two-mode interference branches.

    Ancilla q0 is qubit n_qubits and q1 is qubit n_qubits + 1.  On input
    |00>|psi> the branches on outcome (q1, q0) are
      (0,0) -> e^{i pi/4} a+_{m'm} |psi>      (0,1) -> a+†_{mm'} |psi>
      (1,0) -> -e^{i pi/4} a-_{m'm} |psi>     (1,1) -> a-†_{mm'} |psi>
    """
    if m == m_prime:
        raise ValueError("mode indices must differ")
    total = n_qubits + 2
    u0m, u1m = (u.padded(total) for u in jw_majorana_pair(m, n_qubits))
    u0p, u1p = (u.padded(total) for u in jw_majorana_pair(m_prime, n_qubits))
    q0, q1 = n_qubits, n_qubits + 1
    circ = Circuit(total)
    circ.add(HGate(q0))
    circ.add(HGate(q1))
    circ.add(ControlledPauli(((q0, 0), (q1, 0)), u0m))
    circ.add(ControlledPauli(((q0, 1), (q1, 0)), u1m))
    circ.add(PhaseGate(q1, np.pi / 4))
    circ.add(ControlledPauli(((q0, 0), (q1, 1)), u0p))
    circ.add(ControlledPauli(((q0, 1), (q1, 1)), u1p))
    circ.add(HGate(q0))
    circ.add(HGate(q1))
    return circ


def pauli_rotation_gates(term: PauliTerm, theta: float) -> list:
    """Explicit basis-change / CNOT-ladder compilation of exp(-i theta P/2)."""
    if abs(term.coeff - 1.0) > 1e-12:
        raise ValueError("rotation generator must have coefficient +1")
    support = [int(q) for q in np.nonzero(term.letters)[0]]
    if not support:
        return []
    pre: list = []
    post: list = []
    for q in support:
        code = term.letters[q]
        if code == 1:  # X -> Z frame
            pre.append(HGate(q))
            post.append(HGate(q))
        elif code == 2:  # Y -> Z frame
            pre.append(RxGate(q, np.pi / 2))
            post.append(RxGate(q, -np.pi / 2))
    ladder = [CnotGate(a, b) for a, b in zip(support, support[1:])]
    return (pre + ladder + [RzGate(support[-1], theta)]
            + ladder[::-1] + post)


# Measurement and expectation ----------------------------------------------

def measure(state: StateVector, qubits: Sequence[int],
            rng: np.random.Generator) -> MeasurementRecord:
    """Projective measurement with Born-rule sampling and collapse."""
    n = state.n_qubits
    for q in qubits:
        _check_qubit(q, n)
    probs = np.abs(state.amps) ** 2
    idx = np.arange(probs.size)
    patterns = np.zeros(probs.size, dtype=np.int64)
    for k, q in enumerate(qubits):
        patterns |= ((idx >> q) & 1) << k
    dist = np.bincount(patterns, weights=probs, minlength=2 ** len(qubits))
    dist /= dist.sum()
    drawn = int(rng.choice(dist.size, p=dist))
    outcome = tuple((drawn >> k) & 1 for k in range(len(qubits)))
    post = np.where(patterns == drawn, state.amps, 0.0)
    p = float(dist[drawn])
    post /= np.sqrt(p)
    return MeasurementRecord(outcome, p, StateVector(n, post))


def expectation(state: StateVector, op: PauliSum,
                hermitian_tol: float = 1e-12) -> float:
    """<psi|op|psi> for a Hermitian operator."""
    if not op.is_hermitian(hermitian_tol):
        raise ValueError("operator is not Hermitian")
    val = complex(np.vdot(state.amps, apply_pauli_sum(state.amps, op)))
    assert abs(val.imag) < 1e-10, "Hermitian expectation came out complex"
    return val.real
