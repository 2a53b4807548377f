"""Reference-state preparation, the built-in product ansatze, and the
derivative-free variational ground-state search.

Each ansatz is an ordered product of single-string rotations
exp(-i theta_k P_k / 2) applied to the aufbau reference determinant; the
first listed generator acts first.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .eigensolver import sector_hamiltonian
from .pauli import PauliSum, PauliTerm
from .statevector import PauliRotation, StateVector, apply, expectation


@dataclass(frozen=True)
class Ansatz:
    n_qubits: int
    n_elec: int
    generators: tuple[PauliTerm, ...]

    @property
    def n_params(self) -> int:
        return len(self.generators)


@dataclass
class VqeResult:
    theta: np.ndarray
    energy: float
    n_evals: int
    converged: bool
    trace: list = field(default_factory=list)  # (theta array, energy) rows


@dataclass(frozen=True)
class OptimizeConfig:
    ftol: float = 1e-8
    max_evals: int = 2000
    rhobeg: float = 0.5


def prepare_reference(n_qubits: int, n_elec: int) -> StateVector:
    """Computational basis state with the n_elec lowest spin orbitals filled."""
    if n_elec > n_qubits:
        raise ValueError("more electrons than spin orbitals")
    return StateVector.basis_state(n_qubits, (1 << n_elec) - 1)


def _gen(n, qubit_letters):
    return PauliTerm.from_ops(n, qubit_letters)


_BUILTIN = {
    "lih_u1": (12, 4, [
        [(5, "Y"), (4, "X"), (3, "X"), (2, "X")],
        [(11, "Y"), (10, "X"), (3, "X"), (2, "X")],
    ]),
    "lih_u2": (12, 4, [
        [(7, "Y"), (6, "X"), (3, "X"), (2, "X")],
        [(9, "Y"), (8, "X"), (3, "X"), (2, "X")],
    ]),
    "h2o_u2": (14, 10, [
        [(11, "Y"), (10, "X"), (7, "X"), (6, "X")],
        [(13, "Y"), (12, "X"), (7, "X"), (6, "X")],
        [(11, "Y"), (10, "X"), (9, "X"), (8, "X")],
        [(13, "Y"), (12, "X"), (9, "X"), (8, "X")],
    ]),
}
_BUILTIN["h2o_u1"] = (14, 10, _BUILTIN["h2o_u2"][2] + [
    [(11, "Y"), (10, "X"), (5, "X"), (4, "X")],
    [(13, "Y"), (12, "X"), (5, "X"), (4, "X")],
])


def builtin_ansatz(system: str) -> Ansatz:
    """Predefined single-string product ansatze for the reference systems."""
    try:
        n_qubits, n_elec, gens = _BUILTIN[system]
    except KeyError:
        raise ValueError(f"unknown ansatz tag {system!r}") from None
    return Ansatz(n_qubits, n_elec,
                  tuple(_gen(n_qubits, g) for g in gens))


def apply_ansatz(ansatz: Ansatz, theta) -> StateVector:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.size != ansatz.n_params:
        raise ValueError(
            f"expected {ansatz.n_params} parameters, got {theta.size}")
    state = prepare_reference(ansatz.n_qubits, ansatz.n_elec)
    for gen, angle in zip(ansatz.generators, theta):
        apply(state, PauliRotation(gen, float(angle)))
    return state


def energy(ansatz: Ansatz, theta, h: PauliSum) -> float:
    """<ref| U(theta)† H U(theta) |ref>."""
    return expectation(apply_ansatz(ansatz, theta), h)


def _reachable_indices(ansatz: Ansatz) -> np.ndarray:
    """Basis indices the ansatz state can ever populate.

    Rotation generators act on basis states as signed bit-flip permutations,
    so the support is the XOR span of the generator flip masks applied to
    the reference index.
    """
    indices = {(1 << ansatz.n_elec) - 1}
    for gen in ansatz.generators:
        flip = gen.masks()[0]
        indices |= {idx ^ flip for idx in indices}
    return np.array(sorted(indices), dtype=np.int64)


class _SupportEnergy:
    """Exact energy evaluator restricted to the ansatz's reachable support.

    <psi|H|psi> only touches the H block over the support indices, which
    stays tiny (2**n_params basis states) however large the register is.
    """

    def __init__(self, ansatz: Ansatz, h: PauliSum):
        self.ansatz = ansatz
        self.basis = _reachable_indices(ansatz)
        self.block = sector_hamiltonian(h, self.basis)

    def __call__(self, theta) -> float:
        amps = apply_ansatz(self.ansatz, theta).amps[self.basis]
        return float(np.vdot(amps, self.block @ amps).real)


def optimize(ansatz: Ansatz, h: PauliSum, theta0=None,
             config: OptimizeConfig = OptimizeConfig()) -> VqeResult:
    """Derivative-free minimization of the ansatz energy (COBYLA)."""
    if theta0 is None:
        theta0 = np.zeros(ansatz.n_params)
    theta0 = np.asarray(theta0, dtype=float)
    if not np.all(np.isfinite(theta0)):
        raise ValueError("initial parameters must be finite")
    evaluate = _SupportEnergy(ansatz, h)
    trace: list = []

    def objective(theta):
        val = evaluate(theta)
        trace.append((theta.copy(), val))
        return val

    if ansatz.n_params == 0:
        e0 = evaluate(theta0)
        return VqeResult(theta0, e0, 1, True, [(theta0, e0)])

    res = minimize(objective, theta0, method="COBYLA", tol=config.ftol,
                   options={"rhobeg": config.rhobeg,
                            "maxiter": config.max_evals})
    return VqeResult(np.asarray(res.x, dtype=float), float(res.fun),
                     int(res.nfev), bool(res.success), trace)


def write_trace_csv(path, result: VqeResult) -> None:
    """Optimization trace as CSV rows (iteration, theta..., energy_Ha)."""
    n_params = result.theta.size
    header = "iteration," + ",".join(
        f"theta_{k}" for k in range(n_params)) + ",energy_Ha"
    rows = [header]
    for it, (theta, val) in enumerate(result.trace):
        rows.append(f"{it}," + ",".join(f"{t:.12f}" for t in theta)
                    + f",{val:.12f}")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(rows) + "\n")
