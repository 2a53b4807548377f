"""Shared fixtures and independent dense oracles.

The oracles build fermionic operators by direct Kronecker products (never
through the package's Pauli algebra) so every comparison crosses two code
paths.
"""
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

import gfsim as g
from gfsim.eigensolver import project_number_sector

DATA = Path(__file__).resolve().parent.parent / "data"
LIH_DUMP = DATA / "lih_sto3g.fcidump"
H2O_DUMP = DATA / "h2o_sto3g.fcidump"


def dense_annihilators(n_modes: int) -> list[np.ndarray]:
    """Jordan-Wigner annihilation matrices built by direct kron chains."""
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    i2 = np.eye(2, dtype=complex)
    out = []
    for m in range(n_modes):
        factors = [z] * m + [a] + [i2] * (n_modes - m - 1)
        mat = np.array([[1.0]], dtype=complex)
        for f in factors[::-1]:
            mat = np.kron(mat, f)
        out.append(mat)
    return out


def random_state(n_qubits: int, rng) -> np.ndarray:
    amps = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return amps / np.linalg.norm(amps)


def random_hermitian_integrals(n_orb: int, rng,
                               scale: float = 0.5) -> g.MolecularIntegrals:
    """Random integrals with full 8-fold symmetry, for property tests."""
    h = rng.normal(size=(n_orb, n_orb), scale=scale)
    h = 0.5 * (h + h.T) + np.diag(np.sort(rng.normal(size=n_orb)))
    eri = np.zeros((n_orb,) * 4)
    for i in range(n_orb):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    val = rng.normal(scale=scale / 2)
                    for (p, q) in ((i, j), (j, i)):
                        for (r, s) in ((k, l), (l, k)):
                            eri[p, q, r, s] = val
                            eri[r, s, p, q] = val
    return g.MolecularIntegrals(n_orb, 2, 0.0, h, eri)


def brute_force_gf(gs_amps, gs_energy, spec_plus, spec_minus, z, modes):
    """Lehmann GF by an explicit double loop over eigenstates and modes.

    Completely independent of exact_transitions: dense ladder matrices,
    per-eigenstate embedding, scalar accumulation.
    """
    m_count = len(modes)
    out = np.zeros((m_count, m_count), dtype=complex)
    for lam in range(spec_plus.dim):
        vec = spec_plus.embed(lam)
        denom = z + gs_energy - spec_plus.energies[lam]
        for m in range(m_count):
            left = np.vdot(gs_amps, modes[m] @ vec)
            for mp in range(m_count):
                right = np.vdot(vec, modes[mp].conj().T @ gs_amps)
                out[m, mp] += left * right / denom
    for lam in range(spec_minus.dim):
        vec = spec_minus.embed(lam)
        denom = z - gs_energy + spec_minus.energies[lam]
        for m in range(m_count):
            right = np.vdot(vec, modes[m] @ gs_amps)
            for mp in range(m_count):
                left = np.vdot(gs_amps, modes[mp].conj().T @ vec)
                out[m, mp] += left * right / denom
    return out


@pytest.fixture(scope="session")
def dimer():
    ints = g.builtin_model("hubbard_dimer", t=1.0, u=2.0)
    h = g.build_qubit_hamiltonian(ints)
    spec_minus, spec_n, spec_plus = (
        g.diagonalize_sector(h, k) for k in (1, 2, 3))
    gs = g.StateVector(4, spec_n.embed(0))
    tables = g.born_tables(gs, spec_plus, spec_minus)
    return SimpleNamespace(
        ints=ints, h=h, eps=g.hf_orbital_energies(ints),
        spec_minus=spec_minus, spec_n=spec_n, spec_plus=spec_plus,
        gs=gs, e_gs=float(spec_n.energies[0]), tables=tables)


@pytest.fixture(scope="session")
def lih():
    ints = g.read_fcidump(LIH_DUMP)
    h = g.build_qubit_hamiltonian(ints)
    spec_n = g.diagonalize_sector(h, 4)
    spec_plus = g.diagonalize_sector(h, 5)
    spec_minus = g.diagonalize_sector(h, 3)
    ansatz = g.builtin_ansatz("lih_u1")
    result = g.optimize(ansatz, h)
    gs, leak = project_number_sector(g.apply_ansatz(ansatz, result.theta), 4)
    return SimpleNamespace(
        ints=ints, h=h, eps=g.hf_orbital_energies(ints),
        spec_n=spec_n, spec_plus=spec_plus, spec_minus=spec_minus,
        ansatz=ansatz, vqe=result, gs=gs, leak=leak,
        e_gs=float(result.energy))


@pytest.fixture(scope="session")
def lih_tables(lih):
    return g.born_tables(lih.gs, lih.spec_plus, lih.spec_minus)


@pytest.fixture(scope="session")
def lih_exact_gf(lih):
    return g.calc_gf(lih.gs, lih.e_gs, lih.spec_plus, lih.spec_minus,
                     mode="exact")
