"""Exact diagonalization within fixed electron-number sectors.

The qubit Hamiltonian conserves total occupation, so its matrix is block
diagonal over bitstring-population sectors.  Each sector block is built
directly from the Pauli terms and diagonalized densely; eigenvectors are
stored in sector coordinates together with the basis index list.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliSum, PauliTerm
from .statevector import StateVector

DEGENERACY_TOL = 1e-9  # Ha; eigenvalues closer than this form one pole group

_CACHE_MAGIC = b"GFSIMSPC"
_CACHE_VERSION = 1


class ResourceError(RuntimeError):
    """Sector dimension exceeds the configured memory budget."""


class SectorLeakError(ValueError):
    """A register state has weight outside the expected sector."""


def sector_basis(n_qubits: int, n_electrons: int) -> np.ndarray:
    """Ascending basis indices of all bitstrings with the given population."""
    if not 0 <= n_electrons <= n_qubits:
        raise ValueError(
            f"electron count {n_electrons} out of range for {n_qubits} qubits")
    idx = np.arange(2 ** n_qubits, dtype=np.uint64)
    return idx[np.bitwise_count(idx) == n_electrons].astype(np.int64)


def project_number_sector(state: StateVector,
                          n_electrons: int) -> tuple[StateVector, float]:
    """Project onto one electron-number sector and renormalize.

    Returns the projected state and the discarded weight.  Product ansatze
    built from single Pauli strings leak a little weight into other sectors
    (second order in the angles), so preparation pipelines project before
    handing a ground state to the Green's-function machinery.
    """
    idx = np.arange(state.amps.size, dtype=np.uint64)
    mask = np.bitwise_count(idx) == n_electrons
    amps = np.where(mask, state.amps, 0.0)
    kept = float(np.sum(np.abs(amps) ** 2))
    if kept <= 0.0:
        raise SectorLeakError(
            f"state has no weight in the {n_electrons}-electron sector")
    return StateVector(state.n_qubits, amps / np.sqrt(kept)), 1.0 - kept


def total_number_operator(n_qubits: int) -> PauliSum:
    terms = [PauliTerm.identity(n_qubits, 0.5 * n_qubits)]
    for m in range(n_qubits):
        terms.append(PauliTerm.from_ops(n_qubits, [(m, "Z")], -0.5))
    return PauliSum(terms)


def commutes_with_number(h: PauliSum, tol: float = 1e-10) -> bool:
    num = total_number_operator(h.n_qubits)
    comm = h * num - num * h
    return all(abs(t.coeff) <= tol for t in comm)


def sector_hamiltonian(h: PauliSum, basis: np.ndarray) -> np.ndarray:
    """Dense matrix of h restricted to the span of the given basis states."""
    dim = basis.size
    mat = np.zeros((dim, dim), dtype=complex)
    src = basis.astype(np.uint64)
    cols = np.arange(dim)
    for term in h:
        flip, sign_mask, n_y = term.masks()
        tgt = (src ^ np.uint64(flip)).astype(np.int64)
        pos = np.searchsorted(basis, tgt)
        valid = (pos < dim)
        valid[valid] &= basis[pos[valid]] == tgt[valid]
        parity = (np.bitwise_count(src & np.uint64(sign_mask)) & 1).astype(bool)
        phase = term.coeff * (1j ** n_y)
        amp = np.where(parity, -phase, phase)
        mat[pos[valid], cols[valid]] += amp[valid]
    return mat


@dataclass
class SectorSpectrum:
    """Eigenvalues and eigenvectors of one electron-number sector."""

    n_qubits: int
    n_electrons: int
    basis: np.ndarray          # (dim,) ascending basis indices
    energies: np.ndarray       # (dim,) ascending eigenvalues, Ha
    vectors: np.ndarray        # (dim, dim); column k is eigenvector k
    degeneracy_tol: float = DEGENERACY_TOL
    _groups: list = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.basis.size

    def embed(self, k: int) -> np.ndarray:
        """Eigenvector k as a full 2^n amplitude array."""
        full = np.zeros(2 ** self.n_qubits, dtype=complex)
        full[self.basis] = self.vectors[:, k]
        return full

    def project(self, amps: np.ndarray) -> np.ndarray:
        """Restrict a full amplitude array to sector coordinates."""
        return amps[self.basis]

    def groups(self) -> list[np.ndarray]:
        """Indices of eigenstates grouped by degenerate eigenvalue."""
        if self._groups is None:
            splits = np.nonzero(
                np.diff(self.energies) > self.degeneracy_tol)[0] + 1
            self._groups = np.split(np.arange(self.dim), splits)
        return self._groups

    def group_energies(self) -> np.ndarray:
        return np.array([self.energies[g].mean() for g in self.groups()])

    def group_index(self) -> np.ndarray:
        """Group id of each eigenstate, aligned with the eigenvalue order."""
        out = np.empty(self.dim, dtype=np.int64)
        for gid, g in enumerate(self.groups()):
            out[g] = gid
        return out

    def group_weights(self, amps: np.ndarray) -> np.ndarray:
        """Squared overlaps with each pole group for a full-space state."""
        coeffs = self.vectors.conj().T @ self.project(amps)
        return np.bincount(self.group_index(), weights=np.abs(coeffs) ** 2,
                           minlength=len(self.groups()))


def diagonalize_sector(h: PauliSum, n_electrons: int,
                       max_dim: int = 4096,
                       check_number: bool = True) -> SectorSpectrum:
    """Full dense eigendecomposition of one electron-number block."""
    if check_number and not commutes_with_number(h):
        raise ValueError("Hamiltonian does not conserve particle number")
    basis = sector_basis(h.n_qubits, n_electrons)
    if basis.size > max_dim:
        raise ResourceError(
            f"sector dimension {basis.size} exceeds budget {max_dim}")
    mat = sector_hamiltonian(h, basis)
    if np.abs(mat.imag).max(initial=0.0) < 1e-14:
        energies, vectors = np.linalg.eigh(mat.real)
        vectors = vectors.astype(complex)
    else:
        energies, vectors = np.linalg.eigh(mat)
    return SectorSpectrum(h.n_qubits, n_electrons, basis,
                          energies, vectors)


def ideal_qpe_sample(register: StateVector, spectrum: SectorSpectrum,
                     rng: np.random.Generator,
                     leak_tol: float = 1e-8) -> float:
    """Sample an eigenvalue with Born probability from a sector state.

    Degenerate eigenvalues are aggregated by summed weight before sampling,
    so every draw corresponds to one pole group.
    """
    amps = register.amps
    weights = spectrum.group_weights(amps)
    total = float(np.vdot(amps, amps).real)
    leak = total - float(weights.sum())
    if leak > leak_tol:
        raise SectorLeakError(
            f"state has weight {leak:.3e} outside the "
            f"{spectrum.n_electrons}-electron sector")
    probs = weights / weights.sum()
    drawn = int(rng.choice(probs.size, p=probs))
    return float(spectrum.group_energies()[drawn])


# Spectrum cache -------------------------------------------------------------

def hamiltonian_hash(h: PauliSum) -> bytes:
    return hashlib.sha256(h.canonical_bytes()).digest()


def save_spectra(path, h: PauliSum, spectra: list[SectorSpectrum]) -> None:
    """Write sector spectra as versioned raw little-endian arrays."""
    with open(path, "wb") as f:
        f.write(_CACHE_MAGIC)
        f.write(struct.pack("<I", _CACHE_VERSION))
        f.write(hamiltonian_hash(h))
        f.write(struct.pack("<I", len(spectra)))
        for s in spectra:
            f.write(struct.pack("<III", s.n_qubits, s.n_electrons, s.dim))
            f.write(s.basis.astype("<i8").tobytes())
            f.write(s.energies.astype("<f8").tobytes())
            f.write(s.vectors.astype("<c16").tobytes())


def load_spectra(path, h: PauliSum) -> list[SectorSpectrum]:
    """Read back cached spectra; the Hamiltonian hash must match."""
    with open(path, "rb") as f:
        if f.read(len(_CACHE_MAGIC)) != _CACHE_MAGIC:
            raise ValueError("not a spectrum cache file")
        (version,) = struct.unpack("<I", f.read(4))
        if version != _CACHE_VERSION:
            raise ValueError(f"unsupported cache version {version}")
        if f.read(32) != hamiltonian_hash(h):
            raise ValueError("cache was built for a different Hamiltonian")
        (count,) = struct.unpack("<I", f.read(4))
        spectra = []
        for _ in range(count):
            n_qubits, n_elec, dim = struct.unpack("<III", f.read(12))
            basis = np.frombuffer(f.read(8 * dim), dtype="<i8").copy()
            energies = np.frombuffer(f.read(8 * dim), dtype="<f8").copy()
            vectors = np.frombuffer(
                f.read(16 * dim * dim), dtype="<c16").reshape(dim, dim).copy()
            spectra.append(SectorSpectrum(n_qubits, n_elec, basis,
                                          energies, vectors))
    return spectra
