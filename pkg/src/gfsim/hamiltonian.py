"""Molecular-integral ingestion and qubit-Hamiltonian construction.

Integrals come either from FCIDUMP text (chemists' notation, 8-fold
permutational symmetry, Hartree units) or from the built-in model systems.
Orbital energies are derived from the integrals assuming canonical RHF
orbitals with aufbau occupation.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum, PauliTerm, jw_transform

_EIGHTFOLD = ((0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
              (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0))


class FcidumpError(ValueError):
    """Malformed FCIDUMP input."""


@dataclass(frozen=True)
class MolecularIntegrals:
    n_orb: int
    n_elec: int
    e_nucl: float
    h: np.ndarray    # (n_orb, n_orb) one-electron integrals, Ha
    eri: np.ndarray  # (n_orb,)*4 two-electron integrals (pq|rs), Ha

    def __post_init__(self):
        if self.n_elec % 2:
            raise ValueError("electron count must be even (closed shell)")
        if not np.allclose(self.h, self.h.T, atol=1e-10):
            raise ValueError("one-electron matrix is not symmetric")

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_orb

    @property
    def n_occupied(self) -> int:
        return self.n_elec // 2


def parse_fcidump(text: str) -> MolecularIntegrals:
    """Parse FCIDUMP text into integral arrays.

    Accepts Fortran-style 1.0D-03 exponents; the header must define NORB and
    NELEC and end with &END or /.
    """
    lines = text.splitlines()
    header_parts: list[str] = []
    body_start = None
    for ln, line in enumerate(lines):
        stripped = line.strip()
        header_parts.append(stripped)
        if stripped.endswith("&END") or stripped.endswith("/"):
            body_start = ln + 1
            break
    if body_start is None:
        raise FcidumpError("no &END (or /) header terminator found")

    header = " ".join(header_parts)
    fields = {}
    for key, val in re.findall(r"([A-Za-z0-9_]+)\s*=\s*([^=,\s]+)", header):
        fields[key.upper()] = val
    try:
        n_orb = int(fields["NORB"])
        n_elec = int(fields["NELEC"])
    except KeyError as missing:
        raise FcidumpError(f"header field {missing} missing") from None

    h = np.zeros((n_orb, n_orb))
    eri = np.zeros((n_orb,) * 4)
    e_nucl = 0.0
    for ln in range(body_start, len(lines)):
        tokens = lines[ln].split()
        if not tokens:
            continue
        if len(tokens) != 5:
            raise FcidumpError(f"line {ln + 1}: expected 'value i j k l'")
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError:
            raise FcidumpError(f"line {ln + 1}: non-numeric token") from None
        if max(i, j, k, l) > n_orb:
            raise FcidumpError(f"line {ln + 1}: index exceeds NORB={n_orb}")
        if i == j == k == l == 0:
            e_nucl = value
        elif k == 0 and l == 0:
            if min(i, j) < 1:
                raise FcidumpError(f"line {ln + 1}: bad one-electron indices")
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        else:
            if min(i, j, k, l) < 1:
                raise FcidumpError(f"line {ln + 1}: bad two-electron indices")
            quad = (i - 1, j - 1, k - 1, l - 1)
            for perm in _EIGHTFOLD:
                eri[tuple(quad[p] for p in perm)] = value
    return MolecularIntegrals(n_orb, n_elec, e_nucl, h, eri)


def read_fcidump(path) -> MolecularIntegrals:
    with open(path, encoding="utf-8") as f:
        return parse_fcidump(f.read())


def dump_fcidump(ints: MolecularIntegrals, thresh: float = 0.0) -> str:
    """Serialize integrals back to FCIDUMP text (8-fold unique entries)."""
    n = ints.n_orb
    lines = [f"&FCI NORB={n},NELEC={ints.n_elec},MS2=0,",
             " ORBSYM=" + "1," * n,
             " ISYM=1,",
             "&END"]
    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    val = ints.eri[i, j, k, l]
                    if abs(val) > thresh:
                        lines.append(
                            f"{val: .16E} {i+1:4d} {j+1:4d} {k+1:4d} {l+1:4d}")
    for i in range(n):
        for j in range(i + 1):
            if abs(ints.h[i, j]) > thresh:
                lines.append(f"{ints.h[i, j]: .16E} {i+1:4d} {j+1:4d}"
                             f" {0:4d} {0:4d}")
    lines.append(f"{ints.e_nucl: .16E} {0:4d} {0:4d} {0:4d} {0:4d}")
    return "\n".join(lines) + "\n"


def hf_orbital_energies(ints: MolecularIntegrals) -> np.ndarray:
    """Diagonal Fock-matrix elements for aufbau-occupied canonical orbitals."""
    occ = range(ints.n_occupied)
    eps = np.empty(ints.n_orb)
    for p in range(ints.n_orb):
        eps[p] = ints.h[p, p] + sum(
            2.0 * ints.eri[p, p, q, q] - ints.eri[p, q, q, p] for q in occ)
    return eps


def hf_energy(ints: MolecularIntegrals,
              eps: np.ndarray | None = None) -> float:
    """Restricted HF total energy from integrals and orbital energies."""
    if eps is None:
        eps = hf_orbital_energies(ints)
    occ = range(ints.n_occupied)
    return ints.e_nucl + sum(ints.h[p, p] + eps[p] for p in occ)


def build_qubit_hamiltonian(ints: MolecularIntegrals) -> PauliSum:
    """Jordan-Wigner qubit Hamiltonian over 2*n_orb interleaved spin orbitals.

    The nuclear-repulsion constant is carried on the identity term so the
    sector ground eigenvalue is directly the total electronic energy.
    """
    n = ints.n_spin_orbitals
    pieces = [PauliSum([PauliTerm.identity(n, ints.e_nucl)])]
    for p in range(ints.n_orb):
        for q in range(ints.n_orb):
            coeff = ints.h[p, q]
            if abs(coeff) < 1e-14:
                continue
            for s in (0, 1):
                pieces.append(jw_transform(
                    coeff, [(2 * p + s, True), (2 * q + s, False)], n))
    for p in range(ints.n_orb):
        for q in range(ints.n_orb):
            for r in range(ints.n_orb):
                for s_orb in range(ints.n_orb):
                    coeff = ints.eri[p, q, r, s_orb]
                    if abs(coeff) < 1e-14:
                        continue
                    for s1 in (0, 1):
                        for s2 in (0, 1):
                            a = 2 * p + s1
                            b = 2 * r + s2
                            c = 2 * s_orb + s2
                            d = 2 * q + s1
                            if a == b or c == d:
                                continue
                            pieces.append(jw_transform(
                                0.5 * coeff,
                                [(a, True), (b, True), (c, False), (d, False)],
                                n))
    total = PauliSum([t for piece in pieces for t in piece])
    return total


def builtin_model(name: str, **params) -> MolecularIntegrals:
    """Self-contained model systems expressed as molecular integrals.

    single_level(eps): one spatial orbital at energy eps, no interaction,
    two electrons.  hubbard_dimer(t, u): two-site Hubbard model at half
    filling, written in the bonding/antibonding orbital basis so the
    canonical-RHF assumption of the orbital-energy derivation holds.
    """
    if name == "single_level":
        eps = float(params.get("eps", -1.0))
        return MolecularIntegrals(1, 2, 0.0, np.array([[eps]]),
                                  np.zeros((1, 1, 1, 1)))
    if name == "hubbard_dimer":
        t = float(params.get("t", 1.0))
        u = float(params.get("u", params.get("U", 2.0)))
        h = np.diag([-t, +t])
        eri = np.zeros((2, 2, 2, 2))
        half = u / 2.0
        # On-site repulsion in the orbital basis: all integrals with an even
        # number of bonding/antibonding indices per charge distribution.
        for idx in [(0, 0, 0, 0), (1, 1, 1, 1), (0, 0, 1, 1), (1, 1, 0, 0),
                    (0, 1, 0, 1), (1, 0, 1, 0), (0, 1, 1, 0), (1, 0, 0, 1)]:
            eri[idx] = half
        return MolecularIntegrals(2, 2, 0.0, h, eri)
    raise ValueError(f"unknown builtin model {name!r}")
