"""Transition matrices, Lehmann Green's functions, spectral functions,
self-energy, density matrix, and Galitskii-Migdal energies.

Exact mode projects ladder-operator images of the ground state onto the
(N±1)-sector eigenstates.  Sampled mode reproduces the measurement protocol:
each preparation circuit is simulated once, the joint Born distribution over
(ancilla outcome, pole group) bins is read off its branches, and histograms
are drawn from that distribution.  Pole groups reuse the eigensolver's
degeneracy threshold so histogram keys and Lehmann poles coincide.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .constants import EV_PER_HARTREE
from .eigensolver import SectorSpectrum
from .hamiltonian import MolecularIntegrals, hf_energy, hf_orbital_energies
from .pauli import jw_ladder
from .statevector import (StateVector, apply_pauli_sum, build_diag_circuit,
                          build_offdiag_circuit, run)

_EIP4 = np.exp(1j * np.pi / 4)


class SectorMismatchError(ValueError):
    """Ground state does not live in the expected electron-number sector."""


class PoleProximityError(ValueError):
    """Requested frequency is too close to a pole of the Green's function."""


class ContourError(ValueError):
    """Integration contour passes too close to a pole."""


@dataclass(frozen=True)
class TransitionData:
    """Per-pole-group transition matrices for both excitation branches."""

    electron_energies: np.ndarray  # (Ge,) group energies in the N+1 sector
    hole_energies: np.ndarray      # (Gh,)
    electron: np.ndarray           # (Ge, M, M) complex
    hole: np.ndarray               # (Gh, M, M) complex
    provenance: dict = field(default_factory=dict)

    @property
    def n_spin_orbitals(self) -> int:
        return self.electron.shape[1]

    def sum_rule_matrix(self) -> np.ndarray:
        """Sum over all groups and branches; identity for exact data."""
        return self.electron.sum(axis=0) + self.hole.sum(axis=0)


@dataclass(frozen=True)
class LehmannGF:
    """Pole energies and residue matrices of a one-particle Green's function."""

    electron_poles: np.ndarray     # (Ge,) omega = E^{N+1} - E_gs, Ha
    electron_residues: np.ndarray  # (Ge, M, M)
    hole_poles: np.ndarray         # (Gh,) omega = E_gs - E^{N-1}, Ha
    hole_residues: np.ndarray      # (Gh, M, M)
    provenance: dict = field(default_factory=dict)

    @classmethod
    def from_transitions(cls, td: TransitionData,
                         gs_energy: float) -> "LehmannGF":
        return cls(td.electron_energies - gs_energy, td.electron,
                   gs_energy - td.hole_energies, td.hole,
                   dict(td.provenance))

    @property
    def n_spin_orbitals(self) -> int:
        return self.electron_residues.shape[1]

    def poles(self) -> np.ndarray:
        return np.concatenate([self.hole_poles, self.electron_poles])

    def residues(self) -> np.ndarray:
        return np.concatenate([self.hole_residues, self.electron_residues])

    @property
    def chemical_potential(self) -> float:
        return 0.5 * (float(self.hole_poles.max())
                      + float(self.electron_poles.min()))

    def evaluate(self, z) -> np.ndarray:
        """G(z) as partial fractions; z may be any complex array."""
        z = np.asarray(z, dtype=complex)
        weights = 1.0 / (z[..., None] - self.poles())
        return np.einsum("...g,gij->...ij", weights, self.residues())

    def trace(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        tr = np.trace(self.residues(), axis1=1, axis2=2)
        return (tr / (z[..., None] - self.poles())).sum(axis=-1)

    def spin_block(self, spin: int) -> "LehmannGF":
        """Restriction to one spin (even/odd interleaved orbitals)."""
        s = slice(spin, None, 2)
        return LehmannGF(self.electron_poles, self.electron_residues[:, s, s],
                         self.hole_poles, self.hole_residues[:, s, s],
                         self.provenance)


@dataclass
class Histogram:
    """Measurement tallies keyed by (ancilla outcome pattern, pole group)."""

    counts: dict
    n_meas: int

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.n_meas:
            raise ValueError(f"counts sum to {total}, expected {self.n_meas}")


@dataclass(frozen=True)
class GmReport:
    """Total-energy decomposition E_GM = E_HF + dE1 + dE2 (all Hartree)."""

    delta_e1: float
    delta_e2: float
    e_hf: float
    gamma: np.ndarray  # (2, n_orb, n_orb) one-particle density matrix

    @property
    def e_gm(self) -> float:
        return self.e_hf + self.delta_e1 + self.delta_e2

    def as_ev(self) -> dict:
        return {k: getattr(self, k) * EV_PER_HARTREE
                for k in ("delta_e1", "delta_e2", "e_hf", "e_gm")}


# Exact transition matrices --------------------------------------------------

def _sector_weight(amps: np.ndarray, n_qubits: int, n_elec: int) -> float:
    idx = np.arange(2 ** n_qubits, dtype=np.uint64)
    mask = np.bitwise_count(idx) == n_elec
    return float(np.sum(np.abs(amps[mask]) ** 2))


def _check_sectors(gs: StateVector, spec_plus: SectorSpectrum | None,
                   spec_minus: SectorSpectrum | None,
                   tol: float = 1e-8) -> int:
    """Validate that gs sits between the two sectors; returns N.

    Either spectrum may be None for the degenerate cases (vacuum ground
    state has no hole sector, a completely filled register no electron
    sector)."""
    if spec_plus is None and spec_minus is None:
        raise SectorMismatchError("at least one excitation sector is needed")
    n_from_plus = None if spec_plus is None else spec_plus.n_electrons - 1
    n_from_minus = None if spec_minus is None else spec_minus.n_electrons + 1
    if (n_from_plus is not None and n_from_minus is not None
            and n_from_plus != n_from_minus):
        raise SectorMismatchError(
            "spectra are not the (N+1) and (N-1) sectors of one system")
    n_elec = n_from_plus if n_from_plus is not None else n_from_minus
    weight = _sector_weight(gs.amps, gs.n_qubits, n_elec)
    if abs(weight - 1.0) > tol:
        raise SectorMismatchError(
            f"ground state has weight {1 - weight:.3e} outside the "
            f"{n_elec}-electron sector")
    return n_elec


def _ladder_images(gs: StateVector, spectrum: SectorSpectrum,
                   dagger: bool) -> np.ndarray:
    """Overlaps <Psi_lambda| a_m(†) |gs> for all eigenstates and modes."""
    n = gs.n_qubits
    cols = []
    for m in range(n):
        op = jw_ladder(m, n, dagger)
        cols.append(spectrum.project(apply_pauli_sum(gs.amps, op)))
    proj = np.stack(cols, axis=1)            # (dim, M)
    return spectrum.vectors.conj().T @ proj  # (dim, M), row = eigenstate


def _group_sum(per_state: np.ndarray, spectrum: SectorSpectrum) -> np.ndarray:
    """Sum a leading per-eigenstate axis into pole groups."""
    groups = spectrum.groups()
    out = np.empty((len(groups),) + per_state.shape[1:], dtype=per_state.dtype)
    for gid, g in enumerate(groups):
        out[gid] = per_state[g].sum(axis=0)
    return out


def exact_transitions(gs: StateVector, spec_plus: SectorSpectrum | None,
                      spec_minus: SectorSpectrum | None) -> TransitionData:
    """Transition matrices from eigenstate overlaps (no sampling)."""
    _check_sectors(gs, spec_plus, spec_minus)
    m = gs.n_qubits
    if spec_plus is not None:
        c_e = _ladder_images(gs, spec_plus, dagger=True)
        b_e = _group_sum(np.einsum("lm,ln->lmn", c_e.conj(), c_e), spec_plus)
        e_energies = spec_plus.group_energies()
        tol = spec_plus.degeneracy_tol
    else:
        b_e = np.zeros((0, m, m), dtype=complex)
        e_energies = np.zeros(0)
        tol = spec_minus.degeneracy_tol
    if spec_minus is not None:
        d_h = _ladder_images(gs, spec_minus, dagger=False)
        b_h = _group_sum(np.einsum("lm,ln->lmn", d_h, d_h.conj()), spec_minus)
        h_energies = spec_minus.group_energies()
    else:
        b_h = np.zeros((0, m, m), dtype=complex)
        h_energies = np.zeros(0)
    return TransitionData(e_energies, h_energies, b_e, b_h,
                          {"mode": "exact", "degeneracy_tol": tol})


# Born distributions of the preparation circuits -----------------------------

@dataclass(frozen=True)
class SamplingTables:
    """Exact joint outcome distributions for every circuit the sampler runs.

    diag[m] holds (electron-branch, hole-branch) group probabilities of the
    one-ancilla circuit.  aux_e[(a, b)] holds the (+, -) electron-branch
    overlap tables of the two-ancilla circuit run with mode order (a, b);
    aux_h is keyed by the ordering whose hole combination it measures, which
    is the reverse of the run order.
    """

    electron_energies: np.ndarray
    hole_energies: np.ndarray
    diag: list
    aux_e: dict
    aux_h: dict
    provenance: dict = field(default_factory=dict)

    @property
    def n_spin_orbitals(self) -> int:
        return len(self.diag)


def born_tables(gs: StateVector, spec_plus: SectorSpectrum,
                spec_minus: SectorSpectrum,
                pairs: Iterable[tuple[int, int]] | None = None
                ) -> SamplingTables:
    """Simulate each preparation circuit once and read off its branch
    distributions.

    pairs restricts the off-diagonal circuits to the given (m, m') set
    (both orderings are always run); default is every m > m' pair.
    """
    _check_sectors(gs, spec_plus, spec_minus)
    n = gs.n_qubits
    diag = []
    for m in range(n):
        out = run(build_diag_circuit(m, n), gs.extended(n + 1))
        branches = out.amps.reshape(2, -1)
        diag.append((spec_plus.group_weights(branches[1]),
                     spec_minus.group_weights(branches[0])))

    if pairs is None:
        pairs = [(m, mp) for m in range(n) for mp in range(m)]
    aux_e: dict = {}
    aux_h: dict = {}
    for m, mp in pairs:
        for a, b in ((m, mp), (mp, m)):
            out = run(build_offdiag_circuit(a, b, n), gs.extended(n + 2))
            branches = out.amps.reshape(2, 2, -1)  # [q1][q0]
            aux_e[(a, b)] = (spec_plus.group_weights(branches[0][1]),
                             spec_plus.group_weights(branches[1][1]))
            aux_h[(b, a)] = (spec_minus.group_weights(branches[0][0]),
                             spec_minus.group_weights(branches[1][0]))
    return SamplingTables(
        spec_plus.group_energies(), spec_minus.group_energies(),
        diag, aux_e, aux_h,
        {"degeneracy_tol": spec_plus.degeneracy_tol})


def recover_offdiagonal(d_plus_mm: np.ndarray, d_minus_mm: np.ndarray,
                        d_plus_pm: np.ndarray, d_minus_pm: np.ndarray
                        ) -> np.ndarray:
    """Combine the four overlap tables of a mode pair into B_(m m')."""
    return (_EIP4.conj() * (d_plus_mm - d_minus_mm)
            + _EIP4 * (d_plus_pm - d_minus_pm))


def _multinomial(probs: np.ndarray, n_meas: int,
                 rng: np.random.Generator) -> np.ndarray:
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"branch probabilities sum to {total}, not 1")
    return rng.multinomial(n_meas, probs / total)


def sample_diag(tables: SamplingTables, m: int, n_meas: int,
                rng: np.random.Generator
                ) -> tuple[Histogram, np.ndarray, np.ndarray]:
    """Histogram-sample one diagonal component.

    Returns the histogram plus the electron- and hole-branch estimates of
    the diagonal transition-matrix entries (counts / n_meas per pole group).
    """
    p_e, p_h = tables.diag[m]
    counts = _multinomial(np.concatenate([p_h, p_e]), n_meas, rng)
    c_h, c_e = counts[: p_h.size], counts[p_h.size:]
    hist = Histogram(
        {("0", g): int(c) for g, c in enumerate(c_h)}
        | {("1", g): int(c) for g, c in enumerate(c_e)}, n_meas)
    return hist, c_e / n_meas, c_h / n_meas


def _sample_aux(tables: SamplingTables, a: int, b: int, n_meas: int,
                rng: np.random.Generator):
    """Sample the two-ancilla circuit run with mode order (a, b)."""
    de_p, de_m = tables.aux_e[(a, b)]
    dh_p, dh_m = tables.aux_h[(b, a)]
    layout = [("01", de_p), ("11", de_m), ("00", dh_p), ("10", dh_m)]
    probs = np.concatenate([block for _, block in layout])
    counts = _multinomial(probs, n_meas, rng)
    est = {}
    hist_counts = {}
    start = 0
    for pattern, block in layout:
        c = counts[start: start + block.size]
        start += block.size
        est[pattern] = c / n_meas
        hist_counts.update({(pattern, g): int(v) for g, v in enumerate(c)})
    hist = Histogram(hist_counts, n_meas)
    return est, hist


def sample_offdiag(tables: SamplingTables, m: int, m_prime: int, n_meas: int,
                   rng: np.random.Generator
                   ) -> tuple[np.ndarray, np.ndarray, dict]:
    """Histogram-sample one off-diagonal component via both mode orderings.

    Returns per-group estimates of the electron and hole off-diagonal
    entries B_(m m'), and the two histograms keyed by run ordering.
    """
    if m == m_prime:
        raise ValueError("mode indices must differ")
    est_mm, hist_mm = _sample_aux(tables, m, m_prime, n_meas, rng)
    est_pm, hist_pm = _sample_aux(tables, m_prime, m, n_meas, rng)
    # Electron tables follow the run ordering; hole tables the reverse.
    b_e = recover_offdiagonal(est_mm["01"], est_mm["11"],
                              est_pm["01"], est_pm["11"])
    b_h = recover_offdiagonal(est_pm["00"], est_pm["10"],
                              est_mm["00"], est_mm["10"])
    return b_e, b_h, {(m, m_prime): hist_mm, (m_prime, m): hist_pm}


def sampled_transitions(tables: SamplingTables, n_meas: int,
                        rng: np.random.Generator,
                        provenance: dict | None = None) -> TransitionData:
    """One full statistical simulation of all transition-matrix components.

    Every diagonal uses its one-ancilla histogram and every pair m > m' its
    two two-ancilla histograms; the (m', m) entries are filled by complex
    conjugation.  Estimates are used as-is (no Hermitization of noise).
    """
    n = tables.n_spin_orbitals
    ge = tables.electron_energies.size
    gh = tables.hole_energies.size
    b_e = np.zeros((ge, n, n), dtype=complex)
    b_h = np.zeros((gh, n, n), dtype=complex)
    for m in range(n):
        _, diag_e, diag_h = sample_diag(tables, m, n_meas, rng)
        b_e[:, m, m] = diag_e
        b_h[:, m, m] = diag_h
    for m in range(n):
        for mp in range(m):
            off_e, off_h, _ = sample_offdiag(tables, m, mp, n_meas, rng)
            b_e[:, m, mp] = off_e
            b_e[:, mp, m] = off_e.conj()
            b_h[:, m, mp] = off_h
            b_h[:, mp, m] = off_h.conj()
    prov = {"mode": "sampled", "n_meas": n_meas,
            "degeneracy_tol": tables.provenance.get("degeneracy_tol")}
    if provenance:
        prov.update(provenance)
    return TransitionData(tables.electron_energies, tables.hole_energies,
                          b_e, b_h, prov)


def calc_gf(gs: StateVector, gs_energy: float, spec_plus: SectorSpectrum,
            spec_minus: SectorSpectrum, mode: str = "exact",
            n_meas: int | None = None,
            rng: np.random.Generator | None = None,
            tables: SamplingTables | None = None) -> LehmannGF:
    """Assemble the matrix-valued Green's function in exact or sampled mode."""
    if mode == "exact":
        td = exact_transitions(gs, spec_plus, spec_minus)
    elif mode == "sampled":
        if n_meas is None or n_meas < 1:
            raise ValueError("sampled mode needs n_meas >= 1")
        if rng is None:
            raise ValueError("sampled mode needs an rng")
        if tables is None:
            tables = born_tables(gs, spec_plus, spec_minus)
        td = sampled_transitions(tables, n_meas, rng)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return LehmannGF.from_transitions(td, gs_energy)


# Spectra, self-energy, density matrix ---------------------------------------

def spectral_function(gf: LehmannGF, omega, delta: float) -> np.ndarray:
    """A(omega) = -(1/pi) Im Tr G(omega + i delta); all units Hartree."""
    if delta <= 0:
        raise ValueError("broadening delta must be positive")
    omega = np.asarray(omega, dtype=float)
    return -np.imag(gf.trace(omega + 1j * delta)) / np.pi


def hf_green_function(eps: np.ndarray, n_elec: int) -> LehmannGF:
    """Noninteracting reference: one pole per spatial orbital, unit residue
    on both of its spin orbitals."""
    n_orb = eps.size
    n_occ = n_elec // 2
    m = 2 * n_orb

    def residues(orbitals):
        out = np.zeros((len(orbitals), m, m), dtype=complex)
        for k, p in enumerate(orbitals):
            out[k, 2 * p, 2 * p] = out[k, 2 * p + 1, 2 * p + 1] = 1.0
        return out

    return LehmannGF(eps[n_occ:].astype(float),
                     residues(range(n_occ, n_orb)),
                     eps[:n_occ].astype(float), residues(range(n_occ)),
                     {"mode": "hf"})


def self_energy(gf: LehmannGF, eps: np.ndarray, z,
                cond_limit: float = 1e12) -> np.ndarray:
    """Correlation self-energy G_HF(z)^-1 - G(z)^-1 per spin block.

    Returns shape z.shape + (2, n_orb, n_orb).
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    zf = np.atleast_1d(z)
    g = gf.evaluate(zf)
    n_orb = eps.size
    out = np.empty(zf.shape + (2, n_orb, n_orb), dtype=complex)
    ghf_inv = (zf[:, None, None] * np.eye(n_orb) - np.diag(eps))
    for s in (0, 1):
        block = g[:, s::2, s::2]
        cond = np.linalg.cond(block)
        if np.any(cond > cond_limit):
            bad = zf[np.argmax(cond)]
            raise PoleProximityError(
                f"G(z) is near-singular at z = {bad:.6g} "
                "(condition number above limit); shift the frequency grid")
        out[:, s] = ghf_inv - np.linalg.inv(block)
    return out[0] if scalar else out


def density_matrix(gf: LehmannGF) -> np.ndarray:
    """One-particle density matrix per spin from the hole-residue sums."""
    n_orb = gf.n_spin_orbitals // 2
    out = np.empty((2, n_orb, n_orb), dtype=complex)
    for s in (0, 1):
        out[s] = gf.hole_residues[:, s::2, s::2].sum(axis=0)
    return out


def hf_density_matrix(n_orb: int, n_elec: int) -> np.ndarray:
    gamma = np.zeros((2, n_orb, n_orb), dtype=complex)
    occ = n_elec // 2
    for s in (0, 1):
        gamma[s, :occ, :occ] = np.eye(occ)
    return gamma


# Contour integration --------------------------------------------------------

def _rectangle_nodes(x0: float, x1: float, half_height: float,
                     n_per_edge: int) -> tuple[np.ndarray, np.ndarray]:
    """Counterclockwise Gauss-Legendre nodes and dz weights on a rectangle."""
    t, w = leggauss(n_per_edge)
    nodes, weights = [], []
    # bottom: x0 -> x1 at -ih ; top: x1 -> x0 at +ih (dz = -dx)
    xm, xr = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
    nodes.append(xm + xr * t - 1j * half_height)
    weights.append(xr * w + 0j)
    nodes.append(xm - xr * t + 1j * half_height)
    weights.append(-xr * w + 0j)
    # right: -h -> +h at x1 ; left: +h -> -h at x0 (dz = -i dy)
    nodes.append(x1 + 1j * half_height * t)
    weights.append(1j * half_height * w)
    nodes.append(x0 - 1j * half_height * t)
    weights.append(-1j * half_height * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _hole_contour(gf: LehmannGF, margin: float = 0.5,
                  half_height: float = 0.5,
                  guard: float = 1e-6) -> tuple[float, float, float]:
    """Rectangle enclosing every Green's-function pole below mu."""
    mu = gf.chemical_potential
    x0 = float(gf.hole_poles.min()) - margin
    poles = gf.poles()
    inside = (poles > x0) & (poles < mu)
    dist = np.where(
        inside,
        np.minimum(np.minimum(poles - x0, mu - poles), half_height),
        np.minimum(np.abs(poles - x0), np.abs(poles - mu)))
    if dist.min() < guard:
        raise ContourError(
            f"a pole lies within {guard} Ha of the contour; widen the "
            "rectangle (margin/half_height) or check the pole structure")
    return x0, mu, half_height


def _adaptive_contour(func, gf: LehmannGF, start_nodes: int = 64,
                      tol: float = 1e-8, max_nodes: int = 2048):
    """Quadrature of func(z) / (2 pi i) over the hole contour, doubling the
    node count per edge until the result is stable."""
    x0, x1, hh = _hole_contour(gf)
    n = start_nodes
    prev = None
    while True:
        z, w = _rectangle_nodes(x0, x1, hh, n)
        val = (func(z) @ w) / (2j * np.pi)
        if prev is not None and np.max(np.abs(val - prev)) < tol:
            return val
        if n >= max_nodes:
            return val
        prev = val
        n *= 2


def contour_density_matrix(gf: LehmannGF, tol: float = 1e-10) -> np.ndarray:
    """Density matrix via the contour integral of G; cross-check for the
    analytic hole-residue sum."""
    n_orb = gf.n_spin_orbitals // 2

    def integrand(z):
        g = gf.evaluate(z)
        blocks = np.stack([g[:, s::2, s::2] for s in (0, 1)], axis=1)
        return np.moveaxis(blocks, 0, -1).reshape(-1, z.size)

    flat = _adaptive_contour(integrand, gf, tol=tol)
    return flat.reshape(2, n_orb, n_orb)


def gm_energy(gf: LehmannGF, ints: MolecularIntegrals,
              eps: np.ndarray | None = None, tol: float = 1e-8) -> GmReport:
    """Total energy from the Green's function alone.

    dE1 is the one-body correction from the density-matrix change; dE2 is
    the rectangular-contour quadrature of the self-energy convolution.
    """
    if eps is None:
        eps = hf_orbital_energies(ints)
    e_hf = hf_energy(ints, eps)
    gamma = density_matrix(gf)
    gamma_hf = hf_density_matrix(ints.n_orb, ints.n_elec)
    one_body = ints.h + np.diag(eps)
    delta_e1 = 0.5 * sum(
        np.trace(one_body @ (gamma[s] - gamma_hf[s])).real for s in (0, 1))

    def integrand(z):
        sigma = self_energy(gf, eps, z)
        g = gf.evaluate(z)
        total = np.zeros(z.shape, dtype=complex)
        for s in (0, 1):
            total += np.einsum("zij,zji->z", sigma[:, s], g[:, s::2, s::2])
        return total[None, :]

    delta_e2 = 0.5 * float(
        _adaptive_contour(integrand, gf, tol=tol)[0].real)
    return GmReport(float(delta_e1), delta_e2, float(e_hf), gamma)
