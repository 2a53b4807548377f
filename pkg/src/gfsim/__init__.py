"""Classical simulator for constructing one-particle Green's functions via
probabilistic state preparation and histogram sampling, with the exact
reference pipeline (sector diagonalization, variational ground states,
Lehmann spectra, self-energies, Galitskii-Migdal energies) used to validate
the sampled results."""

from .constants import EV_PER_HARTREE
from .eigensolver import (SectorSpectrum, diagonalize_sector, ideal_qpe_sample,
                          sector_basis)
from .greens import (GmReport, Histogram, LehmannGF, SamplingTables,
                     TransitionData, born_tables, calc_gf, density_matrix,
                     exact_transitions, gm_energy, hf_green_function,
                     sample_diag, sample_offdiag, sampled_transitions,
                     self_energy, spectral_function)
from .hamiltonian import (MolecularIntegrals, build_qubit_hamiltonian,
                          builtin_model, hf_energy, hf_orbital_energies,
                          parse_fcidump, read_fcidump)
from .pauli import (PauliSum, PauliTerm, aux_ladder, jw_ladder,
                    jw_majorana_pair, jw_transform, multiply)
from .statevector import (Circuit, MeasurementRecord, StateVector,
                          build_diag_circuit, build_offdiag_circuit,
                          expectation, measure, run)
from .vqe import (Ansatz, OptimizeConfig, VqeResult, apply_ansatz,
                  builtin_ansatz, energy, optimize, prepare_reference)

__all__ = [name for name in dir() if not name.startswith("_")]
