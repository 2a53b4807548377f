"""FCIDUMP parsing, orbital energies, model systems, qubit Hamiltonians."""
import numpy as np
import pytest

import gfsim as g
from gfsim.eigensolver import (commutes_with_number, diagonalize_sector,
                               total_number_operator)
from gfsim.hamiltonian import FcidumpError, dump_fcidump, parse_fcidump

from conftest import H2O_DUMP, LIH_DUMP

MINIMAL = """&FCI NORB=1,NELEC=2,MS2=0,
 ORBSYM=1,
 ISYM=1,
&END
 0.5    1 1 0 0
 0.25   1 1 1 1
 1.0    0 0 0 0
"""


class TestParse:
    def test_minimal_fields(self):
        ints = parse_fcidump(MINIMAL)
        assert ints.n_orb == 1 and ints.n_elec == 2
        assert ints.h[0, 0] == 0.5
        assert ints.eri[0, 0, 0, 0] == 0.25
        assert ints.e_nucl == 1.0

    def test_fortran_exponents(self):
        text = MINIMAL.replace("0.25", "2.5D-01").replace("0.5 ", "5.0d-01 ")
        ints = parse_fcidump(text)
        assert ints.h[0, 0] == 0.5
        assert ints.eri[0, 0, 0, 0] == 0.25

    def test_slash_terminator(self):
        ints = parse_fcidump(MINIMAL.replace("&END", "/"))
        assert ints.n_orb == 1

    def test_missing_header_field(self):
        with pytest.raises(FcidumpError, match="NORB"):
            parse_fcidump("&FCI NELEC=2,\n&END\n 1.0 0 0 0 0\n")

    def test_no_terminator(self):
        with pytest.raises(FcidumpError, match="END"):
            parse_fcidump("&FCI NORB=1,NELEC=2,\n 1.0 0 0 0 0\n")

    def test_non_numeric_token(self):
        with pytest.raises(FcidumpError, match="line 6"):
            parse_fcidump(MINIMAL.replace("0.25", "banana"))

    def test_index_out_of_range(self):
        with pytest.raises(FcidumpError, match="line 6"):
            parse_fcidump(MINIMAL.replace("1 1 1 1", "1 2 1 1"))

    def test_eightfold_symmetry_populated(self):
        text = ("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n"
                " 0.125  2 1 2 2\n 0.0 0 0 0 0\n")
        eri = parse_fcidump(text).eri
        val = 0.125
        for idx in [(1, 0, 1, 1), (0, 1, 1, 1), (1, 1, 1, 0), (1, 1, 0, 1)]:
            assert eri[idx] == val

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        from conftest import random_hermitian_integrals
        ints = random_hermitian_integrals(3, rng)
        back = parse_fcidump(dump_fcidump(ints))
        np.testing.assert_allclose(back.h, ints.h, atol=1e-12)
        np.testing.assert_allclose(back.eri, ints.eri, atol=1e-12)
        assert back.e_nucl == pytest.approx(ints.e_nucl, abs=1e-12)

    def test_reference_dumps_have_stated_sizes(self):
        lih = g.read_fcidump(LIH_DUMP)
        assert (lih.n_orb, lih.n_elec) == (6, 4)
        h2o = g.read_fcidump(H2O_DUMP)
        assert (h2o.n_orb, h2o.n_elec) == (7, 10)

    def test_odd_electron_count_rejected(self):
        with pytest.raises(ValueError, match="even"):
            parse_fcidump(MINIMAL.replace("NELEC=2", "NELEC=3"))


class TestOrbitalEnergies:
    def test_zero_eri_reduces_to_h_diagonal(self):
        h = np.diag([-2.0, -0.5, 1.0])
        ints = g.MolecularIntegrals(3, 2, 0.0, h, np.zeros((3,) * 4))
        np.testing.assert_allclose(g.hf_orbital_energies(ints),
                                   [-2.0, -0.5, 1.0])

    def test_dimer_against_hand_evaluation(self):
        t, u = 1.0, 2.0
        ints = g.builtin_model("hubbard_dimer", t=t, u=u)
        eps = g.hf_orbital_energies(ints)
        # occupied orbital 0: h00 + 2(00|00) - (00|00); virtual adds J - K
        expected_0 = -t + 2 * (u / 2) - (u / 2)
        expected_1 = t + 2 * (u / 2) - (u / 2)
        np.testing.assert_allclose(eps, [expected_0, expected_1], atol=1e-14)

    def test_tight_binding_limit(self):
        ints = g.builtin_model("hubbard_dimer", t=1.0, u=0.0)
        np.testing.assert_allclose(g.hf_orbital_energies(ints), [-1.0, 1.0])


class TestQubitHamiltonian:
    def test_single_level_spectrum(self):
        eps = -0.7
        ints = g.builtin_model("single_level", eps=eps)
        h = g.build_qubit_hamiltonian(ints)
        dense = h.to_dense(2)
        eig = np.sort(np.linalg.eigvalsh(dense))
        np.testing.assert_allclose(eig, sorted([0.0, eps, eps, 2 * eps]),
                                   atol=1e-12)

    def test_dimer_ground_energy_closed_form(self):
        t, u = 1.0, 2.0
        ints = g.builtin_model("hubbard_dimer", t=t, u=u)
        h = g.build_qubit_hamiltonian(ints)
        spec = diagonalize_sector(h, 2)
        expected = (u - np.sqrt(u * u + 16 * t * t)) / 2
        assert spec.energies[0] == pytest.approx(expected, abs=1e-10)

    def test_hermitian(self):
        ints = g.builtin_model("hubbard_dimer", t=0.7, u=1.3)
        assert g.build_qubit_hamiltonian(ints).is_hermitian(1e-12)

    def test_commutes_with_number_and_sz(self):
        from gfsim.pauli import PauliSum, PauliTerm
        ints = g.builtin_model("hubbard_dimer", t=1.0, u=2.0)
        h = g.build_qubit_hamiltonian(ints)
        assert commutes_with_number(h)
        assert len(total_number_operator(4)) == 5
        sz = PauliSum([PauliTerm.from_ops(4, [(m, "Z")],
                                          -0.5 * (1 if m % 2 == 0 else -1))
                       for m in range(4)])
        comm = h * sz - sz * h
        assert all(abs(t.coeff) < 1e-10 for t in comm)

    def test_nuclear_repulsion_on_identity(self):
        ints = g.builtin_model("single_level", eps=-1.0)
        shifted = g.MolecularIntegrals(1, 2, 3.25, ints.h, ints.eri)
        h = g.build_qubit_hamiltonian(shifted)
        idterm = [t for t in h if t.label == "II"]
        assert len(idterm) == 1
        # identity coefficient collects e_nucl plus the number-operator parts
        spec = diagonalize_sector(h, 0)
        assert spec.energies[0] == pytest.approx(3.25, abs=1e-12)


class TestBuiltinModels:
    def test_single_level(self):
        ints = g.builtin_model("single_level", eps=-1.0)
        assert ints.n_orb == 1 and ints.n_elec == 2
        assert ints.h[0, 0] == -1.0
        assert not ints.eri.any()

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown"):
            g.builtin_model("bogus")

    def test_dimer_eri_has_eightfold_symmetry(self):
        eri = g.builtin_model("hubbard_dimer", t=1.0, u=2.0).eri
        for p in range(2):
            for q in range(2):
                for r in range(2):
                    for s in range(2):
                        val = eri[p, q, r, s]
                        assert eri[q, p, r, s] == val
                        assert eri[p, q, s, r] == val
                        assert eri[r, s, p, q] == val

    def test_dimer_fci_energy(self):
        ints = g.builtin_model("hubbard_dimer", t=1.0, u=2.0)
        h = g.build_qubit_hamiltonian(ints)
        spec = diagonalize_sector(h, 2)
        assert spec.energies[0] == pytest.approx(1 - np.sqrt(5), abs=1e-10)
