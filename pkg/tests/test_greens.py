"""Transition matrices, Lehmann assembly, sampling, GM energies."""
import numpy as np
import pytest

import gfsim as g
from gfsim.eigensolver import diagonalize_sector
from gfsim.greens import (ContourError, Histogram, LehmannGF,
                          PoleProximityError, SectorMismatchError,
                          contour_density_matrix, hf_density_matrix,
                          hf_green_function, recover_offdiagonal)
from gfsim.pauli import jw_ladder
from gfsim.rng import substream
from gfsim.statevector import StateVector, apply_pauli_sum

from conftest import brute_force_gf, dense_annihilators


class TestExactTransitions:
    def test_vacuum_has_no_hole_part(self):
        ints = g.builtin_model("single_level", eps=-1.0)
        h = g.build_qubit_hamiltonian(ints)
        spec_plus = diagonalize_sector(h, 1)
        vac = StateVector.zero(2)
        td = g.exact_transitions(vac, spec_plus, None)
        assert td.hole.shape[0] == 0
        np.testing.assert_allclose(td.electron.sum(axis=0), np.eye(2),
                                   atol=1e-12)

    def test_filled_shell_has_no_electron_part(self):
        ints = g.builtin_model("single_level", eps=-1.0)
        h = g.build_qubit_hamiltonian(ints)
        spec_minus = diagonalize_sector(h, 1)
        full = StateVector.basis_state(2, 0b11)
        td = g.exact_transitions(full, None, spec_minus)
        assert td.electron.shape[0] == 0
        np.testing.assert_allclose(td.hole.sum(axis=0), np.eye(2),
                                   atol=1e-12)

    def test_dimer_against_brute_force_double_loop(self, dimer):
        z = 0.37 + 0.21j
        gf = g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                       dimer.spec_minus, mode="exact")
        oracle = brute_force_gf(dimer.gs.amps, dimer.e_gs, dimer.spec_plus,
                                dimer.spec_minus, z, dense_annihilators(4))
        np.testing.assert_allclose(gf.evaluate(z), oracle, atol=1e-10)

    def test_sum_rule(self, dimer):
        td = g.exact_transitions(dimer.gs, dimer.spec_plus, dimer.spec_minus)
        np.testing.assert_allclose(td.sum_rule_matrix(), np.eye(4),
                                   atol=1e-10)

    def test_residues_hermitian_psd(self, dimer):
        td = g.exact_transitions(dimer.gs, dimer.spec_plus, dimer.spec_minus)
        for block in (td.electron, td.hole):
            for mat in block:
                np.testing.assert_allclose(mat, mat.conj().T, atol=1e-12)
                eig = np.linalg.eigvalsh(mat)
                assert eig.min() > -1e-12

    def test_sector_mismatch_rejected(self, dimer):
        rng = np.random.default_rng(0)
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        amps /= np.linalg.norm(amps)
        with pytest.raises(SectorMismatchError):
            g.exact_transitions(StateVector(4, amps), dimer.spec_plus,
                                dimer.spec_minus)


class TestOffdiagonalRecovery:
    def test_exact_tables_reproduce_offdiagonals(self, dimer):
        td = g.exact_transitions(dimer.gs, dimer.spec_plus, dimer.spec_minus)
        t = dimer.tables
        for m in range(4):
            for mp in range(m):
                b_e = recover_offdiagonal(t.aux_e[(m, mp)][0],
                                          t.aux_e[(m, mp)][1],
                                          t.aux_e[(mp, m)][0],
                                          t.aux_e[(mp, m)][1])
                b_h = recover_offdiagonal(t.aux_h[(m, mp)][0],
                                          t.aux_h[(m, mp)][1],
                                          t.aux_h[(mp, m)][0],
                                          t.aux_h[(mp, m)][1])
                np.testing.assert_allclose(b_e, td.electron[:, m, mp],
                                           atol=1e-12)
                np.testing.assert_allclose(b_h, td.hole[:, m, mp],
                                           atol=1e-12)

    def test_spin_selection_zeroes_mixed_pairs(self, dimer):
        td = g.exact_transitions(dimer.gs, dimer.spec_plus, dimer.spec_minus)
        for m in range(4):
            for mp in range(4):
                if m != mp and m % 2 != mp % 2:
                    assert np.abs(td.electron[:, m, mp]).max() < 1e-12
                    assert np.abs(td.hole[:, m, mp]).max() < 1e-12

    def test_diag_tables_equal_exact_diagonals(self, dimer):
        td = g.exact_transitions(dimer.gs, dimer.spec_plus, dimer.spec_minus)
        for m in range(4):
            p_e, p_h = dimer.tables.diag[m]
            np.testing.assert_allclose(p_e, td.electron[:, m, m].real,
                                       atol=1e-12)
            np.testing.assert_allclose(p_h, td.hole[:, m, m].real,
                                       atol=1e-12)


class TestSampling:
    def test_histogram_invariant(self):
        with pytest.raises(ValueError):
            Histogram({("0", 0): 3}, 5)

    def test_tally_tautology(self, dimer):
        hist, b_e, b_h = g.sample_diag(dimer.tables, 0, 1000, substream(3, 0))
        assert sum(hist.counts.values()) == 1000
        assert b_e.sum() + b_h.sum() == pytest.approx(1.0)

    def test_uncorrelated_reference_is_deterministic(self):
        # U=0 dimer: removing an occupied spin orbital always lands on the
        # single Koopmans peak
        ints = g.builtin_model("hubbard_dimer", t=1.0, u=0.0)
        h = g.build_qubit_hamiltonian(ints)
        spec_m, spec_n, spec_p = (diagonalize_sector(h, k) for k in (1, 2, 3))
        gs = StateVector(4, spec_n.embed(0))
        tables = g.born_tables(gs, spec_p, spec_m)
        hist, b_e, b_h = g.sample_diag(tables, 0, 500, substream(4, 0))
        assert b_e.sum() == pytest.approx(0.0)
        assert b_h.max() == pytest.approx(1.0)

    def test_diag_estimates_within_binomial_bounds(self, dimer):
        n = 100_000
        td = g.exact_transitions(dimer.gs, dimer.spec_plus, dimer.spec_minus)
        for m in range(4):
            _, b_e, b_h = g.sample_diag(dimer.tables, m, n, substream(5, m))
            for est, exact in ((b_e, td.electron[:, m, m].real),
                               (b_h, td.hole[:, m, m].real)):
                sigma = np.sqrt(np.maximum(exact * (1 - exact), 0) / n)
                assert np.all(np.abs(est - exact) <= 4 * sigma + 1e-12)

    def test_offdiag_estimates_within_bounds(self, dimer):
        n = 100_000
        td = g.exact_transitions(dimer.gs, dimer.spec_plus, dimer.spec_minus)
        rng = substream(6, 0)
        for m in range(4):
            for mp in range(m):
                b_e, b_h, hists = g.sample_offdiag(dimer.tables, m, mp, n,
                                                   rng)
                assert set(hists) == {(m, mp), (mp, m)}
                for est, exact, aux in (
                        (b_e, td.electron[:, m, mp], dimer.tables.aux_e),
                        (b_h, td.hole[:, m, mp], dimer.tables.aux_h)):
                    var = np.zeros(est.size)
                    for key in ((m, mp), (mp, m)):
                        p_p, p_m = aux[key]
                        var += (p_p * (1 - p_p) + p_m * (1 - p_m)
                                + 2 * p_p * p_m) / n
                    sigma = np.sqrt(var / 2)
                    for part in (np.real, np.imag):
                        dev = np.abs(part(est) - part(exact))
                        assert np.all(dev <= 4 * sigma + 1e-12)

    def test_chi_square_over_all_bins(self, dimer):
        from scipy.stats import chi2
        n = 100_000
        rng = substream(7, 0)
        chi, dof = 0.0, 0

        def accumulate(probs, counts):
            nonlocal chi, dof
            expected = probs * n
            keep = expected > 5
            if keep.sum() < 2:
                return
            rest_exp = expected[~keep].sum()
            obs = np.append(counts[keep], counts[~keep].sum())
            exp = np.append(expected[keep], rest_exp)
            if rest_exp <= 5:
                obs, exp = obs[:-1], exp[:-1]
                exp *= n / exp.sum()
            chi += float(((obs - exp) ** 2 / exp).sum())
            dof += exp.size - 1

        for m in range(4):
            p_e, p_h = dimer.tables.diag[m]
            hist, _, _ = g.sample_diag(dimer.tables, m, n, rng)
            counts = np.array([hist.counts[("0", k)]
                               for k in range(p_h.size)]
                              + [hist.counts[("1", k)]
                                 for k in range(p_e.size)])
            accumulate(np.concatenate([p_h, p_e]), counts)
        p_value = chi2.sf(chi, dof)
        assert p_value > 1e-3

    def test_stddev_scaling_exponent(self, dimer):
        td = g.exact_transitions(dimer.gs, dimer.spec_plus, dimer.spec_minus)
        # track the diagonal entry with the largest binomial variance
        p = td.hole[:, 0, 0].real
        m, grp = 0, int(np.argmax(p * (1 - p)))
        n_list = [250, 1000, 4000, 16000]
        stds = []
        for i, n in enumerate(n_list):
            vals = [g.sample_diag(dimer.tables, m, n,
                                  substream(8, i, r))[2][grp]
                    for r in range(100)]
            stds.append(np.std(vals))
        slope = np.polyfit(np.log(n_list), np.log(stds), 1)[0]
        assert -0.65 <= slope <= -0.35

    def test_sampled_transitions_shapes_and_conjugation(self, dimer):
        td = g.sampled_transitions(dimer.tables, 2000, substream(9, 0))
        assert td.provenance["mode"] == "sampled"
        assert td.provenance["n_meas"] == 2000
        np.testing.assert_allclose(td.electron[:, 0, 1],
                                   td.electron[:, 1, 0].conj())

    def test_sampled_mode_needs_rng_and_nmeas(self, dimer):
        with pytest.raises(ValueError):
            g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                      dimer.spec_minus, mode="sampled")
        with pytest.raises(ValueError):
            g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                      dimer.spec_minus, mode="sampled", n_meas=100)

    def test_unknown_mode(self, dimer):
        with pytest.raises(ValueError, match="mode"):
            g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                      dimer.spec_minus, mode="approximate")


class TestLehmannGF:
    def test_hf_limit_is_diagonal_resolvent(self):
        ints = g.builtin_model("hubbard_dimer", t=1.0, u=0.0)
        h = g.build_qubit_hamiltonian(ints)
        spec_m, spec_n, spec_p = (diagonalize_sector(h, k) for k in (1, 2, 3))
        gs = StateVector(4, spec_n.embed(0))
        gf = g.calc_gf(gs, spec_n.energies[0], spec_p, spec_m, mode="exact")
        eps = g.hf_orbital_energies(ints)
        z = 0.3 + 0.4j
        expected = np.diag([1 / (z - eps[m // 2]) for m in range(4)])
        np.testing.assert_allclose(gf.evaluate(z), expected, atol=1e-10)

    def test_conjugate_symmetry(self, lih_exact_gf):
        z = -0.25 + 0.1j
        np.testing.assert_allclose(
            lih_exact_gf.evaluate(np.conj(z)),
            lih_exact_gf.evaluate(z).conj().T, atol=1e-12)

    def test_spin_block_slicing(self, lih_exact_gf):
        z = 0.5 + 0.05j
        full = lih_exact_gf.evaluate(z)
        up = lih_exact_gf.spin_block(0).evaluate(z)
        np.testing.assert_allclose(up, full[0::2, 0::2], atol=1e-14)


class TestSpectralFunction:
    def test_single_pole_lorentzian(self):
        eps = np.array([-0.5])
        gf = hf_green_function(eps, 2)
        delta = 0.02
        omega = np.array([-0.5])
        a = g.spectral_function(gf, omega, delta)
        # two spin orbitals on one pole
        assert a[0] == pytest.approx(2 / (np.pi * delta), rel=1e-12)
        half = g.spectral_function(gf, np.array([-0.5 + delta]), delta)
        assert half[0] == pytest.approx(a[0] / 2, rel=1e-12)

    def test_trace_sum_rule_with_widening_grid(self, dimer):
        gf = g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                       dimer.spec_minus, mode="exact")
        delta = 0.02
        errors = []
        for width, points in ((50, 100_001), (200, 400_001)):
            omega = np.linspace(-width, width, points)
            a = g.spectral_function(gf, omega, delta)
            errors.append(abs(np.trapezoid(a, omega) - 4))
        assert errors[0] < 0.02
        assert errors[1] < errors[0]

    def test_positive_for_exact_residues(self, lih_exact_gf):
        omega = np.linspace(-2, 2, 401)
        a = g.spectral_function(lih_exact_gf, omega, 0.02)
        assert a.min() > 0

    def test_delta_must_be_positive(self, lih_exact_gf):
        with pytest.raises(ValueError):
            g.spectral_function(lih_exact_gf, np.array([0.0]), 0.0)


class TestSelfEnergy:
    def test_zero_for_hf_green_function(self):
        eps = np.array([-1.0, 0.4, 0.9])
        gf = hf_green_function(eps, 2)
        sigma = g.self_energy(gf, eps, 0.3 + 0.2j)
        np.testing.assert_allclose(sigma, 0, atol=1e-10)

    def test_dimer_against_dense_inversion_oracle(self, dimer):
        eps = dimer.eps
        modes = dense_annihilators(4)
        for z in (0.41 + 0.3j, -1.2 + 0.05j, 2.0 - 0.7j):
            sigma = g.self_energy(
                g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                          dimer.spec_minus, mode="exact"), eps, z)
            oracle_g = brute_force_gf(dimer.gs.amps, dimer.e_gs,
                                      dimer.spec_plus, dimer.spec_minus, z,
                                      modes)
            for s in (0, 1):
                block = oracle_g[s::2, s::2]
                ghf_inv = np.diag(z - eps)
                np.testing.assert_allclose(
                    sigma[s], ghf_inv - np.linalg.inv(block), atol=1e-9)

    def test_pole_proximity_error(self, dimer):
        gf = g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                       dimer.spec_minus, mode="exact")
        pole = gf.hole_poles[np.argmax(np.trace(
            gf.hole_residues, axis1=1, axis2=2).real)]
        with pytest.raises(PoleProximityError, match="shift"):
            g.self_energy(gf, dimer.eps, complex(pole + 1e-13))


class TestDensityMatrix:
    def test_hf_occupations(self):
        eps = np.array([-2.0, -1.0, 0.5])
        gf = hf_green_function(eps, 4)
        gamma = g.density_matrix(gf)
        for s in (0, 1):
            np.testing.assert_allclose(gamma[s], np.diag([1, 1, 0]),
                                       atol=1e-14)

    def test_trace_equals_electron_count(self, lih_exact_gf):
        gamma = g.density_matrix(lih_exact_gf)
        total = sum(np.trace(gamma[s]).real for s in (0, 1))
        assert total == pytest.approx(4.0, abs=1e-10)

    def test_against_dense_expectation(self, lih):
        gamma = g.density_matrix(g.calc_gf(
            lih.gs, lih.e_gs, lih.spec_plus, lih.spec_minus, mode="exact"))
        rng = np.random.default_rng(10)
        for _ in range(8):
            p, q, s = rng.integers(0, 6), rng.integers(0, 6), rng.integers(2)
            m, mp = 2 * p + s, 2 * q + s
            a_m = apply_pauli_sum(lih.gs.amps, jw_ladder(m, 12, False))
            a_mp = apply_pauli_sum(lih.gs.amps, jw_ladder(mp, 12, False))
            oracle = complex(np.vdot(a_mp, a_m))  # <a_mp† a_m>
            assert gamma[s][p, q] == pytest.approx(oracle, abs=1e-10)

    def test_contour_cross_check(self, dimer):
        gf = g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                       dimer.spec_minus, mode="exact")
        analytic = g.density_matrix(gf)
        quadrature = contour_density_matrix(gf)
        np.testing.assert_allclose(quadrature, analytic, atol=1e-7)


class TestGmEnergy:
    def test_hf_green_function_recovers_hf_energy(self, dimer):
        gf = hf_green_function(dimer.eps, 2)
        report = g.gm_energy(gf, dimer.ints)
        assert report.delta_e1 == pytest.approx(0.0, abs=1e-10)
        assert report.delta_e2 == pytest.approx(0.0, abs=1e-10)
        assert report.e_gm == pytest.approx(g.hf_energy(dimer.ints),
                                            abs=1e-10)

    def test_fci_green_function_recovers_fci_energy(self, dimer):
        gf = g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                       dimer.spec_minus, mode="exact")
        report = g.gm_energy(gf, dimer.ints)
        assert report.e_gm == pytest.approx(dimer.e_gs, abs=1e-7)
        assert report.e_gm == report.e_hf + report.delta_e1 + report.delta_e2

    def test_contour_guard(self, dimer):
        gf = g.calc_gf(dimer.gs, dimer.e_gs, dimer.spec_plus,
                       dimer.spec_minus, mode="exact")
        # an electron pole dropped onto the top hole pole pins the chemical
        # potential there, so the contour edge crosses a pole
        squeezed = LehmannGF(
            np.append(gf.electron_poles, gf.hole_poles.max()),
            np.concatenate([gf.electron_residues,
                            0 * gf.electron_residues[:1]]),
            gf.hole_poles, gf.hole_residues)
        with pytest.raises(ContourError, match="widen"):
            g.gm_energy(squeezed, dimer.ints)

    def test_hf_density_matrix_shape(self):
        gamma = hf_density_matrix(5, 6)
        assert gamma.shape == (2, 5, 5)
        assert np.trace(gamma[0]).real == 3
