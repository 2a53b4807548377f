"""Batch driver: reproducible VQE runs, spectra, and sampling studies.

Configuration comes from flags, optionally seeded by a key=value config
file (flags win).  All randomness flows from --seed through named
substreams indexed by (measurement-count index, repetition, ...), so results
do not depend on execution order or worker count.

Exit codes: 0 success, 2 parse/config error, 3 unconverged VQE,
4 resource exhaustion.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .constants import EV_PER_HARTREE
from .eigensolver import (ResourceError, diagonalize_sector,
                          project_number_sector)
from .greens import (LehmannGF, SamplingTables, born_tables, calc_gf,
                     gm_energy, sampled_transitions, self_energy,
                     spectral_function)
from .hamiltonian import (FcidumpError, MolecularIntegrals,
                          build_qubit_hamiltonian, builtin_model,
                          hf_orbital_energies, read_fcidump)
from .output import gm_report_json, write_csv, write_json, write_spectrum_csv
from .pauli import PauliSum
from .rng import substream
from .statevector import StateVector
from .vqe import (Ansatz, OptimizeConfig, apply_ansatz, builtin_ansatz,
                  optimize, prepare_reference, write_trace_csv)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNCONVERGED = 3
EXIT_RESOURCE = 4


class ConfigError(ValueError):
    pass


def _load_system(spec: str) -> MolecularIntegrals:
    if spec.startswith("builtin:"):
        body = spec[len("builtin:"):]
        name, _, rest = body.partition(",")
        params = {}
        for item in filter(None, rest.split(",")):
            key, _, val = item.partition("=")
            if not val:
                raise ConfigError(f"bad builtin parameter {item!r}")
            params[key] = float(val)
        try:
            return builtin_model(name, **params)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"system file {spec!r} not found")
    return read_fcidump(path)


def _resolve_ansatz(tag: str, ints: MolecularIntegrals) -> Ansatz:
    n_qubits = ints.n_spin_orbitals
    if tag in ("none", "fci"):
        return Ansatz(n_qubits, ints.n_elec, ())
    try:
        ansatz = builtin_ansatz(tag)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if ansatz.n_qubits != n_qubits or ansatz.n_elec != ints.n_elec:
        raise ConfigError(
            f"ansatz {tag!r} targets {ansatz.n_qubits} qubits / "
            f"{ansatz.n_elec} electrons, system has {n_qubits} / "
            f"{ints.n_elec}")
    return ansatz


def _ground_state(args, ints: MolecularIntegrals, h: PauliSum
                  ) -> tuple[StateVector, float, dict]:
    """Prepared N-electron ground state per --ansatz, with metadata."""
    meta: dict = {"ansatz": args.ansatz}
    if args.ansatz == "fci":
        spec_n = diagonalize_sector(h, ints.n_elec)
        gs = StateVector(h.n_qubits, spec_n.embed(0))
        return gs, float(spec_n.energies[0]), meta
    ansatz = _resolve_ansatz(args.ansatz, ints)
    if ansatz.n_params == 0:
        gs = prepare_reference(ansatz.n_qubits, ansatz.n_elec)
        from .statevector import expectation
        return gs, expectation(gs, h), meta
    result = optimize(ansatz, h, config=OptimizeConfig(
        max_evals=args.max_iter))
    if not result.converged:
        raise _Unconverged(result)
    raw = apply_ansatz(ansatz, result.theta)
    gs, leak = project_number_sector(raw, ansatz.n_elec)
    meta.update(theta=[float(t) for t in result.theta],
                energy_ha=result.energy, sector_leak_weight=leak)
    return gs, result.energy, meta


class _Unconverged(Exception):
    def __init__(self, result):
        super().__init__("VQE did not converge within the iteration budget")
        self.result = result


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_vqe(args) -> int:
    ints = _load_system(args.system)
    h = build_qubit_hamiltonian(ints)
    ansatz = _resolve_ansatz(args.ansatz, ints)
    out = _out_dir(args)
    if ansatz.n_params == 0 or args.max_iter == 0:
        theta0 = np.zeros(ansatz.n_params)
        from .vqe import _SupportEnergy
        e0 = _SupportEnergy(ansatz, h)(theta0)
        payload = {"energy_ha": e0, "energy_ev": e0 * EV_PER_HARTREE,
                   "theta": theta0.tolist(), "n_evals": 1, "converged": True}
        write_json(out / "vqe.json", payload)
        print(f"energy: {e0 * EV_PER_HARTREE:.4f} eV")
        return EXIT_OK
    result = optimize(ansatz, h,
                      config=OptimizeConfig(max_evals=args.max_iter))
    payload = {"energy_ha": result.energy,
               "energy_ev": result.energy * EV_PER_HARTREE,
               "theta": [float(t) for t in result.theta],
               "n_evals": result.n_evals, "converged": result.converged}
    write_json(out / "vqe.json", payload)
    write_trace_csv(out / "vqe_trace.csv", result)
    print(f"energy: {result.energy * EV_PER_HARTREE:.4f} eV "
          f"({result.n_evals} evaluations)")
    return EXIT_OK if result.converged else EXIT_UNCONVERGED


def _spectra_pair(h, ints):
    plus = diagonalize_sector(h, ints.n_elec + 1)
    minus = diagonalize_sector(h, ints.n_elec - 1)
    return plus, minus


def cmd_spectrum(args) -> int:
    ints = _load_system(args.system)
    h = build_qubit_hamiltonian(ints)
    try:
        gs, e_gs, meta = _ground_state(args, ints, h)
    except _Unconverged:
        return EXIT_UNCONVERGED
    spec_plus, spec_minus = _spectra_pair(h, ints)
    rng = substream(args.seed, 0) if args.mode == "sampled" else None
    gf = calc_gf(gs, e_gs, spec_plus, spec_minus, mode=args.mode,
                 n_meas=args.nmeas, rng=rng)
    mu = gf.chemical_potential
    omega_ev = np.arange(args.omega_min_ev,
                         args.omega_max_ev + 0.5 * args.omega_step_ev,
                         args.omega_step_ev)
    omega_ha = mu + omega_ev / EV_PER_HARTREE
    a_ha = spectral_function(gf, omega_ha, args.delta_au)
    out = _out_dir(args)
    write_spectrum_csv(out / "spectrum.csv", omega_ev,
                       a_ha / EV_PER_HARTREE)
    eps = hf_orbital_energies(ints)
    sigma = self_energy(gf, eps, omega_ha + 1j * args.delta_au)
    trace_sigma = (sigma.trace(axis1=2, axis2=3).sum(axis=1)
                   * EV_PER_HARTREE)
    write_csv(out / "self_energy.csv",
              ["omega_eV", "ReTrSigma_eV", "ImTrSigma_eV"],
              ((float(w), float(s.real), float(s.imag))
               for w, s in zip(omega_ev, trace_sigma)))
    meta.update(mode=args.mode, mu_ha=mu, mu_ev=mu * EV_PER_HARTREE,
                gs_energy_ha=e_gs, delta_au=args.delta_au,
                seed=args.seed if args.mode == "sampled" else None,
                n_meas=args.nmeas if args.mode == "sampled" else None,
                degeneracy_tol=spec_plus.degeneracy_tol)
    write_json(out / "spectrum.meta.json", meta)
    print(f"spectrum written to {out / 'spectrum.csv'} "
          f"({omega_ev.size} points, mu = {mu * EV_PER_HARTREE:.4f} eV)")
    return EXIT_OK


_WORKER_STATE: dict = {}


def _study_point(task):
    nm_idx, n_meas, rep, seed = task
    tables: SamplingTables = _WORKER_STATE["tables"]
    ints = _WORKER_STATE["ints"]
    eps = _WORKER_STATE["eps"]
    e_gs = _WORKER_STATE["e_gs"]
    rng = substream(seed, nm_idx, rep)
    td = sampled_transitions(tables, n_meas, rng)
    report = gm_energy(LehmannGF.from_transitions(td, e_gs), ints, eps)
    return (n_meas, rep, report.delta_e1 * EV_PER_HARTREE,
            report.delta_e2 * EV_PER_HARTREE)


def cmd_gm_study(args) -> int:
    ints = _load_system(args.system)
    h = build_qubit_hamiltonian(ints)
    try:
        gs, e_gs, meta = _ground_state(args, ints, h)
    except _Unconverged:
        return EXIT_UNCONVERGED
    spec_plus, spec_minus = _spectra_pair(h, ints)
    eps = hf_orbital_energies(ints)
    exact_gf = calc_gf(gs, e_gs, spec_plus, spec_minus, mode="exact")
    exact_report = gm_energy(exact_gf, ints, eps)
    out = _out_dir(args)

    if args.mode == "exact":
        rows = [(0, rep, exact_report.delta_e1 * EV_PER_HARTREE,
                 exact_report.delta_e2 * EV_PER_HARTREE)
                for rep in range(args.reps)]
    else:
        tables = born_tables(gs, spec_plus, spec_minus)
        nmeas_list = [int(x) for x in str(args.nmeas).split(",")]
        tasks = [(i, nm, rep, args.seed)
                 for i, nm in enumerate(nmeas_list)
                 for rep in range(args.reps)]
        _WORKER_STATE.update(tables=tables, ints=ints, eps=eps, e_gs=e_gs)
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                rows = list(pool.map(_study_point, tasks, chunksize=8))
        else:
            rows = [_study_point(t) for t in tasks]
        rows.sort(key=lambda r: (r[0], r[1]))
    write_csv(out / "gm_scatter.csv",
              ["n_meas", "repetition", "delta_e1_eV", "delta_e2_eV"],
              ((int(n), int(r), float(d1), float(d2))
               for n, r, d1, d2 in rows))
    meta.update(gm_report_json(exact_report, {
        "seed": args.seed, "reps": args.reps, "mode": args.mode,
        "n_meas_list": str(args.nmeas),
        "degeneracy_tol": spec_plus.degeneracy_tol}))
    write_json(out / "gm_reference.json", meta)
    print(f"{len(rows)} simulations written to {out / 'gm_scatter.csv'}")
    return EXIT_OK


def _read_config_file(path: str) -> dict:
    values = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{ln}: expected key=value")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


_CONFIG_TYPES = {"system": str, "ansatz": str, "mode": str, "nmeas": str,
                 "reps": int, "seed": int, "delta_au": float,
                 "omega_min_ev": float, "omega_max_ev": float,
                 "omega_step_ev": float, "out": str, "max_iter": int,
                 "workers": int}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gfsim",
        description="Green's functions via probabilistic state preparation "
                    "and histogram sampling")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None,
                       help="key=value config file; flags win")
        p.add_argument("--system", default=None,
                       help="FCIDUMP path or builtin:name,k=v,...")
        p.add_argument("--ansatz", default="none",
                       help="ansatz tag, or none / fci")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--out", default=".")
        p.add_argument("--max-iter", type=int, default=2000)

    p_vqe = sub.add_parser("vqe", help="optimize a variational ground state")
    common(p_vqe)
    p_vqe.set_defaults(func=cmd_vqe)

    p_spec = sub.add_parser("spectrum",
                            help="spectral function and self-energy CSVs")
    common(p_spec)
    p_spec.add_argument("--mode", choices=("exact", "sampled"),
                        default="exact")
    p_spec.add_argument("--nmeas", type=int, default=1000)
    p_spec.add_argument("--delta-au", type=float, default=0.02)
    p_spec.add_argument("--omega-min-ev", type=float, default=-35.0)
    p_spec.add_argument("--omega-max-ev", type=float, default=35.0)
    p_spec.add_argument("--omega-step-ev", type=float, default=0.01)
    p_spec.set_defaults(func=cmd_spectrum)

    p_gm = sub.add_parser("gm-study",
                          help="repeated sampled-GF total-energy scatter")
    common(p_gm)
    p_gm.add_argument("--mode", choices=("exact", "sampled"),
                      default="sampled")
    p_gm.add_argument("--nmeas", default="1000",
                      help="comma-separated measurement counts")
    p_gm.add_argument("--reps", type=int, default=1)
    p_gm.add_argument("--workers", type=int, default=1)
    p_gm.set_defaults(func=cmd_gm_study)
    return parser


def _apply_config(args) -> None:
    if getattr(args, "config", None) is None:
        return
    parser_defaults = _build_parser()
    file_values = _read_config_file(args.config)
    for key, raw in file_values.items():
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        if not hasattr(args, key):
            continue
        # flags win: only fill values the command line left at default
        default = parser_defaults.parse_args(
            [args.command]).__dict__.get(key)
        if getattr(args, key) == default:
            setattr(args, key, _CONFIG_TYPES[key](raw))


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        if args.system is None:
            raise ConfigError("--system is required (flag or config file)")
        if getattr(args, "reps", 1) < 1:
            raise ConfigError("--reps must be >= 1")
        if getattr(args, "nmeas", 1) is not None:
            counts = str(args.nmeas).split(",")
            if any(int(c) < 1 for c in counts):
                raise ConfigError("--nmeas values must be >= 1")
        if getattr(args, "delta_au", 1.0) <= 0:
            raise ConfigError("--delta-au must be positive")
        return args.func(args)
    except (ConfigError, FcidumpError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
