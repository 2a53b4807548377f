"""Plot-ready CSV and JSON emission for spectra, self-energies, and
energy reports.  Complex numbers serialize as [re, im] pairs; energies are
recorded in both Hartree and eV."""
from __future__ import annotations

import json

import numpy as np

from .constants import EV_PER_HARTREE
from .greens import GmReport, TransitionData


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(f"{v:.10g}" if isinstance(v, float) else str(v)
                             for v in row) + "\n")


def write_spectrum_csv(path, omega_ev: np.ndarray,
                       spectrum_per_ev: np.ndarray) -> None:
    write_csv(path, ["omega_eV", "A_per_eV"],
              zip(map(float, omega_ev), map(float, spectrum_per_ev)))


def write_self_energy_csv(path, omega_ev: np.ndarray,
                          trace_sigma: np.ndarray) -> None:
    write_csv(path, ["omega_eV", "ReTrSigma_eV", "ImTrSigma_eV"],
              ((float(w), float(s.real), float(s.imag))
               for w, s in zip(omega_ev, trace_sigma)))


def _complex_pairs(array: np.ndarray):
    arr = np.asarray(array)
    stacked = np.stack([arr.real, arr.imag], axis=-1)
    return stacked.tolist()


def transition_data_json(td: TransitionData) -> dict:
    return {
        "electron_energies_ha": td.electron_energies.tolist(),
        "electron_energies_ev": (td.electron_energies
                                 * EV_PER_HARTREE).tolist(),
        "hole_energies_ha": td.hole_energies.tolist(),
        "hole_energies_ev": (td.hole_energies * EV_PER_HARTREE).tolist(),
        "electron": _complex_pairs(td.electron),
        "hole": _complex_pairs(td.hole),
        "provenance": td.provenance,
    }


def gm_report_json(report: GmReport, extra: dict | None = None) -> dict:
    out = {
        "delta_e1_ha": report.delta_e1,
        "delta_e2_ha": report.delta_e2,
        "e_hf_ha": report.e_hf,
        "e_gm_ha": report.e_gm,
        **{k + "_ev": v for k, v in report.as_ev().items()},
        "gamma": _complex_pairs(report.gamma),
    }
    if extra:
        out.update(extra)
    return out


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
