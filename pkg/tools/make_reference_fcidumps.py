#!/usr/bin/env python3
"""Generate the STO-3G FCIDUMP data files shipped under data/.

Standalone tool: computes Gaussian integrals (McMurchie-Davidson, s/p shells
only), runs a restricted Hartree-Fock SCF, transforms the integrals to the
molecular-orbital basis, and writes FCIDUMP text files.  The main package
never does any of this; it only reads the resulting files.

Usage:  python tools/make_reference_fcidumps.py [outdir]
"""
import math
import sys
from pathlib import Path

import numpy as np
from scipy.special import gammainc, gamma

BOHR_PER_ANGSTROM = 1.0 / 0.529177210903

# STO-3G exponents / contraction coefficients (EMSL), per element shell.
STO3G = {
    "H": [("s", [3.425250914, 0.6239137298, 0.1688554040],
           [0.1543289673, 0.5353281423, 0.4446345422])],
    "Li": [("s", [16.11957475, 2.936200663, 0.7946504870],
            [0.1543289673, 0.5353281423, 0.4446345422]),
           ("sp", [0.6362897469, 0.1478600533, 0.0480886784],
            [-0.09996722919, 0.3995128261, 0.7001154689],
            [0.1559162750, 0.6076837186, 0.3919573931])],
    "O": [("s", [130.7093200, 23.80886050, 6.443608313],
           [0.1543289673, 0.5353281423, 0.4446345422]),
          ("sp", [5.033151319, 1.169596125, 0.3803889600],
           [-0.09996722919, 0.3995128261, 0.7001154689],
           [0.1559162750, 0.6076837186, 0.3919573931])],
}

CHARGE = {"H": 1, "Li": 3, "O": 8}


def double_factorial(n):
    return 1 if n <= 0 else n * double_factorial(n - 2)


class Primitive:
    __slots__ = ("exp", "coef", "lmn", "center", "norm")

    def __init__(self, exp, coef, lmn, center):
        self.exp = exp
        self.coef = coef
        self.lmn = lmn
        self.center = np.asarray(center, dtype=float)
        l, m, n = lmn
        self.norm = ((2 * exp / math.pi) ** 0.75
                     * (4 * exp) ** ((l + m + n) / 2)
                     / math.sqrt(double_factorial(2 * l - 1)
                                 * double_factorial(2 * m - 1)
                                 * double_factorial(2 * n - 1)))


class Contracted:
    def __init__(self, prims):
        self.prims = prims
        s = sum(pa.coef * pa.norm * pb.coef * pb.norm
                * overlap_prim(pa, pb) for pa in prims for pb in prims)
        self.scale = 1.0 / math.sqrt(s)

    def pairs(self):
        for p in self.prims:
            yield p, p.coef * p.norm * self.scale


def hermite_e(i, j, t, qx, a, b):
    """Hermite expansion coefficient E_t^{ij} for a 1-D Gaussian pair."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-q * qx * qx)
    if j == 0:
        return (hermite_e(i - 1, j, t - 1, qx, a, b) / (2 * p)
                - q * qx / a * hermite_e(i - 1, j, t, qx, a, b)
                + (t + 1) * hermite_e(i - 1, j, t + 1, qx, a, b))
    return (hermite_e(i, j - 1, t - 1, qx, a, b) / (2 * p)
            + q * qx / b * hermite_e(i, j - 1, t, qx, a, b)
            + (t + 1) * hermite_e(i, j - 1, t + 1, qx, a, b))


def overlap_prim(pa, pb):
    a, b = pa.exp, pb.exp
    ab = pa.center - pb.center
    s = (math.pi / (a + b)) ** 1.5
    for k in range(3):
        s *= hermite_e(pa.lmn[k], pb.lmn[k], 0, ab[k], a, b)
    return s


def kinetic_prim(pa, pb):
    a, b = pa.exp, pb.exp
    l2, m2, n2 = pb.lmn

    def ov(dl, dm, dn):
        lmn = (pb.lmn[0] + dl, pb.lmn[1] + dm, pb.lmn[2] + dn)
        if min(lmn) < 0:
            return 0.0
        shifted = Primitive(b, 1.0, lmn, pb.center)
        return overlap_prim(pa, shifted)

    term0 = b * (2 * (l2 + m2 + n2) + 3) * ov(0, 0, 0)
    term1 = -2 * b * b * (ov(2, 0, 0) + ov(0, 2, 0) + ov(0, 0, 2))
    term2 = -0.5 * (l2 * (l2 - 1) * ov(-2, 0, 0)
                    + m2 * (m2 - 1) * ov(0, -2, 0)
                    + n2 * (n2 - 1) * ov(0, 0, -2))
    return term0 + term1 + term2


def boys(n, x):
    if x < 1e-12:
        return 1.0 / (2 * n + 1)
    return 0.5 * gamma(n + 0.5) * gammainc(n + 0.5, x) / x ** (n + 0.5)


def hermite_r(t, u, v, n, p, pc, rpc2):
    """Auxiliary Hermite Coulomb integral R^n_{tuv}."""
    if t == u == v == 0:
        return (-2 * p) ** n * boys(n, p * rpc2)
    if t > 0:
        val = pc[0] * hermite_r(t - 1, u, v, n + 1, p, pc, rpc2)
        if t > 1:
            val += (t - 1) * hermite_r(t - 2, u, v, n + 1, p, pc, rpc2)
        return val
    if u > 0:
        val = pc[1] * hermite_r(t, u - 1, v, n + 1, p, pc, rpc2)
        if u > 1:
            val += (u - 1) * hermite_r(t, u - 2, v, n + 1, p, pc, rpc2)
        return val
    val = pc[2] * hermite_r(t, u, v - 1, n + 1, p, pc, rpc2)
    if v > 1:
        val += (v - 1) * hermite_r(t, u, v - 2, n + 1, p, pc, rpc2)
    return val


def nuclear_prim(pa, pb, c):
    a, b = pa.exp, pb.exp
    p = a + b
    ctr = (a * pa.center + b * pb.center) / p
    pc = ctr - c
    rpc2 = float(pc @ pc)
    ab = pa.center - pb.center
    total = 0.0
    for t in range(pa.lmn[0] + pb.lmn[0] + 1):
        et = hermite_e(pa.lmn[0], pb.lmn[0], t, ab[0], a, b)
        for u in range(pa.lmn[1] + pb.lmn[1] + 1):
            eu = hermite_e(pa.lmn[1], pb.lmn[1], u, ab[1], a, b)
            for v in range(pa.lmn[2] + pb.lmn[2] + 1):
                ev = hermite_e(pa.lmn[2], pb.lmn[2], v, ab[2], a, b)
                total += et * eu * ev * hermite_r(t, u, v, 0, p, pc, rpc2)
    return 2 * math.pi / p * total


def eri_prim(pa, pb, pc, pd):
    a, b, c, d = pa.exp, pb.exp, pc.exp, pd.exp
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    pp = (a * pa.center + b * pb.center) / p
    qq = (c * pc.center + d * pd.center) / q
    pq = pp - qq
    rpq2 = float(pq @ pq)
    ab = pa.center - pb.center
    cd = pc.center - pd.center

    e1 = [[hermite_e(pa.lmn[k], pb.lmn[k], t, ab[k], a, b)
           for t in range(pa.lmn[k] + pb.lmn[k] + 1)] for k in range(3)]
    e2 = [[hermite_e(pc.lmn[k], pd.lmn[k], t, cd[k], c, d)
           for t in range(pc.lmn[k] + pd.lmn[k] + 1)] for k in range(3)]

    total = 0.0
    for t in range(len(e1[0])):
        for u in range(len(e1[1])):
            for v in range(len(e1[2])):
                w1 = e1[0][t] * e1[1][u] * e1[2][v]
                if w1 == 0.0:
                    continue
                for tau in range(len(e2[0])):
                    for nu in range(len(e2[1])):
                        for phi in range(len(e2[2])):
                            w2 = e2[0][tau] * e2[1][nu] * e2[2][phi]
                            if w2 == 0.0:
                                continue
                            total += (w1 * w2 * (-1) ** (tau + nu + phi)
                                      * hermite_r(t + tau, u + nu, v + phi,
                                                  0, alpha, pq, rpq2))
    return total * 2 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))


def build_basis(atoms):
    basis = []
    for sym, center in atoms:
        for shell in STO3G[sym]:
            kind, exps = shell[0], shell[1]
            if kind == "s":
                coefs = shell[2]
                prims = [Primitive(e, c, (0, 0, 0), center)
                         for e, c in zip(exps, coefs)]
                basis.append(Contracted(prims))
            else:  # sp shell: one s + three p functions
                s_coefs, p_coefs = shell[2], shell[3]
                basis.append(Contracted(
                    [Primitive(e, c, (0, 0, 0), center)
                     for e, c in zip(exps, s_coefs)]))
                for lmn in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
                    basis.append(Contracted(
                        [Primitive(e, c, lmn, center)
                         for e, c in zip(exps, p_coefs)]))
    return basis


def contracted_integral(fn, *cgtos):
    total = 0.0
    for combo in _pair_product([list(c.pairs()) for c in cgtos]):
        prims = [x[0] for x in combo]
        w = math.prod(x[1] for x in combo)
        total += w * fn(*prims)
    return total


def _pair_product(lists):
    if len(lists) == 1:
        for x in lists[0]:
            yield (x,)
    else:
        for x in lists[0]:
            for rest in _pair_product(lists[1:]):
                yield (x,) + rest


def integrals(atoms):
    basis = build_basis(atoms)
    n = len(basis)
    s = np.zeros((n, n))
    t = np.zeros((n, n))
    v = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s[i, j] = s[j, i] = contracted_integral(overlap_prim, basis[i], basis[j])
            t[i, j] = t[j, i] = contracted_integral(kinetic_prim, basis[i], basis[j])
            vij = 0.0
            for sym, center in atoms:
                vij -= CHARGE[sym] * contracted_integral(
                    lambda pa, pb: nuclear_prim(pa, pb, np.asarray(center)),
                    basis[i], basis[j])
            v[i, j] = v[j, i] = vij

    eri = np.zeros((n, n, n, n))
    done = np.zeros((n, n, n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if (i * (i + 1) // 2 + j) < (k * (k + 1) // 2 + l):
                        continue
                    if done[i, j, k, l]:
                        continue
                    val = contracted_integral(eri_prim, basis[i], basis[j],
                                              basis[k], basis[l])
                    for a, b in ((i, j), (j, i)):
                        for c, d in ((k, l), (l, k)):
                            eri[a, b, c, d] = val
                            eri[c, d, a, b] = val
                            done[a, b, c, d] = done[c, d, a, b] = True

    e_nucl = 0.0
    for idx, (sym1, c1) in enumerate(atoms):
        for sym2, c2 in atoms[idx + 1:]:
            r = np.linalg.norm(np.asarray(c1) - np.asarray(c2))
            e_nucl += CHARGE[sym1] * CHARGE[sym2] / r
    return s, t + v, eri, e_nucl


def rhf(s, hcore, eri, n_elec, e_nucl, max_iter=200, tol=1e-12):
    n_occ = n_elec // 2
    evals, evecs = np.linalg.eigh(s)
    x = evecs @ np.diag(evals ** -0.5) @ evecs.T

    def solve_fock(f):
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        return eps, x @ cp

    eps, c = solve_fock(hcore)
    e_old = 0.0
    for _ in range(max_iter):
        cocc = c[:, :n_occ]
        dens = 2.0 * cocc @ cocc.T
        j = np.einsum("pqrs,rs->pq", eri, dens)
        k = np.einsum("prqs,rs->pq", eri, dens)
        f = hcore + j - 0.5 * k
        e_elec = 0.5 * np.sum(dens * (hcore + f))
        eps, c = solve_fock(f)
        if abs(e_elec - e_old) < tol:
            break
        e_old = e_elec
    else:
        raise RuntimeError("SCF did not converge")
    return e_elec + e_nucl, eps, c


def mo_transform(hcore, eri, c):
    h_mo = c.T @ hcore @ c
    eri_mo = np.einsum("pqrs,pi->iqrs", eri, c, optimize=True)
    eri_mo = np.einsum("iqrs,qj->ijrs", eri_mo, c, optimize=True)
    eri_mo = np.einsum("ijrs,rk->ijks", eri_mo, c, optimize=True)
    eri_mo = np.einsum("ijks,sl->ijkl", eri_mo, c, optimize=True)
    return h_mo, eri_mo


def write_fcidump(path, h_mo, eri_mo, e_nucl, n_elec, thresh=1e-12):
    n = h_mo.shape[0]
    lines = [f"&FCI NORB={n},NELEC={n_elec},MS2=0,",
             " ORBSYM=" + "1," * n,
             " ISYM=1,",
             "&END"]

    def fmt(val, i, j, k, l):
        return f"{val: .16E} {i:4d} {j:4d} {k:4d} {l:4d}"

    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    val = eri_mo[i, j, k, l]
                    if abs(val) > thresh:
                        lines.append(fmt(val, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            if abs(h_mo[i, j]) > thresh:
                lines.append(fmt(h_mo[i, j], i + 1, j + 1, 0, 0))
    lines.append(fmt(e_nucl, 0, 0, 0, 0))
    Path(path).write_text("\n".join(lines) + "\n")


def make_lih():
    r = 1.6 * BOHR_PER_ANGSTROM
    return [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))], 4


def make_h2o():
    r = 0.96 * BOHR_PER_ANGSTROM
    half = math.radians(104.5) / 2
    return [("O", (0.0, 0.0, 0.0)),
            ("H", (r * math.sin(half), 0.0, r * math.cos(half))),
            ("H", (-r * math.sin(half), 0.0, r * math.cos(half)))], 10


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    outdir.mkdir(parents=True, exist_ok=True)
    ev = 27.211386245988
    for name, builder in [("lih_sto3g", make_lih), ("h2o_sto3g", make_h2o)]:
        atoms, n_elec = builder()
        s, hcore, eri, e_nucl = integrals(atoms)
        e_rhf, eps, c = rhf(s, hcore, eri, n_elec, e_nucl)
        h_mo, eri_mo = mo_transform(hcore, eri, c)
        path = outdir / f"{name}.fcidump"
        write_fcidump(path, h_mo, eri_mo, e_nucl, n_elec)
        print(f"{name}: E_RHF = {e_rhf:.10f} Ha = {e_rhf * ev:.4f} eV "
              f"-> {path}")
        print(f"  orbital energies (Ha): {np.round(eps, 6)}")


if __name__ == "__main__":
    main()
