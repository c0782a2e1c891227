#!/usr/bin/env python3
"""Generate FCIDUMP files for linear hydrogen chains in a minimal STO-6G basis.

Restricted Hartree-Fock is solved for H_n chains (n even, 1.0 Angstrom
spacing), the one- and two-electron integrals are transformed to the
canonical RHF molecular-orbital basis, and the result is written in FCIDUMP
format (chemists' notation, 8-fold permutational symmetry, Fortran-style
exponents).

Only s-type Gaussians are needed for hydrogen, so all integrals have
closed forms in terms of the Boys function F0.

Usage: python3 tools/make_fixtures.py [outdir]
"""

import sys
import numpy as np
from scipy.special import erf

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903

# STO-6G expansion of the hydrogen 1s orbital (exponent, contraction).
STO6G_H = [
    (0.3552322122e02, 0.9163596281e-02),
    (0.6513143725e01, 0.4936149294e-01),
    (0.1822142904e01, 0.1685383049e00),
    (0.6259552659e00, 0.3705627997e00),
    (0.2430767471e00, 0.4164915298e00),
    (0.1001124280e00, 0.1303340841e00),
]


def boys_f0(t):
    t = np.asarray(t, dtype=float)
    small = t < 1e-12
    safe = np.where(small, 1.0, t)
    val = 0.5 * np.sqrt(np.pi / safe) * erf(np.sqrt(safe))
    return np.where(small, 1.0 - t / 3.0, val)


class Basis:
    """Contracted s-type Gaussian basis over a set of centers."""

    def __init__(self, centers):
        self.centers = [np.asarray(c, dtype=float) for c in centers]
        self.shells = []
        for c in self.centers:
            exps = np.array([a for a, _ in STO6G_H])
            coefs = np.array([d for _, d in STO6G_H])
            # Primitive normalization for l = 0.
            coefs = coefs * (2.0 * exps / np.pi) ** 0.75
            # Contracted normalization.
            s = 0.0
            for a, ca in zip(exps, coefs):
                for b, cb in zip(exps, coefs):
                    s += ca * cb * (np.pi / (a + b)) ** 1.5
            self.shells.append((c, exps, coefs / np.sqrt(s)))

    def __len__(self):
        return len(self.shells)


def overlap_kinetic(basis):
    n = len(basis)
    s_mat = np.zeros((n, n))
    t_mat = np.zeros((n, n))
    for i, (ra, ea, ca) in enumerate(basis.shells):
        for j, (rb, eb, cb) in enumerate(basis.shells):
            r2 = float(np.dot(ra - rb, ra - rb))
            a = ea[:, None]
            b = eb[None, :]
            p = a + b
            mu = a * b / p
            ss = (np.pi / p) ** 1.5 * np.exp(-mu * r2)
            tt = mu * (3.0 - 2.0 * mu * r2) * ss
            w = ca[:, None] * cb[None, :]
            s_mat[i, j] = np.sum(w * ss)
            t_mat[i, j] = np.sum(w * tt)
    return s_mat, t_mat


def nuclear_attraction(basis, charges):
    n = len(basis)
    v_mat = np.zeros((n, n))
    for i, (ra, ea, ca) in enumerate(basis.shells):
        for j, (rb, eb, cb) in enumerate(basis.shells):
            r2 = float(np.dot(ra - rb, ra - rb))
            a = ea[:, None]
            b = eb[None, :]
            p = a + b
            mu = a * b / p
            pref = -2.0 * np.pi / p * np.exp(-mu * r2)
            w = ca[:, None] * cb[None, :]
            # Gaussian product center, broadcast over primitive pairs.
            px = (a * ra[0] + b * rb[0]) / p
            py = (a * ra[1] + b * rb[1]) / p
            pz = (a * ra[2] + b * rb[2]) / p
            acc = np.zeros_like(p)
            for z, rc in charges:
                pc2 = (px - rc[0]) ** 2 + (py - rc[1]) ** 2 + (pz - rc[2]) ** 2
                acc += z * boys_f0(p * pc2)
            v_mat[i, j] = np.sum(w * pref * acc)
    return v_mat


def eri_tensor(basis):
    n = len(basis)
    g = np.zeros((n, n, n, n))
    # Flatten primitives once per shell pair.
    pair_data = {}
    for i, (ra, ea, ca) in enumerate(basis.shells):
        for j, (rb, eb, cb) in enumerate(basis.shells):
            if i > j:
                continue
            r2 = float(np.dot(ra - rb, ra - rb))
            a = ea[:, None]
            b = eb[None, :]
            p = (a + b).ravel()
            k = (np.exp(-a * b / (a + b) * r2) * ca[:, None] * cb[None, :]).ravel()
            px = ((a * ra[0] + b * rb[0]) / (a + b)).ravel()
            py = ((a * ra[1] + b * rb[1]) / (a + b)).ravel()
            pz = ((a * ra[2] + b * rb[2]) / (a + b)).ravel()
            pair_data[(i, j)] = (p, k, np.stack([px, py, pz], axis=1))

    def pair(i, j):
        return pair_data[(i, j)] if i <= j else pair_data[(j, i)]

    done = set()
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    key = canonical_key(i, j, k, l)
                    if key in done:
                        continue
                    done.add(key)
                    pa, ka, ca = pair(i, j)
                    pb, kb, cb = pair(k, l)
                    p = pa[:, None]
                    q = pb[None, :]
                    kk = ka[:, None] * kb[None, :]
                    d2 = np.sum((ca[:, None, :] - cb[None, :, :]) ** 2, axis=2)
                    val = np.sum(
                        kk
                        * 2.0
                        * np.pi**2.5
                        / (p * q * np.sqrt(p + q))
                        * boys_f0(p * q / (p + q) * d2)
                    )
                    for (ii, jj, kk2, ll) in expand_key(i, j, k, l):
                        g[ii, jj, kk2, ll] = val
    return g


def canonical_key(i, j, k, l):
    ij = (max(i, j), min(i, j))
    kl = (max(k, l), min(k, l))
    return (max(ij, kl), min(ij, kl))


def expand_key(i, j, k, l):
    out = set()
    for (a, b) in ((i, j), (j, i)):
        for (c, d) in ((k, l), (l, k)):
            out.add((a, b, c, d))
            out.add((c, d, a, b))
    return out


def rhf(s_mat, h_core, g, n_elec, e_nuc, max_iter=200, tol=1e-12):
    n = s_mat.shape[0]
    n_occ = n_elec // 2
    # Symmetric orthogonalization.
    se, sv = np.linalg.eigh(s_mat)
    x = sv @ np.diag(se**-0.5) @ sv.T
    f = h_core.copy()
    e_old = 0.0
    dm = np.zeros((n, n))
    diis_f, diis_e = [], []
    for it in range(max_iter):
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        c = x @ cp
        c_occ = c[:, :n_occ]
        dm = 2.0 * c_occ @ c_occ.T
        j = np.einsum("pqrs,rs->pq", g, dm)
        k = np.einsum("prqs,rs->pq", g, dm)
        f = h_core + j - 0.5 * k
        e_elec = 0.5 * np.sum(dm * (h_core + f))
        err = f @ dm @ s_mat - s_mat @ dm @ f
        diis_f.append(f.copy())
        diis_e.append(err.copy())
        if len(diis_f) > 8:
            diis_f.pop(0)
            diis_e.pop(0)
        if len(diis_f) > 1:
            m = len(diis_f)
            b = -np.ones((m + 1, m + 1))
            b[m, m] = 0.0
            for a in range(m):
                for bb in range(m):
                    b[a, bb] = np.sum(diis_e[a] * diis_e[bb])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                w = np.linalg.solve(b, rhs)[:m]
                f = sum(wi * fi for wi, fi in zip(w, diis_f))
            except np.linalg.LinAlgError:
                pass
        if abs(e_elec - e_old) < tol and it > 2:
            break
        e_old = e_elec
    fp = x.T @ f @ x
    eps, cp = np.linalg.eigh(fp)
    c = x @ cp
    c_occ = c[:, :n_occ]
    dm = 2.0 * c_occ @ c_occ.T
    j = np.einsum("pqrs,rs->pq", g, dm)
    k = np.einsum("prqs,rs->pq", g, dm)
    f = h_core + j - 0.5 * k
    e_elec = 0.5 * np.sum(dm * (h_core + f))
    return e_elec + e_nuc, c


def mo_transform(h_core, g, c):
    h_mo = c.T @ h_core @ c
    g_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", g, c, c, c, c, optimize=True)
    return h_mo, g_mo


def write_fcidump(path, n_orb, n_elec, ms2, h_mo, g_mo, e_nuc, thresh=1e-14):
    lines = []
    lines.append(
        f"&FCI NORB={n_orb},NELEC={n_elec},MS2={ms2},"
    )
    lines.append("  ORBSYM=" + "1," * n_orb)
    lines.append("  ISYM=1,")
    lines.append(" &END")

    def fmt(v, i, j, k, l):
        return f" {v: .16E}  {i:3d}  {j:3d}  {k:3d}  {l:3d}"

    for p in range(n_orb):
        for q in range(p + 1):
            for r in range(p + 1):
                smax = q if r == p else r
                for s in range(smax + 1):
                    v = g_mo[p, q, r, s]
                    if abs(v) > thresh:
                        lines.append(fmt(v, p + 1, q + 1, r + 1, s + 1))
    for p in range(n_orb):
        for q in range(p + 1):
            v = h_mo[p, q]
            if abs(v) > thresh:
                lines.append(fmt(v, p + 1, q + 1, 0, 0))
    lines.append(fmt(e_nuc, 0, 0, 0, 0))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def make_chain(n_h, outpath):
    spacing = 1.0 * ANGSTROM_TO_BOHR
    centers = [np.array([0.0, 0.0, i * spacing]) for i in range(n_h)]
    charges = [(1.0, c) for c in centers]
    e_nuc = 0.0
    for i in range(n_h):
        for j in range(i):
            e_nuc += 1.0 / np.linalg.norm(centers[i] - centers[j])
    basis = Basis(centers)
    s_mat, t_mat = overlap_kinetic(basis)
    v_mat = nuclear_attraction(basis, charges)
    h_core = t_mat + v_mat
    g = eri_tensor(basis)
    e_hf, c = rhf(s_mat, h_core, g, n_h, e_nuc)
    # Fix MO sign convention: largest-magnitude coefficient positive.
    for k in range(c.shape[1]):
        idx = np.argmax(np.abs(c[:, k]))
        if c[idx, k] < 0:
            c[:, k] = -c[:, k]
    h_mo, g_mo = mo_transform(h_core, g, c)
    write_fcidump(outpath, n_h, n_h, 0, h_mo, g_mo, e_nuc)
    print(f"H{n_h}: E_RHF = {e_hf:.10f} Ha -> {outpath}")
    return e_hf


if __name__ == "__main__":
    outdir = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    import os

    os.makedirs(outdir, exist_ok=True)
    for n in (2, 4, 6, 8):
        make_chain(n, os.path.join(outdir, f"h{n}.fcidump"))
