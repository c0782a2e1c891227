//! Brute-force oracles, deliberately independent of the statevector engine:
//! dense many-body Hamiltonians in the particle-number sector basis (built two
//! ways and cross-checked), FCI diagonalization, exact propagation by full
//! eigendecomposition, dense fermionic rotations from minor determinants, and
//! numerical weight optimization over the probability simplex.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::Error;
use crate::ingest::{ActiveHamiltonian, IntegralSet};
use crate::linalg;
use crate::statevector::{sector_indices, State};
use crate::Result;

/// Dense Hamiltonian over the fixed `(n_alpha, n_beta)` determinant basis.
#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    /// Full 2n-qubit amplitude indices of the basis determinants, ascending.
    pub basis: Vec<usize>,
    /// Real symmetric matrix in that basis, Hartree.
    pub matrix: Array2<f64>,
}

impl DenseHamiltonian {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Position of a full amplitude index within the sector basis.
    pub fn position(&self, index: usize) -> Option<usize> {
        self.basis.binary_search(&index).ok()
    }

    /// Extract the sector block of a full statevector (asserting that no
    /// weight lies outside the sector beyond `tol`).
    pub fn project(&self, state: &State, tol: f64) -> Result<Vec<Complex64>> {
        let leak = state.leakage_outside_sector(self.n_alpha, self.n_beta);
        if leak > tol {
            return Err(Error::Numerical(format!(
                "state leaks {leak:e} outside the ({}, {}) sector",
                self.n_alpha, self.n_beta
            )));
        }
        Ok(self
            .basis
            .iter()
            .map(|&i| state.amplitudes()[i])
            .collect())
    }

    /// Embed a sector vector back into a full statevector.
    pub fn embed(&self, coeffs: &[Complex64]) -> State {
        let mut s = State::zeros(self.n_orb);
        for (&idx, &c) in self.basis.iter().zip(coeffs) {
            s.amplitudes_mut()[idx] = c;
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Jordan-Wigner determinant algebra on full 2n-bit strings.
// ---------------------------------------------------------------------------

/// Parity of occupied modes strictly below `q`.
#[inline]
fn jw_prefix_sign(bits: usize, q: usize) -> f64 {
    let below = bits & ((1usize << q) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a_q |bits>`: returns `(new_bits, sign)` or None if unoccupied.
#[inline]
fn annihilate(bits: usize, q: usize) -> Option<(usize, f64)> {
    if bits & (1 << q) == 0 {
        return None;
    }
    Some((bits & !(1 << q), jw_prefix_sign(bits, q)))
}

/// `a_q^dagger |bits>`: returns `(new_bits, sign)` or None if occupied.
#[inline]
fn create(bits: usize, q: usize) -> Option<(usize, f64)> {
    if bits & (1 << q) != 0 {
        return None;
    }
    Some((bits | (1 << q), jw_prefix_sign(bits, q)))
}

/// Apply the spin-summed substitution `E_pq = sum_sigma a'_{p sigma} a_{q sigma}`
/// to a determinant, returning up to two `(determinant, coefficient)` pairs.
fn apply_e_pq(bits: usize, p: usize, q: usize, n_orb: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(2);
    for spin_offset in [0, n_orb] {
        if let Some((b1, s1)) = annihilate(bits, q + spin_offset) {
            if let Some((b2, s2)) = create(b1, p + spin_offset) {
                out.push((b2, s1 * s2));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Dense Hamiltonian construction.
// ---------------------------------------------------------------------------

/// Build the dense sector Hamiltonian with Slater-Condon rules.
///
/// The active Hamiltonian `E_ext + sum kappa E_pq + 1/2 sum g E_pq E_rs`
/// is first rewritten in the normal-ordered form
/// `E_ext + sum h_eff E_pq + 1/2 sum g (E_pq E_rs - delta_qr E_ps)` with
/// `h_eff = kappa + 1/2 sum_r g_prrq`, which is what the Slater-Condon rules
/// address (one-electron matrix `h_eff`, chemists' integrals `g`).
pub fn build_dense(act: &ActiveHamiltonian) -> Result<DenseHamiltonian> {
    if act.n_orb > 8 {
        return Err(Error::SizeGuard(format!(
            "dense construction capped at 8 orbitals, got {}",
            act.n_orb
        )));
    }
    let n = act.n_orb;
    let mut h_eff = act.kappa.clone();
    for p in 0..n {
        for q in 0..n {
            let mut acc = 0.0;
            for r in 0..n {
                acc += act.g[[p, r, r, q]];
            }
            h_eff[[p, q]] += 0.5 * acc;
        }
    }
    let basis = sector_indices(n, act.n_alpha, act.n_beta);
    let dim = basis.len();
    let spatial = |q: usize| if q >= n { q - n } else { q };
    let same_spin = |a: usize, b: usize| (a < n) == (b < n);

    let rows = crate::parallel::map_indexed_auto(dim, |col| {
        let dket = basis[col];
        let ket_occ: Vec<usize> = (0..2 * n).filter(|&q| dket & (1 << q) != 0).collect();
        let mut row = vec![0.0f64; dim];
        for (rix, &dbra) in basis.iter().enumerate() {
            if rix > col {
                break; // fill lower triangle only, symmetrize later
            }
            let diff = dbra ^ dket;
            let degree = diff.count_ones() / 2;
            if degree > 2 {
                continue;
            }
            let val = match degree {
                0 => {
                    let mut e = act.e_ext;
                    for &pp in &ket_occ {
                        e += h_eff[[spatial(pp), spatial(pp)]];
                    }
                    for &pp in &ket_occ {
                        for &qq in &ket_occ {
                            let (p, q) = (spatial(pp), spatial(qq));
                            e += 0.5 * act.g[[p, p, q, q]];
                            if same_spin(pp, qq) {
                                e -= 0.5 * act.g[[p, q, q, p]];
                            }
                        }
                    }
                    e
                }
                1 => {
                    // Single excitation: P (in ket only) -> Q (in bra only).
                    let p_so = (diff & dket).trailing_zeros() as usize;
                    let q_so = (diff & dbra).trailing_zeros() as usize;
                    if !same_spin(p_so, q_so) {
                        continue; // spin flip: no coupling
                    }
                    let (_, s1) = annihilate(dket, p_so).unwrap();
                    let core = dket & !(1 << p_so);
                    let (_, s2) = create(core, q_so).unwrap();
                    let sign = s1 * s2;
                    let (p, q) = (spatial(q_so), spatial(p_so)); // bra index first
                    let mut v = h_eff[[p, q]];
                    for &rr in &ket_occ {
                        if rr == p_so {
                            continue;
                        }
                        let r = spatial(rr);
                        v += act.g[[p, q, r, r]];
                        if same_spin(rr, p_so) {
                            v -= act.g[[p, r, r, q]];
                        }
                    }
                    sign * v
                }
                2 => {
                    let mut ann: Vec<usize> =
                        (0..2 * n).filter(|&q| diff & dket & (1 << q) != 0).collect();
                    let mut cre: Vec<usize> =
                        (0..2 * n).filter(|&q| diff & dbra & (1 << q) != 0).collect();
                    ann.sort_unstable();
                    cre.sort_unstable();
                    let (p1, p2) = (ann[0], ann[1]);
                    let (q1, q2) = (cre[0], cre[1]);
                    // Reduce both determinants to the common core and collect
                    // the Jordan-Wigner signs along the way.
                    let (k1, s1) = annihilate(dket, p1).unwrap();
                    let (_, s2) = annihilate(k1, p2).unwrap();
                    let (b1, s3) = annihilate(dbra, q1).unwrap();
                    let (_, s4) = annihilate(b1, q2).unwrap();
                    let gamma = s1 * s2 * s3 * s4;
                    // <P1 P2 || Q1 Q2> in chemists' notation, spin-filtered.
                    let mut v = 0.0;
                    if same_spin(p1, q1) && same_spin(p2, q2) {
                        v += act.g[[spatial(q1), spatial(p1), spatial(q2), spatial(p2)]];
                    }
                    if same_spin(p1, q2) && same_spin(p2, q1) {
                        v -= act.g[[spatial(q2), spatial(p1), spatial(q1), spatial(p2)]];
                    }
                    gamma * v
                }
                _ => unreachable!(),
            };
            row[rix] = val;
        }
        row
    });

    let mut matrix = Array2::zeros((dim, dim));
    for (col, row) in rows.into_iter().enumerate() {
        for (rix, v) in row.into_iter().enumerate() {
            matrix[[rix, col]] = v;
            matrix[[col, rix]] = v;
        }
    }
    Ok(DenseHamiltonian {
        n_orb: n,
        n_alpha: act.n_alpha,
        n_beta: act.n_beta,
        basis,
        matrix,
    })
}

/// Second construction path: literal operator application of the kappa form
/// `E_ext + sum kappa E_pq + 1/2 sum g E_pq E_rs` on every basis determinant.
/// O(n^4) per column, so guarded to small systems; exists to cross-check the
/// Slater-Condon path through a different algebraic representation.
pub fn build_dense_direct(act: &ActiveHamiltonian) -> Result<DenseHamiltonian> {
    if act.n_orb > 4 {
        return Err(Error::SizeGuard(format!(
            "direct operator application capped at 4 orbitals, got {}",
            act.n_orb
        )));
    }
    let n = act.n_orb;
    let basis = sector_indices(n, act.n_alpha, act.n_beta);
    let dim = basis.len();
    let pos: std::collections::HashMap<usize, usize> =
        basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();

    let mut matrix = Array2::zeros((dim, dim));
    for (col, &det) in basis.iter().enumerate() {
        let mut acc: std::collections::HashMap<usize, f64> = std::collections::HashMap::new();
        acc.insert(det, act.e_ext);
        for p in 0..n {
            for q in 0..n {
                if act.kappa[[p, q]] != 0.0 {
                    for (d, s) in apply_e_pq(det, p, q, n) {
                        *acc.entry(d).or_insert(0.0) += act.kappa[[p, q]] * s;
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let gv = act.g[[p, q, r, s]];
                        if gv == 0.0 {
                            continue;
                        }
                        for (d1, s1) in apply_e_pq(det, r, s, n) {
                            for (d2, s2) in apply_e_pq(d1, p, q, n) {
                                *acc.entry(d2).or_insert(0.0) += 0.5 * gv * s1 * s2;
                            }
                        }
                    }
                }
            }
        }
        for (d, v) in acc {
            if let Some(&rix) = pos.get(&d) {
                matrix[[rix, col]] += v;
            } else if v.abs() > 1e-12 {
                return Err(Error::Numerical(
                    "operator application left the particle sector".into(),
                ));
            }
        }
    }
    Ok(DenseHamiltonian {
        n_orb: n,
        n_alpha: act.n_alpha,
        n_beta: act.n_beta,
        basis,
        matrix,
    })
}

// ---------------------------------------------------------------------------
// Dense fermionic rotations from minor determinants.
// ---------------------------------------------------------------------------

/// Determinant of a small matrix by Gaussian elimination with partial
/// pivoting.
fn small_det(mut m: Vec<Vec<f64>>) -> f64 {
    let k = m.len();
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        for row in col + 1..k {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
        }
        if m[piv][col].abs() < 1e-300 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= f * m[col][c];
            }
        }
    }
    det
}

/// Occupied-orbital list of a single-spin bitstring.
fn occ_list(bits: usize, n_orb: usize) -> Vec<usize> {
    (0..n_orb).filter(|&p| bits & (1 << p) != 0).collect()
}

/// Dense matrix of the fermionic rotation `g(U)` (the operator with
/// `g' a_k' g = sum_p U_pk a_p'`) over the sector basis.
///
/// Uses the Slater-determinant minor identity `<D'|g|D> = det U[occ(D), occ(D')]`
/// within each spin sector, so it needs no matrix logarithm and handles
/// det(U) = -1 without special casing.
pub fn rotation_sector_matrix(
    u: &Array2<f64>,
    n_orb: usize,
    n_alpha: usize,
    n_beta: usize,
) -> Array2<f64> {
    let spin_block = |n_el: usize| -> (Vec<usize>, Array2<f64>) {
        let dets: Vec<usize> = (0..1usize << n_orb)
            .filter(|b| b.count_ones() as usize == n_el)
            .collect();
        let m = dets.len();
        let mut block = Array2::zeros((m, m));
        for (ci, &dk) in dets.iter().enumerate() {
            let rows = occ_list(dk, n_orb);
            for (ri, &db) in dets.iter().enumerate() {
                let cols = occ_list(db, n_orb);
                let minor: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|&p| cols.iter().map(|&q| u[[p, q]]).collect())
                    .collect();
                block[[ri, ci]] = if rows.is_empty() { 1.0 } else { small_det(minor) };
            }
        }
        (dets, block)
    };
    let (adets, ablock) = spin_block(n_alpha);
    let (bdets, bblock) = spin_block(n_beta);

    let basis = sector_indices(n_orb, n_alpha, n_beta);
    let apos: std::collections::HashMap<usize, usize> =
        adets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let bpos: std::collections::HashMap<usize, usize> =
        bdets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let dim = basis.len();
    let mask = (1usize << n_orb) - 1;
    let mut out = Array2::zeros((dim, dim));
    for (ci, &dk) in basis.iter().enumerate() {
        let (ka, kb) = (apos[&(dk & mask)], bpos[&(dk >> n_orb)]);
        for (ri, &db) in basis.iter().enumerate() {
            let (ba, bb) = (apos[&(db & mask)], bpos[&(db >> n_orb)]);
            out[[ri, ci]] = ablock[[ba, ka]] * bblock[[bb, kb]];
        }
    }
    out
}

/// Dense sector matrix of the full XDF Hamiltonian
/// `E0 + sum_s G_s' D_s G_s`, every rotation realized densely from minor
/// determinants.
pub fn build_dense_xdf(x: &crate::xdf::XdfHamiltonian) -> Result<DenseHamiltonian> {
    if x.n_orb > 4 {
        return Err(Error::SizeGuard(format!(
            "dense XDF construction capped at 4 orbitals, got {}",
            x.n_orb
        )));
    }
    let n = x.n_orb;
    let basis = sector_indices(n, x.n_alpha, x.n_beta);
    let dim = basis.len();
    let mut matrix = Array2::from_diag(&Array1::from_elem(dim, x.e0));

    let mut add_term = |u: &Array2<f64>, diag: &crate::statevector::DiagonalOperator| {
        let g = rotation_sector_matrix(u, n, x.n_alpha, x.n_beta);
        // G^T diag G with the sector-basis diagonal eigenvalues.
        for ci in 0..dim {
            for ri in 0..dim {
                let mut acc = 0.0;
                for (m, &bm) in basis.iter().enumerate() {
                    acc += g[[m, ri]] * diag.eigenvalue(bm) * g[[m, ci]];
                }
                matrix[[ri, ci]] += acc;
            }
        }
    };

    add_term(
        &x.one_body.u0,
        &crate::statevector::DiagonalOperator::one_body(x.one_body.f.to_vec()),
    );
    for fac in &x.factors {
        add_term(
            &fac.u,
            &crate::statevector::DiagonalOperator::two_body(fac.gamma.to_vec(), fac.h_t),
        );
    }
    Ok(DenseHamiltonian {
        n_orb: n,
        n_alpha: x.n_alpha,
        n_beta: x.n_beta,
        basis,
        matrix,
    })
}

// ---------------------------------------------------------------------------
// FCI and exact propagation.
// ---------------------------------------------------------------------------

/// Cached eigendecomposition of a dense Hamiltonian for exact dynamics.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    pub basis: Vec<usize>,
    pub evals: Array1<f64>,
    pub evecs: Array2<f64>,
    n_orb: usize,
    n_alpha: usize,
    n_beta: usize,
}

impl ExactPropagator {
    pub fn new(dense: &DenseHamiltonian) -> Result<ExactPropagator> {
        let (evals, evecs) = linalg::eigh_real(&dense.matrix)?;
        Ok(ExactPropagator {
            basis: dense.basis.clone(),
            evals,
            evecs,
            n_orb: dense.n_orb,
            n_alpha: dense.n_alpha,
            n_beta: dense.n_beta,
        })
    }

    /// Lowest eigenpair.
    pub fn ground(&self) -> (f64, Vec<f64>) {
        (self.evals[0], self.evecs.column(0).to_vec())
    }

    fn project(&self, phi: &State) -> Result<Vec<Complex64>> {
        let leak = phi.leakage_outside_sector(self.n_alpha, self.n_beta);
        if leak > 1e-9 {
            return Err(Error::Numerical(format!(
                "state leaks {leak:e} outside the ({}, {}) sector",
                self.n_alpha, self.n_beta
            )));
        }
        Ok(self.basis.iter().map(|&i| phi.amplitudes()[i]).collect())
    }

    fn embed(&self, coeffs: &[Complex64]) -> State {
        let mut s = State::zeros(self.n_orb);
        for (&idx, &c) in self.basis.iter().zip(coeffs) {
            s.amplitudes_mut()[idx] = c;
        }
        s
    }

    /// `exp(-i (H - shift) tau) |phi>` on a full statevector whose support
    /// lies in this sector.
    pub fn propagate_state(&self, phi: &State, tau: f64, shift: f64) -> Result<State> {
        let coeffs = self.project(phi)?;
        let mut modal = linalg::real_mat_t_complex_vec(&self.evecs, &coeffs);
        for (k, c) in modal.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, -(self.evals[k] - shift) * tau);
        }
        let evolved = linalg::real_mat_complex_vec(&self.evecs, &modal);
        Ok(self.embed(&evolved))
    }

    /// Expectation `<phi|H|phi> / <phi|phi>` in this sector.
    pub fn expectation(&self, phi: &State) -> Result<f64> {
        let coeffs = self.project(phi)?;
        let modal = linalg::real_mat_t_complex_vec(&self.evecs, &coeffs);
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, c) in modal.iter().enumerate() {
            num += self.evals[k] * c.norm_sqr();
            den += c.norm_sqr();
        }
        Ok(num / den)
    }
}

/// Lowest eigenpair of a dense Hamiltonian.
pub fn fci_ground(dense: &DenseHamiltonian) -> Result<(f64, Vec<f64>)> {
    let prop = ExactPropagator::new(dense)?;
    Ok(prop.ground())
}

/// Restricted Hartree-Fock energy straight from the integrals (closed shell,
/// lowest orbitals doubly occupied).
pub fn hartree_fock_energy(ints: &IntegralSet) -> Result<f64> {
    if ints.n_alpha != ints.n_beta {
        return Err(Error::Precondition(
            "restricted HF energy needs a closed-shell occupation".into(),
        ));
    }
    let occ = ints.n_alpha;
    let mut e = ints.e_nuc_ext;
    for i in 0..occ {
        e += 2.0 * ints.h[[i, i]];
    }
    for i in 0..occ {
        for j in 0..occ {
            e += 2.0 * ints.g[[i, i, j, j]] - ints.g[[i, j, j, i]];
        }
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Brute-force weight optimization.
// ---------------------------------------------------------------------------

/// Minimize `sum_s c_s (1/p_s - 1)` over the probability simplex by projected
/// gradient descent. Independent check of the closed-form optimal weights.
pub fn brute_force_weights(c: &[f64]) -> Result<Vec<f64>> {
    let l = c.len();
    if l == 0 || c.iter().all(|&x| x <= 0.0) {
        return Err(Error::DegenerateWeights);
    }
    if c.iter().any(|&x| x < 0.0) {
        return Err(Error::Precondition("c_s must be non-negative".into()));
    }
    let objective = |p: &[f64]| -> f64 {
        p.iter()
            .zip(c)
            .map(|(&pi, &ci)| if ci == 0.0 { 0.0 } else { ci * (1.0 / pi.max(1e-300) - 1.0) })
            .sum()
    };
    let mut p = vec![1.0 / l as f64; l];
    let mut step = 0.1;
    let mut f_cur = objective(&p);
    for _ in 0..200_000 {
        let grad: Vec<f64> = p
            .iter()
            .zip(c)
            .map(|(&pi, &ci)| -ci / (pi.max(1e-12) * pi.max(1e-12)))
            .collect();
        let trial: Vec<f64> = p.iter().zip(&grad).map(|(&pi, &gi)| pi - step * gi).collect();
        let trial = project_to_simplex(&trial);
        let f_trial = objective(&trial);
        if f_trial < f_cur - 1e-16 {
            let delta = f_cur - f_trial;
            p = trial;
            f_cur = f_trial;
            step *= 1.2;
            if delta < 1e-14 && step < 1e-10 {
                break;
            }
        } else {
            step *= 0.5;
            if step < 1e-16 {
                break;
            }
        }
    }
    Ok(p)
}

/// Euclidean projection onto the probability simplex.
fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Random orthogonal matrix via Gram-Schmidt on a Gaussian-ish matrix.
pub fn random_orthogonal<R: rand::Rng>(n: usize, rng: &mut R) -> Array2<f64> {
    loop {
        let mut m = Array2::zeros((n, n));
        for v in m.iter_mut() {
            *v = rng.gen_range(-1.0..1.0f64);
        }
        let mut q: Vec<Array1<f64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut col = m.column(j).to_owned();
            for prev in &q {
                let proj = col.dot(prev);
                col = col - proj * prev;
            }
            let norm = col.dot(&col).sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            q.push(col / norm);
        }
        if !ok {
            continue;
        }
        let mut out = Array2::zeros((n, n));
        for (j, col) in q.iter().enumerate() {
            out.column_mut(j).assign(col);
        }
        return out;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{assemble_active, parse_fcidump, IntegralSet};
    use ndarray::array;
    use rand::SeedableRng;

    fn h2_active() -> ActiveHamiltonian {
        let ints =
            parse_fcidump(include_str!("../tests/data/h2_like.fcidump")).unwrap();
        assemble_active(&ints)
    }

    #[test]
    fn one_orbital_two_electrons_closed_form() {
        let mut ints = IntegralSet::zeros(1, 1, 1);
        ints.e_nuc_ext = 0.4;
        ints.h[[0, 0]] = -1.1;
        ints.g[[0, 0, 0, 0]] = 0.6;
        let act = assemble_active(&ints);
        let dense = build_dense(&act).unwrap();
        assert_eq!(dense.dim(), 1);
        let expect = 0.4 + 2.0 * (-1.1) + 0.6;
        assert!((dense.matrix[[0, 0]] - expect).abs() < 1e-12);
    }

    #[test]
    fn non_interacting_limit_spectrum() {
        let mut ints = IntegralSet::zeros(2, 1, 1);
        ints.h[[0, 0]] = -0.9;
        ints.h[[1, 1]] = 0.3;
        let act = assemble_active(&ints);
        let dense = build_dense(&act).unwrap();
        let (evals, _) = linalg::eigh_real(&dense.matrix).unwrap();
        // Spectrum is all sums of one alpha and one beta orbital energy.
        let mut expect = vec![-1.8, -0.6, -0.6, 0.6];
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in evals.iter().zip(expect) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_path_dense_construction_agrees() {
        for act in [h2_active(), {
            let ints =
                parse_fcidump(include_str!("../tests/data/rand3.fcidump")).unwrap();
            assemble_active(&ints)
        }] {
            let a = build_dense(&act).unwrap();
            let b = build_dense_direct(&act).unwrap();
            let mut dev: f64 = 0.0;
            for (x, y) in a.matrix.iter().zip(b.matrix.iter()) {
                dev = dev.max((x - y).abs());
            }
            assert!(dev < 1e-10, "dense paths disagree by {dev:e}");
        }
    }

    #[test]
    fn hf_determinant_matches_hf_formula() {
        let ints = parse_fcidump(include_str!("../tests/data/h2_like.fcidump")).unwrap();
        let act = assemble_active(&ints);
        let dense = build_dense(&act).unwrap();
        let hf_state = State::reference(2, 1, 1).unwrap();
        let pos = dense.position(0b0101).unwrap();
        let e_hf = hartree_fock_energy(&ints).unwrap();
        assert!((dense.matrix[[pos, pos]] - e_hf).abs() < 1e-10);
        let _ = hf_state;
    }

    #[test]
    fn fci_below_hf_and_dimension() {
        let ints = parse_fcidump(include_str!("../tests/data/h2_like.fcidump")).unwrap();
        let act = assemble_active(&ints);
        let dense = build_dense(&act).unwrap();
        assert_eq!(dense.dim(), 4); // C(2,1)^2
        let (e_fci, _) = fci_ground(&dense).unwrap();
        let e_hf = hartree_fock_energy(&ints).unwrap();
        assert!(e_fci < e_hf);
    }

    #[test]
    fn propagation_is_unitary_and_conserves_energy() {
        let act = h2_active();
        let dense = build_dense(&act).unwrap();
        let prop = ExactPropagator::new(&dense).unwrap();
        let phi0 = State::reference(2, 1, 1).unwrap();
        let same = prop.propagate_state(&phi0, 0.0, 0.0).unwrap();
        assert!((crate::statevector::inner(&phi0, &same).unwrap().re - 1.0).abs() < 1e-12);
        let e0 = prop.expectation(&phi0).unwrap();
        for tau in [0.3, 1.7, 9.0] {
            let evolved = prop.propagate_state(&phi0, tau, 0.0).unwrap();
            assert!((evolved.norm() - 1.0).abs() < 1e-12);
            let e = prop.expectation(&evolved).unwrap();
            assert!((e - e0).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_matrix_minor_identity_small_case() {
        // n_orb = 2, single alpha electron: <orb1|g|orb0> = U[0,1].
        let theta = 0.37f64;
        let (c, s) = (theta.cos(), theta.sin());
        let u = array![[c, -s], [s, c]];
        let g = rotation_sector_matrix(&u, 2, 1, 0);
        // Sector basis: alpha bits {01, 10} with empty beta -> indices 1, 2.
        // g[row=|orb1>, col=|orb0>] = U[0,1] = -s.
        assert!((g[[1, 0]] - (-s)).abs() < 1e-12);
        assert!((g[[0, 0]] - c).abs() < 1e-12);
        // Orthogonality of the many-body rotation.
        let gtg = g.t().dot(&g);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gtg[[i, j]] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rotation_composition_property() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        let a = random_orthogonal(3, &mut rng);
        let b = random_orthogonal(3, &mut rng);
        // g(U) g(V) = g(V U): minor-determinant matrices must compose the
        // same way (matrices act on kets, so product order swaps).
        let ga = rotation_sector_matrix(&a, 3, 2, 1);
        let gb = rotation_sector_matrix(&b, 3, 2, 1);
        let gab = rotation_sector_matrix(&b.dot(&a), 3, 2, 1);
        let prod = ga.dot(&gb);
        let mut dev: f64 = 0.0;
        for (x, y) in prod.iter().zip(gab.iter()) {
            dev = dev.max((x - y).abs());
        }
        assert!(dev < 1e-10, "composition deviates by {dev:e}");
    }

    #[test]
    fn simplex_weights_match_closed_forms() {
        let p = brute_force_weights(&[1.0, 1.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-6 && (p[1] - 0.5).abs() < 1e-6);
        let p = brute_force_weights(&[4.0, 1.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-6, "got {p:?}");
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-6);
        // Random 3-term instances against sqrt(c) normalization.
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(13);
        for _ in 0..5 {
            use rand::Rng;
            let c: Vec<f64> = (0..3).map(|_| rng.gen_range(0.01..4.0)).collect();
            let p = brute_force_weights(&c).unwrap();
            let norm: f64 = c.iter().map(|x| x.sqrt()).sum();
            for (pi, ci) in p.iter().zip(&c) {
                assert!((pi - ci.sqrt() / norm).abs() < 1e-6, "c={c:?} p={p:?}");
            }
        }
        assert!(brute_force_weights(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn fci_stable_under_orbital_permutation() {
        let ints = parse_fcidump(include_str!("../tests/data/rand3.fcidump")).unwrap();
        let act = assemble_active(&ints);
        let dense = build_dense(&act).unwrap();
        let (e, _) = fci_ground(&dense).unwrap();
        let n = act.n_orb;
        let perm = |i: usize| (i + 1) % n;
        let mut act_p = act.clone();
        for p in 0..n {
            for q in 0..n {
                act_p.kappa[[p, q]] = act.kappa[[perm(p), perm(q)]];
                for r in 0..n {
                    for s in 0..n {
                        act_p.g[[p, q, r, s]] = act.g[[perm(p), perm(q), perm(r), perm(s)]];
                    }
                }
            }
        }
        let dense_p = build_dense(&act_p).unwrap();
        let (e_p, _) = fci_ground(&dense_p).unwrap();
        assert!((e - e_p).abs() < 1e-10);
    }
}
