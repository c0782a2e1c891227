//! Dense complex statevector over `2 * n_orb` qubits with the
//! fast-forwardable primitives every protocol is built from: adjacent-pair
//! Givens rotations, compiled orbital-rotation networks, diagonal one- and
//! two-body phase evolutions, inner products, and full XDF Hamiltonian
//! application.
//!
//! Qubit layout is alpha-then-beta: alpha spin-orbital `p` lives on qubit `p`
//! (bit `p` of the amplitude index) and beta spin-orbital `p` on qubit
//! `p + n_orb`. Under Jordan-Wigner with this ordering an adjacent-orbital
//! Givens rotation carries no fermionic string, so no Pauli strings are ever
//! materialized.

use num_complex::Complex64;

use crate::error::Error;
use crate::parallel;
use crate::xdf::XdfHamiltonian;
use crate::Result;

/// Minimum amplitude count before gate loops fan out over rayon.
const PAR_THRESHOLD: usize = 1 << 13;

/// Complex statevector over `2 * n_orb` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    n_orb: usize,
    amps: Vec<Complex64>,
}

impl State {
    /// Zero state (all amplitudes zero) — mostly useful as an accumulator.
    pub fn zeros(n_orb: usize) -> State {
        State {
            n_orb,
            amps: vec![Complex64::new(0.0, 0.0); 1 << (2 * n_orb)],
        }
    }

    /// Computational-basis reference determinant with the lowest `n_alpha`
    /// alpha orbitals and lowest `n_beta` beta orbitals occupied.
    pub fn reference(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<State> {
        if n_alpha > n_orb || n_beta > n_orb {
            return Err(Error::Index(format!(
                "occupation ({n_alpha},{n_beta}) exceeds n_orb={n_orb}"
            )));
        }
        let mut s = State::zeros(n_orb);
        let alpha_bits = (1usize << n_alpha) - 1;
        let beta_bits = ((1usize << n_beta) - 1) << n_orb;
        s.amps[alpha_bits | beta_bits] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Basis state for an explicit bitstring index.
    pub fn basis_state(n_orb: usize, index: usize) -> State {
        let mut s = State::zeros(n_orb);
        s.amps[index] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn from_amplitudes(n_orb: usize, amps: Vec<Complex64>) -> Result<State> {
        if amps.len() != 1 << (2 * n_orb) {
            return Err(Error::Dimension(format!(
                "expected {} amplitudes, got {}",
                1usize << (2 * n_orb),
                amps.len()
            )));
        }
        Ok(State { n_orb, amps })
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        parallel::chunked_sum_auto(&self.amps, 0.0f64, |chunk| {
            // Kahan-compensated partial sums keep reductions deterministic.
            let mut sum = 0.0;
            let mut c = 0.0;
            for a in chunk {
                let y = a.norm_sqr() - c;
                let t = sum + y;
                c = (t - sum) - y;
                sum = t;
            }
            sum
        })
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    pub fn add_scaled(&mut self, other: &State, factor: Complex64) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += factor * b;
        }
    }

    /// Weight outside the `(n_alpha, n_beta)` particle-number sector.
    pub fn leakage_outside_sector(&self, n_alpha: usize, n_beta: usize) -> f64 {
        let n = self.n_orb;
        let mask = (1usize << n) - 1;
        let mut leak = 0.0;
        for (idx, a) in self.amps.iter().enumerate() {
            let na = (idx & mask).count_ones() as usize;
            let nb = (idx >> n).count_ones() as usize;
            if na != n_alpha || nb != n_beta {
                leak += a.norm_sqr();
            }
        }
        leak
    }
}

/// `<bra|ket>` with deterministic chunked reduction.
pub fn inner(bra: &State, ket: &State) -> Result<Complex64> {
    if bra.n_orb != ket.n_orb {
        return Err(Error::Dimension(format!(
            "inner product over {} vs {} orbitals",
            bra.n_orb, ket.n_orb
        )));
    }
    let pairs: Vec<(Complex64, Complex64)> =
        bra.amps.iter().copied().zip(ket.amps.iter().copied()).collect();
    let sum = parallel::chunked_sum_auto(
        &pairs,
        Complex64::new(0.0, 0.0),
        |chunk: &[(Complex64, Complex64)]| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, k) in chunk {
                acc += b.conj() * k;
            }
            acc
        },
    );
    Ok(sum)
}

/// All amplitude indices in the `(n_alpha, n_beta)` sector, ascending.
pub fn sector_indices(n_orb: usize, n_alpha: usize, n_beta: usize) -> Vec<usize> {
    let mask = (1usize << n_orb) - 1;
    (0..1usize << (2 * n_orb))
        .filter(|idx| {
            (idx & mask).count_ones() as usize == n_alpha
                && (idx >> n_orb).count_ones() as usize == n_beta
        })
        .collect()
}

/// Apply the Givens pair rotation with angle `phi` to spatial orbitals
/// `(p, p+1)`, simultaneously in the alpha and beta sectors.
///
/// Within each spin sector the `|01>`/`|10>` occupation amplitudes mix by
/// `[[cos, -sin], [sin, cos]]` (`|01>` = orbital `p` empty, `p+1` occupied);
/// `|00>` and `|11>` are untouched.
pub fn apply_givens_pair(state: &mut State, p: usize, phi: f64) -> Result<()> {
    let n = state.n_orb;
    if p + 1 >= n {
        return Err(Error::Index(format!(
            "givens pair ({p},{}) out of range for n_orb={n}",
            p + 1
        )));
    }
    let (c, s) = (phi.cos(), phi.sin());
    two_qubit_rotation(&mut state.amps, p, p + 1, c, s);
    two_qubit_rotation(&mut state.amps, p + n, p + n + 1, c, s);
    Ok(())
}

/// Rotate the `|01>`/`|10>` subspace of qubits `(q0, q1)`, `q0 < q1`.
fn two_qubit_rotation(amps: &mut [Complex64], q0: usize, q1: usize, c: f64, s: f64) {
    debug_assert!(q0 < q1);
    let block = 1usize << (q1 + 1);
    let half = 1usize << q1;
    let bit0 = 1usize << q0;

    let rotate_block = |chunk: &mut [Complex64]| {
        let (lo, hi) = chunk.split_at_mut(half);
        let mut x = 0usize;
        while x < half {
            if x & bit0 == 0 {
                let a01 = hi[x];
                let a10 = lo[x | bit0];
                hi[x] = c * a01 - s * a10;
                lo[x | bit0] = s * a01 + c * a10;
            }
            x += 1;
        }
    };

    #[cfg(feature = "parallel")]
    {
        if amps.len() >= PAR_THRESHOLD {
            use rayon::prelude::*;
            amps.par_chunks_mut(block).for_each(rotate_block);
            return;
        }
    }
    amps.chunks_mut(block).for_each(rotate_block);
}

/// Compiled network of adjacent-pair Givens rotations realizing a fermionic
/// orbital rotation, with an optional parity flip on the last orbital
/// absorbing a determinant of -1.
#[derive(Debug, Clone)]
pub struct GivensNetwork {
    n_orb: usize,
    rotations: Vec<(usize, f64)>,
    flip_last: bool,
}

impl GivensNetwork {
    /// Decompose an orthogonal `U` into adjacent-pair rotations such that
    /// applying the network implements the fermionic rotation `g` with
    /// `g' a_k' g = sum_p U_pk a_p'` (acting identically on both spins).
    ///
    /// The elimination is a Givens QR over adjacent rows, at most
    /// `n_orb (n_orb - 1) / 2` rotations.
    pub fn compile(u: &ndarray::Array2<f64>) -> Result<GivensNetwork> {
        let n = u.nrows();
        if u.ncols() != n {
            return Err(Error::Dimension("rotation matrix must be square".into()));
        }
        let utu = u.t().dot(u);
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((utu[[i, j]] - expect).abs());
            }
        }
        if dev > 1e-8 {
            return Err(Error::Precondition(format!(
                "matrix is not orthogonal (U^T U deviates by {dev:e})"
            )));
        }

        let mut v = u.clone();
        let mut rotations = Vec::new();
        let apply_wt = |v: &mut ndarray::Array2<f64>, row: usize, theta: f64| {
            let (c, s) = (theta.cos(), theta.sin());
            for col in 0..n {
                let a = v[[row, col]];
                let b = v[[row + 1, col]];
                v[[row, col]] = c * a + s * b;
                v[[row + 1, col]] = -s * a + c * b;
            }
        };
        for j in 0..n.saturating_sub(1) {
            for i in (j + 1..n).rev() {
                if v[[i, j]].abs() < 1e-15 {
                    v[[i, j]] = 0.0;
                    continue;
                }
                let theta = v[[i, j]].atan2(v[[i - 1, j]]);
                apply_wt(&mut v, i - 1, theta);
                v[[i, j]] = 0.0;
                rotations.push((i - 1, theta));
            }
        }
        // The remaining matrix is diagonal with entries +-1; bubble any -1
        // (other than the last) downwards with angle-pi rotations.
        for i in 0..n.saturating_sub(1) {
            if v[[i, i]] < 0.0 {
                apply_wt(&mut v, i, std::f64::consts::PI);
                rotations.push((i, std::f64::consts::PI));
            }
        }
        let flip_last = v[[n - 1, n - 1]] < 0.0;
        for i in 0..n {
            let target = if i == n - 1 && flip_last { -1.0 } else { 1.0 };
            if (v[[i, i]] - target).abs() > 1e-6 {
                return Err(Error::Numerical(format!(
                    "givens elimination left diagonal entry {i} at {}",
                    v[[i, i]]
                )));
            }
        }
        Ok(GivensNetwork {
            n_orb: n,
            rotations,
            flip_last,
        })
    }

    /// Identity network.
    pub fn identity(n_orb: usize) -> GivensNetwork {
        GivensNetwork {
            n_orb,
            rotations: Vec::new(),
            flip_last: false,
        }
    }

    pub fn rotations(&self) -> &[(usize, f64)] {
        &self.rotations
    }

    pub fn flips_last(&self) -> bool {
        self.flip_last
    }

    /// Apply the network (the fermionic rotation `G`).
    pub fn apply(&self, state: &mut State) -> Result<()> {
        debug_assert_eq!(state.n_orb, self.n_orb);
        for &(p, theta) in &self.rotations {
            apply_givens_pair(state, p, theta)?;
        }
        if self.flip_last {
            self.apply_flip(state);
        }
        Ok(())
    }

    /// Apply the inverse network (`G'`).
    pub fn apply_inverse(&self, state: &mut State) -> Result<()> {
        debug_assert_eq!(state.n_orb, self.n_orb);
        if self.flip_last {
            self.apply_flip(state);
        }
        for &(p, theta) in self.rotations.iter().rev() {
            apply_givens_pair(state, p, -theta)?;
        }
        Ok(())
    }

    /// Phase `(-1)^(occ of last alpha orbital + occ of last beta orbital)`.
    fn apply_flip(&self, state: &mut State) {
        let n = self.n_orb;
        let bit_a = 1usize << (n - 1);
        let bit_b = 1usize << (2 * n - 1);
        for (idx, a) in state.amps.iter_mut().enumerate() {
            let parity = ((idx & bit_a != 0) as u32) ^ ((idx & bit_b != 0) as u32);
            if parity == 1 {
                *a = -*a;
            }
        }
    }
}

/// Which diagonal operator a term carries.
#[derive(Debug, Clone)]
pub enum DiagonalKind {
    /// `-1/2 sum_k f_k (Z_k + Z_kbar)`.
    OneBody { f: Vec<f64> },
    /// `1/8 sum_kl Z_kl (Z_k + Z_kbar)(Z_l + Z_lbar) - 1/4 sum_k Z_kk` with
    /// `Z_kl = h_t gamma_k gamma_l`. The subtracted constant is the part of
    /// the double sum proportional to identity (`Z_k^2 = 1`), which the
    /// scalar term of the Hamiltonian already carries.
    TwoBody { gamma: Vec<f64>, h_t: f64 },
}

/// Diagonal operator in the rotated occupation basis, with its eigenvalue
/// table over all bitstrings.
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    pub kind: DiagonalKind,
    n_orb: usize,
    eigs: Vec<f64>,
}

impl DiagonalOperator {
    pub fn one_body(f: Vec<f64>) -> DiagonalOperator {
        let n_orb = f.len();
        let kind = DiagonalKind::OneBody { f };
        let eigs = build_eig_table(n_orb, &kind);
        DiagonalOperator { kind, n_orb, eigs }
    }

    pub fn two_body(gamma: Vec<f64>, h_t: f64) -> DiagonalOperator {
        let n_orb = gamma.len();
        let kind = DiagonalKind::TwoBody { gamma, h_t };
        let eigs = build_eig_table(n_orb, &kind);
        DiagonalOperator { kind, n_orb, eigs }
    }

    /// Eigenvalue on a computational-basis bitstring.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        self.eigs[index]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigs
    }

    /// Largest |eigenvalue| over a set of basis indices (the spectral norm of
    /// the rotated term restricted to that sector).
    pub fn spectral_norm_over(&self, indices: &[usize]) -> f64 {
        indices
            .iter()
            .map(|&i| self.eigs[i].abs())
            .fold(0.0, f64::max)
    }
}

fn build_eig_table(n_orb: usize, kind: &DiagonalKind) -> Vec<f64> {
    let dim = 1usize << (2 * n_orb);
    let mut eigs = vec![0.0; dim];
    match kind {
        DiagonalKind::OneBody { f } => {
            for (idx, e) in eigs.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, fk) in f.iter().enumerate() {
                    acc += fk * pair_z(idx, k, n_orb);
                }
                *e = -0.5 * acc;
            }
        }
        DiagonalKind::TwoBody { gamma, h_t } => {
            let gamma_sq: f64 = gamma.iter().map(|g| g * g).sum();
            for (idx, e) in eigs.iter_mut().enumerate() {
                let mut dot = 0.0;
                for (k, gk) in gamma.iter().enumerate() {
                    dot += gk * pair_z(idx, k, n_orb);
                }
                *e = h_t / 8.0 * (dot * dot - 2.0 * gamma_sq);
            }
        }
    }
    eigs
}

/// `z_k + z_kbar` for a bitstring, with `z = 1 - 2 occ`.
#[inline]
fn pair_z(idx: usize, k: usize, n_orb: usize) -> f64 {
    let za = 1.0 - 2.0 * ((idx >> k) & 1) as f64;
    let zb = 1.0 - 2.0 * ((idx >> (k + n_orb)) & 1) as f64;
    za + zb
}

/// Multiply each amplitude by `exp(-i tau eig(b))`.
pub fn evolve_diagonal(state: &mut State, op: &DiagonalOperator, tau: f64) {
    debug_assert_eq!(state.n_orb, op.n_orb);
    let eigs = &op.eigs;
    let evolve_chunk = |start: usize, chunk: &mut [Complex64]| {
        for (off, a) in chunk.iter_mut().enumerate() {
            let phase = Complex64::from_polar(1.0, -tau * eigs[start + off]);
            *a *= phase;
        }
    };
    #[cfg(feature = "parallel")]
    {
        if state.amps.len() >= PAR_THRESHOLD {
            use rayon::prelude::*;
            state
                .amps
                .par_chunks_mut(parallel::REDUCE_CHUNK)
                .enumerate()
                .for_each(|(ci, chunk)| evolve_chunk(ci * parallel::REDUCE_CHUNK, chunk));
            return;
        }
    }
    for (ci, chunk) in state.amps.chunks_mut(parallel::REDUCE_CHUNK).enumerate() {
        evolve_chunk(ci * parallel::REDUCE_CHUNK, chunk);
    }
}

/// Multiply each amplitude by its diagonal eigenvalue (applies `D`, not the
/// evolution).
pub fn apply_diagonal(state: &mut State, op: &DiagonalOperator) {
    debug_assert_eq!(state.n_orb, op.n_orb);
    for (a, e) in state.amps.iter_mut().zip(&op.eigs) {
        *a *= *e;
    }
}

/// Identity of an XDF Hamiltonian term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TermId {
    OneBody,
    TwoBody(usize),
}

/// One compiled term `G' D G`.
#[derive(Debug, Clone)]
pub struct CompiledTerm {
    pub id: TermId,
    pub network: GivensNetwork,
    pub diag: DiagonalOperator,
}

/// XDF Hamiltonian with every rotation compiled to a Givens network and every
/// diagonal tabulated — the shared read-only object all protocols consume.
#[derive(Debug, Clone)]
pub struct CompiledXdf {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub e0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `terms[0]` is the one-body term; `terms[1 + t]` is two-body factor `t`.
    pub terms: Vec<CompiledTerm>,
}

impl CompiledXdf {
    pub fn compile(xdf: &XdfHamiltonian) -> Result<CompiledXdf> {
        let mut terms = Vec::with_capacity(1 + xdf.factors.len());
        terms.push(CompiledTerm {
            id: TermId::OneBody,
            network: GivensNetwork::compile(&xdf.one_body.u0)?,
            diag: DiagonalOperator::one_body(xdf.one_body.f.to_vec()),
        });
        for (t, fac) in xdf.factors.iter().enumerate() {
            terms.push(CompiledTerm {
                id: TermId::TwoBody(t),
                network: GivensNetwork::compile(&fac.u)?,
                diag: DiagonalOperator::two_body(fac.gamma.to_vec(), fac.h_t),
            });
        }
        Ok(CompiledXdf {
            n_orb: xdf.n_orb,
            n_alpha: xdf.n_alpha,
            n_beta: xdf.n_beta,
            e0: xdf.e0,
            lambda1: xdf.lambda1,
            lambda2: xdf.lambda2,
            terms,
        })
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, id: TermId) -> Result<&CompiledTerm> {
        let idx = match id {
            TermId::OneBody => 0,
            TermId::TwoBody(t) => {
                if 1 + t >= self.terms.len() {
                    return Err(Error::Index(format!("two-body factor {t} out of range")));
                }
                1 + t
            }
        };
        Ok(&self.terms[idx])
    }

    /// Reference determinant in this Hamiltonian's particle sector.
    pub fn reference_state(&self) -> Result<State> {
        State::reference(self.n_orb, self.n_alpha, self.n_beta)
    }

    /// Sector basis indices for this Hamiltonian's particle numbers.
    pub fn sector(&self) -> Vec<usize> {
        sector_indices(self.n_orb, self.n_alpha, self.n_beta)
    }
}

/// Exact fast-forwarded evolution `exp(-i tau H_s)` of a single term:
/// network, diagonal phases, inverse network.
pub fn apply_term_evolution(
    state: &mut State,
    xdf: &CompiledXdf,
    id: TermId,
    tau: f64,
) -> Result<()> {
    let term = xdf.term(id)?;
    term.network.apply(state)?;
    evolve_diagonal(state, &term.diag, tau);
    term.network.apply_inverse(state)?;
    Ok(())
}

/// Apply the term operator `H_s = G' D G` itself (not its exponential).
pub fn apply_term_hamiltonian(state: &mut State, xdf: &CompiledXdf, id: TermId) -> Result<()> {
    let term = xdf.term(id)?;
    term.network.apply(state)?;
    apply_diagonal(state, &term.diag);
    term.network.apply_inverse(state)?;
    Ok(())
}

/// `(E0 + sum_s G_s' D_s G_s)|psi>`, unnormalized.
pub fn apply_xdf_hamiltonian(state: &State, xdf: &CompiledXdf) -> Result<State> {
    let mut out = state.clone();
    out.scale(Complex64::new(xdf.e0, 0.0));
    for term in &xdf.terms {
        let mut work = state.clone();
        term.network.apply(&mut work)?;
        apply_diagonal(&mut work, &term.diag);
        term.network.apply_inverse(&mut work)?;
        out.add_scaled(&work, Complex64::new(1.0, 0.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;

    fn random_state(n_orb: usize, seed: u64) -> State {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let mut s = State::zeros(n_orb);
        for a in s.amps.iter_mut() {
            *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let norm = s.norm();
        s.scale(Complex64::new(1.0 / norm, 0.0));
        s
    }

    #[test]
    fn reference_state_occupations() {
        let s = State::reference(2, 1, 1).unwrap();
        // alpha orbital 0 -> bit 0, beta orbital 0 -> bit 2.
        assert_eq!(s.amps[0b0101], Complex64::new(1.0, 0.0));
        assert!((s.norm() - 1.0).abs() < 1e-15);

        let vac = State::reference(1, 0, 0).unwrap();
        assert_eq!(vac.amps[0], Complex64::new(1.0, 0.0));

        assert!(State::reference(2, 3, 0).is_err());
    }

    #[test]
    fn givens_zero_angle_is_identity() {
        let mut s = random_state(2, 1);
        let before = s.clone();
        apply_givens_pair(&mut s, 0, 0.0).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn givens_half_pi_moves_single_electron() {
        // Single alpha electron in orbital 0 of a 2-orbital system.
        let mut s = State::basis_state(2, 0b0001);
        apply_givens_pair(&mut s, 0, std::f64::consts::FRAC_PI_2).unwrap();
        // Ends up in orbital 1 up to the sign fixed by the rotation matrix.
        assert!((s.amps[0b0010].norm() - 1.0).abs() < 1e-12);
        assert!(s.amps[0b0001].norm() < 1e-12);
    }

    #[test]
    fn givens_preserves_norm_and_inverts() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for _ in 0..10 {
            let phi: f64 = rng.gen_range(-3.0..3.0);
            let s0 = random_state(3, rng.gen());
            let mut s = s0.clone();
            apply_givens_pair(&mut s, 1, phi).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
            apply_givens_pair(&mut s, 1, -phi).unwrap();
            let mut dev: f64 = 0.0;
            for (a, b) in s.amps.iter().zip(&s0.amps) {
                dev = dev.max((a - b).norm());
            }
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn network_of_identity_is_empty() {
        let net = GivensNetwork::compile(&ndarray::Array2::eye(4)).unwrap();
        assert!(net.rotations().is_empty());
        assert!(!net.flips_last());
    }

    #[test]
    fn network_single_pair_matches_angle() {
        let theta = 0.3f64;
        let (c, s) = (theta.cos(), theta.sin());
        let u = array![[c, -s], [s, c]];
        let net = GivensNetwork::compile(&u).unwrap();
        assert_eq!(net.rotations().len(), 1);
        let (p, phi) = net.rotations()[0];
        assert_eq!(p, 0);
        assert!((phi - theta).abs() < 1e-12);
        assert!(!net.flips_last());
    }

    #[test]
    fn network_handles_negative_determinant() {
        let u = array![[1.0, 0.0], [0.0, -1.0]];
        let net = GivensNetwork::compile(&u).unwrap();
        assert!(net.flips_last());
        // G' a_1' G = -a_1': a single beta/alpha electron in orbital 1 picks
        // up a sign, orbital 0 does not.
        let mut s1 = State::basis_state(2, 0b0010);
        net.apply(&mut s1).unwrap();
        assert!((s1.amps[0b0010] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let mut s0 = State::basis_state(2, 0b0001);
        net.apply(&mut s0).unwrap();
        assert!((s0.amps[0b0001] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn network_rejects_non_orthogonal() {
        let u = array![[1.0, 0.1], [0.0, 1.0]];
        assert!(GivensNetwork::compile(&u).is_err());
    }

    #[test]
    fn network_roundtrip_is_identity() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let u = crate::reference::random_orthogonal(4, &mut rng);
        let net = GivensNetwork::compile(&u).unwrap();
        assert!(net.rotations().len() <= 4 * 3 / 2);
        let s0 = random_state(4, 17);
        let mut s = s0.clone();
        net.apply(&mut s).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-10);
        net.apply_inverse(&mut s).unwrap();
        let mut dev: f64 = 0.0;
        for (a, b) in s.amps.iter().zip(&s0.amps) {
            dev = dev.max((a - b).norm());
        }
        assert!(dev < 1e-10, "roundtrip deviation {dev:e}");
    }

    #[test]
    fn diagonal_evolution_inverse_and_tau_zero() {
        let op = DiagonalOperator::two_body(vec![0.3, -0.7, 0.2], 1.3);
        let s0 = random_state(3, 23);
        let mut s = s0.clone();
        evolve_diagonal(&mut s, &op, 0.0);
        assert_eq!(s, s0);
        evolve_diagonal(&mut s, &op, 0.9);
        evolve_diagonal(&mut s, &op, -0.9);
        let mut dev: f64 = 0.0;
        for (a, b) in s.amps.iter().zip(&s0.amps) {
            dev = dev.max((a - b).norm());
        }
        assert!(dev < 1e-12);
    }

    #[test]
    fn one_body_phase_single_bitstring() {
        // 2 orbitals, f = (0.5, -0.25); alpha electron in orbital 0:
        // eigenvalue -1/2 [ f_0 (z_0 + z_0bar) + f_1 (z_1 + z_1bar) ]
        //           = -1/2 [ 0.5 * (  -1 + 1 ) + (-0.25) * ( 1 + 1 ) ] = 0.25
        let op = DiagonalOperator::one_body(vec![0.5, -0.25]);
        let idx = 0b0001;
        assert!((op.eigenvalue(idx) - 0.25).abs() < 1e-15);
        let mut s = State::basis_state(2, idx);
        let tau = 0.7;
        evolve_diagonal(&mut s, &op, tau);
        let expect = Complex64::from_polar(1.0, -tau * 0.25);
        assert!((s.amps[idx] - expect).norm() < 1e-14);
    }

    #[test]
    fn inner_products() {
        let s = random_state(3, 31);
        let e = inner(&s, &s).unwrap();
        assert!((e.re - 1.0).abs() < 1e-12 && e.im.abs() < 1e-14);
        let a = State::basis_state(2, 1);
        let b = State::basis_state(2, 2);
        assert_eq!(inner(&a, &b).unwrap(), Complex64::new(0.0, 0.0));
        // Cauchy-Schwarz on random unit pairs.
        for seed in 0..5 {
            let x = random_state(2, 100 + seed);
            let y = random_state(2, 200 + seed);
            assert!(inner(&x, &y).unwrap().norm() <= 1.0 + 1e-12);
        }
        assert!(inner(&a, &random_state(3, 1)).is_err());
    }

    #[test]
    fn sector_enumeration_counts() {
        let idx = sector_indices(4, 2, 2);
        assert_eq!(idx.len(), 36); // C(4,2)^2
        let s = State::reference(4, 2, 2).unwrap();
        assert_eq!(s.leakage_outside_sector(2, 2), 0.0);
    }
}
