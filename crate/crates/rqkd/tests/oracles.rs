//! Cross-module oracle tests: the statevector engine and the XDF operator
//! assembly are checked against dense brute-force constructions that share no
//! code path with them.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use rqkd::ingest::{assemble_active, parse_fcidump, ActiveHamiltonian};
use rqkd::reference;
use rqkd::statevector::{
    apply_term_evolution, apply_xdf_hamiltonian, inner, sector_indices, CompiledXdf,
    GivensNetwork, State, TermId,
};
use rqkd::xdf::assemble_xdf;

fn load(path: &str) -> ActiveHamiltonian {
    let text = std::fs::read_to_string(path).unwrap();
    assemble_active(&parse_fcidump(&text).unwrap())
}

fn h2() -> ActiveHamiltonian {
    load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/h2.fcidump"))
}

fn h4() -> ActiveHamiltonian {
    load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/h4.fcidump"))
}

fn rand3() -> ActiveHamiltonian {
    load(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/rand3.fcidump"))
}

fn max_dev(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let mut dev: f64 = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        dev = dev.max((x - y).abs());
    }
    dev
}

fn random_sector_state(n_orb: usize, n_alpha: usize, n_beta: usize, seed: u64) -> State {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut s = State::zeros(n_orb);
    for idx in sector_indices(n_orb, n_alpha, n_beta) {
        s.amplitudes_mut()[idx] =
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let n = s.norm();
    s.scale(Complex64::new(1.0 / n, 0.0));
    s
}

fn state_dev(a: &State, b: &State) -> f64 {
    let mut dev: f64 = 0.0;
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        dev = dev.max((x - y).norm());
    }
    dev
}

/// Dense XDF Hamiltonian equals the dense spin-free Hamiltonian elementwise
/// at sigma_DF = 0 — the end-to-end validity check of the factorized form.
#[test]
fn xdf_dense_equals_spin_free_dense_without_truncation() {
    for (name, act) in [("h2", h2()), ("rand3", rand3()), ("h4", h4())] {
        let xdf = assemble_xdf(&act, 0.0).unwrap();
        let direct = reference::build_dense(&act).unwrap();
        let viaxdf = reference::build_dense_xdf(&xdf).unwrap();
        let dev = max_dev(&direct.matrix, &viaxdf.matrix);
        assert!(dev < 1e-8, "{name}: dense XDF deviates by {dev:e}");
    }
}

/// The compiled Givens network reproduces the dense minor-determinant
/// rotation on random sector states, for random orthogonal matrices of both
/// determinant signs.
#[test]
fn givens_network_matches_dense_rotation() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for n_orb in [2usize, 3, 4] {
        for flip in [false, true] {
            let mut u = reference::random_orthogonal(n_orb, &mut rng);
            let det_sign = {
                // Determinant sign via the network-free route: LU through
                // ndarray is overkill; use the minor formula on the full set.
                let full: Vec<Vec<f64>> = (0..n_orb)
                    .map(|i| (0..n_orb).map(|j| u[[i, j]]).collect())
                    .collect();
                small_det_sign(full)
            };
            if flip == (det_sign > 0.0) {
                // Force the requested determinant sign by negating a column.
                for i in 0..n_orb {
                    u[[i, 0]] = -u[[i, 0]];
                }
            }
            let net = GivensNetwork::compile(&u).unwrap();
            assert!(net.rotations().len() <= n_orb * (n_orb - 1) / 2);

            let (na, nb) = (1.max(n_orb / 2), 1.max(n_orb - n_orb / 2 - 1));
            let dense_rot = reference::rotation_sector_matrix(&u, n_orb, na, nb);
            let basis = sector_indices(n_orb, na, nb);

            for seed in 0..3 {
                let s0 = random_sector_state(n_orb, na, nb, 50 + seed);
                let mut via_net = s0.clone();
                net.apply(&mut via_net).unwrap();

                // Dense route on the sector coefficients.
                let coeffs: Vec<Complex64> =
                    basis.iter().map(|&i| s0.amplitudes()[i]).collect();
                let mut dense_out = State::zeros(n_orb);
                for (ri, &bi) in basis.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (ci, &c) in coeffs.iter().enumerate() {
                        acc += c * dense_rot[[ri, ci]];
                    }
                    dense_out.amplitudes_mut()[bi] = acc;
                }
                let dev = state_dev(&via_net, &dense_out);
                assert!(
                    dev < 1e-9,
                    "n_orb={n_orb} flip={flip} seed={seed}: network vs dense {dev:e}"
                );
            }
        }
    }
}

fn small_det_sign(mut m: Vec<Vec<f64>>) -> f64 {
    let k = m.len();
    let mut det = 1.0f64;
    for col in 0..k {
        let mut piv = col;
        for row in col + 1..k {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
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
    det.signum()
}

/// Term evolution equals the dense matrix exponential of that term.
#[test]
fn term_evolution_matches_dense_exponential() {
    let act = rand3();
    let xdf = assemble_xdf(&act, 0.0).unwrap();
    let compiled = CompiledXdf::compile(&xdf).unwrap();
    let dense_terms = dense_term_matrices(&xdf);
    let basis = sector_indices(act.n_orb, act.n_alpha, act.n_beta);

    for (term_idx, dense_term) in dense_terms.iter().enumerate() {
        let id = if term_idx == 0 {
            TermId::OneBody
        } else {
            TermId::TwoBody(term_idx - 1)
        };
        for tau in [0.1, 1.0] {
            let s0 = random_sector_state(act.n_orb, act.n_alpha, act.n_beta, 7 + term_idx as u64);
            let mut via_engine = s0.clone();
            apply_term_evolution(&mut via_engine, &compiled, id, tau).unwrap();

            // expm via eigendecomposition of the dense symmetric term.
            let (evals, evecs) = eigh(dense_term);
            let coeffs: Vec<Complex64> = basis.iter().map(|&i| s0.amplitudes()[i]).collect();
            let dim = basis.len();
            let mut modal = vec![Complex64::new(0.0, 0.0); dim];
            for k in 0..dim {
                for (i, &c) in coeffs.iter().enumerate() {
                    modal[k] += c * evecs[[i, k]];
                }
            }
            for (k, c) in modal.iter_mut().enumerate() {
                *c *= Complex64::from_polar(1.0, -evals[k] * tau);
            }
            let mut dense_out = State::zeros(act.n_orb);
            for (i, &bi) in basis.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += modal[k] * evecs[[i, k]];
                }
                dense_out.amplitudes_mut()[bi] = acc;
            }
            let dev = state_dev(&via_engine, &dense_out);
            assert!(dev < 1e-9, "term {term_idx} tau={tau}: {dev:e}");
        }
    }

    // Same-generator additivity.
    let s0 = random_sector_state(act.n_orb, act.n_alpha, act.n_beta, 99);
    let mut one = s0.clone();
    apply_term_evolution(&mut one, &compiled, TermId::TwoBody(0), 0.4).unwrap();
    apply_term_evolution(&mut one, &compiled, TermId::TwoBody(0), 0.35).unwrap();
    let mut two = s0;
    apply_term_evolution(&mut two, &compiled, TermId::TwoBody(0), 0.75).unwrap();
    assert!(state_dev(&one, &two) < 1e-12);
}

/// Dense sector matrices of the individual XDF terms (no scalar).
fn dense_term_matrices(x: &rqkd::xdf::XdfHamiltonian) -> Vec<Array2<f64>> {
    let full = reference::build_dense_xdf(x).unwrap();
    let dim = full.dim();
    let mut out = Vec::new();
    // Rebuild per-term by subtracting: easier to just reconstruct each term
    // through a single-term XDF Hamiltonian with zero scalar.
    let mut base = x.clone();
    base.factors.clear();
    base.e0 = 0.0;
    out.push(reference::build_dense_xdf(&base).unwrap().matrix);
    // Zero out the one-body part for the two-body terms.
    let mut two_only = x.clone();
    two_only.e0 = 0.0;
    for f in two_only.one_body.f.iter_mut() {
        *f = 0.0;
    }
    for t in 0..x.factors.len() {
        let mut single = two_only.clone();
        single.factors = vec![x.factors[t].clone()];
        out.push(reference::build_dense_xdf(&single).unwrap().matrix);
    }
    let _ = (full, dim);
    out
}

fn eigh(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let sym = 0.5 * (a + &a.t());
    let (e, v) = ndarray_linalg::Eigh::eigh(&sym, ndarray_linalg::UPLO::Lower).unwrap();
    (e.to_vec(), v)
}

/// <HF|H_XDF|HF> equals the restricted Hartree-Fock energy computed straight
/// from the integrals, and <psi|H|psi> matches the dense quadratic form.
#[test]
fn xdf_expectations_match_dense_and_hf() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/h2.fcidump"
    ))
    .unwrap();
    let ints = parse_fcidump(&text).unwrap();
    let act = assemble_active(&ints);
    let xdf = assemble_xdf(&act, 1e-8).unwrap();
    let compiled = CompiledXdf::compile(&xdf).unwrap();

    let hf = State::reference(act.n_orb, act.n_alpha, act.n_beta).unwrap();
    let h_hf = apply_xdf_hamiltonian(&hf, &compiled).unwrap();
    let e = inner(&hf, &h_hf).unwrap();
    let e_hf = reference::hartree_fock_energy(&ints).unwrap();
    assert!(
        (e.re - e_hf).abs() < 1e-8 && e.im.abs() < 1e-10,
        "<HF|H|HF> = {e}, RHF formula = {e_hf}"
    );

    // Quadratic form against the dense spin-free matrix on random states.
    let dense = reference::build_dense(&act).unwrap();
    let basis = &dense.basis;
    for seed in 0..4 {
        let psi = random_sector_state(act.n_orb, act.n_alpha, act.n_beta, 300 + seed);
        let h_psi = apply_xdf_hamiltonian(&psi, &compiled).unwrap();
        let via_engine = inner(&psi, &h_psi).unwrap();
        let coeffs: Vec<Complex64> = basis.iter().map(|&i| psi.amplitudes()[i]).collect();
        let mut via_dense = Complex64::new(0.0, 0.0);
        for (i, ci) in coeffs.iter().enumerate() {
            for (j, cj) in coeffs.iter().enumerate() {
                via_dense += ci.conj() * cj * dense.matrix[[i, j]];
            }
        }
        assert!(
            (via_engine - via_dense).norm() < 1e-9,
            "seed {seed}: engine {via_engine} vs dense {via_dense}"
        );
    }

    // Hermiticity through inner products.
    let a = random_sector_state(act.n_orb, act.n_alpha, act.n_beta, 41);
    let b = random_sector_state(act.n_orb, act.n_alpha, act.n_beta, 42);
    let hb = apply_xdf_hamiltonian(&b, &compiled).unwrap();
    let ha = apply_xdf_hamiltonian(&a, &compiled).unwrap();
    let lhs = inner(&a, &hb).unwrap();
    let rhs = inner(&b, &ha).unwrap().conj();
    assert!((lhs - rhs).norm() < 1e-10);
}

/// Unitary primitives never leak out of the particle-number sector.
#[test]
fn primitives_preserve_sector() {
    let act = h4();
    let xdf = assemble_xdf(&act, 1e-8).unwrap();
    let compiled = CompiledXdf::compile(&xdf).unwrap();
    let mut s = State::reference(act.n_orb, act.n_alpha, act.n_beta).unwrap();
    for t in 0..compiled.n_terms().min(4) {
        let id = if t == 0 {
            TermId::OneBody
        } else {
            TermId::TwoBody(t - 1)
        };
        apply_term_evolution(&mut s, &compiled, id, 0.37).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-10);
        assert!(s.leakage_outside_sector(act.n_alpha, act.n_beta) < 1e-24);
    }
}
