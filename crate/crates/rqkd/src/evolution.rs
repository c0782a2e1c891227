//! Time-evolution protocols over the XDF term decomposition.
//!
//! Deterministic product formulas (first- and second-order Trotter-Suzuki)
//! and the stochastic channel `C(dt) = sum_s p_s V_s(dt)` with its sampled
//! trajectories, in the single-depth (`d1`) and interleaved triple-depth
//! (`d3`) forms:
//!
//! * d1: `V_s(dt) = G_s' exp(-i D_s dt / p_s) G_s`, the sampled set includes
//!   the one-body term;
//! * d3: `V_t(dt) = exp(-i H_o dt/2) exp(-i H_t dt / p_t) exp(-i H_o dt/2)`,
//!   sampled over two-body factors only, which removes the one-body norm
//!   from the second-order error.
//!
//! Probability weights come in four flavours: spectral-norm proportional
//! (`qdrift`), first-factorization eigenvalue magnitude (`eig`), the
//! analytically optimal `sqrt(<H_s^2>)` weights (`optimal`), and `uniform`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::{stream_rng, Domain};
use crate::statevector::{apply_term_evolution, CompiledXdf, State, TermId};
use crate::Result;

/// Protocol selector shared by the evolution and Krylov layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ansatz {
    /// Single-depth stochastic channel.
    D1,
    /// Interleaved triple-depth stochastic channel.
    D3,
    /// First-order Trotter-Suzuki.
    Ts1,
    /// Second-order (Strang) Trotter-Suzuki.
    Ts2,
    /// Exact propagation via the dense oracle.
    Exact,
}

impl Ansatz {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Ansatz::D1 | Ansatz::D3)
    }
}

impl std::fmt::Display for Ansatz {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Ansatz::D1 => "d1",
            Ansatz::D3 => "d3",
            Ansatz::Ts1 => "ts1",
            Ansatz::Ts2 => "ts2",
            Ansatz::Exact => "exact",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Ansatz {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(Ansatz::D1),
            "d3" => Ok(Ansatz::D3),
            "ts1" => Ok(Ansatz::Ts1),
            "ts2" => Ok(Ansatz::Ts2),
            "exact" => Ok(Ansatz::Exact),
            other => Err(Error::Config(format!("unknown ansatz '{other}'"))),
        }
    }
}

/// How the sampling probabilities are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Qdrift,
    Eig,
    Optimal,
    Uniform,
}

impl std::fmt::Display for WeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WeightMode::Qdrift => "qdrift",
            WeightMode::Eig => "eig",
            WeightMode::Optimal => "optimal",
            WeightMode::Uniform => "uniform",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for WeightMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qdrift" => Ok(WeightMode::Qdrift),
            "eig" => Ok(WeightMode::Eig),
            "optimal" | "opt" => Ok(WeightMode::Optimal),
            "uniform" => Ok(WeightMode::Uniform),
            other => Err(Error::Config(format!("unknown weight mode '{other}'"))),
        }
    }
}

/// Normalized sampling distribution over a term set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightSet {
    pub mode: WeightMode,
    /// Sampled terms (the one-body term is present only for d1).
    pub terms: Vec<TermId>,
    /// Probability per term; strictly positive, sums to 1.
    pub p: Vec<f64>,
    /// Sum of the underlying spectral norms when `mode == Qdrift`.
    pub lambda: Option<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl WeightSet {
    /// Normalize raw non-negative weights, dropping terms whose weight is
    /// negligible (they would otherwise be evolved for enormous rescaled
    /// times when sampled).
    pub fn from_raw(mode: WeightMode, terms: Vec<TermId>, raw: Vec<f64>) -> Result<WeightSet> {
        let max = raw.iter().cloned().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(Error::DegenerateWeights);
        }
        let keep: Vec<usize> = (0..raw.len()).filter(|&i| raw[i] > 1e-12 * max).collect();
        let total: f64 = keep.iter().map(|&i| raw[i]).sum();
        let terms: Vec<TermId> = keep.iter().map(|&i| terms[i]).collect();
        let p: Vec<f64> = keep.iter().map(|&i| raw[i] / total).collect();
        let mut ws = WeightSet {
            mode,
            terms,
            p,
            lambda: None,
            cumulative: Vec::new(),
        };
        ws.rebuild_cumulative();
        Ok(ws)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rebuild the cumulative table (needed after deserialization).
    pub fn rebuild_cumulative(&mut self) {
        self.cumulative.clear();
        let mut acc = 0.0;
        for &pi in &self.p {
            acc += pi;
            self.cumulative.push(acc);
        }
    }

    /// Draw one term index from the distribution by inverse-CDF search.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c < u)
            .min(self.p.len() - 1)
    }

    /// The functional `sum_s c_s (1/p_s - 1)` driving the second-order
    /// channel error, for externally supplied `c_s` in term order.
    pub fn error_functional(&self, c: &[f64]) -> f64 {
        self.p
            .iter()
            .zip(c)
            .map(|(&pi, &ci)| ci * (1.0 / pi - 1.0))
            .sum()
    }
}

/// Closed-form optimal weights `p_s = sqrt(c_s) / sum_s' sqrt(c_s')`.
pub fn optimal_weights_closed_form(c: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = c.iter().map(|x| x.sqrt()).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    Ok(c.iter().map(|x| x.sqrt() / total).collect())
}

/// `c_s = <phi0|H_s^2|phi0>` per term, via one term application each.
pub fn term_second_moments(xdf: &CompiledXdf, terms: &[TermId], phi0: &State) -> Result<Vec<f64>> {
    terms
        .iter()
        .map(|&id| {
            let mut work = phi0.clone();
            crate::statevector::apply_term_hamiltonian(&mut work, xdf, id)?;
            Ok(work.norm_sqr())
        })
        .collect()
}

/// The sampled term set: all terms for d1, two-body factors only for d3.
pub fn term_set(xdf: &CompiledXdf, include_one_body: bool) -> Vec<TermId> {
    let mut terms = Vec::new();
    if include_one_body {
        terms.push(TermId::OneBody);
    }
    for t in 0..xdf.n_terms() - 1 {
        terms.push(TermId::TwoBody(t));
    }
    terms
}

/// Compute the sampling distribution for a channel ansatz.
///
/// `phi0` is required for `optimal` weights. Spectral norms for `qdrift` are
/// exact diagonal extrema over the active particle-number sector.
pub fn compute_weights(
    xdf: &CompiledXdf,
    mode: WeightMode,
    ansatz: Ansatz,
    phi0: Option<&State>,
) -> Result<WeightSet> {
    let include_one_body = match ansatz {
        Ansatz::D1 => true,
        Ansatz::D3 => false,
        other => {
            return Err(Error::Config(format!(
                "weights are only defined for stochastic ansatze, got {other}"
            )))
        }
    };
    let terms = term_set(xdf, include_one_body);
    if terms.is_empty() {
        return Err(Error::DegenerateWeights);
    }
    let mut lambda = None;
    let raw: Vec<f64> = match mode {
        WeightMode::Uniform => vec![1.0; terms.len()],
        WeightMode::Eig => terms
            .iter()
            .map(|&id| match id {
                TermId::OneBody => xdf.lambda1,
                TermId::TwoBody(_) => {
                    let term = xdf.term(id).expect("term exists");
                    match &term.diag.kind {
                        crate::statevector::DiagonalKind::TwoBody { h_t, .. } => h_t.abs(),
                        _ => unreachable!("two-body term carries a two-body diagonal"),
                    }
                }
            })
            .collect(),
        WeightMode::Qdrift => {
            let sector = xdf.sector();
            let norms: Vec<f64> = terms
                .iter()
                .map(|&id| {
                    let term = xdf.term(id).expect("term exists");
                    term.diag.spectral_norm_over(&sector)
                })
                .collect();
            lambda = Some(norms.iter().sum());
            norms
        }
        WeightMode::Optimal => {
            let phi0 = phi0
                .ok_or_else(|| Error::Config("optimal weights need a reference state".into()))?;
            let c = term_second_moments(xdf, &terms, phi0)?;
            c.iter().map(|x| x.sqrt()).collect()
        }
    };
    let mut ws = WeightSet::from_raw(mode, terms, raw)?;
    ws.lambda = lambda;
    Ok(ws)
}

/// One first-order Trotter step: every term evolved once for `dt`, one-body
/// first, then the two-body factors in stored (descending |h_t|) order.
pub fn ts1_step(state: &mut State, xdf: &CompiledXdf, dt: f64) -> Result<()> {
    for term in &xdf.terms {
        apply_term_evolution(state, xdf, term.id, dt)?;
    }
    Ok(())
}

/// One Strang (second-order) step: forward half-steps, full step on the last
/// term, backward half-steps.
pub fn ts2_step(state: &mut State, xdf: &CompiledXdf, dt: f64) -> Result<()> {
    let n = xdf.terms.len();
    for term in &xdf.terms[..n - 1] {
        apply_term_evolution(state, xdf, term.id, 0.5 * dt)?;
    }
    apply_term_evolution(state, xdf, xdf.terms[n - 1].id, dt)?;
    for term in xdf.terms[..n - 1].iter().rev() {
        apply_term_evolution(state, xdf, term.id, 0.5 * dt)?;
    }
    Ok(())
}

/// Apply the sampled unitary `V_s(dt)` for the term at `index` in the weight
/// set (d1: single rescaled evolution; d3: one-body-sandwiched evolution).
pub fn apply_sampled_unitary(
    state: &mut State,
    xdf: &CompiledXdf,
    weights: &WeightSet,
    index: usize,
    dt: f64,
    ansatz: Ansatz,
) -> Result<()> {
    let id = weights.terms[index];
    let rescaled = dt / weights.p[index];
    match ansatz {
        Ansatz::D1 => apply_term_evolution(state, xdf, id, rescaled),
        Ansatz::D3 => {
            apply_term_evolution(state, xdf, TermId::OneBody, 0.5 * dt)?;
            apply_term_evolution(state, xdf, id, rescaled)?;
            apply_term_evolution(state, xdf, TermId::OneBody, 0.5 * dt)
        }
        other => Err(Error::Config(format!(
            "sampled unitaries are only defined for d1/d3, got {other}"
        ))),
    }
}

/// Deterministic channel application `C(dt)|psi> = sum_s p_s V_s(dt)|psi>`
/// (non-unitary; the result is intentionally not renormalized).
pub fn lcu_channel_step(
    state: &State,
    xdf: &CompiledXdf,
    weights: &WeightSet,
    dt: f64,
    ansatz: Ansatz,
) -> Result<State> {
    let mut pre = state.clone();
    match ansatz {
        Ansatz::D1 => {}
        Ansatz::D3 => {
            // The outer one-body half-steps are common to every summand.
            apply_term_evolution(&mut pre, xdf, TermId::OneBody, 0.5 * dt)?;
        }
        other => {
            return Err(Error::Config(format!(
                "channel step is only defined for d1/d3, got {other}"
            )))
        }
    }
    let mut out = State::zeros(state.n_orb());
    for (&id, &pi) in weights.terms.iter().zip(&weights.p) {
        let mut work = pre.clone();
        apply_term_evolution(&mut work, xdf, id, dt / pi)?;
        out.add_scaled(&work, num_complex::Complex64::new(pi, 0.0));
    }
    if ansatz == Ansatz::D3 {
        apply_term_evolution(&mut out, xdf, TermId::OneBody, 0.5 * dt)?;
    }
    Ok(out)
}

/// A sampled product-formula trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub r: usize,
    /// Indices into the weight set's term list, in application order.
    pub indices: Vec<usize>,
    pub master_seed: u64,
    pub id: u64,
}

/// Draw `r` i.i.d. term indices; deterministic in `(master_seed, id)`.
pub fn sample_trajectory(
    weights: &WeightSet,
    r: usize,
    master_seed: u64,
    id: u64,
) -> Result<Trajectory> {
    if r == 0 {
        return Err(Error::Precondition(
            "trajectory needs at least one step".into(),
        ));
    }
    let mut rng = stream_rng(master_seed, Domain::Trajectory, id);
    let indices = (0..r).map(|_| weights.sample(&mut rng)).collect();
    Ok(Trajectory {
        r,
        indices,
        master_seed,
        id,
    })
}

/// Apply a sampled trajectory: `V_{s_R}(dt) ... V_{s_1}(dt)` (unitary).
pub fn apply_trajectory(
    state: &mut State,
    xdf: &CompiledXdf,
    weights: &WeightSet,
    traj: &Trajectory,
    dt: f64,
    ansatz: Ansatz,
) -> Result<()> {
    for &index in &traj.indices {
        apply_sampled_unitary(state, xdf, weights, index, dt, ansatz)?;
    }
    Ok(())
}

/// First-order Trotter-Suzuki error bound `lambda^2 tau^2 / R`.
pub fn ts1_error_bound(lambda: f64, tau: f64, r: usize) -> f64 {
    lambda * lambda * tau * tau / r as f64
}

/// Single-depth channel bound `(lambda1 + lambda2)^2 tau^2 / (2R)`.
pub fn channel_error_bound_d1(lambda1: f64, lambda2: f64, tau: f64, r: usize) -> f64 {
    let l = lambda1 + lambda2;
    l * l * tau * tau / (2.0 * r as f64)
}

/// Triple-depth channel bound `lambda2^2 tau^2 / (2R)`.
pub fn channel_error_bound_d3(lambda2: f64, tau: f64, r: usize) -> f64 {
    lambda2 * lambda2 * tau * tau / (2.0 * r as f64)
}
