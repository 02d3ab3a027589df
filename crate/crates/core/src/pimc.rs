//! Path-integral Monte Carlo annealer for QUBO problems.
//!
//! The QUBO is rewritten as an Ising problem; the transverse-field quantum
//! Hamiltonian J·H_problem + Γ Σ σ^x is Trotterized into P classical slices
//! coupled ferromagnetically along imaginary time with strength
//! J_⊥ = −(PT/2) ln tanh(Γ/(PT)).  Equilibration uses Swendsen–Wang clusters
//! formed only along each site's imaginary-time ring, with Metropolis
//! acceptance on the slice-local problem-energy change.
//!
//! Conventions: the effective (d+1)-dimensional Hamiltonian is
//! H_{d+1} = j_scale Σ_m E_problem(s^m) − J_⊥ Σ_{m,i} s_i^m s_i^{m+1},
//! sampled at β_eff = 1/(PT).  The per-slice Boltzmann weight
//! exp(−β_eff j_scale E_problem) then matches the Trotter matrix elements
//! exp(−(β/P) U) with β = j_scale/T, slice by slice, without any extra 1/P
//! on the problem term.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::jacobi_eigenvalues;
use crate::qubo::QuboProblem;
use crate::rng::stream_rng;

/// Finite stand-in for the Γ = 0 locked-slices limit, large enough that a
/// single broken time-bond is suppressed by e^(−2 β_eff · 10^7) ≈ 0 at any
/// temperature of practical interest.
const J_PERP_CAP: f64 = 1e7;

/// Ising form of a QUBO under s = 2x − 1: energy = offset + Σ h_i s_i +
/// Σ_{i>j} K_ij s_i s_j, exactly equal to the QUBO energy of the mapped bits.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingForm {
    n: usize,
    fields: Vec<f64>,
    /// Packed strict lower triangle: K_ij at i(i−1)/2 + j for i > j.
    couplings: Vec<f64>,
    offset: f64,
}

#[inline]
fn stri(i: usize, j: usize) -> usize {
    debug_assert!(i > j);
    i * (i - 1) / 2 + j
}

impl IsingForm {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i != j);
        let (i, j) = (i.max(j), i.min(j));
        self.couplings[stri(i, j)]
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: spins.len() });
        }
        Ok(self.energy_unchecked(spins))
    }

    pub(crate) fn energy_unchecked(&self, spins: &[i8]) -> f64 {
        let mut e = self.offset;
        for i in 0..self.n {
            let si = spins[i] as f64;
            let mut acc = self.fields[i];
            for j in 0..i {
                acc += self.couplings[stri(i, j)] * spins[j] as f64;
            }
            e += si * acc;
        }
        e
    }

    /// h_i + Σ_{j≠i} K_ij s_j: the classical field acting on spin i.
    #[inline]
    fn local_field(&self, spins: &[i8], i: usize) -> f64 {
        let mut f = self.fields[i];
        for j in 0..i {
            f += self.couplings[stri(i, j)] * spins[j] as f64;
        }
        for j in (i + 1)..self.n {
            f += self.couplings[stri(j, i)] * spins[j] as f64;
        }
        f
    }
}

/// Exact change of variables x = (1 + s)/2.
pub fn qubo_to_ising(problem: &QuboProblem) -> IsingForm {
    let n = problem.n();
    let mut fields = vec![0.0; n];
    let mut couplings = if n < 2 { Vec::new() } else { vec![0.0; n * (n - 1) / 2] };
    let mut offset = problem.offset();
    for (i, j, jij) in problem.terms() {
        if jij == 0.0 {
            continue;
        }
        if i == j {
            offset += jij / 2.0;
            fields[i] += jij / 2.0;
        } else {
            offset += jij / 4.0;
            fields[i] += jij / 4.0;
            fields[j] += jij / 4.0;
            couplings[stri(i, j)] += jij / 4.0;
        }
    }
    IsingForm { n, fields, couplings, offset }
}

pub fn spins_to_bits(spins: &[i8]) -> Vec<bool> {
    spins.iter().map(|&s| s > 0).collect()
}

pub fn bits_to_spins(bits: &[bool]) -> Vec<i8> {
    bits.iter().map(|&b| if b { 1 } else { -1 }).collect()
}

/// Trotter couplings: J_⊥ = −(PT/2) ln tanh(Γ/(PT)) (ferromagnetic, ≥ 0;
/// the paper's printed sign is corrected here) and C² = (1/2) sinh(2Γ/(PT)).
/// Γ = 0 returns the +∞ sentinel: slices locked.
pub fn trotter_couplings(gamma: f64, p: usize, t: f64) -> Result<(f64, f64)> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok((f64::INFINITY, 0.0));
    }
    let pt = p as f64 * t;
    let x = gamma / pt;
    let j_perp = -(pt / 2.0) * x.tanh().ln();
    let c_norm = (0.5 * (2.0 * x).sinh()).sqrt();
    Ok((j_perp, c_norm))
}

/// N × P spin lattice, slice-major (spin (m, i) at m·n + i), periodic in m.
#[derive(Debug, Clone, PartialEq)]
pub struct PimcState {
    n: usize,
    p: usize,
    spins: Vec<i8>,
}

impl PimcState {
    pub fn new(n: usize, p: usize, spins: Vec<i8>) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
        }
        if spins.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, got: spins.len() });
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("spins must be ±1".into()));
        }
        Ok(PimcState { n, p, spins })
    }

    pub fn random(n: usize, p: usize, rng: &mut impl Rng) -> Result<Self> {
        let spins = (0..n * p).map(|_| if rng.gen_bool(0.5) { 1i8 } else { -1i8 }).collect();
        PimcState::new(n, p, spins)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn spin(&self, m: usize, i: usize) -> i8 {
        self.spins[m * self.n + i]
    }

    pub fn slice(&self, m: usize) -> &[i8] {
        &self.spins[m * self.n..(m + 1) * self.n]
    }

    /// Σ_{m,i} s_i^m s_i^{m+1} over the periodic time direction.
    pub fn time_alignment(&self) -> i64 {
        let mut a = 0i64;
        for m in 0..self.p {
            let next = (m + 1) % self.p;
            for i in 0..self.n {
                a += (self.spin(m, i) * self.spin(next, i)) as i64;
            }
        }
        a
    }
}

/// The (d+1)-dimensional classical Hamiltonian
/// H = j_scale Σ_m E_problem(s^m) − J_⊥ Σ_{m,i} s_i^m s_i^{m+1}.
/// At Γ = 0 the time term is the locked-slices sentinel: 0 if every ring is
/// aligned, +∞ otherwise.
pub fn effective_energy(
    state: &PimcState,
    ising: &IsingForm,
    gamma: f64,
    j_scale: f64,
    p: usize,
    t: f64,
) -> Result<f64> {
    if state.n() != ising.n() {
        return Err(Error::DimensionMismatch { expected: ising.n(), got: state.n() });
    }
    if state.p() != p {
        return Err(Error::DimensionMismatch { expected: p, got: state.p() });
    }
    let (j_perp, _) = trotter_couplings(gamma, p, t)?;
    let problem_sum: f64 = (0..p).map(|m| ising.energy_unchecked(state.slice(m))).sum();
    let alignment = state.time_alignment();
    if j_perp.is_infinite() {
        if alignment == (state.n() * p) as i64 {
            return Ok(j_scale * problem_sum);
        }
        return Ok(f64::INFINITY);
    }
    Ok(j_scale * problem_sum - j_perp * alignment as f64)
}

/// One Swendsen–Wang sweep along imaginary time: for each site, activate
/// bonds between aligned neighboring slices with probability
/// 1 − exp(−2 β_eff J_⊥), then flip each resulting cluster with Metropolis
/// acceptance on the slice-local problem-energy change.
pub fn time_cluster_sweep(
    state: &mut PimcState,
    j_perp: f64,
    beta_eff: f64,
    ising: &IsingForm,
    j_scale: f64,
    rng: &mut impl Rng,
) -> Result<()> {
    if !(beta_eff.is_finite() && beta_eff > 0.0) {
        return Err(Error::InvalidParameter(format!("beta_eff must be > 0, got {beta_eff}")));
    }
    if !(j_perp >= 0.0) {
        return Err(Error::InvalidParameter(format!("j_perp must be >= 0, got {j_perp}")));
    }
    if state.n() != ising.n() {
        return Err(Error::DimensionMismatch { expected: ising.n(), got: state.n() });
    }
    let n = state.n();
    let p = state.p();
    let p_bond = if j_perp.is_infinite() {
        1.0
    } else {
        1.0 - (-2.0 * beta_eff * j_perp).exp()
    };
    let mut bond = vec![false; p];
    let mut cluster_starts: Vec<usize> = Vec::with_capacity(p);
    for i in 0..n {
        // bonds along the ring: bond[m] joins slices m and m+1 (mod p)
        for m in 0..p {
            let next = (m + 1) % p;
            bond[m] = state.spin(m, i) == state.spin(next, i) && rng.gen::<f64>() < p_bond;
        }
        // clusters are maximal runs of bonded slices
        cluster_starts.clear();
        if bond.iter().all(|&b| b) {
            cluster_starts.push(0); // whole ring is one cluster
        } else {
            for m in 0..p {
                let prev = (m + p - 1) % p;
                if !bond[prev] {
                    cluster_starts.push(m);
                }
            }
        }
        let whole_ring = cluster_starts.len() == 1 && bond.iter().all(|&b| b);
        for &start in &cluster_starts {
            // collect the cluster: slices start, start+1, ... while bonded
            let mut members: Vec<usize> = vec![start];
            if whole_ring {
                members = (0..p).collect();
            } else {
                let mut m = start;
                while bond[m] {
                    m = (m + 1) % p;
                    members.push(m);
                }
            }
            // problem-energy change from flipping spin i in every member slice
            let mut delta = 0.0;
            for &m in &members {
                let s = state.spin(m, i) as f64;
                delta += -2.0 * s * ising.local_field(state.slice(m), i);
            }
            let accept =
                delta <= 0.0 || rng.gen::<f64>() < (-beta_eff * j_scale * delta).exp();
            if accept {
                for &m in &members {
                    state.spins[m * n + i] = -state.spin(m, i);
                }
            }
        }
    }
    Ok(())
}

/// PIMC annealing configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PimcConfig {
    pub p_slices: usize,
    pub steps: usize,
    pub gamma_start: f64,
    pub gamma_end: f64,
    pub j_start: f64,
    pub j_end: f64,
    pub r0: usize,
    pub temperature: f64,
    pub sweeps_per_step: usize,
}

impl PimcConfig {
    /// §6.4 schedules: Γ from 1 to 0 and J from 10 to 10^8 over 2048 steps.
    pub fn paper_default() -> Self {
        PimcConfig {
            p_slices: 32,
            steps: 2048,
            gamma_start: 1.0,
            gamma_end: 0.0,
            j_start: 10.0,
            j_end: 1e8,
            r0: 1024,
            temperature: 1.0,
            sweeps_per_step: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_slices < 2 {
            return Err(Error::InvalidParameter("p_slices must be >= 2".into()));
        }
        if self.steps < 1 {
            return Err(Error::InvalidParameter("steps must be >= 1".into()));
        }
        if !(self.gamma_start > 0.0 && self.gamma_start.is_finite()) {
            return Err(Error::InvalidParameter("gamma_start must be > 0".into()));
        }
        if !(self.gamma_end >= 0.0 && self.gamma_end.is_finite()) {
            return Err(Error::InvalidParameter("gamma_end must be >= 0".into()));
        }
        if !(self.j_start > 0.0 && self.j_end > 0.0) {
            return Err(Error::InvalidParameter("coupling scale endpoints must be > 0".into()));
        }
        if self.r0 < 1 {
            return Err(Error::InvalidParameter("r0 must be >= 1".into()));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::InvalidParameter("temperature must be > 0".into()));
        }
        if self.sweeps_per_step < 1 {
            return Err(Error::InvalidParameter("sweeps_per_step must be >= 1".into()));
        }
        Ok(())
    }

    /// Γ_i schedule: geometric descent, with Γ_end = 0 handled as a terminal
    /// override on a geometric descent to Γ_start · 10^-6.
    fn gamma_at(&self, i: usize) -> f64 {
        let l = self.steps;
        if i >= l {
            return self.gamma_end;
        }
        let end = if self.gamma_end > 0.0 { self.gamma_end } else { self.gamma_start * 1e-6 };
        self.gamma_start * (end / self.gamma_start).powf(i as f64 / l as f64)
    }

    fn j_at(&self, i: usize) -> f64 {
        let l = self.steps;
        self.j_start * (self.j_end / self.j_start).powf(i as f64 / l as f64)
    }
}

/// Per-step PIMC diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PimcStepDiagnostics {
    pub step: usize,
    pub gamma: f64,
    pub j_scale: f64,
    pub best_energy: f64,
    /// Mean of s_i^m s_i^{m+1} over all sites, slices and replicas (1 when
    /// the slices are fully locked).
    pub mean_alignment: f64,
}

#[derive(Debug, Clone)]
pub struct PimcResult {
    pub best_bits: Vec<bool>,
    pub best_energy: f64,
    pub diagnostics: Vec<PimcStepDiagnostics>,
}

/// PIMC annealing with population-annealing structure: a replica population
/// of N×P lattices is reweighted between schedule steps and equilibrated with
/// time-cluster sweeps; every slice of every replica is a candidate solution.
pub fn pimc_anneal(problem: &QuboProblem, config: &PimcConfig, rng_seed: u64) -> Result<PimcResult> {
    config.validate()?;
    let ising = qubo_to_ising(problem);
    let n = problem.n();
    let p = config.p_slices;
    let t = config.temperature;
    let beta_eff = 1.0 / (p as f64 * t);

    let mut states: Vec<PimcState> = Vec::with_capacity(config.r0);
    for k in 0..config.r0 {
        let mut rng = stream_rng(rng_seed, 0, k as u64);
        states.push(PimcState::random(n, p, &mut rng)?);
    }

    let mut best_bits = spins_to_bits(states[0].slice(0));
    let mut best_energy = f64::INFINITY;
    let mut diagnostics = Vec::with_capacity(config.steps + 1);

    let mut prev_gamma = config.gamma_at(0);
    let mut prev_j = config.j_at(0);
    for i in 0..=config.steps {
        let gamma = config.gamma_at(i);
        let j_scale = config.j_at(i);
        if i > 0 && (gamma != prev_gamma || j_scale != prev_j) {
            // reweight for the Hamiltonian change, in log space for stability
            let (jp_prev, _) = trotter_couplings(prev_gamma, p, t)?;
            let (jp_next, _) = trotter_couplings(gamma, p, t)?;
            let djp = jp_next.min(J_PERP_CAP) - jp_prev.min(J_PERP_CAP);
            let dj = j_scale - prev_j;
            let mut logw: Vec<f64> = states
                .iter()
                .map(|st| {
                    let u: f64 = (0..p).map(|m| ising.energy_unchecked(st.slice(m))).sum();
                    let a = st.time_alignment() as f64;
                    -beta_eff * (dj * u - djp * a)
                })
                .collect();
            let max_lw = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for lw in logw.iter_mut() {
                *lw = (*lw - max_lw).exp();
            }
            let total: f64 = logw.iter().sum();
            let target = config.r0;
            let mut rng = stream_rng(rng_seed, 1, i as u64);
            let mut new_states: Vec<PimcState> = Vec::with_capacity(target);
            let mut cum = 0.0;
            let mut next = rng.gen::<f64>();
            for (k, &w) in logw.iter().enumerate() {
                cum += target as f64 * w / total;
                while next < cum && new_states.len() < target {
                    new_states.push(states[k].clone());
                    next += 1.0;
                }
            }
            while new_states.len() < target {
                new_states.push(states[states.len() - 1].clone());
            }
            states = new_states;
        }
        prev_gamma = gamma;
        prev_j = j_scale;

        let (j_perp, _) = trotter_couplings(gamma, p, t)?;
        let mut alignment_sum = 0i64;
        for (k, st) in states.iter_mut().enumerate() {
            let mut rng = stream_rng(rng_seed, 2 + i as u64, k as u64);
            for _ in 0..config.sweeps_per_step {
                time_cluster_sweep(st, j_perp, beta_eff, &ising, j_scale, &mut rng)?;
            }
            for m in 0..p {
                let e = ising.energy_unchecked(st.slice(m));
                if e < best_energy {
                    best_energy = e;
                    best_bits = spins_to_bits(st.slice(m));
                }
            }
            alignment_sum += st.time_alignment();
        }
        diagnostics.push(PimcStepDiagnostics {
            step: i,
            gamma,
            j_scale,
            best_energy,
            mean_alignment: alignment_sum as f64 / (states.len() * n * p) as f64,
        });
    }
    best_energy = problem.energy_unchecked(&best_bits);
    Ok(PimcResult { best_bits, best_energy, diagnostics })
}

/// Z = Tr exp(−β (H_problem + Γ Σ σ^x)) by dense diagonalization; n ≤ 10.
pub fn exact_quantum_partition(ising: &IsingForm, gamma: f64, beta: f64) -> Result<f64> {
    if ising.n() > 10 {
        return Err(Error::CapacityExceeded { limit: 10, got: ising.n() });
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
    }
    let n = ising.n();
    let dim = 1usize << n;
    let mut h = vec![0.0; dim * dim];
    let mut spins = vec![0i8; n];
    for x in 0..dim {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if (x >> i) & 1 == 1 { 1 } else { -1 };
        }
        h[x * dim + x] = ising.energy_unchecked(&spins);
        for i in 0..n {
            let y = x ^ (1 << i);
            h[x * dim + y] = gamma;
        }
    }
    let eigenvalues = jacobi_eigenvalues(h, dim);
    Ok(eigenvalues.iter().map(|&l| (-beta * l).exp()).sum())
}

/// Discretized single-spin partition function Z_P = Tr[(M_K M_U)^P] with
/// M_K the e^(−βΓσ^x/P) transfer matrix (normalization included) and
/// M_U = diag(e^(∓βh/P)); the Appendix A oracle for Trotter convergence.
pub fn single_spin_trotter_partition(h: f64, gamma: f64, beta: f64, p: usize) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
    }
    let a = beta * gamma / p as f64;
    let u = beta * h / p as f64;
    // M_K M_U with index 0 ↔ s = +1
    let m = [
        a.cosh() * (-u).exp(),
        a.sinh() * u.exp(),
        a.sinh() * (-u).exp(),
        a.cosh() * u.exp(),
    ];
    let mut acc = [1.0, 0.0, 0.0, 1.0];
    for _ in 0..p {
        acc = [
            acc[0] * m[0] + acc[1] * m[2],
            acc[0] * m[1] + acc[1] * m[3],
            acc[2] * m[0] + acc[3] * m[2],
            acc[2] * m[1] + acc[3] * m[3],
        ];
    }
    Ok(acc[0] + acc[3])
}
