//! Population annealing over QUBO problems: Metropolis–Hastings equilibration
//! along a geometric inverse-temperature schedule, with systematic resampling
//! of replicas by relative Boltzmann weight at every cooling step.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::qubo::QuboProblem;
use crate::rng::stream_rng;

/// Geometric cooling schedule β_i = β_0 (β_ℓ/β_0)^(i/ℓ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub beta_0: f64,
    pub beta_l: f64,
    pub steps: usize,
}

impl Schedule {
    pub fn new(beta_0: f64, beta_l: f64, steps: usize) -> Result<Self> {
        if !(beta_0.is_finite() && beta_l.is_finite() && beta_0 > 0.0 && beta_l > beta_0) {
            return Err(Error::InvalidParameter(format!(
                "schedule requires 0 < beta_0 < beta_l, got ({beta_0}, {beta_l})"
            )));
        }
        if steps < 1 {
            return Err(Error::InvalidParameter("schedule needs >= 1 step".into()));
        }
        Ok(Schedule { beta_0, beta_l, steps })
    }

    /// Paper defaults for the classical sweeps: β from 10 to 10^10 over 2^14 steps.
    pub fn paper_default() -> Self {
        Schedule { beta_0: 10.0, beta_l: 1e10, steps: 1 << 14 }
    }

    /// Schedule used for the PIMC comparison: β_ℓ = 10^8, ℓ = 2048.
    pub fn pimc_comparison() -> Self {
        Schedule { beta_0: 10.0, beta_l: 1e8, steps: 2048 }
    }
}

/// The ℓ+1 inverse temperatures of the schedule, endpoints exact.
pub fn geometric_schedule(schedule: &Schedule) -> Vec<f64> {
    let l = schedule.steps;
    let ratio = schedule.beta_l / schedule.beta_0;
    let mut betas: Vec<f64> = (0..=l)
        .map(|i| schedule.beta_0 * ratio.powf(i as f64 / l as f64))
        .collect();
    betas[0] = schedule.beta_0;
    betas[l] = schedule.beta_l;
    betas
}

/// Annealer population: replica bitstrings with cached energies.
#[derive(Debug, Clone)]
pub struct Population {
    pub replicas: Vec<Vec<bool>>,
    pub energies: Vec<f64>,
    /// Cached local fields per replica (see `QuboProblem::local_fields`).
    pub fields: Vec<Vec<f64>>,
    pub target_size: usize,
}

impl Population {
    /// `r0` uniform-random replicas (infinite-temperature initialization).
    pub fn random(problem: &QuboProblem, r0: usize, rng: &mut impl Rng) -> Result<Self> {
        if r0 < 1 {
            return Err(Error::InvalidParameter("population size must be >= 1".into()));
        }
        let n = problem.n();
        let replicas: Vec<Vec<bool>> =
            (0..r0).map(|_| (0..n).map(|_| rng.gen_bool(0.5)).collect()).collect();
        let energies = replicas.iter().map(|b| problem.energy_unchecked(b)).collect();
        let fields = replicas.iter().map(|b| problem.local_fields(b).unwrap()).collect();
        Ok(Population { replicas, energies, fields, target_size: r0 })
    }

    pub fn size(&self) -> usize {
        self.replicas.len()
    }

    /// Number of distinct bitstrings in the population.
    pub fn unique_replicas(&self) -> usize {
        let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
        for bits in &self.replicas {
            let mut packed = vec![0u64; (bits.len() + 63) / 64];
            for (i, &b) in bits.iter().enumerate() {
                if b {
                    packed[i / 64] |= 1 << (i % 64);
                }
            }
            seen.insert(packed);
        }
        seen.len()
    }

    /// Recompute all cached energies and local fields from scratch.
    pub fn verify_energies(&mut self, problem: &QuboProblem) {
        for ((bits, e), f) in
            self.replicas.iter().zip(self.energies.iter_mut()).zip(self.fields.iter_mut())
        {
            let exact = problem.energy_unchecked(bits);
            debug_assert!((exact - *e).abs() <= 1e-7 * (1.0 + exact.abs()));
            *e = exact;
            *f = problem.local_fields(bits).unwrap();
        }
    }
}

/// One Metropolis sweep of a single replica: n single-bit proposals at
/// uniformly random sites (with replacement, so the chain stays ergodic even
/// on flat landscapes), accepted with probability min(1, e^(−βΔE)).  Cached
/// local fields make a proposal O(1); only accepted flips cost O(n).
pub fn metropolis_sweep_replica(
    bits: &mut [bool],
    energy: &mut f64,
    fields: &mut [f64],
    problem: &QuboProblem,
    beta: f64,
    rng: &mut impl Rng,
) {
    let n = problem.n();
    for _ in 0..n {
        let k = rng.gen_range(0..n);
        let de = if bits[k] { -fields[k] } else { fields[k] };
        let accept = de <= 0.0 || rng.gen::<f64>() < (-beta * de).exp();
        if accept {
            bits[k] = !bits[k];
            *energy += de;
            problem.shift_fields(fields, bits, k);
        }
    }
}

/// Sweep every replica once, sharing one RNG (for standalone use; the full
/// annealer drives per-replica streams for schedule-independence).
pub fn metropolis_sweep(
    population: &mut Population,
    problem: &QuboProblem,
    beta: f64,
    rng: &mut impl Rng,
) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
    }
    for ((bits, energy), fields) in population
        .replicas
        .iter_mut()
        .zip(population.energies.iter_mut())
        .zip(population.fields.iter_mut())
    {
        metropolis_sweep_replica(bits, energy, fields, problem, beta, rng);
    }
    Ok(())
}

/// Systematic resampling with weights w_k ∝ exp(−Δβ (E_k − E_min)); the
/// population size returns to exactly `target_size` and never empties.
pub fn resample(
    population: &mut Population,
    beta_prev: f64,
    beta_next: f64,
    rng: &mut impl Rng,
) -> Result<()> {
    if !(beta_next > beta_prev) {
        return Err(Error::InvalidParameter(format!(
            "resample requires beta_next > beta_prev, got {beta_prev} -> {beta_next}"
        )));
    }
    let d = beta_next - beta_prev;
    let target = population.target_size;
    let e_min = population.energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> =
        population.energies.iter().map(|&e| (-d * (e - e_min)).exp()).collect();
    let total: f64 = weights.iter().sum();

    let mut new_replicas = Vec::with_capacity(target);
    let mut new_energies = Vec::with_capacity(target);
    let mut new_fields = Vec::with_capacity(target);
    let mut cum = 0.0;
    let mut next = rng.gen::<f64>(); // single uniform offset in [0, 1)
    for (k, &w) in weights.iter().enumerate() {
        cum += target as f64 * w / total;
        while next < cum && new_replicas.len() < target {
            new_replicas.push(population.replicas[k].clone());
            new_energies.push(population.energies[k]);
            new_fields.push(population.fields[k].clone());
            next += 1.0;
        }
    }
    // guard against rounding at the top of the cumulative sum: fill with the
    // minimum-energy replica, which also covers total-underflow pathologies
    if new_replicas.len() < target {
        let k_min = population
            .energies
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(k, _)| k)
            .unwrap();
        while new_replicas.len() < target {
            new_replicas.push(population.replicas[k_min].clone());
            new_energies.push(population.energies[k_min]);
            new_fields.push(population.fields[k_min].clone());
        }
    }
    population.replicas = new_replicas;
    population.energies = new_energies;
    population.fields = new_fields;
    Ok(())
}

/// Per-step annealer diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub beta: f64,
    pub best_energy: f64,
    pub mean_energy: f64,
    pub population_size: usize,
    pub unique_replicas: usize,
}

/// Result of one annealing run.
#[derive(Debug, Clone)]
pub struct AnnealResult {
    pub best_bits: Vec<bool>,
    pub best_energy: f64,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Population annealing with the default energy re-verification interval.
pub fn population_anneal(
    problem: &QuboProblem,
    schedule: &Schedule,
    r0: usize,
    sweeps_per_step: usize,
    rng_seed: u64,
) -> Result<AnnealResult> {
    population_anneal_with_verify(problem, schedule, r0, sweeps_per_step, rng_seed, 64)
}

/// Population annealing with an explicit verification interval V: cached
/// energies are recomputed from scratch every V annealing steps.
pub fn population_anneal_with_verify(
    problem: &QuboProblem,
    schedule: &Schedule,
    r0: usize,
    sweeps_per_step: usize,
    rng_seed: u64,
    verify_interval: usize,
) -> Result<AnnealResult> {
    if r0 < 1 {
        return Err(Error::InvalidParameter("r0 must be >= 1".into()));
    }
    if sweeps_per_step < 1 {
        return Err(Error::InvalidParameter("sweeps_per_step must be >= 1".into()));
    }
    let betas = geometric_schedule(schedule);
    let mut init_rng = stream_rng(rng_seed, 0, 0);
    let mut pop = Population::random(problem, r0, &mut init_rng)?;

    let mut best_bits = pop.replicas[0].clone();
    let mut best_energy = f64::INFINITY;
    let mut diagnostics = Vec::with_capacity(betas.len());
    let verify_every = verify_interval.max(1);

    for (i, &beta) in betas.iter().enumerate() {
        if i > 0 {
            let mut rng = stream_rng(rng_seed, 1, i as u64);
            resample(&mut pop, betas[i - 1], beta, &mut rng)?;
        }
        for (k, ((bits, energy), fields)) in pop
            .replicas
            .iter_mut()
            .zip(pop.energies.iter_mut())
            .zip(pop.fields.iter_mut())
            .enumerate()
        {
            let mut rng = stream_rng(rng_seed, 2 + i as u64, k as u64);
            for _ in 0..sweeps_per_step {
                metropolis_sweep_replica(bits, energy, fields, problem, beta, &mut rng);
            }
        }
        if i % verify_every == 0 {
            pop.verify_energies(problem);
        }
        let mut mean = 0.0;
        for (bits, &e) in pop.replicas.iter().zip(&pop.energies) {
            mean += e;
            if e < best_energy {
                best_energy = e;
                best_bits.clone_from(bits);
            }
        }
        mean /= pop.size() as f64;
        diagnostics.push(StepDiagnostics {
            step: i,
            beta,
            best_energy,
            mean_energy: mean,
            population_size: pop.size(),
            unique_replicas: pop.unique_replicas(),
        });
    }
    // shed any residual incremental-update rounding
    best_energy = problem.energy_unchecked(&best_bits);
    Ok(AnnealResult { best_bits, best_energy, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_endpoints_and_ratio() {
        let s = Schedule::new(10.0, 1e10, 1 << 14).unwrap();
        let betas = geometric_schedule(&s);
        assert_eq!(betas.len(), (1 << 14) + 1);
        assert_eq!(betas[0], 10.0);
        assert_eq!(betas[1 << 14], 1e10);
        let r = (1e10f64 / 10.0).powf(1.0 / ((1 << 14) as f64));
        for w in betas.windows(2).take(100) {
            assert!(((w[1] / w[0]) - r).abs() / r < 1e-12);
        }

        let s1 = Schedule::new(1.0, 2.0, 1).unwrap();
        assert_eq!(geometric_schedule(&s1), vec![1.0, 2.0]);

        assert!(Schedule::new(0.0, 1.0, 4).is_err());
        assert!(Schedule::new(2.0, 1.0, 4).is_err());
        assert!(Schedule::new(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn one_bit_problem_converges() {
        let mut p = QuboProblem::zero(1);
        p.add_coefficient(0, 0, -1.0);
        let s = Schedule::new(1.0, 1e6, 32).unwrap();
        let result = population_anneal(&p, &s, 8, 1, 7).unwrap();
        assert_eq!(result.best_bits, vec![true]);
        assert_eq!(result.best_energy, -1.0);
    }

    #[test]
    fn anneal_is_deterministic() {
        let mut p = QuboProblem::zero(6);
        let mut rng = stream_rng(3, 0, 0);
        for i in 0..6 {
            for j in 0..=i {
                p.add_coefficient(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let s = Schedule::new(0.5, 100.0, 64).unwrap();
        let a = population_anneal(&p, &s, 16, 1, 42).unwrap();
        let b = population_anneal(&p, &s, 16, 1, 42).unwrap();
        assert_eq!(a.best_bits, b.best_bits);
        assert_eq!(a.best_energy, b.best_energy);
        for (x, y) in a.diagnostics.iter().zip(&b.diagnostics) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn best_energy_is_non_increasing() {
        let mut p = QuboProblem::zero(8);
        let mut rng = stream_rng(5, 0, 0);
        for i in 0..8 {
            for j in 0..=i {
                p.add_coefficient(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let s = Schedule::new(0.5, 1e4, 128).unwrap();
        let result = population_anneal(&p, &s, 16, 1, 0).unwrap();
        for w in result.diagnostics.windows(2) {
            assert!(w[1].best_energy <= w[0].best_energy);
        }
    }

    #[test]
    fn flat_problem_metropolis_is_uniform() {
        // flat landscape: every proposal accepted, so each sweep applies
        // exactly n flips and bit-sum parity alternates deterministically for
        // odd n; sampling at sweep boundaries then covers all 8 states
        // uniformly (uniform within each parity class, classes interleaved)
        let p = QuboProblem::zero(3);
        let mut rng = stream_rng(11, 0, 0);
        let mut pop = Population::random(&p, 1, &mut rng).unwrap();
        let mut counts = [0u64; 8];
        let sweeps = 100_000;
        for _ in 0..sweeps {
            metropolis_sweep(&mut pop, &p, 1.0, &mut rng).unwrap();
            let s = pop.replicas[0]
                .iter()
                .enumerate()
                .map(|(i, &b)| (b as usize) << i)
                .sum::<usize>();
            counts[s] += 1;
        }
        // parity classes are visited 50/50, so per-state expectation is
        // sweeps/8 with the variance of a 4-way multinomial inside a class
        let expected = sweeps as f64 / 8.0;
        let sigma = (sweeps as f64 / 2.0 * 0.25 * 0.75).sqrt();
        for &c in &counts {
            assert!((c as f64 - expected).abs() < 3.5 * sigma, "counts {counts:?}");
        }
    }

    #[test]
    fn resample_properties() {
        let mut p = QuboProblem::zero(4);
        p.add_coefficient(0, 0, 1.0);
        let mut rng = stream_rng(13, 0, 0);
        let mut pop = Population::random(&p, 32, &mut rng).unwrap();

        // equal energies: sizes preserved exactly
        for e in pop.energies.iter_mut() {
            *e = 1.0;
        }
        resample(&mut pop, 1.0, 2.0, &mut rng).unwrap();
        assert_eq!(pop.size(), 32);

        // one replica with effectively infinite energy never survives a
        // strong quench
        pop.energies[0] = 1e308;
        let marked = pop.replicas[0].clone();
        let others: Vec<Vec<bool>> = pop.replicas[1..].to_vec();
        resample(&mut pop, 1.0, 100.0, &mut rng).unwrap();
        assert_eq!(pop.size(), 32);
        let marked_still_unique = !others.contains(&marked);
        if marked_still_unique {
            assert!(!pop.replicas.contains(&marked));
        }

        assert!(resample(&mut pop, 2.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn unique_replica_count() {
        let p = QuboProblem::zero(3);
        let mut rng = stream_rng(17, 0, 0);
        let mut pop = Population::random(&p, 4, &mut rng).unwrap();
        pop.replicas = vec![
            vec![true, false, false],
            vec![true, false, false],
            vec![false, true, false],
            vec![false, false, true],
        ];
        pop.energies = vec![0.0; 4];
        assert_eq!(pop.unique_replicas(), 3);
    }
}
