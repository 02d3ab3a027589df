//! Synthetic jet events and the preprocessing steps used by the restricted
//! relations (planarization, particle truncation).

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// One jet constituent: transverse momentum, rapidity, azimuth.
///
/// Invariants are enforced at construction: `pt > 0` and finite, `y` finite,
/// `phi` normalized into `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64, f64)", into = "(f64, f64, f64)")]
pub struct Particle {
    pt: f64,
    y: f64,
    phi: f64,
}

impl Particle {
    pub fn new(pt: f64, y: f64, phi: f64) -> Result<Self> {
        if !(pt.is_finite() && pt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "particle pt must be finite and > 0, got {pt}"
            )));
        }
        if !y.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "particle (y, phi) must be finite, got ({y}, {phi})"
            )));
        }
        let mut p = phi % TWO_PI;
        if p < 0.0 {
            p += TWO_PI;
        }
        if p >= TWO_PI {
            p = 0.0;
        }
        Ok(Particle { pt, y, phi: p })
    }

    pub fn pt(&self) -> f64 {
        self.pt
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

impl TryFrom<(f64, f64, f64)> for Particle {
    type Error = String;

    fn try_from(v: (f64, f64, f64)) -> core::result::Result<Self, String> {
        Particle::new(v.0, v.1, v.2).map_err(|e| format!("{e}"))
    }
}

impl From<Particle> for (f64, f64, f64) {
    fn from(p: Particle) -> Self {
        (p.pt, p.y, p.phi)
    }
}

/// A jet: a non-empty list of particles with finite positive total pT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJetEvent", into = "RawJetEvent")]
pub struct JetEvent {
    particles: Vec<Particle>,
}

#[derive(Serialize, Deserialize)]
struct RawJetEvent {
    particles: Vec<Particle>,
}

impl TryFrom<RawJetEvent> for JetEvent {
    type Error = String;

    fn try_from(raw: RawJetEvent) -> core::result::Result<Self, String> {
        JetEvent::new(raw.particles).map_err(|e| format!("{e}"))
    }
}

impl From<JetEvent> for RawJetEvent {
    fn from(ev: JetEvent) -> Self {
        RawJetEvent { particles: ev.particles }
    }
}

impl JetEvent {
    pub fn new(particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidParameter(
                "jet event must contain at least one particle".into(),
            ));
        }
        let total: f64 = particles.iter().map(|p| p.pt).sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "total pT must be finite and positive, got {total}"
            )));
        }
        Ok(JetEvent { particles })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    /// Number of particles M.
    pub fn multiplicity(&self) -> usize {
        self.particles.len()
    }

    pub fn total_pt(&self) -> f64 {
        self.particles.iter().map(|p| p.pt).sum()
    }
}

/// Generate synthetic jet events.
///
/// Each event draws its multiplicity M uniformly from the inclusive range
/// `m_range`, pT fractions from a flat Dirichlet (normalized unit
/// exponentials) scaled to `pt_total`, and `(y, φ)` from Gaussians of width
/// `angular_scale` centered on `(0, π)` so the jet stays away from the φ
/// wrap-around.  Deterministic given `seed`.
pub fn generate_events(
    n_events: usize,
    m_range: (usize, usize),
    pt_total: f64,
    angular_scale: f64,
    seed: u64,
) -> Result<Vec<JetEvent>> {
    if n_events < 1 {
        return Err(Error::InvalidParameter("n_events must be >= 1".into()));
    }
    if m_range.0 < 1 || m_range.0 > m_range.1 {
        return Err(Error::InvalidParameter(format!(
            "m_range must satisfy 1 <= min <= max, got [{}, {}]",
            m_range.0, m_range.1
        )));
    }
    if !(pt_total.is_finite() && pt_total > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pt_total must be finite and > 0, got {pt_total}"
        )));
    }
    if !(angular_scale.is_finite() && angular_scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "angular_scale must be finite and > 0, got {angular_scale}"
        )));
    }

    let mut events = Vec::with_capacity(n_events);
    for e in 0..n_events {
        let mut rng = stream_rng(seed, 0, e as u64);
        let m = rng.gen_range(m_range.0..=m_range.1);
        // flat Dirichlet over pT fractions via normalized Exp(1) draws
        let mut fracs: Vec<f64> = (0..m).map(|_| sample_exp1(&mut rng)).collect();
        let sum: f64 = fracs.iter().sum();
        for f in fracs.iter_mut() {
            *f /= sum;
        }
        let mut particles = Vec::with_capacity(m);
        for &f in &fracs {
            let (gy, gp) = sample_normal_pair(&mut rng);
            let y = gy * angular_scale;
            let phi = core::f64::consts::PI + gp * angular_scale;
            // a zero exponential draw is astronomically unlikely but would
            // violate the pt > 0 invariant; nudge it
            let pt = (f * pt_total).max(f64::MIN_POSITIVE);
            particles.push(Particle::new(pt, y, phi)?);
        }
        events.push(JetEvent::new(particles)?);
    }
    Ok(events)
}

/// Exp(1) draw by inversion; `gen` yields u ∈ [0, 1), so 1 - u > 0.
fn sample_exp1(rng: &mut impl Rng) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln()
}

/// Pair of independent standard normals (Box-Muller).
fn sample_normal_pair(rng: &mut impl Rng) -> (f64, f64) {
    let r = (2.0 * sample_exp1(rng)).sqrt();
    let theta = TWO_PI * rng.gen::<f64>();
    (r * theta.cos(), r * theta.sin())
}

/// Set every particle's azimuth to zero (the "planar" restriction).
pub fn planarize(event: &JetEvent) -> JetEvent {
    let particles = event
        .particles
        .iter()
        .map(|p| Particle { pt: p.pt, y: p.y, phi: 0.0 })
        .collect();
    JetEvent { particles }
}

/// Delete uniformly-random particles until at most `target_m` remain, then
/// rescale the surviving pT so the total is preserved.
pub fn truncate_to_m(event: &JetEvent, target_m: usize, seed: u64) -> Result<JetEvent> {
    if target_m == 0 {
        return Err(Error::InvalidParameter("target_m must be >= 1".into()));
    }
    if event.multiplicity() <= target_m {
        return Ok(event.clone());
    }
    let original_total = event.total_pt();
    let mut particles = event.particles.clone();
    let mut rng = stream_rng(seed, 3, 0);
    while particles.len() > target_m {
        let idx = rng.gen_range(0..particles.len());
        particles.remove(idx);
    }
    let remaining: f64 = particles.iter().map(|p| p.pt).sum();
    let scale = original_total / remaining;
    for p in particles.iter_mut() {
        p.pt *= scale;
    }
    JetEvent::new(particles)
}
