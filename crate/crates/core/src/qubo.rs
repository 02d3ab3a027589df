//! QUBO assembly and exact evaluation.
//!
//! The regularized regression loss L = Σ_s (y_s − Σ_a c_a X_sa)² + λ R(bits)
//! becomes a quadratic polynomial over bits once each c_a is a linear form in
//! its value bits and R is one of the QUBO-form regulators.  Linear terms sit
//! on the diagonal (x² = x); storage is dense lower-triangular.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::encoding::{decode, reg_penalty, BitLayout, BitRole, Scheme};
use crate::error::{Error, Result};

/// Dense lower-triangular QUBO: energy(x) = offset + Σ_{i≥j} J_ij x_i x_j.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    n: usize,
    /// Packed row-major lower triangle: J_ij at i(i+1)/2 + j for i ≥ j.
    coeffs: Vec<f64>,
    offset: f64,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    i * (i + 1) / 2 + j
}

impl QuboProblem {
    pub fn new(n: usize, coeffs: Vec<f64>, offset: f64) -> Result<Self> {
        let expected = n * (n + 1) / 2;
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: coeffs.len() });
        }
        if !offset.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("QUBO coefficients must be finite".into()));
        }
        Ok(QuboProblem { n, coeffs, offset })
    }

    pub fn zero(n: usize) -> Self {
        QuboProblem { n, coeffs: vec![0.0; n * (n + 1) / 2], offset: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// J_ij for i ≥ j (unordered pairs accepted).
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.max(j), i.min(j));
        self.coeffs[tri(i, j)]
    }

    pub fn add_coefficient(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = (i.max(j), i.min(j));
        self.coeffs[tri(i, j)] += value;
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    /// Iterate over the stored (i, j, J_ij) entries, i ≥ j.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| (0..=i).map(move |j| (i, j, self.coeffs[tri(i, j)])))
    }

    fn check_len(&self, bits: &[bool]) -> Result<()> {
        if bits.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: bits.len() });
        }
        Ok(())
    }

    pub fn energy(&self, bits: &[bool]) -> Result<f64> {
        self.check_len(bits)?;
        Ok(self.energy_unchecked(bits))
    }

    pub(crate) fn energy_unchecked(&self, bits: &[bool]) -> f64 {
        let mut e = self.offset;
        for i in 0..self.n {
            if !bits[i] {
                continue;
            }
            let row = &self.coeffs[tri(i, 0)..=tri(i, i)];
            let mut acc = row[i]; // J_ii (x_i = 1)
            for j in 0..i {
                if bits[j] {
                    acc += row[j];
                }
            }
            e += acc;
        }
        e
    }

    /// Energy change from flipping one bit; O(n).
    pub fn delta_energy(&self, bits: &[bool], flip_index: usize) -> Result<f64> {
        self.check_len(bits)?;
        if flip_index >= self.n {
            return Err(Error::InvalidParameter(format!("flip index {flip_index} out of range")));
        }
        Ok(self.delta_unchecked(bits, flip_index))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, bits: &[bool], k: usize) -> f64 {
        // field felt by bit k: J_kk + sum over set neighbors
        let row = &self.coeffs[tri(k, 0)..=tri(k, k)];
        let mut field = row[k];
        for j in 0..k {
            if bits[j] {
                field += row[j];
            }
        }
        for i in (k + 1)..self.n {
            if bits[i] {
                field += self.coeffs[tri(i, k)];
            }
        }
        if bits[k] {
            -field
        } else {
            field
        }
    }

    /// Local field of every bit: f_k = J_kk + Σ_{j≠k, x_j=1} J_jk, so the
    /// energy change of flipping bit k is ±f_k.
    pub fn local_fields(&self, bits: &[bool]) -> Result<Vec<f64>> {
        self.check_len(bits)?;
        let mut fields: Vec<f64> = (0..self.n).map(|k| self.coeffs[tri(k, k)]).collect();
        for i in 0..self.n {
            let row = &self.coeffs[tri(i, 0)..tri(i, i)];
            for (j, &jij) in row.iter().enumerate() {
                if bits[j] {
                    fields[i] += jij;
                }
                if bits[i] {
                    fields[j] += jij;
                }
            }
        }
        Ok(fields)
    }

    /// Update cached local fields after bit k was flipped to its new value.
    #[inline]
    pub fn shift_fields(&self, fields: &mut [f64], bits: &[bool], k: usize) {
        let s = if bits[k] { 1.0 } else { -1.0 };
        let row = &self.coeffs[tri(k, 0)..tri(k, k)];
        for (j, &jkj) in row.iter().enumerate() {
            fields[j] += s * jkj;
        }
        for i in (k + 1)..self.n {
            fields[i] += s * self.coeffs[tri(i, k)];
        }
    }

    /// Exact minimum by Gray-code enumeration (n ≤ 24); returns the argmin
    /// bitstring, its energy, and the number of states tied at the minimum.
    pub fn brute_force(&self) -> Result<(Vec<bool>, f64, u64)> {
        if self.n > 24 {
            return Err(Error::CapacityExceeded { limit: 24, got: self.n });
        }
        let mut bits = vec![false; self.n];
        let mut energy = self.offset;
        let mut best_bits = bits.clone();
        let mut best = energy;
        let mut ties: u64 = 1;
        let scale = 1.0 + self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())) + self.offset.abs();
        let tol = 1e-9 * scale;
        for k in 1u64..(1u64 << self.n) {
            let flip = k.trailing_zeros() as usize;
            energy += self.delta_unchecked(&bits, flip);
            bits[flip] = !bits[flip];
            if energy < best - tol {
                best = energy;
                best_bits.copy_from_slice(&bits);
                ties = 1;
            } else if (energy - best).abs() <= tol {
                ties += 1;
            }
        }
        // re-evaluate exactly to shed accumulated delta rounding
        let best = self.energy_unchecked(&best_bits);
        Ok((best_bits, best, ties))
    }
}

/// Assemble the full regularized loss as a QUBO over the layout's bits.
pub fn assemble(
    x: &[Vec<f64>],
    y: &[f64],
    layout: &BitLayout,
    lambda: f64,
) -> Result<QuboProblem> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: x.len() });
    }
    let k = layout.k_coeffs();
    for row in x {
        if row.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: row.len() });
        }
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }

    // Gram matrix and target correlations of the design matrix
    let mut gram = vec![0.0; k * k];
    let mut t = vec![0.0; k];
    let mut offset = 0.0;
    for (row, &ys) in x.iter().zip(y) {
        offset += ys * ys;
        for a in 0..k {
            t[a] += row[a] * ys;
            for b in 0..=a {
                gram[a * k + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..k {
        for b in (a + 1)..k {
            gram[a * k + b] = gram[b * k + a];
        }
    }

    let n = layout.total_bits();
    let mut problem = QuboProblem::zero(n);
    problem.add_offset(offset);

    // MSE part: (y - Σ w_i x_i h_{a_i})² expands into linear terms
    // w_i² G_{a_i a_i} - 2 w_i t_{a_i} on the diagonal and cross terms
    // 2 w_i w_j G_{a_i a_j}.
    let weights: Vec<(usize, f64)> = (0..n).map(|bit| layout.bit_weight(bit)).collect();
    for i in 0..n {
        let (ai, wi) = weights[i];
        if wi == 0.0 {
            continue;
        }
        problem.add_coefficient(i, i, wi * wi * gram[ai * k + ai] - 2.0 * wi * t[ai]);
        for j in 0..i {
            let (aj, wj) = weights[j];
            if wj == 0.0 {
                continue;
            }
            problem.add_coefficient(i, j, 2.0 * wi * wj * gram[ai * k + aj]);
        }
    }

    // Regulator part, per coefficient block.
    if lambda > 0.0 {
        let map = layout.index_map();
        let m = layout.g().len();
        let c = layout.cross_penalty();
        for a in 0..k {
            match layout.scheme() {
                Scheme::Plain => {}
                Scheme::L1Mod => {
                    for i in 0..m {
                        let bit = map.index(a, BitRole::B(i))?;
                        problem.add_coefficient(bit, bit, lambda * layout.g()[i].abs());
                    }
                }
                Scheme::L0Single => {
                    // R_a = r + (1 - r)(Σp + Σn)
                    let r = map.index(a, BitRole::R)?;
                    problem.add_coefficient(r, r, lambda);
                    for i in 0..m {
                        for role in [BitRole::P(i), BitRole::N(i)] {
                            let bit = map.index(a, role)?;
                            problem.add_coefficient(bit, bit, lambda);
                            problem.add_coefficient(bit, r, -lambda);
                        }
                    }
                }
                Scheme::L0Double => {
                    // R_a = q + (1 + c·q - r)Σp + r + (1 + c·r - q)Σn - 2Σ p_i n_i
                    let q = map.index(a, BitRole::Q)?;
                    let r = map.index(a, BitRole::R)?;
                    problem.add_coefficient(q, q, lambda);
                    problem.add_coefficient(r, r, lambda);
                    for i in 0..m {
                        let p = map.index(a, BitRole::P(i))?;
                        let nn = map.index(a, BitRole::N(i))?;
                        problem.add_coefficient(p, p, lambda);
                        problem.add_coefficient(nn, nn, lambda);
                        problem.add_coefficient(p, q, lambda * c);
                        problem.add_coefficient(p, r, -lambda);
                        problem.add_coefficient(nn, r, lambda * c);
                        problem.add_coefficient(nn, q, -lambda);
                        problem.add_coefficient(p, nn, -2.0 * lambda);
                    }
                }
            }
        }
    }

    Ok(problem)
}

/// Direct (non-QUBO) evaluation of the assembled loss; reference oracle.
pub fn direct_loss(
    x: &[Vec<f64>],
    y: &[f64],
    layout: &BitLayout,
    lambda: f64,
    bits: &[bool],
) -> Result<f64> {
    let coeffs = decode(bits, layout)?;
    let mut mse = 0.0;
    for (row, &ys) in x.iter().zip(y) {
        let pred: f64 = row.iter().zip(&coeffs).map(|(h, c)| h * c).sum();
        let r = ys - pred;
        mse += r * r;
    }
    Ok(mse + lambda * reg_penalty(bits, layout)?)
}
