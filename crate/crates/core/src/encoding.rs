//! Bit encodings of real fit coefficients and the l0/l1 regulator gadgets.
//!
//! Each coefficient c_a is a signed sum of per-bit values g_i.  The plain and
//! modified-l1 schemes carry signs inside the g list; the l0 schemes sign-split
//! the value bits into positive (p) and negative (n) banks and add one or two
//! ancilla bits per coefficient.  The double-ancilla scheme is the
//! degeneracy-engineered construction: its penalty landscape has 2^M
//! zero-penalty encodings of c_a = 0, versus one for the single-ancilla
//! scheme.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Plain,
    L1Mod,
    L0Single,
    L0Double,
}

impl Scheme {
    /// Ancilla bits per coefficient.
    pub fn ancillas(&self) -> usize {
        match self {
            Scheme::Plain | Scheme::L1Mod => 0,
            Scheme::L0Single => 1,
            Scheme::L0Double => 2,
        }
    }

    /// Whether value bits are split into positive/negative banks.
    pub fn sign_split(&self) -> bool {
        matches!(self, Scheme::L0Single | Scheme::L0Double)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Plain => "plain",
            Scheme::L1Mod => "l1_mod",
            Scheme::L0Single => "l0_single",
            Scheme::L0Double => "l0_double",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "plain" => Ok(Scheme::Plain),
            "l1_mod" => Ok(Scheme::L1Mod),
            "l0_single" => Ok(Scheme::L0Single),
            "l0_double" => Ok(Scheme::L0Double),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Role of one bit inside a coefficient block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitRole {
    /// Plain/l1_mod value bit i (signed g_i).
    B(usize),
    /// Positive-bank value bit i (+g_i).
    P(usize),
    /// Negative-bank value bit i (−g_i).
    N(usize),
    /// First ancilla (r in the single scheme; r in the double scheme).
    R,
    /// Second ancilla of the double scheme.
    Q,
}

/// Per-coefficient bit encoding shared by all K coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BitLayout {
    scheme: Scheme,
    k_coeffs: usize,
    /// Per-bit values: signed for plain/l1_mod, positive magnitudes for the
    /// sign-split l0 schemes.
    g: Vec<f64>,
    cross_penalty: f64,
    /// Exponent range when built by `power_of_two` (kept for serialization).
    exponent_range: Option<(i32, i32)>,
}

impl BitLayout {
    /// Standard layout: magnitudes 2^i for i in [i_min, i_max].  Sign-split
    /// schemes store the magnitudes once; plain/l1_mod get mirrored ± banks
    /// so all four schemes represent the same value set.
    pub fn power_of_two(scheme: Scheme, i_min: i32, i_max: i32, k_coeffs: usize) -> Result<Self> {
        if i_min > i_max {
            return Err(Error::InvalidParameter(format!(
                "exponent range [{i_min}, {i_max}] is empty"
            )));
        }
        if i_max - i_min > 32 {
            return Err(Error::InvalidParameter("exponent range too wide".into()));
        }
        let magnitudes: Vec<f64> = (i_min..=i_max).map(|i| (i as f64).exp2()).collect();
        let g = if scheme.sign_split() {
            magnitudes
        } else {
            let mut g = magnitudes.clone();
            g.extend(magnitudes.iter().map(|m| -m));
            g
        };
        let mut layout = Self::with_g(scheme, g, k_coeffs)?;
        layout.exponent_range = Some((i_min, i_max));
        Ok(layout)
    }

    /// Layout with explicit per-bit values (e.g. the worked example
    /// g = {−2, −1, 1, 2}).
    pub fn with_g(scheme: Scheme, g: Vec<f64>, k_coeffs: usize) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::InvalidParameter("g must be non-empty".into()));
        }
        if k_coeffs < 1 {
            return Err(Error::InvalidParameter("k_coeffs must be >= 1".into()));
        }
        for &v in &g {
            if !v.is_finite() || v == 0.0 {
                return Err(Error::InvalidParameter(format!("g values must be finite and non-zero, got {v}")));
            }
            if scheme.sign_split() && v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "sign-split schemes need positive g magnitudes, got {v}"
                )));
            }
        }
        Ok(BitLayout { scheme, k_coeffs, g, cross_penalty: 2.0, exponent_range: None })
    }

    /// Override the double-ABE cross penalty (paper default 2).
    pub fn with_cross_penalty(mut self, cross_penalty: f64) -> Result<Self> {
        if !(cross_penalty.is_finite() && cross_penalty > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cross_penalty must be > 0, got {cross_penalty}"
            )));
        }
        self.cross_penalty = cross_penalty;
        Ok(self)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn k_coeffs(&self) -> usize {
        self.k_coeffs
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn cross_penalty(&self) -> f64 {
        self.cross_penalty
    }

    pub fn exponent_range(&self) -> Option<(i32, i32)> {
        self.exponent_range
    }

    /// Value bits per coefficient (2M for sign-split schemes, |g| otherwise).
    pub fn value_bits_per_coeff(&self) -> usize {
        if self.scheme.sign_split() {
            2 * self.g.len()
        } else {
            self.g.len()
        }
    }

    pub fn bits_per_coeff(&self) -> usize {
        self.value_bits_per_coeff() + self.scheme.ancillas()
    }

    pub fn total_bits(&self) -> usize {
        self.k_coeffs * self.bits_per_coeff()
    }

    /// Role of a bit inside its coefficient block.
    pub fn role_at(&self, offset: usize) -> BitRole {
        let m = self.g.len();
        if self.scheme.sign_split() {
            if offset < m {
                BitRole::P(offset)
            } else if offset < 2 * m {
                BitRole::N(offset - m)
            } else if offset == 2 * m {
                match self.scheme {
                    Scheme::L0Single => BitRole::R,
                    Scheme::L0Double => BitRole::Q,
                    _ => unreachable!(),
                }
            } else {
                BitRole::R
            }
        } else {
            BitRole::B(offset)
        }
    }

    /// Signed decode weight of one global bit (0 for ancillas), plus the
    /// coefficient it belongs to.
    pub fn bit_weight(&self, bit: usize) -> (usize, f64) {
        let bpc = self.bits_per_coeff();
        let coeff = bit / bpc;
        let weight = match self.role_at(bit % bpc) {
            BitRole::B(i) => self.g[i],
            BitRole::P(i) => self.g[i],
            BitRole::N(i) => -self.g[i],
            BitRole::R | BitRole::Q => 0.0,
        };
        (coeff, weight)
    }

    pub fn index_map(&self) -> BitIndexMap {
        BitIndexMap {
            bits_per_coeff: self.bits_per_coeff(),
            value_bits: self.g.len(),
            scheme: self.scheme,
            total_bits: self.total_bits(),
        }
    }

    fn check_len(&self, bits: &[bool]) -> Result<()> {
        if bits.len() != self.total_bits() {
            return Err(Error::DimensionMismatch { expected: self.total_bits(), got: bits.len() });
        }
        Ok(())
    }
}

/// Bijection between (coefficient, role) and global bit index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitIndexMap {
    bits_per_coeff: usize,
    value_bits: usize,
    scheme: Scheme,
    total_bits: usize,
}

impl BitIndexMap {
    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    pub fn index(&self, coeff: usize, role: BitRole) -> Result<usize> {
        let m = self.value_bits;
        let offset = match (self.scheme.sign_split(), role) {
            (false, BitRole::B(i)) if i < m => i,
            (true, BitRole::P(i)) if i < m => i,
            (true, BitRole::N(i)) if i < m => m + i,
            (true, BitRole::Q) if self.scheme == Scheme::L0Double => 2 * m,
            (true, BitRole::R) => match self.scheme {
                Scheme::L0Single => 2 * m,
                Scheme::L0Double => 2 * m + 1,
                _ => unreachable!(),
            },
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "role {role:?} not present in scheme {:?}",
                    self.scheme
                )))
            }
        };
        let idx = coeff * self.bits_per_coeff + offset;
        if idx >= self.total_bits {
            return Err(Error::InvalidParameter(format!("coefficient {coeff} out of range")));
        }
        Ok(idx)
    }
}

/// Decode a bitstring into the K coefficient values; ancilla bits are ignored.
pub fn decode(bits: &[bool], layout: &BitLayout) -> Result<Vec<f64>> {
    layout.check_len(bits)?;
    let mut coeffs = vec![0.0; layout.k_coeffs()];
    for (bit, &on) in bits.iter().enumerate() {
        if on {
            let (a, w) = layout.bit_weight(bit);
            coeffs[a] += w;
        }
    }
    Ok(coeffs)
}

/// Per-coefficient regulator value given the block's bits.
fn block_penalty(layout: &BitLayout, block: &[bool]) -> f64 {
    let m = layout.g().len();
    match layout.scheme() {
        Scheme::Plain => 0.0,
        Scheme::L1Mod => block
            .iter()
            .zip(layout.g())
            .map(|(&b, &g)| if b { g.abs() } else { 0.0 })
            .sum(),
        Scheme::L0Single => {
            let s = block[..2 * m].iter().filter(|&&b| b).count() as f64;
            let r = block[2 * m] as u8 as f64;
            r + (1.0 - r) * s
        }
        Scheme::L0Double => {
            let sp = block[..m].iter().filter(|&&b| b).count() as f64;
            let sn = block[m..2 * m].iter().filter(|&&b| b).count() as f64;
            let overlap = (0..m).filter(|&i| block[i] && block[m + i]).count() as f64;
            let q = block[2 * m] as u8 as f64;
            let r = block[2 * m + 1] as u8 as f64;
            let c = layout.cross_penalty();
            q + (1.0 + c * q - r) * sp + r + (1.0 + c * r - q) * sn - 2.0 * overlap
        }
    }
}

/// Total regulator penalty R = Σ_a R_a for the given bitstring.
pub fn reg_penalty(bits: &[bool], layout: &BitLayout) -> Result<f64> {
    layout.check_len(bits)?;
    let bpc = layout.bits_per_coeff();
    Ok(bits.chunks(bpc).map(|block| block_penalty(layout, block)).sum())
}

/// Minimum of reg_penalty over all ancilla assignments, with the value bits
/// held fixed at their settings in `bits`.  For the l0 schemes this is the
/// regulator actually felt by an annealer free to relax its ancillas.
pub fn min_penalty_over_ancillas(bits: &[bool], layout: &BitLayout) -> Result<f64> {
    layout.check_len(bits)?;
    let bpc = layout.bits_per_coeff();
    let n_anc = layout.scheme().ancillas();
    let vb = layout.value_bits_per_coeff();
    let mut total = 0.0;
    let mut block = vec![false; bpc];
    for chunk in bits.chunks(bpc) {
        block.copy_from_slice(chunk);
        let mut best = f64::INFINITY;
        for mask in 0..(1u32 << n_anc) {
            for a in 0..n_anc {
                block[vb + a] = (mask >> a) & 1 == 1;
            }
            best = best.min(block_penalty(layout, &block));
        }
        total += best;
    }
    Ok(total)
}

/// One row of a degeneracy profile: how many per-coefficient configurations
/// decode to `value` at exactly this `penalty`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyEntry {
    pub value: f64,
    pub penalty: f64,
    pub count: u64,
}

/// Exhaustive per-coefficient census of (decoded value, penalty) levels.
pub fn degeneracy_profile(layout: &BitLayout, coefficient_index: usize) -> Result<Vec<DegeneracyEntry>> {
    if coefficient_index >= layout.k_coeffs() {
        return Err(Error::InvalidParameter(format!(
            "coefficient index {coefficient_index} out of range"
        )));
    }
    let bpc = layout.bits_per_coeff();
    if bpc > 24 {
        return Err(Error::CapacityExceeded { limit: 24, got: bpc });
    }
    let m = layout.g().len();
    let sign_split = layout.scheme().sign_split();
    let mut block = vec![false; bpc];
    let mut entries: Vec<(f64, f64)> = Vec::with_capacity(1 << bpc);
    for mask in 0u32..(1u32 << bpc) {
        for (i, b) in block.iter_mut().enumerate() {
            *b = (mask >> i) & 1 == 1;
        }
        let mut value = 0.0;
        for i in 0..m {
            if sign_split {
                if block[i] {
                    value += layout.g()[i];
                }
                if block[m + i] {
                    value -= layout.g()[i];
                }
            } else if block[i] {
                value += layout.g()[i];
            }
        }
        entries.push((value, block_penalty(layout, &block)));
    }
    entries.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<DegeneracyEntry> = Vec::new();
    for (value, penalty) in entries {
        match out.last_mut() {
            Some(e) if e.value == value && e.penalty == penalty => e.count += 1,
            _ => out.push(DegeneracyEntry { value, penalty, count: 1 }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits_of(mask: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| (mask >> i) & 1 == 1).collect()
    }

    #[test]
    fn worked_example_seven_values() {
        // g = {-2, -1, 1, 2}: 16 configurations, 7 distinct values -3..3
        let layout = BitLayout::with_g(Scheme::Plain, vec![-2.0, -1.0, 1.0, 2.0], 1).unwrap();
        let mut values = Vec::new();
        for mask in 0..16u64 {
            let c = decode(&bits_of(mask, 4), &layout).unwrap()[0];
            values.push(c);
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        assert_eq!(values, vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        // the specific configuration (1,0,0,1): -2 + 2 = 0
        let c = decode(&[true, false, false, true], &layout).unwrap();
        assert_eq!(c, vec![0.0]);
    }

    #[test]
    fn decode_sign_split() {
        let layout = BitLayout::with_g(Scheme::L0Double, vec![1.0, 2.0], 1).unwrap();
        // p = (1,0), n = (0,1), ancillas off: c = 1 - 2 = -1
        let bits = [true, false, false, true, false, false];
        assert_eq!(decode(&bits, &layout).unwrap(), vec![-1.0]);
        // ancillas never affect decode
        let bits2 = [true, false, false, true, true, true];
        assert_eq!(decode(&bits2, &layout).unwrap(), vec![-1.0]);
        // length mismatch
        assert!(decode(&bits[..5], &layout).is_err());
    }

    #[test]
    fn power_of_two_layouts() {
        let single = BitLayout::power_of_two(Scheme::L0Single, -3, 2, 2).unwrap();
        assert_eq!(single.g().len(), 6);
        assert_eq!(single.bits_per_coeff(), 13);
        assert_eq!(single.total_bits(), 26);
        assert_eq!(single.g()[0], 0.125);
        assert_eq!(single.g()[5], 4.0);

        let double = BitLayout::power_of_two(Scheme::L0Double, -3, 2, 1).unwrap();
        assert_eq!(double.bits_per_coeff(), 14);

        let plain = BitLayout::power_of_two(Scheme::Plain, -3, 2, 1).unwrap();
        assert_eq!(plain.g().len(), 12);
        assert_eq!(plain.bits_per_coeff(), 12);

        assert!(BitLayout::power_of_two(Scheme::Plain, 2, -3, 1).is_err());
    }

    #[test]
    fn reg_penalty_worked_cases() {
        // double ABE, M=1: p=1, n=1, q=r=0 is a zero-penalty encoding of 0
        let d = BitLayout::with_g(Scheme::L0Double, vec![1.0], 1).unwrap();
        assert_eq!(reg_penalty(&[true, true, false, false], &d).unwrap(), 0.0);
        assert_eq!(reg_penalty(&[false, false, false, false], &d).unwrap(), 0.0);
        // p alone costs 1; with q on it costs 1 + c - ... : q + (1+cq)·1 = 1 + 1 + 2 = 4
        assert_eq!(reg_penalty(&[true, false, false, false], &d).unwrap(), 1.0);
        assert_eq!(reg_penalty(&[true, false, true, false], &d).unwrap(), 4.0);
        // r softens p? no: r reduces the p slope: p=1, r=1: (1 + 0 - 1)·1 + 1 = 1
        assert_eq!(reg_penalty(&[true, false, false, true], &d).unwrap(), 1.0);

        // single ABE, M=1 sign-split: p on, r=1 -> r + (1-r)·1 = 1
        let s = BitLayout::with_g(Scheme::L0Single, vec![1.0], 1).unwrap();
        assert_eq!(reg_penalty(&[true, false, true], &s).unwrap(), 1.0);
        assert_eq!(reg_penalty(&[true, false, false], &s).unwrap(), 1.0);
        assert_eq!(reg_penalty(&[true, true, true], &s).unwrap(), 1.0);

        // l1_mod weights by |g|
        let l1 = BitLayout::with_g(Scheme::L1Mod, vec![-2.0, 0.5], 1).unwrap();
        assert_eq!(reg_penalty(&[true, true], &l1).unwrap(), 2.5);

        // plain has no penalty
        let p = BitLayout::with_g(Scheme::Plain, vec![1.0, 2.0], 1).unwrap();
        assert_eq!(reg_penalty(&[true, true], &p).unwrap(), 0.0);
    }

    #[test]
    fn l1_mod_bounds_decode_magnitude() {
        let layout = BitLayout::with_g(Scheme::L1Mod, vec![-2.0, -1.0, 1.0, 2.0], 1).unwrap();
        for mask in 0..16u64 {
            let bits = bits_of(mask, 4);
            let c = decode(&bits, &layout).unwrap()[0];
            let r = reg_penalty(&bits, &layout).unwrap();
            assert!(r >= c.abs() - 1e-12);
        }
    }

    #[test]
    fn min_penalty_is_l0_indicator_small() {
        for m in 1..=3 {
            let g: Vec<f64> = (0..m).map(|i| (i as f64).exp2()).collect();
            for scheme in [Scheme::L0Single, Scheme::L0Double] {
                let layout = BitLayout::with_g(scheme, g.clone(), 1).unwrap();
                let n = layout.total_bits();
                // group min-penalty by decoded value over all configurations
                let mut best: alloc::collections::BTreeMap<i64, f64> =
                    alloc::collections::BTreeMap::new();
                for mask in 0..(1u64 << n) {
                    let bits = bits_of(mask, n);
                    let c = decode(&bits, &layout).unwrap()[0];
                    let p = min_penalty_over_ancillas(&bits, &layout).unwrap();
                    let key = (c * 8.0) as i64; // dyadic values, exact
                    let e = best.entry(key).or_insert(f64::INFINITY);
                    if p < *e {
                        *e = p;
                    }
                }
                for (key, p) in best {
                    let expected = if key == 0 { 0.0 } else { 1.0 };
                    assert_eq!(p, expected, "scheme {scheme:?} m {m} value {key}/8");
                }
            }
        }
    }

    #[test]
    fn degeneracy_ratios() {
        // single ABE M=1: lowest level of c=0 has 1 config, of c=1 has 2
        let s = BitLayout::with_g(Scheme::L0Single, vec![1.0], 1).unwrap();
        let prof = degeneracy_profile(&s, 0).unwrap();
        let lowest = |v: f64| {
            prof.iter()
                .filter(|e| e.value == v)
                .min_by(|a, b| a.penalty.partial_cmp(&b.penalty).unwrap())
                .unwrap()
                .count
        };
        assert_eq!(lowest(0.0), 1);
        assert_eq!(lowest(1.0), 2);

        // double ABE M=1: 1:1 at the lowest levels, and 2^M zero-penalty c=0
        let d = BitLayout::with_g(Scheme::L0Double, vec![1.0], 1).unwrap();
        let prof = degeneracy_profile(&d, 0).unwrap();
        let zero_floor = prof.iter().find(|e| e.value == 0.0 && e.penalty == 0.0).unwrap();
        assert_eq!(zero_floor.count, 2); // all-off plus the (p,n) pair
        let one_floor = prof
            .iter()
            .filter(|e| e.value == 1.0)
            .min_by(|a, b| a.penalty.partial_cmp(&b.penalty).unwrap())
            .unwrap();
        assert_eq!(one_floor.penalty, 1.0);
        assert_eq!(one_floor.count, 2);

        for m in 1..=3 {
            let g: Vec<f64> = (0..m).map(|i| (i as f64).exp2()).collect();
            let d = BitLayout::with_g(Scheme::L0Double, g, 1).unwrap();
            let prof = degeneracy_profile(&d, 0).unwrap();
            let zf = prof.iter().find(|e| e.value == 0.0 && e.penalty == 0.0).unwrap();
            assert_eq!(zf.count, 1u64 << m);
        }
    }

    #[test]
    fn degeneracy_capacity_cap() {
        let layout = BitLayout::power_of_two(Scheme::L0Double, -8, 4, 1).unwrap();
        assert!(layout.bits_per_coeff() > 24);
        assert!(matches!(
            degeneracy_profile(&layout, 0),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn index_map_roundtrip() {
        let layout = BitLayout::power_of_two(Scheme::L0Double, -1, 1, 3).unwrap();
        let map = layout.index_map();
        let mut seen = vec![false; layout.total_bits()];
        for a in 0..3 {
            for i in 0..3 {
                for role in [BitRole::P(i), BitRole::N(i)] {
                    let idx = map.index(a, role).unwrap();
                    assert!(!seen[idx]);
                    seen[idx] = true;
                }
            }
            for role in [BitRole::Q, BitRole::R] {
                let idx = map.index(a, role).unwrap();
                assert!(!seen[idx]);
                seen[idx] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert!(map.index(0, BitRole::B(0)).is_err());
    }
}
