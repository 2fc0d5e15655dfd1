//! Seeded input generation shared by fixtures, random program inputs and
//! tests. SplitMix64: state advances by `0x9E3779B97F4A7C15`, output is mixed
//! with multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`.

use crate::axes::{restrict, Shape};
use crate::tensor::NamedTensor;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_f64() * n as f64) as usize
    }

    /// A tensor with entries uniform in `[lo, hi)`, drawn in canonical order.
    pub fn tensor(&mut self, shape: Shape, lo: f64, hi: f64) -> NamedTensor {
        NamedTensor::from_fn(shape, |_| self.uniform(lo, hi))
    }

    /// A tensor that is one-hot along `axis` for every other index.
    pub fn one_hot(&mut self, shape: Shape, axis: &str) -> NamedTensor {
        let n = shape.size_of(axis).expect("one-hot axis in shape");
        let rest = shape.remove(&[axis]).expect("axis present");
        let picks: Vec<usize> = rest.records().map(|_| 1 + self.below(n)).collect();
        NamedTensor::from_fn(shape, |r| {
            let pos = rest
                .offset_of(&restrict(r, &rest).expect("sub-record"))
                .expect("record");
            if r.get(axis) == Some(picks[pos]) {
                1.0
            } else {
                0.0
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_outputs() {
        // First outputs for seed 0 of the reference SplitMix64.
        let mut g = SplitMix64::new(0);
        assert_eq!(g.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(g.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(g.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn one_hot_rows() {
        let mut g = SplitMix64::new(3);
        let shape = Shape::new([("seq", 4), ("vocab", 5)]).unwrap();
        let x = g.one_hot(shape, "vocab");
        let sums = crate::ops::reduce(&x, crate::ops::ReduceKind::Sum, &["vocab"]).unwrap();
        assert!(sums.data().iter().all(|&s| s == 1.0));
    }
}
