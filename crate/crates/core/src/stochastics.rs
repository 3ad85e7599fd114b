//! Seeded randomness: labelled substreams, triangular sampling and the
//! random matrices that drive payments and interbank decisions.
//!
//! Every consumer owns a [`StreamLabel`]. A stream for `(seed, label, period)`
//! is a ChaCha8 generator keyed by the master seed with the ChaCha stream id
//! set to `(label, period)`, so draws in one substream never shift draws in
//! another. Scenario comparisons that reuse a seed therefore see identical
//! payment and lending shocks.

use ndarray::Array2;
use rand::distr::{Distribution, Open01};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RateLaws;
use crate::error::{Error, Result};

/// Consumers of randomness. The discriminant is part of the stream id and
/// must stay stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StreamLabel {
    Assignment = 0,
    CashMatrix = 1,
    WireMatrix = 2,
    RepaymentRatio = 3,
    Absorption = 4,
    InterbankDecision = 5,
    Matching = 6,
    Rates = 7,
    TargetRatio = 8,
}

/// One labelled substream of a run.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    label: StreamLabel,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: StreamLabel, period: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((label as u64) << 32) | (period as u64 & 0xffff_ffff));
        Self { seed, label, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> StreamLabel {
        self.label
    }

    /// A draw from the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    /// A draw from [0, 1).
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Open-interval draw at a fixed slot of the stream, independent of how
    /// many draws were taken before. Used where the set of draws depends on
    /// state, so that runs sharing a seed still share the value for a slot.
    pub fn open01_at(&mut self, slot: u64) -> f64 {
        // ChaCha's word counter is 68 bits; two words per slot.
        self.rng.set_word_pos(u128::from(slot & ((1 << 60) - 1)) * 2);
        Open01.sample(&mut self.rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Master seed of a run, handing out labelled per-period streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, label: StreamLabel, period: usize) -> RngStream {
        RngStream::new(self.seed, label, period)
    }
}

/// Triangular law on `[lower, upper]` with mode `peak`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct TriangularParams {
    lower: f64,
    peak: f64,
    upper: f64,
}

impl TriangularParams {
    pub fn new(lower: f64, peak: f64, upper: f64) -> Result<Self> {
        let finite = lower.is_finite() && peak.is_finite() && upper.is_finite();
        if !finite || lower > peak || peak > upper {
            return Err(Error::InvalidTriangular { lower, peak, upper });
        }
        Ok(Self { lower, peak, upper })
    }

    /// Degenerate law concentrated on `value`.
    pub fn point(value: f64) -> Self {
        Self {
            lower: value,
            peak: value,
            upper: value,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn mean(&self) -> f64 {
        (self.lower + self.peak + self.upper) / 3.0
    }

    pub fn is_point_mass(&self) -> bool {
        self.lower == self.upper
    }

    /// Inverse CDF evaluated at `u` in [0, 1].
    pub fn quantile(&self, u: f64) -> f64 {
        let Self { lower, peak, upper } = *self;
        let width = upper - lower;
        if width == 0.0 {
            return lower;
        }
        let split = (peak - lower) / width;
        let x = if u < split {
            lower + (u * width * (peak - lower)).sqrt()
        } else {
            upper - ((1.0 - u) * width * (upper - peak)).sqrt()
        };
        x.clamp(lower, upper)
    }

    /// One uniform draw per sample.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let u = rng.unit();
        self.quantile(u)
    }
}

impl TryFrom<[f64; 3]> for TriangularParams {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<TriangularParams> for [f64; 3] {
    fn from(p: TriangularParams) -> Self {
        [p.lower, p.peak, p.upper]
    }
}

/// Draws `v` from `law` once per bank, in bank order.
pub fn sample_per_bank(law: &TriangularParams, banks: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..banks).map(|_| law.sample(rng)).collect()
}

/// `n x n` matrix whose rows are `n` open-interval uniforms normalised to one.
pub fn random_row_stochastic(n: usize, rng: &mut RngStream) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    for mut row in m.rows_mut() {
        let mut total = 0.0;
        for x in row.iter_mut() {
            *x = rng.open01();
            total += *x;
        }
        row.mapv_inplace(|x| x / total);
    }
    m
}

/// `n x m` matrix of i.i.d. U(0, 1) entries.
pub fn uniform_matrix(n: usize, m: usize, rng: &mut RngStream) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, m), || rng.open01())
}

/// Per-period reference rates. Customer-side rates are drawn per bank; the
/// interbank rate is a single system-wide draw applied to both A3 and L3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub interbank: f64,
    pub l5_spread: f64,
}

impl RateSet {
    /// All rates zero.
    pub fn zero(banks: usize) -> Self {
        Self {
            a1: vec![0.0; banks],
            a2: vec![0.0; banks],
            l1: vec![0.0; banks],
            l2: vec![0.0; banks],
            interbank: 0.0,
            l5_spread: 0.0,
        }
    }

    pub fn a3(&self) -> f64 {
        self.interbank
    }

    pub fn l3(&self) -> f64 {
        self.interbank
    }

    /// Guarantee fee rate: the interbank rate plus the punitive spread.
    pub fn l5(&self) -> f64 {
        self.interbank + self.l5_spread
    }
}

pub fn draw_period_rates(laws: &RateLaws, banks: usize, rng: &mut RngStream) -> RateSet {
    let a1 = sample_per_bank(&laws.a1, banks, rng);
    let a2 = sample_per_bank(&laws.a2, banks, rng);
    let l1 = sample_per_bank(&laws.l1, banks, rng);
    let l2 = sample_per_bank(&laws.l2, banks, rng);
    let interbank = laws.interbank.sample(rng);
    RateSet {
        a1,
        a2,
        l1,
        l2,
        interbank,
        l5_spread: laws.l5_spread,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream() -> RngStream {
        RngStream::new(42, StreamLabel::Rates, 0)
    }

    #[test]
    fn point_mass_returns_its_value() {
        let p = TriangularParams::new(0.0, 0.0, 0.0).unwrap();
        let mut rng = stream();
        for _ in 0..100 {
            assert_eq!(p.sample(&mut rng), 0.0);
        }
        assert_eq!(TriangularParams::point(0.03).sample(&mut rng), 0.03);
    }

    #[test]
    fn rejects_unordered_params() {
        assert!(TriangularParams::new(0.5, 0.2, 1.0).is_err());
        assert!(TriangularParams::new(0.0, 1.2, 1.0).is_err());
        assert!(TriangularParams::new(0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn quantile_endpoints() {
        let p = TriangularParams::new(0.0, 0.3, 1.0).unwrap();
        assert_eq!(p.quantile(0.0), 0.0);
        assert_eq!(p.quantile(1.0), 1.0);
        assert!((p.quantile(0.3) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn single_row_matrix_is_one() {
        let m = random_row_stochastic(1, &mut stream());
        assert_eq!(m[[0, 0]], 1.0);
    }

    #[test]
    fn rows_sum_to_one() {
        let m = random_row_stochastic(5, &mut stream());
        for row in m.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn uniform_matrix_support() {
        let m = uniform_matrix(2, 2, &mut stream());
        assert_eq!(m.len(), 4);
        assert!(m.iter().all(|&x| x > 0.0 && x < 1.0));
        let again = uniform_matrix(2, 2, &mut stream());
        assert_eq!(m, again);
    }

    #[test]
    fn streams_are_separated_by_label_and_period() {
        let a = RngStream::new(1, StreamLabel::CashMatrix, 3).next_u64();
        let b = RngStream::new(1, StreamLabel::WireMatrix, 3).next_u64();
        let c = RngStream::new(1, StreamLabel::CashMatrix, 4).next_u64();
        let a2 = RngStream::new(1, StreamLabel::CashMatrix, 3).next_u64();
        let mut s = RngStream::new(1, StreamLabel::CashMatrix, 3);
        let x = s.open01_at(7);
        s.open01();
        assert_eq!(s.open01_at(7), x);
        assert_ne!(s.open01_at(8), x);
        assert_eq!(a, a2);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn guarantee_fee_is_interbank_plus_spread() {
        let laws = RateLaws {
            interbank: TriangularParams::point(0.015),
            ..RateLaws::benchmark()
        };
        let rates = draw_period_rates(&laws, 3, &mut stream());
        assert!((rates.l5() - 0.045).abs() < 1e-15);
        assert_eq!(rates.a3(), rates.l3());
    }

    #[test]
    fn benchmark_point_masses_reproduce_benchmarks() {
        let rates = draw_period_rates(&RateLaws::benchmark(), 4, &mut stream());
        assert!(rates.a1.iter().all(|&r| r == 0.01));
        assert!(rates.a2.iter().all(|&r| r == 0.03));
        assert!(rates.l1.iter().all(|&r| r == 0.01));
        assert!(rates.l2.iter().all(|&r| r == 0.01));
        assert_eq!(rates.interbank, 0.015);
    }
}
