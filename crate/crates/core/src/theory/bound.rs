//! Pairwise error bound and union bound on the average BER.
//!
//! The average PEP is bounded with the three-exponential Q-function bound
//! `Q(x) <= 1/6 e^{-2x^2} + 1/12 e^{-x^2} + 1/4 e^{-x^2/2}` applied to
//! `Q(sqrt(Gamma / 2N_0))`, which turns into three MGF evaluations at
//! `-1/N_0`, `-1/(2N_0)` and `-1/(4N_0)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mgf::SpectralForm;
use super::stats::{assemble_statistics, CovarianceModel, DifferenceStatistics, UnsupportedPairs};
use super::TheoryError;
use crate::config::SystemParams;
use crate::mapping::{Codebook, Codeword};
use crate::rng::stream_rng;

/// Exponential upper bound of the Gaussian Q-function.
pub fn q_bound(x: f64) -> f64 {
    let x2 = x * x;
    (-2.0 * x2).exp() / 6.0 + (-x2).exp() / 12.0 + (-x2 / 2.0).exp() / 4.0
}

/// PEP bound for one ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseBound {
    pub source: u64,
    pub target: u64,
    /// Upper bound on the average pairwise error probability, in `[0, 1/2]`.
    pub bound: f64,
    /// Bits in error when `source` is decoded as `target`.
    pub bit_errors: u32,
}

/// Options shared by the pairwise and union bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundOptions {
    #[serde(default)]
    pub covariance: CovarianceModel,
    #[serde(default)]
    pub unsupported: UnsupportedPairs,
}

pub fn pair_statistics(
    source: &Codeword,
    target: &Codeword,
    params: &SystemParams,
    options: BoundOptions,
) -> Result<DifferenceStatistics, TheoryError> {
    assemble_statistics(
        &source.antennas,
        &source.symbols,
        &target.antennas,
        &target.symbols,
        params.group_len,
        params.receive_antennas(),
        options.covariance,
        options.unsupported,
    )
}

fn bound_from_form(form: &SpectralForm, n0: f64) -> Result<f64, TheoryError> {
    Ok(form.mgf(-1.0 / n0)? / 6.0
        + form.mgf(-1.0 / (2.0 * n0))? / 12.0
        + form.mgf(-1.0 / (4.0 * n0))? / 4.0)
}

/// `1/6 M(-1/N_0) + 1/12 M(-1/2N_0) + 1/4 M(-1/4N_0)` for `source -> target`.
pub fn pairwise_bound(
    source: &Codeword,
    target: &Codeword,
    n0: f64,
    params: &SystemParams,
    options: BoundOptions,
) -> Result<PairwiseBound, TheoryError> {
    if source.index == target.index {
        return Err(TheoryError::SamePair(source.index));
    }
    let stats = pair_statistics(source, target, params, options)?;
    let form = SpectralForm::new(&stats)?;
    Ok(PairwiseBound {
        source: source.index,
        target: target.index,
        bound: bound_from_form(&form, n0)?,
        bit_errors: (source.index ^ target.index).count_ones(),
    })
}

/// How codeword pairs are enumerated for the union bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy")]
pub enum Enumeration {
    /// Every ordered pair; refused above `ceiling` ordered pairs.
    Exhaustive { ceiling: u64 },
    /// `pairs` ordered pairs drawn uniformly with the given seed.
    Sampled { pairs: u64, seed: u64 },
}

pub const DEFAULT_PAIR_CEILING: u64 = 10_000_000;

impl Default for Enumeration {
    fn default() -> Self {
        Enumeration::Exhaustive {
            ceiling: DEFAULT_PAIR_CEILING,
        }
    }
}

/// Union bound over an SNR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionBound {
    /// Noise variances the bound was evaluated at.
    pub noise_variance: Vec<f64>,
    /// Bound on the average BER per noise variance.
    pub ber: Vec<f64>,
    /// Standard error of the estimate (sampled enumeration only).
    pub std_error: Option<Vec<f64>>,
    /// Ordered pairs considered (all, or the sample size).
    pub pairs: u64,
    /// Of those, pairs left out as unsupported.
    pub skipped: u64,
}

impl UnionBound {
    pub fn skipped_fraction(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.skipped as f64 / self.pairs as f64
        }
    }
}

/// Bound on the average BER:
/// `P_b <= 1/2^R sum_x sum_{x_hat != x} PEP(x -> x_hat) e(x, x_hat) / R`.
pub fn union_bound_ber(
    book: &Codebook,
    noise_variance: &[f64],
    enumeration: Enumeration,
    options: BoundOptions,
) -> Result<UnionBound, TheoryError> {
    let params = book.params();
    let k = book.len() as u64;
    let rate = params.rate as f64;
    let grid = noise_variance.len();

    // e * PEP bound per grid point, or None when the pair is skipped
    let weigh = |a: &Codeword, b: &Codeword| -> Result<Option<Vec<f64>>, TheoryError> {
        let stats = match pair_statistics(a, b, params, options) {
            Ok(s) => s,
            Err(TheoryError::UnsupportedPair { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let form = SpectralForm::new(&stats)?;
        let e = (a.index ^ b.index).count_ones() as f64;
        noise_variance
            .iter()
            .map(|&n0| Ok(e * bound_from_form(&form, n0)?))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    };

    match enumeration {
        Enumeration::Exhaustive { ceiling } => {
            let pairs = k * (k - 1);
            if pairs > ceiling {
                return Err(TheoryError::PairCeiling { pairs, ceiling });
            }
            // PEP is symmetric in the pair (D only changes sign), so visit each
            // unordered pair once with weight 2.
            let rows: Vec<Result<(Vec<f64>, u64), TheoryError>> = (0..book.len())
                .into_par_iter()
                .map(|i| {
                    let mut acc = vec![0.0; grid];
                    let mut skipped = 0u64;
                    let a = book.word(i as u64);
                    for j in i + 1..book.len() {
                        match weigh(a, book.word(j as u64))? {
                            Some(w) => acc.iter_mut().zip(w).for_each(|(s, v)| *s += 2.0 * v),
                            None => skipped += 2,
                        }
                    }
                    Ok((acc, skipped))
                })
                .collect();
            let mut total = vec![0.0; grid];
            let mut skipped = 0;
            for row in rows {
                let (acc, s) = row?;
                total.iter_mut().zip(acc).for_each(|(t, v)| *t += v);
                skipped += s;
            }
            let ber = total.iter().map(|t| t / (k as f64 * rate)).collect();
            Ok(UnionBound {
                noise_variance: noise_variance.to_vec(),
                ber,
                std_error: None,
                pairs,
                skipped,
            })
        }
        Enumeration::Sampled { pairs, seed } => {
            if pairs < 2 {
                return Err(TheoryError::TooFewSamples(pairs));
            }
            const CHUNK: u64 = 4096;
            let chunks = pairs.div_ceil(CHUNK);
            let parts: Vec<Result<(Vec<f64>, Vec<f64>, u64), TheoryError>> = (0..chunks)
                .into_par_iter()
                .map(|chunk| {
                    let mut rng = stream_rng(seed, chunk, 0);
                    let mut sum = vec![0.0; grid];
                    let mut sq = vec![0.0; grid];
                    let mut skipped = 0;
                    let count = CHUNK.min(pairs - chunk * CHUNK);
                    for _ in 0..count {
                        let i = rng.random_range(0..k);
                        let mut j = rng.random_range(0..k - 1);
                        if j >= i {
                            j += 1;
                        }
                        match weigh(book.word(i), book.word(j))? {
                            Some(w) => {
                                for (g, v) in w.into_iter().enumerate() {
                                    sum[g] += v;
                                    sq[g] += v * v;
                                }
                            }
                            None => skipped += 1,
                        }
                    }
                    Ok((sum, sq, skipped))
                })
                .collect();
            let mut sum = vec![0.0; grid];
            let mut sq = vec![0.0; grid];
            let mut skipped = 0;
            for part in parts {
                let (s, q, sk) = part?;
                for g in 0..grid {
                    sum[g] += s[g];
                    sq[g] += q[g];
                }
                skipped += sk;
            }
            let n = pairs as f64;
            let scale = (k - 1) as f64 / rate;
            let mut ber = Vec::with_capacity(grid);
            let mut se = Vec::with_capacity(grid);
            for g in 0..grid {
                let mean = sum[g] / n;
                let var = ((sq[g] / n - mean * mean) * n / (n - 1.0)).max(0.0);
                ber.push(scale * mean);
                se.push(scale * (var / n).sqrt());
            }
            Ok(UnionBound {
                noise_variance: noise_variance.to_vec(),
                ber,
                std_error: Some(se),
                pairs,
                skipped,
            })
        }
    }
}
