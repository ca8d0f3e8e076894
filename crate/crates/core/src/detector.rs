//! Received-signal synthesis and exhaustive maximum-likelihood detection.
//!
//! The detector works on an [`EquivalentChannel`], a tensor of group sums
//! `H(n, i, a) = sum_k G(n, f(i, k)) e^{j psi_{a, f(i, k)}}`: what group `i`
//! delivers to antenna `n` when it is steered at antenna `a`. The noiseless
//! observation of codeword `(c, s)` at antenna `n` is then `sum_i H(n, i, c_i) s_i`.
//! Stagger offsets live in the symbols, so `H(n, i, n)` is real and positive.
//!
//! For APSK the tensor also keeps the partial sums over the first `a` elements
//! of each group, one per ring, so the detector can match the exact reflection
//! pattern instead of the ring-scaled full sum.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::channel::{ChannelMatrix, GroupLayout};
use crate::config::{DetectorModel, SystemParams};
use crate::encoder::ReflectionVector;
use crate::mapping::{Bits, Codebook, Codeword};
use crate::rng::complex_gaussian;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("bit strings differ in length: {tx} vs {rx}")]
    LengthMismatch { tx: usize, rx: usize },
}

/// Received vector `y` and the per-antenna noise variance it was drawn with.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedVector {
    pub y: Vec<Complex64>,
    pub noise_variance: f64,
}

/// `y = sqrt(E_s) G p x + w`, where `x` is the transmitter symbol (1 for MUX
/// and RGSSK) and `w` is CN(0, N_0) per antenna with `N_0 = E_s 10^{-snr/10}`.
///
/// `snr_db = +inf` gives the noiseless observation. Noise samples are drawn
/// regardless, so the stream position does not depend on the SNR.
pub fn transmit<R: Rng + ?Sized>(
    p: &ReflectionVector,
    ch: &ChannelMatrix,
    carrier: Complex64,
    params: &SystemParams,
    snr_db: f64,
    rng: &mut R,
) -> ReceivedVector {
    let n0 = params.noise_variance(snr_db);
    let gain = params.symbol_energy().sqrt() * carrier;
    let coeffs = p.coeffs();
    let y = (0..ch.rows())
        .map(|n| {
            let clean: Complex64 = ch
                .row(n)
                .iter()
                .zip(coeffs)
                .map(|(g, c)| g * c)
                .sum::<Complex64>()
                * gain;
            clean + complex_gaussian(rng, n0)
        })
        .collect();
    ReceivedVector {
        y,
        noise_variance: n0,
    }
}

/// Group sums of one channel realization, per ring level.
///
/// Layout: `((ring * N_a + group) * N_R + steer) * N_R + antenna`, so the
/// receive antenna index is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannel {
    receive: usize,
    groups: usize,
    rings: usize,
    data: Vec<Complex64>,
}

impl EquivalentChannel {
    pub fn new(ch: &ChannelMatrix, params: &SystemParams) -> Self {
        Self::with_rings(ch, GroupLayout::from_params(params), params.rings)
    }

    pub fn with_rings(ch: &ChannelMatrix, layout: GroupLayout, rings: usize) -> Self {
        let nr = ch.rows();
        let na = layout.groups;
        let step = layout.group_len / rings;
        let mut data = vec![Complex64::new(0.0, 0.0); rings * na * nr * nr];
        let mut acc = vec![Complex64::new(0.0, 0.0); nr];
        for i in 0..na {
            for a in 0..nr {
                acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for k in 0..layout.group_len {
                    let j = layout.column(i, k);
                    let steer = ch.steering(a, j);
                    for (n, z) in acc.iter_mut().enumerate() {
                        *z += ch.get(n, j) * steer;
                    }
                    if (k + 1) % step == 0 {
                        let r = (k + 1) / step - 1;
                        let base = ((r * na + i) * nr + a) * nr;
                        data[base..base + nr].copy_from_slice(&acc);
                    }
                }
            }
        }
        Self {
            receive: nr,
            groups: na,
            rings,
            data,
        }
    }

    /// Full-group sum `H(n, i, a)`, all 0-based.
    #[inline]
    pub fn get(&self, n: usize, group: usize, steer: usize) -> Complex64 {
        self.partial(self.rings, n, group, steer)
    }

    /// Sum over the elements switched on at ring `ring` (1-based).
    #[inline]
    pub fn partial(&self, ring: usize, n: usize, group: usize, steer: usize) -> Complex64 {
        self.data[self.offset(ring - 1, group, steer) + n]
    }

    #[inline]
    fn offset(&self, ring0: usize, group: usize, steer: usize) -> usize {
        ((ring0 * self.groups + group) * self.receive + steer) * self.receive
    }

    pub fn receive_antennas(&self) -> usize {
        self.receive
    }

    /// Multiply every entry by `e^{j angle}`.
    pub fn rotated(&self, angle: f64) -> Self {
        let r = Complex64::from_polar(1.0, angle);
        Self {
            data: self.data.iter().map(|z| z * r).collect(),
            ..self.clone()
        }
    }

    /// Noiseless observation of `cw` under `model`.
    pub fn predict(&self, cw: &Codeword, params: &SystemParams, model: DetectorModel) -> Vec<Complex64> {
        let terms = hypothesis_terms(cw, params, model);
        (0..self.receive)
            .map(|n| {
                terms
                    .iter()
                    .map(|t| self.data[self.offset(t.ring0, t.group, t.steer) + n] * t.coeff)
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    ring0: usize,
    group: usize,
    steer: usize,
    coeff: Complex64,
}

fn hypothesis_terms(cw: &Codeword, params: &SystemParams, model: DetectorModel) -> Vec<Term> {
    let sqrt_es = params.symbol_energy().sqrt();
    cw.groups
        .iter()
        .enumerate()
        .map(|(i, g)| match model {
            DetectorModel::Exact => Term {
                ring0: g.ring - 1,
                group: i,
                steer: cw.antennas[i],
                coeff: sqrt_es * cw.carrier * Complex64::from_polar(1.0, g.phase),
            },
            DetectorModel::Clt => Term {
                ring0: params.rings - 1,
                group: i,
                steer: cw.antennas[i],
                coeff: cw.symbols[i],
            },
        })
        .collect()
}

/// Exhaustive ML detector over a fixed codebook.
///
/// Hypotheses are laid out once; [`MlDetector::detect`] evaluates
/// `sum_n |y_n - sum_i H(n, i, c_i) s_i|^2` for every codeword with early
/// termination once a partial metric exceeds the running best. Ties go to the
/// lowest codebook index.
#[derive(Debug, Clone)]
pub struct MlDetector {
    groups: usize,
    /// Per codeword and group: offset of the `H` column in the tensor.
    offsets: Vec<u32>,
    coeffs: Vec<Complex64>,
}

impl MlDetector {
    pub fn new(book: &Codebook, model: DetectorModel) -> Self {
        let params = book.params();
        let na = params.active_antennas();
        let nr = params.receive_antennas();
        let mut offsets = Vec::with_capacity(book.len() * na);
        let mut coeffs = Vec::with_capacity(book.len() * na);
        for cw in book.words() {
            for t in hypothesis_terms(cw, params, model) {
                let off = ((t.ring0 * na + t.group) * nr + t.steer) * nr;
                offsets.push(off as u32);
                coeffs.push(t.coeff);
            }
        }
        Self {
            groups: na,
            offsets,
            coeffs,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() / self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Index of the ML codeword and its metric.
    pub fn detect(&self, y: &ReceivedVector, h: &EquivalentChannel) -> (u64, f64) {
        let y = &y.y;
        let data = &h.data;
        let na = self.groups;
        let mut best = f64::INFINITY;
        let mut best_idx = 0u64;
        for (w, (offs, coeffs)) in self
            .offsets
            .chunks_exact(na)
            .zip(self.coeffs.chunks_exact(na))
            .enumerate()
        {
            let mut metric = 0.0;
            for (n, yn) in y.iter().enumerate() {
                let mut acc = *yn;
                for (o, c) in offs.iter().zip(coeffs) {
                    acc -= data[*o as usize + n] * c;
                }
                metric += acc.norm_sqr();
                if metric >= best {
                    break;
                }
            }
            if metric < best {
                best = metric;
                best_idx = w as u64;
            }
        }
        (best_idx, best)
    }
}

/// Convenience wrapper: ML detection of `y` against the whole codebook.
pub fn detect_ml<'a>(
    y: &ReceivedVector,
    h: &EquivalentChannel,
    book: &'a Codebook,
    model: DetectorModel,
) -> &'a Codeword {
    let (idx, _) = MlDetector::new(book, model).detect(y, h);
    book.word(idx)
}

/// Hamming distance between two labels, split into spatial and symbol bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BitErrors {
    pub total: u64,
    pub spatial: u64,
    pub symbol: u64,
}

impl std::ops::AddAssign for BitErrors {
    fn add_assign(&mut self, rhs: Self) {
        self.total += rhs.total;
        self.spatial += rhs.spatial;
        self.symbol += rhs.symbol;
    }
}

/// Bit errors between `tx` and `rx`; the first `spatial_bits` are the spatial part.
pub fn count_bit_errors(tx: Bits, rx: Bits, spatial_bits: usize) -> Result<BitErrors, DetectError> {
    if tx.len() != rx.len() {
        return Err(DetectError::LengthMismatch {
            tx: tx.len(),
            rx: rx.len(),
        });
    }
    let diff = tx.value() ^ rx.value();
    let symbol_bits = tx.len() - spatial_bits.min(tx.len());
    let symbol_mask = if symbol_bits == 64 {
        u64::MAX
    } else {
        (1u64 << symbol_bits) - 1
    };
    let symbol = (diff & symbol_mask).count_ones() as u64;
    let total = diff.count_ones() as u64;
    Ok(BitErrors {
        total,
        spatial: total - symbol,
        symbol,
    })
}
