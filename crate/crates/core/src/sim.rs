//! Seeded Monte Carlo BER simulation.
//!
//! Trial `t` always draws its channel, bits and noise from stream `t` of the
//! configured seed, at every SNR point. Trials are evaluated in fixed-size
//! blocks; blocks are merged in index order and a point stops after the first
//! block whose cumulative bit errors reach `max_bit_errors` (or when `trials`
//! is exhausted). The resulting curve is therefore identical for any number of
//! workers.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::channel::sample_channel;
use crate::config::SystemParams;
use crate::curve::BerCurve;
use crate::detector::{count_bit_errors, transmit, BitErrors, EquivalentChannel, MlDetector};
use crate::encoder::encode;
use crate::mapping::{Bits, Codebook};
use crate::rng::{stream_rng, trial_stream};

/// Execution controls that do not affect results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    /// Trials per scheduling block.
    pub block: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            workers: 0,
            block: 512,
        }
    }
}

/// Counters of one SNR point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub errors: BitErrors,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.trials += other.trials;
        self.errors += other.errors;
    }
}

/// Everything a trial needs that is fixed for a configuration.
pub struct Link {
    params: SystemParams,
    book: Codebook,
    detector: MlDetector,
}

impl Link {
    pub fn new(params: &SystemParams) -> Self {
        let book = Codebook::new(params);
        let detector = MlDetector::new(&book, params.config.detector);
        Self {
            params: params.clone(),
            book,
            detector,
        }
    }

    pub fn codebook(&self) -> &Codebook {
        &self.book
    }

    /// One channel use: sample channel and bits, encode, transmit, detect.
    pub fn trial(&self, trial: u64, snr_db: f64) -> BitErrors {
        let p = &self.params;
        let mut rng = stream_rng(p.config.seed, trial_stream(0, trial), 0);
        let ch = sample_channel(p, &mut rng);
        let label = rng.random_range(0..p.codebook_size() as u64);
        let cw = self.book.word(label);
        let pv = encode(cw, &ch, p).expect("codebook matches scheme");
        let y = transmit(&pv, &ch, cw.carrier, p, snr_db, &mut rng);
        let h = EquivalentChannel::new(&ch, p);
        let (decoded, _) = self.detector.detect(&y, &h);
        count_bit_errors(
            Bits::new(label, p.rate),
            Bits::new(decoded, p.rate),
            p.spatial_bits,
        )
        .expect("labels share the rate")
    }

    fn block(&self, start: u64, end: u64, snr_db: f64) -> Tally {
        let mut tally = Tally::default();
        for t in start..end {
            tally.errors += self.trial(t, snr_db);
            tally.trials += 1;
        }
        tally
    }

    /// Run one SNR point under the stopping rule.
    pub fn run_point(&self, snr_db: f64, options: SimOptions) -> Tally {
        let cap = self.params.config.trials;
        let max_errors = self.params.config.max_bit_errors;
        let block = options.block.max(1);
        let wave = (rayon::current_num_threads() as u64 * 2).max(1);
        let mut tally = Tally::default();
        let mut next = 0u64;
        'outer: while next * block < cap {
            let first = next;
            let last = (first + wave).min(cap.div_ceil(block));
            let parts: Vec<Tally> = (first..last)
                .into_par_iter()
                .map(|b| self.block(b * block, ((b + 1) * block).min(cap), snr_db))
                .collect();
            for part in parts {
                tally.merge(part);
                if tally.errors.total >= max_errors {
                    break 'outer;
                }
            }
            next = last;
        }
        tally
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(f)
}

/// Simulate every point of `snr_grid`.
pub fn run_simulation(params: &SystemParams, snr_grid: &[f64], options: SimOptions) -> BerCurve {
    let link = Link::new(params);
    let mut curve = BerCurve::new(params, snr_grid);
    with_pool(options.workers, || {
        for point in curve.points.iter_mut() {
            let start = Instant::now();
            let tally = link.run_point(point.snr_db, options);
            point.record_simulation(tally, params.rate, start.elapsed());
            log::info!(
                "{} snr={} dB trials={} errors={} ber={:.3e}",
                params.scheme(),
                point.snr_db,
                tally.trials,
                tally.errors.total,
                point.ber.unwrap_or(f64::NAN)
            );
        }
    });
    curve
}

/// Wall time helper for callers that time other stages.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Run `f` with `workers` threads (0 = all cores).
pub fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    with_pool(workers, f)
}
