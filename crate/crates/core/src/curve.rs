//! BER curves, their CSV form and SNR-gap measurement.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Scheme, SystemConfig, SystemParams};
use crate::detector::BitErrors;
use crate::sim::Tally;

/// Points with fewer bit errors than this are flagged as unreliable.
pub const LOW_ERROR_THRESHOLD: u64 = 10;

pub const CSV_HEADER: &str =
    "snr_db,trials,bit_errors,spatial_bit_errors,symbol_bit_errors,ber,theory_bound,flag";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointFlag {
    Ok,
    LowErrors,
    TheoryOnly,
}

impl PointFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            PointFlag::Ok => "ok",
            PointFlag::LowErrors => "low-errors",
            PointFlag::TheoryOnly => "theory-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: BitErrors,
    /// Simulated BER; `None` when the point was not simulated.
    pub ber: Option<f64>,
    pub theory_bound: Option<f64>,
    /// Standard error of a sampled union bound.
    pub theory_std_error: Option<f64>,
    pub wall_time: Duration,
}

impl BerPoint {
    fn empty(snr_db: f64) -> Self {
        Self {
            snr_db,
            trials: 0,
            errors: BitErrors::default(),
            ber: None,
            theory_bound: None,
            theory_std_error: None,
            wall_time: Duration::ZERO,
        }
    }

    pub fn record_simulation(&mut self, tally: Tally, rate: usize, wall_time: Duration) {
        self.trials = tally.trials;
        self.errors = tally.errors;
        self.ber = (tally.trials > 0)
            .then(|| tally.errors.total as f64 / (tally.trials as f64 * rate as f64));
        self.wall_time = wall_time;
    }

    pub fn flag(&self) -> PointFlag {
        match self.ber {
            None => PointFlag::TheoryOnly,
            Some(_) if self.errors.total < LOW_ERROR_THRESHOLD => PointFlag::LowErrors,
            Some(_) => PointFlag::Ok,
        }
    }
}

/// Union-bound provenance attached to a curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryInfo {
    /// `"exhaustive"` or `"sampled"`.
    pub enumeration: String,
    pub pairs: u64,
    pub skipped_fraction: f64,
    /// The bound was evaluated for a scheme outside the MUX derivation.
    pub extension: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub label: String,
    pub scheme: Scheme,
    pub rate: usize,
    pub config: SystemConfig,
    pub fingerprint: String,
    pub points: Vec<BerPoint>,
    pub theory: Option<TheoryInfo>,
}

impl BerCurve {
    pub fn new(params: &SystemParams, snr_grid: &[f64]) -> Self {
        Self {
            label: params.scheme().to_string(),
            scheme: params.scheme(),
            rate: params.rate,
            config: params.config.clone(),
            fingerprint: fingerprint(&params.config),
            points: snr_grid.iter().map(|&s| BerPoint::empty(s)).collect(),
            theory: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn snr_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.snr_db).collect()
    }

    pub fn total_wall_time(&self) -> Duration {
        self.points.iter().map(|p| p.wall_time).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let sim = p.ber.is_some();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.snr_db,
                if sim { p.trials.to_string() } else { String::new() },
                if sim { p.errors.total.to_string() } else { String::new() },
                if sim { p.errors.spatial.to_string() } else { String::new() },
                if sim { p.errors.symbol.to_string() } else { String::new() },
                p.ber.map(format_sig6).unwrap_or_default(),
                p.theory_bound.map(format_sig6).unwrap_or_default(),
                p.flag().as_str()
            );
        }
        out
    }

    /// BER values used for gap measurement: simulation where available,
    /// otherwise the bound.
    pub fn values(&self, source: GapSource) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| {
                let v = match source {
                    GapSource::Simulation => p.ber,
                    GapSource::Theory => p.theory_bound,
                }?;
                (v > 0.0).then_some((p.snr_db, v))
            })
            .collect()
    }

    /// SNR at which the curve crosses `target`, interpolating `log10(BER)`
    /// linearly between the bracketing points.
    pub fn snr_at(&self, target: f64, source: GapSource) -> Option<f64> {
        snr_at(&self.values(source), target)
    }
}

/// Which series a gap is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapSource {
    Simulation,
    Theory,
}

/// First downward crossing of `target` by the `(snr_db, ber)` series.
pub fn snr_at(values: &[(f64, f64)], target: f64) -> Option<f64> {
    let lt = target.log10();
    values.windows(2).find_map(|w| {
        let (s0, b0) = w[0];
        let (s1, b1) = w[1];
        if b0 >= target && b1 <= target && b0 > b1 {
            let (l0, l1) = (b0.log10(), b1.log10());
            Some(s0 + (l0 - lt) / (l0 - l1) * (s1 - s0))
        } else {
            None
        }
    })
}

/// Six significant digits in scientific notation.
pub fn format_sig6(v: f64) -> String {
    format!("{v:.5e}")
}

/// Stable hash of a configuration and the code version.
pub fn fingerprint(config: &SystemConfig) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).expect("config serializes"));
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    hex::encode(&h.finalize()[..8])
}
