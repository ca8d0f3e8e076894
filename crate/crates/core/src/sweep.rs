//! Multi-curve sweeps: union-bound evaluation, equal-rate comparisons and the
//! files written for them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, SystemConfig, SystemParams};
use crate::curve::{BerCurve, GapSource, PointFlag, TheoryInfo};
use crate::mapping::Codebook;
use crate::sim::{in_pool, run_simulation, SimOptions};
use crate::theory::{union_bound_ber, BoundOptions, Enumeration, TheoryError};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("curve `{label}`: {source}")]
    Config { label: String, source: ConfigError },
    #[error("curve `{label}`: {source}")]
    Theory { label: String, source: TheoryError },
    #[error("equal-rate comparison: curve `{label}` has R = {rate}, expected {expected}")]
    RateMismatch {
        label: String,
        rate: usize,
        expected: usize,
    },
    #[error("curve `{0}` has an empty SNR grid")]
    EmptyGrid(String),
    #[error("manifest has no curves")]
    NoCurves,
    #[error("duplicate curve label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid manifest: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl SweepError {
    /// Whether the failure is a refusal to enumerate too many pairs.
    pub fn is_enumeration_refusal(&self) -> bool {
        matches!(
            self,
            SweepError::Theory {
                source: TheoryError::PairCeiling { .. },
                ..
            }
        )
    }

    /// Whether the failure stems from the input configuration.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            SweepError::Config { .. }
                | SweepError::RateMismatch { .. }
                | SweepError::EmptyGrid(_)
                | SweepError::NoCurves
                | SweepError::DuplicateLabel(_)
                | SweepError::Parse(_)
        )
    }
}

/// Evaluate the union bound on every point of `curve`.
pub fn run_theory(
    curve: &mut BerCurve,
    params: &SystemParams,
    enumeration: Enumeration,
    options: BoundOptions,
) -> Result<(), TheoryError> {
    let start = Instant::now();
    let book = Codebook::new(params);
    let n0: Vec<f64> = curve
        .points
        .iter()
        .map(|p| params.noise_variance(p.snr_db))
        .collect();
    let ub = union_bound_ber(&book, &n0, enumeration, options)?;
    for (i, p) in curve.points.iter_mut().enumerate() {
        p.theory_bound = Some(ub.ber[i].min(0.5));
        p.theory_std_error = ub.std_error.as_ref().map(|s| s[i]);
    }
    curve.theory = Some(TheoryInfo {
        enumeration: match enumeration {
            Enumeration::Exhaustive { .. } => "exhaustive".into(),
            Enumeration::Sampled { .. } => "sampled".into(),
        },
        pairs: ub.pairs,
        skipped_fraction: ub.skipped_fraction(),
        extension: !params.scheme().is_mux(),
        wall_time_s: start.elapsed().as_secs_f64(),
    });
    log::info!(
        "{}: union bound over {} pairs ({:.2}% skipped)",
        curve.label,
        ub.pairs,
        100.0 * ub.skipped_fraction()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareMode {
    /// All curves must have the same rate.
    #[default]
    EqualRate,
    Free,
}

fn default_target() -> f64 {
    1e-3
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub label: String,
    pub config: SystemConfig,
}

/// A figure recipe: several curves on a shared SNR grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepManifest {
    pub name: String,
    #[serde(default)]
    pub mode: CompareMode,
    #[serde(default = "default_target")]
    pub target_ber: f64,
    /// Shared grid; curves fall back to their own `snr_db` when empty.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_true")]
    pub simulate: bool,
    #[serde(default)]
    pub theory: bool,
    #[serde(default)]
    pub enumeration: Option<Enumeration>,
    #[serde(default)]
    pub bound: BoundOptions,
    #[serde(rename = "curve")]
    pub curves: Vec<CurveSpec>,
}

impl SweepManifest {
    pub fn from_toml(text: &str) -> Result<Self, SweepError> {
        toml::from_str(text).map_err(|e| SweepError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SweepError> {
        let text = fs::read_to_string(path).map_err(|e| SweepError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// Validate every curve and the rate rule; returns params per curve.
    pub fn validate(&self) -> Result<Vec<SystemParams>, SweepError> {
        if self.curves.is_empty() {
            return Err(SweepError::NoCurves);
        }
        let mut params = Vec::with_capacity(self.curves.len());
        for (i, c) in self.curves.iter().enumerate() {
            if self.curves[..i].iter().any(|o| o.label == c.label) {
                return Err(SweepError::DuplicateLabel(c.label.clone()));
            }
            let p = c.config.validate().map_err(|source| SweepError::Config {
                label: c.label.clone(),
                source,
            })?;
            if self.grid(c).is_empty() {
                return Err(SweepError::EmptyGrid(c.label.clone()));
            }
            params.push(p);
        }
        if self.mode == CompareMode::EqualRate {
            let expected = params[0].rate;
            for (c, p) in self.curves.iter().zip(&params) {
                if p.rate != expected {
                    return Err(SweepError::RateMismatch {
                        label: c.label.clone(),
                        rate: p.rate,
                        expected,
                    });
                }
            }
        }
        Ok(params)
    }

    pub fn grid<'a>(&'a self, curve: &'a CurveSpec) -> &'a [f64] {
        if self.snr_db.is_empty() {
            &curve.config.snr_db
        } else {
            &self.snr_db
        }
    }
}

/// SNR advantage of `first` over `second` at the target BER.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub first: String,
    pub second: String,
    pub source: GapSource,
    pub target_ber: f64,
    pub snr_first: Option<f64>,
    pub snr_second: Option<f64>,
    /// `snr_second - snr_first`; positive when `first` needs less SNR.
    pub advantage_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub name: String,
    pub mode: CompareMode,
    pub target_ber: f64,
    pub curves: Vec<BerCurve>,
    pub gaps: Vec<GapReport>,
}

/// Gap between two curves; simulation values are preferred when both curves
/// have them.
pub fn gap(first: &BerCurve, second: &BerCurve, target_ber: f64) -> GapReport {
    let has_sim = |c: &BerCurve| c.points.iter().any(|p| p.ber.is_some());
    let source = if has_sim(first) && has_sim(second) {
        GapSource::Simulation
    } else {
        GapSource::Theory
    };
    let a = first.snr_at(target_ber, source);
    let b = second.snr_at(target_ber, source);
    GapReport {
        first: first.label.clone(),
        second: second.label.clone(),
        source,
        target_ber,
        snr_first: a,
        snr_second: b,
        advantage_db: a.zip(b).map(|(a, b)| b - a),
    }
}

/// Run every curve of the manifest and measure all pairwise gaps.
pub fn compare(manifest: &SweepManifest, options: SimOptions) -> Result<Comparison, SweepError> {
    let params = manifest.validate()?;
    let mut curves = Vec::with_capacity(params.len());
    for (spec, p) in manifest.curves.iter().zip(&params) {
        let grid = manifest.grid(spec);
        let mut curve = if manifest.simulate {
            run_simulation(p, grid, options)
        } else {
            BerCurve::new(p, grid)
        }
        .with_label(spec.label.clone());
        if manifest.theory {
            in_pool(options.workers, || {
                run_theory(
                    &mut curve,
                    p,
                    manifest.enumeration.unwrap_or_default(),
                    manifest.bound,
                )
            })
            .map_err(|source| SweepError::Theory {
                label: spec.label.clone(),
                source,
            })?;
        }
        curves.push(curve);
    }
    let mut gaps = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            gaps.push(gap(&curves[i], &curves[j], manifest.target_ber));
        }
    }
    Ok(Comparison {
        name: manifest.name.clone(),
        mode: manifest.mode,
        target_ber: manifest.target_ber,
        curves,
        gaps,
    })
}

#[derive(Debug, Serialize)]
struct PointSummary {
    snr_db: f64,
    trials: u64,
    bit_errors: u64,
    ber: Option<f64>,
    theory_bound: Option<f64>,
    theory_std_error: Option<f64>,
    flag: PointFlag,
    wall_time_s: f64,
}

#[derive(Debug, Serialize)]
struct CurveSummary<'a> {
    label: &'a str,
    csv: String,
    scheme: String,
    rate: usize,
    fingerprint: &'a str,
    config: &'a SystemConfig,
    theory: Option<&'a TheoryInfo>,
    wall_time_s: f64,
    points: Vec<PointSummary>,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    name: &'a str,
    version: &'static str,
    mode: Option<CompareMode>,
    target_ber: Option<f64>,
    curves: Vec<CurveSummary<'a>>,
    gaps: &'a [GapReport],
}

fn csv_name(label: &str) -> String {
    let safe: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    format!("{safe}.csv")
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, SweepError> {
    fs::write(&path, contents).map_err(|e| SweepError::Io {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Ok(path)
}

/// Wide table with one BER and one bound column per curve.
pub fn plot_data(curves: &[BerCurve]) -> String {
    let mut grid: Vec<f64> = curves.iter().flat_map(|c| c.snr_grid()).collect();
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    let mut out = String::from("snr_db");
    for c in curves {
        out.push_str(&format!(",{0}:ber,{0}:bound", c.label));
    }
    out.push('\n');
    for s in grid {
        out.push_str(&s.to_string());
        for c in curves {
            let p = c.points.iter().find(|p| p.snr_db == s);
            let fmt = |v: Option<f64>| v.map(crate::curve::format_sig6).unwrap_or_default();
            out.push(',');
            out.push_str(&fmt(p.and_then(|p| p.ber)));
            out.push(',');
            out.push_str(&fmt(p.and_then(|p| p.theory_bound)));
        }
        out.push('\n');
    }
    out
}

/// Write one CSV per curve, `summary.json` and `<name>.plot.csv` under `dir`.
pub fn write_outputs(
    dir: &Path,
    name: &str,
    curves: &[BerCurve],
    comparison: Option<&Comparison>,
) -> Result<Vec<PathBuf>, SweepError> {
    fs::create_dir_all(dir).map_err(|e| SweepError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut written = Vec::new();
    let mut summaries = Vec::new();
    for c in curves {
        let file = csv_name(&c.label);
        written.push(write(dir.join(&file), &c.to_csv())?);
        summaries.push(CurveSummary {
            label: &c.label,
            csv: file,
            scheme: c.scheme.to_string(),
            rate: c.rate,
            fingerprint: &c.fingerprint,
            config: &c.config,
            theory: c.theory.as_ref(),
            wall_time_s: c.total_wall_time().as_secs_f64(),
            points: c
                .points
                .iter()
                .map(|p| PointSummary {
                    snr_db: p.snr_db,
                    trials: p.trials,
                    bit_errors: p.errors.total,
                    ber: p.ber,
                    theory_bound: p.theory_bound,
                    theory_std_error: p.theory_std_error,
                    flag: p.flag(),
                    wall_time_s: p.wall_time.as_secs_f64(),
                })
                .collect(),
        });
    }
    let summary = Summary {
        name,
        version: env!("CARGO_PKG_VERSION"),
        mode: comparison.map(|c| c.mode),
        target_ber: comparison.map(|c| c.target_ber),
        curves: summaries,
        gaps: comparison.map(|c| c.gaps.as_slice()).unwrap_or(&[]),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    written.push(write(dir.join("summary.json"), &json)?);
    written.push(write(dir.join(format!("{name}.plot.csv")), &plot_data(curves))?);
    Ok(written)
}
