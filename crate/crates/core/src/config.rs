//! System parameterization and validation.
//!
//! A [`SystemConfig`] is what users write in a config file. [`SystemConfig::validate`]
//! checks the structural constraints of the scheme and produces [`SystemParams`],
//! which carries the derived quantities (group size, bit budget, rate) used by
//! every other module.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// All selected antennas receive the same transmitter-modulated symbol.
    Diversity,
    /// Each RIS group imposes its own PSK phase on its selected antenna.
    MuxPsk,
    /// Each RIS group imposes a phase and switches off elements to set a ring amplitude.
    MuxApsk,
    /// Spatial bits only: unit symbol on every selected antenna.
    Rgssk,
}

impl Scheme {
    pub fn is_mux(self) -> bool {
        matches!(self, Scheme::MuxPsk | Scheme::MuxApsk)
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scheme::Diversity => "diversity",
            Scheme::MuxPsk => "mux-psk",
            Scheme::MuxApsk => "mux-apsk",
            Scheme::Rgssk => "rgssk",
        };
        f.write_str(s)
    }
}

/// Constellation used by the diversity scheme's transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiversityConstellation {
    /// PSK for M <= 8, square QAM for M in {16, 64, 256}.
    #[default]
    Auto,
    Psk,
    Qam,
}

/// Hypothesis model used by the ML detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorModel {
    /// Hypotheses are built from the exact reflection pattern, including the
    /// partial group sums of switched-off APSK elements.
    #[default]
    Exact,
    /// Hypotheses use full group sums scaled by the ring amplitude (the
    /// large-group approximation of the APSK symbol).
    Clt,
}

fn default_one() -> usize {
    1
}

fn default_energy() -> f64 {
    1.0
}

fn default_trials() -> u64 {
    100_000
}

fn default_max_errors() -> u64 {
    1_000
}

/// Full parameterization of one scheme instance, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub scheme: Scheme,
    /// Number of RIS elements `N`.
    pub elements: usize,
    /// Number of receive antennas `N_R`.
    pub receive_antennas: usize,
    /// Number of selected antennas per channel use `N_a`.
    pub active_antennas: usize,
    /// Modulation order `M`. Ignored by `rgssk`.
    #[serde(default = "default_one")]
    pub order: usize,
    /// APSK ring count `M_r`; `mux-apsk` only.
    #[serde(default = "default_one")]
    pub rings: usize,
    #[serde(default = "default_energy")]
    pub symbol_energy: f64,
    /// Per-group phase staggering for MUX schemes. Defaults to on for MUX, off otherwise.
    #[serde(default)]
    pub stagger: Option<bool>,
    #[serde(default)]
    pub diversity_constellation: DiversityConstellation,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Maximum Monte Carlo trials per SNR point.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Stop an SNR point once this many bit errors have accumulated.
    #[serde(default = "default_max_errors")]
    pub max_bit_errors: u64,
    /// Explicit antenna combination table, 1-based, one row per spatial label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combinations: Option<Vec<Vec<usize>>>,
}

impl SystemConfig {
    /// A config with library defaults for everything but the geometry.
    pub fn new(
        scheme: Scheme,
        elements: usize,
        receive_antennas: usize,
        active_antennas: usize,
        order: usize,
    ) -> Self {
        Self {
            scheme,
            elements,
            receive_antennas,
            active_antennas,
            order,
            rings: 1,
            symbol_energy: 1.0,
            stagger: None,
            diversity_constellation: DiversityConstellation::Auto,
            detector: DetectorModel::Exact,
            snr_db: Vec::new(),
            seed: 0,
            trials: default_trials(),
            max_bit_errors: default_max_errors(),
            combinations: None,
        }
    }

    pub fn with_rings(mut self, rings: usize) -> Self {
        self.rings = rings;
        self
    }

    pub fn with_stagger(mut self, stagger: bool) -> Self {
        self.stagger = Some(stagger);
        self
    }

    pub fn with_combinations(mut self, rows: Vec<Vec<usize>>) -> Self {
        self.combinations = Some(rows);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_snr_db(mut self, grid: Vec<f64>) -> Self {
        self.snr_db = grid;
        self
    }

    pub fn with_stopping(mut self, trials: u64, max_bit_errors: u64) -> Self {
        self.trials = trials;
        self.max_bit_errors = max_bit_errors;
        self
    }

    /// Parse a TOML config document.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Check every structural constraint and derive the bit budget.
    pub fn validate(&self) -> Result<SystemParams, ConfigError> {
        SystemParams::new(self.clone())
    }
}

/// Largest supported rate; the ML detector and the union bound enumerate `2^R` codewords.
pub const MAX_RATE: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("{field} must be positive")]
    Zero { field: &'static str },
    #[error("active antennas {active} exceed floor(N_R/2) = {limit} for N_R = {receive}")]
    TooManyActive {
        active: usize,
        receive: usize,
        limit: usize,
    },
    #[error("{elements} RIS elements cannot be split into {active} equal groups")]
    UnevenGroups { elements: usize, active: usize },
    #[error("{field} = {value} is not a power of two")]
    NotPowerOfTwo { field: &'static str, value: usize },
    #[error("APSK order {order} is not divisible by the ring count {rings}")]
    RingsNotDividingOrder { order: usize, rings: usize },
    #[error("ring count {rings} does not divide the group size {group_len}")]
    RingsNotDividingGroup { rings: usize, group_len: usize },
    #[error("rings = {0} is only meaningful for mux-apsk")]
    RingsWithoutApsk(usize),
    #[error("C({receive}, {active}) < 2: no spatial bits")]
    NoSpatialBits { receive: usize, active: usize },
    #[error("rate {rate} exceeds the supported maximum of {max} bits per channel use")]
    RateTooLarge { rate: usize, max: usize },
    #[error("diversity constellation {kind:?} cannot realize order {order}")]
    UnsupportedConstellation {
        kind: DiversityConstellation,
        order: usize,
    },
    #[error("symbol energy must be finite and positive, got {0}")]
    BadEnergy(f64),
    #[error("SNR grid contains a non-finite value")]
    BadSnr,
    #[error("combination table has {got} rows, expected {expected}")]
    TableCardinality { got: usize, expected: usize },
    #[error("combination table row {row} has {got} entries, expected {expected}")]
    TableRowLength {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("combination table row {row} is not strictly ascending")]
    TableRowOrder { row: usize },
    #[error("combination table row {row} references antenna {antenna} outside 1..={receive}")]
    TableOutOfRange {
        row: usize,
        antenna: usize,
        receive: usize,
    },
    #[error("combination table rows {first} and {second} are identical")]
    TableDuplicate { first: usize, second: usize },
}

/// A validated configuration with derived quantities.
///
/// Only constructed through [`SystemConfig::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub config: SystemConfig,
    /// Elements per group `N_g`.
    pub group_len: usize,
    /// Spatial bits `m0`.
    pub spatial_bits: usize,
    /// Symbol bits carried per group `m1` (MUX); zero otherwise.
    pub group_bits: usize,
    /// Bits carried by the transmitter symbol (diversity); zero otherwise.
    pub carrier_bits: usize,
    /// Phases per ring `M_p` (MUX), or 1.
    pub phases: usize,
    /// Rings `M_r` (APSK), or 1.
    pub rings: usize,
    /// Total bits per channel use `R`.
    pub rate: usize,
    /// Whether per-group phase offsets are applied.
    pub stagger: bool,
    /// Resolved diversity constellation (`Psk` or `Qam`); `Auto` for other schemes.
    pub constellation: DiversityConstellation,
}

impl SystemParams {
    fn new(config: SystemConfig) -> Result<Self, ConfigError> {
        let n = config.elements;
        let nr = config.receive_antennas;
        let na = config.active_antennas;
        if n == 0 {
            return Err(ConfigError::Zero { field: "elements" });
        }
        if nr == 0 {
            return Err(ConfigError::Zero {
                field: "receive_antennas",
            });
        }
        if na == 0 {
            return Err(ConfigError::Zero {
                field: "active_antennas",
            });
        }
        if na > nr / 2 {
            return Err(ConfigError::TooManyActive {
                active: na,
                receive: nr,
                limit: nr / 2,
            });
        }
        if !n.is_multiple_of(na) {
            return Err(ConfigError::UnevenGroups {
                elements: n,
                active: na,
            });
        }
        let group_len = n / na;
        if !(config.symbol_energy.is_finite() && config.symbol_energy > 0.0) {
            return Err(ConfigError::BadEnergy(config.symbol_energy));
        }
        if config.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(ConfigError::BadSnr);
        }

        let combos = binomial(nr, na);
        if combos < 2 {
            return Err(ConfigError::NoSpatialBits {
                receive: nr,
                active: na,
            });
        }
        let spatial_bits = floor_log2(combos);

        let order = config.order;
        let mut rings = 1;
        let mut phases = 1;
        let mut group_bits = 0;
        let mut carrier_bits = 0;
        let mut constellation = DiversityConstellation::Auto;
        match config.scheme {
            Scheme::Rgssk => {}
            Scheme::Diversity | Scheme::MuxPsk | Scheme::MuxApsk => {
                if order < 2 {
                    return Err(ConfigError::Zero { field: "order" });
                }
                check_pow2("order", order)?;
            }
        }
        if config.scheme != Scheme::MuxApsk && config.rings != 1 {
            return Err(ConfigError::RingsWithoutApsk(config.rings));
        }
        match config.scheme {
            Scheme::Rgssk => {}
            Scheme::Diversity => {
                carrier_bits = log2(order);
                constellation = resolve_constellation(config.diversity_constellation, order)?;
            }
            Scheme::MuxPsk => {
                phases = order;
                group_bits = log2(order);
            }
            Scheme::MuxApsk => {
                rings = config.rings;
                if rings == 0 {
                    return Err(ConfigError::Zero { field: "rings" });
                }
                check_pow2("rings", rings)?;
                if !order.is_multiple_of(rings) {
                    return Err(ConfigError::RingsNotDividingOrder { order, rings });
                }
                phases = order / rings;
                check_pow2("phases", phases)?;
                if !group_len.is_multiple_of(rings) {
                    return Err(ConfigError::RingsNotDividingGroup { rings, group_len });
                }
                group_bits = log2(order);
            }
        }
        let rate = spatial_bits + na * group_bits + carrier_bits;
        if rate > MAX_RATE {
            return Err(ConfigError::RateTooLarge {
                rate,
                max: MAX_RATE,
            });
        }
        let stagger = config.scheme.is_mux() && config.stagger.unwrap_or(true);

        let params = Self {
            group_len,
            spatial_bits,
            group_bits,
            carrier_bits,
            phases,
            rings,
            rate,
            stagger,
            constellation,
            config,
        };
        if let Some(rows) = &params.config.combinations {
            crate::mapping::CombinationTable::explicit(rows, nr, na, params.num_combinations())?;
        }
        Ok(params)
    }

    pub fn scheme(&self) -> Scheme {
        self.config.scheme
    }

    pub fn elements(&self) -> usize {
        self.config.elements
    }

    pub fn receive_antennas(&self) -> usize {
        self.config.receive_antennas
    }

    pub fn active_antennas(&self) -> usize {
        self.config.active_antennas
    }

    /// Combinations in use, `N_c = 2^m0`.
    pub fn num_combinations(&self) -> usize {
        1 << self.spatial_bits
    }

    /// Codebook size `2^R`.
    pub fn codebook_size(&self) -> usize {
        1 << self.rate
    }

    /// Symbol bits per channel use (everything after the spatial bits).
    pub fn symbol_bits(&self) -> usize {
        self.rate - self.spatial_bits
    }

    pub fn symbol_energy(&self) -> f64 {
        self.config.symbol_energy
    }

    /// Noise variance per receive antenna at `snr_db`, with SNR = E_s / N_0.
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        self.symbol_energy() * 10f64.powf(-snr_db / 10.0)
    }

    /// Phase offset applied to group `l` (0-based) when staggering is on.
    pub fn stagger_offset(&self, group: usize) -> f64 {
        if !self.stagger {
            return 0.0;
        }
        let na = self.active_antennas() as f64;
        group as f64 * 2.0 * std::f64::consts::PI / (na * self.phases as f64)
    }
}

fn resolve_constellation(
    kind: DiversityConstellation,
    order: usize,
) -> Result<DiversityConstellation, ConfigError> {
    let square = log2(order).is_multiple_of(2);
    match kind {
        DiversityConstellation::Auto if order <= 8 => Ok(DiversityConstellation::Psk),
        DiversityConstellation::Auto if matches!(order, 16 | 64 | 256) => {
            Ok(DiversityConstellation::Qam)
        }
        DiversityConstellation::Psk => Ok(DiversityConstellation::Psk),
        DiversityConstellation::Qam if square && order >= 4 => Ok(DiversityConstellation::Qam),
        _ => Err(ConfigError::UnsupportedConstellation { kind, order }),
    }
}

fn check_pow2(field: &'static str, value: usize) -> Result<(), ConfigError> {
    if value.is_power_of_two() {
        Ok(())
    } else {
        Err(ConfigError::NotPowerOfTwo { field, value })
    }
}

fn log2(value: usize) -> usize {
    value.trailing_zeros() as usize
}

fn floor_log2(value: u128) -> usize {
    (127 - value.leading_zeros()) as usize
}

/// Binomial coefficient, exact for the antenna counts of interest.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
