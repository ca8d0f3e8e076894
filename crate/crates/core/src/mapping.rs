//! Bit to index mappings: spatial bits to antenna combinations, symbol bits to
//! constellation points, and the full codebook of `2^R` codewords.
//!
//! Bit strings are read most-significant bit first. The first `m0` bits select
//! a combination row by natural binary value. For MUX schemes each following
//! `m1`-bit block belongs to one RIS group: the phase bits come first (Gray
//! labeled) and the ring bits last (natural binary). The diversity scheme
//! carries a single Gray-labeled PSK or QAM symbol after the spatial bits.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::config::{ConfigError, DiversityConstellation, Scheme, SystemParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MappingError {
    #[error("bit string has {got} bits, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("invalid bit string {0:?}")]
    Parse(String),
    #[error("codeword is not in the codebook: {0}")]
    NotInCodebook(String),
}

/// A short bit string stored MSB first in a `u64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bits {
    value: u64,
    len: usize,
}

impl Bits {
    pub fn new(value: u64, len: usize) -> Self {
        assert!(len <= 64, "bit strings are limited to 64 bits");
        let masked = if len == 64 {
            value
        } else {
            value & ((1u64 << len) - 1)
        };
        Self { value: masked, len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Self::new(value, bits.len())
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit `i`, counting from the most significant end.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.value >> (self.len - 1 - i)) & 1 == 1
    }

    /// Value of the `width` bits starting at position `start`.
    pub fn field(&self, start: usize, width: usize) -> u64 {
        assert!(start + width <= self.len);
        if width == 0 {
            return 0;
        }
        let shift = self.len - start - width;
        (self.value >> shift) & ((1u64 << width) - 1)
    }

    pub fn concat(self, other: Bits) -> Bits {
        Bits::new((self.value << other.len) | other.value, self.len + other.len)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

impl FromStr for Bits {
    type Err = MappingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() > 64 {
            return Err(MappingError::Parse(s.to_string()));
        }
        let mut value = 0u64;
        for ch in s.chars() {
            value = (value << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(MappingError::Parse(s.to_string())),
                };
        }
        Ok(Bits::new(value, s.len()))
    }
}

/// Binary-reflected Gray code of `index`.
pub fn gray_encode(index: u64) -> u64 {
    index ^ (index >> 1)
}

/// Inverse of [`gray_encode`].
pub fn gray_decode(mut label: u64) -> u64 {
    let mut index = label;
    while label > 0 {
        label >>= 1;
        index ^= label;
    }
    index
}

/// The `N_c` antenna combinations in use; row `i` is selected by spatial label `i`.
///
/// Antenna indices are stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinationTable {
    rows: Vec<Vec<usize>>,
    receive: usize,
    lookup: HashMap<Vec<usize>, usize>,
}

/// How the `N_c` combinations are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CombinationPolicy {
    /// The first `N_c` combinations in lexicographic order.
    Lexicographic,
    /// A user-supplied table with 1-based antenna indices.
    Explicit(Vec<Vec<usize>>),
}

impl CombinationTable {
    pub fn build(
        receive: usize,
        active: usize,
        count: usize,
        policy: &CombinationPolicy,
    ) -> Result<Self, ConfigError> {
        match policy {
            CombinationPolicy::Lexicographic => Ok(Self::lexicographic(receive, active, count)),
            CombinationPolicy::Explicit(rows) => Self::explicit(rows, receive, active, count),
        }
    }

    /// The table a validated config asks for.
    pub fn for_params(params: &SystemParams) -> Self {
        let policy = match &params.config.combinations {
            Some(rows) => CombinationPolicy::Explicit(rows.clone()),
            None => CombinationPolicy::Lexicographic,
        };
        Self::build(
            params.receive_antennas(),
            params.active_antennas(),
            params.num_combinations(),
            &policy,
        )
        .expect("table was checked during validation")
    }

    /// First `count` `active`-subsets of `0..receive` in lexicographic order.
    pub fn lexicographic(receive: usize, active: usize, count: usize) -> Self {
        let mut rows = Vec::with_capacity(count);
        let mut current: Vec<usize> = (0..active).collect();
        while rows.len() < count {
            rows.push(current.clone());
            // advance to the next combination
            let mut i = active;
            loop {
                if i == 0 {
                    assert!(rows.len() == count, "not enough combinations");
                    break;
                }
                i -= 1;
                if current[i] < receive - active + i {
                    current[i] += 1;
                    for j in i + 1..active {
                        current[j] = current[j - 1] + 1;
                    }
                    break;
                }
            }
        }
        Self::from_rows(rows, receive)
    }

    /// Validate a user table given with 1-based indices.
    pub fn explicit(
        rows: &[Vec<usize>],
        receive: usize,
        active: usize,
        count: usize,
    ) -> Result<Self, ConfigError> {
        if rows.len() != count {
            return Err(ConfigError::TableCardinality {
                got: rows.len(),
                expected: count,
            });
        }
        let mut seen: HashMap<&[usize], usize> = HashMap::new();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != active {
                return Err(ConfigError::TableRowLength {
                    row: r,
                    got: row.len(),
                    expected: active,
                });
            }
            if let Some(&bad) = row.iter().find(|&&a| a == 0 || a > receive) {
                return Err(ConfigError::TableOutOfRange {
                    row: r,
                    antenna: bad,
                    receive,
                });
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ConfigError::TableRowOrder { row: r });
            }
            if let Some(&first) = seen.get(row.as_slice()) {
                return Err(ConfigError::TableDuplicate { first, second: r });
            }
            seen.insert(row, r);
        }
        let zero_based = rows
            .iter()
            .map(|row| row.iter().map(|a| a - 1).collect())
            .collect();
        Ok(Self::from_rows(zero_based, receive))
    }

    fn from_rows(rows: Vec<Vec<usize>>, receive: usize) -> Self {
        let lookup = rows.iter().cloned().zip(0..).collect();
        Self {
            rows,
            receive,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn receive_antennas(&self) -> usize {
        self.receive
    }

    /// Row `index`, 0-based antennas.
    pub fn row(&self, index: usize) -> &[usize] {
        &self.rows[index]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Row with 1-based antenna indices, as printed in tables.
    pub fn row_one_based(&self, index: usize) -> Vec<usize> {
        self.rows[index].iter().map(|a| a + 1).collect()
    }

    /// Spatial label of a 0-based combination.
    pub fn index_of(&self, antennas: &[usize]) -> Option<usize> {
        self.lookup.get(antennas).copied()
    }
}

/// Bijections between symbol bits and constellation indices for the MUX schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolLabeling {
    pub phases: usize,
    pub rings: usize,
}

impl SymbolLabeling {
    pub fn new(phases: usize, rings: usize) -> Self {
        Self { phases, rings }
    }

    pub fn phase_bits(&self) -> usize {
        self.phases.trailing_zeros() as usize
    }

    pub fn ring_bits(&self) -> usize {
        self.rings.trailing_zeros() as usize
    }

    /// Phase index `0..M_p` carried by a Gray label.
    pub fn phase_index(&self, label: u64) -> usize {
        gray_decode(label) as usize
    }

    pub fn phase_label(&self, index: usize) -> u64 {
        gray_encode(index as u64)
    }

    /// Ring index `1..=M_r` carried by a natural-binary label.
    pub fn ring_index(&self, label: u64) -> usize {
        label as usize + 1
    }

    pub fn ring_label(&self, ring: usize) -> u64 {
        (ring - 1) as u64
    }

    /// Split one group's `m1` bits into `(phase index, ring index)`.
    pub fn decode(&self, group_bits: u64) -> (usize, usize) {
        let ring_bits = self.ring_bits();
        let ring_label = group_bits & ((1u64 << ring_bits) - 1);
        let phase_label = group_bits >> ring_bits;
        (self.phase_index(phase_label), self.ring_index(ring_label))
    }

    /// Inverse of [`SymbolLabeling::decode`].
    pub fn encode(&self, phase_index: usize, ring: usize) -> u64 {
        (self.phase_label(phase_index) << self.ring_bits()) | self.ring_label(ring)
    }
}

/// Transmitter constellation for the diversity scheme, indexed by bit label.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
}

impl Constellation {
    /// Unit-energy M-PSK, Gray labeled, first point at phase 0.
    pub fn psk(order: usize) -> Self {
        let points = (0..order as u64)
            .map(|label| {
                let idx = gray_decode(label) as f64;
                Complex64::from_polar(1.0, 2.0 * PI * idx / order as f64)
            })
            .collect();
        Self { points }
    }

    /// Square M-QAM with unit average energy; the upper half of the label is the
    /// in-phase Gray label and the lower half the quadrature Gray label.
    pub fn qam(order: usize) -> Self {
        let bits = order.trailing_zeros() as usize;
        assert!(bits.is_multiple_of(2) && bits > 0, "QAM order must be an even power of two");
        let half = bits / 2;
        let side = 1usize << half;
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let level = |label: u64| 2.0 * gray_decode(label) as f64 - (side as f64 - 1.0);
        let points = (0..order as u64)
            .map(|label| {
                let i = label >> half;
                let q = label & ((1u64 << half) - 1);
                Complex64::new(level(i) / scale, level(q) / scale)
            })
            .collect();
        Self { points }
    }

    pub fn for_params(params: &SystemParams) -> Option<Self> {
        if params.scheme() != Scheme::Diversity {
            return None;
        }
        let order = params.config.order;
        Some(match params.constellation {
            DiversityConstellation::Qam => Self::qam(order),
            _ => Self::psk(order),
        })
    }

    pub fn point(&self, label: u64) -> Complex64 {
        self.points[label as usize]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label_of(&self, point: Complex64) -> Option<u64> {
        self.points
            .iter()
            .position(|p| (p - point).norm() < 1e-9)
            .map(|i| i as u64)
    }
}

/// Per-group RIS state of one codeword.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSymbol {
    /// Phase index `0..M_p` selected by the group's phase bits.
    pub phase_index: usize,
    /// Ring index `1..=M_r`.
    pub ring: usize,
    /// Additional reflection phase, stagger offset included.
    pub phase: f64,
    /// Number of switched-on elements `a_l`.
    pub active: usize,
    /// Ring amplitude `rho_l = ring / M_r`.
    pub amplitude: f64,
}

/// One joint hypothesis: an antenna combination plus the symbols it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    /// Bit label value; the codeword carries `Bits::new(index, R)`.
    pub index: u64,
    /// Row of the combination table.
    pub combination: usize,
    /// Selected antennas `c`, 0-based, ascending.
    pub antennas: Vec<usize>,
    pub groups: Vec<GroupSymbol>,
    /// Symbol sent by the transmitter: the diversity symbol, or 1.
    pub carrier: Complex64,
    /// Label of the diversity symbol, when there is one.
    pub carrier_label: Option<u64>,
    /// Equivalent received symbols `s_l = sqrt(E_s) rho_l e^{j phase}` (times the carrier).
    pub symbols: Vec<Complex64>,
}

/// All `2^R` codewords of a configuration, indexed by bit label.
#[derive(Debug, Clone)]
pub struct Codebook {
    params: SystemParams,
    table: CombinationTable,
    labeling: SymbolLabeling,
    constellation: Option<Constellation>,
    words: Vec<Codeword>,
}

impl Codebook {
    pub fn new(params: &SystemParams) -> Self {
        let table = CombinationTable::for_params(params);
        Self::with_table(params, table)
    }

    pub fn with_table(params: &SystemParams, table: CombinationTable) -> Self {
        assert_eq!(table.len(), params.num_combinations());
        let labeling = SymbolLabeling::new(params.phases, params.rings);
        let constellation = Constellation::for_params(params);
        let mut book = Self {
            params: params.clone(),
            table,
            labeling,
            constellation,
            words: Vec::new(),
        };
        book.words = (0..params.codebook_size() as u64)
            .map(|v| book.build_word(Bits::new(v, params.rate)))
            .collect();
        book
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn table(&self) -> &CombinationTable {
        &self.table
    }

    pub fn labeling(&self) -> SymbolLabeling {
        self.labeling
    }

    pub fn constellation(&self) -> Option<&Constellation> {
        self.constellation.as_ref()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Codeword] {
        &self.words
    }

    pub fn word(&self, index: u64) -> &Codeword {
        &self.words[index as usize]
    }

    /// Map an `R`-bit string to its codeword.
    pub fn map_bits(&self, bits: Bits) -> Result<&Codeword, MappingError> {
        if bits.len() != self.params.rate {
            return Err(MappingError::LengthMismatch {
                got: bits.len(),
                expected: self.params.rate,
            });
        }
        Ok(&self.words[bits.value() as usize])
    }

    fn build_word(&self, bits: Bits) -> Codeword {
        let p = &self.params;
        let na = p.active_antennas();
        let sqrt_es = p.symbol_energy().sqrt();
        let combination = bits.field(0, p.spatial_bits) as usize;
        let antennas = self.table.row(combination).to_vec();
        let mut groups = Vec::with_capacity(na);
        let mut carrier = Complex64::new(1.0, 0.0);
        let mut carrier_label = None;
        match p.scheme() {
            Scheme::Rgssk | Scheme::Diversity => {
                if let Some(constellation) = &self.constellation {
                    let label = bits.field(p.spatial_bits, p.carrier_bits);
                    carrier = constellation.point(label);
                    carrier_label = Some(label);
                }
                for _ in 0..na {
                    groups.push(GroupSymbol {
                        phase_index: 0,
                        ring: 1,
                        phase: 0.0,
                        active: p.group_len,
                        amplitude: 1.0,
                    });
                }
            }
            Scheme::MuxPsk | Scheme::MuxApsk => {
                for l in 0..na {
                    let field = bits.field(p.spatial_bits + l * p.group_bits, p.group_bits);
                    let (phase_index, ring) = self.labeling.decode(field);
                    let phase = 2.0 * PI * phase_index as f64 / p.phases as f64
                        + p.stagger_offset(l);
                    groups.push(GroupSymbol {
                        phase_index,
                        ring,
                        phase,
                        active: ring * p.group_len / p.rings,
                        amplitude: ring as f64 / p.rings as f64,
                    });
                }
            }
        }
        let symbols = groups
            .iter()
            .map(|g| sqrt_es * carrier * Complex64::from_polar(g.amplitude, g.phase))
            .collect();
        Codeword {
            index: bits.value(),
            combination,
            antennas,
            groups,
            carrier,
            carrier_label,
            symbols,
        }
    }

    /// Recover the bit string carried by `cw`, from its antennas and symbol
    /// indices alone.
    pub fn unmap_codeword(&self, cw: &Codeword) -> Result<Bits, MappingError> {
        let p = &self.params;
        let not_found = || MappingError::NotInCodebook(format!("{cw:?}"));
        let row = self.table.index_of(&cw.antennas).ok_or_else(not_found)?;
        let mut bits = Bits::new(row as u64, p.spatial_bits);
        match p.scheme() {
            Scheme::Rgssk => {}
            Scheme::Diversity => {
                let label = cw.carrier_label.ok_or_else(not_found)?;
                if label as usize >= p.config.order {
                    return Err(not_found());
                }
                bits = bits.concat(Bits::new(label, p.carrier_bits));
            }
            Scheme::MuxPsk | Scheme::MuxApsk => {
                if cw.groups.len() != p.active_antennas() {
                    return Err(not_found());
                }
                for g in &cw.groups {
                    if g.phase_index >= p.phases || g.ring == 0 || g.ring > p.rings {
                        return Err(not_found());
                    }
                    let label = self.labeling.encode(g.phase_index, g.ring);
                    bits = bits.concat(Bits::new(label, p.group_bits));
                }
            }
        }
        Ok(bits)
    }
}
