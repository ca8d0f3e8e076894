//! RIS reflection coefficients for each scheme.
//!
//! Group `l` steers its elements at antenna `c_l` by cancelling the channel
//! phase `psi_{c_l, f(l, k)}`. MUX schemes add the group's symbol phase on top,
//! and APSK switches off the trailing `N_g - a_l` elements of the group.

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::{ChannelMatrix, GroupLayout};
use crate::config::{Scheme, SystemParams};
use crate::mapping::Codeword;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error("{encoder} encoder cannot serve the {scheme} scheme")]
    SchemeMismatch {
        encoder: &'static str,
        scheme: Scheme,
    },
    #[error("group {group} requests {active} active elements, not a multiple of {step} in 1..={group_len}")]
    InvalidActiveCount {
        group: usize,
        active: usize,
        step: usize,
        group_len: usize,
    },
}

/// Per-group metadata of a reflection vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupState {
    /// Additional phase applied on top of channel-phase cancellation.
    pub phase: f64,
    /// Switched-on elements, always the leading ones of the group.
    pub active: usize,
}

/// Length-`N` RIS coefficient vector; every entry has modulus 1 or is exactly 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionVector {
    coeffs: Vec<Complex64>,
    layout: GroupLayout,
    groups: Vec<GroupState>,
}

impl ReflectionVector {
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn layout(&self) -> GroupLayout {
        self.layout
    }

    pub fn groups(&self) -> &[GroupState] {
        &self.groups
    }

    /// Coefficients of group `l` (0-based).
    pub fn block(&self, group: usize) -> &[Complex64] {
        let len = self.layout.group_len;
        &self.coeffs[group * len..(group + 1) * len]
    }

    /// `G(n, block l) p_l`: what group `l` delivers to antenna `n`.
    pub fn group_response(&self, ch: &ChannelMatrix, n: usize, group: usize) -> Complex64 {
        let start = group * self.layout.group_len;
        self.block(group)
            .iter()
            .enumerate()
            .map(|(k, p)| ch.get(n, start + k) * p)
            .sum()
    }

    pub fn zeros(layout: GroupLayout) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); layout.elements()],
            layout,
            groups: vec![
                GroupState {
                    phase: 0.0,
                    active: 0,
                };
                layout.groups
            ],
        }
    }
}

fn build(cw: &Codeword, ch: &ChannelMatrix, layout: GroupLayout, states: Vec<GroupState>) -> ReflectionVector {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); layout.elements()];
    for (l, state) in states.iter().enumerate() {
        let target = cw.antennas[l];
        let extra = Complex64::from_polar(1.0, state.phase);
        for k in 0..state.active {
            let j = layout.column(l, k);
            coeffs[j] = ch.steering(target, j) * extra;
        }
    }
    ReflectionVector {
        coeffs,
        layout,
        groups: states,
    }
}

/// Diversity and RGSSK: pure phase cancellation, every element on.
pub fn encode_diversity(
    cw: &Codeword,
    ch: &ChannelMatrix,
    params: &SystemParams,
) -> Result<ReflectionVector, EncodeError> {
    if !matches!(params.scheme(), Scheme::Diversity | Scheme::Rgssk) {
        return Err(EncodeError::SchemeMismatch {
            encoder: "diversity",
            scheme: params.scheme(),
        });
    }
    let layout = GroupLayout::from_params(params);
    let states = vec![
        GroupState {
            phase: 0.0,
            active: layout.group_len,
        };
        layout.groups
    ];
    Ok(build(cw, ch, layout, states))
}

/// MUX-PSK: each group adds its symbol phase (stagger offset included).
pub fn encode_mux_psk(
    cw: &Codeword,
    ch: &ChannelMatrix,
    params: &SystemParams,
) -> Result<ReflectionVector, EncodeError> {
    if params.scheme() != Scheme::MuxPsk {
        return Err(EncodeError::SchemeMismatch {
            encoder: "mux-psk",
            scheme: params.scheme(),
        });
    }
    let layout = GroupLayout::from_params(params);
    let states = cw
        .groups
        .iter()
        .map(|g| GroupState {
            phase: g.phase,
            active: layout.group_len,
        })
        .collect();
    Ok(build(cw, ch, layout, states))
}

/// MUX-APSK: symbol phase plus `a_l` leading elements switched on.
pub fn encode_mux_apsk(
    cw: &Codeword,
    ch: &ChannelMatrix,
    params: &SystemParams,
) -> Result<ReflectionVector, EncodeError> {
    if params.scheme() != Scheme::MuxApsk {
        return Err(EncodeError::SchemeMismatch {
            encoder: "mux-apsk",
            scheme: params.scheme(),
        });
    }
    let layout = GroupLayout::from_params(params);
    let step = layout.group_len / params.rings;
    let mut states = Vec::with_capacity(layout.groups);
    for (l, g) in cw.groups.iter().enumerate() {
        if g.active == 0 || g.active > layout.group_len || g.active % step != 0 {
            return Err(EncodeError::InvalidActiveCount {
                group: l,
                active: g.active,
                step,
                group_len: layout.group_len,
            });
        }
        states.push(GroupState {
            phase: g.phase,
            active: g.active,
        });
    }
    Ok(build(cw, ch, layout, states))
}

/// Dispatch on the configured scheme.
pub fn encode(
    cw: &Codeword,
    ch: &ChannelMatrix,
    params: &SystemParams,
) -> Result<ReflectionVector, EncodeError> {
    match params.scheme() {
        Scheme::Diversity | Scheme::Rgssk => encode_diversity(cw, ch, params),
        Scheme::MuxPsk => encode_mux_psk(cw, ch, params),
        Scheme::MuxApsk => encode_mux_apsk(cw, ch, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use crate::mapping::Codebook;
    use crate::rng::stream_rng;
    use std::f64::consts::PI;

    fn wrap(a: f64) -> f64 {
        (a + PI).rem_euclid(2.0 * PI) - PI
    }

    #[test]
    fn diversity_sum_is_real_positive() {
        let p = SystemConfig::new(Scheme::Diversity, 64, 5, 2, 16)
            .validate()
            .unwrap();
        let book = Codebook::new(&p);
        let ch = ChannelMatrix::sample(5, 64, &mut stream_rng(3, 0, 0));
        for cw in book.words().iter().step_by(7) {
            let pv = encode_diversity(cw, &ch, &p).unwrap();
            for l in 0..2 {
                let r = pv.group_response(&ch, cw.antennas[l], l);
                let beta_sum: f64 = (0..32).map(|k| ch.amplitude(cw.antennas[l], l * 32 + k)).sum();
                assert!(r.im.abs() < 1e-12);
                assert!((r.re - beta_sum).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mux_psk_sum_carries_symbol_phase() {
        let p = SystemConfig::new(Scheme::MuxPsk, 64, 5, 2, 8)
            .validate()
            .unwrap();
        let book = Codebook::new(&p);
        let ch = ChannelMatrix::sample(5, 64, &mut stream_rng(4, 0, 0));
        for cw in book.words().iter().step_by(5) {
            let pv = encode_mux_psk(cw, &ch, &p).unwrap();
            for l in 0..2 {
                let r = pv.group_response(&ch, cw.antennas[l], l);
                assert!(wrap(r.arg() - cw.groups[l].phase).abs() < 1e-12);
            }
        }
        // stagger on, N_a = 2: offset of group 2 is pi / M
        assert!((p.stagger_offset(1) - PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn psk_without_phase_equals_diversity() {
        let psk = SystemConfig::new(Scheme::MuxPsk, 64, 5, 2, 4)
            .with_stagger(false)
            .validate()
            .unwrap();
        let rgssk = SystemConfig::new(Scheme::Rgssk, 64, 5, 2, 1)
            .validate()
            .unwrap();
        let ch = ChannelMatrix::sample(5, 64, &mut stream_rng(8, 0, 0));
        let bp = Codebook::new(&psk);
        let br = Codebook::new(&rgssk);
        for row in 0..8u64 {
            let a = encode_mux_psk(bp.word(row << 4), &ch, &psk).unwrap();
            let b = encode_diversity(br.word(row), &ch, &rgssk).unwrap();
            assert_eq!(a.coeffs(), b.coeffs());
        }
    }

    #[test]
    fn apsk_inner_ring_switches_off_trailing_elements() {
        let p = SystemConfig::new(Scheme::MuxApsk, 64, 5, 2, 8)
            .with_rings(2)
            .validate()
            .unwrap();
        let book = Codebook::new(&p);
        let ch = ChannelMatrix::sample(5, 64, &mut stream_rng(2, 0, 0));
        let cw = book.map_bits("000000001".parse().unwrap()).unwrap();
        let pv = encode_mux_apsk(cw, &ch, &p).unwrap();
        let block = pv.block(0);
        assert_eq!(block.iter().filter(|z| z.norm() > 0.0).count(), 16);
        assert!(block[..16].iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!(block[16..].iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert_eq!(pv.block(1).iter().filter(|z| z.norm() > 0.0).count(), 32);
    }

    #[test]
    fn apsk_single_ring_matches_psk() {
        let apsk = SystemConfig::new(Scheme::MuxApsk, 64, 5, 2, 8)
            .with_rings(1)
            .validate()
            .unwrap();
        let psk = SystemConfig::new(Scheme::MuxPsk, 64, 5, 2, 8)
            .validate()
            .unwrap();
        let ch = ChannelMatrix::sample(5, 64, &mut stream_rng(6, 0, 0));
        let (ba, bp) = (Codebook::new(&apsk), Codebook::new(&psk));
        for i in (0..512).step_by(13) {
            let a = encode_mux_apsk(ba.word(i), &ch, &apsk).unwrap();
            let b = encode_mux_psk(bp.word(i), &ch, &psk).unwrap();
            assert_eq!(a.coeffs(), b.coeffs());
        }
    }

    #[test]
    fn scheme_mismatch_and_bad_activation() {
        let p = SystemConfig::new(Scheme::MuxApsk, 64, 5, 2, 8)
            .with_rings(2)
            .validate()
            .unwrap();
        let book = Codebook::new(&p);
        let ch = ChannelMatrix::sample(5, 64, &mut stream_rng(2, 0, 0));
        assert!(matches!(
            encode_diversity(book.word(0), &ch, &p),
            Err(EncodeError::SchemeMismatch { .. })
        ));
        assert!(encode_mux_psk(book.word(0), &ch, &p).is_err());
        let mut cw = book.word(0).clone();
        cw.groups[0].active = 10;
        assert!(matches!(
            encode_mux_apsk(&cw, &ch, &p),
            Err(EncodeError::InvalidActiveCount { active: 10, .. })
        ));
    }
}
