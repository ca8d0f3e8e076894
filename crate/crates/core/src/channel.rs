//! Flat Rayleigh fading between RIS elements and receive antennas.

use std::io::{self, Read, Write};

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::config::SystemParams;
use crate::rng::complex_gaussian;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("group index {group} or element index {element} out of range")]
    IndexOutOfRange { group: usize, element: usize },
    #[error("channel dump is truncated or malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Partition of the `N` RIS elements into `N_a` consecutive groups of `N_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupLayout {
    pub groups: usize,
    pub group_len: usize,
}

impl GroupLayout {
    pub fn new(groups: usize, group_len: usize) -> Self {
        Self { groups, group_len }
    }

    pub fn from_params(params: &SystemParams) -> Self {
        Self::new(params.active_antennas(), params.group_len)
    }

    /// 1-based column of element `element` in group `group`: `(group - 1) N_g + element`.
    pub fn element_index(&self, group: usize, element: usize) -> Result<usize, ChannelError> {
        if group == 0 || group > self.groups || element == 0 || element > self.group_len {
            return Err(ChannelError::IndexOutOfRange { group, element });
        }
        Ok((group - 1) * self.group_len + element)
    }

    /// 0-based column of 0-based `(group, element)`.
    #[inline]
    pub fn column(&self, group: usize, element: usize) -> usize {
        group * self.group_len + element
    }

    pub fn elements(&self) -> usize {
        self.groups * self.group_len
    }
}

/// `N_R x N` channel realization, stored row-major.
///
/// Entries are `g = beta e^{-j psi}`; amplitude and phase are derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    /// i.i.d. CN(0, 1) entries drawn row by row from `rng`.
    pub fn sample<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| complex_gaussian(rng, 1.0))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, n: usize, j: usize) -> Complex64 {
        self.data[n * self.cols + j]
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.cols..(n + 1) * self.cols]
    }

    /// `beta_{n,j} = |G(n, j)|`.
    pub fn amplitude(&self, n: usize, j: usize) -> f64 {
        self.get(n, j).norm()
    }

    /// `psi_{n,j} = -arg G(n, j)`.
    pub fn phase(&self, n: usize, j: usize) -> f64 {
        -self.get(n, j).arg()
    }

    /// `e^{j psi_{n,j}}`, the phase-cancelling factor for antenna `n`.
    #[inline]
    pub fn steering(&self, n: usize, j: usize) -> Complex64 {
        let g = self.get(n, j);
        let r = g.norm();
        if r > 0.0 {
            g.conj() / r
        } else {
            Complex64::new(1.0, 0.0)
        }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Little-endian dump: `rows: u64`, `cols: u64`, then row-major `(re, im)` f64 pairs.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), ChannelError> {
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        for z in &self.data {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, ChannelError> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut R, what: &str| -> Result<[u8; 8], ChannelError> {
            r.read_exact(&mut word)
                .map_err(|_| ChannelError::Malformed(format!("missing {what}")))?;
            Ok(word)
        };
        let rows = u64::from_le_bytes(next(&mut r, "row count")?) as usize;
        let cols = u64::from_le_bytes(next(&mut r, "column count")?) as usize;
        let len = rows
            .checked_mul(cols)
            .filter(|&n| n <= 1 << 28)
            .ok_or_else(|| ChannelError::Malformed(format!("dimensions {rows}x{cols}")))?;
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            let re = f64::from_le_bytes(next(&mut r, "entry")?);
            let im = f64::from_le_bytes(next(&mut r, "entry")?);
            data.push(Complex64::new(re, im));
        }
        Ok(Self { rows, cols, data })
    }
}

/// Draw one channel realization for `params` from `rng`.
pub fn sample_channel<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ChannelMatrix {
    ChannelMatrix::sample(params.receive_antennas(), params.elements(), rng)
}
