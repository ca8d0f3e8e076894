//! Gaussian statistics of the difference vector `D = H(c) s - H(c_hat) s_hat`.
//!
//! `D` is stacked as a real vector `[Re D_1, Im D_1, ..., Re D_NR, Im D_NR]`.
//! Each RIS group contributes an independent sum of `N_g` i.i.d. element
//! terms, so mean and covariance are accumulated group by group from the
//! per-element moments of a CN(0, 1) channel with `E[beta] = sqrt(pi)/2` and
//! `Var[beta] = (4 - pi)/4`:
//!
//! * group `i` with `c_i = c_hat_i = a`: antenna `a` sees `beta (s_i - s_hat_i)`,
//!   every other antenna a circular term of variance `|s_i - s_hat_i|^2`;
//! * group `i` with `c_i != c_hat_i`: antenna `c_i` sees `beta s_i - g e^{j psi_hat} s_hat_i`,
//!   antenna `c_hat_i` the mirror image, the two are coupled through the shared
//!   phases, and every other antenna sees a circular term of variance
//!   `|s_i|^2 + |s_hat_i|^2`.
//!
//! Antennas coupled by some `c_i != c_hat_i` form the blocks of the covariance:
//! 2x2 for a lone antenna, 4x4 for a swapped pair.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::taxonomy::classify_antenna;
use super::TheoryError;

/// Variance of the interference a group steered elsewhere leaves on an antenna.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceModel {
    /// Exact second moments: `|s_i - s_hat_i|^2` when the group keeps its antenna.
    #[default]
    Exact,
    /// `|s_i|^2 + |s_hat_i|^2` for every group, whether or not its antenna changed.
    Simplified,
}

/// Treatment of pairs where an antenna sits in both combinations at different positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnsupportedPairs {
    /// Refuse them (the union bound leaves them out and counts them).
    #[default]
    Skip,
    /// Assemble them with the same group-wise moments; blocks may exceed 4x4.
    Include,
}

/// Mean vector and covariance of the stacked difference vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceStatistics {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    blocks: Vec<Vec<usize>>,
}

const MEAN_BETA: f64 = 0.886_226_925_452_758; // sqrt(pi) / 2
const VAR_BETA: f64 = (4.0 - PI) / 4.0;

impl DifferenceStatistics {
    /// Statistics with explicit block partition of the receive antennas.
    pub fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>, blocks: Vec<Vec<usize>>) -> Self {
        Self { mean, cov, blocks }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Antenna sets of the independent blocks.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Real coordinates covered by antenna block `b`.
    pub fn block_coords(&self, b: usize) -> Vec<usize> {
        self.blocks[b]
            .iter()
            .flat_map(|&n| [2 * n, 2 * n + 1])
            .collect()
    }

    pub fn block_mean(&self, b: usize) -> DVector<f64> {
        let idx = self.block_coords(b);
        DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]))
    }

    pub fn block_cov(&self, b: usize) -> DMatrix<f64> {
        let idx = self.block_coords(b);
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])])
    }

    /// Smallest covariance eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.cov
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric and PSD up to `1e-9 ||C||`.
    pub fn check_psd(&self) -> Result<(), TheoryError> {
        let asym = (&self.cov - self.cov.transpose()).abs().max();
        let scale = self.cov.abs().max().max(f64::MIN_POSITIVE);
        if asym > 1e-12 * scale {
            return Err(TheoryError::NotPsd {
                min_eigenvalue: f64::NAN,
            });
        }
        let min = self.min_eigenvalue();
        if min < -1e-9 * scale {
            return Err(TheoryError::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }
}

/// Assemble the statistics of `D` for `(c, s) -> (c_hat, s_hat)`.
///
/// Antenna indices are 0-based; `s` holds the equivalent received symbols.
pub fn assemble_statistics(
    c: &[usize],
    s: &[Complex64],
    c_hat: &[usize],
    s_hat: &[Complex64],
    group_len: usize,
    receive: usize,
    model: CovarianceModel,
    unsupported: UnsupportedPairs,
) -> Result<DifferenceStatistics, TheoryError> {
    assert_eq!(c.len(), s.len());
    assert_eq!(c_hat.len(), s_hat.len());
    assert_eq!(c.len(), c_hat.len());
    if unsupported == UnsupportedPairs::Skip {
        for n in 0..receive {
            classify_antenna(n, c, c_hat)?;
        }
    }

    let dim = 2 * receive;
    let ng = group_len as f64;
    let mut mean = DVector::<f64>::zeros(dim);
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    let mut parent: Vec<usize> = (0..receive).collect();

    let add_beta = |cov: &mut DMatrix<f64>, n: usize, z: Complex64| {
        let (r, i) = (2 * n, 2 * n + 1);
        cov[(r, r)] += ng * VAR_BETA * z.re * z.re;
        cov[(i, i)] += ng * VAR_BETA * z.im * z.im;
        cov[(r, i)] += ng * VAR_BETA * z.re * z.im;
        cov[(i, r)] += ng * VAR_BETA * z.re * z.im;
    };
    let add_iso = |cov: &mut DMatrix<f64>, n: usize, per_component: f64| {
        cov[(2 * n, 2 * n)] += per_component;
        cov[(2 * n + 1, 2 * n + 1)] += per_component;
    };

    for i in 0..c.len() {
        let (a, b) = (c[i], c_hat[i]);
        let (si, hi) = (s[i], s_hat[i]);
        let spread = match model {
            CovarianceModel::Exact if a == b => (si - hi).norm_sqr(),
            _ => si.norm_sqr() + hi.norm_sqr(),
        };
        for n in 0..receive {
            if n != a && n != b {
                add_iso(&mut cov, n, ng * spread / 2.0);
            }
        }
        if a == b {
            let d = si - hi;
            mean[2 * a] += ng * MEAN_BETA * d.re;
            mean[2 * a + 1] += ng * MEAN_BETA * d.im;
            add_beta(&mut cov, a, d);
            continue;
        }
        mean[2 * a] += ng * MEAN_BETA * si.re;
        mean[2 * a + 1] += ng * MEAN_BETA * si.im;
        mean[2 * b] -= ng * MEAN_BETA * hi.re;
        mean[2 * b + 1] -= ng * MEAN_BETA * hi.im;
        add_beta(&mut cov, a, si);
        add_iso(&mut cov, a, ng * hi.norm_sqr() / 2.0);
        add_beta(&mut cov, b, hi);
        add_iso(&mut cov, b, ng * si.norm_sqr() / 2.0);

        let k = ng * PI / 8.0;
        let rr = k * (-si.re * hi.re + si.im * hi.im);
        let ri = -k * (si.re * hi.im + hi.re * si.im);
        let cross = [[rr, ri], [ri, -rr]];
        for (u, row) in cross.iter().enumerate() {
            for (v, val) in row.iter().enumerate() {
                cov[(2 * a + u, 2 * b + v)] += val;
                cov[(2 * b + v, 2 * a + u)] += val;
            }
        }
        union(&mut parent, a, b);
    }

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut root_block = vec![usize::MAX; receive];
    for n in 0..receive {
        let r = find(&mut parent, n);
        if root_block[r] == usize::MAX {
            root_block[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[root_block[r]].push(n);
    }
    Ok(DifferenceStatistics { mean, cov, blocks })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}
