use super::TheoryError;

/// Role of a receive antenna in a pairwise error event `(c, s) -> (c_hat, s_hat)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntennaCategory {
    /// In neither combination.
    Unselected,
    /// `c_l = c_hat_l = n` for group `l`.
    SelectedCorrect { group: usize },
    /// `c_l = n` but `c_hat_l = partner`.
    SwapSource { group: usize, partner: usize },
    /// `c_hat_l = n` but `c_l = partner`.
    SwapTarget { group: usize, partner: usize },
}

/// Classify antenna `n` (0-based) position-wise against `c` and `c_hat`.
///
/// An antenna that appears in both combinations at different positions has no
/// category and yields [`TheoryError::UnsupportedPair`].
pub fn classify_antenna(
    n: usize,
    c: &[usize],
    c_hat: &[usize],
) -> Result<AntennaCategory, TheoryError> {
    let in_c = c.iter().position(|&a| a == n);
    let in_hat = c_hat.iter().position(|&a| a == n);
    match (in_c, in_hat) {
        (None, None) => Ok(AntennaCategory::Unselected),
        (Some(l), Some(m)) if l == m => Ok(AntennaCategory::SelectedCorrect { group: l }),
        (Some(l), None) => Ok(AntennaCategory::SwapSource {
            group: l,
            partner: c_hat[l],
        }),
        (None, Some(l)) => Ok(AntennaCategory::SwapTarget {
            group: l,
            partner: c[l],
        }),
        (Some(_), Some(_)) => Err(TheoryError::UnsupportedPair {
            antenna: n,
            combination: c.to_vec(),
            decoded: c_hat.to_vec(),
        }),
    }
}

/// Whether every antenna of the pair falls into one of the categories.
pub fn pair_is_supported(c: &[usize], c_hat: &[usize]) -> bool {
    c.iter()
        .enumerate()
        .all(|(l, a)| c_hat.iter().position(|b| b == a).is_none_or(|m| m == l))
}
