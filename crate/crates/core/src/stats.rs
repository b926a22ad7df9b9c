//! Order statistics and moments shared by the dispersion and decomposition code.

use crate::{Error, Result};

/// Normalisation of second moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum VarianceNorm {
    /// Divide by N.
    #[default]
    Population,
    /// Divide by N - 1.
    Sample,
}

impl VarianceNorm {
    fn divisor(self, n: usize) -> f64 {
        match self {
            VarianceNorm::Population => n as f64,
            VarianceNorm::Sample => (n - 1) as f64,
        }
    }
}

/// Percentile of an ascending series by linear interpolation between order
/// statistics at rank `r = (p / 100) * (N - 1)`.
pub fn percentile_value(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySeries);
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]), "series must be sorted");
    value_at_rank(sorted, p)
}

/// Reads `values` at the fractional rank implied by percentile `p`.
///
/// `values` is indexed by rank of some ordering variable; it does not itself
/// need to be sorted. This is how companion variables are read off the
/// income-sorted distribution.
pub fn value_at_rank(values: &[f64], p: f64) -> Result<f64> {
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::PercentileOutOfRange(p));
    }
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    if n == 1 {
        return Ok(values[0]);
    }
    let rank = p / 100.0 * (n - 1) as f64;
    let lo = crate::math::floor(rank) as usize;
    if lo >= n - 1 {
        return Ok(values[n - 1]);
    }
    let frac = rank - lo as f64;
    if frac == 0.0 {
        return Ok(values[lo]);
    }
    Ok(values[lo] + frac * (values[lo + 1] - values[lo]))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn variance(values: &[f64], norm: VarianceNorm) -> f64 {
    covariance(values, values, norm)
}

pub fn covariance(a: &[f64], b: &[f64], norm: VarianceNorm) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let ma = mean(a);
    let mb = mean(b);
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    s / norm.divisor(n)
}
