//! Input construction: perpetual-inventory capital, steady-state seeding, the
//! share of capital that is undepreciated initial stock, and the Mincer map
//! from schooling years to a human-capital index.

use alloc::vec::Vec;

use crate::math::{exp, powi};
use crate::{Error, Result};

/// Depreciation rate used by the undepreciated-capital diagnostic.
pub const DEFAULT_DEPRECIATION: f64 = 0.05;

/// Investment flows accumulated after `base_year`.
///
/// `flows[j]` is investment in year `base_year + 1 + j`; the stock in
/// `base_year` itself is the caller-supplied initial capital.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InvestmentSeries {
    pub base_year: i32,
    pub flows: Vec<f64>,
}

impl InvestmentSeries {
    pub fn new(base_year: i32, flows: Vec<f64>) -> Result<Self> {
        if flows.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some((index, value)) = flows.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativeInvestment { index, value: *value });
        }
        Ok(InvestmentSeries { base_year, flows })
    }
}

/// Capital stocks for `base_year ..= base_year + len - 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CapitalPath {
    pub base_year: i32,
    pub delta: f64,
    pub stocks: Vec<f64>,
}

impl CapitalPath {
    pub fn last_year(&self) -> i32 {
        self.base_year + self.stocks.len() as i32 - 1
    }

    pub fn stock(&self, year: i32) -> Result<f64> {
        if year < self.base_year || year > self.last_year() {
            return Err(Error::PathYearOutOfRange {
                year,
                first: self.base_year,
                last: self.last_year(),
            });
        }
        Ok(self.stocks[(year - self.base_year) as usize])
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("depreciation rate must lie in (0, 1)"));
    }
    Ok(())
}

/// `K_base = k0`, then `K_t = I_t + (1 - delta) K_{t-1}`.
pub fn pim(inv: &InvestmentSeries, delta: f64, k0: f64) -> Result<CapitalPath> {
    check_delta(delta)?;
    if !(k0 > 0.0) {
        return Err(Error::InvalidParameter("initial capital must be positive"));
    }
    if let Some((index, value)) = inv.flows.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeInvestment { index, value: *value });
    }
    let mut stocks = Vec::with_capacity(inv.flows.len() + 1);
    stocks.push(k0);
    let mut k = k0;
    for i in &inv.flows {
        k = i + (1.0 - delta) * k;
        stocks.push(k);
    }
    Ok(CapitalPath {
        base_year: inv.base_year,
        delta,
        stocks,
    })
}

/// Steady-state initial stock `i0 / (delta + g)`.
///
/// With `i0` the first accumulated flow and flows growing at `g`, the stock
/// entering each period stays at `1 / (delta + g)` times that period's
/// investment.
pub fn k0_steady_state(i0: f64, delta: f64, g: f64) -> Result<f64> {
    if !(delta + g > 0.0) {
        return Err(Error::InvalidParameter("delta + g must be positive"));
    }
    if !(i0 >= 0.0) {
        return Err(Error::NegativeInvestment { index: 0, value: i0 });
    }
    Ok(i0 / (delta + g))
}

/// Fraction of `K_to` that is undepreciated stock from `from`:
/// `(1 - delta)^(to - from) K_from / K_to`.
pub fn undepreciated_share(path: &CapitalPath, from: i32, to: i32) -> Result<f64> {
    if from > to {
        return Err(Error::InvalidParameter("from_year must not exceed to_year"));
    }
    let k_from = path.stock(from)?;
    let k_to = path.stock(to)?;
    Ok(powi(1.0 - path.delta, to - from) * k_from / k_to)
}

/// Mincer returns per year of schooling on `[0,4]`, `(4,8]` and above 8.
pub const MINCER_RETURNS: [f64; 3] = [0.134, 0.101, 0.068];

/// `exp(phi(s))` with piecewise-linear `phi`.
pub fn mincer_hc(schooling_years: f64) -> Result<f64> {
    if !(schooling_years >= 0.0) {
        return Err(Error::InvalidParameter("schooling years must be non-negative"));
    }
    let segments = [(0.0, 4.0), (4.0, 8.0), (8.0, f64::INFINITY)];
    let phi: f64 = segments
        .iter()
        .zip(MINCER_RETURNS)
        .map(|((lo, hi), r)| r * (schooling_years.min(*hi) - lo).max(0.0))
        .sum();
    Ok(exp(phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn steady_state_investment_keeps_capital_flat() {
        let k0 = 250.0;
        let inv = InvestmentSeries::new(1970, vec![0.07 * k0; 40]).unwrap();
        let path = pim(&inv, 0.07, k0).unwrap();
        assert!(path.stocks.iter().all(|k| (k - k0).abs() < 1e-9));
    }

    #[test]
    fn pure_decay() {
        let inv = InvestmentSeries::new(2000, vec![0.0, 0.0]).unwrap();
        let path = pim(&inv, 0.1, 100.0).unwrap();
        assert!((path.stock(2002).unwrap() - 81.0).abs() < 1e-12);
        assert_eq!(path.last_year(), 2002);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            InvestmentSeries::new(2000, vec![1.0, -2.0]),
            Err(Error::NegativeInvestment { index: 1, .. })
        ));
        let raw = InvestmentSeries {
            base_year: 2000,
            flows: vec![-1.0],
        };
        assert!(pim(&raw, 0.05, 1.0).is_err());
        let inv = InvestmentSeries::new(2000, vec![1.0]).unwrap();
        assert!(pim(&inv, 0.0, 1.0).is_err());
        assert!(pim(&inv, 0.05, 0.0).is_err());
    }

    #[test]
    fn steady_state_k0() {
        assert!((k0_steady_state(10.0, 0.05, 0.05).unwrap() - 100.0).abs() < 1e-12);
        assert!((k0_steady_state(10.0, 0.05, 0.0).unwrap() - 200.0).abs() < 1e-12);
        assert!(k0_steady_state(10.0, 0.05, -0.05).is_err());
    }

    #[test]
    fn undepreciated_share_cases() {
        let inv = InvestmentSeries::new(1970, vec![5.0; 30]).unwrap();
        let path = pim(&inv, 0.05, 100.0).unwrap();
        assert_eq!(undepreciated_share(&path, 1985, 1985).unwrap(), 1.0);
        // steady state: K constant, share = 0.95^30
        let s = undepreciated_share(&path, 1970, 2000).unwrap();
        assert!((s - 0.95f64.powi(30)).abs() < 1e-12);
        assert!((s - 0.2146).abs() < 5e-5);
        assert!(undepreciated_share(&path, 1960, 2000).is_err());
        assert!(undepreciated_share(&path, 1990, 1980).is_err());
    }

    #[test]
    fn mincer_values() {
        assert_eq!(mincer_hc(0.0).unwrap(), 1.0);
        assert!(mincer_hc(-0.5).is_err());
    }
}
