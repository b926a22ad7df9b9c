//! Damped Gauss-Newton (Levenberg-style) solver for two-parameter least squares.

use crate::{Error, Result};

/// A least-squares problem in two parameters.
pub(crate) trait TwoParamModel {
    fn len(&self) -> usize;
    /// Residual `observed - fitted` at observation `i` and the gradient of
    /// the fitted value with respect to the parameters.
    fn residual(&self, i: usize, params: [f64; 2]) -> (f64, [f64; 2]);

    fn ssr(&self, params: [f64; 2]) -> f64 {
        (0..self.len())
            .map(|i| {
                let (r, _) = self.residual(i, params);
                r * r
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers SSR by less than this fraction.
    pub ssr_rel_tol: f64,
    /// Stop when every component of the proposed step is below this.
    pub step_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            max_iterations: 200,
            ssr_rel_tol: 1e-12,
            step_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Fit {
    pub params: [f64; 2],
    pub ssr: f64,
    pub iterations: usize,
}

const LAMBDA_MAX: f64 = 1e20;

/// `J'J` and `J'r` at `params`.
pub(crate) fn normal_equations<M: TwoParamModel>(model: &M, params: [f64; 2]) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut a = [[0.0; 2]; 2];
    let mut g = [0.0; 2];
    for i in 0..model.len() {
        let (r, j) = model.residual(i, params);
        a[0][0] += j[0] * j[0];
        a[0][1] += j[0] * j[1];
        a[1][1] += j[1] * j[1];
        g[0] += j[0] * r;
        g[1] += j[1] * r;
    }
    a[1][0] = a[0][1];
    (a, g)
}

pub(crate) fn invert2(a: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    Some([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

pub(crate) fn fit<M: TwoParamModel>(model: &M, init: [f64; 2], settings: Settings) -> Result<Fit> {
    let mut params = init;
    let mut ssr = model.ssr(params);
    if !ssr.is_finite() {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    let mut lambda = 1e-3;

    for iteration in 1..=settings.max_iterations {
        if ssr == 0.0 {
            return Ok(Fit {
                params,
                ssr,
                iterations: iteration - 1,
            });
        }
        let (a, g) = normal_equations(model, params);
        loop {
            let mut damped = a;
            for k in 0..2 {
                damped[k][k] += lambda * if a[k][k] > 0.0 { a[k][k] } else { 1.0 };
            }
            let Some(inv) = invert2(damped) else {
                lambda *= 10.0;
                if lambda > LAMBDA_MAX {
                    return Err(Error::NoConvergence { iterations: iteration });
                }
                continue;
            };
            let step = [inv[0][0] * g[0] + inv[0][1] * g[1], inv[1][0] * g[0] + inv[1][1] * g[1]];
            if step[0].abs() < settings.step_tol && step[1].abs() < settings.step_tol {
                return Ok(Fit {
                    params,
                    ssr,
                    iterations: iteration,
                });
            }
            let candidate = [params[0] + step[0], params[1] + step[1]];
            let candidate_ssr = model.ssr(candidate);
            if candidate_ssr.is_finite() && candidate_ssr <= ssr {
                let improvement = ssr - candidate_ssr;
                params = candidate;
                let previous = ssr;
                ssr = candidate_ssr;
                lambda = (lambda / 10.0).max(1e-12);
                if improvement <= settings.ssr_rel_tol * previous {
                    return Ok(Fit {
                        params,
                        ssr,
                        iterations: iteration,
                    });
                }
                break;
            }
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                return Err(Error::NoConvergence { iterations: iteration });
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: settings.max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// y = a * exp(b * x)
    struct Exponential<'a> {
        x: &'a [f64],
        y: &'a [f64],
    }

    impl TwoParamModel for Exponential<'_> {
        fn len(&self) -> usize {
            self.x.len()
        }

        fn residual(&self, i: usize, p: [f64; 2]) -> (f64, [f64; 2]) {
            let e = crate::math::exp(p[1] * self.x[i]);
            (self.y[i] - p[0] * e, [e, p[0] * self.x[i] * e])
        }
    }

    #[test]
    fn fits_exponential_from_a_distant_start() {
        let x: std::vec::Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let y: std::vec::Vec<f64> = x.iter().map(|x| 2.5 * crate::math::exp(-1.3 * x)).collect();
        let fit = fit(&Exponential { x: &x, y: &y }, [1.0, 0.5], Settings::default()).unwrap();
        assert!((fit.params[0] - 2.5).abs() < 1e-9, "{:?}", fit.params);
        assert!((fit.params[1] + 1.3).abs() < 1e-9);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 2.0];
        let s = Settings {
            max_iterations: 1,
            ssr_rel_tol: 0.0,
            step_tol: 0.0,
        };
        let err = fit(&Exponential { x: &x, y: &y }, [10.0, 3.0], s).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }
}
