use convergence_core::convergence::{beta_convergence, beta_from_slope, dispersion_row, half_life};
use convergence_core::ingest::AnalysisSample;
use convergence_core::oracle::{brute_force_beta, synth_growth_sample, GrowthSampleSpec, SeededRng};
use convergence_core::stats::VarianceNorm;
use proptest::prelude::*;

/// Ordinary least squares of annualised growth on log initial income.
fn ols(sample: &AnalysisSample) -> (f64, f64) {
    let s = sample.horizon();
    let x: Vec<f64> = sample.rows().iter().map(|r| r.y_start.ln()).collect();
    let g: Vec<f64> = sample.rows().iter().map(|r| (r.y_end / r.y_start).ln() / s).collect();
    let n = x.len() as f64;
    let (mx, mg) = (x.iter().sum::<f64>() / n, g.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&g).map(|(x, g)| (x - mx) * (g - mg)).sum();
    let sxx: f64 = x.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    (mg - b * mx, b)
}

fn growth_spec() -> impl Strategy<Value = GrowthSampleSpec> {
    (
        -0.05f64..0.08,
        -0.04f64..0.02,
        prop::sample::select(vec![10, 19, 20]),
        20usize..300,
        0.0f64..0.03,
        any::<u64>(),
    )
        .prop_map(|(b0, beta, s, n, sd, seed)| GrowthSampleSpec::new(b0, beta, s, n, sd, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn nlls_agrees_with_linear_reparameterisation(spec in growth_spec()) {
        let sample = synth_growth_sample(&spec).unwrap();
        let est = beta_convergence(&sample, true).unwrap();
        let (a, b) = ols(&sample);
        prop_assert!((est.slope() - b).abs() < 1e-8, "slope {} vs {}", est.slope(), b);
        prop_assert!((est.beta0 - a).abs() < 1e-8);
        let back = beta_from_slope(b, sample.horizon()).unwrap();
        prop_assert!((est.beta - back).abs() < 1e-8);
    }

    #[test]
    fn beta_is_invariant_to_income_scale(spec in growth_spec(), c in 1e-3f64..1e3) {
        let sample = synth_growth_sample(&spec).unwrap();
        let base = beta_convergence(&sample, true).unwrap();
        let scaled = beta_convergence(&sample.scaled(c).unwrap(), true).unwrap();
        prop_assert!((base.beta - scaled.beta).abs() < 1e-10);
        prop_assert!((scaled.beta0 - (base.beta0 - base.slope() * c.ln())).abs() < 1e-8);
    }

    #[test]
    fn nlls_never_loses_to_the_grid(spec in growth_spec()) {
        let sample = synth_growth_sample(&spec).unwrap();
        let est = beta_convergence(&sample, true).unwrap();
        let grid = brute_force_beta(&sample, (-0.1, 0.1), 1e-4).unwrap();
        prop_assert!(grid.ssr >= est.ssr - 1e-9);
        prop_assert!((grid.beta - est.beta).abs() <= 1e-4 + 1e-12, "{} vs {}", grid.beta, est.beta);
    }

    #[test]
    fn half_life_falls_as_convergence_speeds_up(a in 1e-4f64..0.3, b in 1e-4f64..0.3, s in 1.0f64..40.0) {
        prop_assume!((a - b).abs() > 1e-9);
        let (slow, fast) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(half_life(-fast, s).unwrap() < half_life(-slow, s).unwrap());
    }

    #[test]
    fn dispersion_is_scale_free(incomes in prop::collection::vec(1.0f64..1e5, 10..80), c in 1e-3f64..1e3) {
        let base = dispersion_row(2000, &incomes, VarianceNorm::Population).unwrap();
        let scaled: Vec<f64> = incomes.iter().map(|y| y * c).collect();
        let other = dispersion_row(2000, &scaled, VarianceNorm::Population).unwrap();
        for (x, y) in [
            (base.p90_p10, other.p90_p10),
            (base.p90_p50, other.p90_p50),
            (base.p50_p10, other.p50_p10),
            (base.income_ratio, other.income_ratio),
        ] {
            prop_assert!((x / y - 1.0).abs() < 1e-12);
        }
        prop_assert!((base.var_log - other.var_log).abs() < 1e-10);
        prop_assert_eq!(base.p90_p10, base.p90_p50 * base.p50_p10);
    }
}

#[test]
fn robust_and_classical_errors_agree_under_homoskedasticity() {
    let mut seeds = SeededRng::new(7);
    for _ in 0..20 {
        let spec = GrowthSampleSpec::new(0.1, -0.01, 20, 400, 0.01, seeds.next_u64());
        let sample = synth_growth_sample(&spec).unwrap();
        let robust = beta_convergence(&sample, true).unwrap();
        let classical = beta_convergence(&sample, false).unwrap();
        assert_eq!(robust.beta, classical.beta);
        let ratio = robust.se_beta / classical.se_beta;
        assert!((ratio - 1.0).abs() < 0.15, "ratio {ratio}");
    }
}

#[test]
fn true_beta_of_zero_is_rejected_about_five_percent_of_the_time() {
    let reps = 1000;
    let rejections = (0..reps)
        .filter(|seed| {
            let spec = GrowthSampleSpec::new(0.02, 0.0, 20, 200, 0.01, *seed);
            let est = beta_convergence(&synth_growth_sample(&spec).unwrap(), true).unwrap();
            est.t_stat().abs() > 1.96
        })
        .count();
    let rate = rejections as f64 / reps as f64;
    // Binomial sd at p = 0.05 over 1000 draws is about 0.007.
    assert!((0.025..=0.08).contains(&rate), "rejection rate {rate}");
}
