use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use super::StatsError;

/// Options for [`chi_square_gof`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GofOptions {
    /// Classes whose expected count falls below this are pooled.
    pub pool_threshold: f64,
    pub alpha: f64,
    /// Extra degrees of freedom removed for estimated parameters.
    pub ddof: u32,
}

impl Default for GofOptions {
    fn default() -> Self {
        Self {
            pool_threshold: 5.0,
            alpha: 0.05,
            ddof: 0,
        }
    }
}

/// One (possibly pooled) class of a goodness-of-fit table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiClass {
    pub labels: Vec<String>,
    pub observed: u64,
    pub expected: f64,
    pub contribution: f64,
}

impl ChiClass {
    pub fn label(&self) -> String {
        self.labels.join("+")
    }

    pub fn deviation(&self) -> f64 {
        self.observed as f64 - self.expected
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub classes: Vec<ChiClass>,
    pub statistic: f64,
    pub df: u32,
    pub critical: f64,
    pub alpha: f64,
    pub model_holds: bool,
}

impl ChiSquareResult {
    pub fn p_value(&self) -> f64 {
        1.0 - chi_square_cdf(self.statistic, self.df)
    }
}

/// Pearson goodness of fit. Classes are taken in the given (scale) order; a
/// class with expected count below the threshold is merged into its
/// successor, or into its predecessor when it is last, until every class
/// clears the threshold or only two remain.
pub fn chi_square_gof(
    observed: &[u64],
    expected: &[f64],
    labels: &[String],
    opts: &GofOptions,
) -> Result<ChiSquareResult, StatsError> {
    if observed.len() != expected.len() || observed.len() != labels.len() {
        return Err(StatsError::DimensionMismatch {
            left: observed.len(),
            right: expected.len().min(labels.len()),
        });
    }
    if observed.len() < 2 {
        return Err(StatsError::TooFewClasses(observed.len()));
    }
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(StatsError::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {}",
            opts.alpha
        )));
    }
    if let Some((index, &value)) = expected
        .iter()
        .enumerate()
        .find(|(_, e)| !(e.is_finite() && **e > 0.0))
    {
        return Err(StatsError::NonPositiveExpected { index, value });
    }
    let obs_total = observed.iter().sum::<u64>() as f64;
    let exp_total: f64 = expected.iter().sum();
    if (obs_total - exp_total).abs() > 0.5 {
        return Err(StatsError::TotalMismatch {
            observed: obs_total,
            expected: exp_total,
        });
    }

    let mut pooled: Vec<(Vec<String>, u64, f64)> = labels
        .iter()
        .zip(observed)
        .zip(expected)
        .map(|((l, &o), &e)| (vec![l.clone()], o, e))
        .collect();
    while pooled.len() > 2 {
        let Some(i) = pooled.iter().position(|c| c.2 < opts.pool_threshold) else {
            break;
        };
        let (keep, gone) = if i + 1 < pooled.len() {
            (i, i + 1)
        } else {
            (i - 1, i)
        };
        let (labels, o, e) = pooled.remove(gone);
        let target = &mut pooled[keep];
        target.0.extend(labels);
        target.1 += o;
        target.2 += e;
    }

    let classes: Vec<ChiClass> = pooled
        .into_iter()
        .map(|(labels, observed, expected)| {
            let d = observed as f64 - expected;
            ChiClass {
                labels,
                observed,
                expected,
                contribution: d * d / expected,
            }
        })
        .collect();
    let df = (classes.len() as u32 - 1).saturating_sub(opts.ddof);
    if df == 0 {
        return Err(StatsError::TooFewClasses(classes.len()));
    }
    let statistic = classes.iter().map(|c| c.contribution).sum();
    let critical = chi_square_critical(df, opts.alpha);
    Ok(ChiSquareResult {
        classes,
        statistic,
        df,
        critical,
        alpha: opts.alpha,
        model_holds: statistic < critical,
    })
}

/// CDF of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_cdf(x: f64, df: u32) -> f64 {
    1.0 - chi_square_sf(x, df)
}

fn chi_square_sf(x: f64, df: u32) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_ur(f64::from(df) / 2.0, x / 2.0)
}

/// Upper-`alpha` quantile of chi-square(`df`), found by bisection on the
/// survival function.
///
/// # Panics
///
/// If `df == 0` or `alpha` is outside `(0, 1)`.
pub fn chi_square_critical(df: u32, alpha: f64) -> f64 {
    assert!(df >= 1, "degrees of freedom must be positive");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let mut lo = 0.0;
    let mut hi = f64::from(df).max(1.0);
    while chi_square_sf(hi, df) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_square_sf(mid, df) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    const NOTES: [&str; 7] = ["S", "R", "G", "M", "D", "n", "N"];

    #[test]
    fn tabulated_critical_values() {
        assert!((chi_square_critical(6, 0.05) - 12.592).abs() < 1e-3);
        assert!((chi_square_critical(5, 0.05) - 11.070).abs() < 1e-3);
        assert!((chi_square_critical(1, 0.05) - 3.841).abs() < 1e-3);
        assert!((chi_square_critical(2, 0.05) - 5.991).abs() < 1e-3);
        assert!((chi_square_critical(10, 0.01) - 23.209).abs() < 1e-3);
    }

    #[test]
    fn critical_value_df1_by_quadrature() {
        // For one degree of freedom, P(X <= x) = 2 * Phi(sqrt x) - 1, i.e. the
        // integral of sqrt(2/pi) exp(-u^2/2) over [0, sqrt x]. Composite
        // Simpson, then bisection on x.
        fn cdf(x: f64) -> f64 {
            let b = x.sqrt();
            let n = 20_000;
            let h = b / n as f64;
            let f = |u: f64| (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * u * u).exp();
            let mut s = f(0.0) + f(b);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        }
        let (mut lo, mut hi) = (1.0, 10.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < 0.95 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((oracle - 3.841).abs() < 1e-3);
        assert!((chi_square_critical(1, 0.05) - oracle).abs() < 1e-8);
    }

    #[test]
    fn critical_monotone() {
        for alpha in [0.01, 0.05, 0.1, 0.5] {
            let values: Vec<f64> = (1..40).map(|df| chi_square_critical(df, alpha)).collect();
            assert!(values.windows(2).all(|w| w[0] < w[1]), "alpha {alpha}");
        }
        for df in [1, 3, 6, 25] {
            let values: Vec<f64> = [0.001, 0.01, 0.05, 0.1, 0.5, 0.9]
                .iter()
                .map(|&a| chi_square_critical(df, a))
                .collect();
            assert!(values.windows(2).all(|w| w[0] > w[1]), "df {df}");
        }
    }

    #[test]
    fn first_phase_table() {
        let observed = [31, 13, 17, 10, 8, 8, 23];
        let expected = [
            29.830460, 14.915230, 20.042330, 10.720270, 5.127100, 7.457560, 21.906720,
        ];
        let r = chi_square_gof(
            &observed,
            &expected,
            &labels(&NOTES),
            &GofOptions::default(),
        )
        .unwrap();
        assert_eq!(r.classes.len(), 7);
        assert_eq!(r.df, 6);
        assert!((r.critical - 12.592).abs() < 1e-3);
        assert!(r.model_holds);
        // row contributions that can be checked digit for digit
        assert!((r.classes[0].contribution - 0.045853).abs() < 1e-6);
        assert!((r.classes[4].contribution - 1.609790).abs() < 1e-6);
        // (10 - 10.72027)^2 / 10.72027
        assert!((r.classes[3].contribution - 0.518789 / 10.72027).abs() < 1e-6);
        assert!((r.statistic - 2.505795).abs() < 1e-6);
    }

    #[test]
    fn second_phase_table() {
        let observed = [34, 17, 22, 7, 4, 5, 26];
        let expected = [
            31.186390, 15.593195, 20.953345, 11.207555, 5.360150, 7.796540, 22.902480,
        ];
        let r = chi_square_gof(
            &observed,
            &expected,
            &labels(&NOTES),
            &GofOptions::default(),
        )
        .unwrap();
        assert_eq!(r.df, 6);
        assert!(r.model_holds);
        assert!((r.classes[3].contribution - 1.579605).abs() < 1e-6);
        assert!((r.statistic - 3.779816).abs() < 1e-6);
    }

    #[test]
    fn third_phase_pools_dha_and_komal_ni() {
        let observed = [8, 6, 16, 11, 1, 6, 7];
        let expected = [
            14.915230, 7.457615, 10.021165, 5.360135, 2.563550, 3.728780, 10.953360,
        ];
        let r = chi_square_gof(
            &observed,
            &expected,
            &labels(&NOTES),
            &GofOptions::default(),
        )
        .unwrap();
        assert_eq!(r.classes.len(), 6);
        assert_eq!(r.classes[4].labels, labels(&["D", "n"]));
        assert_eq!(r.classes[4].observed, 7);
        assert!((r.classes[4].expected - 6.292330).abs() < 1e-9);
        assert!((r.classes[4].contribution - 0.079588).abs() < 1e-6);
        assert_eq!(r.df, 5);
        assert!((r.critical - 11.070).abs() < 1e-3);
        assert!((r.statistic - 14.49879).abs() < 5e-3);
        assert!(!r.model_holds);
    }

    #[test]
    fn last_class_pools_backwards() {
        let r = chi_square_gof(
            &[10, 10, 2],
            &[10.0, 9.0, 3.0],
            &labels(&["a", "b", "c"]),
            &GofOptions::default(),
        )
        .unwrap();
        assert_eq!(r.classes.len(), 2);
        assert_eq!(r.classes[1].labels, labels(&["b", "c"]));
        assert_eq!(r.classes[1].observed, 12);
        assert_eq!(r.df, 1);
    }

    #[test]
    fn pooling_stops_at_two_classes() {
        let r = chi_square_gof(
            &[1, 1, 1],
            &[1.0, 1.0, 1.0],
            &labels(&["a", "b", "c"]),
            &GofOptions::default(),
        )
        .unwrap();
        assert_eq!(r.classes.len(), 2);
        assert_eq!(r.df, 1);
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn errors() {
        let l = labels(&["a", "b"]);
        assert!(matches!(
            chi_square_gof(&[1], &[1.0], &l[..1], &GofOptions::default()),
            Err(StatsError::TooFewClasses(1))
        ));
        assert!(matches!(
            chi_square_gof(&[1, 1], &[2.0, 0.0], &l, &GofOptions::default()),
            Err(StatsError::NonPositiveExpected { index: 1, .. })
        ));
        assert!(matches!(
            chi_square_gof(&[1, 1], &[5.0, 5.0], &l, &GofOptions::default()),
            Err(StatsError::TotalMismatch { .. })
        ));
        assert!(matches!(
            chi_square_gof(&[1, 1, 1], &[1.0, 1.0], &l, &GofOptions::default()),
            Err(StatsError::DimensionMismatch { .. })
        ));
        let ddof = GofOptions {
            ddof: 1,
            ..GofOptions::default()
        };
        assert!(matches!(
            chi_square_gof(&[10, 10], &[10.0, 10.0], &l, &ddof),
            Err(StatsError::TooFewClasses(2))
        ));
    }

    #[test]
    fn ddof_reduces_degrees_of_freedom() {
        let opts = GofOptions {
            ddof: 2,
            ..GofOptions::default()
        };
        let r = chi_square_gof(
            &[10, 10, 10, 10],
            &[10.0; 4],
            &labels(&["a", "b", "c", "d"]),
            &opts,
        )
        .unwrap();
        assert_eq!(r.df, 1);
    }

    #[test]
    fn pooling_preserves_totals() {
        let observed = [0, 3, 40, 1, 2, 0, 4];
        let expected = [1.0, 2.0, 38.0, 3.0, 1.0, 2.0, 3.0];
        let r = chi_square_gof(
            &observed,
            &expected,
            &labels(&NOTES),
            &GofOptions::default(),
        )
        .unwrap();
        assert_eq!(r.classes.iter().map(|c| c.observed).sum::<u64>(), 50);
        let e: f64 = r.classes.iter().map(|c| c.expected).sum();
        assert!((e - 50.0).abs() < 1e-12);
        assert!(r.classes.iter().all(|c| c.expected >= 5.0) || r.classes.len() == 2);
        let total: f64 = r.classes.iter().map(|c| c.contribution).sum();
        assert!((total - r.statistic).abs() < 1e-9);
    }

    #[test]
    fn p_value_at_critical_is_alpha() {
        let r = chi_square_gof(
            &[30, 20],
            &[25.0, 25.0],
            &labels(&["a", "b"]),
            &GofOptions::default(),
        )
        .unwrap();
        assert!((1.0 - chi_square_cdf(r.critical, r.df) - 0.05).abs() < 1e-9);
        assert!((r.statistic - 2.0).abs() < 1e-12);
        assert!(r.p_value() > 0.05);
    }
}
