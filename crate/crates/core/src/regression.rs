//! Logarithmic least-squares fit y = slope * ln(x) + intercept over
//! (frequency, magnitude) points, plus the embedded 20-point reference
//! dataset of the ladder prototype's magnitude response.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RegressionError {
    #[error("need at least two points with distinct abscissae")]
    DegenerateAbscissae,
}

/// One magnitude-response sample: frequency in kHz, magnitude in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    pub f_khz: f64,
    pub mag_db: f64,
}

/// Result of the log-linear fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    /// dB per ln(kHz).
    pub slope: f64,
    /// dB at 1 kHz (ln x = 0).
    pub intercept: f64,
    /// Residual sum of squares, dB^2.
    pub rss: f64,
    pub r_squared: f64,
}

/// Embedded reference dataset: 20 points of the ladder prototype's
/// magnitude response, frequencies normalized to kHz.
pub fn reference_dataset() -> Vec<ResponsePoint> {
    const POINTS: [(f64, f64); 20] = [
        (10.0, 0.000),
        (20.0, 0.136),
        (40.0, 0.516),
        (100.0, 2.496),
        (174.48, 3.969),
        (236.56, 2.585),
        (297.23, 0.028),
        (397.63, -4.200),
        (615.77, -11.130),
        (1000.0, -20.060),
        (2000.0, -32.010),
        (3000.0, -38.080),
        (4000.0, -41.410),
        (5000.0, -43.640),
        (6000.0, -44.870),
        (7000.0, -45.770),
        (8000.0, -46.340),
        (9000.0, -47.020),
        (10000.0, -48.450),
        (15000.0, -48.460),
    ];
    POINTS
        .iter()
        .map(|&(f_khz, mag_db)| ResponsePoint { f_khz, mag_db })
        .collect()
}

/// Ordinary least squares of mag_db against ln(f_khz), centered form.
pub fn log_fit(points: &[ResponsePoint]) -> Result<LogFit, RegressionError> {
    if points.len() < 2 {
        return Err(RegressionError::DegenerateAbscissae);
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.f_khz.ln()).collect();
    let x_mean = lx.iter().sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.mag_db).sum::<f64>() / n;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, p) in lx.iter().zip(points) {
        let dx = x - x_mean;
        let dy = p.mag_db - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(RegressionError::DegenerateAbscissae);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let rss: f64 = lx
        .iter()
        .zip(points)
        .map(|(x, p)| {
            let r = p.mag_db - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - rss / syy };
    Ok(LogFit {
        slope,
        intercept,
        rss,
        r_squared,
    })
}

/// Evaluate the fitted model at f_khz.
pub fn fit_predict(fit: &LogFit, f_khz: f64) -> f64 {
    assert!(f_khz > 0.0, "frequency must be positive");
    fit.slope * f_khz.ln() + fit.intercept
}

/// The reference dataset as CSV with a `freq_khz,mag_db` header.
pub fn dataset_csv() -> String {
    let mut out = String::from("freq_khz,mag_db\n");
    for p in reference_dataset() {
        out.push_str(&format!("{},{}\n", p.f_khz, p.mag_db));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_dataset_rows() {
        let d = reference_dataset();
        assert_eq!(d.len(), 20);
        assert_eq!(
            d[0],
            ResponsePoint {
                f_khz: 10.0,
                mag_db: 0.0
            }
        );
        assert_eq!(
            d[4],
            ResponsePoint {
                f_khz: 174.48,
                mag_db: 3.969
            }
        );
        assert_eq!(
            d[19],
            ResponsePoint {
                f_khz: 15000.0,
                mag_db: -48.460
            }
        );
    }

    #[test]
    fn fit_reproduces_published_log_law() {
        let fit = log_fit(&reference_dataset()).unwrap();
        assert!((fit.slope + 9.087).abs() < 0.01, "slope {}", fit.slope);
        assert!(
            (fit.intercept - 38.758).abs() < 0.02,
            "intercept {}",
            fit.intercept
        );
        assert!(fit.rss >= 0.0);
        assert!(fit.r_squared <= 1.0);
        assert!((fit.r_squared - 0.852).abs() < 0.005);
    }

    #[test]
    fn two_point_fit_is_exact() {
        let e = std::f64::consts::E;
        let pts = [
            ResponsePoint {
                f_khz: e,
                mag_db: 0.0,
            },
            ResponsePoint {
                f_khz: e * e,
                mag_db: -1.0,
            },
        ];
        let fit = log_fit(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit.rss < 1e-24);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn exact_log_data_has_zero_residual() {
        let pts: Vec<ResponsePoint> = [0.5, 1.0, 4.0, 9.0, 120.0]
            .iter()
            .map(|&x| ResponsePoint {
                f_khz: x,
                mag_db: -3.25 * x.ln() + 7.5,
            })
            .collect();
        let fit = log_fit(&pts).unwrap();
        assert!(fit.rss < 1e-20);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert_eq!(
            log_fit(&[ResponsePoint {
                f_khz: 1.0,
                mag_db: 0.0
            }])
            .unwrap_err(),
            RegressionError::DegenerateAbscissae
        );
        let same_x = [
            ResponsePoint {
                f_khz: 2.0,
                mag_db: 0.0,
            },
            ResponsePoint {
                f_khz: 2.0,
                mag_db: 5.0,
            },
        ];
        assert_eq!(
            log_fit(&same_x).unwrap_err(),
            RegressionError::DegenerateAbscissae
        );
    }

    #[test]
    fn predict_at_unit_and_e() {
        let fit = LogFit {
            slope: -9.087,
            intercept: 38.758,
            rss: 0.0,
            r_squared: 1.0,
        };
        assert_eq!(fit_predict(&fit, 1.0), 38.758);
        assert!((fit_predict(&fit, std::f64::consts::E) - (38.758 - 9.087)).abs() < 1e-12);
        let at_15mhz = fit_predict(&fit, 15000.0);
        assert!((at_15mhz + 48.6).abs() < 0.1, "{at_15mhz}");
    }

    #[test]
    fn residuals_sum_to_zero_and_order_invariance() {
        let mut pts = reference_dataset();
        let fit = log_fit(&pts).unwrap();
        let resid_sum: f64 = pts
            .iter()
            .map(|p| p.mag_db - fit_predict(&fit, p.f_khz))
            .sum();
        assert!(resid_sum.abs() < 1e-9 * 50.0, "residual sum {resid_sum}");
        pts.reverse();
        pts.swap(3, 11);
        let fit2 = log_fit(&pts).unwrap();
        assert!((fit.slope - fit2.slope).abs() < 1e-12);
        assert!((fit.intercept - fit2.intercept).abs() < 1e-12);
    }

    #[test]
    fn abscissa_scaling_moves_only_the_intercept() {
        let base = reference_dataset();
        let scaled: Vec<ResponsePoint> = base
            .iter()
            .map(|p| ResponsePoint {
                f_khz: p.f_khz * 1000.0,
                mag_db: p.mag_db,
            })
            .collect();
        let f1 = log_fit(&base).unwrap();
        let f2 = log_fit(&scaled).unwrap();
        assert!((f1.slope - f2.slope).abs() < 1e-9);
        let expected_shift = -f1.slope * (1000f64).ln();
        assert!(((f2.intercept - f1.intercept) - expected_shift).abs() < 1e-9);
    }
}
