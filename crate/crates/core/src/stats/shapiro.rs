//! Shapiro–Wilk normality test, following Royston's 1995 approximation
//! (the AS R94 algorithm): normal-score weights with polynomial
//! corrections for the two extreme coefficients, and a normalising
//! transform of W whose parameters depend on the sample size.

use super::dist::{normal_cdf, normal_ppf};
use super::{StatResult, StatsError};

const MAX_N: usize = 5000;

fn poly(coefs: &[f64], x: f64) -> f64 {
    // coefs[0] + coefs[1] x + coefs[2] x² + ...
    coefs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Shapiro–Wilk test for departure from normality. Requires 3 ≤ n ≤ 5000
/// and a non-constant sample.
pub fn shapiro_wilk(values: &[f64]) -> Result<StatResult, StatsError> {
    let n = values.len();
    if !(3..=MAX_N).contains(&n) {
        return Err(StatsError::OutOfRangeN { n, min: 3, max: MAX_N });
    }
    let mut x: Vec<f64> = values.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let range = x[n - 1] - x[0];
    if range <= 0.0 {
        return Err(StatsError::ConstantInput);
    }

    // Expected normal order statistics (Blom approximation) and their
    // normalised weights.
    let nf = n as f64;
    let m: Vec<f64> = (1..=n)
        .map(|i| normal_ppf((i as f64 - 0.375) / (nf + 0.25)))
        .collect();
    let ssq_m: f64 = m.iter().map(|v| v * v).sum();
    let rsn = 1.0 / nf.sqrt();

    let mut a = vec![0.0; n];
    let norm = ssq_m.sqrt();
    let a_n = poly(&[0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056], rsn) + m[n - 1] / norm;
    let (phi, a_n1) = if n > 5 {
        let a_n1 =
            poly(&[0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633], rsn) + m[n - 2] / norm;
        let phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2])
            / (1.0 - 2.0 * a_n * a_n - 2.0 * a_n1 * a_n1);
        (phi, Some(a_n1))
    } else {
        let phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * a_n * a_n);
        (phi, None)
    };
    let phi_sqrt = phi.sqrt();
    for i in 0..n {
        a[i] = m[i] / phi_sqrt;
    }
    a[n - 1] = a_n;
    a[0] = -a_n;
    if let Some(a_n1) = a_n1 {
        a[n - 2] = a_n1;
        a[1] = -a_n1;
    }

    let mean = x.iter().sum::<f64>() / nf;
    let num: f64 = a.iter().zip(x.iter()).map(|(ai, xi)| ai * xi).sum();
    let den: f64 = x.iter().map(|xi| (xi - mean).powi(2)).sum();
    let w = (num * num / den).min(1.0);

    let p = if n == 3 {
        // Exact for n = 3.
        let pi = std::f64::consts::PI;
        ((6.0 / pi) * (w.sqrt().asin() - (0.75f64).sqrt().asin())).clamp(0.0, 1.0)
    } else if n <= 11 {
        let g = poly(&[-2.273, 0.459], nf);
        let mu = poly(&[0.5440, -0.39978, 0.025054, -6.714e-4], nf);
        let sigma = poly(&[1.3822, -0.77857, 0.062767, -0.0020322], nf).exp();
        let y = -((g - (1.0 - w).ln()).ln());
        1.0 - normal_cdf((y - mu) / sigma)
    } else {
        let ln_n = nf.ln();
        let mu = poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], ln_n);
        let sigma = poly(&[-0.4803, -0.082676, 0.0030302], ln_n).exp();
        let y = (1.0 - w).ln();
        1.0 - normal_cdf((y - mu) / sigma)
    };

    Ok(StatResult {
        test: "shapiro-wilk".into(),
        statistic: w,
        df: vec![],
        p,
        adjusted_p: None,
        correction: None,
        n,
    })
}
