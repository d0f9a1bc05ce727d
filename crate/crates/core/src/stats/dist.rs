//! Distribution functions used by the test procedures.
//!
//! Student t, χ², F, and the normal come from `statrs`. The studentized
//! range CDF (for Tukey HSD) is not available there and is evaluated by
//! direct numerical integration of its double-integral definition with
//! Gauss–Legendre quadrature.

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

pub fn normal_ppf(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn t_cdf(x: f64, df: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    StudentsT::new(0.0, 1.0, df).expect("df > 0").cdf(x)
}

pub fn t_ppf(p: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(p)
}

/// Two-sided p for a t statistic.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    (2.0 * (1.0 - t_cdf(t.abs(), df))).clamp(0.0, 1.0)
}

pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    ChiSquared::new(df).expect("df > 0").cdf(x)
}

pub fn f_cdf(x: f64, df1: f64, df2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    FisherSnedecor::new(df1, df2).expect("df > 0").cdf(x)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Gauss–Legendre nodes/weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const GL_INNER: usize = 96;
const GL_OUTER: usize = 128;

/// CDF of the range of `k` iid standard normals at `w`.
fn normal_range_cdf(w: f64, k: usize, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    // k ∫ φ(z) [Φ(z) − Φ(z − w)]^{k−1} dz over the effective support.
    let lo = -9.0;
    let hi = 9.0;
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = 0.0;
    for (x, wt) in gl.0.iter().zip(gl.1.iter()) {
        let z = mid + half * x;
        let inner = (normal_cdf(z) - normal_cdf(z - w)).max(0.0);
        acc += wt * normal_pdf(z) * inner.powi(k as i32 - 1);
    }
    (k as f64 * half * acc).clamp(0.0, 1.0)
}

/// CDF of the studentized range distribution with `k` groups and `df`
/// error degrees of freedom.
///
/// P(Q ≤ q) = ∫ g(s) · R_k(q·s) ds, where g is the density of
/// sqrt(χ²_df / df) and R_k the normal range CDF. Accuracy is limited by
/// the quadrature; spot checks against published tables hold to well
/// below 1e-4.
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> f64 {
    assert!(k >= 2, "need at least two groups");
    assert!(df >= 1.0, "need at least one degree of freedom");
    if q <= 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return 1.0;
    }
    let inner_gl = gauss_legendre(GL_INNER);
    let outer_gl = gauss_legendre(GL_OUTER);

    // Density of S = sqrt(chi2_df / df) via logs to dodge overflow:
    // ln g(s) = ln 2 + (df/2) ln(df/2) - lnΓ(df/2) + (df−1) ln s − df s²/2.
    let half_df = 0.5 * df;
    let log_norm = std::f64::consts::LN_2 + half_df * half_df.ln() - ln_gamma(half_df);
    let g = |s: f64| -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        (log_norm + (df - 1.0) * s.ln() - half_df * s * s).exp()
    };

    // Integration bounds covering the mass of S.
    let spread = 14.0 / df.sqrt();
    let (lo, hi) = if df <= 25.0 {
        (0.0, (1.0 + spread).min(10.0))
    } else {
        ((1.0 - spread).max(0.0), 1.0 + spread)
    };
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = 0.0;
    for (x, wt) in outer_gl.0.iter().zip(outer_gl.1.iter()) {
        let s = mid + half * x;
        let gs = g(s);
        if gs > 0.0 {
            acc += wt * gs * normal_range_cdf(q * s, k, &inner_gl);
        }
    }
    (half * acc).clamp(0.0, 1.0)
}

/// Upper-tail p for a studentized range statistic (Tukey HSD).
pub fn studentized_range_sf(q: f64, k: usize, df: f64) -> f64 {
    (1.0 - studentized_range_cdf(q, k, df)).clamp(0.0, 1.0)
}

/// Lanczos log-gamma (g = 7, n = 9), relative error ~1e-13.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Reference values frozen from an independent statistical library.
    #[test]
    fn t_cdf_spot_values() {
        let cases = [
            (0.0, 5.0, 0.5),
            (1.0, 1.0, 0.7500000000000002),
            (2.0, 3.0, 0.9303370157205785),
            (-1.5, 7.0, 0.08864924349498501),
            (2.228, 10.0, 0.9749941140914443),
            (1.812, 10.0, 0.9499623689670764),
            (3.0, 2.0, 0.9522670168666455),
            (-2.5, 20.0, 0.010616772719566197),
            (0.5, 30.0, 0.6896384975574363),
            (4.0, 8.0, 0.9980251135982773),
        ];
        for (x, df, want) in cases {
            assert_abs_diff_eq!(t_cdf(x, df), want, epsilon = 1e-6);
        }
    }

    #[test]
    fn chi2_cdf_spot_values() {
        let cases = [
            (1.0, 1.0, 0.6826894921370859),
            (2.0, 2.0, 0.6321205588285577),
            (3.84, 1.0, 0.9499564787512949),
            (5.99, 2.0, 0.9499633729134137),
            (18.307, 10.0, 0.9499994109086018),
            (4.0, 4.0, 0.5939941502901616),
            (0.5, 3.0, 0.08110858834532418),
            (10.0, 5.0, 0.9247647538534878),
            (25.0, 15.0, 0.9500565663735717),
            (7.81, 3.0, 0.9498939436499941),
        ];
        for (x, df, want) in cases {
            assert_abs_diff_eq!(chi2_cdf(x, df), want, epsilon = 1e-6);
        }
    }

    #[test]
    fn f_cdf_spot_values() {
        let cases = [
            (1.0, 1.0, 1.0, 0.5000000000000001),
            (2.0, 3.0, 10.0, 0.8219925926248246),
            (3.708, 3.0, 10.0, 0.9499912183954575),
            (4.96, 1.0, 10.0, 0.9499123494335318),
            (1.5, 5.0, 20.0, 0.7657133410970611),
            (0.5, 2.0, 8.0, 0.3757049230300259),
            (10.0, 4.0, 4.0, 0.976709241172051),
            (2.87, 2.0, 12.0, 0.9041999395075764),
            (5.0, 6.0, 30.0, 0.9988250732421875),
            (3.0, 1.0, 5.0, 0.8561891912883961),
        ];
        for (x, d1, d2, want) in cases {
            assert_abs_diff_eq!(f_cdf(x, d1, d2), want, epsilon = 1e-6);
        }
    }

    #[test]
    fn studentized_range_spot_values() {
        // q(0.95; k=3, df=10) ≈ 3.877 from published tables.
        let cases = [
            (3.877, 3, 10.0, 0.9500129112467469),
            (3.0, 3, 10.0, 0.8650165848104374),
            (4.0, 4, 20.0, 0.9529311481626277),
            (2.0, 2, 10.0, 0.8123301291303988),
            (3.15, 2, 30.0, 0.9664283887261387),
            (5.0, 5, 15.0, 0.9786116826592123),
            (4.33, 3, 12.0, 0.9751811908042309),
            (3.5, 4, 60.0, 0.9257131781915332),
            (2.8, 2, 5.0, 0.895408390744203),
            (6.0, 6, 8.0, 0.9767764218624714),
        ];
        for (q, k, df, want) in cases {
            assert_abs_diff_eq!(studentized_range_cdf(q, k, df), want, epsilon = 1e-2);
            // The quadrature is in fact much tighter than the coarse bound.
            assert_abs_diff_eq!(studentized_range_cdf(q, k, df), want, epsilon = 1e-6);
        }
    }

    #[test]
    fn studentized_range_two_group_identity() {
        // For k = 2 the studentized range is √2·|t|, so the upper tail
        // must match the two-sided t tail.
        for &(t, df) in &[(1.0, 4.0), (2.5, 9.0), (0.3, 19.0), (4.0, 6.0)] {
            let q = std::f64::consts::SQRT_2 * t;
            let p_range = studentized_range_sf(q, 2, df);
            let p_t = t_two_sided_p(t, df);
            assert_abs_diff_eq!(p_range, p_t, epsilon = 1e-6);
        }
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        for n in 1..10u32 {
            let fact: f64 = (1..n).map(f64::from).product();
            assert_abs_diff_eq!(ln_gamma(n as f64), fact.ln(), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            epsilon = 1e-12
        );
    }
}
