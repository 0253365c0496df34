//! Distribution helpers: Gaussian and chi-square quantiles.
//!
//! The regularized incomplete gamma function and the inverse complementary
//! error function come from `statrs`; the chi-square inversion on top of
//! them is a bracketed Newton iteration.

use statrs::function::erf::erfc_inv;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Upper-tail standard normal quantile: the `z` with `P[N(0,1) > z] = q`.
pub fn normal_upper_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param("q", format!("tail probability {q} outside (0,1)")));
    }
    Ok(std::f64::consts::SQRT_2 * erfc_inv(2.0 * q))
}

/// Standard normal quantile `Φ⁻¹(prob)`.
pub fn normal_quantile(prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::param("prob", format!("{prob} outside (0,1)")));
    }
    Ok(-std::f64::consts::SQRT_2 * erfc_inv(2.0 * prob))
}

/// `P[χ²_dof ≤ x]`.
pub fn chi2_cdf(dof: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_lr(dof as f64 / 2.0, x / 2.0)
}

/// `P[χ²_dof > x]`.
pub fn chi2_sf(dof: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, x / 2.0)
}

fn chi2_ln_pdf(dof: usize, x: f64) -> f64 {
    let h = dof as f64 / 2.0;
    (h - 1.0) * x.ln() - x / 2.0 - h * std::f64::consts::LN_2 - ln_gamma(h)
}

/// Chi-square quantile: the `x` with `P[χ²_dof ≤ x] = prob`.
///
/// Works on whichever tail is smaller so that both `prob → 0` and
/// `prob → 1` keep full relative accuracy.
pub fn chi2_quantile(dof: usize, prob: f64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::param("dof", "must be positive"));
    }
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::param("prob", format!("{prob} outside (0,1)")));
    }
    let upper = prob > 0.5;
    let target = if upper { 1.0 - prob } else { prob };
    // residual is increasing in x in both branches
    let residual = |x: f64| {
        if upper {
            target - chi2_sf(dof, x)
        } else {
            chi2_cdf(dof, x) - target
        }
    };

    // Wilson-Hilferty starting point
    let k = dof as f64;
    let z = normal_quantile(prob)?;
    let c = 2.0 / (9.0 * k);
    let mut x = (k * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-3 * k.min(1.0));

    let (mut lo, mut hi) = (0.0_f64, x);
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if residual(lo) > 0.0 {
        lo = 0.0;
    }

    for _ in 0..200 {
        let f = residual(x);
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = chi2_ln_pdf(dof, x).exp();
        let mut next = x - f / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: Φ from the Maclaurin series of erf, inverted by
    // bisection. Accurate to ~1e-13 on |z| < 4.
    fn phi_series(z: f64) -> f64 {
        let x = z / std::f64::consts::SQRT_2;
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term.abs() > 1e-18 {
            n += 1.0;
            term *= -x * x / n;
            sum += term / (2.0 * n + 1.0);
        }
        0.5 * (1.0 + 2.0 / std::f64::consts::PI.sqrt() * sum)
    }

    fn normal_quantile_bisect(prob: f64) -> f64 {
        let (mut lo, mut hi) = (-6.0, 6.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi_series(mid) < prob {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn chi2_two_dof_matches_exponential_closed_form() {
        let q = chi2_quantile(2, 0.95).unwrap();
        let exact = -2.0 * 0.05_f64.ln();
        assert!(((q - exact) / exact).abs() < 1e-8, "{q} vs {exact}");
        assert!((q - 5.991465).abs() < 1e-6);
    }

    #[test]
    fn chi2_one_dof_is_squared_normal_quantile() {
        let z = normal_quantile_bisect(0.975);
        let q = chi2_quantile(1, 0.95).unwrap();
        assert!(((q - z * z) / (z * z)).abs() < 1e-8, "{q} vs {}", z * z);
        assert!((q - 3.841459).abs() < 1e-6);
    }

    #[test]
    fn median_is_below_mean() {
        for dof in 1..200 {
            assert!(chi2_quantile(dof, 0.5).unwrap() < dof as f64);
        }
    }

    #[test]
    fn quantile_inverts_cdf_in_both_tails() {
        for &dof in &[1, 3, 10, 100, 500] {
            for &prob in &[1e-10, 1e-3, 0.2, 0.5, 0.9, 0.999, 1.0 - 1e-10] {
                let x = chi2_quantile(dof, prob).unwrap();
                if prob > 0.5 {
                    let sf = chi2_sf(dof, x);
                    assert!(((sf - (1.0 - prob)) / (1.0 - prob)).abs() < 1e-8);
                } else {
                    let cdf = chi2_cdf(dof, x);
                    assert!(((cdf - prob) / prob).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn normal_quantile_agrees_with_series_oracle() {
        for &p in &[0.6, 0.9, 0.975, 0.999, 0.9999] {
            let a = normal_quantile(p).unwrap();
            let b = normal_quantile_bisect(p);
            assert!((a - b).abs() < 1e-9, "{p}: {a} vs {b}");
        }
    }

    #[test]
    fn out_of_domain_is_an_error() {
        assert!(chi2_quantile(0, 0.5).is_err());
        assert!(chi2_quantile(3, 1.0).is_err());
        assert!(normal_upper_quantile(0.0).is_err());
    }
}
