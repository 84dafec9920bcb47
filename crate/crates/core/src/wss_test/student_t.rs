//! Student's t distribution through the regularized incomplete beta
//! function.
//!
//! `P(|T| > x) = I_z(df/2, 1/2)` with `z = df / (df + x^2)`, so quantiles
//! are found by inverting `I_z` in `z`, which is monotone on `[0, 1]`.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// CDF of Student's t with `df` degrees of freedom.
pub fn student_t_cdf(df: u32, x: f64) -> f64 {
    let nu = f64::from(df);
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let z = nu / (nu + x * x);
    // Upper tail beyond |x|. Near the median use the complementary form in
    // w = 1 - z, which keeps full relative precision there.
    let tail = if z < 0.5 {
        0.5 * beta_reg(nu / 2.0, 0.5, z)
    } else {
        let w = x * x / (nu + x * x);
        0.5 - 0.5 * beta_reg(0.5, nu / 2.0, w)
    };
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Inverse CDF of Student's t.
pub fn student_t_quantile(df: u32, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadProbability(p));
    }
    if df == 0 {
        return Err(Error::InvalidSpec("Student t needs df >= 1".into()));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let upper = p > 0.5;
    // Two-sided tail mass beyond |x|.
    let two_tail = if upper { 2.0 * (1.0 - p) } else { 2.0 * p };
    let nu = f64::from(df);
    let a = nu / 2.0;

    // Bisection on z: I_z(a, 1/2) increases from 0 to 1.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, 0.5, mid) < two_tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    let mut x = (nu * (1.0 - z) / z).sqrt();

    // The z -> x map loses digits near the median; polish with Newton
    // steps on the CDF, keeping only steps that reduce the residual.
    let target = if upper { p } else { 1.0 - p };
    let mut resid = (student_t_cdf(df, x) - target).abs();
    for _ in 0..8 {
        let d = student_t_pdf(df, x);
        let next = x - (student_t_cdf(df, x) - target) / d;
        if !next.is_finite() {
            break;
        }
        let r = (student_t_cdf(df, next) - target).abs();
        if r >= resid {
            break;
        }
        x = next;
        resid = r;
    }
    Ok(if upper { x } else { -x })
}

pub fn student_t_pdf(df: u32, x: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let nu = f64::from(df);
    let ln_norm =
        ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * std::f64::consts::PI).ln();
    (ln_norm - (nu + 1.0) / 2.0 * (1.0 + x * x / nu).ln()).exp()
}
