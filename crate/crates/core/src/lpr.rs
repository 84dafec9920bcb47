//! Local linear regression on the covariance surface.
//!
//! Around a center `(s0, t0)` the surface is modelled as the plane
//! `beta0 + beta1 (s - s0) + beta2 (t - t0)`, fitted by weighted least
//! squares with the product Epanechnikov kernel. The slopes `beta1` and
//! `beta2` estimate `r_s` and `r_t`.

use crate::error::{Error, Result};

/// Normal matrices with a 1-norm condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// `(9/16)(1 - u^2)(1 - v^2)` on the unit square, zero outside.
///
/// Left unnormalized by `1/h^2`; the least-squares solution does not
/// depend on a common scale of the weights.
pub fn epanechnikov2d(u: f64, v: f64) -> f64 {
    if u.abs() <= 1.0 && v.abs() <= 1.0 {
        0.5625 * (1.0 - u * u) * (1.0 - v * v)
    } else {
        0.0
    }
}

/// Kernel radius in seconds together with its half-width in grid steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth {
    pub h: f64,
    /// Scale constant when derived as `C n^-a`.
    pub c: Option<f64>,
    pub a: Option<f64>,
    pub l: usize,
}

impl Bandwidth {
    /// Explicit radius; the half-width is `ceil(h / dt)`.
    pub fn from_radius(h: f64, dt: f64) -> Result<Self> {
        if !(h > 0.0 && dt > 0.0) {
            return Err(Error::InvalidBandwidth(format!("h={h}, dt={dt}")));
        }
        let l = half_width(h, dt);
        if l < 2 {
            return Err(Error::WindowTooSmall { l });
        }
        Ok(Bandwidth {
            h,
            c: None,
            a: None,
            l,
        })
    }

    /// Explicit half-width; the radius becomes `l * dt`.
    pub fn from_half_width(l: usize, dt: f64) -> Result<Self> {
        if l < 2 {
            return Err(Error::WindowTooSmall { l });
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidBandwidth(format!("dt={dt}")));
        }
        Ok(Bandwidth {
            h: l as f64 * dt,
            c: None,
            a: None,
            l,
        })
    }
}

// ceil with a little slack so that h = 2 dt does not become 3 through rounding.
fn half_width(h: f64, dt: f64) -> usize {
    let x = h / dt;
    let r = x.round();
    if (x - r).abs() < 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// `h = C n^-a`, `L = ceil(h / dt)`.
///
/// Exponents outside `(1/6, 1/4)` leave the regime where the estimator is
/// asymptotically normal; that is logged, not rejected.
pub fn bandwidth_from(n: usize, c: f64, a: f64, dt: f64) -> Result<Bandwidth> {
    if n < 2 || !(c > 0.0) || !(a > 0.0 && a < 1.0) || !(dt > 0.0) {
        return Err(Error::InvalidBandwidth(format!(
            "n={n}, C={c}, a={a}, dt={dt}"
        )));
    }
    if !(a > 1.0 / 6.0 && a < 1.0 / 4.0) {
        log::warn!("bandwidth exponent a={a} is outside (1/6, 1/4)");
    }
    let h = c * (n as f64).powf(-a);
    let l = half_width(h, dt);
    if l < 2 {
        return Err(Error::WindowTooSmall { l });
    }
    Ok(Bandwidth {
        h,
        c: Some(c),
        a: Some(a),
        l,
    })
}

/// Surface samples on a rectangular sub-grid: `values[i * t.len() + j]`
/// is the surface at `(s[i], t[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceWindow {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl SurfaceWindow {
    pub fn from_fn(s: Vec<f64>, t: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = s
            .iter()
            .flat_map(|&si| t.iter().map(move |&tj| (si, tj)))
            .map(|(si, tj)| f(si, tj))
            .collect();
        SurfaceWindow { s, t, values }
    }

    /// Square grid window of half-width `l` steps around `(s0, t0)`.
    pub fn square(s0: f64, t0: f64, dt: f64, l: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let axis = |c: f64| {
            (-(l as i64)..=l as i64)
                .map(|k| c + k as f64 * dt)
                .collect::<Vec<_>>()
        };
        Self::from_fn(axis(s0), axis(t0), f)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.t.len() + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalLinearFit {
    /// Surface value at the center.
    pub beta0: f64,
    /// Slope along `s`.
    pub beta1: f64,
    /// Slope along `t`.
    pub beta2: f64,
    pub center: (f64, f64),
    pub h: f64,
    /// Points with positive kernel weight.
    pub n_window: usize,
    /// 1-norm condition number of the weighted normal matrix.
    pub condition: f64,
}

/// Weighted least-squares plane through `window` around `center`.
pub fn local_linear_fit(
    window: &SurfaceWindow,
    center: (f64, f64),
    h: f64,
) -> Result<LocalLinearFit> {
    let (s0, t0) = center;
    let nt = window.t.len();
    // Accumulate X^T W X (symmetric, 6 distinct entries) and X^T W Y.
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    let mut n_window = 0;
    for (i, &s) in window.s.iter().enumerate() {
        let ds = s - s0;
        let ws = epanechnikov1d(ds / h);
        if ws == 0.0 {
            continue;
        }
        let row = &window.values[i * nt..(i + 1) * nt];
        for (&t, &y) in window.t.iter().zip(row) {
            let dtt = t - t0;
            let w = ws * epanechnikov1d(dtt / h);
            if w == 0.0 {
                continue;
            }
            n_window += 1;
            sw += w;
            sx += w * ds;
            sy += w * dtt;
            sxx += w * ds * ds;
            sxy += w * ds * dtt;
            syy += w * dtt * dtt;
            b0 += w * y;
            b1 += w * ds * y;
            b2 += w * dtt * y;
        }
    }
    if n_window == 0 {
        return Err(Error::EmptyWindow);
    }
    let a = [[sw, sx, sy], [sx, sxx, sxy], [sy, sxy, syy]];
    let condition = condition_1norm(&a);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::DegenerateWindow { condition });
    }
    let beta = solve3(a, [b0, b1, b2]).ok_or(Error::DegenerateWindow { condition })?;
    Ok(LocalLinearFit {
        beta0: beta[0],
        beta1: beta[1],
        beta2: beta[2],
        center,
        h,
        n_window,
        condition,
    })
}

// The 2D kernel factorizes; 0.5625 = 0.75 * 0.75.
// Offsets within rounding of the support edge get zero weight, so a
// window of half-width h/dt has exactly (2L - 1)^2 active points.
#[inline]
fn epanechnikov1d(u: f64) -> f64 {
    let q = 1.0 - u * u;
    if q > 1e-12 {
        0.75 * q
    } else {
        0.0
    }
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

fn condition_1norm(a: &[[f64; 3]; 3]) -> f64 {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if det == 0.0 || !det.is_finite() {
        return f64::INFINITY;
    }
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    // Adjugate (transpose of the cofactor matrix) divided by det.
    let inv = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let norm1 = |m: &[[f64; 3]; 3], scale: f64| {
        (0..3)
            .map(|c| (0..3).map(|r| m[r][c].abs()).sum::<f64>() * scale)
            .fold(0.0, f64::max)
    };
    norm1(a, 1.0) * norm1(&inv, 1.0 / det.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kernel_values() {
        assert_eq!(epanechnikov2d(0.0, 0.0), 0.5625);
        assert_eq!(epanechnikov2d(1.0, 0.3), 0.0);
        assert_eq!(epanechnikov2d(0.5, 0.5), 0.31640625);
        assert_eq!(epanechnikov2d(1.2, 0.0), 0.0);
        assert!(
            (epanechnikov2d(0.3, -0.4) - epanechnikov1d(0.3) * epanechnikov1d(-0.4)).abs() < 1e-15
        );
    }

    #[test]
    fn reference_sdof_bandwidth() {
        let bw = bandwidth_from(40001, 1.0, 0.2, 0.005).unwrap();
        // 40001^(-1/5) = 0.12011..., printed as 0.12.
        assert!((bw.h - 0.12011).abs() < 1e-5, "h = {}", bw.h);
        assert_eq!(bw.l, 25);
    }

    #[test]
    fn exact_power_bandwidth() {
        let bw = bandwidth_from(16, 1.0, 0.25, 0.25).unwrap();
        assert_eq!(bw.h, 0.5);
        assert_eq!(bw.l, 2);
    }

    #[test]
    fn bandwidth_errors() {
        assert!(matches!(
            bandwidth_from(40001, 0.01, 0.2, 0.005),
            Err(Error::WindowTooSmall { l: 1 })
        ));
        assert!(bandwidth_from(1, 1.0, 0.2, 0.005).is_err());
        assert!(bandwidth_from(100, 1.0, 1.5, 0.005).is_err());
        assert!(matches!(
            Bandwidth::from_half_width(1, 0.01),
            Err(Error::WindowTooSmall { l: 1 })
        ));
        assert_eq!(Bandwidth::from_half_width(50, 0.005).unwrap().h, 0.25);
    }

    #[test]
    fn plane_reproduction() {
        let (s0, t0) = (4.0, 2.5);
        let w = SurfaceWindow::square(s0, t0, 0.01, 6, |s, t| {
            2.0 + 3.0 * (s - s0) - 3.0 * (t - t0)
        });
        let fit = local_linear_fit(&w, (s0, t0), 0.06).unwrap();
        assert!((fit.beta0 - 2.0).abs() < 1e-10);
        assert!((fit.beta1 - 3.0).abs() < 1e-10);
        assert!((fit.beta2 + 3.0).abs() < 1e-10);
        // Kernel vanishes on the outer ring.
        assert_eq!(fit.n_window, 11 * 11);
    }

    #[test]
    fn constant_surface() {
        let w = SurfaceWindow::square(1.0, 1.0, 0.005, 25, |_, _| 0.7);
        let fit = local_linear_fit(&w, (1.0, 1.0), 0.12).unwrap();
        assert!((fit.beta0 - 0.7).abs() < 1e-12);
        assert!(fit.beta1.abs() < 1e-12 && fit.beta2.abs() < 1e-12);
    }

    #[test]
    fn sine_slopes() {
        // Interior point of r = sin(s - t). The symmetric window cancels the
        // second-order term, so the slope bias is bounded by h^2/6 * |r'''| * 2.
        let (s0, t0, h, dt) = (5.0, 3.0, 0.12, 0.005);
        let w = SurfaceWindow::square(s0, t0, dt, 25, |s, t| (s - t).sin());
        let fit = local_linear_fit(&w, (s0, t0), h).unwrap();
        let tol = h * h;
        assert!((fit.beta1 - 2f64.cos()).abs() < tol);
        assert!((fit.beta2 + 2f64.cos()).abs() < tol);
    }

    #[test]
    fn truncated_window_still_fits() {
        // Boundary center: only one quadrant of the kernel support is present.
        let s: Vec<f64> = (0..=10).map(|k| k as f64 * 0.01).collect();
        let w = SurfaceWindow::from_fn(s.clone(), s, |s, t| 1.0 + s - 2.0 * t);
        let fit = local_linear_fit(&w, (0.0, 0.0), 0.1).unwrap();
        assert_eq!(fit.n_window, 100);
        assert!((fit.beta1 - 1.0).abs() < 1e-10 && (fit.beta2 + 2.0).abs() < 1e-10);
    }

    #[test]
    fn empty_and_degenerate_windows() {
        let w = SurfaceWindow::square(0.0, 0.0, 1.0, 3, |_, _| 1.0);
        assert!(matches!(
            local_linear_fit(&w, (100.0, 100.0), 0.5),
            Err(Error::EmptyWindow)
        ));
        // A single row of s values: beta1 is unidentifiable.
        let w = SurfaceWindow::from_fn(vec![0.0], vec![-0.1, 0.0, 0.1], |_, t| t);
        assert!(matches!(
            local_linear_fit(&w, (0.0, 0.0), 0.2),
            Err(Error::DegenerateWindow { .. })
        ));
    }

    #[test]
    fn center_weight_is_maximal() {
        let c = epanechnikov2d(0.0, 0.0);
        for i in -10..=10 {
            for j in -10..=10 {
                let w = epanechnikov2d(i as f64 / 10.0, j as f64 / 10.0);
                assert!(w >= 0.0 && w <= c);
            }
        }
    }

    proptest! {
        #[test]
        fn reproduces_any_plane(
            c0 in -5.0..5.0f64, c1 in -5.0..5.0f64, c2 in -5.0..5.0f64,
            s0 in 0.0..50.0f64, t0 in 0.0..50.0f64,
            l in 2usize..12, frac in 0.3..1.0f64,
        ) {
            let dt = 0.01;
            let h = (l as f64 * dt * frac).max(1.5 * dt);
            let w = SurfaceWindow::square(s0, t0, dt, l, |s, t| c0 + c1 * (s - s0) + c2 * (t - t0));
            let fit = local_linear_fit(&w, (s0, t0), h).unwrap();
            let scale = 1.0 + c0.abs() + c1.abs() + c2.abs();
            prop_assert!((fit.beta0 - c0).abs() < 1e-10 * scale);
            prop_assert!((fit.beta1 - c1).abs() < 1e-8 * scale);
            prop_assert!((fit.beta2 - c2).abs() < 1e-8 * scale);
        }
    }
}
