//! Helpers shared by the integration tests.
#![allow(dead_code)]

use wssgeom::{epanechnikov2d, SurfaceWindow};

/// Kernel-weighted squared residual of the plane `b` over the window.
pub fn objective(w: &SurfaceWindow, center: (f64, f64), h: f64, b: [f64; 3]) -> f64 {
    let mut sum = 0.0;
    for (i, &s) in w.s.iter().enumerate() {
        for (j, &t) in w.t.iter().enumerate() {
            let (ds, dt) = (s - center.0, t - center.1);
            let k = epanechnikov2d(ds / h, dt / h);
            let e = w.get(i, j) - b[0] - b[1] * ds - b[2] * dt;
            sum += k * e * e;
        }
    }
    sum
}

/// Minimizes by shrinking a 3D grid around its best node.
pub fn grid_argmin(w: &SurfaceWindow, center: (f64, f64), h: f64) -> [f64; 3] {
    let mut best = [0.0; 3];
    let mut radius = [50.0, 500.0, 500.0];
    let k = 10i32;
    for _ in 0..80 {
        let mut cand = best;
        let mut cand_val = objective(w, center, h, best);
        for a in -k..=k {
            for b in -k..=k {
                for c in -k..=k {
                    let p = [
                        best[0] + radius[0] * a as f64 / k as f64,
                        best[1] + radius[1] * b as f64 / k as f64,
                        best[2] + radius[2] * c as f64 / k as f64,
                    ];
                    let v = objective(w, center, h, p);
                    if v < cand_val {
                        cand = p;
                        cand_val = v;
                    }
                }
            }
        }
        best = cand;
        for r in &mut radius {
            *r *= 0.5;
        }
    }
    best
}
