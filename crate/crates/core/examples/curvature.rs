//! Gaussian curvature of covariance surfaces. A WSS surface `h(s - t)` is
//! a cylinder and has `K = 0`; the SDOF surface does not until the
//! transient dies out.

use wssgeom::covariance::CovarianceSource;
use wssgeom::{gaussian_curvature, AnalyticCovariance, CovarianceSurface};

fn main() -> wssgeom::Result<()> {
    let dt = 0.02;
    let n = 1501;
    let sdof = AnalyticCovariance::Sdof {
        mass: 1.0,
        zeta: 0.05,
        omega_n: 2.0,
        s0: 1.0 / (2.0 * std::f64::consts::PI),
    };
    let sdof = sdof.surface(n, dt, 0.0);
    // Smooth in the lag; a kink on the diagonal would show up as curvature.
    // What remains on this grid is the O(dt^2) floor of the differences.
    let stat = CovarianceSurface::from_fn(
        n,
        dt,
        0.0,
        CovarianceSource::Synthetic("gauss_cos".into()),
        |s, t| {
            let u = s - t;
            (-0.1 * u * u).exp() * (2.0 * u).cos()
        },
    );
    println!("{:>6} {:>14} {:>14}", "t", "K sdof", "K stationary");
    for t in [1.0, 2.0, 5.0, 10.0, 20.0, 29.0] {
        let i = (t / dt).round() as usize;
        println!(
            "{t:>6.1} {:>14.3e} {:>14.3e}",
            gaussian_curvature(&sdof, i, i)?,
            gaussian_curvature(&stat, i, i)?
        );
    }
    Ok(())
}
