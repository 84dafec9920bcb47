//! A single local linear fit on a known surface: the slopes of
//! `r(s, t) = s t` at `(s0, t0)` are `(t0, s0)`.

use wssgeom::{j_statistic, local_linear_fit, Bandwidth, SurfaceWindow};

fn main() -> wssgeom::Result<()> {
    let dt = 0.01;
    let bw = Bandwidth::from_half_width(12, dt)?;
    let (s0, t0) = (2.0, 3.0);
    let w = SurfaceWindow::square(s0, t0, dt, bw.l, |s, t| s * t);
    let fit = local_linear_fit(&w, (s0, t0), bw.h)?;
    println!("beta0 = {:.6} (exact {})", fit.beta0, s0 * t0);
    println!("r_s   = {:.6} (exact {t0})", fit.beta1);
    println!("r_t   = {:.6} (exact {s0})", fit.beta2);
    println!(
        "J     = {:.6}, window points {}, condition {:.1}",
        j_statistic(&fit),
        fit.n_window,
        fit.condition
    );
    Ok(())
}
