//! Local cylindrification error on `sin(s - t)`: halving the patch size
//! should cut the error by about four.

use wssgeom::covariance::CovarianceSource;
use wssgeom::{cylindrify, CovarianceSurface};

fn main() -> wssgeom::Result<()> {
    let dt = 0.01;
    let surf = CovarianceSurface::from_fn(
        1001,
        dt,
        0.0,
        CovarianceSource::Synthetic("sin".into()),
        |s, t| (s - t).sin(),
    );
    let mut prev = None;
    for h in [1.0, 0.5, 0.25, 0.125] {
        let r = cylindrify(&surf, h)?;
        let ratio = prev.map(|p: f64| p / r.l2_error);
        println!(
            "h = {h:<6} patches = {:<6} error = {:.4e} {}",
            r.patch_count,
            r.l2_error,
            ratio.map_or(String::new(), |q| format!("ratio = {q:.2}"))
        );
        prev = Some(r.l2_error);
    }
    Ok(())
}
