//! j_hat on a Wiener ensemble, where `r(s, t) = min(s, t)` gives `J = 1`.

use wssgeom::models::wiener_spec;
use wssgeom::{bandwidth_from, default_eval_times, j_series, simulate};

fn main() -> wssgeom::Result<()> {
    let spec = wiener_spec(1.0, 0.005, 10.0);
    let ens = simulate(&spec, 2000, 3)?;
    let bw = bandwidth_from(spec.n_points(), 1.0, 0.2, spec.dt)?;
    let times = default_eval_times(&ens, &bw, 4 * bw.l);
    let s = j_series(&ens, &times, &bw, false)?;
    for (t, j) in s.times.iter().zip(&s.j_hat) {
        println!("t = {t:>6.3}  j_hat = {j:.4}");
    }
    let mean = s.j_hat.iter().sum::<f64>() / s.j_hat.len() as f64;
    println!("mean j_hat = {mean:.4} (exact 1)");
    Ok(())
}
