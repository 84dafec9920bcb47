//! Empirical SDOF covariance against the closed form at a few probe pairs.

use wssgeom::{reference_sdof_spec, simulate, AnalyticCovariance, LazyCovariance};

fn main() -> wssgeom::Result<()> {
    let spec = reference_sdof_spec().with_grid(0.005, 40.0);
    let n = 10_000;
    let ens = simulate(&spec, n, 11)?;
    let lazy = LazyCovariance::new(&ens, false)?;
    let exact = AnalyticCovariance::for_spec(&spec).expect("closed form");
    println!(
        "{:>6} {:>6} {:>10} {:>10} {:>8}",
        "s", "t", "empirical", "exact", "z"
    );
    for (s, t) in [
        (1.0, 1.0),
        (2.0, 3.0),
        (5.0, 5.0),
        (10.0, 12.5),
        (30.0, 30.0),
        (35.0, 39.0),
    ] {
        let (i, j) = (ens.index_of(s).unwrap(), ens.index_of(t).unwrap());
        let est = lazy.cell(i, j);
        // Standard error of a mean of products.
        let m2 = ens.paths().map(|p| (p[i] * p[j]).powi(2)).sum::<f64>() / n as f64;
        let se = ((m2 - est * est) / n as f64).sqrt();
        let k = exact.eval(s, t);
        println!(
            "{s:>6.1} {t:>6.1} {est:>10.4} {k:>10.4} {:>8.2}",
            (est - k) / se
        );
    }
    Ok(())
}
