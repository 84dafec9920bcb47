//! Simulate the SDOF oscillator and compare the ensemble variance with the
//! closed form as the response settles.

use wssgeom::{reference_sdof_spec, simulate, AnalyticCovariance};

fn main() -> wssgeom::Result<()> {
    let spec = reference_sdof_spec().with_grid(0.005, 60.0);
    let ens = simulate(&spec, 4000, 1)?;
    let exact = AnalyticCovariance::for_spec(&spec).expect("sdof from rest has a closed form");

    println!("{:>6} {:>10} {:>10}", "t", "var", "exact");
    for t in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 60.0] {
        let i = ens.index_of(t).expect("on grid");
        let var = ens.paths().map(|p| p[i] * p[i]).sum::<f64>() / ens.n_paths() as f64;
        println!("{t:>6.1} {var:>10.4} {:>10.4}", exact.eval(t, t));
    }

    let dir = std::env::temp_dir().join("wssgeom_example");
    std::fs::create_dir_all(&dir).map_err(|e| wssgeom::Error::Config(e.to_string()))?;
    let small = simulate(&spec.with_grid(0.005, 5.0), 10, 1)?;
    let path = dir.join("sdof_ensemble.csv");
    small.save(&path)?;
    println!("10 paths written to {}", path.display());
    Ok(())
}
