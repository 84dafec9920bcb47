//! Grouped t-test on the SDOF oscillator started from rest.
//!
//! ```text
//! cargo run --release --example group_test_sdof -- [paths] [seed]
//! ```

use wssgeom::{
    bandwidth_from, default_eval_times, group_t_test, reference_sdof_spec, sdof_onset, simulate,
};

fn main() -> wssgeom::Result<()> {
    let mut args = std::env::args().skip(1);
    let paths: usize = args.next().map_or(2000, |s| s.parse().expect("paths"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let spec = reference_sdof_spec();
    let ens = simulate(&spec, paths, seed)?;
    let bw = bandwidth_from(spec.n_points(), 1.0, 0.2, spec.dt)?;
    let times = default_eval_times(&ens, &bw, bw.l);
    let report = group_t_test(&ens, &times, &bw, 20, 0.05, false)?;

    let (zeta, wn) = spec.sdof_modal().expect("sdof");
    let onset = sdof_onset(zeta, wn, 0.05)?;
    println!(
        "h = {:.5}, L = {}, t_crit = {:.4}",
        bw.h, bw.l, report.t_crit
    );
    println!("predicted: t1 + t2 = {:.2} s", onset.t_onset);
    println!(
        "j_hat at t = {:.3}: {:.4}",
        report.times[0], report.j_hat[0]
    );

    println!("rejected per 10 s:");
    for b in 0..20 {
        let lo = 10.0 * b as f64;
        let f = report.rejection_fraction(lo, lo + 10.0).unwrap_or(f64::NAN);
        println!(
            "  [{lo:>5.0}, {:>5.0})  {:>5.1}%  {}",
            lo + 10.0,
            100.0 * f,
            "#".repeat((40.0 * f) as usize)
        );
    }
    match report.acceptance_onset(10.0, 0.8) {
        Some(t) => println!("sustained acceptance from t = {t:.2} s"),
        None => println!("no sustained acceptance"),
    }
    Ok(())
}
