//! The four Duffing oscillators through the grouped test.

use wssgeom::cli::config::RunConfig;
use wssgeom::cli::scenarios::{test_model, ONSET_MIN_ACCEPT, ONSET_WINDOW};
use wssgeom::duffing_case;

fn main() -> wssgeom::Result<()> {
    let paths: usize = std::env::args()
        .nth(1)
        .map_or(2000, |s| s.parse().expect("paths"));
    let cfg = RunConfig::default();
    for case in 1..=4 {
        let spec = duffing_case(case)?;
        let r = test_model(&cfg, &spec, paths)?;
        let onset = r.acceptance_onset(ONSET_WINDOW, ONSET_MIN_ACCEPT);
        println!(
            "case {case}: rejected {:.3} on [0, 20], {:.3} on [50, 200]; onset {}",
            r.rejection_fraction(0.0, 20.0).unwrap_or(f64::NAN),
            r.rejection_fraction(50.0, 200.0).unwrap_or(f64::NAN),
            onset.map_or("none".to_string(), |t| format!("{t:.2} s")),
        );
    }
    Ok(())
}
