//! Drive a run from a TOML configuration, as the command-line tool does.

use wssgeom::cli::config::RunConfig;
use wssgeom::cli::scenarios::test_model;

const CONFIG: &str = r#"
paths = 400
seed = 5
groups = 20
alpha = 0.05

[model]
kind = "ou"
theta = 1.0
sigma = 1.0
init = "stationary"
dt = 0.01
duration = 5.0

[bandwidth]
l = 10
"#;

fn main() -> wssgeom::Result<()> {
    let cfg = RunConfig::from_toml(CONFIG)?;
    cfg.validate()?;
    let r = test_model(&cfg, &cfg.model, cfg.paths)?;
    println!(
        "{} evaluation times, rejected {:.3}",
        r.len(),
        r.rejection_fraction(0.0, 5.0).unwrap()
    );
    println!("resolved configuration:\n{}", cfg.to_toml());
    Ok(())
}
