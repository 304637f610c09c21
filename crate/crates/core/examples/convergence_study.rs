//! Sup-norm error of the path-density estimator against the oracle on a
//! probe grid, for growing sample sizes, with a log-log slope fit.
//!
//!     cargo run --release --example convergence_study

use pathdensity::oracle::{convergence_experiment, rate_probe_points, ConvergenceConfig, OracleConfig, PathBank, ProbeSet};
use pathdensity::path_density::{PathMethod, DEFAULT_C_H, DEFAULT_C_NU};
use pathdensity::FilamentModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pathdensity::Result<()> {
    let model = FilamentModel::two_gaussian();
    let cfg = ConvergenceConfig { n_list: vec![200, 400, 800, 1600], replicates: 3, c_h: DEFAULT_C_H, c_nu: DEFAULT_C_NU, method: PathMethod::Flow };
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let oracle = OracleConfig::for_model(&model, 20_000);
    let bank = PathBank::sample(&model, &model, &oracle, &mut rng)?;
    let (points, radius) = rate_probe_points(&model, &cfg, 12)?;
    println!("{} probes, balls of radius {radius:.3} removed around maxima and saddles", points.len());
    let probes = ProbeSet::from_bank(&bank, points, oracle.r1);

    let table = convergence_experiment(&model, &cfg, &probes, &mut rng)?;
    for (n, m) in table.medians() {
        println!("n = {n:5}  median sup error {m:.4}");
    }
    let fit = &table.fit;
    println!("slope {:.3}  (95% CI {:.3} to {:.3})", fit.slope, fit.ci_low, fit.ci_high);
    Ok(())
}
