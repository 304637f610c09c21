//! Monte-Carlo ground truth for a known model: the path measure of a few
//! balls and the extrapolated path density along a transect, next to the
//! estimate from one sample.
//!
//!     cargo run --release --example path_density_oracle

use pathdensity::oracle::{OracleConfig, PathBank};
use pathdensity::path_density::PathDensityRun;
use pathdensity::{FilamentModel, Vec2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pathdensity::Result<()> {
    let model = FilamentModel::two_gaussian();
    let cfg = OracleConfig::for_model(&model, 20_000);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bank = PathBank::sample(&model, &model, &cfg, &mut rng)?;
    println!("{} true ascent paths, r1 = {:.4}", bank.len(), cfg.r1);

    for (x, r) in [(Vec2::new(-1.0, 0.5), 0.05), (Vec2::new(0.0, 0.5), 0.05), (Vec2::new(0.0, 0.0), 0.1)] {
        let m = bank.path_measure(x, r);
        println!("path measure of B(({:+.1}, {:+.1}), {r}) = {:.4} ± {:.4}", x.x, x.y, m.value, m.std_error);
    }

    let cloud = model.sample(800, &mut rng)?;
    let run = PathDensityRun::with_defaults(&cloud)?;
    println!("\n   y     oracle p   ± se      estimate (n = 800)");
    for k in 0..=8 {
        let x = Vec2::new(-1.0, 0.1 + 0.1 * k as f64);
        let truth = bank.path_density(x, cfg.r1);
        let flag = if truth.saturated { "  saturated" } else { "" };
        println!("  {:.2}   {:8.4}  {:6.4}    {:8.4}{flag}", x.y, truth.value, truth.std_error, run.estimator.estimate(x));
    }
    Ok(())
}
