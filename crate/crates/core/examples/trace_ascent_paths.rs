//! RK4 steepest-ascent paths on the density estimate of a sample, written
//! to `paths.csv` in the working directory.
//!
//!     cargo run --release --example trace_ascent_paths

use std::path::Path;

use pathdensity::flow::FlowConfig;
use pathdensity::path_density::PathMethod;
use pathdensity::{io, Kde, KernelSpec, PathEnsemble};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pathdensity::Result<()> {
    let model = pathdensity::FilamentModel::triangle_clusters();
    let cloud = model.sample(300, &mut ChaCha8Rng::seed_from_u64(5))?;
    let kde = Kde::new(&cloud, KernelSpec::gaussian(), 0.3)?;
    let cfg = FlowConfig::for_kde(&kde);
    let ensemble = PathEnsemble::trace_kde(&kde, &cloud, &cfg, PathMethod::Flow)?;

    let converged = ensemble.paths().iter().filter(|p| p.converged).count();
    let steps: usize = ensemble.paths().iter().map(|p| p.step_count).sum();
    let length: f64 = ensemble.paths().iter().map(|p| p.arclength()).sum();
    println!("{} paths, {converged} converged, {} steps on average, mean length {:.3}",
        ensemble.len(), steps / ensemble.len(), length / ensemble.len() as f64);

    let mut ends: Vec<(f64, f64)> = Vec::new();
    for p in ensemble.paths() {
        let e = p.end();
        if !ends.iter().any(|&(x, y)| (x - e.x).hypot(y - e.y) < 0.01) {
            ends.push((e.x, e.y));
        }
    }
    println!("distinct terminals:");
    for (x, y) in ends {
        println!("  ({x:+.4}, {y:+.4})");
    }

    io::write_paths_csv(Path::new("paths.csv"), ensemble.paths())?;
    println!("wrote paths.csv");
    Ok(())
}
