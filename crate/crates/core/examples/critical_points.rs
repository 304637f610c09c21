//! Critical points of a model density and of a density estimate, found by
//! Newton iteration from a grid of seeds and classified by the Hessian.
//!
//!     cargo run --release --example critical_points

use pathdensity::oracle::model_critical_points;
use pathdensity::{find_critical_points, CriticalPoint, CriticalSearch, FilamentModel, Kde, KernelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(title: &str, points: &[CriticalPoint]) {
    println!("{title}");
    for c in points {
        let (a, b) = c.hessian_eigenvalues;
        println!("  {:<10} ({:+.4}, {:+.4})  eigenvalues {:+.4} {:+.4}", c.kind.as_str(), c.location.x, c.location.y, a, b);
    }
}

fn main() -> pathdensity::Result<()> {
    for (name, model) in [("two Gaussians", FilamentModel::two_gaussian()), ("triangle of clusters", FilamentModel::triangle_clusters())] {
        show(&format!("{name}: model density"), &model_critical_points(&model)?);
        let cloud = model.sample(1000, &mut ChaCha8Rng::seed_from_u64(2))?;
        let kde = Kde::new(&cloud, KernelSpec::gaussian(), 0.3)?;
        let found = find_critical_points(&kde, model.bounds(), &CriticalSearch::default())?;
        show(&format!("{name}: estimate, n = 1000, h = 0.3"), &found);
        println!();
    }
    Ok(())
}
