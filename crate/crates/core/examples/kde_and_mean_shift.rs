//! Kernel density estimate of a two-cluster sample, its derivatives, and the
//! mean-shift trajectory of one point.
//!
//!     cargo run --release --example kde_and_mean_shift

use pathdensity::flow::FlowConfig;
use pathdensity::{mean_shift_path, FilamentModel, Kde, KernelSpec, Vec2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pathdensity::Result<()> {
    let model = FilamentModel::two_gaussian();
    let cloud = model.sample(400, &mut ChaCha8Rng::seed_from_u64(3))?;
    let kernel = KernelSpec::gaussian();
    let kde = Kde::new(&cloud, kernel, 0.3)?;

    for x in [Vec2::new(-1.0, 0.0), Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.5)] {
        let g = kde.gradient(x);
        let hs = kde.hessian(x);
        println!("x = ({:5.2}, {:5.2})  f = {:.4}  grad = ({:+.4}, {:+.4})  hessian = [{:+.3} {:+.3}; {:+.3}]",
            x.x, x.y, kde.density(x), g.x, g.y, hs.xx, hs.xy, hs.yy);
    }

    let start = cloud.points()[0];
    let cfg = FlowConfig::for_kde(&kde);
    let path = mean_shift_path(&cloud, &kernel, kde.bandwidth(), start, &cfg)?;
    println!("\nmean shift from ({:.3}, {:.3}): {} iterations, stop {:?}", start.x, start.y, path.step_count, path.stop);
    for (v, f) in path.vertices.iter().zip(&path.values).step_by((path.len() / 8).max(1)) {
        println!("  ({:+.4}, {:+.4})  f = {:.5}", v.x, v.y, f);
    }
    let end = path.end();
    println!("  end ({:+.4}, {:+.4})  |grad| = {:.2e}", end.x, end.y, path.terminal_gradient_norm);
    Ok(())
}
