//! The full pipeline on a noisy pentagon: bandwidth schedule, ascent paths,
//! path density on a grid, the upper level set at the 0.9 quantile, and the
//! four-panel figure. Writes `pentagon.svg` and prints how far the level set
//! strays from the true edges.
//!
//!     cargo run --release --example pentagon_filaments [seed]

use pathdensity::levelset::{hausdorff_distance, level_set, quantile, PlanarSet};
use pathdensity::model::pentagon_example;
use pathdensity::path_density::PathDensityRun;
use pathdensity::svg::{four_panel_figure, FigureInput};
use pathdensity::{GridSpec, Rect, Vec2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pathdensity::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let (model, cloud) = pentagon_example(&mut ChaCha8Rng::seed_from_u64(seed))?;
    let run = PathDensityRun::with_defaults(&cloud)?;
    println!("n = {}  h = {:.4}  nu = {:.4}", cloud.len(), run.bandwidths.h, run.bandwidths.nu);

    let grid = GridSpec::square(Rect::new(-0.1, 1.1, -0.1, 1.1), 150)?;
    let field = run.estimator.field(&grid);
    let lambda = quantile(&run.estimator.estimate_many(cloud.points()), 0.9)?;
    let mask = level_set(&field, lambda);
    println!("lambda = {lambda:.3}, level set covers {} of {} cells", mask.count(), grid.len());

    let edges: Vec<Vec2> = model.structure_polylines().iter().flat_map(|p| densify(p, 0.002)).collect();
    let found = PlanarSet::mask(grid.clone(), mask.clone());
    let worst = pathdensity::levelset::directed_hausdorff(&found, &PlanarSet::points(edges.clone()))?;
    let both = hausdorff_distance(&found, &PlanarSet::points(edges))?;
    println!("farthest level-set cell from an edge: {worst:.4}");
    println!("Hausdorff distance to the edges:      {both:.4}");

    let paths = run.ensemble.paths();
    let trims: Vec<usize> = paths.iter().map(|p| p.trim_hint).collect();
    let svg = four_panel_figure(&FigureInput { points: cloud.points(), paths, trims: &trims, grid: &grid, mask: &mask });
    std::fs::write("pentagon.svg", svg)?;
    println!("wrote pentagon.svg");
    Ok(())
}

fn densify(vertices: &[Vec2], step: f64) -> Vec<Vec2> {
    let mut out = vec![vertices[0]];
    for w in vertices.windows(2) {
        let k = (w[0].distance(w[1]) / step).ceil().max(1.0) as usize;
        out.extend((1..=k).map(|i| w[0] + (w[1] - w[0]) * (i as f64 / k as f64)));
    }
    out
}
