//! Upper level set of the oracle path density for a pentagon model and a
//! check that it stays within `d(λ)` of the true edges once small balls
//! around maxima and saddles are removed. Also runs the relaxed variant that
//! tests cells near saddles against `d(4λ)`.
//!
//!     cargo run --release --example level_set_containment

use pathdensity::levelset::{containment_check, d_of_lambda, level_set, quantile, ContainmentParams, ContainmentVariant, PlanarSet};
use pathdensity::model::pentagon_example;
use pathdensity::oracle::{maxima_and_saddles, model_critical_points, OracleConfig, PathBank};
use pathdensity::path_density::{default_bandwidths, DEFAULT_C_H, DEFAULT_C_NU};
use pathdensity::GridSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pathdensity::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (model, _) = pentagon_example(&mut rng)?;
    let cfg = OracleConfig::for_model(&model, 5_000);
    let bank = PathBank::sample(&model, &model, &cfg, &mut rng)?;

    let reference = model.sample(2000, &mut rng)?;
    let values: Vec<f64> = bank.path_density_many(reference.points(), cfg.r1).iter().map(|e| e.value).collect();
    let lambda = quantile(&values, 0.9)?;

    let grid = GridSpec::square(model.bounds(), 120)?;
    let field = bank.field(&grid, cfg.r1);
    let level = level_set(&field.field, lambda);
    let (maxima, saddles) = maxima_and_saddles(&model_critical_points(&model)?);
    let sigma = model.max_sigma();
    println!("lambda = {lambda:.3}  d(lambda) = {:.4}  sigma = {sigma}", d_of_lambda(sigma, lambda)?);
    println!("{} maxima, {} saddles, {} level-set cells", maxima.len(), saddles.len(), level.count());

    let truth = PlanarSet::points(model.structure_points());
    for variant in [ContainmentVariant::ExcludeSaddles, ContainmentVariant::RelaxedSaddles] {
        let params = ContainmentParams {
            sigma,
            lambda,
            epsilon: 2.0 * grid.cell_diagonal(),
            maxima: &maxima,
            saddles: &saddles,
            nu: default_bandwidths(500, 1.0, DEFAULT_C_H, DEFAULT_C_NU)?.nu,
            variant,
        };
        let r = containment_check(&grid, &level, &truth, &params)?;
        println!("{variant:?}: {} of {} tested cells inside ({:.4}), {} excluded", r.inside_cells, r.tested_cells, r.fraction, r.excluded_cells);
    }
    Ok(())
}
