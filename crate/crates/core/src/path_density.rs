//! The path-density estimator: kernel-smoothed distances from a query point
//! to the ascent paths of every observation.
//!
//! ```text
//! p̂ₙ(x) = (1/n) Σᵢ K(D(x, P̂(Xᵢ)) / ν) / (ν ∫₀^∞ K)
//! ```
//!
//! Dividing by the half-line mass of `K` makes a single straight path
//! integrate to 2 across its width, the same as `π(B(x, r))/r` for a ball
//! of diameter `2r`, so `p̂ₙ` targets the path density itself.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{mean_shift_path_on, trace_ascent_path, AscentPath, FlowConfig, ScalarFieldSource};
use crate::geometry::{decimate_polyline, point_polyline_distance, SegmentIndex, SegmentScratch, Vec2};
use crate::kernels::{Kde, KernelSpec, PointCloud, Profile};
use crate::levelset::{GridField, GridSpec};

/// Default multiplier of `spread` in the KDE bandwidth schedule.
pub const DEFAULT_C_H: f64 = 0.1;
/// Default multiplier of `spread` in the path bandwidth schedule.
pub const DEFAULT_C_NU: f64 = 0.05;

/// Reach of the Gaussian profile in the indexed estimator, in units of ν.
/// A path beyond it would contribute less than `e⁻¹⁸ K(0)`.
pub const GAUSSIAN_PATH_REACH: f64 = 6.0;

/// Vertices closer than this fraction of ν are merged in the indexed estimator.
pub const VERTEX_MERGE_FRACTION: f64 = 0.005;

fn reach(kernel: &KernelSpec) -> f64 {
    match kernel.profile {
        Profile::Gaussian => GAUSSIAN_PATH_REACH,
        Profile::TruncatedGaussian { cutoff } => cutoff,
    }
}

/// Exact distance from `x` to the polyline through the path's vertices
/// from `trim` on (at least the terminal vertex).
pub fn distance_to_path(x: Vec2, path: &AscentPath, trim: usize) -> f64 {
    point_polyline_distance(x, path.trimmed(trim))
}

/// How ascent paths are traced on a density estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathMethod {
    /// Runge–Kutta integration of the gradient flow.
    #[default]
    Flow,
    /// Mean-shift fixed-point iteration.
    MeanShift,
}

/// One ascent path per observation, in data order.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    paths: Vec<AscentPath>,
    trim: usize,
}

impl PathEnsemble {
    pub fn new(paths: Vec<AscentPath>, trim: usize) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::domain("path ensemble is empty"));
        }
        if paths.iter().any(|p| p.vertices.is_empty()) {
            return Err(Error::domain("path without vertices"));
        }
        Ok(PathEnsemble { paths, trim })
    }

    /// Traces the path of every point of `cloud` on the estimate `kde`.
    pub fn trace_kde(kde: &Kde, cloud: &PointCloud, cfg: &FlowConfig, method: PathMethod) -> Result<Self> {
        let paths = cloud
            .points()
            .par_iter()
            .map(|&x| match method {
                PathMethod::Flow => trace_ascent_path(kde, x, cfg),
                PathMethod::MeanShift => mean_shift_path_on(kde, x, cfg),
            })
            .collect::<Result<Vec<_>>>()?;
        PathEnsemble::new(paths, 0)
    }

    /// Traces the ascent path of each start point on an arbitrary field.
    pub fn trace<F: ScalarFieldSource + ?Sized>(field: &F, starts: &[Vec2], cfg: &FlowConfig) -> Result<Self> {
        let paths = starts.par_iter().map(|&x| trace_ascent_path(field, x, cfg)).collect::<Result<Vec<_>>>()?;
        PathEnsemble::new(paths, 0)
    }

    pub fn with_trim(mut self, trim: usize) -> Self {
        self.trim = trim;
        self
    }

    pub fn paths(&self) -> &[AscentPath] {
        &self.paths
    }

    pub fn trim(&self) -> usize {
        self.trim
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// The vertex runs that enter distance queries.
    pub fn polylines(&self) -> impl Iterator<Item = &[Vec2]> {
        self.paths.iter().map(move |p| p.trimmed(self.trim))
    }

    pub fn into_paths(self) -> Vec<AscentPath> {
        self.paths
    }
}

fn check_bandwidth(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("path bandwidth must be positive, got {nu}")))
    }
}

/// `p̂ₙ(x)` by direct summation over every path.
pub fn estimate_path_density(ensemble: &PathEnsemble, k: &KernelSpec, nu: f64, x: Vec2) -> Result<f64> {
    check_bandwidth(nu)?;
    if ensemble.is_empty() {
        return Err(Error::domain("path ensemble is empty"));
    }
    let sum = ensemble.polylines().fold(0.0, |acc, line| acc + k.profile_at(point_polyline_distance(x, line) / nu));
    Ok(sum / (ensemble.len() as f64 * nu * k.half_line_mass))
}

/// Indexed evaluator of `p̂ₙ`. Paths farther than the kernel reach are
/// skipped and vertices closer than `VERTEX_MERGE_FRACTION · ν` are merged,
/// which moves each distance by far less than `10⁻⁶ ν` on ascent paths.
#[derive(Clone, Debug)]
pub struct PathDensityEstimator {
    index: SegmentIndex,
    kernel: KernelSpec,
    nu: f64,
    n: usize,
}

impl PathDensityEstimator {
    pub fn new(ensemble: &PathEnsemble, kernel: KernelSpec, nu: f64) -> Result<Self> {
        PathDensityEstimator::from_polylines(ensemble.polylines(), kernel, nu)
    }

    /// Builds the estimator from bare vertex runs (each at least one vertex).
    pub fn from_polylines<'a, I>(polylines: I, kernel: KernelSpec, nu: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [Vec2]>,
    {
        check_bandwidth(nu)?;
        let lines: Vec<&[Vec2]> = polylines.into_iter().collect();
        if lines.is_empty() || lines.iter().any(|l| l.is_empty()) {
            return Err(Error::domain("path ensemble is empty"));
        }
        let n = lines.len();
        let merged: Vec<Vec<Vec2>> = lines.iter().map(|l| decimate_polyline(l, VERTEX_MERGE_FRACTION * nu)).collect();
        let index = SegmentIndex::new(merged.iter().map(|l| l.as_slice()), 0.5 * reach(&kernel) * nu);
        Ok(PathDensityEstimator { index, kernel, nu, n })
    }

    pub fn bandwidth(&self) -> f64 {
        self.nu
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch(&self) -> EstimatorScratch {
        EstimatorScratch { segments: self.index.scratch(), hits: Vec::new() }
    }

    /// `p̂ₙ(x)` reusing caller-owned buffers.
    pub fn estimate_with(&self, x: Vec2, scratch: &mut EstimatorScratch) -> f64 {
        let reach = reach(&self.kernel) * self.nu;
        self.index.min_distances(x, reach, &mut scratch.segments, &mut scratch.hits);
        let sum = scratch.hits.iter().fold(0.0, |acc, &(_, d)| acc + self.kernel.profile_at(d / self.nu));
        sum / (self.n as f64 * self.nu * self.kernel.half_line_mass)
    }

    pub fn estimate(&self, x: Vec2) -> f64 {
        self.estimate_with(x, &mut self.scratch())
    }

    /// Evaluates at many points in parallel, preserving order.
    pub fn estimate_many(&self, xs: &[Vec2]) -> Vec<f64> {
        xs.par_iter().map_init(|| self.scratch(), |s, &x| self.estimate_with(x, s)).collect()
    }

    /// `p̂ₙ` at every node of `grid`.
    pub fn field(&self, grid: &GridSpec) -> GridField {
        let values = self.estimate_many(&grid.nodes());
        GridField::new(*grid, values).expect("one value per node")
    }
}

/// Per-thread buffers for [`PathDensityEstimator::estimate_with`].
#[derive(Clone, Debug)]
pub struct EstimatorScratch {
    segments: SegmentScratch,
    hits: Vec<(u32, f64)>,
}

/// Rasterises `p̂ₙ` over `grid`.
pub fn path_density_field(ensemble: &PathEnsemble, k: &KernelSpec, nu: f64, grid: &GridSpec) -> Result<GridField> {
    Ok(PathDensityEstimator::new(ensemble, *k, nu)?.field(grid))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BandwidthSource {
    User,
    /// `h = c_h·spread·(log n)^¼/n^⅛`, `ν = c_ν·spread·log n/n^⅓`.
    Schedule { c_h: f64, c_nu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandwidthPlan {
    pub h: f64,
    pub nu: f64,
    pub source: BandwidthSource,
}

impl BandwidthPlan {
    pub fn user(h: f64, nu: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::domain(format!("KDE bandwidth must be positive, got {h}")));
        }
        check_bandwidth(nu)?;
        Ok(BandwidthPlan { h, nu, source: BandwidthSource::User })
    }
}

/// Bandwidths following the rate-optimal schedule in `n`.
pub fn default_bandwidths(n: usize, spread: f64, c_h: f64, c_nu: f64) -> Result<BandwidthPlan> {
    if n < 2 {
        return Err(Error::domain(format!("bandwidth schedule needs n >= 2, got {n}")));
    }
    if !(spread.is_finite() && spread > 0.0) {
        return Err(Error::domain(format!("spread must be positive, got {spread}")));
    }
    if !(c_h > 0.0 && c_nu > 0.0 && c_h.is_finite() && c_nu.is_finite()) {
        return Err(Error::domain("bandwidth constants must be positive"));
    }
    let nf = n as f64;
    let log_n = nf.ln();
    Ok(BandwidthPlan {
        h: c_h * spread * log_n.powf(0.25) / nf.powf(0.125),
        nu: c_nu * spread * log_n / nf.cbrt(),
        source: BandwidthSource::Schedule { c_h, c_nu },
    })
}

/// The full estimation pipeline on one sample.
#[derive(Clone, Debug)]
pub struct PathDensityRun {
    pub bandwidths: BandwidthPlan,
    pub kde: Kde,
    pub ensemble: PathEnsemble,
    pub estimator: PathDensityEstimator,
}

impl PathDensityRun {
    /// KDE, one ascent path per point, and the indexed estimator.
    pub fn new(cloud: &PointCloud, kernel: KernelSpec, bandwidths: BandwidthPlan, method: PathMethod) -> Result<Self> {
        let kde = Kde::new(cloud, kernel, bandwidths.h)?;
        let cfg = FlowConfig::for_kde(&kde);
        let ensemble = PathEnsemble::trace_kde(&kde, cloud, &cfg, method)?;
        let estimator = PathDensityEstimator::new(&ensemble, kernel, bandwidths.nu)?;
        Ok(PathDensityRun { bandwidths, kde, ensemble, estimator })
    }

    /// Same, with the default bandwidth schedule for this sample.
    pub fn with_defaults(cloud: &PointCloud) -> Result<Self> {
        let plan = default_bandwidths(cloud.len(), cloud.spread(), DEFAULT_C_H, DEFAULT_C_NU)?;
        PathDensityRun::new(cloud, KernelSpec::gaussian(), plan, PathMethod::Flow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::StopReason;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point_path(z: Vec2) -> AscentPath {
        AscentPath::single(z, 1.0, 0.0, 1.0, StopReason::GradientTolerance)
    }

    fn line_path(vs: &[Vec2]) -> AscentPath {
        let mut p = point_path(vs[0]);
        p.vertices = vs.to_vec();
        p.times = (0..vs.len()).map(|k| k as f64).collect();
        p.values = vec![1.0; vs.len()];
        p
    }

    #[test]
    fn distance_cases() {
        let z = Vec2::new(1.0, 2.0);
        assert_eq!(distance_to_path(Vec2::new(4.0, 6.0), &point_path(z), 0), 5.0);
        let seg = line_path(&[Vec2::ZERO, Vec2::new(1.0, 0.0)]);
        assert_eq!(distance_to_path(Vec2::new(0.5, 1.0), &seg, 0), 1.0);
        assert_eq!(distance_to_path(Vec2::new(1.0, 0.0), &seg, 0), 0.0);
        // Trimming past the end keeps the terminal vertex.
        assert_eq!(distance_to_path(Vec2::new(1.0, 1.0), &seg, 5), 1.0);
    }

    #[test]
    fn degenerate_ensemble() {
        let z = Vec2::new(0.3, -0.2);
        let k = KernelSpec::gaussian();
        let e = PathEnsemble::new(vec![point_path(z); 7], 0).unwrap();
        let nu = 0.4;
        let est = PathDensityEstimator::new(&e, k, nu).unwrap();
        for x in [z, Vec2::new(0.5, 0.5), Vec2::new(-1.0, 0.0)] {
            let expected = k.profile_at(x.distance(z) / nu) / (nu * k.half_line_mass);
            let direct = estimate_path_density(&e, &k, nu, x).unwrap();
            assert!((direct - expected).abs() <= 1e-15 * expected.max(1.0));
            assert!((est.estimate(x) - expected).abs() <= 1e-15 * expected.max(1.0));
        }
        let far = Vec2::new(z.x + 21.0 * nu, z.y);
        assert!(estimate_path_density(&e, &k, nu, far).unwrap() < 1e-80 / nu);
        assert!(estimate_path_density(&e, &k, 0.0, far).is_err());
    }

    #[test]
    fn straight_path_has_unit_crossing_mass() {
        // Integrating p̂ across a long straight path gives one path per unit length.
        let e = PathEnsemble::new(vec![line_path(&[Vec2::new(-50.0, 0.0), Vec2::new(50.0, 0.0)])], 0).unwrap();
        let k = KernelSpec::gaussian();
        let nu = 0.1;
        let mass = crate::kernels::simpson(|y| estimate_path_density(&e, &k, nu, Vec2::new(0.0, y)).unwrap(), -2.0, 2.0, 4000);
        assert!((mass - 2.0).abs() < 1e-9, "{mass}");
    }

    #[test]
    fn schedule_values() {
        let plan = default_bandwidths(1000, 1.0, 1.0, 1.0).unwrap();
        let log_n = 1000f64.ln();
        assert!((plan.h - log_n.powf(0.25) / 1000f64.powf(0.125)).abs() < 1e-15);
        assert!((plan.h - 0.6837).abs() < 1e-4);
        assert!((plan.nu - 0.69078).abs() < 1e-5);
        let scaled = default_bandwidths(1000, 3.0, 1.0, 1.0).unwrap();
        assert!((scaled.h - 3.0 * plan.h).abs() < 1e-14 && (scaled.nu - 3.0 * plan.nu).abs() < 1e-14);
        assert!(default_bandwidths(1, 1.0, 1.0, 1.0).is_err());
        // h decreases once log n > 2 and ν once log n > 3.
        let mut prev = default_bandwidths(21, 1.0, 1.0, 1.0).unwrap();
        let mut n = 22usize;
        while n <= 1_000_000 {
            let p = default_bandwidths(n, 1.0, 1.0, 1.0).unwrap();
            assert!(p.h < prev.h && p.nu < prev.nu, "n = {n}");
            prev = p;
            n = (n as f64 * 1.01).ceil() as usize;
        }
    }

    #[test]
    fn indexed_matches_direct_on_random_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let paths: Vec<AscentPath> = (0..60)
            .map(|_| {
                let len = rng.random_range(1..12);
                let mut v = Vec2::new(rng.random(), rng.random());
                let mut vs = vec![v];
                for _ in 1..len {
                    v = v + Vec2::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05));
                    vs.push(v);
                }
                line_path(&vs)
            })
            .collect();
        let e = PathEnsemble::new(paths, 2).unwrap();
        let k = KernelSpec::gaussian();
        let est = PathDensityEstimator::new(&e, k, 0.03).unwrap();
        for _ in 0..200 {
            let x = Vec2::new(rng.random_range(-0.2..1.2), rng.random_range(-0.2..1.2));
            let a = est.estimate(x);
            let b = estimate_path_density(&e, &k, 0.03, x).unwrap();
            // Paths past the reach are dropped, each worth at most e⁻¹⁸ K(0).
            let cut = (-0.5 * GAUSSIAN_PATH_REACH * GAUSSIAN_PATH_REACH).exp() / (0.03 * k.half_line_mass);
            assert!((a - b).abs() <= 1e-12 * b + cut, "{a} vs {b}");
        }
    }
}
