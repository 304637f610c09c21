//! Monte-Carlo ground truth for the path measure and the path density,
//! plus the convergence-rate harness.
//!
//! A [`PathBank`] holds the ascent paths of `n_mc` draws from the true
//! density, traced on the true field. The path measure of a ball is the
//! fraction of stored paths meeting it, and the path density is
//! extrapolated from two radii:
//!
//! ```text
//! p(x) ≈ 2 π(B(x, r₁))/r₁ − π(B(x, 2r₁))/(2r₁)
//! ```

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{find_critical_points, trace_ascent_path, CriticalKind, CriticalPoint, CriticalSearch, FlowConfig, ScalarFieldSource};
use crate::geometry::{decimate_polyline, PointIndex, SegmentIndex, SegmentScratch, Vec2};
use crate::kernels::{KernelSpec, PointCloud};
use crate::levelset::{GridField, GridSpec};
use crate::model::FilamentModel;
use crate::path_density::{default_bandwidths, PathDensityEstimator, PathDensityRun, PathEnsemble, PathMethod};

/// `π(A)` with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMeasureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_mc: usize,
}

impl PathMeasureEstimate {
    fn from_hits(hits: usize, n: usize) -> Self {
        let value = hits as f64 / n as f64;
        PathMeasureEstimate { value, std_error: (value * (1.0 - value) / n as f64).sqrt(), n_mc: n }
    }
}

/// Extrapolated path density at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathDensityEstimate {
    pub value: f64,
    pub std_error: f64,
    /// A local maximum lies within `2r₁`; the true value is unbounded there.
    pub saturated: bool,
    pub r1: f64,
}

/// Sampling and tracing settings for a [`PathBank`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n_mc: usize,
    /// Inner extrapolation radius.
    pub r1: f64,
    pub flow: FlowConfig,
}

impl OracleConfig {
    /// `r₁ = σ/20` and steps of `r₁` along the true field.
    pub fn for_model(model: &FilamentModel, n_mc: usize) -> Self {
        OracleConfig::with_radius(model, n_mc, model.max_sigma() / 20.0)
    }

    pub fn with_radius(model: &FilamentModel, n_mc: usize, r1: f64) -> Self {
        let sigma = model.max_sigma();
        let peak = model.structure_points().iter().map(|p| model.density(*p)).fold(0.0, f64::max);
        OracleConfig {
            n_mc,
            r1,
            flow: FlowConfig {
                step_scale: r1,
                max_steps: 100_000,
                grad_tolerance: 1e-7 * peak / sigma,
                min_displacement: 1e-3 * r1,
                ..FlowConfig::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_mc < 2 {
            return Err(Error::domain("oracle needs at least 2 Monte-Carlo draws"));
        }
        if !(self.r1.is_finite() && self.r1 > 0.0) {
            return Err(Error::domain(format!("oracle radius must be positive, got {}", self.r1)));
        }
        self.flow.validate()
    }
}

/// Ascent paths of independent draws from the true density.
#[derive(Clone, Debug)]
pub struct PathBank {
    index: SegmentIndex,
    terminals: PointIndex,
    n: usize,
}

impl PathBank {
    /// Draws `n_mc` points from `sampler` and traces each on `field`.
    pub fn sample<F, R>(field: &F, sampler: &FilamentModel, cfg: &OracleConfig, rng: &mut R) -> Result<Self>
    where
        F: ScalarFieldSource + ?Sized,
        R: Rng + ?Sized,
    {
        cfg.validate()?;
        let starts = sampler.sample(cfg.n_mc, rng)?;
        let gap = cfg.r1 / 100.0;
        let paths = starts
            .points()
            .par_iter()
            .map(|&x| trace_ascent_path(field, x, &cfg.flow).map(|p| decimate_polyline(&p.vertices, gap)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PathBank::from_paths(&paths, cfg.r1))
    }

    /// Wraps already traced paths; `resolution` sets the index cell size.
    pub fn from_paths(paths: &[Vec<Vec2>], resolution: f64) -> Self {
        let index = SegmentIndex::new(paths.iter().map(|p| p.as_slice()), 4.0 * resolution);
        // Many paths end at the same mode; keep one terminal per small cell.
        let q = resolution / 10.0;
        let cells: BTreeSet<(i64, i64)> = paths
            .iter()
            .filter_map(|p| p.last())
            .map(|t| ((t.x / q).round() as i64, (t.y / q).round() as i64))
            .collect();
        let terminals = cells.into_iter().map(|(i, j)| Vec2::new(i as f64 * q, j as f64 * q)).collect();
        PathBank { index, terminals: PointIndex::new(terminals, 4.0 * resolution), n: paths.len() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch(&self) -> BankScratch {
        BankScratch { segments: self.index.scratch(), hits: Vec::new() }
    }

    /// `π(B̄(center, r))`.
    pub fn path_measure(&self, center: Vec2, r: f64) -> PathMeasureEstimate {
        let mut s = self.scratch();
        self.index.min_distances(center, r, &mut s.segments, &mut s.hits);
        PathMeasureEstimate::from_hits(s.hits.len(), self.n)
    }

    /// `π` of a union of closed balls.
    pub fn path_measure_union(&self, balls: &[(Vec2, f64)]) -> PathMeasureEstimate {
        let mut s = self.scratch();
        let mut ids = BTreeSet::new();
        for &(c, r) in balls {
            self.index.min_distances(c, r, &mut s.segments, &mut s.hits);
            ids.extend(s.hits.iter().map(|h| h.0));
        }
        PathMeasureEstimate::from_hits(ids.len(), self.n)
    }

    /// Counts of paths within `r₁` and within `2r₁` of `x`.
    fn hit_counts(&self, x: Vec2, r1: f64, s: &mut BankScratch) -> (usize, usize) {
        self.index.min_distances(x, 2.0 * r1, &mut s.segments, &mut s.hits);
        let inner = s.hits.iter().filter(|h| h.1 <= r1).count();
        (inner, s.hits.len())
    }

    fn saturated(&self, x: Vec2, r2: f64) -> bool {
        let mut hit = false;
        self.terminals.for_each_candidate(x, r2, |_, t| hit |= t.distance(x) <= r2);
        hit
    }

    pub fn path_density_with(&self, x: Vec2, r1: f64, s: &mut BankScratch) -> PathDensityEstimate {
        let (n1, n2) = self.hit_counts(x, r1, s);
        let n = self.n as f64;
        let r2 = 2.0 * r1;
        let saturated = self.saturated(x, r2);
        if n2 == 0 {
            return PathDensityEstimate { value: 0.0, std_error: 0.0, saturated, r1 };
        }
        // Per-draw contributions: 2/r₁ − 1/r₂ inside r₁, −1/r₂ in the annulus.
        let z_in = 2.0 / r1 - 1.0 / r2;
        let z_ring = -1.0 / r2;
        let ring = (n2 - n1) as f64;
        let mean = (n1 as f64 * z_in + ring * z_ring) / n;
        let second = (n1 as f64 * z_in * z_in + ring * z_ring * z_ring) / n;
        let var = (second - mean * mean).max(0.0);
        PathDensityEstimate { value: mean, std_error: (var / n).sqrt(), saturated, r1 }
    }

    /// Extrapolated path density at `x`.
    pub fn path_density(&self, x: Vec2, r1: f64) -> PathDensityEstimate {
        self.path_density_with(x, r1, &mut self.scratch())
    }

    /// Path density at many points in parallel, preserving order.
    pub fn path_density_many(&self, xs: &[Vec2], r1: f64) -> Vec<PathDensityEstimate> {
        xs.par_iter().map_init(|| self.scratch(), |s, &x| self.path_density_with(x, r1, s)).collect()
    }

    /// Path density over a grid, with standard errors and saturation flags.
    pub fn field(&self, grid: &GridSpec, r1: f64) -> OracleField {
        let estimates = self.path_density_many(&grid.nodes(), r1);
        let values = estimates.iter().map(|e| e.value).collect();
        let saturated = estimates.iter().map(|e| e.saturated).collect();
        let std_errors = estimates.iter().map(|e| e.std_error).collect();
        let field = GridField::new(*grid, values).and_then(|f| f.with_saturated(saturated)).expect("one value per node");
        OracleField { field, std_errors }
    }
}

/// Per-thread buffers for [`PathBank`] queries.
#[derive(Clone, Debug)]
pub struct BankScratch {
    segments: SegmentScratch,
    hits: Vec<(u32, f64)>,
}

/// The oracle path density over a grid.
#[derive(Clone, Debug)]
pub struct OracleField {
    pub field: GridField,
    pub std_errors: Vec<f64>,
}

/// `π(B̄(center, r))` from a fresh bank of `n_mc` paths.
pub fn path_measure<F, R>(field: &F, sampler: &FilamentModel, center: Vec2, r: f64, n_mc: usize, rng: &mut R) -> Result<PathMeasureEstimate>
where
    F: ScalarFieldSource + ?Sized,
    R: Rng + ?Sized,
{
    if !(r > 0.0) {
        return Err(Error::domain(format!("ball radius must be positive, got {r}")));
    }
    let cfg = OracleConfig::with_radius(sampler, n_mc, (sampler.max_sigma() / 20.0).min(r));
    Ok(PathBank::sample(field, sampler, &cfg, rng)?.path_measure(center, r))
}

/// Extrapolated path density at `x` from a fresh bank of `n_mc` paths.
pub fn path_density_oracle<F, R>(field: &F, sampler: &FilamentModel, x: Vec2, r1: f64, n_mc: usize, rng: &mut R) -> Result<PathDensityEstimate>
where
    F: ScalarFieldSource + ?Sized,
    R: Rng + ?Sized,
{
    let cfg = OracleConfig::with_radius(sampler, n_mc, r1);
    Ok(PathBank::sample(field, sampler, &cfg, rng)?.path_density(x, r1))
}

/// The path-density estimator built from paths traced on the true field.
pub fn true_path_estimator<F: ScalarFieldSource + ?Sized>(
    cloud: &PointCloud,
    field: &F,
    k: KernelSpec,
    nu: f64,
    flow: &FlowConfig,
) -> Result<PathDensityEstimator> {
    let ensemble = PathEnsemble::trace(field, cloud.points(), flow)?;
    PathDensityEstimator::new(&ensemble, k, nu)
}

/// `pₙ*(x)`: the estimator with every observation's path traced on the true field.
pub fn estimate_with_true_paths(cloud: &PointCloud, model: &FilamentModel, k: KernelSpec, nu: f64, x: Vec2) -> Result<f64> {
    let flow = OracleConfig::with_radius(model, 2, nu / 4.0).flow;
    Ok(true_path_estimator(cloud, model, k, nu, &flow)?.estimate(x))
}

/// Critical points of the model over its support box.
pub fn model_critical_points(model: &FilamentModel) -> Result<Vec<CriticalPoint>> {
    find_critical_points(model, model.support_box(), &CriticalSearch::default())
}

/// Locations of the maxima and saddles in `points`.
pub fn maxima_and_saddles(points: &[CriticalPoint]) -> (Vec<Vec2>, Vec<Vec2>) {
    let pick = |kind| points.iter().filter(|c| c.kind == kind).map(|c| c.location).collect();
    (pick(CriticalKind::Maximum), pick(CriticalKind::Saddle))
}

/// Grid nodes farther than `radius` from every excluded point.
pub fn probe_grid(grid: &GridSpec, exclude: &[Vec2], radius: f64) -> Vec<Vec2> {
    grid.nodes().into_iter().filter(|x| exclude.iter().all(|c| c.distance(*x) > radius)).collect()
}

/// Probe points for a rate study: a `per_side × per_side` grid over the
/// structure box grown by `2σ`, minus balls of radius `2ν(n_min)` around
/// the model's maxima and saddles. Returns the points and that radius.
pub fn rate_probe_points(model: &FilamentModel, cfg: &ConvergenceConfig, per_side: usize) -> Result<(Vec<Vec2>, f64)> {
    let sigma = model.max_sigma();
    let structure = crate::geometry::Rect::bounding(&model.structure_points())
        .ok_or_else(|| Error::domain("model has no filaments or clusters"))?;
    let spread_box = structure.expanded(3.0 * sigma);
    let spread = spread_box.width().max(spread_box.height());
    let n_min = cfg.n_list.iter().copied().min().ok_or_else(|| Error::domain("empty sample-size list"))?;
    let radius = 2.0 * default_bandwidths(n_min, spread, cfg.c_h, cfg.c_nu)?.nu;
    let grid = GridSpec::square(structure.expanded(2.0 * sigma), per_side)?;
    let (maxima, saddles) = maxima_and_saddles(&model_critical_points(model)?);
    let exclude: Vec<Vec2> = maxima.into_iter().chain(saddles).collect();
    Ok((probe_grid(&grid, &exclude, radius), radius))
}

/// Probe points with their oracle path densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub points: Vec<Vec2>,
    pub truth: Vec<f64>,
    pub std_errors: Vec<f64>,
}

impl ProbeSet {
    pub fn from_bank(bank: &PathBank, points: Vec<Vec2>, r1: f64) -> Self {
        let est = bank.path_density_many(&points, r1);
        ProbeSet { truth: est.iter().map(|e| e.value).collect(), std_errors: est.iter().map(|e| e.std_error).collect(), points }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub c_h: f64,
    pub c_nu: f64,
    pub method: PathMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub replicate: usize,
    pub sup_error: f64,
}

/// Least-squares fit of `log sup_error` on `log n` with a normal 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub fit: SlopeFit,
}

impl RateTable {
    pub fn from_rows(rows: Vec<RateRow>) -> Result<Self> {
        let fit = fit_log_log(&rows)?;
        Ok(RateTable { rows, fit })
    }

    /// `(n, median sup_error)` in order of first appearance of `n`.
    pub fn medians(&self) -> Vec<(usize, f64)> {
        let mut ns: Vec<usize> = Vec::new();
        for r in &self.rows {
            if !ns.contains(&r.n) {
                ns.push(r.n);
            }
        }
        ns.into_iter()
            .map(|n| {
                let errs: Vec<f64> = self.rows.iter().filter(|r| r.n == n).map(|r| r.sup_error).collect();
                (n, median(&errs))
            })
            .collect()
    }
}

/// Median (mean of the middle pair for even counts).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn fit_log_log(rows: &[RateRow]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.sup_error > 0.0).map(|r| ((r.n as f64).ln(), r.sup_error.ln())).collect();
    let m = pts.len() as f64;
    if pts.len() < 3 {
        return Err(Error::domain("slope fit needs at least three positive errors"));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("slope fit needs at least two distinct sample sizes"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let std_error = (rss / (m - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, intercept, std_error, ci_low: slope - 1.96 * std_error, ci_high: slope + 1.96 * std_error })
}

/// Runs the estimator for each `(n, replicate)` and records the largest
/// deviation from the oracle over the probes.
pub fn convergence_experiment<R: Rng + ?Sized>(model: &FilamentModel, cfg: &ConvergenceConfig, probes: &ProbeSet, rng: &mut R) -> Result<RateTable> {
    if cfg.n_list.is_empty() || cfg.replicates == 0 {
        return Err(Error::domain("convergence experiment needs sample sizes and replicates"));
    }
    if probes.points.is_empty() {
        return Err(Error::domain("convergence experiment needs probe points"));
    }
    let mut rows = Vec::with_capacity(cfg.n_list.len() * cfg.replicates);
    for &n in &cfg.n_list {
        for replicate in 0..cfg.replicates {
            let mut sub = ChaCha8Rng::seed_from_u64(rng.random());
            let cloud = model.sample(n, &mut sub)?;
            let plan = default_bandwidths(n, cloud.spread(), cfg.c_h, cfg.c_nu)?;
            let run = PathDensityRun::new(&cloud, KernelSpec::gaussian(), plan, cfg.method)?;
            let est = run.estimator.estimate_many(&probes.points);
            let sup_error = est.iter().zip(&probes.truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            rows.push(RateRow { n, replicate, sup_error });
        }
    }
    RateTable::from_rows(rows)
}

/// The four points at distance `r` from a saddle where the ascent flow is
/// tangent to the circle, one per quadrant of the Hessian eigenbasis.
pub fn saddle_tangency_points<F: ScalarFieldSource + ?Sized>(field: &F, saddle: Vec2, r: f64) -> Vec<Vec2> {
    let (lo, hi) = field.hessian(saddle).eigenvalues();
    let e1 = field.hessian(saddle).eigenvector(hi);
    let e2 = e1.perp();
    let samples = 720;
    let mut out = Vec::with_capacity(4);
    for q in 0..4 {
        let (s1, s2) = match q {
            0 => (1.0, 1.0),
            1 => (-1.0, 1.0),
            2 => (-1.0, -1.0),
            _ => (1.0, -1.0),
        };
        // Tangency: the radial component of the gradient vanishes.
        let at = |theta: f64| saddle + (e1 * (s1 * theta.cos()) + e2 * (s2 * theta.sin())) * r;
        let radial = |theta: f64| {
            let x = at(theta);
            field.gradient(x).dot(x - saddle)
        };
        let mut best = None;
        for k in 0..samples {
            let t0 = std::f64::consts::FRAC_PI_2 * k as f64 / samples as f64;
            let t1 = std::f64::consts::FRAC_PI_2 * (k + 1) as f64 / samples as f64;
            let (f0, f1) = (radial(t0), radial(t1));
            if f0 == 0.0 || f0.signum() != f1.signum() {
                let (mut a, mut b, mut fa) = (t0, t1, f0);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    let fm = radial(m);
                    if fm.signum() == fa.signum() && fm != 0.0 {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                best = Some(0.5 * (a + b));
                break;
            }
        }
        // Fall back to the quadratic-model answer when no sign change is found.
        let theta = best.unwrap_or_else(|| (lo.abs() / (hi.abs() + lo.abs())).sqrt().acos());
        out.push(at(theta));
    }
    out
}
