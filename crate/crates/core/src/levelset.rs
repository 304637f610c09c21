//! Rasterised fields, upper level sets, dilations and set distances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointIndex, Rect, Vec2};

/// A rectangular lattice of `nx × ny` nodes spanning `bounds` (corners included).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: Rect,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(bounds: Rect, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::domain(format!("grid needs at least 2x2 nodes, got {nx}x{ny}")));
        }
        if bounds.is_degenerate() || !bounds.min.is_finite() || !bounds.max.is_finite() {
            return Err(Error::domain("grid bounds must be a finite nondegenerate rectangle"));
        }
        Ok(GridSpec { bounds, nx, ny })
    }

    /// Square grid over `bounds`.
    pub fn square(bounds: Rect, n: usize) -> Result<Self> {
        GridSpec::new(bounds, n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        // Written so that refining `n - 1 → 2(n - 1)` reproduces shared nodes bit for bit.
        if i + 1 == self.nx {
            return self.bounds.max.x;
        }
        self.bounds.min.x + (self.bounds.width() * i as f64) / (self.nx - 1) as f64
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            return self.bounds.max.y;
        }
        self.bounds.min.y + (self.bounds.height() * j as f64) / (self.ny - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.x(i), self.y(j))
    }

    /// Flat index, row-major in `j`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    /// All nodes in flat-index order.
    pub fn nodes(&self) -> Vec<Vec2> {
        (0..self.len()).map(|k| {
            let (i, j) = self.coords(k);
            self.node(i, j)
        }).collect()
    }

    pub fn dx(&self) -> f64 {
        self.bounds.width() / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.bounds.height() / (self.ny - 1) as f64
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    /// Closest node to `p` (clamped to the grid).
    pub fn nearest_node(&self, p: Vec2) -> (usize, usize) {
        let fi = ((p.x - self.bounds.min.x) / self.dx()).round().clamp(0.0, (self.nx - 1) as f64);
        let fj = ((p.y - self.bounds.min.y) / self.dy()).round().clamp(0.0, (self.ny - 1) as f64);
        (fi as usize, fj as usize)
    }
}

/// Scalar values on a [`GridSpec`], with an optional flag marking nodes
/// whose value is unbounded (treated as above every level).
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: GridSpec,
    values: Vec<f64>,
    saturated: Option<Vec<bool>>,
}

impl GridField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!("grid has {} nodes but {} values were given", grid.len(), values.len())));
        }
        Ok(GridField { grid, values, saturated: None })
    }

    /// Evaluates `f` at every node in parallel.
    pub fn from_fn(grid: GridSpec, f: impl Fn(Vec2) -> f64 + Sync) -> Self {
        let values = grid.nodes().par_iter().map(|&x| f(x)).collect();
        GridField { grid, values, saturated: None }
    }

    pub fn with_saturated(mut self, saturated: Vec<bool>) -> Result<Self> {
        if saturated.len() != self.grid.len() {
            return Err(Error::domain("saturation mask does not match the grid"));
        }
        self.saturated = Some(saturated);
        Ok(self)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_saturated(&self, k: usize) -> bool {
        self.saturated.as_ref().is_some_and(|s| s[k])
    }

    pub fn saturated(&self) -> Option<&[bool]> {
        self.saturated.as_deref()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Flat index of the largest value (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        best
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, p: Vec2) -> Option<f64> {
        let g = &self.grid;
        if !g.bounds.contains(p) {
            return None;
        }
        let fx = ((p.x - g.bounds.min.x) / g.dx()).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((p.y - g.bounds.min.y) / g.dy()).clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v00 = self.value(i, j);
        let v10 = self.value(i + 1, j);
        let v01 = self.value(i, j + 1);
        let v11 = self.value(i + 1, j + 1);
        Some((1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11))
    }
}

/// Lower nearest-rank `q`-quantile: the `⌈q·n⌉`-th smallest value.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("quantile level must lie in (0, 1), got {q}")));
    }
    if values.is_empty() {
        return Err(Error::domain("quantile of an empty sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64 - 1e-9).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Quantile of the field, interpolated at the given points. Points outside
/// the grid are skipped.
pub fn quantile_threshold(field: &GridField, at: &[Vec2], q: f64) -> Result<f64> {
    let values: Vec<f64> = at.iter().filter_map(|p| field.interpolate(*p)).collect();
    quantile(&values, q)
}

/// A set of grid nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    grid_nx: usize,
    grid_ny: usize,
    cells: Vec<bool>,
}

impl Mask {
    pub fn empty(grid: &GridSpec) -> Self {
        Mask { grid_nx: grid.nx, grid_ny: grid.ny, cells: vec![false; grid.len()] }
    }

    pub fn full(grid: &GridSpec) -> Self {
        Mask { grid_nx: grid.nx, grid_ny: grid.ny, cells: vec![true; grid.len()] }
    }

    pub fn from_cells(grid: &GridSpec, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != grid.len() {
            return Err(Error::domain("mask does not match the grid"));
        }
        Ok(Mask { grid_nx: grid.nx, grid_ny: grid.ny, cells })
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.grid_nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, on: bool) {
        self.cells[j * self.grid_nx + i] = on;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|c| *c)
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.cells.len() as f64
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.grid_nx, self.grid_ny)
    }

    /// Flat indices of the member nodes, ascending.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().enumerate().filter(|(_, c)| **c).map(|(k, _)| k)
    }

    /// Member node locations.
    pub fn points(&self, grid: &GridSpec) -> Vec<Vec2> {
        self.indices().map(|k| {
            let (i, j) = grid.coords(k);
            grid.node(i, j)
        }).collect()
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.cells.len() == other.cells.len() && self.cells.iter().zip(&other.cells).all(|(a, b)| !*a || *b)
    }
}

/// `ℰ_λ = {x : f(x) > λ}` on the grid; saturated nodes always belong.
pub fn level_set(field: &GridField, lambda: f64) -> Mask {
    let cells = field.values.iter().enumerate().map(|(k, v)| *v > lambda || field.is_saturated(k)).collect();
    Mask { grid_nx: field.grid.nx, grid_ny: field.grid.ny, cells }
}

/// A planar set: dense samples of a curve set dilated by `radius`, or a grid mask.
#[derive(Clone, Debug, PartialEq)]
pub enum PlanarSet {
    Points { points: Vec<Vec2>, radius: f64 },
    Mask { grid: GridSpec, mask: Mask },
}

impl PlanarSet {
    pub fn points(points: Vec<Vec2>) -> Self {
        PlanarSet::Points { points, radius: 0.0 }
    }

    pub fn mask(grid: GridSpec, mask: Mask) -> Self {
        PlanarSet::Mask { grid, mask }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            PlanarSet::Points { points, .. } => points.is_empty(),
            PlanarSet::Mask { mask, .. } => mask.is_empty(),
        }
    }

    /// Representative sample points (mask node locations for masks).
    pub fn samples(&self) -> Vec<Vec2> {
        match self {
            PlanarSet::Points { points, .. } => points.clone(),
            PlanarSet::Mask { grid, mask } => mask.points(grid),
        }
    }
}

/// Distance queries against a fixed [`PlanarSet`].
#[derive(Clone, Debug)]
pub struct SetDistance {
    index: PointIndex,
    radius: f64,
}

impl SetDistance {
    pub fn new(set: &PlanarSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::domain("distance to an empty set"));
        }
        let radius = match set {
            PlanarSet::Points { radius, .. } => *radius,
            PlanarSet::Mask { .. } => 0.0,
        };
        Ok(SetDistance { index: PointIndex::with_auto_cell(set.samples()), radius })
    }

    /// `inf_{a ∈ A} ‖x − a‖`, over the samples.
    pub fn distance(&self, x: Vec2) -> f64 {
        (self.index.nearest_distance(x) - self.radius).max(0.0)
    }
}

/// Euclidean distance from every node to the nearest member node
/// (infinite everywhere for an empty mask).
pub fn distance_transform(grid: &GridSpec, mask: &Mask) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut sq: Vec<f64> = mask.cells.iter().map(|c| if *c { 0.0 } else { f64::INFINITY }).collect();
    let mut line = Vec::new();
    let mut out = Vec::new();
    for j in 0..ny {
        line.clear();
        line.extend_from_slice(&sq[j * nx..(j + 1) * nx]);
        squared_distance_1d(&line, dx, &mut out);
        sq[j * nx..(j + 1) * nx].copy_from_slice(&out);
    }
    for i in 0..nx {
        line.clear();
        line.extend((0..ny).map(|j| sq[j * nx + i]));
        squared_distance_1d(&line, dy, &mut out);
        for j in 0..ny {
            sq[j * nx + i] = out[j];
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Lower envelope of parabolas: `out[q] = min_p ((q − p)·h)² + f[p]`.
fn squared_distance_1d(f: &[f64], h: f64, out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    let finite: Vec<usize> = (0..n).filter(|&p| f[p].is_finite()).collect();
    if finite.is_empty() {
        out.resize(n, f64::INFINITY);
        return;
    }
    let pos = |p: usize| p as f64 * h;
    let mut v: Vec<usize> = Vec::with_capacity(finite.len());
    let mut z: Vec<f64> = Vec::with_capacity(finite.len() + 1);
    let intersect = |a: usize, b: usize| -> f64 {
        ((f[b] + pos(b) * pos(b)) - (f[a] + pos(a) * pos(a))) / (2.0 * (pos(b) - pos(a)))
    };
    for &q in &finite {
        while let Some(&last) = v.last() {
            let s = intersect(last, q);
            if v.len() > 1 && s <= z[z.len() - 1] {
                v.pop();
                z.pop();
            } else {
                z.push(s);
                break;
            }
        }
        if v.is_empty() {
            z.clear();
        }
        v.push(q);
    }
    // z[k] is the left boundary of parabola v[k + 1].
    let mut k = 0;
    for q in 0..n {
        let x = pos(q);
        while k < z.len() && z[k] < x {
            k += 1;
        }
        let p = v[k];
        let d = x - pos(p);
        out.push(d * d + f[p]);
    }
}

/// `B(A, r)`: nodes at distance `< r` from the set (members always kept).
pub fn dilate_mask(grid: &GridSpec, mask: &Mask, r: f64) -> Result<Mask> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("dilation radius must be nonnegative, got {r}")));
    }
    let dist = distance_transform(grid, mask);
    let cells = dist.iter().zip(&mask.cells).map(|(d, c)| *c || *d < r).collect();
    Ok(Mask { grid_nx: mask.grid_nx, grid_ny: mask.grid_ny, cells })
}

pub fn dilate(set: &PlanarSet, r: f64) -> Result<PlanarSet> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("dilation radius must be nonnegative, got {r}")));
    }
    Ok(match set {
        PlanarSet::Points { points, radius } => PlanarSet::Points { points: points.clone(), radius: radius + r },
        PlanarSet::Mask { grid, mask } => PlanarSet::Mask { grid: *grid, mask: dilate_mask(grid, mask, r)? },
    })
}

/// `sup_{a ∈ A} d(a, B)` over the samples of `A`.
pub fn directed_hausdorff(a: &PlanarSet, b: &PlanarSet) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::domain("Hausdorff distance of an empty set"));
    }
    if matches!(a, PlanarSet::Points { radius, .. } if *radius > 0.0) {
        return Err(Error::domain("directed distance from a dilated point set is not sampled"));
    }
    let to_b = SetDistance::new(b)?;
    Ok(a.samples().par_iter().map(|x| to_b.distance(*x)).reduce(|| 0.0, f64::max))
}

pub fn hausdorff_distance(a: &PlanarSet, b: &PlanarSet) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// `d(λ) = σ √(2 log(1/(2πσ²λ)))`.
pub fn d_of_lambda(sigma: f64, lambda: f64) -> Result<f64> {
    let arg = 2.0 * std::f64::consts::PI * sigma * sigma * lambda;
    if !(arg > 0.0 && arg < 1.0) {
        return Err(Error::domain(format!("d(lambda) needs 0 < 2 pi sigma^2 lambda < 1, got {arg}")));
    }
    Ok(sigma * (2.0 * (1.0 / arg).ln()).sqrt())
}

/// How saddles are treated by [`containment_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContainmentVariant {
    /// Cells near saddles are removed along with those near maxima.
    ExcludeSaddles,
    /// Cells near saddles are kept but tested against the wider radius `d(4λ) + ε`.
    RelaxedSaddles,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub variant: ContainmentVariant,
    pub level_set_cells: usize,
    /// Cells removed for lying within `ν` of an excluded critical point.
    pub excluded_cells: usize,
    pub tested_cells: usize,
    pub inside_cells: usize,
    /// `inside / tested`; one when nothing is tested.
    pub fraction: f64,
    /// `d(λ) + ε`.
    pub radius: f64,
    /// `d(4λ) + ε` when defined.
    pub saddle_radius: Option<f64>,
    pub saddle_cells: usize,
    pub saddle_inside: usize,
    /// The saddle bound imposed no constraint because `d(4λ)` is undefined.
    pub saddle_bound_vacuous: bool,
    /// Nothing was left to test.
    pub vacuous: bool,
}

impl ContainmentReport {
    pub fn passes(&self, min_fraction: f64) -> bool {
        self.fraction >= min_fraction
    }
}

/// Inputs of [`containment_check`] besides the level set and the truth.
#[derive(Clone, Debug)]
pub struct ContainmentParams<'a> {
    pub sigma: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub maxima: &'a [Vec2],
    pub saddles: &'a [Vec2],
    pub nu: f64,
    pub variant: ContainmentVariant,
}

/// Fraction of level-set cells lying in `B(truth, d(λ) + ε)` after
/// removing `ν`-balls around the excluded critical points.
pub fn containment_check(grid: &GridSpec, level: &Mask, truth: &PlanarSet, p: &ContainmentParams) -> Result<ContainmentReport> {
    let to_truth = SetDistance::new(truth)?;
    let radius = d_of_lambda(p.sigma, p.lambda)? + p.epsilon;
    let saddle_radius = d_of_lambda(p.sigma, 4.0 * p.lambda).ok().map(|d| d + p.epsilon);
    let near = |x: Vec2, centers: &[Vec2]| centers.iter().any(|c| c.distance(x) < p.nu);

    let mut report = ContainmentReport {
        variant: p.variant,
        level_set_cells: 0,
        excluded_cells: 0,
        tested_cells: 0,
        inside_cells: 0,
        fraction: 1.0,
        radius,
        saddle_radius,
        saddle_cells: 0,
        saddle_inside: 0,
        saddle_bound_vacuous: false,
        vacuous: false,
    };
    for k in level.indices() {
        report.level_set_cells += 1;
        let (i, j) = grid.coords(k);
        let x = grid.node(i, j);
        if near(x, p.maxima) {
            report.excluded_cells += 1;
            continue;
        }
        let d = to_truth.distance(x);
        if near(x, p.saddles) {
            match p.variant {
                ContainmentVariant::ExcludeSaddles => {
                    report.excluded_cells += 1;
                    continue;
                }
                ContainmentVariant::RelaxedSaddles => {
                    report.saddle_cells += 1;
                    report.tested_cells += 1;
                    let ok = match saddle_radius {
                        Some(r) => d < r.max(radius),
                        None => {
                            report.saddle_bound_vacuous = true;
                            true
                        }
                    };
                    if ok {
                        report.saddle_inside += 1;
                        report.inside_cells += 1;
                    }
                    continue;
                }
            }
        }
        report.tested_cells += 1;
        if d < radius {
            report.inside_cells += 1;
        }
    }
    if report.tested_cells == 0 {
        report.vacuous = true;
    } else {
        report.fraction = report.inside_cells as f64 / report.tested_cells as f64;
    }
    Ok(report)
}

/// Hausdorff distance between a reference and an estimated level-set mask;
/// `None` when either is empty.
pub fn set_distance_consistency(grid: &GridSpec, truth: &Mask, estimate: &Mask) -> Option<f64> {
    if truth.is_empty() || estimate.is_empty() {
        return None;
    }
    hausdorff_distance(&PlanarSet::mask(*grid, truth.clone()), &PlanarSet::mask(*grid, estimate.clone())).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::square(Rect::unit(), n).unwrap()
    }

    #[test]
    fn grid_refinement_is_exact() {
        let g = GridSpec::new(Rect::new(-1.3, 2.9, 0.1, 0.7), 17, 9).unwrap();
        let fine = GridSpec::new(g.bounds, 33, 17).unwrap();
        for i in 0..17 {
            assert_eq!(g.x(i).to_bits(), fine.x(2 * i).to_bits());
        }
        for j in 0..9 {
            assert_eq!(g.y(j).to_bits(), fine.y(2 * j).to_bits());
        }
        assert_eq!(g.x(16), 2.9);
        assert!(GridSpec::new(Rect::unit(), 1, 5).is_err());
    }

    #[test]
    fn quantile_ranks() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&v, 0.9).unwrap(), 90.0);
        assert_eq!(quantile(&v, 0.5).unwrap(), 50.0);
        assert_eq!(quantile(&v, 0.001).unwrap(), 1.0);
        assert_eq!(quantile(&[3.0; 10], 0.37).unwrap(), 3.0);
        assert!(quantile(&v, 1.0).is_err());
        assert!(quantile(&v, 0.0).is_err());
        let g = grid(5);
        let f = GridField::new(g, vec![2.5; 25]).unwrap();
        assert_eq!(quantile_threshold(&f, &[Vec2::new(0.3, 0.3), Vec2::new(0.9, 0.1)], 0.9).unwrap(), 2.5);
    }

    #[test]
    fn level_set_extremes() {
        let g = grid(6);
        let f = GridField::from_fn(g, |x| x.x + x.y);
        assert!(level_set(&f, 10.0).is_empty());
        assert_eq!(level_set(&f, -1.0).count(), 36);
        let sat = f.clone().with_saturated((0..36).map(|k| k == 0).collect()).unwrap();
        assert!(level_set(&sat, 10.0).get(0, 0));
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let g = GridSpec::new(Rect::new(0.0, 2.0, 0.0, 1.0), 41, 13).unwrap();
        let mut m = Mask::empty(&g);
        for (i, j) in [(3, 4), (30, 1), (17, 12), (18, 12)] {
            m.set(i, j, true);
        }
        let d = distance_transform(&g, &m);
        let members = m.points(&g);
        for k in 0..g.len() {
            let (i, j) = g.coords(k);
            let x = g.node(i, j);
            let brute = members.iter().map(|p| p.distance(x)).fold(f64::INFINITY, f64::min);
            assert!((d[k] - brute).abs() < 1e-12, "{k}: {} vs {brute}", d[k]);
        }
        assert!(distance_transform(&g, &Mask::empty(&g)).iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn dilating_a_point_gives_a_disk() {
        let g = grid(51);
        let mut m = Mask::empty(&g);
        m.set(25, 25, true);
        let r = 0.2;
        let d = dilate_mask(&g, &m, r).unwrap();
        for k in 0..g.len() {
            let (i, j) = g.coords(k);
            let dist = g.node(i, j).distance(Vec2::new(0.5, 0.5));
            if (dist - r).abs() > 1e-9 {
                assert_eq!(d.get(i, j), dist < r);
            }
        }
        assert_eq!(dilate_mask(&g, &m, 0.0).unwrap(), m);
    }

    #[test]
    fn hausdorff_cases() {
        let a = PlanarSet::points(vec![Vec2::ZERO]);
        let b = PlanarSet::points(vec![Vec2::new(3.0, 4.0)]);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 5.0);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let ab = PlanarSet::points(vec![Vec2::ZERO, Vec2::new(3.0, 4.0)]);
        assert_eq!(directed_hausdorff(&a, &ab).unwrap(), 0.0);
        assert_eq!(directed_hausdorff(&ab, &a).unwrap(), 5.0);
        assert!(hausdorff_distance(&PlanarSet::points(vec![]), &a).is_err());
    }

    #[test]
    fn d_of_lambda_cases() {
        let s = 0.03;
        let two_pi_s2 = 2.0 * std::f64::consts::PI * s * s;
        let d = d_of_lambda(s, (-2.0f64).exp() / two_pi_s2).unwrap();
        assert!((d - 2.0 * s).abs() < 1e-14);
        assert!(d_of_lambda(s, (1.0 - 1e-12) / two_pi_s2).unwrap() < 1e-5);
        assert!(d_of_lambda(s, (1.0 + 1e-9) / two_pi_s2).is_err());
        assert!(d_of_lambda(s, 0.0).is_err());
        let mut prev = f64::INFINITY;
        for k in 1..100 {
            let d = d_of_lambda(s, k as f64 / 100.0 / two_pi_s2).unwrap();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn containment_trivial_cases() {
        let g = grid(21);
        let f = GridField::from_fn(g, |x| x.x);
        let level = level_set(&f, 0.5);
        let params = ContainmentParams {
            sigma: 0.1,
            lambda: 5.0,
            epsilon: 0.0,
            maxima: &[],
            saddles: &[],
            nu: 0.1,
            variant: ContainmentVariant::ExcludeSaddles,
        };
        let all = PlanarSet::mask(g, Mask::full(&g));
        let r = containment_check(&g, &level, &all, &params).unwrap();
        assert_eq!(r.fraction, 1.0);
        assert!(!r.vacuous);
        let none = containment_check(&g, &Mask::empty(&g), &all, &params).unwrap();
        assert!(none.vacuous && none.passes(0.99));
        // 2πσ²·4λ > 1 here, so the saddle radius is undefined.
        assert!(r.saddle_radius.is_none());
    }

    fn mask_strategy(n: usize) -> impl Strategy<Value = Vec<bool>> {
        proptest::collection::vec(proptest::bool::weighted(0.1), n * n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn level_sets_nest(l1 in -1.0f64..3.0, gap in 0.0f64..2.0) {
            let g = grid(12);
            let f = GridField::from_fn(g, |x| (3.0 * x.x).sin() + x.y * x.y);
            prop_assert!(level_set(&f, l1 + gap).is_subset_of(&level_set(&f, l1)));
        }

        #[test]
        fn hausdorff_is_a_metric(a in mask_strategy(10), b in mask_strategy(10), c in mask_strategy(10)) {
            let g = grid(10);
            let sets: Vec<PlanarSet> = [a, b, c].into_iter().map(|cells| PlanarSet::mask(g, Mask::from_cells(&g, cells).unwrap())).collect();
            prop_assume!(sets.iter().all(|s| !s.is_empty()));
            let dab = hausdorff_distance(&sets[0], &sets[1]).unwrap();
            let dba = hausdorff_distance(&sets[1], &sets[0]).unwrap();
            prop_assert_eq!(dab, dba);
            let dbc = hausdorff_distance(&sets[1], &sets[2]).unwrap();
            let dac = hausdorff_distance(&sets[0], &sets[2]).unwrap();
            prop_assert!(dac <= dab + dbc + 1e-12);
        }

        #[test]
        fn dilation_is_monotone_and_extensive(a in mask_strategy(12), extra in mask_strategy(12), r in 0.0f64..0.3) {
            let g = grid(12);
            let small = Mask::from_cells(&g, a.clone()).unwrap();
            let big = Mask::from_cells(&g, a.iter().zip(&extra).map(|(x, y)| *x || *y).collect()).unwrap();
            let ds = dilate_mask(&g, &small, r).unwrap();
            prop_assert!(small.is_subset_of(&ds));
            prop_assert!(ds.is_subset_of(&dilate_mask(&g, &big, r).unwrap()));
        }
    }
}
