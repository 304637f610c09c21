//! Planar primitives: points, rectangles, symmetric 2×2 matrices, and
//! point/segment distance queries backed by uniform bucket grids.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or displacement in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counter-clockwise rotation by a right angle.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2::new(x, y)
    }
}

/// Axis-aligned rectangle `[min.x, max.x] × [min.y, max.y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect {
            min: Vec2::new(x0.min(x1), y0.min(y1)),
            max: Vec2::new(x0.max(x1), y0.max(y1)),
        }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 1.0, 0.0, 1.0)
    }

    /// Smallest rectangle containing every point; `None` for an empty slice.
    pub fn bounding(points: &[Vec2]) -> Option<Self> {
        let first = *points.first()?;
        let mut r = Rect { min: first, max: first };
        for p in &points[1..] {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Vec2 {
        self.min.lerp(self.max, 0.5)
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > 0.0 && self.height() > 0.0) || !self.min.is_finite() || !self.max.is_finite()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_strictly(&self, p: Vec2) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    pub fn on_boundary(&self, p: Vec2) -> bool {
        self.contains(p) && !self.contains_strictly(p)
    }

    pub fn expanded(&self, margin: f64) -> Self {
        Rect {
            min: self.min - Vec2::new(margin, margin),
            max: self.max + Vec2::new(margin, margin),
        }
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.min.x.min(other.min.x),
            self.max.x.max(other.max.x),
            self.min.y.min(other.min.y),
            self.max.y.max(other.max.y),
        )
    }
}

/// Symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Sym2 { xx: a, xy: 0.0, yy: b }
    }

    pub fn identity() -> Self {
        Sym2::diag(1.0, 1.0)
    }

    /// `u uᵀ`
    pub fn outer(u: Vec2) -> Self {
        Sym2::new(u.x * u.x, u.x * u.y, u.y * u.y)
    }

    pub fn scale(self, s: f64) -> Self {
        Sym2::new(self.xx * s, self.xy * s, self.yy * s)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let radius = half_diff.hypot(self.xy);
        (mean - radius, mean + radius)
    }

    /// Unit eigenvector for the given eigenvalue.
    pub fn eigenvector(&self, lambda: f64) -> Vec2 {
        let a = Vec2::new(self.xy, lambda - self.xx);
        let b = Vec2::new(lambda - self.yy, self.xy);
        let v = if a.norm_sq() >= b.norm_sq() { a } else { b };
        let n = v.norm();
        if n == 0.0 {
            Vec2::new(1.0, 0.0)
        } else {
            v / n
        }
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        lo.abs().max(hi.abs())
    }

    /// Solves `self · x = rhs`; `None` if the matrix is singular.
    pub fn solve(&self, rhs: Vec2) -> Option<Vec2> {
        let det = self.det();
        let scale = self.xx.abs().max(self.yy.abs()).max(self.xy.abs());
        if det == 0.0 || !det.is_finite() || det.abs() <= 1e-300 * scale.max(1e-300) {
            return None;
        }
        Some(Vec2::new(
            (self.yy * rhs.x - self.xy * rhs.y) / det,
            (self.xx * rhs.y - self.xy * rhs.x) / det,
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl AddAssign for Sym2 {
    fn add_assign(&mut self, o: Sym2) {
        self.xx += o.xx;
        self.xy += o.xy;
        self.yy += o.yy;
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Exact minimum distance from `p` to the polyline through `vertices`.
/// A single vertex is a degenerate polyline; an empty slice is infinitely far.
pub fn point_polyline_distance(p: Vec2, vertices: &[Vec2]) -> f64 {
    match vertices {
        [] => f64::INFINITY,
        [v] => p.distance(*v),
        _ => vertices
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// True when the closed segments `[a, b]` and `[c, d]` share a point.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    fn orient(p: Vec2, q: Vec2, r: Vec2) -> f64 {
        (q - p).cross(r - p)
    }
    fn on_segment(p: Vec2, q: Vec2, r: Vec2) -> bool {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    }
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// True when a closed polyline visits no point twice apart from shared
/// endpoints of consecutive segments (and the closing vertex when `closed`).
pub fn polyline_is_simple(vertices: &[Vec2], closed: bool) -> bool {
    let mut pts = vertices.to_vec();
    if closed && pts.len() > 2 {
        pts.push(pts[0]);
    }
    let m = pts.len().saturating_sub(1);
    for i in 0..m {
        for j in (i + 2)..m {
            if closed && i == 0 && j == m - 1 {
                continue;
            }
            if segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                return false;
            }
        }
    }
    true
}

/// Uniform bucket grid over a rectangle, shared by the point and segment indices.
#[derive(Clone, Debug)]
struct Buckets {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
}

impl Buckets {
    const MAX_CELLS: usize = 1 << 22;

    fn new(bounds: Rect, cell: f64) -> Self {
        let mut cell = cell.max(f64::MIN_POSITIVE);
        let w = bounds.width().max(0.0);
        let h = bounds.height().max(0.0);
        loop {
            let nx = (w / cell).floor() as usize + 1;
            let ny = (h / cell).floor() as usize + 1;
            if nx.saturating_mul(ny) <= Self::MAX_CELLS {
                return Buckets { origin: bounds.min, cell, nx, ny };
            }
            cell *= 2.0;
        }
    }

    fn coord(&self, v: f64, origin: f64, n: usize) -> isize {
        let c = ((v - origin) / self.cell).floor();
        if c < 0.0 {
            -1
        } else if c >= n as f64 {
            n as isize
        } else {
            c as isize
        }
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let i = self.coord(p.x, self.origin.x, self.nx).clamp(0, self.nx as isize - 1) as usize;
        let j = self.coord(p.y, self.origin.y, self.ny).clamp(0, self.ny as isize - 1) as usize;
        (i, j)
    }

    /// Inclusive cell range covering the box `[lo, hi]`, clipped to the grid.
    fn range(&self, lo: Vec2, hi: Vec2) -> Option<(usize, usize, usize, usize)> {
        let i0 = self.coord(lo.x, self.origin.x, self.nx).max(0);
        let i1 = self.coord(hi.x, self.origin.x, self.nx).min(self.nx as isize - 1);
        let j0 = self.coord(lo.y, self.origin.y, self.ny).max(0);
        let j1 = self.coord(hi.y, self.origin.y, self.ny).min(self.ny as isize - 1);
        if i0 > i1 || j0 > j1 {
            return None;
        }
        Some((i0 as usize, i1 as usize, j0 as usize, j1 as usize))
    }

    fn len(&self) -> usize {
        self.nx * self.ny
    }
}

/// Compressed bucket lists (CSR layout) built from `(bucket, item)` pairs.
#[derive(Clone, Debug)]
struct BucketLists {
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl BucketLists {
    fn build(n_buckets: usize, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        let mut starts = vec![0u32; n_buckets + 1];
        for &(b, _) in &pairs {
            starts[b as usize + 1] += 1;
        }
        for k in 0..n_buckets {
            starts[k + 1] += starts[k];
        }
        let items = pairs.into_iter().map(|(_, i)| i).collect();
        BucketLists { starts, items }
    }

    #[inline]
    fn get(&self, bucket: usize) -> &[u32] {
        &self.items[self.starts[bucket] as usize..self.starts[bucket + 1] as usize]
    }
}

/// Bucket-grid index over a static point set for radius and nearest queries.
#[derive(Clone, Debug)]
pub struct PointIndex {
    points: Vec<Vec2>,
    buckets: Buckets,
    lists: BucketLists,
}

impl PointIndex {
    pub fn new(points: Vec<Vec2>, cell: f64) -> Self {
        let bounds = Rect::bounding(&points).unwrap_or(Rect::new(0.0, 0.0, 0.0, 0.0));
        let buckets = Buckets::new(bounds, cell);
        let pairs = points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let (i, j) = buckets.cell_of(*p);
                ((j * buckets.nx + i) as u32, k as u32)
            })
            .collect();
        let lists = BucketLists::build(buckets.len(), pairs);
        PointIndex { points, buckets, lists }
    }

    /// Picks a cell size giving a few points per occupied bucket.
    pub fn with_auto_cell(points: Vec<Vec2>) -> Self {
        let cell = match Rect::bounding(&points) {
            Some(r) if points.len() > 1 => {
                let extent = r.width().max(r.height()).max(f64::MIN_POSITIVE);
                extent / (points.len() as f64).sqrt().max(1.0)
            }
            _ => 1.0,
        };
        PointIndex::new(points, cell)
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Calls `f(index, point)` for each point whose bucket intersects the
    /// box of half-width `radius` around `center`. Buckets are visited in
    /// row-major order, points within a bucket in insertion order.
    #[inline]
    pub fn for_each_candidate(&self, center: Vec2, radius: f64, mut f: impl FnMut(usize, Vec2)) {
        let r = Vec2::new(radius, radius);
        if let Some((i0, i1, j0, j1)) = self.buckets.range(center - r, center + r) {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    for &k in self.lists.get(j * self.buckets.nx + i) {
                        f(k as usize, self.points[k as usize]);
                    }
                }
            }
        }
    }

    /// Distance to the nearest indexed point (infinite when empty).
    pub fn nearest_distance(&self, p: Vec2) -> f64 {
        if self.points.is_empty() {
            return f64::INFINITY;
        }
        let cell = self.buckets.cell;
        let (ci, cj) = self.buckets.cell_of(p);
        let max_ring = self.buckets.nx.max(self.buckets.ny);
        let mut best = f64::INFINITY;
        for ring in 0..=max_ring {
            // Every point in ring `ring` or beyond lies at least this far away.
            let reach = (ring as f64 - 1.0).max(0.0) * cell;
            if best <= reach {
                break;
            }
            let i0 = ci as isize - ring as isize;
            let i1 = ci as isize + ring as isize;
            let j0 = cj as isize - ring as isize;
            let j1 = cj as isize + ring as isize;
            for j in j0..=j1 {
                if j < 0 || j >= self.buckets.ny as isize {
                    continue;
                }
                for i in i0..=i1 {
                    if i < 0 || i >= self.buckets.nx as isize {
                        continue;
                    }
                    if ring > 0 && i != i0 && i != i1 && j != j0 && j != j1 {
                        continue;
                    }
                    for &k in self.lists.get(j as usize * self.buckets.nx + i as usize) {
                        best = best.min(p.distance(self.points[k as usize]));
                    }
                }
            }
        }
        best
    }
}

/// Bucket-grid index over the segments of many polylines.
///
/// Each segment is registered in every bucket its bounding box overlaps, so a
/// radius query only has to look at the buckets covering the query disk.
#[derive(Clone, Debug)]
pub struct SegmentIndex {
    /// Vertex storage for all polylines, concatenated.
    vertices: Vec<Vec2>,
    /// `offsets[k]..offsets[k + 1]` are the vertices of polyline `k`.
    offsets: Vec<usize>,
    /// Polyline owning each vertex.
    owner: Vec<u32>,
    buckets: Buckets,
    /// Items are vertex ids `v`, standing for segment `[v, v + 1]`, or for
    /// the lone vertex of a single-vertex polyline.
    lists: BucketLists,
}

/// Reusable per-thread buffers for [`SegmentIndex::min_distances`].
#[derive(Clone, Debug, Default)]
pub struct SegmentScratch {
    best: Vec<f64>,
    touched: Vec<u32>,
}

/// Drops vertices closer than `gap` to the last kept one; both ends are kept.
pub fn decimate_polyline(vertices: &[Vec2], gap: f64) -> Vec<Vec2> {
    let Some((&last, inner)) = vertices.split_last() else { return Vec::new() };
    if inner.is_empty() {
        return vec![last];
    }
    let mut out = vec![inner[0]];
    for v in &inner[1..] {
        if v.distance(*out.last().unwrap()) >= gap {
            out.push(*v);
        }
    }
    out.push(last);
    out
}

impl SegmentIndex {
    pub fn new<'a, I>(polylines: I, cell: f64) -> Self
    where
        I: IntoIterator<Item = &'a [Vec2]>,
    {
        let mut vertices = Vec::new();
        let mut offsets = vec![0];
        let mut owner = Vec::new();
        for (k, line) in polylines.into_iter().enumerate() {
            vertices.extend_from_slice(line);
            owner.extend(std::iter::repeat_n(k as u32, line.len()));
            offsets.push(vertices.len());
        }
        let bounds = Rect::bounding(&vertices).unwrap_or(Rect::new(0.0, 0.0, 0.0, 0.0));
        let buckets = Buckets::new(bounds, cell);
        let mut pairs = Vec::with_capacity(vertices.len());
        for k in 0..offsets.len() - 1 {
            let (s, e) = (offsets[k], offsets[k + 1]);
            if e - s == 1 {
                let (i, j) = buckets.cell_of(vertices[s]);
                pairs.push(((j * buckets.nx + i) as u32, s as u32));
                continue;
            }
            for v in s..e.saturating_sub(1) {
                let a = vertices[v];
                let b = vertices[v + 1];
                let lo = Vec2::new(a.x.min(b.x), a.y.min(b.y));
                let hi = Vec2::new(a.x.max(b.x), a.y.max(b.y));
                if let Some((i0, i1, j0, j1)) = buckets.range(lo, hi) {
                    for j in j0..=j1 {
                        for i in i0..=i1 {
                            pairs.push(((j * buckets.nx + i) as u32, v as u32));
                        }
                    }
                }
            }
        }
        let lists = BucketLists::build(buckets.len(), pairs);
        SegmentIndex { vertices, offsets, owner, buckets, lists }
    }

    pub fn polyline_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn polyline(&self, k: usize) -> &[Vec2] {
        &self.vertices[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn scratch(&self) -> SegmentScratch {
        SegmentScratch { best: vec![f64::INFINITY; self.polyline_count()], touched: Vec::new() }
    }

    /// For every polyline passing within `radius` (inclusive) of `center`,
    /// reports `(polyline id, exact minimum distance)`, sorted by id.
    pub fn min_distances(&self, center: Vec2, radius: f64, scratch: &mut SegmentScratch, out: &mut Vec<(u32, f64)>) {
        out.clear();
        if scratch.best.len() != self.polyline_count() {
            *scratch = self.scratch();
        }
        let r = Vec2::new(radius, radius);
        if let Some((i0, i1, j0, j1)) = self.buckets.range(center - r, center + r) {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    for &v in self.lists.get(j * self.buckets.nx + i) {
                        let v = v as usize;
                        let id = self.owner[v];
                        let end = self.offsets[id as usize + 1];
                        let d = if v + 1 < end {
                            point_segment_distance(center, self.vertices[v], self.vertices[v + 1])
                        } else {
                            center.distance(self.vertices[v])
                        };
                        if d <= radius {
                            let slot = &mut scratch.best[id as usize];
                            if slot.is_infinite() {
                                scratch.touched.push(id);
                            }
                            if d < *slot {
                                *slot = d;
                            }
                        }
                    }
                }
            }
        }
        scratch.touched.sort_unstable();
        for &id in &scratch.touched {
            out.push((id, scratch.best[id as usize]));
            scratch.best[id as usize] = f64::INFINITY;
        }
        scratch.touched.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_cases() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 0.0);
        assert_eq!(point_segment_distance(Vec2::new(0.5, 1.0), a, b), 1.0);
        assert_eq!(point_segment_distance(Vec2::new(2.0, 0.0), a, b), 1.0);
        assert_eq!(point_segment_distance(Vec2::new(-3.0, 4.0), a, b), 5.0);
        assert_eq!(point_segment_distance(Vec2::new(3.0, 4.0), a, a), 5.0);
    }

    #[test]
    fn eigen_decomposition() {
        let m = Sym2::new(2.0, 1.0, 2.0);
        let (lo, hi) = m.eigenvalues();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
        let v = m.eigenvector(hi);
        let mv = m.mul_vec(v);
        assert!((mv - v * hi).norm() < 1e-12);
        assert!(Sym2::new(1.0, 2.0, 4.0).solve(Vec2::new(1.0, 1.0)).is_none());
    }

    #[test]
    fn simple_polygon_detection() {
        let square = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        assert!(polyline_is_simple(&square, true));
        let bowtie = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert!(!polyline_is_simple(&bowtie, true));
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts: Vec<Vec2> = (0..200).map(|k| {
            let t = k as f64 * 0.37;
            Vec2::new(t.sin() * 3.0 + 0.1 * t, (1.7 * t).cos())
        }).collect();
        let index = PointIndex::new(pts.clone(), 0.3);
        for q in [Vec2::new(0.0, 0.0), Vec2::new(10.0, -4.0), Vec2::new(2.2, 0.9), Vec2::new(-50.0, 50.0)] {
            let brute = pts.iter().map(|p| p.distance(q)).fold(f64::INFINITY, f64::min);
            assert_eq!(index.nearest_distance(q), brute);
        }
    }

    #[test]
    fn segment_index_matches_direct_distance() {
        let lines: Vec<Vec<Vec2>> = (0..30)
            .map(|k| {
                let phase = k as f64 * 0.21;
                (0..15).map(|s| Vec2::new(s as f64 * 0.1 + phase.cos(), (s as f64 * 0.3 + phase).sin())).collect()
            })
            .chain(std::iter::once(vec![Vec2::new(0.5, 0.5)]))
            .collect();
        let index = SegmentIndex::new(lines.iter().map(|l| l.as_slice()), 0.2);
        let mut scratch = index.scratch();
        let mut out = Vec::new();
        for q in [Vec2::new(0.5, 0.2), Vec2::new(1.3, -0.8), Vec2::new(0.5, 0.5)] {
            index.min_distances(q, 0.4, &mut scratch, &mut out);
            let expected: Vec<(u32, f64)> = lines
                .iter()
                .enumerate()
                .map(|(k, l)| (k as u32, point_polyline_distance(q, l)))
                .filter(|(_, d)| *d <= 0.4)
                .collect();
            assert_eq!(out, expected);
        }
    }
}
