//! The generative filament model: a mixture of a uniform background,
//! Gaussian-blurred curves and Gaussian clusters.
//!
//! ```text
//! g(x) = α₀ 1_U(x)/|U| + Σᵢ αᵢ ∫₀^ℓᵢ wᵢ(s) φ_σᵢ(x − fᵢ(s)) ds + Σⱼ αⱼ φ_σⱼ(x − zⱼ)
//! ```
//!
//! Curves are stored as dense arclength-parameterised polylines. The line
//! integrals are evaluated by a composite rule in the angle variable
//! `u = s/ℓ = sin²θ`, which absorbs the endpoint singularities of the
//! `Beta(a, b)` weights for `a, b ≥ ½`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Jet, ScalarFieldSource};
use crate::geometry::{polyline_is_simple, PointIndex, Rect, Sym2, Vec2};
use crate::kernels::PointCloud;

/// Gaussian terms farther than this many σ are skipped.
const GAUSSIAN_REACH: f64 = 9.0;

/// Default polyline resolution for filaments, vertices per σ of arclength.
pub const VERTICES_PER_SIGMA: f64 = 32.0;

/// Density of positions along a filament, on the normalised arclength `u = s/ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightDensity {
    Uniform,
    /// Requires `a, b ≥ ½`.
    Beta { a: f64, b: f64 },
}

impl WeightDensity {
    pub fn arcsine() -> Self {
        WeightDensity::Beta { a: 0.5, b: 0.5 }
    }

    fn exponents(&self) -> (f64, f64) {
        match *self {
            WeightDensity::Uniform => (1.0, 1.0),
            WeightDensity::Beta { a, b } => (a, b),
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.exponents();
        if a.is_finite() && b.is_finite() && a >= 0.5 && b >= 0.5 {
            Ok(())
        } else {
            Err(Error::Model(format!("beta weight parameters must be finite and at least 1/2, got ({a}, {b})")))
        }
    }

    /// Unnormalised weight in the angle variable: `w(u) du ∝ θ-weight dθ`.
    fn theta_weight(&self, theta: f64) -> f64 {
        let (a, b) = self.exponents();
        2.0 * theta.sin().powf(2.0 * a - 1.0) * theta.cos().powf(2.0 * b - 1.0)
    }

    /// Density of `u = s/ℓ` on `[0, 1]` (integrates to one).
    pub fn density_u(&self, u: f64, table: &WeightTable) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        let (a, b) = self.exponents();
        u.powf(a - 1.0) * (1.0 - u).powf(b - 1.0) / table.normalizer
    }
}

/// Tabulated CDF of a weight density over the angle variable.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    thetas: Vec<f64>,
    cdf: Vec<f64>,
    /// `∫₀^{π/2} θ-weight dθ`, which equals `B(a, b)`.
    normalizer: f64,
    kind: WeightDensity,
}

impl WeightTable {
    const PANELS: usize = 4096;

    fn new(kind: WeightDensity) -> Self {
        let n = Self::PANELS;
        let dt = FRAC_PI_2 / n as f64;
        let thetas: Vec<f64> = (0..=n).map(|k| FRAC_PI_2 * k as f64 / n as f64).collect();
        let mut cdf = vec![0.0; n + 1];
        for k in 0..n {
            // Simpson on each panel.
            let (t0, t1) = (thetas[k], thetas[k + 1]);
            let mid = 0.5 * (t0 + t1);
            let inc = dt / 6.0 * (kind.theta_weight(t0) + 4.0 * kind.theta_weight(mid) + kind.theta_weight(t1));
            cdf[k + 1] = cdf[k] + inc;
        }
        let normalizer = cdf[n];
        for c in &mut cdf {
            *c /= normalizer;
        }
        WeightTable { thetas, cdf, normalizer, kind }
    }

    /// Normalised arclength `u` with `P(U ≤ u) = p`.
    pub fn inverse_cdf(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self.kind {
            WeightDensity::Uniform => p,
            WeightDensity::Beta { a, b } if a == 0.5 && b == 0.5 => (FRAC_PI_2 * p).sin().powi(2),
            _ => {
                let k = self.cdf.partition_point(|c| *c < p).clamp(1, self.cdf.len() - 1);
                let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
                let f = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.0 };
                let theta = self.thetas[k - 1] + f * (self.thetas[k] - self.thetas[k - 1]);
                theta.sin().powi(2)
            }
        }
    }
}

/// An arclength-parameterised curve with a position density and noise scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Filament {
    vertices: Vec<Vec2>,
    arclength: Vec<f64>,
    weight: WeightDensity,
    sigma: f64,
    table: WeightTable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FilamentDoc {
    vertices: Vec<Vec2>,
    weight: WeightDensity,
    sigma: f64,
}

impl Filament {
    /// A filament through the given polyline, used as-is.
    pub fn new(vertices: Vec<Vec2>, weight: WeightDensity, sigma: f64) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Model("a filament needs at least two vertices".into()));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Model(format!("filament sigma must be positive, got {sigma}")));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("filament vertex is not finite".into()));
        }
        weight.validate()?;
        let mut arclength = Vec::with_capacity(vertices.len());
        let mut acc = 0.0;
        arclength.push(0.0);
        for w in vertices.windows(2) {
            let d = w[0].distance(w[1]);
            if d == 0.0 {
                return Err(Error::Model("filament has repeated consecutive vertices".into()));
            }
            acc += d;
            arclength.push(acc);
        }
        if !polyline_is_simple(&vertices, false) {
            return Err(Error::Model("filament curve intersects itself".into()));
        }
        Ok(Filament { vertices, arclength, weight, sigma, table: WeightTable::new(weight) })
    }

    /// Straight filament from `a` to `b`, resampled at the default resolution.
    pub fn segment(a: Vec2, b: Vec2, weight: WeightDensity, sigma: f64) -> Result<Self> {
        Filament::from_curve(|t| a.lerp(b, t), weight, sigma)
    }

    /// Samples the curve `t ↦ f(t)`, `t ∈ [0, 1]`, into a polyline with
    /// roughly [`VERTICES_PER_SIGMA`] vertices per σ of arclength.
    pub fn from_curve(f: impl Fn(f64) -> Vec2, weight: WeightDensity, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Model(format!("filament sigma must be positive, got {sigma}")));
        }
        let probe = 1024;
        let rough: f64 = (0..probe).map(|k| f(k as f64 / probe as f64).distance(f((k + 1) as f64 / probe as f64))).sum();
        let count = ((rough / sigma * VERTICES_PER_SIGMA).ceil() as usize).clamp(1, 1 << 20);
        let vertices = (0..=count).map(|k| f(k as f64 / count as f64)).collect();
        Filament::new(vertices, weight, sigma)
    }

    pub fn length(&self) -> f64 {
        *self.arclength.last().unwrap()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn weight(&self) -> WeightDensity {
        self.weight
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn arclengths(&self) -> &[f64] {
        &self.arclength
    }

    /// `f(s)` by linear interpolation along the stored polyline.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.length());
        let k = self.arclength.partition_point(|a| *a < s).clamp(1, self.vertices.len() - 1);
        let (a0, a1) = (self.arclength[k - 1], self.arclength[k]);
        let t = if a1 > a0 { (s - a0) / (a1 - a0) } else { 0.0 };
        self.vertices[k - 1].lerp(self.vertices[k], t)
    }

    /// Weight density `w(s)` on `[0, ℓ]`.
    pub fn weight_at(&self, s: f64) -> f64 {
        self.weight.density_u(s / self.length(), &self.table) / self.length()
    }

    /// Draws `s ~ w` by inverse CDF.
    pub fn sample_arclength<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.table.inverse_cdf(rng.random::<f64>()) * self.length()
    }

    /// Quadrature nodes `(f(sₖ), weightₖ)` for `∫ w(s) F(f(s)) ds`; weights sum to one.
    pub fn quadrature_nodes(&self, spec: &QuadratureSpec) -> Vec<(Vec2, f64)> {
        // ds/dθ = ℓ sin 2θ ≤ ℓ, so this spacing gives at least
        // `nodes_per_sigma` nodes per σ of arclength.
        let panels = ((spec.nodes_per_sigma as f64 * self.length() * FRAC_PI_2 / self.sigma).ceil() as usize).max(4);
        let mut nodes = Vec::new();
        let mut push = |theta: f64, w: f64| {
            let weight = w * self.weight.theta_weight(theta);
            if weight > 0.0 {
                nodes.push((self.point_at(self.length() * theta.sin().powi(2)), weight));
            }
        };
        match spec.rule {
            QuadratureRule::Trapezoid => {
                let dt = FRAC_PI_2 / panels as f64;
                for k in 0..=panels {
                    let w = if k == 0 || k == panels { 0.5 * dt } else { dt };
                    push(FRAC_PI_2 * k as f64 / panels as f64, w);
                }
            }
            QuadratureRule::GaussLegendre => {
                let groups = panels.div_ceil(4);
                let dt = FRAC_PI_2 / groups as f64;
                for k in 0..groups {
                    let mid = (k as f64 + 0.5) * dt;
                    for (x, w) in GAUSS_LEGENDRE_4 {
                        push(mid + 0.5 * dt * x, 0.5 * dt * w);
                    }
                }
            }
        }
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        for n in &mut nodes {
            n.1 /= total;
        }
        nodes
    }

    fn to_doc(&self) -> FilamentDoc {
        FilamentDoc { vertices: self.vertices.clone(), weight: self.weight, sigma: self.sigma }
    }
}

const GAUSS_LEGENDRE_4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    Trapezoid,
    GaussLegendre,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_sigma: usize,
    pub rule: QuadratureRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes_per_sigma: 8, rule: QuadratureRule::Trapezoid }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: Vec2,
    pub sigma: f64,
}

/// One weighted isotropic Gaussian term of the expanded mixture.
#[derive(Clone, Copy, Debug)]
struct GaussTerm {
    center: Vec2,
    weight: f64,
    inv_s2: f64,
}

/// The background/filament/cluster mixture. Immutable after construction.
#[derive(Clone, Debug)]
pub struct FilamentModel {
    filaments: Vec<Filament>,
    clusters: Vec<Cluster>,
    background: f64,
    weights: Vec<f64>,
    bounds: Rect,
    quadrature: QuadratureSpec,
    notes: Option<String>,
    terms: Vec<GaussTerm>,
    index: PointIndex,
    max_sigma: f64,
}

/// JSON form of a [`FilamentModel`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDocument {
    pub bounds: Rect,
    pub background_weight: f64,
    filaments: Vec<FilamentDoc>,
    pub filament_weights: Vec<f64>,
    pub clusters: Vec<Cluster>,
    pub cluster_weights: Vec<f64>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl FilamentModel {
    /// Builds a model. `weights` lists filament weights then cluster weights.
    pub fn new(
        filaments: Vec<Filament>,
        clusters: Vec<Cluster>,
        background: f64,
        weights: Vec<f64>,
        bounds: Rect,
        quadrature: QuadratureSpec,
    ) -> Result<Self> {
        if weights.len() != filaments.len() + clusters.len() {
            return Err(Error::Model(format!(
                "expected {} component weights, got {}",
                filaments.len() + clusters.len(),
                weights.len()
            )));
        }
        if bounds.is_degenerate() {
            return Err(Error::Model("model bounds must be a nondegenerate rectangle".into()));
        }
        if quadrature.nodes_per_sigma < 2 {
            return Err(Error::Model("quadrature needs at least 2 nodes per sigma".into()));
        }
        if weights.iter().chain(std::iter::once(&background)).any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Model("component weights must lie in [0, 1]".into()));
        }
        let total: f64 = background + weights.iter().sum::<f64>();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Model(format!("component weights sum to {total}, not 1")));
        }
        if let Some(c) = clusters.iter().find(|c| !(c.sigma.is_finite() && c.sigma > 0.0) || !c.center.is_finite()) {
            return Err(Error::Model(format!("invalid cluster {c:?}")));
        }
        if filaments.is_empty() && clusters.is_empty() && background == 0.0 {
            return Err(Error::Model("model has no components".into()));
        }

        let mut terms = Vec::new();
        for (f, alpha) in filaments.iter().zip(&weights) {
            if *alpha == 0.0 {
                continue;
            }
            let inv_s2 = 1.0 / (f.sigma * f.sigma);
            let norm = inv_s2 / (2.0 * PI);
            for (center, w) in f.quadrature_nodes(&quadrature) {
                terms.push(GaussTerm { center, weight: alpha * w * norm, inv_s2 });
            }
        }
        for (c, alpha) in clusters.iter().zip(&weights[filaments.len()..]) {
            if *alpha == 0.0 {
                continue;
            }
            let inv_s2 = 1.0 / (c.sigma * c.sigma);
            terms.push(GaussTerm { center: c.center, weight: alpha * inv_s2 / (2.0 * PI), inv_s2 });
        }
        let max_sigma = filaments.iter().map(|f| f.sigma).chain(clusters.iter().map(|c| c.sigma)).fold(0.0, f64::max);
        let cell = if max_sigma > 0.0 { GAUSSIAN_REACH * max_sigma } else { 1.0 };
        let index = PointIndex::new(terms.iter().map(|t| t.center).collect(), cell);
        Ok(FilamentModel { filaments, clusters, background, weights, bounds, quadrature, notes: None, terms, index, max_sigma })
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = Some(notes.into());
        self
    }

    pub fn filaments(&self) -> &[Filament] {
        &self.filaments
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn background_weight(&self) -> f64 {
        self.background
    }

    pub fn component_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn notes(&self) -> Option<&str> {
        self.notes.as_deref()
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quadrature
    }

    /// `σ = maxᵢ σᵢ`.
    pub fn max_sigma(&self) -> f64 {
        self.max_sigma
    }

    pub fn is_background_free(&self) -> bool {
        self.background == 0.0
    }

    /// Rectangle holding essentially all of the probability mass.
    pub fn support_box(&self) -> Rect {
        let mut r = self.bounds;
        for f in &self.filaments {
            r = r.union(&Rect::bounding(f.vertices()).unwrap());
        }
        for c in &self.clusters {
            r = r.union(&Rect::bounding(&[c.center]).unwrap());
        }
        r.expanded(8.0 * self.max_sigma)
    }

    /// Points of `𝓐 = 𝓕 ∪ 𝓒`: filament polyline vertices and cluster centres.
    pub fn structure_points(&self) -> Vec<Vec2> {
        self.filaments
            .iter()
            .flat_map(|f| f.vertices().iter().copied())
            .chain(self.clusters.iter().map(|c| c.center))
            .collect()
    }

    /// Same set as polylines (clusters are one-vertex polylines).
    pub fn structure_polylines(&self) -> Vec<Vec<Vec2>> {
        self.filaments.iter().map(|f| f.vertices().to_vec()).chain(self.clusters.iter().map(|c| vec![c.center])).collect()
    }

    fn background_density(&self, x: Vec2) -> f64 {
        if self.background > 0.0 && self.bounds.contains(x) {
            self.background / self.bounds.area()
        } else {
            0.0
        }
    }

    fn mixture_jet(&self, x: Vec2) -> Jet {
        let reach = GAUSSIAN_REACH * self.max_sigma;
        let mut value = 0.0;
        let mut grad = Vec2::ZERO;
        let mut hess = Sym2::ZERO;
        self.index.for_each_candidate(x, reach, |k, c| {
            let t = &self.terms[k];
            let u = x - c;
            let q = u.norm_sq() * t.inv_s2;
            if q > GAUSSIAN_REACH * GAUSSIAN_REACH {
                return;
            }
            let phi = t.weight * (-0.5 * q).exp();
            value += phi;
            let gi = -phi * t.inv_s2;
            grad += u * gi;
            hess += Sym2::outer(u).scale(phi * t.inv_s2 * t.inv_s2) + Sym2::diag(gi, gi);
        });
        Jet { value, gradient: grad, hessian: hess }
    }

    /// `g(x)`.
    pub fn density(&self, x: Vec2) -> f64 {
        let reach = GAUSSIAN_REACH * self.max_sigma;
        let mut value = 0.0;
        self.index.for_each_candidate(x, reach, |k, c| {
            let t = &self.terms[k];
            let q = (x - c).norm_sq() * t.inv_s2;
            if q <= GAUSSIAN_REACH * GAUSSIAN_REACH {
                value += t.weight * (-0.5 * q).exp();
            }
        });
        value + self.background_density(x)
    }

    fn check_differentiable(&self, x: Vec2) -> Result<()> {
        if self.background > 0.0 && self.bounds.on_boundary(x) {
            Err(Error::NondifferentiableBoundary { at: x })
        } else {
            Ok(())
        }
    }

    /// `∇g(x)`; the background is flat off its boundary.
    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        self.check_differentiable(x)?;
        Ok(self.mixture_jet(x).gradient)
    }

    pub fn hessian(&self, x: Vec2) -> Result<Sym2> {
        self.check_differentiable(x)?;
        Ok(self.mixture_jet(x).hessian)
    }

    /// Draws `n` points: component by weight, then a position on it.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PointCloud> {
        if n == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(self.weights.len() + 1);
        let mut acc = self.background;
        cumulative.push(acc);
        for w in &self.weights {
            acc += w;
            cumulative.push(acc);
        }
        let points = (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                let comp = cumulative.partition_point(|c| *c <= u).min(cumulative.len() - 1);
                self.draw_from(comp, rng)
            })
            .collect();
        PointCloud::new(points)
    }

    /// Component index 0 is the background, then filaments, then clusters.
    pub fn component_count(&self) -> usize {
        1 + self.weights.len()
    }

    /// One draw from component `comp` (same indexing as [`Self::component_count`]).
    pub fn draw_from<R: Rng + ?Sized>(&self, comp: usize, rng: &mut R) -> Vec2 {
        if comp == 0 {
            let b = self.bounds;
            return Vec2::new(b.min.x + rng.random::<f64>() * b.width(), b.min.y + rng.random::<f64>() * b.height());
        }
        let idx = comp - 1;
        if idx < self.filaments.len() {
            let f = &self.filaments[idx];
            let s = f.sample_arclength(rng);
            f.point_at(s) + gaussian_offset(rng, f.sigma)
        } else {
            let c = &self.clusters[idx - self.filaments.len()];
            c.center + gaussian_offset(rng, c.sigma)
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        let nf = self.filaments.len();
        ModelDocument {
            bounds: self.bounds,
            background_weight: self.background,
            filaments: self.filaments.iter().map(Filament::to_doc).collect(),
            filament_weights: self.weights[..nf].to_vec(),
            clusters: self.clusters.clone(),
            cluster_weights: self.weights[nf..].to_vec(),
            quadrature: self.quadrature,
            notes: self.notes.clone(),
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if doc.filaments.len() != doc.filament_weights.len() || doc.clusters.len() != doc.cluster_weights.len() {
            return Err(Error::Model("each filament and cluster needs exactly one weight".into()));
        }
        let filaments = doc
            .filaments
            .into_iter()
            .map(|f| Filament::new(f.vertices, f.weight, f.sigma))
            .collect::<Result<Vec<_>>>()?;
        let mut weights = doc.filament_weights;
        weights.extend(doc.cluster_weights);
        let model = FilamentModel::new(filaments, doc.clusters, doc.background_weight, weights, doc.bounds, doc.quadrature)?;
        Ok(match doc.notes {
            Some(n) => model.with_notes(n),
            None => model,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        FilamentModel::from_document(serde_json::from_str(text)?)
    }

    /// Equal mixture of two isotropic Gaussians at `(±1, 0)` with `σ = 0.5`.
    pub fn two_gaussian() -> Self {
        FilamentModel::new(
            vec![],
            vec![
                Cluster { center: Vec2::new(-1.0, 0.0), sigma: 0.5 },
                Cluster { center: Vec2::new(1.0, 0.0), sigma: 0.5 },
            ],
            0.0,
            vec![0.5, 0.5],
            Rect::new(-3.0, 3.0, -2.5, 2.5),
            QuadratureSpec::default(),
        )
        .expect("valid builtin model")
        .with_notes("two equal isotropic Gaussian clusters at (-1,0) and (1,0), sigma 0.5")
    }

    /// Three equal clusters on the unit circle with `σ = 0.4`; the centroid
    /// is a local minimum.
    pub fn triangle_clusters() -> Self {
        let clusters = (0..3)
            .map(|k| {
                let angle = FRAC_PI_2 + 2.0 * PI * k as f64 / 3.0;
                Cluster { center: Vec2::new(angle.cos(), angle.sin()), sigma: 0.4 }
            })
            .collect();
        FilamentModel::new(vec![], clusters, 0.0, vec![1.0 / 3.0; 3], Rect::new(-2.5, 2.5, -2.5, 2.5), QuadratureSpec::default())
            .expect("valid builtin model")
            .with_notes("three equal isotropic Gaussian clusters on the unit circle, sigma 0.4; local minimum at the origin")
    }
}

impl ScalarFieldSource for FilamentModel {
    fn value(&self, x: Vec2) -> f64 {
        self.density(x)
    }

    fn gradient(&self, x: Vec2) -> Vec2 {
        self.mixture_jet(x).gradient
    }

    fn hessian(&self, x: Vec2) -> Sym2 {
        self.mixture_jet(x).hessian
    }

    fn jet(&self, x: Vec2) -> Jet {
        let mut jet = self.mixture_jet(x);
        jet.value += self.background_density(x);
        jet
    }
}

fn gaussian_offset<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Vec2 {
    let dx: f64 = rng.sample(StandardNormal);
    let dy: f64 = rng.sample(StandardNormal);
    Vec2::new(dx * sigma, dy * sigma)
}

/// Pentagon settings: points per side ∝ side length, `Beta(½, ½)` along
/// each side, isotropic noise `σ = 0.03`.
pub const PENTAGON_SIGMA: f64 = 0.03;
pub const PENTAGON_POINTS: usize = 500;
/// Shortest accepted pentagon side.
pub const PENTAGON_MIN_SIDE: f64 = 0.1;

/// Splits `n` among parts proportionally to `lengths` (largest remainder).
pub fn proportional_counts(n: usize, lengths: &[f64]) -> Vec<usize> {
    let total: f64 = lengths.iter().sum();
    let quotas: Vec<f64> = lengths.iter().map(|l| l / total * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut rest = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    for &k in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[k] += 1;
        rest -= 1;
    }
    counts
}

/// Five random vertices in the unit square, ordered by angle about their
/// centroid; redrawn until the pentagon is simple and every side is at
/// least [`PENTAGON_MIN_SIDE`] long.
pub fn random_pentagon<R: Rng + ?Sized>(rng: &mut R) -> Vec<Vec2> {
    loop {
        let mut pts: Vec<Vec2> = (0..5).map(|_| Vec2::new(rng.random(), rng.random())).collect();
        let c = pts.iter().fold(Vec2::ZERO, |a, p| a + *p) / 5.0;
        pts.sort_by(|a, b| (a.y - c.y).atan2(a.x - c.x).total_cmp(&(b.y - c.y).atan2(b.x - c.x)));
        let sides_ok = (0..5).all(|k| pts[k].distance(pts[(k + 1) % 5]) >= PENTAGON_MIN_SIDE);
        if sides_ok && polyline_is_simple(&pts, true) {
            return pts;
        }
    }
}

/// The pentagon example: `n` points on the sides, plus `background` uniform
/// points in the unit square when requested.
pub fn pentagon_example_with<R: Rng + ?Sized>(rng: &mut R, n: usize, background: usize) -> Result<(FilamentModel, PointCloud)> {
    if n == 0 {
        return Err(Error::domain("pentagon example needs at least one filament point"));
    }
    let vertices = random_pentagon(rng);
    let filaments = (0..5)
        .map(|k| Filament::segment(vertices[k], vertices[(k + 1) % 5], WeightDensity::arcsine(), PENTAGON_SIGMA))
        .collect::<Result<Vec<_>>>()?;
    let lengths: Vec<f64> = filaments.iter().map(Filament::length).collect();
    let counts = proportional_counts(n, &lengths);
    let mut points = Vec::with_capacity(n + background);
    for (f, &count) in filaments.iter().zip(&counts) {
        for _ in 0..count {
            let s = f.sample_arclength(rng);
            points.push(f.point_at(s) + gaussian_offset(rng, PENTAGON_SIGMA));
        }
    }
    let unit = Rect::unit();
    for _ in 0..background {
        points.push(Vec2::new(rng.random(), rng.random()));
    }
    let total_len: f64 = lengths.iter().sum();
    let alpha0 = background as f64 / (n + background) as f64;
    let mut weights: Vec<f64> = lengths.iter().map(|l| (1.0 - alpha0) * l / total_len).collect();
    // Absorb rounding so the weights sum to one exactly.
    let drift = 1.0 - alpha0 - weights.iter().sum::<f64>();
    weights[0] += drift;
    let notes = format!(
        "pentagon: 5 vertices uniform in [0,1]^2 ordered by angle about their centroid, redrawn until simple with sides >= {PENTAGON_MIN_SIDE}; \
         Beta(1/2,1/2) rescaled to each side; {n} side points split proportionally to side length (largest remainder); \
         sigma {PENTAGON_SIGMA}; {background} uniform background points in [0,1]^2; RNG ChaCha8"
    );
    let model = FilamentModel::new(filaments, vec![], alpha0, weights, unit, QuadratureSpec::default())?.with_notes(notes);
    Ok((model, PointCloud::new(points)?))
}

/// The pentagon example with its default settings (500 points, no background).
pub fn pentagon_example<R: Rng + ?Sized>(rng: &mut R) -> Result<(FilamentModel, PointCloud)> {
    pentagon_example_with(rng, PENTAGON_POINTS, 0)
}
