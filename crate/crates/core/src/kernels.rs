//! Radial kernel profiles and the planar kernel density estimator with
//! analytic gradient and Hessian.
//!
//! Profiles are written in the variable `s = t²/2`, which keeps the
//! derivatives of `K(‖u‖/h)` free of the `1/‖u‖` singularity at the centre:
//!
//! ```text
//! ∇ K(‖u‖/h)  = k'(s) u / h²
//! ∇² K(‖u‖/h) = k''(s) u uᵀ / h⁴ + k'(s) I / h²
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Jet, ScalarFieldSource};
use crate::geometry::{PointIndex, Rect, Sym2, Vec2};

/// Beyond this many bandwidths the Gaussian profile is below 3e-18 and is
/// treated as zero by indexed evaluation.
pub const GAUSSIAN_EFFECTIVE_SUPPORT: f64 = 9.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `K(t) = exp(-t²/2)`
    Gaussian,
    /// `K(t) = exp(-t²/2) - exp(-c²/2)` for `t < c`, zero beyond. The shift
    /// keeps the profile continuous at the cutoff.
    TruncatedGaussian { cutoff: f64 },
}

/// A kernel profile together with its normalising constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub profile: Profile,
    /// `c_K` such that `c_K · K(‖u‖)` integrates to one over the plane.
    pub normalizer: f64,
    /// `∫₀^∞ K(t) dt`, the mass of the profile on the half line.
    pub half_line_mass: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::gaussian()
    }
}

impl KernelSpec {
    pub fn gaussian() -> Self {
        KernelSpec {
            profile: Profile::Gaussian,
            normalizer: 1.0 / (2.0 * PI),
            half_line_mass: (PI / 2.0).sqrt(),
        }
    }

    pub fn truncated_gaussian(cutoff: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::domain(format!("kernel cutoff must be positive and finite, got {cutoff}")));
        }
        let big_s = 0.5 * cutoff * cutoff;
        let floor = (-big_s).exp();
        // ∫₀^S (e^{-s} - e^{-S}) ds; the plane integral is 2π times this.
        let plane_mass = 2.0 * PI * (1.0 - floor - big_s * floor);
        let profile = Profile::TruncatedGaussian { cutoff };
        let half_line_mass = simpson(|t| (-0.5 * t * t).exp() - floor, 0.0, cutoff, 20_000);
        Ok(KernelSpec { profile, normalizer: 1.0 / plane_mass, half_line_mass })
    }

    /// Radius (in bandwidth units) outside which the profile is zero, or
    /// negligible for the Gaussian.
    pub fn support(&self) -> f64 {
        match self.profile {
            Profile::Gaussian => GAUSSIAN_EFFECTIVE_SUPPORT,
            Profile::TruncatedGaussian { cutoff } => cutoff,
        }
    }

    /// `K(t)`; errors on negative or non-finite `t`.
    pub fn value(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("kernel argument must be nonnegative, got {t}")));
        }
        Ok(self.profile_at(t))
    }

    /// `K(t)` without argument checks.
    #[inline]
    pub fn profile_at(&self, t: f64) -> f64 {
        self.k(0.5 * t * t)
    }

    /// `K'(t)`.
    #[inline]
    pub fn derivative_at(&self, t: f64) -> f64 {
        self.dk(0.5 * t * t) * t
    }

    #[inline]
    pub(crate) fn k(&self, s: f64) -> f64 {
        match self.profile {
            Profile::Gaussian => (-s).exp(),
            Profile::TruncatedGaussian { cutoff } => {
                let big_s = 0.5 * cutoff * cutoff;
                if s < big_s {
                    (-s).exp() - (-big_s).exp()
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    pub(crate) fn dk(&self, s: f64) -> f64 {
        match self.profile {
            Profile::Gaussian => -(-s).exp(),
            Profile::TruncatedGaussian { cutoff } => {
                if s < 0.5 * cutoff * cutoff {
                    -(-s).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// `(k(s), k'(s), k''(s))` sharing one exponential.
    #[inline]
    pub(crate) fn k012(&self, s: f64) -> (f64, f64, f64) {
        match self.profile {
            Profile::Gaussian => {
                let e = (-s).exp();
                (e, -e, e)
            }
            Profile::TruncatedGaussian { cutoff } => {
                let big_s = 0.5 * cutoff * cutoff;
                if s < big_s {
                    let e = (-s).exp();
                    (e - (-big_s).exp(), -e, e)
                } else {
                    (0.0, 0.0, 0.0)
                }
            }
        }
    }

    /// Upper bound on `|K'|`, used for Lipschitz bounds on smoothed fields.
    pub fn derivative_bound(&self) -> f64 {
        // |K'(t)| = t e^{-t²/2} peaks at t = 1 for both profiles.
        (-0.5f64).exp()
    }
}

/// Raw profile value `K(t)`.
pub fn kernel_value(k: &KernelSpec, t: f64) -> Result<f64> {
    k.value(t)
}

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// The sample `X₁, …, Xₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec2>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("point cloud must contain at least one point"));
        }
        if let Some(k) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::domain(format!("point {k} has a non-finite coordinate")));
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounds(&self) -> Rect {
        Rect::bounding(&self.points).expect("nonempty cloud")
    }

    /// Largest coordinate range, the length scale used for default bandwidths.
    pub fn spread(&self) -> f64 {
        let b = self.bounds();
        b.width().max(b.height())
    }

    pub fn into_points(self) -> Vec<Vec2> {
        self.points
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Sums {
    k: f64,
    grad: Vec2,
    hess_outer: Sym2,
    dk: f64,
}

impl Sums {
    #[inline]
    fn add(&mut self, kernel: &KernelSpec, u: Vec2, inv_h2: f64) {
        let s = 0.5 * u.norm_sq() * inv_h2;
        let (k, dk, d2k) = kernel.k012(s);
        self.k += k;
        self.grad += u * dk;
        self.hess_outer += Sym2::outer(u).scale(d2k);
        self.dk += dk;
    }

    fn finish(self, amp: f64, inv_h2: f64) -> Jet {
        let g = amp * inv_h2;
        let hess = (self.hess_outer.scale(inv_h2) + Sym2::diag(self.dk, self.dk)).scale(g);
        Jet { value: amp * self.k, gradient: self.grad * g, hessian: hess }
    }
}

/// Kernel density estimate `ĝₙ(x) = (1/n) Σᵢ (c_K/h²) K(‖x − Xᵢ‖/h)`.
///
/// Evaluation visits only the points within `support · h` of the query
/// through a bucket grid; [`kde_density`] and friends sum over every point.
#[derive(Clone, Debug)]
pub struct Kde {
    kernel: KernelSpec,
    h: f64,
    index: PointIndex,
}

impl Kde {
    pub fn new(cloud: &PointCloud, kernel: KernelSpec, h: f64) -> Result<Self> {
        check_bandwidth(h)?;
        let index = PointIndex::new(cloud.points().to_vec(), kernel.support() * h);
        Ok(Kde { kernel, h, index })
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn points(&self) -> &[Vec2] {
        self.index.points()
    }

    pub fn len(&self) -> usize {
        self.index.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    fn amplitude(&self) -> f64 {
        self.kernel.normalizer / (self.len() as f64 * self.h * self.h)
    }

    fn reach(&self) -> f64 {
        self.kernel.support() * self.h
    }

    pub fn density(&self, x: Vec2) -> f64 {
        let inv_h2 = 1.0 / (self.h * self.h);
        let reach_sq = self.reach() * self.reach();
        let mut acc = 0.0;
        self.index.for_each_candidate(x, self.reach(), |_, p| {
            let u = x - p;
            let d2 = u.norm_sq();
            if d2 < reach_sq {
                acc += self.kernel.k(0.5 * d2 * inv_h2);
            }
        });
        acc * self.amplitude()
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let inv_h2 = 1.0 / (self.h * self.h);
        let reach_sq = self.reach() * self.reach();
        let mut acc = Vec2::ZERO;
        self.index.for_each_candidate(x, self.reach(), |_, p| {
            let u = x - p;
            let d2 = u.norm_sq();
            if d2 < reach_sq {
                acc += u * self.kernel.dk(0.5 * d2 * inv_h2);
            }
        });
        acc * (self.amplitude() * inv_h2)
    }

    pub fn hessian(&self, x: Vec2) -> Sym2 {
        self.jet(x).hessian
    }

    /// Value, gradient and Hessian in one pass over the neighbours.
    pub fn jet(&self, x: Vec2) -> Jet {
        let inv_h2 = 1.0 / (self.h * self.h);
        let reach_sq = self.reach() * self.reach();
        let mut sums = Sums::default();
        self.index.for_each_candidate(x, self.reach(), |_, p| {
            let u = x - p;
            if u.norm_sq() < reach_sq {
                sums.add(&self.kernel, u, inv_h2);
            }
        });
        sums.finish(self.amplitude(), inv_h2)
    }

    /// One mean-shift update `Σ Xᵢ K(‖x−Xᵢ‖/h) / Σ K(‖x−Xᵢ‖/h)`; `None`
    /// when every weight is zero.
    pub fn mean_shift_step(&self, x: Vec2) -> Option<Vec2> {
        let inv_h2 = 1.0 / (self.h * self.h);
        let reach_sq = self.reach() * self.reach();
        let mut num = Vec2::ZERO;
        let mut den = 0.0;
        self.index.for_each_candidate(x, self.reach(), |_, p| {
            let d2 = (x - p).norm_sq();
            if d2 < reach_sq {
                let w = self.kernel.k(0.5 * d2 * inv_h2);
                num += p * w;
                den += w;
            }
        });
        if den > 0.0 {
            Some(num / den)
        } else {
            None
        }
    }

    /// Largest estimate over the data points, a cheap stand-in for `max ĝₙ`.
    pub fn peak_at_data(&self) -> f64 {
        self.points().iter().map(|p| self.density(*p)).fold(0.0, f64::max)
    }
}

impl ScalarFieldSource for Kde {
    fn value(&self, x: Vec2) -> f64 {
        self.density(x)
    }

    fn gradient(&self, x: Vec2) -> Vec2 {
        Kde::gradient(self, x)
    }

    fn hessian(&self, x: Vec2) -> Sym2 {
        Kde::hessian(self, x)
    }

    fn jet(&self, x: Vec2) -> Jet {
        Kde::jet(self, x)
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("bandwidth must be positive and finite, got {h}")))
    }
}

fn direct_jet(cloud: &PointCloud, k: &KernelSpec, h: f64, x: Vec2) -> Result<Jet> {
    check_bandwidth(h)?;
    if cloud.is_empty() {
        return Err(Error::domain("empty point cloud"));
    }
    let inv_h2 = 1.0 / (h * h);
    let mut sums = Sums::default();
    for p in cloud.points() {
        sums.add(k, x - *p, inv_h2);
    }
    Ok(sums.finish(k.normalizer / (cloud.len() as f64 * h * h), inv_h2))
}

/// `ĝₙ(x)` by direct summation over every point.
pub fn kde_density(cloud: &PointCloud, k: &KernelSpec, h: f64, x: Vec2) -> Result<f64> {
    direct_jet(cloud, k, h, x).map(|j| j.value)
}

/// `∇ĝₙ(x)` by direct summation.
pub fn kde_gradient(cloud: &PointCloud, k: &KernelSpec, h: f64, x: Vec2) -> Result<Vec2> {
    direct_jet(cloud, k, h, x).map(|j| j.gradient)
}

/// `∇²ĝₙ(x)` by direct summation; symmetric by construction.
pub fn kde_hessian(cloud: &PointCloud, k: &KernelSpec, h: f64, x: Vec2) -> Result<Sym2> {
    direct_jet(cloud, k, h, x).map(|j| j.hessian)
}
