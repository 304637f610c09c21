//! Steepest-ascent integral curves, the mean-shift iteration, and critical
//! point search for any smooth planar scalar field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Rect, Sym2, Vec2};
use crate::kernels::{Kde, KernelSpec, PointCloud};

/// Value, gradient and Hessian at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec2,
    pub hessian: Sym2,
}

impl Jet {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.gradient.is_finite() && self.hessian.is_finite()
    }
}

/// A C² scalar field on the plane with evaluable derivatives.
///
/// Implementations are read-only and may be shared across threads.
pub trait ScalarFieldSource: Sync {
    fn value(&self, x: Vec2) -> f64;
    fn gradient(&self, x: Vec2) -> Vec2;
    fn hessian(&self, x: Vec2) -> Sym2;

    fn jet(&self, x: Vec2) -> Jet {
        Jet { value: self.value(x), gradient: self.gradient(x), hessian: self.hessian(x) }
    }
}

impl<T: ScalarFieldSource + ?Sized> ScalarFieldSource for &T {
    fn value(&self, x: Vec2) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: Vec2) -> Vec2 {
        (**self).gradient(x)
    }
    fn hessian(&self, x: Vec2) -> Sym2 {
        (**self).hessian(x)
    }
    fn jet(&self, x: Vec2) -> Jet {
        (**self).jet(x)
    }
}

/// `g(x) = -½ c ‖x − center‖²`, whose ascent flow is `center + (x − center) e^{-ct}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Paraboloid {
    pub center: Vec2,
    pub curvature: f64,
}

impl Paraboloid {
    pub fn unit() -> Self {
        Paraboloid { center: Vec2::ZERO, curvature: 1.0 }
    }

    /// Exact position after flowing for time `t` from `x0`.
    pub fn flow(&self, x0: Vec2, t: f64) -> Vec2 {
        self.center + (x0 - self.center) * (-self.curvature * t).exp()
    }
}

impl ScalarFieldSource for Paraboloid {
    fn value(&self, x: Vec2) -> f64 {
        -0.5 * self.curvature * (x - self.center).norm_sq()
    }
    fn gradient(&self, x: Vec2) -> Vec2 {
        (x - self.center) * -self.curvature
    }
    fn hessian(&self, _x: Vec2) -> Sym2 {
        Sym2::diag(-self.curvature, -self.curvature)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Target arclength per step.
    pub step_scale: f64,
    pub max_steps: usize,
    /// Gradient norm below which a path is converged.
    pub grad_tolerance: f64,
    /// Steps shorter than this end the path.
    pub min_displacement: f64,
    /// Upper bound on `Δt · ‖∇²g‖`; keeps RK4 accurate where the field curves.
    pub stiffness: f64,
    /// Relative rise over the starting value that marks the end of the
    /// initial transient (`AscentPath::trim_hint`).
    pub trim_fraction: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            step_scale: 0.01,
            max_steps: 10_000,
            grad_tolerance: 1e-9,
            min_displacement: 1e-9,
            stiffness: 0.5,
            trim_fraction: 0.1,
        }
    }
}

impl FlowConfig {
    /// Scale-aware defaults for paths on a kernel density estimate.
    pub fn for_kde(kde: &Kde) -> Self {
        let h = kde.bandwidth();
        FlowConfig {
            step_scale: 0.25 * h,
            max_steps: 10_000,
            grad_tolerance: 1e-7 * kde.peak_at_data() / h,
            min_displacement: 1e-8 * h,
            stiffness: 1.0,
            ..FlowConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.step_scale > 0.0
            && self.max_steps > 0
            && self.grad_tolerance > 0.0
            && self.min_displacement > 0.0
            && self.stiffness > 0.0
            && self.trim_fraction >= 0.0
            && self.step_scale.is_finite()
            && self.grad_tolerance.is_finite()
            && self.min_displacement.is_finite()
            && self.stiffness.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid flow configuration {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GradientTolerance,
    SmallDisplacement,
    MaxSteps,
    /// No step length restored ascent; the start is numerically stationary.
    Stalled,
}

/// A discretised integral curve or mean-shift trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct AscentPath {
    pub vertices: Vec<Vec2>,
    /// Flow time at each vertex (iteration index for mean shift).
    pub times: Vec<f64>,
    /// Field value at each vertex.
    pub values: Vec<f64>,
    pub step_count: usize,
    pub terminal_gradient_norm: f64,
    /// Set iff the terminal gradient norm is below the configured tolerance.
    pub converged: bool,
    pub stop: StopReason,
    /// First vertex after the initial transient.
    pub trim_hint: usize,
}

impl AscentPath {
    pub fn start(&self) -> Vec2 {
        self.vertices[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.vertices.last().expect("paths have at least one vertex")
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertices from `trim` on; at least the terminal vertex.
    pub fn trimmed(&self, trim: usize) -> &[Vec2] {
        let start = trim.min(self.vertices.len() - 1);
        &self.vertices[start..]
    }

    pub fn arclength(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// A single-vertex path at the start point.
    pub fn single(x: Vec2, value: f64, gradient_norm: f64, tolerance: f64, stop: StopReason) -> Self {
        AscentPath {
            vertices: vec![x],
            times: vec![0.0],
            values: vec![value],
            step_count: 0,
            terminal_gradient_norm: gradient_norm,
            converged: gradient_norm < tolerance,
            stop,
            trim_hint: 0,
        }
    }
}

fn trim_hint(values: &[f64], fraction: f64) -> usize {
    let v0 = values[0];
    let target = v0 + fraction * v0.abs();
    values.iter().position(|v| *v > target).unwrap_or(values.len() - 1)
}

fn rk4_step<F: ScalarFieldSource + ?Sized>(field: &F, x: Vec2, k1: Vec2, dt: f64) -> Vec2 {
    let k2 = field.gradient(x + k1 * (0.5 * dt));
    let k3 = field.gradient(x + k2 * (0.5 * dt));
    let k4 = field.gradient(x + k3 * dt);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Ascent tolerance for one step: the value may not drop by more than this.
fn ascent_slack(v: f64) -> f64 {
    1e-12 * v.abs()
}

/// Integrates `ẋ = ∇g(x)` forward from `x0` with classical RK4.
///
/// The step is `step_scale / max(‖∇g‖, grad_tolerance)` in flow time,
/// capped by `stiffness / ‖∇²g‖`, and halved until the field value does
/// not decrease.
pub fn trace_ascent_path<F: ScalarFieldSource + ?Sized>(field: &F, x0: Vec2, cfg: &FlowConfig) -> Result<AscentPath> {
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(Error::domain("start point is not finite"));
    }
    let mut jet = field.jet(x0);
    if !jet.is_finite() {
        return Err(Error::Numerical { message: "non-finite field at start".into(), last_valid: x0 });
    }
    let mut vertices = vec![x0];
    let mut times = vec![0.0];
    let mut values = vec![jet.value];
    let mut x = x0;
    let mut t = 0.0;
    let mut stop = StopReason::MaxSteps;

    for _ in 0..cfg.max_steps {
        let gnorm = jet.gradient.norm();
        if gnorm < cfg.grad_tolerance {
            stop = StopReason::GradientTolerance;
            break;
        }
        let mut dt = cfg.step_scale / gnorm.max(cfg.grad_tolerance);
        let curvature = jet.hessian.spectral_norm();
        if curvature > 0.0 {
            dt = dt.min(cfg.stiffness / curvature);
        }
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = rk4_step(field, x, jet.gradient, dt);
            if !candidate.is_finite() {
                return Err(Error::Numerical { message: "non-finite RK4 stage".into(), last_valid: x });
            }
            let next = field.jet(candidate);
            if !next.is_finite() {
                return Err(Error::Numerical { message: "non-finite field value".into(), last_valid: x });
            }
            if next.value >= jet.value - ascent_slack(jet.value) {
                accepted = Some((candidate, next, dt));
                break;
            }
            dt *= 0.5;
        }
        let Some((candidate, next, dt)) = accepted else {
            stop = StopReason::Stalled;
            break;
        };
        let displacement = candidate.distance(x);
        if displacement == 0.0 {
            stop = StopReason::SmallDisplacement;
            break;
        }
        x = candidate;
        jet = next;
        t += dt;
        vertices.push(x);
        times.push(t);
        values.push(jet.value);
        if displacement < cfg.min_displacement {
            stop = StopReason::SmallDisplacement;
            break;
        }
    }

    let terminal = jet.gradient.norm();
    if stop == StopReason::MaxSteps && terminal < cfg.grad_tolerance {
        stop = StopReason::GradientTolerance;
    }
    let trim = trim_hint(&values, cfg.trim_fraction);
    Ok(AscentPath {
        step_count: vertices.len() - 1,
        vertices,
        times,
        values,
        terminal_gradient_norm: terminal,
        converged: terminal < cfg.grad_tolerance,
        stop,
        trim_hint: trim,
    })
}

/// Mean-shift trajectory from `x0` on the sample.
pub fn mean_shift_path(cloud: &PointCloud, k: &KernelSpec, h: f64, x0: Vec2, cfg: &FlowConfig) -> Result<AscentPath> {
    let kde = Kde::new(cloud, *k, h)?;
    mean_shift_path_on(&kde, x0, cfg)
}

/// Mean-shift trajectory reusing a prepared estimator.
pub fn mean_shift_path_on(kde: &Kde, x0: Vec2, cfg: &FlowConfig) -> Result<AscentPath> {
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(Error::domain("start point is not finite"));
    }
    let mut x = x0;
    let mut vertices = vec![x0];
    let mut values = vec![kde.density(x0)];
    let mut stop = StopReason::MaxSteps;
    for _ in 0..cfg.max_steps {
        let next = kde.mean_shift_step(x).ok_or(Error::StartTooFar { start: x0 })?;
        let displacement = next.distance(x);
        if displacement < cfg.min_displacement {
            stop = StopReason::SmallDisplacement;
            break;
        }
        x = next;
        vertices.push(x);
        values.push(kde.density(x));
    }
    let terminal = kde.gradient(x).norm();
    let trim = trim_hint(&values, cfg.trim_fraction);
    let times = (0..vertices.len()).map(|k| k as f64).collect();
    Ok(AscentPath {
        step_count: vertices.len() - 1,
        vertices,
        times,
        values,
        terminal_gradient_norm: terminal,
        converged: terminal < cfg.grad_tolerance,
        stop,
        trim_hint: trim,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalKind {
    Minimum,
    Saddle,
    Maximum,
    Degenerate,
}

impl CriticalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriticalKind::Minimum => "minimum",
            CriticalKind::Saddle => "saddle",
            CriticalKind::Maximum => "maximum",
            CriticalKind::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Vec2,
    pub kind: CriticalKind,
    /// Ascending.
    pub hessian_eigenvalues: (f64, f64),
}

/// Eigenvalue-sign classification; eigenvalues within `eps` of zero are degenerate.
pub fn classify_critical_point(hessian: &Sym2, eps: f64) -> CriticalKind {
    let (lo, hi) = hessian.eigenvalues();
    if lo.abs() < eps || hi.abs() < eps {
        CriticalKind::Degenerate
    } else if hi < 0.0 {
        CriticalKind::Maximum
    } else if lo > 0.0 {
        CriticalKind::Minimum
    } else {
        CriticalKind::Saddle
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSearch {
    /// Newton seeds per side of the domain.
    pub seeds_per_side: usize,
    pub max_newton_steps: usize,
    /// Roots closer than this fraction of the domain diameter are merged.
    pub merge_fraction: f64,
    /// Gradient acceptance threshold relative to the largest seed gradient.
    pub relative_grad_tolerance: f64,
    /// Degeneracy threshold relative to the largest seed Hessian norm.
    pub relative_eigen_threshold: f64,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        CriticalSearch {
            seeds_per_side: 40,
            max_newton_steps: 100,
            merge_fraction: 1e-3,
            relative_grad_tolerance: 1e-8,
            relative_eigen_threshold: 1e-9,
        }
    }
}

/// Finds the critical points of `field` inside `domain` by damped Newton
/// iteration on `∇g = 0` from a grid of seeds.
///
/// Seeds that diverge or leave the domain are dropped. Results are sorted by
/// `(x, y)` so the output is independent of evaluation order.
pub fn find_critical_points<F: ScalarFieldSource + ?Sized>(field: &F, domain: Rect, search: &CriticalSearch) -> Result<Vec<CriticalPoint>> {
    if domain.is_degenerate() {
        return Err(Error::domain("critical point search needs a bounded, nondegenerate domain"));
    }
    let m = search.seeds_per_side.max(2);
    let diameter = domain.diameter();
    let seeds: Vec<Vec2> = (0..m)
        .flat_map(|j| {
            (0..m).map(move |i| {
                Vec2::new(
                    domain.min.x + domain.width() * (i as f64 + 0.5) / m as f64,
                    domain.min.y + domain.height() * (j as f64 + 0.5) / m as f64,
                )
            })
        })
        .collect();
    let seed_jets: Vec<Jet> = seeds.iter().map(|s| field.jet(*s)).collect();
    let grad_scale = seed_jets.iter().map(|j| j.gradient.norm()).fold(0.0, f64::max);
    let hess_scale = seed_jets.iter().map(|j| j.hessian.spectral_norm()).fold(0.0, f64::max);
    let grad_tol = search.relative_grad_tolerance * grad_scale.max(f64::MIN_POSITIVE);
    let eig_eps = search.relative_eigen_threshold * hess_scale;
    let max_jump = 0.1 * diameter;

    let mut roots: Vec<Vec2> = Vec::new();
    for seed in seeds {
        let mut x = seed;
        let mut found = false;
        for _ in 0..search.max_newton_steps {
            let jet = field.jet(x);
            let Some(step) = jet.hessian.solve(jet.gradient) else { break };
            let mut step = -step;
            let len = step.norm();
            if !len.is_finite() {
                break;
            }
            if len > max_jump {
                step = step * (max_jump / len);
            }
            x = x + step;
            if !domain.contains(x) {
                break;
            }
            if len <= 1e-12 * diameter {
                found = field.gradient(x).norm() < grad_tol;
                break;
            }
        }
        if found && !roots.iter().any(|r| r.distance(x) < search.merge_fraction * diameter) {
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    Ok(roots
        .into_iter()
        .map(|location| {
            let hessian = field.hessian(location);
            CriticalPoint {
                location,
                kind: classify_critical_point(&hessian, eig_eps),
                hessian_eigenvalues: hessian.eigenvalues(),
            }
        })
        .collect())
}
