//! Filament detection in planar point clouds through the density of
//! steepest-ascent paths.
//!
//! Every sample point is pushed uphill along the gradient of a kernel
//! density estimate. Where those paths bunch together the data has
//! filamentary structure, and the smoothed count of nearby paths (the path
//! density) turns that into a scalar field whose upper level sets trace the
//! filaments.
//!
//! * [`kernels`]: kernel profiles and the density estimate with analytic derivatives.
//! * [`flow`]: RK4 ascent paths, mean shift, critical points.
//! * [`path_density`]: the path-density estimator and bandwidth schedule.
//! * [`model`]: the filament/cluster/background mixture used for simulation.
//! * [`oracle`]: Monte-Carlo ground truth for the path measure and path density.
//! * [`levelset`]: grids, level sets, dilations and Hausdorff distances.
//! * [`cli`]: the `pathdensity` command-line pipeline.

pub mod cli;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod levelset;
pub mod model;
pub mod oracle;
pub mod path_density;
pub mod svg;

pub use error::{Error, Result};
pub use flow::{
    classify_critical_point, find_critical_points, mean_shift_path, trace_ascent_path, AscentPath, CriticalKind,
    CriticalPoint, CriticalSearch, FlowConfig, Jet, ScalarFieldSource,
};
pub use geometry::{Rect, Sym2, Vec2};
pub use kernels::{kde_density, kde_gradient, kde_hessian, kernel_value, Kde, KernelSpec, PointCloud, Profile};
pub use levelset::{GridField, GridSpec, Mask, PlanarSet};
pub use model::{Filament, FilamentModel, QuadratureSpec, WeightDensity};
pub use path_density::{default_bandwidths, BandwidthPlan, PathDensityEstimator, PathEnsemble};
