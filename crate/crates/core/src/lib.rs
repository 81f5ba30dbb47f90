//! Quadrature-weighted normalization statistics for gridded multi-channel
//! fields, plus the experiment battery that verifies their discretization
//! -consistency behavior at desk scale.
//!
//! The crate is organized around a small pipeline:
//!
//! - [`grid`]: tensor-product grids on `[0,1]^d` (uniform endpoint, periodic,
//!   nonuniform 1D families) and analytic test fields sampled on them.
//! - [`quadrature`]: trapezoid / Simpson / Boole / control-volume weight
//!   vectors and tensor-product weight fields with total mass `|Omega|`.
//! - [`stats`]: uniform, quadrature-weighted, and blended moments under
//!   instance / layer / group reduction patterns.
//! - [`normalize`]: QuadNorm and BlendQuadNorm forward passes next to the
//!   standard baselines (LayerNorm, InstanceNorm, GroupNorm, RMSNorm).
//! - [`resample`]: channelwise bilinear/bicubic resampling between uniform
//!   grids for cross-resolution comparison.
//! - [`consistency`]: statistic/output mismatch measurements, exact endpoint
//!   identities, and empirical convergence orders.
//! - [`opsim`]: a frozen synthetic operator stack for gap/depth transfer
//!   scaling experiments.
//! - [`meshbias`]: uniform-vs-control-volume bias reports on skewed meshes.
//! - [`statkit`]: paired bootstrap CIs, TOST equivalence, Holm-Bonferroni,
//!   Cohen's d, paired t-tests.
//! - [`verify`]: the acceptance battery behind `qnk verify-all`.

pub mod cli;
pub mod consistency;
pub mod error;
pub mod fieldio;
pub mod grid;
pub mod meshbias;
pub mod normalize;
pub mod opsim;
pub mod quadrature;
pub mod resample;
pub mod special;
pub mod statkit;
pub mod stats;
pub(crate) mod sum;
pub mod verify;

pub use error::{Error, Result};
