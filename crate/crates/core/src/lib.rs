//! Numeric kernels for scale calculus on truncated lattices: weighted
//! rapidly-vanishing function spaces with computable seminorms, smoothing
//! of scales into differentiable ones, two-factor splitting of rapidly
//! vanishing functions and module elements through truncated even
//! products, covariant convolution on finite group windows, and executable
//! counterexamples. Every inequality the library claims is returned as a
//! [`cert::Certificate`] with fitted constants, the worst residual and its
//! witness.

pub mod catalog;
pub mod cert;
pub mod counterexamples;
pub mod crossed;
pub mod dixmier;
pub mod error;
pub mod grid;
pub mod io;
pub mod scales;
pub mod schwartz;

pub use cert::Certificate;
pub use error::{Error, Result};
pub use grid::{BoundaryPolicy, Grid, GridDescriptor, GridFunction, MultiIndex};
pub use scales::{MollifiedScale, Scale, ScaleKind};
