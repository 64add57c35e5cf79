//! Numerical machinery for lower bounds on the `L^{n/2}` Weyl energy of
//! hypersurfaces in terms of Betti numbers.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: symmetric forms, (0,4) curvature tensors, the
//!   Kulkarni–Nomizu product, the Weyl map and the Cartan multiplicity test.
//! * [`gap`]: the polynomials `φ`, `ψ` on eigenvalue vectors, estimation of
//!   the gap constant `ε(n)` and the derived universal constants.
//! * [`models`]: homogeneous products of space forms, their Weyl energies,
//!   Betti numbers and obstruction reports, plus the minimal-hypersurface
//!   identity audits.
//! * [`morse`]: parametric hypersurfaces in `ℝ^{n+1}`, height-function
//!   critical points and Monte Carlo total curvature by index.
//! * [`report`]: shared JSON report envelope used by the CLI.

pub mod algebra;
pub mod error;
pub mod gap;
pub mod models;
pub mod morse;
mod par;
pub mod report;
pub mod rng;
pub mod sphere;

pub use algebra::{CurvTensor, Spectrum, SymForm, VectorValuedForm};
pub use error::{Error, Result};
