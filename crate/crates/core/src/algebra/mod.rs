//! Dense tensor algebra for symmetric bilinear forms and (0,4) curvature
//! tensors on an `n`-dimensional Euclidean vector space.
//!
//! All objects are stored densely in an orthonormal basis, so "trace" always
//! means the plain index contraction.

mod decompose;
mod form;
mod kn;
mod tensor;
mod weyl;

pub use decompose::{decompose, Decomposition};
pub use form::{Spectrum, SymForm, VectorValuedForm};
pub use kn::{curvature_of_form, is_flat, kn_product, kn_product_valued, nullity_space, Nullity};
pub use tensor::CurvTensor;
pub use weyl::{
    cartan_check, cartan_check_with, cartan_lift, schouten_of_form, weyl_map, CartanVerdict, CARTAN_CLUSTER_TOL,
    CARTAN_RESIDUAL_TOL,
};
