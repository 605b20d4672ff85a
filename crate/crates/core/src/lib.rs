//! Free Banach lattices of positively homogeneous functions over
//! finite-dimensional normed spaces.
//!
//! A function on the dual `E*` is an expression tree ([`HomFn`]) built from
//! evaluation functionals `delta_x`, the norm function, lattice operations and
//! a few special nodes. The crate evaluates such trees, brackets their
//! FBL^p norms, computes weak p-summing norms of functional tuples, builds
//! explicit witness constructions, and analyses positively homogeneous maps
//! between duals together with the composition operators they induce.
//!
//! ```
//! use fblab::{fbl_bracket, Budget, HomFn, Space};
//!
//! let e = Space::l1(2);
//! let f = HomFn::delta(vec![1.0, -2.0]);
//! let est = fbl_bracket(&e, &f, 1.0, &Budget::light(), 0).unwrap();
//! assert!(est.lower >= 2.97 && est.upper == 3.0);
//! ```

pub mod ast;
pub mod error;
pub mod estimate;
pub mod fblnorm;
pub mod homfn;
pub mod phmaps;
pub mod rng;
pub mod spaces;
pub mod summing;
pub mod verify;
pub mod witnesses;

pub use error::{Error, Result};
pub use estimate::{Budget, Method, NormEstimate, Witness};
pub use fblnorm::{fbl_bracket, fbl_lower, fbl_lower_with, fbl_upper, p_transfer, tuple_value};
pub use homfn::{
    classify_finite_dim, dim1_representation, homogeneity_defect_of, uniform_norm_ball,
    Classification, ContinuityClass, DiscreteMeasure, HomFn, Probe,
};
pub use phmaps::{
    comp_norm_identity_check, compose_op, extract_phi, injectivity_probe, linearity_report,
    p_monotonicity_check, phi_p_norm, phi_upper, PhKind, PhMap,
};
pub use spaces::{pairing, Functional, NormSpec, Space, Vector};
pub use summing::{weak_1_norm_signs, weak_p_monotonicity_check, weak_p_norm, FuncTuple};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/spaces.md")]
    pub struct Spaces;
    #[doc = include_str!("../../../book/src/functions.md")]
    pub struct Functions;
    #[doc = include_str!("../../../book/src/weak-summing.md")]
    pub struct WeakSumming;
    #[doc = include_str!("../../../book/src/fbl-norm.md")]
    pub struct FblNorm;
    #[doc = include_str!("../../../book/src/witnesses.md")]
    pub struct Witnesses;
    #[doc = include_str!("../../../book/src/maps.md")]
    pub struct Maps;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
    #[doc = include_str!("../../../book/src/verification.md")]
    pub struct Verification;
}
