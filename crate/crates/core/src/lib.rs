//! Constructive tools for estimating p-summing norms with few vectors.
//!
//! The crate works with subspaces of `L_p` over finite probability spaces:
//!
//! * [`measure`]: weighted spaces, subspaces, densities, `L_p` and weak-`ℓ_p` norms;
//! * [`lewis`]: the Lewis density and its blend `α = (β+1)/2`;
//! * [`sparsify`]: atom splitting, random sign halving and the iterated
//!   reduction of the measure space;
//! * [`summing`]: lower bounds on `π_p^{(k)}` by multi-start ascent, plus
//!   exact and brute-force oracles;
//! * [`hypercube`]: Walsh-tail subspaces of `L_p({-1,1}^n)`;
//! * [`empirics`]: Monte Carlo and covering-number validators;
//! * [`instance`]: JSON file formats.

// Negated float comparisons such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod empirics;
pub mod error;
pub mod hypercube;
pub mod instance;
pub mod lewis;
pub mod measure;
pub mod ratio;
pub mod rng;
pub mod sparsify;
pub mod sphere;
pub mod summing;

pub use error::{Error, Result};
pub use measure::{
    change_density, lp_norm, weak_lp_norm, Density, DomainNorm, Subspace, VectorSystem,
    WeightedSpace,
};
