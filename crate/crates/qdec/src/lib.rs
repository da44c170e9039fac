//! Numerical laboratory for one-shot quantum information processing.
//!
//! The crate is organized around a labeled multipartite linear-algebra core
//! (`tensor`), quantum channels with their Stinespring dilations (`channel`),
//! seeded sources of random unitaries and 2-designs (`random`), exact and
//! optimization-based entropic quantities (`entropy`), Monte-Carlo decoupling
//! experiments (`decouple`), constructive one-shot channel codes (`coding`),
//! and information-locking schemes (`locking`). The `cli` module binds all of
//! it to the `qdec` binary.

pub mod channel;
pub mod cli;
pub mod coding;
pub mod decouple;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod locking;
pub mod qobj;
pub mod random;
pub mod scalar;
pub mod suite;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar for all shipped experiments. The core is generic over
/// [`Scalar`]; everything above it is pinned to `f64` because the contract
/// tolerances (1e-8 .. 1e-10) assume double precision.
pub type Real = f64;
/// Complex scalar built on [`Real`].
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix over [`Real`].
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector over [`Real`].
pub type CVector = nalgebra::DVector<C64>;

pub type LabeledSpace = tensor::LabeledSpace;
pub type PureState = tensor::PureState<f64>;
pub type DensityOperator = tensor::DensityOperator<f64>;
pub type LinearOp = tensor::LinearOp<f64>;
pub type Channel = channel::Channel;
pub type Sampler = random::Sampler;
