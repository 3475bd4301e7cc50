//! Generalized LRPC rank-metric codes built on 3-tensor bilinear products.
//!
//! Vectors are rows throughout: a matrix `L` acts as `x -> xL`.

pub mod analysis;
pub mod cli;
pub mod decoder;
pub mod error;
pub mod field;
pub mod glrpc;
pub mod linalg;
pub mod tensor;

pub use decoder::{decode, Algorithm, DecodeOutcome, DecodeStatus, Strictness};
pub use error::{Error, Result};
pub use field::{ExtElem, FieldCtx, Fq};
pub use glrpc::{GlrpcInstance, GlrpcParams, TensorMode};
pub use linalg::{MatrixFq, Subspace};
pub use tensor::{Axis, Tensor3};
