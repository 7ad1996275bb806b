//! Neural Turbo autoencoder toolkit.
//!
//! A self-contained implementation of a learned rate-1/2 channel code: a
//! two-branch sequence encoder built from gated residual blocks with a
//! parallel-scan linear recurrence, an iterative two-stage CNN decoder
//! exchanging extrinsic information across a fixed interleaver, an AWGN
//! channel model, alternating-phase training, and Monte-Carlo BER/BLER
//! evaluation. Everything runs on a small reverse-mode autodiff engine
//! (`tensor`) that works on flat `f32` buffers.
//!
//! The crates in this workspace split as: algorithms here, command-line
//! drivers in `ntmg-cli`, microbenchmarks in `ntmg-bench`.

pub mod channel;
pub mod checkpoint;
pub mod codec;
pub mod error;
pub mod eval;
pub mod layers;
pub mod model;
pub mod reference;
pub mod tensor;
pub mod training;

pub use error::{CoreError, Result};
pub use tensor::{Graph, NodeId, ParameterStore, Tensor};
