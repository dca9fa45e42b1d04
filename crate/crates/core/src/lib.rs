//! Noisy density-matrix quantum circuit simulation and a small transpiler,
//! modeling three commercial NISQ platforms (superconducting and trapped-ion)
//! with hardware-matched composite gate noise.
//!
//! The crate is organized bottom-up:
//!
//! - [`qmath`]: dense complex linear algebra sized for <= 12-qubit density matrices
//! - [`gates`]: the gate catalog (logical set plus every vendor-native gate)
//! - [`circuit`]: circuit IR, depth metric, and the Grover/QFT/variational builders
//! - [`noise`]: Kraus channels, fidelities, and hardware-matched calibration
//! - [`hardware`]: backend registry (metrics, coupling graphs, native gate sets)
//! - [`transpiler`]: basis lowering and greedy SWAP routing
//! - [`engine`]: exact density-matrix simulation and result metrics
//! - [`vqc`]: variational circuit training with parameter-shift gradients
//!
//! Transpile Grover search onto a modeled device and simulate it under the
//! device's calibrated gate noise:
//!
//! ```
//! use nisqsim::{circuit, engine, hardware, noise, transpiler};
//!
//! let backend = hardware::builtin("ibmq_kolkata")?;
//! let logical = circuit::build_grover(3, "101")?;
//!
//! let report = transpiler::transpile_for_simulation(&logical, &backend, 7)?;
//! let (physical, positions) = transpiler::compact_for_simulation(&report)?;
//! assert!(report.depth_after > logical.depth());
//!
//! let model = noise::build_native_model(&backend)?;
//! let result = engine::simulate(&physical, Some(&model))?;
//!
//! // the marked outcome, at its routed positions
//! let mut target = vec![b'0'; physical.num_qubits()];
//! for (logical_bit, &pos) in "101".bytes().zip(&positions) {
//!     target[pos] = logical_bit;
//! }
//! let p = engine::success_probability(&result, &String::from_utf8(target)?)?;
//! assert!(p < circuit::grover_success_analytic(3, 2));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod circuit;
pub mod engine;
pub mod gates;
pub mod hardware;
pub mod noise;
pub mod qmath;
pub mod transpiler;
pub mod vqc;

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invariant violation in `{field}`: {msg}")]
    InvariantViolation { field: String, msg: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invariant(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::InvariantViolation {
            field: field.into(),
            msg: msg.into(),
        }
    }
}
