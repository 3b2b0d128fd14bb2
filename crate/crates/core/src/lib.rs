//! A simulated threshold secret-sharing multi-party computation engine
//! with a cost ledger, hosting secure implementations of standard
//! deviation (integer Newton-Raphson square root) and the chi-squared
//! statistic (restructured to one division per cell).
//!
//! The crate is organized bottom-up:
//!
//! * [`field`] — prime-field arithmetic and the signed centered-lift encoding.
//! * [`shamir`] — (t, n)-threshold polynomial sharing and Lagrange
//!   reconstruction.
//! * [`engine`] — the simulated party network, the dealer, the message
//!   queues and the [`engine::CostLedger`] that counts interactive
//!   operations and rounds.
//! * [`protocols`] — arithmetic over secret handles: free linear
//!   operations, one-round multiplication, ideal nonlinear gates,
//!   batched variants, fixed-point values.
//! * [`stats`] — the two secure statistical programs, in optimized
//!   (batched) and unoptimized (sequential / textbook-formula) variants.
//! * [`oracle`] — plaintext reference implementations the tests compare
//!   secure results against.
//!
//! Costs follow the secret-sharing model: linear operations are free,
//! one secret multiplication is one interactive operation, independent
//! gates batched together share a communication round.

pub mod engine;
pub mod error;
pub mod field;
pub mod oracle;
pub mod protocols;
pub mod shamir;
pub mod stats;

pub use engine::{CostProfile, Engine, EngineConfig, GateKind, LedgerReport};
pub use error::{Error, Result};
pub use field::{FieldElement, PrimeField};
pub use protocols::{FixedValue, SecretFixed, SecretInt};
