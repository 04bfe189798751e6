//! The ℤ₄ parafermion code on a periodic kagome lattice of qubit pairs.
//!
//! The crate is organised bottom-up:
//!
//! * [`z4algebra`]: phased generalized Pauli words over ℤ₄ with ℤ₈ phases,
//!   the qubit-to-qudit conversion table, the parafermion transform, a dense
//!   matrix oracle and exact projector calculus.
//! * [`kagome`]: lattice geometry, stabilizer generators, defect lines,
//!   logical operators and code distances.
//! * [`noise`]: depolarizing and thermal (Metropolis) error processes.
//! * [`matching`]: exact minimum-weight perfect matching.
//! * [`decoder`]: syndromes, the plaquette move graph and two-round decoding.
//! * [`cliffsynth`]: ℤ₄ Clifford tableaux and gate synthesis.
//! * [`braidlab`]: logical gate matrices, fusion, monodromies and exchange phases.
//! * [`pertcheck`]: perturbative route census and the three-body gadget.

pub mod braidlab;
pub mod cliffsynth;
pub mod cyclo;
pub mod decoder;
pub mod kagome;
pub mod matching;
pub mod noise;
pub mod pertcheck;
pub mod z4algebra;

pub use decoder::{decode, extract_syndrome, logical_verdict, Decoder, SyndromeConfig};
pub use kagome::KagomeCode;
pub use noise::ErrorFrame;
pub use z4algebra::{commutation_exponent, multiply, PhasedPauli};

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("register length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("index {index} out of range for {len} qudits")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("register of {0} qudits is too large for a dense matrix")]
    RegisterTooLarge(usize),
    #[error("invalid lattice size {0}: L must be even and at least 4")]
    InvalidSize(usize),
    #[error("invalid defect line: {0}")]
    InvalidDefect(String),
    #[error("unknown logical operator {0:?}")]
    UnknownLogical(String),
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("odd node count {0} has no perfect matching")]
    OddNodeCount(usize),
    #[error("{0} nodes is too many for exhaustive matching")]
    TooManyNodes(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("nonempty residual syndrome ({0} charged generators)")]
    ResidualSyndrome(usize),
    #[error("decoding failed: {0}")]
    Decoding(String),
    #[error("invalid tableau: {0}")]
    InvalidTableau(String),
    #[error("projector calculus: {0}")]
    Projector(String),
}

pub type Result<T> = std::result::Result<T, Error>;
