//! Eigenvalue asymptotics for unbounded self-adjoint band matrices.

pub mod asymptotics;
pub mod certificate;
pub mod conjugation;
pub mod enclosure;
pub mod error;
pub mod linalg;
pub mod model;
pub mod presets;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseSymmetricMatrix, EigenRange, SpectralSummary, SymmetricBandMatrix};
pub use model::{
    BandModel, CutoffFunction, EntrySequence, PowerLikeParams, SpecialFamilyKind, SpecialFamilyParams, TauPolicy,
};
