//! Explicit equiangular configurations: Gramians, negative-clique search,
//! pillar partitions and the numerical checks of the projection identities.

mod clique;
mod construct;
mod matrix;
mod pillar;
mod vectors;

pub use clique::{max_negative_clique, NegativeClique, MAX_CLIQUE_SEARCH};
pub use construct::{
    equal_angle_set, negative_clique_set, realize_gramian, random_config, synthetic_pillar_set, SyntheticConfig, SyntheticSet,
};
pub use matrix::{
    bordered_psd_bound, bordered_size_limit, gramian, psd_check, psd_check_with, structured_eigenvalues,
    Eigenpair, GramianMatrix, PsdReport,
};
pub use pillar::{pillar_partition, project_decompose, PillarPartition, Projection};
pub use vectors::VectorSet;

use thiserror::Error;

use crate::rational::{Rational, RationalError};

/// Default absolute tolerance for floating-point checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GramError {
    #[error("vector set is empty")]
    Empty,
    #[error("vector {index} has length {len}, expected {dim}")]
    DimensionMismatch { index: usize, len: usize, dim: usize },
    #[error("not equiangular at alpha = {alpha}: {} violating pair(s), first {:?}", .violations.len(), .violations.first())]
    NotEquiangular { alpha: Rational, violations: Vec<Violation> },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("gramian of rank above {dim} cannot be realized in dimension {dim} (eigenvalue {eigenvalue})")]
    RankTooLarge { dim: usize, eigenvalue: f64 },
    #[error("clique search limited to {max} vectors, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("indices {0:?} do not form a negative clique after the recorded sign flips")]
    InvalidBase(Vec<usize>),
    #[error("vector {index} has constant sign pattern against the base; the base is not maximal")]
    ConstantPattern { index: usize },
    #[error("vector {index} has unbalanced sign pattern against an extremal base")]
    UnbalancedPattern { index: usize },
    #[error("base vectors are linearly dependent (smallest Gram eigenvalue {0})")]
    DependentBase(f64),
    #[error("index {0} is out of range or part of the base")]
    BadIndex(usize),
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error("malformed vector file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An offending entry of a Gramian: `(i, j, observed inner product)`.
pub type Violation = (usize, usize, f64);
