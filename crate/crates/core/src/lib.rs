//! Finite-round distributed coloring on flow graphs.
//!
//! Nodes of a flow graph pick colors at random, exchange a bounded number of
//! broadcast rounds, and then decide locally whether to re-draw their color.
//! The crate simulates that process, enumerates the 32 one-round decision
//! rules available on paths, computes exact defect distributions in closed
//! form, and checks every closed form against exhaustive enumeration.
//!
//! Numeric code is generic over [`Scalar`]; [`Exact`] (big rationals) is
//! used wherever equality has to be exact and `f64` where it does not.

pub mod analytics;
pub mod coloring;
pub mod error;
pub mod graph;
pub mod messaging;
pub mod montecarlo;
pub mod oracle;
pub mod protocols;
pub mod scalar;
pub mod symmetry;
pub mod verify;

pub use analytics::{BinomialForm, DefectDistribution, GroupCountVector};
pub use coloring::{Color, ColorState, ConflictState, DefectGroup, DefectGroupDecomposition};
pub use error::{Error, Result};
pub use graph::{FlowGraph, NodeType};
pub use messaging::{LocalTree, LocalView, RoundMessage};
pub use oracle::EnumerationBudget;
pub use protocols::{ChangeSet, Decision, ProtocolOutcome, ProtocolSpec};
pub use scalar::Scalar;
pub use symmetry::SymmetricPair;

/// Arbitrary-precision rational used for exact counts and probabilities.
pub type Exact = num_rational::BigRational;

/// Defect distribution with exact entries.
pub type ExactDistribution = DefectDistribution<Exact>;

/// Defect distribution evaluated in double precision.
pub type FloatDistribution = DefectDistribution<f64>;

/// Group-count vector with exact entries.
pub type ExactGroupCounts = GroupCountVector<Exact>;
