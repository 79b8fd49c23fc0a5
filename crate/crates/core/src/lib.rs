//! Impartial peer selection.
//!
//! Agents review each other and a mechanism picks `k` winners. The centerpiece
//! is exact dollar partition: agents are split into clusters, each reviewer
//! only scores agents outside its own cluster, clusters receive fractional
//! quotas from the normalized reviews, and a randomized apportionment lottery
//! turns those quotas into integer seats while keeping every expected seat
//! count exact. No agent can change its own selection probability.
//!
//! Algorithms are generic over [`Scalar`]. The exact instantiation uses big
//! rationals; `f64`/`f32` are available when speed matters more than
//! exactness.

pub mod apportionment;
pub mod error;
pub mod experiments;
pub mod generation;
pub mod io;
pub mod mechanisms;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod seed;

pub use apportionment::{
    allocation_from_shares, allocation_from_shares_traced, enumerate_nice_allocations,
    expected_allocation, sample_allocation, ENUMERATION_LIMIT,
};
pub use error::{Error, Result};
pub use mechanisms::{
    credible_subset, dollar_partition_raffle, dollar_raffle, edp_selection_probabilities,
    exact_dollar_partition, partition_mechanism, run_mechanism, top_dollar, vanilla, MechanismId,
};
pub use model::{
    validate_instance, AgentId, AllocationDistribution, Clustering, NiceAllocation,
    ReviewAssignment, ReviewProfile, SelectionOutcome, ShareVector, ValidationMode,
};
pub use scalar::Scalar;
pub use seed::Seed;

/// Exact rational scalar used by default.
pub type Rational = num_rational::BigRational;

pub type ExactProfile = ReviewProfile<Rational>;
pub type ExactShares = ShareVector<Rational>;
pub type ExactDistribution = AllocationDistribution<Rational>;
pub type ExactOutcome = SelectionOutcome<Rational>;

pub type FloatProfile = ReviewProfile<f64>;
pub type FloatShares = ShareVector<f64>;
pub type FloatDistribution = AllocationDistribution<f64>;
pub type FloatOutcome = SelectionOutcome<f64>;
