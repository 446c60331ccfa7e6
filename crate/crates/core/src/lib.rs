//! Rate regions and a block-Markov coding simulator for the two-user
//! multiple access channel with correlated state information and feedback.
//!
//! The states come in three independent parts: `S0` seen by both
//! transmitters and `S1`, `S2` seen by one each. Regions are evaluated per
//! scheme distribution ([`bounds`]), convexified over random draws
//! ([`region`]), and exercised operationally by [`sim`].

pub mod bounds;
pub mod channel;
pub mod error;
pub mod hull;
pub mod identities;
pub mod prob;
pub mod region;
pub mod sim;

pub use bounds::{bounds, BoundTriple, InformationTerms, RateBounds, Theorem};
pub use channel::{
    build_joint, validate, Cardinalities, Causality, ChannelKernel, CondPmf, DetMap, Feedback,
    KernelShape, SchemeDistribution, SchemeKind, StateModel,
};
pub use error::{Error, Result};
pub use identities::{check_reductions, ReductionReport};
pub use prob::{Alphabet, JointTable};
pub use region::{point_in_region, region_search, search_theorem, RegionCloud, SearchParams};
pub use sim::{run_simulation, CodeParams, SimReport};
