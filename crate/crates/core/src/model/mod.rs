//! Ground-truth problem description, matchings and gap calculations.

mod gaps;
mod instance;
mod matching;
mod tournament;

pub use gaps::{compute_gaps, GapSummary, TIE_TOLERANCE};
pub use instance::{rank_order, InstanceKind, Rank1Instance, RewardDist};
pub use matching::{
    enumerate_perfect_matchings, expected_reward, optimal_matching, MatchMode, Matching,
    MAX_ENUMERATED_ITEMS,
};
pub use tournament::{round_robin_schedule, Round};
