//! Analysis of costly constrained channels: labeled digraphs whose edges
//! carry nonnegative integer costs.
//!
//! * [`graph`]: the channel type, its text format and graph queries;
//! * [`structure`]: period, cost-period and coboundary decomposition;
//! * [`spectral`]: the cost-enumerator matrix `P(x)` and its Perron data;
//! * [`capacity`]: variable-length capacity and the capacity-cost curve;
//! * [`counting`]: exact follower counts, closed forms and asymptotics;
//! * [`synthesis`]: periodic subsequence graphs and constrained synthesis;
//! * [`cli`]: the `costcap` command line.

pub mod capacity;
pub mod cli;
pub mod counting;
pub mod error;
pub mod graph;
pub mod par;
pub mod poly;
pub mod spectral;
pub mod structure;
pub mod synthesis;

pub use error::{Error, Result};
pub use graph::{parse_graph, ChannelGraph, Edge};
