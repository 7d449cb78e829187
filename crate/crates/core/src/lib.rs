//! Anchor trussness reinforcement: choose `b` edges whose support is treated
//! as unbounded so that the total trussness of the remaining edges grows as
//! much as possible.

pub mod error;
pub mod graph;
pub mod follower;
pub mod truss;
pub mod tree;
pub mod reuse;
pub mod select;

pub use error::{Error, Result};
pub use graph::{EdgeId, Graph, LoadOptions, VertexId};
pub use truss::{anchored_truss_decompose, truss_decompose, trussness_gain, AnchorState, TrussLabeling};
pub use reuse::{ExpiryRule, ReuseOptions};
pub use select::{select, SelectionResult, Strategy, StrategyConfig};
