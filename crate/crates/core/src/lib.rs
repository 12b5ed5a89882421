//! Finite combinatorics around Hindman-type colorings: disjoint families of
//! finite sets and their finite unions, two-colorings (log-parity, seeded,
//! tabulated), exhaustive monochromatic-family search, Δ-systems in direct
//! sums of circle groups, reduced words in free groups, and Cantor-normal-form
//! ordinals.

pub mod check;
pub mod colorings;
pub mod groups;
pub mod ordinals;
pub mod search;
pub mod setcore;
pub mod words;

pub use check::CheckReport;
pub use colorings::{Color, ColoringError, ColoringSpec, OrdinalColoring, SetColoring};
pub use groups::{CircleValue, Component, DeltaSystem, GroupElem, GroupError, SumSubsystem};
pub use ordinals::{CnfOrdinal, OrdinalError};
pub use search::{SearchConfig, SearchError, SearchResult};
pub use setcore::{DisjointFamily, FinSet, SetError, Universe};
pub use words::{Letter, RootedFamily, Word, WordError};
