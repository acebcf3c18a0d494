//! Dynamic-programming solver for hybrid weighted MaxSAT and its min/max
//! variants.
//!
//! Formulas mix clause, XOR, cardinality and pseudo-Boolean constraints, each
//! soft (weighted) or hard. A planner arranges the constraints into a
//! project-join tree; an executor then folds the tree bottom-up with algebraic
//! decision diagrams, eliminating variables as soon as the tree permits. The
//! same machinery answers MaxSAT, MinSAT, Min-MaxSAT and Max-MinSAT queries,
//! reconstructs optimal assignments or min-to-max strategies from the
//! elimination trace, and can prune diagram branches that a cost upper bound
//! proves irrelevant.

pub mod add;
pub mod types;
pub mod value;

pub use add::{Add, AddError, AddManager};
pub use types::{Assignment, Lit, Quant, Var};
pub use value::Value;
