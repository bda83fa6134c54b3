//! Density-25.3 superconcentrators built from fractional-degree random
//! expanders, together with the numerical machinery that backs them: entropy
//! bounds, expansion profiles, failure-probability bounds, exact
//! inclusion–exclusion probabilities and grid certification of the entropy
//! inequalities.

pub mod certifier;
pub mod entropy;
pub mod error;
pub mod probability;
pub mod profiles;
pub mod randgraph;
pub mod rng;
pub mod superconcentrator;

pub use error::{Error, Result};
pub use profiles::{PiecewiseLinear, ProfileConstants};
pub use randgraph::BipartiteGraph;
pub use superconcentrator::SuperDag;
