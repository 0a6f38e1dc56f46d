//! Shape estimation of a polygon whose location is unknown, from distance
//! traces reported by mobile directional range sensors whose own positions
//! and headings are also unknown.
//!
//! The crate covers the whole chain:
//!
//! 1. [`geometry`] – polygons, angle arithmetic and ray casting.
//! 2. [`sim`] – random sensor lines, sampled traces and exact piecewise-linear
//!    reference traces.
//! 3. [`analysis`] – segmentation of traces into linear pieces and extraction
//!    of whole-edge, vertex and adjacency observations.
//! 4. [`prob`] – closed-form detection probabilities, including the
//!    blocking-corrected integral for edges next to concave vertices.
//! 5. [`cluster`] – 1-D Gaussian mixture clustering with BIC model selection.
//! 6. [`estimator`] – edge lengths, inner angles, multiplicities, vertex
//!    composition, edge order and the concave correction.
//! 7. [`assembly`] – turning classes and hypotheses into closed polygons.
//!
//! [`io`] and [`pipeline`] hold file formats and the command orchestration
//! used by the `rangeshape` binary.

pub mod analysis;
pub mod assembly;
pub mod cluster;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod io;
pub mod mc;
pub mod pipeline;
pub mod prob;
pub mod render;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
pub use geometry::{DirectedEdge, Point, PolygonTarget};
