pub mod curvature;
pub mod embedding;
pub mod flow;
pub mod metric;
pub mod region;
pub mod spacetime;

pub use curvature::scalar_curvature;
pub use embedding::{Embedding, IsometryMap};
pub use flow::{lie_derivative_metric, pullback_family, pullback_metric, Perturbation, VectorFieldX};
pub use metric::{volume_element, Metric, MetricFamily, Provenance};
pub use region::{causal_hull, causally_separated, is_causally_convex, CausalBound, Direction, Region};
pub use spacetime::{Spacetime, Theory};
