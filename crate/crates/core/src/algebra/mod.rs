pub mod bu;
pub mod checks;
pub mod morphism;
pub mod net;
pub mod space;
pub mod weyl;

pub use bu::{bu_field, bu_mul, bu_push_forward, bu_star, quasifree_eval_bu, BUElement, TwoPointFunction};
pub use checks::{check_causality, check_functor_law, check_identity, check_time_slice, time_slice, TimeSlice};
pub use morphism::{algebra_morphism, AlgebraMorphism};
pub use net::{check_covariance, check_isotony, check_net_commutativity, net_algebra, NetAlgebra};
pub use space::{SolutionId, SolutionSpace, TOL_MERGE};
pub use weyl::WeylElement;
