pub mod kg;
pub mod propagate;
pub mod symplectic;
pub mod testfn;

pub use kg::apply_kg;
pub use propagate::{
    e_adv, e_causal, e_ret, evolve, restrict_to_data, restrict_values, solve_cauchy, CauchyData, Origin, SolutionField,
    TimeDirection,
};
pub use symplectic::{momentum, pair_volume, symplectic_surface, symplectic_volume};
pub use testfn::TestFunction;
