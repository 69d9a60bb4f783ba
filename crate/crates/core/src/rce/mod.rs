pub mod config;
pub mod cutoff;
pub mod evolution;
pub mod stress;
pub mod theorems;
pub mod variation;

pub use config::{RceConfig, RceSetup};
pub use cutoff::{cutoffs, smoothstep, Branch, CutoffPair};
pub use evolution::{beta_on_weyl, probe_data, rce_closed_form, rce_composed, rce_direct, t_extend, t_inverse, Relative, TInverse};
pub use stress::{stress_integrand, stress_pairing, stress_pairing_with, Pairing, StressForm};
pub use theorems::{compare_diffeo, diffeo_invariance_study, diffeo_invariance_test, divergence_test, gauge_fields, non_gauge_tensors, pulled_back_spacetime, DiffeoComparison};
pub use variation::{delta_f, delta_f_richardson, delta_k, delta_r_flat, DeltaF, DeltaFMode, DeltaK};
