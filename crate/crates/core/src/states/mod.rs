//! Quasifree states on the flat cylinder and the Wick square.

pub mod hadamard;
pub mod modes;
pub mod state;

pub use hadamard::*;
pub use modes::*;
pub use state::*;
