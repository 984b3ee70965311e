//! Von Neumann weak measurements with post-selection.
//!
//! A finite-dimensional system is coupled to Gaussian pointers on a periodic
//! grid, evolved exactly, post-selected through a second pointer and read out
//! either from exact grid moments or from seeded Monte Carlo records.
//!
//! The runnable examples are the main entry point:
//!
//! ```text
//! cargo run --example anomalous_weak_value        # closed-form A_w outside the spectrum
//! cargo run --example pointer_grid                # pointer moments, shifts, momentum grid
//! cargo run --example joint_evolution             # exact moments vs first-order values
//! cargo run --example separability                # Schmidt checks, correlation witness
//! cargo run --release --example postselection_monte_carlo
//! cargo run --release --example imaginary_weak_value
//! cargo run --example naive_device_state
//! cargo run --release --example scenario_sweep [scenario.json]
//! ```

pub mod cli;
pub mod entanglement;
pub mod error;
pub mod estimator;
pub mod pointer;
pub mod qmath;
pub mod vonneumann;
pub mod weakvalues;

pub use error::{Error, Result};
