//! Implicit multistep integration for stiff ODE systems.
//!
//! The integrator uses backward differentiation formulas of orders one to
//! five in the modified-divided-difference (quasi-constant step) form, with
//! adaptive order and step selection, a finite-difference Jacobian that is
//! reused across steps, and scalar event detection on the dense output.
//!
//! ```
//! use pemfc_solver::{integrate, SolverSettings};
//!
//! let out = integrate(
//!     |_t, y: &[f64], dy: &mut [f64]| dy[0] = -y[0],
//!     &[1.0],
//!     (0.0, 1.0),
//!     &SolverSettings::default(),
//!     &[],
//! )
//! .unwrap();
//! assert!((out.y_final[0] - (-1.0f64).exp()).abs() < 1e-5);
//! ```

mod bdf;
mod dense;
mod error;
mod event;
mod settings;
pub mod verify;

pub use bdf::{integrate, integrate_fixed, Bdf, IntegrationOutput, StepStats, Termination};
pub use dense::DenseSegment;
pub use error::SolverError;
pub use event::{Direction, Event, EventRecord};
pub use settings::SolverSettings;

/// Largest supported BDF order.
pub const MAX_ORDER: usize = 5;
