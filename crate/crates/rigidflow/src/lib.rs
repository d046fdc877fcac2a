//! Simulation of a rigid body of arbitrary shape moving through an unbounded
//! viscous incompressible fluid, formulated in a frame attached to the body.
//!
//! In the body frame the fluid domain is time-independent; the price is a pair
//! of non-inertial terms in the momentum equation and Coriolis-type terms in
//! the body's force and torque balances. The crate provides:
//!
//! * [`geometry`] — body shapes, mass properties, the truncated computational
//!   box, and the voxel indicator of the body region;
//! * [`kinematics`] — the rigid state and an orthogonality-preserving
//!   integrator for the orientation tensor;
//! * [`fluid`] — staggered-grid spatial operators and the pressure projection;
//! * [`coupling`] — one full time step of the coupled system via a
//!   momentum-conserving rigid projection;
//! * [`diagnostics`] — energy ledger and audit, strain norms, the gradient /
//!   strain norm identity check, the smallness gauge, and decay fitting;
//! * [`gronwall`] — a standalone comparison-ODE certifier for generalized
//!   Gronwall inequalities `y' <= G + c1*y + c2*y^alpha`;
//! * [`config`], [`run`], [`plot`] — scenario files, run orchestration and
//!   artifact output, and plot emission. A thin `rigidflow` binary fronts
//!   these as `run`, `plot`, and `gronwall` subcommands.
//!
//! Each major capability has a runnable program under `examples/`.

pub mod config;
pub mod coupling;
pub mod diagnostics;
pub mod field;
pub mod fluid;
pub mod geometry;
pub mod gronwall;
pub mod kinematics;
pub mod plot;
pub mod run;

pub use config::SimConfig;
pub use coupling::{ForcingProgram, SimState};
pub use diagnostics::{DecayReport, EnergyLedger};
pub use fluid::{FluidParams, FluidState};
pub use geometry::{BodySpec, DomainMask, GridSpec, Shape};
pub use gronwall::{GronwallCertificate, GronwallProblem};
pub use kinematics::RigidState;
