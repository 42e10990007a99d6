//! Balanced-growth solver and verifier for an endogenous-growth model in which workers
//! spend part of their working hours on distracting activities that build human capital.
//!
//! * [`model`]: payoff, technology, Hamiltonian, first-order residuals, equations of motion
//! * [`bgp`]: closed-form balanced-growth rates, elasticities and utility
//! * [`foc`]: instantaneous controls from states and costates
//! * [`sim`]: balanced-path initial conditions, integration and verification
//! * [`cli`]: configuration parsing and the `dgrowth` commands
//!
//! The numerical core is generic over [`Real`] (`f32`, `f64`); the `*64` aliases below
//! name the double-precision instantiations used by the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bgp;
pub mod cli;
pub mod error;
pub mod foc;
pub mod gradcheck;
pub mod model;
pub mod ode;
pub mod roots;
pub mod scalar;
pub mod sim;

pub use bgp::{BgpRates, ParamValidation};
pub use error::{Error, Result};
pub use model::{CapitalState, Controls, Costates, ExtendedState, Params};
pub use scalar::Real;
pub use sim::{Trajectory, TrajectoryRecord, VerificationReport};

pub type Params64 = Params<f64>;
pub type Controls64 = Controls<f64>;
pub type ExtendedState64 = ExtendedState<f64>;
pub type BgpRates64 = BgpRates<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type TrajectoryRecord64 = TrajectoryRecord<f64>;
pub type VerificationReport64 = VerificationReport<f64>;

pub type Params32 = Params<f32>;
pub type BgpRates32 = BgpRates<f32>;
