//! Ground states of the fractional Schrödinger equation
//!
//! ```text
//! (−Δ)^{α/2} u + V(x) u = f(x,u) − Γ(x)|u|^{q−2} u
//! ```
//!
//! on a flat torus, computed pseudospectrally by minimizing the energy
//! functional on the Nehari manifold through the sphere reduction
//! m : S¹ → N, together with a certification suite that turns the
//! variational structure (norm equivalence, fiber uniqueness, translation
//! equivariance, coercivity identities) into runnable numeric checks.

pub mod config;
pub mod energy;
pub mod grid;
pub mod io;
pub mod model;
pub mod nehari;
pub mod pv;
pub mod solve;
pub mod spectral;
pub mod verify;

pub use grid::{Field, FracOrder, GridError, Point, TorusGrid};
pub use model::{GammaWeight, Nonlinearity, Potential, PotentialKind, Problem};
pub use nehari::{FiberProfile, NehariPoint};
pub use solve::{SolveReport, SolverConfig};
