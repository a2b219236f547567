//! Numerical laboratory for norm-constrained variational problems.
//!
//! Functionals of the form `J(u) = k * int j(u, |grad u|) + hardy - int F(x, u) - D(u)`
//! are minimized on the constraint set `sum_k int G_k(u_k) = c` over
//! symmetry-reduced grids. Around the solver sit the surgeries used in
//! concentration-compactness arguments (rearrangement, plateau insertion,
//! far-field bumps) and diagnostics of the mass-energy curve `c -> m(c)`.

pub mod ccdiag;
pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod rearrange;
pub mod solve;

pub use error::{Error, Result};
