//! Numerical building blocks shared by the physics modules.

pub mod banded;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod spline;
pub mod tridiag;
