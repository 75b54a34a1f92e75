//! Shared numeric kernels: Gauss–Legendre quadrature, an adaptive RK45
//! integrator for the synthesis ODE, 1-D minimisation, and the half-integer
//! gamma values behind unit ball volumes.

pub mod gauss;
pub mod ode;
pub mod optim;
pub mod special;
