//! Periodic Bernoulli kernels and the quadrature engines behind every
//! integral in the summation formulas.

mod bernoulli;
mod oscillatory;
mod quadrature;

pub use bernoulli::{
    bernoulli_poly, bernoulli_poly_with_limit, cis_turns, frac, integral_part, near_integer, psi,
    psi_fourier_partial, psi_kernel, BernoulliPoly, PsiKernel, DEFAULT_MAX_DEGREE, MAX_PSI_ORDER,
};
pub(crate) use bernoulli::i_power;
pub use oscillatory::{oscillatory_integrate, FourierIntegrals, Progression};
pub use quadrature::{
    adaptive_breaks, integrate, lattice_points, partition, try_integrate, try_integrate_partition,
    uniform_breaks, GaussLegendre, QuadratureResult, C64, MAX_PANELS, RULE_POINTS,
};
