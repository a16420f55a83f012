//! Distances and divergences between Gaussian-smoothed discrete measures.
//!
//! Convolving two finitely supported probability measures with the same
//! isotropic Gaussian pulls them together; how fast depends only on the
//! first moment tensor where they disagree. If all moments match up to
//! order n and differ at order n + 1, then as the bandwidth t grows
//!
//! * t^n · W₂² tends to (1/(n+1)) Σ_{|α|=n+1} ΔM_α²/α!,
//! * t^{n+1} · χ² tends to Σ ΔM_α²/α!, and KL to half of that,
//! * t^{(n+1)/2} · TV tends to ½ E_γ |Σ (ΔM_α/α!) H_α|,
//!
//! where ΔM_α are the entries of the first mismatched moment tensor and
//! H_α the probabilists' Hermite polynomials. This crate computes those
//! closed-form constants ([`limits`]), evaluates the distances numerically
//! by independent solvers ([`divergences`]), expands the rescaled density
//! difference in Hermite chaos ([`hermite`]), and checks the predicted
//! decay rates empirically ([`harness`]).
//!
//! Everything is generic over the scalar type through the [`Scalar`]
//! trait (implemented for `f32` and `f64`); the [`Real`] alias fixes the
//! default working precision. The high-accuracy numerical solvers carry
//! out their internal arithmetic in `f64` regardless of the input scalar,
//! since their convergence tolerances are not reachable in single
//! precision.

pub mod divergences;
pub mod error;
pub mod harness;
pub mod hermite;
pub mod limits;
mod linalg;
pub mod measures;
pub mod multi_index;
pub mod quadrature;
pub mod smoothing;
mod scalar;
pub mod test_pairs;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default working precision.
pub type Real = f64;

/// Single-precision alias, for storage-constrained callers.
pub type Real32 = f32;

/// Measure type at the default precision.
pub type Measure = measures::DiscreteMeasure<Real>;
