//! Canonical measure pairs used throughout tests and docs.

use crate::measures::DiscreteMeasure;
use crate::Scalar;

/// Pair A: ½δ₋₁ + ½δ₊₁ vs δ₀. Matching order 1 (means agree, variances 1 vs 0).
pub fn pair_a<S: Scalar>() -> (DiscreteMeasure<S>, DiscreteMeasure<S>) {
    let h = S::half();
    let mu = DiscreteMeasure::new(1, vec![(vec![-S::one()], h), (vec![S::one()], h)]).unwrap();
    let nu = DiscreteMeasure::dirac(vec![S::zero()]);
    (mu, nu)
}

/// Pair B: {−1: 2/3, 2: 1/3} vs {1: 2/3, −2: 1/3}. Matching order 2
/// (third moments 2 vs −2).
pub fn pair_b<S: Scalar>() -> (DiscreteMeasure<S>, DiscreteMeasure<S>) {
    let w1 = S::from_f64c(2.0 / 3.0);
    let w2 = S::from_f64c(1.0 / 3.0);
    let mu = DiscreteMeasure::new(1, vec![(vec![-S::one()], w1), (vec![S::two()], w2)]).unwrap();
    let nu = DiscreteMeasure::new(1, vec![(vec![S::one()], w1), (vec![-S::two()], w2)]).unwrap();
    (mu, nu)
}

/// Pair C: δ₀ vs δ₁, a pure translation. Matching order 0.
pub fn pair_c<S: Scalar>() -> (DiscreteMeasure<S>, DiscreteMeasure<S>) {
    (
        DiscreteMeasure::dirac(vec![S::zero()]),
        DiscreteMeasure::dirac(vec![S::one()]),
    )
}

/// 2D analogue of pair A: ½δ₍₋₁,₀₎ + ½δ₍₁,₀₎ vs δ₍₀,₀₎. Matching order 1.
pub fn pair_a_2d<S: Scalar>() -> (DiscreteMeasure<S>, DiscreteMeasure<S>) {
    let h = S::half();
    let mu = DiscreteMeasure::new(
        2,
        vec![
            (vec![-S::one(), S::zero()], h),
            (vec![S::one(), S::zero()], h),
        ],
    )
    .unwrap();
    let nu = DiscreteMeasure::dirac(vec![S::zero(), S::zero()]);
    (mu, nu)
}
