//! The smoothed measure μ∗ρ_t as a Gaussian mixture: log-densities, 1D CDF
//! and quantile, the pointwise rescaled density difference Θ_t, and
//! seeded sampling.
//!
//! All density work happens in log space with max-shifted exponentiation;
//! bandwidths span [1, 10⁵] and atoms can sit far apart.

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::Scalar;

/// A discrete measure convolved with the isotropic Gaussian of covariance
/// t·I. The density is strictly positive everywhere and integrates to one.
#[derive(Debug, Clone)]
pub struct SmoothedMeasure<S> {
    pub base: DiscreteMeasure<S>,
    pub bandwidth: S,
}

impl<S: Scalar> SmoothedMeasure<S> {
    pub fn new(base: DiscreteMeasure<S>, bandwidth: S) -> Result<Self> {
        if !(bandwidth > S::zero()) {
            return Err(Error::InvalidInput("bandwidth t must be positive".into()));
        }
        Ok(SmoothedMeasure { base, bandwidth })
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    /// log Σᵢ wᵢ (2πt)^{−d/2} exp(−|x−xᵢ|²/2t), finite for every x.
    pub fn log_density(&self, x: &[S]) -> Result<S> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let t = self.bandwidth;
        let d = S::from_usize_c(self.dim());
        let norm = -d * S::half() * (S::ln_two_pi() + t.ln());
        // exponents of each component, before the shared normalization
        let mut best = S::neg_infinity();
        let mut exps = Vec::with_capacity(self.base.atoms.len());
        for a in &self.base.atoms {
            let mut q = S::zero();
            for (&xi, &ci) in x.iter().zip(&a.x) {
                let dxi = xi - ci;
                q += dxi * dxi;
            }
            let e = a.w.ln() - q / (S::two() * t);
            if e > best {
                best = e;
            }
            exps.push(e);
        }
        let mut acc = S::zero();
        for e in exps {
            acc += (e - best).exp();
        }
        Ok(norm + best + acc.ln())
    }

    /// Mixture CDF Σᵢ wᵢ Φ((x−xᵢ)/√t); dimension 1 only.
    pub fn cdf_1d(&self, x: S) -> Result<S> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            });
        }
        let sd = self.bandwidth.sqrt();
        let mut acc = S::zero();
        for a in &self.base.atoms {
            acc += a.w * ((x - a.x[0]) / sd).std_normal_cdf();
        }
        Ok(acc)
    }

    /// Inverse of [`cdf_1d`], by bracketing bisection with a final Newton
    /// polish; |cdf(result) − q| ≤ 1e−12 and deterministic.
    pub fn quantile_1d(&self, q: S) -> Result<S> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            });
        }
        if !(q > S::zero() && q < S::one()) {
            return Err(Error::InvalidInput(format!(
                "quantile level must lie in (0,1), got {q}"
            )));
        }
        let sd = self.bandwidth.sqrt();
        let twelve = S::from_f64c(12.0);
        let mut lo = self
            .base
            .atoms
            .iter()
            .map(|a| a.x[0])
            .fold(S::infinity(), S::min)
            - twelve * sd;
        let mut hi = self
            .base
            .atoms
            .iter()
            .map(|a| a.x[0])
            .fold(S::neg_infinity(), S::max)
            + twelve * sd;
        // Widen the bracket for extreme q; 12σ covers q down to ~1e-30.
        while self.cdf_1d(lo)? > q {
            lo = lo - twelve * sd;
        }
        while self.cdf_1d(hi)? < q {
            hi = hi + twelve * sd;
        }
        let mut mid = S::zero();
        for _ in 0..120 {
            mid = S::half() * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf_1d(mid)? < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Newton polish on F(x) - q with the mixture pdf as derivative.
        let mut x = mid;
        for _ in 0..4 {
            let f = self.cdf_1d(x)? - q;
            let pdf = self.log_density(&[x])?.exp();
            if pdf <= S::zero() {
                break;
            }
            let step = f / pdf;
            let next = x - step;
            if next.is_finite() && next >= lo - sd && next <= hi + sd {
                x = next;
            } else {
                break;
            }
        }
        Ok(x)
    }

    /// Draw `count` points: component chosen by weight, then Gaussian
    /// jitter with variance t. Deterministic given the seed.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<S>>
    where
        StandardNormal: Distribution<S>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = self.bandwidth.sqrt();
        let weights: Vec<f64> = self
            .base
            .atoms
            .iter()
            .map(|a| a.w.to_f64().unwrap())
            .collect();
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cdf.push(acc);
        }
        (0..count)
            .map(|_| {
                let u: f64 = rng.gen();
                let k = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
                self.base.atoms[k]
                    .x
                    .iter()
                    .map(|&c| {
                        let z: S = StandardNormal.sample(&mut rng);
                        c + sd * z
                    })
                    .collect()
            })
            .collect()
    }
}

/// η(x, y) = exp(⟨x,y⟩ − |y|²/2), evaluated directly.
pub fn eta<S: Scalar>(x: &[S], y: &[S]) -> S {
    let mut dot = S::zero();
    let mut n2 = S::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        dot += xi * yi;
        n2 += yi * yi;
    }
    (dot - S::half() * n2).exp()
}

/// Θ_t(x) = √t·(E η(x, X/√t) − E η(x, Y/√t)), the rescaled density
/// difference: (μ∗ρ_t − ν∗ρ_t)(z) = t^{−1/2}·Θ_t(z/√t)·ρ_t(z).
pub fn theta_pointwise<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    t: S,
    x: &[S],
) -> Result<S> {
    if mu.dim != nu.dim {
        return Err(Error::DimensionMismatch {
            expected: mu.dim,
            got: nu.dim,
        });
    }
    if x.len() != mu.dim {
        return Err(Error::DimensionMismatch {
            expected: mu.dim,
            got: x.len(),
        });
    }
    if !(t > S::zero()) {
        return Err(Error::InvalidInput("bandwidth t must be positive".into()));
    }
    let inv_sd = S::one() / t.sqrt();
    let expectation = |m: &DiscreteMeasure<S>| -> S {
        let mut acc = S::zero();
        for a in &m.atoms {
            let y: Vec<S> = a.x.iter().map(|&c| c * inv_sd).collect();
            acc += a.w * eta(x, &y);
        }
        acc
    };
    Ok(t.sqrt() * (expectation(mu) - expectation(nu)))
}
