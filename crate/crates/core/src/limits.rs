//! Closed-form limiting constants of the rescaled divergences, and the
//! Gaussian-surrogate W₂ with the Givens–Shortt closed form.
//!
//! With matching order n and moment gaps ΔM_α = E X^α − E Y^α over the
//! degree-(n+1) slice:
//!   c_chi2 = Σ ΔM_α²/α!        (limit of t^{n+1}·χ²)
//!   c_kl   = c_chi2 / 2        (limit of t^{n+1}·KL)
//!   c_w2   = c_chi2 / (n+1)    (limit of t^{n}·W₂²)
//!   c_tv   = ½ E_γ |Σ (ΔM_α/α!) H_α|   (limit of t^{(n+1)/2}·TV)

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{gauss_hermite_rule, hermite_eval};
use crate::linalg::{mat_mul, sym_sqrt};
use crate::measures::{matching_order, DiscreteMeasure, MatchingOrder};
use crate::multi_index::{indices_of_degree, MultiIndex};
use crate::Scalar;

/// Default Monte-Carlo sample count for the TV constant.
pub const DEFAULT_TV_SAMPLES: usize = 1_000_000;

/// Moment cap used when detecting the matching order.
pub const DEFAULT_ORDER_CAP: u32 = 10;

/// Limiting constants and rescaling exponents for one measure pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitConstants {
    /// Detected matching order n.
    pub n: u32,
    pub c_w2: f64,
    pub c_chi2: f64,
    pub c_kl: f64,
    pub c_tv: f64,
    pub c_tv_stderr: f64,
    /// Exponent of t multiplying W₂².
    pub rate_w2: f64,
    pub rate_chi2: f64,
    pub rate_kl: f64,
    pub rate_tv: f64,
}

/// Compute all limiting constants for (μ, ν).
///
/// Errors with [`Error::AllMatch`] if the measures are indistinguishable
/// up to the moment cap.
pub fn limit_constants<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    mc_samples: usize,
    seed: u64,
) -> Result<LimitConstants> {
    let n = match matching_order(mu, nu, DEFAULT_ORDER_CAP, 1e-9)? {
        MatchingOrder::Order(n) => n,
        MatchingOrder::AllMatch => return Err(Error::AllMatch),
    };

    // The n = 0 case degenerates to the mean difference before any α-loop.
    if n == 0 {
        let mm = mu.mean();
        let nm = nu.mean();
        let d2: f64 = mm
            .iter()
            .zip(&nm)
            .map(|(&a, &b)| {
                let d = (a - b).to_f64().unwrap();
                d * d
            })
            .sum();
        let (c_tv, c_tv_stderr) = tv_constant(mu, nu, 0, mc_samples, seed)?;
        return Ok(LimitConstants {
            n: 0,
            c_w2: d2,
            c_chi2: d2,
            c_kl: d2 / 2.0,
            c_tv,
            c_tv_stderr,
            rate_w2: 0.0,
            rate_chi2: 1.0,
            rate_kl: 1.0,
            rate_tv: 0.5,
        });
    }

    let mut c_chi2 = 0.0;
    for alpha in indices_of_degree(mu.dim, n + 1) {
        let dm = (mu.moment(&alpha)? - nu.moment(&alpha)?).to_f64().unwrap();
        c_chi2 += dm * dm / alpha.factorial();
    }
    let (c_tv, c_tv_stderr) = tv_constant(mu, nu, n, mc_samples, seed)?;
    Ok(LimitConstants {
        n,
        c_w2: c_chi2 / (n as f64 + 1.0),
        c_chi2,
        c_kl: c_chi2 / 2.0,
        c_tv,
        c_tv_stderr,
        rate_w2: n as f64,
        rate_chi2: n as f64 + 1.0,
        rate_kl: n as f64 + 1.0,
        rate_tv: (n as f64 + 1.0) / 2.0,
    })
}

/// Monte-Carlo estimate (with antithetic pairing) of the TV constant
/// ½ E_γ |Σ_{α∈[n+1]} (ΔM_α/α!) H_α|, plus its standard error.
pub fn tv_constant<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    n: u32,
    mc_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let terms: Vec<(MultiIndex, f64)> = indices_of_degree(mu.dim, n + 1)
        .into_iter()
        .map(|alpha| {
            let dm = (mu.moment(&alpha).unwrap() - nu.moment(&alpha).unwrap())
                .to_f64()
                .unwrap();
            let fac = alpha.factorial();
            (alpha, dm / fac)
        })
        .collect();
    let poly = |z: &[f64]| -> f64 {
        terms
            .iter()
            .map(|(alpha, c)| c * hermite_eval(alpha, z).unwrap())
            .sum()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (mc_samples / 2).max(1);
    let dim = mu.dim;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut z = vec![0.0f64; dim];
    let mut zneg = vec![0.0f64; dim];
    for _ in 0..pairs {
        for i in 0..dim {
            let u: f64 = rng.sample(rand_distr::StandardNormal);
            z[i] = u;
            zneg[i] = -u;
        }
        let v = 0.5 * (poly(&z).abs() + poly(&zneg).abs());
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / pairs as f64;
    let var = (sum_sq / pairs as f64 - mean * mean).max(0.0);
    let stderr = 0.5 * (var / pairs as f64).sqrt();
    Ok((0.5 * mean, stderr))
}

/// TV constant by quadrature between polynomial roots; dimension 1 only.
///
/// In 1D the degree-(n+1) slice is a multiple of the single Hermite
/// polynomial H_{n+1}, whose roots are the (n+1)-node Gauss–Hermite nodes;
/// integrate |p|·φ exactly-by-pieces between them.
pub fn tv_constant_quadrature<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    n: u32,
) -> Result<f64> {
    if mu.dim != 1 {
        return Err(Error::InvalidInput(
            "quadrature TV constant is 1D only".into(),
        ));
    }
    let alpha = MultiIndex::new(vec![n + 1]);
    let dm = (mu.moment(&alpha)? - nu.moment(&alpha)?).to_f64().unwrap();
    let c = dm / alpha.factorial();

    // Breakpoints: roots of H_{n+1} inside a window beyond which the
    // Gaussian tail is negligible.
    let mut brk: Vec<f64> = gauss_hermite_rule::<f64>((n + 1) as usize)?.nodes;
    let bound = 14.0;
    brk.retain(|&r| r.abs() < bound);
    let mut pts = vec![-bound];
    pts.extend(brk);
    pts.push(bound);

    // 40-node Gauss-Legendre per smooth piece.
    let (gl_x, gl_w) = gauss_legendre_40();
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut total = 0.0;
    for seg in pts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let hw = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in gl_x.iter().zip(gl_w) {
            let p = mid + hw * x;
            acc += w * (c * crate::hermite::hermite_1d((n + 1) as u32, p)).abs() * phi(p);
        }
        total += hw * acc;
    }
    Ok(0.5 * total)
}

/// Nodes and weights of 40-point Gauss–Legendre on [−1, 1], built once by
/// Newton iteration on Legendre polynomials.
fn gauss_legendre_40() -> (&'static [f64], &'static [f64]) {
    use std::sync::OnceLock;
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (x, w) = CACHE.get_or_init(|| crate::quadrature::gauss_legendre(40));
    (x, w)
}

/// W₂ between the Gaussian surrogates N(m_μ, Σ_μ + tI) and
/// N(m_ν, Σ_ν + tI), via the closed form
/// W₂² = |Δm|² + tr(Σ₁ + Σ₂ − 2(Σ₂^{1/2} Σ₁ Σ₂^{1/2})^{1/2}).
pub fn gaussian_w2<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    t: S,
) -> Result<S> {
    if mu.dim != nu.dim {
        return Err(Error::DimensionMismatch {
            expected: mu.dim,
            got: nu.dim,
        });
    }
    if t < S::zero() {
        return Err(Error::InvalidInput("t must be nonnegative".into()));
    }
    let d = mu.dim;
    let mut s1 = mu.covariance();
    let mut s2 = nu.covariance();
    for i in 0..d {
        s1[i * d + i] += t;
        s2[i * d + i] += t;
    }
    let mm = mu.mean();
    let nm = nu.mean();
    let mut md2 = S::zero();
    for (&a, &b) in mm.iter().zip(&nm) {
        md2 += (a - b) * (a - b);
    }
    let r2 = sym_sqrt(&s2, d)?;
    let inner = mat_mul(&r2, &mat_mul(&s1, &r2, d), d);
    let cross = sym_sqrt(&inner, d)?;
    let mut tr = S::zero();
    for i in 0..d {
        tr += s1[i * d + i] + s2[i * d + i] - S::two() * cross[i * d + i];
    }
    // The trace term is >= 0 analytically; clamp rounding.
    let w2sq = md2 + tr.max(S::zero());
    Ok(w2sq.max(S::zero()).sqrt())
}
