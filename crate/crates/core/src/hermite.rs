//! Probabilists' Hermite polynomials, Gauss–Hermite quadrature, the chaos
//! expansion of the rescaled density difference Θ_t, and the spectral
//! inverse of the Ornstein–Uhlenbeck operator.
//!
//! Conventions: H_{m+1}(x) = x·H_m(x) − m·H_{m−1}(x), so that
//! ∫ H_α H_β dγ = α!·[α = β] under the standard Gaussian γ. The chaos
//! coefficients of Θ_t are c_α = t^{(1−|α|)/2}·(E X^α − E Y^α)/α! for
//! |α| ≥ 1 and c_0 = 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::tridiag_eigen_first_components;
use crate::measures::DiscreteMeasure;
use crate::multi_index::{indices_up_to, MultiIndex};
use crate::Scalar;

/// Evaluate the univariate probabilists' Hermite polynomial H_m at x.
pub fn hermite_1d<S: Scalar>(m: u32, x: S) -> S {
    let mut prev = S::one();
    if m == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..m {
        let next = x * cur - S::from_usize_c(k as usize) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Product Hermite polynomial H_α(x) = Π H_{αᵢ}(xᵢ).
pub fn hermite_eval<S: Scalar>(alpha: &MultiIndex, x: &[S]) -> Result<S> {
    alpha.check_dim(x.len())?;
    let mut acc = S::one();
    for (&a, &xi) in alpha.0.iter().zip(x) {
        acc = acc * hermite_1d(a, xi);
    }
    Ok(acc)
}

/// A quadrature rule for the standard Gaussian weight on R.
#[derive(Debug, Clone)]
pub struct QuadratureRule<S> {
    pub nodes: Vec<S>,
    pub weights: Vec<S>,
    pub order: usize,
}

impl<S: Scalar> QuadratureRule<S> {
    pub fn integrate(&self, f: impl Fn(S) -> S) -> S {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// m-node Gauss–Hermite rule for the standard Gaussian weight, exact on
/// polynomials of degree ≤ 2m−1. Nodes and weights from the symmetric
/// tridiagonal Jacobi matrix (Golub–Welsch); off-diagonal entries are √k
/// in the probabilists' normalization.
pub fn gauss_hermite_rule<S: Scalar>(m: usize) -> Result<QuadratureRule<S>> {
    if m == 0 {
        return Err(Error::InvalidInput("quadrature order must be >= 1".into()));
    }
    let diag = vec![S::zero(); m];
    let offdiag: Vec<S> = (1..m).map(|k| S::from_usize_c(k).sqrt()).collect();
    let (nodes, firsts) = tridiag_eigen_first_components(&diag, &offdiag)?;
    let weights: Vec<S> = firsts.iter().map(|&z| z * z).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        order: m,
    })
}

/// Sparse coefficients of a function in the Hermite basis, truncated at
/// total degree `max_degree`: f = Σ c_α H_α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct ChaosExpansion<S> {
    pub dim: usize,
    pub max_degree: u32,
    pub coeffs: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> ChaosExpansion<S> {
    pub fn zero(dim: usize, max_degree: u32) -> Self {
        ChaosExpansion {
            dim,
            max_degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> S {
        self.coeffs.get(alpha).copied().unwrap_or_else(S::zero)
    }

    pub fn set(&mut self, alpha: MultiIndex, c: S) {
        if c != S::zero() {
            self.coeffs.insert(alpha, c);
        }
    }

    /// Pointwise evaluation Σ c_α H_α(x).
    pub fn eval(&self, x: &[S]) -> Result<S> {
        let mut acc = S::zero();
        for (alpha, &c) in &self.coeffs {
            acc += c * hermite_eval(alpha, x)?;
        }
        Ok(acc)
    }

    /// L²(γ) norm² restricted to the degree-m slice: Σ_{|α|=m} α!·c_α².
    pub fn slice_l2(&self, m: u32) -> S {
        self.coeffs
            .iter()
            .filter(|(a, _)| a.degree() == m)
            .map(|(a, &c)| S::from_f64c(a.factorial()) * c * c)
            .sum()
    }

    /// Smallest degree with a nonzero coefficient, ignoring degree 0.
    pub fn min_positive_degree(&self) -> Option<u32> {
        self.coeffs
            .keys()
            .map(|a| a.degree())
            .filter(|&d| d > 0)
            .min()
    }
}

/// Exact chaos expansion of Θ_t truncated at total degree `max_degree`.
///
/// For measures matching through order n, every coefficient below degree
/// n+1 vanishes up to rounding, and the degree-(n+1) slice carries the
/// leading asymptotics.
pub fn chaos_coefficients<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    t: S,
    max_degree: u32,
) -> Result<ChaosExpansion<S>> {
    if mu.dim != nu.dim {
        return Err(Error::DimensionMismatch {
            expected: mu.dim,
            got: nu.dim,
        });
    }
    if !(t > S::zero()) {
        return Err(Error::InvalidInput("bandwidth t must be positive".into()));
    }
    if max_degree < 1 {
        return Err(Error::InvalidInput("max_degree must be >= 1".into()));
    }
    let mut out = ChaosExpansion::zero(mu.dim, max_degree);
    for alpha in indices_up_to(mu.dim, max_degree) {
        let deg = alpha.degree();
        if deg == 0 {
            continue;
        }
        let dm = mu.moment(&alpha)? - nu.moment(&alpha)?;
        if dm == S::zero() {
            continue;
        }
        let tpow = t.powf(S::from_f64c((1.0 - deg as f64) / 2.0));
        out.set(alpha.clone(), tpow * dm / S::from_f64c(alpha.factorial()));
    }
    Ok(out)
}

/// Total tensor-grid budget for [`project_numeric`].
pub const TENSOR_NODE_BUDGET: usize = 1_000_000;

/// Numerical chaos projection of a black-box function via tensor-product
/// Gauss–Hermite quadrature: c_α = (1/α!) ∫ f·H_α dγ.
///
/// Exact when f is polynomial and 2m−1 covers deg(f·H_α); otherwise
/// approximate. Cross-checks the closed form in [`chaos_coefficients`].
pub fn project_numeric<S: Scalar>(
    f: impl Fn(&[S]) -> S,
    dim: usize,
    max_degree: u32,
    m: usize,
) -> Result<ChaosExpansion<S>> {
    let total = m
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::Budget("tensor grid size overflow".into()))?;
    if total > TENSOR_NODE_BUDGET {
        return Err(Error::Budget(format!(
            "tensor grid needs {total} nodes, budget is {TENSOR_NODE_BUDGET}"
        )));
    }
    let rule = gauss_hermite_rule::<S>(m)?;
    let mut out = ChaosExpansion::zero(dim, max_degree);
    let indices = indices_up_to(dim, max_degree);
    let mut sums = vec![S::zero(); indices.len()];

    // Walk the tensor grid once, accumulating all projections.
    let mut counter = vec![0usize; dim];
    let mut x = vec![S::zero(); dim];
    loop {
        let mut w = S::one();
        for (i, &c) in counter.iter().enumerate() {
            x[i] = rule.nodes[c];
            w = w * rule.weights[c];
        }
        let fx = f(&x);
        if fx != S::zero() {
            for (k, alpha) in indices.iter().enumerate() {
                sums[k] += w * fx * hermite_eval(alpha, &x)?;
            }
        }
        // Increment mixed-radix counter.
        let mut pos = 0;
        loop {
            if pos == dim {
                break;
            }
            counter[pos] += 1;
            if counter[pos] < m {
                break;
            }
            counter[pos] = 0;
            pos += 1;
        }
        if pos == dim {
            break;
        }
    }
    for (k, alpha) in indices.into_iter().enumerate() {
        let fac = S::from_f64c(alpha.factorial());
        out.set(alpha, sums[k] / fac);
    }
    Ok(out)
}

/// Tolerance on the degree-0 coefficient accepted by the OU inverse.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

/// Spectral inverse of the Ornstein–Uhlenbeck operator on the truncated
/// chaos: w_α = −c_α/|α| for |α| ≥ 1, rejecting inputs with a nonzero
/// mean (degree-0 coefficient).
pub fn ou_inverse<S: Scalar>(theta: &ChaosExpansion<S>) -> Result<ChaosExpansion<S>> {
    let mean = theta.coeff(&MultiIndex::zeros(theta.dim));
    if mean.abs() > S::from_f64c(MEAN_ZERO_TOL) {
        return Err(Error::InvalidInput(format!(
            "ou_inverse needs zero mean, degree-0 coefficient is {mean}"
        )));
    }
    let mut out = ChaosExpansion::zero(theta.dim, theta.max_degree);
    for (alpha, &c) in &theta.coeffs {
        let deg = alpha.degree();
        if deg == 0 {
            continue;
        }
        out.set(alpha.clone(), -c / S::from_usize_c(deg as usize));
    }
    Ok(out)
}

/// Forward spectral action of L on the truncated chaos: (Lf)_α = −|α|·c_α.
pub fn ou_forward<S: Scalar>(f: &ChaosExpansion<S>) -> ChaosExpansion<S> {
    let mut out = ChaosExpansion::zero(f.dim, f.max_degree);
    for (alpha, &c) in &f.coeffs {
        let deg = alpha.degree();
        if deg == 0 {
            continue;
        }
        out.set(alpha.clone(), -c * S::from_usize_c(deg as usize));
    }
    out
}

/// The Moser coupling energy −∫ w L w dγ = Σ_α (α!/|α|)·c_α² where
/// L w = θ. Rejects nonzero-mean input.
pub fn dirichlet_energy<S: Scalar>(theta: &ChaosExpansion<S>) -> Result<S> {
    let mean = theta.coeff(&MultiIndex::zeros(theta.dim));
    if mean.abs() > S::from_f64c(MEAN_ZERO_TOL) {
        return Err(Error::InvalidInput(format!(
            "dirichlet_energy needs zero mean, degree-0 coefficient is {mean}"
        )));
    }
    let mut acc = S::zero();
    for (alpha, &c) in &theta.coeffs {
        let deg = alpha.degree();
        if deg == 0 {
            continue;
        }
        acc += S::from_f64c(alpha.factorial()) / S::from_usize_c(deg as usize) * c * c;
    }
    Ok(acc)
}

/// ∫ |θ|² dγ = Σ_α α!·c_α² by Hermite orthogonality.
pub fn theta_l2<S: Scalar>(theta: &ChaosExpansion<S>) -> S {
    theta
        .coeffs
        .iter()
        .map(|(alpha, &c)| S::from_f64c(alpha.factorial()) * c * c)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_pairs::pair_a;

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn hermite_eval_examples() {
        assert_eq!(hermite_eval(&idx(&[0]), &[3.7f64]).unwrap(), 1.0);
        assert_eq!(hermite_eval(&idx(&[2]), &[0.0f64]).unwrap(), -1.0);
        // H_3(x) = x^3 - 3x at x=2 -> 2 (independent symbolic expansion)
        assert_eq!(hermite_eval(&idx(&[3]), &[2.0f64]).unwrap(), 2.0);
        assert!(hermite_eval(&idx(&[1, 2]), &[1.0f64]).is_err());
    }

    /// Symbolic oracle: expand H_m by the recurrence on coefficient vectors
    /// and evaluate via Horner; must agree with the direct evaluation.
    #[test]
    fn hermite_matches_symbolic_expansion() {
        let coeffs_of = |m: usize| -> Vec<f64> {
            let mut prev = vec![1.0];
            if m == 0 {
                return prev;
            }
            let mut cur = vec![0.0, 1.0];
            for k in 1..m {
                let mut next = vec![0.0; k + 2];
                for (i, &c) in cur.iter().enumerate() {
                    next[i + 1] += c;
                }
                for (i, &c) in prev.iter().enumerate() {
                    next[i] -= k as f64 * c;
                }
                prev = cur;
                cur = next;
            }
            cur
        };
        for m in 0..10u32 {
            let poly = coeffs_of(m as usize);
            for &x in &[-2.5, -1.0, 0.0, 0.3, 2.0] {
                let horner = poly.iter().rev().fold(0.0, |acc, &c| acc * x + c);
                assert!(
                    (hermite_1d(m, x) - horner).abs() < 1e-9,
                    "m={m}, x={x}"
                );
            }
        }
    }

    #[test]
    fn gauss_hermite_examples() {
        let r1 = gauss_hermite_rule::<f64>(1).unwrap();
        assert!((r1.nodes[0]).abs() < 1e-14);
        assert!((r1.weights[0] - 1.0).abs() < 1e-14);

        let r2 = gauss_hermite_rule::<f64>(2).unwrap();
        assert!((r2.nodes[0] + 1.0).abs() < 1e-12);
        assert!((r2.nodes[1] - 1.0).abs() < 1e-12);
        assert!((r2.weights[0] - 0.5).abs() < 1e-12);
        // exactness on x^0..x^3
        for k in 0..=3u32 {
            let got = r2.integrate(|x| x.powi(k as i32));
            let want = match k {
                0 => 1.0,
                2 => 1.0,
                _ => 0.0,
            };
            assert!((got - want).abs() < 1e-12, "k={k}");
        }

        for m in [3usize, 5, 10, 20] {
            let r = gauss_hermite_rule::<f64>(m).unwrap();
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!((r.integrate(|x| x * x) - 1.0).abs() < 1e-10);
        }
    }

    /// Gaussian moment oracle: ∫x^{2k} dγ = (2k−1)!!, exact for k ≤ m−1/2.
    #[test]
    fn gauss_hermite_exactness_up_to_2m_minus_1() {
        for m in 2..=12usize {
            let r = gauss_hermite_rule::<f64>(m).unwrap();
            let mut dfact = 1.0;
            for k in 0..=(2 * m - 1) as u32 {
                let want = if k % 2 == 1 {
                    0.0
                } else {
                    if k > 0 {
                        dfact *= (k - 1) as f64;
                    }
                    dfact
                };
                let got = r.integrate(|x| x.powi(k as i32));
                // For odd k the nonzero node terms cancel exactly in real
                // arithmetic; measure the roundoff against their size.
                let term_size = r.integrate(|x| x.abs().powi(k as i32));
                let scale = 1.0f64.max(term_size);
                assert!((got - want).abs() / scale < 1e-12, "m={m}, k={k}");
            }
        }
    }

    #[test]
    fn chaos_coefficients_pair_a() {
        let (mu, nu) = pair_a::<f64>();
        let exp = chaos_coefficients(&mu, &nu, 100.0, 4).unwrap();
        assert!((exp.coeff(&idx(&[2])) - 0.05).abs() < 1e-15);
        assert_eq!(exp.coeff(&idx(&[1])), 0.0);
        assert_eq!(exp.coeff(&idx(&[3])), 0.0);
        assert!((exp.coeff(&idx(&[4])) - 1.0 / 24000.0).abs() < 1e-16);
    }

    #[test]
    fn chaos_coefficients_identical_and_dirac() {
        let (mu, _) = pair_a::<f64>();
        let exp = chaos_coefficients(&mu, &mu, 17.0, 5).unwrap();
        assert!(exp.coeffs.is_empty());

        let d0 = DiscreteMeasure::dirac(vec![0.0f64]);
        let d1 = DiscreteMeasure::dirac(vec![1.0f64]);
        let exp = chaos_coefficients(&d0, &d1, 1.0, 1).unwrap();
        assert_eq!(exp.coeff(&idx(&[1])), -1.0);
    }

    #[test]
    fn project_numeric_basis_functions() {
        let p = project_numeric(|x: &[f64]| hermite_1d(2, x[0]), 1, 3, 4).unwrap();
        assert!((p.coeff(&idx(&[2])) - 1.0).abs() < 1e-10);
        for alpha in [idx(&[0]), idx(&[1]), idx(&[3])] {
            assert!(p.coeff(&alpha).abs() < 1e-10);
        }

        let p = project_numeric(|_: &[f64]| 1.0, 1, 2, 3).unwrap();
        assert!((p.coeff(&idx(&[0])) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn project_numeric_budget() {
        assert!(matches!(
            project_numeric(|_: &[f64]| 1.0, 4, 1, 100),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn ou_inverse_examples() {
        let mut theta = ChaosExpansion::zero(1, 3);
        theta.set(idx(&[2]), 0.05f64);
        let w = ou_inverse(&theta).unwrap();
        assert_eq!(w.coeff(&idx(&[2])), -0.025);

        let zero = ChaosExpansion::<f64>::zero(1, 3);
        assert!(ou_inverse(&zero).unwrap().coeffs.is_empty());

        let mut theta = ChaosExpansion::zero(1, 3);
        theta.set(idx(&[1]), 1.0f64);
        theta.set(idx(&[3]), 3.0);
        let w = ou_inverse(&theta).unwrap();
        assert_eq!(w.coeff(&idx(&[1])), -1.0);
        assert_eq!(w.coeff(&idx(&[3])), -1.0);
    }

    #[test]
    fn ou_inverse_rejects_nonzero_mean() {
        let mut theta = ChaosExpansion::zero(1, 2);
        theta.set(idx(&[0]), 1e-6f64);
        assert!(ou_inverse(&theta).is_err());
    }

    #[test]
    fn ou_roundtrip_identity() {
        let (mu, nu) = pair_a::<f64>();
        let theta = chaos_coefficients(&mu, &nu, 50.0, 6).unwrap();
        let w = ou_inverse(&theta).unwrap();
        let back = ou_forward(&w);
        assert_eq!(back, theta);
    }

    #[test]
    fn dirichlet_energy_examples() {
        let (mu, nu) = pair_a::<f64>();
        let theta = chaos_coefficients(&mu, &nu, 100.0, 6).unwrap();
        let e = dirichlet_energy(&theta).unwrap();
        // hand summation: 0.0025 + 6*(1/24000)^2 + 120*(1e-5/720)^2
        let want = 0.0025 + 6.0 / (24000.0f64 * 24000.0) + 120.0 * (1e-5 / 720.0f64).powi(2);
        assert!((e - want).abs() < 1e-12);

        let zero = ChaosExpansion::<f64>::zero(1, 3);
        assert_eq!(dirichlet_energy(&zero).unwrap(), 0.0);

        let mut single = ChaosExpansion::zero(1, 2);
        single.set(idx(&[2]), 1.0f64);
        assert_eq!(dirichlet_energy(&single).unwrap(), 1.0);
    }

    #[test]
    fn theta_l2_examples() {
        let (mu, nu) = pair_a::<f64>();
        let theta = chaos_coefficients(&mu, &nu, 100.0, 6).unwrap();
        let v = theta_l2(&theta);
        let want = 0.005 + 24.0 / (24000.0f64 * 24000.0) + 720.0 * (1e-5 / 720.0f64).powi(2);
        assert!((v - want).abs() < 1e-12);

        assert_eq!(theta_l2(&ChaosExpansion::<f64>::zero(1, 3)), 0.0);

        let mut single = ChaosExpansion::zero(1, 1);
        single.set(idx(&[1]), 2.0f64);
        assert_eq!(theta_l2(&single), 4.0);
    }

    /// Orthogonality: quadrature of H_α·H_β against γ equals α!·[α=β]
    /// for all |α|,|β| ≤ 5 in d ≤ 2.
    #[test]
    fn hermite_orthogonality() {
        for dim in 1..=2usize {
            let rule = gauss_hermite_rule::<f64>(8).unwrap();
            let indices = indices_up_to(dim, 5);
            for a in &indices {
                for b in &indices {
                    let mut total = 0.0;
                    let mut counter = vec![0usize; dim];
                    loop {
                        let x: Vec<f64> = counter.iter().map(|&c| rule.nodes[c]).collect();
                        let w: f64 = counter.iter().map(|&c| rule.weights[c]).product();
                        total += w
                            * hermite_eval(a, &x).unwrap()
                            * hermite_eval(b, &x).unwrap();
                        let mut pos = 0;
                        while pos < dim {
                            counter[pos] += 1;
                            if counter[pos] < rule.order {
                                break;
                            }
                            counter[pos] = 0;
                            pos += 1;
                        }
                        if pos == dim {
                            break;
                        }
                    }
                    let want = if a == b { a.factorial() } else { 0.0 };
                    assert!((total - want).abs() < 1e-10, "a={a}, b={b}");
                }
            }
        }
    }

    /// Generating identity: Σ_{|α|≤K} y^α H_α(x)/α! ≈ exp(⟨x,y⟩ − |y|²/2).
    #[test]
    fn generating_function_identity() {
        let indices = indices_up_to(1, 16);
        for &y in &[-1.0f64, -0.5, 0.25, 1.0] {
            for &x in &[-2.0f64, -0.7, 0.0, 1.3, 2.0] {
                let series: f64 = indices
                    .iter()
                    .map(|a| {
                        a.monomial(&[y]).unwrap() / a.factorial()
                            * hermite_eval(a, &[x]).unwrap()
                    })
                    .sum();
                let eta = (x * y - 0.5 * y * y).exp();
                assert!((series - eta).abs() < 1e-6, "x={x}, y={y}");
            }
        }
    }
}
