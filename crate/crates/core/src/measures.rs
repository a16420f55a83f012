//! Finitely supported measures on R^d, moment tensors, the moment-matching
//! order, and a factory for moment-matched test pairs.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_with_null_vector;
use crate::multi_index::{indices_of_degree, indices_up_to, MultiIndex};
use crate::Scalar;

/// Weight-sum slack accepted at construction.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One weighted atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom<S> {
    /// Location in R^d.
    pub x: Vec<S>,
    /// Probability mass, strictly positive.
    pub w: S,
}

/// A finitely supported probability measure on R^d.
///
/// Weights are strictly positive and sum to one. Because the support is
/// finite, the sub-Gaussian tail condition holds automatically for every
/// rate; this is a property of the type, not a runtime check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct DiscreteMeasure<S> {
    pub dim: usize,
    pub atoms: Vec<Atom<S>>,
}

impl<S: Scalar> DiscreteMeasure<S> {
    pub fn new(dim: usize, atoms: Vec<(Vec<S>, S)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one atom".into()));
        }
        let mut sum = S::zero();
        for (x, w) in &atoms {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            if !(*w > S::zero()) {
                return Err(Error::InvalidInput("weights must be strictly positive".into()));
            }
            sum += *w;
        }
        if (sum - S::one()).abs() > S::from_f64c(WEIGHT_SUM_TOL) {
            return Err(Error::InvalidInput(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOL}"
            )));
        }
        Ok(DiscreteMeasure {
            dim,
            atoms: atoms.into_iter().map(|(x, w)| Atom { x, w }).collect(),
        })
    }

    /// Point mass at `x`.
    pub fn dirac(x: Vec<S>) -> Self {
        let dim = x.len();
        DiscreteMeasure {
            dim,
            atoms: vec![Atom { x, w: S::one() }],
        }
    }

    /// Normalize weights to sum exactly to one (used by `--renormalize`).
    pub fn renormalized(mut self) -> Self {
        let sum: S = self.atoms.iter().map(|a| a.w).sum();
        for a in &mut self.atoms {
            a.w = a.w / sum;
        }
        self
    }

    /// Sort atoms lexicographically by location, merging nothing.
    /// Canonical order for serialization round-trips.
    pub fn canonicalized(mut self) -> Self {
        self.atoms.sort_by(|a, b| {
            a.x.iter()
                .zip(&b.x)
                .map(|(u, v)| u.partial_cmp(v).unwrap())
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        self
    }

    /// E X^α = Σᵢ wᵢ xᵢ^α, exact (no sampling).
    pub fn moment(&self, alpha: &MultiIndex) -> Result<S> {
        alpha.check_dim(self.dim)?;
        let mut acc = S::zero();
        for a in &self.atoms {
            acc += a.w * alpha.monomial(&a.x)?;
        }
        Ok(acc)
    }

    pub fn mean(&self) -> Vec<S> {
        let mut m = vec![S::zero(); self.dim];
        for a in &self.atoms {
            for (mi, &xi) in m.iter_mut().zip(&a.x) {
                *mi += a.w * xi;
            }
        }
        m
    }

    /// Covariance matrix, row-major d×d.
    pub fn covariance(&self) -> Vec<S> {
        let m = self.mean();
        let d = self.dim;
        let mut c = vec![S::zero(); d * d];
        for a in &self.atoms {
            for i in 0..d {
                for j in 0..d {
                    c[i * d + j] += a.w * (a.x[i] - m[i]) * (a.x[j] - m[j]);
                }
            }
        }
        c
    }

    /// E |X|^2.
    pub fn second_moment_norm(&self) -> S {
        let mut acc = S::zero();
        for a in &self.atoms {
            let mut n2 = S::zero();
            for &xi in &a.x {
                n2 += xi * xi;
            }
            acc += a.w * n2;
        }
        acc
    }

    /// Shift every atom by `v`; weights unchanged.
    pub fn translate(&self, v: &[S]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(DiscreteMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    x: a.x.iter().zip(v).map(|(&xi, &vi)| xi + vi).collect(),
                    w: a.w,
                })
                .collect(),
        })
    }

    /// Recentered copy with mean zero.
    pub fn centered(&self) -> Self {
        let m = self.mean();
        let neg: Vec<S> = m.iter().map(|&v| -v).collect();
        self.translate(&neg).expect("dims match")
    }
}

/// Moment tensors E X^α for all |α| ≤ max_degree, keyed by multi-index in
/// graded lexicographic order (BTreeMap on the index vector keeps the
/// serialization stable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct MomentTable<S> {
    pub dim: usize,
    pub max_degree: u32,
    pub values: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> MomentTable<S> {
    pub fn get(&self, alpha: &MultiIndex) -> Option<S> {
        self.values.get(alpha).copied()
    }
}

/// Complete moment table up to degree `max_degree`.
pub fn moment_table<S: Scalar>(m: &DiscreteMeasure<S>, max_degree: u32) -> Result<MomentTable<S>> {
    let mut values = BTreeMap::new();
    for alpha in indices_up_to(m.dim, max_degree) {
        let v = m.moment(&alpha)?;
        values.insert(alpha, v);
    }
    Ok(MomentTable {
        dim: m.dim,
        max_degree,
        values,
    })
}

/// Result of the moment-matching detector: either the largest n with all
/// moment tensors matching through degree n (and a violation at n+1), or
/// the sentinel that everything matched through the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchingOrder {
    Order(u32),
    /// All moments up to the cap agree; no rate prediction is possible.
    AllMatch,
}

/// Largest n ≤ cap such that moments of μ and ν agree (relative tolerance,
/// scale 1 ∨ max magnitude) through degree n while some degree-(n+1) moment
/// differs. Returns `AllMatch` when they agree through every degree ≤ cap.
pub fn matching_order<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    cap: u32,
    tol: f64,
) -> Result<MatchingOrder> {
    if mu.dim != nu.dim {
        return Err(Error::DimensionMismatch {
            expected: mu.dim,
            got: nu.dim,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let tol = S::from_f64c(tol);
    for k in 1..=cap {
        for alpha in indices_of_degree(mu.dim, k) {
            let a = mu.moment(&alpha)?;
            let b = nu.moment(&alpha)?;
            let scale = S::one().max(a.abs().max(b.abs()));
            if (a - b).abs() > tol * scale {
                return Ok(MatchingOrder::Order(k - 1));
            }
        }
    }
    Ok(MatchingOrder::AllMatch)
}

/// Deterministic factory for a pair (μ, ν) with matching order exactly `n`.
///
/// Fixes two disjoint seeded node sets, solves the linear system making ν
/// reproduce μ's moments through degree n, then moves along the null
/// direction until some degree-(n+1) moment differs by at least 0.1 while
/// all weights stay positive. Rejected draws are retried with a derived
/// seed.
pub fn gen_matched_pair<S: Scalar>(
    n: u32,
    dim: usize,
    seed: u64,
) -> Result<(DiscreteMeasure<S>, DiscreteMeasure<S>)> {
    const MAX_RETRIES: usize = 200;
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    let constraints = indices_up_to(dim, n); // includes the mass constraint α = 0
    let m = constraints.len() + 1; // one null direction
    for attempt in 0..MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64 * 0x9e3779b9));
        if let Some(pair) = try_generate::<S>(n, dim, m, &constraints, &mut rng)? {
            // Certify by post-check before returning.
            if matching_order(&pair.0, &pair.1, n + 2, 1e-9)? == MatchingOrder::Order(n) {
                return Ok(pair);
            }
        }
    }
    Err(Error::GenerationFailed {
        retries: MAX_RETRIES,
    })
}

fn try_generate<S: Scalar>(
    n: u32,
    dim: usize,
    m: usize,
    constraints: &[MultiIndex],
    rng: &mut ChaCha8Rng,
) -> Result<Option<(DiscreteMeasure<S>, DiscreteMeasure<S>)>> {
    // Node locations uniform in [-2, 2]^d; kept away from each other so the
    // Vandermonde-type system is well conditioned.
    let draw_nodes = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..m)
            .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect()
    };
    let mu_nodes = draw_nodes(rng);
    let nu_nodes = draw_nodes(rng);

    // μ weights: random, normalized.
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mu_w: Vec<f64> = raw.iter().map(|w| w / s).collect();

    let mu = DiscreteMeasure::new(
        dim,
        mu_nodes
            .iter()
            .zip(&mu_w)
            .map(|(x, &w)| (x.iter().map(|&v| S::from_f64c(v)).collect(), S::from_f64c(w)))
            .collect(),
    )?;

    // Linear system: for each constraint α (|α| ≤ n), Σ_j w_j y_j^α = E X^α.
    let rows = constraints.len();
    let mut a = vec![0.0f64; rows * m];
    let mut b = vec![0.0f64; rows];
    for (r, alpha) in constraints.iter().enumerate() {
        for (j, y) in nu_nodes.iter().enumerate() {
            a[r * m + j] = alpha.monomial(&y[..]).expect("dims");
        }
        b[r] = mu.moment(alpha)?.to_f64().unwrap();
    }
    let (particular, null) = match solve_with_null_vector(&a, &b, rows, m) {
        Ok(x) => x,
        Err(_) => return Ok(None),
    };

    // Range of s keeping w = particular + s * null strictly positive.
    let mut s_lo = f64::NEG_INFINITY;
    let mut s_hi = f64::INFINITY;
    let margin = 1e-3;
    for j in 0..m {
        if null[j] > 0.0 {
            s_lo = s_lo.max((margin - particular[j]) / null[j]);
        } else if null[j] < 0.0 {
            s_hi = s_hi.min((margin - particular[j]) / null[j]);
        } else if particular[j] < margin {
            return Ok(None);
        }
    }
    if !(s_lo < s_hi) {
        return Ok(None);
    }

    // Degree-(n+1) moment gap is affine in s; pick the admissible endpoint
    // (shrunk toward the interior) with the larger gap.
    let next = indices_of_degree(dim, n + 1);
    let gap = |s: f64| -> f64 {
        next.iter()
            .map(|alpha| {
                let mu_m = mu.moment(alpha).unwrap().to_f64().unwrap();
                let nu_m: f64 = nu_nodes
                    .iter()
                    .enumerate()
                    .map(|(j, y)| (particular[j] + s * null[j]) * alpha.monomial(&y[..]).unwrap())
                    .sum();
                (mu_m - nu_m).abs()
            })
            .fold(0.0, f64::max)
    };
    let cand_lo = s_lo * 0.9 + s_hi * 0.1;
    let cand_hi = s_lo * 0.1 + s_hi * 0.9;
    let s_star = if gap(cand_lo) > gap(cand_hi) { cand_lo } else { cand_hi };
    if gap(s_star) < 0.1 {
        return Ok(None);
    }

    let mut nu_w: Vec<f64> = (0..m).map(|j| particular[j] + s_star * null[j]).collect();
    // Exact renormalization guards against elimination round-off in the
    // mass constraint.
    let tot: f64 = nu_w.iter().sum();
    for w in &mut nu_w {
        *w /= tot;
    }
    if nu_w.iter().any(|&w| w <= 0.0) {
        return Ok(None);
    }
    let nu = match DiscreteMeasure::new(
        dim,
        nu_nodes
            .iter()
            .zip(&nu_w)
            .map(|(x, &w)| {
                (
                    x.iter().map(|&v| S::from_f64c(v)).collect(),
                    S::from_f64c(w),
                )
            })
            .collect(),
    ) {
        Ok(nu) => nu,
        Err(_) => return Ok(None),
    };
    Ok(Some((mu, nu)))
}
