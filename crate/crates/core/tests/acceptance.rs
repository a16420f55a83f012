//! Acceptance gate: every release-blocking criterion, one test each,
//! printing a single pass/fail line per criterion
//! (`cargo test --test acceptance -- --nocapture` shows them).

use std::time::Instant;

use smoothot::divergences::{
    f_divergence, moser_w2_upper_bound, sinkhorn_w2, w1_dual_lower_bound, wp_1d, FDivKind,
    FDivMethod, Method,
};
use smoothot::harness::{auto_eps, sweep, Metric};
use smoothot::hermite::{
    chaos_coefficients, gauss_hermite_rule, hermite_eval, ou_forward, ou_inverse,
    project_numeric,
};
use smoothot::limits::{gaussian_w2, limit_constants};
use smoothot::measures::DiscreteMeasure;
use smoothot::multi_index::indices_up_to;
use smoothot::smoothing::theta_pointwise;
use smoothot::test_pairs::{pair_a, pair_a_2d, pair_b};

fn report(id: u32, what: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:2}: {what} ({detail})");
    assert!(pass, "criterion {id} failed: {what} ({detail})");
}

fn within(observed: f64, expected: f64, rtol: f64) -> bool {
    (observed - expected).abs() <= rtol * expected.abs()
}

#[test]
fn criterion_01_w2_limit_pair_a() {
    let (mu, nu) = pair_a::<f64>();
    let start = Instant::now();
    let rep = sweep(&mu, &nu, Metric::W2sq, Method::Exact1d, 1e2, 1e4, 7, 0).unwrap();
    let elapsed = start.elapsed();
    let last = rep.rows.last().unwrap();
    let ok = within(last.rescaled_value, 0.25, 0.05) && elapsed.as_secs_f64() < 30.0;
    report(
        1,
        "pair A: t·W₂² → 0.25 within 5% at t=1e4, sweep < 30 s",
        ok,
        &format!(
            "rescaled {:.6}, sweep took {:.2?}",
            last.rescaled_value, elapsed
        ),
    );
}

#[test]
fn criterion_02_w2_limit_pair_b() {
    let (mu, nu) = pair_b::<f64>();
    let t = 1e4;
    let w2 = wp_1d(&mu, &nu, t, 2.0, 400).unwrap().value;
    let rescaled = t * t * w2 * w2;
    report(
        2,
        "pair B: t²·W₂² → 8/9 within 10% at t=1e4",
        within(rescaled, 8.0 / 9.0, 0.10),
        &format!("rescaled {rescaled:.6}"),
    );
}

#[test]
fn criterion_03_chi2_kl_limits_pair_a() {
    let (mu, nu) = pair_a::<f64>();
    let t = 1e4;
    let chi2 = f_divergence(&mu, &nu, t, FDivKind::Chi2, FDivMethod::Quadrature, 200_000, 0)
        .unwrap()
        .value;
    let kl = f_divergence(&mu, &nu, t, FDivKind::Kl, FDivMethod::Quadrature, 200_000, 0)
        .unwrap()
        .value;
    let ok = within(t * t * chi2, 0.5, 0.05) && within(t * t * kl, 0.25, 0.05);
    report(
        3,
        "pair A: t²·χ² → 0.5 and t²·KL → 0.25 within 5% at t=1e4",
        ok,
        &format!("t²χ² {:.6}, t²KL {:.6}", t * t * chi2, t * t * kl),
    );
}

#[test]
fn criterion_04_tv_limit_pair_a() {
    let (mu, nu) = pair_a::<f64>();
    let t = 1e4;
    let phi1 = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let tv = f_divergence(&mu, &nu, t, FDivKind::Tv, FDivMethod::Quadrature, 200_000, 0)
        .unwrap()
        .value;
    let lc = limit_constants(&mu, &nu, 1_000_000, 4).unwrap();
    let ok = within(t * tv, phi1, 0.02) && within(lc.c_tv, phi1, 0.005);
    report(
        4,
        "pair A: t·TV → φ(1) within 2%; Monte-Carlo c_tv within 0.5%",
        ok,
        &format!("t·TV {:.6}, c_tv {:.6}, φ(1) {phi1:.6}", t * tv, lc.c_tv),
    );
}

#[test]
fn criterion_05_decay_rates() {
    let mut detail = String::new();
    let mut ok = true;
    for (pair, n) in [(pair_a::<f64>(), 1.0), (pair_b::<f64>(), 2.0)] {
        let (mu, nu) = pair;
        let w2 = sweep(&mu, &nu, Metric::W2sq, Method::Exact1d, 1e2, 1e4, 7, 0).unwrap();
        ok &= (w2.fitted_exponent + n).abs() <= 0.05;
        let w1 = sweep(&mu, &nu, Metric::W1, Method::Exact1d, 1e2, 1e4, 7, 0).unwrap();
        // W₁ decays like t^{-n/2}, so W₁² decays like t^{-n}
        ok &= (2.0 * w1.fitted_exponent + n).abs() <= 0.1;
        detail.push_str(&format!(
            "n={n}: W₂² slope {:.4}, W₁² slope {:.4}; ",
            w2.fitted_exponent,
            2.0 * w1.fitted_exponent
        ));
    }
    report(
        5,
        "fitted W₂² exponent = −n ± 0.05 and W₁² exponent = −n ± 0.1 for n ∈ {1, 2}",
        ok,
        detail.trim_end_matches("; "),
    );
}

#[test]
fn criterion_06_moser_bound_tightness() {
    let (mu, nu) = pair_a::<f64>();
    let mut ok = true;
    let mut detail = String::new();
    for &t in &[1e3, 1e4] {
        let exact = wp_1d(&mu, &nu, t, 2.0, 400).unwrap().value;
        let bound = moser_w2_upper_bound(&mu, &nu, t, 6).unwrap().value;
        let ratio = bound / (exact * exact);
        ok &= (1.0..=1.05).contains(&ratio);
        detail.push_str(&format!("t={t}: ratio {ratio:.4}; "));
    }
    report(
        6,
        "pair A: moser bound / exact W₂² ∈ [1, 1.05] at t ≥ 1e3, K=6",
        ok,
        detail.trim_end_matches("; "),
    );
}

#[test]
fn criterion_07_dual_lower_bound() {
    let (mu, nu) = pair_a::<f64>();
    let mut ok = true;
    let mut detail = String::new();
    for &t in &[1e2, 1e3, 1e4] {
        let lb = w1_dual_lower_bound(&mu, &nu, t, 2000).unwrap().value;
        let w1 = wp_1d(&mu, &nu, t, 1.0, 400).unwrap().value;
        ok &= lb > 0.0 && lb <= w1 && t.sqrt() * lb > 1e-3;
        detail.push_str(&format!("t={t}: √t·lb {:.4}, W₁ gap ok; ", t.sqrt() * lb));
    }
    report(
        7,
        "pair A: 0 < dual bound ≤ W₁ and √t·bound bounded below over t ∈ {1e2,1e3,1e4}",
        ok,
        detail.trim_end_matches("; "),
    );
}

#[test]
fn criterion_08_gaussian_surrogate() {
    let (mu, nu) = pair_a::<f64>();
    let gap = |t: f64| {
        let w2 = wp_1d(&mu, &nu, t, 2.0, 400).unwrap().value;
        let g = gaussian_w2(&mu, &nu, t).unwrap();
        (t * (w2 - g).abs(), (w2 - g).abs() / w2)
    };
    let (e2, _) = gap(1e2);
    let (e4, rel4) = gap(1e4);
    let ok = e4 <= e2 && rel4 <= 1e-2;
    report(
        8,
        "pair A: t·|W₂ − gaussian_w2| non-increasing from t=1e2 to 1e4; 1% relative at 1e4",
        ok,
        &format!("t·gap: {e2:.3e} → {e4:.3e}, relative {rel4:.3e}"),
    );
}

#[test]
fn criterion_09_zeroth_order_translation() {
    let (base, _) = pair_a::<f64>();
    let mu = base.translate(&[3.0]).unwrap();
    let nu = DiscreteMeasure::dirac(vec![0.0]);
    let w1 = wp_1d(&mu, &nu, 1e4, 1.0, 400).unwrap().value;
    report(
        9,
        "(pair A shifted by 3, δ₀): W₁ → 3 within 1% at t=1e4",
        within(w1, 3.0, 0.01),
        &format!("W₁ {w1:.5}"),
    );
}

#[test]
fn criterion_10_chaos_machinery() {
    // Hermite orthogonality to 1e-10 for |α|, |β| ≤ 5 in d ≤ 2.
    let mut max_dev = 0.0f64;
    for dim in 1..=2usize {
        let rule = gauss_hermite_rule::<f64>(8).unwrap();
        let indices = indices_up_to(dim, 5);
        for a in &indices {
            for b in &indices {
                let mut total = 0.0;
                let mut stack = vec![(vec![], 1.0f64)];
                // tensor quadrature over `dim` axes
                while let Some((x, w)) = stack.pop() {
                    if x.len() == dim {
                        total += w
                            * hermite_eval(a, &x).unwrap()
                            * hermite_eval(b, &x).unwrap();
                        continue;
                    }
                    for (&n, &wn) in rule.nodes.iter().zip(&rule.weights) {
                        let mut nx = x.clone();
                        nx.push(n);
                        stack.push((nx, w * wn));
                    }
                }
                let want = if a == b { a.factorial() } else { 0.0 };
                max_dev = max_dev.max((total - want).abs());
            }
        }
    }
    let ortho_ok = max_dev < 1e-10;

    // Closed-form chaos coefficients against numerical projection.
    let (mu, nu) = pair_a::<f64>();
    let t = 100.0;
    let closed = chaos_coefficients(&mu, &nu, t, 6).unwrap();
    let numeric = project_numeric(
        |x: &[f64]| theta_pointwise(&mu, &nu, t, x).unwrap(),
        1,
        6,
        40,
    )
    .unwrap();
    let mut coeff_dev = 0.0f64;
    for alpha in indices_up_to(1, 6) {
        coeff_dev = coeff_dev.max((closed.coeff(&alpha) - numeric.coeff(&alpha)).abs());
    }
    let proj_ok = coeff_dev < 1e-8;

    // L ∘ L⁻¹ = identity exactly on the truncated expansion.
    let inv = ou_inverse(&closed).unwrap();
    let back = ou_forward(&inv);
    let mut inv_dev = 0.0f64;
    for alpha in indices_up_to(1, 6) {
        if alpha.degree() == 0 {
            continue;
        }
        inv_dev = inv_dev.max((back.coeff(&alpha) - closed.coeff(&alpha)).abs());
    }
    // identity up to one rounding of the divide-then-multiply round trip
    let coeff_scale = indices_up_to(1, 6)
        .iter()
        .map(|a| closed.coeff(a).abs())
        .fold(0.0f64, f64::max);
    let inv_ok = inv_dev <= f64::EPSILON * coeff_scale;

    report(
        10,
        "Hermite orthogonality 1e-10; chaos closed form vs projection 1e-8; L∘L⁻¹ exact",
        ortho_ok && proj_ok && inv_ok,
        &format!("ortho dev {max_dev:.2e}, proj dev {coeff_dev:.2e}, inverse dev {inv_dev:.1e} (≤ 1 ulp)"),
    );
}

#[test]
fn criterion_11_sinkhorn_2d() {
    let (mu, nu) = pair_a_2d::<f64>();
    let start = Instant::now();
    let mut detail = String::new();
    let mut last_rescaled = f64::NAN;
    // sweep up to t = 1e3 on a short geometric grid
    let grid = 96;
    for &t in &[1e2, 10f64.powf(2.5), 1e3] {
        let eps = auto_eps(&mu, &nu, t, grid);
        let w2 = sinkhorn_w2(&mu, &nu, t, grid, eps).unwrap().value;
        last_rescaled = t * w2 * w2;
        detail.push_str(&format!("t={t:.0}: t·W₂² {last_rescaled:.4}; "));
    }
    let elapsed = start.elapsed();
    let ok = within(last_rescaled, 0.25, 0.15) && elapsed.as_secs_f64() < 300.0;
    report(
        11,
        "2D pair: Sinkhorn t·W₂² → 0.25 within 15% at t=1e3, < 5 min",
        ok,
        &format!("{}took {:.2?}", detail, elapsed),
    );
}

#[test]
fn criterion_12_cross_divergence_sanity() {
    let mut ok = true;
    let mut worst = String::new();
    for (mu, nu) in [pair_a::<f64>(), pair_b::<f64>()] {
        for &t in &[1.0, 10.0, 100.0, 1000.0] {
            let get = |kind| {
                f_divergence(&mu, &nu, t, kind, FDivMethod::Quadrature, 200_000, 0)
                    .unwrap()
                    .value
            };
            let (chi2, kl, tv) = (get(FDivKind::Chi2), get(FDivKind::Kl), get(FDivKind::Tv));
            let pinsker = tv * tv <= 0.5 * kl + 1e-12;
            let chi2_kl = kl <= (1.0 + chi2).ln() + 1e-12;
            if !(pinsker && chi2_kl) {
                ok = false;
                worst = format!("t={t}: χ² {chi2:.3e}, KL {kl:.3e}, TV {tv:.3e}");
            }
        }
    }
    report(
        12,
        "TV² ≤ KL/2 and KL ≤ log(1+χ²) at every computed point",
        ok,
        if ok { "all points satisfied" } else { &worst },
    );
}
