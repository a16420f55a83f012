//! Gauss–Legendre nodes and weights on [−1, 1].

/// Compute the `m`-point Gauss–Legendre rule by Newton iteration on the
/// Legendre polynomial P_m, seeded with the Chebyshev-like estimate.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// (P_m(x), P_m'(x)) via the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
    /// True if the panel budget ran out before the tolerance was met.
    pub budget_exhausted: bool,
}

/// Adaptive panel integration of `f` over [lo, hi].
///
/// Each panel is estimated with 15- and 7-point Gauss–Legendre rules; the
/// difference drives bisection of the worst panel until the summed error
/// estimate is below `rel_tol` relative to the accumulated integral of |f|
/// (plus a tiny absolute floor), or `max_panels` is reached.
pub fn adaptive_integrate(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_panels: usize,
) -> AdaptiveResult {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        abs_value: f64,
        err: f64,
    }
    impl PartialEq for Panel {
        fn eq(&self, other: &Self) -> bool {
            self.err == other.err
        }
    }
    impl Eq for Panel {}
    impl PartialOrd for Panel {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Panel {
        fn cmp(&self, other: &Self) -> Ordering {
            self.err.total_cmp(&other.err)
        }
    }

    let eval = |a: f64, b: f64| -> Panel {
        let (x15, w15) = rule(15);
        let (x7, w7) = rule(7);
        let hw = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut i15 = 0.0;
        let mut a15 = 0.0;
        for (&x, &w) in x15.iter().zip(w15) {
            let v = f(mid + hw * x);
            i15 += w * v;
            a15 += w * v.abs();
        }
        let mut i7 = 0.0;
        for (&x, &w) in x7.iter().zip(w7) {
            i7 += w * f(mid + hw * x);
        }
        Panel {
            a,
            b,
            value: hw * i15,
            abs_value: hw * a15,
            err: (hw * (i15 - i7)).abs(),
        }
    };

    // Seed with 8 equal panels so features away from the centre are seen.
    let mut heap = BinaryHeap::new();
    let seed_panels = 8.min(max_panels.max(1));
    for k in 0..seed_panels {
        let a = lo + (hi - lo) * (k as f64) / seed_panels as f64;
        let b = lo + (hi - lo) * ((k + 1) as f64) / seed_panels as f64;
        heap.push(eval(a, b));
    }
    loop {
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        let total_abs: f64 = heap.iter().map(|p| p.abs_value).sum();
        let tol = rel_tol * total_abs + 1e-300;
        if total_err <= tol || heap.len() >= max_panels {
            let value: f64 = heap.iter().map(|p| p.value).sum();
            return AdaptiveResult {
                value,
                error_estimate: total_err,
                panels: heap.len(),
                budget_exhausted: total_err > tol,
            };
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(eval(worst.a, mid));
        heap.push(eval(mid, worst.b));
    }
}

/// Cached Gauss–Legendre rules for the small orders the adaptive
/// integrator uses.
fn rule(m: usize) -> (&'static [f64], &'static [f64]) {
    use std::sync::OnceLock;
    static R7: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R15: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let cell = match m {
        7 => &R7,
        15 => &R15,
        _ => panic!("uncached rule order {m}"),
    };
    let (x, w) = cell.get_or_init(|| gauss_legendre(m));
    (x, w)
}
