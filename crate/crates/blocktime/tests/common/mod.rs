//! Test-side numerical oracles: adaptive Simpson quadrature and a two-sample
//! Kolmogorov-Smirnov distance. Kept out of the library on purpose; the tests
//! need integration machinery that is independent of the code under test.

// Each test target compiles this module separately and uses its own subset.
#![allow(dead_code)]

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance
/// `tol`, with Richardson extrapolation on each accepted panel.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Depth 20 bounds the worst case at ~10^6 panels; callers must pass a
    // tolerance commensurate with the integral's magnitude or the recursion
    // chases floating-point noise.
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 20)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let flm = f(lm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let rm = 0.5 * (m + b);
    let frm = f(rm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
}

/// Integrate over consecutive panels between the given breakpoints; splitting
/// at quantile-spaced points keeps the adaptive recursion shallow on densities
/// spanning many decades.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, breakpoints: &[f64], tol: f64) -> f64 {
    assert!(breakpoints.len() >= 2);
    let panel_tol = tol / (breakpoints.len() - 1) as f64;
    breakpoints
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], panel_tol))
        .sum()
}

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Critical value of the two-sample KS distance at significance `alpha`
/// for sample sizes n and m (asymptotic form).
pub fn two_sample_ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}
