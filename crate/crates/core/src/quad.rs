//! Adaptive Simpson quadrature.

/// Integrates `f` over `[a, b]` by adaptive Simpson refinement.
///
/// Subintervals are split until the Richardson error estimate falls below
/// `rel_tol * |whole|` (with a small absolute floor), or the recursion hits
/// `max_depth`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: u32,
) -> f64 {
    if a == b {
        return 0.0;
    }
    // A coarse composite pass sets the absolute target so a narrow peak
    // cannot hide between the first three nodes.
    const PANELS: usize = 16;
    let w = (b - a) / PANELS as f64;
    let mut panels = Vec::with_capacity(PANELS);
    let mut coarse = 0.0;
    for i in 0..PANELS {
        let lo = a + w * i as f64;
        let hi = if i + 1 == PANELS { b } else { lo + w };
        let fa = f(lo);
        let fb = f(hi);
        let m = 0.5 * (lo + hi);
        let fm = f(m);
        let s = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        coarse += s;
        panels.push((lo, hi, fa, fm, fb, s));
    }
    let eps = (rel_tol * coarse.abs()).max(1e-15);
    let per_panel = eps / PANELS as f64;
    panels
        .into_iter()
        .map(|(lo, hi, fa, fm, fb, s)| refine(&f, lo, hi, fa, fm, fb, s, per_panel, max_depth))
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}
