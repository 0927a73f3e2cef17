//! Acceptance criteria. Each test prints one PASS/FAIL line and fails if its
//! criterion does not hold at the stated tolerance.
//!
//! Run with `cargo test -p tghar --test acceptance -- --nocapture`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use tghar::simstudy::{run_study, write_report, CovariateDesign, ScenarioGrid, StudyKind};
use tghar::{
    crps, interval, loglik_e_model, loglik_t_model, pit, predictive, simulate, stats,
    t_model_autocovariance, ArCoeffs, Covariates, IntervalKind, InverseMode, InverseTable,
    ModelSpec, RegressionSpec, TghParams, TghShape, Variant,
};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn shape(g: f64, h: f64) -> TghShape {
    TghShape::new(g, h).unwrap()
}

fn spec(
    variant: Variant,
    xi: f64,
    omega: f64,
    (g, h): (f64, f64),
    phi: &[f64],
    beta: &[f64],
) -> ModelSpec {
    ModelSpec::new(
        variant,
        TghParams::new(xi, omega, shape(g, h)).unwrap(),
        ArCoeffs::new(phi.to_vec()).unwrap(),
        RegressionSpec::new(beta.to_vec()),
    )
}

#[test]
fn c1_inverse_fidelity() {
    let mut worst_exact: f64 = 0.0;
    let mut worst_table: f64 = 0.0;
    for g in [0.0, 0.3, -0.3, 0.5] {
        for h in [0.0, 0.1, 0.2] {
            let s = shape(g, h);
            for i in 0..10_000 {
                let z = -6.0 + 12.0 * i as f64 / 9_999.0;
                let back = s.tau_inverse(s.tau(z)).unwrap();
                worst_exact = worst_exact.max((back - z).abs());
            }
            let table = InverseTable::with_defaults(s).unwrap();
            let (t_lo, t_hi) = table.t_range();
            // probe between and at knots
            for i in 0..=20_000 {
                let t = t_lo + (t_hi - t_lo) * i as f64 / 20_000.0;
                let err = (table.eval(t).unwrap() - s.tau_inverse(t).unwrap()).abs();
                worst_table = worst_table.max(err);
            }
            for w in table.knots().collect::<Vec<_>>().windows(2) {
                let t = 0.5 * (w[0].0 + w[1].0);
                worst_table =
                    worst_table.max((table.eval(t).unwrap() - s.tau_inverse(t).unwrap()).abs());
            }
        }
    }
    report(
        1,
        "inverse fidelity",
        worst_exact < 1e-10 && worst_table < 1e-6,
        &format!("max round-trip error {worst_exact:.2e} (< 1e-10), max table error {worst_table:.2e} (< 1e-6)"),
    );
}

/// Monte Carlo estimate of `E tau(Z)^q` and its standard error. Plain draws
/// have infinite variance once `h >= 1/(2q)`, so `Z` is drawn from
/// `N(0, 1/(1 - qh))` and reweighted, which keeps the variance finite for
/// every `h < 1/q` and reduces to plain sampling at `h = 0`.
fn mc_moment(s: TghShape, q: i32, draws: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let s2 = 1.0 / (1.0 - q as f64 * s.h());
    let sd = s2.sqrt();
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..draws {
        let z = sd * rng.sample::<f64, _>(StandardNormal);
        let w = sd * (-0.5 * z * z * (1.0 - 1.0 / s2)).exp();
        let v = s.tau(z).powi(q) * w;
        sum += v;
        sum2 += v * v;
    }
    let n = draws as f64;
    let mean = sum / n;
    (mean, ((sum2 / n - mean * mean) / (n - 1.0)).sqrt())
}

#[test]
fn c2_moment_formulas() {
    let exact = shape(0.0, 0.0).summary().unwrap();
    let exact_ok =
        (exact.mean, exact.sd, exact.skewness, exact.excess_kurtosis) == (0.0, 1.0, 0.0, 0.0);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (i, (g, h)) in [(0.3, 0.0), (-0.3, 0.1), (0.3, 0.1), (0.5, 0.2), (0.0, 0.2)]
        .into_iter()
        .enumerate()
    {
        let s = shape(g, h);
        for q in 1..=4 {
            if h >= 1.0 / q as f64 {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(100 + 10 * i as u64 + q as u64);
            let (mc, se) = mc_moment(s, q, 10_000_000, &mut rng);
            let formula = s.moment(q as u32).unwrap();
            let z = (mc - formula).abs() / se;
            println!(
                "criterion 2 detail g={g} h={h} q={q}: formula {formula:.6} MC {mc:.6} ({z:.2} SE)"
            );
            worst = worst.max(z);
            checked += 1;
        }
    }
    report(
        2,
        "moment formulas",
        exact_ok && worst < 4.0,
        &format!("summary(0,0) exact: {exact_ok}; {checked} moments, largest deviation {worst:.2} SE (< 4)"),
    );
}

#[test]
fn c3_autocovariance() {
    let s = shape(0.3, 0.1);
    let at_zero = t_model_autocovariance(s, 0.0).unwrap();
    let n = 4_000_000;
    let mut worst: f64 = 0.0;
    let mut detail = format!("rho=0: {at_zero:.1e}");
    for (i, rho) in [0.3, 0.8].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + i as u64);
        let c = (1.0_f64 - rho * rho).sqrt();
        let mean = s.moment(1).unwrap();
        let mut prods = Vec::with_capacity(n);
        for _ in 0..n {
            let z1: f64 = rng.sample(StandardNormal);
            let z2 = rho * z1 + c * rng.sample::<f64, _>(StandardNormal);
            prods.push((s.tau(z1) - mean) * (s.tau(z2) - mean));
        }
        let (mc, var, _, _) = stats::sample_moments(&prods);
        let se = (var / n as f64).sqrt();
        let theory = t_model_autocovariance(s, rho).unwrap();
        let z = (mc - theory).abs() / se;
        worst = worst.max(z);
        detail.push_str(&format!(
            "; rho={rho}: formula {theory:.5} MC {mc:.5} ({z:.2} SE)"
        ));
    }
    report(
        3,
        "autocovariance",
        at_zero.abs() < 1e-12 && worst < 4.0,
        &detail,
    );
}

fn order_grid(phi: Vec<f64>, n: usize, seed: u64) -> ScenarioGrid {
    ScenarioGrid {
        study: StudyKind::OrderSelection,
        variants: vec![Variant::TransformedLatent],
        shapes: vec![(0.3, 0.1)],
        sample_sizes: vec![n],
        phis: vec![phi],
        xi: 0.0,
        omega: 1.0,
        beta: Vec::new(),
        covariates: CovariateDesign::None,
        replications: 200,
        seed,
        p_max: 5,
        multistart: 5,
        forecast_origins: 1,
    }
}

/// BIC order selection for Gaussian AR data by conditional least squares,
/// as a reference for what BIC can achieve at this sample size.
fn gaussian_bic_rate(phi: &[f64], n: usize, p_max: usize, reps: usize, seed: u64) -> f64 {
    let ar = ArCoeffs::new(phi.to_vec()).unwrap();
    let mut correct = 0;
    for r in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let y = ar.simulate_unit(n, &mut rng);
        let m = n - p_max;
        let bics: Vec<f64> = (0..=p_max)
            .map(|p| {
                let mut x = Vec::with_capacity(m * (p + 1));
                for t in p_max..n {
                    x.push(1.0);
                    x.extend((1..=p).map(|j| y[t - j]));
                }
                let yy = &y[p_max..];
                let b = stats::least_squares(yy, &x, p + 1).unwrap();
                let rss: f64 = (0..m)
                    .map(|i| yy[i] - (0..=p).map(|j| x[i * (p + 1) + j] * b[j]).sum::<f64>())
                    .map(|e| e * e)
                    .sum();
                m as f64 * (rss / m as f64).ln() + (p + 2) as f64 * (m as f64).ln()
            })
            .collect();
        let best = (0..=p_max)
            .min_by(|&a, &b| bics[a].total_cmp(&bics[b]))
            .unwrap();
        if best == phi.len() {
            correct += 1;
        }
    }
    correct as f64 / reps as f64
}

#[test]
fn c4_order_selection() {
    let a = run_study(&order_grid(vec![0.8], 500, 20240501), 1).unwrap();
    let b = run_study(&order_grid(vec![0.2, 0.4], 100, 20240502), 1).unwrap();
    let (ra, rb) = (a.selection[0].rate, b.selection[0].rate);
    let fails = a.selection[0].failures.len() + b.selection[0].failures.len();
    let reference = gaussian_bic_rate(&[0.2, 0.4], 100, 5, 2000, 41);
    println!("criterion 4 reference: Gaussian AR(2) phi=(0.2,0.4), n=100, least-squares BIC rate {reference:.3}");
    report(
        4,
        "order selection",
        (ra - 0.987).abs() <= 0.04 && (rb - 0.532).abs() <= 0.10,
        &format!(
            "p=1 phi=0.8 n=500 rate {ra:.3} (0.987 +/- 0.04); p=2 phi=(0.2,0.4) n=100 rate {rb:.3} (0.532 +/- 0.10); {fails} failed replications"
        ),
    );
}

#[test]
fn c5_estimator_comparison() {
    let grid = ScenarioGrid {
        study: StudyKind::EstimatorComparison,
        variants: vec![Variant::TransformedLatent],
        shapes: vec![(0.3, 0.1)],
        sample_sizes: vec![100, 500],
        phis: vec![vec![0.8]],
        xi: -3.0,
        omega: 1.5,
        beta: vec![3.0, -2.0],
        covariates: CovariateDesign::Harmonic24,
        replications: 200,
        seed: 20240503,
        p_max: 5,
        multistart: 5,
        forecast_origins: 1,
    };
    let r = run_study(&grid, 1).unwrap();
    let small = &r.estimation[0];
    let large = &r.estimation[1];
    assert_eq!((small.cell.n, large.cell.n), (100, 500));
    let names = &large.parameters;
    let h = names.iter().position(|n| n == "h").unwrap();
    let phi = names.iter().position(|n| n == "phi1").unwrap();
    let (joint, seq) = (&large.methods[0], &large.methods[1]);
    let beats = joint.rmse[h] < seq.rmse[h] && joint.rmse[phi] < seq.rmse[phi];
    let mut shrinks = true;
    for m in 0..2 {
        for j in 0..names.len() {
            shrinks &= large.methods[m].rmse[j] < small.methods[m].rmse[j];
        }
    }
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("criterion 5 parameters: {}", names.join(" "));
    for (cell, label) in [(small, "n=100"), (large, "n=500")] {
        for m in &cell.methods {
            println!(
                "criterion 5 rmse {label} {}: {} ({} failures)",
                m.method,
                fmt(&m.rmse),
                m.failures.len()
            );
        }
    }
    report(
        5,
        "estimator comparison",
        beats && shrinks,
        &format!(
            "n=500 rmse(h) joint {:.4} vs sequential {:.4}, rmse(phi) joint {:.4} vs sequential {:.4}; rmse falls from n=100 to n=500 for every parameter: {shrinks}",
            joint.rmse[h], seq.rmse[h], joint.rmse[phi], seq.rmse[phi]
        ),
    );
}

#[test]
fn c6_forecast_comparison() {
    let grid = ScenarioGrid {
        study: StudyKind::ForecastComparison,
        variants: vec![Variant::TransformedLatent, Variant::TransformedError],
        shapes: vec![(0.3, 0.1)],
        sample_sizes: vec![500],
        phis: vec![vec![0.8]],
        xi: -3.0,
        omega: 1.5,
        beta: vec![3.0, -2.0],
        covariates: CovariateDesign::Harmonic24,
        replications: 200,
        seed: 20240504,
        p_max: 5,
        multistart: 5,
        forecast_origins: 50,
    };
    let r = run_study(&grid, 1).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for cell in &r.forecasting {
        let matched = match cell.cell.variant {
            Variant::TransformedLatent => 0,
            Variant::TransformedError => 1,
        };
        for m in &cell.methods {
            let s = &m.scores;
            println!(
                "criterion 6 data={} fit={}: forecasts {} MAE {:.4} RMSE {:.4} coverage {:.4} width {:.3} KS {:.4} failures {}",
                cell.cell.variant,
                m.method,
                s.forecasts,
                s.mae,
                s.rmse,
                s.coverage_min_length,
                s.width_min_length,
                m.ks_statistic,
                m.failures.len()
            );
        }
        let me = &cell.methods[matched];
        let others: Vec<_> = cell
            .methods
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != matched)
            .map(|(_, m)| m)
            .collect();
        let best_mae = others.iter().all(|o| me.scores.mae < o.scores.mae);
        let best_rmse = others.iter().all(|o| me.scores.rmse < o.scores.rmse);
        let ks = others.iter().all(|o| o.ks_statistic > me.ks_statistic);
        let coverage = cell
            .methods
            .iter()
            .all(|m| (0.93..=0.97).contains(&m.scores.coverage_min_length));
        pass &= best_mae && best_rmse && ks && coverage;
        notes.push(format!(
            "{}-data: matched best MAE {best_mae}, best RMSE {best_rmse}, cross KS larger {ks}, coverage in [0.93,0.97] {coverage}",
            cell.cell.variant
        ));
    }
    let t = &r.forecasting[0];
    let narrower = t.methods[0].scores.width_min_length < t.methods[2].scores.width_min_length;
    pass &= narrower;
    notes.push(format!(
        "t-data width t-fit {:.3} < Gaussian {:.3}: {narrower}",
        t.methods[0].scores.width_min_length, t.methods[2].scores.width_min_length
    ));
    report(6, "forecast comparison", pass, &notes.join("; "));
}

#[test]
fn c7_calibration() {
    let n = 10_000;
    let mut detail = Vec::new();
    let mut pass = true;
    for (i, variant) in [Variant::TransformedLatent, Variant::TransformedError]
        .into_iter()
        .enumerate()
    {
        let s = spec(variant, -3.0, 1.5, (0.3, 0.1), &[0.8], &[3.0, -2.0]);
        let x = Covariates::harmonics(n + 1, 24.0, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(700 + i as u64);
        let data = simulate(&s, &x, &mut rng).unwrap();
        let pits: Vec<f64> = (1..=n)
            .map(|t| {
                let d = predictive(&s, &data.slice(t - 1..t), x.row(t)).unwrap();
                pit(&d, data.y()[t])
            })
            .collect();
        let ks = stats::ks_uniform(&pits);
        let pv = stats::kolmogorov_pvalue(ks, n);
        pass &= pv > 0.01;
        detail.push(format!("{variant}-model KS {ks:.4} p-value {pv:.3}"));
    }
    report(
        7,
        "calibration with true parameters",
        pass,
        &detail.join("; "),
    );
}

/// Gaussian AR log density by dense Cholesky of the stationary covariance.
fn dense_gaussian_loglik(z: &[f64], ar: &ArCoeffs) -> f64 {
    let n = z.len();
    let acf = ar.acf(n);
    let cov = DMatrix::from_fn(n, n, |i, j| acf[i.abs_diff(j)]);
    let chol = cov.cholesky().unwrap();
    let v = DVector::from_column_slice(z);
    let w = chol.l().solve_lower_triangular(&v).unwrap();
    let logdet: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + logdet + w.norm_squared())
}

#[test]
fn c8_gaussian_reduction() {
    let n = 300;
    let mut worst_ll: f64 = 0.0;
    let mut worst_ci: f64 = 0.0;
    let mut worst_crps: f64 = 0.0;
    let std_normal = Normal::standard();
    for (i, phi) in [vec![], vec![0.8], vec![0.5, -0.3], vec![0.2, 0.1, 0.4]]
        .into_iter()
        .enumerate()
    {
        let x = Covariates::harmonics(n + 1, 24.0, 1);
        for variant in [Variant::TransformedLatent, Variant::TransformedError] {
            let s = spec(variant, 1.2, 0.7, (0.0, 0.0), &phi, &[0.5, -1.0]);
            let mut rng = ChaCha8Rng::seed_from_u64(800 + i as u64);
            let full = simulate(&s, &x, &mut rng).unwrap();
            let data = full.slice(0..n);
            let det: Vec<f64> = (0..n)
                .map(|t| data.y()[t] - 1.2 - (0.5 * x.row(t)[0] - x.row(t)[1]))
                .collect();
            let (ours, reference, count) = match variant {
                Variant::TransformedLatent => {
                    let z: Vec<f64> = det.iter().map(|d| d / 0.7).collect();
                    let reference = dense_gaussian_loglik(&z, &s.ar) - n as f64 * 0.7f64.ln();
                    (
                        loglik_t_model(&s, &data, InverseMode::Exact)
                            .unwrap()
                            .value(),
                        reference,
                        n,
                    )
                }
                Variant::TransformedError => {
                    let p = phi.len();
                    let reference: f64 = (p..n)
                        .map(|t| {
                            let pred: f64 = (1..=p).map(|j| phi[j - 1] * det[t - j]).sum();
                            std_normal.ln_pdf((det[t] - pred) / 0.7) - 0.7f64.ln()
                        })
                        .sum();
                    (
                        loglik_e_model(&s, &data, p, InverseMode::Exact)
                            .unwrap()
                            .value(),
                        reference,
                        n - p,
                    )
                }
            };
            worst_ll = worst_ll.max((ours - reference).abs() / count as f64);

            let d = predictive(&s, &data, x.row(n)).unwrap();
            let sym = interval(&d, 0.95, IntervalKind::SymmetricWeight).unwrap();
            let min = interval(&d, 0.95, IntervalKind::MinimumLength).unwrap();
            worst_ci = worst_ci
                .max((sym.lower - min.lower).abs())
                .max((sym.upper - min.upper).abs());

            let centre = d.quantile(0.5).unwrap();
            let sd = (d.quantile(std_normal.cdf(1.0)).unwrap() - centre).abs();
            for y in [-3.0, -0.4, 0.0, 0.9, 2.5, 6.0] {
                let z = (y - centre) / sd;
                let closed = sd
                    * (z * (2.0 * std_normal.cdf(z) - 1.0) + 2.0 * std_normal.pdf(z)
                        - 1.0 / std::f64::consts::PI.sqrt());
                worst_crps = worst_crps.max((crps(&d, y).unwrap() - closed).abs());
            }
        }
    }
    report(
        8,
        "Gaussian reduction",
        worst_ll < 1e-10 && worst_ci < 1e-7 && worst_crps < 1e-7,
        &format!(
            "likelihood error per point {worst_ll:.2e} (< 1e-10), interval endpoint gap {worst_ci:.2e}, CRPS error {worst_crps:.2e} (< 1e-7)"
        ),
    );
}

#[test]
fn c9_determinism() {
    let grid = ScenarioGrid {
        study: StudyKind::ForecastComparison,
        variants: vec![Variant::TransformedLatent, Variant::TransformedError],
        shapes: vec![(0.3, 0.1), (0.0, 0.2)],
        sample_sizes: vec![80],
        phis: vec![vec![0.5]],
        xi: -3.0,
        omega: 1.5,
        beta: vec![3.0, -2.0],
        covariates: CovariateDesign::Harmonic24,
        replications: 4,
        seed: 99,
        p_max: 2,
        multistart: 1,
        forecast_origins: 3,
    };
    let dir = tempfile::tempdir().unwrap();
    let mut trees = Vec::new();
    for (threads, name) in [(1, "serial"), (4, "parallel"), (1, "repeat")] {
        let out = dir.path().join(name);
        write_report(&run_study(&grid, threads).unwrap(), &out).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        trees.push(files);
    }
    let same = trees[0] == trees[1] && trees[0] == trees[2];
    report(
        9,
        "determinism",
        same && !trees[0].is_empty(),
        &format!(
            "{} report files byte-identical across serial, parallel and repeated runs: {same}",
            trees[0].len()
        ),
    );
}

#[test]
fn gaussian_reference_sanity() {
    // the least-squares BIC reference used in criterion 4 picks white noise
    // for white noise
    let rate = gaussian_bic_rate(&[], 500, 3, 200, 5);
    assert!(rate > 0.95, "{rate}");
}
