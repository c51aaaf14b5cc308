//! The numerical invariant suite behind `chbell verify`.
//!
//! Every module-level invariant gets one named check with a residual and a
//! tolerance; the command exits nonzero if any check fails. Sampling is
//! seeded, so the report is reproducible. Setting `CHBELL_VERIFY_TAMPER`
//! zeroes one tolerance to prove a regression would be caught.

use rand::Rng;
use rand::SeedableRng;
use rand_xorshift::XorShiftRng;
use serde::Serialize;
use std::f64::consts::PI;

use chbell::analytic::{
    self, build_b, cubic_residual, max_violation_for_eta, optimal_t, reduced_cubic_roots,
    stationary_lambda, t_quartic_coeffs, AnalyticPoint, ETA_FLOOR,
};
use chbell::chmetrics::{
    ch_expectation_operator, ch_lambda_max, ch_q, eberhard_margin, marginal_probability,
    ReducedState,
};
use chbell::optimizer::{
    cg_optimize, eta_objective, exhaustive_k_scan, k_search, max_violation, min_eta, q_objective,
    OptimizerSettings, SearchSettings,
};
use chbell::states::{ExponentQuad, MeasurementConfig, MeasurementSetting, SchmidtState};

pub const TAMPER_ENV: &str = "CHBELL_VERIFY_TAMPER";
const TSIRELSON: f64 = std::f64::consts::FRAC_1_SQRT_2 - 0.5;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &'static str, residual: f64, tolerance: f64) -> Check {
    Check { name, residual, tolerance, pass: residual.is_finite() && residual <= tolerance }
}

fn rng(seed: u64, salt: u64) -> XorShiftRng {
    XorShiftRng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt))
}

fn random_setting(rng: &mut XorShiftRng) -> MeasurementSetting {
    MeasurementSetting::new(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI))
}

fn random_state(rng: &mut XorShiftRng) -> SchmidtState {
    SchmidtState::from_ratio(rng.random_range(0.02..=1.0)).unwrap()
}

fn random_config(rng: &mut XorShiftRng) -> MeasurementConfig {
    MeasurementConfig::new([
        random_setting(rng),
        random_setting(rng),
        random_setting(rng),
        random_setting(rng),
    ])
}

fn fd_norm(f: impl Fn(&[f64; 8]) -> f64, x: &[f64; 8]) -> f64 {
    let h = 1e-6;
    let mut n2 = 0.0;
    for i in 0..8 {
        let mut xp = *x;
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        n2 += ((fp - fm) / (2.0 * h)).powi(2);
    }
    n2.sqrt()
}

pub fn run(seed: u64) -> Report {
    let tamper = std::env::var_os(TAMPER_ENV).is_some();
    let mut checks = Vec::new();

    // states: orthonormality and resolution of identity.
    {
        let mut r = rng(seed, 1);
        let mut worst_overlap: f64 = 0.0;
        let mut worst_identity: f64 = 0.0;
        for _ in 0..400 {
            let (v, u) = random_setting(&mut r).basis_vectors();
            let overlap = (u[0].conj() * v[0] + u[1].conj() * v[1]).norm();
            worst_overlap = worst_overlap.max(overlap);
            for i in 0..2 {
                for j in 0..2 {
                    let sum = v[i] * v[j].conj() + u[i] * u[j].conj();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    worst_identity = worst_identity.max((sum.re - expect).abs().max(sum.im.abs()));
                }
            }
        }
        checks.push(check("basis-orthonormality", worst_overlap, 1e-14));
        checks.push(check("resolution-of-identity", worst_identity, 1e-13));
    }

    // states: hardy bases coincide with exponents (1,3,3,1).
    {
        let mut worst: f64 = 0.0;
        let quad = ExponentQuad::new(1, 3, 3, 1).unwrap();
        for i in 1..=100 {
            let s = SchmidtState::from_ratio(i as f64 / 100.0).unwrap();
            let h = MeasurementConfig::hardy(&s).unwrap();
            let k = MeasurementConfig::for_exponents(&s, &quad).unwrap();
            for (a, b) in h.settings().iter().zip(k.settings()) {
                let (va, _) = a.basis_vectors();
                let (vb, _) = b.basis_vectors();
                worst = worst.max((va[0] - vb[0]).norm().max((va[1] - vb[1]).norm()));
            }
        }
        checks.push(check("hardy-equals-k1331", worst, 1e-12));
    }

    // states: exponent weights monotone in k and saturating toward 1.
    {
        let mut worst: f64 = 0.0;
        for &ratio in &[0.05f64, 0.3, 0.62, 0.9, 0.99] {
            let s = SchmidtState::from_ratio(ratio).unwrap();
            let mut last = 0.0;
            for k in 1..=1024u32 {
                let quad = ExponentQuad::new(k, 1, 1, 1).unwrap();
                let c = MeasurementConfig::for_exponents(&s, &quad).unwrap();
                let sin_k = c.setting(0).phi().sin();
                worst = worst.max(last - sin_k);
                last = sin_k;
            }
            // Saturation needs ratio^k < 1e-12; raise the ceiling accordingly.
            let k_sat = (30.0 / -ratio.ln()).ceil().max(1.0) as u32;
            let quad = ExponentQuad::with_max(k_sat, 1, 1, 1, k_sat.max(1024)).unwrap();
            let c = MeasurementConfig::for_exponents(&s, &quad).unwrap();
            worst = worst.max(1.0 - c.setting(0).phi().sin());
        }
        checks.push(check("exponent-weights-monotone", worst, 1e-12));
    }

    // chmetrics: dual-route q agreement over 1000 samples.
    {
        let mut r = rng(seed, 2);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let state = random_state(&mut r);
            let config = random_config(&mut r);
            let rep = ch_q(&state, &config);
            worst = worst.max((rep.q - ch_expectation_operator(&state, &config)).abs());
        }
        let tol = if tamper { 0.0 } else { 1e-12 };
        checks.push(check("q-dual-route", worst, tol));
    }

    // chmetrics: quantum bound and operator ceiling.
    {
        let mut r = rng(seed, 3);
        let mut worst_bound = f64::NEG_INFINITY;
        let mut worst_ceiling = f64::NEG_INFINITY;
        for _ in 0..300 {
            let state = random_state(&mut r);
            let config = random_config(&mut r);
            let rep = ch_q(&state, &config);
            worst_bound = worst_bound.max(rep.q - TSIRELSON);
            worst_ceiling = worst_ceiling.max(rep.q - ch_lambda_max(&config));
        }
        checks.push(check("tsirelson-ceiling", worst_bound, 1e-9));
        checks.push(check("q-below-operator-top", worst_ceiling, 1e-12));
    }

    // chmetrics: margin monotone in eta; eta_crit reassembly; marginals.
    {
        let mut r = rng(seed, 4);
        let mut worst_monotone = f64::NEG_INFINITY;
        let mut worst_eta: f64 = 0.0;
        let mut worst_marginal: f64 = 0.0;
        for _ in 0..300 {
            let state = random_state(&mut r);
            let config = random_config(&mut r);
            let eta_lo = r.random_range(0.05..0.9);
            let eta_hi = eta_lo + r.random_range(0.01..0.09);
            let lo = eberhard_margin(&state, &config, eta_lo).unwrap();
            let hi = eberhard_margin(&state, &config, eta_hi).unwrap();
            worst_monotone = worst_monotone.max(lo - hi);
            let rep = ch_q(&state, &config);
            if let Some(eta) = rep.eta_crit {
                worst_eta = worst_eta.max((eta - (rep.m2 + rep.m3) / (rep.q + rep.m2 + rep.m3)).abs());
            }
            let m = random_setting(&mut r);
            worst_marginal = worst_marginal.max(
                (marginal_probability(&state, &m) - ReducedState::of(&state).expectation(&m)).abs(),
            );
        }
        checks.push(check("eberhard-margin-monotone", worst_monotone, 0.0));
        checks.push(check("eta-crit-reassembly", worst_eta, 1e-14));
        checks.push(check("marginal-dual-route", worst_marginal, 1e-13));
    }

    // optimizer: quadratic bowl sanity and gradient quality.
    {
        let c = [0.3, -1.2, 2.0, 0.0, 1.7, -0.4, 0.9, 3.1];
        let f = |x: &[f64; 8]| -x.iter().zip(&c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum::<f64>();
        let settings = OptimizerSettings { seed, ..Default::default() };
        match cg_optimize(f, [0.0; 8], &settings) {
            Ok(res) => {
                checks.push(check("cg-quadratic-bowl-value", res.value.abs(), 1e-8));
                checks.push(check(
                    "cg-quadratic-bowl-gradient",
                    res.gradient_norm,
                    10.0 * settings.tolerance,
                ));
            }
            Err(_) => checks.push(check("cg-quadratic-bowl-value", f64::INFINITY, 1e-8)),
        }
    }

    // optimizer: gradient norm at multistart winners (well-scaled regime).
    {
        let settings =
            OptimizerSettings { sample_count: 300, seed, ..Default::default() };
        let state = SchmidtState::from_ratio(0.8).unwrap();
        let rec = max_violation(&state, &settings).unwrap();
        let g = fd_norm(|x| q_objective(&state, x), &rec.config.angles());
        checks.push(check("cg-gradient-at-maxq-winner", g, 10.0 * settings.tolerance));

        let state = SchmidtState::from_ratio(0.9).unwrap();
        let rec = min_eta(&state, &settings).unwrap();
        let g = fd_norm(|x| eta_objective(&state, x), &rec.config.angles());
        checks.push(check("cg-gradient-at-mineta-winner", g, 10.0 * settings.tolerance));
    }

    // optimizer: determinism of repeated runs.
    {
        let settings = OptimizerSettings { sample_count: 60, seed, ..Default::default() };
        let state = SchmidtState::from_ratio(0.7).unwrap();
        let a = max_violation(&state, &settings).unwrap();
        let b = max_violation(&state, &settings).unwrap();
        let residual = if a == b { 0.0 } else { 1.0 };
        checks.push(check("multistart-determinism", residual, 0.0));
    }

    // optimizer: staged search stage one agrees with brute force at kmax 8.
    {
        let state = SchmidtState::from_ratio(0.61).unwrap();
        let found = exhaustive_k_scan(&state, 8).unwrap();
        let mut best: Option<([u32; 4], f64)> = None;
        for k1 in 1..=8u32 {
            for k2 in 1..=8 {
                for k3 in 1..=8 {
                    for k4 in 1..=8 {
                        let quad = ExponentQuad::new(k1, k2, k3, k4).unwrap();
                        let config = MeasurementConfig::for_exponents(&state, &quad).unwrap();
                        if let Some(eta) = ch_q(&state, &config).eta_crit {
                            if best.is_none_or(|(_, e)| eta < e) {
                                best = Some(([k1, k2, k3, k4], eta));
                            }
                        }
                    }
                }
            }
        }
        let (oracle_quad, oracle_eta) = best.unwrap();
        let config = MeasurementConfig::for_exponents(&state, &found).unwrap();
        let found_eta = ch_q(&state, &config).eta_crit.unwrap();
        let residual =
            (found_eta - oracle_eta).abs() + if found.values() == oracle_quad { 0.0 } else { 1.0 };
        checks.push(check("ksearch-stage1-vs-bruteforce", residual, 1e-12));
    }

    // optimizer: dominance spot checks.
    {
        let settings = OptimizerSettings { sample_count: 600, seed, ..Default::default() };
        let search = SearchSettings { coarse_kmax: 16, ..Default::default() };
        let mut worst_q = f64::NEG_INFINITY;
        let mut worst_eta = f64::NEG_INFINITY;
        for &ratio in &[0.3, 0.74, 1.0] {
            let state = SchmidtState::from_ratio(ratio).unwrap();
            let maxq = max_violation(&state, &settings).unwrap();
            let mineta = min_eta(&state, &settings).unwrap();
            let ks = k_search(&state, &search).unwrap();
            let mut fixed = vec![ks.report];
            for config in [
                MeasurementConfig::hardy(&state).unwrap(),
                MeasurementConfig::for_nm(&state, 1, 7).unwrap(),
                MeasurementConfig::for_nm(&state, 3, 10).unwrap(),
            ] {
                fixed.push(ch_q(&state, &config));
            }
            for rep in &fixed {
                worst_q = worst_q.max(rep.q - maxq.report.q);
                if let (Some(fixed_eta), Some(best_eta)) =
                    (rep.eta_crit, mineta.report.eta_crit)
                {
                    worst_eta = worst_eta.max(best_eta - fixed_eta);
                }
            }
        }
        checks.push(check("maxq-dominates-fixed-bases", worst_q, 1e-9));
        checks.push(check("mineta-dominates-fixed-bases", worst_eta, 1e-6));
    }

    // analytic: quartic residuals against the dense eigensolver.
    {
        let mut r = rng(seed, 5);
        let mut worst: f64 = 0.0;
        for _ in 0..500 {
            let point = AnalyticPoint::new(
                r.random_range(0.05..=1.0),
                r.random_range(0.0..=1.0),
                r.random_range(0.0..=1.0),
            )
            .unwrap();
            for ev in build_b(&point).symmetric_eigen().eigenvalues.iter() {
                worst = worst.max(analytic::quartic_residual(&point, *ev));
            }
        }
        checks.push(check("char-quartic-vs-eigensolver", worst, 1e-8));
    }

    // analytic: trigonometric cubic roots against the eigensolver.
    {
        let mut r = rng(seed, 6);
        let mut worst: f64 = 0.0;
        let mut worst_residual: f64 = 0.0;
        let mut worst_lambda4: f64 = f64::NEG_INFINITY;
        for _ in 0..200 {
            let eta = r.random_range(0.05..=1.0);
            let t = r.random_range(0.0..=1.0);
            let set = reduced_cubic_roots(eta, t).unwrap();
            let mut ours = [set.lambda1, set.lambda2, set.lambda3, set.lambda4];
            ours.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let point = AnalyticPoint::new(eta, t, t).unwrap();
            let mut numeric: Vec<f64> =
                build_b(&point).symmetric_eigen().eigenvalues.iter().cloned().collect();
            numeric.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (a, b) in ours.iter().zip(&numeric) {
                worst = worst.max((a - b).abs());
            }
            for root in [set.lambda1, set.lambda2, set.lambda3] {
                worst_residual = worst_residual.max(cubic_residual(eta, t, root));
            }
            worst_lambda4 = worst_lambda4.max(set.lambda4);
        }
        checks.push(check("cubic-roots-vs-eigensolver", worst, 1e-9));
        checks.push(check("cubic-root-residuals", worst_residual, 1e-9));
        checks.push(check("singlet-eigenvalue-nonpositive", worst_lambda4, 0.0));
    }

    // analytic: s = t maximizes the top eigenvalue at fixed product.
    {
        let mut r = rng(seed, 7);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..100 {
            let eta = r.random_range(0.7..=1.0);
            let p: f64 = r.random_range(0.01..=0.9);
            let top = |s: f64, t: f64| {
                let point = AnalyticPoint::new(eta, s, t).unwrap();
                build_b(&point)
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let sym = top(p.sqrt(), p.sqrt());
            let s = (p.sqrt() * r.random_range(1.05..3.0)).min(1.0);
            let skew = top(s, p / s);
            worst = worst.max(skew - sym);
        }
        checks.push(check("equal-rotations-maximal", worst, 1e-12));
    }

    // analytic: boundary identities and monotonicity.
    {
        let t1 = optimal_t(1.0).map(|t| (t - 0.5).abs()).unwrap_or(f64::INFINITY);
        checks.push(check("optimal-t-at-unit-efficiency", t1, 1e-10));
        checks.push(check(
            "t-quartic-constant-at-floor",
            t_quartic_coeffs(ETA_FLOOR)[0].abs(),
            1e-12,
        ));
        checks.push(check(
            "stationary-lambda-at-floor",
            stationary_lambda(ETA_FLOOR, 0.0).map(f64::abs).unwrap_or(f64::INFINITY),
            1e-12,
        ));

        let mut worst = f64::NEG_INFINITY;
        let mut last = 0.0;
        for i in 1..=30 {
            let eta = ETA_FLOOR + (1.0 - ETA_FLOOR) * i as f64 / 30.0;
            let lambda = reduced_cubic_roots(eta, optimal_t(eta).unwrap()).unwrap().lambda1;
            worst = worst.max(last - lambda);
            last = lambda;
        }
        checks.push(check("lambda1-monotone-in-eta", worst, 0.0));

        let mut worst_stat: f64 = 0.0;
        for &eta in &[0.7, 0.8, 0.9, 0.99] {
            let t = optimal_t(eta).unwrap();
            let a = reduced_cubic_roots(eta, t).unwrap().lambda1;
            let b = stationary_lambda(eta, t).unwrap();
            worst_stat = worst_stat.max((a - b).abs());
        }
        checks.push(check("stationary-lambda-consistency", worst_stat, 1e-9));
    }

    // cli: emitted CSV parses back to rows that recompute the q column.
    {
        let settings = chbell::SweepSettings::default();
        let ratios: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        let records =
            chbell::optimizer::sweep(&ratios, &chbell::Strategy::Hardy, &settings).unwrap();
        let rows: Vec<crate::emit::CurveRow> =
            records.iter().map(crate::emit::CurveRow::from_record).collect();
        let text = crate::emit::curve_csv(&rows);
        let parsed = crate::emit::parse_curve_csv(&text).unwrap();
        let mut worst: f64 = 0.0;
        for row in &parsed {
            let state = SchmidtState::from_ratio(row.ratio).unwrap();
            let config = MeasurementConfig::from_angles(&[
                row.phi[0], row.phi[1], row.phi[2], row.phi[3], row.nu[0], row.nu[1], row.nu[2],
                row.nu[3],
            ]);
            worst = worst.max((ch_q(&state, &config).q - row.q).abs());
        }
        checks.push(check("csv-roundtrip-recompute", worst, 1e-12));
    }

    // analytic ↔ optimizer bridge at reduced sampling.
    {
        let settings = OptimizerSettings { sample_count: 800, seed, ..Default::default() };
        let mut worst = f64::NEG_INFINITY;
        for &eta in &[0.75, 0.828] {
            let optimum = max_violation_for_eta(eta).unwrap();
            let rec = min_eta(&optimum.state, &settings).unwrap();
            worst = worst.max(rec.report.eta_crit.unwrap() - eta);
        }
        checks.push(check("analytic-numeric-frontier-bridge", worst, 2e-3));
    }

    let passed = checks.iter().all(|c| c.pass);
    Report { seed, passed, checks }
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    for c in &report.checks {
        out.push_str(&format!(
            "{}  {:<34} residual={:<12.3e} tol={:.3e}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance
        ));
    }
    out.push_str(&format!(
        "{}: {}/{} checks passed (seed {})\n",
        if report.passed { "ok" } else { "FAILED" },
        report.checks.iter().filter(|c| c.pass).count(),
        report.checks.len(),
        report.seed
    ));
    out
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("serializable report");
    s.push('\n');
    s
}
