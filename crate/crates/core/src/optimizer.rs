//! Multistart conjugate-gradient optimization over the eight setting
//! parameters `(φ₁..φ₄, ν₁..ν₄)` and staged integer search over basis
//! exponents.
//!
//! [`max_violation`] maximizes the CH violation `Q` for a fixed state,
//! [`min_eta`] minimizes the threshold efficiency, and [`k_search`] scans the
//! generalized-basis exponents for the lowest threshold efficiency.
//! [`sweep`] runs one strategy across a ratio grid.
//!
//! All entry points are deterministic for a given seed: multistart points
//! are sampled from independent per-start streams keyed by the state's
//! Schmidt ratio, and results are reduced with a total order, so parallel
//! execution cannot change any emitted number.

use nalgebra::{SMatrix, SVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::chmetrics::{ch_q, q_and_marginal_sum, ViolationReport};
use crate::rng;
use crate::states::{
    exponent_weights, ExponentQuad, MeasurementConfig, SchmidtState, StateError,
};
use crate::Error as CrateError;

const DIM: usize = 8;
const ARMIJO_C: f64 = 1e-4;
const RESTART_PERIOD: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("objective returned a non-finite value")]
    NonFiniteObjective,
    #[error("no violating configuration found from any start")]
    NoViolationFound,
    #[error("invalid optimizer settings: {0}")]
    InvalidSettings(String),
}

/// Multistart and convergence parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Number of uniform random starting points.
    pub sample_count: usize,
    /// Central finite-difference step for gradients.
    pub gradient_step: f64,
    /// Gradient-norm stopping threshold.
    pub tolerance: f64,
    /// Iteration cap per start.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            sample_count: 10_000,
            gradient_step: 1e-6,
            tolerance: 1e-10,
            max_iterations: 1_000,
            seed: 0,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.sample_count < 1 {
            return Err(OptimizeError::InvalidSettings("sample_count must be ≥ 1".into()));
        }
        if !(self.gradient_step > 0.0 && self.gradient_step < 1e-2) {
            return Err(OptimizeError::InvalidSettings(format!(
                "gradient_step {} outside (0, 1e-2)",
                self.gradient_step
            )));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(OptimizeError::InvalidSettings("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Staged exponent-search parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    /// Exhaustive-stage ceiling per exponent.
    pub coarse_kmax: u32,
    /// Ceiling for the coordinate-refinement stage.
    pub full_kmax: u32,
    /// Number of refinement sweeps over the four coordinates.
    pub refine_rounds: u32,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self { coarse_kmax: 32, full_kmax: 1024, refine_rounds: 8 }
    }
}

/// Which quantity a strategy drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    MaxQ,
    MinEta,
}

/// One optimum (or fixed-basis evaluation) at a single ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumRecord {
    pub ratio: f64,
    pub config: MeasurementConfig,
    pub k: Option<ExponentQuad>,
    pub report: ViolationReport,
    pub objective: Objective,
}

/// Curve strategies: the three fixed basis families, the exponent search,
/// and the two continuous optimizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Hardy,
    Nm { n: u32, m: u32 },
    K(ExponentQuad),
    KSearch,
    MaxQ,
    MinEta,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Hardy => write!(f, "hardy"),
            Strategy::Nm { n, m } => write!(f, "nm({n},{m})"),
            Strategy::K(k) => write!(f, "k{k}"),
            Strategy::KSearch => write!(f, "ksearch"),
            Strategy::MaxQ => write!(f, "maxq"),
            Strategy::MinEta => write!(f, "mineta"),
        }
    }
}

/// Sweep-level settings: optimizer parameters plus exponent-search bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepSettings {
    pub optimizer: OptimizerSettings,
    pub search: SearchSettings,
}

/// Stationary point returned by [`cg_optimize`].
#[derive(Debug, Clone, Copy)]
pub struct CgResult {
    pub point: [f64; DIM],
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

fn eval<F: Fn(&[f64; DIM]) -> f64>(f: &F, x: &[f64; DIM]) -> Result<f64, OptimizeError> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OptimizeError::NonFiniteObjective)
    }
}

fn fd_gradient<F: Fn(&[f64; DIM]) -> f64>(
    f: &F,
    x: &[f64; DIM],
    h: f64,
) -> Result<[f64; DIM], OptimizeError> {
    let mut g = [0.0; DIM];
    let mut xp = *x;
    for i in 0..DIM {
        xp[i] = x[i] + h;
        let fp = eval(f, &xp)?;
        xp[i] = x[i] - h;
        let fm = eval(f, &xp)?;
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

fn fd_hessian<F: Fn(&[f64; DIM]) -> f64>(
    f: &F,
    x: &[f64; DIM],
    fx: f64,
    h: f64,
) -> Result<SMatrix<f64, DIM, DIM>, OptimizeError> {
    let mut hess = SMatrix::<f64, DIM, DIM>::zeros();
    let mut xp = *x;
    for i in 0..DIM {
        xp[i] = x[i] + h;
        let fp = eval(f, &xp)?;
        xp[i] = x[i] - h;
        let fm = eval(f, &xp)?;
        xp[i] = x[i];
        hess[(i, i)] = (fp - 2.0 * fx + fm) / (h * h);
    }
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            xp[i] = x[i] + h;
            xp[j] = x[j] + h;
            let fpp = eval(f, &xp)?;
            xp[j] = x[j] - h;
            let fpm = eval(f, &xp)?;
            xp[i] = x[i] - h;
            let fmm = eval(f, &xp)?;
            xp[j] = x[j] + h;
            let fmp = eval(f, &xp)?;
            xp[i] = x[i];
            xp[j] = x[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

fn norm(v: &[f64; DIM]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `f` from `start` with Polak–Ribière conjugate gradient.
///
/// Gradients are central finite differences with step
/// `settings.gradient_step`; the direction restarts every eight iterations
/// and whenever it stops being an ascent direction. The backtracking line
/// search enforces a sufficient-increase condition. Because function-value
/// comparisons bottom out at floating-point resolution before the gradient
/// does, a stalled run finishes with a few Newton steps on the
/// finite-difference gradient system, which reliably pushes the gradient
/// norm to the requested tolerance.
pub fn cg_optimize<F: Fn(&[f64; DIM]) -> f64>(
    f: F,
    start: [f64; DIM],
    settings: &OptimizerSettings,
) -> Result<CgResult, OptimizeError> {
    settings.validate()?;
    let h = settings.gradient_step;
    let mut x = start;
    let mut fx = eval(&f, &x)?;
    let mut g = fd_gradient(&f, &x, h)?;
    let mut d = g;
    let mut step0 = 1.0;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        if norm(&g) <= settings.tolerance {
            break;
        }
        iterations += 1;

        let mut restarted = dot(&d, &g) <= 0.0;
        if restarted {
            d = g;
        }
        let accepted = loop {
            let slope = dot(&d, &g);
            let mut t = step0;
            let mut found = None;
            for _ in 0..48 {
                let mut xt = x;
                let mut moved = false;
                for i in 0..DIM {
                    xt[i] += t * d[i];
                    moved |= xt[i] != x[i];
                }
                if !moved {
                    break;
                }
                let ft = eval(&f, &xt)?;
                // Strict inequality: once the sufficient-increase term
                // underflows, a step that changes nothing must not count as
                // progress.
                if ft > fx + ARMIJO_C * t * slope {
                    found = Some((xt, ft, t));
                    break;
                }
                t *= 0.5;
            }
            match found {
                Some(acc) => break Some(acc),
                None if !restarted => {
                    // Conjugate direction made no progress; retry steepest.
                    d = g;
                    restarted = true;
                }
                None => break None,
            }
        };

        let Some((xt, ft, t)) = accepted else {
            // No measurable increase along the gradient itself: function
            // values are at floating-point resolution here.
            break;
        };
        x = xt;
        fx = ft;
        step0 = (2.0 * t).clamp(1e-3, 2.0);

        let g_new = fd_gradient(&f, &x, h)?;
        let beta = if iterations % RESTART_PERIOD == 0 {
            0.0
        } else {
            let g2 = dot(&g, &g);
            if g2 > 0.0 {
                let mut num = 0.0;
                for i in 0..DIM {
                    num += g_new[i] * (g_new[i] - g[i]);
                }
                (num / g2).max(0.0)
            } else {
                0.0
            }
        };
        for i in 0..DIM {
            d[i] = g_new[i] + beta * d[i];
        }
        g = g_new;
    }

    // Newton refinement on the finite-difference gradient system. The
    // Hessian is shifted Levenberg-style because optima may sit on flat
    // manifolds (degenerate directions) where a raw Newton step explodes.
    let mut gnorm = norm(&g);
    let mut polish = 0;
    while gnorm > settings.tolerance && gnorm < 1e-3 && polish < 5 {
        polish += 1;
        let hess = fd_hessian(&f, &x, fx, 1e-4)?;
        let scale = hess.norm().max(1.0);
        let rhs = SVector::<f64, DIM>::from_column_slice(&g);
        let mut mu = 1e-7 * scale;
        let mut improved = false;
        for _ in 0..5 {
            // Maximization: the Hessian is negative (semi)definite near the
            // optimum, so shift by −μI to make it definitely invertible.
            let shifted = hess - SMatrix::<f64, DIM, DIM>::identity() * mu;
            let Some(p) = shifted.lu().solve(&(-rhs)) else {
                mu *= 10.0;
                continue;
            };
            let mut xt = x;
            for i in 0..DIM {
                xt[i] += p[i];
            }
            let gt = fd_gradient(&f, &xt, h)?;
            let ft = eval(&f, &xt)?;
            if norm(&gt) < gnorm && ft >= fx - 1e-10 * (1.0 + fx.abs()) {
                x = xt;
                fx = ft;
                g = gt;
                gnorm = norm(&g);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }

    Ok(CgResult { point: x, value: fx, gradient_norm: norm(&g), iterations })
}

fn sample_start(rng: &mut impl Rng) -> [f64; DIM] {
    let mut x = [0.0; DIM];
    for xi in x.iter_mut().take(4) {
        *xi = rng.random_range(0.0..PI);
    }
    for xi in x.iter_mut().skip(4) {
        *xi = rng.random_range(0.0..2.0 * PI);
    }
    x
}

/// Runs CG from `settings.sample_count` uniform starts and returns the best
/// stationary point (ties broken by start index, so the reduction is
/// order-independent).
fn multistart<F>(
    state: &SchmidtState,
    settings: &OptimizerSettings,
    f: &F,
) -> Result<CgResult, OptimizeError>
where
    F: Fn(&[f64; DIM]) -> f64 + Sync,
{
    settings.validate()?;
    let stream_seed = settings.seed ^ state.ratio().to_bits().rotate_left(17);
    let results: Result<Vec<CgResult>, OptimizeError> = (0..settings.sample_count)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng::stream(stream_seed, j as u64);
            cg_optimize(f, sample_start(&mut rng), settings)
        })
        .collect();
    let results = results?;
    let mut best = results[0];
    for r in &results[1..] {
        if r.value > best.value {
            best = *r;
        }
    }
    Ok(best)
}

fn record_from_point(
    state: &SchmidtState,
    point: &[f64; DIM],
    k: Option<ExponentQuad>,
    objective: Objective,
) -> OptimumRecord {
    let config = MeasurementConfig::from_angles(point);
    let report = ch_q(state, &config);
    OptimumRecord { ratio: state.ratio(), config, k, report, objective }
}

/// The CH violation `q` for raw angle parameters `[φ₁..φ₄, ν₁..ν₄]`;
/// the maximization objective behind [`max_violation`].
pub fn q_objective(state: &SchmidtState, x: &[f64; DIM]) -> f64 {
    q_and_marginal_sum(state, x).0
}

/// The quantity [`min_eta`] minimizes: `η_crit` where the configuration
/// violates, else the penalty `1 + |q|` (continuous across `q = 0`, flowing
/// toward violating regions).
pub fn eta_objective(state: &SchmidtState, x: &[f64; DIM]) -> f64 {
    let (q, s) = q_and_marginal_sum(state, x);
    if q > 0.0 {
        s / (q + s)
    } else {
        1.0 + q.abs()
    }
}

/// Maximal CH violation for `state` over all eight setting parameters.
pub fn max_violation(
    state: &SchmidtState,
    settings: &OptimizerSettings,
) -> Result<OptimumRecord, OptimizeError> {
    let f = |x: &[f64; DIM]| q_objective(state, x);
    let best = multistart(state, settings, &f)?;
    Ok(record_from_point(state, &best.point, None, Objective::MaxQ))
}

/// Minimal threshold efficiency for `state` over all eight setting
/// parameters. Non-violating regions are penalized with `1 + |Q|` so the
/// search flows toward violation; the penalty joins `η_crit → 1` continuously
/// at `Q = 0`.
pub fn min_eta(
    state: &SchmidtState,
    settings: &OptimizerSettings,
) -> Result<OptimumRecord, OptimizeError> {
    let f = |x: &[f64; DIM]| -eta_objective(state, x);
    let best = multistart(state, settings, &f)?;
    if best.value <= -1.0 {
        return Err(OptimizeError::NoViolationFound);
    }
    Ok(record_from_point(state, &best.point, None, Objective::MinEta))
}

/// `(η_crit, q)` for one exponent quad, evaluated from a precomputed
/// per-exponent weight table. All arithmetic is real because the exponent
/// bases have ν = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
struct QuadScore {
    eta: Option<f64>,
    q: f64,
}

fn score_quad(state: &SchmidtState, table: &[(f64, f64)], k: [u32; 4]) -> QuadScore {
    let (a, b) = (state.alpha(), state.beta());
    let (s1, c1) = table[k[0] as usize];
    let (s2, c2) = table[k[1] as usize];
    let (s3, c3) = table[k[2] as usize];
    let (s4, c4) = table[k[3] as usize];
    let sq = |x: f64| x * x;
    let p23 = sq(a * s2 * s3 - b * c2 * c3);
    let p1t3 = sq(-a * c1 * s3 + b * s1 * c3);
    let p14 = sq(a * s1 * s4 - b * c1 * c4);
    let p2t4 = sq(a * s2 * c4 - b * c2 * s4);
    let q = p23 - p1t3 - p14 - p2t4;
    let m = a * a * (s2 * s2 + s3 * s3) + b * b * (c2 * c2 + c3 * c3);
    let eta = if q > 0.0 { Some(m / (q + m)) } else { None };
    QuadScore { eta, q }
}

/// Strict "candidate beats incumbent": lower `η_crit` first (violating beats
/// non-violating), then higher `q`, then lexicographically smaller quad.
fn quad_improves(cand: &([u32; 4], QuadScore), inc: &([u32; 4], QuadScore)) -> bool {
    let order = match (cand.1.eta, inc.1.eta) {
        (Some(a), Some(b)) => a.partial_cmp(&b).unwrap(),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    };
    match order {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => match cand.1.q.partial_cmp(&inc.1.q).unwrap() {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => cand.0 < inc.0,
        },
    }
}

fn weight_table(state: &SchmidtState, k_max: u32) -> Vec<(f64, f64)> {
    (0..=k_max).map(|k| exponent_weights(state, k.max(1))).collect()
}

/// Exhaustive scan of `(k₁..k₄) ∈ [1, k_max]⁴` minimizing `η_crit`.
pub fn exhaustive_k_scan(state: &SchmidtState, k_max: u32) -> Result<ExponentQuad, StateError> {
    if state.is_degenerate() {
        return Err(StateError::DegenerateState);
    }
    let table = weight_table(state, k_max);
    let per_k1: Vec<([u32; 4], QuadScore)> = (1..=k_max)
        .into_par_iter()
        .map(|k1| {
            let mut best: Option<([u32; 4], QuadScore)> = None;
            for k2 in 1..=k_max {
                for k3 in 1..=k_max {
                    for k4 in 1..=k_max {
                        let quad = [k1, k2, k3, k4];
                        let cand = (quad, score_quad(state, &table, quad));
                        if best.is_none_or(|inc| quad_improves(&cand, &inc)) {
                            best = Some(cand);
                        }
                    }
                }
            }
            best.expect("k_max >= 1")
        })
        .collect();
    let mut best = per_k1[0];
    for cand in &per_k1[1..] {
        if quad_improves(cand, &best) {
            best = *cand;
        }
    }
    Ok(ExponentQuad::with_max(best.0[0], best.0[1], best.0[2], best.0[3], k_max)
        .expect("scan stays in bounds"))
}

/// Staged search for the exponent quad minimizing `η_crit`: exhaustive
/// enumeration up to `coarse_kmax`, then coordinate-wise hill climbing with
/// doubling offsets and bisection refinement up to `full_kmax`.
pub fn k_search(
    state: &SchmidtState,
    search: &SearchSettings,
) -> Result<OptimumRecord, StateError> {
    if search.coarse_kmax < 1 || search.coarse_kmax > search.full_kmax {
        return Err(StateError::InvalidExponents(format!(
            "search bounds need 1 ≤ coarse_kmax ≤ full_kmax, got {} and {}",
            search.coarse_kmax, search.full_kmax
        )));
    }
    let coarse = exhaustive_k_scan(state, search.coarse_kmax)?;
    let table = weight_table(state, search.full_kmax);
    let kmax = search.full_kmax;

    let mut cur = coarse.values();
    let mut cur_score = score_quad(state, &table, cur);
    for _ in 0..search.refine_rounds {
        for coord in 0..4 {
            // Doubling fan of candidate values for this coordinate.
            let mut winner_offset = 0i64;
            let mut step = 1i64;
            let mut offsets = vec![0i64];
            while step <= kmax as i64 {
                offsets.push(step);
                offsets.push(-step);
                step *= 2;
            }
            for &off in &offsets {
                let v = (cur[coord] as i64 + off).clamp(1, kmax as i64) as u32;
                if v == cur[coord] {
                    continue;
                }
                let mut quad = cur;
                quad[coord] = v;
                let cand = (quad, score_quad(state, &table, quad));
                if quad_improves(&cand, &(cur, cur_score)) {
                    cur = quad;
                    cur_score = cand.1;
                    winner_offset = off;
                }
            }
            // Bisection refinement around the winning offset.
            let mut half = winner_offset.abs() / 2;
            while half >= 1 {
                for sign in [-1i64, 1] {
                    let v = (cur[coord] as i64 + sign * half).clamp(1, kmax as i64) as u32;
                    if v == cur[coord] {
                        continue;
                    }
                    let mut quad = cur;
                    quad[coord] = v;
                    let cand = (quad, score_quad(state, &table, quad));
                    if quad_improves(&cand, &(cur, cur_score)) {
                        cur = quad;
                        cur_score = cand.1;
                    }
                }
                half /= 2;
            }
        }
    }

    let quad = ExponentQuad::with_max(cur[0], cur[1], cur[2], cur[3], kmax)
        .expect("refinement stays in bounds");
    let config = MeasurementConfig::for_exponents(state, &quad)?;
    let report = ch_q(state, &config);
    Ok(OptimumRecord {
        ratio: state.ratio(),
        config,
        k: Some(quad),
        report,
        objective: Objective::MinEta,
    })
}

fn fixed_record(
    state: &SchmidtState,
    strategy: &Strategy,
) -> Result<OptimumRecord, StateError> {
    let (config, k) = match strategy {
        Strategy::Hardy => (MeasurementConfig::hardy(state)?, None),
        Strategy::Nm { n, m } => (
            MeasurementConfig::for_nm(state, *n, *m)?,
            Some(ExponentQuad::new(*n, *m, *m, *n)?),
        ),
        Strategy::K(quad) => (MeasurementConfig::for_exponents(state, quad)?, Some(*quad)),
        _ => unreachable!("fixed_record only handles fixed bases"),
    };
    let report = ch_q(state, &config);
    Ok(OptimumRecord {
        ratio: state.ratio(),
        config,
        k,
        report,
        objective: Objective::MaxQ,
    })
}

/// Runs `strategy` at every ratio; one record per ratio, in grid order.
/// Deterministic for a given seed.
pub fn sweep(
    ratios: &[f64],
    strategy: &Strategy,
    settings: &SweepSettings,
) -> Result<Vec<OptimumRecord>, CrateError> {
    for &r in ratios {
        if !(r.is_finite() && r > 0.0 && r <= 1.0) {
            return Err(CrateError::RatioOutOfRange(r));
        }
    }
    match strategy {
        Strategy::Hardy | Strategy::Nm { .. } | Strategy::K(_) => ratios
            .par_iter()
            .map(|&r| {
                let state = SchmidtState::from_ratio(r)?;
                Ok(fixed_record(&state, strategy)?)
            })
            .collect(),
        Strategy::KSearch => ratios
            .iter()
            .map(|&r| {
                let state = SchmidtState::from_ratio(r)?;
                Ok(k_search(&state, &settings.search)?)
            })
            .collect(),
        Strategy::MaxQ => ratios
            .iter()
            .map(|&r| {
                let state = SchmidtState::from_ratio(r)?;
                Ok(max_violation(&state, &settings.optimizer)?)
            })
            .collect(),
        Strategy::MinEta => ratios
            .iter()
            .map(|&r| {
                let state = SchmidtState::from_ratio(r)?;
                Ok(min_eta(&state, &settings.optimizer)?)
            })
            .collect(),
    }
}
