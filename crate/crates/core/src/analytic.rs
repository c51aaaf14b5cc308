//! Closed-form eigenvalue analysis of the efficiency-weighted CH operator.
//!
//! In the computational (Schmidt) basis, with rank-one projectors onto the
//! first basis state on each side and real rotations parameterized by
//! `√s = cosφ_a`, `√t = cosφ_b`, the operator
//!
//! `B = η²(Π_{a₁b₁} + Π_{a₁b₀} + Π_{a₀b₁} − Π_{a₀b₀}) − η(Π_{a₁} + Π_{b₁})`
//!
//! has nonpositive spectrum exactly when no state violates the
//! efficiency-corrected CH inequality at detection efficiency `η`. Its
//! characteristic polynomial is quartic in `λ` with coefficients polynomial
//! in `(η, s, t)`; at `s = t` one eigenvalue is the singlet value
//! `λ₄ = η²t − η` and the remaining three solve a cubic with a closed
//! trigonometric solution. Setting the implicit `t`-derivative of the cubic
//! to zero reduces the optimal rotation to a quartic in `t`, and the top
//! eigenvector of `B` at the optimum carries the optimal two-qubit state.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::states::SchmidtState;

/// Detector efficiency below which no state admits a loophole-free test.
pub const ETA_FLOOR: f64 = 2.0 / 3.0;

/// Slack for treating an arccos argument marginally outside `[−1, 1]` as
/// roundoff rather than a regime change.
pub const CLAMP_WINDOW: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("arccos argument {0} leaves the three-real-root regime")]
    ComplexRootRegime(f64),
    #[error("stationary expression is singular at eta = 1")]
    SingularEfficiency,
    #[error("no real quartic root lies in [0, 1] for eta = {0}")]
    NoPhysicalRoot(f64),
    #[error("invalid analytic input: {0}")]
    InvalidInput(String),
}

/// Operator parameters: efficiency `η ∈ (0, 1]` and squared rotation
/// cosines `s, t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPoint {
    eta: f64,
    s: f64,
    t: f64,
}

impl AnalyticPoint {
    pub fn new(eta: f64, s: f64, t: f64) -> Result<Self, AnalyticError> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(AnalyticError::InvalidInput(format!("eta {eta} outside (0, 1]")));
        }
        if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
            return Err(AnalyticError::InvalidInput(format!("(s, t) = ({s}, {t}) outside [0, 1]²")));
        }
        Ok(Self { eta, s, t })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Eigenvalues at `s = t`: the three cubic roots sorted descending plus the
/// singlet eigenvalue `λ₄ = η²t − η ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSet {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

/// Rotated rank-one projector `U† diag(1,0) U` for a rotation with squared
/// off-diagonal `s`.
fn rotated_projector(s: f64) -> Matrix2<f64> {
    let c = (s * (1.0 - s)).sqrt();
    Matrix2::new(1.0 - s, c, c, s)
}

/// Assembles the efficiency-weighted operator in the ordered product basis
/// `(|++⟩, |+−⟩, |−+⟩, |−−⟩)`.
pub fn build_b(point: &AnalyticPoint) -> Matrix4<f64> {
    let eta = point.eta;
    let pa1 = Matrix2::new(1.0, 0.0, 0.0, 0.0);
    let pb1 = pa1;
    let pa0 = rotated_projector(point.s);
    let pb0 = rotated_projector(point.t);
    let id = Matrix2::identity();
    let ch = pa1.kronecker(&pb1) + pa1.kronecker(&pb0) + pa0.kronecker(&pb1)
        - pa0.kronecker(&pb0);
    eta * eta * ch - eta * (pa1.kronecker(&id) + id.kronecker(&pb1))
}

/// Coefficients `[c₀, c₁, c₂, c₃, c₄]` (ascending powers of λ) of the
/// characteristic quartic of `B`.
pub fn char_quartic(point: &AnalyticPoint) -> [f64; 5] {
    let (eta, s, t) = (point.eta, point.s, point.t);
    let e2 = eta * eta;
    let e3 = e2 * eta;
    let e5 = e2 * e3;
    let st = s * t;
    let c0 = st * e5 * (-st * e3 + (s + t) * eta * (2.0 * eta - 1.0) - 3.0 * eta + 2.0);
    let c1 = 2.0 * (eta - 1.0) * e3 * (st * (e2 - eta) - 1.0);
    let c2 = -e2 * (4.0 * eta - 5.0);
    let c3 = -2.0 * eta * (eta - 2.0);
    [c0, c1, c2, c3, 1.0]
}

/// Characteristic-quartic residual at `lambda`, scaled by the summed term
/// magnitudes so it reads as a relative backward error.
pub fn quartic_residual(point: &AnalyticPoint, lambda: f64) -> f64 {
    let coeffs = char_quartic(point);
    let scale: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| (c * lambda.powi(i as i32)).abs())
        .sum::<f64>()
        .max(1.0);
    poly_eval(&coeffs, lambda).abs() / scale
}

/// Reduced-cubic residual at `lambda` (absolute, monic normalization).
pub fn cubic_residual(eta: f64, t: f64, lambda: f64) -> f64 {
    let b = reduced_cubic_coeffs(eta, t);
    poly_eval(&[b[0], b[1], b[2], 1.0], lambda).abs()
}

/// Polynomial value at `x` for ascending coefficients.
fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Compensated Horner evaluation: error-free transformations make the result
/// behave as if computed in twice the working precision. Needed when Newton
/// polishing nearly-multiple quartic roots, where the plain residual drowns
/// in rounding noise.
fn poly_eval_compensated(coeffs: &[f64], x: f64) -> f64 {
    let mut p = *coeffs.last().expect("nonempty");
    let mut e = 0.0;
    for &c in coeffs.iter().rev().skip(1) {
        let ph = p * x;
        let pl = p.mul_add(x, -ph);
        let s = ph + c;
        let z = s - ph;
        let sl = (ph - (s - z)) + (c - z);
        p = s;
        e = e * x + (pl + sl);
    }
    p + e
}

fn poly_derivative_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c)
}

/// Monic cubic (ascending `[b₀, b₁, b₂]`, leading 1) carrying the three
/// non-singlet eigenvalues at `s = t`.
pub fn reduced_cubic_coeffs(eta: f64, t: f64) -> [f64; 3] {
    let e2 = eta * eta;
    let b2 = e2 * (t - 2.0) + 3.0 * eta;
    let b1 = e2 * (e2 * (t * t - 2.0 * t) + 2.0 * eta * (t - 1.0) + 2.0);
    let b0 = e2 * e2 * (e2 * t * t * t - 3.0 * eta * t * t + 2.0 * t * t);
    [b0, b1, b2]
}

/// Three real roots of the reduced cubic through the trigonometric method,
/// sorted descending, together with the singlet eigenvalue.
///
/// The arccos argument is clamped when within [`CLAMP_WINDOW`] of `±1`;
/// beyond that the three-real-root regime is gone and the call fails with
/// [`AnalyticError::ComplexRootRegime`].
pub fn reduced_cubic_roots(eta: f64, t: f64) -> Result<EigenSet, AnalyticError> {
    if !(eta > 0.0 && eta <= 1.0) || !(0.0..=1.0).contains(&t) {
        return Err(AnalyticError::InvalidInput(format!(
            "(eta, t) = ({eta}, {t}) outside (0, 1] × [0, 1]"
        )));
    }
    let e2 = eta * eta;
    let offset = -eta * (3.0 + (t - 2.0) * eta) / 3.0;
    let radicand = 3.0 - 6.0 * eta + (4.0 + 2.0 * t - 2.0 * t * t) * e2;
    let amplitude = 2.0 / 3.0 * eta * radicand.sqrt();
    let numerator = eta
        * (9.0 - 18.0 * eta + 8.0 * e2 - 10.0 * t * t * t * e2
            + 3.0 * t * (3.0 - 6.0 * eta + 2.0 * e2)
            - 3.0 * t * t * (9.0 - 18.0 * eta + 4.0 * e2));
    let denominator = radicand.powi(3).sqrt();
    let mut arg = numerator / denominator;
    if arg.abs() > 1.0 + CLAMP_WINDOW {
        return Err(AnalyticError::ComplexRootRegime(arg));
    }
    arg = arg.clamp(-1.0, 1.0);
    let theta = arg.acos();
    let mut roots = [0.0; 3];
    for (k, root) in roots.iter_mut().enumerate() {
        let shifted = (theta + 2.0 * std::f64::consts::PI * k as f64) / 3.0;
        *root = offset + amplitude * shifted.cos();
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(EigenSet {
        lambda1: roots[0],
        lambda2: roots[1],
        lambda3: roots[2],
        lambda4: e2 * t - eta,
    })
}

/// Stationary eigenvalue `λ = η(2t²η³ − 3tη(2η−1) + 3η − 2) / (2(η−1)²)`.
/// Singular at `η = 1`.
pub fn stationary_lambda(eta: f64, t: f64) -> Result<f64, AnalyticError> {
    if eta == 1.0 {
        return Err(AnalyticError::SingularEfficiency);
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(AnalyticError::InvalidInput(format!("eta {eta} outside (0, 1)")));
    }
    let e2 = eta * eta;
    let num = 2.0 * t * t * e2 * eta - 3.0 * t * eta * (2.0 * eta - 1.0) + 3.0 * eta - 2.0;
    Ok(eta * num / (2.0 * (eta - 1.0) * (eta - 1.0)))
}

/// Coefficients `[a₀..a₄]` (ascending) of the quartic in `t` whose roots are
/// the stationary rotations.
pub fn t_quartic_coeffs(eta: f64) -> [f64; 5] {
    let e2 = eta * eta;
    let e4 = e2 * e2;
    let a4 = 4.0 * e4 * e2;
    let a3 = 4.0 * e4 * (2.0 * e2 - 10.0 * eta + 5.0);
    let a2 = e2 * (4.0 * e4 - 48.0 * e2 * eta + 156.0 * e2 - 132.0 * eta + 33.0);
    let two_eta_m1 = 2.0 * eta - 1.0;
    let a1 = 2.0 * two_eta_m1 * two_eta_m1 * (5.0 * e2 - 16.0 * eta + 8.0);
    let a0 = -(eta - 2.0) * two_eta_m1 * two_eta_m1 * (3.0 * eta - 2.0);
    [a0, a1, a2, a3, a4]
}

/// Real roots of a quartic via companion-matrix eigenvalues.
///
/// Eigenvalues within `1e-6` of each other are treated as a root cluster:
/// the cluster mean locates a multiple root far more accurately than its
/// members, and a multiplicity-aware Newton step sharpens it to full
/// precision.
fn quartic_real_roots(coeffs: &[f64; 5]) -> Vec<f64> {
    let a4 = coeffs[4];
    debug_assert!(a4 != 0.0);
    let c: Vec<f64> = coeffs[..4].iter().map(|&a| a / a4).collect();
    let mut companion = Matrix4::<f64>::zeros();
    for i in 0..3 {
        companion[(i + 1, i)] = 1.0;
    }
    for i in 0..4 {
        companion[(i, 3)] = -c[i];
    }
    let eigen = companion.complex_eigenvalues();
    let mut pending: Vec<nalgebra::Complex<f64>> = eigen.iter().cloned().collect();
    pending.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());

    let monic: Vec<f64> = c.iter().cloned().chain(std::iter::once(1.0)).collect();
    let mut roots = Vec::new();
    let mut i = 0;
    while i < pending.len() {
        let mut cluster = vec![pending[i]];
        let mut j = i + 1;
        while j < pending.len() && (pending[j] - pending[i]).norm() < 1e-6 * (1.0 + pending[i].norm())
        {
            cluster.push(pending[j]);
            j += 1;
        }
        let mean = cluster.iter().sum::<nalgebra::Complex<f64>>() / cluster.len() as f64;
        if mean.im.abs() <= 1e-8 * (1.0 + mean.re.abs()) {
            let mut x = mean.re;
            let mult = cluster.len() as f64;
            for _ in 0..12 {
                let p = poly_eval_compensated(&monic, x);
                let dp = poly_derivative_eval(&monic, x);
                if dp == 0.0 {
                    break;
                }
                let delta = mult * p / dp;
                x -= delta;
                if delta.abs() < 1e-17 * (1.0 + x.abs()) {
                    break;
                }
            }
            roots.push(x);
        }
        i = j;
    }
    roots
}

/// Residual of the stationarity condition `∂F/∂t = 0` (the implicit
/// `t`-derivative of the reduced cubic, a quadratic in `λ`) evaluated on the
/// top branch. Vanishes exactly at the stationary rotations of `λ₁(t)` and,
/// unlike the eliminated quartic, keeps a simple well-conditioned zero even
/// where the quartic root is double.
fn stationarity_residual(eta: f64, t: f64) -> Result<f64, AnalyticError> {
    let l = reduced_cubic_roots(eta, t)?.lambda1;
    let e2 = eta * eta;
    Ok(l * l
        + 2.0 * eta * (eta * (t - 1.0) + 1.0) * l
        + e2 * t * (3.0 * e2 * t - 6.0 * eta + 4.0))
}

/// The stationary rotation `t ∈ [0, 1]` maximizing the top eigenvalue, for
/// `η ∈ (2/3, 1]`.
pub fn optimal_t(eta: f64) -> Result<f64, AnalyticError> {
    if !(eta > ETA_FLOOR && eta <= 1.0) {
        return Err(AnalyticError::InvalidInput(format!("eta {eta} outside (2/3, 1]")));
    }
    let coeffs = t_quartic_coeffs(eta);
    let mut best: Option<(f64, f64)> = None;
    for root in quartic_real_roots(&coeffs) {
        if !(-1e-9..=1.0 + 1e-9).contains(&root) {
            continue;
        }
        let mut t = root.clamp(0.0, 1.0);
        // Newton on the stationarity residual; the quartic root alone carries
        // amplified coefficient noise near its double points.
        if let Ok(mut g) = stationarity_residual(eta, t) {
            for _ in 0..6 {
                let h = 1e-7;
                let (gp, gm) = match (
                    stationarity_residual(eta, (t + h).min(1.0)),
                    stationarity_residual(eta, (t - h).max(0.0)),
                ) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => break,
                };
                let dg = (gp - gm) / ((t + h).min(1.0) - (t - h).max(0.0));
                if dg == 0.0 {
                    break;
                }
                let tn = (t - g / dg).clamp(0.0, 1.0);
                let Ok(gn) = stationarity_residual(eta, tn) else { break };
                if gn.abs() >= g.abs() {
                    break;
                }
                t = tn;
                g = gn;
            }
        }
        let lambda1 = reduced_cubic_roots(eta, t)?.lambda1;
        let replace = match best {
            None => true,
            Some((tb, l)) => lambda1 > l || (lambda1 == l && t < tb),
        };
        if replace {
            best = Some((t, lambda1));
        }
    }
    best.map(|(t, _)| t).ok_or(AnalyticError::NoPhysicalRoot(eta))
}

/// Optimal rotation, top eigenvalue, and the optimal two-qubit state for a
/// given detection efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaOptimum {
    pub t: f64,
    pub lambda: f64,
    pub state: SchmidtState,
}

/// Composes [`optimal_t`] with [`reduced_cubic_roots`] and extracts the
/// optimal state from the top eigenvector of `B(η, t*, t*)`: the
/// eigenvector's 2×2 coefficient matrix is Schmidt-decomposed by SVD and the
/// singular values become the state amplitudes (smaller over larger, so the
/// ratio lies in (0, 1]).
pub fn max_violation_for_eta(eta: f64) -> Result<EtaOptimum, AnalyticError> {
    let t = optimal_t(eta)?;
    let lambda = reduced_cubic_roots(eta, t)?.lambda1;
    let point = AnalyticPoint::new(eta, t, t)?;
    let b = build_b(&point);
    let eigen = b.symmetric_eigen();
    let mut top = 0;
    for i in 1..4 {
        if eigen.eigenvalues[i] > eigen.eigenvalues[top] {
            top = i;
        }
    }
    let w = eigen.eigenvectors.column(top);
    let m = Matrix2::new(w[0], w[1], w[2], w[3]);
    let mut sv: Vec<f64> = m.singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let scale = (sv[0] * sv[0] + sv[1] * sv[1]).sqrt();
    let state = SchmidtState::new(sv[1] / scale, sv[0] / scale)
        .map_err(|e| AnalyticError::InvalidInput(e.to_string()))?;
    Ok(EtaOptimum { t, lambda, state })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eigenvalues(b: &Matrix4<f64>) -> Vec<f64> {
        let mut ev: Vec<f64> = b.symmetric_eigen().eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev
    }

    #[test]
    fn build_b_symmetric_and_nonpositive_when_aligned() {
        let p = AnalyticPoint::new(1.0, 0.0, 0.0).unwrap();
        let b = build_b(&p);
        assert!((b - b.transpose()).abs().max() < 1e-14);
        for ev in eigenvalues(&b) {
            assert!(ev <= 1e-12);
        }
    }

    #[test]
    fn build_b_top_eigenvalue_at_quantum_bound() {
        let p = AnalyticPoint::new(1.0, 0.5, 0.5).unwrap();
        let top = eigenvalues(&build_b(&p))[0];
        assert!((top - (0.5f64.sqrt() - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn quartic_vanishes_on_numeric_eigenvalues() {
        let p = AnalyticPoint::new(0.87, 0.31, 0.64).unwrap();
        let coeffs = char_quartic(&p);
        for ev in eigenvalues(&build_b(&p)) {
            let scale: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (c * ev.powi(i as i32)).abs())
                .sum::<f64>()
                .max(1.0);
            assert!(poly_eval(&coeffs, ev).abs() / scale < 1e-10);
        }
    }

    #[test]
    fn singlet_value_is_quartic_root_at_equal_rotations() {
        // With s = t, λ₄ = η²t − η divides the characteristic quartic.
        for &(eta, t) in &[(0.8, 0.25), (0.95, 0.7), (1.0, 0.5), (0.7, 0.0)] {
            let p = AnalyticPoint::new(eta, t, t).unwrap();
            let coeffs = char_quartic(&p);
            let lambda4 = eta * eta * t - eta;
            assert!(
                poly_eval(&coeffs, lambda4).abs() < 1e-12,
                "eta {eta} t {t}: residual {}",
                poly_eval(&coeffs, lambda4)
            );
        }
    }

    #[test]
    fn singlet_eigenvalue_at_equal_rotations() {
        let (eta, t) = (0.9, 0.3);
        let p = AnalyticPoint::new(eta, t, t).unwrap();
        let b = build_b(&p);
        let inv_sqrt2 = 0.5f64.sqrt();
        let singlet = nalgebra::Vector4::new(0.0, inv_sqrt2, -inv_sqrt2, 0.0);
        let image = b * singlet;
        let lambda4 = eta * eta * t - eta;
        assert!((image - lambda4 * singlet).norm() < 1e-12);
        assert!(lambda4 <= 0.0);
    }

    #[test]
    fn cubic_roots_reference_point() {
        let set = reduced_cubic_roots(1.0, 0.5).unwrap();
        assert!((set.lambda1 - (0.5f64.sqrt() - 0.5)).abs() < 1e-14);
        assert!((set.lambda4 + 0.5).abs() < 1e-15);
        // Roots satisfy the monic cubic.
        let coeffs = reduced_cubic_coeffs(1.0, 0.5);
        for root in [set.lambda1, set.lambda2, set.lambda3] {
            let all = [coeffs[0], coeffs[1], coeffs[2], 1.0];
            assert!(poly_eval(&all, root).abs() < 1e-9);
        }
    }

    #[test]
    fn cubic_roots_match_eigensolver() {
        let (eta, t) = (0.9, 0.3);
        let set = reduced_cubic_roots(eta, t).unwrap();
        let mut ours = vec![set.lambda1, set.lambda2, set.lambda3, set.lambda4];
        ours.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let p = AnalyticPoint::new(eta, t, t).unwrap();
        let numeric = eigenvalues(&build_b(&p));
        for (a, b) in ours.iter().zip(&numeric) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn stationary_lambda_boundary_and_singularity() {
        assert!(stationary_lambda(2.0 / 3.0, 0.0).unwrap().abs() < 1e-12);
        assert_eq!(stationary_lambda(1.0, 0.3), Err(AnalyticError::SingularEfficiency));
    }

    #[test]
    fn optimal_t_at_unit_efficiency_is_half() {
        // At η = 1 the quartic degenerates to (2t−1)²(t−1)²; the double root
        // must still come out exact.
        let t = optimal_t(1.0).unwrap();
        assert!((t - 0.5).abs() < 1e-10, "t = {t}");
    }

    #[test]
    fn t_quartic_constant_term_vanishes_at_floor() {
        let coeffs = t_quartic_coeffs(ETA_FLOOR);
        assert!(coeffs[0].abs() < 1e-12);
    }

    #[test]
    fn optimal_t_beats_grid() {
        let eta = 0.85;
        let t_star = optimal_t(eta).unwrap();
        let best = reduced_cubic_roots(eta, t_star).unwrap().lambda1;
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let l = reduced_cubic_roots(eta, t).unwrap().lambda1;
            assert!(best >= l - 1e-9, "t = {t}: {l} > {best}");
        }
    }

    #[test]
    fn stationary_lambda_consistent_at_optimum() {
        for &eta in &[0.7, 0.8, 0.9, 0.99] {
            let t = optimal_t(eta).unwrap();
            let from_cubic = reduced_cubic_roots(eta, t).unwrap().lambda1;
            let from_stationary = stationary_lambda(eta, t).unwrap();
            assert!(
                (from_cubic - from_stationary).abs() < 1e-9,
                "eta {eta}: {from_cubic} vs {from_stationary}"
            );
        }
    }

    #[test]
    fn max_violation_for_eta_endpoints() {
        let at_one = max_violation_for_eta(1.0).unwrap();
        assert!((at_one.lambda - (0.5f64.sqrt() - 0.5)).abs() < 1e-10);
        assert!((at_one.state.ratio() - 1.0).abs() < 1e-6);

        let near_floor = max_violation_for_eta(ETA_FLOOR + 1e-4).unwrap();
        assert!(near_floor.lambda > 0.0 && near_floor.lambda < 1e-3);
        assert!(near_floor.state.ratio() < 0.05);

        // Eigensolver-oracle value: the best-violating state at η = 0.828 is
        // partially entangled (only η → 1 pushes the ratio to 1).
        let mid = max_violation_for_eta(0.828).unwrap();
        assert!((mid.state.ratio() - 0.546_12).abs() < 1e-4, "ratio {}", mid.state.ratio());
        assert!((mid.t - 0.416_049).abs() < 1e-4);
    }

    #[test]
    fn lambda_is_monotone_in_eta() {
        let mut last = 0.0;
        for i in 1..=30 {
            let eta = ETA_FLOOR + (1.0 - ETA_FLOOR) * i as f64 / 30.0;
            let lambda = reduced_cubic_roots(eta, optimal_t(eta).unwrap()).unwrap().lambda1;
            assert!(lambda > last, "eta {eta}");
            last = lambda;
        }
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        assert!(AnalyticPoint::new(0.0, 0.5, 0.5).is_err());
        assert!(AnalyticPoint::new(0.9, -0.1, 0.5).is_err());
        assert!(optimal_t(ETA_FLOOR).is_err());
        assert!(optimal_t(0.5).is_err());
        assert!(reduced_cubic_roots(1.2, 0.5).is_err());
    }
}
