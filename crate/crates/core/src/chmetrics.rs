//! CH-inequality metrics: joint and marginal detection probabilities, the
//! violation `Q`, the efficiency-corrected margin, and the threshold
//! detection efficiency `η_crit`.
//!
//! With settings 1, 2 on particle 1 and settings 3, 4 on particle 2,
//!
//! `Q = P(φ₂,φ₃) − P(φ̃₁,φ₃) − P(φ₁,φ₄) − P(φ₂,φ̃₄)`
//!
//! where a tilde selects the orthogonal (`u`) projector. Positive `Q` means
//! the CH inequality is violated, and the efficiency-corrected inequality can
//! still be violated for detector efficiencies above
//! `η_crit = (P(φ₂)+P(φ₃)) / (Q + P(φ₂)+P(φ₃))`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::states::{MeasurementConfig, MeasurementSetting, SchmidtState, StateError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("detection efficiency must lie in (0, 1], got {0}")]
    InvalidEfficiency(f64),
}

/// The four CH joint probabilities, the two marginals entering the
/// efficiency correction, the violation `q`, and `eta_crit` (`None` when
/// `q ≤ 0`: no efficiency makes a non-violating configuration conclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub p23: f64,
    pub p1t3: f64,
    pub p14: f64,
    pub p2t4: f64,
    pub m2: f64,
    pub m3: f64,
    pub q: f64,
    pub eta_crit: Option<f64>,
}

/// Reduced single-qubit density matrix of a Schmidt state: `diag(α², β²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    weights: [f64; 2],
}

impl ReducedState {
    pub fn of(state: &SchmidtState) -> Self {
        Self {
            weights: [state.alpha() * state.alpha(), state.beta() * state.beta()],
        }
    }

    pub fn trace(&self) -> f64 {
        self.weights[0] + self.weights[1]
    }

    pub fn diagonal(&self) -> [f64; 2] {
        self.weights
    }

    /// `tr(ρ |v⟩⟨v|)`, evaluated from the projector entries. Serves as the
    /// independent route for checking [`marginal_probability`].
    pub fn expectation(&self, setting: &MeasurementSetting) -> f64 {
        let (v, _) = setting.basis_vectors();
        self.weights[0] * v[0].norm_sqr() + self.weights[1] * v[1].norm_sqr()
    }
}

/// Per-setting amplitudes of the `v` and `u` basis vectors, in the layout the
/// probability kernels consume.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SettingAmps {
    pub v: [Complex64; 2],
    pub u: [Complex64; 2],
}

impl SettingAmps {
    pub(crate) fn of(setting: &MeasurementSetting) -> Self {
        let (v, u) = setting.basis_vectors();
        Self { v, u }
    }

    /// Amplitudes from raw `(φ, ν)` without constructing a setting; used by
    /// the optimizer's objective evaluations.
    pub(crate) fn from_raw(phi: f64, nu: f64) -> Self {
        let (s, c) = phi.sin_cos();
        let phase = Complex64::from_polar(1.0, nu);
        Self {
            v: [Complex64::new(s, 0.0), phase * c],
            u: [Complex64::new(c, 0.0), -phase * s],
        }
    }
}

/// `|⟨w_A ⊗ w_B|Ψ⟩|²` for one side's `w = v` or `u` per flip flag.
#[inline]
pub(crate) fn joint_prob_amps(
    state: &SchmidtState,
    a: &SettingAmps,
    flip_a: bool,
    b: &SettingAmps,
    flip_b: bool,
) -> f64 {
    let wa = if flip_a { &a.u } else { &a.v };
    let wb = if flip_b { &b.u } else { &b.v };
    // |conj(z)| = |z|, so the conjugations in ⟨w|Ψ⟩ drop out of the modulus.
    let amp = state.alpha() * wa[0] * wb[0] + state.beta() * wa[1] * wb[1];
    amp.norm_sqr()
}

/// Joint detection probability for settings `a` (particle 1) and `b`
/// (particle 2); a flip selects the orthogonal projector on that side.
pub fn joint_probability(
    state: &SchmidtState,
    a: &MeasurementSetting,
    flip_a: bool,
    b: &MeasurementSetting,
    flip_b: bool,
) -> f64 {
    joint_prob_amps(state, &SettingAmps::of(a), flip_a, &SettingAmps::of(b), flip_b)
}

/// Single-side detection probability `α² sin²φ + β² cos²φ` (ν cancels).
pub fn marginal_probability(state: &SchmidtState, setting: &MeasurementSetting) -> f64 {
    let (s, c) = setting.phi().sin_cos();
    let (a, b) = (state.alpha(), state.beta());
    a * a * s * s + b * b * c * c
}

/// `(q, m2 + m3)` from per-setting amplitudes; the shared kernel behind
/// [`ch_q`] and the optimizer objectives.
#[inline]
pub(crate) fn q_terms(state: &SchmidtState, amps: &[SettingAmps; 4]) -> [f64; 4] {
    [
        joint_prob_amps(state, &amps[1], false, &amps[2], false),
        joint_prob_amps(state, &amps[0], true, &amps[2], false),
        joint_prob_amps(state, &amps[0], false, &amps[3], false),
        joint_prob_amps(state, &amps[1], false, &amps[3], true),
    ]
}

#[inline]
pub(crate) fn marginal_from_amps(state: &SchmidtState, amps: &SettingAmps) -> f64 {
    let (a, b) = (state.alpha(), state.beta());
    a * a * amps.v[0].norm_sqr() + b * b * amps.v[1].norm_sqr()
}

/// Fast path for the optimizer: `(q, m2 + m3)` straight from the raw angle
/// vector `[φ₁..φ₄, ν₁..ν₄]`.
#[inline]
pub(crate) fn q_and_marginal_sum(state: &SchmidtState, x: &[f64; 8]) -> (f64, f64) {
    let amps = [
        SettingAmps::from_raw(x[0], x[4]),
        SettingAmps::from_raw(x[1], x[5]),
        SettingAmps::from_raw(x[2], x[6]),
        SettingAmps::from_raw(x[3], x[7]),
    ];
    let [p23, p1t3, p14, p2t4] = q_terms(state, &amps);
    let q = p23 - p1t3 - p14 - p2t4;
    let s = marginal_from_amps(state, &amps[1]) + marginal_from_amps(state, &amps[2]);
    (q, s)
}

fn projector(w: &[Complex64; 2]) -> Matrix2<Complex64> {
    Matrix2::new(
        w[0] * w[0].conj(),
        w[0] * w[1].conj(),
        w[1] * w[0].conj(),
        w[1] * w[1].conj(),
    )
}

/// The CH operator `(P_{φ₂} − P_{φ̃₁}) ⊗ P_{φ₃} − P_{φ₁} ⊗ P_{φ₄} −
/// P_{φ₂} ⊗ P_{φ̃₄}` assembled in the ordered product basis
/// `(|++⟩, |+−⟩, |−+⟩, |−−⟩)`.
pub fn ch_operator(config: &MeasurementConfig) -> Matrix4<Complex64> {
    let amps: Vec<SettingAmps> = config.settings().iter().map(SettingAmps::of).collect();
    let p1 = projector(&amps[0].v);
    let p1t = projector(&amps[0].u);
    let p2 = projector(&amps[1].v);
    let p3 = projector(&amps[2].v);
    let p4 = projector(&amps[3].v);
    let p4t = projector(&amps[3].u);
    (p2 - p1t).kronecker(&p3) - p1.kronecker(&p4) - p2.kronecker(&p4t)
}

/// `⟨Ψ|Î_CH|Ψ⟩` through the explicitly assembled operator; the independent
/// route against which the probability-based `q` is checked.
pub fn ch_expectation_operator(state: &SchmidtState, config: &MeasurementConfig) -> f64 {
    let op = ch_operator(config);
    let psi = Vector4::new(
        Complex64::new(state.alpha(), 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(state.beta(), 0.0),
    );
    (psi.adjoint() * op * psi)[(0, 0)].re
}

/// Largest eigenvalue of the assembled CH operator for `config`.
pub fn ch_lambda_max(config: &MeasurementConfig) -> f64 {
    let eigen = ch_operator(config).symmetric_eigen();
    eigen.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Full violation report for `(state, config)`.
///
/// `q` is the four-probability combination; the operator expectation is
/// evaluated alongside and the two routes are asserted to agree in debug
/// builds.
pub fn ch_q(state: &SchmidtState, config: &MeasurementConfig) -> ViolationReport {
    let amps = [
        SettingAmps::of(config.setting(0)),
        SettingAmps::of(config.setting(1)),
        SettingAmps::of(config.setting(2)),
        SettingAmps::of(config.setting(3)),
    ];
    let [p23, p1t3, p14, p2t4] = q_terms(state, &amps);
    let q = p23 - p1t3 - p14 - p2t4;
    debug_assert!(
        (q - ch_expectation_operator(state, config)).abs() < 1e-12,
        "probability and operator routes disagree"
    );
    let m2 = marginal_from_amps(state, &amps[1]);
    let m3 = marginal_from_amps(state, &amps[2]);
    let eta_crit = if q > 0.0 { Some((m2 + m3) / (q + m2 + m3)) } else { None };
    ViolationReport { p23, p1t3, p14, p2t4, m2, m3, q, eta_crit }
}

/// Closed-form Hardy fraction `(αβ(α−β)/(1−αβ))²`.
pub fn hardy_fraction(state: &SchmidtState) -> Result<f64, StateError> {
    if state.is_degenerate() {
        return Err(StateError::DegenerateState);
    }
    let (a, b) = (state.alpha(), state.beta());
    let f = a * b * (a - b) / (1.0 - a * b);
    Ok(f * f)
}

/// Threshold detection efficiency for `(state, config)`; `None` when the
/// configuration does not violate.
pub fn eta_crit(state: &SchmidtState, config: &MeasurementConfig) -> Option<f64> {
    ch_q(state, config).eta_crit
}

/// Margin of the efficiency-corrected inequality,
/// `Q − ((1−η)/η)(P(φ₂)+P(φ₃))`; positive iff the inequality is violated at
/// detection efficiency `eta`.
pub fn eberhard_margin(
    state: &SchmidtState,
    config: &MeasurementConfig,
    eta: f64,
) -> Result<f64, MetricsError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(MetricsError::InvalidEfficiency(eta));
    }
    let report = ch_q(state, config);
    Ok(report.q - (1.0 - eta) / eta * (report.m2 + report.m3))
}
