//! Schmidt-form two-qubit states and the measurement-basis families used in
//! CH-inequality tests.
//!
//! A pure two-qubit state is kept in Schmidt form `α|++⟩ + β|−−⟩` with real
//! nonnegative coefficients. Measurement settings are one-qubit bases
//! `v(φ,ν) = sinφ|+⟩ + e^{iν}cosφ|−⟩` together with the orthogonal vector
//! `u(φ,ν) = cosφ|+⟩ − e^{iν}sinφ|−⟩`. The named families (`hardy`,
//! `for_nm`, `for_exponents`) place the four settings of a CH test at
//! amplitudes that are powers of the Schmidt coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Default ceiling for the exponents of the generalized basis family.
pub const DEFAULT_K_MAX: u32 = 1024;

/// Normalization slack accepted by [`SchmidtState::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("ratio must be positive and finite, got {0}")]
    NonPositiveRatio(f64),
    #[error("state is degenerate (alpha or beta is zero)")]
    DegenerateState,
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("amplitudes ({0}, {1}) are not a normalized nonnegative pair")]
    NotNormalized(f64, f64),
}

/// Pure two-qubit state `α|++⟩ + β|−−⟩` with `α, β ≥ 0` and `α² + β² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchmidtState {
    alpha: f64,
    beta: f64,
}

impl SchmidtState {
    /// Builds a state from explicit amplitudes, checking nonnegativity and
    /// normalization to within [`NORM_TOLERANCE`].
    pub fn new(alpha: f64, beta: f64) -> Result<Self, StateError> {
        let norm2 = alpha * alpha + beta * beta;
        if !(alpha >= 0.0 && beta >= 0.0) || (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized(alpha, beta));
        }
        Ok(Self { alpha, beta })
    }

    /// Builds the normalized state with `α/β = ratio`.
    pub fn from_ratio(ratio: f64) -> Result<Self, StateError> {
        if !ratio.is_finite() || ratio <= 0.0 {
            return Err(StateError::NonPositiveRatio(ratio));
        }
        let beta = 1.0 / (1.0 + ratio * ratio).sqrt();
        Ok(Self { alpha: ratio * beta, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `α/β`. Panics when `β = 0`.
    pub fn ratio(&self) -> f64 {
        assert!(self.beta > 0.0, "ratio() undefined for beta = 0");
        self.alpha / self.beta
    }

    /// True when either amplitude vanishes, i.e. the state is a product state.
    pub fn is_degenerate(&self) -> bool {
        self.alpha == 0.0 || self.beta == 0.0
    }
}

/// One apparatus orientation `(φ, ν)`.
///
/// `φ` is stored canonically in `[0, π)` (so `sinφ ≥ 0`) and `ν` in `[0, 2π)`;
/// both reductions leave the measurement projectors unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    phi: f64,
    nu: f64,
}

impl MeasurementSetting {
    /// Canonicalizes the angles into `[0, π) × [0, 2π)`.
    ///
    /// `v(φ+π, ν) = −v(φ, ν)`, so the reduction is projector-preserving.
    pub fn new(phi: f64, nu: f64) -> Self {
        assert!(phi.is_finite() && nu.is_finite(), "angles must be finite");
        let mut phi = phi.rem_euclid(PI);
        if phi >= PI {
            phi = 0.0;
        }
        let mut nu = nu.rem_euclid(2.0 * PI);
        if nu >= 2.0 * PI {
            nu = 0.0;
        }
        Self { phi, nu }
    }

    /// Setting with `sinφ` and `cosφ` given separately; requires `sinφ ≥ 0`.
    /// The sign of `cos_phi` picks the quadrant within `[0, π)`.
    pub fn from_sin_cos(sin_phi: f64, cos_phi: f64, nu: f64) -> Self {
        debug_assert!(sin_phi >= 0.0);
        Self::new(sin_phi.atan2(cos_phi), nu)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// The orthonormal pair `(v, u)` in the ordered Schmidt basis `(|+⟩, |−⟩)`:
    /// `v = (sinφ, e^{iν}cosφ)` and `u = (cosφ, −e^{iν}sinφ)`.
    pub fn basis_vectors(&self) -> ([Complex64; 2], [Complex64; 2]) {
        let (s, c) = self.phi.sin_cos();
        let phase = Complex64::from_polar(1.0, self.nu);
        let v = [Complex64::new(s, 0.0), phase * c];
        let u = [Complex64::new(c, 0.0), -phase * s];
        (v, u)
    }
}

/// The four orientations of a CH test. Settings 1 and 2 act on particle 1,
/// settings 3 and 4 on particle 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementConfig {
    settings: [MeasurementSetting; 4],
}

impl MeasurementConfig {
    pub fn new(settings: [MeasurementSetting; 4]) -> Self {
        Self { settings }
    }

    pub fn settings(&self) -> &[MeasurementSetting; 4] {
        &self.settings
    }

    pub fn setting(&self, index: usize) -> &MeasurementSetting {
        &self.settings[index]
    }

    /// Config from raw angle parameters `[φ₁..φ₄, ν₁..ν₄]`, canonicalized.
    pub fn from_angles(x: &[f64; 8]) -> Self {
        Self {
            settings: [
                MeasurementSetting::new(x[0], x[4]),
                MeasurementSetting::new(x[1], x[5]),
                MeasurementSetting::new(x[2], x[6]),
                MeasurementSetting::new(x[3], x[7]),
            ],
        }
    }

    /// The canonical angle parameters `[φ₁..φ₄, ν₁..ν₄]`.
    pub fn angles(&self) -> [f64; 8] {
        let s = &self.settings;
        [
            s[0].phi, s[1].phi, s[2].phi, s[3].phi, s[0].nu, s[1].nu, s[2].nu, s[3].nu,
        ]
    }

    /// Hardy's bases for `state`: amplitudes `(√β, ∓√α)/√(α+β)` on settings
    /// 1 and 4 and `(√β³, ±√α³)/√(α³+β³)` on settings 2 and 3, all with ν = 0.
    /// With these settings three of the four CH joint probabilities vanish.
    pub fn hardy(state: &SchmidtState) -> Result<Self, StateError> {
        if state.is_degenerate() {
            return Err(StateError::DegenerateState);
        }
        let (a, b) = (state.alpha, state.beta);
        let d1 = (a + b).sqrt();
        let d3 = (a * a * a + b * b * b).sqrt();
        let (s1, c1) = (b.sqrt() / d1, a.sqrt() / d1);
        let (s3, c3) = ((b * b * b).sqrt() / d3, (a * a * a).sqrt() / d3);
        Ok(Self {
            settings: [
                MeasurementSetting::from_sin_cos(s1, -c1, 0.0),
                MeasurementSetting::from_sin_cos(s3, c3, 0.0),
                MeasurementSetting::from_sin_cos(s3, -c3, 0.0),
                MeasurementSetting::from_sin_cos(s1, c1, 0.0),
            ],
        })
    }

    /// Paired-exponent bases: settings 1 and 4 share exponent `n`, settings
    /// 2 and 3 share exponent `m`. Requires `n ≠ m`.
    pub fn for_nm(state: &SchmidtState, n: u32, m: u32) -> Result<Self, StateError> {
        if n == m {
            return Err(StateError::InvalidExponents(format!(
                "paired exponents must differ, got n = m = {n}"
            )));
        }
        let quad = ExponentQuad::new(n, m, m, n)?;
        Self::for_exponents(state, &quad)
    }

    /// Generalized bases with `sinφᵢ = β^{kᵢ/2}/√(α^{kᵢ}+β^{kᵢ})` and the
    /// cosine signs (−, +, −, +) on settings 1..4; all ν = 0.
    pub fn for_exponents(state: &SchmidtState, k: &ExponentQuad) -> Result<Self, StateError> {
        if state.is_degenerate() {
            return Err(StateError::DegenerateState);
        }
        let w = |ki: u32| exponent_weights(state, ki);
        let (s1, c1) = w(k.k[0]);
        let (s2, c2) = w(k.k[1]);
        let (s3, c3) = w(k.k[2]);
        let (s4, c4) = w(k.k[3]);
        Ok(Self {
            settings: [
                MeasurementSetting::from_sin_cos(s1, -c1, 0.0),
                MeasurementSetting::from_sin_cos(s2, c2, 0.0),
                MeasurementSetting::from_sin_cos(s3, -c3, 0.0),
                MeasurementSetting::from_sin_cos(s4, c4, 0.0),
            ],
        })
    }
}

/// `(sinφ, |cosφ|)` for one exponent, evaluated through the smaller of
/// `α/β` and `β/α` so that `k` up to 1024 neither under- nor overflows.
pub(crate) fn exponent_weights(state: &SchmidtState, k: u32) -> (f64, f64) {
    let r = state.alpha / state.beta;
    if r <= 1.0 {
        let rk = r.powi(k as i32); // in [0, 1]
        ((1.0 / (1.0 + rk)).sqrt(), (rk / (1.0 + rk)).sqrt())
    } else {
        let qk = (1.0 / r).powi(k as i32);
        ((qk / (1.0 + qk)).sqrt(), (1.0 / (1.0 + qk)).sqrt())
    }
}

/// Integer exponents `(k₁, k₂, k₃, k₄)` for the generalized basis family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentQuad {
    k: [u32; 4],
}

impl ExponentQuad {
    pub fn new(k1: u32, k2: u32, k3: u32, k4: u32) -> Result<Self, StateError> {
        Self::with_max(k1, k2, k3, k4, DEFAULT_K_MAX)
    }

    pub fn with_max(k1: u32, k2: u32, k3: u32, k4: u32, k_max: u32) -> Result<Self, StateError> {
        let k = [k1, k2, k3, k4];
        if k.iter().any(|&ki| ki < 1 || ki > k_max) {
            return Err(StateError::InvalidExponents(format!(
                "exponents {k:?} outside [1, {k_max}]"
            )));
        }
        Ok(Self { k })
    }

    pub fn values(&self) -> [u32; 4] {
        self.k
    }
}

impl std::fmt::Display for ExponentQuad {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.k[0], self.k[1], self.k[2], self.k[3])
    }
}
