//! Photon-pair correlations for polarizer measurements.
//!
//! A maximally entangled polarization pair measured at orientations `α`
//! (left) and `β` (right) yields uniform ±1 marginals and correlator
//! `cos 2(α - β)`.

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::Behavior;
use crate::outcome::{Setting, SettingPair};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AngleError {
    #[error("angle {name} is not finite")]
    NotFinite { name: &'static str },
    #[error("unknown angle preset \"{0}\" (known: preset-chsh)")]
    UnknownPreset(String),
    #[error("expected four comma-separated angles in degrees, got \"{0}\"")]
    Malformed(String),
}

/// Name of the preset that reaches the maximal violation.
pub const PRESET_CHSH: &str = "preset-chsh";

/// Preset orientations in degrees: `(a1, a2, b1, b2)`.
pub const PRESET_CHSH_DEGREES: [f64; 4] = [0.0, 135.0, 67.5, 22.5];

/// Polarizer orientations in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSet<T> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
}

impl<T: Float> AngleSet<T> {
    pub fn from_radians(a1: T, a2: T, b1: T, b2: T) -> Result<Self, AngleError> {
        let set = Self { a1, a2, b1, b2 };
        for (name, v) in [("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)] {
            if !v.is_finite() {
                return Err(AngleError::NotFinite { name });
            }
        }
        Ok(set)
    }

    pub fn from_degrees(degrees: [T; 4]) -> Result<Self, AngleError> {
        let [a1, a2, b1, b2] = degrees.map(|d| d.to_radians());
        Self::from_radians(a1, a2, b1, b2)
    }

    pub fn to_degrees(&self) -> [T; 4] {
        [self.a1, self.a2, self.b1, self.b2].map(|r| r.to_degrees())
    }

    pub fn preset_chsh() -> Self {
        let degrees = PRESET_CHSH_DEGREES.map(|d| T::from(d).expect("preset fits the float type"));
        Self::from_degrees(degrees).expect("preset angles are finite")
    }

    pub fn left(&self, a: Setting) -> T {
        match a {
            Setting::One => self.a1,
            Setting::Two => self.a2,
        }
    }

    pub fn right(&self, b: Setting) -> T {
        match b {
            Setting::One => self.b1,
            Setting::Two => self.b2,
        }
    }
}

impl AngleSet<f64> {
    /// Accepts `preset-chsh` or four comma-separated degree values.
    pub fn parse(spec: &str) -> Result<Self, AngleError> {
        let spec = spec.trim();
        if spec == PRESET_CHSH {
            return Ok(Self::preset_chsh());
        }
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            if parts.len() == 1 && parts[0].chars().any(|c| c.is_ascii_alphabetic()) {
                return Err(AngleError::UnknownPreset(spec.to_string()));
            }
            return Err(AngleError::Malformed(spec.to_string()));
        }
        let mut degrees = [0.0; 4];
        for (slot, part) in degrees.iter_mut().zip(&parts) {
            *slot = part.parse().map_err(|_| AngleError::Malformed(spec.to_string()))?;
        }
        Self::from_degrees(degrees)
    }
}

/// `p(x, y | a, b) = (1 + x·y·cos 2(α_a − β_b)) / 4`.
pub fn quantum_behavior<T: Scalar + Float>(angles: &AngleSet<T>) -> Behavior<T> {
    let one = <T as num_traits::One>::one();
    let two = one + one;
    let four = two + two;
    let mut probs = [<T as num_traits::Zero>::zero(); 16];
    for (i, slot) in probs.iter_mut().enumerate() {
        let pair = SettingPair::from_index(i / 4);
        let same_sign = (i / 2) % 2 == i % 2;
        let corr = (two * (angles.left(pair.a) - angles.right(pair.b))).cos();
        let signed = if same_sign { corr } else { -corr };
        *slot = (one + signed) / four;
    }
    Behavior::new(probs).expect("cosine correlations form a valid behavior")
}
