//! Setting labels and ±1 outcomes.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("setting must be 1 or 2, got {0}")]
    InvalidSetting(i64),
    #[error("outcome must be -1 or +1, got {0}")]
    InvalidOutcome(i64),
}

/// Measurement choice in one wing: label 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setting {
    One,
    Two,
}

impl Setting {
    pub const ALL: [Setting; 2] = [Setting::One, Setting::Two];

    pub fn new(value: i64) -> Result<Self, DomainError> {
        match value {
            1 => Ok(Setting::One),
            2 => Ok(Setting::Two),
            other => Err(DomainError::InvalidSetting(other)),
        }
    }

    pub fn value(self) -> u8 {
        match self {
            Setting::One => 1,
            Setting::Two => 2,
        }
    }

    /// 0 for setting 1, 1 for setting 2.
    pub fn index(self) -> usize {
        self.value() as usize - 1
    }

    pub fn flipped(self) -> Self {
        match self {
            Setting::One => Setting::Two,
            Setting::Two => Setting::One,
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl Serialize for Setting {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.value())
    }
}

impl<'de> Deserialize<'de> for Setting {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = i64::deserialize(deserializer)?;
        Setting::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Measurement result: -1 or +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Minus,
    Plus,
}

impl Outcome {
    /// `+1` first, matching the key order of serialized behaviors.
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn new(value: i64) -> Result<Self, DomainError> {
        match value {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(DomainError::InvalidOutcome(other)),
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    /// 0 for +1, 1 for -1.
    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn negated(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    /// Signed label used in behavior keys: `+1` / `-1`.
    pub fn signed_label(self) -> &'static str {
        match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.signed_label())
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = i64::deserialize(deserializer)?;
        Outcome::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Both wings' settings for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingPair {
    pub a: Setting,
    pub b: Setting,
}

impl SettingPair {
    /// Row-major: 11, 12, 21, 22.
    pub const ALL: [SettingPair; 4] = [
        SettingPair::new(Setting::One, Setting::One),
        SettingPair::new(Setting::One, Setting::Two),
        SettingPair::new(Setting::Two, Setting::One),
        SettingPair::new(Setting::Two, Setting::Two),
    ];

    pub const fn new(a: Setting, b: Setting) -> Self {
        Self { a, b }
    }

    /// Position in [`SettingPair::ALL`].
    pub fn index(self) -> usize {
        2 * self.a.index() + self.b.index()
    }

    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }

    /// Sign with which `P(X=Y | ab)` enters the Bell functional: `+1` for
    /// the pair (1,2), `-1` for the other three.
    pub fn bell_sign(self) -> i8 {
        if self == SettingPair::new(Setting::One, Setting::Two) {
            1
        } else {
            -1
        }
    }

    /// Two-digit label such as `"12"`.
    pub fn label(self) -> String {
        format!("{}{}", self.a, self.b)
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a, self.b)
    }
}
