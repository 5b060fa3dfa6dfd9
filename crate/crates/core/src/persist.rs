//! Decimal encoding shared by the model and problem documents: every float
//! is written with 17 significant digits so that reading it back recovers
//! the identical bit pattern.

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// `f64` that serializes as a 17-significant-digit JSON number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("cannot store non-finite value {}", self.0)));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(F17)
    }
}

pub(crate) fn wrap(values: &[f64]) -> Vec<F17> {
    values.iter().copied().map(F17).collect()
}

pub(crate) fn unwrap(values: Vec<F17>) -> Vec<f64> {
    values.into_iter().map(|v| v.0).collect()
}
