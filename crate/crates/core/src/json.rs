//! Deterministic serialization helpers.
//!
//! Every float leaving the crate (CSV or JSON) is printed with 17
//! significant digits in scientific notation, locale-free, so identical
//! inputs produce byte-identical outputs.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Format with 17 significant digits; round-trips any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// f64 wrapper that serializes as a raw JSON number with 17 significant
/// digits instead of the shortest round-trip form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig(pub f64);

impl Serialize for Sig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite float in output"));
        }
        let raw = RawValue::from_string(fmt_f64(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}
