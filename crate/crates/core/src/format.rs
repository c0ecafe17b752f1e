//! Fixed float formatting shared by CSV and JSON writers.
//!
//! Every float is written as `%.12e` (C style: `1.234567890123e+00`) so that
//! identical inputs give byte-identical outputs.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

/// C-style `%.12e`. Non-finite values become `nan`, `inf` or `-inf`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// A float serialized as a JSON number in `%.12e` form (`null` if not finite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let n = serde_json::Number::from_str(&sci(self.0)).map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

/// Complex value as a `[re, im]` pair.
pub fn pair(z: Complex64) -> [Sci; 2] {
    [Sci(z.re), Sci(z.im)]
}
