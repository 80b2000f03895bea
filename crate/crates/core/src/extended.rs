//! Nonnegative reals extended with `+inf`.

use core::cmp::Ordering;
use core::fmt;
use core::ops::Add;

/// A value in `[0, +inf]`.
///
/// Distances to the empty set are `+inf`, so every point-to-set distance in
/// the crate is an `ExtendedReal`. `NaN` is never stored.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const ZERO: Self = ExtendedReal(0.0);
    pub const INFINITY: Self = ExtendedReal(f64::INFINITY);

    /// Wraps a finite nonnegative value; negative rounding noise is clamped
    /// to zero. Panics on `NaN`.
    pub fn new(value: f64) -> Self {
        assert!(!value.is_nan(), "ExtendedReal cannot hold NaN");
        if value < 0.0 {
            ExtendedReal(0.0)
        } else {
            ExtendedReal(value)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        if self.is_finite() {
            Some(self.0)
        } else {
            None
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl Eq for ExtendedReal {}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for ExtendedReal {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ExtendedReal(self.0 + rhs.0)
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        ExtendedReal::new(v)
    }
}

impl fmt::Debug for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("+inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::ExtendedReal;
    use serde::de::{self, Visitor};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    // JSON has no infinity, so `+inf` travels as the string "+inf".
    impl Serialize for ExtendedReal {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            if self.is_infinite() {
                s.serialize_str("+inf")
            } else {
                s.serialize_f64(self.0)
            }
        }
    }

    impl<'de> Deserialize<'de> for ExtendedReal {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            struct V;
            impl<'de> Visitor<'de> for V {
                type Value = ExtendedReal;
                fn expecting(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                    f.write_str("a nonnegative number or \"+inf\"")
                }
                fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtendedReal, E> {
                    if v.is_nan() || v < 0.0 {
                        Err(E::custom("extended real must be nonnegative"))
                    } else {
                        Ok(ExtendedReal(v))
                    }
                }
                fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtendedReal, E> {
                    Ok(ExtendedReal(v as f64))
                }
                fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtendedReal, E> {
                    self.visit_f64(v as f64)
                }
                fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtendedReal, E> {
                    match v {
                        "+inf" | "inf" | "Infinity" => Ok(ExtendedReal::INFINITY),
                        _ => Err(E::custom("expected \"+inf\"")),
                    }
                }
            }
            d.deserialize_any(V)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs() {
        let x = ExtendedReal::new(3.0);
        assert!((x + ExtendedReal::INFINITY).is_infinite());
        assert_eq!(x.max(ExtendedReal::INFINITY), ExtendedReal::INFINITY);
        assert_eq!(x.min(ExtendedReal::INFINITY), x);
        assert!(ExtendedReal::ZERO < x && x < ExtendedReal::INFINITY);
    }

    #[test]
    fn negative_noise_clamps() {
        assert_eq!(ExtendedReal::new(-1e-18), ExtendedReal::ZERO);
    }

    #[test]
    #[should_panic]
    fn nan_rejected() {
        let _ = ExtendedReal::new(f64::NAN);
    }
}
