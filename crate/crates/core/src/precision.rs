//! Simulated floating-point formats.
//!
//! Every value is carried as an `f64` whose low-order bits are forced to zero
//! by [`FloatFormat::round`]. Formats are restricted to at most 11 exponent
//! bits and 52 stored fraction bits so that they are subsets of binary64.
//! For such formats one binary64 operation followed by rounding gives the
//! correctly rounded result in the target format, so the emulation of a single
//! `+ - * / sqrt` is exact.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const F64_FRACTION_BITS: u32 = 52;
const F64_EXPONENT_BITS: u32 = 11;
const F64_BIAS: i32 = 1023;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RoundingMode {
    #[default]
    NearestTiesEven,
}

/// A binary floating-point format with `exponent_bits` of exponent and
/// `mantissa_bits` of stored fraction (the implicit leading bit excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloatFormat {
    exponent_bits: u32,
    mantissa_bits: u32,
    supports_subnormals: bool,
    rounding: RoundingMode,
}

impl FloatFormat {
    pub const FP64: FloatFormat = FloatFormat::ieee(11, 52);
    pub const FP32: FloatFormat = FloatFormat::ieee(8, 23);
    pub const FP16: FloatFormat = FloatFormat::ieee(5, 10);

    const fn ieee(exponent_bits: u32, mantissa_bits: u32) -> Self {
        FloatFormat {
            exponent_bits,
            mantissa_bits,
            supports_subnormals: true,
            rounding: RoundingMode::NearestTiesEven,
        }
    }

    /// Custom format with subnormals enabled.
    pub fn new(exponent_bits: u32, mantissa_bits: u32) -> Result<Self> {
        if !(2..=F64_EXPONENT_BITS).contains(&exponent_bits)
            || !(1..=F64_FRACTION_BITS).contains(&mantissa_bits)
        {
            return Err(Error::InvalidFormat {
                exponent_bits,
                mantissa_bits,
            });
        }
        Ok(FloatFormat::ieee(exponent_bits, mantissa_bits))
    }

    /// Looks up `fp64`, `fp32`, `fp16`, or parses a custom `e<E>m<M>` label.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "fp64" | "double" => Ok(Self::FP64),
            "fp32" | "single" => Ok(Self::FP32),
            "fp16" | "half" => Ok(Self::FP16),
            other => parse_custom(other).ok_or_else(|| Error::UnknownFormat(name.to_string()))?,
        }
    }

    pub fn with_subnormals(mut self, enabled: bool) -> Self {
        self.supports_subnormals = enabled;
        self
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn supports_subnormals(&self) -> bool {
        self.supports_subnormals
    }

    pub fn rounding(&self) -> RoundingMode {
        self.rounding
    }

    pub fn name(&self) -> String {
        let base = match (self.exponent_bits, self.mantissa_bits) {
            (11, 52) => "fp64".to_string(),
            (8, 23) => "fp32".to_string(),
            (5, 10) => "fp16".to_string(),
            (e, m) => format!("e{e}m{m}"),
        };
        if self.supports_subnormals {
            base
        } else {
            format!("{base}-nosub")
        }
    }

    /// u = 2^(-mantissa_bits - 1).
    pub fn unit_roundoff(&self) -> f64 {
        pow2(-(self.mantissa_bits as i32) - 1)
    }

    pub fn emax(&self) -> i32 {
        (1 << (self.exponent_bits - 1)) - 1
    }

    pub fn emin(&self) -> i32 {
        1 - self.emax()
    }

    /// Largest finite value, (2 - 2^-t) 2^emax.
    pub fn max_finite(&self) -> f64 {
        if self.exponent_bits == F64_EXPONENT_BITS {
            let frac = (1u64 << F64_FRACTION_BITS) - (1u64 << (F64_FRACTION_BITS - self.mantissa_bits));
            return f64::from_bits(((2046u64) << F64_FRACTION_BITS) | frac);
        }
        (2.0 - pow2(-(self.mantissa_bits as i32))) * pow2(self.emax())
    }

    pub fn min_normal(&self) -> f64 {
        pow2(self.emin())
    }

    pub fn min_subnormal(&self) -> f64 {
        pow2(self.emin() - self.mantissa_bits as i32)
    }

    /// True when rounding is the identity on every binary64 value.
    pub fn is_binary64(&self) -> bool {
        self.exponent_bits == F64_EXPONENT_BITS
            && self.mantissa_bits == F64_FRACTION_BITS
            && self.supports_subnormals
    }

    /// Rounds `x` to the nearest representable value, ties to even.
    ///
    /// Overflow goes to a signed infinity, values below half the smallest
    /// subnormal go to a signed zero, NaN propagates.
    #[inline]
    pub fn round(&self, x: f64) -> f64 {
        if self.is_binary64() || !x.is_finite() || x == 0.0 {
            return x;
        }
        let bits = x.to_bits();
        let sign = bits & (1u64 << 63);
        let abits = bits & !(1u64 << 63);
        let biased = (abits >> F64_FRACTION_BITS) as i32;
        let exponent = biased - F64_BIAS;

        let magnitude = if biased != 0 && exponent >= self.emin() {
            let shift = F64_FRACTION_BITS - self.mantissa_bits;
            let rounded = if shift == 0 {
                abits
            } else {
                let half = 1u64 << (shift - 1);
                let lsb = (abits >> shift) & 1;
                (abits + half - 1 + lsb) & !((1u64 << shift) - 1)
            };
            let r = f64::from_bits(rounded);
            if r > self.max_finite() {
                f64::INFINITY
            } else {
                r
            }
        } else {
            // Subnormal range of the target format: fixed quantum 2^(emin - t).
            let a = f64::from_bits(abits);
            let quantum = self.min_subnormal();
            let r = (a / quantum).round_ties_even() * quantum;
            if !self.supports_subnormals && r < self.min_normal() {
                0.0
            } else {
                r
            }
        };
        f64::from_bits(magnitude.to_bits() | sign)
    }

    pub fn round_slice(&self, v: &mut [f64]) {
        if self.is_binary64() {
            return;
        }
        for x in v.iter_mut() {
            *x = self.round(*x);
        }
    }

    pub fn round_elementwise(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|&x| self.round(x)).collect()
    }
}

impl Default for FloatFormat {
    fn default() -> Self {
        Self::FP64
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for FloatFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s)
    }
}

fn parse_custom(label: &str) -> Option<Result<FloatFormat>> {
    let (label, subnormals) = match label.strip_suffix("-nosub") {
        Some(rest) => (rest, false),
        None => (label, true),
    };
    let rest = label.strip_prefix('e')?;
    let (e, m) = rest.split_once('m')?;
    let e: u32 = e.parse().ok()?;
    let m: u32 = m.parse().ok()?;
    Some(FloatFormat::new(e, m).map(|f| f.with_subnormals(subnormals)))
}

/// Exact 2^k for k in the binary64 range, built from bits.
pub(crate) fn pow2(k: i32) -> f64 {
    if k >= -1022 {
        assert!(k <= 1023, "2^{k} overflows binary64");
        f64::from_bits(((k + F64_BIAS) as u64) << F64_FRACTION_BITS)
    } else {
        assert!(k >= -1074, "2^{k} underflows binary64");
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// Convenience wrapper over [`FloatFormat::round`].
pub fn round_scalar(x: f64, format: &FloatFormat) -> f64 {
    format.round(x)
}

pub fn round_elementwise(v: &[f64], format: &FloatFormat) -> Vec<f64> {
    format.round_elementwise(v)
}
