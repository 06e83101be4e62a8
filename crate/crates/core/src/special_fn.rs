//! Log-domain special functions: Gamma, Beta, the Fock moment integral,
//! multinomials and the two-sided Stirling envelope.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::ops::{Div, Mul, Neg};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A real number stored as `sign * exp(ln_abs)`.
///
/// Arithmetic on the magnitude happens in the log domain so that values far
/// outside the f64 range can be combined before the final conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogReal {
    sign: i8,
    ln_abs: f64,
}

impl LogReal {
    pub fn zero() -> Self {
        LogReal { sign: 0, ln_abs: f64::NEG_INFINITY }
    }

    pub fn one() -> Self {
        LogReal { sign: 1, ln_abs: 0.0 }
    }

    /// Positive number with the given natural logarithm.
    pub fn from_ln(ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            Self::zero()
        } else {
            LogReal { sign: 1, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::zero()
        } else {
            LogReal { sign: if x > 0.0 { 1 } else { -1 }, ln_abs: x.abs().ln() }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// ln|x|; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    /// ln x, defined only for x > 0.
    pub fn ln(&self) -> Result<f64> {
        if self.sign > 0 {
            Ok(self.ln_abs)
        } else {
            domain("logarithm of a non-positive LogReal")
        }
    }

    /// Converts to f64, failing instead of returning `inf`.
    pub fn to_f64(&self) -> Result<f64> {
        if self.sign == 0 {
            return Ok(0.0);
        }
        let m = self.ln_abs.exp();
        if !m.is_finite() {
            return Err(Error::Overflow(self.ln_abs));
        }
        Ok(self.sign as f64 * m)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.sign == 0 {
            return domain("reciprocal of zero");
        }
        Ok(LogReal { sign: self.sign, ln_abs: -self.ln_abs })
    }

    /// |x|^e for a real exponent; the sign must be non-negative.
    pub fn powf(&self, e: f64) -> Result<Self> {
        match self.sign {
            0 if e > 0.0 => Ok(Self::zero()),
            0 => domain("non-positive power of zero"),
            1 => Ok(LogReal { sign: 1, ln_abs: self.ln_abs * e }),
            _ => domain("real power of a negative LogReal"),
        }
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.powf(0.5)
    }

    pub fn abs(&self) -> Self {
        LogReal { sign: self.sign.abs(), ln_abs: self.ln_abs }
    }

    /// Signed sum, computed with a log-sum-exp on the magnitudes.
    pub fn add(&self, other: &Self) -> Self {
        if self.sign == 0 {
            return *other;
        }
        if other.sign == 0 {
            return *self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs { (self, other) } else { (other, self) };
        let t = (small.ln_abs - big.ln_abs).exp();
        if big.sign == small.sign {
            LogReal { sign: big.sign, ln_abs: big.ln_abs + t.ln_1p() }
        } else if t == 1.0 {
            Self::zero()
        } else {
            LogReal { sign: big.sign, ln_abs: big.ln_abs + (-t).ln_1p() }
        }
    }

    /// Compares magnitudes and signs as real numbers.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.ln_abs.total_cmp(&other.ln_abs),
                _ => other.ln_abs.total_cmp(&self.ln_abs),
            },
            o => o,
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            return LogReal::zero();
        }
        LogReal { sign: self.sign * rhs.sign, ln_abs: self.ln_abs + rhs.ln_abs }
    }
}

/// Division by zero yields a signed value with infinite magnitude; use
/// [`LogReal::recip`] when the divisor may vanish.
impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 {
            return LogReal::zero();
        }
        let sign = if rhs.sign == 0 { self.sign } else { self.sign * rhs.sign };
        LogReal { sign, ln_abs: self.ln_abs - rhs.ln_abs }
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal { sign: -self.sign, ln_abs: self.ln_abs }
    }
}

impl std::iter::Product for LogReal {
    fn product<I: Iterator<Item = LogReal>>(iter: I) -> LogReal {
        iter.fold(LogReal::one(), |a, b| a * b)
    }
}

// B_{2k} / (2k (2k-1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];
const SHIFT: f64 = 12.0;

fn ln_stirling_lower(x: f64) -> f64 {
    0.5 * (LN_2PI - x.ln()) + x * x.ln() - x
}

fn remainder_series(x: f64) -> f64 {
    let x2 = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * x2 + c;
    }
    acc / x
}

/// ln Γ(x) - ln(√(2π/x) (x/e)^x), evaluated without cancellation for large x.
pub fn stirling_remainder(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("stirling_remainder requires x > 0, got {x}"));
    }
    if x >= SHIFT {
        return Ok(remainder_series(x));
    }
    let m = (SHIFT - x).ceil();
    let y = x + m;
    let mut ln_prod = 0.0;
    let mut k = 0.0;
    while k < m {
        ln_prod += (x + k).ln();
        k += 1.0;
    }
    Ok(remainder_series(y) + ln_stirling_lower(y) - ln_prod - ln_stirling_lower(x))
}

/// ln Γ(x) for x > 0.
///
/// Upward recurrence to x ≥ 12 followed by the Stirling series with eight
/// Bernoulli terms; the truncation error there is below 1e-18.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires finite x > 0, got {x}"));
    }
    if x >= SHIFT {
        return Ok(ln_stirling_lower(x) + remainder_series(x));
    }
    let m = (SHIFT - x).ceil();
    let y = x + m;
    let mut ln_prod = 0.0;
    let mut k = 0.0;
    while k < m {
        ln_prod += (x + k).ln();
        k += 1.0;
    }
    Ok(ln_stirling_lower(y) + remainder_series(y) - ln_prod)
}

/// ln k!
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k <= 30 {
        return (2..=k).map(|j| (j as f64).ln()).sum();
    }
    log_gamma(k as f64 + 1.0).expect("positive argument")
}

/// Two-sided Stirling bound √(2π/x)(x/e)^x ≤ Γ(x) ≤ that · e^{1/(12x)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArtinEnvelope {
    pub lower: LogReal,
    pub upper: LogReal,
    /// θ ∈ [0, 1] with Γ(x) = lower · e^{θ/(12x)}.
    pub theta: f64,
}

pub fn artin_envelope(x: f64) -> Result<ArtinEnvelope> {
    if !(x >= 1.0) || !x.is_finite() {
        return domain(format!("artin_envelope requires x >= 1, got {x}"));
    }
    let lower = ln_stirling_lower(x);
    let theta = 12.0 * x * stirling_remainder(x)?;
    Ok(ArtinEnvelope {
        lower: LogReal::from_ln(lower),
        upper: LogReal::from_ln(lower + 1.0 / (12.0 * x)),
        theta,
    })
}

/// θ(x) from [`artin_envelope`].
pub fn artin_theta(x: f64) -> Result<f64> {
    Ok(artin_envelope(x)?.theta)
}

/// ln B(x, y).
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return domain(format!("log_beta requires positive arguments, got ({x}, {y})"));
    }
    Ok(log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?)
}

/// E(a) = ∫_ℂ |z|^a e^{-N|z|²} dm(z) = π Γ(a/2 + 1) / N^{a/2 + 1}.
pub fn e_moment(a: f64, big_n: f64) -> Result<LogReal> {
    if !(a >= 0.0) || !(big_n > 0.0) {
        return domain(format!("e_moment requires a >= 0 and N > 0, got ({a}, {big_n})"));
    }
    let h = a / 2.0 + 1.0;
    Ok(LogReal::from_ln(std::f64::consts::PI.ln() + log_gamma(h)? - h * big_n.ln()))
}

/// ln(b! / (a_1! ⋯ a_n! (b - |a|)!)).
pub fn log_multinomial(b: u64, a: &[u32]) -> Result<f64> {
    let total: u64 = a.iter().map(|&x| x as u64).sum();
    if total > b {
        return domain(format!("log_multinomial requires |a| <= b, got |a| = {total}, b = {b}"));
    }
    Ok(ln_factorial(b) - ln_factorial(b - total) - a.iter().map(|&x| ln_factorial(x as u64)).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_gamma_reference_values() {
        // relative error is meaningless at the two roots; bound it absolutely
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(log_gamma(0.5).unwrap(), 0.572_364_942_924_700_1, max_relative = 1e-14);
        // ln Γ(1/3), ln Γ(100.5) from a 30-digit reference.
        assert_relative_eq!(log_gamma(1.0 / 3.0).unwrap(), 0.985_420_646_927_767_1, max_relative = 1e-14);
        assert_relative_eq!(log_gamma(100.5).unwrap(), 361.435_540_467_777_62, max_relative = 1e-14);
        assert_relative_eq!(log_gamma(1e-8).unwrap(), 18.420_680_738_180_209, max_relative = 1e-14);
    }

    #[test]
    fn log_gamma_rejects_non_positive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn factorials_match_products() {
        let mut acc = 0.0f64;
        for k in 1..=170u64 {
            acc += (k as f64).ln();
            assert_relative_eq!(ln_factorial(k), acc, max_relative = 1e-13);
        }
    }

    #[test]
    fn artin_theta_at_one() {
        let t = artin_theta(1.0).unwrap();
        assert_relative_eq!(t, 12.0 * (1.0 - 0.5 * LN_2PI), max_relative = 1e-13);
        assert!((t - 0.97273).abs() < 1e-5);
        assert!(artin_envelope(0.5).is_err());
    }

    #[test]
    fn artin_theta_tends_to_one() {
        // θ(x) = 1 - 1/(30 x²) + 1/(105 x⁴) + O(x⁻⁶)
        for &x in &[50.0, 1e3, 1e6, 1e10] {
            let t = artin_theta(x).unwrap();
            assert!(t <= 1.0 && t > 0.0);
            let x2 = x * x;
            assert!((t - (1.0 - 1.0 / (30.0 * x2) + 1.0 / (105.0 * x2 * x2))).abs() < 1e-2 / (x2 * x2 * x2) + 1e-14);
        }
    }

    #[test]
    fn beta_and_moment_examples() {
        assert_relative_eq!(log_beta(3.0, 3.0).unwrap(), (1.0f64 / 30.0).ln(), max_relative = 1e-13);
        let pi = std::f64::consts::PI;
        assert_relative_eq!(e_moment(2.0, 4.0).unwrap().to_f64().unwrap(), pi / 16.0, max_relative = 1e-13);
        assert_relative_eq!(e_moment(8.0, 1.0).unwrap().to_f64().unwrap(), 24.0 * pi, max_relative = 1e-13);
        assert!(e_moment(-1.0, 1.0).is_err());
        assert!(e_moment(1.0, 0.0).is_err());
    }

    #[test]
    fn multinomial_example() {
        assert_relative_eq!(log_multinomial(4, &[2, 1]).unwrap(), 12f64.ln(), max_relative = 1e-14);
        assert!(log_multinomial(2, &[2, 1]).is_err());
    }

    #[test]
    fn logreal_arithmetic() {
        let a = LogReal::from_f64(3.0);
        let b = LogReal::from_f64(-4.0);
        assert_relative_eq!((a * b).to_f64().unwrap(), -12.0, max_relative = 1e-15);
        assert_relative_eq!((a / b).to_f64().unwrap(), -0.75, max_relative = 1e-15);
        assert_relative_eq!(a.add(&b).to_f64().unwrap(), -1.0, max_relative = 1e-14);
        assert!(a.add(&-a).is_zero());
        assert_relative_eq!(a.powf(2.5).unwrap().to_f64().unwrap(), 3f64.powf(2.5), max_relative = 1e-14);
        assert!(b.sqrt().is_err());
        assert!(LogReal::from_ln(1000.0).to_f64().is_err());
        assert_eq!(LogReal::from_ln(-1000.0).to_f64().unwrap(), 0.0);
        assert!(LogReal::zero().recip().is_err());
        assert_eq!(a.cmp_value(&b), Ordering::Greater);
    }
}
