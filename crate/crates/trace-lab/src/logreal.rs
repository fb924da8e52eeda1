//! Signed reals stored in the log domain.
//!
//! A [`LogReal`] keeps a sign in {-1, 0, +1} and the natural log of the
//! magnitude as a double-double. Numbers like `exp(-exp(40))`, far outside
//! the `f64` range, stay exactly representable, and products cost one
//! addition of log-magnitudes.
//!
//! Addition works through the stable forms `log1pexp` and `log1mexp`, so the
//! larger operand's log-magnitude is always the anchor. Subtracting two
//! nearly equal magnitudes destroys information no representation can
//! recover; when the log-magnitudes agree to within `2^-99` (relative to
//! their size) the operation reports [`LogRealError::CancellationUnderflow`]
//! instead of fabricating digits. Exactly equal magnitudes with opposite
//! signs cancel to the honest zero.

use crate::dd::Dd;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Largest admissible |log-magnitude|. Beyond this the double-double
/// representation of the log-magnitude itself has absolute error above
/// 1e-14, which would silently dominate every downstream quantity.
pub const MAX_LOGMAG: f64 = 1e18;

/// Relative resolution floor for opposite-sign addition: log-magnitude
/// differences below `2^-99 * max(1, |logmag|)` are representation noise.
const CANCEL_EPS: f64 = 1.577_721_810_442_023_6e-30;

/// A signed real number `sign * exp(logmag)`.
///
/// `sign == 0` means exact zero; the stored log-magnitude is then zero by
/// convention and carries no information.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogReal {
    sign: i8,
    logmag: Dd,
}

/// Arithmetic failures that the log domain must surface rather than absorb.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogRealError {
    #[error("cancellation underflow: log-magnitudes agree to within {gap:.3e} at scale {scale:.6e}")]
    CancellationUnderflow { gap: f64, scale: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("fractional power of a negative number")]
    NegativeBasePow,
    #[error("log-magnitude {0:.6e} exceeds the representable range")]
    MagnitudeOverflow(f64),
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        logmag: Dd::ZERO,
    };

    pub fn one() -> LogReal {
        LogReal {
            sign: 1,
            logmag: Dd::ZERO,
        }
    }

    /// Positive number with the given log-magnitude.
    pub fn exp_of(logmag: Dd) -> LogReal {
        LogReal::new(1, logmag)
    }

    /// Builds from an explicit sign and log-magnitude.
    pub fn new(sign: i8, logmag: Dd) -> LogReal {
        assert!(
            sign == -1 || sign == 0 || sign == 1,
            "sign must be -1, 0, or 1"
        );
        assert!(
            logmag.is_finite() && logmag.hi.abs() <= MAX_LOGMAG,
            "log-magnitude out of range"
        );
        if sign == 0 {
            LogReal::ZERO
        } else {
            LogReal { sign, logmag }
        }
    }

    /// Converts from a finite double-double, keeping its full precision.
    pub fn from_dd(x: Dd) -> LogReal {
        assert!(x.is_finite(), "LogReal::from_dd needs a finite value");
        if x.hi == 0.0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: if x.hi < 0.0 { -1 } else { 1 },
                logmag: x.abs().ln(),
            }
        }
    }

    /// Converts from a finite `f64`; zero (either signed zero) maps to the
    /// exact zero.
    pub fn from_f64(x: f64) -> LogReal {
        assert!(x.is_finite(), "LogReal::from_f64 needs a finite value");
        if x == 0.0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: if x < 0.0 { -1 } else { 1 },
                logmag: Dd::from_f64(x.abs()).ln(),
            }
        }
    }

    #[inline]
    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Log of the magnitude; meaningful only when `sign() != 0`.
    #[inline]
    pub fn logmag(self) -> Dd {
        self.logmag
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Nearest `f64`, saturating to `±inf` / `±0` outside the exponent range.
    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.logmag.exp().to_f64()
        }
    }

    #[inline]
    pub fn abs(self) -> LogReal {
        LogReal {
            sign: self.sign.abs(),
            logmag: self.logmag,
        }
    }

    #[inline]
    pub fn neg(self) -> LogReal {
        LogReal {
            sign: -self.sign,
            logmag: self.logmag,
        }
    }

    pub fn add(self, other: LogReal) -> Result<LogReal, LogRealError> {
        if self.sign == 0 {
            return Ok(other);
        }
        if other.sign == 0 {
            return Ok(self);
        }
        // Anchor on the operand with the larger magnitude.
        let (big, small) = if self.logmag >= other.logmag {
            (self, other)
        } else {
            (other, self)
        };
        let d = small.logmag - big.logmag;
        if self.sign == other.sign {
            return checked(big.sign, big.logmag + d.log1pexp());
        }
        if d == Dd::ZERO {
            return Ok(LogReal::ZERO);
        }
        let gap = (-d).to_f64();
        let scale = big.logmag.hi.abs().max(1.0);
        if gap < CANCEL_EPS * scale {
            return Err(LogRealError::CancellationUnderflow { gap, scale });
        }
        checked(big.sign, big.logmag + d.log1mexp())
    }

    pub fn sub(self, other: LogReal) -> Result<LogReal, LogRealError> {
        self.add(other.neg())
    }

    pub fn mul(self, other: LogReal) -> Result<LogReal, LogRealError> {
        if self.sign == 0 || other.sign == 0 {
            return Ok(LogReal::ZERO);
        }
        checked(self.sign * other.sign, self.logmag + other.logmag)
    }

    pub fn div(self, other: LogReal) -> Result<LogReal, LogRealError> {
        if other.sign == 0 {
            return Err(LogRealError::DivisionByZero);
        }
        if self.sign == 0 {
            return Ok(LogReal::ZERO);
        }
        checked(self.sign * other.sign, self.logmag - other.logmag)
    }

    /// Integer power; the sign follows the parity of `n`.
    pub fn powi(self, n: i32) -> Result<LogReal, LogRealError> {
        if self.sign == 0 {
            return if n > 0 {
                Ok(LogReal::ZERO)
            } else if n == 0 {
                Ok(LogReal::one())
            } else {
                Err(LogRealError::DivisionByZero)
            };
        }
        let sign = if self.sign < 0 && n % 2 != 0 { -1 } else { 1 };
        checked(sign, self.logmag * n as f64)
    }

    /// Real power of a nonnegative number.
    pub fn powf(self, p: f64) -> Result<LogReal, LogRealError> {
        assert!(p.is_finite(), "power must be finite");
        if self.sign < 0 {
            return Err(LogRealError::NegativeBasePow);
        }
        if self.sign == 0 {
            return if p > 0.0 {
                Ok(LogReal::ZERO)
            } else if p == 0.0 {
                Ok(LogReal::one())
            } else {
                Err(LogRealError::DivisionByZero)
            };
        }
        checked(1, self.logmag * p)
    }

    /// Text form for serialization: `0`, or a sign character followed by the
    /// 34-digit decimal log-magnitude, e.g. `+1.5413...e+00`.
    pub fn to_text(self) -> String {
        match self.sign {
            0 => "0".to_string(),
            1 => format!("+{}", self.logmag.to_decimal_string()),
            _ => format!("-{}", self.logmag.to_decimal_string()),
        }
    }

    /// Parses the [`LogReal::to_text`] form.
    pub fn parse_text(s: &str) -> Result<LogReal, String> {
        let s = s.trim();
        if s == "0" {
            return Ok(LogReal::ZERO);
        }
        let (sign, rest) = match s.as_bytes().first() {
            Some(b'+') => (1i8, &s[1..]),
            Some(b'-') => (-1i8, &s[1..]),
            _ => return Err(format!("missing sign in log-domain literal {s:?}")),
        };
        let logmag = Dd::parse(rest).map_err(|e| e.to_string())?;
        if !logmag.is_finite() || logmag.hi.abs() > MAX_LOGMAG {
            return Err(format!("log-magnitude out of range in {s:?}"));
        }
        Ok(LogReal { sign, logmag })
    }
}

fn checked(sign: i8, logmag: Dd) -> Result<LogReal, LogRealError> {
    if logmag.hi.abs() > MAX_LOGMAG {
        Err(LogRealError::MagnitudeOverflow(logmag.hi))
    } else {
        Ok(LogReal { sign, logmag })
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for LogReal {
    type Err = String;
    fn from_str(s: &str) -> Result<LogReal, String> {
        LogReal::parse_text(s)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &LogReal) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.logmag.partial_cmp(&other.logmag),
                _ => other.logmag.partial_cmp(&self.logmag),
            },
            ord => Some(ord),
        }
    }
}
