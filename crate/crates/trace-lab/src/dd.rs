//! Compensated double-double arithmetic.
//!
//! A [`Dd`] packs an unevaluated sum `hi + lo` of two `f64` values with
//! `|lo| <= ulp(hi) / 2`, giving roughly 32 significant decimal digits.
//! That head-room is what keeps log-domain magnitudes trustworthy when the
//! scales of interest are towers like `exp(exp(40))`: a plain `f64`
//! log-magnitude loses absolute precision exactly where the profiles are
//! probed, while a double-double keeps about 16 spare digits.
//!
//! The kernel provides the usual field operations plus the transcendental
//! functions the log domain needs (`exp`, `ln`, `expm1`, `log1p`, and the
//! stable combinations `log1pexp`, `log1mexp`) and a 34-digit decimal
//! round-trip used by the serialization layer.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Double-double number: the exact sum `hi + lo` with non-overlapping parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// `log(2)` split across two doubles; the pair agrees with the true value
/// to about 6e-34.
pub const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

/// Error-free sum of two doubles assuming `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free sum of two doubles, no magnitude assumption.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free product of two doubles via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// Renormalizes an arbitrary pair into the non-overlapping form.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn is_nan(self) -> bool {
        self.hi.is_nan() || self.lo.is_nan()
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn min(self, other: Dd) -> Dd {
        if self <= other {
            self
        } else {
            other
        }
    }

    #[inline]
    pub fn max(self, other: Dd) -> Dd {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Largest integer-valued double-double not exceeding `self`.
    pub fn floor(self) -> Dd {
        let f = self.hi.floor();
        if f == self.hi {
            Dd::new(f, self.lo.floor())
        } else {
            Dd { hi: f, lo: 0.0 }
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { Dd::ONE / self } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// Multiplies by `2^m` without rounding, splitting the shift so the
    /// intermediate scale factor stays representable for |m| up to 2046.
    fn ldexp(self, m: i32) -> Dd {
        let m1 = m / 2;
        let m2 = m - m1;
        let s1 = f64::powi(2.0, m1);
        let s2 = f64::powi(2.0, m2);
        Dd {
            hi: self.hi * s1 * s2,
            lo: self.lo * s1 * s2,
        }
    }

    /// `exp(self)` with relative error around 1e-31 (a few units in the last
    /// place at the extreme ends of the exponent range).
    pub fn exp(self) -> Dd {
        if self.hi >= 709.782712893384 {
            return Dd {
                hi: f64::INFINITY,
                lo: 0.0,
            };
        }
        if self.hi < -746.0 {
            return Dd::ZERO;
        }
        let m = (self.hi / LN2.hi).round();
        let r = self - LN2 * m;
        // Reduce to |y| < 7e-4, take a short Taylor tail, then square back up.
        let y = r / 512.0;
        let mut s = expm1_taylor(y);
        for _ in 0..9 {
            s = s * 2.0 + s * s;
        }
        (s + 1.0).ldexp(m as i32)
    }

    /// `exp(self) - 1`, accurate near zero.
    pub fn expm1(self) -> Dd {
        if self.hi.abs() <= 0.35 {
            let y = self / 512.0;
            let mut s = expm1_taylor(y);
            for _ in 0..9 {
                s = s * 2.0 + s * s;
            }
            s
        } else {
            self.exp() - 1.0
        }
    }

    /// Natural logarithm for strictly positive values.
    pub fn ln(self) -> Dd {
        assert!(
            self.hi > 0.0,
            "dd ln requires a positive argument, got {}",
            self.hi
        );
        // Reduce to f in [1, 2) first. Running Newton on the raw argument
        // would evaluate exp near the ends of the exponent range, where the
        // low limb of the result goes subnormal and drops precision.
        let k = self.hi.log2().floor() as i32;
        let f = self.ldexp(-k);
        let mut y = Dd::from_f64(f.hi.ln());
        // Newton iteration y <- y + f * exp(-y) - 1 squares the error of the
        // f64 seed; the second pass polishes the last couple of bits.
        for _ in 0..2 {
            y = y + f * (-y).exp() - 1.0;
        }
        y + LN2 * k as f64
    }

    /// `log(1 + self)`, accurate near zero.
    pub fn log1p(self) -> Dd {
        if self.hi.abs() < 9.765_625e-4 {
            // Taylor through x^13 suffices below 2^-10. The reciprocal
            // coefficients need the full double-double width.
            let mut acc = Dd::ONE / 13.0;
            for k in (1..=12).rev() {
                acc = Dd::ONE / k as f64 - self * acc;
            }
            self * acc
        } else {
            (Dd::ONE + self).ln()
        }
    }

    /// `log(1 + exp(self))` without overflow for large negative arguments.
    pub fn log1pexp(self) -> Dd {
        if self.hi > 0.0 {
            return self + (-self).log1pexp();
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        self.exp().log1p()
    }

    /// `log(1 - exp(self))` for strictly negative arguments.
    pub fn log1mexp(self) -> Dd {
        debug_assert!(self.hi < 0.0, "log1mexp needs a negative argument");
        if self.hi > -LN2.hi {
            (-self.expm1()).ln()
        } else {
            (-self.exp()).log1p()
        }
    }

    /// Renders 34 significant digits in scientific notation, e.g.
    /// `-1.541324854612918108978356354932670e+00`. Zero prints as `0`.
    pub fn to_decimal_string(self) -> String {
        if self.hi == 0.0 && self.lo == 0.0 {
            return "0".to_string();
        }
        let neg = self.hi < 0.0;
        let x = self.abs();
        let mut e10 = x.hi.log10().floor() as i32;
        // Scale by an exact positive power of ten in either direction so the
        // normalization costs a single correctly rounded operation.
        let mut y = if e10 >= 0 {
            x / pow10(e10)
        } else {
            x * pow10(-e10)
        };
        while y.hi >= 10.0 {
            y = y / 10.0;
            e10 += 1;
        }
        while y.hi < 1.0 {
            y = y * 10.0;
            e10 -= 1;
        }
        // One guard digit beyond the 34 rendered ones drives the rounding.
        const NDIG: usize = 35;
        let mut digits = [0i32; NDIG];
        for d in digits.iter_mut() {
            let k = y.hi.floor();
            *d = k as i32;
            y = (y - k) * 10.0;
        }
        // The compensated remainder can push a raw digit to -1 or 10.
        for i in (1..NDIG).rev() {
            if digits[i] < 0 {
                digits[i] += 10;
                digits[i - 1] -= 1;
            } else if digits[i] > 9 {
                digits[i] -= 10;
                digits[i - 1] += 1;
            }
        }
        if digits[NDIG - 1] >= 5 {
            let mut i = NDIG - 2;
            loop {
                digits[i] += 1;
                if digits[i] <= 9 {
                    break;
                }
                digits[i] = 0;
                if i == 0 {
                    break;
                }
                i -= 1;
            }
        }
        let mut lead = digits[0];
        let mut tail_start = 1;
        if lead > 9 {
            // Rounding overflowed into a new leading digit.
            e10 += 1;
            lead = 1;
            digits[0] = 0;
            tail_start = 0;
        }
        let mut out = String::with_capacity(42);
        if neg {
            out.push('-');
        }
        out.push((b'0' + lead as u8) as char);
        out.push('.');
        for &d in &digits[tail_start..tail_start + 33] {
            out.push((b'0' + d as u8) as char);
        }
        out.push('e');
        out.push_str(&format!("{:+03}", e10));
        out
    }

    /// Parses the scientific-notation form produced by
    /// [`Dd::to_decimal_string`], also accepting plain decimals like `-2.5`.
    pub fn parse(s: &str) -> Result<Dd, DdParseError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(DdParseError(s.to_string()));
        }
        if s == "0" || s == "-0" || s == "+0" {
            return Ok(Dd::ZERO);
        }
        let (neg, rest) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (mantissa, exp_part) = match rest.find(['e', 'E']) {
            Some(i) => (&rest[..i], rest[i + 1..].parse::<i32>().map_err(|_| DdParseError(s.to_string()))?),
            None => (rest, 0),
        };
        let mut digits = Vec::with_capacity(36);
        let mut dot_pos: Option<usize> = None;
        for (i, c) in mantissa.bytes().enumerate() {
            match c {
                b'0'..=b'9' => digits.push(c - b'0'),
                b'.' if dot_pos.is_none() => dot_pos = Some(i),
                _ => return Err(DdParseError(s.to_string())),
            }
        }
        if digits.is_empty() {
            return Err(DdParseError(s.to_string()));
        }
        // Exponent of the leading digit's place value.
        let int_len = dot_pos.unwrap_or(mantissa.len());
        let lead_exp = exp_part + int_len as i32 - 1;
        // Assemble the digit string as an integer from 15-digit chunks (a
        // 15-digit chunk always fits an f64 exactly; 16 digits can exceed
        // 2^53), then apply a single scaling so negative powers of ten cost
        // one rounded division instead of one per chunk.
        let mut acc = Dd::ZERO;
        let mut idx = digits.len();
        while idx > 0 {
            let start = idx.saturating_sub(15);
            let mut chunk = 0i64;
            for &d in &digits[start..idx] {
                chunk = chunk * 10 + d as i64;
            }
            let shift = digits.len() as i32 - idx as i32;
            acc = acc + Dd::from_f64(chunk as f64) * pow10(shift);
            idx = start;
        }
        let scale = lead_exp - (digits.len() as i32 - 1);
        let acc = if scale >= 0 {
            acc * pow10(scale)
        } else {
            acc / pow10(-scale)
        };
        Ok(if neg { -acc } else { acc })
    }
}

/// Compensated (Neumaier) accumulator for plain doubles: cheap running sums
/// whose error stays near one ulp of the total regardless of term count.
#[derive(Debug, Default, Clone, Copy)]
pub struct Accum {
    sum: f64,
    comp: f64,
}

impl Accum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.comp += if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Malformed decimal literal passed to [`Dd::parse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DdParseError(pub String);

impl std::fmt::Display for DdParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid decimal literal: {:?}", self.0)
    }
}

impl std::error::Error for DdParseError {}

/// `10^k` as a double-double. Exact for 0 <= k <= 32 (the product of two
/// exact f64 powers fits the 106-bit significand); negative powers cost one
/// correctly rounded division off the exact positive power.
fn pow10(k: i32) -> Dd {
    if k < 0 {
        return Dd::ONE / pow10(-k);
    }
    if k <= 22 {
        Dd::from_f64(f64::powi(10.0, k))
    } else if k <= 44 {
        let h = k / 2;
        Dd::from_f64(f64::powi(10.0, h)) * Dd::from_f64(f64::powi(10.0, k - h))
    } else {
        Dd::from_f64(10.0).powi(k)
    }
}

/// Taylor tail of `exp(y) - 1` for |y| < 7e-4, through the 12th order term.
fn expm1_taylor(y: Dd) -> Dd {
    let mut acc = Dd::ONE;
    for k in (2..=12).rev() {
        acc = Dd::ONE + y * acc / k as f64;
    }
    y * acc
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + Dd::from_f64(q3)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, o);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: f64) -> Dd {
        self + (-o)
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, o);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * o);
        Dd { hi, lo }
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, o: f64) -> Dd {
        self / Dd::from_f64(o)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            other => other,
        }
    }
}
