//! Exact rational numbers for match scores and penalties.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Sub};
use core::str::FromStr;

/// A reduced fraction with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: i64,
    den: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Ratio {
    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    /// Panics if `den` is zero.
    pub fn new(num: i64, den: i64) -> Ratio {
        assert!(den != 0, "zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Ratio {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn from_integer(n: i64) -> Ratio {
        Ratio { num: n, den: 1 }
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn mul_int(self, k: i64) -> Ratio {
        Ratio::new(self.num * k, self.den)
    }

    pub fn div_int(self, k: i64) -> Ratio {
        Ratio::new(self.num, self.den * k)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Parses either `n/d` or a plain decimal such as `0.05` or `-3`.
    pub fn parse(s: &str) -> Option<Ratio> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            return Some(Ratio::new(n, d));
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || frac_part.len() > 12
        {
            return None;
        }
        let mut den: i64 = 1;
        for _ in 0..frac_part.len() {
            den *= 10;
        }
        let int_val: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().ok()?
        };
        let frac_val: i64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().ok()?
        };
        let num = int_val.checked_mul(den)?.checked_add(frac_val)?;
        Some(Ratio::new(if neg { -num } else { num }, den))
    }

    /// Decimal rendering rounded half away from zero to `places` digits.
    pub fn to_decimal(self, places: u32) -> String {
        let scale = 10i128.pow(places);
        let n = self.num as i128 * scale;
        let d = self.den as i128;
        let q = (n.abs() * 2 + d) / (2 * d);
        let neg = n < 0 && q != 0;
        let int_part = q / scale;
        let frac_part = q % scale;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&alloc::format!("{}", int_part));
        if places > 0 {
            out.push_str(&alloc::format!(
                ".{:0width$}",
                frac_part,
                width = places as usize
            ));
        }
        out
    }
}

impl Default for Ratio {
    fn default() -> Self {
        Ratio::ZERO
    }
}

impl Add for Ratio {
    type Output = Ratio;
    fn add(self, rhs: Ratio) -> Ratio {
        Ratio::new(self.num * rhs.den + rhs.num * self.den, self.den * rhs.den)
    }
}

impl Sub for Ratio {
    type Output = Ratio;
    fn sub(self, rhs: Ratio) -> Ratio {
        Ratio::new(self.num * rhs.den - rhs.num * self.den, self.den * rhs.den)
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Ratio {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Ratio::parse(s).ok_or(())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        Ratio::parse(&s).ok_or_else(|| serde::de::Error::custom("invalid rational"))
    }
}
