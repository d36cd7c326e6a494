//! Exact rational arithmetic shared by every distance computation.
//!
//! Every finite metric in the crate is quantized: distances are integer
//! multiples ("ticks") of a rational unit, so strict ball membership and
//! threshold comparisons reduce to integer comparisons.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Ratio::from_integer(n)
}

/// Greatest common divisor of two positive rationals: the largest unit that
/// divides both exactly.
pub fn qgcd(a: Q, b: Q) -> Q {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let (an, ad) = (a.numer().abs(), *a.denom());
    let (bn, bd) = (b.numer().abs(), *b.denom());
    let den = ad.lcm(&bd);
    let num = (an * (den / ad)).gcd(&(bn * (den / bd)));
    Ratio::new(num, den)
}

/// `ticks * unit` as a rational.
pub fn from_ticks(ticks: u64, unit: Q) -> Q {
    unit * qi(ticks as i64)
}

/// Number of tick values `t >= 0` with `t * unit < r`; equivalently the
/// exclusive tick bound of the strict ball of radius `r`.
pub fn strict_ticks(r: Q, unit: Q) -> u64 {
    if r <= Q::zero() {
        return 0;
    }
    (r / unit).ceil().to_integer() as u64
}

/// Largest tick value `t` with `t * unit <= r`, or `None` if `r < 0`.
pub fn weak_ticks(r: Q, unit: Q) -> Option<u64> {
    if r < Q::zero() {
        return None;
    }
    Some((r / unit).floor().to_integer() as u64)
}

/// Exact conversion of a rational that must be an integer multiple of `unit`.
pub fn exact_ticks(r: Q, unit: Q) -> Option<u64> {
    let t = r / unit;
    if t.is_integer() && t >= Q::zero() {
        t.to_integer().to_u64()
    } else {
        None
    }
}

pub fn to_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parse `"3"`, `"-1/2"` or `"0.25"` into an exact rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Ratio::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 15 {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().ok()?;
        let mag = int_part.abs() * den + f;
        return Some(Ratio::new(if neg { -mag } else { mag }, den));
    }
    s.parse::<i64>().ok().map(qi)
}
