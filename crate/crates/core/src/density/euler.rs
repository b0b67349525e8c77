//! Fixed-point Euler products with rigorous truncation intervals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::primes_up_to;
use crate::error::{invalid, Result};
use crate::Rational;

/// Decimal digits carried by the fixed-point representation.
pub const SCALE_DIGITS: u32 = 60;
/// Digits printed for interval endpoints.
pub const PRINT_DIGITS: usize = 50;

const BLOCK: usize = 4096;

fn scale() -> BigInt {
    BigInt::from(10u32).pow(SCALE_DIGITS)
}

/// A closed interval [low, high] of reals, stored as integers over 10^60.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedInterval {
    low: BigInt,
    high: BigInt,
}

impl FixedInterval {
    pub fn exact(r: &Rational) -> Self {
        let s = scale();
        let n = r.numer() * &s;
        FixedInterval {
            low: n.div_floor(r.denom()),
            high: n.div_ceil(r.denom()),
        }
    }

    pub fn zero() -> Self {
        FixedInterval {
            low: BigInt::zero(),
            high: BigInt::zero(),
        }
    }

    /// Multiply by a nonnegative rational, rounding outward.
    pub fn scale_by(&self, r: &Rational) -> Self {
        assert!(!r.is_negative(), "scale_by needs r >= 0");
        FixedInterval {
            low: (&self.low * r.numer()).div_floor(r.denom()),
            high: (&self.high * r.numer()).div_ceil(r.denom()),
        }
    }

    /// Product of two intervals of nonnegative reals.
    pub fn mul(&self, o: &Self) -> Self {
        let s = scale();
        FixedInterval {
            low: (&self.low * &o.low).div_floor(&s),
            high: (&self.high * &o.high).div_ceil(&s),
        }
    }

    pub fn low(&self) -> f64 {
        ratio_f64(&self.low)
    }

    pub fn high(&self) -> f64 {
        ratio_f64(&self.high)
    }

    pub fn mid(&self) -> f64 {
        ratio_f64(&((&self.low + &self.high) / 2))
    }

    pub fn width(&self) -> f64 {
        ratio_f64(&(&self.high - &self.low))
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low() <= x && x <= self.high()
    }

    /// [low, high] contains `o`.
    pub fn encloses(&self, o: &Self) -> bool {
        self.low <= o.low && o.high <= self.high
    }

    pub fn is_zero(&self) -> bool {
        self.low.is_zero() && self.high.is_zero()
    }

    pub fn low_string(&self) -> String {
        decimal(&self.low, PRINT_DIGITS)
    }

    pub fn high_string(&self) -> String {
        decimal(&self.high, PRINT_DIGITS)
    }

    /// The decimal digits shared by both endpoints.
    pub fn digits(&self) -> String {
        if self.low == self.high {
            return decimal(&self.low, PRINT_DIGITS);
        }
        let width = &self.high - &self.low;
        let wd = width.to_string().len();
        let keep = (SCALE_DIGITS as usize).saturating_sub(wd).min(PRINT_DIGITS);
        let (a, b) = (decimal(&self.low, keep), decimal(&self.high, keep));
        if a == b {
            a
        } else {
            decimal(&self.low, keep.saturating_sub(1))
        }
    }
}

impl Serialize for FixedInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FixedInterval", 3)?;
        st.serialize_field("digits", &self.digits())?;
        st.serialize_field("tail_low", &self.low_string())?;
        st.serialize_field("tail_high", &self.high_string())?;
        st.end()
    }
}

fn ratio_f64(x: &BigInt) -> f64 {
    // Exact enough: keep 17 significant digits of the scaled integer.
    let s = x.to_string();
    let (neg, digits) = s
        .strip_prefix('-')
        .map_or((false, s.as_str()), |d| (true, d));
    let v: f64 = digits.parse::<f64>().unwrap_or(f64::INFINITY) / 10f64.powi(SCALE_DIGITS as i32);
    if neg {
        -v
    } else {
        v
    }
}

/// x / 10^60 truncated to `places` decimals.
fn decimal(x: &BigInt, places: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let (int, frac) = a.div_rem(&scale());
    let mut f = frac.to_string();
    while f.len() < SCALE_DIGITS as usize {
        f.insert(0, '0');
    }
    f.truncate(places);
    let sign = if neg { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{f}")
    }
}

/// Which majorant bounds 1 - factor(l) for l > L.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// 1 - f(l) <= 2/l^4, so the tail defect is at most 2/(3L^3).
    Quartic,
    /// 1 - f(l) <= 2/l^2, so the tail defect is at most 2/L.
    Quadratic,
}

impl TailKind {
    pub fn bound(self, l: u64) -> Rational {
        let l = BigInt::from(l);
        match self {
            TailKind::Quartic => Rational::new(BigInt::from(2), BigInt::from(3) * &l * &l * &l),
            TailKind::Quadratic => Rational::new(BigInt::from(2), l),
        }
    }
}

/// Truncated Euler product with its proven enclosure of the full product.
#[derive(Clone, Debug, Serialize)]
pub struct EulerProduct {
    pub truncation_l: u64,
    pub tail: TailKind,
    /// Contains the infinite product over the included primes.
    pub value: FixedInterval,
    pub primes_used: usize,
}

/// prod_{l <= L, l not in skip} num(l)/den(l), where every factor lies in
/// [0, 1] and 1 - factor(l) obeys `tail` for l > L.
pub fn euler_product(
    l_max: u64,
    skip: &[u64],
    tail: TailKind,
    factor: impl Fn(u64) -> (BigInt, BigInt) + Sync,
) -> Result<EulerProduct> {
    if l_max < 2 {
        return invalid("truncation L must be at least 2");
    }
    let primes: Vec<u64> = primes_up_to(l_max)
        .into_iter()
        .filter(|p| !skip.contains(p))
        .collect();
    let s = scale();
    let blocks: Vec<BigInt> = primes
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut acc = s.clone();
            for &p in chunk {
                let (n, d) = factor(p);
                debug_assert!(n <= d && !n.is_negative());
                acc = (acc * n).div_floor(&d);
            }
            acc
        })
        .collect();
    let mut acc = s.clone();
    for b in &blocks {
        acc = (acc * b).div_floor(&s);
    }
    // Every floor loses under one unit and factors never exceed 1, so the
    // truncated product lies in [acc, acc + n_ops].
    let err = BigInt::from(primes.len() + blocks.len());
    let high = &acc + err;
    let b = tail.bound(l_max);
    let one_minus_b = Rational::one() - b;
    let low = if one_minus_b.is_negative() {
        BigInt::zero()
    } else {
        (&acc * one_minus_b.numer()).div_floor(one_minus_b.denom())
    };
    Ok(EulerProduct {
        truncation_l: l_max,
        tail,
        value: FixedInterval { low, high },
        primes_used: primes.len(),
    })
}

/// 1 - 1/|GL2(Z/l)|.
pub fn cyclic_factor(l: u64) -> (BigInt, BigInt) {
    let l = BigInt::from(l);
    let g = (&l * &l - 1u32) * (&l * &l - &l);
    (&g - 1u32, g)
}

/// 1 - (l^2 - l - 1)/((l-1)^3 (l+1)).
pub fn koblitz_factor(l: u64) -> (BigInt, BigInt) {
    let l = BigInt::from(l);
    let d = (&l - 1u32).pow(3) * (&l + 1u32);
    let n = &l * &l - &l - 1u32;
    (&d - n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn all_gl2_product() {
        let p = euler_product(1000, &[], TailKind::Quartic, cyclic_factor).unwrap();
        assert!(p.value.width() < 1e-9);
        // Direct f64 oracle.
        let direct: f64 = primes_up_to(1000)
            .iter()
            .map(|&l| {
                let l = l as f64;
                1.0 - 1.0 / ((l * l - 1.0) * (l * l - l))
            })
            .product();
        assert!(p.value.low() - 1e-12 <= direct && direct <= p.value.high() + 1e-12);
        assert!((p.value.mid() - 0.813752).abs() < 1e-6);
    }

    #[test]
    fn tails_nest() {
        let a = euler_product(100, &[], TailKind::Quartic, cyclic_factor).unwrap();
        let b = euler_product(10_000, &[], TailKind::Quartic, cyclic_factor).unwrap();
        assert!(a.value.encloses(&b.value));
        let a = euler_product(1000, &[2], TailKind::Quadratic, koblitz_factor).unwrap();
        let b = euler_product(20_000, &[2], TailKind::Quadratic, koblitz_factor).unwrap();
        assert!(a.value.encloses(&b.value));
    }

    #[test]
    fn interval_arithmetic() {
        let x = FixedInterval::exact(&rat(1, 3));
        assert_eq!(x.digits(), format!("0.{}", "3".repeat(PRINT_DIGITS)));
        let y = x.scale_by(&rat(3, 1));
        assert!(y.contains(1.0));
        assert_eq!(
            FixedInterval::exact(&rat(1, 4)).digits(),
            format!("0.25{}", "0".repeat(PRINT_DIGITS - 2))
        );
        assert!(euler_product(1, &[], TailKind::Quartic, cyclic_factor).is_err());
    }
}
