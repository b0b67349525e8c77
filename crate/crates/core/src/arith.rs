//! Elementary number theory on machine integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::Rational;

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return if m == 1 { Some(0) } else { None };
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin, valid for every u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization as (prime, exponent) pairs in increasing order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n <= 1 {
        return out;
    }
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut p = 7u64;
    let steps = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut i = 0;
    while p * p <= n && p <= 1_000_000 {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += steps[i];
        i = (i + 1) % 8;
    }
    if n > 1 {
        let mut stack = vec![n];
        let mut big = Vec::new();
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime(m) {
                big.push(m);
            } else {
                let d = pollard_rho(m);
                stack.push(d);
                stack.push(m / d);
            }
        }
        big.sort_unstable();
        for q in big {
            match out.last_mut() {
                Some((r, e)) if *r == q => *e += 1,
                _ => out.push((q, 1)),
            }
        }
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

/// Exponent of `p` in `n` (n > 0).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n > 0 && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Legendre symbol (a | p) for an odd prime p, as -1, 0 or 1.
pub fn legendre(a: i64, p: u64) -> i32 {
    let r = pow_mod(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
    match r {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Order of |GL2(Z/nZ)|.
pub fn gl2_order(n: u64) -> u64 {
    let mut o = n.pow(4);
    for p in prime_divisors(n) {
        o = o / p * (p - 1);
        o = o / (p * p) * (p * p - 1);
    }
    o
}

/// Primes up to `n` by a plain sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Squarefree part of a nonzero integer (sign kept), via factorization.
pub fn squarefree_part(n: &BigInt) -> Result<BigInt> {
    if n.is_zero() {
        return invalid("squarefree part of 0");
    }
    let mut s = BigInt::one();
    for (p, e) in factor_bigint(n)? {
        if e % 2 == 1 {
            s *= p;
        }
    }
    Ok(if n.is_negative() { -s } else { s })
}

/// Factor |n|: trial division up to 10^6, then the 64-bit path on the rest.
pub fn factor_bigint(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    let mut m = n.abs();
    if let Some(small) = m.to_u64() {
        return Ok(factor(small));
    }
    let mut out = Vec::new();
    for p in primes_up_to(1_000_000) {
        let mut e = 0;
        loop {
            let (q, r) = m.div_rem(&BigInt::from(p));
            if !r.is_zero() {
                break;
            }
            m = q;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        if let Some(rest) = m.to_u64() {
            out.extend(factor(rest));
            return Ok(out);
        }
    }
    Err(Error::Unsupported(format!(
        "cannot factor {n}: cofactor {m} beyond 64 bits"
    )))
}

/// Largest h with n = m^h for some integer m (sign respected: negative n
/// only admits odd h). Returns (m, h).
pub fn perfect_power(n: i64) -> (i64, u32) {
    if n.unsigned_abs() < 2 {
        return (n, 1);
    }
    for h in (2..=63u32).rev() {
        if n < 0 && h % 2 == 0 {
            continue;
        }
        if let Some(r) = int_root(n.unsigned_abs(), h) {
            let m = if n < 0 { -(r as i64) } else { r as i64 };
            return (m, h);
        }
    }
    (n, 1)
}

/// Exact integer h-th root when it exists.
pub fn int_root(n: u64, h: u32) -> Option<u64> {
    let guess = (n as f64).powf(1.0 / h as f64).round() as u64;
    for r in guess.saturating_sub(1)..=guess + 1 {
        if let Some(v) = r.checked_pow(h) {
            if v == n {
                return Some(r);
            }
        }
    }
    None
}

/// Discriminant of Q(sqrt(n)) for a non-square integer n.
pub fn quadratic_discriminant(n: &BigInt) -> Result<BigInt> {
    let s = squarefree_part(n)?;
    if s.is_one() {
        return invalid("square has no quadratic field");
    }
    let r = s.mod_floor(&BigInt::from(4));
    Ok(if r.is_one() { s } else { s * 4 })
}

/// A generator of (Z/nZ)^x when the group is cyclic.
pub fn primitive_root(n: u64) -> Option<u64> {
    let phi = euler_phi(n);
    let ps = prime_divisors(phi);
    (1..n).find(|&g| gcd(g, n) == 1 && ps.iter().all(|&q| pow_mod(g, phi / q, n) != 1))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// "p/q" (or "p" for integers).
pub fn rat_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_from_str(s: &str) -> Result<Rational> {
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| crate::Error::Invalid(format!("bad rational '{s}'")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse(d)?;
            if d.is_zero() {
                return invalid(format!("zero denominator in '{s}'"));
            }
            Ok(Rational::new(parse(n)?, d))
        }
        None => Ok(Rational::from_integer(parse(s)?)),
    }
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    // Scale to keep precision for tiny or huge values.
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() && d != 0.0 {
        n / d
    } else {
        let shift = r.denom().bits() as i64 - 60;
        let num = (r.numer() >> shift.max(0) as usize).to_f64().unwrap_or(0.0);
        let den = (r.denom() >> shift.max(0) as usize).to_f64().unwrap_or(1.0);
        num / den
    }
}

/// Serde adapter for rationals as "p/q" strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        rat_from_str(&s).map_err(serde::de::Error::custom)
    }
}
