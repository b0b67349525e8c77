//! Short Weierstrass curves over F_p and their group orders.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{factor, inv_mod, lcm, mul_mod, pow_mod};
use crate::catalog::WeierstrassCurve;
use crate::error::{invalid, Error, Result};

/// Primes up to this use the O(p) character sum.
pub const NAIVE_LIMIT: u64 = 10_000;

/// y^2 = x^3 + a x + b over F_p, p > 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FpCurve {
    pub p: u64,
    pub a: u64,
    pub b: u64,
}

/// Affine point, or None for the point at infinity.
pub type Point = Option<(u64, u64)>;

fn reduce(x: &BigInt, p: u64) -> u64 {
    let r = x % BigInt::from(p);
    let r = r.to_i64().expect("residue fits");
    r.rem_euclid(p as i64) as u64
}

/// y^2 = x^3 - 27 c4 x - 54 c6, isomorphic to E over F_p for p > 3.
#[derive(Clone, Debug)]
pub struct ShortModel {
    a: BigInt,
    b: BigInt,
    small: Option<(i128, i128)>,
    bad: Vec<u64>,
}

impl ShortModel {
    pub fn new(curve: &WeierstrassCurve) -> Self {
        let (c4, c6) = curve.c_invariants();
        let a: BigInt = -27 * c4;
        let b: BigInt = -54 * c6;
        let small = a.to_i128().zip(b.to_i128());
        ShortModel {
            a,
            b,
            small,
            bad: curve.bad_primes().to_vec(),
        }
    }

    pub fn is_good(&self, p: u64) -> bool {
        p > 3 && self.bad.binary_search(&p).is_err()
    }

    pub fn at(&self, p: u64) -> Result<FpCurve> {
        if !self.is_good(p) {
            return invalid(format!("p = {p} is not a good prime above 3"));
        }
        let (a, b) = match self.small {
            Some((a, b)) => (
                a.rem_euclid(p as i128) as u64,
                b.rem_euclid(p as i128) as u64,
            ),
            None => (reduce(&self.a, p), reduce(&self.b, p)),
        };
        Ok(FpCurve { p, a, b })
    }
}

impl FpCurve {
    pub fn reduce(curve: &WeierstrassCurve, p: u64) -> Result<Self> {
        ShortModel::new(curve).at(p)
    }

    pub fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        let x2 = mul_mod(x, x, p);
        let t = (x2 + self.a) % p;
        (mul_mod(t, x, p) + self.b) % p
    }

    pub fn is_on(&self, pt: Point) -> bool {
        match pt {
            None => true,
            Some((x, y)) => mul_mod(y, y, self.p) == self.rhs(x),
        }
    }

    /// Quadratic twist by a non-residue d: y^2 = x^3 + a d^2 x + b d^3.
    pub fn twist(&self) -> Self {
        let p = self.p;
        let d = (2..p)
            .find(|&d| pow_mod(d, (p - 1) / 2, p) == p - 1)
            .expect("p odd");
        let d2 = mul_mod(d, d, p);
        FpCurve {
            p,
            a: mul_mod(self.a, d2, p),
            b: mul_mod(self.b, mul_mod(d2, d, p), p),
        }
    }

    pub fn neg(&self, pt: Point) -> Point {
        pt.map(|(x, y)| (x, (self.p - y) % self.p))
    }

    pub fn add(&self, u: Point, v: Point) -> Point {
        let p = self.p;
        let ((x1, y1), (x2, y2)) = match (u, v) {
            (None, w) | (w, None) => return w,
            (Some(a), Some(b)) => (a, b),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2) % p == 0 {
                return None;
            }
            let num = (3 * mul_mod(x1, x1, p) + self.a) % p;
            mul_mod(num, inv_mod(2 * y1 % p, p).expect("y nonzero"), p)
        } else {
            let num = (y2 + p - y1) % p;
            mul_mod(num, inv_mod((x2 + p - x1) % p, p).expect("x distinct"), p)
        };
        let x3 = (mul_mod(lambda, lambda, p) + 2 * p - x1 - x2) % p;
        let y3 = (mul_mod(lambda, (x1 + p - x3) % p, p) + p - y1) % p;
        Some((x3, y3))
    }

    pub fn mul(&self, mut k: u64, pt: Point) -> Point {
        let mut acc = None;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    pub(crate) fn random_point(&self, rng: &mut ChaCha8Rng) -> Point {
        let p = self.p;
        loop {
            let x = rng.random_range(0..p);
            let r = self.rhs(x);
            if r == 0 {
                return Some((x, 0));
            }
            if let Some(y) = sqrt_mod(r, p) {
                let y = if rng.random::<bool>() { y } else { p - y };
                return Some((x, y));
            }
        }
    }

    /// Order of pt, found by baby-step giant-step over the Hasse interval.
    pub fn point_order(&self, pt: Point) -> u64 {
        let p = self.p;
        let w = 2 * (4 * p).sqrt() + 1;
        let lo = p + 1 - w / 2;
        let hi = p + 1 + w / 2;
        let m = self
            .multiple_in(pt, lo, hi)
            .expect("Hasse interval holds a multiple");
        let mut ord = m;
        for (q, _) in factor(m) {
            while ord.is_multiple_of(q) && self.mul(ord / q, pt).is_none() {
                ord /= q;
            }
        }
        ord
    }

    /// Some m in [lo, hi] with m pt = O.
    fn multiple_in(&self, pt: Point, lo: u64, hi: u64) -> Option<u64> {
        let s = ((hi - lo) / 2).sqrt() + 1;
        let mut baby: HashMap<u64, (u64, u64)> = HashMap::with_capacity(s as usize);
        let mut q = pt;
        for j in 1..=s {
            match q {
                // The order divides j <= s; any multiple in range will do.
                None => return Some(hi / j * j),
                Some((x, y)) => {
                    baby.entry(x).or_insert((j, y));
                }
            }
            q = self.add(q, pt);
        }
        let step = 2 * s + 1;
        let jump = self.mul(step, pt);
        let mut c = lo + s;
        let mut r = self.mul(c, pt);
        while c <= hi + s {
            match r {
                None => return Some(c),
                Some((x, y)) => {
                    if let Some(&(j, yj)) = baby.get(&x) {
                        // c P = +-j P.
                        return Some(if y == yj { c - j } else { c + j });
                    }
                }
            }
            r = self.add(r, jump);
            c += step;
        }
        None
    }
}

/// A square root of a mod p (p an odd prime), by Tonelli-Shanks.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)?;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// p + 1 + sum_x (x^3 + ax + b | p).
pub fn naive_count(e: &FpCurve) -> u64 {
    let p = e.p;
    let mut square = vec![false; p as usize];
    for y in 1..p {
        square[mul_mod(y, y, p) as usize] = true;
    }
    let mut n = 1u64;
    for x in 0..p {
        let r = e.rhs(x);
        n += if r == 0 {
            1
        } else if square[r as usize] {
            2
        } else {
            0
        };
    }
    n
}

/// |E(F_p)| from point orders on E and its twist, using N + N' = 2p + 2.
pub fn bsgs_count(e: &FpCurve, seed: u64) -> Result<u64> {
    let p = e.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p);
    let tw = e.twist();
    let bound = (4 * p).sqrt();
    let lo = p + 1 - bound;
    let hi = p + 1 + bound;
    let (mut le, mut lt) = (1u64, 1u64);
    for _ in 0..32 {
        let pe = e.random_point(&mut rng);
        le = lcm(le, e.point_order(pe));
        let pt = tw.random_point(&mut rng);
        lt = lcm(lt, tw.point_order(pt));
        let mut found = None;
        let mut n = lo.div_ceil(le) * le;
        let mut unique = true;
        while n <= hi {
            if (2 * p + 2 - n).is_multiple_of(lt) {
                if found.is_some() {
                    unique = false;
                    break;
                }
                found = Some(n);
            }
            n += le;
        }
        if let (Some(n), true) = (found, unique) {
            return Ok(n);
        }
    }
    Err(Error::Inconsistent(format!(
        "no unique group order at p = {p}"
    )))
}

/// |E(F_p)| for a good prime p > 3.
pub fn point_count(curve: &WeierstrassCurve, p: u64, seed: u64) -> Result<u64> {
    count_on(&FpCurve::reduce(curve, p)?, seed)
}

pub fn count_on(e: &FpCurve, seed: u64) -> Result<u64> {
    let p = e.p;
    let n = if p <= NAIVE_LIMIT {
        naive_count(e)
    } else {
        match bsgs_count(e, seed) {
            Ok(n) => n,
            // Only tiny fields defeat the twist argument; count directly there.
            Err(_) if p <= 1_000_000 => naive_count(e),
            Err(err) => return Err(err),
        }
    };
    check_hasse(p, n)?;
    Ok(n)
}

/// |N - (p + 1)| <= 2 sqrt(p).
pub fn check_hasse(p: u64, n: u64) -> Result<()> {
    let t = (p + 1).abs_diff(n);
    if t * t > 4 * p {
        return Err(Error::Inconsistent(format!(
            "N = {n} violates the Hasse bound at p = {p}"
        )));
    }
    Ok(())
}
