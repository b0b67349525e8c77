use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{euler_phi, rat_from_str, rat_to_f64, rat_to_string};
use crate::error::{invalid, Result};
use crate::Rational;

/// Largest cyclotomic order supported.
pub const MAX_CYCLOTOMIC_ORDER: u32 = 64;

/// Integer coefficients of Phi_e for e = 0..=64 (index 0 unused), low degree first.
fn cyclotomic_polys() -> &'static [Vec<i64>] {
    static POLYS: OnceLock<Vec<Vec<i64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let top = MAX_CYCLOTOMIC_ORDER as usize;
        let mut polys: Vec<Vec<i64>> = vec![Vec::new(); top + 1];
        for e in 1..=top {
            // x^e - 1 divided by Phi_d for every proper divisor d.
            let mut num = vec![0i64; e + 1];
            num[0] = -1;
            num[e] = 1;
            for d in (1..e).filter(|d| e % d == 0) {
                num = exact_div(&num, &polys[d]);
            }
            polys[e] = num;
        }
        polys
    })
}

/// Quotient of monic integer polynomial division with zero remainder.
fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut r = num.to_vec();
    let dn = den.len() - 1;
    let mut q = vec![0i64; r.len() - dn];
    for i in (0..q.len()).rev() {
        let c = r[i + dn];
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            r[i + j] -= c * dj;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

/// An element of Q(zeta_e) in the power basis 1, zeta, ..., zeta^(phi(e)-1).
#[derive(Clone, PartialEq, Eq)]
pub struct CyclotomicNumber {
    order: u32,
    coeffs: Vec<Rational>,
}

impl CyclotomicNumber {
    fn check_order(e: u32) -> Result<()> {
        if e == 0 || e > MAX_CYCLOTOMIC_ORDER {
            return invalid(format!(
                "cyclotomic order {e} outside 1..={MAX_CYCLOTOMIC_ORDER}"
            ));
        }
        Ok(())
    }

    pub fn zero(e: u32) -> Result<Self> {
        Self::check_order(e)?;
        Ok(CyclotomicNumber {
            order: e,
            coeffs: vec![Rational::zero(); euler_phi(e as u64) as usize],
        })
    }

    pub fn rational(e: u32, r: Rational) -> Result<Self> {
        let mut z = Self::zero(e)?;
        z.coeffs[0] = r;
        Ok(z)
    }

    pub fn one(e: u32) -> Result<Self> {
        Self::rational(e, Rational::one())
    }

    /// zeta_e^k.
    pub fn zeta_pow(e: u32, k: u64) -> Result<Self> {
        let mut counts = vec![BigInt::zero(); e.max(1) as usize];
        counts[(k % e.max(1) as u64) as usize] = BigInt::one();
        Self::from_power_counts(e, &counts, &BigInt::one())
    }

    /// (sum_k counts[k] zeta^k) / denom, with `counts` indexed by k mod e.
    pub fn from_power_counts(e: u32, counts: &[BigInt], denom: &BigInt) -> Result<Self> {
        Self::check_order(e)?;
        if counts.len() != e as usize {
            return invalid("power count vector must have length e");
        }
        if denom.is_zero() {
            return invalid("zero denominator");
        }
        let poly: Vec<Rational> = counts
            .iter()
            .map(|c| Rational::new(c.clone(), denom.clone()))
            .collect();
        Ok(Self::reduce(e, poly))
    }

    fn reduce(e: u32, mut poly: Vec<Rational>) -> Self {
        let phi_e = &cyclotomic_polys()[e as usize];
        let deg = phi_e.len() - 1;
        for i in (deg..poly.len()).rev() {
            if poly[i].is_zero() {
                continue;
            }
            let c = poly[i].clone();
            for (j, &pj) in phi_e.iter().enumerate() {
                if pj != 0 {
                    poly[i - deg + j] -= &c * Rational::from_integer(BigInt::from(pj));
                }
            }
        }
        poly.resize(deg, Rational::zero());
        CyclotomicNumber {
            order: e,
            coeffs: poly,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    fn same_order(&self, o: &Self) {
        assert_eq!(self.order, o.order, "cyclotomic orders differ");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.same_order(o);
        CyclotomicNumber {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        CyclotomicNumber {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        CyclotomicNumber {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a * r).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.same_order(o);
        if let Some(r) = self.as_rational() {
            return o.scale(&r);
        }
        if let Some(r) = o.as_rational() {
            return self.scale(&r);
        }
        let n = self.coeffs.len();
        let mut prod = vec![Rational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Self::reduce(self.order, prod)
    }

    /// Complex conjugate (zeta -> zeta^-1).
    pub fn conj(&self) -> Self {
        let e = self.order as usize;
        let mut poly = vec![Rational::zero(); e];
        for (j, c) in self.coeffs.iter().enumerate() {
            poly[(e - j) % e] += c;
        }
        Self::reduce(self.order, poly)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The value as a rational, when all non-constant coefficients vanish.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Floating-point (re, im) for display.
    pub fn to_complex(&self) -> (f64, f64) {
        let e = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (j, c)| {
                let t = std::f64::consts::TAU * j as f64 / e;
                let v = rat_to_f64(c);
                (re + v * t.cos(), im + v * t.sin())
            })
    }

    /// Upper bound on |z| from the coefficient sum (exact, crude).
    pub fn abs_bound(&self) -> Rational {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

impl fmt::Debug for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| match j {
                0 => rat_to_string(c),
                _ => format!("({})z^{j}", rat_to_string(c)),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0 [Q(z_{})]", self.order)
        } else {
            write!(f, "{} [Q(z_{})]", terms.join(" + "), self.order)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CycloWire {
    order: u32,
    coeffs: Vec<String>,
}

impl Serialize for CyclotomicNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycloWire {
            order: self.order,
            coeffs: self.coeffs.iter().map(rat_to_string).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CyclotomicNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = CycloWire::deserialize(d)?;
        let mut z = CyclotomicNumber::zero(w.order).map_err(D::Error::custom)?;
        if w.coeffs.len() > z.coeffs.len() {
            return Err(D::Error::custom("too many coefficients for the order"));
        }
        for (i, c) in w.coeffs.iter().enumerate() {
            z.coeffs[i] = rat_from_str(c).map_err(D::Error::custom)?;
        }
        Ok(z)
    }
}

/// Degree of Phi_e, for tests and reports.
pub fn cyclotomic_degree(e: u32) -> Option<usize> {
    (1..=MAX_CYCLOTOMIC_ORDER)
        .contains(&e)
        .then(|| cyclotomic_polys()[e as usize].len() - 1)
}

/// Phi_e(x) evaluated at an integer, used as an independent check of the table.
pub fn cyclotomic_eval(e: u32, x: i64) -> Option<i128> {
    let p = cyclotomic_polys().get(e as usize)?;
    let mut acc: i128 = 0;
    for &c in p.iter().rev() {
        acc = acc * x as i128 + c as i128;
    }
    (e >= 1).then_some(acc)
}
