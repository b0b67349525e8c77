//! Artin's primitive root constant, as a character-corrected Euler product
//! and as the Moebius sum over Kummer degrees.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::euler::{euler_product, EulerProduct, FixedInterval, TailKind};
use crate::arith::{factor, gcd, perfect_power, quadratic_discriminant, serde_rational};
use crate::error::{invalid, Result};
use crate::Rational;

#[derive(Clone, Debug, Serialize)]
pub struct ArtinResult {
    pub g: i64,
    /// g = g0^h with h maximal.
    pub h: u32,
    /// Discriminant of Q(sqrt(g)).
    pub d: i64,
    #[serde(with = "serde_rational")]
    pub correction: Rational,
    pub product: EulerProduct,
    /// correction times the product.
    pub constant: FixedInterval,
    /// sum_{n <= N} mu(n)/[F_n : Q].
    pub sum_head: f64,
    pub sum_terms: u64,
    /// |sum_{n > N}| is at most this.
    pub sum_tail: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_reason: Option<String>,
}

/// Constants for g with L the product truncation and N the sum length.
pub fn artin_classical(g: i64, l_max: u64, n_terms: u64) -> Result<ArtinResult> {
    if (-1..=1).contains(&g) {
        return invalid(format!("g = {g} has no primitive-root density"));
    }
    let (_, h) = perfect_power(g);
    let d = quadratic_discriminant(&BigInt::from(g))
        .ok()
        .and_then(|x| x.to_i64())
        .unwrap_or(1);
    let h_primes: Vec<u64> = factor(h as u64).into_iter().map(|(p, _)| p).collect();
    if let Some(&top) = h_primes.last() {
        if top > l_max {
            return invalid(format!("truncation L = {l_max} is below {top}"));
        }
    }
    let product = euler_product(l_max, &[], TailKind::Quadratic, |l| {
        let l = BigInt::from(l);
        if h_primes.iter().any(|p| BigInt::from(*p) == l) {
            (&l - 2u32, &l - 1u32)
        } else {
            (&l * &l - &l - 1u32, &l * &l - &l)
        }
    })?;
    // A square is never a primitive root; the 2-factor of the product is then 0.
    let square = h % 2 == 0;
    let correction = if !square && d.rem_euclid(4) == 1 {
        let prod = factor(d.unsigned_abs())
            .into_iter()
            .fold(Rational::one(), |acc, (l, _)| {
                let e = if (h as u64).is_multiple_of(l) {
                    Rational::new(-BigInt::one(), BigInt::from(l - 2))
                } else {
                    Rational::new(-BigInt::one(), BigInt::from(l * l - l - 1))
                };
                acc * e
            });
        Rational::one() - prod
    } else {
        Rational::one()
    };
    let constant = if square {
        FixedInterval::zero()
    } else {
        product.value.scale_by(&correction)
    };
    let (sum_head, sum_tail) = if square {
        (0.0, 0.0)
    } else {
        moebius_sum(h as u64, d, n_terms)
    };
    Ok(ArtinResult {
        g,
        h,
        d,
        correction,
        product,
        constant,
        sum_head,
        sum_terms: n_terms,
        sum_tail,
        zero_reason: square.then(|| format!("{g} is a perfect square")),
    })
}

/// Head of sum mu(n) gcd(n,h) eps(n) / (n phi(n)) with eps(n) = 2 when
/// n is even and D | n. The tail is at most 2h * 2 zeta(2)zeta(3)/zeta(6) / N.
fn moebius_sum(h: u64, d: i64, n: u64) -> (f64, f64) {
    let n = n.max(1) as usize;
    let mut mu = vec![1i8; n + 1];
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    let mut composite = vec![false; n + 1];
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        for k in (p..=n).step_by(p) {
            if k > p {
                composite[k] = true;
            }
            mu[k] = -mu[k];
            phi[k] -= phi[k] / p as u64;
        }
        let sq = p.saturating_mul(p);
        if sq <= n {
            for k in (sq..=n).step_by(sq) {
                mu[k] = 0;
            }
        }
    }
    let dabs = d.unsigned_abs();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in 1..=n {
        if mu[k] == 0 {
            continue;
        }
        let k64 = k as u64;
        let eps = if k64.is_multiple_of(2) && dabs > 1 && k64.is_multiple_of(dabs) {
            2.0
        } else {
            1.0
        };
        let term = f64::from(mu[k]) * gcd(k64, h) as f64 * eps / (k as f64 * phi[k] as f64);
        // Kahan summation.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let tail = 7.8 * h as f64 / n as f64;
    (sum, tail)
}
