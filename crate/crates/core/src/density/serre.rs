//! Closed forms for Serre curves, in terms of the discriminant D of Q(sqrt(Delta)).

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{finish, Assembled, DensityProblem, DensityResult, LocalData, Path};
use crate::arith::{euler_phi, factor, gcd, gl2_order, legendre, valuation};
use crate::catalog::SerreCurveSpec;
use crate::error::{invalid, Result};
use crate::Rational;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// -1/(|GL2(l)| - 1).
fn cyclic_e(l: u64) -> Rational {
    -Rational::new(BigInt::one(), BigInt::from(gl2_order(l) - 1))
}

pub fn serre_cyclic(s: &SerreCurveSpec, l_max: u64) -> Result<DensityResult> {
    let (correction, e_factors) = if s.ord2_d == 0 {
        let mut es = vec![(2, r(-1, 5))];
        es.extend(s.odd_primes().into_iter().map(|l| (l, cyclic_e(l))));
        let prod = es.iter().fold(Rational::one(), |acc, (_, e)| acc * e);
        (Rational::one() + prod, Some(es))
    } else {
        (Rational::one(), None)
    };
    let a = Assembled {
        local: Vec::new(),
        correction,
        e_factors,
        path: Path::SerreClosedForm,
    };
    finish(&DensityProblem::Cyclic, a, l_max)
}

/// E_2 for the AP problem (zero when Phi is trivial at the working level).
pub fn serre_ap_e2(a: u64, f: u64, s: &SerreCurveSpec) -> Rational {
    let e2 = valuation(f, 2);
    let d_abs = s.d.unsigned_abs();
    match s.ord2_d {
        0 => r(-1, 5),
        _ if d_abs == 4 || d_abs == 8 => Rational::zero(),
        2 if e2 >= 2 => {
            // chi_{-4}(a) is constant on S(2); the Delta part averages -1/5.
            if a % 4 == 1 {
                r(-1, 5)
            } else {
                r(1, 5)
            }
        }
        3 if e2 >= 3 => {
            if s.two_adic_sign(a) == 0 {
                r(-1, 5)
            } else {
                r(1, 5)
            }
        }
        _ => Rational::zero(),
    }
}

/// delta_l at a prime l | f.
pub fn serre_ap_delta(a: u64, f: u64, l: u64, s: &SerreCurveSpec) -> Rational {
    let e = valuation(f, l);
    debug_assert!(e > 0);
    if a.is_multiple_of(l) {
        return Rational::zero();
    }
    let base = Rational::new(BigInt::one(), BigInt::from(euler_phi(l.pow(e))));
    let d_abs = s.d.unsigned_abs();
    if l == 2 && (d_abs == 4 || d_abs == 8) && e >= s.ord2_d {
        // Q(E[2]) meets Q(zeta_{2^e}) in Q(sqrt(D)).
        return if s.two_adic_sign(a) == 1 {
            base
        } else {
            base * r(2, 3)
        };
    }
    if a % l == 1 {
        base * (Rational::one() - Rational::new(BigInt::one(), BigInt::from(l * l * l - l)))
    } else {
        base
    }
}

pub fn serre_ap(a: u64, f: u64, s: &SerreCurveSpec, l_max: u64) -> Result<DensityResult> {
    if f == 0 {
        return invalid("modulus f must be positive");
    }
    let a = a % f;
    let problem = DensityProblem::CyclicAp { a, f };
    let local: Vec<LocalData> = factor(f)
        .into_iter()
        .map(|(l, e)| {
            let delta = serre_ap_delta(a, f, l, s);
            LocalData {
                prime: l,
                exponent: e,
                level: l.pow(e),
                factor: delta.clone(),
                delta,
                counts: None,
            }
        })
        .collect();
    let e2 = serre_ap_e2(a, f, s);
    let (correction, e_factors) = if gcd(a, f) > 1 || e2.is_zero() {
        (Rational::one(), None)
    } else {
        let mut es = vec![(2, e2)];
        for l in s.odd_primes() {
            let e = if f.is_multiple_of(l) {
                r(legendre(a as i64, l) as i64, 1)
            } else {
                cyclic_e(l)
            };
            es.push((l, e));
        }
        let prod = es.iter().fold(Rational::one(), |acc, (_, e)| acc * e);
        (Rational::one() + prod, Some(es))
    };
    let asm = Assembled {
        local,
        correction,
        e_factors,
        path: Path::SerreClosedForm,
    };
    finish(&problem, asm, l_max)
}

/// 1/(l^3 - 2l^2 - l + 3); equals 1 at l = 2.
pub fn koblitz_e(l: u64) -> Rational {
    let l = l as i64;
    r(1, l * l * l - 2 * l * l - l + 3)
}

/// Koblitz with t = 1.
pub fn serre_koblitz(s: &SerreCurveSpec, l_max: u64) -> Result<DensityResult> {
    let (correction, e_factors) = if s.ord2_d == 0 {
        let mut es = vec![(2, koblitz_e(2))];
        es.extend(s.odd_primes().into_iter().map(|l| (l, koblitz_e(l))));
        let prod = es.iter().fold(Rational::one(), |acc, (_, e)| acc * e);
        (Rational::one() + prod, Some(es))
    } else {
        (Rational::one(), None)
    };
    let a = Assembled {
        local: Vec::new(),
        correction,
        e_factors,
        path: Path::SerreClosedForm,
    };
    finish(&DensityProblem::Koblitz { t: 1 }, a, l_max)
}
