//! Curves, discriminant arithmetic, Serre-curve specs and the built-in
//! catalog of worked examples.

mod entries;
mod family;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

pub use entries::{catalog_entries, catalog_entry, CATALOG_IDS};
pub use family::{xh_family, xh_family_root, NonAbelianMarker, XhFamilyPoint};

use crate::arith::{factor, factor_bigint, quadratic_discriminant, squarefree_part};
use crate::entanglement::{Component, ComponentMap, EntanglementSpec, MapTerm, Relation};
use crate::error::{invalid, Error, Result};
use crate::groups::MatrixGroup;
use crate::Rational;

/// Integral model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeierstrassCurve {
    pub a: [i64; 5],
    #[serde(serialize_with = "ser_bigint")]
    discriminant: BigInt,
    bad_primes: Vec<u64>,
}

fn ser_bigint<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// b2, b4, b6, b8 of a Weierstrass model.
pub fn b_invariants(a: &[i64; 5]) -> [BigInt; 4] {
    let [a1, a2, a3, a4, a6] = a.map(BigInt::from);
    let b2 = &a1 * &a1 + 4 * &a2;
    let b4 = 2 * &a4 + &a1 * &a3;
    let b6 = &a3 * &a3 + 4 * &a6;
    let b8 = &a1 * &a1 * &a6 + 4 * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4;
    [b2, b4, b6, b8]
}

/// c4 and c6.
pub fn c_invariants(a: &[i64; 5]) -> (BigInt, BigInt) {
    let [b2, b4, b6, _] = b_invariants(a);
    let c4 = &b2 * &b2 - 24 * &b4;
    let c6 = -(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - 216 * &b6;
    (c4, c6)
}

/// The discriminant; an error for singular models.
pub fn discriminant(a: &[i64; 5]) -> Result<BigInt> {
    let [b2, b4, b6, b8] = b_invariants(a);
    let d: BigInt = -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6;
    if d.is_zero() {
        return invalid(format!("model {a:?} is singular"));
    }
    Ok(d)
}

/// Discriminant of Q(sqrt(delta)).
pub fn quad_field_discriminant(delta: &BigInt) -> Result<BigInt> {
    quadratic_discriminant(delta)
}

impl WeierstrassCurve {
    pub fn new(a: [i64; 5]) -> Result<Self> {
        let discriminant = discriminant(&a)?;
        let bad_primes = factor_bigint(&discriminant)?
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        Ok(WeierstrassCurve {
            a,
            discriminant,
            bad_primes,
        })
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    /// Primes dividing the discriminant (a superset of the bad primes).
    pub fn bad_primes(&self) -> &[u64] {
        &self.bad_primes
    }

    pub fn c_invariants(&self) -> (BigInt, BigInt) {
        c_invariants(&self.a)
    }

    pub fn j_invariant(&self) -> Rational {
        let (c4, _) = self.c_invariants();
        Rational::new(&c4 * &c4 * &c4, self.discriminant.clone())
    }

    pub fn serre_data(&self) -> Result<SerreCurveSpec> {
        SerreCurveSpec::from_delta(&self.discriminant)
    }
}

/// Discriminant data of Q(sqrt(Delta)) used by the Serre-curve formulas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SerreCurveSpec {
    /// Discriminant of Q(sqrt(Delta)).
    pub d: i64,
    pub delta_sf: i64,
    pub ord2_d: u32,
    /// delta_sf / 2 when ord2(D) = 3.
    pub delta_prime: Option<i64>,
}

impl SerreCurveSpec {
    pub fn from_delta(delta: &BigInt) -> Result<Self> {
        let sf = squarefree_part(delta)?;
        let d = quadratic_discriminant(delta)?;
        Self::build(
            d.to_i64()
                .ok_or_else(|| Error::Unsupported("discriminant too large".into()))?,
            sf.to_i64()
                .ok_or_else(|| Error::Unsupported("discriminant too large".into()))?,
        )
    }

    /// From a fundamental discriminant D.
    pub fn from_discriminant(d: i64) -> Result<Self> {
        let r = d.rem_euclid(4);
        let sf = if r == 1 {
            d
        } else if r == 0 {
            d / 4
        } else {
            0
        };
        if sf == 0 || d == 1 || squarefree_part(&BigInt::from(sf))? != BigInt::from(sf) {
            return invalid(format!("{d} is not a quadratic field discriminant"));
        }
        if r == 0 && sf.rem_euclid(4) == 1 {
            return invalid(format!("{d} is not a quadratic field discriminant"));
        }
        Self::build(d, sf)
    }

    fn build(d: i64, sf: i64) -> Result<Self> {
        let ord2_d = d.unsigned_abs().trailing_zeros();
        if ![0, 2, 3].contains(&ord2_d) {
            return invalid(format!("{d} is not a quadratic field discriminant"));
        }
        Ok(SerreCurveSpec {
            d,
            delta_sf: sf,
            ord2_d,
            delta_prime: (ord2_d == 3).then_some(sf / 2),
        })
    }

    /// Odd primes dividing D.
    pub fn odd_primes(&self) -> Vec<u64> {
        factor(self.d.unsigned_abs())
            .into_iter()
            .map(|(p, _)| p)
            .filter(|&p| p != 2)
            .collect()
    }

    /// The 2-part of the quadratic character of D, as a character of
    /// (Z/2^ord2)^x given on generators (None when D is odd).
    fn two_adic_character(&self) -> Option<(u64, Vec<(u64, Vec<u64>)>)> {
        match self.ord2_d {
            0 => None,
            // chi_{-4}
            2 => Some((4, vec![(3, vec![1])])),
            _ => {
                let dp = self.delta_prime.expect("set when ord2 = 3");
                if dp.rem_euclid(4) == 1 {
                    // chi_8: +1 on +-1 mod 8
                    Some((8, vec![(3, vec![1]), (5, vec![1])]))
                } else {
                    // chi_{-8}: +1 on 1, 3 mod 8
                    Some((8, vec![(3, vec![0]), (5, vec![1])]))
                }
            }
        }
    }

    /// Value of the 2-part character at an odd residue: 0 for +1, 1 for -1.
    pub fn two_adic_sign(&self, x: u64) -> u64 {
        match self.two_adic_character() {
            None => 0,
            Some((4, _)) => u64::from(x % 4 == 3),
            Some(_) => {
                let dp = self.delta_prime.expect("set when ord2 = 3");
                let r = x % 8;
                if dp.rem_euclid(4) == 1 {
                    u64::from(r == 3 || r == 5)
                } else {
                    u64::from(r == 5 || r == 7)
                }
            }
        }
    }
}

/// Galois data of a Serre curve: full GL2 at every prime, glued only by
/// eps(A mod 2) = alpha(det A), alpha the quadratic character of D.
/// Components sit at 2^max(1, ord2 D) and at each odd prime of D.
pub fn serre_galois_spec(serre: &SerreCurveSpec, cap: usize) -> Result<EntanglementSpec> {
    let e2 = serre.ord2_d.max(1);
    let odd = serre.odd_primes();
    for &p in &odd {
        if crate::arith::gl2_order(p) > cap as u64 {
            return Err(Error::CapExceeded { cap });
        }
    }
    let kappa = serre.two_adic_character();
    if odd.is_empty() {
        // |D| in {4, 8}: the condition lives inside the 2-adic component.
        let level = 1u32 << e2;
        let s = serre.clone();
        let g = MatrixGroup::from_predicate(level, move |m| {
            u64::from(m.signature_mod2()) == s.two_adic_sign(m.det() as u64)
        })?;
        return EntanglementSpec::new(vec![Component::new(2, e2, g)?], Vec::new());
    }
    let mut comps = vec![Component::full(2, e2)?];
    let mut terms2 = vec![MapTerm::SignatureMod2 { image: None }];
    if let Some((modulus, values)) = kappa {
        terms2.push(MapTerm::DetModTarget { modulus, values });
    }
    let mut maps = vec![ComponentMap {
        component: 0,
        terms: terms2,
    }];
    for (i, &p) in odd.iter().enumerate() {
        comps.push(Component::full(p, 1)?);
        maps.push(ComponentMap {
            component: i + 1,
            terms: vec![MapTerm::DetLegendre { image: None }],
        });
    }
    EntanglementSpec::new(
        comps,
        vec![Relation {
            target_divisors: vec![2],
            maps,
        }],
    )
}

/// How the Galois image of a catalog curve is described.
#[derive(Clone, Debug)]
pub enum CurveGalois {
    Spec(EntanglementSpec),
    /// A Serre curve; the spec is built on demand.
    Serre(SerreCurveSpec),
    NonAbelian(NonAbelianMarker),
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: String,
    pub curve: WeierstrassCurve,
    pub m_e: u64,
    pub galois: CurveGalois,
    pub notes: Vec<String>,
}

impl CatalogEntry {
    pub fn to_json_value(&self) -> serde_json::Value {
        let galois = match &self.galois {
            CurveGalois::Spec(s) => serde_json::json!({ "spec": s.to_json_value() }),
            CurveGalois::Serre(s) => serde_json::json!({ "serre": s }),
            CurveGalois::NonAbelian(m) => serde_json::json!({ "non_abelian": m.to_json_value() }),
        };
        serde_json::json!({
            "id": self.id,
            "curve": self.curve,
            "m_e": self.m_e,
            "galois": galois,
            "notes": self.notes,
        })
    }
}

/// A rational t with t^k = r, if any.
pub(crate) fn rational_root(r: &Rational, k: u32) -> Option<Rational> {
    let root = |n: &BigInt| -> Option<BigInt> {
        if n.is_negative() {
            if k.is_multiple_of(2) {
                return None;
            }
            let m = (-n).nth_root(k);
            (m.pow(k) == -n).then(|| -m)
        } else {
            let m = n.nth_root(k);
            (m.pow(k) == *n).then_some(m)
        }
    };
    Some(Rational::new(root(r.numer())?, root(r.denom())?))
}
