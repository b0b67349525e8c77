use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{rational_root, WeierstrassCurve};
use crate::arith::factor_bigint;
use crate::error::{invalid, Error, Result};
use crate::groups::{find_isomorphism, MatrixGroup, ProductSubgroup, ResidueMatrix};
use crate::Rational;

/// Galois data for curves whose 2-division field sits inside the 3-division
/// field: G(6) is the graph of GL2(Z/3) -> GL2(Z/3)/Q8 = GL2(Z/2), full
/// elsewhere. The (2,3) block has a non-abelian entanglement and is counted
/// directly instead of through characters.
#[derive(Clone, Debug)]
pub struct NonAbelianMarker {
    pub m_e: u64,
    h: ProductSubgroup,
}

impl NonAbelianMarker {
    pub fn level_six() -> Result<Self> {
        let g3 = MatrixGroup::full_gl2(3)?;
        let g2 = MatrixGroup::full_gl2(2)?;
        let q8 = MatrixGroup::close(
            &[
                ResidueMatrix::new(3, [0, 2, 1, 0])?,
                ResidueMatrix::new(3, [1, 2, 2, 2])?,
                ResidueMatrix::new(3, [2, 0, 0, 2])?,
            ],
            3,
        )?;
        let quo = g3.quotient(&q8)?;
        let as_abstract = g2.quotient(&MatrixGroup::trivial(2))?;
        let iso = find_isomorphism(&quo.group, &as_abstract.group)
            .ok_or_else(|| Error::Inconsistent("GL2(3)/Q8 is not GL2(2)".into()))?;
        let mut g2_of_coset = vec![0u64; as_abstract.group.order()];
        for (i, &c) in as_abstract.coset_of.iter().enumerate() {
            g2_of_coset[c] = g2.packed()[i];
        }
        let elements = g3
            .packed()
            .iter()
            .zip(&quo.coset_of)
            .map(|(&k, &c)| vec![g2_of_coset[iso[c]], k])
            .collect();
        let h = ProductSubgroup::from_elements(vec![g2, g3], elements)?;
        Ok(NonAbelianMarker { m_e: 6, h })
    }

    /// The level-6 image inside GL2(Z/2) x GL2(Z/3).
    pub fn subgroup(&self) -> &ProductSubgroup {
        &self.h
    }

    /// |H cap (S2 x S3)| / |H| for local conditions at 2 and 3.
    pub fn block_fraction(
        &self,
        at2: impl Fn(&ResidueMatrix) -> bool,
        at3: impl Fn(&ResidueMatrix) -> bool,
    ) -> Rational {
        let hits = self
            .h
            .elements()
            .filter(|t| at2(&t[0]) && at3(&t[1]))
            .count();
        Rational::new(BigInt::from(hits), BigInt::from(self.h.order()))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        // (theta(g), g) for generators g of GL2(Z/3).
        let gens: Vec<[[u32; 4]; 2]> = self.h.factors()[1]
            .generators()
            .iter()
            .filter_map(|g| self.h.elements().find(|t| t[1] == *g))
            .map(|t| [t[0].entries(), t[1].entries()])
            .collect();
        serde_json::json!({
            "level": 6,
            "order": self.h.order(),
            "rule": "the (2,3) factor is |G(6) cap S(6)|/|G(6)|, which equals |S(2)|/|G(2)|",
            "generators": gens,
        })
    }
}

/// One point of the family j = 2^10 3^3 t^3 (1 - 4t^3).
#[derive(Clone, Debug)]
pub struct XhFamilyPoint {
    pub t: Rational,
    pub j: Rational,
    /// A short model with this j, when its coefficients fit in i64.
    pub curve: Option<WeierstrassCurve>,
}

pub fn xh_family(t: &Rational) -> Result<XhFamilyPoint> {
    if t.is_zero() {
        return invalid("t = 0 gives j = 0");
    }
    let t3 = t * t * t;
    let j = Rational::from_integer(BigInt::from(27648))
        * &t3
        * (Rational::one() - Rational::from_integer(BigInt::from(4)) * &t3);
    if j.is_zero() || j == Rational::from_integer(BigInt::from(1728)) {
        return invalid(format!("t = {t} gives j = {j}"));
    }
    let curve = model_with_j(&j).and_then(|a| WeierstrassCurve::new(a).ok());
    Ok(XhFamilyPoint {
        t: t.clone(),
        j,
        curve,
    })
}

/// A rational t with 2^10 3^3 t^3 (1 - 4t^3) = j, if there is one.
pub fn xh_family_root(j: &Rational) -> Option<Rational> {
    // u = t^3 solves 4u^2 - u + j/27648 = 0, so u = (1 +- sqrt(1 - j/1728)) / 8.
    let disc = Rational::one() - j / Rational::from_integer(BigInt::from(1728));
    let s = rational_root(&disc, 2)?;
    let eighth = Rational::new(BigInt::one(), BigInt::from(8));
    [
        (Rational::one() + &s) * &eighth,
        (Rational::one() - &s) * &eighth,
    ]
    .iter()
    .filter(|u| !u.is_zero())
    .find_map(|u| rational_root(u, 3))
}

/// y^2 = x^3 + 3k d^2 x + 2k(1728d - n) d^3 with j = n/d and k = n(1728d - n),
/// with u^4 | a4 and u^6 | a6 scaled out.
fn model_with_j(j: &Rational) -> Option<[i64; 5]> {
    let (n, d) = (j.numer(), j.denom());
    let m = BigInt::from(1728) * d - n;
    let mut a4 = BigInt::from(3) * n * &m * d * d;
    let mut a6 = BigInt::from(2) * n * &m * &m * d * d * d;
    let g = a4.gcd(&a6);
    for (p, _) in factor_bigint(&g).ok()? {
        let (p4, p6) = (BigInt::from(p).pow(4), BigInt::from(p).pow(6));
        while (&a4 % &p4).is_zero() && (&a6 % &p6).is_zero() {
            a4 /= &p4;
            a6 /= &p6;
        }
    }
    Some([0, 0, 0, a4.to_i64()?, a6.to_i64()?])
}
