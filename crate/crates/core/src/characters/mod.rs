//! Finite abelian groups in invariant-factor form and their characters,
//! valued exactly in cyclotomic fields.

mod cyclotomic;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub use cyclotomic::{cyclotomic_degree, cyclotomic_eval, CyclotomicNumber, MAX_CYCLOTOMIC_ORDER};

use crate::arith::{gcd, lcm};
use crate::error::{invalid, Error, Result};
use crate::groups::AbstractFiniteGroup;

/// Z/d_1 x ... x Z/d_k together with an identification of some source
/// group's element ids with exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    cyclic_orders: Vec<u64>,
    generators: Vec<usize>,
    iso: Vec<Vec<u64>>,
    /// Inverse of `iso`, indexed by the mixed-radix code of a vector.
    source_of: Vec<usize>,
}

impl FiniteAbelianGroup {
    /// The product of cyclic groups of the given orders, with source ids equal
    /// to mixed-radix codes (last coordinate varies fastest). Orders need not
    /// form a divisor chain; factors of order 1 are dropped.
    pub fn from_cyclic_orders(orders: &[u64]) -> Result<Self> {
        if orders.contains(&0) {
            return invalid("cyclic orders must be positive");
        }
        let cyclic_orders: Vec<u64> = orders.iter().copied().filter(|&d| d > 1).collect();
        let n: u64 = cyclic_orders.iter().product();
        if n > 1 << 20 {
            return invalid(format!("abelian group of order {n} is too large"));
        }
        let mut g = FiniteAbelianGroup {
            cyclic_orders,
            generators: Vec::new(),
            iso: Vec::new(),
            source_of: (0..n as usize).collect(),
        };
        g.iso = (0..n as usize).map(|c| g.decode(c)).collect();
        g.generators = (0..g.rank())
            .map(|i| {
                let mut v = vec![0; g.rank()];
                v[i] = 1;
                g.encode(&v)
            })
            .collect();
        Ok(g)
    }

    pub fn cyclic_orders(&self) -> &[u64] {
        &self.cyclic_orders
    }

    pub fn rank(&self) -> usize {
        self.cyclic_orders.len()
    }

    pub fn order(&self) -> usize {
        self.cyclic_orders.iter().product::<u64>() as usize
    }

    /// Least common multiple of the cyclic orders.
    pub fn exponent(&self) -> u64 {
        self.cyclic_orders.iter().fold(1, |a, &d| lcm(a, d))
    }

    pub fn is_trivial(&self) -> bool {
        self.cyclic_orders.is_empty()
    }

    /// Source ids of the chosen generators, one per cyclic factor.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Exponent vector of a source element.
    pub fn to_vector(&self, source: usize) -> &[u64] {
        &self.iso[source]
    }

    /// Source element with the given exponent vector.
    pub fn to_source(&self, v: &[u64]) -> usize {
        self.source_of[self.encode(v)]
    }

    /// Mixed-radix code of an exponent vector (entries reduced first).
    pub fn encode(&self, v: &[u64]) -> usize {
        debug_assert_eq!(v.len(), self.rank());
        v.iter()
            .zip(&self.cyclic_orders)
            .fold(0usize, |acc, (&x, &d)| acc * d as usize + (x % d) as usize)
    }

    pub fn decode(&self, mut c: usize) -> Vec<u64> {
        let mut v = vec![0; self.rank()];
        for i in (0..self.rank()).rev() {
            let d = self.cyclic_orders[i] as usize;
            v[i] = (c % d) as u64;
            c /= d;
        }
        v
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(&self.cyclic_orders)
            .map(|((&x, &y), &d)| (x + y) % d)
            .collect()
    }

    /// All exponent vectors in code order.
    pub fn vectors(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.order()).map(|c| self.decode(c))
    }

    /// The group as a multiplication table on mixed-radix codes.
    pub fn to_abstract(&self) -> AbstractFiniteGroup {
        let n = self.order();
        let vs: Vec<Vec<u64>> = self.vectors().collect();
        let mut table = Vec::with_capacity(n * n);
        for a in &vs {
            for b in &vs {
                table.push(self.encode(&self.add(a, b)));
            }
        }
        AbstractFiniteGroup::from_flat_table(n, table).expect("abelian table is valid")
    }
}

/// Invariant-factor decomposition d_1 | d_2 | ... of a commutative group,
/// with the isomorphism to the source verified on all pairs (or on all
/// element-generator pairs for large groups).
pub fn decompose_abelian(g: &AbstractFiniteGroup) -> Result<FiniteAbelianGroup> {
    if !g.is_abelian() {
        return Err(Error::NonAbelian("group is not commutative".into()));
    }
    let (orders, gens) = invariant_factors(g);
    let mut out = FiniteAbelianGroup::from_cyclic_orders(&orders)?;
    let n = g.order();
    let mut iso = vec![Vec::new(); n];
    let mut source_of = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    for code in 0..n {
        let v = out.decode(code);
        let x = v
            .iter()
            .zip(&gens)
            .fold(g.identity(), |acc, (&k, &s)| g.mul(acc, g.pow(s, k)));
        if std::mem::replace(&mut seen[x], true) {
            return Err(Error::Inconsistent("decomposition is not injective".into()));
        }
        iso[x] = v;
        source_of[code] = x;
    }
    let check = |x: usize, y: usize| {
        out.encode(&out.add(&iso[x], &iso[y])) == out.encode(&iso[g.mul(x, y)])
    };
    let ok = if n * n <= 1 << 22 {
        (0..n).all(|x| (0..n).all(|y| check(x, y)))
    } else {
        let gg = g.generators();
        (0..n).all(|x| gg.iter().all(|&s| check(x, s)))
    };
    if !ok {
        return Err(Error::Inconsistent(
            "decomposition is not a homomorphism".into(),
        ));
    }
    out.generators = gens;
    out.iso = iso;
    out.source_of = source_of;
    Ok(out)
}

/// Invariant factors and matching generator ids, largest factor last.
fn invariant_factors(g: &AbstractFiniteGroup) -> (Vec<u64>, Vec<usize>) {
    if g.order() == 1 {
        return (Vec::new(), Vec::new());
    }
    let (g1, n) =
        (0..g.order())
            .map(|x| (x, g.element_order(x)))
            .fold(
                (g.identity(), 1),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
    let cyc = g.subgroup(&[g1]);
    let q = g
        .quotient(&cyc)
        .expect("subgroups of abelian groups are normal");
    let (qorders, qgens) = invariant_factors(&q.group);
    let mut gens = Vec::with_capacity(qgens.len() + 1);
    for (&h, &e) in qgens.iter().zip(&qorders) {
        // Lift h to an element of the same order: h0^e = g1^k with e | k.
        let h0 = q.coset_of.iter().position(|&c| c == h).expect("surjective");
        let y = g.pow(h0, e);
        let k = (0..n)
            .find(|&k| g.pow(g1, k as u64) == y)
            .expect("h0^e lies in <g1>") as u64;
        debug_assert_eq!(k % e, 0);
        let shift = g.pow(g.inverse(g1), k / e);
        gens.push(g.mul(h0, shift));
    }
    gens.push(g1);
    let mut orders = qorders;
    orders.push(n as u64);
    (orders, gens)
}

/// A character of Z/d_1 x ... x Z/d_k: v -> zeta_e^(sum k_i v_i e/d_i).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    divisors: Vec<u64>,
    exponents: Vec<u64>,
}

impl Character {
    pub fn new(group: &FiniteAbelianGroup, exponents: Vec<u64>) -> Result<Self> {
        if exponents.len() != group.rank() {
            return invalid("exponent vector length differs from group rank");
        }
        let exponents = exponents
            .iter()
            .zip(group.cyclic_orders())
            .map(|(&k, &d)| k % d)
            .collect();
        Ok(Character {
            divisors: group.cyclic_orders().to_vec(),
            exponents,
        })
    }

    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&k| k == 0)
    }

    /// Exponent e of the value field Q(zeta_e): lcm of the divisors.
    pub fn field_order(&self) -> u64 {
        self.divisors.iter().fold(1, |a, &d| lcm(a, d))
    }

    /// Order of the character in the dual group.
    pub fn order(&self) -> u64 {
        self.exponents
            .iter()
            .zip(&self.divisors)
            .fold(1, |a, (&k, &d)| lcm(a, d / gcd(k, d)))
    }

    /// chi(v) = zeta_e^(returned value).
    pub fn value_exponent(&self, v: &[u64]) -> u64 {
        let e = self.field_order();
        self.exponents
            .iter()
            .zip(&self.divisors)
            .zip(v)
            .fold(0, |acc, ((&k, &d), &x)| {
                (acc + k * (x % d) % d * (e / d)) % e
            })
    }

    pub fn value(&self, v: &[u64]) -> Result<CyclotomicNumber> {
        CyclotomicNumber::zeta_pow(self.field_order() as u32, self.value_exponent(v))
    }

    /// Pointwise conjugate, i.e. the inverse character.
    pub fn conj(&self) -> Character {
        Character {
            divisors: self.divisors.clone(),
            exponents: self
                .exponents
                .iter()
                .zip(&self.divisors)
                .map(|(&k, &d)| (d - k) % d)
                .collect(),
        }
    }
}

/// All characters, lexicographic on exponent vectors (trivial first).
pub fn characters(a: &FiniteAbelianGroup) -> Vec<Character> {
    a.vectors()
        .map(|exponents| Character {
            divisors: a.cyclic_orders().to_vec(),
            exponents,
        })
        .collect()
}

/// Exact average of chi over a multiset of exponent vectors, given as
/// (vector, multiplicity) pairs. Errors on an empty multiset.
pub fn char_sum_average(chi: &Character, multiset: &[(Vec<u64>, u64)]) -> Result<CyclotomicNumber> {
    let e = chi.field_order();
    if e > MAX_CYCLOTOMIC_ORDER as u64 {
        return invalid(format!(
            "character values need Q(zeta_{e}), beyond the supported order"
        ));
    }
    let total: u64 = multiset.iter().map(|(_, m)| m).sum();
    if total == 0 {
        return invalid("average over an empty multiset");
    }
    let mut counts = vec![BigInt::from(0); e as usize];
    for (v, m) in multiset {
        counts[chi.value_exponent(v) as usize] += *m;
    }
    CyclotomicNumber::from_power_counts(e as u32, &counts, &BigInt::from(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn decompositions() {
        let t = decompose_abelian(&AbstractFiniteGroup::cyclic(1)).unwrap();
        assert!(t.cyclic_orders().is_empty());
        assert_eq!(
            decompose_abelian(&AbstractFiniteGroup::cyclic(2))
                .unwrap()
                .cyclic_orders(),
            &[2]
        );
        let (u5, _) = AbstractFiniteGroup::units_mod(5);
        assert_eq!(decompose_abelian(&u5).unwrap().cyclic_orders(), &[4]);
        let (u8, _) = AbstractFiniteGroup::units_mod(8);
        assert_eq!(decompose_abelian(&u8).unwrap().cyclic_orders(), &[2, 2]);
        let (u21, _) = AbstractFiniteGroup::units_mod(21);
        assert_eq!(decompose_abelian(&u21).unwrap().cyclic_orders(), &[2, 6]);
        let (u65, _) = AbstractFiniteGroup::units_mod(65);
        assert_eq!(decompose_abelian(&u65).unwrap().cyclic_orders(), &[4, 12]);
        let z = FiniteAbelianGroup::from_cyclic_orders(&[2, 3, 4]).unwrap();
        assert_eq!(
            decompose_abelian(&z.to_abstract()).unwrap().cyclic_orders(),
            &[2, 12]
        );
    }

    #[test]
    fn rejects_non_abelian() {
        let g = crate::groups::MatrixGroup::full_gl2(2).unwrap();
        let q = g.quotient(&crate::groups::MatrixGroup::trivial(2)).unwrap();
        assert!(matches!(
            decompose_abelian(&q.group),
            Err(Error::NonAbelian(_))
        ));
    }

    #[test]
    fn character_lists() {
        let t = FiniteAbelianGroup::from_cyclic_orders(&[]).unwrap();
        let cs = characters(&t);
        assert_eq!(cs.len(), 1);
        assert!(cs[0].is_trivial());
        let z4 = FiniteAbelianGroup::from_cyclic_orders(&[4]).unwrap();
        let cs = characters(&z4);
        assert_eq!(cs.len(), 4);
        assert!(cs[0].is_trivial());
        let imaginary = cs
            .iter()
            .filter(|c| c.value(&[1]).unwrap().as_rational().is_none())
            .count();
        assert_eq!(imaginary, 2);
    }

    #[test]
    fn averages() {
        let z6 = FiniteAbelianGroup::from_cyclic_orders(&[6]).unwrap();
        let all: Vec<(Vec<u64>, u64)> = z6.vectors().map(|v| (v, 1)).collect();
        for chi in characters(&z6) {
            let avg = char_sum_average(&chi, &all).unwrap();
            if chi.is_trivial() {
                assert_eq!(avg.as_rational(), Some(rat(1, 1)));
            } else {
                assert!(avg.is_zero());
            }
        }
        let chi = Character::new(&z6, vec![3]).unwrap();
        assert_eq!(chi.order(), 2);
        let punctured: Vec<_> = all[1..].to_vec();
        assert_eq!(
            char_sum_average(&chi, &punctured).unwrap().as_rational(),
            Some(rat(-1, 5))
        );
        assert!(char_sum_average(&chi, &[]).is_err());
    }

    #[test]
    fn character_json() {
        let g = FiniteAbelianGroup::from_cyclic_orders(&[2, 4]).unwrap();
        let c = Character::new(&g, vec![1, 3]).unwrap();
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"divisors":[2,4],"exponents":[1,3]}"#
        );
        assert_eq!(c.conj().exponents(), &[1, 1]);
    }
}
