use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{EntanglementSpec, PhiGroup};
use crate::arith::serde_rational;
use crate::characters::{char_sum_average, characters, Character, CyclotomicNumber};
use crate::error::{invalid, Error, Result};
use crate::groups::ResidueMatrix;
use crate::Rational;

/// Default bound on tuples enumerated explicitly by the brute-force oracle.
pub const BRUTE_FORCE_CAP: usize = 1_000_000;

/// A subset S of one component, as sorted indices into its element list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSet {
    pub component: usize,
    members: Vec<usize>,
}

impl LocalSet {
    pub fn from_predicate(
        spec: &EntanglementSpec,
        component: usize,
        pred: impl Fn(&ResidueMatrix) -> bool + Sync,
    ) -> Result<Self> {
        let comp = spec
            .components()
            .get(component)
            .ok_or_else(|| Error::Invalid(format!("no component {component}")))?;
        let members = comp
            .group
            .packed()
            .par_iter()
            .enumerate()
            .filter(|(_, &k)| pred(&ResidueMatrix::unpack(k)))
            .map(|(i, _)| i)
            .collect();
        Ok(LocalSet { component, members })
    }

    pub fn full(spec: &EntanglementSpec, component: usize) -> Result<Self> {
        Self::from_predicate(spec, component, |_| true)
    }

    /// G minus the identity.
    pub fn nonidentity(spec: &EntanglementSpec, component: usize) -> Result<Self> {
        Self::from_predicate(spec, component, |m| !m.is_identity_mod(m.level()))
    }

    pub fn from_indices(component: usize, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        LocalSet { component, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.members
    }
}

/// Result of the character-sum evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MemberFraction {
    /// 1 + sum over nontrivial characters of prod_c E_{chi,c}.
    #[serde(with = "serde_rational")]
    pub correction: Rational,
    /// prod_c |S_c| / |G_c|.
    #[serde(with = "serde_rational")]
    pub naive: Rational,
    /// |S cap G(m)| / |G(m)|.
    #[serde(with = "serde_rational")]
    pub fraction: Rational,
    /// First component with an empty local set.
    pub obstruction: Option<usize>,
    pub phi_order: usize,
}

fn check_local_sets(spec: &EntanglementSpec, local: &[LocalSet]) -> Result<()> {
    if local.len() != spec.components().len() {
        return invalid("one local set per component expected");
    }
    for (i, (s, c)) in local.iter().zip(spec.components()).enumerate() {
        if s.component != i {
            return invalid(format!("local set {i} is for component {}", s.component));
        }
        if s.members.last().is_some_and(|&j| j >= c.group.order()) {
            return invalid(format!("local set {i} indexes outside its component"));
        }
    }
    Ok(())
}

/// chi composed with psi on one component.
#[derive(Clone, Debug)]
pub struct LiftedCharacter {
    chi: Character,
    /// chi(psi(x)) = zeta_e^exponents[i] for the i-th element.
    exponents: Vec<u64>,
}

impl LiftedCharacter {
    pub fn field_order(&self) -> u64 {
        self.chi.field_order()
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&k| k == 0)
    }

    pub fn exponent_at(&self, index: usize) -> u64 {
        self.exponents[index]
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn value_at(&self, index: usize) -> Result<CyclotomicNumber> {
        CyclotomicNumber::zeta_pow(self.field_order() as u32, self.exponents[index])
    }
}

impl PhiGroup {
    pub fn characters(&self) -> Vec<Character> {
        characters(self.group())
    }

    /// chi restricted to component `c` through psi.
    pub fn lift_character(&self, chi: &Character, c: usize) -> Result<LiftedCharacter> {
        if chi.divisors() != self.divisors() {
            return invalid("character does not belong to this Phi");
        }
        let codes = self
            .psi
            .get(c)
            .ok_or_else(|| Error::Invalid(format!("component index {c} out of range")))?;
        let exponents = codes
            .iter()
            .map(|&k| chi.value_exponent(&self.group().decode(k as usize)))
            .collect();
        Ok(LiftedCharacter {
            chi: chi.clone(),
            exponents,
        })
    }

    /// Histogram of Phi codes over a local set.
    fn histogram(&self, s: &LocalSet) -> Vec<u64> {
        let mut h = vec![0u64; self.order()];
        for &i in &s.members {
            h[self.psi_codes(s.component)[i] as usize] += 1;
        }
        h
    }

    /// The character-sum formula for |S cap G(m)| / |G(m)|.
    pub fn member_fraction(&self, local: &[LocalSet]) -> Result<MemberFraction> {
        if local.len() != self.component_groups().len() {
            return invalid("one local set per component expected");
        }
        let naive = local
            .iter()
            .zip(self.component_groups())
            .fold(Rational::one(), |acc, (s, g)| {
                acc * Rational::new(BigInt::from(s.len()), BigInt::from(g.order()))
            });
        let obstruction = local.iter().position(|s| s.is_empty());
        if obstruction.is_some() {
            return Ok(MemberFraction {
                correction: Rational::one(),
                naive: Rational::zero(),
                fraction: Rational::zero(),
                obstruction,
                phi_order: self.order(),
            });
        }
        let hists: Vec<Vec<(Vec<u64>, u64)>> = local
            .iter()
            .map(|s| {
                self.histogram(s)
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, n)| n > 0)
                    .map(|(code, n)| (self.group().decode(code), n))
                    .collect()
            })
            .collect();
        let chis = self.characters();
        let e = self.group().exponent() as u32;
        let terms: Vec<CyclotomicNumber> = chis
            .par_iter()
            .skip(1)
            .map(|chi| {
                let mut prod = CyclotomicNumber::one(e)?;
                for h in &hists {
                    let avg = char_sum_average(chi, h)?;
                    prod = prod.mul(&avg);
                    if prod.is_zero() {
                        break;
                    }
                }
                Ok(prod)
            })
            .collect::<Result<Vec<_>>>()?;
        let sum = terms
            .iter()
            .fold(CyclotomicNumber::zero(e.max(1))?, |a, b| a.add(b));
        let extra = sum
            .as_rational()
            .ok_or_else(|| Error::Inconsistent(format!("character sum {sum:?} is not rational")))?;
        let correction = Rational::one() + extra;
        let fraction = &correction * &naive;
        Ok(MemberFraction {
            correction,
            naive,
            fraction,
            obstruction: None,
            phi_order: self.order(),
        })
    }
}

/// Build Phi and evaluate the character-sum formula.
pub fn member_fraction(spec: &EntanglementSpec, local: &[LocalSet]) -> Result<MemberFraction> {
    check_local_sets(spec, local)?;
    spec.build_phi()?.member_fraction(local)
}

pub fn brute_force_fraction(spec: &EntanglementSpec, local: &[LocalSet]) -> Result<Rational> {
    brute_force_fraction_with_cap(spec, local, BRUTE_FORCE_CAP)
}

/// Count G(m) and its tuples inside prod S_c directly from the relation
/// values, without characters or Phi. All components but the largest are
/// enumerated tuple by tuple (at most `cap` tuples); the largest is folded in
/// through a histogram of its target values.
pub fn brute_force_fraction_with_cap(
    spec: &EntanglementSpec,
    local: &[LocalSet],
    cap: usize,
) -> Result<Rational> {
    check_local_sets(spec, local)?;
    let (total, tables) = spec.psi_tables()?;
    let n = tables.len();
    let big = (0..n)
        .max_by_key(|&c| (tables[c].len(), std::cmp::Reverse(c)))
        .expect("at least one component");
    let others: Vec<usize> = (0..n).filter(|&c| c != big).collect();
    let explicit: u128 = others.iter().map(|&c| tables[c].len() as u128).product();
    if explicit > cap as u128 {
        return Err(Error::CapExceeded { cap });
    }
    let in_s: Vec<Vec<bool>> = local
        .iter()
        .zip(&tables)
        .map(|(s, t)| {
            let mut v = vec![false; t.len()];
            s.members.iter().for_each(|&i| v[i] = true);
            v
        })
        .collect();
    let t_order = total.order();
    let mut all_count = vec![0u64; t_order];
    let mut s_count = vec![0u64; t_order];
    for (i, &code) in tables[big].iter().enumerate() {
        all_count[code as usize] += 1;
        if in_s[big][i] {
            s_count[code as usize] += 1;
        }
    }
    if t_order > 4096 {
        return Err(Error::Unsupported(format!(
            "target of order {t_order} is too large for the oracle"
        )));
    }
    let vs: Vec<Vec<u64>> = total.vectors().collect();
    let add: Vec<usize> = vs
        .iter()
        .flat_map(|a| vs.iter().map(|b| total.encode(&total.add(a, b))))
        .collect();
    let negated: Vec<usize> = (0..t_order)
        .map(|a| {
            (0..t_order)
                .find(|&b| add[a * t_order + b] == 0)
                .expect("inverse")
        })
        .collect();
    // Odometer over the other components, tracking the partial sum and
    // whether every coordinate so far lies in its local set.
    let mut idx = vec![0usize; others.len()];
    let mut group_count: u128 = 0;
    let mut member_count: u128 = 0;
    if others.iter().any(|&c| tables[c].is_empty()) {
        return invalid("empty component");
    }
    loop {
        let mut sum = 0usize;
        let mut all_in = true;
        for (k, &c) in others.iter().enumerate() {
            let i = idx[k];
            sum = add[sum * t_order + tables[c][i] as usize];
            all_in &= in_s[c][i];
        }
        let need = negated[sum];
        group_count += all_count[need] as u128;
        if all_in {
            member_count += s_count[need] as u128;
        }
        let mut k = others.len();
        loop {
            if k == 0 {
                return Ok(Rational::new(
                    BigInt::from(member_count),
                    BigInt::from(group_count),
                ));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < tables[others[k]].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}
