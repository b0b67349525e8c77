//! Galois images described as per-prime components glued by abelian
//! relations, the quotient Phi of the product by the image, and the
//! character-sum evaluation of membership fractions.
//!
//! A relation assigns each component a homomorphism into a common abelian
//! target T; the image G(m) is the set of tuples whose values sum to zero in
//! every relation's target. Phi is then the product of all targets.

mod fraction;
mod schema;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fraction::{
    brute_force_fraction, brute_force_fraction_with_cap, member_fraction, LiftedCharacter,
    LocalSet, MemberFraction, BRUTE_FORCE_CAP,
};

use crate::arith::{is_prime, legendre, prime_divisors};
use crate::characters::{decompose_abelian, FiniteAbelianGroup};
use crate::error::{invalid, Error, Result};
use crate::groups::{close, AbstractFiniteGroup, GroupLaw, MatrixGroup, ResidueMatrix, MAX_LEVEL};

/// G(l^a) for one prime.
#[derive(Clone, Debug)]
pub struct Component {
    pub prime: u64,
    pub exponent: u32,
    pub group: MatrixGroup,
}

impl Component {
    pub fn new(prime: u64, exponent: u32, group: MatrixGroup) -> Result<Self> {
        if !is_prime(prime) || exponent == 0 {
            return invalid(format!("bad component {prime}^{exponent}"));
        }
        let level = prime
            .checked_pow(exponent)
            .filter(|&l| l <= MAX_LEVEL as u64);
        match level {
            Some(l) if l == group.level() as u64 => Ok(Component {
                prime,
                exponent,
                group,
            }),
            Some(l) => Err(Error::LevelMismatch {
                expected: l,
                found: group.level() as u64,
            }),
            None => invalid(format!("level {prime}^{exponent} is too large")),
        }
    }

    pub fn full(prime: u64, exponent: u32) -> Result<Self> {
        let level = prime
            .checked_pow(exponent)
            .filter(|&l| l <= MAX_LEVEL as u64)
            .ok_or_else(|| Error::Invalid(format!("level {prime}^{exponent} is too large")))?;
        Self::new(prime, exponent, MatrixGroup::full_gl2(level as u32)?)
    }

    pub fn level(&self) -> u32 {
        self.group.level()
    }
}

/// One summand of a component map into a relation's target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MapTerm {
    /// Odd permutation of the nonzero vectors mod 2 maps to `image`.
    SignatureMod2 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        image: Option<Vec<u64>>,
    },
    /// det a non-residue mod l maps to `image`.
    DetLegendre {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        image: Option<Vec<u64>>,
    },
    /// A character of (Z/modulus)^x applied to det, given on generating residues.
    DetModTarget {
        modulus: u64,
        values: Vec<(u64, Vec<u64>)>,
    },
    /// A homomorphism on the image mod `level`, given on generating matrices.
    Table {
        level: u32,
        entries: Vec<([i64; 4], Vec<u64>)>,
    },
}

/// The map of one component into a relation's target, as a sum of terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentMap {
    pub component: usize,
    pub terms: Vec<MapTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub target_divisors: Vec<u64>,
    pub maps: Vec<ComponentMap>,
}

/// Components plus relations; G(m) is the joint kernel.
#[derive(Clone, Debug)]
pub struct EntanglementSpec {
    components: Vec<Component>,
    relations: Vec<Relation>,
}

/// Phi with the realized maps psi_c: G_c -> Phi.
#[derive(Clone, Debug)]
pub struct PhiGroup {
    group: FiniteAbelianGroup,
    /// Per component, the Phi code of each element (sorted element order).
    psi: Vec<Vec<u32>>,
    components: Vec<MatrixGroup>,
}

/// A term ready for evaluation, values as vectors in the relation target.
enum Compiled {
    Signature(Vec<u64>),
    Legendre(u64, Vec<u64>),
    DetMod(u64, HashMap<u64, Vec<u64>>),
    Table(u32, HashMap<u64, Vec<u64>>),
}

fn all_ones(target: &FiniteAbelianGroup) -> Vec<u64> {
    vec![1; target.rank()]
}

fn check_vector(target: &FiniteAbelianGroup, v: &[u64]) -> Result<Vec<u64>> {
    if v.len() != target.rank() {
        return invalid(format!(
            "value {v:?} does not match target {:?}",
            target.cyclic_orders()
        ));
    }
    Ok(v.iter()
        .zip(target.cyclic_orders())
        .map(|(&x, &d)| x % d)
        .collect())
}

fn compile(term: &MapTerm, comp: &Component, target: &FiniteAbelianGroup) -> Result<Compiled> {
    let img = |image: &Option<Vec<u64>>| match image {
        Some(v) => check_vector(target, v),
        None => Ok(all_ones(target)),
    };
    Ok(match term {
        MapTerm::SignatureMod2 { image } => {
            if comp.prime != 2 {
                return invalid("signature_mod2 needs the 2-adic component");
            }
            Compiled::Signature(img(image)?)
        }
        MapTerm::DetLegendre { image } => {
            if comp.prime == 2 {
                return invalid("det_legendre needs an odd component");
            }
            Compiled::Legendre(comp.prime, img(image)?)
        }
        MapTerm::DetModTarget { modulus, values } => {
            if *modulus < 2 || !(comp.level() as u64).is_multiple_of(*modulus) {
                return invalid(format!(
                    "modulus {modulus} does not divide level {}",
                    comp.level()
                ));
            }
            let (units, residues) = AbstractFiniteGroup::units_mod(*modulus);
            let tab = target.to_abstract();
            let mut gens = Vec::new();
            let mut imgs = Vec::new();
            for (r, v) in values {
                let id = residues
                    .binary_search(&(r % modulus))
                    .map_err(|_| Error::Invalid(format!("{r} is not a unit mod {modulus}")))?;
                gens.push(id);
                imgs.push(target.encode(&check_vector(target, v)?));
            }
            let hom = crate::groups::extend_hom(&units, &gens, &tab, &imgs).ok_or_else(|| {
                Error::Inconsistent(format!(
                    "det_mod_target values mod {modulus} are not a homomorphism"
                ))
            })?;
            if hom.len() != units.order() {
                return invalid(format!(
                    "det_mod_target residues do not generate (Z/{modulus})^x"
                ));
            }
            let map = hom
                .into_iter()
                .map(|(u, t)| (residues[u], target.decode(t)))
                .collect();
            Compiled::DetMod(*modulus, map)
        }
        MapTerm::Table { level, entries } => {
            if *level == 0 || !comp.level().is_multiple_of(*level) {
                return invalid(format!(
                    "table level {level} does not divide {}",
                    comp.level()
                ));
            }
            let law = crate::groups::Gl2 { level: *level };
            let tab = target.to_abstract();
            let mut gens = Vec::new();
            let mut imgs = Vec::new();
            for (m, v) in entries {
                let m = ResidueMatrix::new(*level, *m)?;
                if !m.is_invertible() {
                    return invalid(format!("table entry {m:?} is not invertible"));
                }
                gens.push(m.pack());
                imgs.push(target.encode(&check_vector(target, v)?));
            }
            let hom = crate::groups::extend_hom(&law, &gens, &tab, &imgs)
                .ok_or_else(|| Error::Inconsistent("table values are not a homomorphism".into()))?;
            let map = hom
                .into_iter()
                .map(|(k, t)| (k, target.decode(t)))
                .collect();
            Compiled::Table(*level, map)
        }
    })
}

fn eval(c: &Compiled, m: &ResidueMatrix, target: &FiniteAbelianGroup) -> Result<Vec<u64>> {
    let zero = vec![0; target.rank()];
    Ok(match c {
        Compiled::Signature(v) => {
            if m.signature_mod2() == 1 {
                v.clone()
            } else {
                zero
            }
        }
        Compiled::Legendre(p, v) => {
            if legendre((m.det() as u64 % p) as i64, *p) == -1 {
                v.clone()
            } else {
                zero
            }
        }
        Compiled::DetMod(modulus, map) => map[&(m.det() as u64 % modulus)].clone(),
        Compiled::Table(level, map) => {
            map.get(&m.reduce(*level).pack()).cloned().ok_or_else(|| {
                Error::Inconsistent(format!("table does not cover {:?}", m.reduce(*level)))
            })?
        }
    })
}

impl EntanglementSpec {
    pub fn new(components: Vec<Component>, relations: Vec<Relation>) -> Result<Self> {
        let mut primes: Vec<u64> = components.iter().map(|c| c.prime).collect();
        primes.sort_unstable();
        if primes.windows(2).any(|w| w[0] == w[1]) {
            return invalid("component primes must be distinct");
        }
        for r in &relations {
            if r.target_divisors.iter().any(|&d| d < 2) {
                return invalid("target divisors must be at least 2");
            }
            for m in &r.maps {
                if m.component >= components.len() {
                    return invalid(format!("map refers to missing component {}", m.component));
                }
            }
        }
        Ok(EntanglementSpec {
            components,
            relations,
        })
    }

    /// Full GL2 at every listed prime power, no relations.
    pub fn unentangled(levels: &[(u64, u32)]) -> Result<Self> {
        let comps = levels
            .iter()
            .map(|&(p, e)| Component::full(p, e))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps, Vec::new())
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn primes(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.prime).collect()
    }

    pub fn component_index(&self, prime: u64) -> Option<usize> {
        self.components.iter().position(|c| c.prime == prime)
    }

    /// m = product of component levels.
    pub fn level(&self) -> u64 {
        self.components.iter().map(|c| c.level() as u64).product()
    }

    /// Order of the ambient product of components.
    pub fn product_order(&self) -> u128 {
        self.components
            .iter()
            .map(|c| c.group.order() as u128)
            .product()
    }

    /// The concatenated target of all relations.
    fn total_target(&self) -> Result<FiniteAbelianGroup> {
        let divs: Vec<u64> = self
            .relations
            .iter()
            .flat_map(|r| r.target_divisors.iter().copied())
            .collect();
        FiniteAbelianGroup::from_cyclic_orders(&divs)
    }

    /// Per component, the value in the total target of every element (as a
    /// mixed-radix code), after checking each map is a homomorphism.
    fn psi_tables(&self) -> Result<(FiniteAbelianGroup, Vec<Vec<u32>>)> {
        let total = self.total_target()?;
        let targets = self
            .relations
            .iter()
            .map(|r| FiniteAbelianGroup::from_cyclic_orders(&r.target_divisors))
            .collect::<Result<Vec<_>>>()?;
        let mut tables = Vec::with_capacity(self.components.len());
        for (ci, comp) in self.components.iter().enumerate() {
            // Compiled terms per relation for this component.
            let mut compiled: Vec<Vec<Compiled>> = Vec::new();
            for (r, t) in self.relations.iter().zip(&targets) {
                let mut cs = Vec::new();
                for m in r.maps.iter().filter(|m| m.component == ci) {
                    for term in &m.terms {
                        cs.push(compile(term, comp, t)?);
                    }
                }
                compiled.push(cs);
            }
            let packed = comp.group.packed();
            let table: Vec<u32> = packed
                .par_iter()
                .map(|&k| {
                    let m = ResidueMatrix::unpack(k);
                    let mut v = Vec::with_capacity(total.rank());
                    for (cs, t) in compiled.iter().zip(&targets) {
                        let mut acc = vec![0; t.rank()];
                        for c in cs {
                            acc = t.add(&acc, &eval(c, &m, t)?);
                        }
                        v.extend(acc);
                    }
                    Ok(total.encode(&v) as u32)
                })
                .collect::<Result<Vec<u32>>>()?;
            // Homomorphism check against the generators.
            let law = comp.group.law();
            for &s in comp.group.packed_generators() {
                let js = packed.binary_search(&s).expect("generator in group");
                let bad = packed.par_iter().enumerate().any(|(i, x)| {
                    let j = packed.binary_search(&law.op(x, &s)).expect("closed");
                    let lhs = total.decode(table[j] as usize);
                    let rhs = total.add(
                        &total.decode(table[i] as usize),
                        &total.decode(table[js] as usize),
                    );
                    lhs != rhs
                });
                if bad {
                    return Err(Error::Inconsistent(format!(
                        "map on component {ci} (level {}) is not a homomorphism",
                        comp.level()
                    )));
                }
            }
            tables.push(table);
        }
        Ok((total, tables))
    }

    /// Build Phi, checking surjectivity onto the targets and subdirectness.
    pub fn build_phi(&self) -> Result<PhiGroup> {
        let (total, tables) = self.psi_tables()?;
        let tab = total.to_abstract();
        let images: Vec<Vec<usize>> = tables
            .iter()
            .map(|t| {
                let mut v: Vec<usize> = t.iter().map(|&x| x as usize).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let all: Vec<usize> = images.iter().flatten().copied().collect();
        if close(&tab, &all, usize::MAX)?.len() != total.order() {
            return Err(Error::Inconsistent(
                "joint image of the relations is a proper subgroup of the target".into(),
            ));
        }
        for c in 0..images.len() {
            let others: Vec<usize> = images
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != c)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            let span = close(&tab, &others, usize::MAX)?;
            if images[c].iter().any(|x| span.binary_search(x).is_err()) {
                return Err(Error::NotSubdirect(c));
            }
        }
        let group = decompose_abelian(&tab)?;
        let psi = tables
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .map(|x| group.encode(group.to_vector(x as usize)) as u32)
                    .collect()
            })
            .collect();
        Ok(PhiGroup {
            group,
            psi,
            components: self.components.iter().map(|c| c.group.clone()).collect(),
        })
    }

    /// Is the tuple (one element per component) in G(m)?
    pub fn contains(&self, tuple: &[ResidueMatrix]) -> Result<bool> {
        if tuple.len() != self.components.len() {
            return invalid("tuple length differs from number of components");
        }
        let total = self.total_target()?;
        let targets = self
            .relations
            .iter()
            .map(|r| FiniteAbelianGroup::from_cyclic_orders(&r.target_divisors))
            .collect::<Result<Vec<_>>>()?;
        for (i, (m, c)) in tuple.iter().zip(&self.components).enumerate() {
            if !c.group.contains(m) {
                return invalid(format!("{m:?} is not in component {i}"));
            }
        }
        let mut sum = vec![0; total.rank()];
        let mut off = 0;
        for (r, t) in self.relations.iter().zip(&targets) {
            let mut acc = vec![0; t.rank()];
            for map in &r.maps {
                let comp = &self.components[map.component];
                for term in &map.terms {
                    let c = compile(term, comp, t)?;
                    acc = t.add(&acc, &eval(&c, &tuple[map.component], t)?);
                }
            }
            sum[off..off + t.rank()].copy_from_slice(&acc);
            off += t.rank();
        }
        Ok(sum.iter().all(|&x| x == 0))
    }

    /// The same Galois data at other exponents, one per component. Lowering
    /// an exponent reduces the component and pushes Phi down to the quotient
    /// by the image of the reduction kernel; raising one takes the full
    /// preimage (the image is assumed stable above the given level).
    pub fn at_levels(&self, exponents: &[u32]) -> Result<EntanglementSpec> {
        if exponents.len() != self.components.len() {
            return invalid("one exponent per component expected");
        }
        if exponents.contains(&0) {
            return invalid("exponents must be positive");
        }
        let lowered = self
            .components
            .iter()
            .zip(exponents)
            .any(|(c, &e)| e < c.exponent);
        let base = if lowered {
            self.descend(exponents)?
        } else {
            self.clone()
        };
        let mut comps = Vec::with_capacity(base.components.len());
        for (c, &e) in base.components.iter().zip(exponents) {
            if e > c.exponent {
                let level = c
                    .prime
                    .checked_pow(e)
                    .filter(|&l| l <= MAX_LEVEL as u64)
                    .ok_or_else(|| Error::Invalid(format!("level {}^{e} is too large", c.prime)))?;
                comps.push(Component::new(c.prime, e, c.group.preimage(level as u32)?)?);
            } else {
                comps.push(c.clone());
            }
        }
        EntanglementSpec::new(comps, base.relations)
    }

    /// Reduce every component whose exponent drops, replacing the relations
    /// by a single table relation onto Phi / psi(kernels).
    fn descend(&self, exponents: &[u32]) -> Result<EntanglementSpec> {
        let (total, tables) = self.psi_tables()?;
        let tab = total.to_abstract();
        let mut kgens: Vec<usize> = Vec::new();
        let mut new_levels = Vec::new();
        for ((c, &e), t) in self.components.iter().zip(exponents).zip(&tables) {
            let e = e.min(c.exponent);
            let level = c.prime.pow(e) as u32;
            new_levels.push((e, level));
            if e < c.exponent {
                for i in c.group.kernel_of_reduction(level) {
                    kgens.push(t[i] as usize);
                }
            }
        }
        kgens.sort_unstable();
        kgens.dedup();
        let k = close(&tab, &kgens, usize::MAX)?;
        let q = tab.quotient(&k)?;
        let phi = decompose_abelian(&q.group)?;
        let mut comps = Vec::new();
        let mut maps = Vec::new();
        for (ci, ((c, &(e, level)), t)) in self
            .components
            .iter()
            .zip(&new_levels)
            .zip(&tables)
            .enumerate()
        {
            let reduced = c.group.reduce(level)?;
            // Value of a reduced element, read off any preimage.
            let mut value: HashMap<u64, Vec<u64>> = HashMap::new();
            for (x, &code) in c.group.packed().iter().zip(t) {
                let key = ResidueMatrix::unpack(*x).reduce(level).pack();
                value
                    .entry(key)
                    .or_insert_with(|| phi.to_vector(q.coset_of[code as usize]).to_vec());
            }
            let entries: Vec<([i64; 4], Vec<u64>)> = reduced
                .generators()
                .iter()
                .map(|g| (g.entries().map(|x| x as i64), value[&g.pack()].clone()))
                .collect();
            if entries.iter().any(|(_, v)| v.iter().any(|&x| x != 0)) {
                maps.push(ComponentMap {
                    component: ci,
                    terms: vec![MapTerm::Table { level, entries }],
                });
            }
            comps.push(Component::new(c.prime, e, reduced)?);
        }
        let relations = if phi.is_trivial() {
            Vec::new()
        } else {
            vec![Relation {
                target_divisors: phi.cyclic_orders().to_vec(),
                maps,
            }]
        };
        EntanglementSpec::new(comps, relations)
    }

    /// The spec with one more component, full GL2 at `extra_level`.
    pub fn with_full_component(&self, extra_level: u32) -> Result<EntanglementSpec> {
        let ps = prime_divisors(extra_level as u64);
        if ps.len() != 1 {
            return invalid(format!("{extra_level} is not a prime power"));
        }
        let p = ps[0];
        if self.components.iter().any(|c| c.prime == p) {
            return invalid(format!("level {extra_level} is not coprime to the spec"));
        }
        let e = crate::arith::valuation(extra_level as u64, p);
        let mut comps = self.components.clone();
        comps.push(Component::full(p, e)?);
        EntanglementSpec::new(comps, self.relations.clone())
    }

    /// G(m) as an explicit product subgroup (small products only).
    pub fn materialize(&self, cap: usize) -> Result<crate::groups::ProductSubgroup> {
        if self.product_order() > cap as u128 {
            return Err(Error::CapExceeded { cap });
        }
        let phi = self.build_phi()?;
        let n = self.components.len();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        let g = &phi.group;
        'outer: loop {
            let sum = (0..n).fold(vec![0; g.rank()], |acc, c| {
                g.add(&acc, &g.decode(phi.psi[c][idx[c]] as usize))
            });
            if sum.iter().all(|&x| x == 0) {
                out.push(
                    (0..n)
                        .map(|c| self.components[c].group.packed()[idx[c]])
                        .collect::<Vec<u64>>(),
                );
            }
            for k in (0..n).rev() {
                idx[k] += 1;
                if idx[k] < self.components[k].group.order() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        crate::groups::ProductSubgroup::from_elements(
            self.components.iter().map(|c| c.group.clone()).collect(),
            out,
        )
    }
}

impl PhiGroup {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn divisors(&self) -> &[u64] {
        self.group.cyclic_orders()
    }

    /// Phi exponent vector of an element of component `c`.
    pub fn psi(&self, c: usize, m: &ResidueMatrix) -> Option<Vec<u64>> {
        let i = self.components.get(c)?.index_of(m)?;
        Some(self.group.decode(self.psi[c][i] as usize))
    }

    pub(crate) fn psi_codes(&self, c: usize) -> &[u32] {
        &self.psi[c]
    }

    pub fn component_groups(&self) -> &[MatrixGroup] {
        &self.components
    }
}

/// Is Phi unchanged after appending full GL2 at a coprime prime power?
pub fn phi_stability_check(spec: &EntanglementSpec, extra_level: u32) -> Result<bool> {
    let before = spec.build_phi()?;
    let after = spec.with_full_component(extra_level)?.build_phi()?;
    Ok(before.divisors() == after.divisors())
}
