//! Finite subgroups of GL2(Z/nZ), abstract quotient groups, and subdirect
//! products with their Goursat decomposition.
//!
//! Groups are fully enumerated: elements live in sorted vectors of canonical
//! encodings, so equality, membership and output ordering are exact and
//! reproducible.

mod abstract_group;
mod matrix;
mod product;

use std::collections::HashSet;
use std::fmt::Debug;
use std::hash::Hash;

pub(crate) use abstract_group::extend_hom;
pub use abstract_group::{find_isomorphism, AbstractFiniteGroup, Quotient};
pub use matrix::{GeneratorList, ResidueMatrix, MAX_LEVEL};
pub use product::{GoursatData, ProductSubgroup};

use crate::arith::{gcd, gl2_order, prime_divisors};
use crate::error::{invalid, Error, Result};
use crate::DEFAULT_CAP;
use matrix::mul_packed;

/// Multiplication, inversion and identity for some ambient set of elements.
pub trait GroupLaw {
    type Elem: Clone + Ord + Hash + Debug;
    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn identity(&self) -> Self::Elem;

    fn conj(&self, s: &Self::Elem, x: &Self::Elem) -> Self::Elem {
        self.op(&self.op(s, x), &self.inv(s))
    }

    fn commutator(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem {
        let xi = self.inv(x);
        let yi = self.inv(y);
        self.op(&self.op(&xi, &yi), &self.op(x, y))
    }
}

/// GL2(Z/nZ) acting on packed encodings.
#[derive(Clone, Copy, Debug)]
pub struct Gl2 {
    pub level: u32,
}

impl GroupLaw for Gl2 {
    type Elem = u64;
    fn op(&self, a: &u64, b: &u64) -> u64 {
        mul_packed(*a, *b)
    }
    fn inv(&self, a: &u64) -> u64 {
        ResidueMatrix::unpack(*a)
            .inverse()
            .expect("group elements are invertible")
            .pack()
    }
    fn identity(&self) -> u64 {
        ResidueMatrix::identity(self.level).pack()
    }
}

/// Breadth-first closure of `gens`; sorted output. Errors once more than
/// `cap` elements have been found.
pub fn close<L: GroupLaw>(law: &L, gens: &[L::Elem], cap: usize) -> Result<Vec<L::Elem>> {
    let id = law.identity();
    let mut seen: HashSet<L::Elem> = HashSet::new();
    seen.insert(id.clone());
    let mut frontier = vec![id];
    while let Some(x) = frontier.pop() {
        for s in gens {
            let y = law.op(&x, s);
            if !seen.contains(&y) {
                if seen.len() >= cap {
                    return Err(Error::CapExceeded { cap });
                }
                seen.insert(y.clone());
                frontier.push(y);
            }
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// A small generating set of a sorted subgroup, chosen greedily in element order.
pub fn extract_generators<L: GroupLaw>(law: &L, elements: &[L::Elem]) -> Vec<L::Elem> {
    let mut gens = Vec::new();
    let mut current: Vec<L::Elem> = vec![law.identity()];
    for e in elements {
        if current.binary_search(e).is_err() {
            gens.push(e.clone());
            current = close(law, &gens, usize::MAX).expect("uncapped");
            if current.len() == elements.len() {
                break;
            }
        }
    }
    gens
}

/// Is the sorted set `h` (generated by `h_gens`) normalized by every `g_gens`?
pub(crate) fn normalized_by<L: GroupLaw>(
    law: &L,
    h: &[L::Elem],
    h_gens: &[L::Elem],
    g_gens: &[L::Elem],
) -> bool {
    g_gens.iter().all(|s| {
        h_gens
            .iter()
            .all(|y| h.binary_search(&law.conj(s, y)).is_ok())
    })
}

/// Normal closure of the commutators of `gens` inside the group they generate.
pub(crate) fn commutator_elements<L: GroupLaw>(
    law: &L,
    gens: &[L::Elem],
    cap: usize,
) -> Result<Vec<L::Elem>> {
    let mut cgens: Vec<L::Elem> = Vec::new();
    for x in gens {
        for y in gens {
            let c = law.commutator(x, y);
            if !cgens.contains(&c) {
                cgens.push(c);
            }
        }
    }
    let mut c = close(law, &cgens, cap)?;
    loop {
        let mut added = false;
        for s in gens {
            for y in cgens.clone() {
                let z = law.conj(s, &y);
                if c.binary_search(&z).is_err() {
                    cgens.push(z);
                    added = true;
                }
            }
        }
        if !added {
            return Ok(c);
        }
        c = close(law, &cgens, cap)?;
    }
}

/// Left coset decomposition of sorted `g` by sorted subgroup `n`:
/// coset id per element of `g`, and the index of each coset's least element.
pub(crate) fn cosets<L: GroupLaw>(
    law: &L,
    g: &[L::Elem],
    n: &[L::Elem],
) -> (Vec<usize>, Vec<usize>) {
    let mut coset_of = vec![usize::MAX; g.len()];
    let mut reps = Vec::new();
    for i in 0..g.len() {
        if coset_of[i] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(i);
        for x in n {
            let y = law.op(&g[i], x);
            let j = g.binary_search(&y).expect("coset stays inside the group");
            coset_of[j] = id;
        }
    }
    (coset_of, reps)
}

/// Quotient g/n as a multiplication table; `n` must be normal in `g`.
pub(crate) fn quotient_of<L: GroupLaw>(law: &L, g: &[L::Elem], n: &[L::Elem]) -> Result<Quotient> {
    let (coset_of, reps) = cosets(law, g, n);
    let k = reps.len();
    let mut table = vec![0usize; k * k];
    for (i, &ri) in reps.iter().enumerate() {
        for (j, &rj) in reps.iter().enumerate() {
            let y = law.op(&g[ri], &g[rj]);
            let idx = g.binary_search(&y).expect("closed");
            table[i * k + j] = coset_of[idx];
        }
    }
    let group = AbstractFiniteGroup::from_flat_table(k, table)?;
    Ok(Quotient { group, coset_of })
}

/// A finite subgroup of GL2(Z/nZ) stored as sorted packed encodings.
#[derive(Clone, PartialEq, Eq)]
pub struct MatrixGroup {
    level: u32,
    elements: Vec<u64>,
    generators: Vec<u64>,
}

impl std::fmt::Debug for MatrixGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "MatrixGroup(level {}, order {})",
            self.level,
            self.order()
        )
    }
}

impl MatrixGroup {
    /// Closure of `gens` with the default cap of 10^7 elements.
    pub fn close(gens: &[ResidueMatrix], level: u32) -> Result<Self> {
        Self::close_with_cap(gens, level, DEFAULT_CAP)
    }

    pub fn close_with_cap(gens: &[ResidueMatrix], level: u32, cap: usize) -> Result<Self> {
        if level == 0 || level > MAX_LEVEL {
            return invalid(format!("level {level} outside 1..={MAX_LEVEL}"));
        }
        let mut packed = Vec::with_capacity(gens.len());
        for g in gens {
            if g.level() != level {
                return Err(Error::LevelMismatch {
                    expected: level as u64,
                    found: g.level() as u64,
                });
            }
            if !g.is_invertible() {
                return invalid(format!("generator {g:?} is not invertible"));
            }
            if !packed.contains(&g.pack()) {
                packed.push(g.pack());
            }
        }
        let elements = close(&Gl2 { level }, &packed, cap)?;
        Ok(MatrixGroup {
            level,
            elements,
            generators: packed,
        })
    }

    pub fn trivial(level: u32) -> Self {
        MatrixGroup {
            level,
            elements: vec![ResidueMatrix::identity(level).pack()],
            generators: Vec::new(),
        }
    }

    /// All of GL2(Z/nZ).
    pub fn full_gl2(level: u32) -> Result<Self> {
        Self::full_gl2_with_cap(level, DEFAULT_CAP)
    }

    pub fn full_gl2_with_cap(level: u32, cap: usize) -> Result<Self> {
        if level == 0 || level > MAX_LEVEL {
            return invalid(format!("level {level} outside 1..={MAX_LEVEL}"));
        }
        if gl2_order(level as u64) > cap as u64 {
            return Err(Error::CapExceeded { cap });
        }
        let elements = Self::filter_gl2(level, |_| true);
        let generators = gl2_generators(level);
        Ok(MatrixGroup {
            level,
            elements,
            generators,
        })
    }

    fn filter_gl2(level: u32, pred: impl Fn(&ResidueMatrix) -> bool) -> Vec<u64> {
        let n = level as i64;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let m = ResidueMatrix::new(level, [a, b, c, d]).unwrap();
                        if m.is_invertible() && pred(&m) {
                            out.push(m.pack());
                        }
                    }
                }
            }
        }
        out
    }

    /// The elements of GL2(Z/nZ) satisfying `pred`, which must form a group.
    pub fn from_predicate(level: u32, pred: impl Fn(&ResidueMatrix) -> bool) -> Result<Self> {
        if gl2_order(level as u64) > DEFAULT_CAP as u64 {
            return Err(Error::CapExceeded { cap: DEFAULT_CAP });
        }
        Self::from_elements(level, Self::filter_gl2(level, pred))
    }

    /// Wrap an explicit element list, checking it is a subgroup.
    pub fn from_elements(level: u32, mut elements: Vec<u64>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        let law = Gl2 { level };
        if elements.binary_search(&law.identity()).is_err() {
            return invalid("element set lacks the identity");
        }
        for &e in &elements {
            let m = ResidueMatrix::unpack(e);
            if m.level() != level || !m.is_invertible() {
                return invalid(format!("{m:?} is not in GL2(Z/{level})"));
            }
        }
        let generators = extract_generators(&law, &elements);
        let closed = close(&law, &generators, elements.len() + 1)?;
        if closed != elements {
            return invalid("element set is not closed under multiplication");
        }
        Ok(MatrixGroup {
            level,
            elements,
            generators,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn packed(&self) -> &[u64] {
        &self.elements
    }

    pub fn elements(&self) -> impl Iterator<Item = ResidueMatrix> + '_ {
        self.elements.iter().map(|&k| ResidueMatrix::unpack(k))
    }

    pub fn generators(&self) -> Vec<ResidueMatrix> {
        self.generators
            .iter()
            .map(|&k| ResidueMatrix::unpack(k))
            .collect()
    }

    pub(crate) fn packed_generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn contains(&self, m: &ResidueMatrix) -> bool {
        m.level() == self.level && self.elements.binary_search(&m.pack()).is_ok()
    }

    /// Position of `m` in the sorted element list.
    pub fn index_of(&self, m: &ResidueMatrix) -> Option<usize> {
        self.elements.binary_search(&m.pack()).ok()
    }

    pub fn law(&self) -> Gl2 {
        Gl2 { level: self.level }
    }

    pub fn is_subgroup_of(&self, g: &MatrixGroup) -> bool {
        self.level == g.level
            && self.elements.len() <= g.elements.len()
            && self
                .elements
                .iter()
                .all(|x| g.elements.binary_search(x).is_ok())
    }

    pub fn is_full_gl2(&self) -> bool {
        self.order() as u64 == gl2_order(self.level as u64)
    }

    /// Whether `self` is normal in `g`.
    pub fn is_normal_in(&self, g: &MatrixGroup) -> Result<bool> {
        if !self.is_subgroup_of(g) {
            return invalid("subgroup not contained in group");
        }
        Ok(normalized_by(
            &self.law(),
            &self.elements,
            &self.generators,
            &g.generators,
        ))
    }

    pub fn commutator_subgroup(&self) -> MatrixGroup {
        let law = self.law();
        let elements = commutator_elements(&law, &self.generators, usize::MAX).expect("uncapped");
        let generators = extract_generators(&law, &elements);
        MatrixGroup {
            level: self.level,
            elements,
            generators,
        }
    }

    /// The quotient self/n as an abstract group, with the coset of every element.
    pub fn quotient(&self, n: &MatrixGroup) -> Result<Quotient> {
        if !n.is_normal_in(self)? {
            return Err(Error::NotNormal);
        }
        quotient_of(&self.law(), &self.elements, &n.elements)
    }

    /// Image under reduction modulo a divisor of the level.
    pub fn reduce(&self, level: u32) -> Result<MatrixGroup> {
        if level == 0 || !self.level.is_multiple_of(level) {
            return invalid(format!("{level} does not divide level {}", self.level));
        }
        let red = |k: &u64| ResidueMatrix::unpack(*k).reduce(level).pack();
        let mut elements: Vec<u64> = self.elements.iter().map(red).collect();
        elements.sort_unstable();
        elements.dedup();
        let mut generators: Vec<u64> = self.generators.iter().map(red).collect();
        generators.dedup();
        let id = ResidueMatrix::identity(level).pack();
        generators.retain(|&g| g != id);
        Ok(MatrixGroup {
            level,
            elements,
            generators,
        })
    }

    /// Full preimage in GL2(Z/level) under reduction to this group's level.
    /// Both levels must be powers of one prime.
    pub fn preimage(&self, level: u32) -> Result<MatrixGroup> {
        self.preimage_with_cap(level, DEFAULT_CAP)
    }

    pub fn preimage_with_cap(&self, level: u32, cap: usize) -> Result<MatrixGroup> {
        let n0 = self.level;
        if level > MAX_LEVEL || !level.is_multiple_of(n0) {
            return invalid(format!("level {n0} does not divide {level}"));
        }
        if level == n0 {
            return Ok(self.clone());
        }
        let ps = prime_divisors(level as u64);
        if ps.len() != 1 || n0 == 1 || prime_divisors(n0 as u64) != ps {
            return invalid("preimage needs prime-power levels of one prime");
        }
        let k = (level / n0) as usize;
        let size = self.order().saturating_mul(k.pow(4));
        if size > cap {
            return Err(Error::CapExceeded { cap });
        }
        let mut elements = Vec::with_capacity(size);
        let n0i = n0 as i64;
        for g in self.elements() {
            let [a, b, c, d] = g.entries().map(|x| x as i64);
            for i in 0..k as i64 {
                for j in 0..k as i64 {
                    for u in 0..k as i64 {
                        for v in 0..k as i64 {
                            let m = ResidueMatrix::new(
                                level,
                                [a + n0i * i, b + n0i * j, c + n0i * u, d + n0i * v],
                            )?;
                            elements.push(m.pack());
                        }
                    }
                }
            }
        }
        elements.sort_unstable();
        let mut generators: Vec<u64> = self
            .generators()
            .iter()
            .map(|g| {
                let [a, b, c, d] = g.entries().map(|x| x as i64);
                ResidueMatrix::new(level, [a, b, c, d]).unwrap().pack()
            })
            .collect();
        let t = n0i;
        let mut kernel = vec![
            [1, t, 0, 1],
            [1, 0, t, 1],
            [1 + t, 0, 0, 1],
            [1, 0, 0, 1 + t],
        ];
        if n0 == 2 {
            kernel.push([-1, 0, 0, 1]);
            kernel.push([1, 0, 0, -1]);
        }
        for e in kernel {
            let m = ResidueMatrix::new(level, e)?.pack();
            if !generators.contains(&m) {
                generators.push(m);
            }
        }
        Ok(MatrixGroup {
            level,
            elements,
            generators,
        })
    }

    /// Indices of the elements congruent to the identity modulo `m`.
    pub fn kernel_of_reduction(&self, m: u32) -> Vec<usize> {
        self.elements()
            .enumerate()
            .filter(|(_, x)| x.is_identity_mod(m))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_generator_list(&self) -> GeneratorList {
        GeneratorList {
            level: self.level,
            generators: self
                .generators()
                .iter()
                .map(|g| g.entries().map(|x| x as i64))
                .collect(),
        }
    }

    pub fn from_generator_list(list: &GeneratorList) -> Result<Self> {
        let gens = list
            .generators
            .iter()
            .map(|&e| ResidueMatrix::new(list.level, e))
            .collect::<Result<Vec<_>>>()?;
        Self::close(&gens, list.level)
    }

    /// Sorted element dump as [a,b,c,d] rows.
    pub fn element_dump(&self) -> Vec<[u32; 4]> {
        self.elements().map(|m| m.entries()).collect()
    }
}

/// A generating set of GL2(Z/nZ): elementary matrices and diagonal units.
fn gl2_generators(level: u32) -> Vec<u64> {
    let n = level as i64;
    let mut gens = vec![[1, 1, 0, 1], [1, 0, 1, 1]];
    for u in 2..n {
        if gcd(u as u64, level as u64) == 1 {
            gens.push([u, 0, 0, 1]);
        }
    }
    let mut out: Vec<u64> = Vec::new();
    let id = ResidueMatrix::identity(level).pack();
    for g in gens {
        let m = ResidueMatrix::new(level, g).unwrap().pack();
        if m != id && !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(level: u32, e: [i64; 4]) -> ResidueMatrix {
        ResidueMatrix::new(level, e).unwrap()
    }

    #[test]
    fn closure_examples() {
        assert_eq!(MatrixGroup::close(&[], 2).unwrap().order(), 1);
        let gl2 = MatrixGroup::close(&[m(2, [1, 1, 0, 1]), m(2, [0, 1, 1, 1])], 2).unwrap();
        assert_eq!(gl2.order(), 6);
        let sl2_3 = MatrixGroup::close(&[m(3, [1, 1, 0, 1]), m(3, [1, 0, 1, 1])], 3).unwrap();
        // Oracle: filter all 81 matrices by det = 1.
        let mut oracle = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let x = m(3, [a, b, c, d]);
                        if x.det() == 1 {
                            oracle.push(x.pack());
                        }
                    }
                }
            }
        }
        oracle.sort_unstable();
        assert_eq!(sl2_3.packed(), &oracle[..]);
        assert_eq!(sl2_3.order(), 24);
    }

    #[test]
    fn closure_cap_is_an_error() {
        let gens = [m(5, [1, 1, 0, 1]), m(5, [1, 0, 1, 1]), m(5, [2, 0, 0, 1])];
        assert!(matches!(
            MatrixGroup::close_with_cap(&gens, 5, 100),
            Err(Error::CapExceeded { cap: 100 })
        ));
        assert!(MatrixGroup::close(&[m(4, [2, 0, 0, 1])], 4).is_err());
    }

    #[test]
    fn full_gl2_orders() {
        for (n, o) in [(2, 6), (3, 48), (4, 96), (5, 480), (8, 1536), (9, 3888)] {
            let g = MatrixGroup::full_gl2(n).unwrap();
            assert_eq!(g.order(), o);
            assert_eq!(gl2_order(n as u64), o as u64);
            let regen = MatrixGroup::close(&g.generators(), n).unwrap();
            assert_eq!(regen.packed(), g.packed());
        }
    }

    #[test]
    fn normality_examples() {
        let gl2_3 = MatrixGroup::full_gl2(3).unwrap();
        let sl2_3 = MatrixGroup::from_predicate(3, |x| x.det() == 1).unwrap();
        assert!(sl2_3.is_normal_in(&gl2_3).unwrap());
        assert!(MatrixGroup::trivial(3).is_normal_in(&gl2_3).unwrap());
        let gl2_2 = MatrixGroup::full_gl2(2).unwrap();
        let order2 = MatrixGroup::close(&[m(2, [1, 1, 0, 1])], 2).unwrap();
        assert_eq!(order2.order(), 2);
        assert!(!order2.is_normal_in(&gl2_2).unwrap());
        assert!(gl2_2.is_normal_in(&sl2_3).is_err());
    }

    #[test]
    fn commutators_and_quotients() {
        let gl2_2 = MatrixGroup::full_gl2(2).unwrap();
        let c = gl2_2.commutator_subgroup();
        assert_eq!(c.order(), 3);
        let q = gl2_2.quotient(&c).unwrap();
        assert_eq!(q.group.order(), 2);
        let gl2_3 = MatrixGroup::full_gl2(3).unwrap();
        assert_eq!(gl2_3.commutator_subgroup().order(), 24);
        let sl2_3 = MatrixGroup::from_predicate(3, |x| x.det() == 1).unwrap();
        let q = gl2_3.quotient(&sl2_3).unwrap();
        assert_eq!(q.group.order(), 2);
        assert!(q.group.is_abelian());
        assert_eq!(gl2_3.quotient(&gl2_3).unwrap().group.order(), 1);
        let ab = MatrixGroup::close(&[m(5, [2, 0, 0, 1])], 5).unwrap();
        assert_eq!(ab.commutator_subgroup().order(), 1);
        let order2 = MatrixGroup::close(&[m(2, [1, 1, 0, 1])], 2).unwrap();
        assert!(matches!(gl2_2.quotient(&order2), Err(Error::NotNormal)));
    }

    #[test]
    fn reduce_and_preimage() {
        let g2 = MatrixGroup::close(&[m(2, [1, 1, 0, 1])], 2).unwrap();
        let p = g2.preimage(8).unwrap();
        assert_eq!(p.order(), 2 * 4usize.pow(4));
        assert_eq!(p.reduce(2).unwrap().packed(), g2.packed());
        // The recorded generators really generate the preimage.
        let regen = MatrixGroup::close(&p.generators(), 8).unwrap();
        assert_eq!(regen.packed(), p.packed());
        let g3 = MatrixGroup::close(&[m(3, [1, 1, 0, 2])], 3).unwrap();
        let p = g3.preimage(9).unwrap();
        assert_eq!(
            MatrixGroup::close(&p.generators(), 9).unwrap().packed(),
            p.packed()
        );
        assert_eq!(
            MatrixGroup::full_gl2(4).unwrap().reduce(2).unwrap().order(),
            6
        );
        assert_eq!(p.kernel_of_reduction(3).len(), 81);
    }

    #[test]
    fn json_generator_roundtrip() {
        let g = MatrixGroup::full_gl2(4).unwrap();
        let list = g.to_generator_list();
        let s = serde_json::to_string(&list).unwrap();
        let back: GeneratorList = serde_json::from_str(&s).unwrap();
        assert_eq!(
            MatrixGroup::from_generator_list(&back).unwrap().packed(),
            g.packed()
        );
    }
}
