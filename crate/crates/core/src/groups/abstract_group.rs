use super::{close, extract_generators, GroupLaw};
use crate::error::{invalid, Error, Result};

/// A finite group given by its multiplication table on ids 0..order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractFiniteGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
}

/// A quotient group together with the coset of every element of the parent
/// (aligned with the parent's sorted element list).
#[derive(Clone, Debug)]
pub struct Quotient {
    pub group: AbstractFiniteGroup,
    pub coset_of: Vec<usize>,
}

impl AbstractFiniteGroup {
    /// Build from a row-major table, checking identity, inverses and
    /// associativity (exhaustively up to order 64, on a fixed sample above).
    pub fn from_flat_table(order: usize, table: Vec<usize>) -> Result<Self> {
        if order == 0 || table.len() != order * order || table.iter().any(|&x| x >= order) {
            return invalid("malformed multiplication table");
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| table[e * order + x] == x && table[x * order + e] == x))
            .ok_or_else(|| Error::Invalid("table has no identity".into()))?;
        let mut inverses = vec![usize::MAX; order];
        for x in 0..order {
            match (0..order).find(|&y| table[x * order + y] == identity) {
                Some(y) if table[y * order + x] == identity => inverses[x] = y,
                _ => return invalid(format!("element {x} has no inverse")),
            }
        }
        let g = AbstractFiniteGroup {
            order,
            table,
            identity,
            inverses,
        };
        let assoc = |a: usize, b: usize, c: usize| g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c));
        if order <= 64 {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        if !assoc(a, b, c) {
                            return invalid("table is not associative");
                        }
                    }
                }
            }
        } else {
            let mut s = 0x9e37_79b9_7f4a_7c15u64;
            for _ in 0..20_000 {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                let (a, b, c) = (
                    (s % order as u64) as usize,
                    ((s >> 20) % order as u64) as usize,
                    ((s >> 40) % order as u64) as usize,
                );
                if !assoc(a, b, c) {
                    return invalid("table is not associative");
                }
            }
        }
        Ok(g)
    }

    pub fn from_table(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("table is not square");
        }
        Self::from_flat_table(n, rows.concat())
    }

    /// Z/n under addition.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n * n).map(|k| (k / n + k % n) % n).collect();
        Self::from_flat_table(n, table).expect("cyclic table is valid")
    }

    /// The multiplicative group (Z/nZ)^x, ids in increasing residue order.
    pub fn units_mod(n: u64) -> (Self, Vec<u64>) {
        let units: Vec<u64> = (1..n.max(2))
            .filter(|&u| crate::arith::gcd(u, n) == 1)
            .collect();
        let k = units.len();
        let mut table = vec![0; k * k];
        for i in 0..k {
            for j in 0..k {
                let p = units[i] * units[j] % n;
                table[i * k + j] = units.binary_search(&p).unwrap();
            }
        }
        (Self::from_flat_table(k, table).expect("unit group"), units)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Power a^k for k >= 0.
    pub fn pow(&self, a: usize, k: u64) -> usize {
        let mut r = self.identity;
        for _ in 0..k {
            r = self.mul(r, a);
        }
        r
    }

    pub fn generators(&self) -> Vec<usize> {
        let all: Vec<usize> = (0..self.order).collect();
        extract_generators(self, &all)
    }

    /// Subgroup generated by `gens`, sorted.
    pub fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        close(self, gens, usize::MAX).expect("uncapped")
    }

    /// Quotient by a normal subgroup given as a sorted id list.
    pub fn quotient(&self, n: &[usize]) -> Result<Quotient> {
        let all: Vec<usize> = (0..self.order).collect();
        let ngens = extract_generators(self, n);
        if !super::normalized_by(self, n, &ngens, &self.generators()) {
            return Err(Error::NotNormal);
        }
        super::quotient_of(self, &all, n)
    }
}

impl GroupLaw for AbstractFiniteGroup {
    type Elem = usize;
    fn op(&self, a: &usize, b: &usize) -> usize {
        self.mul(*a, *b)
    }
    fn inv(&self, a: &usize) -> usize {
        self.inverses[*a]
    }
    fn identity(&self) -> usize {
        self.identity
    }
}

/// Extend generator images to a map on all elements; `None` if not a
/// well-defined homomorphism.
pub(crate) fn extend_hom<L: GroupLaw>(
    law: &L,
    gens: &[L::Elem],
    target: &AbstractFiniteGroup,
    images: &[usize],
) -> Option<std::collections::HashMap<L::Elem, usize>> {
    let mut map = std::collections::HashMap::new();
    map.insert(law.identity(), target.identity());
    let mut frontier = vec![law.identity()];
    while let Some(x) = frontier.pop() {
        let fx = map[&x];
        for (s, &img) in gens.iter().zip(images) {
            let y = law.op(&x, s);
            let fy = target.mul(fx, img);
            match map.get(&y) {
                Some(&v) if v != fy => return None,
                Some(_) => {}
                None => {
                    map.insert(y.clone(), fy);
                    frontier.push(y);
                }
            }
        }
    }
    Some(map)
}

/// Some isomorphism a -> b as an id table, found by backtracking over images
/// of a generating set of `a`. Intended for small groups.
pub fn find_isomorphism(a: &AbstractFiniteGroup, b: &AbstractFiniteGroup) -> Option<Vec<usize>> {
    if a.order() != b.order() {
        return None;
    }
    let gens = a.generators();
    let orders_b: Vec<usize> = (0..b.order()).map(|x| b.element_order(x)).collect();
    let mut images = Vec::with_capacity(gens.len());
    fn search(
        a: &AbstractFiniteGroup,
        b: &AbstractFiniteGroup,
        gens: &[usize],
        orders_b: &[usize],
        images: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        if images.len() == gens.len() {
            let map = extend_hom(a, gens, b, images)?;
            let mut table = vec![0; a.order()];
            let mut hit = vec![false; b.order()];
            for (x, y) in map {
                table[x] = y;
                hit[y] = true;
            }
            return hit.iter().all(|&h| h).then_some(table);
        }
        let want = a.element_order(gens[images.len()]);
        for y in 0..b.order() {
            if orders_b[y] == want {
                images.push(y);
                if let Some(t) = search(a, b, gens, orders_b, images) {
                    return Some(t);
                }
                images.pop();
            }
        }
        None
    }
    search(a, b, &gens, &orders_b, &mut images)
}
