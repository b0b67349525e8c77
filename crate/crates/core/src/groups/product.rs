use super::{
    close, extract_generators, normalized_by, quotient_of, AbstractFiniteGroup, GroupLaw,
    MatrixGroup, Quotient, ResidueMatrix,
};
use crate::error::{invalid, Error, Result};
use crate::DEFAULT_CAP;

/// Componentwise multiplication on tuples of packed matrices.
#[derive(Clone, Debug)]
pub struct ProductLaw {
    pub levels: Vec<u32>,
}

impl GroupLaw for ProductLaw {
    type Elem = Vec<u64>;
    fn op(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| super::matrix::mul_packed(x, y))
            .collect()
    }
    fn inv(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter()
            .map(|&x| {
                ResidueMatrix::unpack(x)
                    .inverse()
                    .expect("invertible")
                    .pack()
            })
            .collect()
    }
    fn identity(&self) -> Vec<u64> {
        self.levels
            .iter()
            .map(|&n| ResidueMatrix::identity(n).pack())
            .collect()
    }
}

/// A subgroup of G_1 x ... x G_n, materialized as sorted tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSubgroup {
    factors: Vec<MatrixGroup>,
    elements: Vec<Vec<u64>>,
    generators: Vec<Vec<u64>>,
}

impl ProductSubgroup {
    fn law_for(factors: &[MatrixGroup]) -> ProductLaw {
        ProductLaw {
            levels: factors.iter().map(|g| g.level()).collect(),
        }
    }

    pub fn law(&self) -> ProductLaw {
        Self::law_for(&self.factors)
    }

    fn check_tuple(factors: &[MatrixGroup], t: &[u64]) -> Result<()> {
        if t.len() != factors.len() {
            return invalid("tuple length differs from number of factors");
        }
        for (g, &x) in factors.iter().zip(t) {
            if !g.contains(&ResidueMatrix::unpack(x)) {
                return invalid(format!(
                    "{:?} is not in its factor",
                    ResidueMatrix::unpack(x)
                ));
            }
        }
        Ok(())
    }

    /// Subgroup generated by tuples of matrices.
    pub fn close(factors: Vec<MatrixGroup>, gens: &[Vec<ResidueMatrix>]) -> Result<Self> {
        if factors.is_empty() {
            return invalid("no factors");
        }
        let law = Self::law_for(&factors);
        let mut packed = Vec::new();
        for g in gens {
            let t: Vec<u64> = g.iter().map(|m| m.pack()).collect();
            Self::check_tuple(&factors, &t)?;
            packed.push(t);
        }
        let elements = close(&law, &packed, DEFAULT_CAP)?;
        Ok(ProductSubgroup {
            factors,
            elements,
            generators: packed,
        })
    }

    /// Wrap an explicit tuple list, checking it is a subgroup.
    pub fn from_elements(factors: Vec<MatrixGroup>, mut elements: Vec<Vec<u64>>) -> Result<Self> {
        if factors.is_empty() {
            return invalid("no factors");
        }
        elements.sort_unstable();
        elements.dedup();
        for t in &elements {
            Self::check_tuple(&factors, t)?;
        }
        let law = Self::law_for(&factors);
        let generators = extract_generators(&law, &elements);
        if close(&law, &generators, elements.len() + 1)? != elements {
            return invalid("tuple set is not a subgroup");
        }
        Ok(ProductSubgroup {
            factors,
            elements,
            generators,
        })
    }

    /// The tuples of the full product satisfying `pred`.
    pub fn from_predicate(
        factors: Vec<MatrixGroup>,
        pred: impl Fn(&[ResidueMatrix]) -> bool,
    ) -> Result<Self> {
        let total: usize = factors.iter().map(|g| g.order()).product();
        if total > DEFAULT_CAP {
            return Err(Error::CapExceeded { cap: DEFAULT_CAP });
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; factors.len()];
        let packed: Vec<&[u64]> = factors.iter().map(|g| g.packed()).collect();
        'outer: loop {
            let t: Vec<u64> = idx.iter().zip(&packed).map(|(&i, p)| p[i]).collect();
            let ms: Vec<ResidueMatrix> = t.iter().map(|&x| ResidueMatrix::unpack(x)).collect();
            if pred(&ms) {
                out.push(t);
            }
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < packed[k].len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        Self::from_elements(factors, out)
    }

    pub fn full_product(factors: Vec<MatrixGroup>) -> Result<Self> {
        Self::from_predicate(factors, |_| true)
    }

    pub fn factors(&self) -> &[MatrixGroup] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn packed(&self) -> &[Vec<u64>] {
        &self.elements
    }

    pub fn elements(&self) -> impl Iterator<Item = Vec<ResidueMatrix>> + '_ {
        self.elements
            .iter()
            .map(|t| t.iter().map(|&x| ResidueMatrix::unpack(x)).collect())
    }

    pub fn contains(&self, t: &[ResidueMatrix]) -> bool {
        let k: Vec<u64> = t.iter().map(|m| m.pack()).collect();
        self.elements.binary_search(&k).is_ok()
    }

    /// Index of the first factor onto which the projection is not surjective.
    pub fn non_surjective_factor(&self) -> Option<usize> {
        (0..self.factors.len()).find(|&i| {
            let mut img: Vec<u64> = self.elements.iter().map(|t| t[i]).collect();
            img.sort_unstable();
            img.dedup();
            img.len() != self.factors[i].order()
        })
    }

    pub fn is_subdirect(&self) -> bool {
        self.non_surjective_factor().is_none()
    }

    fn require_subdirect(&self) -> Result<()> {
        match self.non_surjective_factor() {
            Some(i) => Err(Error::NotSubdirect(i)),
            None => Ok(()),
        }
    }

    /// Image under the projection onto the factors listed in `s`.
    pub fn project(&self, s: &[usize]) -> Result<ProductSubgroup> {
        if s.is_empty() {
            return invalid("empty index set");
        }
        if s.iter().any(|&i| i >= self.factors.len()) {
            return invalid("projection index out of range");
        }
        let factors: Vec<MatrixGroup> = s.iter().map(|&i| self.factors[i].clone()).collect();
        let pick = |t: &Vec<u64>| s.iter().map(|&i| t[i]).collect::<Vec<u64>>();
        let mut elements: Vec<Vec<u64>> = self.elements.iter().map(pick).collect();
        elements.sort_unstable();
        elements.dedup();
        let mut generators: Vec<Vec<u64>> = self.generators.iter().map(pick).collect();
        generators.dedup();
        Ok(ProductSubgroup {
            factors,
            elements,
            generators,
        })
    }

    /// Generators of the full product G_1 x ... x G_n.
    fn product_generators(&self) -> Vec<Vec<u64>> {
        let id = self.law().identity();
        let mut out = Vec::new();
        for (i, g) in self.factors.iter().enumerate() {
            for &s in g.packed_generators() {
                let mut t = id.clone();
                t[i] = s;
                out.push(t);
            }
        }
        out
    }

    /// Whether this subgroup is normal in the full product of its factors.
    pub fn is_normal_in_product(&self) -> bool {
        normalized_by(
            &self.law(),
            &self.elements,
            &self.generators,
            &self.product_generators(),
        )
    }

    /// The quotient (G_1 x ... x G_n)/self; the product is materialized.
    pub fn quotient_of_product(&self) -> Result<Quotient> {
        if !self.is_normal_in_product() {
            return Err(Error::NotNormal);
        }
        let full = Self::full_product(self.factors.clone())?;
        quotient_of(&self.law(), &full.elements, &self.elements)
    }

    /// Elements of factor j paired with the identity everywhere else.
    fn kernel_slice(&self, j: usize) -> Vec<u64> {
        let id = self.law().identity();
        let mut out: Vec<u64> = self
            .elements
            .iter()
            .filter(|t| t.iter().enumerate().all(|(i, &x)| i == j || x == id[i]))
            .map(|t| t[j])
            .collect();
        out.sort_unstable();
        out
    }

    /// Goursat data for a subdirect product of two factors.
    pub fn goursat_data(&self) -> Result<GoursatData> {
        if self.factors.len() != 2 {
            return invalid("Goursat data needs exactly two factors");
        }
        self.require_subdirect()?;
        let n1 = MatrixGroup::from_elements(self.factors[0].level(), self.kernel_slice(0))?;
        let n2 = MatrixGroup::from_elements(self.factors[1].level(), self.kernel_slice(1))?;
        let g1 = &self.factors[0];
        let g2 = &self.factors[1];
        let Quotient { group, coset_of } = g2.quotient(&n2)?;
        let psi2 = coset_of;
        let mut psi1 = vec![usize::MAX; g1.order()];
        for t in &self.elements {
            let i = g1.packed().binary_search(&t[0]).expect("in factor");
            let j = g2.packed().binary_search(&t[1]).expect("in factor");
            if psi1[i] == usize::MAX {
                psi1[i] = psi2[j];
            } else if psi1[i] != psi2[j] {
                return Err(Error::Inconsistent("fibres disagree".into()));
            }
        }
        Ok(GoursatData {
            g1: g1.clone(),
            g2: g2.clone(),
            n1,
            n2,
            quotient: group,
            psi1,
            psi2,
        })
    }

    /// True iff every Goursat quotient Q_j for the split {j} | rest is abelian.
    pub fn has_abelian_entanglements(&self) -> Result<bool> {
        self.require_subdirect()?;
        for (j, gj) in self.factors.iter().enumerate() {
            let nj = self.kernel_slice(j);
            let law = gj.law();
            let gens = gj.packed_generators();
            for x in gens {
                for y in gens {
                    if nj.binary_search(&law.commutator(x, y)).is_err() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// The Goursat quotient Q_j = G_j / N_j for the split {j} | rest.
    pub fn partition_quotient(&self, j: usize) -> Result<Quotient> {
        self.require_subdirect()?;
        let gj = self
            .factors
            .get(j)
            .ok_or_else(|| Error::Invalid("factor index out of range".into()))?;
        let nj = MatrixGroup::from_elements(gj.level(), self.kernel_slice(j))?;
        gj.quotient(&nj)
    }
}

/// N_1, N_2, Q and the two surjections psi_i : G_i -> Q of Goursat's lemma.
#[derive(Clone, Debug)]
pub struct GoursatData {
    pub g1: MatrixGroup,
    pub g2: MatrixGroup,
    pub n1: MatrixGroup,
    pub n2: MatrixGroup,
    pub quotient: AbstractFiniteGroup,
    /// Coset id in `quotient` of each element of g1 (sorted order).
    pub psi1: Vec<usize>,
    /// Coset id in `quotient` of each element of g2 (sorted order).
    pub psi2: Vec<usize>,
}

impl GoursatData {
    /// The fibred product {(x, y) : psi1(x) = psi2(y)}, sorted.
    pub fn reconstruct(&self) -> Vec<Vec<u64>> {
        let k = self.quotient.order();
        let mut by_coset: Vec<Vec<u64>> = vec![Vec::new(); k];
        for (j, &y) in self.g2.packed().iter().enumerate() {
            by_coset[self.psi2[j]].push(y);
        }
        let mut out = Vec::new();
        for (i, &x) in self.g1.packed().iter().enumerate() {
            for &y in &by_coset[self.psi1[i]] {
                out.push(vec![x, y]);
            }
        }
        out.sort_unstable();
        out
    }

    /// psi1 and psi2 are homomorphisms onto the quotient with kernels n1, n2.
    pub fn check(&self) -> bool {
        let hom = |g: &MatrixGroup, psi: &[usize], n: &MatrixGroup| {
            let law = g.law();
            let p = g.packed();
            let ok_hom = p.iter().enumerate().all(|(i, x)| {
                g.packed_generators().iter().all(|s| {
                    let j = p.binary_search(&law.op(x, s)).unwrap();
                    let js = p.binary_search(s).unwrap();
                    psi[j] == self.quotient.mul(psi[i], psi[js])
                })
            });
            let kernel: Vec<u64> = p
                .iter()
                .zip(psi)
                .filter(|(_, &q)| q == self.quotient.identity())
                .map(|(&x, _)| x)
                .collect();
            let onto = {
                let mut seen = vec![false; self.quotient.order()];
                psi.iter().for_each(|&q| seen[q] = true);
                seen.into_iter().all(|s| s)
            };
            ok_hom && onto && kernel == n.packed()
        };
        hom(&self.g1, &self.psi1, &self.n1) && hom(&self.g2, &self.psi2, &self.n2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(level: u32, e: [i64; 4]) -> ResidueMatrix {
        ResidueMatrix::new(level, e).unwrap()
    }

    fn serre_144() -> ProductSubgroup {
        let g2 = MatrixGroup::full_gl2(2).unwrap();
        let g3 = MatrixGroup::full_gl2(3).unwrap();
        ProductSubgroup::from_predicate(vec![g2, g3], |t| {
            let eps = t[0].signature_mod2() == 1;
            let nonres = t[1].det() == 2;
            eps == nonres
        })
        .unwrap()
    }

    #[test]
    fn serre_index_two_subgroup() {
        let h = serre_144();
        assert_eq!(h.order(), 144);
        assert!(h.is_subdirect());
        let gd = h.goursat_data().unwrap();
        assert_eq!(gd.quotient.order(), 2);
        assert_eq!(gd.n1.order(), 3);
        assert_eq!(gd.n2.order(), 24);
        assert!(gd.check());
        assert_eq!(gd.reconstruct(), h.packed());
        assert!(h.has_abelian_entanglements().unwrap());
        assert!(h.is_normal_in_product());
        let p = h.project(&[1]).unwrap();
        assert_eq!(p.order(), 48);
        assert_eq!(h.project(&[0, 1]).unwrap(), h);
        assert!(h.project(&[]).is_err());
    }

    #[test]
    fn diagonal_and_full() {
        let g = MatrixGroup::full_gl2(2).unwrap();
        let diag =
            ProductSubgroup::from_predicate(vec![g.clone(), g.clone()], |t| t[0] == t[1]).unwrap();
        let gd = diag.goursat_data().unwrap();
        assert_eq!(gd.quotient.order(), 6);
        assert_eq!(gd.reconstruct(), diag.packed());
        assert!(!diag.has_abelian_entanglements().unwrap());
        assert!(!diag.is_normal_in_product());
        assert_eq!(diag.project(&[0]).unwrap().order(), 6);
        let full = ProductSubgroup::full_product(vec![g.clone(), g]).unwrap();
        assert_eq!(full.goursat_data().unwrap().quotient.order(), 1);
        assert!(full.has_abelian_entanglements().unwrap());
    }

    #[test]
    fn non_subdirect_rejected() {
        let g = MatrixGroup::full_gl2(2).unwrap();
        let h = ProductSubgroup::close(
            vec![g.clone(), g],
            &[vec![m(2, [1, 1, 0, 1]), ResidueMatrix::identity(2)]],
        )
        .unwrap();
        assert!(matches!(h.goursat_data(), Err(Error::NotSubdirect(_))));
        assert!(h.has_abelian_entanglements().is_err());
    }
}
