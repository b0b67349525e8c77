//! Density problems for reductions of elliptic curves: local sets, local
//! densities, correction factors and Euler products.

mod artin;
mod euler;
mod serre;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use artin::{artin_classical, ArtinResult};
pub use euler::{
    cyclic_factor, euler_product, koblitz_factor, EulerProduct, FixedInterval, TailKind,
};
pub use serre::{koblitz_e, serre_ap, serre_ap_delta, serre_ap_e2, serre_cyclic, serre_koblitz};

use crate::arith::{euler_phi, factor, gcd, gl2_order, serde_rational, valuation};
use crate::catalog::{serre_galois_spec, CurveGalois, NonAbelianMarker};
use crate::entanglement::{member_fraction, EntanglementSpec, LocalSet, PhiGroup};
use crate::error::{invalid, Error, Result};
use crate::groups::{MatrixGroup, ResidueMatrix};
use crate::{Rational, DEFAULT_CAP};

/// Default truncation for the cyclic problems.
pub const DEFAULT_L_CYCLIC: u64 = 100_000;
/// Default truncation for Koblitz products, whose tail decays like 1/L.
pub const DEFAULT_L_KOBLITZ: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityProblem {
    /// E(F_p) cyclic.
    Cyclic,
    /// E(F_p) cyclic and p = a mod f.
    CyclicAp { a: u64, f: u64 },
    /// |E(F_p)| / t prime.
    Koblitz { t: u64 },
}

impl DensityProblem {
    /// The AP problem with a reduced mod f.
    pub fn cyclic_ap(a: i64, f: u64) -> Result<Self> {
        if f == 0 {
            return invalid("modulus f must be positive");
        }
        Ok(DensityProblem::CyclicAp {
            a: a.rem_euclid(f as i64) as u64,
            f,
        })
    }

    pub fn koblitz(t: u64) -> Result<Self> {
        if t == 0 {
            return invalid("t must be positive");
        }
        Ok(DensityProblem::Koblitz { t })
    }

    /// Primes forced into the exceptional set by the problem itself.
    pub fn modulus_primes(&self) -> Vec<u64> {
        match *self {
            DensityProblem::Cyclic => Vec::new(),
            DensityProblem::CyclicAp { f, .. } => factor(f).into_iter().map(|(p, _)| p).collect(),
            DensityProblem::Koblitz { t } => factor(t).into_iter().map(|(p, _)| p).collect(),
        }
    }

    /// alpha with the local condition at l read off G(l^alpha).
    pub fn working_exponent(&self, l: u64) -> u32 {
        match *self {
            DensityProblem::Cyclic => 1,
            DensityProblem::CyclicAp { f, .. } => valuation(f, l).max(1),
            DensityProblem::Koblitz { t } => valuation(t, l) + 1,
        }
    }

    pub fn tail_kind(&self) -> TailKind {
        match self {
            DensityProblem::Koblitz { .. } => TailKind::Quadratic,
            _ => TailKind::Quartic,
        }
    }

    pub fn default_truncation(&self) -> u64 {
        match self {
            DensityProblem::Koblitz { .. } => DEFAULT_L_KOBLITZ,
            _ => DEFAULT_L_CYCLIC,
        }
    }

    /// Whether a matrix at level l^alpha lies in the local set.
    pub fn in_local_set(&self, l: u64, m: &ResidueMatrix) -> bool {
        let level = m.level() as u64;
        match *self {
            DensityProblem::Cyclic => !m.is_identity_mod(l as u32),
            DensityProblem::CyclicAp { a, f } => {
                let e = valuation(f, l);
                if e > 0 {
                    let q = l.pow(e);
                    if m.det() as u64 % q != a % q {
                        return false;
                    }
                }
                !m.is_identity_mod(l as u32)
            }
            DensityProblem::Koblitz { t } => {
                let [a, b, c, d] = m.entries().map(u64::from);
                let n = level;
                let v = ((1 + n - a) % n * ((1 + n - d) % n) % n + n - b * c % n) % n;
                let e = valuation(t, l);
                let exact = l.pow(e);
                v.is_multiple_of(exact) && !v.is_multiple_of(exact * l)
            }
        }
    }

    /// The generic factor at a prime outside the exceptional set.
    pub fn generic_factor(&self, l: u64) -> (BigInt, BigInt) {
        match self {
            DensityProblem::Koblitz { .. } => koblitz_factor(l),
            _ => cyclic_factor(l),
        }
    }

    /// delta_l normalized for the product: delta/(1 - 1/l) for Koblitz.
    pub fn normalize(&self, l: u64, delta: &Rational) -> Rational {
        match self {
            DensityProblem::Koblitz { .. } => {
                delta * Rational::new(BigInt::from(l), BigInt::from(l - 1))
            }
            _ => delta.clone(),
        }
    }

    /// delta_l for full GL2 at a prime untouched by entanglement, when a
    /// closed form is known.
    pub fn full_gl2_delta(&self, l: u64) -> Option<Rational> {
        let gl2 = BigInt::from(gl2_order(l));
        let one = Rational::one();
        match *self {
            DensityProblem::Cyclic => Some(one - Rational::new(BigInt::one(), gl2)),
            DensityProblem::CyclicAp { a, f } => {
                let e = valuation(f, l);
                if e == 0 {
                    return Some(one - Rational::new(BigInt::one(), gl2));
                }
                if a % l == 0 {
                    return Some(Rational::zero());
                }
                let base = Rational::new(BigInt::one(), BigInt::from(euler_phi(l.pow(e))));
                if a % l == 1 {
                    let sl2 = BigInt::from(l * l * l - l);
                    Some(base * (one - Rational::new(BigInt::one(), sl2)))
                } else {
                    Some(base)
                }
            }
            DensityProblem::Koblitz { t } => {
                if t % l == 0 {
                    return None;
                }
                let bad = BigInt::from(l * l * l - 2 * l);
                Some(one - Rational::new(bad, gl2))
            }
        }
    }
}

/// The local data at one exceptional prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalData {
    pub prime: u64,
    pub exponent: u32,
    pub level: u64,
    #[serde(with = "serde_rational")]
    pub delta: Rational,
    /// The factor entering the naive product (delta, or delta/(1-1/l)).
    #[serde(with = "serde_rational")]
    pub factor: Rational,
    /// |S| and |G| when enumerated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<(u64, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Vanishing {
    None,
    Local(u64),
    Entanglement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    Generic,
    SerreClosedForm,
    NonAbelianBlock,
}

#[derive(Clone, Debug, Serialize)]
pub struct NaiveProduct {
    /// Product of the exceptional factors.
    #[serde(with = "serde_rational")]
    pub exceptional: Rational,
    pub local: Vec<LocalData>,
    /// Generic factors over the remaining primes up to L, with the tail.
    pub generic: EulerProduct,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityResult {
    pub problem: DensityProblem,
    pub path: Path,
    pub constant: FixedInterval,
    #[serde(with = "serde_rational")]
    pub correction: Rational,
    pub naive: NaiveProduct,
    /// Per-prime averages E_l of the nontrivial character when Phi has order 2.
    #[serde(
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_e_factors"
    )]
    pub e_factors: Option<Vec<(u64, Rational)>>,
    pub vanishing: Vanishing,
    #[serde(rename = "truncation_L")]
    pub truncation_l: u64,
}

fn ser_e_factors<S: serde::Serializer>(
    v: &Option<Vec<(u64, Rational)>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let v = v.as_ref().expect("skipped when None");
    let mut m = s.serialize_map(Some(v.len()))?;
    for (l, e) in v {
        m.serialize_entry(&l.to_string(), &crate::arith::rat_to_string(e))?;
    }
    m.end()
}

impl DensityResult {
    pub fn constant_f64(&self) -> f64 {
        self.constant.mid()
    }

    pub fn e_factor(&self, l: u64) -> Option<&Rational> {
        self.e_factors
            .as_ref()?
            .iter()
            .find(|(p, _)| *p == l)
            .map(|(_, e)| e)
    }

    pub fn local(&self, l: u64) -> Option<&LocalData> {
        self.naive.local.iter().find(|d| d.prime == l)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Exceptional data plus correction, before the generic product is attached.
pub(crate) struct Assembled {
    pub local: Vec<LocalData>,
    pub correction: Rational,
    pub e_factors: Option<Vec<(u64, Rational)>>,
    pub path: Path,
}

pub(crate) fn finish(problem: &DensityProblem, a: Assembled, l_max: u64) -> Result<DensityResult> {
    finish_with(problem, a, l_max, None)
}

/// `generic` must be the product over the same skipped primes, if given.
fn finish_with(
    problem: &DensityProblem,
    a: Assembled,
    l_max: u64,
    generic: Option<&EulerProduct>,
) -> Result<DensityResult> {
    let mut local = a.local;
    local.sort_by_key(|d| d.prime);
    if let Some(top) = local.last() {
        if top.prime > l_max {
            return invalid(format!(
                "truncation L = {l_max} is below the exceptional prime {}",
                top.prime
            ));
        }
    }
    let skip: Vec<u64> = local.iter().map(|d| d.prime).collect();
    let exceptional = local.iter().fold(Rational::one(), |acc, d| acc * &d.factor);
    let generic = match generic {
        Some(g) => g.clone(),
        None => euler_product(l_max, &skip, problem.tail_kind(), |l| {
            problem.generic_factor(l)
        })?,
    };
    let vanishing = if let Some(d) = local.iter().find(|d| d.delta.is_zero()) {
        Vanishing::Local(d.prime)
    } else if a.correction.is_zero() {
        Vanishing::Entanglement
    } else {
        Vanishing::None
    };
    let constant = if vanishing == Vanishing::None {
        generic.value.scale_by(&(&a.correction * &exceptional))
    } else {
        FixedInterval::zero()
    };
    Ok(DensityResult {
        problem: problem.clone(),
        path: a.path,
        constant,
        correction: a.correction,
        naive: NaiveProduct {
            exceptional,
            local,
            generic,
        },
        e_factors: a.e_factors,
        vanishing,
        truncation_l: l_max,
    })
}

/// Local data at a prime outside the spec: full GL2 at the working level.
fn full_local(problem: &DensityProblem, l: u64, cap: usize) -> Result<LocalData> {
    let e = problem.working_exponent(l);
    let level = l.pow(e);
    let (delta, counts) = match problem.full_gl2_delta(l) {
        Some(d) => (d, None),
        None => {
            if level > crate::groups::MAX_LEVEL as u64 {
                return Err(Error::CapExceeded { cap });
            }
            let g = MatrixGroup::full_gl2_with_cap(level as u32, cap)?;
            let s = g.elements().filter(|m| problem.in_local_set(l, m)).count() as u64;
            let n = g.order() as u64;
            (
                Rational::new(BigInt::from(s), BigInt::from(n)),
                Some((s, n)),
            )
        }
    };
    Ok(LocalData {
        prime: l,
        exponent: e,
        level,
        factor: problem.normalize(l, &delta),
        delta,
        counts,
    })
}

/// The spec at the problem's working levels.
pub fn working_spec(problem: &DensityProblem, spec: &EntanglementSpec) -> Result<EntanglementSpec> {
    let exps: Vec<u32> = spec
        .components()
        .iter()
        .map(|c| problem.working_exponent(c.prime))
        .collect();
    if spec
        .components()
        .iter()
        .zip(&exps)
        .all(|(c, &e)| c.exponent == e)
    {
        Ok(spec.clone())
    } else {
        spec.at_levels(&exps)
    }
}

/// Local sets of the problem on every component of a working spec.
pub fn local_sets(problem: &DensityProblem, spec: &EntanglementSpec) -> Result<Vec<LocalSet>> {
    spec.components()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.exponent != problem.working_exponent(c.prime) {
                return Err(Error::LevelMismatch {
                    expected: c.prime.pow(problem.working_exponent(c.prime)),
                    found: c.level() as u64,
                });
            }
            let l = c.prime;
            LocalSet::from_predicate(spec, i, |m| problem.in_local_set(l, m))
        })
        .collect()
}

/// Exceptional data and correction on the generic path.
pub(crate) fn assemble_generic(
    problem: &DensityProblem,
    spec: &EntanglementSpec,
    cap: usize,
) -> Result<Assembled> {
    let spec = working_spec(problem, spec)?;
    let sets = local_sets(problem, &spec)?;
    let phi = spec.build_phi()?;
    assemble_with(problem, &spec, &phi, &sets, cap)
}

fn assemble_with(
    problem: &DensityProblem,
    spec: &EntanglementSpec,
    phi: &PhiGroup,
    sets: &[LocalSet],
    cap: usize,
) -> Result<Assembled> {
    let mf = phi.member_fraction(sets)?;
    let mut local = Vec::new();
    for ((c, s), g) in spec
        .components()
        .iter()
        .zip(sets)
        .zip(phi.component_groups())
    {
        let delta = Rational::new(BigInt::from(s.len()), BigInt::from(g.order()));
        local.push(LocalData {
            prime: c.prime,
            exponent: c.exponent,
            level: c.level() as u64,
            factor: problem.normalize(c.prime, &delta),
            delta,
            counts: Some((s.len() as u64, g.order() as u64)),
        });
    }
    for l in problem.modulus_primes() {
        if spec.component_index(l).is_none() {
            local.push(full_local(problem, l, cap)?);
        }
    }
    let e_factors = if phi.order() == 2 && mf.obstruction.is_none() {
        let chi = &phi.characters()[1];
        let mut out = Vec::new();
        for (c, s) in spec.components().iter().zip(sets) {
            let lifted = phi.lift_character(chi, s.component)?;
            let sum: i64 = s
                .indices()
                .iter()
                .map(|&i| if lifted.exponent_at(i) == 0 { 1 } else { -1 })
                .sum();
            out.push((
                c.prime,
                Rational::new(BigInt::from(sum), BigInt::from(s.len())),
            ));
        }
        Some(out)
    } else {
        None
    };
    Ok(Assembled {
        local,
        correction: mf.correction,
        e_factors,
        path: Path::Generic,
    })
}

/// Results for every a coprime to f, in increasing order of a. Phi, the
/// local sets away from f and the generic product are computed once.
pub fn density_ap_family(
    f: u64,
    galois: &CurveGalois,
    l_max: u64,
    generic: bool,
) -> Result<Vec<DensityResult>> {
    if f == 0 {
        return invalid("modulus f must be positive");
    }
    let residues: Vec<u64> = if f == 1 {
        vec![0]
    } else {
        (1..f).filter(|&a| gcd(a, f) == 1).collect()
    };
    let owned;
    let spec = match galois {
        CurveGalois::Spec(s) => s,
        CurveGalois::Serre(s) if generic => {
            owned = serre_galois_spec(s, DEFAULT_CAP)?;
            &owned
        }
        _ => {
            return residues
                .into_iter()
                .map(|a| density(&DensityProblem::CyclicAp { a, f }, galois, l_max, generic))
                .collect();
        }
    };
    let first = DensityProblem::CyclicAp { a: residues[0], f };
    let spec = working_spec(&first, spec)?;
    let phi = spec.build_phi()?;
    let mut cache: HashMap<(usize, u64), LocalSet> = HashMap::new();
    let mut product: Option<EulerProduct> = None;
    let mut out = Vec::with_capacity(residues.len());
    for a in residues {
        let problem = DensityProblem::CyclicAp { a, f };
        let mut sets = Vec::with_capacity(spec.components().len());
        for (i, c) in spec.components().iter().enumerate() {
            let l = c.prime;
            let key = if f.is_multiple_of(l) {
                a % c.level() as u64
            } else {
                u64::MAX
            };
            let set = match cache.get(&(i, key)) {
                Some(s) => s.clone(),
                None => {
                    let s = LocalSet::from_predicate(&spec, i, |m| problem.in_local_set(l, m))?;
                    cache.insert((i, key), s.clone());
                    s
                }
            };
            sets.push(set);
        }
        let asm = assemble_with(&problem, &spec, &phi, &sets, DEFAULT_CAP)?;
        let r = finish_with(&problem, asm, l_max, product.as_ref())?;
        product.get_or_insert_with(|| r.naive.generic.clone());
        out.push(r);
    }
    Ok(out)
}

/// The generic character-sum path on an explicit spec.
pub fn density_from_spec(
    problem: &DensityProblem,
    spec: &EntanglementSpec,
    l_max: u64,
) -> Result<DensityResult> {
    check_problem(problem)?;
    let a = assemble_generic(problem, spec, DEFAULT_CAP)?;
    finish(problem, a, l_max)
}

/// The non-abelian (2,3) block: |H cap (S2 x S3)| / |H| at level 6 with
/// full GL2 elsewhere.
pub fn density_non_abelian(
    problem: &DensityProblem,
    marker: &NonAbelianMarker,
    l_max: u64,
) -> Result<DensityResult> {
    check_problem(problem)?;
    if problem.working_exponent(2) != 1 || problem.working_exponent(3) != 1 {
        return Err(Error::Unsupported(
            "the non-abelian block is only known at level 6".into(),
        ));
    }
    let block = marker.block_fraction(
        |m| problem.in_local_set(2, m),
        |m| problem.in_local_set(3, m),
    );
    // Report the block at 2 and a unit factor at 3.
    let block_factor = match problem {
        DensityProblem::Koblitz { .. } => &block * Rational::new(BigInt::from(6), BigInt::from(2)),
        _ => block.clone(),
    };
    let mut local = vec![
        LocalData {
            prime: 2,
            exponent: 1,
            level: 6,
            delta: block.clone(),
            factor: block_factor,
            counts: None,
        },
        LocalData {
            prime: 3,
            exponent: 1,
            level: 6,
            delta: Rational::one(),
            factor: Rational::one(),
            counts: None,
        },
    ];
    for l in problem.modulus_primes() {
        if l > 3 {
            local.push(full_local(problem, l, DEFAULT_CAP)?);
        }
    }
    let a = Assembled {
        local,
        correction: Rational::one(),
        e_factors: None,
        path: Path::NonAbelianBlock,
    };
    let mut r = finish(problem, a, l_max)?;
    if block.is_zero() {
        r.vanishing = Vanishing::Local(2);
    }
    Ok(r)
}

fn check_problem(problem: &DensityProblem) -> Result<()> {
    match *problem {
        DensityProblem::CyclicAp { f: 0, .. } => invalid("modulus f must be positive"),
        DensityProblem::CyclicAp { a, f } if a >= f && f > 1 => invalid("a must be reduced mod f"),
        DensityProblem::Koblitz { t: 0 } => invalid("t must be positive"),
        _ => Ok(()),
    }
}

/// Density for a catalog-style Galois description. Serre curves use the
/// closed forms unless `generic` is set.
pub fn density(
    problem: &DensityProblem,
    galois: &CurveGalois,
    l_max: u64,
    generic: bool,
) -> Result<DensityResult> {
    match galois {
        CurveGalois::Spec(spec) => density_from_spec(problem, spec, l_max),
        CurveGalois::NonAbelian(m) => density_non_abelian(problem, m, l_max),
        CurveGalois::Serre(s) if generic => {
            let spec = serre_galois_spec(s, DEFAULT_CAP)?;
            density_from_spec(problem, &spec, l_max)
        }
        CurveGalois::Serre(s) => match *problem {
            DensityProblem::Cyclic => serre_cyclic(s, l_max),
            DensityProblem::CyclicAp { a, f } => serre_ap(a, f, s, l_max),
            DensityProblem::Koblitz { t: 1 } => serre_koblitz(s, l_max),
            DensityProblem::Koblitz { .. } => Err(Error::Unsupported(
                "Koblitz with t > 1 needs the generic path".into(),
            )),
        },
    }
}

/// Why the constant vanishes, if it does.
pub fn vanishing_analysis(problem: &DensityProblem, galois: &CurveGalois) -> Result<Vanishing> {
    // The exceptional part decides vanishing; the product needs only L = max prime.
    let l = match galois {
        CurveGalois::Spec(s) => s.primes().into_iter().chain(problem.modulus_primes()).max(),
        CurveGalois::Serre(s) => s
            .odd_primes()
            .into_iter()
            .chain(problem.modulus_primes())
            .max(),
        CurveGalois::NonAbelian(_) => problem.modulus_primes().into_iter().max(),
    }
    .unwrap_or(2)
    .max(3);
    Ok(density(problem, galois, l, false)?.vanishing)
}

/// Correction factor B and its vanishing flag on the generic path.
pub fn correction_factor(
    problem: &DensityProblem,
    spec: &EntanglementSpec,
) -> Result<(Rational, bool)> {
    let spec = working_spec(problem, spec)?;
    let sets = local_sets(problem, &spec)?;
    let mf = member_fraction(&spec, &sets)?;
    let vanishes = mf.correction.is_zero();
    Ok((mf.correction, vanishes))
}

/// gcd(a, f) > 1 leaves no admissible primes beyond finitely many.
pub fn ap_is_degenerate(a: u64, f: u64) -> bool {
    gcd(a, f) > 1
}

#[cfg(test)]
mod tests;
