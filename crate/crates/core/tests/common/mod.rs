//! Generators and oracles shared by the integration suites.
#![allow(dead_code)]

use elldensity::entanglement::{Component, ComponentMap, MapTerm, Relation};
use elldensity::groups::ProductSubgroup;
use elldensity::{EntanglementSpec, LocalSet, MatrixGroup, ResidueMatrix};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn m(level: u32, e: [i64; 4]) -> ResidueMatrix {
    ResidueMatrix::new(level, e).unwrap()
}

pub fn random_invertible(rng: &mut ChaCha8Rng, level: u32) -> ResidueMatrix {
    loop {
        let e = [0; 4].map(|_: i64| rng.random_range(0..level as i64));
        let x = m(level, e);
        if x.is_invertible() {
            return x;
        }
    }
}

/// A component group at `level`: full GL2, Borel, or closed from random
/// generators. Draws whose relations are not surjective get rejected later.
fn random_component_group(rng: &mut ChaCha8Rng, level: u32) -> MatrixGroup {
    match rng.random_range(0..4) {
        0 | 1 => MatrixGroup::full_gl2(level).unwrap(),
        2 => MatrixGroup::from_predicate(level, |x| x.entries()[2] == 0).unwrap(),
        _ => {
            let k = rng.random_range(1..=2);
            let gens: Vec<_> = (0..k).map(|_| random_invertible(rng, level)).collect();
            MatrixGroup::close(&gens, level).unwrap()
        }
    }
}

/// A vector in Z/d_1 x ... killed by `ord`, usually nonzero.
fn random_image(rng: &mut ChaCha8Rng, divisors: &[u64], ord: u64) -> Vec<u64> {
    let draw = |rng: &mut ChaCha8Rng| -> Vec<u64> {
        divisors
            .iter()
            .map(|&d| {
                let step = d / num_integer::gcd(d, ord);
                rng.random_range(0..d / step) * step
            })
            .collect()
    };
    let mut v = draw(rng);
    for _ in 0..8 {
        if v.iter().any(|&x| x != 0) || rng.random_bool(0.1) {
            break;
        }
        v = draw(rng);
    }
    v
}

fn random_terms(rng: &mut ChaCha8Rng, prime: u64, level: u32, divisors: &[u64]) -> Vec<MapTerm> {
    let mut pool: Vec<MapTerm> = Vec::new();
    match prime {
        2 => {
            pool.push(MapTerm::SignatureMod2 {
                image: Some(random_image(rng, divisors, 2)),
            });
            if level == 4 {
                pool.push(MapTerm::DetModTarget {
                    modulus: 4,
                    values: vec![(3, random_image(rng, divisors, 2))],
                });
            }
        }
        3 => {
            pool.push(MapTerm::DetLegendre {
                image: Some(random_image(rng, divisors, 2)),
            });
        }
        _ => {
            pool.push(MapTerm::DetLegendre {
                image: Some(random_image(rng, divisors, 2)),
            });
            pool.push(MapTerm::DetModTarget {
                modulus: 5,
                values: vec![(2, random_image(rng, divisors, 4))],
            });
        }
    }
    let k = rng.random_range(1..=pool.len());
    pool.into_iter().take(k).collect()
}

/// A random spec over levels {2, 3, 4, 5} with relation targets of order
/// at most 4 and product order at most 10^6, or None if the draw is not a
/// valid (surjective) spec.
pub fn random_spec(rng: &mut ChaCha8Rng) -> Option<EntanglementSpec> {
    let two = *[0u32, 1, 2].choose(rng).unwrap();
    let mut levels: Vec<(u64, u32)> = Vec::new();
    if two > 0 {
        levels.push((2, two));
    }
    for p in [3u64, 5] {
        if rng.random_bool(0.6) {
            levels.push((p, 1));
        }
    }
    if levels.len() < 2 {
        return None;
    }
    let comps: Vec<Component> = levels
        .iter()
        .map(|&(p, e)| {
            let level = p.pow(e) as u32;
            Component::new(p, e, random_component_group(rng, level)).unwrap()
        })
        .collect();
    let order: u128 = comps.iter().map(|c| c.group.order() as u128).product();
    if order > 1_000_000 {
        return None;
    }
    let targets: [&[u64]; 3] = [&[2], &[4], &[2, 2]];
    let n_rel = rng.random_range(0..=2);
    let relations = (0..n_rel)
        .map(|_| {
            let divisors = targets.choose(rng).unwrap().to_vec();
            let mut maps = Vec::new();
            // At least two components take part.
            let skip =
                (comps.len() > 2 && rng.random_bool(0.3)).then(|| rng.random_range(0..comps.len()));
            for (i, c) in comps.iter().enumerate() {
                if Some(i) != skip {
                    maps.push(ComponentMap {
                        component: i,
                        terms: random_terms(rng, c.prime, c.level(), &divisors),
                    });
                }
            }
            Relation {
                target_divisors: divisors,
                maps,
            }
        })
        .collect();
    let spec = EntanglementSpec::new(comps, relations).ok()?;
    spec.build_phi().ok()?;
    Some(spec)
}

/// Random local sets: independent coin flips with a per-component bias.
pub fn random_local_sets(rng: &mut ChaCha8Rng, spec: &EntanglementSpec) -> Vec<LocalSet> {
    spec.components()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let q = rng.random_range(0.05..0.95);
            let members = (0..c.group.order())
                .filter(|_| rng.random_bool(q))
                .collect();
            LocalSet::from_indices(i, members)
        })
        .collect()
}

/// Matrix groups of order at most 48 at levels 2, 3, 4, 5.
pub fn small_groups() -> Vec<MatrixGroup> {
    let close = |level: u32, gens: &[[i64; 4]]| {
        let g: Vec<_> = gens.iter().map(|&e| m(level, e)).collect();
        MatrixGroup::close(&g, level).unwrap()
    };
    let mut out = vec![
        MatrixGroup::full_gl2(2).unwrap(),
        close(2, &[[1, 1, 0, 1]]),
        close(2, &[[0, 1, 1, 1]]),
        MatrixGroup::full_gl2(3).unwrap(),
        MatrixGroup::from_predicate(3, |x| x.det() == 1).unwrap(),
        MatrixGroup::from_predicate(3, |x| x.entries()[2] == 0).unwrap(),
        // Non-split Cartan mod 3: a + b i with i^2 = -1.
        close(3, &[[1, 2, 1, 1]]),
        close(3, &[[1, 1, 0, 1], [2, 0, 0, 1]]),
        MatrixGroup::from_predicate(4, |x| x.is_identity_mod(2)).unwrap(),
        MatrixGroup::from_predicate(4, |x| x.entries()[2] == 0).unwrap(),
        close(4, &[[0, 1, 1, 1], [3, 0, 0, 3]]),
        // Split Cartan mod 5 and its normalizer.
        MatrixGroup::from_predicate(5, |x| x.entries()[1] == 0 && x.entries()[2] == 0).unwrap(),
        MatrixGroup::from_predicate(5, |x| {
            let [a, b, c, d] = x.entries();
            (b == 0 && c == 0) || (a == 0 && d == 0)
        })
        .unwrap(),
        close(5, &[[2, 0, 0, 1], [1, 0, 0, 2], [0, 1, 1, 0]]),
        close(5, &[[1, 1, 0, 1], [2, 0, 0, 3]]),
    ];
    out.retain(|g| g.order() <= 48);
    out
}

/// Subdirect products of two or three small groups, closed from random
/// generator tuples and deduplicated.
pub fn random_subdirect(
    rng: &mut ChaCha8Rng,
    groups: &[MatrixGroup],
    count: usize,
) -> Vec<ProductSubgroup> {
    let mut out: Vec<ProductSubgroup> = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < 100 * count {
        tries += 1;
        let n = if rng.random_bool(0.75) { 2 } else { 3 };
        let factors: Vec<MatrixGroup> = if rng.random_bool(0.4) {
            vec![groups.choose(rng).unwrap().clone(); n]
        } else {
            (0..n)
                .map(|_| groups.choose(rng).unwrap().clone())
                .collect()
        };
        let size: usize = factors.iter().map(|g| g.order()).product();
        if size > 60_000 {
            continue;
        }
        let k = rng.random_range(1..=3);
        let mut gens: Vec<Vec<ResidueMatrix>> = (0..k)
            .map(|_| {
                factors
                    .iter()
                    .map(|g| {
                        let els: Vec<_> = g.elements().collect();
                        *els.choose(rng).unwrap()
                    })
                    .collect()
            })
            .collect();
        // Twisted diagonals (x, c x c^-1, ...) glue equal factors along an
        // automorphism; these are the usual non-normal cases.
        if factors.iter().all(|g| g == &factors[0]) && rng.random_bool(0.6) {
            let g = &factors[0];
            let els: Vec<_> = g.elements().collect();
            let conj: Vec<ResidueMatrix> = (0..n).map(|_| *els.choose(rng).unwrap()).collect();
            let base: Vec<ResidueMatrix> = g.generators();
            gens = base
                .iter()
                .map(|x| {
                    conj.iter()
                        .map(|c| c.mul(x).mul(&c.inverse().unwrap()))
                        .collect()
                })
                .collect();
            if rng.random_bool(0.5) {
                // Widen one coordinate by a random element.
                let mut t = vec![ResidueMatrix::identity(g.level()); n];
                t[rng.random_range(0..n)] = *els.choose(rng).unwrap();
                gens.push(t);
            }
        }
        let Ok(h) = ProductSubgroup::close(factors, &gens) else {
            continue;
        };
        if h.is_subdirect() && !out.contains(&h) {
            out.push(h);
        }
    }
    out
}

/// Normality by conjugating every generator of h by every element of the
/// full product.
pub fn normal_by_enumeration(h: &ProductSubgroup) -> bool {
    let full = ProductSubgroup::full_product(h.factors().to_vec()).unwrap();
    let gens: Vec<Vec<ResidueMatrix>> = generators_of(h);
    let normal = full.elements().all(|g| {
        gens.iter().all(|x| {
            let c: Vec<ResidueMatrix> = g
                .iter()
                .zip(x)
                .map(|(a, b)| a.mul(b).mul(&a.inverse().unwrap()))
                .collect();
            h.contains(&c)
        })
    });
    normal
}

/// A generating set found greedily from the element list.
pub fn generators_of(h: &ProductSubgroup) -> Vec<Vec<ResidueMatrix>> {
    let mut gens: Vec<Vec<ResidueMatrix>> = Vec::new();
    let mut span = ProductSubgroup::close(h.factors().to_vec(), &[]).unwrap();
    for x in h.elements() {
        if span.order() == h.order() {
            break;
        }
        if !span.contains(&x) {
            gens.push(x);
            span = ProductSubgroup::close(h.factors().to_vec(), &gens).unwrap();
        }
    }
    gens
}
