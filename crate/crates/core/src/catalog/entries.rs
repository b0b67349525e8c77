use super::{CatalogEntry, CurveGalois, NonAbelianMarker, SerreCurveSpec, WeierstrassCurve};
use crate::entanglement::{Component, ComponentMap, EntanglementSpec, MapTerm, Relation};
use crate::error::{Error, Result};
use crate::groups::{MatrixGroup, ResidueMatrix};

pub const CATALOG_IDS: [&str; 5] = [
    "lang-trotter-11",
    "curve-4x4",
    "curve-17",
    "family6-example",
    "serre-37a",
];

fn group(level: u32, gens: &[[i64; 4]]) -> Result<MatrixGroup> {
    let gens = gens
        .iter()
        .map(|&e| ResidueMatrix::new(level, e))
        .collect::<Result<Vec<_>>>()?;
    MatrixGroup::close(&gens, level)
}

fn map(component: usize, terms: Vec<MapTerm>) -> ComponentMap {
    ComponentMap { component, terms }
}

/// 11a: G(2) full, Q(E[5]) = Q(zeta_5), Q(E[2]) cap Q(E[11]) = Q(sqrt(-11)),
/// and the quintic subfield of Q(zeta_11) inside Q(E[25]).
fn lang_trotter() -> Result<CatalogEntry> {
    let g25 = group(5, &[[1, 0, 0, 2]])?.preimage(25)?;
    let entries = g25
        .generators()
        .iter()
        .map(|g| {
            let a = g.entries()[0] as u64;
            (g.entries().map(i64::from), vec![((a + 24) % 25) / 5])
        })
        .collect();
    let spec = EntanglementSpec::new(
        vec![
            Component::full(2, 1)?,
            Component::new(5, 2, g25)?,
            Component::full(11, 1)?,
        ],
        vec![
            Relation {
                target_divisors: vec![2],
                maps: vec![
                    map(0, vec![MapTerm::SignatureMod2 { image: None }]),
                    map(2, vec![MapTerm::DetLegendre { image: None }]),
                ],
            },
            Relation {
                target_divisors: vec![5],
                maps: vec![
                    map(1, vec![MapTerm::Table { level: 25, entries }]),
                    map(
                        2,
                        vec![MapTerm::DetModTarget {
                            modulus: 11,
                            values: vec![(2, vec![4])],
                        }],
                    ),
                ],
            },
        ],
    )?;
    Ok(CatalogEntry {
        id: "lang-trotter-11".into(),
        curve: WeierstrassCurve::new([0, -1, 1, -10, -20])?,
        m_e: 550,
        galois: CurveGalois::Spec(spec),
        notes: vec![
            "cyclicity uses the square-free level 110, where the quintic relation is invisible".into(),
            "the quintic relation reads (a-1)/5 mod 5 on the 25-adic side; its sign convention is a choice".into(),
        ],
    })
}

/// Y^2 = X^3 + X^2 + 4X + 4: zeta_5 inside Q(E[8]), |G(8)| = 128, G(3) Borel.
fn curve_4x4() -> Result<CatalogEntry> {
    let t8: [[i64; 4]; 3] = [[1, 0, 2, 1], [1, 1, 0, 3], [1, 2, 0, 5]];
    let g8 = group(8, &t8)?;
    let g3 = group(3, &[[1, 1, 0, 1], [1, 0, 0, 2]])?;
    let values = [1u64, 2, 0];
    let spec = EntanglementSpec::new(
        vec![
            Component::new(2, 3, g8)?,
            Component::new(3, 1, g3)?,
            Component::full(5, 1)?,
        ],
        vec![Relation {
            target_divisors: vec![4],
            maps: vec![
                map(
                    0,
                    vec![MapTerm::Table {
                        level: 8,
                        entries: t8.iter().zip(values).map(|(&g, v)| (g, vec![v])).collect(),
                    }],
                ),
                map(
                    2,
                    vec![MapTerm::DetModTarget {
                        modulus: 5,
                        values: vec![(2, vec![3])],
                    }],
                ),
            ],
        }],
    )?;
    Ok(CatalogEntry {
        id: "curve-4x4".into(),
        curve: WeierstrassCurve::new([0, 1, 0, 4, 4])?,
        m_e: 120,
        galois: CurveGalois::Spec(spec),
        notes: vec![
            "G(120) = G(3) x G(40); the 2-adic group was fitted against Frobenius statistics"
                .into(),
        ],
    })
}

/// Discriminant 17: eps(g2) = (det g17 | 17), G(2) of order 2.
fn curve_17() -> Result<CatalogEntry> {
    let g2 = group(2, &[[1, 1, 0, 1]])?;
    let spec = EntanglementSpec::new(
        vec![Component::new(2, 1, g2)?, Component::full(17, 1)?],
        vec![Relation {
            target_divisors: vec![2],
            maps: vec![
                map(0, vec![MapTerm::SignatureMod2 { image: None }]),
                map(1, vec![MapTerm::DetLegendre { image: None }]),
            ],
        }],
    )?;
    Ok(CatalogEntry {
        id: "curve-17".into(),
        curve: WeierstrassCurve::new([1, -1, 1, -91, -310])?,
        m_e: 34,
        galois: CurveGalois::Spec(spec),
        notes: vec!["a rational 2-torsion point, so G(2) has order 2".into()],
    })
}

fn family6() -> Result<CatalogEntry> {
    Ok(CatalogEntry {
        id: "family6-example".into(),
        curve: WeierstrassCurve::new([0, 0, 0, -63504, 6223392])?,
        m_e: 6,
        galois: CurveGalois::NonAbelian(NonAbelianMarker::level_six()?),
        notes: vec![
            "j = -2^10 3^4, the member t = 1 of j = 2^10 3^3 t^3 (1 - 4t^3)".into(),
            "Q(E[2]) lies in Q(E[3]); the Goursat quotient is S3".into(),
        ],
    })
}

fn serre_37a() -> Result<CatalogEntry> {
    let curve = WeierstrassCurve::new([0, 0, 1, -1, 0])?;
    let serre = curve.serre_data()?;
    debug_assert_eq!(serre, SerreCurveSpec::from_discriminant(37)?);
    Ok(CatalogEntry {
        id: "serre-37a".into(),
        curve,
        m_e: 74,
        galois: CurveGalois::Serre(serre),
        notes: vec!["conductor 37, rank 1; assumed to be a Serre curve".into()],
    })
}

pub fn catalog_entries() -> Result<Vec<CatalogEntry>> {
    CATALOG_IDS.iter().map(|id| catalog_entry(id)).collect()
}

pub fn catalog_entry(id: &str) -> Result<CatalogEntry> {
    match id {
        "lang-trotter-11" => lang_trotter(),
        "curve-4x4" => curve_4x4(),
        "curve-17" => curve_17(),
        "family6-example" => family6(),
        "serre-37a" => serre_37a(),
        _ => Err(Error::Invalid(format!(
            "unknown catalog id {id:?}; known: {}",
            CATALOG_IDS.join(", ")
        ))),
    }
}
