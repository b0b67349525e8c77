//! JSON form of an [`EntanglementSpec`].
//!
//! ```json
//! {"components": [{"prime": 2, "exponent": 1, "full": true},
//!                 {"prime": 5, "exponent": 1, "generators": [[2,0,0,1], [1,1,0,1]]}],
//!  "relations": [{"target_divisors": [2],
//!                 "maps": [{"component": 0, "rule": "signature_mod2"},
//!                          {"component": 1, "rule": "det_legendre"}]}]}
//! ```
//! A map carries either one inline rule or a list of `terms` that are summed.

use serde::{Deserialize, Serialize};

use super::{Component, ComponentMap, EntanglementSpec, MapTerm, Relation};
use crate::error::{invalid, Result};
use crate::groups::{MatrixGroup, ResidueMatrix};

#[derive(Serialize, Deserialize)]
struct ComponentWire {
    prime: u64,
    exponent: u32,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    full: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    generators: Vec<[i64; 4]>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MapWire {
    Terms {
        component: usize,
        terms: Vec<MapTerm>,
    },
    Single {
        component: usize,
        #[serde(flatten)]
        term: MapTerm,
    },
}

#[derive(Serialize, Deserialize)]
struct RelationWire {
    target_divisors: Vec<u64>,
    maps: Vec<MapWire>,
}

#[derive(Serialize, Deserialize)]
struct SpecWire {
    components: Vec<ComponentWire>,
    #[serde(default)]
    relations: Vec<RelationWire>,
}

impl EntanglementSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let w: SpecWire = serde_json::from_str(s)?;
        let mut comps = Vec::new();
        for c in w.components {
            let comp = if c.full {
                if !c.generators.is_empty() {
                    return invalid("a component is either full or given by generators");
                }
                Component::full(c.prime, c.exponent)?
            } else {
                let level = c
                    .prime
                    .checked_pow(c.exponent)
                    .filter(|&l| l <= crate::groups::MAX_LEVEL as u64)
                    .ok_or_else(|| {
                        crate::Error::Invalid(format!(
                            "level {}^{} is too large",
                            c.prime, c.exponent
                        ))
                    })? as u32;
                let gens = c
                    .generators
                    .iter()
                    .map(|&e| ResidueMatrix::new(level, e))
                    .collect::<Result<Vec<_>>>()?;
                Component::new(c.prime, c.exponent, MatrixGroup::close(&gens, level)?)?
            };
            comps.push(comp);
        }
        let relations = w
            .relations
            .into_iter()
            .map(|r| Relation {
                target_divisors: r.target_divisors,
                maps: r
                    .maps
                    .into_iter()
                    .map(|m| match m {
                        MapWire::Terms { component, terms } => ComponentMap { component, terms },
                        MapWire::Single { component, term } => ComponentMap {
                            component,
                            terms: vec![term],
                        },
                    })
                    .collect(),
            })
            .collect();
        EntanglementSpec::new(comps, relations)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let components = self
            .components
            .iter()
            .map(|c| ComponentWire {
                prime: c.prime,
                exponent: c.exponent,
                full: c.group.is_full_gl2(),
                generators: if c.group.is_full_gl2() {
                    Vec::new()
                } else {
                    c.group.to_generator_list().generators
                },
            })
            .collect();
        let relations = self
            .relations
            .iter()
            .map(|r| RelationWire {
                target_divisors: r.target_divisors.clone(),
                maps: r
                    .maps
                    .iter()
                    .map(|m| match m.terms.as_slice() {
                        [t] => MapWire::Single {
                            component: m.component,
                            term: t.clone(),
                        },
                        _ => MapWire::Terms {
                            component: m.component,
                            terms: m.terms.clone(),
                        },
                    })
                    .collect(),
            })
            .collect();
        serde_json::to_value(SpecWire {
            components,
            relations,
        })
        .expect("spec serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("spec serializes")
    }
}
