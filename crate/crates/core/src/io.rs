//! JSON schemas for matroids, valuated matroids, fans, lattices, and
//! bundles, plus canonical report rendering.  Rationals serialize as
//! strings `"p/q"` (denominator 1 omitted) and infinity as `"inf"`; output
//! objects are emitted with sorted keys so reports are byte-stable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bundle::{Filtration, TropicalToricBundle};
use crate::fan::Fan;
use crate::lattice_embed::RankedLattice;
use crate::matroid::{Matroid, MatroidError};
use crate::rational::{fmt_rat, parse_rat};
use crate::tropical::{ExtRat, TropicalVector};
use crate::valuated::{Monomial, ValuatedMatroid};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Valuated(#[from] crate::valuated::VmError),
    #[error(transparent)]
    Fan(#[from] crate::fan::FanError),
    #[error(transparent)]
    Bundle(#[from] crate::bundle::BundleError),
    #[error(transparent)]
    Lattice(#[from] crate::lattice_embed::LatticeError),
}

fn schema<T>(msg: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Schema(msg.into()))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct FanDoc {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    #[serde(default)]
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<i64>>,
}

impl FanDoc {
    pub fn to_fan(&self) -> Result<Fan, IoError> {
        Ok(Fan::new(
            self.dim,
            self.rays.clone(),
            self.max_cones.clone(),
            self.complete,
            self.h.clone(),
        )?)
    }

    pub fn from_fan(fan: &Fan) -> FanDoc {
        FanDoc {
            dim: fan.dim,
            rays: fan.rays.clone(),
            max_cones: fan.max_cones.clone(),
            complete: fan.complete,
            h: fan.polarization.clone(),
        }
    }
}

/// A column entry: a plain rational string or a monomial `c·t^e`.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum ColumnEntry {
    Plain(String),
    Monomial { c: String, e: i64 },
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct NuEntry {
    pub set: Vec<String>,
    pub value: String,
}

/// Matroid / valuated-matroid document.  Exactly one of `bases`, `columns`,
/// or `nu` describes the structure; `bases` and plain columns carry the
/// trivial valuation.
#[derive(Serialize, Deserialize, Clone, Debug, Default)]
pub struct MatroidDoc {
    pub ground: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bases: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<Vec<ColumnEntry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<NuEntry>>,
}

impl MatroidDoc {
    pub fn to_matroid(&self) -> Result<Matroid, IoError> {
        if let Some(bases) = &self.bases {
            return Ok(Matroid::from_label_bases(
                self.ground.clone(),
                bases.clone(),
            )?);
        }
        if let Some(columns) = &self.columns {
            let cols = columns
                .iter()
                .map(|col| {
                    col.iter()
                        .map(|e| match e {
                            ColumnEntry::Plain(s) => {
                                parse_rat(s).map_err(IoError::Schema)
                            }
                            ColumnEntry::Monomial { .. } => {
                                schema("monomial columns describe a valuated matroid")
                            }
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Matroid::from_columns(self.ground.clone(), &cols)?);
        }
        schema("matroid document needs bases or columns")
    }

    pub fn to_valuated(&self) -> Result<ValuatedMatroid, IoError> {
        if let Some(nu) = &self.nu {
            let ground = crate::matroid::Ground::new(self.ground.clone())?;
            let Some(rank) = self.rank else {
                return schema("valuated matroid with nu needs a rank");
            };
            let mut map = BTreeMap::new();
            for entry in nu {
                if entry.value.trim() == "inf" {
                    continue;
                }
                let mask = ground.mask_of(&entry.set)?;
                map.insert(mask, parse_rat(&entry.value).map_err(IoError::Schema)?);
            }
            return Ok(ValuatedMatroid::new(ground, rank, map)?);
        }
        if let Some(columns) = &self.columns {
            let monomial = columns
                .iter()
                .flatten()
                .any(|e| matches!(e, ColumnEntry::Monomial { .. }));
            if monomial {
                let cols = columns
                    .iter()
                    .map(|col| {
                        col.iter()
                            .map(|e| match e {
                                ColumnEntry::Plain(s) => Ok(Monomial::constant(
                                    parse_rat(s).map_err(IoError::Schema)?,
                                )),
                                ColumnEntry::Monomial { c, e } => Ok(Monomial {
                                    coeff: parse_rat(c).map_err(IoError::Schema)?,
                                    exp: *e,
                                }),
                            })
                            .collect::<Result<Vec<_>, IoError>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(ValuatedMatroid::from_columns(self.ground.clone(), &cols)?);
            }
        }
        Ok(ValuatedMatroid::trivial(&self.to_matroid()?))
    }

    pub fn from_valuated(vm: &ValuatedMatroid) -> MatroidDoc {
        let nu = vm
            .finite_values()
            .iter()
            .map(|(&b, v)| NuEntry {
                set: vm.ground().labels_of(b),
                value: fmt_rat(v),
            })
            .collect();
        MatroidDoc {
            ground: vm.ground().labels().to_vec(),
            rank: Some(vm.rank_total()),
            bases: None,
            columns: None,
            nu: Some(nu),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct StepDoc {
    pub j: i64,
    pub flat: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct FiltrationDoc {
    pub ray: usize,
    pub steps: Vec<StepDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct BundleDoc {
    pub fan: FanDoc,
    pub matroid: MatroidDoc,
    pub filtrations: Vec<FiltrationDoc>,
}

impl BundleDoc {
    pub fn to_bundle(&self) -> Result<TropicalToricBundle, IoError> {
        let fan = self.fan.to_fan()?;
        let vm = self.matroid.to_valuated()?;
        let mut filtrations = vec![None; fan.ray_count()];
        for f in &self.filtrations {
            if f.ray >= fan.ray_count() {
                return schema(format!("filtration ray {} out of range", f.ray));
            }
            let steps = f
                .steps
                .iter()
                .map(|s| Ok((s.j, vm.ground().mask_of(&s.flat)?)))
                .collect::<Result<Vec<_>, IoError>>()?;
            filtrations[f.ray] = Some(Filtration { steps });
        }
        let filtrations = filtrations
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.ok_or_else(|| IoError::Schema(format!("missing filtration for ray {i}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TropicalToricBundle::new_sheaf(fan, vm, filtrations)?)
    }

    pub fn from_bundle(e: &TropicalToricBundle) -> BundleDoc {
        let filtrations = e
            .filtrations
            .iter()
            .enumerate()
            .map(|(ray, f)| FiltrationDoc {
                ray,
                steps: f
                    .steps
                    .iter()
                    .map(|&(j, flat)| StepDoc {
                        j,
                        flat: e.vm.ground().labels_of(flat),
                    })
                    .collect(),
            })
            .collect();
        BundleDoc {
            fan: FanDoc::from_fan(&e.fan),
            matroid: MatroidDoc::from_valuated(&e.vm),
            filtrations,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct LatticeDoc {
    pub elements: Vec<String>,
    pub leq: Vec<(String, String)>,
    pub rank: BTreeMap<String, usize>,
}

impl LatticeDoc {
    pub fn to_lattice(&self) -> Result<RankedLattice, IoError> {
        Ok(RankedLattice::new(
            self.elements.clone(),
            &self.leq,
            self.rank.clone(),
        )?)
    }
}

/// Generator-matrix form of per-ray filtration subspaces for the lattice
/// pipeline: `subspaces[ray][step]` is a list of rational row vectors.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SubspacesDoc {
    pub ambient: usize,
    pub subspaces: Vec<Vec<Vec<Vec<String>>>>,
}

/// Input for the lattice-embedding command: a ranked lattice or subspace
/// realization data.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum EmbedInput {
    Lattice(LatticeDoc),
    Subspaces(SubspacesDoc),
}

pub fn parse_ext_rat_list(s: &str) -> Result<Vec<ExtRat>, IoError> {
    s.split(',')
        .map(|t| ExtRat::parse(t).map_err(IoError::Schema))
        .collect()
}

pub fn parse_int_list(s: &str) -> Result<Vec<i64>, IoError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| IoError::Schema(format!("invalid integer {t:?}")))
        })
        .collect()
}

pub fn trop_vector_json(v: &TropicalVector) -> Value {
    Value::Array(v.entries.iter().map(|e| json!(e.to_string())).collect())
}

/// Canonical pretty rendering with trailing newline.
pub fn render(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata as td;

    #[test]
    fn bundle_documents_round_trip() {
        for e in [
            td::tangent_pn(2),
            td::m1_bundle(),
            td::m2_bundle(),
            td::vamos_bundle(),
            td::fano_bundle(),
        ] {
            let doc = BundleDoc::from_bundle(&e);
            let text = serde_json::to_string(&doc).unwrap();
            let parsed: BundleDoc = serde_json::from_str(&text).unwrap();
            let back = parsed.to_bundle().unwrap();
            assert_eq!(back.vm, e.vm);
            assert_eq!(back.filtrations, e.filtrations);
            assert_eq!(back.fan, e.fan);
        }
    }

    #[test]
    fn matroid_docs() {
        let doc: MatroidDoc = serde_json::from_str(
            r#"{"ground":["1","2","3"],"columns":[["1","0"],["0","1"],["1","1"]]}"#,
        )
        .unwrap();
        let m = doc.to_matroid().unwrap();
        assert_eq!(m.rank_total(), 2);
        assert_eq!(m.bases().len(), 3);

        let doc: MatroidDoc = serde_json::from_str(
            r#"{"ground":["1","2","3"],"rank":2,
                "nu":[{"set":["1","2"],"value":"1/2"},
                      {"set":["1","3"],"value":"0"},
                      {"set":["2","3"],"value":"0"}]}"#,
        )
        .unwrap();
        let vm = doc.to_valuated().unwrap();
        assert_eq!(vm.finite_values().len(), 3);

        let doc: MatroidDoc = serde_json::from_str(
            r#"{"ground":["a","b","c"],
                "columns":[[{"c":"1","e":0},{"c":"0","e":0}],
                           [{"c":"0","e":0},{"c":"1","e":0}],
                           [{"c":"1","e":1},{"c":"1","e":1}]]}"#,
        )
        .unwrap();
        let vm = doc.to_valuated().unwrap();
        assert_eq!(vm.nu(0b110), ExtRat::Fin(crate::rational::rat_int(1)));
    }

    #[test]
    fn deterministic_rendering() {
        let e = td::m1_bundle();
        let a = render(&serde_json::to_value(BundleDoc::from_bundle(&e)).unwrap());
        let b = render(&serde_json::to_value(BundleDoc::from_bundle(&e)).unwrap());
        assert_eq!(a, b);
    }
}
