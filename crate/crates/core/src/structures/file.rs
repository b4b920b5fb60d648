//! On-disk JSON form of a structure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub points: Vec<String>,
    #[serde(default)]
    pub triples: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sorts: Option<SortsFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub oracles: BTreeMap<String, OracleFile>,
    /// Optional predimension declaration, same grammar as `--spec`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SortsFile {
    #[serde(rename = "D")]
    pub d: Vec<String>,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    pub bijection: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OracleFile {
    Free {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sort: Option<String>,
    },
    Uniform {
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sort: Option<String>,
    },
    Linear {
        field: u32,
        vectors: BTreeMap<String, Vec<i64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sort: Option<String>,
    },
}
