//! Finite carriers whose designated families are directed by construction,
//! a corpus of u-ball formulas over them, and the `.model.json` format.

mod corpus;
mod order;
mod ultrametric;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Carrier;
use crate::setsystem::{SetFamily, DEFAULT_UNIVERSE_CAP};

pub use corpus::{builtin_formulas, BallDecomposition, UBallFormula, CORPUS_KINDS};
pub use order::OrderModel;
pub use ultrametric::{random_ultrametric, UltrametricModel};

/// Conventional suffix of model files.
pub const MODEL_FILE_EXTENSION: &str = ".model.json";

#[derive(Error, Debug)]
pub enum ModelError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("parent array has a cycle through node {node}")]
    Cycle { node: usize },
    #[error("node {node} has out-of-range parent {parent}")]
    IndexOutOfRange { node: usize, parent: usize },
    #[error("parent array must have exactly one root, found {0}")]
    RootCount(usize),
    #[error("tree has {0} leaves, at least 2 are required")]
    TooFewLeaves(usize),
    #[error("carrier of size {0} exceeds the universe cap")]
    TooLarge(usize),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("invalid family: {0}")]
    Family(String),
}

/// An explicit set family over `0..universe`, not necessarily directed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyModel {
    family: SetFamily,
    seed: Option<u64>,
}

impl FamilyModel {
    pub fn new(family: SetFamily, seed: Option<u64>) -> Self {
        FamilyModel { family, seed }
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }
}

impl Carrier for FamilyModel {
    fn size(&self) -> usize {
        self.family.universe().size()
    }

    fn id(&self) -> String {
        format!("family-u{}-n{}", self.size(), self.family.len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Ultrametric(UltrametricModel),
    Order(OrderModel),
    Family(FamilyModel),
}

impl Model {
    /// The family a model is built around: all balls, all proper nonempty
    /// initial segments, or the explicit sets.
    pub fn designated_family(&self) -> SetFamily {
        match self {
            Model::Ultrametric(m) => m.ball_family().into_base(),
            Model::Order(m) => m.order_family(false).into_base(),
            Model::Family(m) => m.family.clone(),
        }
    }

    pub fn carrier(&self) -> &dyn Carrier {
        match self {
            Model::Ultrametric(m) => m,
            Model::Order(m) => m,
            Model::Family(m) => m,
        }
    }

    pub fn id(&self) -> String {
        self.carrier().id()
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModelFile {
    Ultrametric {
        parent: Vec<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Order {
        size: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Family {
        universe: usize,
        sets: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

// Per-kind documents, read straight from the text so that errors keep their
// positions.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UltrametricDoc {
    #[serde(rename = "kind")]
    _kind: String,
    parent: Vec<i64>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrderDoc {
    #[serde(rename = "kind")]
    _kind: String,
    size: usize,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDoc {
    #[serde(rename = "kind")]
    _kind: String,
    universe: usize,
    sets: Vec<Vec<usize>>,
    #[serde(default)]
    seed: Option<u64>,
}

fn json_error(e: serde_json::Error) -> ModelError {
    ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Line and column (1-based) of the first occurrence of `"key"` in `text`.
fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(col) = line.find(&needle) {
            return (i + 1, col + 1);
        }
    }
    (1, 1)
}

fn semantic(text: &str, key: &str, err: ModelError) -> ModelError {
    let (line, column) = locate(text, key);
    ModelError::Parse {
        line,
        column,
        message: err.to_string(),
    }
}

/// Parses a model document.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    let kind = match value.get("kind") {
        Some(serde_json::Value::String(k)) => k.clone(),
        Some(_) => {
            let err = ModelError::Infeasible("`kind` must be a string".into());
            return Err(semantic(text, "kind", err));
        }
        None => {
            let err = ModelError::Infeasible("missing field `kind`".into());
            return Err(semantic(text, "kind", err));
        }
    };
    let file = match kind.as_str() {
        "ultrametric" => {
            let d: UltrametricDoc = serde_json::from_str(text).map_err(json_error)?;
            ModelFile::Ultrametric {
                parent: d.parent,
                seed: d.seed,
            }
        }
        "order" => {
            let d: OrderDoc = serde_json::from_str(text).map_err(json_error)?;
            ModelFile::Order {
                size: d.size,
                seed: d.seed,
            }
        }
        "family" => {
            let d: FamilyDoc = serde_json::from_str(text).map_err(json_error)?;
            ModelFile::Family {
                universe: d.universe,
                sets: d.sets,
                seed: d.seed,
            }
        }
        other => {
            let err = ModelError::Infeasible(format!(
                "unknown kind {other:?}; expected ultrametric, order or family"
            ));
            return Err(semantic(text, "kind", err));
        }
    };
    match file {
        ModelFile::Ultrametric { parent, seed } => {
            let mut tree = Vec::with_capacity(parent.len());
            for (node, &p) in parent.iter().enumerate() {
                tree.push(match p {
                    -1 => None,
                    p if p >= 0 => Some(p as usize),
                    p => {
                        let err = ModelError::Infeasible(format!(
                            "node {node} has parent {p}; roots are marked with -1"
                        ));
                        return Err(semantic(text, "parent", err));
                    }
                });
            }
            UltrametricModel::from_parents(tree, seed)
                .map(Model::Ultrametric)
                .map_err(|e| semantic(text, "parent", e))
        }
        ModelFile::Order { size, seed } => {
            if size == 0 || size > DEFAULT_UNIVERSE_CAP {
                let err = ModelError::Infeasible(format!("order size {size} is out of range"));
                return Err(semantic(text, "size", err));
            }
            Ok(Model::Order(OrderModel::with_seed(size, seed)))
        }
        ModelFile::Family {
            universe,
            sets,
            seed,
        } => SetFamily::from_indices(universe, sets)
            .map(|f| Model::Family(FamilyModel::new(f, seed)))
            .map_err(|e| semantic(text, "sets", ModelError::Family(e.to_string()))),
    }
}

/// Pretty-printed JSON document for `model`.
pub fn to_json(model: &Model) -> String {
    let file = match model {
        Model::Ultrametric(m) => ModelFile::Ultrametric {
            parent: m
                .parents()
                .iter()
                .map(|p| p.map_or(-1, |p| p as i64))
                .collect(),
            seed: m.seed(),
        },
        Model::Order(m) => ModelFile::Order {
            size: m.size(),
            seed: m.seed(),
        },
        Model::Family(m) => ModelFile::Family {
            universe: m.family.universe().size(),
            sets: m.family.to_indices(),
            seed: m.seed,
        },
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model files always serialize");
    s.push('\n');
    s
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, ModelError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text)
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    fs::write(path, to_json(model)).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}
