use std::collections::HashMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{check_prefix, validate_row, ScoringModel};
use crate::error::{Error, Result};
use crate::vocab::{TokenId, Vocab};

/// Hand-written model: one distribution per exact prefix, `default` otherwise.
#[derive(Clone, Debug)]
pub struct TableModel {
    vocab: Vocab,
    default_dist: Vec<f64>,
    context_dists: HashMap<Vec<TokenId>, Vec<f64>>,
    default_logs: Vec<f64>,
    context_logs: HashMap<Vec<TokenId>, Vec<f64>>,
}

/// On-disk form of a [`TableModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub vocab: Vec<String>,
    pub eos: String,
    pub default: Vec<f64>,
    #[serde(default)]
    pub contexts: Contexts,
}

/// Context rows in file order; duplicate keys are kept so validation can
/// reject them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Contexts(pub Vec<(String, Vec<f64>)>);

impl Serialize for Contexts {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Contexts {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ContextsVisitor;

        impl<'de> Visitor<'de> for ContextsVisitor {
            type Value = Contexts;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from prefix to probability list")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Contexts, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, Vec<f64>>()? {
                    entries.push((k, v));
                }
                Ok(Contexts(entries))
            }
        }

        deserializer.deserialize_map(ContextsVisitor)
    }
}

impl TableModel {
    pub fn new(
        vocab: Vocab,
        default_dist: Vec<f64>,
        contexts: impl IntoIterator<Item = (Vec<TokenId>, Vec<f64>)>,
    ) -> Result<Self> {
        let v = vocab.len();
        validate_row(&default_dist, v, "default")?;
        let mut context_dists = HashMap::new();
        for (key, row) in contexts {
            let name = vocab.decode(&key).join(" ");
            for &t in &key {
                vocab.check(t)?;
            }
            if key.contains(&vocab.eos()) {
                return Err(Error::Validation(format!("context {name:?}: contains eos")));
            }
            validate_row(&row, v, &format!("context {name:?}"))?;
            if context_dists.insert(key, row).is_some() {
                return Err(Error::Validation(format!("duplicate context {name:?}")));
            }
        }
        let logs = |row: &Vec<f64>| row.iter().map(|p| p.ln()).collect::<Vec<_>>();
        let default_logs = logs(&default_dist);
        let context_logs = context_dists
            .iter()
            .map(|(k, row)| (k.clone(), logs(row)))
            .collect();
        Ok(Self {
            vocab,
            default_dist,
            context_dists,
            default_logs,
            context_logs,
        })
    }

    /// Same distribution after every prefix.
    pub fn stationary(vocab: Vocab, dist: Vec<f64>) -> Result<Self> {
        Self::new(vocab, dist, [])
    }

    pub fn default_dist(&self) -> &[f64] {
        &self.default_dist
    }

    pub fn context_count(&self) -> usize {
        self.context_dists.len()
    }

    pub fn context_dist(&self, prefix: &[TokenId]) -> Option<&[f64]> {
        self.context_dists.get(prefix).map(Vec::as_slice)
    }

    pub fn from_file(file: &TableFile) -> Result<Self> {
        let vocab = Vocab::new(file.vocab.iter().cloned(), &file.eos)
            .map_err(|e| Error::Validation(e.to_string()))?;
        let mut keys = Vec::with_capacity(file.contexts.0.len());
        for (key, row) in &file.contexts.0 {
            let ids = vocab
                .encode(key)
                .map_err(|e| Error::Validation(format!("context {key:?}: {e}")))?;
            keys.push((ids, row.clone()));
        }
        Self::new(vocab, file.default.clone(), keys)
    }

    /// Contexts sorted by token ids, for byte-stable output.
    pub fn to_file(&self) -> TableFile {
        let mut ctx: Vec<_> = self.context_dists.iter().collect();
        ctx.sort_by(|a, b| a.0.cmp(b.0));
        TableFile {
            vocab: self.vocab.symbols().to_vec(),
            eos: self
                .vocab
                .symbol(self.vocab.eos())
                .unwrap_or_default()
                .to_string(),
            default: self.default_dist.clone(),
            contexts: Contexts(
                ctx.into_iter()
                    .map(|(k, row)| (self.vocab.decode(k).join(" "), row.clone()))
                    .collect(),
            ),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("table model serializes")
    }
}

pub fn load_table_model(text: &str) -> Result<TableModel> {
    let file: TableFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        pos: e.column(),
        msg: format!("line {}: {e}", e.line()),
    })?;
    TableModel::from_file(&file)
}

impl ScoringModel for TableModel {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn next_logprobs(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>> {
        check_prefix(&self.vocab, source, prefix)?;
        Ok(self
            .context_logs
            .get(prefix)
            .unwrap_or(&self.default_logs)
            .clone())
    }

    fn uses_source(&self) -> bool {
        false
    }
}
