use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EOS: &str = "</s>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenId(pub u32);

impl TokenId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for TokenId {
    fn from(i: usize) -> Self {
        TokenId(u32::try_from(i).expect("token index fits in u32"))
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Ordered symbol table with a designated end-of-sequence symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocab {
    symbols: Vec<String>,
    index: HashMap<String, TokenId>,
    eos: TokenId,
}

impl Vocab {
    pub fn new<I, T>(symbols: I, eos: &str) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), TokenId::from(i)).is_some() {
                return Err(Error::Vocab(format!("duplicate symbol {s:?}")));
            }
        }
        let eos = *index
            .get(eos)
            .ok_or_else(|| Error::Vocab(format!("eos symbol {eos:?} not in vocabulary")))?;
        Ok(Self {
            symbols,
            index,
            eos,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn eos(&self) -> TokenId {
        self.eos
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, id: TokenId) -> Option<&str> {
        self.symbols.get(id.index()).map(String::as_str)
    }

    pub fn id(&self, symbol: &str) -> Option<TokenId> {
        self.index.get(symbol).copied()
    }

    pub fn contains(&self, id: TokenId) -> bool {
        id.index() < self.symbols.len()
    }

    pub fn check(&self, id: TokenId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownToken {
                id: id.0,
                size: self.len(),
            })
        }
    }

    /// Whitespace-tokenizes `line` into ids.
    pub fn encode(&self, line: &str) -> Result<Vec<TokenId>> {
        line.split_whitespace()
            .map(|w| {
                self.id(w)
                    .ok_or_else(|| Error::UnknownSymbol(w.to_string()))
            })
            .collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> Vec<String> {
        ids.iter()
            .map(|&id| self.symbol(id).unwrap_or("<unk>").to_string())
            .collect()
    }
}
