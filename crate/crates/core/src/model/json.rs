use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer};

use super::{Level, Scm};
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(untagged)]
enum ProbRepr {
    Number(f64),
    Text(String),
}

pub(super) fn deserialize_pmf<'de, D>(de: D) -> std::result::Result<BTreeMap<Level, f64>, D::Error>
where
    D: Deserializer<'de>,
{
    let raw = BTreeMap::<Level, ProbRepr>::deserialize(de)?;
    raw.into_iter()
        .map(|(k, v)| match v {
            ProbRepr::Number(p) => Ok((k, p)),
            ProbRepr::Text(s) => s
                .trim()
                .parse::<f64>()
                .map(|p| (k, p))
                .map_err(|_| serde::de::Error::custom(format!("probability {s:?} is not a decimal number"))),
        })
        .collect()
}

impl Scm {
    pub fn from_json(text: &str) -> Result<Scm> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty-printed JSON; probabilities are written as shortest round-trip doubles.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scm> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Scm::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}
