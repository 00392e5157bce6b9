use std::collections::HashMap;
use std::io::Read;

use sha2::{Digest, Sha256};

use super::{quantize, ScoreVector, Scorer, ScorerError};
use crate::{Error, Result};

pub const LEXICON_SCORER_ID: &str = "lexicon-noisy-or-v1";

const BUNDLED: &str = include_str!("../../data/lexicon.csv");

/// Token → per-dimension weights, scored by noisy-or.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    weights: HashMap<String, [f64; 6]>,
    digest: String,
}

impl Lexicon {
    pub fn bundled() -> Self {
        Self::from_csv(BUNDLED.as_bytes()).expect("bundled lexicon is valid")
    }

    /// Reads `token,toxicity,severe_toxicity,identity_attack,inflammatory,insult,threat`
    /// rows; `#` lines are comments.
    pub fn from_csv<R: Read>(mut reader: R) -> Result<Self> {
        let mut raw = Vec::new();
        reader.read_to_end(&mut raw).map_err(|e| Error::io("<lexicon>", e))?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(raw.as_slice());
        let mut weights = HashMap::new();
        for row in rdr.records() {
            let row = row?;
            if row.len() != 7 {
                return Err(Error::invalid(format!("lexicon row needs 7 columns: {row:?}")));
            }
            let mut w = [0.0; 6];
            for (i, slot) in w.iter_mut().enumerate() {
                let v: f64 = row[i + 1]
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad lexicon weight {:?}", &row[i + 1])))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!("lexicon weight {v} outside [0,1]")));
                }
                *slot = v;
            }
            weights.insert(row[0].to_lowercase(), w);
        }
        let digest = hex8(&Sha256::digest(&raw));
        Ok(Lexicon { weights, digest })
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (String, [f64; 6])>) -> Self {
        let weights: HashMap<_, _> = entries.into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect();
        let mut keys: Vec<_> = weights.iter().collect();
        keys.sort_by(|a, b| a.0.cmp(b.0));
        let digest = hex8(&Sha256::digest(format!("{keys:?}").as_bytes()));
        Lexicon { weights, digest }
    }

    pub fn get(&self, token: &str) -> Option<&[f64; 6]> {
        self.weights.get(token)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.weights.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn hex8(bytes: &[u8]) -> String {
    bytes[..4].iter().map(|b| format!("{b:02x}")).collect()
}

/// Words are maximal runs of alphanumerics, `_` and `'`, compared lowercase.
fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\''))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// `1 - Π(1 - w)` per dimension over every matched token occurrence.
pub fn score_text_lexicon(text: &str, lexicon: &Lexicon) -> ScoreVector {
    let mut keep = [1.0f64; 6];
    for word in words(text) {
        if let Some(w) = lexicon.get(&word) {
            for (k, wi) in keep.iter_mut().zip(w) {
                *k *= 1.0 - wi;
            }
        }
    }
    ScoreVector::clamped(keep.map(|k| quantize(1.0 - k))).0
}

impl Scorer for Lexicon {
    fn id(&self) -> String {
        format!("{LEXICON_SCORER_ID}:{}", self.digest)
    }

    fn score(&self, text: &str) -> Result<[f64; 6], ScorerError> {
        Ok(*score_text_lexicon(text, self).values())
    }
}
