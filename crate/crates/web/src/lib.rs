//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; the page parses it. The plain Rust
//! functions behind the exports are public too so they can be tested
//! natively.

use std::collections::BTreeSet;

use consistox::consistency::{gini, in_focus_box, median, summarize_profiles, DimensionSummary};
use consistox::corpus::{filter_eligible_profiles, Eligibility};
use consistox::scorer::{score_corpus, Lexicon, ScoreCache, Scorer};
use consistox::synth::synthesize;
use consistox::textstats::readability;
use consistox::Dimension;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Serialize)]
pub struct Point {
    pub id: String,
    pub median: f64,
    pub gini: f64,
    pub planted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub focus: Vec<String>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub missed: usize,
}

/// Median/Gini points of a synthetic corpus, scored with the bundled lexicon.
#[wasm_bindgen]
pub struct Explorer {
    points: Vec<Point>,
}

impl Explorer {
    pub fn build(n_focus: usize, n_random: usize, seed: u64, dimension: &str) -> Result<Explorer, String> {
        let dim: Dimension = dimension.parse().map_err(|e: consistox::Error| e.to_string())?;
        let synth = synthesize(n_focus, n_random, seed);
        let lexicon = Lexicon::bundled();
        let rule = Eligibility::default();
        let mut cache = ScoreCache::new(lexicon.id());
        let (scored, _) = score_corpus(&synth.corpus, &lexicon, &mut cache, |r| rule.admits(r));
        let eligible = filter_eligible_profiles(&synth.corpus, &rule);
        let (summaries, _) = summarize_profiles(&scored, &eligible, 0.4).map_err(|e| e.to_string())?;
        let points = summaries
            .iter()
            .map(|s| {
                let d = s.get(dim);
                Point {
                    id: s.profile_id.clone(),
                    median: d.median,
                    gini: d.gini,
                    planted: synth.planted.contains(&s.profile_id),
                }
            })
            .collect();
        Ok(Explorer { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn select(&self, median_threshold: f64, gini_threshold: f64) -> Selection {
        let mut focus = BTreeSet::new();
        let (mut tp, mut fp, mut missed) = (0, 0, 0);
        for p in &self.points {
            let s = DimensionSummary {
                n_tweets: 0,
                median: p.median,
                gini: p.gini,
                binarized_proportion: 0.0,
            };
            let hit = in_focus_box(&s, median_threshold, gini_threshold);
            match (hit, p.planted) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => missed += 1,
                _ => {}
            }
            if hit {
                focus.insert(p.id.clone());
            }
        }
        Selection {
            focus: focus.into_iter().collect(),
            true_positives: tp,
            false_positives: fp,
            missed,
        }
    }
}

#[wasm_bindgen]
impl Explorer {
    #[wasm_bindgen(constructor)]
    pub fn new(n_focus: usize, n_random: usize, seed: u32, dimension: &str) -> Result<Explorer, JsError> {
        Explorer::build(n_focus, n_random, seed as u64, dimension).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = pointsJson)]
    pub fn points_json(&self) -> String {
        serde_json::to_string(&self.points).expect("points serialize")
    }

    #[wasm_bindgen(js_name = selectJson)]
    pub fn select_json(&self, median_threshold: f64, gini_threshold: f64) -> String {
        serde_json::to_string(&self.select(median_threshold, gini_threshold)).expect("selection serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Concentration {
    pub n: usize,
    pub median: f64,
    pub gini: f64,
    /// Cumulative population share against cumulative value share, from (0, 0).
    pub lorenz: Vec<(f64, f64)>,
}

/// Parses numbers separated by whitespace, commas or semicolons.
pub fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t}")))
        .collect()
}

pub fn concentration(values: &[f64]) -> Result<Concentration, String> {
    let g = gini(values).map_err(|e| e.to_string())?;
    let m = median(values).map_err(|e| e.to_string())?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    let n = sorted.len();
    let mut lorenz = vec![(0.0, 0.0)];
    let mut acc = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        acc += v;
        let share = if total > 0.0 {
            acc / total
        } else {
            (i + 1) as f64 / n as f64
        };
        lorenz.push(((i + 1) as f64 / n as f64, share));
    }
    Ok(Concentration {
        n,
        median: m,
        gini: g,
        lorenz,
    })
}

#[wasm_bindgen(js_name = concentrationJson)]
pub fn concentration_json(text: &str) -> Result<String, JsError> {
    let values = parse_values(text).map_err(|e| JsError::new(&e))?;
    let c = concentration(&values).map_err(|e| JsError::new(&e))?;
    Ok(serde_json::to_string(&c).expect("concentration serializes"))
}

/// Readability of free text, one tweet per non-empty line.
pub fn readability_of(text: &str) -> Result<consistox::textstats::ReadabilityMetrics, String> {
    readability(text.lines().filter(|l| !l.trim().is_empty())).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = readabilityJson)]
pub fn readability_json(text: &str) -> Result<String, JsError> {
    let m = readability_of(text).map_err(|e| JsError::new(&e))?;
    Ok(serde_json::to_string(&m).expect("metrics serialize"))
}
