//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::TokenizedDoc;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdaParams {
    pub k: usize,
    /// Document-topic prior; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaParams {
    pub fn new(k: usize, seed: u64) -> Self {
        LdaParams {
            k,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            seed,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k.max(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicModel {
    pub k: usize,
    pub vocabulary: Vec<String>,
    /// `k` rows, one probability distribution over the vocabulary each.
    pub topic_word: Vec<Vec<f64>>,
    /// One row per document, a distribution over topics.
    pub doc_topic: Vec<Vec<f64>>,
    pub doc_ids: Vec<String>,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
}

/// Sampler state: token-topic assignments plus the three count tables.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    k: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    vocabulary: Vec<String>,
    doc_ids: Vec<String>,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<u32>,
    topic_word: Vec<u32>,
    topic_total: Vec<u32>,
    rng: ChaCha8Rng,
    sweeps: usize,
    weights: Vec<f64>,
}

impl GibbsSampler {
    pub fn new(docs: &[TokenizedDoc], params: &LdaParams) -> Result<Self> {
        if params.k < 1 {
            return Err(Error::invalid("LDA needs at least one topic"));
        }
        if docs.is_empty() {
            return Err(Error::EmptyInput { what: "lda_fit" });
        }
        if let Some(d) = docs.iter().find(|d| d.tokens.is_empty()) {
            return Err(Error::invalid(format!("document {:?} has no tokens", d.profile_id)));
        }
        if !(params.alpha() > 0.0 && params.beta > 0.0) {
            return Err(Error::invalid("LDA priors must be positive"));
        }
        let index: BTreeMap<&str, usize> = docs
            .iter()
            .flat_map(|d| d.tokens.iter().map(String::as_str))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        let vocabulary: Vec<String> = index.keys().map(|w| w.to_string()).collect();
        let k = params.k;
        let v = vocabulary.len();
        let encoded: Vec<Vec<usize>> = docs
            .iter()
            .map(|d| d.tokens.iter().map(|t| index[t.as_str()]).collect())
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut doc_topic = vec![0u32; docs.len() * k];
        let mut topic_word = vec![0u32; k * v];
        let mut topic_total = vec![0u32; k];
        let assignments: Vec<Vec<usize>> = encoded
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let z = rng.gen_range(0..k);
                        doc_topic[d * k + z] += 1;
                        topic_word[z * v + w] += 1;
                        topic_total[z] += 1;
                        z
                    })
                    .collect()
            })
            .collect();
        Ok(GibbsSampler {
            k,
            alpha: params.alpha(),
            beta: params.beta,
            seed: params.seed,
            vocabulary,
            doc_ids: docs.iter().map(|d| d.profile_id.clone()).collect(),
            docs: encoded,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            rng,
            sweeps: 0,
            weights: vec![0.0; k],
        })
    }

    /// Resamples every token's topic once.
    pub fn sweep(&mut self) {
        let (k, v) = (self.k, self.vocabulary.len());
        let v_beta = v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d * k + old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (f64::from(self.doc_topic[d * k + t]) + self.alpha)
                        * (f64::from(self.topic_word[t * v + w]) + self.beta)
                        / (f64::from(self.topic_total[t]) + v_beta);
                    total += p;
                    self.weights[t] = total;
                }
                let u = self.rng.gen::<f64>() * total;
                let new = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.assignments[d][i] = new;
                self.doc_topic[d * k + new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_total[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    pub fn n_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// Sum of the topic totals; equals [`n_tokens`](Self::n_tokens) at all times.
    pub fn assigned_tokens(&self) -> usize {
        self.topic_total.iter().map(|&c| c as usize).sum()
    }

    pub fn model(&self) -> TopicModel {
        let (k, v) = (self.k, self.vocabulary.len());
        let v_beta = v as f64 * self.beta;
        let k_alpha = k as f64 * self.alpha;
        let topic_word = (0..k)
            .map(|t| {
                let denom = f64::from(self.topic_total[t]) + v_beta;
                (0..v)
                    .map(|w| (f64::from(self.topic_word[t * v + w]) + self.beta) / denom)
                    .collect()
            })
            .collect();
        let doc_topic = self
            .docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                let denom = words.len() as f64 + k_alpha;
                (0..k)
                    .map(|t| (f64::from(self.doc_topic[d * k + t]) + self.alpha) / denom)
                    .collect()
            })
            .collect();
        TopicModel {
            k,
            vocabulary: self.vocabulary.clone(),
            topic_word,
            doc_topic,
            doc_ids: self.doc_ids.clone(),
            alpha: self.alpha,
            beta: self.beta,
            seed: self.seed,
            iterations: self.sweeps,
        }
    }
}

pub fn lda_fit(docs: &[TokenizedDoc], params: &LdaParams) -> Result<TopicModel> {
    let mut sampler = GibbsSampler::new(docs, params)?;
    for _ in 0..params.iterations {
        sampler.sweep();
    }
    Ok(sampler.model())
}

/// The `n` heaviest words of a topic, ties broken lexicographically.
pub fn top_words(model: &TopicModel, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
    let row = model
        .topic_word
        .get(topic)
        .ok_or_else(|| Error::invalid(format!("topic {topic} out of range (k = {})", model.k)))?;
    let mut ranked: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
    // vocabulary is sorted, so index order is lexicographic order
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked
        .into_iter()
        .take(n)
        .map(|(i, w)| (model.vocabulary[i].clone(), w))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, words: &[&str]) -> TokenizedDoc {
        TokenizedDoc {
            profile_id: id.into(),
            tokens: words.iter().map(|w| w.to_string()).collect(),
            ..Default::default()
        }
    }

    fn assert_normalized(m: &TopicModel) {
        for row in m.topic_word.iter().chain(&m.doc_topic) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_topic_is_smoothed_frequency() {
        let docs = [doc("a", &["x", "x", "y"]), doc("b", &["z", "x"])];
        let params = LdaParams {
            iterations: 20,
            ..LdaParams::new(1, 3)
        };
        let m = lda_fit(&docs, &params).unwrap();
        assert_normalized(&m);
        let (n, v, beta) = (5.0, 3.0, 0.01);
        let expect = [
            (3.0 + beta) / (n + v * beta),
            (1.0 + beta) / (n + v * beta),
            (1.0 + beta) / (n + v * beta),
        ];
        for (got, want) in m.topic_word[0].iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_two_word_corpus() {
        let docs = [doc("a", &["p", "q", "p", "q"])];
        let m = lda_fit(&docs, &LdaParams::new(1, 0)).unwrap();
        let top = top_words(&m, 0, 5).unwrap();
        assert_eq!(top.len(), 2);
        assert_eq!(top[0].0, "p");
        assert!((top[0].1 - 0.5).abs() < 1e-12 && (top[1].1 - 0.5).abs() < 1e-12);
        assert!(top_words(&m, 1, 5).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let docs = [doc("a", &["a", "b", "c", "a"]), doc("b", &["d", "e", "d", "f"])];
        let params = LdaParams {
            iterations: 50,
            ..LdaParams::new(2, 11)
        };
        assert_eq!(lda_fit(&docs, &params).unwrap(), lda_fit(&docs, &params).unwrap());
    }

    #[test]
    fn conservation_every_sweep() {
        let docs = [doc("a", &["a", "b", "c", "a", "b"]), doc("b", &["d", "e", "d"])];
        let mut s = GibbsSampler::new(&docs, &LdaParams::new(3, 1)).unwrap();
        for _ in 0..25 {
            s.sweep();
            assert_eq!(s.assigned_tokens(), s.n_tokens());
        }
        assert_normalized(&s.model());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lda_fit(&[], &LdaParams::new(2, 0)).is_err());
        assert!(lda_fit(&[doc("a", &["x"])], &LdaParams::new(0, 0)).is_err());
        assert!(lda_fit(&[doc("a", &[])], &LdaParams::new(2, 0)).is_err());
    }

    #[test]
    fn top_words_non_increasing() {
        let docs = [doc("a", &["a", "b", "b", "c", "c", "c"])];
        let m = lda_fit(
            &docs,
            &LdaParams {
                iterations: 10,
                ..LdaParams::new(2, 5)
            },
        )
        .unwrap();
        for t in 0..2 {
            let top = top_words(&m, t, 10).unwrap();
            assert_eq!(top.len(), 3);
            assert!(top.windows(2).all(|w| w[0].1 >= w[1].1));
        }
    }
}
