//! Shared web content: registrable domains, domain categories, and
//! URL/domain/hashtag diversity per profile group.

mod suffix;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use serde::Serialize;

use crate::corpus::Corpus;
use crate::Result;

pub use suffix::{extract_sld, SuffixRuleSet};

pub const UNRATED: &str = "None";

/// Lowercases scheme and host and drops one trailing `/`; path and query are
/// kept verbatim.
pub fn normalize_url(url: &str) -> String {
    let url = url.trim();
    let (head, rest) = match url.find("://") {
        Some(i) => {
            let after = &url[i + 3..];
            let end = after.find(['/', '?', '#']).map_or(after.len(), |j| j);
            url.split_at(i + 3 + end)
        }
        None => (url, ""),
    };
    let mut out = head.to_lowercase();
    out.push_str(rest);
    if out.ends_with('/') {
        out.pop();
    }
    out
}

/// Domain → category, replacing an online classification service.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryMap(HashMap<String, String>);

impl CategoryMap {
    /// Two-column CSV with header `domain,category`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut map = HashMap::new();
        for row in rdr.records() {
            let row = row?;
            if row.len() < 2 {
                continue;
            }
            map.insert(row[0].to_lowercase(), row[1].to_string());
        }
        Ok(CategoryMap(map))
    }

    pub fn insert(&mut self, domain: &str, category: &str) {
        self.0.insert(domain.to_lowercase(), category.to_string());
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Exact, case-insensitive lookup; unmapped domains are `"None"`.
pub fn categorize_domain<'m>(domain: &str, map: &'m CategoryMap) -> &'m str {
    map.0.get(&domain.to_lowercase()).map_or(UNRATED, String::as_str)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProfileDiversity {
    pub n_urls: usize,
    pub unique_urls: usize,
    pub unique_domains: usize,
    pub total_hashtags: usize,
    pub unique_hashtags: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiversityStats {
    pub n_profiles: usize,
    pub n_urls: usize,
    pub n_unique_urls: usize,
    /// Averaged over profiles that shared at least one URL.
    pub avg_unique_urls_per_sharing_profile: f64,
    /// URLs with an extractable domain.
    pub n_domains: usize,
    pub n_unique_domains: usize,
    pub avg_domains_per_sharing_profile: f64,
    pub n_domain_categories: usize,
    /// Share of domain references with a category other than `"None"`.
    pub category_coverage: f64,
    pub n_hashtags: usize,
    pub n_unique_hashtags: usize,
    pub avg_unique_hashtags_per_sharing_profile: f64,
    pub per_profile: BTreeMap<String, ProfileDiversity>,
}

fn avg_over_nonzero(values: impl Iterator<Item = usize>) -> f64 {
    let (sum, n) = values.filter(|v| *v > 0).fold((0, 0), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

pub fn diversity_stats(
    group: &BTreeSet<String>,
    corpus: &Corpus,
    rules: &SuffixRuleSet,
    categories: &CategoryMap,
) -> DiversityStats {
    let mut stats = DiversityStats {
        n_profiles: group.len(),
        ..Default::default()
    };
    let mut all_urls = BTreeSet::new();
    let mut all_domains = BTreeSet::new();
    let mut all_categories = BTreeSet::new();
    let mut all_tags = BTreeSet::new();
    let mut rated = 0usize;
    for id in group {
        let records = corpus.profile(id).unwrap_or(&[]);
        let mut urls = BTreeSet::new();
        let mut domains = BTreeSet::new();
        let mut tags = BTreeSet::new();
        let mut p = ProfileDiversity::default();
        for r in records {
            for u in &r.urls {
                p.n_urls += 1;
                urls.insert(normalize_url(u));
                if let Some(d) = extract_sld(u, rules) {
                    stats.n_domains += 1;
                    let cat = categorize_domain(&d, categories);
                    if cat != UNRATED {
                        rated += 1;
                    }
                    all_categories.insert(cat.to_string());
                    domains.insert(d);
                }
            }
            for t in &r.hashtags {
                p.total_hashtags += 1;
                tags.insert(t.clone());
            }
        }
        p.unique_urls = urls.len();
        p.unique_domains = domains.len();
        p.unique_hashtags = tags.len();
        stats.n_urls += p.n_urls;
        stats.n_hashtags += p.total_hashtags;
        all_urls.extend(urls);
        all_domains.extend(domains);
        all_tags.extend(tags);
        stats.per_profile.insert(id.clone(), p);
    }
    stats.n_unique_urls = all_urls.len();
    stats.n_unique_domains = all_domains.len();
    stats.n_domain_categories = all_categories.len();
    stats.n_unique_hashtags = all_tags.len();
    stats.category_coverage = if stats.n_domains == 0 {
        0.0
    } else {
        rated as f64 / stats.n_domains as f64
    };
    let per = || stats.per_profile.values();
    stats.avg_unique_urls_per_sharing_profile = avg_over_nonzero(per().map(|p| p.unique_urls));
    stats.avg_domains_per_sharing_profile = avg_over_nonzero(per().map(|p| p.unique_domains));
    stats.avg_unique_hashtags_per_sharing_profile = avg_over_nonzero(per().map(|p| p.unique_hashtags));
    stats
}

/// Unique registrable domains shared by one profile.
pub fn profile_domains(profile: &str, corpus: &Corpus, rules: &SuffixRuleSet) -> BTreeSet<String> {
    corpus
        .profile(profile)
        .unwrap_or(&[])
        .iter()
        .flat_map(|r| &r.urls)
        .filter_map(|u| extract_sld(u, rules))
        .collect()
}

pub fn profile_hashtags(profile: &str, corpus: &Corpus) -> BTreeSet<String> {
    corpus
        .profile(profile)
        .unwrap_or(&[])
        .iter()
        .flat_map(|r| r.hashtags.iter().cloned())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HashtagRank {
    pub hashtag: String,
    pub occurrences: usize,
    /// Percentage of group profiles using the tag at least once.
    pub profile_percent: f64,
}

fn ranked<K: Ord + Clone>(counts: BTreeMap<K, usize>, n: usize) -> Vec<(K, usize)> {
    let mut v: Vec<_> = counts.into_iter().collect();
    // BTreeMap order gives the lexicographic tie-break under a stable sort.
    v.sort_by_key(|e| std::cmp::Reverse(e.1));
    v.truncate(n);
    v
}

pub fn top_hashtags(group: &BTreeSet<String>, corpus: &Corpus, n: usize) -> Vec<HashtagRank> {
    let mut counts = BTreeMap::<String, usize>::new();
    let mut users = BTreeMap::<String, usize>::new();
    for id in group {
        let mut seen = BTreeSet::new();
        for tag in corpus.profile(id).unwrap_or(&[]).iter().flat_map(|r| &r.hashtags) {
            *counts.entry(tag.clone()).or_default() += 1;
            if seen.insert(tag) {
                *users.entry(tag.clone()).or_default() += 1;
            }
        }
    }
    ranked(counts, n.max(1))
        .into_iter()
        .map(|(tag, occurrences)| HashtagRank {
            profile_percent: users[&tag] as f64 / group.len() as f64 * 100.0,
            hashtag: tag,
            occurrences,
        })
        .collect()
}

/// Category of every URL's domain, counted per reference and ranked.
pub fn category_histogram(
    group: &BTreeSet<String>,
    corpus: &Corpus,
    rules: &SuffixRuleSet,
    categories: &CategoryMap,
    top_k: usize,
) -> Vec<(String, usize)> {
    let mut counts = BTreeMap::<String, usize>::new();
    for id in group {
        for u in corpus.profile(id).unwrap_or(&[]).iter().flat_map(|r| &r.urls) {
            if let Some(d) = extract_sld(u, rules) {
                *counts.entry(categorize_domain(&d, categories).to_string()).or_default() += 1;
            }
        }
    }
    ranked(counts, top_k.max(1))
}
