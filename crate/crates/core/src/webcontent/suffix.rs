use std::collections::HashSet;
use std::io::BufRead;
use std::net::IpAddr;

use url::{Host, Url};

use crate::{Error, Result};

const BUNDLED: &str = include_str!("../../data/public_suffix.dat");

/// Public-suffix rules in the Public Suffix List file format: one rule per
/// line, `//` comments, `*.` wildcards and `!` exceptions.
#[derive(Debug, Clone, Default)]
pub struct SuffixRuleSet {
    exact: HashSet<String>,
    /// Stored without the leading `*.`.
    wildcard: HashSet<String>,
    /// Stored without the leading `!`.
    exception: HashSet<String>,
}

impl SuffixRuleSet {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED.as_bytes()).expect("bundled suffix rules are valid")
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut rules = SuffixRuleSet::default();
        for line in reader.lines() {
            let line = line.map_err(|e| Error::io("<suffix rules>", e))?;
            let Some(rule) = line.split_whitespace().next() else {
                continue;
            };
            if rule.starts_with("//") {
                continue;
            }
            rules.add(rule)?;
        }
        Ok(rules)
    }

    pub fn add(&mut self, rule: &str) -> Result<()> {
        let rule = rule.trim().trim_end_matches('.').to_lowercase();
        if rule.is_empty() || rule.contains('/') || rule.contains(':') {
            return Err(Error::invalid(format!("bad suffix rule {rule:?}")));
        }
        if let Some(r) = rule.strip_prefix('!') {
            self.exception.insert(r.to_string());
        } else if let Some(r) = rule.strip_prefix("*.") {
            self.wildcard.insert(r.to_string());
        } else {
            self.exact.insert(rule);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.exact.len() + self.wildcard.len() + self.exception.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of trailing labels of `labels` forming the public suffix.
    /// Unlisted TLDs fall under the implicit `*` rule (one label).
    fn suffix_len(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        for i in 0..n {
            if self.exception.contains(&labels[i..].join(".")) {
                return n - i - 1;
            }
        }
        for i in 0..n {
            let candidate = labels[i..].join(".");
            if self.exact.contains(&candidate) {
                return n - i;
            }
            if i + 1 < n && self.wildcard.contains(&labels[i + 1..].join(".")) {
                return n - i;
            }
        }
        1
    }

    /// Public suffix plus one label, for an already-lowercased host name.
    pub fn registrable_domain(&self, host: &str) -> Option<String> {
        let host = host.trim_end_matches('.');
        let labels: Vec<&str> = host.split('.').collect();
        if labels.iter().any(|l| l.is_empty()) {
            return None;
        }
        let suffix = self.suffix_len(&labels);
        if suffix >= labels.len() {
            return None;
        }
        Some(labels[labels.len() - suffix - 1..].join("."))
    }
}

fn host_of(input: &str) -> Option<String> {
    let input = input.trim();
    if input.is_empty() {
        return None;
    }
    let url = if input.contains("://") {
        Url::parse(input).ok()?
    } else {
        Url::parse(&format!("http://{input}")).ok()?
    };
    match url.host()? {
        Host::Domain(d) => {
            if d.parse::<IpAddr>().is_ok() {
                None
            } else {
                Some(d.to_lowercase())
            }
        }
        Host::Ipv4(_) | Host::Ipv6(_) => None,
    }
}

/// Registrable domain (SLD) of a URL or bare host name. IP literals, hosts
/// that are themselves public suffixes and unparsable input give `None`.
pub fn extract_sld(url_or_host: &str, rules: &SuffixRuleSet) -> Option<String> {
    rules.registrable_domain(&host_of(url_or_host)?)
}
