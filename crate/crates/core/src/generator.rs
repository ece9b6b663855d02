//! Deterministic synthetic journal-entry generator with injected global
//! and local anomalies.
//!
//! Regular entries are drawn from per-attribute skewed categorical
//! profiles; dependency rules make chosen attribute pairs co-occur the
//! way document types pair with particular ledger accounts in real
//! postings. Global anomalies carry values absent from the regular
//! population; local anomalies reuse frequent values in combinations the
//! regular population never produced. Both witness properties are checked
//! by exhaustive scans before the rows are emitted.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{JournalEntry, Label};
use crate::error::{Error, Result};

/// One categorical attribute: `cardinality` values named
/// `<name>_00 .. <name>_NN`, sampled with geometrically decaying
/// frequency (`skew` is the decay ratio).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub cardinality: usize,
    pub skew: f64,
}

/// Conditional distribution over a target attribute for one source value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalDist {
    pub source_value: String,
    /// (target value, positive weight); weights are normalized.
    pub weights: Vec<(String, f64)>,
}

/// Couples a target attribute to a source attribute: whenever the source
/// takes `source_value`, the target is drawn from that conditional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyRule {
    pub source: String,
    pub target: String,
    pub conditionals: Vec<ConditionalDist>,
}

/// Full recipe for one synthetic benchmark dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_regular: usize,
    pub n_global: usize,
    pub n_local: usize,
    pub attributes: Vec<AttributeSpec>,
    pub dependencies: Vec<DependencyRule>,
}

/// Canonical token of value `i` of attribute `attr`.
pub fn value_token(attr: &str, i: usize) -> String {
    format!("{attr}_{i:02}")
}

fn novel_token(attr: &str, i: usize) -> String {
    format!("{attr}_novel_{i:02}")
}

/// Geometric weights `ratio^i`, normalized to sum to 1.
pub fn geometric_weights(n: usize, ratio: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|i| ratio.powi(i as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

impl GeneratorConfig {
    /// The bundled desk-scale benchmark: six ERP-style attributes with
    /// cardinalities (8, 5, 20, 12, 6, 30), three dependency rules, 10000
    /// regular entries, and 15 + 15 injected anomalies.
    pub fn desk_default() -> GeneratorConfig {
        let attributes = vec![
            AttributeSpec { name: "doc_type".into(), cardinality: 8, skew: 0.6 },
            AttributeSpec { name: "posting_key".into(), cardinality: 5, skew: 0.6 },
            AttributeSpec { name: "gl_account".into(), cardinality: 20, skew: 0.6 },
            AttributeSpec { name: "cost_center".into(), cardinality: 12, skew: 0.6 },
            AttributeSpec { name: "currency".into(), cardinality: 6, skew: 0.8 },
            AttributeSpec { name: "vendor".into(), cardinality: 30, skew: 0.6 },
        ];
        let fan_rule = |source: &str, s_card: usize, target: &str, t_card: usize, fanout: usize, ratio: f64| {
            let weights = geometric_weights(fanout, ratio);
            let conditionals = (0..s_card)
                .map(|s| ConditionalDist {
                    source_value: value_token(source, s),
                    weights: (0..fanout)
                        .map(|m| (value_token(target, (s * fanout + m) % t_card), weights[m]))
                        .collect(),
                })
                .collect();
            DependencyRule {
                source: source.into(),
                target: target.into(),
                conditionals,
            }
        };
        GeneratorConfig {
            seed: 42,
            n_regular: 10000,
            n_global: 15,
            n_local: 15,
            dependencies: vec![
                fan_rule("doc_type", 8, "gl_account", 20, 3, 0.5),
                fan_rule("posting_key", 5, "cost_center", 12, 3, 0.5),
                fan_rule("currency", 6, "vendor", 30, 6, 0.6),
            ],
            attributes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.resolve().map(|_| ())
    }

    fn resolve(&self) -> Result<Resolved> {
        if self.attributes.is_empty() {
            return Err(Error::Config("at least one attribute is required".into()));
        }
        if self.n_regular == 0 {
            return Err(Error::Config("n_regular must be positive".into()));
        }
        let mut attr_index = HashMap::new();
        for (j, attr) in self.attributes.iter().enumerate() {
            if attr.name.is_empty() {
                return Err(Error::Config("attribute names must be non-empty".into()));
            }
            if attr_index.insert(attr.name.clone(), j).is_some() {
                return Err(Error::Config(format!("duplicate attribute '{}'", attr.name)));
            }
            if attr.cardinality < 2 {
                return Err(Error::Config(format!(
                    "attribute '{}' needs cardinality >= 2",
                    attr.name
                )));
            }
            if !(attr.skew > 0.0 && attr.skew < 1.0) {
                return Err(Error::Config(format!(
                    "attribute '{}' skew must lie in (0, 1)",
                    attr.name
                )));
            }
            if self.n_regular < attr.cardinality {
                return Err(Error::Config(format!(
                    "n_regular = {} cannot host all {} values of '{}'",
                    self.n_regular, attr.cardinality, attr.name
                )));
            }
        }
        let injected = self.n_global + self.n_local;
        if injected * 100 > self.n_regular {
            return Err(Error::Config(format!(
                "injected anomalies ({injected}) exceed 1% of n_regular ({})",
                self.n_regular
            )));
        }

        let mut rules = Vec::new();
        let mut targets = HashSet::new();
        let mut sources = HashSet::new();
        for rule in &self.dependencies {
            let &src = attr_index.get(&rule.source).ok_or_else(|| {
                Error::Config(format!("dependency source '{}' is not an attribute", rule.source))
            })?;
            let &tgt = attr_index.get(&rule.target).ok_or_else(|| {
                Error::Config(format!("dependency target '{}' is not an attribute", rule.target))
            })?;
            if src == tgt {
                return Err(Error::Config(format!(
                    "dependency on '{}' cannot target itself",
                    rule.source
                )));
            }
            if !targets.insert(tgt) {
                return Err(Error::Config(format!(
                    "attribute '{}' is the target of more than one rule",
                    rule.target
                )));
            }
            sources.insert(src);
            let s_card = self.attributes[src].cardinality;
            let t_card = self.attributes[tgt].cardinality;
            let token_index = |attr: &str, card: usize, token: &str| -> Result<usize> {
                (0..card)
                    .find(|&i| value_token(attr, i) == token)
                    .ok_or_else(|| {
                        Error::Config(format!("'{token}' is not a value of attribute '{attr}'"))
                    })
            };
            let mut per_source: Vec<Option<(Vec<usize>, Vec<f64>)>> = vec![None; s_card];
            for cond in &rule.conditionals {
                let s = token_index(&rule.source, s_card, &cond.source_value)?;
                if per_source[s].is_some() {
                    return Err(Error::Config(format!(
                        "duplicate conditional for source value '{}'",
                        cond.source_value
                    )));
                }
                if cond.weights.is_empty() {
                    return Err(Error::Config(format!(
                        "conditional for '{}' has no target weights",
                        cond.source_value
                    )));
                }
                let mut values = Vec::new();
                let mut weights = Vec::new();
                for (token, w) in &cond.weights {
                    values.push(token_index(&rule.target, t_card, token)?);
                    if !(w.is_finite() && *w > 0.0) {
                        return Err(Error::Config(format!(
                            "conditional weight for '{token}' must be positive and finite"
                        )));
                    }
                    weights.push(*w);
                }
                per_source[s] = Some((values, to_cdf(&weights)));
            }
            rules.push(ResolvedRule {
                source: src,
                target: tgt,
                per_source,
            });
        }
        // A rule source drawn from another rule's conditional would make
        // sampling order-dependent; forbid chaining.
        if sources.intersection(&targets).next().is_some() {
            return Err(Error::Config(
                "dependency rules must not chain: a rule source cannot be another rule's target"
                    .into(),
            ));
        }

        let marginals = self
            .attributes
            .iter()
            .map(|a| to_cdf(&geometric_weights(a.cardinality, a.skew)))
            .collect();
        Ok(Resolved {
            marginal_cdfs: marginals,
            rules,
            is_target: (0..self.attributes.len()).map(|j| targets.contains(&j)).collect(),
        })
    }
}

struct ResolvedRule {
    source: usize,
    target: usize,
    /// Per source value index: (target value indices, cdf).
    per_source: Vec<Option<(Vec<usize>, Vec<f64>)>>,
}

struct Resolved {
    marginal_cdfs: Vec<Vec<f64>>,
    rules: Vec<ResolvedRule>,
    is_target: Vec<bool>,
}

fn to_cdf(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect()
}

fn sample_cdf<R: Rng>(rng: &mut R, cdf: &[f64]) -> usize {
    let u: f64 = rng.gen();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Draws one row of value indices following marginals and rules.
fn sample_row<R: Rng>(rng: &mut R, config: &GeneratorConfig, resolved: &Resolved) -> Vec<usize> {
    let k = config.attributes.len();
    let mut values = vec![usize::MAX; k];
    for (j, slot) in values.iter_mut().enumerate() {
        if !resolved.is_target[j] {
            *slot = sample_cdf(rng, &resolved.marginal_cdfs[j]);
        }
    }
    for rule in &resolved.rules {
        let s = values[rule.source];
        values[rule.target] = match &rule.per_source[s] {
            Some((targets, cdf)) => targets[sample_cdf(rng, cdf)],
            // Source values without a conditional fall back to the
            // target's own profile.
            None => sample_cdf(rng, &resolved.marginal_cdfs[rule.target]),
        };
    }
    values
}

fn row_to_entry(config: &GeneratorConfig, values: &[usize], id: usize, label: Label) -> JournalEntry {
    JournalEntry::new(
        id.to_string(),
        values
            .iter()
            .zip(&config.attributes)
            .map(|(&v, a)| value_token(&a.name, v))
            .collect(),
        label,
    )
}

/// Generates the regular population: `n_regular` entries, deterministic
/// for the config seed, with every configured value present at least once.
pub fn generate_regular(config: &GeneratorConfig) -> Result<Vec<JournalEntry>> {
    let resolved = config.resolve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_regular;
    let k = config.attributes.len();
    let mut rows: Vec<Vec<usize>> = (0..n)
        .map(|_| sample_row(&mut rng, config, &resolved))
        .collect();

    // Resample guard: force never-sampled values onto entries whose
    // current value is not the last of its kind.
    for j in 0..k {
        let card = config.attributes[j].cardinality;
        let mut counts = vec![0usize; card];
        for row in &rows {
            counts[row[j]] += 1;
        }
        for v in 0..card {
            if counts[v] > 0 {
                continue;
            }
            let start = rng.gen_range(0..n);
            let victim = (0..n)
                .map(|step| (start + step) % n)
                .find(|&i| counts[rows[i][j]] >= 2)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "cannot place value {v} of attribute '{}' without erasing another",
                        config.attributes[j].name
                    ))
                })?;
            counts[rows[victim][j]] -= 1;
            counts[v] += 1;
            rows[victim][j] = v;
        }
    }

    Ok(rows
        .iter()
        .enumerate()
        .map(|(i, row)| row_to_entry(config, row, i + 1, Label::Regular))
        .collect())
}

/// Appends `n_global` global anomalies: regular-looking rows where one or
/// two attributes carry brand-new values outside every regular block.
pub fn inject_global_anomalies(
    entries: &mut Vec<JournalEntry>,
    config: &GeneratorConfig,
) -> Result<()> {
    if config.n_global == 0 {
        return Ok(());
    }
    let resolved = config.resolve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let k = config.attributes.len();
    for i in 0..config.n_global {
        let values = sample_row(&mut rng, config, &resolved);
        let mut entry = row_to_entry(config, &values, entries.len() + 1, Label::GlobalAnomaly);
        let first = rng.gen_range(0..k);
        let mut picked = vec![first];
        if k >= 2 {
            let mut second = rng.gen_range(0..k - 1);
            if second >= first {
                second += 1;
            }
            picked.push(second);
        }
        for j in picked {
            entry.attributes[j] = novel_token(&config.attributes[j].name, i);
        }
        entries.push(entry);
    }
    Ok(())
}

/// Appends `n_local` local anomalies: rows built entirely from values the
/// regular population uses, but pairing rule-bound attributes in
/// combinations with zero regular co-occurrence. Each candidate pair is
/// verified by an exhaustive scan of the regular entries before emission.
pub fn inject_local_anomalies(
    entries: &mut Vec<JournalEntry>,
    config: &GeneratorConfig,
) -> Result<()> {
    if config.n_local == 0 {
        return Ok(());
    }
    let resolved = config.resolve()?;
    if resolved.rules.is_empty() {
        return Err(Error::Config(
            "local anomalies need at least one dependency rule binding two attributes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(2);

    let regulars: Vec<&JournalEntry> = entries
        .iter()
        .filter(|e| e.label == Label::Regular)
        .collect();
    let attr_names: Vec<&str> = config.attributes.iter().map(|a| a.name.as_str()).collect();
    let token_idx = |j: usize, token: &str| -> Option<usize> {
        (0..config.attributes[j].cardinality).find(|&v| value_token(attr_names[j], v) == token)
    };

    // Per-attribute regular value counts and per-rule co-occurrence sets.
    let mut counts: Vec<Vec<usize>> = config
        .attributes
        .iter()
        .map(|a| vec![0usize; a.cardinality])
        .collect();
    for entry in &regulars {
        for (j, value) in entry.attributes.iter().enumerate() {
            if let Some(v) = token_idx(j, value) {
                counts[j][v] += 1;
            }
        }
    }
    let cooc: Vec<HashSet<(usize, usize)>> = resolved
        .rules
        .iter()
        .map(|rule| {
            regulars
                .iter()
                .filter_map(|e| {
                    Some((
                        token_idx(rule.source, &e.attributes[rule.source])?,
                        token_idx(rule.target, &e.attributes[rule.target])?,
                    ))
                })
                .collect()
        })
        .collect();

    // Unseen (source, target) pairs per rule, most frequent values first
    // so the anomaly's individual values stay unremarkable.
    let candidates: Vec<Vec<(usize, usize)>> = resolved
        .rules
        .iter()
        .zip(&cooc)
        .map(|(rule, seen)| {
            let mut pairs: Vec<(usize, usize)> = (0..config.attributes[rule.source].cardinality)
                .flat_map(|s| {
                    (0..config.attributes[rule.target].cardinality).map(move |t| (s, t))
                })
                .filter(|p| !seen.contains(p))
                .collect();
            pairs.sort_by(|a, b| {
                let fa = counts[rule.source][a.0] * counts[rule.target][a.1];
                let fb = counts[rule.source][b.0] * counts[rule.target][b.1];
                fb.cmp(&fa).then(a.cmp(b))
            });
            pairs
        })
        .collect();
    if candidates.iter().all(|c| c.is_empty()) {
        return Err(Error::Config(
            "no zero-frequency attribute combination is constructible; lower the conditional \
             support so some value pairs stay unseen"
                .into(),
        ));
    }

    let n_rules = resolved.rules.len();
    let mut injected: Vec<JournalEntry> = Vec::with_capacity(config.n_local);
    for i in 0..config.n_local {
        // Violate up to two non-overlapping rules per injected entry.
        let mut chosen: Vec<usize> = Vec::new();
        let mut used_attrs: HashSet<usize> = HashSet::new();
        for offset in 0..n_rules {
            let r = (i + offset) % n_rules;
            let rule = &resolved.rules[r];
            if candidates[r].is_empty()
                || used_attrs.contains(&rule.source)
                || used_attrs.contains(&rule.target)
            {
                continue;
            }
            chosen.push(r);
            used_attrs.insert(rule.source);
            used_attrs.insert(rule.target);
            if chosen.len() == 2 {
                break;
            }
        }

        let mut values = sample_row(&mut rng, config, &resolved);
        let mut witness_pairs = Vec::new();
        for &r in &chosen {
            let pool = &candidates[r];
            let pick = pool[rng.gen_range(0..pool.len().min(8))];
            let rule = &resolved.rules[r];
            values[rule.source] = pick.0;
            values[rule.target] = pick.1;
            witness_pairs.push((r, pick));
        }

        // Witness verification against the regular population.
        for &(r, (s, t)) in &witness_pairs {
            let rule = &resolved.rules[r];
            let s_tok = value_token(attr_names[rule.source], s);
            let t_tok = value_token(attr_names[rule.target], t);
            let joint = regulars
                .iter()
                .filter(|e| e.attributes[rule.source] == s_tok && e.attributes[rule.target] == t_tok)
                .count();
            if joint != 0 {
                return Err(Error::Numerical(format!(
                    "local anomaly witness violated: ({s_tok}, {t_tok}) occurs {joint} times"
                )));
            }
        }
        for (j, &v) in values.iter().enumerate() {
            if counts[j][v] == 0 {
                return Err(Error::Numerical(format!(
                    "local anomaly uses '{}', which never occurs in the regular population",
                    value_token(attr_names[j], v)
                )));
            }
        }

        injected.push(row_to_entry(
            config,
            &values,
            entries.len() + injected.len() + 1,
            Label::LocalAnomaly,
        ));
    }
    entries.extend(injected);
    Ok(())
}

/// Full benchmark: regular population plus injected global and local
/// anomalies, in that order.
pub fn generate_population(config: &GeneratorConfig) -> Result<Vec<JournalEntry>> {
    let mut entries = generate_regular(config)?;
    inject_global_anomalies(&mut entries, config)?;
    inject_local_anomalies(&mut entries, config)?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::build_vocabulary;

    fn two_attr_config(n_regular: usize) -> GeneratorConfig {
        GeneratorConfig {
            seed: 7,
            n_regular,
            n_global: 0,
            n_local: 0,
            attributes: vec![
                AttributeSpec { name: "doc_type".into(), cardinality: 3, skew: 0.6 },
                AttributeSpec { name: "account".into(), cardinality: 4, skew: 0.6 },
            ],
            dependencies: vec![DependencyRule {
                source: "doc_type".into(),
                target: "account".into(),
                conditionals: vec![
                    ConditionalDist {
                        source_value: "doc_type_00".into(),
                        weights: vec![("account_00".into(), 0.9), ("account_01".into(), 0.1)],
                    },
                    ConditionalDist {
                        source_value: "doc_type_01".into(),
                        weights: vec![("account_01".into(), 0.7), ("account_02".into(), 0.3)],
                    },
                    ConditionalDist {
                        source_value: "doc_type_02".into(),
                        weights: vec![("account_02".into(), 0.6), ("account_03".into(), 0.4)],
                    },
                ],
            }],
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let config = GeneratorConfig {
            n_global: 10,
            n_local: 10,
            n_regular: 4000,
            ..two_attr_config(4000)
        };
        let a = generate_population(&config).unwrap();
        let b = generate_population(&config).unwrap();
        assert_eq!(a, b);
        let c = generate_population(&GeneratorConfig { seed: 8, ..config }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn conditional_frequencies_follow_the_rule() {
        let config = two_attr_config(6000);
        let entries = generate_regular(&config).unwrap();
        let dt0: Vec<_> = entries
            .iter()
            .filter(|e| e.attributes[0] == "doc_type_00")
            .collect();
        assert!(dt0.len() > 1000);
        let acc0 = dt0
            .iter()
            .filter(|e| e.attributes[1] == "account_00")
            .count() as f64;
        let observed = acc0 / dt0.len() as f64;
        assert!(
            (observed - 0.9).abs() <= 0.05,
            "account_00 | doc_type_00 frequency {observed}"
        );
    }

    #[test]
    fn marginals_match_profiles_without_rules() {
        let config = GeneratorConfig {
            dependencies: vec![],
            ..two_attr_config(6000)
        };
        let entries = generate_regular(&config).unwrap();
        let expected = geometric_weights(3, 0.6);
        for v in 0..3 {
            let token = value_token("doc_type", v);
            let observed = entries.iter().filter(|e| e.attributes[0] == token).count() as f64
                / entries.len() as f64;
            assert!(
                (observed - expected[v]).abs() <= 0.05,
                "value {v}: observed {observed}, profile {}",
                expected[v]
            );
        }
    }

    #[test]
    fn every_configured_value_appears() {
        // Extreme skew: the tail would never be sampled without the guard.
        let config = GeneratorConfig {
            seed: 3,
            n_regular: 3000,
            n_global: 0,
            n_local: 0,
            attributes: vec![AttributeSpec {
                name: "attr".into(),
                cardinality: 12,
                skew: 0.2,
            }, AttributeSpec {
                name: "other".into(),
                cardinality: 2,
                skew: 0.5,
            }],
            dependencies: vec![],
        };
        let entries = generate_regular(&config).unwrap();
        for v in 0..12 {
            let token = value_token("attr", v);
            assert!(
                entries.iter().any(|e| e.attributes[0] == token),
                "value {token} missing"
            );
        }
    }

    #[test]
    fn label_partition_is_exact() {
        let config = GeneratorConfig {
            n_global: 12,
            n_local: 9,
            ..two_attr_config(4000)
        };
        let entries = generate_population(&config).unwrap();
        let count = |l: Label| entries.iter().filter(|e| e.label == l).count();
        assert_eq!(count(Label::Regular), 4000);
        assert_eq!(count(Label::GlobalAnomaly), 12);
        assert_eq!(count(Label::LocalAnomaly), 9);
        assert_eq!(entries.len(), 4021);
    }

    #[test]
    fn zero_injection_keeps_population_unchanged() {
        let config = two_attr_config(2000);
        let baseline = generate_regular(&config).unwrap();
        let mut entries = baseline.clone();
        inject_global_anomalies(&mut entries, &config).unwrap();
        inject_local_anomalies(&mut entries, &config).unwrap();
        assert_eq!(entries, baseline);
    }

    #[test]
    fn global_anomalies_carry_values_outside_regular_vocabulary() {
        let config = GeneratorConfig {
            n_global: 15,
            ..two_attr_config(4000)
        };
        let mut entries = generate_regular(&config).unwrap();
        let regular_vocab = build_vocabulary(&entries).unwrap();
        inject_global_anomalies(&mut entries, &config).unwrap();
        for entry in entries.iter().filter(|e| e.label == Label::GlobalAnomaly) {
            let novel = entry
                .attributes
                .iter()
                .filter(|v| !regular_vocab.contains_anywhere(v))
                .count();
            assert!(novel >= 1, "entry {} has no novel value", entry.entry_id);
        }
    }

    #[test]
    fn local_anomalies_satisfy_the_witness_properties() {
        let config = GeneratorConfig {
            n_local: 15,
            ..two_attr_config(4000)
        };
        let entries = generate_population(&config).unwrap();
        let regulars: Vec<_> = entries.iter().filter(|e| e.label == Label::Regular).collect();
        let regular_vocab = build_vocabulary(
            &regulars.iter().map(|e| (*e).clone()).collect::<Vec<_>>(),
        )
        .unwrap();
        for entry in entries.iter().filter(|e| e.label == Label::LocalAnomaly) {
            // Every individual value occurs among regulars.
            for (j, value) in entry.attributes.iter().enumerate() {
                assert!(
                    regular_vocab.column_of(j, value).is_some(),
                    "value {value} not regular"
                );
            }
            // The rule-bound pair never co-occurs among regulars.
            let joint = regulars
                .iter()
                .filter(|e| {
                    e.attributes[0] == entry.attributes[0] && e.attributes[1] == entry.attributes[1]
                })
                .count();
            assert_eq!(
                joint, 0,
                "pair ({}, {}) occurs in regular data",
                entry.attributes[0], entry.attributes[1]
            );
        }
    }

    #[test]
    fn saturated_rule_support_yields_config_error() {
        // Both source values cover both target values, so no unseen pair
        // remains once the population is large.
        let config = GeneratorConfig {
            seed: 1,
            n_regular: 3000,
            n_global: 0,
            n_local: 10,
            attributes: vec![
                AttributeSpec { name: "a".into(), cardinality: 2, skew: 0.5 },
                AttributeSpec { name: "b".into(), cardinality: 2, skew: 0.5 },
            ],
            dependencies: vec![DependencyRule {
                source: "a".into(),
                target: "b".into(),
                conditionals: vec![
                    ConditionalDist {
                        source_value: "a_00".into(),
                        weights: vec![("b_00".into(), 0.5), ("b_01".into(), 0.5)],
                    },
                    ConditionalDist {
                        source_value: "a_01".into(),
                        weights: vec![("b_00".into(), 0.5), ("b_01".into(), 0.5)],
                    },
                ],
            }],
        };
        let mut entries = generate_regular(&config).unwrap();
        let err = inject_local_anomalies(&mut entries, &config).unwrap_err();
        assert!(err.to_string().contains("conditional support"), "{err}");
    }

    #[test]
    fn invalid_rule_sets_are_rejected() {
        let mut bad_token = two_attr_config(1000);
        bad_token.dependencies[0].conditionals[0].source_value = "doc_type_99".into();
        assert!(bad_token.validate().is_err());

        let mut unknown_attr = two_attr_config(1000);
        unknown_attr.dependencies[0].target = "nope".into();
        assert!(unknown_attr.validate().is_err());

        let mut chained = two_attr_config(1000);
        chained.attributes.push(AttributeSpec {
            name: "third".into(),
            cardinality: 2,
            skew: 0.5,
        });
        chained.dependencies.push(DependencyRule {
            source: "account".into(), // target of the first rule
            target: "third".into(),
            conditionals: vec![ConditionalDist {
                source_value: "account_00".into(),
                weights: vec![("third_00".into(), 1.0)],
            }],
        });
        assert!(chained.validate().is_err());

        let mut too_many = two_attr_config(1000);
        too_many.n_global = 50;
        assert!(too_many.validate().is_err());
    }

    #[test]
    fn desk_default_shape() {
        let config = GeneratorConfig::desk_default();
        config.validate().unwrap();
        let d: usize = config.attributes.iter().map(|a| a.cardinality).sum();
        assert_eq!(d, 81);
        assert_eq!(config.n_regular, 10000);
        assert_eq!(config.n_global, 15);
        assert_eq!(config.n_local, 15);
    }
}
