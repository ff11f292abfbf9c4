//! Fitness sources: a seeded synthetic landscape with a known optimum, a
//! noisy proxy wrapper, and a line-oriented tabular benchmark file.
//!
//! Every oracle value is a pure function of (seed, inputs, call index); there
//! is no hidden state, so whole experiments replay byte-for-byte.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::hash::{hash_bytes, hash_words, rng_from_words, unit_f64};
use crate::space::{
    ArchKey, Architecture, SearchSpaceSpec, SpaceError, enumerate_space,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("architecture does not belong to the oracle's space: {0}")]
    SpecMismatch(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: invalid architecture key `{key}`: {reason}")]
    InvalidKey { line: usize, key: String, reason: String },
    #[error("line {line}: duplicate architecture key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("no entry for architecture `{0}`")]
    MissingEntry(ArchKey),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A ground-truth fitness source over a fixed search space. Implementations
/// are read-only after construction and safe to query concurrently.
pub trait Oracle: Sync {
    fn spec(&self) -> &SearchSpaceSpec;

    fn score(&self, arch: &Architecture) -> Result<f64, OracleError>;
}

impl<O: Oracle + ?Sized> Oracle for &O {
    fn spec(&self) -> &SearchSpaceSpec {
        (**self).spec()
    }

    fn score(&self, arch: &Architecture) -> Result<f64, OracleError> {
        (**self).score(arch)
    }
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn spec(&self) -> &SearchSpaceSpec {
        (**self).spec()
    }

    fn score(&self, arch: &Architecture) -> Result<f64, OracleError> {
        (**self).score(arch)
    }
}

const TAG_UNARY: u64 = 0x75;
const TAG_PAIR: u64 = 0x70;
const TAG_SCORE_NOISE: u64 = 0x6e;
const TAG_DELTA_NOISE: u64 = 0x64;

/// Seeded fitness landscape in `[0, 1]` with unary and pairwise structure:
///
/// `score = (1 - w) * U + w * P`
///
/// where `U` is the mean of per-position unary terms `u(i, value)` over all
/// op slots and adjacency bits, and `P` is the mean of pairwise terms
/// `p(i, j, ops[i], ops[j])` over all op slot pairs `i < j`. Each term is a
/// uniform `[0, 1)` value derived through the crate's stable hash
/// ([`crate::hash`]): unary terms hash `(seed, 0x75, position, value)` and
/// pairwise terms hash `(seed, 0x70, i, j, v_i, v_j)`, with adjacency bits
/// addressed as positions `n..n+m` and valued in `{0, 1}`.
///
/// With `pair_weight > 0` the effect of a single edit depends on the rest of
/// the architecture, which is what makes delta prediction non-trivial.
#[derive(Debug, Clone)]
pub struct SyntheticLandscape {
    spec: SearchSpaceSpec,
    seed: u64,
    pair_weight: f64,
}

impl SyntheticLandscape {
    pub const DEFAULT_PAIR_WEIGHT: f64 = 0.4;

    pub fn new(spec: SearchSpaceSpec, seed: u64, pair_weight: f64) -> Result<Self, OracleError> {
        if !(0.0..=1.0).contains(&pair_weight) {
            return Err(OracleError::SpecMismatch(format!(
                "pair_weight must be in [0, 1], got {pair_weight}"
            )));
        }
        Ok(Self { spec, seed, pair_weight })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pair_weight(&self) -> f64 {
        self.pair_weight
    }

    /// Unary contribution of holding `value` at `position` (op slots first,
    /// then adjacency bits).
    pub fn unary_term(&self, position: usize, value: usize) -> f64 {
        unit_f64(hash_words(&[
            self.seed,
            TAG_UNARY,
            position as u64,
            value as u64,
        ]))
    }

    /// Pairwise contribution of op values `(vi, vj)` at op slots `i < j`.
    pub fn pair_term(&self, i: usize, j: usize, vi: usize, vj: usize) -> f64 {
        unit_f64(hash_words(&[
            self.seed,
            TAG_PAIR,
            i as u64,
            j as u64,
            vi as u64,
            vj as u64,
        ]))
    }
}

impl Oracle for SyntheticLandscape {
    fn spec(&self) -> &SearchSpaceSpec {
        &self.spec
    }

    fn score(&self, arch: &Architecture) -> Result<f64, OracleError> {
        self.spec
            .validate(arch)
            .map_err(|e| OracleError::SpecMismatch(e.to_string()))?;
        let n = self.spec.n();
        let mut unary_sum = 0.0;
        for (i, &v) in arch.ops().iter().enumerate() {
            unary_sum += self.unary_term(i, v);
        }
        let mut positions = n;
        if let Some(adj) = arch.adj() {
            for (b, &bit) in adj.iter().enumerate() {
                unary_sum += self.unary_term(n + b, bit as usize);
            }
            positions += adj.len();
        }
        let unary_mean = unary_sum / positions as f64;

        let mut pair_sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                pair_sum += self.pair_term(i, j, arch.ops()[i], arch.ops()[j]);
                pairs += 1;
            }
        }
        let pair_mean = pair_sum / pairs as f64;

        Ok((1.0 - self.pair_weight) * unary_mean + self.pair_weight * pair_mean)
    }
}

/// Wraps a ground-truth oracle with seeded Gaussian measurement noise,
/// standing in for a zero-cost accuracy proxy. The caller supplies the call
/// index; there is no hidden counter, so replays and parallel schedules see
/// identical draws.
#[derive(Debug, Clone)]
pub struct NoisyProxy<O: Oracle> {
    base: O,
    sigma: f64,
    seed: u64,
}

impl<O: Oracle> NoisyProxy<O> {
    pub const DEFAULT_SIGMA: f64 = 0.02;

    pub fn new(base: O, sigma: f64, seed: u64) -> Result<Self, OracleError> {
        if sigma < 0.0 || sigma.is_nan() {
            return Err(OracleError::SpecMismatch(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        Ok(Self { base, sigma, seed })
    }

    pub fn base(&self) -> &O {
        &self.base
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn spec(&self) -> &SearchSpaceSpec {
        self.base.spec()
    }

    /// One noisy accuracy measurement: `base(arch) + sigma * z` with `z`
    /// standard normal, keyed by `(seed, arch key, call_index)`. Unclamped.
    pub fn score_at(&self, arch: &Architecture, call_index: u64) -> Result<f64, OracleError> {
        let base = self.base.score(arch)?;
        let mut rng = rng_from_words(&[
            self.seed,
            TAG_SCORE_NOISE,
            hash_bytes(arch.key().as_str().as_bytes()),
            call_index,
        ]);
        let z: f64 = rng.sample(StandardNormal);
        Ok(base + self.sigma * z)
    }

    /// One noisy delta measurement between a pair:
    /// `base(to) - base(from) + sigma * z`, keyed by
    /// `(seed, from key, to key, call_index)`. `sigma` is the standard
    /// deviation of the delta measurement itself, so averaging `s` repeats
    /// leaves residual variance `sigma^2 / s`.
    pub fn delta_at(
        &self,
        from: &Architecture,
        to: &Architecture,
        call_index: u64,
    ) -> Result<f64, OracleError> {
        let delta = self.base.score(to)? - self.base.score(from)?;
        let mut rng = rng_from_words(&[
            self.seed,
            TAG_DELTA_NOISE,
            hash_bytes(from.key().as_str().as_bytes()),
            hash_bytes(to.key().as_str().as_bytes()),
            call_index,
        ]);
        let z: f64 = rng.sample(StandardNormal);
        Ok(delta + self.sigma * z)
    }
}

/// A lookup table mapping architecture keys to accuracies in `[0, 1]`,
/// loaded from the line-oriented text format described at [`load_tabular`].
#[derive(Debug, Clone)]
pub struct TabularBenchmark {
    spec: SearchSpaceSpec,
    entries: std::collections::BTreeMap<ArchKey, f64>,
    metadata: Vec<String>,
}

impl TabularBenchmark {
    pub fn new(spec: SearchSpaceSpec) -> Self {
        Self { spec, entries: Default::default(), metadata: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ArchKey, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn metadata(&self) -> &[String] {
        &self.metadata
    }

    pub fn insert(&mut self, arch: &Architecture, accuracy: f64) -> Result<(), OracleError> {
        self.spec
            .validate(arch)
            .map_err(|e| OracleError::SpecMismatch(e.to_string()))?;
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(OracleError::SpecMismatch(format!(
                "accuracy {accuracy} outside [0, 1]"
            )));
        }
        self.entries.insert(arch.key(), accuracy);
        Ok(())
    }

    /// Writes the benchmark in its on-disk format (entries sorted by key).
    pub fn save<W: Write>(&self, mut w: W) -> Result<(), OracleError> {
        writeln!(
            w,
            "#spec kind={} n={} r={}",
            self.spec.kind(),
            self.spec.n(),
            self.spec.r()
        )?;
        for line in &self.metadata {
            writeln!(w, "# {line}")?;
        }
        for (key, acc) in &self.entries {
            writeln!(w, "{key} {acc}")?;
        }
        Ok(())
    }

    pub fn save_to_path<P: AsRef<Path>>(&self, path: P) -> Result<(), OracleError> {
        let mut f = File::create(path)?;
        self.save(&mut f)
    }
}

impl Oracle for TabularBenchmark {
    fn spec(&self) -> &SearchSpaceSpec {
        &self.spec
    }

    fn score(&self, arch: &Architecture) -> Result<f64, OracleError> {
        self.spec
            .validate(arch)
            .map_err(|e| OracleError::SpecMismatch(e.to_string()))?;
        let key = arch.key();
        self.entries
            .get(&key)
            .copied()
            .ok_or(OracleError::MissingEntry(key))
    }
}

/// Loads a tabular benchmark file. Format:
///
/// ```text
/// #spec kind=<block|cell> n=<int> r=<int>
/// # free-form comment lines become metadata
/// <ArchKey> <accuracy in [0, 1]>
/// ```
pub fn load_tabular<P: AsRef<Path>>(path: P) -> Result<TabularBenchmark, OracleError> {
    load_tabular_from(BufReader::new(File::open(path)?))
}

pub fn load_tabular_from<R: Read>(reader: R) -> Result<TabularBenchmark, OracleError> {
    let mut spec: Option<SearchSpaceSpec> = None;
    let mut entries = std::collections::BTreeMap::new();
    let mut metadata = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("#spec") {
            spec = Some(parse_spec_header(rest, line_no)?);
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            metadata.push(rest.trim().to_string());
            continue;
        }
        let spec_ref = spec.as_ref().ok_or(OracleError::Parse {
            line: line_no,
            message: "entry before #spec header".into(),
        })?;
        let (key_s, acc_s) = trimmed.split_once(' ').ok_or(OracleError::Parse {
            line: line_no,
            message: "expected `<key> <accuracy>`".into(),
        })?;
        let arch = Architecture::from_key(spec_ref, key_s).map_err(|e| {
            OracleError::InvalidKey {
                line: line_no,
                key: key_s.to_string(),
                reason: e.to_string(),
            }
        })?;
        let acc: f64 = acc_s.trim().parse().map_err(|_| OracleError::Parse {
            line: line_no,
            message: format!("bad accuracy `{acc_s}`"),
        })?;
        if !(0.0..=1.0).contains(&acc) {
            return Err(OracleError::Parse {
                line: line_no,
                message: format!("accuracy {acc} outside [0, 1]"),
            });
        }
        if entries.insert(arch.key(), acc).is_some() {
            return Err(OracleError::DuplicateKey {
                line: line_no,
                key: key_s.to_string(),
            });
        }
    }
    let spec = spec.ok_or(OracleError::Parse { line: 0, message: "missing #spec header".into() })?;
    Ok(TabularBenchmark { spec, entries, metadata })
}

fn parse_spec_header(rest: &str, line: usize) -> Result<SearchSpaceSpec, OracleError> {
    let mut kind = None;
    let mut n = None;
    let mut r = None;
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or(OracleError::Parse {
            line,
            message: format!("bad header token `{tok}`"),
        })?;
        match k {
            "kind" => {
                kind = Some(v.parse().map_err(|e| OracleError::Parse { line, message: e })?)
            }
            "n" => {
                n = Some(v.parse::<usize>().map_err(|_| OracleError::Parse {
                    line,
                    message: format!("bad n `{v}`"),
                })?)
            }
            "r" => {
                r = Some(v.parse::<usize>().map_err(|_| OracleError::Parse {
                    line,
                    message: format!("bad r `{v}`"),
                })?)
            }
            other => {
                return Err(OracleError::Parse {
                    line,
                    message: format!("unknown header field `{other}`"),
                });
            }
        }
    }
    match (kind, n, r) {
        (Some(kind), Some(n), Some(r)) => SearchSpaceSpec::new(
            kind,
            n,
            r,
            (0..r).map(|i| format!("op{i}")).collect(),
        )
        .map_err(|e| OracleError::Parse { line, message: e.to_string() }),
        _ => Err(OracleError::Parse { line, message: "header needs kind, n and r".into() }),
    }
}

/// Exhaustive argmax over an enumerable space; ties go to the smallest key.
/// Architectures a partial tabular benchmark has no entry for are skipped.
pub fn best_in_space(
    oracle: &dyn Oracle,
    limit: u64,
) -> Result<(Architecture, f64), OracleError> {
    let archs = enumerate_space(oracle.spec(), limit)?;
    let mut best: Option<(Architecture, f64)> = None;
    // enumeration is key-sorted, so strict improvement keeps the smallest key
    for arch in archs {
        let score = match oracle.score(&arch) {
            Ok(s) => s,
            Err(OracleError::MissingEntry(_)) => continue,
            Err(e) => return Err(e),
        };
        match &best {
            Some((_, s)) if score <= *s => {}
            _ => best = Some((arch, score)),
        }
    }
    best.ok_or(OracleError::Parse {
        line: 0,
        message: "no scoreable architecture in the space".into(),
    })
}

/// Transparent wrapper counting true-oracle queries; backs the trace audits.
pub struct CountingOracle<'a> {
    inner: &'a dyn Oracle,
    count: AtomicU64,
}

impl<'a> CountingOracle<'a> {
    pub fn new(inner: &'a dyn Oracle) -> Self {
        Self { inner, count: AtomicU64::new(0) }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl Oracle for CountingOracle<'_> {
    fn spec(&self) -> &SearchSpaceSpec {
        self.inner.spec()
    }

    fn score(&self, arch: &Architecture) -> Result<f64, OracleError> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.score(arch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::rng_from_words;
    use crate::space::{SpaceKind, random_architecture};

    fn landscape(n: usize, r: usize, seed: u64, w: f64) -> SyntheticLandscape {
        SyntheticLandscape::new(SearchSpaceSpec::block(n, r).unwrap(), seed, w).unwrap()
    }

    #[test]
    fn synthetic_score_is_deterministic_and_bounded() {
        let ls = landscape(8, 3, 99, 0.4);
        let arch = random_architecture(ls.spec(), &mut rng_from_words(&[1]));
        let a = ls.score(&arch).unwrap();
        let b = ls.score(&arch).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        for arch in enumerate_space(ls.spec(), 10_000).unwrap() {
            let s = ls.score(&arch).unwrap();
            assert!((0.0..=1.0).contains(&s), "score {s}");
        }
    }

    #[test]
    fn synthetic_rejects_foreign_architectures() {
        let ls = landscape(4, 3, 1, 0.4);
        let other = SearchSpaceSpec::block(5, 3).unwrap();
        let arch = random_architecture(&other, &mut rng_from_words(&[2]));
        assert!(matches!(ls.score(&arch), Err(OracleError::SpecMismatch(_))));
    }

    #[test]
    fn additive_landscape_decomposes_per_position() {
        // with pair_weight = 0 an op change moves the score by exactly
        // (u_new - u_old) / n
        let ls = landscape(6, 3, 5, 0.0);
        let mut rng = rng_from_words(&[3]);
        for _ in 0..50 {
            let a = random_architecture(ls.spec(), &mut rng);
            let pos = rng.random_range(0..6);
            let old = a.ops()[pos];
            let new = (old + 1 + rng.random_range(0..2)) % 3;
            if new == old {
                continue;
            }
            let mut b = a.clone();
            b.ops_mut()[pos] = new;
            let expected = (ls.unary_term(pos, new) - ls.unary_term(pos, old)) / 6.0;
            let got = ls.score(&b).unwrap() - ls.score(&a).unwrap();
            assert!((got - expected).abs() < 1e-12, "got {got}, expected {expected}");
        }
    }

    #[test]
    fn pairwise_landscape_is_context_dependent() {
        // the same edit applied from two anchors differing elsewhere must
        // produce different deltas somewhere
        let ls = landscape(4, 2, 11, 0.4);
        let spec = ls.spec().clone();
        let archs = enumerate_space(&spec, 1000).unwrap();
        let mut found = false;
        'outer: for a in &archs {
            for b in &archs {
                if a.ops()[0] != b.ops()[0] || a == b {
                    continue;
                }
                // flip position 0 on both anchors
                let mut a2 = a.clone();
                a2.ops_mut()[0] = 1 - a2.ops()[0];
                let mut b2 = b.clone();
                b2.ops_mut()[0] = 1 - b2.ops()[0];
                let da = ls.score(&a2).unwrap() - ls.score(a).unwrap();
                let db = ls.score(&b2).unwrap() - ls.score(b).unwrap();
                if (da - db).abs() > 1e-9 {
                    found = true;
                    break 'outer;
                }
            }
        }
        assert!(found, "landscape behaved additively despite pair_weight > 0");
    }

    #[test]
    fn proxy_with_zero_sigma_is_exact() {
        let ls = landscape(5, 3, 7, 0.4);
        let proxy = NoisyProxy::new(ls.clone(), 0.0, 21).unwrap();
        let arch = random_architecture(ls.spec(), &mut rng_from_words(&[4]));
        let truth = ls.score(&arch).unwrap();
        for i in 0..5 {
            assert_eq!(proxy.score_at(&arch, i).unwrap().to_bits(), truth.to_bits());
        }
    }

    #[test]
    fn proxy_mean_approaches_base_score() {
        let ls = landscape(5, 3, 7, 0.4);
        let sigma = 0.05;
        let proxy = NoisyProxy::new(ls.clone(), sigma, 22).unwrap();
        let arch = random_architecture(ls.spec(), &mut rng_from_words(&[5]));
        let truth = ls.score(&arch).unwrap();
        let draws = 10_000u64;
        let mean: f64 = (0..draws)
            .map(|i| proxy.score_at(&arch, i).unwrap())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - truth).abs() < 3.0 * sigma / (draws as f64).sqrt());
    }

    #[test]
    fn proxy_seeds_separate_noise_streams() {
        let ls = landscape(5, 3, 7, 0.4);
        let p1 = NoisyProxy::new(ls.clone(), 0.1, 1).unwrap();
        let p2 = NoisyProxy::new(ls.clone(), 0.1, 2).unwrap();
        let arch = random_architecture(ls.spec(), &mut rng_from_words(&[6]));
        assert_ne!(
            p1.score_at(&arch, 0).unwrap().to_bits(),
            p2.score_at(&arch, 0).unwrap().to_bits()
        );
    }

    #[test]
    fn delta_measurements_have_sigma_std() {
        let ls = landscape(8, 3, 17, 0.4);
        let sigma = 0.02;
        let proxy = NoisyProxy::new(ls.clone(), sigma, 23).unwrap();
        let mut rng = rng_from_words(&[7]);
        let mut errs = Vec::new();
        for _ in 0..2000 {
            let a = random_architecture(ls.spec(), &mut rng);
            let b = crate::space::random_neighbor_k(ls.spec(), &a, 1, &mut rng).unwrap();
            let truth = ls.score(&b).unwrap() - ls.score(&a).unwrap();
            errs.push(proxy.delta_at(&a, &b, 0).unwrap() - truth);
        }
        let var = errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64;
        assert!(
            (var - sigma * sigma).abs() < 0.25 * sigma * sigma,
            "var {var}, expected {}",
            sigma * sigma
        );
    }

    #[test]
    fn tabular_round_trip_preserves_every_entry() {
        let spec = SearchSpaceSpec::block(8, 3).unwrap();
        let ls = SyntheticLandscape::new(spec.clone(), 31, 0.4).unwrap();
        let mut bench = TabularBenchmark::new(spec.clone());
        for arch in enumerate_space(&spec, 10_000).unwrap() {
            bench.insert(&arch, ls.score(&arch).unwrap()).unwrap();
        }
        let mut buf = Vec::new();
        bench.save(&mut buf).unwrap();
        let loaded = load_tabular_from(&buf[..]).unwrap();
        assert_eq!(loaded.len(), 6561);
        for ((k1, v1), (k2, v2)) in bench.entries().zip(loaded.entries()) {
            assert_eq!(k1, k2);
            assert_eq!(v1.to_bits(), v2.to_bits());
        }
    }

    #[test]
    fn tabular_accepts_empty_entry_section() {
        let loaded = load_tabular_from("#spec kind=block n=3 r=2\n".as_bytes()).unwrap();
        assert!(loaded.is_empty());
        assert_eq!(loaded.spec().n(), 3);
    }

    #[test]
    fn tabular_rejects_out_of_range_accuracy() {
        let text = "#spec kind=block n=3 r=2\n0-0-0 1.5\n";
        match load_tabular_from(text.as_bytes()) {
            Err(OracleError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn tabular_rejects_bad_and_duplicate_keys() {
        let text = "#spec kind=block n=3 r=2\n0-0-7 0.5\n";
        assert!(matches!(
            load_tabular_from(text.as_bytes()),
            Err(OracleError::InvalidKey { line: 2, .. })
        ));
        let text = "#spec kind=block n=3 r=2\n0-0-0 0.5\n0-0-0 0.6\n";
        assert!(matches!(
            load_tabular_from(text.as_bytes()),
            Err(OracleError::DuplicateKey { line: 3, .. })
        ));
    }

    #[test]
    fn best_in_space_breaks_ties_by_smallest_key() {
        struct Constant(SearchSpaceSpec);
        impl Oracle for Constant {
            fn spec(&self) -> &SearchSpaceSpec {
                &self.0
            }
            fn score(&self, _arch: &Architecture) -> Result<f64, OracleError> {
                Ok(0.5)
            }
        }
        let oracle = Constant(SearchSpaceSpec::block(3, 2).unwrap());
        let (arch, score) = best_in_space(&oracle, 100).unwrap();
        assert_eq!(arch.key().as_str(), "0-0-0");
        assert_eq!(score, 0.5);
    }

    #[test]
    fn best_in_space_dominates_every_enumerated_score() {
        let ls = landscape(8, 3, 41, 0.4);
        let (_, best) = best_in_space(&ls, 10_000).unwrap();
        for arch in enumerate_space(ls.spec(), 10_000).unwrap() {
            assert!(ls.score(&arch).unwrap() <= best);
        }
    }

    #[test]
    fn best_in_space_on_tiny_tabular_benchmark() {
        let spec = SearchSpaceSpec::new(SpaceKind::Block, 2, 2, vec!["a".into(), "b".into()])
            .unwrap();
        let mut bench = TabularBenchmark::new(spec.clone());
        bench
            .insert(&Architecture::new(&spec, vec![0, 0], None).unwrap(), 0.1)
            .unwrap();
        bench
            .insert(&Architecture::new(&spec, vec![0, 1], None).unwrap(), 0.9)
            .unwrap();
        bench
            .insert(&Architecture::new(&spec, vec![1, 0], None).unwrap(), 0.5)
            .unwrap();
        let (arch, score) = best_in_space(&bench, 100).unwrap();
        assert_eq!(arch.key().as_str(), "0-1");
        assert_eq!(score, 0.9);
    }

    #[test]
    fn counting_oracle_counts() {
        let ls = landscape(4, 2, 3, 0.2);
        let counter = CountingOracle::new(&ls);
        let arch = random_architecture(ls.spec(), &mut rng_from_words(&[9]));
        for _ in 0..7 {
            counter.score(&arch).unwrap();
        }
        assert_eq!(counter.count(), 7);
    }
}
