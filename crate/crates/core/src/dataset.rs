//! Difference-of-architecture datasets: sample anchors, pair each with a
//! uniform k-edit neighbor, and record repeated noisy measurements of the
//! accuracy delta for the same pair.
//!
//! Because the difference encoding is many-to-one, several anchors can share
//! one encoding; [`aggregate_by_encoding`] averages measurements per group,
//! and [`split`] keeps whole encoding groups on one side so no difference
//! leaks from train to test.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::encoding::{
    DiffEncoding, DiffFeature, EncodingError, OneHotEncoding, apply_diff, diff, diff_to_feature,
    encode_onehot,
};
use crate::hash::rng_from_words;
use crate::oracle::{NoisyProxy, Oracle, OracleError};
use crate::space::{
    ArchKey, Architecture, SearchSpaceSpec, SpaceError, random_architecture, random_neighbor_k,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset spec does not match: {0}")]
    SpecMismatch(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("split needs at least one group on each side ({groups} groups, {train} to train)")]
    InsufficientGroups { groups: usize, train: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// How predictor inputs are assembled, and therefore how samples group: by
/// difference encoding alone, or by (difference, anchor) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    DiffOnly,
    DiffPlusAnchor,
}

impl std::fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureMode::DiffOnly => write!(f, "diff_only"),
            FeatureMode::DiffPlusAnchor => write!(f, "diff_plus_anchor"),
        }
    }
}

impl std::str::FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diff_only" => Ok(FeatureMode::DiffOnly),
            "diff_plus_anchor" => Ok(FeatureMode::DiffPlusAnchor),
            other => Err(format!("unknown feature mode `{other}`")),
        }
    }
}

/// One measurement: a difference encoding, its feature vector, and one
/// (possibly noisy) delta-accuracy observation for the underlying pair.
#[derive(Debug, Clone)]
pub struct DoaSample {
    pub diff: DiffEncoding,
    pub feature: DiffFeature,
    pub delta_acc: f64,
    pub anchor_key: ArchKey,
    /// One-hot of the anchor; present on generated and loaded samples, `None`
    /// after anchors have been merged by diff-only aggregation.
    pub anchor_feature: Option<OneHotEncoding>,
}

/// A set of difference samples generated at one edit distance `k`.
#[derive(Debug, Clone)]
pub struct DoaDataset {
    pub spec: SearchSpaceSpec,
    pub k: usize,
    pub samples_per_encoding: usize,
    pub generation_seed: u64,
    pub samples: Vec<DoaSample>,
}

const TAG_ANCHOR: u64 = 0x61;
const TAG_SPLIT: u64 = 0x73;

/// Samples `num_anchors` anchors uniformly, pairs each with one uniform
/// k-edit neighbor, and records `samples_per_encoding` independent noisy
/// delta measurements of that same pair (call indices `0..samples_per_encoding`).
/// Each anchor's randomness is keyed by `(seed, anchor index)`, so results do
/// not depend on evaluation order.
pub fn generate_doa_dataset<O: Oracle>(
    spec: &SearchSpaceSpec,
    proxy: &NoisyProxy<O>,
    num_anchors: usize,
    k: usize,
    samples_per_encoding: usize,
    seed: u64,
) -> Result<DoaDataset, DatasetError> {
    if samples_per_encoding < 1 {
        return Err(DatasetError::InvalidArgument(
            "samples_per_encoding must be at least 1".into(),
        ));
    }
    if proxy.spec() != spec {
        return Err(DatasetError::SpecMismatch(
            "proxy was built for a different spec".into(),
        ));
    }
    if k < 1 || k > spec.num_positions() {
        return Err(DatasetError::Space(SpaceError::InvalidK {
            k,
            max: spec.num_positions(),
        }));
    }
    let mut samples = Vec::with_capacity(num_anchors * samples_per_encoding);
    for anchor_idx in 0..num_anchors {
        let mut rng = rng_from_words(&[seed, TAG_ANCHOR, anchor_idx as u64]);
        let anchor = random_architecture(spec, &mut rng);
        let neighbor = random_neighbor_k(spec, &anchor, k, &mut rng)?;
        let d = diff(&anchor, &neighbor)?;
        let feature = diff_to_feature(spec, &d);
        let anchor_feature = encode_onehot(spec, &anchor)?;
        let anchor_key = anchor.key();
        for call_index in 0..samples_per_encoding {
            let delta_acc = proxy.delta_at(&anchor, &neighbor, call_index as u64)?;
            samples.push(DoaSample {
                diff: d.clone(),
                feature: feature.clone(),
                delta_acc,
                anchor_key: anchor_key.clone(),
                anchor_feature: Some(anchor_feature.clone()),
            });
        }
    }
    Ok(DoaDataset {
        spec: spec.clone(),
        k,
        samples_per_encoding,
        generation_seed: seed,
        samples,
    })
}

impl DoaDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Adds the reversed sample for every sample: anchor moved to the
    /// neighbor, diff reversed, feature and delta negated. Trained on this,
    /// a predictor can be probed for antisymmetry.
    pub fn symmetrize(&self) -> Result<DoaDataset, DatasetError> {
        let mut samples = Vec::with_capacity(self.samples.len() * 2);
        for s in &self.samples {
            let anchor = Architecture::from_key(&self.spec, s.anchor_key.as_str())?;
            let neighbor = apply_diff(&anchor, &s.diff)?;
            let reversed = s.diff.reversed();
            let feature = diff_to_feature(&self.spec, &reversed);
            let neighbor_feature = encode_onehot(&self.spec, &neighbor)?;
            samples.push(s.clone());
            samples.push(DoaSample {
                diff: reversed,
                feature,
                delta_acc: -s.delta_acc,
                anchor_key: neighbor.key(),
                anchor_feature: Some(neighbor_feature),
            });
        }
        Ok(DoaDataset { samples, ..self.clone() })
    }

    /// Writes the dataset in its on-disk format.
    pub fn save<W: Write>(&self, mut w: W, extra_comments: &[String]) -> Result<(), DatasetError> {
        writeln!(
            w,
            "#doa kind={} n={} r={} k={} samples_per_encoding={} seed={}",
            self.spec.kind(),
            self.spec.n(),
            self.spec.r(),
            self.k,
            self.samples_per_encoding,
            self.generation_seed
        )?;
        for c in extra_comments {
            writeln!(w, "# {c}")?;
        }
        for s in &self.samples {
            writeln!(w, "{} {} {}", s.anchor_key, s.diff.text(&self.spec), s.delta_acc)?;
        }
        Ok(())
    }

    pub fn save_to_path<P: AsRef<Path>>(
        &self,
        path: P,
        extra_comments: &[String],
    ) -> Result<(), DatasetError> {
        let mut f = File::create(path)?;
        self.save(&mut f, extra_comments)
    }

    /// Loads a dataset file, revalidating every sample against the header
    /// spec and recomputing features.
    pub fn load<R: Read>(reader: R) -> Result<DoaDataset, DatasetError> {
        let mut header: Option<(SearchSpaceSpec, usize, usize, u64)> = None;
        let mut samples = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("#doa") {
                header = Some(parse_doa_header(rest, line_no)?);
                continue;
            }
            if trimmed.starts_with('#') {
                continue;
            }
            let (spec, k, _, _) = header.as_ref().ok_or(DatasetError::Parse {
                line: line_no,
                message: "entry before #doa header".into(),
            })?;
            let mut parts = trimmed.splitn(3, ' ');
            let (key_s, diff_s, delta_s) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => {
                    return Err(DatasetError::Parse {
                        line: line_no,
                        message: "expected `<anchor> <diff> <delta>`".into(),
                    });
                }
            };
            let anchor = Architecture::from_key(spec, key_s).map_err(|e| DatasetError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let d = DiffEncoding::parse(diff_s, spec).map_err(|e| DatasetError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if d.len() != *k {
                return Err(DatasetError::Parse {
                    line: line_no,
                    message: format!("diff has {} edits, dataset k is {k}", d.len()),
                });
            }
            apply_diff(&anchor, &d).map_err(|e| DatasetError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let delta_acc: f64 = delta_s.trim().parse().map_err(|_| DatasetError::Parse {
                line: line_no,
                message: format!("bad delta `{delta_s}`"),
            })?;
            let feature = diff_to_feature(spec, &d);
            let anchor_feature = encode_onehot(spec, &anchor)?;
            samples.push(DoaSample {
                diff: d,
                feature,
                delta_acc,
                anchor_key: anchor.key(),
                anchor_feature: Some(anchor_feature),
            });
        }
        let (spec, k, samples_per_encoding, generation_seed) =
            header.ok_or(DatasetError::Parse { line: 0, message: "missing #doa header".into() })?;
        Ok(DoaDataset { spec, k, samples_per_encoding, generation_seed, samples })
    }

    pub fn load_from_path<P: AsRef<Path>>(path: P) -> Result<DoaDataset, DatasetError> {
        Self::load(BufReader::new(File::open(path)?))
    }
}

fn parse_doa_header(
    rest: &str,
    line: usize,
) -> Result<(SearchSpaceSpec, usize, usize, u64), DatasetError> {
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or(DatasetError::Parse {
            line,
            message: format!("bad header token `{tok}`"),
        })?;
        fields.insert(k, v);
    }
    let get = |name: &str| {
        fields.get(name).copied().ok_or(DatasetError::Parse {
            line,
            message: format!("header missing `{name}`"),
        })
    };
    let parse_usize = |name: &str| -> Result<usize, DatasetError> {
        get(name)?.parse().map_err(|_| DatasetError::Parse {
            line,
            message: format!("bad `{name}` value"),
        })
    };
    let kind = get("kind")?
        .parse()
        .map_err(|e| DatasetError::Parse { line, message: e })?;
    let n = parse_usize("n")?;
    let r = parse_usize("r")?;
    let k = parse_usize("k")?;
    let spe = parse_usize("samples_per_encoding")?;
    let seed: u64 = get("seed")?.parse().map_err(|_| DatasetError::Parse {
        line,
        message: "bad `seed` value".into(),
    })?;
    let spec = SearchSpaceSpec::new(kind, n, r, (0..r).map(|i| format!("op{i}")).collect())
        .map_err(|e| DatasetError::Parse { line, message: e.to_string() })?;
    Ok((spec, k, spe, seed))
}

/// Collapses samples to one per group — `(diff, anchor)` in
/// [`FeatureMode::DiffPlusAnchor`], diff alone in [`FeatureMode::DiffOnly`] —
/// replacing `delta_acc` with the group's arithmetic mean. Output is sorted
/// by group key.
pub fn aggregate_by_encoding(ds: &DoaDataset, mode: FeatureMode) -> DoaDataset {
    let mut groups: BTreeMap<(String, Option<String>), Vec<&DoaSample>> = BTreeMap::new();
    for s in &ds.samples {
        let anchor_part = match mode {
            FeatureMode::DiffOnly => None,
            FeatureMode::DiffPlusAnchor => Some(s.anchor_key.to_string()),
        };
        groups
            .entry((s.diff.text(&ds.spec), anchor_part))
            .or_default()
            .push(s);
    }
    let samples = groups
        .into_values()
        .map(|members| {
            let mean = members.iter().map(|s| s.delta_acc).sum::<f64>() / members.len() as f64;
            let representative = members
                .iter()
                .min_by(|a, b| a.anchor_key.cmp(&b.anchor_key))
                .expect("group is non-empty");
            DoaSample {
                diff: representative.diff.clone(),
                feature: representative.feature.clone(),
                delta_acc: mean,
                anchor_key: representative.anchor_key.clone(),
                anchor_feature: match mode {
                    FeatureMode::DiffOnly => None,
                    FeatureMode::DiffPlusAnchor => representative.anchor_feature.clone(),
                },
            }
        })
        .collect();
    DoaDataset { samples, ..ds.clone() }
}

/// Splits by difference-encoding group: every sample of one encoding lands on
/// the same side. Train side gets `floor(train_fraction * groups)` groups.
pub fn split(
    ds: &DoaDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(DoaDataset, DoaDataset), DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut group_keys: Vec<String> = {
        let mut set: Vec<String> = ds.samples.iter().map(|s| s.diff.text(&ds.spec)).collect();
        set.sort();
        set.dedup();
        set
    };
    let groups = group_keys.len();
    let train_count = (train_fraction * groups as f64).floor() as usize;
    if train_count == 0 || train_count >= groups {
        return Err(DatasetError::InsufficientGroups { groups, train: train_count });
    }
    // deterministic shuffle of the sorted keys
    let mut rng = rng_from_words(&[seed, TAG_SPLIT]);
    for i in (1..group_keys.len()).rev() {
        let j = rand::Rng::random_range(&mut rng, 0..=i);
        group_keys.swap(i, j);
    }
    let train_set: std::collections::BTreeSet<&str> =
        group_keys[..train_count].iter().map(String::as_str).collect();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for s in &ds.samples {
        if train_set.contains(s.diff.text(&ds.spec).as_str()) {
            train.push(s.clone());
        } else {
            test.push(s.clone());
        }
    }
    Ok((
        DoaDataset { samples: train, ..ds.clone() },
        DoaDataset { samples: test, ..ds.clone() },
    ))
}
