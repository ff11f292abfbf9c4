//! Architecture encodings: the dense one-hot baseline, the sparse
//! difference encoding, and the closed forms for the size of the
//! difference space `D^k`.
//!
//! The one-hot layout is `n` slices of `r` entries (one per node, exactly one
//! entry set) followed by the raw adjacency bits for cell spaces. A
//! difference between two architectures subtracts one-hot vectors, which is
//! why a [`DiffFeature`] carries `-1` at the old value, `+1` at the new one
//! and `±1` at flipped adjacency slots.

use num_bigint::BigUint;
use thiserror::Error;

use crate::space::{
    Architecture, SearchSpaceSpec, SpaceKind, binomial_biguint, edit_distance,
};

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("architectures do not share a spec: {0}")]
    SpecMismatch(String),
    #[error("stale diff: edit at position {position} expects old value {expected}, base has {found}")]
    StaleDiff {
        position: usize,
        expected: usize,
        found: usize,
    },
    #[error("edit count k={k} outside 1..={max}")]
    InvalidK { k: usize, max: usize },
    #[error("malformed diff text `{text}`: {reason}")]
    BadDiffText { text: String, reason: String },
    #[error("encoding is not a valid one-hot vector: {0}")]
    BadOneHot(String),
}

/// Dense encoding of one architecture: per-node one-hot op blocks plus
/// copied adjacency bits.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotEncoding {
    pub values: Vec<f64>,
}

/// One elementary edit: an op change at a node, or an adjacency bit flip
/// (`is_adj` set, `position` indexing into the adjacency bits, old/new in
/// `{0, 1}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edit {
    pub position: usize,
    pub old_val: usize,
    pub new_val: usize,
    pub is_adj: bool,
}

/// Sparse list of edits between two close architectures, sorted by
/// `(is_adj, position)`; empty iff the architectures are identical.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DiffEncoding {
    edits: Vec<Edit>,
}

impl DiffEncoding {
    pub fn edits(&self) -> &[Edit] {
        &self.edits
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// Same edits with old and new values swapped; applying the result to
    /// the diff's target recovers its anchor.
    pub fn reversed(&self) -> DiffEncoding {
        DiffEncoding {
            edits: self
                .edits
                .iter()
                .map(|e| Edit {
                    position: e.position,
                    old_val: e.new_val,
                    new_val: e.old_val,
                    is_adj: e.is_adj,
                })
                .collect(),
        }
    }

    /// Compact text form `pos:old>new[,...]` used inside dataset files.
    /// Positions are global: op slots occupy `0..n`, adjacency bits continue
    /// at `n`, which keeps the record self-describing given the file's spec
    /// header.
    pub fn text(&self, spec: &SearchSpaceSpec) -> String {
        let mut s = String::new();
        for (i, e) in self.edits.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let global = if e.is_adj { spec.n() + e.position } else { e.position };
            s.push_str(&format!("{}:{}>{}", global, e.old_val, e.new_val));
        }
        s
    }

    /// Parses the text form back, validating positions and values against
    /// `spec`.
    pub fn parse(text: &str, spec: &SearchSpaceSpec) -> Result<Self, EncodingError> {
        let bad = |reason: &str| EncodingError::BadDiffText {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let mut edits = Vec::new();
        if text.is_empty() {
            return Ok(DiffEncoding { edits });
        }
        for part in text.split(',') {
            let (pos_s, rest) = part.split_once(':').ok_or_else(|| bad("missing `:`"))?;
            let (old_s, new_s) = rest.split_once('>').ok_or_else(|| bad("missing `>`"))?;
            let global: usize = pos_s.parse().map_err(|_| bad("bad position"))?;
            let old_val: usize = old_s.parse().map_err(|_| bad("bad old value"))?;
            let new_val: usize = new_s.parse().map_err(|_| bad("bad new value"))?;
            if global >= spec.num_positions() {
                return Err(bad("position out of range"));
            }
            let is_adj = global >= spec.n();
            let position = if is_adj { global - spec.n() } else { global };
            let limit = if is_adj { 2 } else { spec.r() };
            if old_val >= limit || new_val >= limit {
                return Err(bad("value out of range"));
            }
            if old_val == new_val {
                return Err(bad("old and new values are equal"));
            }
            edits.push(Edit { position, old_val, new_val, is_adj });
        }
        let mut sorted = edits.clone();
        sorted.sort_by_key(|e| (e.is_adj, e.position));
        sorted.dedup_by_key(|e| (e.is_adj, e.position));
        if sorted.len() != edits.len() || sorted != edits {
            return Err(bad("edits must be sorted by position and unique"));
        }
        Ok(DiffEncoding { edits })
    }
}

/// Signed sparse vector in one-hot coordinates; always equal to
/// `encode_onehot(to) - encode_onehot(from)` for the pair the diff was taken
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffFeature {
    pub values: Vec<f64>,
}

/// Encodes an architecture as a one-hot vector.
pub fn encode_onehot(
    spec: &SearchSpaceSpec,
    arch: &Architecture,
) -> Result<OneHotEncoding, EncodingError> {
    spec.validate(arch)
        .map_err(|e| EncodingError::SpecMismatch(e.to_string()))?;
    let mut values = vec![0.0; spec.onehot_len()];
    for (node, &op) in arch.ops().iter().enumerate() {
        values[node * spec.r() + op] = 1.0;
    }
    if let Some(adj) = arch.adj() {
        let base = spec.n() * spec.r();
        for (i, &b) in adj.iter().enumerate() {
            values[base + i] = if b { 1.0 } else { 0.0 };
        }
    }
    Ok(OneHotEncoding { values })
}

/// Inverts [`encode_onehot`]. Rejects vectors that are not exact one-hot
/// encodings of a member of `spec`.
pub fn decode_onehot(
    spec: &SearchSpaceSpec,
    enc: &OneHotEncoding,
) -> Result<Architecture, EncodingError> {
    if enc.values.len() != spec.onehot_len() {
        return Err(EncodingError::BadOneHot(format!(
            "expected length {}, got {}",
            spec.onehot_len(),
            enc.values.len()
        )));
    }
    let mut ops = Vec::with_capacity(spec.n());
    for node in 0..spec.n() {
        let slice = &enc.values[node * spec.r()..(node + 1) * spec.r()];
        let mut hot = None;
        for (i, &v) in slice.iter().enumerate() {
            if v == 1.0 {
                if hot.is_some() {
                    return Err(EncodingError::BadOneHot(format!(
                        "node {node} has multiple set entries"
                    )));
                }
                hot = Some(i);
            } else if v != 0.0 {
                return Err(EncodingError::BadOneHot(format!(
                    "node {node} has non-binary entry {v}"
                )));
            }
        }
        ops.push(hot.ok_or_else(|| {
            EncodingError::BadOneHot(format!("node {node} has no set entry"))
        })?);
    }
    let adj = match spec.kind() {
        SpaceKind::Block => None,
        SpaceKind::Cell => {
            let base = spec.n() * spec.r();
            let mut bits = Vec::with_capacity(spec.adj_len());
            for (i, &v) in enc.values[base..].iter().enumerate() {
                if v == 0.0 {
                    bits.push(false);
                } else if v == 1.0 {
                    bits.push(true);
                } else {
                    return Err(EncodingError::BadOneHot(format!(
                        "adjacency slot {i} has non-binary entry {v}"
                    )));
                }
            }
            Some(bits)
        }
    };
    Architecture::new(spec, ops, adj).map_err(|e| EncodingError::BadOneHot(e.to_string()))
}

/// The sparse difference taking `from` to `to`. Its length equals their edit
/// distance; `diff(a, a)` is empty.
pub fn diff(from: &Architecture, to: &Architecture) -> Result<DiffEncoding, EncodingError> {
    edit_distance(from, to).map_err(|e| EncodingError::SpecMismatch(e.to_string()))?;
    let mut edits = Vec::new();
    for (pos, (&o, &n)) in from.ops().iter().zip(to.ops()).enumerate() {
        if o != n {
            edits.push(Edit { position: pos, old_val: o, new_val: n, is_adj: false });
        }
    }
    if let (Some(fa), Some(ta)) = (from.adj(), to.adj()) {
        for (pos, (&o, &n)) in fa.iter().zip(ta).enumerate() {
            if o != n {
                edits.push(Edit {
                    position: pos,
                    old_val: o as usize,
                    new_val: n as usize,
                    is_adj: true,
                });
            }
        }
    }
    Ok(DiffEncoding { edits })
}

/// Applies a diff to `base`, checking every edit's old value; the exact
/// inverse of [`diff`].
pub fn apply_diff(base: &Architecture, d: &DiffEncoding) -> Result<Architecture, EncodingError> {
    let mut out = base.clone();
    for e in &d.edits {
        if e.is_adj {
            let adj = out.adj_mut().ok_or_else(|| {
                EncodingError::SpecMismatch("adjacency edit on a block architecture".into())
            })?;
            if e.position >= adj.len() {
                return Err(EncodingError::SpecMismatch(format!(
                    "adjacency position {} out of range",
                    e.position
                )));
            }
            let found = adj[e.position] as usize;
            if found != e.old_val {
                return Err(EncodingError::StaleDiff {
                    position: e.position,
                    expected: e.old_val,
                    found,
                });
            }
            adj[e.position] = e.new_val == 1;
        } else {
            if e.position >= out.ops().len() {
                return Err(EncodingError::SpecMismatch(format!(
                    "op position {} out of range",
                    e.position
                )));
            }
            let found = out.ops()[e.position];
            if found != e.old_val {
                return Err(EncodingError::StaleDiff {
                    position: e.position,
                    expected: e.old_val,
                    found,
                });
            }
            out.ops_mut()[e.position] = e.new_val;
        }
    }
    Ok(out)
}

/// Expands a diff into one-hot coordinates: `-1` at `(node, old)`, `+1` at
/// `(node, new)`, `±1` at flipped adjacency slots, zero elsewhere.
pub fn diff_to_feature(spec: &SearchSpaceSpec, d: &DiffEncoding) -> DiffFeature {
    let mut values = vec![0.0; spec.onehot_len()];
    let adj_base = spec.n() * spec.r();
    for e in &d.edits {
        if e.is_adj {
            values[adj_base + e.position] = e.new_val as f64 - e.old_val as f64;
        } else {
            values[e.position * spec.r() + e.old_val] = -1.0;
            values[e.position * spec.r() + e.new_val] = 1.0;
        }
    }
    DiffFeature { values }
}

/// `|D^k|` under the printed convention, which records edit positions and
/// new values: `r^k C(n,k)` for block spaces (`rn` at `k = 1`). Cell spaces
/// extend the formula by treating adjacency bits as appended positions with
/// two values: `sum_j C(n,j) r^j * C(m,k-j) 2^(k-j)`.
pub fn dk_size_paper(spec: &SearchSpaceSpec, k: usize) -> Result<BigUint, EncodingError> {
    dk_sum(spec, k, spec.r(), 2)
}

/// Count of distinct [`DiffEncoding`] values (position, old and new value)
/// over all ordered pairs at edit distance `k`: every chosen op position
/// contributes `r(r-1)` ordered value pairs, every adjacency position 2.
pub fn dk_size_exact(spec: &SearchSpaceSpec, k: usize) -> Result<BigUint, EncodingError> {
    dk_sum(spec, k, spec.r() * (spec.r() - 1), 2)
}

/// `sum_j C(n,j) op_weight^j * C(m,k-j) adj_weight^(k-j)` over feasible op
/// edit counts `j`; collapses to a single term for block spaces.
fn dk_sum(
    spec: &SearchSpaceSpec,
    k: usize,
    op_weight: usize,
    adj_weight: usize,
) -> Result<BigUint, EncodingError> {
    let n = spec.n();
    let m = spec.adj_len();
    if k < 1 || k > n + m {
        return Err(EncodingError::InvalidK { k, max: n + m });
    }
    let mut total = BigUint::from(0u8);
    for j in k.saturating_sub(m)..=k.min(n) {
        total += binomial_biguint(n, j)
            * BigUint::from(op_weight).pow(j as u32)
            * binomial_biguint(m, k - j)
            * BigUint::from(adj_weight).pow((k - j) as u32);
    }
    Ok(total)
}
