//! Search-space definitions: block- and cell-based spaces, concrete
//! architectures, canonical keys, enumeration, neighbor generation and the
//! two cardinality formulas.
//!
//! A block-based space fixes depth and connectivity and chooses one of `r`
//! operations at each of `n` nodes. A cell-based space additionally chooses
//! node connectivity through the strict upper triangle of an adjacency
//! matrix, `n(n-1)/2` bits stored row-major.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("node count must be at least 2, got {0}")]
    InvalidNodeCount(usize),
    #[error("operation count must be at least 2, got {0}")]
    InvalidOpCount(usize),
    #[error("expected {expected} distinct op names, got {got}")]
    BadOpNames { expected: usize, got: usize },
    #[error("space holds {size} architectures, over the enumeration limit {limit}")]
    SpaceTooLarge { size: BigUint, limit: u64 },
    #[error("edit count k={k} outside 1..={max}")]
    InvalidK { k: usize, max: usize },
    #[error("architecture does not belong to this space: {0}")]
    SpecMismatch(String),
    #[error("invalid architecture key `{key}`: {reason}")]
    BadKey { key: String, reason: String },
    #[error("neighbor count overflows the sampler for k={k}")]
    NeighborCountOverflow { k: usize },
}

/// Whether connectivity is searched (`Cell`) or fixed (`Block`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Block,
    Cell,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Block => write!(f, "block"),
            SpaceKind::Cell => write!(f, "cell"),
        }
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "block" => Ok(SpaceKind::Block),
            "cell" => Ok(SpaceKind::Cell),
            other => Err(format!("unknown space kind `{other}`")),
        }
    }
}

/// A search-space definition: `n` nodes, `r` named operation choices, and the
/// space kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpaceSpec {
    kind: SpaceKind,
    n: usize,
    r: usize,
    op_names: Vec<String>,
}

impl SearchSpaceSpec {
    /// Builds a spec with explicit operation names (`op_names.len()` must be
    /// exactly `r`, all distinct).
    pub fn new(
        kind: SpaceKind,
        n: usize,
        r: usize,
        op_names: Vec<String>,
    ) -> Result<Self, SpaceError> {
        if n < 2 {
            return Err(SpaceError::InvalidNodeCount(n));
        }
        if r < 2 {
            return Err(SpaceError::InvalidOpCount(r));
        }
        let distinct: BTreeSet<&str> = op_names.iter().map(String::as_str).collect();
        if op_names.len() != r || distinct.len() != r {
            return Err(SpaceError::BadOpNames {
                expected: r,
                got: distinct.len().min(op_names.len()),
            });
        }
        Ok(Self { kind, n, r, op_names })
    }

    /// Block-based space with generated operation names `op0..op{r-1}`.
    pub fn block(n: usize, r: usize) -> Result<Self, SpaceError> {
        Self::new(SpaceKind::Block, n, r, default_op_names(r))
    }

    /// Cell-based space with generated operation names.
    pub fn cell(n: usize, r: usize) -> Result<Self, SpaceError> {
        Self::new(SpaceKind::Cell, n, r, default_op_names(r))
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn op_names(&self) -> &[String] {
        &self.op_names
    }

    /// Number of adjacency bits: `n(n-1)/2` for cell spaces, 0 for block.
    pub fn adj_len(&self) -> usize {
        match self.kind {
            SpaceKind::Block => 0,
            SpaceKind::Cell => self.n * (self.n - 1) / 2,
        }
    }

    /// Editable positions: `n` op slots plus the adjacency bits.
    pub fn num_positions(&self) -> usize {
        self.n + self.adj_len()
    }

    /// Length of the one-hot encoding: `n*r` plus the adjacency bits.
    pub fn onehot_len(&self) -> usize {
        self.n * self.r + self.adj_len()
    }

    /// Checks that an architecture is a member of this space.
    pub fn validate(&self, arch: &Architecture) -> Result<(), SpaceError> {
        if arch.ops.len() != self.n {
            return Err(SpaceError::SpecMismatch(format!(
                "expected {} op slots, got {}",
                self.n,
                arch.ops.len()
            )));
        }
        if let Some(bad) = arch.ops.iter().find(|&&v| v >= self.r) {
            return Err(SpaceError::SpecMismatch(format!(
                "op index {bad} out of range 0..{}",
                self.r
            )));
        }
        match (self.kind, &arch.adj) {
            (SpaceKind::Block, None) => Ok(()),
            (SpaceKind::Cell, Some(adj)) if adj.len() == self.adj_len() => Ok(()),
            (SpaceKind::Cell, Some(adj)) => Err(SpaceError::SpecMismatch(format!(
                "expected {} adjacency bits, got {}",
                self.adj_len(),
                adj.len()
            ))),
            (SpaceKind::Block, Some(_)) => Err(SpaceError::SpecMismatch(
                "block architecture carries adjacency bits".into(),
            )),
            (SpaceKind::Cell, None) => Err(SpaceError::SpecMismatch(
                "cell architecture is missing adjacency bits".into(),
            )),
        }
    }
}

fn default_op_names(r: usize) -> Vec<String> {
    (0..r).map(|i| format!("op{i}")).collect()
}

/// A concrete candidate: one operation index per node plus, for cell spaces,
/// the upper-triangle adjacency bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Architecture {
    ops: Vec<usize>,
    adj: Option<Vec<bool>>,
}

impl Architecture {
    pub fn new(
        spec: &SearchSpaceSpec,
        ops: Vec<usize>,
        adj: Option<Vec<bool>>,
    ) -> Result<Self, SpaceError> {
        let arch = Self { ops, adj };
        spec.validate(&arch)?;
        Ok(arch)
    }

    pub(crate) fn new_unchecked(ops: Vec<usize>, adj: Option<Vec<bool>>) -> Self {
        Self { ops, adj }
    }

    pub fn ops(&self) -> &[usize] {
        &self.ops
    }

    pub fn adj(&self) -> Option<&[bool]> {
        self.adj.as_deref()
    }

    pub(crate) fn ops_mut(&mut self) -> &mut [usize] {
        &mut self.ops
    }

    pub(crate) fn adj_mut(&mut self) -> Option<&mut [bool]> {
        self.adj.as_deref_mut()
    }

    /// Canonical string identity: op indices joined by `-`, then for cell
    /// spaces `:` and the adjacency bits as `0`/`1`.
    pub fn key(&self) -> ArchKey {
        let mut s = String::with_capacity(self.ops.len() * 2 + 8);
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                s.push('-');
            }
            s.push_str(&op.to_string());
        }
        if let Some(adj) = &self.adj {
            s.push(':');
            for &b in adj {
                s.push(if b { '1' } else { '0' });
            }
        }
        ArchKey(s)
    }

    /// Parses a canonical key back into an architecture of `spec`.
    pub fn from_key(spec: &SearchSpaceSpec, key: &str) -> Result<Self, SpaceError> {
        let bad = |reason: &str| SpaceError::BadKey {
            key: key.to_string(),
            reason: reason.to_string(),
        };
        let (ops_part, adj_part) = match key.split_once(':') {
            Some((o, a)) => (o, Some(a)),
            None => (key, None),
        };
        let mut ops = Vec::new();
        for tok in ops_part.split('-') {
            let v: usize = tok.parse().map_err(|_| bad("non-numeric op index"))?;
            ops.push(v);
        }
        let adj = match adj_part {
            None => None,
            Some(bits) => {
                let mut v = Vec::with_capacity(bits.len());
                for c in bits.chars() {
                    match c {
                        '0' => v.push(false),
                        '1' => v.push(true),
                        _ => return Err(bad("adjacency bits must be 0 or 1")),
                    }
                }
                Some(v)
            }
        };
        Architecture::new(spec, ops, adj)
    }
}

/// Canonical on-disk identity of an architecture. String-ordered; bijective
/// with valid architectures of a given spec.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArchKey(String);

impl ArchKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArchKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<ArchKey> for String {
    fn from(k: ArchKey) -> String {
        k.0
    }
}

/// `|A|` exactly as the two closed forms give it: `r^n` for block spaces and
/// `n(n-1)/2 * r^n` for cell spaces.
pub fn space_size_paper(spec: &SearchSpaceSpec) -> BigUint {
    let rn = BigUint::from(spec.r).pow(spec.n as u32);
    match spec.kind {
        SpaceKind::Block => rn,
        SpaceKind::Cell => BigUint::from(spec.adj_len()) * rn,
    }
}

/// Count of distinct [`Architecture`] values under this representation:
/// `r^n` for block spaces and `2^(n(n-1)/2) * r^n` for cell spaces. For cell
/// spaces this deviates from [`space_size_paper`]; both are exposed and the
/// discrepancy is left visible rather than resolved.
pub fn space_size_exact(spec: &SearchSpaceSpec) -> BigUint {
    let rn = BigUint::from(spec.r).pow(spec.n as u32);
    match spec.kind {
        SpaceKind::Block => rn,
        SpaceKind::Cell => (BigUint::from(1u8) << spec.adj_len()) * rn,
    }
}

/// Yields every distinct architecture exactly once, sorted by its canonical
/// key string. Fails with `SpaceTooLarge` when the exact size exceeds `limit`.
pub fn enumerate_space(
    spec: &SearchSpaceSpec,
    limit: u64,
) -> Result<Vec<Architecture>, SpaceError> {
    let size = space_size_exact(spec);
    if size > BigUint::from(limit) {
        return Err(SpaceError::SpaceTooLarge { size, limit });
    }
    let mut keyed: Vec<(ArchKey, Architecture)> = Vec::new();
    let mut ops = vec![0usize; spec.n];
    loop {
        match spec.kind {
            SpaceKind::Block => {
                let arch = Architecture::new_unchecked(ops.clone(), None);
                keyed.push((arch.key(), arch));
            }
            SpaceKind::Cell => {
                let mut adj = vec![false; spec.adj_len()];
                loop {
                    let arch = Architecture::new_unchecked(ops.clone(), Some(adj.clone()));
                    keyed.push((arch.key(), arch));
                    if !increment_bits(&mut adj) {
                        break;
                    }
                }
            }
        }
        if !increment_digits(&mut ops, spec.r) {
            break;
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, a)| a).collect())
}

/// Odometer step over base-`r` digits; false when wrapped around.
fn increment_digits(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn increment_bits(bits: &mut [bool]) -> bool {
    for b in bits.iter_mut().rev() {
        *b = !*b;
        if *b {
            return true;
        }
    }
    false
}

/// Draws one architecture uniformly from the space.
pub fn random_architecture<R: Rng + ?Sized>(spec: &SearchSpaceSpec, rng: &mut R) -> Architecture {
    let ops = (0..spec.n).map(|_| rng.random_range(0..spec.r)).collect();
    let adj = match spec.kind {
        SpaceKind::Block => None,
        SpaceKind::Cell => Some(
            (0..spec.adj_len())
                .map(|_| rng.random_range(0..2u8) == 1)
                .collect(),
        ),
    };
    Architecture::new_unchecked(ops, adj)
}

/// All architectures at edit distance exactly `k` from `arch`, each once, in
/// a deterministic order: position combinations in ascending index order,
/// then alternative values per position in ascending order (adjacency
/// positions come after op positions and have a single alternative, the
/// flipped bit).
pub fn neighbors_k(
    spec: &SearchSpaceSpec,
    arch: &Architecture,
    k: usize,
) -> Result<Vec<Architecture>, SpaceError> {
    spec.validate(arch)?;
    let p = spec.num_positions();
    if k < 1 || k > p {
        return Err(SpaceError::InvalidK { k, max: p });
    }
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        emit_edits_for_combo(spec, arch, &combo, &mut out);
        if !advance_combination(&mut combo, p) {
            break;
        }
    }
    Ok(out)
}

/// For one set of edited positions, pushes every assignment of alternative
/// values (odometer order, last position fastest).
fn emit_edits_for_combo(
    spec: &SearchSpaceSpec,
    arch: &Architecture,
    combo: &[usize],
    out: &mut Vec<Architecture>,
) {
    let n = spec.n;
    // alternatives per chosen position
    let alts: Vec<Vec<Alt>> = combo
        .iter()
        .map(|&pos| {
            if pos < n {
                let cur = arch.ops[pos];
                (0..spec.r)
                    .filter(|&v| v != cur)
                    .map(|v| Alt::Op { pos, val: v })
                    .collect()
            } else {
                vec![Alt::Flip { bit: pos - n }]
            }
        })
        .collect();
    let mut idx = vec![0usize; combo.len()];
    loop {
        let mut cand = arch.clone();
        for (slot, &i) in idx.iter().enumerate() {
            match alts[slot][i] {
                Alt::Op { pos, val } => cand.ops_mut()[pos] = val,
                Alt::Flip { bit } => {
                    let adj = cand.adj_mut().expect("cell arch has adjacency");
                    adj[bit] = !adj[bit];
                }
            }
        }
        out.push(cand);
        // odometer over the alternative lists
        let mut carry = true;
        for slot in (0..idx.len()).rev() {
            if !carry {
                break;
            }
            idx[slot] += 1;
            if idx[slot] < alts[slot].len() {
                carry = false;
            } else {
                idx[slot] = 0;
            }
        }
        if carry {
            break;
        }
    }
}

#[derive(Clone, Copy)]
enum Alt {
    Op { pos: usize, val: usize },
    Flip { bit: usize },
}

/// Advances `combo` to the next k-combination of `0..p` in lexicographic
/// order; false when exhausted.
fn advance_combination(combo: &mut [usize], p: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < p - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Draws one neighbor uniformly from the exact-distance-`k` set without
/// materializing it. Uniformity holds because a combination with `j` op
/// edits is chosen with probability proportional to `C(n,j)(r-1)^j C(m,k-j)`,
/// the number of neighbors it accounts for.
pub fn random_neighbor_k<R: Rng + ?Sized>(
    spec: &SearchSpaceSpec,
    arch: &Architecture,
    k: usize,
    rng: &mut R,
) -> Result<Architecture, SpaceError> {
    spec.validate(arch)?;
    let n = spec.n;
    let m = spec.adj_len();
    if k < 1 || k > n + m {
        return Err(SpaceError::InvalidK { k, max: n + m });
    }

    // weight over the number of op edits j
    let j_min = k.saturating_sub(m);
    let j_max = k.min(n);
    let mut weights: Vec<(usize, u128)> = Vec::new();
    let mut total: u128 = 0;
    for j in j_min..=j_max {
        let w = binomial_u128(n, j)
            .and_then(|c| c.checked_mul(pow_u128(spec.r as u128 - 1, j as u32)?))
            .and_then(|c| c.checked_mul(binomial_u128(m, k - j)?))
            .ok_or(SpaceError::NeighborCountOverflow { k })?;
        total = total
            .checked_add(w)
            .ok_or(SpaceError::NeighborCountOverflow { k })?;
        weights.push((j, w));
    }

    let mut pick = rng.random_range(0..total);
    let mut chosen_j = j_max;
    for &(j, w) in &weights {
        if pick < w {
            chosen_j = j;
            break;
        }
        pick -= w;
    }

    let op_positions = sample_distinct(chosen_j, n, rng);
    let adj_positions = sample_distinct(k - chosen_j, m, rng);

    let mut cand = arch.clone();
    for &pos in &op_positions {
        let cur = cand.ops()[pos];
        let alt = rng.random_range(0..spec.r - 1);
        cand.ops_mut()[pos] = if alt >= cur { alt + 1 } else { alt };
    }
    if !adj_positions.is_empty() {
        let adj = cand.adj_mut().expect("cell arch has adjacency");
        for &bit in &adj_positions {
            adj[bit] = !adj[bit];
        }
    }
    Ok(cand)
}

/// `count` distinct indices from `0..upper`, sorted, via partial
/// Fisher-Yates.
fn sample_distinct<R: Rng + ?Sized>(count: usize, upper: usize, rng: &mut R) -> Vec<usize> {
    debug_assert!(count <= upper);
    if count == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..upper).collect();
    for i in 0..count {
        let j = rng.random_range(i..upper);
        idx.swap(i, j);
    }
    let mut out = idx[..count].to_vec();
    out.sort_unstable();
    out
}

fn binomial_u128(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

fn pow_u128(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

/// Binomial coefficient as an arbitrary-precision integer.
pub(crate) fn binomial_biguint(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u8);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u8);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Hamming distance over op slots plus, for cell spaces, adjacency bits.
/// Requires the two architectures to share a spec shape.
pub fn edit_distance(a: &Architecture, b: &Architecture) -> Result<usize, SpaceError> {
    if a.ops.len() != b.ops.len() {
        return Err(SpaceError::SpecMismatch(format!(
            "op slot counts differ: {} vs {}",
            a.ops.len(),
            b.ops.len()
        )));
    }
    let mut d = a
        .ops
        .iter()
        .zip(&b.ops)
        .filter(|(x, y)| x != y)
        .count();
    match (&a.adj, &b.adj) {
        (None, None) => {}
        (Some(x), Some(y)) if x.len() == y.len() => {
            d += x.iter().zip(y).filter(|(p, q)| p != q).count();
        }
        _ => {
            return Err(SpaceError::SpecMismatch(
                "adjacency shapes differ".into(),
            ));
        }
    }
    Ok(d)
}
