//! Delta-accuracy regressors: an exact ridge solution and a small rectifier
//! network, both native, both deterministic given a seed. Also hosts the
//! rank-correlation metric used to evaluate predictors and the
//! loss-vs-edit-distance sweep.

mod mlp;
mod ridge;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

pub use mlp::{HIDDEN_DIMS, MlpModel};
pub use ridge::RidgeModel;

use thiserror::Error;

use crate::dataset::{
    DatasetError, DoaDataset, FeatureMode, aggregate_by_encoding, generate_doa_dataset, split,
};
use crate::encoding::{DiffFeature, OneHotEncoding};
use crate::hash::hash_words;
use crate::oracle::{NoisyProxy, Oracle};

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lists must have equal length, got {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("rank correlation is undefined (constant input or fewer than 2 items)")]
    Undefined,
    #[error("normal equations are singular; increase l2")]
    Singular,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("anchor feature mismatch: model expects anchor={expected}, call passed anchor={got}")]
    AnchorFeatureMismatch { expected: bool, got: bool },
    #[error("gradient check requires an mlp backend")]
    NotMlp,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Ridge,
    Mlp,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Ridge => write!(f, "ridge"),
            Backend::Mlp => write!(f, "mlp"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ridge" => Ok(Backend::Ridge),
            "mlp" => Ok(Backend::Mlp),
            other => Err(format!("unknown backend `{other}`")),
        }
    }
}

/// Training hyperparameters. Loss is mean squared error.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 200, batch_size: 64, learning_rate: 1e-3, l2: 1e-4, seed: 0 }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), PredictorError> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(PredictorError::InvalidConfig(
                "epochs and batch_size must be positive".into(),
            ));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.learning_rate) || !positive(self.l2) {
            return Err(PredictorError::InvalidConfig(
                "learning_rate and l2 must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A fitted feature -> target regressor, independent of how the features
/// were assembled.
#[derive(Debug, Clone, PartialEq)]
pub enum Regressor {
    Ridge(RidgeModel),
    Mlp(MlpModel),
}

impl Regressor {
    pub fn predict(&self, input: &[f64]) -> f64 {
        match self {
            Regressor::Ridge(m) => m.predict(input),
            Regressor::Mlp(m) => m.predict(input),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            Regressor::Ridge(_) => Backend::Ridge,
            Regressor::Mlp(_) => Backend::Mlp,
        }
    }
}

/// Fits a regressor on raw feature rows; returns the model and its final
/// training MSE. This is the shared engine behind delta predictors and the
/// direct (one-hot to accuracy) baseline.
pub fn fit_regressor(
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &TrainConfig,
    backend: Backend,
) -> Result<(Regressor, f64), PredictorError> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(PredictorError::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(PredictorError::LengthMismatch { left: x.len(), right: y.len() });
    }
    let dim = x[0].len();
    if let Some(bad) = x.iter().find(|row| row.len() != dim) {
        return Err(PredictorError::DimensionMismatch { expected: dim, got: bad.len() });
    }
    match backend {
        Backend::Ridge => {
            let model = RidgeModel::fit(x, y, cfg.l2)?;
            let mse = x
                .iter()
                .zip(y)
                .map(|(xi, &yi)| {
                    let e = model.predict(xi) - yi;
                    e * e
                })
                .sum::<f64>()
                / x.len() as f64;
            Ok((Regressor::Ridge(model), mse))
        }
        Backend::Mlp => {
            let (model, mse) = MlpModel::fit(x, y, cfg);
            Ok((Regressor::Mlp(model), mse))
        }
    }
}

/// A delta predictor: a regressor plus the input convention (difference
/// feature alone, or difference feature concatenated after the anchor
/// one-hot).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel {
    pub mode: FeatureMode,
    pub input_dim: usize,
    pub regressor: Regressor,
}

impl PredictorModel {
    pub fn backend(&self) -> Backend {
        self.regressor.backend()
    }

    /// Predicts from a pre-assembled input row.
    pub fn predict_input(&self, input: &[f64]) -> Result<f64, PredictorError> {
        if input.len() != self.input_dim {
            return Err(PredictorError::DimensionMismatch {
                expected: self.input_dim,
                got: input.len(),
            });
        }
        Ok(self.regressor.predict(input))
    }
}

fn assemble_input(
    model_mode: FeatureMode,
    feature: &DiffFeature,
    anchor: Option<&OneHotEncoding>,
) -> Result<Vec<f64>, PredictorError> {
    match (model_mode, anchor) {
        (FeatureMode::DiffOnly, None) => Ok(feature.values.clone()),
        (FeatureMode::DiffPlusAnchor, Some(a)) => {
            let mut input = a.values.clone();
            input.extend_from_slice(&feature.values);
            Ok(input)
        }
        (FeatureMode::DiffOnly, Some(_)) => {
            Err(PredictorError::AnchorFeatureMismatch { expected: false, got: true })
        }
        (FeatureMode::DiffPlusAnchor, None) => {
            Err(PredictorError::AnchorFeatureMismatch { expected: true, got: false })
        }
    }
}

/// Trains a delta predictor on a difference dataset.
pub fn train(
    ds: &DoaDataset,
    cfg: &TrainConfig,
    mode: FeatureMode,
    backend: Backend,
) -> Result<(PredictorModel, f64), PredictorError> {
    if ds.samples.is_empty() {
        return Err(PredictorError::EmptyDataset);
    }
    let mut x = Vec::with_capacity(ds.samples.len());
    let mut y = Vec::with_capacity(ds.samples.len());
    for s in &ds.samples {
        x.push(assemble_input(mode, &s.feature, match mode {
            FeatureMode::DiffOnly => None,
            FeatureMode::DiffPlusAnchor => s.anchor_feature.as_ref(),
        })?);
        y.push(s.delta_acc);
    }
    let input_dim = x[0].len();
    let (regressor, mse) = fit_regressor(&x, &y, cfg, backend)?;
    Ok((PredictorModel { mode, input_dim, regressor }, mse))
}

/// Predicts the accuracy delta of one edit. `anchor` is required exactly
/// when the model was trained in [`FeatureMode::DiffPlusAnchor`].
pub fn predict_delta(
    model: &PredictorModel,
    feature: &DiffFeature,
    anchor: Option<&OneHotEncoding>,
) -> Result<f64, PredictorError> {
    let input = assemble_input(model.mode, feature, anchor)?;
    model.predict_input(&input)
}

/// Evaluates predictions on a dataset; returns (mse, kendall tau).
pub fn evaluate(
    model: &PredictorModel,
    ds: &DoaDataset,
) -> Result<(f64, f64), PredictorError> {
    if ds.samples.is_empty() {
        return Err(PredictorError::EmptyDataset);
    }
    let mut predicted = Vec::with_capacity(ds.samples.len());
    let mut truth = Vec::with_capacity(ds.samples.len());
    for s in &ds.samples {
        let anchor = match model.mode {
            FeatureMode::DiffOnly => None,
            FeatureMode::DiffPlusAnchor => s.anchor_feature.as_ref(),
        };
        predicted.push(predict_delta(model, &s.feature, anchor)?);
        truth.push(s.delta_acc);
    }
    let mse = predicted
        .iter()
        .zip(&truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / truth.len() as f64;
    let tau = kendall_tau(&predicted, &truth)?;
    Ok((mse, tau))
}

/// Tie-corrected Kendall rank correlation (tau-b):
/// `(C - D) / sqrt((n0 - Tx)(n0 - Ty))` with `n0 = n(n-1)/2`, `Tx`/`Ty` the
/// pairs tied in either list. Quadratic in the list length, which is fine at
/// the scales this crate works at.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64, PredictorError> {
    if x.len() != y.len() {
        return Err(PredictorError::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(PredictorError::Undefined);
    }
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut tied_x = 0u64;
    let mut tied_y = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 {
                tied_x += 1;
            }
            if dy == 0.0 {
                tied_y += 1;
            }
            let s = dx * dy;
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let denom = (n0 - tied_x as f64) * (n0 - tied_y as f64);
    if denom <= 0.0 {
        return Err(PredictorError::Undefined);
    }
    let tau = (concordant as f64 - discordant as f64) / denom.sqrt();
    Ok(tau.clamp(-1.0, 1.0))
}

/// Max relative error between the analytic mlp gradient and a central finite
/// difference at step `eps`, on the squared-error loss of one sample.
pub fn grad_check(
    model: &PredictorModel,
    input: &[f64],
    target: f64,
    eps: f64,
) -> Result<f64, PredictorError> {
    if input.len() != model.input_dim {
        return Err(PredictorError::DimensionMismatch {
            expected: model.input_dim,
            got: input.len(),
        });
    }
    match &model.regressor {
        Regressor::Mlp(m) => m.grad_check(input, target, eps),
        Regressor::Ridge(_) => Err(PredictorError::NotMlp),
    }
}

/// One row of the loss-vs-edit-distance sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub test_mse: f64,
    pub test_tau: f64,
}

/// For each `k`, runs generate -> aggregate -> split -> train -> evaluate
/// with identical budgets and reports held-out MSE and tau. This is the
/// experiment showing predictor loss growing once pairs are more than one
/// edit apart.
#[allow(clippy::too_many_arguments)]
pub fn loss_vs_edit_distance<O: Oracle>(
    proxy: &NoisyProxy<O>,
    ks: &[usize],
    anchors_per_k: usize,
    samples_per_encoding: usize,
    train_fraction: f64,
    mode: FeatureMode,
    backend: Backend,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<Vec<SweepRow>, PredictorError> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let gen_seed = hash_words(&[seed, k as u64, 0]);
        let ds = generate_doa_dataset(
            proxy.spec(),
            proxy,
            anchors_per_k,
            k,
            samples_per_encoding,
            gen_seed,
        )?;
        if ds.is_empty() {
            return Err(PredictorError::EmptyDataset);
        }
        let agg = aggregate_by_encoding(&ds, mode);
        let split_seed = hash_words(&[seed, k as u64, 1]);
        let (train_ds, test_ds) = split(&agg, train_fraction, split_seed)?;
        let (model, _) = train(&train_ds, cfg, mode, backend)?;
        let (test_mse, test_tau) = evaluate(&model, &test_ds)?;
        rows.push(SweepRow { k, test_mse, test_tau });
    }
    Ok(rows)
}

impl PredictorModel {
    /// Writes the model in a line-oriented text format with full-precision
    /// decimal weights; loading reproduces predictions bit for bit.
    pub fn save<W: Write>(&self, mut w: W, extra_comments: &[String]) -> Result<(), PredictorError> {
        writeln!(
            w,
            "#predictor backend={} mode={} input_dim={}",
            self.backend(),
            self.mode,
            self.input_dim
        )?;
        for c in extra_comments {
            writeln!(w, "# {c}")?;
        }
        match &self.regressor {
            Regressor::Ridge(m) => {
                writeln!(w, "#ridge l2={}", m.l2)?;
                write!(w, "weights")?;
                for v in &m.weights {
                    write!(w, " {v}")?;
                }
                writeln!(w)?;
                writeln!(w, "bias {}", m.bias)?;
            }
            Regressor::Mlp(m) => {
                let dims: Vec<String> = m.dims.iter().map(|d| d.to_string()).collect();
                writeln!(w, "#mlp dims={}", dims.join(","))?;
                for (l, (wl, bl)) in m.weights.iter().zip(&m.biases).enumerate() {
                    let fan_in = m.dims[l];
                    for (o, row) in wl.chunks(fan_in).enumerate() {
                        write!(w, "w {l} {o}")?;
                        for v in row {
                            write!(w, " {v}")?;
                        }
                        writeln!(w)?;
                    }
                    write!(w, "b {l}")?;
                    for v in bl {
                        write!(w, " {v}")?;
                    }
                    writeln!(w)?;
                }
            }
        }
        Ok(())
    }

    pub fn save_to_path<P: AsRef<Path>>(
        &self,
        path: P,
        extra_comments: &[String],
    ) -> Result<(), PredictorError> {
        let mut f = File::create(path)?;
        self.save(&mut f, extra_comments)
    }

    pub fn load<R: Read>(reader: R) -> Result<PredictorModel, PredictorError> {
        let parse_err = |line: usize, message: String| PredictorError::Parse { line, message };
        let mut header: Option<(Backend, FeatureMode, usize)> = None;
        let mut ridge_l2: Option<f64> = None;
        let mut mlp_dims: Option<Vec<usize>> = None;
        let mut weights: Option<Vec<f64>> = None;
        let mut bias: Option<f64> = None;
        let mut mlp_w: Vec<Vec<f64>> = Vec::new();
        let mut mlp_b: Vec<Vec<f64>> = Vec::new();

        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix("#predictor") {
                let mut backend = None;
                let mut mode = None;
                let mut input_dim = None;
                for tok in rest.split_whitespace() {
                    let (k, v) = tok
                        .split_once('=')
                        .ok_or_else(|| parse_err(line_no, format!("bad token `{tok}`")))?;
                    match k {
                        "backend" => backend = Some(v.parse().map_err(|e| parse_err(line_no, e))?),
                        "mode" => mode = Some(v.parse().map_err(|e| parse_err(line_no, e))?),
                        "input_dim" => {
                            input_dim = Some(v.parse().map_err(|_| {
                                parse_err(line_no, format!("bad input_dim `{v}`"))
                            })?)
                        }
                        other => {
                            return Err(parse_err(line_no, format!("unknown field `{other}`")));
                        }
                    }
                }
                header = Some((
                    backend.ok_or_else(|| parse_err(line_no, "missing backend".into()))?,
                    mode.ok_or_else(|| parse_err(line_no, "missing mode".into()))?,
                    input_dim.ok_or_else(|| parse_err(line_no, "missing input_dim".into()))?,
                ));
            } else if let Some(rest) = t.strip_prefix("#ridge") {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("l2=") {
                        ridge_l2 = Some(v.parse().map_err(|_| {
                            parse_err(line_no, format!("bad l2 `{v}`"))
                        })?);
                    }
                }
            } else if let Some(rest) = t.strip_prefix("#mlp") {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("dims=") {
                        let dims: Result<Vec<usize>, _> =
                            v.split(',').map(|d| d.parse::<usize>()).collect();
                        let dims = dims
                            .map_err(|_| parse_err(line_no, format!("bad dims `{v}`")))?;
                        mlp_w = dims
                            .windows(2)
                            .map(|pair| Vec::with_capacity(pair[0] * pair[1]))
                            .collect();
                        mlp_b = dims[1..].iter().map(|&d| Vec::with_capacity(d)).collect();
                        mlp_dims = Some(dims);
                    }
                }
            } else if t.starts_with('#') {
                continue;
            } else if let Some(rest) = t.strip_prefix("weights") {
                let ws: Result<Vec<f64>, _> =
                    rest.split_whitespace().map(str::parse::<f64>).collect();
                weights =
                    Some(ws.map_err(|_| parse_err(line_no, "bad weight value".into()))?);
            } else if let Some(rest) = t.strip_prefix("bias") {
                bias = Some(rest.trim().parse().map_err(|_| {
                    parse_err(line_no, "bad bias value".into())
                })?);
            } else if let Some(rest) = t.strip_prefix("w ") {
                let mut toks = rest.split_whitespace();
                let l: usize = toks
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "bad layer index".into()))?;
                let _row: usize = toks
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "bad row index".into()))?;
                let layer = mlp_w
                    .get_mut(l)
                    .ok_or_else(|| parse_err(line_no, format!("layer {l} out of range")))?;
                for v in toks {
                    layer.push(v.parse().map_err(|_| {
                        parse_err(line_no, "bad weight value".into())
                    })?);
                }
            } else if let Some(rest) = t.strip_prefix("b ") {
                let mut toks = rest.split_whitespace();
                let l: usize = toks
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "bad layer index".into()))?;
                let layer = mlp_b
                    .get_mut(l)
                    .ok_or_else(|| parse_err(line_no, format!("layer {l} out of range")))?;
                for v in toks {
                    layer.push(v.parse().map_err(|_| {
                        parse_err(line_no, "bad bias value".into())
                    })?);
                }
            } else {
                return Err(parse_err(line_no, format!("unrecognized line `{t}`")));
            }
        }

        let (backend, mode, input_dim) =
            header.ok_or_else(|| parse_err(0, "missing #predictor header".into()))?;
        let regressor = match backend {
            Backend::Ridge => {
                let weights = weights.ok_or_else(|| parse_err(0, "missing weights".into()))?;
                if weights.len() != input_dim {
                    return Err(parse_err(0, "weight count does not match input_dim".into()));
                }
                Regressor::Ridge(RidgeModel {
                    weights,
                    bias: bias.ok_or_else(|| parse_err(0, "missing bias".into()))?,
                    l2: ridge_l2.ok_or_else(|| parse_err(0, "missing #ridge header".into()))?,
                })
            }
            Backend::Mlp => {
                let dims = mlp_dims.ok_or_else(|| parse_err(0, "missing #mlp header".into()))?;
                if dims.first() != Some(&input_dim) {
                    return Err(parse_err(0, "dims do not match input_dim".into()));
                }
                for (l, pair) in dims.windows(2).enumerate() {
                    if mlp_w[l].len() != pair[0] * pair[1] {
                        return Err(parse_err(0, format!("layer {l} weight count wrong")));
                    }
                    if mlp_b[l].len() != pair[1] {
                        return Err(parse_err(0, format!("layer {l} bias count wrong")));
                    }
                }
                Regressor::Mlp(MlpModel { dims, weights: mlp_w, biases: mlp_b })
            }
        };
        Ok(PredictorModel { mode, input_dim, regressor })
    }

    pub fn load_from_path<P: AsRef<Path>>(path: P) -> Result<PredictorModel, PredictorError> {
        Self::load(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_doa_dataset;
    use crate::hash::rng_from_words;
    use crate::oracle::SyntheticLandscape;
    use crate::space::SearchSpaceSpec;
    use rand::Rng;

    fn proxy(n: usize, r: usize, sigma: f64, w: f64) -> NoisyProxy<SyntheticLandscape> {
        let spec = SearchSpaceSpec::block(n, r).unwrap();
        let ls = SyntheticLandscape::new(spec, 101, w).unwrap();
        NoisyProxy::new(ls, sigma, 102).unwrap()
    }

    #[test]
    fn ridge_is_exact_on_an_additive_landscape() {
        // pair_weight 0 and sigma 0 make the delta an exactly linear
        // function of the difference feature
        let p = proxy(8, 3, 0.0, 0.0);
        let ds = generate_doa_dataset(p.spec(), &p, 300, 1, 1, 7).unwrap();
        let cfg = TrainConfig { l2: 1e-9, ..Default::default() };
        let (_, mse) = train(&ds, &cfg, FeatureMode::DiffOnly, Backend::Ridge).unwrap();
        assert!(mse < 1e-10, "training mse {mse}");
    }

    #[test]
    fn mlp_training_is_bitwise_deterministic() {
        let p = proxy(5, 3, 0.02, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 60, 1, 2, 9).unwrap();
        let cfg = TrainConfig { epochs: 30, ..Default::default() };
        let (m1, l1) = train(&ds, &cfg, FeatureMode::DiffOnly, Backend::Mlp).unwrap();
        let (m2, l2) = train(&ds, &cfg, FeatureMode::DiffOnly, Backend::Mlp).unwrap();
        assert_eq!(l1.to_bits(), l2.to_bits());
        match (&m1.regressor, &m2.regressor) {
            (Regressor::Mlp(a), Regressor::Mlp(b)) => {
                for (wa, wb) in a.weights.iter().zip(&b.weights) {
                    for (va, vb) in wa.iter().zip(wb) {
                        assert_eq!(va.to_bits(), vb.to_bits());
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn single_sample_ridge_predicts_it_exactly() {
        let p = proxy(4, 3, 0.0, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 1, 1, 1, 11).unwrap();
        let (model, _) =
            train(&ds, &TrainConfig::default(), FeatureMode::DiffOnly, Backend::Ridge).unwrap();
        let s = &ds.samples[0];
        let pred = predict_delta(&model, &s.feature, None).unwrap();
        assert!((pred - s.delta_acc).abs() < 1e-12);
    }

    #[test]
    fn zero_feature_predicts_the_ridge_bias() {
        let p = proxy(5, 3, 0.01, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 50, 1, 1, 13).unwrap();
        let (model, _) =
            train(&ds, &TrainConfig::default(), FeatureMode::DiffOnly, Backend::Ridge).unwrap();
        let zero = DiffFeature { values: vec![0.0; model.input_dim] };
        let pred = predict_delta(&model, &zero, None).unwrap();
        match &model.regressor {
            Regressor::Ridge(m) => assert_eq!(pred.to_bits(), m.bias.to_bits()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn ridge_prediction_matches_manual_dot_product() {
        let p = proxy(5, 3, 0.01, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 80, 1, 1, 15).unwrap();
        let (model, _) =
            train(&ds, &TrainConfig::default(), FeatureMode::DiffOnly, Backend::Ridge).unwrap();
        let (weights, bias) = match &model.regressor {
            Regressor::Ridge(m) => (m.weights.clone(), m.bias),
            _ => unreachable!(),
        };
        let mut rng = rng_from_words(&[17]);
        for _ in 0..10 {
            let feature = DiffFeature {
                values: (0..model.input_dim)
                    .map(|_| [-1.0, 0.0, 1.0][rng.random_range(0..3)])
                    .collect(),
            };
            let manual: f64 = weights
                .iter()
                .zip(&feature.values)
                .map(|(w, x)| w * x)
                .sum::<f64>()
                + bias;
            let pred = predict_delta(&model, &feature, None).unwrap();
            assert!((pred - manual).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetrized_training_gives_an_antisymmetric_predictor() {
        let p = proxy(6, 3, 0.0, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 150, 1, 1, 19)
            .unwrap()
            .symmetrize()
            .unwrap();
        for backend in [Backend::Ridge, Backend::Mlp] {
            let cfg = TrainConfig {
                epochs: 600,
                batch_size: 32,
                learning_rate: 1e-2,
                ..Default::default()
            };
            let (model, _) = train(&ds, &cfg, FeatureMode::DiffOnly, backend).unwrap();
            for s in ds.samples.iter().step_by(7).take(30) {
                let f = &s.feature;
                let neg = DiffFeature { values: f.values.iter().map(|v| -v).collect() };
                let fwd = predict_delta(&model, f, None).unwrap();
                let bwd = predict_delta(&model, &neg, None).unwrap();
                assert!(
                    (fwd + bwd).abs() < 1e-2,
                    "{backend}: predict(f)={fwd}, predict(-f)={bwd}"
                );
            }
        }
    }

    #[test]
    fn diff_plus_anchor_mode_requires_the_anchor() {
        let p = proxy(4, 3, 0.0, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 30, 1, 1, 21).unwrap();
        let (model, _) = train(
            &ds,
            &TrainConfig::default(),
            FeatureMode::DiffPlusAnchor,
            Backend::Ridge,
        )
        .unwrap();
        assert_eq!(model.input_dim, 2 * p.spec().onehot_len());
        let s = &ds.samples[0];
        assert!(matches!(
            predict_delta(&model, &s.feature, None),
            Err(PredictorError::AnchorFeatureMismatch { .. })
        ));
        let ok = predict_delta(&model, &s.feature, s.anchor_feature.as_ref());
        assert!(ok.is_ok());
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let p = proxy(4, 3, 0.0, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 0, 1, 1, 23).unwrap();
        assert!(matches!(
            train(&ds, &TrainConfig::default(), FeatureMode::DiffOnly, Backend::Ridge),
            Err(PredictorError::EmptyDataset)
        ));
    }

    #[test]
    fn ridge_and_mlp_agree_on_linear_noiseless_data() {
        let p = proxy(6, 3, 0.0, 0.0);
        let ds = generate_doa_dataset(p.spec(), &p, 250, 1, 1, 25).unwrap();
        let ridge_cfg = TrainConfig { l2: 1e-8, ..Default::default() };
        let (ridge, _) = train(&ds, &ridge_cfg, FeatureMode::DiffOnly, Backend::Ridge).unwrap();
        let mlp_cfg = TrainConfig {
            epochs: 600,
            batch_size: 32,
            learning_rate: 5e-3,
            l2: 1e-8,
            seed: 1,
        };
        let (mlp, _) = train(&ds, &mlp_cfg, FeatureMode::DiffOnly, Backend::Mlp).unwrap();
        let mut disagreement = 0.0;
        for s in &ds.samples {
            let a = predict_delta(&ridge, &s.feature, None).unwrap();
            let b = predict_delta(&mlp, &s.feature, None).unwrap();
            disagreement += (a - b) * (a - b);
        }
        disagreement /= ds.len() as f64;
        assert!(disagreement < 1e-3, "backends disagree, mse {disagreement}");
    }

    #[test]
    fn kendall_tau_reference_values() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        // 4 items: 5 concordant pairs, 1 discordant
        let tau = kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((tau - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn kendall_tau_error_cases() {
        assert!(matches!(
            kendall_tau(&[1.0, 2.0], &[1.0]),
            Err(PredictorError::LengthMismatch { .. })
        ));
        assert!(matches!(
            kendall_tau(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(PredictorError::Undefined)
        ));
        assert!(matches!(kendall_tau(&[], &[]), Err(PredictorError::Undefined)));
    }

    #[test]
    fn kendall_tau_is_invariant_under_monotone_transforms() {
        let mut rng = rng_from_words(&[27]);
        let x: Vec<f64> = (0..60).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..60).map(|_| rng.random_range(-2.0..2.0)).collect();
        let base = kendall_tau(&x, &y).unwrap();
        let x_exp: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let y_affine: Vec<f64> = y.iter().map(|v| 3.0 * v + 10.0).collect();
        assert!((kendall_tau(&x_exp, &y).unwrap() - base).abs() < 1e-12);
        assert!((kendall_tau(&x, &y_affine).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn grad_check_requires_mlp() {
        let p = proxy(4, 3, 0.0, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 20, 1, 1, 29).unwrap();
        let (ridge, _) =
            train(&ds, &TrainConfig::default(), FeatureMode::DiffOnly, Backend::Ridge).unwrap();
        assert!(matches!(
            grad_check(&ridge, &vec![0.0; ridge.input_dim][..], 0.0, 1e-5),
            Err(PredictorError::NotMlp)
        ));
    }

    #[test]
    fn sweep_produces_one_row_per_k_and_rejects_empty_budgets() {
        let p = proxy(6, 3, 0.02, 0.4);
        let cfg = TrainConfig::default();
        let rows = loss_vs_edit_distance(
            &p,
            &[1, 2, 3],
            120,
            2,
            0.8,
            FeatureMode::DiffOnly,
            Backend::Ridge,
            &cfg,
            31,
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(matches!(
            loss_vs_edit_distance(
                &p,
                &[1],
                0,
                2,
                0.8,
                FeatureMode::DiffOnly,
                Backend::Ridge,
                &cfg,
                31,
            ),
            Err(PredictorError::EmptyDataset)
        ));
    }

    #[test]
    fn model_files_reproduce_predictions_bitwise() {
        let p = proxy(5, 3, 0.02, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 60, 1, 2, 33).unwrap();
        for backend in [Backend::Ridge, Backend::Mlp] {
            let cfg = TrainConfig { epochs: 20, ..Default::default() };
            let (model, _) = train(&ds, &cfg, FeatureMode::DiffOnly, backend).unwrap();
            let mut buf = Vec::new();
            model.save(&mut buf, &["round trip".into()]).unwrap();
            let loaded = PredictorModel::load(&buf[..]).unwrap();
            assert_eq!(loaded.mode, model.mode);
            assert_eq!(loaded.input_dim, model.input_dim);
            for s in &ds.samples {
                let a = predict_delta(&model, &s.feature, None).unwrap();
                let b = predict_delta(&loaded, &s.feature, None).unwrap();
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn training_does_not_mutate_the_dataset() {
        let p = proxy(4, 3, 0.01, 0.4);
        let ds = generate_doa_dataset(p.spec(), &p, 30, 1, 2, 35).unwrap();
        let before: Vec<u64> = ds.samples.iter().map(|s| s.delta_acc.to_bits()).collect();
        let _ = train(&ds, &TrainConfig::default(), FeatureMode::DiffOnly, Backend::Ridge);
        let after: Vec<u64> = ds.samples.iter().map(|s| s.delta_acc.to_bits()).collect();
        assert_eq!(before, after);
    }
}
