//! Pipeline stages behind the subcommands. Every stage reads its inputs from
//! the output directory, writes its artifacts there, and stamps them with
//! the configuration hash.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result, anyhow, bail};

use deltanas::dataset::{DoaDataset, aggregate_by_encoding, generate_doa_dataset};
use deltanas::oracle::{
    NoisyProxy, Oracle, SyntheticLandscape, best_in_space, load_tabular,
};
use deltanas::predictor::{PredictorModel, loss_vs_edit_distance, train};
use deltanas::search::{
    Comparison, ModelDeltaPredictor, SearchMethod, SearchTrace, compare_searchers,
    delta_nas_search, random_search, regularized_evolution,
};
use deltanas::space::Architecture;

use crate::config::LoadedConfig;

pub const DATASET_FILE: &str = "dataset.txt";
pub const MODEL_FILE: &str = "model.txt";
pub const TRACE_FILE: &str = "search_trace.csv";
pub const COMPARE_SUMMARY_FILE: &str = "compare_summary.csv";
pub const COMPARE_TRACES_FILE: &str = "compare_traces.csv";
pub const SWEEP_FILE: &str = "sweep_k.csv";

pub fn out_path(loaded: &LoadedConfig, file: &str) -> PathBuf {
    Path::new(&loaded.config.output.dir).join(file)
}

/// Refuses to clobber an existing artifact unless `--force` was given.
fn guard_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        bail!(
            "`{}` already exists; pass --force to overwrite",
            path.display()
        );
    }
    Ok(())
}

fn require_artifact(path: &Path, producing_command: &str) -> Result<()> {
    if !path.exists() {
        bail!(
            "missing `{}`; run `{producing_command}` first",
            path.display()
        );
    }
    Ok(())
}

pub fn build_true_oracle(loaded: &LoadedConfig) -> Result<Box<dyn Oracle>> {
    let spec = loaded.config.space.build()?;
    let section = &loaded.config.oracle;
    match section.kind.as_str() {
        "synthetic" => Ok(Box::new(SyntheticLandscape::new(
            spec,
            section.seed,
            section.pair_weight,
        )?)),
        "tabular" => {
            let path = section
                .path
                .as_ref()
                .ok_or_else(|| anyhow!("oracle.kind = \"tabular\" needs oracle.path"))?;
            let bench = load_tabular(path)
                .with_context(|| format!("cannot load benchmark `{path}`"))?;
            if bench.spec() != &spec {
                bail!("benchmark spec in `{path}` does not match [space]");
            }
            Ok(Box::new(bench))
        }
        other => bail!("unknown oracle kind `{other}`"),
    }
}

pub fn build_proxy(loaded: &LoadedConfig) -> Result<NoisyProxy<Box<dyn Oracle>>> {
    let oracle = build_true_oracle(loaded)?;
    Ok(NoisyProxy::new(
        oracle,
        loaded.config.oracle.sigma,
        loaded.config.oracle.proxy_seed,
    )?)
}

fn ensure_out_dir(loaded: &LoadedConfig) -> Result<()> {
    fs::create_dir_all(&loaded.config.output.dir).with_context(|| {
        format!("cannot create output directory `{}`", loaded.config.output.dir)
    })
}

pub struct DatasetStats {
    pub samples: usize,
    pub diff_groups: usize,
    pub pair_groups: usize,
    pub path: PathBuf,
}

/// `gen-dataset`: sample pairs, measure deltas, write the dataset file.
pub fn run_gen_dataset(loaded: &LoadedConfig, force: bool) -> Result<DatasetStats> {
    let section = loaded
        .config
        .dataset
        .as_ref()
        .ok_or_else(|| anyhow!("config has no [dataset] section"))?;
    let spec = loaded.config.space.build()?;
    let proxy = build_proxy(loaded)?;
    let mut ds = generate_doa_dataset(
        &spec,
        &proxy,
        section.num_anchors,
        section.k,
        section.samples_per_encoding,
        section.seed,
    )?;
    if section.symmetrize {
        ds = ds.symmetrize()?;
    }
    ensure_out_dir(loaded)?;
    let path = out_path(loaded, DATASET_FILE);
    guard_overwrite(&path, force)?;
    ds.save_to_path(&path, &loaded.stamp())?;
    let diff_groups = aggregate_by_encoding(&ds, deltanas::dataset::FeatureMode::DiffOnly).len();
    let pair_groups =
        aggregate_by_encoding(&ds, deltanas::dataset::FeatureMode::DiffPlusAnchor).len();
    Ok(DatasetStats { samples: ds.len(), diff_groups, pair_groups, path })
}

pub struct TrainStats {
    pub training_mse: f64,
    pub samples: usize,
    pub groups: usize,
    pub input_dim: usize,
    pub path: PathBuf,
}

/// `train`: aggregate the stored dataset by the predictor's feature mode and
/// fit the model.
pub fn run_train(loaded: &LoadedConfig, force: bool) -> Result<TrainStats> {
    let section = loaded
        .config
        .predictor
        .as_ref()
        .ok_or_else(|| anyhow!("config has no [predictor] section"))?;
    let dataset_path = out_path(loaded, DATASET_FILE);
    require_artifact(&dataset_path, "gen-dataset")?;
    let ds = DoaDataset::load_from_path(&dataset_path)
        .with_context(|| format!("cannot load `{}`", dataset_path.display()))?;
    let mode = section.mode()?;
    let backend = section.backend()?;
    let aggregated = aggregate_by_encoding(&ds, mode);
    let (model, mse) = train(&aggregated, &section.train_config(), mode, backend)?;
    ensure_out_dir(loaded)?;
    let path = out_path(loaded, MODEL_FILE);
    guard_overwrite(&path, force)?;
    model.save_to_path(&path, &loaded.stamp())?;
    Ok(TrainStats {
        training_mse: mse,
        samples: ds.len(),
        groups: aggregated.len(),
        input_dim: model.input_dim,
        path,
    })
}

pub struct SearchStats {
    pub algorithm: String,
    pub best_key: String,
    pub best_score: f64,
    pub oracle_queries: u64,
    pub predictor_queries: u64,
    pub path: PathBuf,
}

/// `search`: run the configured algorithm and write its trace CSV.
pub fn run_search(loaded: &LoadedConfig, force: bool) -> Result<SearchStats> {
    let section = loaded
        .config
        .search
        .as_ref()
        .ok_or_else(|| anyhow!("config has no [search] section"))?;
    let spec = loaded.config.space.build()?;
    let oracle = build_true_oracle(loaded)?;
    let optimum = find_optimum(section.optimum_enumeration_limit, &oracle)?;

    let (best, trace): (Architecture, SearchTrace) = match section.algorithm.as_str() {
        "delta_nas" => {
            let model_path = out_path(loaded, MODEL_FILE);
            require_artifact(&model_path, "train")?;
            let model = PredictorModel::load_from_path(&model_path)
                .with_context(|| format!("cannot load `{}`", model_path.display()))?;
            let predictor = ModelDeltaPredictor { spec: &spec, model: &model };
            delta_nas_search(
                &spec,
                &predictor,
                &oracle,
                &section.search_config()?,
                optimum.as_ref().map(|(a, _)| a),
            )?
        }
        "random" => random_search(
            &spec,
            &oracle,
            section.budget,
            section.seed,
            optimum.as_ref().map(|(a, _)| a),
        )?,
        "regularized_evolution" => regularized_evolution(
            &spec,
            &oracle,
            &section.regevo_config(),
            optimum.as_ref().map(|(a, _)| a),
        )?,
        other => bail!("unknown search algorithm `{other}`"),
    };

    ensure_out_dir(loaded)?;
    let path = out_path(loaded, TRACE_FILE);
    guard_overwrite(&path, force)?;
    let file = fs::File::create(&path)?;
    trace.write_csv(file, &loaded.stamp())?;
    let best_score = oracle.score(&best)?;
    Ok(SearchStats {
        algorithm: section.algorithm.clone(),
        best_key: best.key().to_string(),
        best_score,
        oracle_queries: trace.final_oracle_queries(),
        predictor_queries: trace.final_predictor_queries(),
        path,
    })
}

fn find_optimum(
    limit: Option<u64>,
    oracle: &dyn Oracle,
) -> Result<Option<(Architecture, f64)>> {
    match limit {
        None => Ok(None),
        Some(limit) => Ok(Some(best_in_space(oracle, limit)?)),
    }
}

pub struct CompareStats {
    pub comparison: Comparison,
    pub summary_path: PathBuf,
    pub traces_path: PathBuf,
}

/// `compare`: run every configured method over the seed list and write the
/// summary and aligned-trace CSVs.
pub fn run_compare(loaded: &LoadedConfig, force: bool) -> Result<CompareStats> {
    let section = loaded
        .config
        .compare
        .as_ref()
        .ok_or_else(|| anyhow!("config has no [compare] section"))?;
    let search_section = loaded
        .config
        .search
        .as_ref()
        .ok_or_else(|| anyhow!("[compare] needs the [search] section for per-method settings"))?;
    let spec = loaded.config.space.build()?;
    let oracle = build_true_oracle(loaded)?;

    // a delta_nas entry needs the trained model, loaded once
    let model: Option<PredictorModel> = if section.methods.iter().any(|m| m == "delta_nas") {
        let model_path = out_path(loaded, MODEL_FILE);
        require_artifact(&model_path, "train")?;
        Some(
            PredictorModel::load_from_path(&model_path)
                .with_context(|| format!("cannot load `{}`", model_path.display()))?,
        )
    } else {
        None
    };
    let predictor = model
        .as_ref()
        .map(|m| ModelDeltaPredictor { spec: &spec, model: m });

    let mut methods: Vec<(String, SearchMethod)> = Vec::new();
    for name in &section.methods {
        let method = match name.as_str() {
            "delta_nas" => SearchMethod::DeltaNas {
                predictor: predictor.as_ref().expect("loaded above"),
                cfg: search_section.search_config()?,
            },
            "random" => SearchMethod::Random { budget: search_section.budget },
            "regularized_evolution" => {
                SearchMethod::RegularizedEvolution { cfg: search_section.regevo_config() }
            }
            other => bail!("unknown compare method `{other}`"),
        };
        methods.push((name.clone(), method));
    }

    let comparison = compare_searchers(
        &spec,
        &oracle,
        &methods,
        &section.seeds,
        section.epsilon_frac,
        section.enumeration_limit,
    )?;

    ensure_out_dir(loaded)?;
    let summary_path = out_path(loaded, COMPARE_SUMMARY_FILE);
    let traces_path = out_path(loaded, COMPARE_TRACES_FILE);
    guard_overwrite(&summary_path, force)?;
    guard_overwrite(&traces_path, force)?;
    comparison.write_summary_csv(fs::File::create(&summary_path)?, &loaded.stamp())?;
    comparison.write_traces_csv(fs::File::create(&traces_path)?, &loaded.stamp())?;
    Ok(CompareStats { comparison, summary_path, traces_path })
}

pub struct SweepStats {
    pub rows: Vec<deltanas::predictor::SweepRow>,
    pub path: PathBuf,
}

/// `sweep-k`: the loss-vs-edit-distance experiment.
pub fn run_sweep(loaded: &LoadedConfig, force: bool) -> Result<SweepStats> {
    let section = loaded
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| anyhow!("config has no [sweep] section"))?;
    let predictor_section = loaded
        .config
        .predictor
        .as_ref()
        .ok_or_else(|| anyhow!("[sweep] needs the [predictor] section"))?;
    let proxy = build_proxy(loaded)?;
    let rows = loss_vs_edit_distance(
        &proxy,
        &section.ks,
        section.anchors_per_k,
        section.samples_per_encoding,
        section.train_fraction,
        predictor_section.mode()?,
        predictor_section.backend()?,
        &predictor_section.train_config(),
        section.seed,
    )?;
    ensure_out_dir(loaded)?;
    let path = out_path(loaded, SWEEP_FILE);
    guard_overwrite(&path, force)?;
    let mut out = String::new();
    for c in loaded.stamp() {
        out.push_str(&format!("#{c}\n"));
    }
    out.push_str("k,test_mse,test_tau\n");
    for row in &rows {
        out.push_str(&format!("{},{},{}\n", row.k, row.test_mse, row.test_tau));
    }
    fs::write(&path, out)?;
    Ok(SweepStats { rows, path })
}
