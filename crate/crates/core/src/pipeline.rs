//! End-to-end runs: load, preprocess, generate, hybridize, calibrate and
//! evaluate. Every command writes its outputs plus a run manifest listing them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate, CalibrationConfig, CalibrationMethod, CalibrationResult};
use crate::data::{
    load_csv, prepare, read_csv, write_csv_to, ImputeStrategy, Prepared, Schema, Table,
};
use crate::error::{Error, Result};
use crate::generators::{generate_bundle, GeneratorBundle, GeneratorConfig};
use crate::matrix::Matrix;
use crate::metrics::distance::{mean_ks, mean_wd};
use crate::metrics::fidelity::correlation_matrix;
use crate::metrics::projection::{export_histograms, pca_project};
use crate::metrics::report::{evaluate, EvaluationReport};
use crate::metrics::utility::ClassifierConfig;
use crate::rl::{combine_hybrid, train_weights, PolicySettings, TrainedWeights};
use crate::rng::{derive, stage};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const HYBRID_FILE: &str = "hybrid.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub pca: bool,
    pub pca_components: usize,
    pub histograms: bool,
    pub histogram_bins: usize,
    pub correlations: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            pca: true,
            pca_components: 2,
            histograms: true,
            histogram_bins: 20,
            correlations: true,
        }
    }
}

/// JSON run configuration. Relative `dataset` and `input` paths are resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset: PathBuf,
    pub target: String,
    pub missing_token: String,
    pub test_fraction: f64,
    pub seed: u64,
    pub impute: ImputeStrategy,
    pub generators: GeneratorConfig,
    pub rl: PolicySettings,
    pub calibration: CalibrationConfig,
    pub classifier: ClassifierConfig,
    pub metrics: MetricsConfig,
    /// Synthetic CSV read by `calibrate` and `evaluate`. Defaults to the file
    /// the previous stage writes into `out_dir`.
    pub input: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub out_dir: PathBuf,
    /// Record per-stage wall times in the manifest. Off by default so that
    /// repeated runs produce identical output trees.
    pub record_timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            target: String::new(),
            missing_token: String::new(),
            test_fraction: 0.2,
            seed: 42,
            impute: ImputeStrategy::Mean,
            generators: GeneratorConfig::default(),
            rl: PolicySettings::default(),
            calibration: CalibrationConfig::default(),
            classifier: ClassifierConfig::default(),
            metrics: MetricsConfig::default(),
            input: None,
            out_dir: PathBuf::from("out"),
            record_timings: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if config.dataset.is_relative() && !config.dataset.as_os_str().is_empty() {
            config.dataset = base.join(&config.dataset);
        }
        if let Some(input) = config.input.as_mut() {
            if input.is_relative() {
                *input = base.join(&*input);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset.as_os_str().is_empty() {
            return Err(Error::Config("`dataset` is required".into()));
        }
        if self.target.is_empty() {
            return Err(Error::Config("`target` is required".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if !self.dataset.is_file() {
            return Err(Error::io(
                &self.dataset,
                std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found"),
            ));
        }
        Ok(())
    }
}

/// Which data a stage read. Generation and calibration never see the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub reads: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: PipelineConfig,
    pub seeds: BTreeMap<String, u64>,
    pub stages: Vec<StageRecord>,
    pub warnings: Vec<String>,
    /// Paths relative to the output directory, each listed once.
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub wd: f64,
    pub ks: f64,
    pub nnaa: f64,
    pub accuracy: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRow {
    pub method: String,
    pub column_shapes: f64,
    pub pair_trends: f64,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub method: CalibrationMethod,
    pub per_feature_alpha: Vec<f64>,
    pub alpha_trace: Vec<f64>,
    pub wd_trace: Vec<f64>,
    pub degenerate_features: Vec<usize>,
    pub mean_wd_before: f64,
    pub mean_wd_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsSummary {
    pub generators: Vec<String>,
    pub weights: Vec<f64>,
    pub final_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSummary {
    pub name: String,
    pub mean_wd: f64,
    pub mean_ks: f64,
}

/// Normalized hybrid plus everything that produced it.
#[derive(Debug, Clone)]
pub struct HybridRun {
    pub bundle: GeneratorBundle,
    pub trained: TrainedWeights,
    pub hybrid: Matrix,
}

struct Run<'a> {
    command: &'static str,
    config: &'a PipelineConfig,
    out: PathBuf,
    outputs: Vec<String>,
    stages: Vec<StageRecord>,
    warnings: Vec<String>,
}

impl<'a> Run<'a> {
    fn new(command: &'static str, config: &'a PipelineConfig) -> Result<Self> {
        let out = config.out_dir.clone();
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Self {
            command,
            config,
            out,
            outputs: Vec::new(),
            stages: Vec::new(),
            warnings: Vec::new(),
        })
    }

    fn stage<T>(
        &mut self,
        name: &'static str,
        reads: &[&str],
        seed: Option<u64>,
        f: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        let start = Instant::now();
        let value = f().map_err(|e| e.in_stage(name))?;
        self.stages.push(StageRecord {
            stage: name.to_string(),
            reads: reads.iter().map(|s| s.to_string()).collect(),
            seed,
            wall_seconds: self
                .config
                .record_timings
                .then(|| start.elapsed().as_secs_f64()),
        });
        Ok(value)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::InvalidInput(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn write_rows(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Csv {
            path: name.into(),
            message: e.to_string(),
        };
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row).map_err(err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("cannot write {name}: {e}")))?;
        self.write(name, &bytes)
    }

    fn write_table(
        &mut self,
        name: &str,
        schema: &Schema,
        features: &Matrix,
        labels: &[usize],
    ) -> Result<()> {
        let mut buf = Vec::new();
        write_csv_to(&mut buf, schema, features, labels)?;
        self.write(name, &buf)
    }

    fn finish(mut self) -> Result<RunManifest> {
        let seed = self.config.seed;
        let seeds = [
            ("master", seed),
            ("split", derive(seed, stage::SPLIT)),
            ("noise", derive(seed, stage::NOISE)),
            ("interpolation", derive(seed, stage::INTERPOLATION)),
            ("gmm", derive(seed, stage::GMM)),
            ("cvae", derive(seed, stage::CVAE)),
            ("smote", derive(seed, stage::SMOTE)),
            ("policy", derive(seed, stage::POLICY)),
            ("nnaa", derive(seed, stage::NNAA)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        self.outputs.push(MANIFEST_FILE.to_string());
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.config.clone(),
            seeds,
            stages: std::mem::take(&mut self.stages),
            warnings: std::mem::take(&mut self.warnings),
            outputs: self.outputs.clone(),
        };
        self.write_json(MANIFEST_FILE, &manifest)?;
        Ok(manifest)
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Loads the dataset, splits, imputes and normalizes it.
pub fn load_prepared(config: &PipelineConfig) -> Result<Prepared> {
    config.validate()?;
    let (raw, schema) = load_csv(&config.dataset, &config.target, &config.missing_token)?;
    prepare(
        &raw,
        schema,
        config.test_fraction,
        config.impute,
        derive(config.seed, stage::SPLIT),
    )
}

fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence(format!(
            "{what} contains non-finite values"
        )))
    }
}

/// Runs the five generators on the normalized training split and learns the
/// mixture weights.
pub fn build_hybrid(prepared: &Prepared, config: &PipelineConfig) -> Result<HybridRun> {
    let train = &prepared.split.train;
    let n_classes = prepared.schema.n_classes();
    let bundle = generate_bundle(train, n_classes, &config.generators, config.seed)
        .map_err(|e| e.in_stage("generate"))?;
    for (name, m) in bundle.generator_names.iter().zip(&bundle.outputs) {
        ensure_finite(m, &format!("{name} output")).map_err(|e| e.in_stage("generate"))?;
    }
    let trained = train_weights(
        &bundle,
        train,
        &config.rl,
        derive(config.seed, stage::POLICY),
    )
    .map_err(|e| e.in_stage("hybridize"))?;
    let hybrid = combine_hybrid(&bundle, &trained.weights).map_err(|e| e.in_stage("hybridize"))?;
    Ok(HybridRun {
        bundle,
        trained,
        hybrid,
    })
}

/// Reads a synthetic CSV with the dataset's header layout and maps it into
/// normalized space with the training statistics.
pub fn load_synthetic(path: &Path, prepared: &Prepared) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let (table, schema) =
        read_csv(file, &prepared.schema.target_name, "").map_err(|e| match e {
            Error::Csv { message, .. } => Error::Csv {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
    if schema.feature_names != prepared.schema.feature_names {
        return Err(Error::Schema(format!(
            "{} has columns {:?}, expected {:?}",
            path.display(),
            schema.feature_names,
            prepared.schema.feature_names
        )));
    }
    if table.n_missing() > 0 {
        return Err(Error::Schema(format!(
            "{} has missing cells",
            path.display()
        )));
    }
    let labels = table
        .labels
        .iter()
        .map(|&l| {
            let raw = &schema.class_labels[l];
            prepared.schema.class_index(raw).ok_or_else(|| {
                Error::Schema(format!(
                    "{} has unknown class label {raw:?}",
                    path.display()
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Table::new(prepared.norm.apply(&table.features), labels)
}

fn calibrate_checked(
    hybrid: &Matrix,
    real: &Table,
    config: &CalibrationConfig,
) -> Result<CalibrationResult> {
    let result = calibrate(hybrid, &real.features, config)?;
    ensure_finite(&result.calibrated, "calibrated data")?;
    Ok(result)
}

fn write_generate_outputs(run: &mut Run, prepared: &Prepared, h: &HybridRun) -> Result<()> {
    let train = &prepared.split.train;
    let denorm = prepared.norm.invert(&h.hybrid);
    run.write_table(HYBRID_FILE, &prepared.schema, &denorm, &train.labels)?;
    run.write_json(
        "weights.json",
        &WeightsSummary {
            generators: h.bundle.generator_names.clone(),
            weights: h.trained.weights.as_slice().to_vec(),
            final_reward: h.trained.reward_trace.last().copied().unwrap_or(f64::NAN),
        },
    )?;
    let rows: Vec<Vec<String>> = h
        .trained
        .reward_trace
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), num(*r)])
        .collect();
    run.write_rows(
        "reward_trace.csv",
        &["episode".into(), "reward".into()],
        &rows,
    )?;
    let summary = h
        .bundle
        .generator_names
        .iter()
        .zip(&h.bundle.outputs)
        .map(|(name, m)| {
            Ok(GeneratorSummary {
                name: name.clone(),
                mean_wd: mean_wd(m, &train.features)?,
                mean_ks: mean_ks(m, &train.features)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    run.write_json("generators.json", &summary)
}

fn write_calibration_outputs(
    run: &mut Run,
    prepared: &Prepared,
    input: &Matrix,
    result: &CalibrationResult,
    labels: &[usize],
    raw_bytes: Option<&[u8]>,
) -> Result<()> {
    let method = result.method.name();
    let csv_name = format!("calibrated_{method}.csv");
    match raw_bytes {
        Some(bytes) => run.write(&csv_name, bytes)?,
        None => {
            let denorm = prepared.norm.invert(&result.calibrated);
            run.write_table(&csv_name, &prepared.schema, &denorm, labels)?;
        }
    }
    let real = &prepared.split.train.features;
    run.write_json(
        &format!("calibration_{method}.json"),
        &CalibrationSummary {
            method: result.method,
            per_feature_alpha: result.per_feature_alpha.clone(),
            alpha_trace: result.alpha_trace.clone(),
            wd_trace: result.wd_trace.clone(),
            degenerate_features: result.degenerate_features.clone(),
            mean_wd_before: mean_wd(input, real)?,
            mean_wd_after: mean_wd(&result.calibrated, real)?,
        },
    )?;
    if result.method == CalibrationMethod::Iterative {
        let rows: Vec<Vec<String>> = result
            .wd_trace
            .iter()
            .enumerate()
            .map(|(i, w)| vec![i.to_string(), num(*w)])
            .collect();
        run.write_rows(
            &format!("wd_trace_{method}.csv"),
            &["iteration".into(), "mean_wd".into()],
            &rows,
        )?;
    }
    for &j in &result.degenerate_features {
        run.warnings.push(format!(
            "{method}: feature {} has zero synthetic spread",
            prepared.schema.feature_names[j]
        ));
    }
    Ok(())
}

fn correlation_rows(names: &[String], corr: &Matrix) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["feature".to_string()];
    header.extend(names.iter().cloned());
    let rows = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let mut row = vec![n.clone()];
            row.extend(corr.row(i).iter().map(|v| num(*v)));
            row
        })
        .collect();
    (header, rows)
}

fn write_evaluation_outputs(
    run: &mut Run,
    prepared: &Prepared,
    label: &str,
    synth: &Table,
    report: &EvaluationReport,
) -> Result<()> {
    let real = &prepared.split.train.features;
    let names = &prepared.schema.feature_names;
    let metrics = &run.config.metrics;
    let (pca, histograms, correlations) = (metrics.pca, metrics.histograms, metrics.correlations);
    let (k, bins) = (metrics.pca_components, metrics.histogram_bins);
    run.write_json(&format!("report_{label}.json"), report)?;
    if pca {
        let proj = pca_project(real, &synth.features, k.min(real.cols()))?;
        let mut header = vec!["source".to_string(), "row".to_string()];
        header.extend((1..=proj.components.rows()).map(|c| format!("pc{c}")));
        let mut rows = Vec::new();
        for (source, m) in [("real", &proj.real), ("synthetic", &proj.synth)] {
            for (i, r) in m.row_iter().enumerate() {
                let mut row = vec![source.to_string(), i.to_string()];
                row.extend(r.iter().map(|v| num(*v)));
                rows.push(row);
            }
        }
        run.write_rows(&format!("pca_{label}.csv"), &header, &rows)?;
    }
    if histograms {
        let hists = export_histograms(real, &synth.features, bins)?;
        let header: Vec<String> = [
            "feature",
            "bin",
            "left",
            "right",
            "real_density",
            "synthetic_density",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let clamped: Vec<&str> = names
            .iter()
            .zip(&hists)
            .filter(|(_, h)| h.clamped)
            .map(|(name, _)| name.as_str())
            .collect();
        if !clamped.is_empty() {
            run.warnings.push(format!(
                "{label}: synthetic values outside the real range were clamped into the end bins for {}",
                clamped.join(", ")
            ));
        }
        let mut rows = Vec::new();
        for (name, h) in names.iter().zip(&hists) {
            for b in 0..h.real_density.len() {
                rows.push(vec![
                    name.clone(),
                    b.to_string(),
                    num(h.edges[b]),
                    num(h.edges[b + 1]),
                    num(h.real_density[b]),
                    num(h.synth_density[b]),
                ]);
            }
        }
        run.write_rows(&format!("histograms_{label}.csv"), &header, &rows)?;
    }
    if correlations {
        let (header, rows) = correlation_rows(names, &correlation_matrix(real)?);
        run.write_rows("correlation_real.csv", &header, &rows)?;
        let (header, rows) = correlation_rows(names, &correlation_matrix(&synth.features)?);
        run.write_rows(&format!("correlation_{label}.csv"), &header, &rows)?;
    }
    Ok(())
}

fn note_imputation(run: &mut Run, prepared: &Prepared) {
    for &j in &prepared.imputer.all_missing {
        run.warnings.push(format!(
            "feature {} has no observed training values; filled with 0",
            prepared.schema.feature_names[j]
        ));
    }
}

/// Generates the five synthetic sets, learns the mixture weights and writes the
/// hybrid (original units), the weights and the reward trace.
pub fn cmd_generate(config: &PipelineConfig) -> Result<RunManifest> {
    let mut run = Run::new("generate", config)?;
    let prepared = run.stage(
        "load",
        &["dataset"],
        Some(derive(config.seed, stage::SPLIT)),
        || load_prepared(config),
    )?;
    note_imputation(&mut run, &prepared);
    let h = run.stage("generate", &["real_train"], Some(config.seed), || {
        build_hybrid(&prepared, config)
    })?;
    write_generate_outputs(&mut run, &prepared, &h)?;
    run.finish()
}

fn default_input(config: &PipelineConfig, file: &str) -> PathBuf {
    config
        .input
        .clone()
        .unwrap_or_else(|| config.out_dir.join(file))
}

/// Calibrates a synthetic CSV (by default the hybrid written by `generate`)
/// with the configured method.
pub fn cmd_calibrate(config: &PipelineConfig) -> Result<RunManifest> {
    let mut run = Run::new("calibrate", config)?;
    let prepared = run.stage(
        "load",
        &["dataset"],
        Some(derive(config.seed, stage::SPLIT)),
        || load_prepared(config),
    )?;
    note_imputation(&mut run, &prepared);
    let input = default_input(config, HYBRID_FILE);
    let synth = load_synthetic(&input, &prepared)?;
    let result = run.stage("calibrate", &["real_train", "synthetic"], None, || {
        calibrate_checked(&synth.features, &prepared.split.train, &config.calibration)
    })?;
    let raw_bytes = match config.calibration.method {
        CalibrationMethod::Raw => Some(std::fs::read(&input).map_err(|e| Error::io(&input, e))?),
        _ => None,
    };
    write_calibration_outputs(
        &mut run,
        &prepared,
        &synth.features,
        &result,
        &synth.labels,
        raw_bytes.as_deref(),
    )?;
    run.finish()
}

/// Evaluates a synthetic CSV (by default the output of `calibrate` for the
/// configured method) against the real data.
pub fn cmd_evaluate(config: &PipelineConfig) -> Result<RunManifest> {
    let mut run = Run::new("evaluate", config)?;
    let prepared = run.stage(
        "load",
        &["dataset"],
        Some(derive(config.seed, stage::SPLIT)),
        || load_prepared(config),
    )?;
    note_imputation(&mut run, &prepared);
    let method = config.calibration.method.name();
    let input = default_input(config, &format!("calibrated_{method}.csv"));
    let synth = load_synthetic(&input, &prepared)?;
    let label = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("synthetic")
        .to_string();
    let report = run.stage(
        "evaluate",
        &["real_train", "real_test", "synthetic"],
        None,
        || {
            evaluate(
                &prepared.split.train,
                &prepared.split.test,
                &synth,
                prepared.schema.n_classes(),
                &config.classifier,
                derive(config.seed, stage::NNAA),
            )
        },
    )?;
    write_evaluation_outputs(&mut run, &prepared, &label, &synth, &report)?;
    run.finish()
}

/// Full run: generation, all six calibration variants, evaluation of each and
/// the two comparison tables.
pub fn cmd_pipeline(config: &PipelineConfig) -> Result<RunManifest> {
    let mut run = Run::new("pipeline", config)?;
    let prepared = run.stage(
        "load",
        &["dataset"],
        Some(derive(config.seed, stage::SPLIT)),
        || load_prepared(config),
    )?;
    note_imputation(&mut run, &prepared);
    let h = run.stage("generate", &["real_train"], Some(config.seed), || {
        build_hybrid(&prepared, config)
    })?;
    write_generate_outputs(&mut run, &prepared, &h)?;

    let train = &prepared.split.train;
    let mut comparison = Vec::new();
    let mut fidelity = Vec::new();
    for method in CalibrationMethod::ALL {
        let cal_config = CalibrationConfig {
            method,
            ..config.calibration.clone()
        };
        let stage_name = match method {
            CalibrationMethod::Raw => "calibrate:raw",
            CalibrationMethod::Moment => "calibrate:moment",
            CalibrationMethod::Full => "calibrate:full",
            CalibrationMethod::Soft => "calibrate:soft",
            CalibrationMethod::Adaptive => "calibrate:adaptive",
            CalibrationMethod::Iterative => "calibrate:iterative",
        };
        let result = run.stage(stage_name, &["real_train", "hybrid"], None, || {
            calibrate_checked(&h.hybrid, train, &cal_config)
        })?;
        write_calibration_outputs(&mut run, &prepared, &h.hybrid, &result, &train.labels, None)?;

        let synth = train.with_features(result.calibrated);
        let eval_stage = match method {
            CalibrationMethod::Raw => "evaluate:raw",
            CalibrationMethod::Moment => "evaluate:moment",
            CalibrationMethod::Full => "evaluate:full",
            CalibrationMethod::Soft => "evaluate:soft",
            CalibrationMethod::Adaptive => "evaluate:adaptive",
            CalibrationMethod::Iterative => "evaluate:iterative",
        };
        let report = run.stage(
            eval_stage,
            &["real_train", "real_test", "calibrated"],
            None,
            || {
                evaluate(
                    train,
                    &prepared.split.test,
                    &synth,
                    prepared.schema.n_classes(),
                    &config.classifier,
                    derive(config.seed, stage::NNAA),
                )
            },
        )?;
        write_evaluation_outputs(&mut run, &prepared, method.name(), &synth, &report)?;
        comparison.push(ComparisonRow {
            method: method.display_name().to_string(),
            wd: report.mean_wd,
            ks: report.mean_ks,
            nnaa: report.nnaa,
            accuracy: report.utility_accuracy,
            f1: report.utility_f1,
        });
        fidelity.push(FidelityRow {
            method: method.display_name().to_string(),
            column_shapes: report.column_shapes,
            pair_trends: report.pair_trends,
            overall: report.overall,
        });
    }

    let header: Vec<String> = ["method", "wd", "ks", "nnaa", "accuracy", "f1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = comparison
        .iter()
        .map(|r| {
            vec![
                r.method.clone(),
                num(r.wd),
                num(r.ks),
                num(r.nnaa),
                num(r.accuracy),
                num(r.f1),
            ]
        })
        .collect();
    run.write_rows("comparison.csv", &header, &rows)?;
    run.write_json("comparison.json", &comparison)?;
    let header: Vec<String> = ["method", "column_shapes", "pair_trends", "overall"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = fidelity
        .iter()
        .map(|r| {
            vec![
                r.method.clone(),
                num(r.column_shapes),
                num(r.pair_trends),
                num(r.overall),
            ]
        })
        .collect();
    run.write_rows("fidelity.csv", &header, &rows)?;
    run.write_json("fidelity.json", &fidelity)?;
    run.finish()
}
