use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::Serialize;
use transfer_knn::classifiers::{
    adaptive_label, conventional_k, knn_predict, lepski_predict, multisource_adaptive_label,
    multisource_plan, multisource_weighted_predict, theorem1_plan, weighted_knn_predict,
};
use transfer_knn::data::{HyperParams, Label, LabeledSample, SampleSet, TransferDataset};
use transfer_knn::io::{
    append_manifest, read_labeled_csv, read_points_csv, save_json, write_labeled_csv,
    write_records_csv, LabeledData, RunManifest,
};
use transfer_knn::neighbors::{MultiSourceIndex, NeighborIndex, TransferIndex};
use transfer_knn::simulation::{
    excess_risk_mc, rate_exponent_check, sample_dataset, DriftModel, FigureConfig, RateCheckConfig,
    SimulationSettings,
};
use transfer_knn::{Error, RandomSource};

use crate::{
    ClassifierArgs, EvalArgs, ModelArgs, PredictArgs, PredictMethod, RateArgs, SimulateArgs,
};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::DegenerateGrid(_) | Error::KOutOfRange { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Everything needed to regenerate an output file.
#[derive(Serialize)]
struct RunConfig<'a, C: Serialize> {
    command: &'a str,
    argv: &'a [String],
    settings: C,
}

fn manifest_path(explicit: Option<PathBuf>, out: Option<&Path>) -> Option<PathBuf> {
    explicit.or_else(|| out.map(|p| p.with_extension("manifest.jsonl")))
}

fn write_manifest<C: Serialize>(
    path: Option<PathBuf>,
    command: &str,
    argv: &[String],
    settings: C,
    seed: u64,
    started: chrono::DateTime<Utc>,
) -> CliResult {
    if let Some(path) = path {
        let cfg = RunConfig {
            command,
            argv,
            settings,
        };
        append_manifest(path, &RunManifest::new(&cfg, seed, started)?)?;
    }
    Ok(())
}

fn apply_model(m: &ModelArgs, hp: &mut HyperParams<f64>) {
    if let Some(g) = &m.gamma {
        hp.gamma = g.clone();
    }
    if let Some(b) = m.beta {
        hp.beta = b;
    }
    if let Some(a) = m.alpha {
        hp.alpha = a;
    }
    if let Some(d) = m.d {
        hp.d = d;
    }
}

pub fn simulate(a: SimulateArgs, argv: &[String]) -> CliResult {
    let mut settings = SimulationSettings::standard(a.seed);
    apply_model(&a.model, &mut settings.hp);
    settings.d = settings.hp.d;
    settings.source_gammas = settings.hp.gamma.clone();
    settings.lepski_width = a.lepski_width;
    settings.hp.validate()?;

    let mut fc = FigureConfig::defaults(a.figure);
    if let Some(r) = a.reps {
        fc.reps = r;
    }
    if let Some(nq) = a.nq {
        fc.n_q = nq;
    }
    let sweeps_np = a.figure.sweeps_source_size();
    if let Some(np) = a.np {
        match (sweeps_np, np.as_slice()) {
            (true, _) => fc.n_p_grid = np,
            (false, [n]) => fc.n_p = *n,
            (false, _) => return Err(config("--np takes a single value for p_max studies")),
        }
    }
    if let Some(p) = a.pmax {
        match (sweeps_np, p.as_slice()) {
            (false, _) => fc.p_max_grid = p,
            (true, [v]) => fc.p_max = *v,
            (true, _) => return Err(config("--pmax takes a single value for n_P studies")),
        }
    }

    let started = Utc::now();
    let records = fc.run(&settings)?;
    match &a.out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            write_records_csv(std::io::BufWriter::new(file), &records)?;
        }
        None => write_records_csv(std::io::stdout().lock(), &records)?,
    }
    write_manifest(
        manifest_path(a.manifest, a.out.as_deref()),
        "simulate",
        argv,
        (&fc, &settings),
        a.seed,
        started,
    )
}

pub fn rate_check(a: RateArgs, argv: &[String]) -> CliResult {
    let mut cfg = RateCheckConfig::standard(a.seed);
    cfg.sweep = a.sweep.into();
    apply_model(&a.model, &mut cfg.hp);
    if cfg.hp.gamma.len() != 1 {
        return Err(config("rate-check takes a single --gamma"));
    }
    cfg.gamma_sim = cfg.hp.gamma[0];
    if let Some(v) = a.reps {
        cfg.reps = v;
    }
    if let Some(v) = a.sizes {
        cfg.sizes = v;
    }
    if let Some(v) = a.n_mc {
        cfg.n_mc = v;
    }
    if let Some(v) = a.bootstrap {
        cfg.bootstrap = v;
    }
    if let Some(v) = a.pmax {
        cfg.p_max = v;
    }
    cfg.hp.validate()?;

    let started = Utc::now();
    let mut out = std::io::stdout().lock();
    let sweep = match cfg.sweep {
        transfer_knn::simulation::RateSweep::Target => "target",
        transfer_knn::simulation::RateSweep::Source => "source",
    };
    writeln!(out, "sweep: {sweep}")?;
    writeln!(out, "target slope: {}", cfg.target_slope())?;
    out.flush()?;
    let report = rate_exponent_check(&cfg)?;
    writeln!(out, "n,mean_excess_risk,std_error")?;
    for p in &report.points {
        writeln!(out, "{},{},{}", p.n, p.risk.mean, p.risk.std_error)?;
    }
    writeln!(out, "fitted slope: {}", report.slope)?;
    writeln!(
        out,
        "bootstrap 95% interval: [{}, {}]",
        report.ci_low, report.ci_high
    )?;
    if let Some(path) = &a.out {
        save_json(path, &report)?;
    }
    write_manifest(
        manifest_path(a.manifest, a.out.as_deref()),
        "rate-check",
        argv,
        &cfg,
        a.seed,
        started,
    )
}

fn target_set(data: &LabeledData<f64>) -> &SampleSet<f64> {
    match data {
        LabeledData::Single(s) => s,
        LabeledData::Transfer(t) => &t.q_data,
        LabeledData::Multi(m) => &m.q_data,
    }
}

fn as_transfer(data: &LabeledData<f64>) -> TransferDataset<f64> {
    match data {
        LabeledData::Single(s) => TransferDataset {
            p_data: SampleSet::empty(s.d),
            q_data: s.clone(),
        },
        LabeledData::Transfer(t) => t.clone(),
        LabeledData::Multi(m) => m.merge_sources(),
    }
}

fn plan_params(c: &ClassifierArgs, d: usize, name: &str) -> CliResult<HyperParams<f64>> {
    let (Some(gamma), Some(beta)) = (&c.model.gamma, c.model.beta) else {
        return Err(config(format!(
            "method {name} needs --gamma and --beta to set neighbor counts and weights"
        )));
    };
    Ok(HyperParams::new(
        c.model.alpha.unwrap_or(0.0),
        beta,
        gamma.clone(),
        d,
    )?)
}

fn chosen_k(c: &ClassifierArgs, set: &SampleSet<f64>) -> CliResult<usize> {
    if set.is_empty() {
        return Err(config("training data has no rows for this method"));
    }
    let k =
        c.k.unwrap_or_else(|| conventional_k(set.len(), c.model.beta.unwrap_or(1.0), set.d));
    if k == 0 || k > set.len() {
        return Err(Error::KOutOfRange { k, n: set.len() }.into());
    }
    Ok(k)
}

/// Builds the requested classifier once and hands its decision function to `f`.
fn with_predictor<R>(
    c: &ClassifierArgs,
    data: &LabeledData<f64>,
    f: impl FnOnce(&dyn Fn(&[f64]) -> transfer_knn::Result<Label>) -> CliResult<R>,
) -> CliResult<R> {
    let d = data.d();
    match c.method {
        PredictMethod::Knn => {
            let set = target_set(data);
            let k = chosen_k(c, set)?;
            let index = NeighborIndex::build(set);
            f(&|x| knn_predict(&index, k, x))
        }
        PredictMethod::Combined => {
            let set = data.pooled();
            let k = chosen_k(c, &set)?;
            let index = NeighborIndex::build(&set);
            f(&|x| knn_predict(&index, k, x))
        }
        PredictMethod::Lepski => {
            let set = if c.pooled {
                data.pooled()
            } else {
                target_set(data).clone()
            };
            if set.is_empty() {
                return Err(config("training data has no rows for this method"));
            }
            let index = NeighborIndex::build(&set);
            let width = c.lepski_width;
            f(&|x| lepski_predict(&index, x, width))
        }
        PredictMethod::Weighted => {
            let hp = plan_params(c, d, "weighted")?;
            if hp.gamma.len() != 1 {
                return Err(config("method weighted takes a single --gamma"));
            }
            let ds = as_transfer(data);
            let plan = theorem1_plan(ds.n_p(), ds.n_q(), &hp)?;
            let index = TransferIndex::build(&ds);
            f(&|x| weighted_knn_predict(&index, &plan, x))
        }
        PredictMethod::Adaptive => {
            let ds = as_transfer(data);
            if ds.total() == 0 {
                return Err(config("training data is empty"));
            }
            let index = TransferIndex::build(&ds);
            f(&|x| adaptive_label(&index, x))
        }
        PredictMethod::Multisource => {
            let mut hp = plan_params(c, d, "multisource")?;
            let mds = data.clone().into_multi();
            if hp.gamma.len() == 1 {
                hp.gamma = vec![hp.gamma[0]; mds.m()];
            }
            let plan = multisource_plan(&mds.source_sizes(), mds.q_data.len(), &hp)?;
            let index = MultiSourceIndex::build(&mds);
            f(&|x| multisource_weighted_predict(&index, &plan, x))
        }
        PredictMethod::MultisourceAdaptive => {
            let mds = data.clone().into_multi();
            if mds.total() == 0 {
                return Err(config("training data is empty"));
            }
            let index = MultiSourceIndex::build(&mds);
            f(&|x| multisource_adaptive_label(&index, x))
        }
    }
}

fn accuracy(pred: &[Label], truth: &[Label]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / pred.len().max(1) as f64
}

pub fn predict(a: PredictArgs) -> CliResult {
    let data: LabeledData<f64> = read_labeled_csv(&a.train)?;
    let test = read_points_csv::<f64>(&a.test)?;
    if test.d != data.d() {
        return Err(config(format!(
            "test file has {} features, training file has {}",
            test.d,
            data.d()
        )));
    }
    let preds = with_predictor(&a.classifier, &data, |p| {
        Ok(test
            .points
            .iter()
            .map(|x| p(x))
            .collect::<transfer_knn::Result<Vec<_>>>()?)
    })?;
    let out = LabeledData::Single(SampleSet {
        d: test.d,
        samples: test
            .points
            .iter()
            .zip(&preds)
            .map(|(x, &y)| LabeledSample::new(x.clone(), y))
            .collect(),
    });
    match &a.out {
        Some(path) => {
            write_labeled_csv(std::io::BufWriter::new(std::fs::File::create(path)?), &out)?
        }
        None => write_labeled_csv(std::io::stdout().lock(), &out)?,
    }
    if let Some(labels) = &test.labels {
        eprintln!("accuracy: {}", accuracy(&preds, labels));
    }
    Ok(())
}

pub fn eval(a: EvalArgs) -> CliResult {
    let model_args = &a.classifier.model;
    let model = match a.pmax {
        Some(p) => {
            let gamma = model_args.gamma.as_ref().map_or(0.3, |g| g[0]);
            Some(DriftModel::centered(p, gamma, model_args.d.unwrap_or(2))?)
        }
        None => None,
    };
    let data: LabeledData<f64> = match (&a.train, &model) {
        (Some(path), _) => read_labeled_csv(path)?,
        (None, Some(m)) => LabeledData::Transfer(sample_dataset(
            m,
            a.np.unwrap_or(2000),
            a.nq.unwrap_or(5000),
            RandomSource::new(a.seed).fork_named("eval-train"),
        )),
        (None, None) => return Err(config("eval needs --train or a synthetic model via --pmax")),
    };
    if let Some(m) = &model {
        if m.d != data.d() {
            return Err(config(format!(
                "model dimension {} differs from data dimension {}",
                m.d,
                data.d()
            )));
        }
    }
    let test = match &a.test {
        Some(path) => Some(read_points_csv::<f64>(path)?),
        None => None,
    };
    let mut out = std::io::stdout().lock();
    with_predictor(&a.classifier, &data, |p| {
        writeln!(out, "method: {:?}", a.classifier.method)?;
        let t = as_transfer(&data);
        writeln!(out, "training rows: source {}, target {}", t.n_p(), t.n_q())?;
        if let Some(test) = &test {
            let preds: Vec<Label> = test.points.iter().map(|x| p(x)).collect::<Result<_, _>>()?;
            match (&test.labels, &model) {
                (Some(labels), _) => writeln!(out, "accuracy: {}", accuracy(&preds, labels))?,
                (None, Some(m)) => {
                    let bayes: Vec<Label> = test
                        .points
                        .iter()
                        .map(|x| transfer_knn::classifiers::bayes_classify(m, x))
                        .collect();
                    writeln!(
                        out,
                        "agreement with Bayes rule: {}",
                        accuracy(&preds, &bayes)
                    )?;
                }
                (None, None) => {}
            }
        }
        if let Some(m) = &model {
            let est = excess_risk_mc(
                p,
                m,
                a.n_mc,
                RandomSource::new(a.seed).fork_named("eval-mc"),
            )?;
            writeln!(
                out,
                "excess risk: {} (standard error {}, {} draws)",
                est.mean, est.std_error, est.n
            )?;
        }
        Ok(())
    })
}
