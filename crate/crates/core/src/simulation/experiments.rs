//! Replicated accuracy experiments over a parameter grid.
//!
//! Every replication draws one dataset and one test point from its own random
//! stream, keyed by (experiment, grid point, replication), and scores all
//! requested methods on that same draw. Replications run in parallel and are
//! aggregated in replication order, so output is independent of scheduling.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    adaptive_label, bayes_classify, conventional_k, knn_predict, lepski_predict,
    multisource_adaptive_label, multisource_plan, multisource_weighted_predict, theorem1_plan,
    weighted_knn_predict, LepskiWidth,
};
use crate::data::{HyperParams, Label, MultiSourceDataset, TransferDataset};
use crate::error::{Error, Result};
use crate::neighbors::{MultiSourceIndex, NeighborIndex, TransferIndex};
use crate::rng::RandomSource;

use super::model::DriftModel;
use super::risk::{AccuracyTruth, McEstimate};
use super::sampling::{sample_multisource, sample_test_points};

/// A classifier evaluated by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Two-sample weighted K-NN with the rate-optimal plan.
    Weighted,
    /// K-NN on the pooled source and target samples.
    Combined,
    /// K-NN on the target sample only.
    TargetKnn,
    /// Adaptive signal-to-noise classifier.
    Adaptive,
    /// Lepski's rule on the pooled samples.
    LepskiCombined,
    /// Lepski's rule on the target sample only.
    LepskiTarget,
    /// Multi-source weighted K-NN.
    MultiWeighted,
    /// Multi-source adaptive classifier.
    MultiAdaptive,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Weighted,
        Method::Combined,
        Method::TargetKnn,
        Method::Adaptive,
        Method::LepskiCombined,
        Method::LepskiTarget,
        Method::MultiWeighted,
        Method::MultiAdaptive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Weighted => "weighted",
            Method::Combined => "combined-knn",
            Method::TargetKnn => "q-knn",
            Method::Adaptive => "adaptive",
            Method::LepskiCombined => "lepski-combined",
            Method::LepskiTarget => "lepski-q",
            Method::MultiWeighted => "multisource-weighted",
            Method::MultiAdaptive => "multisource-adaptive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// Model, plan knowledge and scoring options shared by a whole experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub seed: u64,
    pub d: usize,
    /// Link exponent used to generate source labels, one per source.
    pub source_gammas: Vec<f64>,
    /// Parameters handed to the rate-optimal plans.
    pub hp: HyperParams<f64>,
    /// Radius of the test ball around the model center.
    pub test_radius: f64,
    pub lepski_width: LepskiWidth,
    pub truth: AccuracyTruth,
}

impl SimulationSettings {
    /// `d = 2`, `γ = 0.3`, `β = 1`, `α = 0`, test ball radius 0.05.
    pub fn standard(seed: u64) -> Self {
        Self {
            seed,
            d: 2,
            source_gammas: vec![0.3],
            hp: HyperParams::single(0.0, 1.0, 0.3, 2).expect("valid"),
            test_radius: 0.05,
            lepski_width: LepskiWidth::Algorithm3,
            truth: AccuracyTruth::Bayes,
        }
    }

    fn model(&self, p_max: f64) -> Result<DriftModel> {
        DriftModel::centered(p_max, self.source_gammas[0], self.d)
    }

    fn plan_params(&self, m: usize) -> HyperParams<f64> {
        let gamma = if self.hp.gamma.len() == m {
            self.hp.gamma.clone()
        } else {
            vec![self.hp.gamma[0]; m]
        };
        HyperParams {
            gamma,
            ..self.hp.clone()
        }
    }
}

/// Aggregated outcome of one method at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub method: String,
    pub seed: u64,
    pub reps: usize,
    pub p_max: f64,
    pub gamma: f64,
    pub d: usize,
    pub n_p: usize,
    pub n_q: usize,
    pub accuracy: f64,
    pub accuracy_se: f64,
    /// Mean of `2|η_Q(x) - 1/2| · 1{wrong}` over the test points.
    pub excess_risk: f64,
    pub excess_risk_se: f64,
    /// Kept out of CSV output so result files are byte-stable.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl ExperimentRecord {
    pub fn accuracy_estimate(&self) -> McEstimate {
        McEstimate {
            mean: self.accuracy,
            std_error: self.accuracy_se,
            n: self.reps,
        }
    }
}

/// One cell of an experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub p_max: f64,
    pub source_sizes: Vec<usize>,
    pub n_q: usize,
}

fn predict_one(
    method: Method,
    mds: &MultiSourceDataset<f64>,
    single: &TransferDataset<f64>,
    x: &[f64],
    settings: &SimulationSettings,
) -> Result<Label> {
    let hp = &settings.hp;
    match method {
        Method::Weighted => {
            let plan = theorem1_plan(single.n_p(), single.n_q(), &settings.plan_params(1))?;
            weighted_knn_predict(&TransferIndex::build(single), &plan, x)
        }
        Method::Combined => {
            let pooled = single.pooled();
            let k = conventional_k(pooled.len(), hp.beta, hp.d);
            knn_predict(&NeighborIndex::build(&pooled), k, x)
        }
        Method::TargetKnn => {
            let k = conventional_k(single.n_q(), hp.beta, hp.d);
            knn_predict(&NeighborIndex::build(&single.q_data), k, x)
        }
        Method::Adaptive => adaptive_label(&TransferIndex::build(single), x),
        Method::LepskiCombined => {
            let pooled = single.pooled();
            lepski_predict(&NeighborIndex::build(&pooled), x, settings.lepski_width)
        }
        Method::LepskiTarget => lepski_predict(
            &NeighborIndex::build(&single.q_data),
            x,
            settings.lepski_width,
        ),
        Method::MultiWeighted => {
            let plan = multisource_plan(
                &mds.source_sizes(),
                mds.q_data.len(),
                &settings.plan_params(mds.m()),
            )?;
            multisource_weighted_predict(&MultiSourceIndex::build(mds), &plan, x)
        }
        Method::MultiAdaptive => multisource_adaptive_label(&MultiSourceIndex::build(mds), x),
    }
}

/// Per-method (correct, weighted error) for one replication.
fn replicate(
    methods: &[Method],
    model: &DriftModel,
    point: &GridPoint,
    settings: &SimulationSettings,
    stream: RandomSource,
) -> Result<Vec<(f64, f64)>> {
    let gammas = &settings.source_gammas;
    let gammas: Vec<f64> = if gammas.len() == point.source_sizes.len() {
        gammas.clone()
    } else {
        vec![gammas[0]; point.source_sizes.len()]
    };
    let mds = sample_multisource(
        model,
        &gammas,
        &point.source_sizes,
        point.n_q,
        stream.fork_named("data"),
    )?;
    let single = mds.merge_sources();
    let x = sample_test_points(
        &model.x_c,
        settings.test_radius,
        1,
        stream.fork_named("test"),
    )?
    .pop()
    .expect("one point");
    let bayes = bayes_classify(model, &x);
    let truth = match settings.truth {
        AccuracyTruth::Bayes => bayes,
        AccuracyTruth::Noisy => {
            let mut rng = stream.fork_named("label").rng();
            Label::from(rng.random::<f64>() < model.eta_q(&x))
        }
    };
    let weight = model.risk_weight(&x);
    methods
        .iter()
        .map(|&m| {
            let label = predict_one(m, &mds, &single, &x, settings)?;
            let correct = f64::from(u8::from(label == truth));
            let err = if label != bayes { weight } else { 0.0 };
            Ok((correct, err))
        })
        .collect()
}

/// Runs `reps` replications at every grid point.
pub fn run_grid(
    experiment: &str,
    methods: &[Method],
    grid: &[GridPoint],
    reps: usize,
    settings: &SimulationSettings,
) -> Result<Vec<ExperimentRecord>> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be positive".into()));
    }
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods requested".into()));
    }
    settings.hp.validate()?;
    let root = RandomSource::new(settings.seed).fork_named(experiment);
    let mut records = Vec::with_capacity(grid.len() * methods.len());
    for (g, point) in grid.iter().enumerate() {
        let started = Instant::now();
        let model = settings.model(point.p_max)?;
        let cell = root.fork(g as u64);
        let outcomes: Vec<Vec<(f64, f64)>> = (0..reps)
            .into_par_iter()
            .map(|r| replicate(methods, &model, point, settings, cell.fork(r as u64)))
            .collect::<Result<_>>()?;
        let elapsed = started.elapsed().as_secs_f64();
        for (j, method) in methods.iter().enumerate() {
            let correct: Vec<f64> = outcomes.iter().map(|o| o[j].0).collect();
            let errs: Vec<f64> = outcomes.iter().map(|o| o[j].1).collect();
            let acc = McEstimate::from_values(&correct);
            let risk = McEstimate::from_values(&errs);
            records.push(ExperimentRecord {
                experiment: experiment.to_string(),
                method: method.name().to_string(),
                seed: settings.seed,
                reps,
                p_max: point.p_max,
                gamma: settings.source_gammas[0],
                d: settings.d,
                n_p: point.source_sizes.iter().sum(),
                n_q: point.n_q,
                accuracy: acc.mean,
                accuracy_se: acc.std_error,
                excess_risk: risk.mean,
                excess_risk_se: risk.std_error,
                wall_time_s: elapsed,
            });
        }
    }
    Ok(records)
}

/// `{0.505, 0.510, ..., 0.550}`.
pub fn default_pmax_grid() -> Vec<f64> {
    (1..=10).map(|i| f64::from(500 + 5 * i) / 1000.0).collect()
}

/// `{250, 500, 1000, ..., 16000}`.
pub fn default_np_grid() -> Vec<usize> {
    (0..7).map(|i| 250 << i).collect()
}

/// Accuracy against the peak regression value, sizes held fixed.
pub fn experiment_accuracy_vs_pmax(
    experiment: &str,
    methods: &[Method],
    n_p: usize,
    n_q: usize,
    p_max_grid: &[f64],
    reps: usize,
    settings: &SimulationSettings,
) -> Result<Vec<ExperimentRecord>> {
    let grid: Vec<GridPoint> = p_max_grid
        .iter()
        .map(|&p_max| GridPoint {
            p_max,
            source_sizes: vec![n_p],
            n_q,
        })
        .collect();
    run_grid(experiment, methods, &grid, reps, settings)
}

/// Accuracy against the source sample size.
pub fn experiment_accuracy_vs_np(
    experiment: &str,
    methods: &[Method],
    n_q: usize,
    p_max: f64,
    n_p_grid: &[usize],
    reps: usize,
    settings: &SimulationSettings,
) -> Result<Vec<ExperimentRecord>> {
    let grid: Vec<GridPoint> = n_p_grid
        .iter()
        .map(|&n_p| GridPoint {
            p_max,
            source_sizes: vec![n_p],
            n_q,
        })
        .collect();
    run_grid(experiment, methods, &grid, reps, settings)
}

/// Multi-source comparison at a single configuration.
pub fn experiment_multisource(
    experiment: &str,
    methods: &[Method],
    source_sizes: &[usize],
    n_q: usize,
    p_max: f64,
    reps: usize,
    settings: &SimulationSettings,
) -> Result<Vec<ExperimentRecord>> {
    let grid = [GridPoint {
        p_max,
        source_sizes: source_sizes.to_vec(),
        n_q,
    }];
    run_grid(experiment, methods, &grid, reps, settings)
}

/// The four accuracy studies of the simulation section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Non-adaptive methods against `p_max`.
    Fig4a,
    /// Non-adaptive methods against `n_P`.
    Fig4b,
    /// Adaptive methods against `p_max`.
    Fig5a,
    /// Adaptive methods against `n_P`.
    Fig5b,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
            Figure::Fig5a => "fig5a",
            Figure::Fig5b => "fig5b",
        }
    }

    pub fn methods(self) -> &'static [Method] {
        match self {
            Figure::Fig4a | Figure::Fig4b => {
                &[Method::Weighted, Method::Combined, Method::TargetKnn]
            }
            Figure::Fig5a | Figure::Fig5b => &[
                Method::Adaptive,
                Method::LepskiCombined,
                Method::LepskiTarget,
            ],
        }
    }

    pub fn default_reps(self) -> usize {
        match self {
            Figure::Fig4a | Figure::Fig5a => 2000,
            Figure::Fig4b | Figure::Fig5b => 1000,
        }
    }

    pub fn sweeps_source_size(self) -> bool {
        matches!(self, Figure::Fig4b | Figure::Fig5b)
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig4a" => Ok(Figure::Fig4a),
            "fig4b" => Ok(Figure::Fig4b),
            "fig5a" => Ok(Figure::Fig5a),
            "fig5b" => Ok(Figure::Fig5b),
            other => Err(Error::InvalidParameter(format!("unknown figure {other:?}"))),
        }
    }
}

/// Sizes and grids for one figure run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureConfig {
    pub figure: Figure,
    pub n_p: usize,
    pub n_q: usize,
    pub p_max: f64,
    pub p_max_grid: Vec<f64>,
    pub n_p_grid: Vec<usize>,
    pub reps: usize,
}

impl FigureConfig {
    pub fn defaults(figure: Figure) -> Self {
        Self {
            figure,
            n_p: 2000,
            n_q: 5000,
            p_max: 0.53,
            p_max_grid: default_pmax_grid(),
            n_p_grid: default_np_grid(),
            reps: figure.default_reps(),
        }
    }

    pub fn run(&self, settings: &SimulationSettings) -> Result<Vec<ExperimentRecord>> {
        let name = self.figure.name();
        let methods = self.figure.methods();
        if self.figure.sweeps_source_size() {
            experiment_accuracy_vs_np(
                name,
                methods,
                self.n_q,
                self.p_max,
                &self.n_p_grid,
                self.reps,
                settings,
            )
        } else {
            experiment_accuracy_vs_pmax(
                name,
                methods,
                self.n_p,
                self.n_q,
                &self.p_max_grid,
                self.reps,
                settings,
            )
        }
    }
}
