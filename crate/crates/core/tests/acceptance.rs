//! Acceptance criteria, one PASS/FAIL line each. Seeds are fixed in advance.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use transfer_knn::classifiers::{
    adaptive_label, adaptive_predict, knn_predict, multisource_adaptive_label, multisource_plan,
    multisource_weighted_predict, stopping_threshold, theorem1_plan, weighted_knn_predict,
};
use transfer_knn::data::{
    HyperParams, KnnPlan, LabeledSample, MultiKnnPlan, MultiSourceDataset, SampleSet,
};
use transfer_knn::io::{parse_labeled_csv, write_labeled_csv, LabeledData};
use transfer_knn::neighbors::{
    brute_force_knn, MultiSourceIndex, NeighborIndex, SearchStrategy, TransferIndex,
};
use transfer_knn::simulation::{
    default_np_grid, default_pmax_grid, excess_risk_mc, experiment_accuracy_vs_np,
    experiment_accuracy_vs_pmax, experiment_multisource, rate_exponent_check, sample_dataset,
    DriftModel, ExperimentRecord, Method, RateCheckConfig, SimulationSettings,
};
use transfer_knn::{RandomSource, TransferDataset};

const SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn find(recs: &[ExperimentRecord], method: Method, p_max: f64, n_p: usize) -> &ExperimentRecord {
    recs.iter()
        .find(|r| r.method == method.name() && r.p_max == p_max && r.n_p == n_p)
        .expect("record present")
}

fn gap(a: &ExperimentRecord, b: &ExperimentRecord) -> (f64, f64) {
    let se = a.accuracy_estimate().pooled_se(&b.accuracy_estimate());
    (a.accuracy - b.accuracy, se)
}

fn figure_4a() -> Outcome {
    let s = SimulationSettings::standard(SEED);
    let methods = [Method::Weighted, Method::Combined, Method::TargetKnn];
    let recs =
        experiment_accuracy_vs_pmax("fig4a", &methods, 2000, 5000, &default_pmax_grid(), 500, &s)
            .expect("experiment runs");
    let mut pass = true;
    let mut detail = Vec::new();
    for p in [0.53, 0.55] {
        let w = find(&recs, Method::Weighted, p, 2000);
        for other in [Method::Combined, Method::TargetKnn] {
            let o = find(&recs, other, p, 2000);
            let (g, se) = gap(w, o);
            pass &= g >= 0.0;
            if p == 0.55 {
                pass &= g > 2.0 * se;
            }
            detail.push(format!(
                "p={p} {}-{}={g:.4} (se {se:.4})",
                w.method, o.method
            ));
        }
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn figure_4b() -> Outcome {
    let s = SimulationSettings::standard(SEED);
    let recs = experiment_accuracy_vs_np(
        "fig4b",
        &[Method::Weighted],
        5000,
        0.53,
        &default_np_grid(),
        300,
        &s,
    )
    .expect("experiment runs");
    let lo = find(&recs, Method::Weighted, 0.53, 250);
    let hi = find(&recs, Method::Weighted, 0.53, 16000);
    let (g, se) = gap(hi, lo);
    let curve: Vec<String> = recs
        .iter()
        .map(|r| format!("{}:{:.3}", r.n_p, r.accuracy))
        .collect();
    Outcome {
        pass: g > 2.0 * se,
        detail: format!(
            "acc(16000)-acc(250)={g:.4} (se {se:.4}); curve {}",
            curve.join(" ")
        ),
    }
}

fn figure_5() -> Outcome {
    let s = SimulationSettings::standard(SEED);
    let methods = [
        Method::Adaptive,
        Method::LepskiCombined,
        Method::LepskiTarget,
    ];
    let recs =
        experiment_accuracy_vs_pmax("fig5a", &methods, 2000, 5000, &default_pmax_grid(), 500, &s)
            .expect("experiment runs");
    let a = find(&recs, Method::Adaptive, 0.55, 2000);
    let mut pass = true;
    let mut detail = Vec::new();
    for other in [Method::LepskiCombined, Method::LepskiTarget] {
        let o = find(&recs, other, 0.55, 2000);
        let (g, se) = gap(a, o);
        pass &= g >= 0.0 && g > 2.0 * se;
        detail.push(format!("{}-{}={g:.4} (se {se:.4})", a.method, o.method));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn rate_exponent() -> Outcome {
    let cfg = RateCheckConfig::standard(SEED);
    let r = rate_exponent_check(&cfg).expect("rate check runs");
    let means: Vec<String> = r
        .points
        .iter()
        .map(|p| format!("{}:{:.3e}", p.n, p.risk.mean))
        .collect();
    Outcome {
        pass: r.within(0.15),
        detail: format!(
            "slope {:.4} (bootstrap 95% [{:.4}, {:.4}]) vs target {} ± 0.15; risks {}",
            r.slope,
            r.ci_low,
            r.ci_high,
            r.target_slope,
            means.join(" ")
        ),
    }
}

fn closed_form_risk() -> Outcome {
    let m = DriftModel::centered(0.55, 0.3, 2).unwrap();
    // (2π/3)·0.05³
    let exact = 2.617_993_877_991_494_6e-4;
    let e = excess_risk_mc(
        |_| Ok(0),
        &m,
        10_000_000,
        RandomSource::new(SEED).fork_named("closed-form"),
    )
    .expect("estimate runs");
    let z = (e.mean - exact) / e.std_error;
    Outcome {
        pass: z.abs() <= 3.0,
        detail: format!(
            "estimate {:.6e} ± {:.2e} vs {exact:.6e} (z = {z:.2})",
            e.mean, e.std_error
        ),
    }
}

fn random_set(rs: RandomSource, n: usize, d: usize, grid: f64) -> SampleSet<f64> {
    let mut rng = rs.rng();
    let samples = (0..n)
        .map(|_| {
            let x = (0..d)
                .map(|_| {
                    let v: f64 = rng.random();
                    if grid > 0.0 {
                        (v * grid).floor() / grid
                    } else {
                        v
                    }
                })
                .collect();
            LabeledSample::new(x, u8::from(rng.random::<bool>()))
        })
        .collect();
    SampleSet::new(d, samples).unwrap()
}

fn invariant_suites() -> Outcome {
    let root = RandomSource::new(SEED).fork_named("invariants");
    let mut failures = Vec::new();

    // Exact search against brute force.
    let mut rng = root.fork(0).rng();
    for i in 0..200u64 {
        let n = rng.random_range(1..=2000);
        let d = rng.random_range(1..=5);
        let grid = [0.0, 4.0, 16.0][rng.random_range(0..3)];
        let set = random_set(root.fork(1).fork(i), n, d, grid);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-0.1..1.1)).collect();
        let k = rng.random_range(1..=n);
        let want = brute_force_knn(&set, &x, k).unwrap().indices();
        let index = NeighborIndex::build(&set);
        if index
            .query_with(&x, k, SearchStrategy::Tree)
            .unwrap()
            .indices()
            != want
            || index.query(&x, k).unwrap().indices() != want
        {
            failures.push(format!("knn instance {i}"));
        }
    }

    // Adaptive traces.
    for i in 0..60u64 {
        let n_p = 50 + 7 * i as usize;
        let n_q = 30 + 5 * i as usize;
        let ds = TransferDataset::new(
            random_set(root.fork(2).fork(i), n_p, 2, 0.0),
            random_set(root.fork(3).fork(i), n_q, 2, 0.0),
        )
        .unwrap();
        let index = TransferIndex::build(&ds);
        let (_, t) = adaptive_predict(&index, &[0.5, 0.5]).unwrap();
        let ok_sum = t
            .steps
            .iter()
            .enumerate()
            .all(|(j, s)| s.k == j + 1 && s.k_p + s.k_q == s.k);
        let ok_thr = t.threshold == stopping_threshold::<f64>(2, n_p + n_q);
        let ok_stop = match t.stop {
            Some(s) => {
                t.steps[..s - 1].iter().all(|x| x.r <= t.threshold)
                    && t.steps[s - 1].r > t.threshold
            }
            None => t.steps.iter().all(|x| x.r <= t.threshold),
        };
        if !(ok_sum && ok_thr && ok_stop) {
            failures.push(format!("adaptive trace {i}"));
        }
    }

    // n_P = 0 and m = 1 reductions.
    let hp = HyperParams::single(0.0, 1.0, 0.3, 2).unwrap();
    for i in 0..20u64 {
        let q = random_set(root.fork(4).fork(i), 200 + 10 * i as usize, 2, 0.0);
        let p = random_set(root.fork(5).fork(i), 150, 2, 0.0);
        let empty = TransferDataset::new(SampleSet::empty(2), q.clone()).unwrap();
        let plan = theorem1_plan(0, q.len(), &hp).unwrap();
        let ti = TransferIndex::build(&empty);
        let x = [0.3 + 0.02 * i as f64, 0.6];
        if plan.k_p != 0
            || weighted_knn_predict(&ti, &plan, &x).unwrap()
                != knn_predict(&ti.q, plan.k_q, &x).unwrap()
        {
            failures.push(format!("n_P=0 reduction {i}"));
        }
        let ds = TransferDataset::new(p, q).unwrap();
        let mds = MultiSourceDataset::from(ds.clone());
        let plan = theorem1_plan(ds.n_p(), ds.n_q(), &hp).unwrap();
        let mplan = multisource_plan(&[ds.n_p()], ds.n_q(), &hp).unwrap();
        let (ti, mi) = (TransferIndex::build(&ds), MultiSourceIndex::build(&mds));
        if MultiKnnPlan::from(plan) != mplan
            || weighted_knn_predict(&ti, &plan, &x).unwrap()
                != multisource_weighted_predict(&mi, &mplan, &x).unwrap()
            || adaptive_label(&ti, &x).unwrap() != multisource_adaptive_label(&mi, &x).unwrap()
        {
            failures.push(format!("m=1 reduction {i}"));
        }
        // Weight rescaling by powers of two is exact.
        for s in [0.125, 8.0] {
            let scaled = KnnPlan {
                w_p: plan.w_p * s,
                w_q: plan.w_q * s,
                ..plan
            };
            if weighted_knn_predict(&ti, &scaled, &x).unwrap()
                != weighted_knn_predict(&ti, &plan, &x).unwrap()
            {
                failures.push(format!("rescaling {i}"));
            }
        }
    }

    // Determinism under fixed seeds.
    let s = SimulationSettings::standard(SEED);
    let run = || {
        let mut r =
            experiment_accuracy_vs_pmax("det", &Method::ALL, 300, 400, &[0.55], 20, &s).unwrap();
        r.iter_mut().for_each(|x| x.wall_time_s = 0.0);
        r
    };
    if run() != run() {
        failures.push("experiment determinism".into());
    }
    let m = DriftModel::centered(0.55, 0.3, 2).unwrap();
    if sample_dataset(&m, 100, 100, RandomSource::new(5))
        != sample_dataset(&m, 100, 100, RandomSource::new(5))
    {
        failures.push("sampling determinism".into());
    }

    // CSV round trip, including awkward values.
    let mut set = random_set(root.fork(6), 300, 3, 0.0);
    set.samples[0].x = vec![0.1 + 0.2, 1e-310, -123456.789e200];
    let mds = MultiSourceDataset::new(vec![set.clone(), random_set(root.fork(7), 50, 3, 0.0)], set)
        .unwrap();
    let data = LabeledData::Multi(mds);
    let mut buf = Vec::new();
    write_labeled_csv(&mut buf, &data).unwrap();
    if parse_labeled_csv::<f64, _>(buf.as_slice()).unwrap() != data {
        failures.push("csv round trip".into());
    }

    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "200 search instances, 60 traces, 20 reduction cases, determinism, CSV".into()
        } else {
            failures.join(", ")
        },
    }
}

fn multisource_sanity() -> Outcome {
    let s = SimulationSettings {
        source_gammas: vec![0.3, 0.3],
        ..SimulationSettings::standard(SEED)
    };
    let recs = experiment_multisource(
        "multisource",
        &[Method::MultiWeighted, Method::Weighted],
        &[1000, 1000],
        5000,
        0.55,
        300,
        &s,
    )
    .expect("experiment runs");
    let (g, se) = gap(&recs[0], &recs[1]);
    Outcome {
        pass: g.abs() <= 2.0 * se,
        detail: format!(
            "two-source {:.4} vs merged {:.4}: diff {g:.4} (se {se:.4})",
            recs[0].accuracy, recs[1].accuracy
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 accuracy vs p_max, non-adaptive", figure_4a),
        ("2 accuracy grows with n_P", figure_4b),
        ("3 adaptive vs Lepski", figure_5),
        ("4 rate exponent", rate_exponent),
        ("5 closed-form excess risk", closed_form_risk),
        ("6 invariant suites", invariant_suites),
        ("7 multi-source sanity", multisource_sanity),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let t = Instant::now();
        let o = run();
        all &= o.pass;
        println!(
            "{} criterion {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
