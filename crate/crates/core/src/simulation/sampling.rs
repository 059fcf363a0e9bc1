use rand::Rng;

use crate::data::{LabeledSample, MultiSourceDataset, SampleSet, TransferDataset};
use crate::error::{Error, Result};
use crate::neighbors::squared_distance;
use crate::rng::RandomSource;

use super::model::DriftModel;

fn uniform_point(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random::<f64>()).collect()
}

fn draw_set(
    model: &DriftModel,
    n: usize,
    source: RandomSource,
    eta: impl Fn(&[f64]) -> f64,
) -> SampleSet<f64> {
    let mut rng = source.rng();
    let samples = (0..n)
        .map(|_| {
            let x = uniform_point(&mut rng, model.d);
            let y = u8::from(rng.random::<f64>() < eta(&x));
            LabeledSample { x, y }
        })
        .collect();
    SampleSet {
        d: model.d,
        samples,
    }
}

fn source_stream(source: RandomSource, i: usize) -> RandomSource {
    source.fork_named("p-data").fork(i as u64)
}

/// Draws `n_p` source samples under `η_P` and `n_q` target samples under `η_Q`.
pub fn sample_dataset(
    model: &DriftModel,
    n_p: usize,
    n_q: usize,
    source: RandomSource,
) -> TransferDataset<f64> {
    TransferDataset {
        p_data: draw_set(model, n_p, source_stream(source, 0), |x| model.eta_p(x)),
        q_data: draw_set(model, n_q, source.fork_named("q-data"), |x| model.eta_q(x)),
    }
}

/// Draws one sample per source, source `i` using `η_Pi = 1/2 + (η_Q - 1/2)^γ_i`.
///
/// Source 0 and the target use the same streams as [`sample_dataset`].
pub fn sample_multisource(
    model: &DriftModel,
    gammas: &[f64],
    sizes: &[usize],
    n_q: usize,
    source: RandomSource,
) -> Result<MultiSourceDataset<f64>> {
    if gammas.len() != sizes.len() || sizes.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} gammas for {} sources",
            gammas.len(),
            sizes.len()
        )));
    }
    let sources = gammas
        .iter()
        .zip(sizes)
        .enumerate()
        .map(|(i, (&g, &n))| {
            draw_set(model, n, source_stream(source, i), |x| {
                model.eta_p_with(g, x)
            })
        })
        .collect();
    Ok(MultiSourceDataset {
        sources,
        q_data: draw_set(model, n_q, source.fork_named("q-data"), |x| model.eta_q(x)),
    })
}

/// `n` points uniform in the Euclidean ball `B(center, radius)`, by rejection
/// from the bounding cube.
pub fn sample_test_points(
    center: &[f64],
    radius: f64,
    n: usize,
    source: RandomSource,
) -> Result<Vec<Vec<f64>>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius = {radius} must be positive"
        )));
    }
    let mut rng = source.rng();
    let r2 = radius * radius;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x: Vec<f64> = center
            .iter()
            .map(|&c| c + radius * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        if squared_distance(&x, center) <= r2 {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_source() {
        let m = DriftModel::centered(0.55, 0.3, 2).unwrap();
        let ds = sample_dataset(&m, 0, 10, RandomSource::new(1));
        assert_eq!((ds.n_p(), ds.n_q()), (0, 10));
        assert!(ds
            .q_data
            .iter()
            .all(|s| s.x.iter().all(|v| (0.0..1.0).contains(v))));
    }

    #[test]
    fn deterministic() {
        let m = DriftModel::centered(0.55, 0.3, 2).unwrap();
        let a = sample_dataset(&m, 50, 50, RandomSource::new(9));
        let b = sample_dataset(&m, 50, 50, RandomSource::new(9));
        assert_eq!(a, b);
        let c = sample_dataset(&m, 50, 50, RandomSource::new(10));
        assert_ne!(a, c);
    }

    #[test]
    fn multisource_matches_single_for_first_source() {
        let m = DriftModel::centered(0.6, 0.3, 2).unwrap();
        let rs = RandomSource::new(4);
        let single = sample_dataset(&m, 40, 30, rs);
        let multi = sample_multisource(&m, &[0.3, 0.3], &[40, 25], 30, rs).unwrap();
        assert_eq!(multi.sources[0], single.p_data);
        assert_eq!(multi.q_data, single.q_data);
        assert_ne!(multi.sources[1].samples[..25], single.p_data.samples[..25]);
    }

    #[test]
    fn ball_support() {
        let pts = sample_test_points(&[0.5, 0.5], 0.05, 2000, RandomSource::new(2)).unwrap();
        assert!(pts
            .iter()
            .all(|p| squared_distance(p, &[0.5, 0.5]).sqrt() <= 0.05));
        assert!(sample_test_points(&[0.5], 0.0, 1, RandomSource::new(2)).is_err());
    }
}
