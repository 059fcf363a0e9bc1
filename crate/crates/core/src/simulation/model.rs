use serde::{Deserialize, Serialize};

use crate::classifiers::TargetRegression;
use crate::error::{Error, Result};
use crate::neighbors::squared_distance;

/// Posterior-drift pair with a cone-shaped target regression function.
///
/// `η_Q(x) = max(p_max - ‖x - x_c‖, 1/2)` and
/// `η_P(x) = 1/2 + (η_Q(x) - 1/2)^γ`; both marginals are uniform on `[0,1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftModel {
    pub d: usize,
    pub x_c: Vec<f64>,
    pub p_max: f64,
    pub gamma_sim: f64,
}

pub fn make_drift_model(p_max: f64, gamma_sim: f64, d: usize, x_c: Vec<f64>) -> Result<DriftModel> {
    if !(p_max > 0.5 && p_max <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p_max = {p_max} must lie in (0.5, 1]"
        )));
    }
    if !(gamma_sim > 0.0 && gamma_sim.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma_sim} must be positive"
        )));
    }
    if d == 0 || x_c.len() != d {
        return Err(Error::InvalidParameter(format!(
            "center has {} coordinates, expected d = {d}",
            x_c.len()
        )));
    }
    if x_c.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidParameter("center must lie in [0,1]^d".into()));
    }
    Ok(DriftModel {
        d,
        x_c,
        p_max,
        gamma_sim,
    })
}

impl DriftModel {
    /// The simulation model with the center of the unit square (cube).
    pub fn centered(p_max: f64, gamma_sim: f64, d: usize) -> Result<Self> {
        make_drift_model(p_max, gamma_sim, d, vec![0.5; d])
    }

    /// Radius of the region where `η_Q > 1/2`.
    pub fn signal_radius(&self) -> f64 {
        self.p_max - 0.5
    }

    pub fn eta_q(&self, x: &[f64]) -> f64 {
        let r = squared_distance(x, &self.x_c).sqrt();
        (self.p_max - r).max(0.5)
    }

    pub fn eta_p(&self, x: &[f64]) -> f64 {
        self.eta_p_with(self.gamma_sim, x)
    }

    /// Source regression function for a given relative signal exponent.
    pub fn eta_p_with(&self, gamma: f64, x: &[f64]) -> f64 {
        0.5 + (self.eta_q(x) - 0.5).powf(gamma)
    }

    /// `2|η_Q(x) - 1/2|`: the excess-risk weight of a wrong decision at `x`.
    pub fn risk_weight(&self, x: &[f64]) -> f64 {
        2.0 * (self.eta_q(x) - 0.5).abs()
    }

    /// `E[2|η_Q(X) - 1/2|]` under the uniform marginal, valid while the
    /// signal ball stays inside the unit cube. Only implemented for `d = 2`.
    pub fn max_excess_risk_2d(&self) -> Option<f64> {
        let r0 = self.signal_radius();
        let inside = self.x_c.iter().all(|&c| c - r0 >= 0.0 && c + r0 <= 1.0);
        (self.d == 2 && inside).then(|| 2.0 * std::f64::consts::PI / 3.0 * r0.powi(3))
    }
}

impl TargetRegression<f64> for DriftModel {
    fn eta_q(&self, x: &[f64]) -> f64 {
        DriftModel::eta_q(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::bayes_classify;

    #[test]
    fn center_values() {
        let m = DriftModel::centered(0.55, 0.3, 2).unwrap();
        assert!((m.eta_q(&[0.5, 0.5]) - 0.55).abs() < 1e-15);
        // 0.5 + 0.05^0.3
        assert!((m.eta_p(&[0.5, 0.5]) - 0.907_090_531_536_904_4).abs() < 1e-12);
    }

    #[test]
    fn plateau() {
        let m = DriftModel::centered(0.55, 0.3, 2).unwrap();
        for x in [[0.5, 0.56], [0.9, 0.1], [0.5 + 0.05, 0.5]] {
            assert_eq!(m.eta_q(&x), 0.5);
            assert_eq!(m.eta_p(&x), 0.5);
            assert_eq!(bayes_classify(&m, &x), 0);
        }
    }

    #[test]
    fn identity_link() {
        let m = DriftModel::centered(0.8, 1.0, 3).unwrap();
        for x in [[0.5, 0.5, 0.5], [0.4, 0.6, 0.5], [0.1, 0.2, 0.3]] {
            assert!((m.eta_p(&x) - m.eta_q(&x)).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DriftModel::centered(0.5, 0.3, 2).is_err());
        assert!(DriftModel::centered(1.01, 0.3, 2).is_err());
        assert!(DriftModel::centered(0.6, 0.0, 2).is_err());
        assert!(make_drift_model(0.6, 0.3, 2, vec![0.5]).is_err());
        assert!(make_drift_model(0.6, 0.3, 2, vec![0.5, 1.5]).is_err());
    }
}
