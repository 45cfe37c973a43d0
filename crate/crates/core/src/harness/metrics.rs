//! Error metrics and estimate-to-truth alignment.

use itertools::Itertools;

use crate::channel::{self, PathParams};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::estimator::PathEstimate;
use crate::C64;

/// `||p - p_hat||^2 / ||p||^2`.
pub fn nmse(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    let num: f64 = truth.iter().zip(estimate).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = truth.iter().map(|a| a * a).sum();
    ratio(num, den)
}

pub fn nmse_complex(truth: &[C64], estimate: &[C64]) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    let num: f64 = truth.iter().zip(estimate).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = truth.iter().map(|a| a.norm_sqr()).sum();
    ratio(num, den)
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch(format!("{a} reference values vs {b} estimates")));
    }
    Ok(())
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(num / den)
}

/// `10 log10(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Permutation `perm` with `estimates[perm[i]]` assigned to `truth[i]`,
/// minimizing the total absolute delay error. Exhaustive, so meant for
/// small path counts.
pub fn match_paths(truth: &[PathParams], estimates: &[PathEstimate]) -> Result<Vec<usize>> {
    check_len(truth.len(), estimates.len())?;
    let n = truth.len();
    let mut best = (f64::INFINITY, (0..n).collect::<Vec<_>>());
    for perm in (0..n).permutations(n) {
        let cost: f64 = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| (truth[i].delay() - estimates[j].delay).abs())
            .sum();
        if cost < best.0 {
            best = (cost, perm);
        }
    }
    Ok(best.1)
}

/// Estimates reordered to line up with `truth`.
pub fn aligned(truth: &[PathParams], estimates: &[PathEstimate]) -> Result<Vec<PathEstimate>> {
    Ok(match_paths(truth, estimates)?
        .into_iter()
        .map(|j| estimates[j])
        .collect())
}

/// NMSE of the reconstructed overall channel. No alignment is needed since
/// the channel sums over paths.
pub fn channel_nmse(truth: &[PathParams], estimate: &[PathParams], cfg: &ScenarioConfig) -> Result<f64> {
    let h = channel::overall_channel(truth, cfg);
    let h_hat = channel::overall_channel(estimate, cfg);
    nmse_complex(h.as_slice(), h_hat.as_slice())
}

/// Squared error and squared reference norm for each parameter family, with
/// the estimates already aligned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyErrors {
    pub sq_err: [f64; 5],
    pub sq_ref: [f64; 5],
}

pub fn family_errors(truth: &[PathParams], aligned: &[PathEstimate]) -> FamilyErrors {
    let mut sq_err = [0.0; 5];
    let mut sq_ref = [0.0; 5];
    for (p, e) in truth.iter().zip(aligned) {
        let pairs = [
            (p.theta, e.theta),
            (p.phi, e.phi),
            (p.psi, e.psi),
            (p.delay(), e.delay),
        ];
        for (k, (a, b)) in pairs.into_iter().enumerate() {
            sq_err[k] += (a - b).powi(2);
            sq_ref[k] += a * a;
        }
        sq_err[4] += (p.gain - e.gain).norm_sqr();
        sq_ref[4] += p.gain.norm_sqr();
    }
    FamilyErrors { sq_err, sq_ref }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nmse_examples() {
        assert_eq!(nmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(nmse(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(nmse(&[1.0, 1.0], &[1.0, 0.0]).unwrap(), 0.5);
        assert!(matches!(nmse(&[0.0], &[1.0]), Err(Error::ZeroReference)));
        assert!((to_db(0.1) + 10.0).abs() < 1e-12);
    }

    #[test]
    fn matching_recovers_permutation() {
        let truth: Vec<PathParams> = [2.0, 4.0, 3.0]
            .iter()
            .map(|&u| PathParams {
                theta: 1.0,
                phi: 0.0,
                psi: 0.0,
                distance: u,
                gain: C64::new(1.0, 0.0),
            })
            .collect();
        let est: Vec<PathEstimate> = [3.01, 2.02, 3.98]
            .iter()
            .map(|&u| PathEstimate {
                theta: 1.0,
                phi: 0.0,
                psi: 0.0,
                delay: u / crate::SPEED_OF_LIGHT,
                distance: u,
                gain: C64::new(1.0, 0.0),
            })
            .collect();
        assert_eq!(match_paths(&truth, &est).unwrap(), vec![1, 2, 0]);
    }
}
